//! Atomic artifact writes and CSV formatting.

use std::fs;
use std::io::Write;
use std::path::Path;

use sparse_ias::solver::{IasState, SolveReport};

use crate::CliError;

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

/// Full-precision scientific notation (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `frame,index,value,theta,theta_scaled` with `theta_scaled = θ_j / ϑ⁽²⁾_j`.
pub fn alpha_csv(state: &IasState, names: &[String], lengths: &[usize]) -> String {
    let scaled = state.scaled_theta();
    let mut out = String::from("frame,index,value,theta,theta_scaled\n");
    let mut j = 0;
    for (name, &len) in names.iter().zip(lengths) {
        for i in 0..len {
            out.push_str(&format!(
                "{name},{i},{},{},{}\n",
                num(state.alpha[j]),
                num(state.theta[j]),
                num(scaled[j])
            ));
            j += 1;
        }
    }
    out
}

/// `iteration,objective,cgls_count,residual`, one row per outer iteration.
pub fn trace_csv(report: &SolveReport) -> String {
    let mut out = String::from("iteration,objective,cgls_count,residual\n");
    for (k, ((f, c), r)) in report
        .objective_trace
        .iter()
        .zip(&report.cgls_counts)
        .zip(&report.data_residual)
        .enumerate()
    {
        out.push_str(&format!("{},{},{c},{}\n", k + 1, num(*f), num(*r)));
    }
    out
}

/// Columns of equal length under a header row.
pub fn columns_csv(header: &[&str], columns: &[&[f64]]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| c.get(i).map_or(String::new(), |v| num(*v))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nope").join("a.txt");
        assert!(matches!(write_atomic(&p, b"x"), Err(CliError::Io(_))));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(columns_csv(&["a", "b"], &[&[1.0], &[]]), "a,b\n1.0000000000000000e0,\n");
    }
}
