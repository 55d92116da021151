//! Driver behind the `sparse-ias` binary: configuration, experiment runs and
//! artifact emission.

pub mod config;
pub mod output;
pub mod plot;

use std::path::Path;

use rayon::prelude::*;
use sparse_ias::experiments::formats::{encode_pgm, read_matrix, read_pgm};
use sparse_ias::experiments::{
    frame_report, make_deconv1d, make_denoise_image, make_dictlearn_with, make_restore2d, psnr, restore_scene,
    blocky_image, mixed_texture_image, Deconv1dSpec, DigitSet, Experiment, ExperimentName, SupportRule,
};
use sparse_ias::solver::{AlphaMode, IasOptions};

pub use config::{Emit, Overrides, RunConfig};
use output::{alpha_csv, columns_csv, num, trace_csv, write_atomic};
use plot::{emit_plot, PlotKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<sparse_ias::Error> for CliError {
    fn from(e: sparse_ias::Error) -> Self {
        match e {
            sparse_ias::Error::Io(e) => CliError::Io(e.to_string()),
            sparse_ias::Error::Format(m) => CliError::Config(format!("malformed input: {m}")),
            other => CliError::Solver(other.to_string()),
        }
    }
}

/// Caps rayon parallelism from `SPARSE_IAS_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SPARSE_IAS_THREADS") else { return Ok(()) };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::Config(format!("SPARSE_IAS_THREADS must be a positive integer, got {v:?}")))?;
    // a pool built earlier in the process wins; that is fine for tests
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs one experiment and writes its artifacts; returns summary lines.
pub fn run(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    cfg.validate()?;
    if !cfg.out.is_dir() {
        return Err(CliError::Io(format!("output directory {} does not exist", cfg.out.display())));
    }
    match cfg.spec.name {
        ExperimentName::DictLearn => run_dictlearn(cfg),
        _ => run_inverse(cfg),
    }
}

fn options(cfg: &RunConfig) -> IasOptions {
    IasOptions {
        nonneg_projection: cfg.nonneg,
        alpha_mode: if cfg.exact_alpha { AlphaMode::Exact } else { AlphaMode::QuasiMap },
        ..IasOptions::default()
    }
}

fn load_image(path: &Path) -> Result<(Vec<f64>, usize), CliError> {
    let img = read_pgm(path)?;
    if img.rows != img.cols {
        return Err(CliError::Config(format!("image must be square, got {} x {}", img.rows, img.cols)));
    }
    Ok((img.pixels, img.rows))
}

/// The generated problem and the config with sizes resolved from inputs.
fn build(cfg: &RunConfig) -> Result<(Experiment, RunConfig), CliError> {
    let mut resolved = cfg.clone();
    let s = &cfg.spec;
    let width = || s.blur_width.ok_or_else(|| CliError::Config("w is required".into()));
    let image = match &cfg.image {
        Some(p) if s.name == ExperimentName::Deconv1d => {
            return Err(CliError::Config(format!("deconv1d takes no image ({})", p.display())))
        }
        Some(p) => {
            let (pixels, n) = load_image(p)?;
            resolved.spec.n = n;
            Some(pixels)
        }
        None => None,
    };
    let n = resolved.spec.n;
    let e = match s.name {
        ExperimentName::Deconv1d => make_deconv1d(&Deconv1dSpec {
            n,
            n_dense: s.n_dense,
            m: s.m,
            width: width()?,
            noise_frac: s.noise_frac,
            seed: s.seed,
        })?,
        ExperimentName::Denoise2d | ExperimentName::Natural2d => {
            let clean = image.unwrap_or_else(|| match s.name {
                ExperimentName::Denoise2d => blocky_image(n),
                _ => mixed_texture_image(n),
            });
            make_denoise_image(s.name, clean, n, s.noise_frac, s.seed)?
        }
        ExperimentName::Restore2d => {
            make_restore2d(n, width()?, s.noise_frac, s.seed, Some(image.unwrap_or_else(|| restore_scene(n).total())))?
        }
        ExperimentName::DictLearn => unreachable!("dictlearn has its own driver"),
    };
    Ok((e, resolved))
}

fn manifest(cfg: &RunConfig, resolved: &[(String, String)]) -> String {
    let mut text = cfg.to_canonical();
    text.push_str("# resolved\n");
    for (k, v) in resolved {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    text
}

fn run_inverse(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let (e, resolved_cfg) = build(cfg)?;
    let problem = e.whitened_problem()?;
    let run = cfg.spec.hyper.solve(&problem, &cfg.spec.stop, &options(cfg))?;
    let report = &run.report;
    let alpha = &report.final_state.alpha;
    let dict = &e.dictionary;
    let names = dict.names().to_vec();
    let frames = frame_report(alpha, dict, SupportRule::default())?;
    let recon = dict.synthesize(alpha)?;
    let out = &cfg.out;

    let mut lines = vec![format!(
        "{}: {} outer iterations, switch after {}",
        e.name.as_str(),
        report.iterations(),
        report.switch_iteration.map_or("none".to_string(), |k| k.to_string())
    )];
    let mut resolved = vec![
        ("noise_std".to_string(), num(e.noise_std)),
        ("atoms".to_string(), dict.atom_count().to_string()),
        ("iterations".to_string(), report.iterations().to_string()),
        ("switch_iteration".to_string(), report.switch_iteration.map_or("none".to_string(), |k| k.to_string())),
        ("final_objective".to_string(), report.objective_trace.last().map_or("none".to_string(), |f| num(*f))),
    ];
    for f in &frames {
        lines.push(format!("  frame {:<10} support {:>6}  |W a| = {:.3e}", f.name, f.support, f.contribution_norm));
        resolved.push((format!("support_{}", f.name), f.support.to_string()));
        resolved.push((format!("contribution_norm_{}", f.name), num(f.contribution_norm)));
    }
    if e.image_shape.is_some() {
        let p = psnr(&e.clean, &recon)?;
        lines.push(format!("  psnr {p:.2} dB"));
        resolved.push(("psnr".to_string(), num(p)));
    }

    if cfg.emit.csv {
        write_atomic(&out.join("alpha.csv"), alpha_csv(&report.final_state, &names, &dict.frame_lengths()).as_bytes())?;
        write_atomic(&out.join("trace.csv"), trace_csv(report).as_bytes())?;
        let mut header = vec!["clean", "reconstruction"];
        header.extend(names.iter().map(String::as_str));
        let mut cols: Vec<&[f64]> = vec![&e.clean, &recon];
        cols.extend(frames.iter().map(|f| f.contribution.as_slice()));
        write_atomic(&out.join("signal.csv"), columns_csv(&header, &cols).as_bytes())?;
        write_atomic(&out.join("data.csv"), columns_csv(&["data"], &[&e.data]).as_bytes())?;
    }
    if let Some((rows, cols)) = e.image_shape {
        if cfg.emit.pgm {
            let mut images: Vec<(String, &[f64])> =
                vec![("clean".into(), &e.clean), ("reconstruction".into(), &recon)];
            if e.data.len() == rows * cols {
                images.push(("data".into(), &e.data));
            }
            for f in &frames {
                images.push((format!("contribution_{}", f.name), &f.contribution));
            }
            for (name, img) in images {
                write_atomic(&out.join(format!("{name}.pgm")), &encode_pgm(img, rows, cols, true)?)?;
            }
        }
        if cfg.emit.svg {
            for (k, name) in names.iter().enumerate() {
                emit_plot(&alpha[dict.range(k)], PlotKind::HistogramLog, &out.join(format!("hist_{name}.svg")))?;
            }
        }
    } else if cfg.emit.svg {
        emit_plot(&recon, PlotKind::Line, &out.join("reconstruction.svg"))?;
        for (k, name) in names.iter().enumerate() {
            emit_plot(&alpha[dict.range(k)], PlotKind::Stem, &out.join(format!("alpha_{name}.svg")))?;
        }
    }
    write_atomic(&out.join("manifest.txt"), manifest(&resolved_cfg, &resolved).as_bytes())?;
    Ok(lines)
}

fn digit_set(path: &Option<std::path::PathBuf>, synthetic: DigitSet) -> Result<DigitSet, CliError> {
    match path {
        Some(p) => Ok(read_matrix(p)?.to_digit_set()?),
        None => Ok(synthetic),
    }
}

struct DigitOutcome {
    label: u8,
    predicted: Option<u8>,
    tie: bool,
    active: usize,
    histogram: [usize; 10],
    report: sparse_ias::solver::SolveReport,
}

fn run_dictlearn(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let s = &cfg.spec;
    let (syn_atoms, syn_tests) = s.digits();
    let atoms = digit_set(&cfg.atoms, syn_atoms)?;
    let tests = digit_set(&cfg.tests, syn_tests)?;
    if tests.pixel_count() != atoms.pixel_count() && !tests.is_empty() {
        return Err(CliError::Config(format!(
            "test digits have {} pixels, atoms {}",
            tests.pixel_count(),
            atoms.pixel_count()
        )));
    }
    let sigma = s.noise_frac;
    let opts = options(cfg);
    let outcomes: Vec<DigitOutcome> = tests
        .images
        .par_iter()
        .zip(tests.labels.par_iter())
        .map(|(img, &label)| {
            let mut dp = make_dictlearn_with(&atoms, img, sigma, &s.hyper, &s.stop)?;
            dp.options = opts;
            let report = dp.solve()?;
            let (predicted, tie, active, histogram) = match dp.classify(&report.final_state.alpha, cfg.tau) {
                Ok(c) => (Some(c.predicted_label), c.tie, c.active_atoms.len(), c.vote_histogram),
                Err(sparse_ias::Error::Classification(_)) => (None, false, 0, [0; 10]),
                Err(e) => return Err(e),
            };
            Ok(DigitOutcome { label, predicted, tie, active, histogram, report })
        })
        .collect::<sparse_ias::Result<_>>()?;

    let out = &cfg.out;
    let count = outcomes.len().max(1) as f64;
    let correct = outcomes.iter().filter(|o| o.predicted == Some(o.label)).count();
    let accuracy = correct as f64 / count;
    let mean_active = outcomes.iter().map(|o| o.active).sum::<usize>() as f64 / count;
    let lines = vec![format!(
        "dictlearn: sigma {sigma}, {} test digits, accuracy {accuracy:.3}, mean active atoms {mean_active:.2}",
        outcomes.len()
    )];

    let side = (atoms.pixel_count() as f64).sqrt().round() as usize;
    let square = side * side == atoms.pixel_count();
    if cfg.emit.csv {
        let mut table = String::from("test,label,predicted,tie,active,iterations");
        for k in 0..10 {
            table.push_str(&format!(",votes_{k}"));
        }
        table.push('\n');
        for (k, o) in outcomes.iter().enumerate() {
            let pred = o.predicted.map_or("none".to_string(), |p| p.to_string());
            table.push_str(&format!("{k},{},{pred},{},{},{}", o.label, o.tie, o.active, o.report.iterations()));
            for v in o.histogram {
                table.push_str(&format!(",{v}"));
            }
            table.push('\n');
        }
        write_atomic(&out.join("classification.csv"), table.as_bytes())?;
        let names = ["atoms".to_string()];
        for (k, o) in outcomes.iter().enumerate() {
            let a = alpha_csv(&o.report.final_state, &names, &[atoms.len()]);
            write_atomic(&out.join(format!("alpha_{k:03}.csv")), a.as_bytes())?;
            write_atomic(&out.join(format!("trace_{k:03}.csv")), trace_csv(&o.report).as_bytes())?;
        }
    }
    if cfg.emit.pgm && square {
        let w = atoms.to_matrix()?;
        for (k, (o, img)) in outcomes.iter().zip(&tests.images).enumerate() {
            let synth = w.apply(&o.report.final_state.alpha)?;
            write_atomic(&out.join(format!("test_{k:03}.pgm")), &encode_pgm(img, side, side, true)?)?;
            write_atomic(&out.join(format!("synthesis_{k:03}.pgm")), &encode_pgm(&synth, side, side, true)?)?;
        }
    }
    if cfg.emit.svg {
        for (k, o) in outcomes.iter().enumerate() {
            emit_plot(&o.report.final_state.alpha, PlotKind::Stem, &out.join(format!("alpha_{k:03}.svg")))?;
        }
    }
    let resolved = vec![
        ("atoms".to_string(), atoms.len().to_string()),
        ("pixels".to_string(), atoms.pixel_count().to_string()),
        ("tests".to_string(), outcomes.len().to_string()),
        ("accuracy".to_string(), num(accuracy)),
        ("mean_active".to_string(), num(mean_active)),
    ];
    write_atomic(&out.join("manifest.txt"), manifest(cfg, &resolved).as_bytes())?;
    Ok(lines)
}
