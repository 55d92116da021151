use crate::error::{Error, Result};
use crate::linops::LinearMap;

/// Whitens i.i.d. Gaussian noise of standard deviation `noise_std`:
/// `A → A/σ`, `b → b/σ`. Afterwards the expected residual norm of the
/// true signal is about `sqrt(m)`.
pub fn whiten(a: &LinearMap, b: &[f64], noise_std: f64) -> Result<(LinearMap, Vec<f64>)> {
    if !(noise_std > 0.0) || !noise_std.is_finite() {
        return Err(Error::domain(format!("noise level must be positive, got {noise_std}")));
    }
    crate::error::check_len(b.len(), a.rows())?;
    if noise_std == 1.0 {
        return Ok((a.clone(), b.to_vec()));
    }
    let inv = 1.0 / noise_std;
    let map = LinearMap::scale_rows(a, &vec![inv; a.rows()])?;
    Ok((map, b.iter().map(|v| v * inv).collect()))
}
