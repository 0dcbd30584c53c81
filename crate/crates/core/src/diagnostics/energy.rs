use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::nonlinearity::NonlinearitySpec;
use crate::solver::Snapshot;

/// Trapezoidal `∫_{-R}^{R} (p'²/2 - F(p)) dx` with centered `p'`.
pub fn energy_window(p: &Profile, spec: &NonlinearitySpec, r: f64) -> Result<f64> {
    let grid = p.grid();
    if !(r > 0.0) || -r < grid.x_min() || r > grid.x_max() {
        return Err(Error::Argument(format!(
            "window (-{r}, {r}) must lie inside [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let (a, b) = grid.index_range(-r, r).expect("window inside the grid");
    let d = p.derivative();
    let v = p.values();
    let density = |j: usize| 0.5 * d[j] * d[j] - spec.antideriv(v[j]);
    let mut sum = 0.5 * (density(a) + density(b));
    for j in a + 1..b {
        sum += density(j);
    }
    Ok(sum * grid.dx())
}

pub fn energy_series(snapshots: &[Snapshot], spec: &NonlinearitySpec, r: f64) -> Result<Vec<(f64, f64)>> {
    snapshots
        .iter()
        .map(|s| Ok((s.t, energy_window(&s.profile, spec, r)?)))
        .collect()
}
