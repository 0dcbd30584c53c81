use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::solver::Snapshot;

#[derive(Debug, Clone)]
pub struct Reflection {
    /// `V_λ p(x) = p(2λ - x) - p(x)` on the largest grid symmetric about `λ`.
    pub profile: Profile,
    /// `λ` after snapping to the nearest node.
    pub lambda: f64,
    pub snap_distance: f64,
}

pub fn reflect_diff(p: &Profile, lambda: f64) -> Result<Reflection> {
    let grid = p.grid();
    if !(lambda > grid.x_min() && lambda < grid.x_max()) {
        return Err(Error::Argument(format!(
            "λ = {lambda} is outside ({}, {})",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let c = grid.nearest(lambda).expect("inside the grid");
    let half = c.min(p.len() - 1 - c);
    if half == 0 {
        return Err(Error::Argument(format!("λ = {lambda} snaps to a boundary node")));
    }
    let v = p.values();
    let values = (c - half..=c + half).map(|j| v[2 * c - j] - v[j]).collect();
    let lam = grid.x(c);
    Ok(Reflection {
        profile: Profile::new_unchecked(grid.slice(c - half, c + half), values),
        lambda: lam,
        snap_distance: (lam - lambda).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VlambdaPoint {
    pub t: f64,
    pub sup: f64,
    pub sup_dx: f64,
}

impl VlambdaPoint {
    pub fn c1(&self) -> f64 {
        self.sup + self.sup_dx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VlambdaSeries {
    pub lambda: f64,
    pub half_window: f64,
    pub points: Vec<VlambdaPoint>,
    pub peak: f64,
    pub last: f64,
    /// Last C¹ value at most 5% of the peak.
    pub decayed: bool,
}

/// Local C¹ size of `V_λ u(·, t)` on `|x - λ| ≤ half_window` along a run.
pub fn vlambda_decay(snapshots: &[Snapshot], lambda: f64, half_window: f64) -> Result<VlambdaSeries> {
    let mut points = Vec::with_capacity(snapshots.len());
    let mut lam = lambda;
    for s in snapshots {
        let r = reflect_diff(&s.profile, lambda)?;
        lam = r.lambda;
        let d = r.profile.derivative();
        let mut sup: f64 = 0.0;
        let mut sup_dx: f64 = 0.0;
        for j in 0..r.profile.len() {
            if (r.profile.x(j) - lam).abs() <= half_window + 1e-9 {
                sup = sup.max(r.profile.values()[j].abs());
                sup_dx = sup_dx.max(d[j].abs());
            }
        }
        points.push(VlambdaPoint { t: s.t, sup, sup_dx });
    }
    let peak = points.iter().fold(0.0f64, |m, p| m.max(p.c1()));
    let last = points.last().map(|p| p.c1()).unwrap_or(0.0);
    Ok(VlambdaSeries {
        lambda: lam,
        half_window,
        points,
        peak,
        last,
        decayed: last <= 0.05 * peak,
    })
}
