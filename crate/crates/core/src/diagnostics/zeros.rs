use serde::{Deserialize, Serialize};

use crate::diagnostics::reflection::reflect_diff;
use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::solver::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    Simple,
    Multiple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub x: f64,
    pub kind: ZeroKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub t: f64,
    pub interval: (f64, f64),
    pub count: usize,
    pub zeros: Vec<Zero>,
    /// Some zero lies within one cell of an interval endpoint.
    pub truncated: bool,
}

impl ZeroReport {
    pub fn has_multiple(&self) -> bool {
        self.zeros.iter().any(|z| z.kind == ZeroKind::Multiple)
    }

    fn near_endpoint(&self, dist: f64) -> bool {
        self.zeros
            .iter()
            .any(|z| z.x - self.interval.0 <= dist || self.interval.1 - z.x <= dist)
    }
}

/// Tolerances relative to `scale = sup |p|` on the interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTolerances {
    /// Hysteresis band for sign changes.
    pub value: f64,
    /// Slope threshold (per unit `x`) for multiple zeros.
    pub slope: f64,
}

impl Default for ZeroTolerances {
    fn default() -> Self {
        ZeroTolerances {
            value: 1e-9,
            slope: 1e-6,
        }
    }
}

/// Count sign changes of `p` on `interval` with a hysteresis band. A run of
/// nodes inside the band where the centered slope is also below threshold is
/// one multiple zero, whether or not the sign changes across it.
pub fn count_zeros(p: &Profile, interval: (f64, f64), tols: ZeroTolerances) -> Result<ZeroReport> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::Argument(format!("empty interval ({a}, {b})")));
    }
    let grid = p.grid();
    let (j0, j1) = grid
        .index_range(a, b)
        .ok_or_else(|| Error::Argument(format!("interval ({a}, {b}) misses the grid")))?;
    if a < grid.x_min() - 1e-9 * grid.dx() || b > grid.x_max() + 1e-9 * grid.dx() {
        return Err(Error::Argument(format!(
            "interval ({a}, {b}) is not inside [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let v = p.values();
    let scale = v[j0..=j1].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::IdenticallyZero { lo: a, hi: b });
    }
    let tol_v = tols.value * scale;
    let tol_d = tols.slope * scale;
    let dx = grid.dx();
    let slope = |j: usize| -> f64 {
        let l = if j > 0 { j - 1 } else { j };
        let r = if j + 1 < v.len() { j + 1 } else { j };
        (v[r] - v[l]) / ((r - l) as f64 * dx)
    };

    let mut zeros = Vec::new();
    let mut last_sig: Option<(usize, bool)> = None;
    let mut j = j0;
    while j <= j1 {
        if v[j].abs() > tol_v {
            let pos = v[j] > 0.0;
            if let Some((k, prev_pos)) = last_sig {
                if prev_pos != pos {
                    let multiple = (k + 1..j).any(|i| slope(i).abs() < tol_d);
                    zeros.push(Zero {
                        x: locate(p, k, j),
                        kind: if multiple {
                            ZeroKind::Multiple
                        } else {
                            ZeroKind::Simple
                        },
                    });
                }
            }
            last_sig = Some((j, pos));
            j += 1;
            continue;
        }
        // run of nodes inside the band
        let start = j;
        while j <= j1 && v[j].abs() <= tol_v {
            j += 1;
        }
        let end = j - 1;
        let closes = j <= j1 && last_sig.is_some();
        if closes {
            let (_, prev_pos) = last_sig.unwrap();
            let same_side = (v[j] > 0.0) == prev_pos;
            let flat = (start..=end).find(|&i| slope(i).abs() < tol_d);
            if same_side {
                if let Some(i) = flat {
                    zeros.push(Zero {
                        x: grid.x(i),
                        kind: ZeroKind::Multiple,
                    });
                }
            }
        }
    }
    let truncated = zeros
        .iter()
        .any(|z| z.x - a <= dx || b - z.x <= dx);
    Ok(ZeroReport {
        t: 0.0,
        interval,
        count: zeros.len(),
        zeros,
        truncated,
    })
}

/// Position of the sign change between significant nodes `k < j`.
fn locate(p: &Profile, k: usize, j: usize) -> f64 {
    let v = p.values();
    for i in k..j {
        if v[i] == 0.0 {
            return p.x(i);
        }
        if (v[i] > 0.0) != (v[i + 1] > 0.0) || v[i + 1] == 0.0 {
            if v[i + 1] == 0.0 {
                return p.x(i + 1);
            }
            let w = v[i] / (v[i] - v[i + 1]);
            return p.x(i) + w * p.grid().dx();
        }
    }
    0.5 * (p.x(k) + p.x(j))
}

/// The second function in `u(·, t) - companion(t)`.
#[derive(Debug, Clone, Copy)]
pub enum Companion<'a> {
    Zero,
    /// A fixed profile, typically a steady state `ψ`.
    Fixed(&'a Profile),
    /// Another run, matched snapshot by snapshot (equal step indices).
    Run(&'a [Snapshot]),
    /// The reflection transform `V_λ u` about `λ` (the difference is with the
    /// mirrored solution).
    Reflection(f64),
    /// The recorded increments `(u^n - u^{n-1})/dt`.
    TimeDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroHistory {
    pub reports: Vec<ZeroReport>,
    /// Snapshot times where the difference vanished identically on the interval.
    pub degenerate: Vec<f64>,
    /// Times where an endpoint value was inside the band (nonvanishing fails).
    pub endpoint_violations: Vec<f64>,
    /// Times left out of the audit because a zero was within two cells of an endpoint.
    pub near_endpoint: Vec<f64>,
    /// Consecutive audited times where an endpoint value changed sign, so the
    /// difference vanished there in between; not counted as increases.
    #[serde(default)]
    pub endpoint_crossings: Vec<(f64, f64)>,
    /// Consecutive audited times `(t_k, t_{k+1})` with a larger count at `t_{k+1}`.
    pub increases: Vec<(f64, f64)>,
    pub caveat: String,
}

impl ZeroHistory {
    pub fn monotone(&self) -> bool {
        self.increases.is_empty()
    }

    /// Times kept in the monotonicity audit.
    pub fn audited(&self) -> impl Iterator<Item = &ZeroReport> {
        self.reports.iter().filter(move |r| {
            !self.endpoint_violations.contains(&r.t) && !self.near_endpoint.contains(&r.t)
        })
    }
}

const CAVEAT: &str = "endpoint nonvanishing and zero counts are sampled at snapshot times only; \
an endpoint crossing is seen only as a sign change between snapshots";

pub fn zero_history(
    snapshots: &[Snapshot],
    companion: Companion<'_>,
    interval: (f64, f64),
    tols: ZeroTolerances,
) -> Result<ZeroHistory> {
    if let Companion::TimeDerivative = companion {
        if snapshots.iter().skip(1).any(|s| s.rate.is_none()) {
            return Err(Error::Precondition(
                "time-derivative companion needs snapshots recorded with rates".into(),
            ));
        }
    }
    if let Companion::Run(other) = companion {
        if other.len() != snapshots.len() {
            return Err(Error::Argument(format!(
                "companion run has {} snapshots, expected {}",
                other.len(),
                snapshots.len()
            )));
        }
    }
    let mut hist = ZeroHistory {
        reports: Vec::new(),
        degenerate: Vec::new(),
        endpoint_violations: Vec::new(),
        near_endpoint: Vec::new(),
        endpoint_crossings: Vec::new(),
        increases: Vec::new(),
        caveat: CAVEAT.to_string(),
    };
    let mut signs: Vec<(f64, [bool; 2])> = Vec::new();
    for (k, snap) in snapshots.iter().enumerate() {
        let diff = match companion {
            Companion::Zero => snap.profile.clone(),
            Companion::Fixed(psi) => snap.profile.difference(psi)?,
            Companion::Run(other) => snap.profile.difference(&other[k].profile)?,
            Companion::Reflection(lambda) => reflect_diff(&snap.profile, lambda)?.profile,
            Companion::TimeDerivative => match &snap.rate {
                Some(r) => Profile::new(*snap.profile.grid(), r.clone())?,
                None => continue,
            },
        };
        let mut report = match count_zeros(&diff, interval, tols) {
            Ok(r) => r,
            Err(Error::IdenticallyZero { .. }) => {
                hist.degenerate.push(snap.t);
                continue;
            }
            Err(e) => return Err(e),
        };
        report.t = snap.t;

        let grid = diff.grid();
        let (j0, j1) = grid.index_range(interval.0, interval.1).expect("checked by count_zeros");
        let v = diff.values();
        let scale = v[j0..=j1].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v[j0].abs() <= tols.value * scale || v[j1].abs() <= tols.value * scale {
            hist.endpoint_violations.push(snap.t);
        } else if report.near_endpoint(2.0 * grid.dx()) {
            hist.near_endpoint.push(snap.t);
        }
        signs.push((snap.t, [v[j0] > 0.0, v[j1] > 0.0]));
        hist.reports.push(report);
    }
    let audited: Vec<(f64, usize, [bool; 2])> = hist
        .audited()
        .map(|r| {
            let s = signs.iter().find(|(t, _)| *t == r.t).map(|(_, s)| *s).unwrap_or_default();
            (r.t, r.count, s)
        })
        .collect();
    for w in audited.windows(2) {
        if w[0].2 != w[1].2 {
            hist.endpoint_crossings.push((w[0].0, w[1].0));
        } else if w[1].1 > w[0].1 {
            hist.increases.push((w[0].0, w[1].0));
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn sine_has_three_interior_zeros() {
        let g = Grid::aligned(-1.0, 14.0, 0.01).unwrap();
        let p = Profile::from_fn(g, f64::sin);
        let r = count_zeros(&p, (0.0, 4.0 * PI), ZeroTolerances::default()).unwrap();
        assert_eq!(r.count, 3, "{r:?}");
        assert!(r.zeros.iter().all(|z| z.kind == ZeroKind::Simple));
        for (z, e) in r.zeros.iter().zip([PI, 2.0 * PI, 3.0 * PI]) {
            assert!((z.x - e).abs() < 1e-5);
        }
    }

    #[test]
    fn identically_zero_is_an_error() {
        let g = Grid::with_spacing(2.0, 0.1).unwrap();
        let p = Profile::constant(g, 0.0);
        assert!(matches!(
            count_zeros(&p, (-1.0, 1.0), ZeroTolerances::default()),
            Err(Error::IdenticallyZero { .. })
        ));
    }

    #[test]
    fn double_root_is_multiple() {
        let g = Grid::with_spacing(2.0, 0.1).unwrap();
        let p = Profile::from_fn(g, |x| x * x);
        let r = count_zeros(&p, (-1.0, 1.0), ZeroTolerances::default()).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.zeros[0].kind, ZeroKind::Multiple);
        assert_eq!(r.zeros[0].x, 0.0);
    }

    #[test]
    fn hysteresis_ignores_noise() {
        let g = Grid::with_spacing(5.0, 0.01).unwrap();
        let p = Profile::from_fn(g, |x| {
            if x.abs() > 2.0 {
                1e-12 * (1000.0 * x).sin()
            } else {
                x.cos()
            }
        });
        let r = count_zeros(&p, (-5.0, 5.0), ZeroTolerances::default()).unwrap();
        assert_eq!(r.count, 2);
        assert!(!r.truncated);
    }

    #[test]
    fn truncated_flag() {
        let g = Grid::with_spacing(5.0, 0.1).unwrap();
        let p = Profile::from_fn(g, |x| x - 0.95);
        let r = count_zeros(&p, (-1.0, 1.0), ZeroTolerances::default()).unwrap();
        assert_eq!(r.count, 1);
        assert!(r.truncated);
    }

    #[test]
    fn zero_entering_through_an_endpoint_is_not_an_increase() {
        let g = Grid::with_spacing(5.0, 0.01).unwrap();
        let snaps: Vec<Snapshot> = [0.0, 0.5, 1.0]
            .iter()
            .enumerate()
            .map(|(k, &c)| Snapshot {
                step: k as u64,
                t: c,
                profile: Profile::from_fn(g, |x| (x - 1.5 + c).sin()),
                theta: (0.0, 0.0),
                rate: None,
            })
            .collect();
        // zeros at 1.5 - c + k pi drift left; the next one enters through x = 4 after c = 0.64
        let h = zero_history(&snaps, Companion::Zero, (-1.0, 4.0), ZeroTolerances::default()).unwrap();
        assert!(h.monotone(), "{h:?}");
        assert_eq!(h.endpoint_crossings, vec![(0.5, 1.0)]);
        assert_eq!(h.reports[2].count, 2);
    }
}
