//! Late-time clustering into approximate ω-limit profiles, steady-state
//! classification against the phase plane, and the convergence verdicts.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{CaseKind, CaseTag};
use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::nonlinearity::NonlinearitySpec;
use crate::phase_plane::{self, classify_orbit, OrbitClass, PhasePoint};
use crate::solver::Snapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OmegaConfig {
    /// Half width `w` of the window `W = [-w, w]`.
    pub window: f64,
    pub late_fraction: f64,
    /// Relative to `scale`.
    pub cluster_tol: f64,
    /// Relative to `scale · (1 + Lip)`.
    pub residual_tol: f64,
    /// Oscillation below `constant_tol · scale` means constant.
    pub constant_tol: f64,
    /// Allowed spread of the Hamiltonian along the sampled trajectory.
    pub spread_tol: f64,
    /// Allowed distance of `|φ'|` from the level curve of the matched orbit.
    pub containment_tol: f64,
    /// `max(1, sup |u₀|)`.
    pub scale: f64,
}

impl Default for OmegaConfig {
    fn default() -> Self {
        OmegaConfig {
            window: 15.0,
            late_fraction: 0.3,
            cluster_tol: 1e-3,
            residual_tol: 1e-4,
            constant_tol: 1e-6,
            spread_tol: 1e-6,
            containment_tol: 1e-4,
            scale: 1.0,
        }
    }
}

impl OmegaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega.window", self.window),
            ("omega.cluster_tol", self.cluster_tol),
            ("omega.residual_tol", self.residual_tol),
            ("omega.constant_tol", self.constant_tol),
            ("omega.spread_tol", self.spread_tol),
            ("omega.containment_tol", self.containment_tol),
            ("omega.scale", self.scale),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.late_fraction > 0.0 && self.late_fraction < 1.0) {
            return Err(Error::config("omega.late_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classification {
    Constant {
        value: f64,
    },
    GroundStateShift {
        base: f64,
        extremum: f64,
        shift: Option<f64>,
    },
    StandingWaveShift {
        left: f64,
        right: f64,
        shift: Option<f64>,
        increasing: bool,
    },
    PeriodicNonconstant {
        period: f64,
    },
    NonSteady {
        reason: String,
    },
}

impl Classification {
    pub fn is_steady(&self) -> bool {
        !matches!(self, Classification::NonSteady { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Classification::Constant { .. } => "constant",
            Classification::GroundStateShift { .. } => "ground_state",
            Classification::StandingWaveShift { .. } => "standing_wave",
            Classification::PeriodicNonconstant { .. } => "periodic_nonconstant",
            Classification::NonSteady { .. } => "non_steady",
        }
    }
}

/// Measurements behind a classification.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassifyDetail {
    pub residual_tol: f64,
    pub oscillation: f64,
    pub hamiltonian_spread: Option<f64>,
    /// `true` when the grid-corrected Hamiltonian fitted better than the plain one.
    pub grid_corrected: Option<bool>,
    pub level: Option<f64>,
    pub containment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaProfile {
    #[serde(skip)]
    pub profile: Option<Profile>,
    pub residual: f64,
    pub classification: Classification,
    pub detail: ClassifyDetail,
    pub cluster_size: usize,
    /// Snapshot times assigned to this cluster.
    pub times: Vec<f64>,
    /// Time of the representative (latest member).
    pub t_repr: f64,
}

/// `sup |D₂φ + f(φ)|` over the interior nodes.
pub fn steady_residual(p: &Profile, spec: &NonlinearitySpec) -> f64 {
    let v = p.values();
    let h2 = p.grid().dx() * p.grid().dx();
    (1..v.len().saturating_sub(1))
        .map(|j| ((v[j - 1] - 2.0 * v[j] + v[j + 1]) / h2 + spec.f(v[j])).abs())
        .fold(0.0, f64::max)
}

fn sup_distance(a: &Profile, b: &Profile) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Cluster the late snapshots restricted to the window and classify one
/// representative (the latest member) per cluster.
pub fn extract_omega(
    snapshots: &[Snapshot],
    spec: &NonlinearitySpec,
    cfg: &OmegaConfig,
) -> Result<Vec<OmegaProfile>> {
    cfg.validate()?;
    let (t0, t1) = match (snapshots.first(), snapshots.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::InsufficientSampling("no snapshots".into())),
    };
    let from = t1 - cfg.late_fraction * (t1 - t0);
    let late: Vec<&Snapshot> = snapshots.iter().filter(|s| s.t >= from - 1e-12).collect();
    if late.len() < 3 {
        return Err(Error::InsufficientSampling(format!(
            "{} snapshots in the late window [{from}, {t1}], need at least 3",
            late.len()
        )));
    }
    let tol = cfg.cluster_tol * cfg.scale;
    // (latest member, member times)
    let mut clusters: Vec<(Profile, Vec<f64>)> = Vec::new();
    for s in late {
        let w = s.profile.restrict(-cfg.window, cfg.window)?;
        let best = clusters
            .iter()
            .enumerate()
            .map(|(i, (rep, _))| (i, sup_distance(rep, &w)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, _)) => {
                clusters[i].0 = w;
                clusters[i].1.push(s.t);
            }
            None => clusters.push((w, vec![s.t])),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(rep, times)| {
            let residual = steady_residual(&rep, spec);
            let (classification, detail) = classify_profile(&rep, residual, spec, cfg);
            OmegaProfile {
                residual,
                classification,
                detail,
                cluster_size: times.len(),
                t_repr: *times.last().expect("clusters are never empty"),
                times,
                profile: Some(rep),
            }
        })
        .collect())
}

/// Residual tolerance `residual_tol · scale · (1 + Lip)` on the profile range.
pub fn residual_tolerance(p: &Profile, spec: &NonlinearitySpec, cfg: &OmegaConfig) -> f64 {
    let (lo, hi) = p.min_max();
    let lip = spec
        .lipschitz_bound(lo - 1e-3, hi + 1e-3)
        .unwrap_or(f64::INFINITY);
    cfg.residual_tol * cfg.scale * (1.0 + lip)
}

/// Match a profile against the phase plane: constant, piece of a ground
/// state, of a standing wave, or of a periodic orbit.
///
/// A discrete steady state of the three-point scheme conserves the
/// Hamiltonian only up to `O(h²)`; the modified quantity
/// `H_h = v²/2 + F - h²/12 (f'(u) v² + f(u)²/2)` is conserved to `O(h⁴)`. A
/// sampled exact steady state conserves the plain `H` instead, so both are
/// tried and the one with the smaller spread is used.
pub fn classify_profile(
    p: &Profile,
    residual: f64,
    spec: &NonlinearitySpec,
    cfg: &OmegaConfig,
) -> (Classification, ClassifyDetail) {
    let mut detail = ClassifyDetail {
        residual_tol: residual_tolerance(p, spec, cfg),
        ..Default::default()
    };
    let non_steady = |reason: String| Classification::NonSteady { reason };
    if !(residual <= detail.residual_tol) {
        return (
            non_steady(format!("residual {residual:e} exceeds {:e}", detail.residual_tol)),
            detail,
        );
    }
    let (lo, hi) = p.min_max();
    detail.oscillation = hi - lo;
    if hi - lo <= cfg.constant_tol * cfg.scale {
        return (
            Classification::Constant {
                value: 0.5 * (lo + hi),
            },
            detail,
        );
    }
    let n = p.len();
    if n < 7 {
        return (non_steady("window too short".into()), detail);
    }
    let u = p.values();
    let v = p.derivative4();
    let h = p.grid().dx();
    let inner = 2..n - 2;

    let level_values = |corr: f64| -> Vec<f64> {
        inner
            .clone()
            .map(|j| {
                let (uj, vj) = (u[j], v[j]);
                let fj = spec.f(uj);
                0.5 * vj * vj + spec.antideriv(uj)
                    - corr * h * h / 12.0 * (spec.df(uj) * vj * vj + 0.5 * fj * fj)
            })
            .collect()
    };
    let spread_of = |hs: &[f64]| {
        let (a, b) = hs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        (b - a, 0.5 * (a + b))
    };
    let plain = level_values(0.0);
    let corrected = level_values(1.0);
    let (sp, cp) = spread_of(&plain);
    let (sc, cc) = spread_of(&corrected);
    let (spread, mut c, corr) = if sc < sp { (sc, cc, 1.0) } else { (sp, cp, 0.0) };
    detail.hamiltonian_spread = Some(spread);
    detail.grid_corrected = Some(corr == 1.0);
    if spread > cfg.spread_tol {
        return (
            non_steady(format!("Hamiltonian spread {spread:e} exceeds {:e}", cfg.spread_tol)),
            detail,
        );
    }

    // snap to an equilibrium level when one is within reach
    let pad = 0.5 * (hi - lo) + 0.1;
    if let Ok(eqs) = phase_plane::find_equilibria(spec, lo - pad, hi + pad) {
        let snap_tol = 10.0 * cfg.spread_tol;
        if let Some(e) = eqs
            .iter()
            .map(|r| spec.antideriv(r.u))
            .filter(|fe| (fe - c).abs() <= snap_tol)
            .min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()))
        {
            c = e;
        }
    }
    detail.level = Some(c);

    let jm = inner
        .clone()
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .expect("non-empty interior");
    let gap = c - spec.antideriv(u[jm]);
    let vs = if gap > 0.0 {
        v[jm].signum() * (2.0 * gap).sqrt()
    } else {
        v[jm]
    };
    let orbit = classify_orbit(spec, PhasePoint::new(u[jm], vs));
    let (olo, ohi) = match orbit.u_extent() {
        Some(ext) => ext,
        None => {
            let reason = match &orbit {
                OrbitClass::Unresolved { reason } => reason.clone(),
                _ => unreachable!(),
            };
            return (non_steady(format!("orbit unresolved: {reason}")), detail);
        }
    };
    let range_tol = cfg.containment_tol * cfg.scale;
    if lo < olo - range_tol || hi > ohi + range_tol {
        return (
            non_steady(format!(
                "profile range [{lo}, {hi}] leaves the orbit's range [{olo}, {ohi}]"
            )),
            detail,
        );
    }

    let mut worst: f64 = 0.0;
    for j in inner.clone() {
        let (uj, vj) = (u[j], v[j]);
        let fj = spec.f(uj);
        let num = 2.0 * (c - spec.antideriv(uj) + corr * h * h * fj * fj / 24.0);
        let den = 1.0 - corr * h * h * spec.df(uj) / 6.0;
        let vref = (num / den).max(0.0).sqrt();
        worst = worst.max((vj.abs() - vref).abs());
    }
    detail.containment = Some(worst);
    if worst > cfg.containment_tol {
        return (
            non_steady(format!(
                "trajectory leaves the level curve by {worst:e} (tolerance {:e})",
                cfg.containment_tol
            )),
            detail,
        );
    }

    let class = match orbit {
        OrbitClass::Equilibrium { u_star } => Classification::Constant { value: u_star },
        OrbitClass::Periodic { period, .. } => Classification::PeriodicNonconstant { period },
        OrbitClass::Homoclinic { base, extremum, .. } => Classification::GroundStateShift {
            base,
            extremum,
            shift: extremum_location(p, base),
        },
        OrbitClass::Heteroclinic { left, right, .. } => {
            let mid = phase_plane::argmin_antideriv(spec, left, right);
            let increasing = v[jm] > 0.0;
            Classification::StandingWaveShift {
                left,
                right,
                shift: crossing(p, mid),
                increasing,
            }
        }
        OrbitClass::Unresolved { .. } => unreachable!("handled above"),
    };
    (class, detail)
}

/// Sub-grid location of the largest `|u - base|`, unless it sits on the window edge.
fn extremum_location(p: &Profile, base: f64) -> Option<f64> {
    let u = p.values();
    let n = u.len();
    let m = (0..n).max_by(|&a, &b| (u[a] - base).abs().total_cmp(&(u[b] - base).abs()))?;
    if m == 0 || m == n - 1 {
        return None;
    }
    let (l, c, r) = (u[m - 1], u[m], u[m + 1]);
    let curv = l - 2.0 * c + r;
    let off = if curv != 0.0 {
        (0.5 * (l - r) / curv).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Some(p.x(m) + off * p.grid().dx())
}

/// First crossing of the level `level`, linearly interpolated.
fn crossing(p: &Profile, level: f64) -> Option<f64> {
    let u = p.values();
    (0..u.len() - 1).find_map(|j| {
        let (a, b) = (u[j] - level, u[j + 1] - level);
        if a == 0.0 {
            Some(p.x(j))
        } else if (a > 0.0) != (b > 0.0) && b != 0.0 {
            Some(p.x(j) + p.grid().dx() * a / (a - b))
        } else {
            None
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTimes {
    pub cluster: usize,
    pub times: Vec<f64>,
}

/// Late-time subsequences assigned to different clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationEvidence {
    pub subsequences: Vec<ClusterTimes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub profiles: Vec<OmegaProfile>,
    pub case: CaseTag,
    pub quasiconvergent: Verdict,
    pub convergent: Verdict,
    pub hypothesis_ok: bool,
    pub oscillation_evidence: Option<OscillationEvidence>,
    pub explanations: Vec<String>,
    pub config: OmegaConfig,
}

pub fn verdict(
    profiles: Vec<OmegaProfile>,
    case: CaseTag,
    hypothesis_ok: bool,
    cfg: &OmegaConfig,
) -> OmegaReport {
    let mut explanations = Vec::new();
    let all_steady = profiles.iter().all(|p| p.classification.is_steady());
    let mut quasiconvergent = if all_steady {
        Verdict::Yes
    } else {
        explanations.push("some cluster is not a steady state within tolerance".to_string());
        Verdict::Undetermined
    };
    let mut convergent = match profiles.len() {
        1 if all_steady => Verdict::Yes,
        1 => Verdict::Undetermined,
        _ => Verdict::No,
    };

    let names: Vec<&str> = profiles.iter().map(|p| p.classification.name()).collect();
    let mismatch = match case.tag {
        CaseKind::C1 => {
            let ok = profiles.iter().all(|p| {
                matches!(
                    p.classification,
                    Classification::Constant { .. } | Classification::StandingWaveShift { .. }
                )
            });
            (!ok).then(|| {
                format!("case C1 admits only constants and standing waves, found {names:?}")
            })
        }
        CaseKind::C2 | CaseKind::C3 if hypothesis_ok => {
            let ok = convergent == Verdict::Yes
                && profiles.iter().all(|p| {
                    matches!(
                        p.classification,
                        Classification::Constant { .. } | Classification::GroundStateShift { .. }
                    )
                });
            (!ok).then(|| {
                format!(
                    "case {:?} should converge to a constant or a ground state, found {} cluster(s) {names:?}",
                    case.tag,
                    profiles.len()
                )
            })
        }
        CaseKind::C2 | CaseKind::C3 => None,
        CaseKind::Undetermined => {
            explanations.push(format!("case undetermined: {}", case.note));
            None
        }
    };
    if let Some(m) = mismatch {
        explanations.push(m);
        quasiconvergent = Verdict::Undetermined;
        convergent = Verdict::Undetermined;
    }
    if !hypothesis_ok {
        explanations.push("initial data have equal limits at ±∞; the theorem's hypothesis does not hold".into());
    }
    let oscillation_evidence = (profiles.len() >= 2).then(|| OscillationEvidence {
        subsequences: profiles
            .iter()
            .enumerate()
            .map(|(i, p)| ClusterTimes {
                cluster: i,
                times: p.times.clone(),
            })
            .collect(),
    });
    OmegaReport {
        profiles,
        case,
        quasiconvergent,
        convergent,
        hypothesis_ok,
        oscillation_evidence,
        explanations,
        config: cfg.clone(),
    }
}
