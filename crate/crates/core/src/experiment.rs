//! Experiment configuration, presets, the full simulate → diagnose → ω
//! pipeline, and the on-disk run layout.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    classify_case, energy_series, track_critical_points, vlambda_decay, zero_history, CaseKind,
    CaseTag, Companion, CriticalTrack, VlambdaSeries, ZeroHistory, ZeroTolerances,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec, Profile};
use crate::nonlinearity::NonlinearitySpec;
use crate::omega::{extract_omega, verdict, OmegaConfig, OmegaReport};
use crate::phase_plane::{classify_orbit, orbit_profile, PhasePoint};
use crate::solver::{make_initial, run_observed, InitialFamily, Plateau, Scheme, Snapshot, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarField {
    /// Initial data constant near `±L`: the limit-ODE boundary data are exact.
    Exact,
    /// Boundary data are a modelling approximation.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub record_rate: bool,
}

impl SolverSection {
    fn resolve(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.dt, self.t_end).with_scheme(self.scheme);
        cfg.record_rate = self.record_rate;
        cfg.validate()?;
        cfg.snapshot_times = match (&self.snapshot_times, self.snapshot_every) {
            (Some(ts), _) => ts.clone(),
            (None, Some(every)) if every > 0.0 => return Ok(cfg.every(every)),
            (None, Some(_)) => {
                return Err(Error::config("solver.snapshot_every", "must be positive"))
            }
            (None, None) => return Ok(cfg.every(self.t_end / 100.0)),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Second function in a zero-number comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompanionSpec {
    Zero,
    /// Steady state through the phase-plane point `(u, v)`, anchored at `x = 0`.
    Orbit { u: f64, v: f64 },
    /// Two-column CSV `x,u` on the run's grid nodes.
    File { path: PathBuf },
    Vlambda { lambda: f64 },
    Ut,
}

impl CompanionSpec {
    pub fn label(&self) -> String {
        match self {
            CompanionSpec::Zero => "zero".into(),
            CompanionSpec::Orbit { u, v } => format!("orbit({u},{v})"),
            CompanionSpec::File { path } => format!("file:{}", path.display()),
            CompanionSpec::Vlambda { lambda } => format!("vlambda:{lambda}"),
            CompanionSpec::Ut => "ut".into(),
        }
    }

    /// `zero`, `ut`, `vlambda:<x>`, `orbit:<u>,<v>` or a file path.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("companion=").unwrap_or(s);
        if s == "zero" {
            return Ok(CompanionSpec::Zero);
        }
        if s == "ut" {
            return Ok(CompanionSpec::Ut);
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::config("companion", format!("bad number `{t}`: {e}")))
        };
        if let Some(x) = s.strip_prefix("vlambda:") {
            return Ok(CompanionSpec::Vlambda { lambda: num(x)? });
        }
        if let Some(uv) = s.strip_prefix("orbit:") {
            let (u, v) = uv
                .split_once(',')
                .ok_or_else(|| Error::config("companion", "orbit needs `orbit:u,v`"))?;
            return Ok(CompanionSpec::Orbit { u: num(u)?, v: num(v)? });
        }
        Ok(CompanionSpec::File { path: s.into() })
    }
}

fn default_value_tol() -> f64 {
    ZeroTolerances::default().value
}
fn default_slope_tol() -> f64 {
    ZeroTolerances::default().slope
}
fn default_vlambda_window() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Zero-count intervals; default is the trusted window.
    #[serde(default)]
    pub intervals: Vec<(f64, f64)>,
    /// Default is the zero companion.
    #[serde(default)]
    pub companions: Vec<CompanionSpec>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_radius: Option<f64>,
    #[serde(default = "default_value_tol")]
    pub zero_value_tol: f64,
    #[serde(default = "default_slope_tol")]
    pub zero_slope_tol: f64,
    #[serde(default = "default_vlambda_window")]
    pub vlambda_half_window: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            intervals: Vec::new(),
            companions: Vec::new(),
            lambdas: Vec::new(),
            k_max: None,
            match_radius: None,
            energy_radius: None,
            zero_value_tol: default_value_tol(),
            zero_slope_tol: default_slope_tol(),
            vlambda_half_window: default_vlambda_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OmegaSection {
    /// Half width of the ω window; default `L/4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    pub late_fraction: f64,
    pub cluster_tol: f64,
    pub residual_tol: f64,
    pub constant_tol: f64,
    pub spread_tol: f64,
    pub containment_tol: f64,
}

impl Default for OmegaSection {
    fn default() -> Self {
        let d = OmegaConfig::default();
        OmegaSection {
            window: None,
            late_fraction: d.late_fraction,
            cluster_tol: d.cluster_tol,
            residual_tol: d.residual_tol,
            constant_tol: d.constant_tol,
            spread_tol: d.spread_tol,
            containment_tol: d.containment_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Write every `snapshot_stride`-th lattice node to `snapshots.csv`.
    pub snapshot_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { snapshot_stride: 1 }
    }
}

fn default_name() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub spec: NonlinearitySpec,
    pub grid: GridSpec,
    pub initial: InitialFamily,
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub omega: OmegaSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far_field: Option<FarField>,
}

impl ExperimentConfig {
    /// JSON, or TOML when the file name ends in `.toml`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        if is_toml {
            toml::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| {
                Error::config(
                    path.display().to_string(),
                    format!("line {} column {}: {e}", e.line(), e.column()),
                )
            })
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.spec.validate()?;
        let grid = self.grid.resolve()?;
        let u0 = make_initial(&self.initial, &grid)?;
        let solver = self.solver.resolve()?;
        let sup0 = u0.sup_norm();
        let scale = sup0.max(1.0);

        let mut spec = self.spec.clone();
        let kappa_policy = if spec.kappa.is_some() {
            "configured"
        } else {
            spec.kappa = Some(2.0 * (sup0 + 1.0));
            "default: 2 (sup|u0| + 1)"
        };
        spec.validate()?;

        let half = 0.5 * (grid.x_max() - grid.x_min());
        let trusted = half - (4.0 * solver.t_end).sqrt().max(10.0);
        let v = u0.values();
        let limits = self
            .initial
            .limits()
            .unwrap_or((v[0], v[v.len() - 1]));
        let hypothesis_ok = (limits.0 - limits.1).abs() > 1e-9 * scale;
        let far_field = self.far_field.unwrap_or(match self.initial {
            InitialFamily::Samples { .. } => FarField::Approximate,
            _ => FarField::Exact,
        });

        let window = self.omega.window.unwrap_or(half / 4.0);
        let omega = OmegaConfig {
            window,
            late_fraction: self.omega.late_fraction,
            cluster_tol: self.omega.cluster_tol,
            residual_tol: self.omega.residual_tol,
            constant_tol: self.omega.constant_tol,
            spread_tol: self.omega.spread_tol,
            containment_tol: self.omega.containment_tol,
            scale,
        };
        omega.validate()?;
        if window > half {
            return Err(Error::config("omega.window", format!("{window} exceeds L = {half}")));
        }

        let d = &self.diagnostics;
        let k_max = d.k_max.unwrap_or(trusted.floor().max(1.0) as usize);
        if k_max as f64 > half {
            return Err(Error::config("diagnostics.k_max", format!("{k_max} exceeds L = {half}")));
        }
        let intervals = if d.intervals.is_empty() {
            let r = trusted.max(grid.dx() * 2.0);
            vec![(-r, r)]
        } else {
            d.intervals.clone()
        };
        for &(a, b) in &intervals {
            if !(a < b && a >= grid.x_min() - 1e-9 && b <= grid.x_max() + 1e-9) {
                return Err(Error::config(
                    "diagnostics.intervals",
                    format!("({a}, {b}) is not a subinterval of the grid"),
                ));
            }
        }
        let companions = if d.companions.is_empty() {
            vec![CompanionSpec::Zero]
        } else {
            d.companions.clone()
        };
        if companions.contains(&CompanionSpec::Ut) && !solver.record_rate {
            return Err(Error::config(
                "diagnostics.companions",
                "the `ut` companion needs solver.record_rate = true",
            ));
        }
        for c in &companions {
            if let CompanionSpec::File { path } = c {
                if !path.exists() {
                    return Err(Error::config(
                        "diagnostics.companions",
                        format!("file {} does not exist", path.display()),
                    ));
                }
            }
        }
        if self.output.snapshot_stride == 0 {
            return Err(Error::config("output.snapshot_stride", "must be at least 1"));
        }
        let energy_radius = d.energy_radius.unwrap_or(window);
        let match_radius = d.match_radius.unwrap_or(5.0 * grid.dx());
        let tols = ZeroTolerances {
            value: d.zero_value_tol,
            slope: d.zero_slope_tol,
        };

        let mut echo = self.clone();
        echo.spec = spec.clone();
        echo.omega.window = Some(window);
        echo.diagnostics.k_max = Some(k_max);
        echo.diagnostics.intervals = intervals.clone();
        echo.diagnostics.companions = companions.clone();
        echo.diagnostics.match_radius = Some(match_radius);
        echo.diagnostics.energy_radius = Some(energy_radius);
        echo.solver.snapshot_times = Some(solver.snapshot_times.clone());
        echo.solver.snapshot_every = None;
        echo.far_field = Some(far_field);

        Ok(Resolved {
            meta: RunMeta {
                name: self.name.clone(),
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                kappa: spec.kappa.expect("set above"),
                kappa_policy: kappa_policy.to_string(),
                half_width: half,
                nodes: grid.len(),
                dx: grid.dx(),
                steps: solver.steps(),
                trusted_half_width: trusted,
                limits,
                hypothesis_ok,
                hypothesis_note: if hypothesis_ok {
                    "limits at ±∞ differ".into()
                } else {
                    "hypothesis violated: equal limits at ±∞".into()
                },
                far_field,
                scale,
                zero_tolerances: tols,
                match_radius,
                k_max,
                energy_radius,
                omega: omega.clone(),
                config: echo,
            },
            spec,
            grid,
            u0,
            solver,
            omega,
            intervals,
            companions,
            tols,
            k_max,
            match_radius,
            energy_radius,
        })
    }
}

/// Everything a run was computed with, as written to `run_meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub name: String,
    pub crate_version: String,
    pub kappa: f64,
    pub kappa_policy: String,
    pub half_width: f64,
    pub nodes: usize,
    pub dx: f64,
    pub steps: u64,
    pub trusted_half_width: f64,
    pub limits: (f64, f64),
    pub hypothesis_ok: bool,
    pub hypothesis_note: String,
    pub far_field: FarField,
    pub scale: f64,
    pub zero_tolerances: ZeroTolerances,
    pub match_radius: f64,
    pub k_max: usize,
    pub energy_radius: f64,
    pub omega: OmegaConfig,
    /// The configuration with every default filled in.
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub meta: RunMeta,
    pub spec: NonlinearitySpec,
    pub grid: Grid,
    pub u0: Profile,
    pub solver: SolverConfig,
    pub omega: OmegaConfig,
    pub intervals: Vec<(f64, f64)>,
    pub companions: Vec<CompanionSpec>,
    pub tols: ZeroTolerances,
    pub k_max: usize,
    pub match_radius: f64,
    pub energy_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledHistory {
    pub companion: String,
    pub interval: (f64, f64),
    pub history: ZeroHistory,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub zeros: Vec<LabeledHistory>,
    pub tracks: Vec<CriticalTrack>,
    pub case: CaseTag,
    pub vlambda: Vec<VlambdaSeries>,
    pub energy: Vec<(f64, f64)>,
    /// Spread of `u` along the single track over the late window (case C2).
    pub gamma_spread: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub meta: RunMeta,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Diagnostics,
    pub omega: OmegaReport,
}

/// Build the companion profile (or marker) for a zero history.
fn companion_profile(
    c: &CompanionSpec,
    spec: &NonlinearitySpec,
    grid: &Grid,
) -> Result<Option<Profile>> {
    match c {
        CompanionSpec::Orbit { u, v } => {
            let cls = classify_orbit(spec, PhasePoint::new(*u, *v));
            let op = orbit_profile(spec, &cls, (grid.x_min(), grid.x_max()), grid.dx())?;
            Ok(Some(op.profile))
        }
        CompanionSpec::File { path } => {
            let mut rdr = csv::Reader::from_path(path)?;
            let mut values = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                let u: f64 = rec
                    .get(1)
                    .ok_or_else(|| Error::config("companion", "file needs columns x,u"))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::config("companion", format!("{e}")))?;
                values.push(u);
            }
            Ok(Some(Profile::new(*grid, values)?))
        }
        _ => Ok(None),
    }
}

pub fn late_window(snapshots: &[Snapshot], late_fraction: f64) -> (f64, f64) {
    match (snapshots.first(), snapshots.last()) {
        (Some(a), Some(b)) => (b.t - late_fraction * (b.t - a.t), b.t),
        _ => (0.0, 0.0),
    }
}

/// Zero histories, tracks, case tag, reflection decay and energy.
pub fn diagnose(r: &Resolved, snapshots: &[Snapshot]) -> Result<Diagnostics> {
    let mut zeros = Vec::new();
    for c in &r.companions {
        let psi = companion_profile(c, &r.spec, &r.grid)?;
        let companion = match c {
            CompanionSpec::Zero => Companion::Zero,
            CompanionSpec::Orbit { .. } | CompanionSpec::File { .. } => {
                Companion::Fixed(psi.as_ref().expect("built above"))
            }
            CompanionSpec::Vlambda { lambda } => Companion::Reflection(*lambda),
            CompanionSpec::Ut => Companion::TimeDerivative,
        };
        for &interval in &r.intervals {
            zeros.push(LabeledHistory {
                companion: c.label(),
                interval,
                history: zero_history(snapshots, companion, interval, r.tols)?,
            });
        }
    }
    let k = r.k_max as f64;
    let tracks = track_critical_points(snapshots, (-k, k), Some(r.match_radius));
    let window = late_window(snapshots, r.omega.late_fraction);
    let case = classify_case(&tracks, r.k_max, window);

    let mut lambdas = r.meta.config.diagnostics.lambdas.clone();
    let mut gamma_spread = None;
    if case.tag == CaseKind::C2 {
        if let Some(t) = tracks.iter().find(|t| t.spans(window.0, window.1)) {
            lambdas.push(t.last().x);
            let us: Vec<f64> = t
                .samples
                .iter()
                .filter(|s| s.t >= window.0)
                .map(|s| s.u)
                .collect();
            let (lo, hi) = us
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &u| (a.min(u), b.max(u)));
            gamma_spread = Some(hi - lo);
        }
    }
    let vlambda = lambdas
        .iter()
        .map(|&l| vlambda_decay(snapshots, l, r.meta.config.diagnostics.vlambda_half_window))
        .collect::<Result<Vec<_>>>()?;
    let energy = energy_series(snapshots, &r.spec, r.energy_radius)?;
    Ok(Diagnostics {
        zeros,
        tracks,
        case,
        vlambda,
        energy,
        gamma_spread,
    })
}

pub fn omega_report(r: &Resolved, snapshots: &[Snapshot], case: CaseTag) -> Result<OmegaReport> {
    let profiles = extract_omega(snapshots, &r.spec, &r.omega)?;
    Ok(verdict(profiles, case, r.meta.hypothesis_ok, &r.omega))
}

/// Simulate; on a solver failure the snapshots taken so far come back with the error.
pub fn simulate(r: &Resolved) -> (Vec<Snapshot>, Option<Error>) {
    let mut partial = Vec::new();
    match run_observed(&r.spec, &r.u0, &r.solver, |s| partial.push(s.clone())) {
        Ok(s) => (s, None),
        Err(e) => (partial, Some(e)),
    }
}

/// Full pipeline in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = cfg.resolve()?;
    let (snapshots, err) = simulate(&r);
    if let Some(e) = err {
        return Err(e);
    }
    let diagnostics = diagnose(&r, &snapshots)?;
    let omega = omega_report(&r, &snapshots, diagnostics.case.clone())?;
    Ok(Outcome {
        meta: r.meta,
        snapshots,
        diagnostics,
        omega,
    })
}

/// Run the pipeline and write the run directory. Solver failures still
/// leave `run_meta.json`, the partial snapshots and `error.txt` behind.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let r = cfg.resolve()?;
    fs::create_dir_all(out)?;
    write_json(&out.join("run_meta.json"), &r.meta)?;
    let (snapshots, err) = simulate(&r);
    write_snapshots(&out.join("snapshots.csv"), &snapshots, cfg.output.snapshot_stride)?;
    write_theta(&out.join("theta.csv"), &snapshots)?;
    if let Some(e) = err {
        fs::write(out.join("error.txt"), format!("{e}\n"))?;
        return Err(e);
    }
    let diagnostics = diagnose(&r, &snapshots)?;
    write_diagnostics(out, &diagnostics)?;
    let omega = omega_report(&r, &snapshots, diagnostics.case.clone())?;
    write_omega(out, &omega)?;
    Ok(Outcome {
        meta: r.meta,
        snapshots,
        diagnostics,
        omega,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write_snapshots(path: &Path, snapshots: &[Snapshot], stride: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let with_rate = snapshots.iter().any(|s| s.rate.is_some());
    if with_rate {
        w.write_record(["t", "x", "u", "u_t"])?;
    } else {
        w.write_record(["t", "x", "u"])?;
    }
    for s in snapshots {
        let g = s.profile.grid();
        let t = fmt(s.t);
        for j in 0..g.len() {
            if (g.first_index() + j as i64).rem_euclid(stride as i64) != 0 {
                continue;
            }
            let x = fmt(g.x(j));
            let u = fmt(s.profile.values()[j]);
            if with_rate {
                let r = s.rate.as_ref().map(|r| fmt(r[j])).unwrap_or_default();
                w.write_record([&t, &x, &u, &r])?;
            } else {
                w.write_record([&t, &x, &u])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_theta(path: &Path, snapshots: &[Snapshot]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "theta_minus", "theta_plus"])?;
    for s in snapshots {
        w.write_record([fmt(s.t), fmt(s.theta.0), fmt(s.theta.1)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(out: &Path, d: &Diagnostics) -> Result<()> {
    let mut w = csv::Writer::from_path(out.join("zeros.csv"))?;
    w.write_record([
        "companion", "lo", "hi", "t", "count", "multiple", "truncated", "audited", "zeros",
    ])?;
    for h in &d.zeros {
        let audited: Vec<f64> = h.history.audited().map(|r| r.t).collect();
        for rep in &h.history.reports {
            let xs: Vec<String> = rep.zeros.iter().map(|z| fmt(z.x)).collect();
            w.write_record([
                h.companion.clone(),
                fmt(h.interval.0),
                fmt(h.interval.1),
                fmt(rep.t),
                rep.count.to_string(),
                rep.has_multiple().to_string(),
                rep.truncated.to_string(),
                audited.contains(&rep.t).to_string(),
                xs.join(";"),
            ])?;
        }
    }
    w.flush()?;
    write_json(&out.join("zero_audit.json"), &d.zeros)?;

    let mut w = csv::Writer::from_path(out.join("tracks.csv"))?;
    w.write_record(["id", "kind", "t", "x", "u", "terminated"])?;
    for t in &d.tracks {
        let kind = match t.kind {
            crate::diagnostics::CriticalKind::Max => "max",
            crate::diagnostics::CriticalKind::Min => "min",
        };
        for s in &t.samples {
            w.write_record([
                t.id.to_string(),
                kind.to_string(),
                fmt(s.t),
                fmt(s.x),
                fmt(s.u),
                t.terminated.to_string(),
            ])?;
        }
    }
    w.flush()?;
    write_json(&out.join("case.json"), &d.case)?;

    let mut w = csv::Writer::from_path(out.join("energy.csv"))?;
    w.write_record(["t", "energy"])?;
    for &(t, e) in &d.energy {
        w.write_record([fmt(t), fmt(e)])?;
    }
    w.flush()?;

    if !d.vlambda.is_empty() {
        let mut w = csv::Writer::from_path(out.join("vlambda.csv"))?;
        w.write_record(["lambda", "t", "sup", "sup_dx"])?;
        for s in &d.vlambda {
            for p in &s.points {
                w.write_record([fmt(s.lambda), fmt(p.t), fmt(p.sup), fmt(p.sup_dx)])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_omega(out: &Path, report: &OmegaReport) -> Result<()> {
    let mut w = csv::Writer::from_path(out.join("omega_profiles.csv"))?;
    w.write_record(["cluster", "x", "u"])?;
    for (i, p) in report.profiles.iter().enumerate() {
        if let Some(prof) = &p.profile {
            for j in 0..prof.len() {
                w.write_record([i.to_string(), fmt(prof.x(j)), fmt(prof.values()[j])])?;
            }
        }
    }
    w.flush()?;
    write_json(&out.join("omega_report.json"), report)
}

/// A run directory read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub meta: RunMeta,
    pub snapshots: Vec<Snapshot>,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let meta: RunMeta = serde_json::from_str(&fs::read_to_string(dir.join("run_meta.json"))?)?;
    let theta: Vec<(f64, f64, f64)> = {
        let mut rdr = csv::Reader::from_path(dir.join("theta.csv"))?;
        rdr.deserialize().collect::<std::result::Result<_, _>>()?
    };
    let mut rdr = csv::Reader::from_path(dir.join("snapshots.csv"))?;
    let with_rate = rdr.headers()?.len() == 4;
    let mut rows: Vec<(f64, f64, f64, Option<f64>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("snapshots.csv: {e}")))
        };
        let rate = if with_rate && !rec.get(3).unwrap_or("").is_empty() {
            Some(field(3)?)
        } else {
            None
        };
        rows.push((field(0)?, field(1)?, field(2)?, rate));
    }
    let mut snapshots = Vec::new();
    let mut k = 0;
    while k < rows.len() {
        let t = rows[k].0;
        let end = rows[k..].iter().position(|r| r.0 != t).map_or(rows.len(), |p| k + p);
        let block = &rows[k..end];
        if block.len() < 3 {
            return Err(Error::Domain(format!("snapshot at t = {t} has fewer than 3 nodes")));
        }
        let dx = block[1].1 - block[0].1;
        let grid = Grid::aligned(block[0].1, block[block.len() - 1].1, dx)?;
        if grid.len() != block.len() {
            return Err(Error::Domain(format!("snapshot at t = {t} is not on a uniform grid")));
        }
        let profile = Profile::new(grid, block.iter().map(|r| r.2).collect())?;
        let rate = with_rate
            .then(|| block.iter().map(|r| r.3).collect::<Option<Vec<f64>>>())
            .flatten();
        let th = theta
            .iter()
            .find(|row| row.0 == t)
            .map(|row| (row.1, row.2))
            .unwrap_or((f64::NAN, f64::NAN));
        snapshots.push(Snapshot {
            step: (t / meta.config.solver.dt).round() as u64,
            t,
            profile,
            theta: th,
            rate,
        });
        k = end;
    }
    Ok(LoadedRun { meta, snapshots })
}

/// Resolve a stored run's configuration against the grid actually on disk.
pub fn resolve_loaded(run: &LoadedRun) -> Result<Resolved> {
    let mut r = run.meta.config.resolve()?;
    if let Some(s) = run.snapshots.first() {
        r.grid = *s.profile.grid();
    }
    Ok(r)
}

pub const PRESETS: &[&str] = &[
    "front_bistable",
    "bump_ground",
    "heat_sturm",
    "heat_plateaus",
    "limit_ode",
    "random_fronts",
];

fn allen_cahn() -> NonlinearitySpec {
    NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).expect("valid roots")
}

fn base(
    name: &str,
    spec: NonlinearitySpec,
    half_width: f64,
    dx: f64,
    initial: InitialFamily,
    dt: f64,
    t_end: f64,
    every: f64,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        spec,
        grid: GridSpec {
            half_width,
            nodes: None,
            dx: Some(dx),
        },
        initial,
        solver: SolverSection {
            dt,
            t_end,
            snapshot_every: Some(every),
            snapshot_times: None,
            scheme: Scheme::Imex,
            record_rate: false,
        },
        diagnostics: DiagnosticsSection::default(),
        omega: OmegaSection::default(),
        output: OutputSection::default(),
        seed: 0,
        far_field: None,
    }
}

/// Named scenario configurations.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "front_bistable" => {
            let mut c = base(
                name,
                allen_cahn(),
                60.0,
                0.05,
                InitialFamily::Front {
                    alpha: 1.0,
                    beta: -1.0,
                    steepness: 0.5,
                    center: 0.0,
                },
                0.01,
                400.0,
                2.0,
            );
            c.diagnostics.companions = vec![
                CompanionSpec::Zero,
                CompanionSpec::Orbit {
                    u: 0.0,
                    v: 0.5f64.sqrt(),
                },
            ];
            c
        }
        "bump_ground" => base(
            name,
            NonlinearitySpec::polynomial(vec![0.0, -1.0, 0.0, 1.0]).expect("valid"),
            60.0,
            0.05,
            InitialFamily::Bump {
                height: 0.5,
                center: 0.37,
                width: 2.0,
            },
            0.01,
            200.0,
            1.0,
        ),
        "heat_sturm" => {
            let grid = Grid::with_spacing(60.0, 0.05)?;
            let values = grid
                .nodes()
                .map(|x| x.sin() * (-x * x / 100.0).exp())
                .collect();
            let mut c = base(
                name,
                NonlinearitySpec::zero(),
                60.0,
                0.05,
                InitialFamily::Samples { values },
                0.01,
                50.0,
                0.5,
            );
            c.diagnostics.intervals = vec![(-20.0, 20.0)];
            c
        }
        "heat_plateaus" => {
            let mut c = base(
                name,
                NonlinearitySpec::zero(),
                1200.0,
                0.25,
                InitialFamily::Plateaus {
                    plateaus: vec![
                        Plateau {
                            lo: 16.0,
                            hi: 32.0,
                            value: 1.0,
                        },
                        Plateau {
                            lo: 256.0,
                            hi: 512.0,
                            value: 1.0,
                        },
                    ],
                    base: 0.0,
                    transition_width: 1.0,
                },
                0.1,
                6000.0,
                10.0,
            );
            c.omega.window = Some(20.0);
            c.diagnostics.k_max = Some(20);
            c.diagnostics.intervals = vec![(-20.0, 20.0)];
            c.output.snapshot_stride = 4;
            c
        }
        "limit_ode" => base(
            name,
            allen_cahn(),
            40.0,
            0.05,
            InitialFamily::Front {
                alpha: -0.5,
                beta: 0.5,
                steepness: 1.0,
                center: 0.0,
            },
            0.01,
            100.0,
            1.0,
        ),
        "random_fronts" => random_fronts(0, 1).into_iter().next().expect("one config"),
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; known: {}", PRESETS.join(", ")),
            ))
        }
    };
    Ok(cfg)
}

/// Front-like data under `u - u³` with random limits in the basins of `±1`
/// (`|α - β| > 0.1`), random steepness and centre.
pub fn random_fronts(seed: u64, count: usize) -> Vec<ExperimentConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_limit = |rng: &mut ChaCha8Rng| {
        let m: f64 = rng.gen_range(0.2..1.5);
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    (0..count)
        .map(|i| {
            let (alpha, beta) = loop {
                let a = draw_limit(&mut rng);
                let b = draw_limit(&mut rng);
                if (a - b).abs() > 0.1 {
                    break (a, b);
                }
            };
            let steepness = rng.gen_range(0.3..2.0);
            let center = rng.gen_range(-3.0..3.0);
            let mut c = base(
                &format!("random_front_{i}"),
                allen_cahn(),
                60.0,
                0.05,
                InitialFamily::Front {
                    alpha,
                    beta,
                    steepness,
                    center,
                },
                0.01,
                200.0,
                2.0,
            );
            c.seed = seed;
            c
        })
        .collect()
}
