//! Finite differences for `u_t = u_xx + f(u)` on `[-L, L]`.
//!
//! The Dirichlet values at `±L` are not fixed: they follow the limit ODE
//! `θ' = f(θ)` started from the far-field values of the initial data, which is
//! the exact behavior at infinity for data that are constant outside a
//! compact set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::rk4_step;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

fn default_transition() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialFamily {
    /// `α + (β - α)(1 + tanh(s (x - center)))/2`: `α` at `-∞`, `β` at `+∞`.
    Front {
        alpha: f64,
        beta: f64,
        steepness: f64,
        #[serde(default)]
        center: f64,
    },
    /// `height · exp(-((x - center)/width)²)`.
    Bump { height: f64, center: f64, width: f64 },
    /// Smoothed indicators of disjoint intervals on top of a constant.
    Plateaus {
        plateaus: Vec<Plateau>,
        #[serde(default)]
        base: f64,
        #[serde(default = "default_transition")]
        transition_width: f64,
    },
    Samples { values: Vec<f64> },
}

impl InitialFamily {
    /// Declared limits `(u₀(-∞), u₀(+∞))`; `None` for raw samples.
    pub fn limits(&self) -> Option<(f64, f64)> {
        match *self {
            InitialFamily::Front { alpha, beta, .. } => Some((alpha, beta)),
            InitialFamily::Bump { .. } => Some((0.0, 0.0)),
            InitialFamily::Plateaus { base, .. } => Some((base, base)),
            InitialFamily::Samples { .. } => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            &InitialFamily::Front {
                alpha,
                beta,
                steepness,
                center,
            } => alpha + (beta - alpha) * 0.5 * (1.0 + (steepness * (x - center)).tanh()),
            &InitialFamily::Bump {
                height,
                center,
                width,
            } => {
                let z = (x - center) / width;
                height * (-z * z).exp()
            }
            InitialFamily::Plateaus {
                plateaus,
                base,
                transition_width,
            } => {
                let w = *transition_width;
                plateaus.iter().fold(*base, |acc, p| {
                    let ind = if w > 0.0 {
                        0.5 * (((x - p.lo) / w).tanh() - ((x - p.hi) / w).tanh())
                    } else if x >= p.lo && x <= p.hi {
                        1.0
                    } else {
                        0.0
                    };
                    acc + (p.value - base) * ind
                })
            }
            InitialFamily::Samples { .. } => f64::NAN,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            InitialFamily::Front { steepness, .. } if !(*steepness > 0.0) => Err(Error::config(
                "initial.steepness",
                "must be positive",
            )),
            InitialFamily::Bump { width, .. } if !(*width > 0.0) => {
                Err(Error::config("initial.width", "must be positive"))
            }
            InitialFamily::Plateaus {
                plateaus,
                transition_width,
                ..
            } => {
                if !(*transition_width >= 0.0) {
                    return Err(Error::config("initial.transition_width", "must be non-negative"));
                }
                let mut sorted: Vec<&Plateau> = plateaus.iter().collect();
                sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
                for p in &sorted {
                    if !(p.lo < p.hi) {
                        return Err(Error::Argument(format!(
                            "plateau [{}, {}] is empty",
                            p.lo, p.hi
                        )));
                    }
                }
                for w in sorted.windows(2) {
                    if w[1].lo < w[0].hi {
                        return Err(Error::Argument(format!(
                            "plateaus [{}, {}] and [{}, {}] overlap",
                            w[0].lo, w[0].hi, w[1].lo, w[1].hi
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

pub fn make_initial(family: &InitialFamily, grid: &Grid) -> Result<Profile> {
    family.validate()?;
    let profile = match family {
        InitialFamily::Samples { values } => Profile::new(*grid, values.clone())?,
        other => Profile::new(*grid, grid.nodes().map(|x| other.eval(x)).collect())?,
    };
    if let Some((a, b)) = family.limits() {
        let v = profile.values();
        let (ua, ub) = (v[0], v[v.len() - 1]);
        if (ua - a).abs() > 1e-8 || (ub - b).abs() > 1e-8 {
            return Err(Error::config(
                "grid.half_width",
                format!(
                    "domain too short: u0(±L) = ({ua}, {ub}) is not within 1e-8 of the limits ({a}, {b})"
                ),
            ));
        }
    }
    Ok(profile)
}

/// RK4 integrator for the pair `θ±' = f(θ±)`.
#[derive(Debug, Clone)]
pub struct ThetaIntegrator {
    pub t: f64,
    pub minus: f64,
    pub plus: f64,
    h_max: f64,
    bound: f64,
}

impl ThetaIntegrator {
    pub fn new(spec: &NonlinearitySpec, alpha: f64, beta: f64, dt: f64) -> Result<Self> {
        let b = alpha.abs().max(beta.abs()) + 1.0;
        let lip = spec.lipschitz_bound(-b, b)?;
        let h_max = if lip > 0.0 { dt.min(0.01 / lip) } else { dt };
        let kappa = spec.kappa.unwrap_or(2.0 * b);
        Ok(ThetaIntegrator {
            t: 0.0,
            minus: alpha,
            plus: beta,
            h_max,
            bound: 10.0 * kappa,
        })
    }

    pub fn advance_to(&mut self, spec: &NonlinearitySpec, t: f64) -> Result<(f64, f64)> {
        let span = t - self.t;
        if span > 0.0 {
            let steps = (span / self.h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let g = |y: f64| spec.f(y);
            for _ in 0..steps {
                self.minus = rk4_step(&g, self.minus, h);
                self.plus = rk4_step(&g, self.plus, h);
            }
            for v in [self.minus, self.plus] {
                if !(v.abs() <= self.bound) {
                    return Err(Error::BlowUp {
                        value: v.abs(),
                        bound: self.bound,
                    });
                }
            }
            self.t = t;
        }
        Ok((self.minus, self.plus))
    }
}

/// `(θ₋(t), θ₊(t))` with `θ(0) = (α, β)`.
pub fn solve_theta(spec: &NonlinearitySpec, alpha: f64, beta: f64, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("t must be non-negative, got {t}")));
    }
    ThetaIntegrator::new(spec, alpha, beta, 0.01)?.advance_to(spec, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Imex,
    CrankNicolsonNewton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    /// Keep the last increment `(u^n - u^{n-1})/dt` with every snapshot.
    #[serde(default)]
    pub record_rate: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SolverConfig {
            dt,
            t_end,
            snapshot_times: Vec::new(),
            scheme: Scheme::Imex,
            record_rate: false,
        }
    }

    /// Snapshots every `every` time units from 0 through `t_end`.
    pub fn every(mut self, every: f64) -> Self {
        let n = (self.t_end / every + 1e-9).floor() as usize;
        self.snapshot_times = (0..=n).map(|k| k as f64 * every).collect();
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("solver.dt", "must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config("solver.t_end", "must be positive"));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.t_end * (1.0 + 1e-12)))
        {
            return Err(Error::config(
                "solver.snapshot_times",
                format!("time {t} is outside [0, {}]", self.t_end),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub profile: Profile,
    pub theta_minus: f64,
    pub theta_plus: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: u64,
    pub t: f64,
    pub profile: Profile,
    pub theta: (f64, f64),
    pub rate: Option<Vec<f64>>,
}

/// Space-time source term added to the right-hand side.
pub type Forcing<'f> = &'f dyn Fn(f64, f64) -> f64;

/// Tridiagonal solve with sub/super diagonal `off` (constant) and diagonal `diag`.
fn thomas_const_off(off: f64, diag: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let m = diag.len();
    if m == 0 {
        return;
    }
    let mut denom = diag[0];
    scratch[0] = off / denom;
    rhs[0] /= denom;
    for i in 1..m {
        denom = diag[i] - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

pub struct Stepper<'a> {
    spec: &'a NonlinearitySpec,
    grid: Grid,
    dt: f64,
    scheme: Scheme,
    theta: ThetaIntegrator,
    t: f64,
    step_index: u64,
    u: Vec<f64>,
    prev: Vec<f64>,
    // IMEX: forward-elimination factors of the constant interior matrix
    imex_cp: Vec<f64>,
    imex_inv: Vec<f64>,
    work: Vec<f64>,
    diag: Vec<f64>,
    scratch: Vec<f64>,
    blowup: f64,
}

impl<'a> Stepper<'a> {
    /// The boundary values of `u0` seed the limit ODE.
    pub fn new(spec: &'a NonlinearitySpec, u0: &Profile, dt: f64, scheme: Scheme) -> Result<Self> {
        let grid = *u0.grid();
        let v = u0.values();
        let n = v.len();
        let (alpha, beta) = (v[0], v[n - 1]);
        let b = u0.sup_norm() + 1.0;
        let lip = spec.lipschitz_bound(-b, b)?;
        // the reaction is explicit only in the IMEX scheme
        if scheme == Scheme::Imex && dt * lip > 0.2 {
            return Err(Error::config(
                "solver.dt",
                format!("dt·Lip = {} exceeds 0.2 (Lip = {lip} on [-{b}, {b}])", dt * lip),
            ));
        }
        let theta = ThetaIntegrator::new(spec, alpha, beta, dt)?;
        let kappa = spec.kappa.unwrap_or(2.0 * b);
        let m = n - 2;
        let r = dt / (grid.dx() * grid.dx());
        let mut imex_cp = vec![0.0; m];
        let mut imex_inv = vec![0.0; m];
        if m > 0 {
            let d = 1.0 + 2.0 * r;
            let mut denom = d;
            imex_inv[0] = 1.0 / denom;
            imex_cp[0] = -r / denom;
            for i in 1..m {
                denom = d + r * imex_cp[i - 1];
                imex_inv[i] = 1.0 / denom;
                imex_cp[i] = -r / denom;
            }
        }
        Ok(Stepper {
            spec,
            grid,
            dt,
            scheme,
            theta,
            t: 0.0,
            step_index: 0,
            u: v.to_vec(),
            prev: v.to_vec(),
            imex_cp,
            imex_inv,
            work: vec![0.0; n],
            diag: vec![0.0; m],
            scratch: vec![0.0; m],
            blowup: 10.0 * kappa,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn theta(&self) -> (f64, f64) {
        (self.theta.minus, self.theta.plus)
    }

    /// `(u^n - u^{n-1}) / dt` for the last step.
    pub fn rate(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.prev)
            .map(|(a, b)| (a - b) / self.dt)
            .collect()
    }

    pub fn state(&self) -> SolverState {
        SolverState {
            t: self.t,
            profile: Profile::new_unchecked(self.grid, self.u.clone()),
            theta_minus: self.theta.minus,
            theta_plus: self.theta.plus,
        }
    }

    pub fn advance(&mut self) -> Result<()> {
        self.advance_with(None, None)
    }

    /// One step; `boundary` overrides the limit-ODE Dirichlet values at the new
    /// time and `forcing(x, t)` is added to the equation.
    pub fn advance_with(
        &mut self,
        boundary: Option<(f64, f64)>,
        forcing: Option<Forcing<'_>>,
    ) -> Result<()> {
        let t_new = (self.step_index + 1) as f64 * self.dt;
        let wrap = |e: Error| Error::Step {
            t: t_new,
            source: Box::new(e),
        };
        let (bm, bp) = match boundary {
            Some(b) => b,
            None => self.theta.advance_to(self.spec, t_new).map_err(wrap)?,
        };
        self.prev.copy_from_slice(&self.u);
        match self.scheme {
            Scheme::Imex => self.imex(bm, bp, t_new, forcing),
            Scheme::CrankNicolsonNewton => self.crank_nicolson(bm, bp, t_new, forcing).map_err(wrap)?,
        }
        let sup = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(sup <= self.blowup) {
            return Err(wrap(Error::BlowUp {
                value: sup,
                bound: self.blowup,
            }));
        }
        self.t = t_new;
        self.step_index += 1;
        Ok(())
    }

    fn imex(&mut self, bm: f64, bp: f64, t_new: f64, forcing: Option<Forcing<'_>>) {
        let n = self.u.len();
        let m = n - 2;
        let dt = self.dt;
        let r = dt / (self.grid.dx() * self.grid.dx());
        let rhs = &mut self.work[1..n - 1];
        for i in 0..m {
            let u = self.prev[i + 1];
            rhs[i] = u + dt * self.spec.f(u);
        }
        if let Some(g) = forcing {
            for (i, v) in rhs.iter_mut().enumerate() {
                *v += dt * g(self.grid.x(i + 1), t_new);
            }
        }
        rhs[0] += r * bm;
        rhs[m - 1] += r * bp;
        rhs[0] *= self.imex_inv[0];
        for i in 1..m {
            rhs[i] = (rhs[i] + r * rhs[i - 1]) * self.imex_inv[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= self.imex_cp[i] * rhs[i + 1];
        }
        self.u[1..n - 1].copy_from_slice(rhs);
        self.u[0] = bm;
        self.u[n - 1] = bp;
    }

    fn crank_nicolson(
        &mut self,
        bm: f64,
        bp: f64,
        t_new: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<()> {
        let n = self.u.len();
        let m = n - 2;
        let h = 0.5 * self.dt;
        let inv_dx2 = 1.0 / (self.grid.dx() * self.grid.dx());
        let spec = self.spec;
        let t_old = self.t;

        // explicit half: u^n + dt/2 (D2 u^n + f(u^n) + g^n + g^{n+1})
        let mut base = vec![0.0; n];
        for j in 1..n - 1 {
            let p = &self.prev;
            let lap = (p[j - 1] - 2.0 * p[j] + p[j + 1]) * inv_dx2;
            base[j] = p[j] + h * (lap + spec.f(p[j]));
            if let Some(g) = forcing {
                let x = self.grid.x(j);
                base[j] += h * (g(x, t_old) + g(x, t_new));
            }
        }
        let w = &mut self.u;
        w[0] = bm;
        w[n - 1] = bp;
        let residual = |w: &[f64], out: &mut [f64]| -> f64 {
            let mut norm: f64 = 0.0;
            for j in 1..n - 1 {
                let lap = (w[j - 1] - 2.0 * w[j] + w[j + 1]) * inv_dx2;
                let r = w[j] - h * (lap + spec.f(w[j])) - base[j];
                out[j - 1] = r;
                norm = norm.max(r.abs());
            }
            norm
        };
        let scale = w.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let target = 1e-11 * scale;
        let mut res = vec![0.0; m];
        let mut norm = residual(w, &mut res);
        let mut trial = w.clone();
        let mut trial_res = vec![0.0; m];
        let mut iterations = 0;
        while norm > target {
            if iterations == 25 {
                return Err(Error::NewtonDiverged {
                    t: t_new,
                    iterations,
                    residual: norm,
                });
            }
            iterations += 1;
            for j in 1..n - 1 {
                self.diag[j - 1] = 1.0 + h * (2.0 * inv_dx2 - spec.df(w[j]));
            }
            // Newton correction solves J δ = -R
            for v in res.iter_mut() {
                *v = -*v;
            }
            thomas_const_off(-h * inv_dx2, &self.diag, &mut res, &mut self.scratch);
            let mut lambda = 1.0;
            loop {
                for j in 1..n - 1 {
                    trial[j] = w[j] + lambda * res[j - 1];
                }
                trial[0] = bm;
                trial[n - 1] = bp;
                let tn = residual(&trial, &mut trial_res);
                if tn < norm || lambda < 1e-3 {
                    w.copy_from_slice(&trial);
                    norm = tn;
                    std::mem::swap(&mut res, &mut trial_res);
                    break;
                }
                lambda *= 0.5;
            }
        }
        Ok(())
    }
}

/// One step from an arbitrary state. Builds a fresh stepper; loops should use
/// [`Stepper`] directly.
pub fn step(state: &SolverState, cfg: &SolverConfig, spec: &NonlinearitySpec) -> Result<SolverState> {
    cfg.validate()?;
    let mut values = state.profile.values().to_vec();
    let n = values.len();
    values[0] = state.theta_minus;
    values[n - 1] = state.theta_plus;
    let start = Profile::new(*state.profile.grid(), values)?;
    let mut s = Stepper::new(spec, &start, cfg.dt, cfg.scheme)?;
    s.advance()?;
    let mut out = s.state();
    out.t = state.t + cfg.dt;
    Ok(out)
}

/// Evolve `u0` to `t_end`, keeping snapshots at the steps nearest to the
/// requested times. Recorded times are exactly `step · dt`.
pub fn run(spec: &NonlinearitySpec, u0: &Profile, cfg: &SolverConfig) -> Result<Vec<Snapshot>> {
    run_observed(spec, u0, cfg, |_| {})
}

/// As [`run`], calling `observe` on every snapshot as soon as it is taken.
pub fn run_observed<O: FnMut(&Snapshot)>(
    spec: &NonlinearitySpec,
    u0: &Profile,
    cfg: &SolverConfig,
    mut observe: O,
) -> Result<Vec<Snapshot>> {
    cfg.validate()?;
    let total = cfg.steps();
    let mut wanted: Vec<u64> = cfg
        .snapshot_times
        .iter()
        .map(|&t| ((t / cfg.dt).round() as u64).min(total))
        .collect();
    wanted.sort_unstable();
    wanted.dedup();

    let mut stepper = Stepper::new(spec, u0, cfg.dt, cfg.scheme)?;
    let mut out = Vec::with_capacity(wanted.len());
    let mut next = 0;
    let take = |s: &Stepper, out: &mut Vec<Snapshot>| {
        let k = s.step_index();
        out.push(Snapshot {
            step: k,
            t: k as f64 * cfg.dt,
            profile: Profile::new_unchecked(s.grid, s.u.clone()),
            theta: s.theta(),
            rate: (cfg.record_rate && k > 0).then(|| s.rate()),
        });
    };
    loop {
        while next < wanted.len() && wanted[next] == stepper.step_index() {
            take(&stepper, &mut out);
            observe(out.last().expect("just pushed"));
            next += 1;
        }
        if stepper.step_index() >= total {
            break;
        }
        stepper.advance()?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn allen_cahn() -> NonlinearitySpec {
        NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn front_midpoint_and_limits() {
        let g = Grid::with_spacing(20.0, 0.5).unwrap();
        let fam = InitialFamily::Front {
            alpha: 1.0,
            beta: -1.0,
            steepness: 1.0,
            center: 0.0,
        };
        let p = make_initial(&fam, &g).unwrap();
        assert_eq!(p.values()[g.nearest(0.0).unwrap()], 0.0);
        assert!((p.values()[0] - 1.0).abs() < 1e-8);
        assert!((p.values()[g.len() - 1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn plateaus_and_overlap() {
        let g = Grid::with_spacing(600.0, 0.5).unwrap();
        let plateaus: Vec<Plateau> = (1..=4)
            .map(|k| {
                let a = 4f64.powi(k);
                Plateau {
                    lo: a,
                    hi: 2.0 * a,
                    value: 1.0,
                }
            })
            .collect();
        let fam = InitialFamily::Plateaus {
            plateaus,
            base: 0.0,
            transition_width: 1.0,
        };
        let p = make_initial(&fam, &g).unwrap();
        let mut count = 0;
        for j in 1..p.len() {
            if p.values()[j - 1] < 0.5 && p.values()[j] >= 0.5 {
                count += 1;
            }
        }
        assert_eq!(count, 4);
        let bad = InitialFamily::Plateaus {
            plateaus: vec![
                Plateau { lo: 0.0, hi: 2.0, value: 1.0 },
                Plateau { lo: 1.0, hi: 3.0, value: 1.0 },
            ],
            base: 0.0,
            transition_width: 0.5,
        };
        assert!(matches!(make_initial(&bad, &g), Err(Error::Argument(_))));
    }

    #[test]
    fn theta_examples() {
        let s = allen_cahn();
        let (m, _) = solve_theta(&s, -1.0, 0.0, 7.0).unwrap();
        assert_eq!(m, -1.0);
        let (_, p) = solve_theta(&s, -1.0, 0.5, 5.0).unwrap();
        // θ(t) = 1/sqrt(1 + (1/θ₀² - 1) e^{-2t})
        let exact = 1.0 / (1.0 + 3.0 * (-10f64).exp()).sqrt();
        assert!((p - exact).abs() < 1e-10);
        assert!((p - 1.0).abs() < 1e-3);
        assert_eq!(solve_theta(&NonlinearitySpec::zero(), 0.3, -2.0, 9.0).unwrap(), (0.3, -2.0));
    }

    #[test]
    fn theta_blow_up_is_caught() {
        let s = NonlinearitySpec::polynomial(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            solve_theta(&s, 0.0, 2.0, 10.0),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = Grid::with_spacing(10.0, 0.1).unwrap();
        for scheme in [Scheme::Imex, Scheme::CrankNicolsonNewton] {
            let u0 = Profile::constant(g, 1.0);
            let cfg = SolverConfig::new(0.01, 1.0).every(0.5).with_scheme(scheme);
            let snaps = run(&allen_cahn(), &u0, &cfg).unwrap();
            assert_eq!(snaps.len(), 3);
            for s in &snaps {
                assert!(s.profile.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn snapshot_bookkeeping() {
        let g = Grid::with_spacing(5.0, 0.5).unwrap();
        let u0 = Profile::constant(g, 0.0);
        let mut cfg = SolverConfig::new(0.1, 1.0);
        cfg.snapshot_times = vec![0.0];
        let snaps = run(&NonlinearitySpec::zero(), &u0, &cfg).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].profile, u0);
        cfg.snapshot_times = vec![];
        assert!(run(&NonlinearitySpec::zero(), &u0, &cfg).unwrap().is_empty());
        cfg.snapshot_times = vec![0.31, 0.29, 1.0];
        let snaps = run(&NonlinearitySpec::zero(), &u0, &cfg).unwrap();
        let ts: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![3.0 * 0.1, 10.0 * 0.1]);
        cfg.snapshot_times = vec![2.0];
        assert!(matches!(
            run(&NonlinearitySpec::zero(), &u0, &cfg),
            Err(Error::Config { .. })
        ));
    }

    fn heat_error(scheme: Scheme) -> f64 {
        let g = Grid::with_spacing(40.0, 0.05).unwrap();
        let u0 = Profile::from_fn(g, |x| (-x * x).exp());
        let mut cfg = SolverConfig::new(0.01, 1.0).with_scheme(scheme);
        cfg.snapshot_times = vec![1.0];
        let snaps = run(&NonlinearitySpec::zero(), &u0, &cfg).unwrap();
        let p = &snaps[0].profile;
        (0..p.len())
            .map(|j| {
                let x = p.x(j);
                (p.values()[j] - (-x * x / 5.0).exp() / 5f64.sqrt()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_heat_kernel() {
        let cn = heat_error(Scheme::CrankNicolsonNewton);
        assert!(cn <= 5e-4, "{cn}");
        // backward Euler in time is first order: visible but bounded
        let imex = heat_error(Scheme::Imex);
        assert!(imex < 2e-3, "{imex}");
    }

    #[test]
    fn dt_guard_names_the_field() {
        let g = Grid::with_spacing(5.0, 0.5).unwrap();
        let u0 = Profile::constant(g, 0.0);
        match Stepper::new(&allen_cahn(), &u0, 0.5, Scheme::Imex) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "solver.dt"),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }
}
