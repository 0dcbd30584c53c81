//! The reaction term `f`, its antiderivative `F(u) = ∫_0^u f`, and the
//! coercive modification that replaces `f` by `u/2` far from the origin.
//!
//! The modification is a linear blend on `κ ≤ |u| ≤ κ + w`:
//!
//! ```text
//! f̃(u) = (1 - λ) f(u) + λ u/2,   λ = (|u| - κ) / w
//! ```
//!
//! so `f̃` stays locally Lipschitz and equals `u/2` exactly for `|u| ≥ κ + w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Scan resolution used by [`NonlinearitySpec::lipschitz_bound`].
const LIPSCHITZ_CELLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Reaction {
    /// `f ≡ 0`, the heat equation.
    Zero,
    /// Coefficients in ascending degree.
    Polynomial { coeffs: Vec<f64> },
    /// `f(u) = -(u - a)(u - γ)(u - b)` with `roots = [a, γ, b]`, `a < γ < b`.
    CubicBistable { roots: [f64; 3] },
    /// Linear interpolation between `(u, f(u))` breakpoints, extended
    /// linearly beyond the first and last breakpoint.
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    #[serde(flatten)]
    pub reaction: Reaction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blend_width: Option<f64>,
}

impl NonlinearitySpec {
    pub fn new(reaction: Reaction) -> Result<Self> {
        let spec = NonlinearitySpec {
            reaction,
            kappa: None,
            blend_width: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn zero() -> Self {
        NonlinearitySpec {
            reaction: Reaction::Zero,
            kappa: None,
            blend_width: None,
        }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(Reaction::Polynomial { coeffs })
    }

    pub fn cubic_bistable(a: f64, gamma: f64, b: f64) -> Result<Self> {
        Self::new(Reaction::CubicBistable {
            roots: [a, gamma, b],
        })
    }

    pub fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Reaction::PiecewiseLinear { breakpoints })
    }

    /// Attach a coercivity radius with the default blend width `0.1 κ`.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = Some(kappa);
        self.validate()?;
        Ok(self)
    }

    pub fn with_blend_width(mut self, width: f64) -> Result<Self> {
        self.blend_width = Some(width);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.reaction {
            Reaction::Zero => {}
            Reaction::Polynomial { coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::config("spec.coeffs", "coefficients must be finite"));
                }
            }
            Reaction::CubicBistable { roots } => {
                let [a, g, b] = *roots;
                if !(a.is_finite() && b.is_finite() && a < g && g < b) {
                    return Err(Error::config(
                        "spec.roots",
                        "cubic_bistable roots must satisfy a < gamma < b",
                    ));
                }
            }
            Reaction::PiecewiseLinear { breakpoints } => {
                if breakpoints.len() < 2 {
                    return Err(Error::config(
                        "spec.breakpoints",
                        "at least two breakpoints are required",
                    ));
                }
                if breakpoints
                    .iter()
                    .any(|(u, f)| !u.is_finite() || !f.is_finite())
                {
                    return Err(Error::config("spec.breakpoints", "breakpoints must be finite"));
                }
                if breakpoints.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::config(
                        "spec.breakpoints",
                        "breakpoints must be strictly increasing in u",
                    ));
                }
            }
        }
        if let Some(k) = self.kappa {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::config("spec.kappa", "kappa must be positive"));
            }
        }
        if let Some(w) = self.blend_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::config("spec.blend_width", "blend_width must be positive"));
            }
            if self.kappa.is_none() {
                return Err(Error::config(
                    "spec.blend_width",
                    "blend_width requires kappa",
                ));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.reaction, Reaction::Zero)
    }

    /// `(κ, w)` when the coercive override is active.
    pub fn coercion(&self) -> Option<(f64, f64)> {
        self.kappa
            .map(|k| (k, self.blend_width.unwrap_or(0.1 * k)))
    }

    pub fn eval_f(&self, u: f64) -> Result<f64> {
        check_finite(u)?;
        Ok(self.f(u))
    }

    pub fn eval_antideriv(&self, u: f64) -> Result<f64> {
        check_finite(u)?;
        Ok(self.antideriv(u))
    }

    /// `f(u)` without the finiteness check; used in the solver hot loops.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self.coercion() {
            None => self.base_f(u),
            Some((k, w)) => {
                let a = u.abs();
                if a <= k {
                    self.base_f(u)
                } else if a >= k + w {
                    0.5 * u
                } else {
                    let lam = (a - k) / w;
                    (1.0 - lam) * self.base_f(u) + lam * 0.5 * u
                }
            }
        }
    }

    /// `f'(u)`; one-sided (right) slope at piecewise-linear kinks.
    pub fn df(&self, u: f64) -> f64 {
        match self.coercion() {
            None => self.base_df(u),
            Some((k, w)) => {
                let a = u.abs();
                if a <= k {
                    self.base_df(u)
                } else if a >= k + w {
                    0.5
                } else {
                    let lam = (a - k) / w;
                    let dlam = u.signum() / w;
                    (1.0 - lam) * self.base_df(u) + 0.5 * lam + dlam * (0.5 * u - self.base_f(u))
                }
            }
        }
    }

    /// `F(u) = ∫_0^u f(s) ds`: closed form per piece, adaptive quadrature
    /// only inside the coercive blend band.
    pub fn antideriv(&self, u: f64) -> f64 {
        let (k, w) = match self.coercion() {
            None => return self.base_antideriv(u),
            Some(c) => c,
        };
        if u.abs() <= k {
            return self.base_antideriv(u);
        }
        let s = u.signum();
        let edge = s * k;
        let outer = s * (k + w);
        let blend = |x: f64| {
            let lam = (x.abs() - k) / w;
            (1.0 - lam) * self.base_f(x) + lam * 0.5 * x
        };
        let band_end = if u.abs() < k + w { u } else { outer };
        let mut breaks = vec![edge];
        if let Reaction::PiecewiseLinear { breakpoints } = &self.reaction {
            let (lo, hi) = if edge < band_end { (edge, band_end) } else { (band_end, edge) };
            breaks.extend(breakpoints.iter().map(|b| b.0).filter(|&b| b > lo && b < hi));
            if s < 0.0 {
                breaks[1..].reverse();
            }
        }
        breaks.push(band_end);
        let mut total = self.base_antideriv(edge);
        for pair in breaks.windows(2) {
            total += quadrature::integrate(blend, pair[0], pair[1], 1e-15, 1e-13).value;
        }
        if u.abs() > k + w {
            total += 0.25 * (u * u - outer * outer);
        }
        total
    }

    /// Upper bound for `sup |f'|` on `[lo, hi]`.
    pub fn lipschitz_bound(&self, lo: f64, hi: f64) -> Result<f64> {
        check_finite(lo)?;
        check_finite(hi)?;
        if lo >= hi {
            return Err(Error::Argument(format!(
                "lipschitz_bound needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        let (k, w) = self.coercion().unwrap_or((f64::INFINITY, 0.0));
        let mut bound: f64 = 0.0;

        // unmodified core |u| <= k
        let core = (lo.max(-k), hi.min(k));
        if core.0 < core.1 {
            bound = bound.max(self.base_lipschitz(core.0, core.1));
        }
        // u/2 region
        if k.is_finite() && (lo < -(k + w) || hi > k + w) {
            bound = bound.max(0.5);
        }
        // blend bands, scanned with the analytic derivative
        if k.is_finite() {
            for (a, b) in [(-(k + w), -k), (k, k + w)] {
                let (a, b) = (a.max(lo), b.min(hi));
                if a < b {
                    let h = (b - a) / LIPSCHITZ_CELLS as f64;
                    for i in 0..=LIPSCHITZ_CELLS {
                        bound = bound.max(self.df(a + i as f64 * h).abs());
                    }
                    // jump of the slope at the band edges is covered by both sides
                    bound = bound.max(self.df(a).abs()).max(self.df(b).abs());
                }
            }
        }
        Ok(bound)
    }

    fn base_lipschitz(&self, lo: f64, hi: f64) -> f64 {
        match &self.reaction {
            Reaction::Zero => 0.0,
            Reaction::PiecewiseLinear { breakpoints } => {
                let n = breakpoints.len();
                let slope = |i: usize| {
                    let (a, b) = (breakpoints[i], breakpoints[i + 1]);
                    (b.1 - a.1) / (b.0 - a.0)
                };
                let mut best: f64 = 0.0;
                for i in 0..n - 1 {
                    // first/last segments extend to ±∞
                    let seg_lo = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i].0 };
                    let seg_hi = if i == n - 2 { f64::INFINITY } else { breakpoints[i + 1].0 };
                    if seg_lo < hi && seg_hi > lo {
                        best = best.max(slope(i).abs());
                    }
                }
                best
            }
            Reaction::Polynomial { .. } | Reaction::CubicBistable { .. } => {
                let coeffs = self.base_coeffs();
                let d1 = derivative(&coeffs);
                let d2 = derivative(&d1);
                let h = (hi - lo) / LIPSCHITZ_CELLS as f64;
                let mut best = horner(&d1, lo).abs().max(horner(&d1, hi).abs());
                let mut prev_x = lo;
                let mut prev = horner(&d2, lo);
                for i in 1..=LIPSCHITZ_CELLS {
                    let x = if i == LIPSCHITZ_CELLS { hi } else { lo + i as f64 * h };
                    best = best.max(horner(&d1, x).abs());
                    let cur = horner(&d2, x);
                    if prev == 0.0 {
                        best = best.max(horner(&d1, prev_x).abs());
                    } else if prev * cur < 0.0 {
                        let r = bisect(|t| horner(&d2, t), prev_x, x);
                        best = best.max(horner(&d1, r).abs());
                    }
                    prev_x = x;
                    prev = cur;
                }
                best
            }
        }
    }

    /// Polynomial coefficients of the unmodified reaction, when it is one.
    pub fn base_coeffs(&self) -> Vec<f64> {
        match &self.reaction {
            Reaction::Zero => vec![0.0],
            Reaction::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    vec![0.0]
                } else {
                    coeffs.clone()
                }
            }
            Reaction::CubicBistable { roots } => {
                let [a, g, b] = *roots;
                let s1 = a + g + b;
                let s2 = a * g + a * b + g * b;
                let s3 = a * g * b;
                // -(u^3 - s1 u^2 + s2 u - s3)
                vec![s3, -s2, s1, -1.0]
            }
            Reaction::PiecewiseLinear { .. } => Vec::new(),
        }
    }

    fn base_f(&self, u: f64) -> f64 {
        match &self.reaction {
            Reaction::Zero => 0.0,
            Reaction::Polynomial { coeffs } => horner(coeffs, u),
            Reaction::CubicBistable { roots } => {
                -(u - roots[0]) * (u - roots[1]) * (u - roots[2])
            }
            Reaction::PiecewiseLinear { breakpoints } => {
                let i = segment_index(breakpoints, u);
                let (a, b) = (breakpoints[i], breakpoints[i + 1]);
                a.1 + (b.1 - a.1) * (u - a.0) / (b.0 - a.0)
            }
        }
    }

    fn base_df(&self, u: f64) -> f64 {
        match &self.reaction {
            Reaction::Zero => 0.0,
            Reaction::Polynomial { coeffs } => horner(&derivative(coeffs), u),
            Reaction::CubicBistable { roots } => {
                let [a, g, b] = *roots;
                -((u - g) * (u - b) + (u - a) * (u - b) + (u - a) * (u - g))
            }
            Reaction::PiecewiseLinear { breakpoints } => {
                let i = segment_index(breakpoints, u);
                let (a, b) = (breakpoints[i], breakpoints[i + 1]);
                (b.1 - a.1) / (b.0 - a.0)
            }
        }
    }

    fn base_antideriv(&self, u: f64) -> f64 {
        match &self.reaction {
            Reaction::Zero => 0.0,
            Reaction::Polynomial { .. } | Reaction::CubicBistable { .. } => {
                let coeffs = self.base_coeffs();
                let mut acc = 0.0;
                for (i, c) in coeffs.iter().enumerate().rev() {
                    acc = acc * u + c / (i + 1) as f64;
                }
                acc * u
            }
            Reaction::PiecewiseLinear { breakpoints } => {
                pwl_cumulative(breakpoints, u) - pwl_cumulative(breakpoints, 0.0)
            }
        }
    }
}

fn check_finite(u: f64) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite argument {u}")))
    }
}

pub(crate) fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Index `i` of the segment `[b_i, b_{i+1}]` used to evaluate at `u`.
fn segment_index(breakpoints: &[(f64, f64)], u: f64) -> usize {
    let n = breakpoints.len();
    match breakpoints[1..n - 1].iter().position(|b| u < b.0) {
        Some(i) => i,
        None => n - 2,
    }
}

/// `∫_{b_0}^{u} f` for the piecewise-linear interpolant, exact.
fn pwl_cumulative(breakpoints: &[(f64, f64)], u: f64) -> f64 {
    let eval = |i: usize, x: f64| {
        let (a, b) = (breakpoints[i], breakpoints[i + 1]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    };
    let x0 = breakpoints[0].0;
    let seg = segment_index(breakpoints, u);
    let mut total = 0.0;
    // full segments strictly before `seg`
    for i in 0..seg {
        let (a, b) = (breakpoints[i], breakpoints[i + 1]);
        total += 0.5 * (a.1 + b.1) * (b.0 - a.0);
    }
    let start = if seg == 0 { x0 } else { breakpoints[seg].0 };
    total += 0.5 * (eval(seg, start) + eval(seg, u)) * (u - start);
    total
}
