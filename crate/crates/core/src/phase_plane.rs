//! Bounded orbits of the steady-state system `u' = v, v' = -f(u)`.
//!
//! Orbits lie on level sets of `H(u, v) = v²/2 + F(u)`. Classification works
//! on `F` alone: starting from `u₀` we walk outward until `F` climbs back to
//! the level `c = H(u₀, v₀)`. Each end of the resulting interval is either a
//! plain turning point (`f ≠ 0`) or an equilibrium sitting exactly on the
//! level (a local maximum of `F`), and the pair of end types decides between
//! periodic, homoclinic and heteroclinic orbits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::{dopri_integrate, Tolerance};
use crate::quadrature;

/// Default number of scan cells for root finding.
pub const SCAN_CELLS: usize = 10_000;
/// `|f|` and `|v|` threshold for declaring a point an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
/// Threshold on `|g|` for tangential (non sign-changing) roots.
pub const TANGENTIAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub v: f64,
}

impl PhasePoint {
    pub fn new(u: f64, v: f64) -> Self {
        PhasePoint { u, v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum OrbitClass {
    Equilibrium {
        u_star: f64,
    },
    Periodic {
        p: f64,
        q: f64,
        level: f64,
        period: f64,
    },
    /// Ground state: the orbit leaves `base` and returns after turning at
    /// `extremum`.
    Homoclinic {
        base: f64,
        extremum: f64,
        level: f64,
    },
    /// Standing wave between the equilibria `left < right`.
    Heteroclinic {
        left: f64,
        right: f64,
        level: f64,
    },
    Unresolved {
        reason: String,
    },
}

impl OrbitClass {
    pub fn tag(&self) -> &'static str {
        match self {
            OrbitClass::Equilibrium { .. } => "equilibrium",
            OrbitClass::Periodic { .. } => "periodic",
            OrbitClass::Homoclinic { .. } => "homoclinic",
            OrbitClass::Heteroclinic { .. } => "heteroclinic",
            OrbitClass::Unresolved { .. } => "unresolved",
        }
    }

    /// Range of `u` covered by the orbit.
    pub fn u_extent(&self) -> Option<(f64, f64)> {
        match *self {
            OrbitClass::Equilibrium { u_star } => Some((u_star, u_star)),
            OrbitClass::Periodic { p, q, .. } => Some((p, q)),
            OrbitClass::Homoclinic { base, extremum, .. } => {
                Some((base.min(extremum), base.max(extremum)))
            }
            OrbitClass::Heteroclinic { left, right, .. } => Some((left, right)),
            OrbitClass::Unresolved { .. } => None,
        }
    }
}

/// A root of `f` (or of `F - c`); `tangential` roots touch zero without a
/// sign change and are reported but not refined further.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub u: f64,
    pub tangential: bool,
}

pub fn hamiltonian(spec: &NonlinearitySpec, pt: PhasePoint) -> f64 {
    0.5 * pt.v * pt.v + spec.antideriv(pt.u)
}

pub fn find_equilibria(spec: &NonlinearitySpec, lo: f64, hi: f64) -> Result<Vec<Root>> {
    check_interval(lo, hi)?;
    scan_roots(|u| spec.f(u), lo, hi, SCAN_CELLS)
}

/// Solutions of `F(u) = c` in `[lo, hi]`.
pub fn turning_points(spec: &NonlinearitySpec, c: f64, lo: f64, hi: f64) -> Result<Vec<Root>> {
    check_interval(lo, hi)?;
    scan_roots(|u| spec.antideriv(u) - c, lo, hi, SCAN_CELLS)
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Argument(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// Sign-change scan plus bisection, with tangential-root detection at local
/// minima of `|g|` and an error for runs of exact zeros.
pub fn scan_roots<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, cells: usize) -> Result<Vec<Root>> {
    let h = (hi - lo) / cells as f64;
    let xs: Vec<f64> = (0..=cells)
        .map(|k| if k == cells { hi } else { lo + k as f64 * h })
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut roots = Vec::new();

    let mut k = 0;
    while k <= cells {
        if vals[k] == 0.0 {
            let start = k;
            while k < cells && vals[k + 1] == 0.0 {
                k += 1;
            }
            if k - start + 1 >= 3 {
                return Err(Error::IdenticallyZero {
                    lo: xs[start],
                    hi: xs[k],
                });
            }
            let before = if start > 0 { vals[start - 1] } else { 0.0 };
            let after = if k < cells { vals[k + 1] } else { 0.0 };
            let tangential = before != 0.0 && after != 0.0 && (before > 0.0) == (after > 0.0);
            roots.push(Root {
                u: 0.5 * (xs[start] + xs[k]),
                tangential,
            });
            k += 1;
            continue;
        }
        if k < cells && vals[k + 1] != 0.0 && (vals[k] > 0.0) != (vals[k + 1] > 0.0) {
            roots.push(Root {
                u: bisect_sign(&g, xs[k], xs[k + 1]),
                tangential: false,
            });
        } else if k > 0
            && k < cells
            && vals[k - 1] != 0.0
            && vals[k + 1] != 0.0
            && (vals[k - 1] > 0.0) == (vals[k] > 0.0)
            && (vals[k + 1] > 0.0) == (vals[k] > 0.0)
            && vals[k].abs() <= vals[k - 1].abs()
            && vals[k].abs() < vals[k + 1].abs()
        {
            let (x, gx) = golden_min(|x| g(x).abs(), xs[k - 1], xs[k + 1]);
            if gx < TANGENTIAL_TOL {
                roots.push(Root {
                    u: x,
                    tangential: true,
                });
            }
        }
        k += 1;
    }
    Ok(roots)
}

/// Bisection on the predicate `g(x) <= 0`; the predicate must differ at the ends.
fn bisect_sign<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    let (ga, gb) = (g(a), g(b));
    let inside_a = ga <= 0.0;
    if inside_a == (gb <= 0.0) {
        return if ga.abs() <= gb.abs() { a } else { b };
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm <= 0.0) == inside_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, g(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Endpoint {
    Turning(f64),
    Equilibrium(f64),
    Unbounded,
}

fn scan_level(
    spec: &NonlinearitySpec,
    c: f64,
    u0: f64,
    dir: f64,
    step: f64,
    bound: f64,
) -> Endpoint {
    let tol = 1e-10 * c.abs().max(1.0);
    let g = |u: f64| spec.antideriv(u) - c;
    let mut prev = u0;
    let mut f_prev = spec.f(prev);
    loop {
        let u = prev + dir * step;
        if u.abs() > bound {
            return Endpoint::Unbounded;
        }
        let f_u = spec.f(u);
        let (a, b, fa, fb) = if dir > 0.0 {
            (prev, u, f_prev, f_u)
        } else {
            (u, prev, f_u, f_prev)
        };
        // local maximum of F inside [a, b]
        if fa > 0.0 && fb <= 0.0 || fa >= 0.0 && fb < 0.0 {
            let e = if fb == 0.0 {
                b
            } else if fa == 0.0 {
                a
            } else {
                bisect_sign(&|x| -spec.f(x), a, b)
            };
            let ge = g(e);
            if ge.abs() <= tol {
                return Endpoint::Equilibrium(e);
            }
            if ge > tol {
                return Endpoint::Turning(bisect_sign(&g, prev, e));
            }
        }
        if g(u) > tol {
            return Endpoint::Turning(bisect_sign(&g, prev, u));
        }
        prev = u;
        f_prev = f_u;
    }
}

/// Classify the orbit through `start` from the level-set geometry of `F`.
pub fn classify_orbit(spec: &NonlinearitySpec, start: PhasePoint) -> OrbitClass {
    let PhasePoint { u: u0, v: v0 } = start;
    if !(u0.is_finite() && v0.is_finite()) {
        return OrbitClass::Unresolved {
            reason: "non-finite start".into(),
        };
    }
    if spec.f(u0).abs() < EQUILIBRIUM_TOL && v0.abs() < EQUILIBRIUM_TOL {
        return OrbitClass::Equilibrium { u_star: u0 };
    }
    let c = hamiltonian(spec, start);
    let kappa = spec
        .kappa
        .unwrap_or(2.0 * (u0.abs() + v0.abs() + 1.0));
    let bound = 10.0 * kappa.max(u0.abs());
    let step = bound / (2.0 * SCAN_CELLS as f64);

    let left = scan_level(spec, c, u0, -1.0, step, bound);
    let right = scan_level(spec, c, u0, 1.0, step, bound);
    match (left, right) {
        (Endpoint::Unbounded, _) | (_, Endpoint::Unbounded) => OrbitClass::Unresolved {
            reason: "unbounded".into(),
        },
        (Endpoint::Turning(p), Endpoint::Turning(q)) => {
            if q - p <= 0.0 {
                return OrbitClass::Unresolved {
                    reason: "collapsed turning interval".into(),
                };
            }
            match period_between(spec, p, q) {
                Ok(period) => OrbitClass::Periodic {
                    p,
                    q,
                    level: c,
                    period,
                },
                Err(e) => OrbitClass::Unresolved {
                    reason: format!("period quadrature: {e}"),
                },
            }
        }
        (Endpoint::Equilibrium(base), Endpoint::Turning(ext))
        | (Endpoint::Turning(ext), Endpoint::Equilibrium(base)) => OrbitClass::Homoclinic {
            base,
            extremum: ext,
            level: c,
        },
        (Endpoint::Equilibrium(left), Endpoint::Equilibrium(right)) => OrbitClass::Heteroclinic {
            left,
            right,
            level: c,
        },
    }
}

/// Minimal period of the periodic orbit through the turning point `(p, 0)`.
pub fn minimal_period(spec: &NonlinearitySpec, p: f64) -> Result<f64> {
    match classify_orbit(spec, PhasePoint::new(p, 0.0)) {
        OrbitClass::Periodic { period, .. } => Ok(period),
        other => Err(Error::Precondition(format!(
            "(p, 0) = ({p}, 0) is not on a periodic orbit: {}",
            other.tag()
        ))),
    }
}

/// `F(anchor) - F(u)`. Next to the anchor the direct difference cancels, so
/// there it is `-∫ f` over one Kronrod panel instead.
fn level_gap(spec: &NonlinearitySpec, anchor: f64, f_anchor: f64, u: f64) -> f64 {
    if (u - anchor).abs() < 1e-2 * (1.0 + anchor.abs()) {
        -quadrature::kronrod15(|t| spec.f(t), anchor, u)
    } else {
        f_anchor - spec.antideriv(u)
    }
}

/// `2 ∫_p^q du / sqrt(2(c - F(u)))` with `u = p + s²` on the left half and
/// `u = q - s²` on the right half, which removes the inverse square-root
/// singularities at both turning points.
pub fn period_between(spec: &NonlinearitySpec, p: f64, q: f64) -> Result<f64> {
    if !(p < q) {
        return Err(Error::Argument(format!("period needs p < q, got {p}, {q}")));
    }
    let m = 0.5 * (p + q);
    let s_max = (m - p).sqrt();
    let fp = spec.antideriv(p);
    let fq = spec.antideriv(q);
    let left = |s: f64| {
        let gap = level_gap(spec, p, fp, p + s * s);
        if gap <= 0.0 {
            0.0
        } else {
            2.0 * s / (2.0 * gap).sqrt()
        }
    };
    let right = |s: f64| {
        let gap = level_gap(spec, q, fq, q - s * s);
        if gap <= 0.0 {
            0.0
        } else {
            2.0 * s / (2.0 * gap).sqrt()
        }
    };
    let a = quadrature::integrate(left, 0.0, s_max, 0.0, 1e-10);
    let b = quadrature::integrate(right, 0.0, s_max, 0.0, 1e-10);
    let value = 2.0 * (a.value + b.value);
    if !(a.converged && b.converged) || !value.is_finite() {
        return Err(Error::Precondition(format!(
            "period quadrature did not reach tolerance (estimate {value})"
        )));
    }
    Ok(value)
}

/// Sampled steady state `φ(x)` with its slope `φ'(x)`.
#[derive(Debug, Clone)]
pub struct OrbitProfile {
    pub profile: Profile,
    pub slope: Vec<f64>,
    pub level: f64,
}

/// Integrate `u' = v, v' = -f(u)` from the turning point (periodic and
/// homoclinic orbits) or the point of largest `|v|` (heteroclinic orbits),
/// placed at the node nearest to `x = 0`. After each step `v` is projected
/// back onto the level set `v = ±sqrt(2(c - F(u)))`.
pub fn orbit_profile(
    spec: &NonlinearitySpec,
    cls: &OrbitClass,
    x_range: (f64, f64),
    dx: f64,
) -> Result<OrbitProfile> {
    let grid = Grid::aligned(x_range.0, x_range.1, dx)?;
    let (u_start, v_start, level) = match *cls {
        OrbitClass::Equilibrium { u_star } => {
            return Ok(OrbitProfile {
                profile: Profile::constant(grid, u_star),
                slope: vec![0.0; grid.len()],
                level: spec.antideriv(u_star),
            })
        }
        OrbitClass::Unresolved { ref reason } => {
            return Err(Error::Precondition(format!("cannot sample unresolved orbit: {reason}")))
        }
        OrbitClass::Periodic { q, .. } => (q, 0.0, spec.antideriv(q)),
        OrbitClass::Homoclinic { extremum, .. } => (extremum, 0.0, spec.antideriv(extremum)),
        OrbitClass::Heteroclinic { left, right, level } => {
            let um = argmin_antideriv(spec, left, right);
            let v = (2.0 * (level - spec.antideriv(um))).max(0.0).sqrt();
            (um, v, level)
        }
    };

    // Each half runs on the level of the equilibrium it approaches, and `u` is
    // kept inside the orbit's range: near a saddle a level off by one ulp
    // otherwise carries the profile across the equilibrium.
    let (lo, hi) = cls.u_extent().expect("resolved orbit");
    // Separatrix halves are monotone, so the sign of `v` is fixed there.
    let (fwd, bwd) = match *cls {
        OrbitClass::Heteroclinic { left, right, .. } => (
            (spec.antideriv(right), Some((1.0, right))),
            (spec.antideriv(left), Some((1.0, left))),
        ),
        OrbitClass::Homoclinic { base, extremum, .. } => {
            let s = (base - extremum).signum();
            ((level, Some((s, base))), (level, Some((-s, base))))
        }
        _ => ((level, None), (level, None)),
    };
    let rhs = |s: [f64; 2]| [s[1], -spec.f(s[0])];
    let projector = |(c, monotone): (f64, Option<(f64, f64)>)| {
        move |s: [f64; 2]| {
            let u = s[0].clamp(lo, hi);
            match monotone {
                Some((sign, eq)) => {
                    // F(eq) - F(u) without cancellation close to the equilibrium
                    let gap = if (eq - u).abs() < 1e-2 * (1.0 + eq.abs()) {
                        quadrature::kronrod15(|w| spec.f(w), u, eq)
                    } else {
                        c - spec.antideriv(u)
                    };
                    [u, sign * (2.0 * gap.max(0.0)).sqrt()]
                }
                None => {
                    let gap = (c - spec.antideriv(u)).max(0.0);
                    [u, s[1].signum() * (s[1] != 0.0) as i32 as f64 * (2.0 * gap).sqrt()]
                }
            }
        }
    };
    let tol = Tolerance {
        rtol: 1e-12,
        atol: 1e-13,
    };

    let n = grid.len();
    let j0 = grid.nearest(0.0).unwrap_or(if grid.x_min() > 0.0 { 0 } else { n - 1 });
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    u[j0] = u_start;
    v[j0] = v_start;

    let project = projector(fwd);
    let mut state = [u_start, v_start];
    let mut h = 0.1 * dx;
    for j in j0 + 1..n {
        let (s, hn) = dopri_integrate(&rhs, &project, state, grid.x(j - 1), grid.x(j), h, tol);
        state = s;
        h = hn;
        u[j] = s[0];
        v[j] = s[1];
    }
    let project = projector(bwd);
    state = [u_start, v_start];
    h = 0.1 * dx;
    for j in (0..j0).rev() {
        let (s, hn) = dopri_integrate(&rhs, &project, state, grid.x(j + 1), grid.x(j), h, tol);
        state = s;
        h = hn;
        u[j] = s[0];
        v[j] = s[1];
    }
    Ok(OrbitProfile {
        profile: Profile::new(grid, u)?,
        slope: v,
        level,
    })
}

/// Point of `(a, b)` where `F` is smallest; where `f` changes sign there the
/// minimizer is refined by bisection on `f`.
pub(crate) fn argmin_antideriv(spec: &NonlinearitySpec, a: f64, b: f64) -> f64 {
    let cells = 4000;
    let h = (b - a) / cells as f64;
    let mut best = (a + 0.5 * h, spec.antideriv(a + 0.5 * h));
    for k in 1..cells {
        let x = a + k as f64 * h;
        let fx = spec.antideriv(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let (lo, hi) = ((best.0 - h).max(a), (best.0 + h).min(b));
    let (flo, fhi) = (spec.f(lo), spec.f(hi));
    if flo < 0.0 && fhi > 0.0 {
        bisect_sign(&|x| spec.f(x), lo, hi)
    } else {
        golden_min(|x| spec.antideriv(x), lo, hi).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn allen_cahn() -> NonlinearitySpec {
        NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).unwrap()
    }

    fn focusing() -> NonlinearitySpec {
        NonlinearitySpec::polynomial(vec![0.0, -1.0, 0.0, 1.0]).unwrap()
    }

    fn linear() -> NonlinearitySpec {
        NonlinearitySpec::polynomial(vec![0.0, 1.0]).unwrap()
    }

    /// Complete elliptic integral of the first kind via the AGM.
    fn ellip_k(m: f64) -> f64 {
        let (mut a, mut b) = (1.0, (1.0 - m).sqrt());
        for _ in 0..60 {
            let an = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = an;
        }
        PI / (2.0 * a)
    }

    /// Period of u'' + u - u^3 = 0 with amplitude p < 1.
    fn duffing_period(p: f64) -> f64 {
        let m = p * p / (2.0 - p * p);
        4.0 * ellip_k(m) / (1.0 - 0.5 * p * p).sqrt()
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(&allen_cahn(), PhasePoint::new(0.0, 0.0)), 0.0);
        assert!((hamiltonian(&allen_cahn(), PhasePoint::new(1.0, 0.0)) - 0.25).abs() < 1e-15);
        assert_eq!(hamiltonian(&NonlinearitySpec::zero(), PhasePoint::new(3.0, 2.0)), 2.0);
    }

    #[test]
    fn equilibria_examples() {
        let roots = find_equilibria(&allen_cahn(), -2.0, 2.0).unwrap();
        let us: Vec<f64> = roots.iter().map(|r| r.u).collect();
        assert_eq!(us.len(), 3, "{us:?}");
        for (u, e) in us.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((u - e).abs() < 1e-12);
        }
        assert!(roots.iter().all(|r| !r.tangential));
        assert!(matches!(
            find_equilibria(&NonlinearitySpec::zero(), -1.0, 1.0),
            Err(Error::IdenticallyZero { .. })
        ));
        let half = NonlinearitySpec::polynomial(vec![0.0, 0.5]).unwrap();
        assert!(find_equilibria(&half, 1.0, 2.0).unwrap().is_empty());
    }

    #[test]
    fn tangential_root_is_flagged() {
        // f = (u - 0.3)^2 (u + 1): double root at 0.3 off the scan nodes
        let spec = NonlinearitySpec::polynomial(vec![0.09, -0.51, 0.4, 1.0]).unwrap();
        // (u-0.3)^2 (u+1) = u^3 + 0.4u^2 - 0.51u + 0.09
        let roots = find_equilibria(&spec, -2.0, 2.0 + 1e-4).unwrap();
        let tang: Vec<&Root> = roots.iter().filter(|r| r.tangential).collect();
        assert_eq!(tang.len(), 1, "{roots:?}");
        assert!((tang[0].u - 0.3).abs() < 1e-4);
        assert!(roots.iter().any(|r| !r.tangential && (r.u + 1.0).abs() < 1e-12));
    }

    #[test]
    fn turning_point_examples() {
        let tp = turning_points(&allen_cahn(), 0.0, -2.0, 2.0).unwrap();
        let us: Vec<f64> = tp.iter().map(|r| r.u).collect();
        assert_eq!(us.len(), 3, "{us:?}");
        for (u, e) in us.iter().zip([-SQRT_2, 0.0, SQRT_2]) {
            assert!((u - e).abs() < 1e-9, "{us:?}");
        }
        assert!(turning_points(&allen_cahn(), -1.0, -1.0, 1.0).unwrap().is_empty());
        let tp = turning_points(&linear(), 2.0, -5.0, 5.0).unwrap();
        assert_eq!(tp.len(), 2);
        assert!((tp[0].u + 2.0).abs() < 1e-12 && (tp[1].u - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        match classify_orbit(&allen_cahn(), PhasePoint::new(0.5, 0.0)) {
            OrbitClass::Periodic { p, q, period, .. } => {
                assert!((p + 0.5).abs() < 1e-12 && (q - 0.5).abs() < 1e-12);
                assert!((period - duffing_period(0.5)).abs() < 1e-8 * period);
            }
            other => panic!("{other:?}"),
        }
        match classify_orbit(&allen_cahn(), PhasePoint::new(0.0, 0.5f64.sqrt())) {
            OrbitClass::Heteroclinic { left, right, .. } => {
                assert!((left + 1.0).abs() < 1e-9 && (right - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        match classify_orbit(&focusing(), PhasePoint::new(SQRT_2, 0.0)) {
            OrbitClass::Homoclinic { base, extremum, .. } => {
                assert!(base.abs() < 1e-9);
                assert!((extremum - SQRT_2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            classify_orbit(&allen_cahn(), PhasePoint::new(1.0, 0.0)),
            OrbitClass::Equilibrium { u_star: 1.0 }
        );
        // beyond the separatrix with the uncoerced quartic: escapes
        assert!(matches!(
            classify_orbit(&allen_cahn(), PhasePoint::new(0.0, 2.0)),
            OrbitClass::Unresolved { .. }
        ));
        // with coercion the same start lies on a large periodic orbit
        let coerced = allen_cahn().with_kappa(3.0).unwrap();
        assert!(matches!(
            classify_orbit(&coerced, PhasePoint::new(0.0, 2.0)),
            OrbitClass::Periodic { .. }
        ));
    }

    #[test]
    fn harmonic_period_is_two_pi() {
        for p in [0.5, 1.0, 2.0, -0.3] {
            let rho = minimal_period(&linear(), p).unwrap();
            assert!((rho - 2.0 * PI).abs() < 1e-9 * 2.0 * PI, "{p}: {rho}");
        }
        assert!(matches!(
            minimal_period(&allen_cahn(), 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn small_amplitude_period_tends_to_linearization() {
        let r1 = minimal_period(&allen_cahn(), 0.1).unwrap();
        let r2 = minimal_period(&allen_cahn(), 0.01).unwrap();
        assert!(r1 > r2 && r2 > 2.0 * PI);
        assert!((r2 - 2.0 * PI) < 1e-3);
        assert!((r1 - duffing_period(0.1)).abs() < 1e-8 * r1);
    }

    #[test]
    fn period_diverges_near_separatrix() {
        let ps = [0.9, 0.99, 0.999, 0.9999];
        let rhos: Vec<f64> = ps.iter().map(|&p| minimal_period(&allen_cahn(), p).unwrap()).collect();
        for w in rhos.windows(2) {
            assert!(w[1] > w[0] + 4.0, "{rhos:?}");
        }
        for (&p, &r) in ps.iter().zip(&rhos) {
            assert!((r - duffing_period(p)).abs() < 1e-7 * r, "{p}: {r} vs {}", duffing_period(p));
        }
    }

    #[test]
    fn standing_wave_profile_matches_tanh() {
        let cls = classify_orbit(&allen_cahn(), PhasePoint::new(0.0, 0.5f64.sqrt()));
        let op = orbit_profile(&allen_cahn(), &cls, (-10.0, 10.0), 0.05).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..op.profile.len() {
            let x = op.profile.x(j);
            err = err.max((op.profile.values()[j] - (x / SQRT_2).tanh()).abs());
            let h = hamiltonian(&allen_cahn(), PhasePoint::new(op.profile.values()[j], op.slope[j]));
            assert!((h - op.level).abs() <= 1e-9);
        }
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn ground_state_profile_matches_sech() {
        let cls = classify_orbit(&focusing(), PhasePoint::new(SQRT_2, 0.0));
        let op = orbit_profile(&focusing(), &cls, (-10.0, 10.0), 0.05).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..op.profile.len() {
            let x = op.profile.x(j);
            err = err.max((op.profile.values()[j] - SQRT_2 / x.cosh()).abs());
        }
        assert!(err <= 1e-6, "{err}");
        // turning-point start is a symmetry center
        let n = op.profile.len();
        for s in 0..n / 2 {
            assert!((op.profile.values()[s] - op.profile.values()[n - 1 - s]).abs() < 1e-8);
        }
    }

    #[test]
    fn equilibrium_profile_is_constant() {
        let op = orbit_profile(
            &allen_cahn(),
            &OrbitClass::Equilibrium { u_star: 0.0 },
            (-1.0, 1.0),
            0.1,
        )
        .unwrap();
        assert!(op.profile.values().iter().all(|&v| v == 0.0));
        assert!(orbit_profile(
            &allen_cahn(),
            &OrbitClass::Unresolved { reason: "x".into() },
            (-1.0, 1.0),
            0.1
        )
        .is_err());
    }

    #[test]
    fn periodic_time_of_flight_matches_quadrature() {
        let spec = allen_cahn();
        let cls = classify_orbit(&spec, PhasePoint::new(0.8, 0.0));
        let period = match cls {
            OrbitClass::Periodic { period, .. } => period,
            ref other => panic!("{other:?}"),
        };
        let dx = 1e-3;
        let op = orbit_profile(&spec, &cls, (0.0, period * 1.2), dx).unwrap();
        // next maximum after the start at x = 0: sign change of the slope from + to -
        let v = &op.slope;
        let k = (1..v.len())
            .find(|&k| op.profile.x(k) > 0.5 * period && v[k - 1] > 0.0 && v[k] <= 0.0)
            .unwrap();
        let x_cross = op.profile.x(k - 1) + dx * v[k - 1] / (v[k - 1] - v[k]);
        assert!((x_cross - period).abs() < 1e-6 * period, "{x_cross} vs {period}");
        // symmetry about the start turning point for the mirrored range
        let sym = orbit_profile(&spec, &cls, (-3.0, 3.0), 0.01).unwrap();
        let n = sym.profile.len();
        for s in 0..n / 2 {
            assert!((sym.profile.values()[s] - sym.profile.values()[n - 1 - s]).abs() < 1e-8);
        }
    }
}
