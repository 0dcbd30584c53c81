//! Small explicit integrators: classical RK4 for the scalar limit ODE and an
//! embedded Dormand-Prince 5(4) pair for planar systems.

/// Classical fourth-order Runge-Kutta step for `y' = g(y)`.
#[inline]
pub fn rk4_step<G: Fn(f64) -> f64>(g: &G, y: f64, h: f64) -> f64 {
    let k1 = g(y);
    let k2 = g(y + 0.5 * h * k1);
    let k3 = g(y + 0.5 * h * k2);
    let k4 = g(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

pub type State2 = [f64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

/// Adaptive Dormand-Prince integration of `y' = g(y)` from `t0` to `t1`
/// (either direction). `project` is applied after every accepted step.
pub fn dopri_integrate<G, P>(
    g: &G,
    project: &P,
    mut y: State2,
    t0: f64,
    t1: f64,
    h_init: f64,
    tol: Tolerance,
) -> (State2, f64)
where
    G: Fn(State2) -> State2,
    P: Fn(State2) -> State2,
{
    let span = t1 - t0;
    if span == 0.0 {
        return (y, h_init);
    }
    let dir = span.signum();
    let mut h = h_init.abs().min(span.abs()) * dir;
    let mut t = t0;
    let mut k1 = g(y);
    let mut guard = 0usize;
    while (t1 - t) * dir > 0.0 {
        guard += 1;
        if guard > 10_000_000 {
            break;
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let add = |y: State2, terms: &[(f64, State2)]| {
            let mut out = y;
            for (c, k) in terms {
                out[0] += h * c * k[0];
                out[1] += h * c * k[1];
            }
            out
        };
        let k2 = g(add(y, &[(A21, k1)]));
        let k3 = g(add(y, &[(A31, k1), (A32, k2)]));
        let k4 = g(add(y, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = g(add(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = g(add(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
        let y5 = add(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = g(y5);
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = project(y5);
            k1 = g(y);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            h = 1e-14 * (1.0 + t.abs()) * dir;
        }
    }
    (y, h)
}
