//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Single 15-point Kronrod panel over `[a, b]`.
pub fn kronrod15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    kronrod(&f, a, b).value
}

/// Integrate `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol * |I|)`. Reversed limits flip the sign.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    integrate_with_limit(f, a, b, abs_tol, rel_tol, 4000)
}

pub fn integrate_with_limit<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
        };
    }
    if a > b {
        let r = integrate_with_limit(f, b, a, abs_tol, rel_tol, max_segments);
        return QuadResult {
            value: -r.value,
            ..r
        };
    }

    let first = kronrod(&f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_segments {
            break;
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(worst);
            break;
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // resum to shed accumulated cancellation from the running updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let abs_error: f64 = heap.iter().map(|s| s.error).sum();
    QuadResult {
        value,
        abs_error,
        converged: abs_error <= abs_tol.max(rel_tol * value.abs()) * 1.0001,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, 0.0, 1e-14);
        assert!((r.value - 8.0).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn reversed_limits_change_sign() {
        let r = integrate(f64::exp, 1.0, 0.0, 0.0, 1e-12);
        assert!((r.value + (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 0.0, 1e-10);
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }
}
