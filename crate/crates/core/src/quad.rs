//! Gauss–Legendre rules and a bisection-adaptive integrator.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared cached rule of order `n`.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(n).or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Bisection-adaptive Gauss–Legendre. Each panel is accepted when the
/// 15-point value and the sum over its halves agree within the panel's
/// share of `abs_tol`, or within rounding of the panel value.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> (f64, f64) {
    let gl = GaussLegendre::cached(15);
    let whole = gl.integrate(f, a, b);
    adaptive_rec(f, gl, a, b, whole, abs_tol, max_depth)
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    gl: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let left = gl.integrate(f, a, m);
    let right = gl.integrate(f, m, b);
    let err = (left + right - whole).abs();
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if err <= tol.max(floor) || depth == 0 || m <= a || m >= b {
        return (left + right, err);
    }
    let (l, el) = adaptive_rec(f, gl, a, m, left, 0.5 * tol, depth - 1);
    let (r, er) = adaptive_rec(f, gl, m, b, right, 0.5 * tol, depth - 1);
    (l + r, el + er)
}

/// Integral of a smooth `f` against a weight whose only singularities are at
/// `±i`. Panels are bisected until each half-length is at most a quarter of
/// the distance from its midpoint to the poles, which bounds the Bernstein
/// ellipse parameter away from 1 and makes a 24-point rule exact to rounding.
pub fn near_pole_safe<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let gl = GaussLegendre::cached(24);
    let mut acc = 0.0;
    let mut stack = vec![(a, b)];
    while let Some((lo, hi)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let reach = (1.0 + mid * mid).sqrt();
        if half <= 0.25 * reach || mid <= lo || mid >= hi {
            acc += gl.integrate(f, lo, hi);
        } else {
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::new(10);
        // exact up to degree 19
        let v = gl.integrate(|x| x.powi(19) + x.powi(18), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn arctan_weight() {
        let v = near_pole_safe(&|x: f64| 1.0 / (1.0 + x * x), -1e6, 1e6);
        let exact = 2.0 * 1e6f64.atan();
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }

    #[test]
    fn adaptive_log_kink() {
        let (v, _) = adaptive(&|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-12, 50);
        assert!((v - 4.0 / 3.0).abs() < 1e-10);
    }
}
