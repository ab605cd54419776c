//! Integrals against the Poisson measure `dx / (1 + x^2)`.

use serde::Serialize;

use super::{FuncError, Outside, PiecewiseFn};
use crate::logscalar::LogScalar;
use crate::poly;
use crate::quad;

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
pub const DEFAULT_DIVERGENCE_CAP: i64 = 60;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoissonValue {
    pub value: f64,
    pub log_value: LogScalar,
    /// Upper bound on the part of the integral not accounted for in `value`.
    pub tail_bound: f64,
}

/// `atan(b) - atan(a)` without cancellation when both ends are far out on
/// the same side.
pub fn atan_diff(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        if b.is_infinite() {
            return (1.0 / a).atan();
        }
        return ((b - a) / (1.0 + a * b)).atan();
    }
    if b < 0.0 {
        if a.is_infinite() {
            return (-1.0 / b).atan();
        }
        return ((b - a) / (1.0 + a * b)).atan();
    }
    b.atan() - a.atan()
}

/// `∫ f dP`. Each polynomial piece is integrated with a Gauss–Legendre rule
/// on panels small enough relative to the poles at `±i` that the rule is
/// exact to rounding; regions where the default value 1 applies use `atan`.
pub fn poisson_integral(f: &PiecewiseFn, tail_tol: f64) -> Result<PoissonValue, FuncError> {
    if !(tail_tol > 0.0) {
        return Err(FuncError::Unsupported(format!("tail_tol must be positive, got {tail_tol}")));
    }
    let mut acc = LogScalar::ZERO;
    for p in f.pieces() {
        let c = &p.coeffs;
        let lo = p.lo;
        let base = quad::near_pole_safe(&|x: f64| poly::eval(c, x - lo) / (1.0 + x * x), p.lo, p.hi);
        let term = LogScalar::from_f64(base);
        acc = acc + p.log_scale.map_or(term, |s| term * s);
    }
    if f.default() == Outside::One {
        let mut cursor = f64::NEG_INFINITY;
        let mut gaps = 0.0;
        for p in f.pieces() {
            gaps += atan_diff(cursor, p.lo);
            cursor = p.hi;
        }
        gaps += atan_diff(cursor, f64::INFINITY);
        acc = acc + LogScalar::from_f64(gaps);
    }
    Ok(PoissonValue { value: acc.to_f64(), log_value: acc, tail_bound: 0.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesSum {
    pub value: f64,
    /// Certified bound on the omitted tail; `inf` when no bound was available.
    pub tail_bound: f64,
    pub last_index: i64,
    pub certified: bool,
}

/// Sums `term(n)` for `n = start, start + 1, ...` until `tail(n)`, a bound on
/// `Σ_{k > n} term(k)`, drops below `tail_tol`, or `cap` is reached. At the
/// cap, three consecutive non-decreasing terms are reported as divergence.
pub fn poisson_series(
    term: &dyn Fn(i64) -> f64,
    start: i64,
    tail: Option<&dyn Fn(i64) -> f64>,
    tail_tol: f64,
    cap: i64,
) -> Result<SeriesSum, FuncError> {
    let mut sum = 0.0;
    let mut recent: Vec<f64> = Vec::new();
    let mut n = start;
    while n <= cap {
        let t = term(n);
        sum += t;
        recent.push(t);
        if let Some(tb) = tail {
            let b = tb(n);
            if b < tail_tol {
                return Ok(SeriesSum { value: sum, tail_bound: b, last_index: n, certified: true });
            }
        }
        n += 1;
    }
    let k = recent.len();
    if k >= 3 && recent[k - 3] <= recent[k - 2] && recent[k - 2] <= recent[k - 1] && recent[k - 1] > 0.0 {
        return Err(FuncError::Divergent { cap });
    }
    let tail_bound = tail.map_or(f64::INFINITY, |tb| tb(cap));
    Ok(SeriesSum { value: sum, tail_bound, last_index: cap, certified: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::Piece;
    use std::f64::consts::PI;

    #[test]
    fn constant_one() {
        let v = poisson_integral(&PiecewiseFn::one(), 1e-10).unwrap();
        assert!((v.value - PI).abs() < 1e-15);
    }

    #[test]
    fn indicator_of_unit_interval() {
        let v = poisson_integral(&PiecewiseFn::indicator(0.0, 1.0), 1e-10).unwrap();
        assert!((v.value - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn default_one_with_a_dip() {
        // 1 outside [-1, 1], 0 inside
        let f = PiecewiseFn::new(vec![Piece::new(-1.0, 1.0, vec![0.0])], Outside::One).unwrap();
        let v = poisson_integral(&f, 1e-10).unwrap();
        assert!((v.value - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn far_gap_no_cancellation() {
        assert!((atan_diff(1e10, 2e10) - 5e-11).abs() < 1e-22);
        assert!((atan_diff(1e10, f64::INFINITY) - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn series_certifies_and_flags_divergence() {
        let s = poisson_series(&|n| 1.0 / (n * n) as f64, 1, Some(&|n| 1.0 / n as f64), 1e-3, 10_000).unwrap();
        assert!(s.certified);
        assert!((s.value - PI * PI / 6.0).abs() < 1.1e-3);
        let e = poisson_series(&|n| n as f64, 1, None, 1e-10, 60).unwrap_err();
        assert!(matches!(e, FuncError::Divergent { .. }));
    }
}
