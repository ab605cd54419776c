//! Smallness propagation for a bandlimited function bounded by the
//! power-hills weight.
//!
//! Generation 0 is `I_n = [2^n - 2^n/n^γ, 2^n + 2^n/n^γ]` with `h_0 = n^γ`.
//! Each step dilates about `2^n`: `|I_{n,m+1}| = (h_m^α / 2) |I_{n,m}|`, and the
//! bound `|f| <= exp(-C^{m+1} 2^n)` there gives `h_{m+1} = C^{m+1} 2^n / |I_{n,m+1}|`.
//! Then `|I_{n,m}| = b_m n^{-e_m} 2^n` with `e_m = γ(1-α)^m` and a bracket
//! factor `b_m` independent of `n`.

use serde::Serialize;

use super::ZooError;
use crate::funcmodel::Interval;
use crate::logscalar::LogScalar;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IterationState {
    pub n: u32,
    pub m: u32,
    pub interval: Interval,
    /// Log of the smallness bound, `-C^m 2^n`.
    pub log_bound: LogScalar,
    /// `e_m`.
    pub length_exponent: f64,
    /// `b_m = |I_{n,m}| / (n^{-e_m} 2^n)`.
    pub bracket: f64,
}

/// The first `m` with `γ(1-α)^m < 1`.
pub fn first_subcritical(gamma: f64, alpha_b: f64) -> u32 {
    let mut e = gamma;
    let mut m = 0;
    while e >= 1.0 {
        e *= 1.0 - alpha_b;
        m += 1;
    }
    m
}

/// All generations `0..=m_max` for `n_min <= n <= n_max`, ordered by `m`
/// then `n`. Fails if two intervals of one generation meet.
pub fn borichev_iterate(
    gamma: f64,
    c: f64,
    alpha_b: f64,
    m_max: u32,
    n_min: u32,
    n_max: u32,
) -> Result<Vec<IterationState>, ZooError> {
    let p = |ok: bool, msg: String| if ok { Ok(()) } else { Err(ZooError::Param(msg)) };
    p(gamma > 1.0, format!("gamma = {gamma} must exceed 1"))?;
    p(c > 0.0 && c < 1.0, format!("C = {c} must lie in (0, 1)"))?;
    p(alpha_b > 0.0 && alpha_b < 0.5, format!("alpha_B = {alpha_b} must lie in (0, 1/2)"))?;
    p(n_min >= 3 && n_max >= n_min && n_max <= 1000, format!("n range [{n_min}, {n_max}] must satisfy 3 <= n_min <= n_max <= 1000"))?;

    let mut table: Vec<Vec<IterationState>> = vec![Vec::new(); m_max as usize + 1];
    for n in n_min..=n_max {
        let nf = n as f64;
        let two_n = 2f64.powi(n as i32);
        let mut len = 2.0 * two_n * nf.powf(-gamma);
        let mut h = nf.powf(gamma);
        let mut e = gamma;
        for m in 0..=m_max {
            let mf = m as f64;
            table[m as usize].push(IterationState {
                n,
                m,
                interval: Interval::new(two_n - 0.5 * len, two_n + 0.5 * len),
                log_bound: LogScalar::from_log(-1, mf * c.ln() + nf * std::f64::consts::LN_2),
                length_exponent: e,
                bracket: len / (nf.powf(-e) * two_n),
            });
            len *= h.powf(alpha_b) / 2.0;
            h = c.powi(m as i32 + 1) * two_n / len;
            e *= 1.0 - alpha_b;
        }
    }
    let all: Vec<IterationState> = table.into_iter().flatten().collect();
    check_disjoint(&all)?;
    Ok(all)
}

/// Within each generation, consecutive intervals (by `n`) must not meet.
pub fn check_disjoint(states: &[IterationState]) -> Result<(), ZooError> {
    let mut sorted: Vec<&IterationState> = states.iter().collect();
    sorted.sort_by_key(|s| (s.m, s.n));
    for pair in sorted.windows(2) {
        if pair[0].m == pair[1].m && pair[0].interval.hi >= pair[1].interval.lo {
            return Err(ZooError::Disjointness { m: pair[0].m, n: pair[0].n, k: pair[1].n });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DivergenceSum {
    pub m: u32,
    pub e_m: f64,
    /// `C^m b_m`, so that `∫_{I_{n,m}} 2^{-2n} C^m 2^n dx = factor · n^{-e_m}`.
    pub factor: f64,
    pub n_cap: u64,
    /// `Σ_{n=3}^{n_cap} n^{-e_m}`.
    pub partial_sum: f64,
}

/// Partial sum of the lower bound for `-∫ log|f| dP` from one generation,
/// extended past the tabulated `n` by the closed form of the lengths.
pub fn log_integral_divergence(states: &[IterationState], n_cap: u64) -> Result<DivergenceSum, ZooError> {
    let first = states.first().ok_or_else(|| ZooError::Param("empty generation".into()))?;
    if states.iter().any(|s| s.m != first.m) {
        return Err(ZooError::Param("states must come from a single generation".into()));
    }
    let e = first.length_exponent;
    let c_pow_m = (-first.log_bound).to_f64() / 2f64.powi(first.n as i32);
    let mut sum = 0.0;
    for n in (3..=n_cap.max(2)).rev() {
        sum += (n as f64).powf(-e);
    }
    Ok(DivergenceSum { m: first.m, e_m: e, factor: c_pow_m * first.bracket, n_cap, partial_sum: sum })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_and_first_generation() {
        let st = borichev_iterate(2.0, 0.5, 0.25, 4, 3, 40).unwrap();
        let g0: Vec<_> = st.iter().filter(|s| s.m == 0).collect();
        for s in &g0 {
            let want = 2.0 * 2f64.powi(s.n as i32) / (s.n as f64).powi(2);
            assert!((s.interval.len() - want).abs() <= 1e-12 * want);
        }
        let e1 = st.iter().find(|s| s.m == 1).unwrap().length_exponent;
        assert_eq!(e1, 1.5);
        assert_eq!(first_subcritical(2.0, 0.25), 3);
        assert_eq!(2.0 * 0.75f64.powi(3), 0.84375);
    }

    #[test]
    fn bracket_is_independent_of_n() {
        let st = borichev_iterate(2.0, 0.5, 0.25, 5, 3, 40).unwrap();
        for m in 0..=5 {
            let b: Vec<f64> = st.iter().filter(|s| s.m == m).map(|s| s.bracket).collect();
            let spread = b.iter().fold(0.0f64, |a, &x| a.max((x - b[0]).abs()));
            assert!(spread <= 1e-12 * b[0], "m={m}: {b:?}");
        }
    }

    #[test]
    fn log_bound_and_ratio() {
        let st = borichev_iterate(2.5, 0.3, 0.2, 4, 3, 12).unwrap();
        for s in &st {
            let want = -(0.3f64.powi(s.m as i32)) * 2f64.powi(s.n as i32);
            assert!((s.log_bound.to_f64() - want).abs() <= 1e-12 * want.abs());
        }
        for m in 0..4 {
            let a = st.iter().find(|s| s.m == m).unwrap().length_exponent;
            let b = st.iter().find(|s| s.m == m + 1).unwrap().length_exponent;
            assert_eq!(b, a * 0.8);
        }
    }

    #[test]
    fn collision_reported() {
        let mut st = borichev_iterate(2.0, 0.5, 0.25, 1, 3, 6).unwrap();
        let i = st.iter().position(|s| s.m == 1 && s.n == 4).unwrap();
        st[i].interval = Interval::new(6.0, 30.0);
        let e = check_disjoint(&st).unwrap_err();
        assert!(matches!(e, ZooError::Disjointness { m: 1, n: 3, k: 4 }), "{e}");
    }

    #[test]
    fn p_series_converges_harmonic_grows() {
        let mk = |e: f64| IterationState {
            n: 3,
            m: 0,
            interval: Interval::new(0.0, 1.0),
            log_bound: LogScalar::from_f64(-8.0),
            length_exponent: e,
            bracket: 1.0,
        };
        let two = log_integral_divergence(&[mk(2.0)], 1_000_000).unwrap().partial_sum;
        assert!(two < std::f64::consts::PI.powi(2) / 6.0);
        let h = log_integral_divergence(&[mk(1.0)], 10_000).unwrap().partial_sum;
        assert!((h - (10_000f64.ln() + 0.5772156649 - 1.5)).abs() < 1e-3);
    }
}
