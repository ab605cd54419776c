//! Lower bound for `∫ Ω dP` over Lipschitz `Ω` with `Ω(2^n) >= 2^n/√n`.

use crate::quad::GaussLegendre;

/// `Σ_{n=2}^{N} ∫_{J_n} max(2^n/√n - C_0 (x - 2^n), 0) dP`. On `J_n` the
/// smallest `C_0`-Lipschitz function above the peaks is exactly this
/// envelope, since all envelopes share the slope `-C_0` and later peaks
/// start higher.
pub fn lipschitz_obstruction(c0: f64, n_max: u64) -> f64 {
    let gl = GaussLegendre::cached(24);
    let mut sum = 0.0;
    for n in (2..=n_max).rev() {
        let nf = n as f64;
        let a = nf.powf(-0.5);
        // x = 2^n (1 + s); dP = 4^n ds / (1 + 4^n (1 + s)^2)
        let eps = 0.25f64.powf(nf);
        let s1 = (a / c0).min(1.0);
        sum += gl.integrate(|s| (a - c0 * s) / (eps + (1.0 + s) * (1.0 + s)), 0.0, s1);
    }
    sum
}

/// The Beurling–Malliavin density of `{2^n}`; quoted, not computed.
pub fn bm_density_constant() -> f64 {
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{poisson_integral, Piece, PiecewiseFn, Outside};

    #[test]
    fn small_n_matches_exact_integration() {
        let c0 = 1.0;
        let mut pieces = Vec::new();
        for n in 2..=4 {
            let p = 2f64.powi(n);
            let h = p / (n as f64).sqrt();
            let end = (p + h / c0).min(2.0 * p);
            pieces.push(Piece::new(p, end, vec![h, -c0]));
            if end < 2.0 * p {
                pieces.push(Piece::new(end, 2.0 * p, vec![0.0]));
            }
        }
        let f = PiecewiseFn::new(pieces, Outside::Zero).unwrap();
        let exact = poisson_integral(&f, 1e-10).unwrap().value;
        assert!((lipschitz_obstruction(c0, 4) - exact).abs() < 1e-14, "{exact}");
    }

    #[test]
    fn harmonic_growth_and_steep_limit() {
        let a = lipschitz_obstruction(1.0, 100);
        let b = lipschitz_obstruction(1.0, 10_000);
        assert!(b / a > 1.5 && b / a < 2.5, "{a} {b}");
        assert!(lipschitz_obstruction(1e8, 50) < 1e-6);
        assert_eq!(bm_density_constant(), 0.0);
    }
}
