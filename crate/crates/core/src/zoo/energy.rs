//! Energy `∬ ((K(x) - K(y))/(x - y))^2 dx dy` of `K = Υ/x` for the
//! one-sided family, restricted to the squares over its hills.

use super::{Family, MajorantSpec, ZooError};
use crate::quad::GaussLegendre;

/// `Σ_{n=n_min}^{N} n^{-2α}`: the per-square lower bound
/// `(n^{-α})^2 / |I_n|^2 · |I_n|^2` summed over hills.
pub fn energy_lower(alpha: f64, n_min: u32, n_max: u64) -> f64 {
    let mut sum = 0.0;
    for n in (n_min as u64..=n_max).rev() {
        sum += (n as f64).powf(-2.0 * alpha);
    }
    sum
}

/// The energy over the square `I_n × I_n` by tensor Gauss–Legendre
/// quadrature. The double integral is invariant under `x -> 2^n x`, so it is
/// evaluated in the variable `s = x/2^n - 1` for any `n`.
pub fn energy_block_quadrature(spec: &MajorantSpec, n: u32) -> Result<f64, ZooError> {
    if spec.family != Family::OneSided {
        return Err(ZooError::Param(format!("energy is defined for the one-sided family, not {}", spec.family.name())));
    }
    let (alpha, beta) = (spec.params.alpha.unwrap_or(0.5), spec.params.beta.unwrap_or(1.0));
    let nf = n as f64;
    let width = nf.powf(-beta);
    let slope = nf.powf(beta - alpha);
    let k = |s: f64| slope * s.min(width - s).max(0.0) / (1.0 + s);
    // The difference quotient jumps at the corner (w/2, w/2); grade panels
    // geometrically towards the kink.
    let half = 0.5 * width;
    let mut edges: Vec<f64> = (0..40).map(|k| half * (1.0 - 0.5f64.powi(k))).collect();
    edges.push(half);
    edges.extend((0..40).rev().map(|k| half * (1.0 + 0.5f64.powi(k))));
    let gl = GaussLegendre::cached(24);
    let mut total = 0.0;
    for a in edges.windows(2) {
        for b in edges.windows(2) {
            total += gl.integrate(
                |x| {
                    gl.integrate(
                        |y| {
                            let d = x - y;
                            if d == 0.0 {
                                let t = x.min(width - x);
                                let dt = if x < half { 1.0 } else { -1.0 };
                                let kp = slope * (dt * (1.0 + x) - t) / ((1.0 + x) * (1.0 + x));
                                kp * kp
                            } else {
                                let q = (k(x) - k(y)) / d;
                                q * q
                            }
                        },
                        b[0],
                        b[1],
                    )
                },
                a[0],
                a[1],
            );
        }
    }
    Ok(total)
}
