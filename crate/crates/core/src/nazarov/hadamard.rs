//! Interpolation ratio `‖f‖_∞ / ((∫ f)^{α/2} (∫ |f'|^r)^{(1-α/2)/r})`,
//! `α = (2r - 2)/(2r - 1)`, on a single interval.

use super::NazarovError;
use crate::funcmodel::vr::abs_power_integral;
use crate::funcmodel::{Interval, PiecewiseFn};
use crate::poly;

pub fn alpha(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        (2.0 * r - 2.0) / (2.0 * r - 1.0)
    }
}

/// `(∫_a |f'|^r)^{1/r}`, or `sup_a |f'|` for `r = inf`.
pub fn derivative_lr_norm(f: &PiecewiseFn, a: &Interval, r: f64) -> f64 {
    let d = f.restrict(a).derivative();
    if r.is_infinite() {
        return d.sup_norm(a);
    }
    let total: f64 = d
        .pieces()
        .iter()
        .map(|p| abs_power_integral(&p.plain_coeffs(), 0.0, p.len(), r))
        .sum();
    total.powf(1.0 / r)
}

pub fn hadamard_landau_ratio(f: &PiecewiseFn, a: &Interval, r: f64) -> Result<f64, NazarovError> {
    if !(r > 1.0) {
        return Err(NazarovError::PreconditionViolated(format!("exponent r must exceed 1, got {r}")));
    }
    let sup = f.sup_norm(a);
    if sup > a.len() {
        return Err(NazarovError::PreconditionViolated(format!(
            "sup of f on [{}, {}] is {sup}, above the length {}",
            a.lo,
            a.hi,
            a.len()
        )));
    }
    let fr = f.restrict(a);
    // values are on the scale l(a), which bounds the sup
    if fr.pieces().iter().any(|p| poly::min_value(&p.plain_coeffs(), 0.0, p.len()) < -1e-12 * a.len()) {
        return Err(NazarovError::PreconditionViolated("f must be nonnegative on the interval".into()));
    }
    if sup == 0.0 {
        return Ok(0.0);
    }
    let integral = f.integrate(a)?;
    if integral <= 0.0 {
        return Err(NazarovError::ZeroIntegral);
    }
    let al = alpha(r);
    let d = derivative_lr_norm(f, a, r);
    // (∫|f'|^r)^{(1-α/2)/r} = (‖f'‖_r)^{1-α/2}
    Ok(sup / (integral.powf(al / 2.0) * d.powf(1.0 - al / 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_closed_forms() {
        let a = Interval::new(0.0, 1.0);
        let f = PiecewiseFn::tent(0.5, 0.25, 3.0);
        let inf = hadamard_landau_ratio(&f, &a, f64::INFINITY).unwrap();
        assert!((inf - 1.0).abs() < 1e-12, "{inf}");
        let two = hadamard_landau_ratio(&f, &a, 2.0).unwrap();
        assert!((two - 2f64.powf(-1.0 / 3.0)).abs() < 1e-12, "{two}");
    }

    #[test]
    fn zero_convention() {
        let v = hadamard_landau_ratio(&PiecewiseFn::zero(), &Interval::new(0.0, 1.0), 2.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn ceiling_enforced() {
        let f = PiecewiseFn::tent(0.5, 2.0, 8.0);
        assert!(hadamard_landau_ratio(&f, &Interval::new(0.0, 1.0), 2.0).is_err());
    }
}
