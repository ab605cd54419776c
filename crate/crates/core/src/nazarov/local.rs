//! Local majorant on one interval: rescale to `[-1/2, 1/2]` with unit sup
//! ceiling, build the regularized system, sum hats, rescale back.

use serde::Serialize;

use super::hadamard::{alpha, derivative_lr_norm};
use super::hat::{hat_majorant, HatSum};
use super::system::{attach_tails, ceiling_violations, covers_positivity, essential_maximal, IntervalSystem};
use super::NazarovError;
use crate::funcmodel::{Interval, PiecewiseFn};
use crate::hilbert::DerivSup;

pub const DEFAULT_MAX_DEPTH: u32 = 12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalOptions {
    pub max_depth: u32,
    /// Uniform probe count for the derivative sup, on top of per-hat probes.
    pub grid_n: usize,
    /// Grid used for the sampled majorization check.
    pub check_n: usize,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions { max_depth: DEFAULT_MAX_DEPTH, grid_n: 2000, check_n: 10_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalReport {
    pub delta: f64,
    /// `κ` as given.
    pub kappa: f64,
    /// `max(κ, δ)`, the value the construction is certified with.
    pub kappa_eff: f64,
    pub r: f64,
    #[serde(rename = "F")]
    pub f_major: PiecewiseFn,
    /// `supp F ⊂ (3/2) I`.
    pub support_ok: bool,
    /// `F >= f` on `I`, exactly on the system and on a check grid.
    pub majorize_ok: bool,
    /// `sup |(HF)'|` over the line.
    pub deriv_sup: f64,
    /// `(δ/κ_eff)^{2r/(2r-1)} ∫ F`.
    pub mass_lhs: f64,
    /// `(∫_I f)^α` with `α = (2r-2)/(2r-1)`.
    pub mass_rhs: f64,
    pub essential_count: usize,
    pub system_size: usize,
    pub promoted: usize,
}

#[derive(Clone, Debug)]
pub struct LocalOutput {
    pub report: LocalReport,
    /// Maximal essential intervals, in rescaled coordinates.
    pub essential: IntervalSystem,
    /// Regularized system, in rescaled coordinates.
    pub tau: IntervalSystem,
    /// The rescaled input `f((·) l(I) + c_I)/(δ l(I))` restricted to the unit interval.
    pub rescaled: PiecewiseFn,
}

pub fn unit_interval() -> Interval {
    Interval::new(-0.5, 0.5)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), NazarovError> {
    if cond {
        Ok(())
    } else {
        Err(NazarovError::PreconditionViolated(msg()))
    }
}

pub fn local_majorant(
    f: &PiecewiseFn,
    interval: &Interval,
    delta: f64,
    kappa: f64,
    r: f64,
    opts: &LocalOptions,
) -> Result<LocalOutput, NazarovError> {
    check(delta > 0.0 && kappa > 0.0, || format!("delta = {delta} and kappa = {kappa} must be positive"))?;
    check(r > 1.0, || format!("r = {r} must exceed 1"))?;
    let l = interval.len();
    let c = interval.center();
    let fr = f.restrict(interval);
    let sup = fr.sup_norm(interval);
    check(sup <= delta * l * (1.0 + 1e-12), || format!("sup norm {sup} exceeds delta·l(I) = {}", delta * l))?;
    let min = fr.min_value(interval);
    check(min >= -1e-12 * delta * l, || format!("f takes the negative value {min}"))?;
    let dn = derivative_lr_norm(&fr, interval, r);
    let bound = if r.is_infinite() { kappa } else { kappa * l.powf(1.0 / r) };
    check(dn <= bound * (1.0 + 1e-12), || format!("derivative L^{r} norm {dn} exceeds kappa·l(I)^(1/r) = {bound}"))?;
    let kappa_eff = kappa.max(delta);

    let unit = unit_interval();
    let ft = fr.pullback(l, c, 1.0 / (delta * l))?.restrict(&unit);
    let essential = essential_maximal(&ft, &unit, opts.max_depth);
    let tau = attach_tails(&essential);
    let bases = tau.intervals();
    let f_unit = hat_majorant(&bases);
    let f_major = f_unit.pullback(1.0 / l, -c / l, delta * l)?;

    let support_ok = f_unit.support().map_or(true, |s| s.lo >= -0.75 && s.hi <= 0.75);

    let exact = ceiling_violations(&ft, &tau).is_empty() && covers_positivity(&ft, &tau);
    let n = opts.check_n.max(2);
    let sampled = (0..n).all(|i| {
        let y = unit.lo + unit.len() * i as f64 / (n - 1) as f64;
        f_unit.eval(y) >= ft.eval(y)
    });
    let majorize_ok = exact && sampled;

    let hs = HatSum::new(&bases, 1.0);
    let probe = unit.dilate(3.0);
    let deriv_sup = match hs.deriv_sup(&probe, opts.grid_n) {
        DerivSup::Bounded { value, .. } => delta * value,
        DerivSup::Unbounded { .. } => f64::INFINITY,
    };

    let integral_f = fr.integrate(interval)?;
    let integral_major = f_major.integrate(&interval.dilate(1.5))?;
    let al = alpha(r);
    let p_lhs = if r.is_infinite() { 1.0 } else { 2.0 * r / (2.0 * r - 1.0) };
    let mass_lhs = (delta / kappa_eff).powf(p_lhs) * integral_major;
    let mass_rhs = integral_f.max(0.0).powf(al);

    let promoted = essential.members.iter().filter(|m| m.promoted).count();
    let report = LocalReport {
        delta,
        kappa,
        kappa_eff,
        r,
        f_major,
        support_ok,
        majorize_ok,
        deriv_sup,
        mass_lhs,
        mass_rhs,
        essential_count: essential.len(),
        system_size: tau.len(),
        promoted,
    };
    Ok(LocalOutput { report, essential, tau, rescaled: ft })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input() {
        let out = local_majorant(&PiecewiseFn::zero(), &unit_interval(), 1.0, 1.0, 2.0, &LocalOptions::default()).unwrap();
        assert!(out.report.f_major.is_zero());
        assert!(out.report.support_ok && out.report.majorize_ok);
        assert_eq!(out.report.deriv_sup, 0.0);
    }

    #[test]
    fn tent_fixture() {
        let f = PiecewiseFn::tent(0.0, 0.125, 1.0);
        let kappa = 1.0;
        let out = local_majorant(&f, &unit_interval(), 1.0, kappa, 2.0, &LocalOptions::default()).unwrap();
        let rep = &out.report;
        assert!(rep.support_ok && rep.majorize_ok);
        assert!(rep.deriv_sup.is_finite());
        assert!(rep.f_major.eval(0.0) >= 0.25);
    }

    #[test]
    fn covariance_under_exact_rescaling() {
        let f = PiecewiseFn::tent(0.0, 0.125, 1.0);
        let a = local_majorant(&f, &unit_interval(), 1.0, 1.0, 2.0, &LocalOptions::default()).unwrap();
        // g(x) = 4 f((x - 4)/2) lives on [3, 5)
        let g = f.pullback(0.5, -2.0, 4.0).unwrap();
        let iv = Interval::new(3.0, 5.0);
        let b = local_majorant(&g, &iv, 2.0, 4.0, 2.0, &LocalOptions::default()).unwrap();
        for i in 0..=200 {
            let y = -0.8 + 1.6 * i as f64 / 200.0;
            let want = 4.0 * a.report.f_major.eval(y);
            let got = b.report.f_major.eval(2.0 * y + 4.0);
            assert!((want - got).abs() <= 1e-12, "y={y}: {want} vs {got}");
        }
    }

    #[test]
    fn precondition_reported() {
        let f = PiecewiseFn::tent(0.0, 0.9, 1.0);
        let e = local_majorant(&f, &unit_interval(), 0.5, 10.0, 2.0, &LocalOptions::default()).unwrap_err();
        assert!(e.to_string().contains("sup norm"));
    }
}
