//! Global majorant: truncate near the origin, run the local construction on
//! every dyadic block `J_j` of a finite window and glue `Ω₁ = Σ F_j + M_R`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::hadamard::alpha;
use super::hat::HatSum;
use super::local::{local_majorant, LocalOptions};
use super::NazarovError;
use crate::funcmodel::{poisson_integral, vr_block_norms, DyadicBlock, Interval, Outside, PiecewiseFn, DEFAULT_TAIL_TOL};
use crate::hilbert::{sup_abs_on_region, DerivSup, HilbertError};
use crate::quad::GaussLegendre;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GlobalOptions {
    pub r: f64,
    pub eps: f64,
    /// Radius of the ball on which `Ω` is flattened before the block split.
    pub big_r: f64,
    /// Blocks `J_j` with `|j| <= n_window` are processed.
    pub n_window: i32,
    pub local: LocalOptions,
    /// Points of the sampled majorization check, spread evenly over the blocks.
    pub check_n: usize,
    /// Uniform probe count for the derivative sup.
    pub deriv_grid_n: usize,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        GlobalOptions {
            r: 2.0,
            eps: 0.1,
            big_r: 2.0,
            n_window: 16,
            local: LocalOptions::default(),
            check_n: 100_000,
            deriv_grid_n: 20_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub j: i32,
    pub interval: Interval,
    pub sup: f64,
    pub delta: f64,
    pub kappa: f64,
    pub system_size: usize,
    pub essential_count: usize,
    pub majorize_ok: bool,
    pub deriv_sup: f64,
    pub mass_lhs: f64,
    pub mass_rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalReport {
    pub r: f64,
    pub eps: f64,
    /// `V_r` norm of `Ω` over the window.
    pub mu: f64,
    /// `M_R = max_{|x| <= R} Ω`, added back as a constant.
    pub shift: f64,
    pub blocks: Vec<BlockReport>,
    /// Largest `δ_j / ε`; above 1 where `Ω` outgrows `ε|x|` on a block.
    pub max_delta_over_eps: f64,
    pub majorize_exact_ok: bool,
    pub majorize_grid_ok: bool,
    pub grid_points: usize,
    /// `min (Ω₁ - Ω)` over the grid.
    pub worst_grid_gap: f64,
    pub poisson_integral: f64,
    pub poisson_tail_bound: f64,
    /// `ε^{2 - 2r/(2r-1)}`.
    pub poisson_scale: f64,
    pub deriv_sup: f64,
    pub deriv_sup_at: f64,
    /// Part of `(HΩ₁)'` from blocks not adjacent to the block of the point.
    pub omega1_deriv_sup: f64,
    /// Part from the block of the point and its two neighbours.
    pub omega2_deriv_sup: f64,
    /// `sup |Ω|` outside the window, which the construction ignores.
    pub outside_window_sup: f64,
}

#[derive(Clone, Debug)]
pub struct GlobalOutput {
    /// `Σ F_j`; the majorant is this plus `report.shift`.
    pub sum: PiecewiseFn,
    pub report: GlobalReport,
}

impl GlobalOutput {
    pub fn eval(&self, x: f64) -> f64 {
        self.sum.eval(x) + self.report.shift
    }
}

const MULTIPOLE_TERMS: usize = 60;
/// Far-field expansion is used once `|x - c_j| >= FAR_FACTOR · l(J_j)`.
const FAR_FACTOR: f64 = 1.5;

/// `(HF_j)'` for one block: exact hat sum nearby, multipole expansion far away.
struct BlockField {
    j: i32,
    center: f64,
    len: f64,
    hats: HatSum,
    /// `m_k = ∫ F_j(t) ((t - c)/l)^k dt`.
    moments: Vec<f64>,
}

impl BlockField {
    fn new(j: i32, block: &Interval, tau_unit: &[Interval], delta: f64, f_major: &PiecewiseFn) -> Self {
        let c = block.center();
        let l = block.len();
        let bases: Vec<Interval> = tau_unit.iter().map(|b| Interval::new(c + l * b.lo, c + l * b.hi)).collect();
        let gl = GaussLegendre::cached(40);
        let mut moments = vec![0.0; MULTIPOLE_TERMS];
        for p in f_major.pieces() {
            let coeffs = p.plain_coeffs();
            for (k, m) in moments.iter_mut().enumerate() {
                *m += gl.integrate(|t| crate::poly::eval(&coeffs, t - p.lo) * ((t - c) / l).powi(k as i32), p.lo, p.hi);
            }
        }
        BlockField { j, center: c, len: l, hats: HatSum::new(&bases, delta), moments }
    }

    fn eval(&self, x: f64) -> f64 {
        let s = x - self.center;
        if s.abs() >= FAR_FACTOR * self.len {
            // d/dx ∫ F(t)/(x - t) dt = -Σ (k+1) m_k l^k / s^{k+2}
            let q = self.len / s;
            let mut acc = 0.0;
            for (k, m) in self.moments.iter().enumerate().rev() {
                acc = acc * q + (k + 1) as f64 * m;
            }
            -acc / (s * s)
        } else {
            self.hats.deriv_transform(x)
        }
    }
}

fn precondition(msg: String) -> NazarovError {
    NazarovError::PreconditionViolated(msg)
}

pub fn global_majorant(omega: &PiecewiseFn, opts: &GlobalOptions) -> Result<GlobalOutput, NazarovError> {
    let GlobalOptions { r, eps, big_r, n_window, .. } = *opts;
    if !(eps > 0.0) || !(big_r >= 0.0) || !(r > 1.0) || n_window < 0 {
        return Err(precondition(format!("need eps > 0, R >= 0, r > 1, n_window >= 0; got eps = {eps}, R = {big_r}, r = {r}, n_window = {n_window}")));
    }
    if omega.default() != Outside::Zero {
        return Err(precondition("the function must vanish outside its pieces".into()));
    }
    omega.require_continuous()?;
    let hull = omega.hull();
    if let Some(h) = hull {
        let min = omega.min_value(&h);
        if min < -1e-14 * omega.sup_norm(&h).max(1e-300) {
            return Err(precondition(format!("the function takes the negative value {min}")));
        }
    }
    let vr = vr_block_norms(omega, r, -n_window..=n_window)?;
    let mu = vr.sup;
    if !mu.is_finite() {
        return Err(precondition(format!("V_{r} norm over the window is not finite")));
    }
    poisson_integral(omega, DEFAULT_TAIL_TOL)?;

    let ball = Interval::new(-big_r.max(f64::MIN_POSITIVE), big_r.max(f64::MIN_POSITIVE));
    let shift = omega.sup_norm(&ball);
    let truncated = omega.excess_over(shift)?;

    let window = Interval::new(DyadicBlock(-n_window).interval().lo, DyadicBlock(n_window).interval().hi);
    let outside_window_sup = hull.map_or(0.0, |h| {
        let mut s: f64 = 0.0;
        if h.lo < window.lo {
            s = s.max(omega.sup_norm(&Interval::new(h.lo, window.lo)));
        }
        if h.hi > window.hi {
            s = s.max(omega.sup_norm(&Interval::new(window.hi, h.hi)));
        }
        s
    });

    let js: Vec<i32> = (-n_window..=n_window).collect();
    let results: Vec<Option<(BlockReport, PiecewiseFn, BlockField)>> = js
        .par_iter()
        .map(|&j| -> Result<_, NazarovError> {
            let block = DyadicBlock(j).interval();
            let fj = truncated.restrict(&block);
            let sup = fj.sup_norm(&block);
            if sup == 0.0 {
                return Ok(None);
            }
            let delta = eps.max(sup / block.len());
            let out = local_majorant(&fj, &block, delta, mu, r, &opts.local)?;
            let field = BlockField::new(j, &block, &out.tau.intervals(), delta, &out.report.f_major);
            let rep = &out.report;
            let br = BlockReport {
                j,
                interval: block,
                sup,
                delta,
                kappa: mu,
                system_size: rep.system_size,
                essential_count: rep.essential_count,
                majorize_ok: rep.support_ok && rep.majorize_ok,
                deriv_sup: rep.deriv_sup,
                mass_lhs: rep.mass_lhs,
                mass_rhs: rep.mass_rhs,
            };
            Ok(Some((br, out.report.f_major.clone(), field)))
        })
        .collect::<Result<_, _>>()?;

    let mut blocks = Vec::new();
    let mut parts = Vec::new();
    let mut fields = Vec::new();
    for (br, f, field) in results.into_iter().flatten() {
        blocks.push(br);
        parts.push(f);
        fields.push(field);
    }
    let refs: Vec<&PiecewiseFn> = parts.iter().collect();
    let sum = PiecewiseFn::sum(&refs)?;
    let max_delta_over_eps = blocks.iter().map(|b| b.delta / eps).fold(0.0, f64::max);
    let majorize_exact_ok = blocks.iter().all(|b| b.majorize_ok);

    // (A) on a grid spread evenly over the blocks
    let per_block = (opts.check_n / js.len()).max(2);
    let gaps: Vec<f64> = js
        .par_iter()
        .map(|&j| {
            let b = DyadicBlock(j).interval();
            (0..per_block)
                .map(|i| {
                    let x = b.lo + b.len() * i as f64 / per_block as f64;
                    let w = omega.eval(x);
                    let gap = sum.eval(x) + shift - w;
                    gap / (1.0 + w.abs() + shift)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let worst_grid_gap = gaps.into_iter().fold(f64::INFINITY, f64::min);
    let majorize_grid_ok = worst_grid_gap >= -1e-12;

    // (B)
    let pv = poisson_integral(&sum, DEFAULT_TAIL_TOL)?;
    let poisson = pv.value + PI * shift;
    let poisson_scale = eps.powf(2.0 - 2.0 * r / (2.0 * r - 1.0));

    // (C), split by block adjacency
    let total = |x: f64| -> Result<f64, HilbertError> { Ok(fields.iter().map(|f| f.eval(x)).sum()) };
    let near_part = |x: f64, near: bool| -> f64 {
        let k = DyadicBlock::containing(x).0;
        fields.iter().filter(|f| ((f.j - k).abs() <= 1) == near).map(|f| f.eval(x)).sum()
    };
    let omega1 = |x: f64| -> Result<f64, HilbertError> { Ok(near_part(x, false)) };
    let omega2 = |x: f64| -> Result<f64, HilbertError> { Ok(near_part(x, true)) };
    let mut probes: Vec<f64> = fields.iter().flat_map(|f| f.hats.probes()).collect();
    for j in -n_window..=n_window {
        let b = DyadicBlock(j).interval();
        probes.extend([b.lo, b.center()]);
    }
    let region = window.dilate(1.5);
    let sup_of = |h: &(dyn Fn(f64) -> Result<f64, HilbertError> + Sync)| -> Result<DerivSup, NazarovError> {
        if fields.is_empty() {
            return Ok(DerivSup::Bounded { value: 0.0, at: 0.0 });
        }
        Ok(sup_abs_on_region(h, &probes, &region, opts.deriv_grid_n)?)
    };
    let (deriv_sup, deriv_sup_at) = match sup_of(&total)? {
        DerivSup::Bounded { value, at } => (value, at),
        DerivSup::Unbounded { at } => (f64::INFINITY, at),
    };
    let omega1_deriv_sup = sup_of(&omega1)?.value();
    let omega2_deriv_sup = sup_of(&omega2)?.value();

    let report = GlobalReport {
        r,
        eps,
        mu,
        shift,
        blocks,
        max_delta_over_eps,
        majorize_exact_ok,
        majorize_grid_ok,
        grid_points: per_block * js.len(),
        worst_grid_gap,
        poisson_integral: poisson,
        poisson_tail_bound: pv.tail_bound,
        poisson_scale,
        deriv_sup,
        deriv_sup_at,
        omega1_deriv_sup,
        omega2_deriv_sup,
        outside_window_sup,
    };
    Ok(GlobalOutput { sum, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub x: f64,
    pub omega: f64,
    /// `μ^{1-α/2} |x|^{(1-α/2)/r + α} (∫_{x/3}^{±∞} Ω dP)^{α/2}`.
    pub chain_bound: f64,
    pub ratio_to_chain: f64,
    /// `Ω(x) / (ε|x|)`.
    pub ratio_to_linear: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub r: f64,
    pub eps: f64,
    pub mu: f64,
    pub alpha: f64,
    pub rows: Vec<GrowthRow>,
    pub max_ratio_to_linear: f64,
    pub max_ratio_to_chain: f64,
    pub all_below_chain: bool,
}

/// Linear-growth estimate at the given probes. `μ` is the `V_r` norm over
/// blocks `|j| <= n_window`.
pub fn linear_growth_check(
    omega: &PiecewiseFn,
    r: f64,
    eps: f64,
    n_window: i32,
    probes: &[f64],
) -> Result<GrowthReport, NazarovError> {
    if !(eps > 0.0) || !(r > 1.0) {
        return Err(precondition(format!("need eps > 0 and r > 1; got eps = {eps}, r = {r}")));
    }
    let mu = vr_block_norms(omega, r, -n_window..=n_window)?.sup;
    let al = alpha(r);
    let hull = omega.hull();
    let mut rows = Vec::with_capacity(probes.len());
    for &x in probes {
        let w = omega.eval(x);
        let tail = match hull {
            None => 0.0,
            Some(h) => {
                let range = if x >= 0.0 { Interval::try_new(x / 3.0, h.hi) } else { Interval::try_new(h.lo, x / 3.0) };
                match range {
                    Some(iv) => poisson_integral(&omega.restrict(&iv), DEFAULT_TAIL_TOL)?.value,
                    None => 0.0,
                }
            }
        };
        let chain = if r.is_infinite() {
            mu.powf(1.0 - al / 2.0) * x.abs().powf(al) * tail.powf(al / 2.0)
        } else {
            mu.powf(1.0 - al / 2.0) * x.abs().powf((1.0 - al / 2.0) / r + al) * tail.powf(al / 2.0)
        };
        let ratio_to_chain = if w == 0.0 { 0.0 } else { w / chain };
        let ratio_to_linear = if w == 0.0 { 0.0 } else { w / (eps * x.abs()) };
        rows.push(GrowthRow { x, omega: w, chain_bound: chain, ratio_to_chain, ratio_to_linear });
    }
    let max_ratio_to_linear = rows.iter().map(|r| r.ratio_to_linear).fold(0.0, f64::max);
    let max_ratio_to_chain = rows.iter().map(|r| r.ratio_to_chain).fold(0.0, f64::max);
    Ok(GrowthReport {
        r,
        eps,
        mu,
        alpha: al,
        rows,
        max_ratio_to_linear,
        max_ratio_to_chain,
        all_below_chain: max_ratio_to_chain <= 1.0,
    })
}
