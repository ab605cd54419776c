//! Modified Hilbert transform
//! `Hf(x) = p.v. ∫ f(t) (1/(x - t) + t/(1 + t^2)) dt`
//! for compactly supported piecewise polynomials.
//!
//! For compact support the second kernel term integrates to a constant, so
//! `Hf = (classical p.v. ∫ f(t)/(x - t) dt) + ∫ f(t) t/(1 + t^2) dt`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::funcmodel::{FuncError, Interval, Outside, PiecewiseFn, CONTINUITY_RTOL};
use crate::poly;
use crate::quad::{self, GaussLegendre};

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("function must vanish outside a bounded set")]
    NotCompact,
    #[error("x = {x} is a jump of the function; the principal value diverges logarithmically")]
    AtBreakpoint { x: f64 },
    #[error("excision extrapolation did not converge at x = {x} (last correction {last_correction:e})")]
    NoConvergence { x: f64, last_correction: f64 },
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Orientation of the singular kernel. `Standard` is `1/(x - t)`;
/// `Reversed` is `1/(t - x)` and negates every value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum KernelSign {
    #[default]
    Standard,
    Reversed,
}

impl KernelSign {
    pub fn factor(self) -> f64 {
        match self {
            KernelSign::Standard => 1.0,
            KernelSign::Reversed => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HilbertResult {
    pub value: f64,
    pub method: Method,
    pub est_error: f64,
}

fn require_compact(f: &PiecewiseFn) -> Result<(), HilbertError> {
    if f.default() == Outside::Zero {
        Ok(())
    } else {
        Err(HilbertError::NotCompact)
    }
}

/// `∫ f(t) t/(1 + t^2) dt`.
pub fn regularizer(f: &PiecewiseFn) -> Result<f64, HilbertError> {
    require_compact(f)?;
    let mut acc = 0.0;
    for p in f.pieces() {
        let c = p.plain_coeffs();
        let lo = p.lo;
        acc += quad::near_pole_safe(&|t: f64| poly::eval(&c, t - lo) * t / (1.0 + t * t), p.lo, p.hi);
    }
    Ok(acc)
}

/// A polynomial piece prepared for repeated transform evaluations.
#[derive(Clone, Debug)]
pub struct PreparedPiece {
    lo: f64,
    len: f64,
    coeffs: Vec<f64>,
}

impl PreparedPiece {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        PreparedPiece { lo, len: hi - lo, coeffs }
    }
}

/// Classical principal value of a sum of polynomial pieces, with the
/// log-divergent terms at breakpoints collected separately.
#[derive(Clone, Debug)]
pub struct PvEvaluator {
    pieces: Vec<PreparedPiece>,
    magnitude: f64,
}

impl PvEvaluator {
    pub fn new(f: &PiecewiseFn) -> Result<Self, HilbertError> {
        require_compact(f)?;
        let pieces: Vec<PreparedPiece> =
            f.pieces().iter().map(|p| PreparedPiece::new(p.lo, p.hi, p.plain_coeffs())).collect();
        Ok(PvEvaluator::from_pieces(pieces))
    }

    pub fn from_pieces(pieces: Vec<PreparedPiece>) -> Self {
        let magnitude = pieces
            .iter()
            .map(|p| poly::max_abs(&p.coeffs, 0.0, p.len))
            .fold(0.0, f64::max);
        PvEvaluator { pieces, magnitude }
    }

    /// `p.v. ∫ f(t)/(x - t) dt`. At a breakpoint the symmetric limit is
    /// returned when the one-sided values agree.
    pub fn eval(&self, x: f64) -> Result<f64, HilbertError> {
        let gl = GaussLegendre::cached(24);
        let mut finite = 0.0;
        let mut singular = 0.0;
        for p in &self.pieces {
            let xi = x - p.lo;
            let l = p.len;
            let gap = if xi < 0.0 { -xi } else if xi > l { xi - l } else { 0.0 };
            if gap > 2.0 * l {
                let c = &p.coeffs;
                finite += gl.integrate(|u| poly::eval(c, u) / (xi - u), 0.0, l);
                continue;
            }
            let pxi = poly::eval(&p.coeffs, xi);
            let q = poly::div_linear(&p.coeffs, xi);
            finite -= poly::integral(&q, 0.0, l);
            if xi == 0.0 {
                // P(0) (ln 0 - ln L): divergent part carried with coefficient -P(0)
                finite -= pxi * l.ln();
                singular -= pxi;
            } else if xi == l {
                finite += pxi * l.ln();
                singular += pxi;
            } else {
                finite += pxi * (xi.abs().ln() - (xi - l).abs().ln());
            }
        }
        if singular.abs() > CONTINUITY_RTOL * self.magnitude.max(1e-300) * 8.0 {
            return Err(HilbertError::AtBreakpoint { x });
        }
        Ok(finite)
    }
}

/// Closed-form modified transform at `x`.
pub fn hilbert_pw(f: &PiecewiseFn, x: f64) -> Result<HilbertResult, HilbertError> {
    hilbert_pw_signed(f, x, KernelSign::Standard)
}

pub fn hilbert_pw_signed(f: &PiecewiseFn, x: f64, sign: KernelSign) -> Result<HilbertResult, HilbertError> {
    let pv = PvEvaluator::new(f)?.eval(x)?;
    let value = sign.factor() * (pv + regularizer(f)?);
    Ok(HilbertResult { value, method: Method::ClosedForm, est_error: 0.0 })
}

/// Closed-form transform on a list of points, sharing the prepared pieces.
pub fn hilbert_table(f: &PiecewiseFn, xs: &[f64], sign: KernelSign) -> Result<Vec<f64>, HilbertError> {
    let ev = PvEvaluator::new(f)?;
    let c = regularizer(f)?;
    xs.par_iter().map(|&x| ev.eval(x).map(|v| sign.factor() * (v + c))).collect()
}

/// Independent quadrature value of the modified transform: adaptive
/// Gauss–Legendre away from `x`, and a folded integral
/// `∫_ε^{ε0} (f(x-u) - f(x+u))/u du` near `x` whose `ε → 0` limit is taken
/// by Richardson extrapolation over radii `ε_k = 2^{-k} l(supp f)`.
pub fn hilbert_quad_oracle(f: &PiecewiseFn, x: f64, tol: f64) -> Result<HilbertResult, HilbertError> {
    require_compact(f)?;
    assert!(tol > 0.0);
    let Some(supp) = f.support() else {
        return Ok(HilbertResult { value: 0.0, method: Method::Quadrature, est_error: 0.0 });
    };
    let l = supp.len();
    let bps = f.breakpoints();
    let nearest = bps
        .iter()
        .map(|&b| (b - x).abs())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);

    let mut k0 = 4;
    while k0 < 60 && l * 2f64.powi(-k0) >= nearest {
        k0 += 1;
    }
    let eps0 = l * 2f64.powi(-k0);
    let ev = |t: f64| f.eval(t);

    // outer part: |t - x| > eps0, split at breakpoints
    let mut cuts: Vec<f64> = bps.iter().copied().filter(|&b| (b - x).abs() > eps0).collect();
    cuts.push(x - eps0);
    cuts.push(x + eps0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let panel_tol = 1e-3 * tol / cuts.len().max(1) as f64;
    let mut outer = 0.0;
    let mut outer_err = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a || (a >= x - eps0 && b <= x + eps0) {
            continue;
        }
        if b <= supp.lo || a >= supp.hi {
            continue;
        }
        let (v, e) = quad::adaptive(&|t: f64| ev(t) / (x - t), a, b, panel_tol, 60);
        outer += v;
        outer_err += e;
    }

    // inner folded part with Richardson extrapolation in the excision radius
    let g = |u: f64| (ev(x - u) - ev(x + u)) / u;
    let gl = GaussLegendre::cached(15);
    let levels = 8;
    let mut partial = Vec::with_capacity(levels);
    let mut acc = 0.0;
    for k in 0..levels {
        let hi = eps0 * 2f64.powi(-(k as i32));
        let lo = 0.5 * hi;
        acc += gl.integrate(g, lo, hi);
        partial.push(acc);
    }
    let (inner, correction) = richardson_halving(&partial, 5);
    let total_err = outer_err + correction;
    if !(correction <= tol) || !inner.is_finite() {
        return Err(HilbertError::NoConvergence { x, last_correction: correction });
    }

    // regularizing constant by adaptive quadrature between breakpoints
    let mut reg = 0.0;
    for w in bps.windows(2) {
        let (v, _) = quad::adaptive(&|t: f64| ev(t) * t / (1.0 + t * t), w[0], w[1], 1e-3 * tol, 60);
        reg += v;
    }
    Ok(HilbertResult { value: outer + inner + reg, method: Method::Quadrature, est_error: total_err })
}

/// Richardson tableau for a sequence sampled at radii `ε, ε/2, ε/4, ...`
/// whose error expands in integer powers of `ε`. Returns the extrapolated
/// value and the size of the last correction between diagonal entries.
pub fn richardson_halving(seq: &[f64], orders: usize) -> (f64, f64) {
    let n = seq.len();
    let mut table: Vec<Vec<f64>> = vec![seq.to_vec()];
    for m in 1..=orders.min(n - 1) {
        let prev = &table[m - 1];
        let f = 2f64.powi(m as i32);
        let row: Vec<f64> = (1..prev.len()).map(|i| (f * prev[i] - prev[i - 1]) / (f - 1.0)).collect();
        table.push(row);
    }
    let last = table.last().unwrap();
    let best = *last.last().unwrap();
    let correction = if last.len() >= 2 {
        (best - last[last.len() - 2]).abs()
    } else {
        let prev = &table[table.len() - 2];
        (best - prev[prev.len() - 1]).abs()
    };
    (best, correction)
}

/// Outcome of the derivative-sup search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivSup {
    Bounded { value: f64, at: f64 },
    /// The transform of `f'` grows without bound near a jump of `f'` at `at`.
    Unbounded { at: f64 },
}

impl DerivSup {
    pub fn value(&self) -> f64 {
        match self {
            DerivSup::Bounded { value, .. } => *value,
            DerivSup::Unbounded { .. } => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, DerivSup::Bounded { .. })
    }
}

/// Jumps of `g` as (location, size), including jumps against the zero
/// default at the ends of the pieces.
pub fn jumps(g: &PiecewiseFn) -> Vec<(f64, f64)> {
    let mag = g
        .pieces()
        .iter()
        .map(|p| poly::max_abs(&p.coeffs, 0.0, p.len()) * p.scale().abs())
        .fold(0.0, f64::max);
    let tol = 8.0 * CONTINUITY_RTOL * mag.max(1e-300);
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None; // (hi, right value)
    for p in g.pieces() {
        let left = match prev {
            Some((hi, v)) if hi == p.lo => v,
            Some((hi, v)) => {
                if v.abs() > tol {
                    out.push((hi, v.abs()));
                }
                0.0
            }
            None => 0.0,
        };
        let here = p.eval(p.lo);
        if (here - left).abs() > tol {
            out.push((p.lo, (here - left).abs()));
        }
        prev = Some((p.hi, p.right_value()));
    }
    if let Some((hi, v)) = prev {
        if v.abs() > tol {
            out.push((hi, v.abs()));
        }
    }
    out
}

/// Sup of `|(Hf)'| = |p.v. ∫ f'(t)/(x - t) dt|` over `region`, from a grid
/// of at least `grid_n` points plus the breakpoints of `f'`, refined around
/// the largest samples. A jump of `f'` inside the region is reported as
/// unbounded once the transform is seen to grow at radii `2^{-10}, ..., 2^{-40}`.
pub fn hilbert_deriv_sup(f: &PiecewiseFn, region: &Interval, grid_n: usize) -> Result<DerivSup, HilbertError> {
    require_compact(f)?;
    f.require_continuous()?;
    let g = f.derivative();
    if g.is_zero() {
        return Ok(DerivSup::Bounded { value: 0.0, at: region.center() });
    }
    let ev = PvEvaluator::new(&g)?;
    let scale = f.support().map_or(1.0, |s| s.len());
    for (at, _) in jumps(&g) {
        if !region.contains(at) {
            continue;
        }
        let mut prev = 0.0;
        let mut growing = true;
        for k in [10, 20, 30, 40] {
            let h = scale * 2f64.powi(-k);
            let mut v: f64 = 0.0;
            for x in [at - h, at + h] {
                if region.contains(x) {
                    v = v.max(ev.eval(x).map(f64::abs).unwrap_or(f64::INFINITY));
                }
            }
            if !(v > prev) {
                growing = false;
            }
            prev = v;
        }
        if growing {
            return Ok(DerivSup::Unbounded { at });
        }
    }
    sup_abs_on_region(&|x| ev.eval(x), &g.breakpoints(), region, grid_n)
}

/// Grid search for `sup |h|` over `region` with local refinement around the
/// top samples. `extra` points inside the region are always evaluated.
pub fn sup_abs_on_region(
    h: &(dyn Fn(f64) -> Result<f64, HilbertError> + Sync),
    extra: &[f64],
    region: &Interval,
    grid_n: usize,
) -> Result<DerivSup, HilbertError> {
    let n = grid_n.max(2);
    let mut xs: Vec<f64> = (0..n).map(|i| region.lo + region.len() * i as f64 / (n - 1) as f64).collect();
    xs.extend(extra.iter().copied().filter(|&x| region.contains(x)));
    let vals: Vec<f64> = xs.par_iter().map(|&x| h(x).map(f64::abs)).collect::<Result<_, _>>()?;
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(xs[a].total_cmp(&xs[b])));
    let mut best = (vals[idx[0]], xs[idx[0]]);
    let spacing = region.len() / (n - 1) as f64;
    let seeds: Vec<f64> = idx.iter().take(8).map(|&i| xs[i]).collect();
    let refined: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&x0| {
            let mut center = x0;
            let mut width = spacing;
            let mut local = (f64::NEG_INFINITY, x0);
            for _ in 0..6 {
                for i in 0..=16 {
                    let x = (center - width + 2.0 * width * i as f64 / 16.0).clamp(region.lo, region.hi);
                    if let Ok(v) = h(x) {
                        if v.abs() > local.0 {
                            local = (v.abs(), x);
                        }
                    }
                }
                center = local.1;
                width /= 8.0;
            }
            local
        })
        .collect();
    for r in refined {
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(DerivSup::Bounded { value: best.0, at: best.1 })
}
