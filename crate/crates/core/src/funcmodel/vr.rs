//! Block means of `|f'|^r` over the dyadic blocks `J_j`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use super::{DyadicBlock, FuncError, PiecewiseFn};
use crate::logscalar::LogScalar;
use crate::poly;
use crate::quad;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VrBlock {
    pub j: i32,
    pub value: f64,
    pub log_value: LogScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct VrReport {
    pub r: f64,
    pub blocks: Vec<VrBlock>,
    pub sup: f64,
    pub arg_sup: Option<i32>,
}

/// `∫_a^b |p(u)|^r du` for a polynomial `p`.
pub fn abs_power_integral(p: &[f64], a: f64, b: f64, r: f64) -> f64 {
    if poly::degree(p) == 0 {
        return p[0].abs().powf(r) * (b - a);
    }
    let mut knots = vec![a];
    knots.extend(poly::real_roots(p, a, b).into_iter().filter(|&x| x > a && x < b));
    knots.push(b);
    let integer = r.fract() == 0.0 && r <= 16.0;
    let pr = if integer { poly::powi(p, r as u32) } else { Vec::new() };
    let mut acc = 0.0;
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        if integer {
            let v = poly::integral(&pr, lo, hi);
            acc += v.abs();
        } else if poly::degree(p) == 1 {
            // p has one sign on [lo, hi]: the antiderivative is |p|^{r+1} / ((r+1) p')
            let (ya, yb) = (poly::eval(p, lo).abs(), poly::eval(p, hi).abs());
            acc += (yb.powf(r + 1.0) - ya.powf(r + 1.0)).abs() / ((r + 1.0) * p[1].abs());
        } else {
            let scale = poly::max_abs(p, lo, hi).powf(r) * (hi - lo);
            let (v, _) = quad::adaptive(&|x: f64| poly::eval(p, x).abs().powf(r), lo, hi, 1e-14 * scale.max(1e-300), 30);
            acc += v;
        }
    }
    acc
}

/// Block value `((1/|J_j|) ∫_{J_j} |f'|^r)^{1/r}` in the log domain;
/// `r = inf` gives the essential sup of `|f'|` over the block.
fn block_value(f: &PiecewiseFn, j: i32, r: f64) -> LogScalar {
    let block = DyadicBlock(j).interval();
    let pieces = f.pieces();
    let first = pieces.partition_point(|p| p.hi <= block.lo);
    let mut acc = LogScalar::ZERO;
    for p in pieces[first..].iter().take_while(|p| p.lo < block.hi) {
        let lo = p.lo.max(block.lo);
        let hi = p.hi.min(block.hi);
        if hi <= lo {
            continue;
        }
        let d = poly::deriv(&p.coeffs);
        let (a, b) = (lo - p.lo, hi - p.lo);
        let s = p.log_scale.map_or(LogScalar::ONE, |s| s.abs());
        if r.is_infinite() {
            let m = LogScalar::from_f64(poly::max_abs(&d, a, b)) * s;
            if m > acc {
                acc = m;
            }
        } else {
            let base = LogScalar::from_f64(abs_power_integral(&d, a, b, r));
            acc = acc + base * s.powf(r);
        }
    }
    if r.is_infinite() || acc.is_zero() {
        return acc;
    }
    (acc / LogScalar::from_f64(block.len())).powf(1.0 / r)
}

/// Block values for every `j` in `j_range`, plus their sup and the block
/// where it is attained.
pub fn vr_block_norms(f: &PiecewiseFn, r: f64, j_range: RangeInclusive<i32>) -> Result<VrReport, FuncError> {
    if !(r >= 1.0) {
        return Err(FuncError::Unsupported(format!("exponent r must be >= 1, got {r}")));
    }
    f.require_continuous()?;
    let js: Vec<i32> = j_range.collect();
    let blocks: Vec<VrBlock> = js
        .par_iter()
        .map(|&j| {
            let log_value = block_value(f, j, r);
            VrBlock { j, value: log_value.to_f64(), log_value }
        })
        .collect();
    let mut sup = 0.0;
    let mut arg_sup = None;
    for b in &blocks {
        if arg_sup.is_none() || b.value > sup {
            sup = b.value;
            arg_sup = Some(b.j);
        }
    }
    Ok(VrReport { r, blocks, sup, arg_sup })
}
