//! The C² hat profile and sums of scaled hats.
//!
//! `φ = 1` on `[-1/2, 1/2]`, `φ = 0` outside `[-3/4, 3/4]`, with quintic
//! smoothstep ramps `S(s) = 10s³ - 15s⁴ + 6s⁵` in between.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::funcmodel::{merge_pieces, Interval, Outside, Piece, PiecewiseFn};
use crate::hilbert::{sup_abs_on_region, DerivSup, HilbertError, PreparedPiece, PvEvaluator};
use crate::poly;

pub const SMOOTHSTEP: [f64; 6] = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
pub const PLATEAU: f64 = 0.5;
pub const OUTER: f64 = 0.75;

/// Pieces of the unit profile, in local coordinates of each piece.
pub fn profile_pieces() -> Vec<Piece> {
    let ramp = OUTER - PLATEAU;
    let rise = poly::scale_var(&SMOOTHSTEP, 1.0 / ramp);
    let fall = poly::scale_var(&poly::taylor_shift(&SMOOTHSTEP, 1.0), -1.0 / ramp);
    vec![
        Piece::new(-OUTER, -PLATEAU, rise),
        Piece::new(-PLATEAU, PLATEAU, vec![1.0]),
        Piece::new(PLATEAU, OUTER, fall),
    ]
}

pub fn profile() -> PiecewiseFn {
    PiecewiseFn::new(profile_pieces(), Outside::Zero).unwrap()
}

/// `φ_a(x) = l(a) φ((x - c_a)/l(a))`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HatFunction {
    pub base: Interval,
}

impl HatFunction {
    pub fn pieces(&self) -> Vec<Piece> {
        let l = self.base.len();
        let c = self.base.center();
        profile_pieces()
            .into_iter()
            .map(|p| Piece::new(c + l * p.lo, c + l * p.hi, poly::scale(&poly::scale_var(&p.coeffs, 1.0 / l), l)))
            .collect()
    }

    pub fn function(&self) -> PiecewiseFn {
        PiecewiseFn::new(self.pieces(), Outside::Zero).unwrap()
    }

    pub fn support(&self) -> Interval {
        self.base.dilate(2.0 * OUTER)
    }
}

/// `F = Σ_{a} φ_a` as one piecewise polynomial.
pub fn hat_majorant(bases: &[Interval]) -> PiecewiseFn {
    let mut all: Vec<(f64, f64, f64, Vec<f64>)> = bases
        .iter()
        .flat_map(|&b| HatFunction { base: b }.pieces())
        .map(|p| (p.lo, p.hi, p.lo, p.coeffs))
        .collect();
    PiecewiseFn::new(merge_pieces(&mut all), Outside::Zero).unwrap()
}

/// Transform of the profile derivative, `ψ(y) = p.v. ∫ φ'(s)/(y - s) ds`,
/// with a multipole expansion far from the support.
struct Psi {
    near: PvEvaluator,
    moments: Vec<f64>,
    far: f64,
    argmax: Vec<f64>,
}

const FAR_RADIUS: f64 = 8.0;
const MULTIPOLE_TERMS: usize = 18;

fn psi() -> &'static Psi {
    static PSI: OnceLock<Psi> = OnceLock::new();
    PSI.get_or_init(|| {
        let d = profile().derivative();
        let near = PvEvaluator::new(&d).unwrap();
        // 1/(y - s) = Σ s^k / y^{k+1}
        let moments = (0..MULTIPOLE_TERMS)
            .map(|k| {
                d.pieces()
                    .iter()
                    .map(|p| {
                        let mono = poly::taylor_shift(&poly::powi(&[0.0, 1.0], k as u32), p.lo);
                        poly::integral(&poly::mul(&mono, &p.coeffs), 0.0, p.len())
                    })
                    .sum()
            })
            .collect();
        // local extrema of |ψ| on a fine grid, used as probe offsets
        let n = 6001;
        let ys: Vec<f64> = (0..n).map(|i| -1.5 + 3.0 * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = ys.iter().map(|&y| near.eval(y).map(f64::abs).unwrap_or(0.0)).collect();
        let mut argmax = Vec::new();
        for i in 1..n - 1 {
            if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 0.0 {
                argmax.push(ys[i]);
            }
        }
        Psi { near, moments, far: FAR_RADIUS, argmax }
    })
}

impl Psi {
    fn eval(&self, y: f64) -> f64 {
        if y.abs() >= self.far {
            let inv = 1.0 / y;
            let mut acc = 0.0;
            for m in self.moments.iter().rev() {
                acc = acc * inv + m;
            }
            acc * inv
        } else {
            self.near.eval(y).expect("profile derivative is continuous")
        }
    }
}

/// `ψ(y)` for the unit profile.
pub fn profile_deriv_transform(y: f64) -> f64 {
    psi().eval(y)
}

/// Evaluator of `(HF)'(x) = Σ_a ψ((x - c_a)/l(a))` for `F = Σ φ_a`, with
/// `F` scaled by `amplitude`.
#[derive(Clone, Debug)]
pub struct HatSum {
    centers: Vec<f64>,
    lengths: Vec<f64>,
    pub amplitude: f64,
}

impl HatSum {
    pub fn new(bases: &[Interval], amplitude: f64) -> Self {
        HatSum {
            centers: bases.iter().map(|b| b.center()).collect(),
            lengths: bases.iter().map(|b| b.len()).collect(),
            amplitude,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn deriv_transform(&self, x: f64) -> f64 {
        let p = psi();
        let mut acc = 0.0;
        for (c, l) in self.centers.iter().zip(&self.lengths) {
            acc += p.eval((x - c) / l);
        }
        self.amplitude * acc
    }

    /// Probe points: hat knots and the local extrema of each scaled `ψ`.
    pub fn probes(&self) -> Vec<f64> {
        let p = psi();
        let mut out = Vec::with_capacity(self.len() * (p.argmax.len() + 4));
        for (c, l) in self.centers.iter().zip(&self.lengths) {
            for y in [-OUTER, -PLATEAU, PLATEAU, OUTER] {
                out.push(c + l * y);
            }
            for y in &p.argmax {
                out.push(c + l * y);
            }
        }
        out
    }

    /// `sup |(HF)'|` over `region`.
    pub fn deriv_sup(&self, region: &Interval, grid_n: usize) -> DerivSup {
        if self.is_empty() || self.amplitude == 0.0 {
            return DerivSup::Bounded { value: 0.0, at: region.center() };
        }
        let eval = |x: f64| -> Result<f64, HilbertError> { Ok(self.deriv_transform(x)) };
        sup_abs_on_region(&eval, &self.probes(), region, grid_n).expect("hat sums are smooth")
    }
}

/// Same as `HatSum::deriv_transform` but through the generic closed form on the
/// merged piecewise representation; used to cross-check the fast path.
pub fn deriv_transform_generic(f: &PiecewiseFn, xs: &[f64]) -> Vec<f64> {
    let d = f.derivative();
    let pieces: Vec<PreparedPiece> = d.pieces().iter().map(|p| PreparedPiece::new(p.lo, p.hi, p.plain_coeffs())).collect();
    let ev = PvEvaluator::from_pieces(pieces);
    xs.par_iter().map(|&x| ev.eval(x).unwrap_or(f64::NAN)).collect()
}
