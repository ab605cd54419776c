use serde::{Deserialize, Serialize};

use super::{FuncError, Interval};
use crate::logscalar::LogScalar;
use crate::poly;

/// Relative tolerance used when deciding whether adjacent pieces agree.
pub const CONTINUITY_RTOL: f64 = 1e-12;

/// Value taken outside every piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outside {
    Zero,
    One,
}

impl Outside {
    pub fn value(self) -> f64 {
        match self {
            Outside::Zero => 0.0,
            Outside::One => 1.0,
        }
    }

    pub fn from_flag(flag: u8) -> Option<Self> {
        match flag {
            0 => Some(Outside::Zero),
            1 => Some(Outside::One),
            _ => None,
        }
    }
}

/// One polynomial piece on `[lo, hi)`, written in the local variable `x - lo`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_scale: Option<LogScalar>,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        Piece { lo, hi, coeffs, log_scale: None }
    }

    /// Affine piece through `(lo, y_lo)` and `(hi, y_hi)`.
    pub fn linear(lo: f64, hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Piece::new(lo, hi, vec![y_lo, (y_hi - y_lo) / (hi - lo)])
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.map_or(1.0, |s| s.to_f64())
    }

    /// Coefficients with the log-domain multiplier folded in.
    pub fn plain_coeffs(&self) -> Vec<f64> {
        match self.log_scale {
            None => self.coeffs.clone(),
            Some(s) => poly::scale(&self.coeffs, s.to_f64()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        poly::eval(&self.coeffs, x - self.lo) * self.scale()
    }

    pub fn eval_log(&self, x: f64) -> LogScalar {
        let base = LogScalar::from_f64(poly::eval(&self.coeffs, x - self.lo));
        match self.log_scale {
            None => base,
            Some(s) => base * s,
        }
    }

    /// Value at the right end (as a limit from inside).
    pub fn right_value(&self) -> f64 {
        self.eval(self.hi)
    }

    /// The piece restricted to `[a, b] ⊆ [lo, hi]`, re-expanded about `a`.
    pub fn restrict(&self, a: f64, b: f64) -> Piece {
        Piece {
            lo: a,
            hi: b,
            coeffs: poly::taylor_shift(&self.coeffs, a - self.lo),
            log_scale: self.log_scale,
        }
    }
}

/// Piecewise-polynomial function on the line with sorted, interior-disjoint pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFn {
    pieces: Vec<Piece>,
    default: Outside,
}

impl PiecewiseFn {
    pub fn new(mut pieces: Vec<Piece>, default: Outside) -> Result<Self, FuncError> {
        for (i, p) in pieces.iter().enumerate() {
            if !(p.lo < p.hi) || !p.lo.is_finite() || !p.hi.is_finite() {
                return Err(FuncError::InvalidPiece(format!("piece #{i} has interval [{}, {})", p.lo, p.hi)));
            }
            if p.coeffs.is_empty() || p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(FuncError::InvalidPiece(format!("piece #{i} has non-finite or empty coefficients")));
            }
        }
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&a, &b| pieces[a].lo.total_cmp(&pieces[b].lo));
        for w in order.windows(2) {
            let (a, b) = (&pieces[w[0]], &pieces[w[1]]);
            if b.lo < a.hi {
                return Err(FuncError::Overlap {
                    first: w[0],
                    first_interval: [a.lo, a.hi],
                    second: w[1],
                    second_interval: [b.lo, b.hi],
                });
            }
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        Ok(PiecewiseFn { pieces, default })
    }

    pub fn zero() -> Self {
        PiecewiseFn { pieces: Vec::new(), default: Outside::Zero }
    }

    pub fn one() -> Self {
        PiecewiseFn { pieces: Vec::new(), default: Outside::One }
    }

    /// Continuous piecewise-linear interpolant of `(x, y)` knots, zero outside.
    pub fn linear_spline(knots: &[(f64, f64)]) -> Result<Self, FuncError> {
        let pieces = knots.windows(2).map(|w| Piece::linear(w[0].0, w[1].0, w[0].1, w[1].1)).collect();
        PiecewiseFn::new(pieces, Outside::Zero)
    }

    /// Tent `max(height - slope·|x - center|, 0)`.
    pub fn tent(center: f64, height: f64, slope: f64) -> Self {
        let hw = height / slope;
        PiecewiseFn::linear_spline(&[(center - hw, 0.0), (center, height), (center + hw, 0.0)]).unwrap()
    }

    /// `1 - |x|` on `[-1, 1]`.
    pub fn unit_tent() -> Self {
        PiecewiseFn::tent(0.0, 1.0, 1.0)
    }

    /// Indicator of `[lo, hi)`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        PiecewiseFn::new(vec![Piece::new(lo, hi, vec![1.0])], Outside::Zero).unwrap()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn default(&self) -> Outside {
        self.default
    }

    pub fn is_zero(&self) -> bool {
        self.default == Outside::Zero && self.pieces.iter().all(|p| p.coeffs.iter().all(|&c| c == 0.0))
    }

    /// Convex hull of the pieces.
    pub fn hull(&self) -> Option<Interval> {
        Some(Interval::new(self.pieces.first()?.lo, self.pieces.last()?.hi))
    }

    /// Smallest closed interval outside which the function is zero.
    pub fn support(&self) -> Option<Interval> {
        if self.default == Outside::One {
            return None;
        }
        let nz: Vec<&Piece> = self.pieces.iter().filter(|p| p.coeffs.iter().any(|&c| c != 0.0)).collect();
        Some(Interval::new(nz.first()?.lo, nz.last()?.hi))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(2 * self.pieces.len());
        for p in &self.pieces {
            if out.last() != Some(&p.lo) {
                out.push(p.lo);
            }
            out.push(p.hi);
        }
        out
    }

    fn locate(&self, x: f64) -> Option<&Piece> {
        let idx = self.pieces.partition_point(|p| p.lo <= x);
        if idx == 0 {
            return None;
        }
        let p = &self.pieces[idx - 1];
        (x < p.hi).then_some(p)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(p) => p.eval(x),
            None => self.default.value(),
        }
    }

    pub fn eval_log(&self, x: f64) -> LogScalar {
        match self.locate(x) {
            Some(p) => p.eval_log(x),
            None => LogScalar::from_f64(self.default.value()),
        }
    }

    /// Pieces clipped to `[a, b]` together with the uncovered gaps.
    fn clipped(&self, a: f64, b: f64) -> (Vec<Piece>, f64) {
        let mut out = Vec::new();
        let mut covered = 0.0;
        for p in &self.pieces {
            let lo = p.lo.max(a);
            let hi = p.hi.min(b);
            if lo < hi {
                covered += hi - lo;
                out.push(p.restrict(lo, hi));
            }
        }
        (out, ((b - a) - covered).max(0.0))
    }

    /// Exact integral over `interval`, piece by piece.
    pub fn integrate(&self, interval: &Interval) -> Result<f64, FuncError> {
        let (pieces, gap) = self.clipped(interval.lo, interval.hi);
        let mut acc = gap * self.default.value();
        for p in &pieces {
            acc += poly::integral(&p.coeffs, 0.0, p.len()) * p.scale();
        }
        if acc.is_finite() {
            Ok(acc)
        } else {
            Err(FuncError::Overflow)
        }
    }

    /// Integral accumulated in the log domain.
    pub fn integrate_log(&self, interval: &Interval) -> LogScalar {
        let (pieces, gap) = self.clipped(interval.lo, interval.hi);
        let mut acc = LogScalar::from_f64(gap * self.default.value());
        for p in &pieces {
            let base = LogScalar::from_f64(poly::integral(&p.coeffs, 0.0, p.len()));
            acc = acc + p.log_scale.map_or(base, |s| base * s);
        }
        acc
    }

    /// Exact `sup |f|` over the closed interval.
    pub fn sup_norm(&self, interval: &Interval) -> f64 {
        let (pieces, gap) = self.clipped(interval.lo, interval.hi);
        let mut m: f64 = if gap > 0.0 { self.default.value() } else { 0.0 };
        for p in &pieces {
            m = m.max(poly::max_abs(&p.coeffs, 0.0, p.len()) * p.scale().abs());
        }
        m
    }

    /// Infimum of `f` over the closed interval.
    pub fn min_value(&self, interval: &Interval) -> f64 {
        let (pieces, gap) = self.clipped(interval.lo, interval.hi);
        let mut m: f64 = if gap > 0.0 { self.default.value() } else { f64::INFINITY };
        for p in &pieces {
            let s = p.scale();
            let v = if s >= 0.0 {
                poly::min_value(&p.coeffs, 0.0, p.len()) * s
            } else {
                -poly::max_abs(&p.coeffs, 0.0, p.len()) * s.abs()
            };
            m = m.min(v);
        }
        m
    }

    /// Largest mismatch between neighbouring pieces (or a piece and the
    /// default) together with its location.
    pub fn worst_jump(&self) -> (f64, f64) {
        let mut worst = (0.0, f64::NAN);
        let d = self.default.value();
        let mut prev: Option<&Piece> = None;
        for p in &self.pieces {
            let left_val = match prev {
                Some(q) if q.hi == p.lo => q.right_value(),
                _ => d,
            };
            if let Some(q) = prev {
                if q.hi != p.lo {
                    let j = (q.right_value() - d).abs();
                    if j > worst.0 {
                        worst = (j, q.hi);
                    }
                }
            }
            let j = (p.eval(p.lo) - left_val).abs();
            if j > worst.0 {
                worst = (j, p.lo);
            }
            prev = Some(p);
        }
        if let Some(q) = prev {
            let j = (q.right_value() - d).abs();
            if j > worst.0 {
                worst = (j, q.hi);
            }
        }
        worst
    }

    fn magnitude(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| poly::max_abs(&p.coeffs, 0.0, p.len()) * p.scale().abs())
            .fold(self.default.value(), f64::max)
    }

    pub fn is_continuous(&self) -> bool {
        let (j, _) = self.worst_jump();
        j <= CONTINUITY_RTOL * self.magnitude().max(1e-300)
    }

    /// Error unless the function has no jumps.
    pub fn require_continuous(&self) -> Result<(), FuncError> {
        if self.is_continuous() {
            Ok(())
        } else {
            let (jump, at) = self.worst_jump();
            Err(FuncError::NotAbsolutelyContinuous { at, jump })
        }
    }

    /// Piecewise derivative (defined a.e.), zero outside the pieces.
    pub fn derivative(&self) -> PiecewiseFn {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { lo: p.lo, hi: p.hi, coeffs: poly::deriv(&p.coeffs), log_scale: p.log_scale })
            .collect();
        PiecewiseFn { pieces, default: Outside::Zero }
    }

    /// The restriction to `interval`, zero elsewhere.
    pub fn restrict(&self, interval: &Interval) -> PiecewiseFn {
        let (mut pieces, _) = self.clipped(interval.lo, interval.hi);
        if self.default == Outside::One {
            let mut filled = Vec::new();
            let mut cursor = interval.lo;
            for p in pieces {
                if p.lo > cursor {
                    filled.push(Piece::new(cursor, p.lo, vec![1.0]));
                }
                cursor = p.hi;
                filled.push(p);
            }
            if cursor < interval.hi {
                filled.push(Piece::new(cursor, interval.hi, vec![1.0]));
            }
            pieces = filled;
        }
        PiecewiseFn { pieces, default: Outside::Zero }
    }

    /// `y ↦ value_scale · f(stretch·y + shift)` with `stretch > 0`.
    pub fn pullback(&self, stretch: f64, shift: f64, value_scale: f64) -> Result<PiecewiseFn, FuncError> {
        assert!(stretch > 0.0);
        let default = match (self.default, value_scale) {
            (Outside::Zero, _) => Outside::Zero,
            (Outside::One, s) if s == 1.0 => Outside::One,
            _ => return Err(FuncError::Unsupported("rescaling a function with default 1".into())),
        };
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: (p.lo - shift) / stretch,
                hi: (p.hi - shift) / stretch,
                coeffs: poly::scale(&poly::scale_var(&p.coeffs, stretch), value_scale),
                log_scale: p.log_scale,
            })
            .collect();
        PiecewiseFn::new(pieces, default)
    }

    /// `max(f - level, 0)` for a function that vanishes outside its pieces.
    pub fn excess_over(&self, level: f64) -> Result<PiecewiseFn, FuncError> {
        if self.default != Outside::Zero || level < 0.0 {
            return Err(FuncError::Unsupported("excess over a level needs default 0 and level >= 0".into()));
        }
        let mut out = Vec::new();
        for p in &self.pieces {
            let mut c = p.plain_coeffs();
            c[0] -= level;
            let len = p.len();
            let mut knots = vec![0.0];
            knots.extend(poly::real_roots(&c, 0.0, len).into_iter().filter(|&r| r > 0.0 && r < len));
            knots.push(len);
            for w in knots.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if w[1] > w[0] && poly::eval(&c, mid) > 0.0 {
                    out.push(Piece::new(p.lo + w[0], p.lo + w[1], poly::taylor_shift(&c, w[0])));
                }
            }
        }
        PiecewiseFn::new(out, Outside::Zero)
    }

    /// Pointwise sum of functions that vanish outside their pieces.
    pub fn sum(parts: &[&PiecewiseFn]) -> Result<PiecewiseFn, FuncError> {
        if parts.iter().any(|f| f.default != Outside::Zero) {
            return Err(FuncError::Unsupported("sum of functions with default 1".into()));
        }
        let mut all: Vec<(f64, f64, f64, Vec<f64>)> = parts
            .iter()
            .flat_map(|f| f.pieces.iter().map(|p| (p.lo, p.hi, p.lo, p.plain_coeffs())))
            .collect();
        Ok(PiecewiseFn { pieces: merge_pieces(&mut all), default: Outside::Zero })
    }

    /// Scalar multiple.
    pub fn scaled(&self, s: f64) -> Result<PiecewiseFn, FuncError> {
        self.pullback(1.0, 0.0, s)
    }

    /// Exact polynomial image `p ∘ f` restricted to the pieces; only used for
    /// integer powers of a derivative.
    pub fn map_pieces<F: Fn(&Piece) -> Vec<f64>>(&self, f: F) -> PiecewiseFn {
        let pieces = self.pieces.iter().map(|p| Piece::new(p.lo, p.hi, f(p))).collect();
        PiecewiseFn { pieces, default: Outside::Zero }
    }
}

/// Sweep that merges overlapping polynomial pieces `(lo, hi, origin, coeffs)`
/// into interior-disjoint pieces. `origin` is the point the coefficients are
/// expanded about.
pub(crate) fn merge_pieces(all: &mut [(f64, f64, f64, Vec<f64>)]) -> Vec<Piece> {
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts: Vec<f64> = all.iter().flat_map(|p| [p.0, p.1]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut next = 0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        while next < all.len() && all[next].0 <= a {
            active.push(next);
            next += 1;
        }
        active.retain(|&i| all[i].1 > a);
        let mut acc: Vec<f64> = vec![0.0];
        let mut any = false;
        for &i in &active {
            let (lo, hi, origin, ref c) = all[i];
            if lo <= a && hi >= b {
                acc = poly::add(&acc, &poly::taylor_shift(c, a - origin));
                any = true;
            }
        }
        if any {
            out.push(Piece::new(a, b, acc));
        }
    }
    out
}
