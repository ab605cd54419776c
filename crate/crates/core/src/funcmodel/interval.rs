use serde::{Deserialize, Serialize};

/// A finite interval `[lo, hi]` with `lo < hi`. Half-openness is a property
/// of how callers use it, not of the type.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi && lo.is_finite() && hi.is_finite(), "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        (lo < hi && lo.is_finite() && hi.is_finite()).then_some(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// The interval with the same center and `lambda` times the length.
    pub fn dilate(&self, lambda: f64) -> Interval {
        let c = self.center();
        let h = 0.5 * lambda * self.len();
        Interval::new(c - h, c + h)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Gap between the two intervals; zero when they touch or overlap.
    pub fn distance(&self, other: &Interval) -> f64 {
        (self.lo.max(other.lo) - self.hi.min(other.hi)).max(0.0)
    }
}

/// Distance from `x` to the complement of `interval`.
pub fn dist_to_complement(interval: &Interval, x: f64) -> f64 {
    if x <= interval.lo || x >= interval.hi {
        0.0
    } else {
        (x - interval.lo).min(interval.hi - x)
    }
}

/// The dyadic blocks `J_0 = [-2, 2)`, `J_j = [2^j, 2^{j+1})`, `J_{-j} = [-2^{j+1}, -2^j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicBlock(pub i32);

impl DyadicBlock {
    pub fn interval(&self) -> Interval {
        let j = self.0;
        match j {
            0 => Interval::new(-2.0, 2.0),
            j if j > 0 => Interval::new(2f64.powi(j), 2f64.powi(j + 1)),
            j => Interval::new(-(2f64.powi(-j + 1)), -(2f64.powi(-j))),
        }
    }

    pub fn len(&self) -> f64 {
        self.interval().len()
    }

    /// The block containing `x` (blocks are half-open on the right).
    pub fn containing(x: f64) -> DyadicBlock {
        if (-2.0..2.0).contains(&x) {
            return DyadicBlock(0);
        }
        if x >= 2.0 {
            let mut j = x.log2().floor() as i32;
            while 2f64.powi(j) > x {
                j -= 1;
            }
            while 2f64.powi(j + 1) <= x {
                j += 1;
            }
            DyadicBlock(j)
        } else {
            // [-2^{j+1}, -2^j) with 2^j < -x <= 2^{j+1}
            let y = -x;
            let mut j = y.log2().ceil() as i32 - 1;
            while 2f64.powi(j) >= y {
                j -= 1;
            }
            while 2f64.powi(j + 1) < y {
                j += 1;
            }
            DyadicBlock(-j)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_distance() {
        let i = Interval::new(0.0, 2.0);
        assert_eq!(dist_to_complement(&i, 1.0), 1.0);
        assert_eq!(dist_to_complement(&i, 3.0), 0.0);
        assert_eq!(dist_to_complement(&i, 0.5), 0.5);
    }

    #[test]
    fn blocks_tile_the_line() {
        for &x in &[-9.0, -4.0, -3.9, -2.0, -1.5, 0.0, 1.99, 2.0, 3.0, 4.0, 1e6] {
            let b = DyadicBlock::containing(x);
            let iv = b.interval();
            assert!(x >= iv.lo && x < iv.hi, "{x} not in {b:?} {iv:?}");
        }
        assert_eq!(DyadicBlock(5).len(), 32.0);
        assert_eq!(DyadicBlock(-5).len(), 32.0);
        assert_eq!(DyadicBlock(0).len(), 4.0);
    }

    #[test]
    fn dilation_about_center() {
        let a = Interval::new(0.0, 0.25).dilate(2.0);
        assert_eq!((a.lo, a.hi), (-0.125, 0.375));
    }
}
