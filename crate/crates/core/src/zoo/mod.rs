//! Explicit majorant families built from tent-shaped hills, and the numerical
//! experiments that go with them.
//!
//! A hill is the log-majorant `slope · dist(x, ℝ∖[c - h, c + h])` with
//! half-width `h = w·c`. Widths and slopes are kept as [`Scaled`] numbers so
//! that products like `e^{2^n} · 2^n e^{-2^n}` come out exact.

pub mod borichev;
pub mod energy;
pub mod obstruction;

pub use borichev::{borichev_iterate, check_disjoint, first_subcritical, log_integral_divergence, DivergenceSum, IterationState};
pub use energy::{energy_block_quadrature, energy_lower};
pub use obstruction::{bm_density_constant, lipschitz_obstruction};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcmodel::{DyadicBlock, FuncError, Outside, Piece, PiecewiseFn, VrBlock};
use crate::logscalar::{LogScalar, Scaled};
use crate::quad::{near_pole_safe, GaussLegendre};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("hills {n} and {k} overlap")]
    Overlap { n: u32, k: u32 },
    #[error("generation {m}: intervals for n = {n} and n = {k} intersect")]
    Disjointness { m: u32, n: u32, k: u32 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Func(#[from] FuncError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Hills at `2^n` of half-width `2^n/n^γ` and slope `n^γ`.
    PowerHills,
    /// Hills filling `[2^{2^n}, 2^{2^{n+1}}]` with slope `n^2`.
    DoublyLacunary,
    /// Hills at `2^n` of half-width `2^n e^{-2^n}` and slope `e^{2^n}`.
    ExpNeedles,
    /// Hills at `2^n` of height `2^n/√n` and half-width `2^n/n^ρ`, `ρ = r/(2r-2)`.
    RootHeight,
    /// Hills on `[2^n, 2^n + 2^n/n^β]` with slope `n^{β-α}`.
    OneSided,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::PowerHills => "power-hills",
            Family::DoublyLacunary => "doubly-lacunary",
            Family::ExpNeedles => "exp-needles",
            Family::RootHeight => "root-height",
            Family::OneSided => "one-sided",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hill {
    pub n: u32,
    pub center: f64,
    /// Half-width relative to the center.
    pub w: Scaled,
    pub slope: Scaled,
}

impl Hill {
    pub fn half_width(&self) -> Scaled {
        self.w * Scaled::plain(self.center)
    }

    pub fn height(&self) -> Scaled {
        self.slope * self.half_width()
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width().to_f64()
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width().to_f64()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = (x - self.center).abs();
        if d == 0.0 {
            return self.height().to_f64();
        }
        let h = self.half_width().to_f64();
        if d >= h {
            0.0
        } else {
            self.slope.to_f64() * (h - d)
        }
    }

    /// `∫ hill dP`.
    pub fn poisson(&self) -> LogScalar {
        let w = self.w.to_f64();
        if w < 1e-3 {
            // x = c(1 + w t): slope w^2 ∫ (1 - |t|) / (c^{-2} + (1 + w t)^2) dt
            let eps = 1.0 / (self.center * self.center);
            let gl = GaussLegendre::cached(24);
            let g = |t: f64| (1.0 - t.abs()) / (eps + (1.0 + w * t) * (1.0 + w * t));
            let j = gl.integrate(g, -1.0, 0.0) + gl.integrate(g, 0.0, 1.0);
            (self.slope * self.w * self.w * Scaled::plain(j)).to_log()
        } else {
            let s = self.slope.to_f64();
            let h = self.half_width().to_f64();
            let c = self.center;
            let up = near_pole_safe(&|x: f64| s * (x - (c - h)) / (1.0 + x * x), c - h, c);
            let down = near_pole_safe(&|x: f64| s * ((c + h) - x) / (1.0 + x * x), c, c + h);
            LogScalar::from_f64(up + down)
        }
    }

    /// Upper bound `slope w^2 / (1 - w)^2` for `∫ hill dP`.
    pub fn poisson_upper(&self) -> LogScalar {
        let w = self.w.to_f64();
        (self.slope * self.w * self.w).to_log() * LogScalar::from_f64(1.0 / ((1.0 - w) * (1.0 - w)))
    }

    /// Rising and falling halves, each split over the dyadic blocks it meets,
    /// as `(block, length)`.
    fn block_overlaps(&self) -> Vec<(i32, Scaled)> {
        let c = self.center;
        let hw = self.half_width();
        let h = hw.to_f64();
        let mut out = Vec::new();
        for (a, b, ja, jb) in [
            (c - h, c, DyadicBlock::containing(if c - h < c { c - h } else { c.next_down() }).0, DyadicBlock::containing(c.next_down()).0),
            (c, c + h, DyadicBlock::containing(c).0, DyadicBlock::containing(if c + h > c { (c + h).next_down() } else { c }).0),
        ] {
            if ja == jb {
                out.push((ja, hw));
            } else {
                for j in ja..=jb {
                    let iv = DyadicBlock(j).interval();
                    let len = b.min(iv.hi) - a.max(iv.lo);
                    if len > 0.0 {
                        out.push((j, Scaled::plain(len)));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorantSpec {
    pub family: Family,
    pub params: Params,
    pub n_range: [u32; 2],
    #[serde(skip)]
    pub hills: Vec<Hill>,
}

/// Serialized form `{"family", "params", "n_range"}`.
#[derive(Deserialize)]
struct SpecFile {
    family: Family,
    #[serde(default)]
    params: Params,
    n_range: [u32; 2],
}

fn param(ok: bool, msg: impl FnOnce() -> String) -> Result<(), ZooError> {
    if ok {
        Ok(())
    } else {
        Err(ZooError::Param(msg()))
    }
}

fn check_range(n_min: u32, n_max: u32, least: u32) -> Result<(), ZooError> {
    param(n_min >= least, || format!("n_min = {n_min} must be at least {least}"))?;
    param(n_max >= n_min, || format!("n_max = {n_max} is below n_min = {n_min}"))?;
    param(n_max <= 1000, || format!("n_max = {n_max} puts centers beyond the double range"))
}

fn pow2(n: u32) -> f64 {
    2f64.powi(n as i32)
}

impl MajorantSpec {
    fn finish(family: Family, params: Params, n_min: u32, n_max: u32, hills: Vec<Hill>) -> Result<Self, ZooError> {
        for pair in hills.windows(2) {
            if pair[0].hi() > pair[1].lo() {
                return Err(ZooError::Overlap { n: pair[0].n, k: pair[1].n });
            }
        }
        Ok(MajorantSpec { family, params, n_range: [n_min, n_max], hills })
    }

    pub fn power_hills(gamma: f64, n_min: u32, n_max: u32) -> Result<Self, ZooError> {
        param(gamma > 1.0, || format!("gamma = {gamma} must exceed 1"))?;
        check_range(n_min, n_max, 3)?;
        let hills = (n_min..=n_max)
            .map(|n| {
                let p = Scaled::power(n as f64, gamma);
                Hill { n, center: pow2(n), w: p.recip(), slope: p }
            })
            .collect();
        let params = Params { gamma: Some(gamma), ..Params::default() };
        Self::finish(Family::PowerHills, params, n_min, n_max, hills)
    }

    pub fn doubly_lacunary(n_min: u32, n_max: u32) -> Result<Self, ZooError> {
        check_range(n_min, n_max, 3)?;
        param(n_max <= 6, || format!("n_max = {n_max} exceeds 6"))?;
        let hills = (n_min..=n_max)
            .map(|n| {
                let a = 2f64.powi(1 << n);
                let b = 2f64.powi(1 << (n + 1));
                let c = 0.5 * (a + b);
                Hill { n, center: c, w: Scaled::plain(0.5 * (b - a) / c), slope: Scaled::plain((n * n) as f64) }
            })
            .collect();
        Self::finish(Family::DoublyLacunary, Params::default(), n_min, n_max, hills)
    }

    pub fn exp_needles(n_min: u32, n_max: u32) -> Result<Self, ZooError> {
        check_range(n_min, n_max, 1)?;
        let hills = (n_min..=n_max)
            .map(|n| {
                let e = pow2(n);
                Hill { n, center: e, w: Scaled::new(1.0, -e), slope: Scaled::new(1.0, e) }
            })
            .collect();
        Self::finish(Family::ExpNeedles, Params::default(), n_min, n_max, hills)
    }

    /// Relative half-widths are capped at `1/4` so that neighbouring hills
    /// stay apart for small `n`.
    pub fn root_height(r: f64, n_min: u32, n_max: u32) -> Result<Self, ZooError> {
        param(r > 1.0, || format!("r = {r} must exceed 1"))?;
        check_range(n_min, n_max, 2)?;
        let rho = if r.is_infinite() { 0.5 } else { r / (2.0 * r - 2.0) };
        let hills = (n_min..=n_max)
            .map(|n| {
                let nf = n as f64;
                let w = if nf.powf(-rho) <= 0.25 { Scaled::power(nf, -rho) } else { Scaled::plain(0.25) };
                // height / half-width = n^{-1/2} / w
                let slope = Scaled::power(nf, -0.5) / w;
                Hill { n, center: pow2(n), w, slope }
            })
            .collect();
        let params = Params { r: Some(r), rho: Some(rho), ..Params::default() };
        Self::finish(Family::RootHeight, params, n_min, n_max, hills)
    }

    pub fn one_sided(alpha: f64, beta: f64, n_min: u32, n_max: u32) -> Result<Self, ZooError> {
        param(alpha > 0.0 && alpha <= 0.5, || format!("alpha = {alpha} must lie in (0, 1/2]"))?;
        param(beta > 0.0, || format!("beta = {beta} must be positive"))?;
        param(alpha + beta > 1.0, || format!("alpha + beta = {} must exceed 1", alpha + beta))?;
        check_range(n_min, n_max, 3)?;
        let hills = (n_min..=n_max)
            .map(|n| {
                let nf = n as f64;
                let rel = 0.5 * nf.powf(-beta);
                Hill { n, center: pow2(n) * (1.0 + rel), w: Scaled::plain(rel / (1.0 + rel)), slope: Scaled::power(nf, beta - alpha) }
            })
            .collect();
        let params = Params { alpha: Some(alpha), beta: Some(beta), ..Params::default() };
        Self::finish(Family::OneSided, params, n_min, n_max, hills)
    }

    pub fn build(family: Family, params: Params, n_min: u32, n_max: u32) -> Result<Self, ZooError> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| ZooError::Param(format!("{name} is required for {}", family.name())));
        match family {
            Family::PowerHills => Self::power_hills(need(params.gamma, "gamma")?, n_min, n_max),
            Family::DoublyLacunary => Self::doubly_lacunary(n_min, n_max),
            Family::ExpNeedles => Self::exp_needles(n_min, n_max),
            Family::RootHeight => Self::root_height(need(params.r, "r")?, n_min, n_max),
            Family::OneSided => Self::one_sided(need(params.alpha, "alpha")?, need(params.beta, "beta")?, n_min, n_max),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ZooError> {
        let f: SpecFile = serde_json::from_str(text).map_err(|e| ZooError::Param(e.to_string()))?;
        Self::build(f.family, f.params, f.n_range[0], f.n_range[1])
    }

    fn hill_at(&self, x: f64) -> Option<&Hill> {
        let i = self.hills.partition_point(|h| h.center < x);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|i| self.hills.get(i))
            .find(|h| (x - h.center).abs() <= h.half_width().to_f64())
    }

    /// The log-majorant `M = log(1/ω)` at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.hill_at(x).map_or(0.0, |h| h.eval(x))
    }

    /// `M(x)/x`.
    pub fn quotient(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            self.eval(x) / x
        }
    }

    /// `M` as a piecewise-linear function with default 0. Hills whose width
    /// is below `1e-12` of their center have no faithful double representation
    /// and are rejected.
    pub fn lower(&self) -> Result<PiecewiseFn, ZooError> {
        let log_scaled = matches!(self.family, Family::DoublyLacunary | Family::ExpNeedles);
        let mut pieces = Vec::with_capacity(2 * self.hills.len());
        for h in &self.hills {
            if h.w.to_f64() < 1e-12 {
                return Err(ZooError::Unsupported(format!(
                    "hill n = {} is narrower than 1e-12 of its center; use the analytic routines",
                    h.n
                )));
            }
            let c = h.center;
            let hw = h.half_width().to_f64();
            let (a, b) = (c - hw, c + hw);
            // rounded endpoints: keep the peak and both zeros, adjust the falling slope
            let (lr, lf) = (c - a, b - c);
            if log_scaled {
                let s = Some(h.slope.to_log());
                pieces.push(Piece { lo: a, hi: c, coeffs: vec![0.0, 1.0], log_scale: s });
                pieces.push(Piece { lo: c, hi: b, coeffs: vec![lr, -lr / lf], log_scale: s });
            } else {
                let s = h.slope.to_f64();
                pieces.push(Piece::new(a, c, vec![0.0, s]));
                pieces.push(Piece::new(c, b, vec![s * lr, -s * lr / lf]));
            }
        }
        Ok(PiecewiseFn::new(pieces, Outside::Zero)?)
    }

    /// Block means `((1/|J_j|) ∫_{J_j} |M'|^r)^{1/r}` from the hill geometry.
    pub fn vr_block_values(&self, r: f64, js: std::ops::RangeInclusive<i32>) -> Vec<VrBlock> {
        let mut acc: std::collections::BTreeMap<i32, Scaled> = js.clone().map(|j| (j, Scaled::ZERO)).collect();
        for h in &self.hills {
            for (j, len) in h.block_overlaps() {
                if let Some(slot) = acc.get_mut(&j) {
                    if r.is_infinite() {
                        if len.mant > 0.0 && h.slope.to_log().log_mag > slot.to_log().log_mag {
                            *slot = h.slope;
                        }
                    } else {
                        *slot = *slot + h.slope.powf(r) * len;
                    }
                }
            }
        }
        acc.into_iter()
            .map(|(j, s)| {
                let v = if r.is_infinite() { s } else { (s / Scaled::plain(DyadicBlock(j).len())).powf(1.0 / r) };
                VrBlock { j, value: v.to_f64(), log_value: v.to_log() }
            })
            .collect()
    }

    /// Per-hill `∫ M dP` and running partial sums.
    pub fn poisson_terms(&self) -> Vec<PoissonTerm> {
        let mut partial = 0.0;
        self.hills
            .iter()
            .map(|h| {
                let v = h.poisson();
                partial += v.to_f64();
                PoissonTerm { n: h.n, value: v.to_f64(), log_value: v, upper: h.poisson_upper().to_f64(), partial }
            })
            .collect()
    }

    /// Bound on `Σ_{n > after} ∫ hill_n dP` for the infinite family, where
    /// the family admits one.
    pub fn poisson_tail_bound(&self, after: u32) -> Option<f64> {
        let nf = after as f64;
        match self.family {
            Family::PowerHills => {
                let g = self.params.gamma?;
                let w = (nf + 1.0).powf(-g);
                Some(nf.powf(1.0 - g) / ((g - 1.0) * (1.0 - w) * (1.0 - w)))
            }
            Family::RootHeight => {
                let rho = self.params.rho?;
                if rho <= 0.5 || after < 16 {
                    return None;
                }
                // slope w^2 = n^{-1/2-ρ}, w <= 1/4
                Some(16.0 / 9.0 * nf.powf(0.5 - rho) / (rho - 0.5))
            }
            Family::ExpNeedles => Some(2.0 * (-(2f64.powi(after as i32 + 1))).exp() * 16.0 / 9.0),
            Family::OneSided => {
                let (a, b) = (self.params.alpha?, self.params.beta?);
                // slope w^2 <= n^{-α-β}/4, w <= 1/4
                Some(16.0 / 9.0 * 0.25 * nf.powf(1.0 - a - b) / (a + b - 1.0))
            }
            Family::DoublyLacunary => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoissonTerm {
    pub n: u32,
    pub value: f64,
    pub log_value: LogScalar,
    pub upper: f64,
    pub partial: f64,
}
