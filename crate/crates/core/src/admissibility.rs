//! Admissibility certificates for weights `ω = e^{-M}` and empirical
//! synthesis of test functions with `|f| = ω`.
//!
//! Fourier normalization used throughout: `f̂(ν) = ∫ f(x) e^{-2πiνx} dx`,
//! with `ν` in cycles per unit length. The band `[0, σ]` refers to `ν`, so an
//! `e^{iξx}` component lies in the band when `ξ ∈ [0, 2πσ]`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::funcmodel::{
    io::parse_function, poisson_integral, vr::abs_power_integral, vr_block_norms, DyadicBlock, FuncError, Outside, Piece, PiecewiseFn,
    DEFAULT_TAIL_TOL,
};
use crate::hilbert::{hilbert_deriv_sup, hilbert_table, DerivSup, HilbertError, KernelSign};

pub const FOURIER_NORMALIZATION: &str = "f^(nu) = integral f(x) exp(-2 pi i nu x) dx, nu in cycles per unit";
pub const TAPER: &str = "raised cosine over the outer 10% of [-L, L]";

#[derive(Debug, Error)]
pub enum AdmissibilityError {
    #[error("range: {0}")]
    Range(String),
    #[error("not certified: {0}")]
    NotCertified(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// A weight, given either through `M = log(1/ω)` or pointwise.
#[derive(Clone, Debug)]
pub enum Omega {
    /// `ω = e^{-M}`.
    Exp(PiecewiseFn),
    /// `ω` itself; must be piecewise constant with values in `(0, 1]`.
    Pointwise(PiecewiseFn),
}

impl Omega {
    /// Reads a function file. A top-level `"represents": "log_majorant"`
    /// marks the file as `M`; anything else is read as `ω`.
    pub fn parse(text: &str, origin: &str) -> Result<Omega, FuncError> {
        let f = parse_function(text, origin)?;
        let tagged: Option<serde_json::Value> = serde_json::from_str(text).ok();
        let is_m = tagged
            .as_ref()
            .and_then(|v| v.get("represents"))
            .and_then(|v| v.as_str())
            .map_or(false, |s| s == "log_majorant");
        Ok(if is_m { Omega::Exp(f) } else { Omega::Pointwise(f) })
    }

    pub fn read(path: &Path) -> Result<Omega, FuncError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| FuncError::Io { path: shown.clone(), source })?;
        Omega::parse(&text, &shown)
    }

    pub fn log_majorant(&self) -> Result<PiecewiseFn, AdmissibilityError> {
        match self {
            Omega::Exp(m) => {
                if m.default() != Outside::Zero {
                    return Err(AdmissibilityError::Range("M must vanish outside its pieces".into()));
                }
                Ok(m.clone())
            }
            Omega::Pointwise(w) => log_majorant(w),
        }
    }
}

/// `M = log(1/ω)` for a piecewise-constant `ω` with `0 < ω <= 1`.
pub fn log_majorant(omega: &PiecewiseFn) -> Result<PiecewiseFn, AdmissibilityError> {
    if omega.default() != Outside::One {
        return Err(AdmissibilityError::Range("ω vanishes outside its pieces".into()));
    }
    let mut pieces = Vec::with_capacity(omega.pieces().len());
    for p in omega.pieces() {
        if p.coeffs.iter().skip(1).any(|&c| c != 0.0) {
            return Err(AdmissibilityError::Range(format!(
                "ω must be piecewise constant; piece [{}, {}) is not (pass M with \"represents\": \"log_majorant\" instead)",
                p.lo, p.hi
            )));
        }
        let v = p.eval(p.lo);
        if !(v > 0.0) {
            return Err(AdmissibilityError::Range(format!("ω = {v} <= 0 on [{}, {})", p.lo, p.hi)));
        }
        if v > 1.0 {
            return Err(AdmissibilityError::Range(format!("ω = {v} > 1 on [{}, {})", p.lo, p.hi)));
        }
        let m = -v.ln();
        if m != 0.0 {
            pieces.push(Piece::new(p.lo, p.hi, vec![m]));
        }
    }
    Ok(PiecewiseFn::new(pieces, Outside::Zero)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    LogDivergent,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub sigma: f64,
    /// `∫ log(1/ω) dP`.
    pub log_integral: f64,
    pub vr_norm: f64,
    pub vr_r: f64,
    /// `sup |(H M)'|`; infinite when `M'` jumps.
    pub deriv_sup: f64,
    pub deriv: DerivSup,
    /// `π σ`.
    pub threshold: f64,
    pub verdict: Verdict,
    pub margin: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub r: f64,
    pub grid_n: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { r: 2.0, grid_n: 20_000 }
    }
}

/// Sup of `|(H M)'|` over the line. The search covers the support tripled;
/// beyond it `|(H M)'(x)| <= ‖M'‖_1 / dist(x, supp M)`, which is added as a
/// bound on the remainder.
pub fn deriv_sup_on_line(m: &PiecewiseFn, grid_n: usize) -> Result<DerivSup, AdmissibilityError> {
    let Some(supp) = m.support() else {
        return Ok(DerivSup::Bounded { value: 0.0, at: 0.0 });
    };
    let region = supp.dilate(3.0);
    let found = hilbert_deriv_sup(m, &region, grid_n)?;
    let DerivSup::Bounded { value, at } = found else {
        return Ok(found);
    };
    let g = m.derivative();
    let l1: f64 = g
        .pieces()
        .iter()
        .map(|p| abs_power_integral(&p.coeffs, 0.0, p.len(), 1.0))
        .sum();
    let outside = l1 / supp.len();
    Ok(if outside > value { DerivSup::Bounded { value: outside, at: region.hi } } else { DerivSup::Bounded { value, at } })
}

/// Checks `∫ M dP < ∞` and `‖(H M)'‖_∞ < π σ`.
pub fn certify_sigma(omega: &Omega, sigma: f64, opts: &CertifyOptions) -> Result<Certificate, AdmissibilityError> {
    if !(sigma > 0.0) {
        return Err(AdmissibilityError::Precondition(format!("sigma = {sigma} must be positive")));
    }
    let m = omega.log_majorant()?;
    let threshold = PI * sigma;
    let log_integral = match poisson_integral(&m, DEFAULT_TAIL_TOL) {
        Ok(v) => v.value,
        Err(FuncError::Divergent { .. }) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    let vr_norm = match m.hull() {
        Some(h) => {
            let lo = DyadicBlock::containing(h.lo).0;
            let hi = DyadicBlock::containing(h.hi).0;
            match vr_block_norms(&m, opts.r, lo.min(hi)..=lo.max(hi)) {
                Ok(rep) => rep.sup,
                Err(FuncError::NotAbsolutelyContinuous { .. }) => f64::INFINITY,
                Err(e) => return Err(e.into()),
            }
        }
        None => 0.0,
    };
    let deriv = if m.is_continuous() {
        deriv_sup_on_line(&m, opts.grid_n)?
    } else {
        let (_, at) = m.worst_jump();
        DerivSup::Unbounded { at }
    };
    let deriv_sup = deriv.value();
    let verdict = if !log_integral.is_finite() {
        Verdict::LogDivergent
    } else if deriv_sup < threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Certificate {
        sigma,
        log_integral,
        vr_norm,
        vr_r: opts.r,
        deriv_sup,
        deriv,
        threshold,
        verdict,
        margin: threshold - deriv_sup,
    })
}

/// `2π σ^{3/2} ‖f‖_2`: Lipschitz constant of `f` with `f̂` supported in `[0, σ]`.
pub fn bandlimited_lipschitz_bound(sigma: f64, l2_norm: f64) -> f64 {
    2.0 * PI * sigma.powf(1.5) * l2_norm
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSign {
    Plus,
    Minus,
    Auto,
}

impl PhaseSign {
    fn factor(self) -> f64 {
        if self == PhaseSign::Minus {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub half_width: f64,
    pub samples: usize,
    pub band: [f64; 2],
    pub in_band_energy_fraction: f64,
    /// Fraction for each sign tried, `[+, -]`; `None` when not tried.
    pub fraction_by_sign: [Option<f64>; 2],
    pub sign: PhaseSign,
    /// Width of the frequency interval left after trimming 0.5% of the
    /// energy from each end of the spectrum.
    pub bandwidth_99: f64,
    pub l2_norm: f64,
    pub window: String,
    pub normalization: String,
}

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub x: Vec<f64>,
    pub f: Vec<Complex64>,
    pub omega: Vec<f64>,
    pub taper: Vec<f64>,
    /// `(ν, |f̂(ν)|^2)` in increasing `ν`.
    pub power: Vec<(f64, f64)>,
    pub report: SpectrumReport,
}

/// Raised-cosine taper on `[-L, L]`: one in the middle 80%, falling to zero
/// at the ends.
pub fn taper(x: f64, half_width: f64) -> f64 {
    let edge = 0.1 * half_width;
    let d = half_width - x.abs();
    if d >= edge {
        1.0
    } else if d <= 0.0 {
        0.0
    } else {
        0.5 * (1.0 - (PI * d / edge).cos())
    }
}

struct Spectrum {
    power: Vec<(f64, f64)>,
    fraction: f64,
    bandwidth_99: f64,
}

fn spectrum(f: &[Complex64], dx: f64, sigma: f64) -> Spectrum {
    let n = f.len();
    let mut buf = f.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dnu = 1.0 / (n as f64 * dx);
    let mut power: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            (kk * dnu, buf[k].norm_sqr() * dx * dx)
        })
        .collect();
    power.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = power.iter().map(|p| p.1).sum();
    let inside: f64 = power.iter().filter(|p| p.0 >= 0.0 && p.0 <= sigma).map(|p| p.1).sum();
    let cut = 0.005 * total;
    let (mut acc, mut lo) = (0.0, power[0].0);
    for p in &power {
        acc += p.1;
        if acc > cut {
            lo = p.0;
            break;
        }
    }
    let (mut acc, mut hi) = (0.0, power[n - 1].0);
    for p in power.iter().rev() {
        acc += p.1;
        if acc > cut {
            hi = p.0;
            break;
        }
    }
    Spectrum { power, fraction: if total > 0.0 { inside / total } else { 0.0 }, bandwidth_99: (hi - lo).max(0.0) }
}

/// Samples `f = ω e^{i(s·HM + πσx)}` times the taper on `N` points of
/// `[-L, L)` and measures the share of `|f̂|^2` inside `[0, σ]`.
pub fn synthesize_testfn(
    omega: &Omega,
    sigma: f64,
    half_width: f64,
    n: usize,
    sign: PhaseSign,
    opts: &CertifyOptions,
) -> Result<Synthesis, AdmissibilityError> {
    if !n.is_power_of_two() || n < 4 {
        return Err(AdmissibilityError::Precondition(format!("N = {n} must be a power of two >= 4")));
    }
    if !(half_width > 0.0) {
        return Err(AdmissibilityError::Precondition(format!("L = {half_width} must be positive")));
    }
    let cert = certify_sigma(omega, sigma, opts)?;
    if cert.verdict != Verdict::Pass {
        return Err(AdmissibilityError::NotCertified(format!(
            "verdict {:?}: sup |(HM)'| = {} against π σ = {}",
            cert.verdict, cert.deriv_sup, cert.threshold
        )));
    }
    let m = omega.log_majorant()?;
    if let Some(h) = m.hull() {
        if h.lo < -0.5 * half_width || h.hi > 0.5 * half_width {
            return Err(AdmissibilityError::Precondition(format!(
                "support of M [{}, {}] must lie in [-L/2, L/2] = [{}, {}]",
                h.lo,
                h.hi,
                -0.5 * half_width,
                0.5 * half_width
            )));
        }
    }
    let dx = 2.0 * half_width / n as f64;
    let x: Vec<f64> = (0..n).map(|k| -half_width + k as f64 * dx).collect();
    let hm = hilbert_table(&m, &x, KernelSign::Standard)?;
    let w: Vec<f64> = x.iter().map(|&t| (-m.eval(t)).exp()).collect();
    let tp: Vec<f64> = x.iter().map(|&t| taper(t, half_width)).collect();
    let build = |s: f64| -> Vec<Complex64> {
        (0..n).into_par_iter().map(|k| Complex64::from_polar(w[k] * tp[k], s * hm[k] + PI * sigma * x[k])).collect()
    };
    let tried: Vec<PhaseSign> = match sign {
        PhaseSign::Auto => vec![PhaseSign::Plus, PhaseSign::Minus],
        s => vec![s],
    };
    let mut fraction_by_sign = [None, None];
    let mut best: Option<(PhaseSign, Vec<Complex64>, Spectrum)> = None;
    for s in tried {
        let f = build(s.factor());
        let spec = spectrum(&f, dx, sigma);
        fraction_by_sign[if s == PhaseSign::Minus { 1 } else { 0 }] = Some(spec.fraction);
        if best.as_ref().map_or(true, |b| spec.fraction > b.2.fraction) {
            best = Some((s, f, spec));
        }
    }
    let (chosen, f, spec) = best.expect("at least one sign tried");
    let l2_norm = (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
    let report = SpectrumReport {
        half_width,
        samples: n,
        band: [0.0, sigma],
        in_band_energy_fraction: spec.fraction,
        fraction_by_sign,
        sign: chosen,
        bandwidth_99: spec.bandwidth_99,
        l2_norm,
        window: TAPER.to_string(),
        normalization: FOURIER_NORMALIZATION.to_string(),
    };
    Ok(Synthesis { x, f, omega: w, taper: tp, power: spec.power, report })
}

/// Largest `| |f(x_{k+1})| - |f(x_k)| | / dx` over the grid.
pub fn max_modulus_slope(s: &Synthesis) -> f64 {
    s.f.windows(2)
        .zip(s.x.windows(2))
        .map(|(f, x)| (f[1].norm() - f[0].norm()).abs() / (x[1] - x[0]))
        .fold(0.0, f64::max)
}

/// `M` for the smoothed tent: height `h`, support `[-a, a]`, rising and
/// falling along the quintic `10u^3 - 15u^4 + 6u^5`, so `M` is `C^2`.
pub fn smoothed_tent(height: f64, a: f64) -> PiecewiseFn {
    let q = |s: f64| vec![0.0, 0.0, 0.0, 10.0 * s / a.powi(3), -15.0 * s / a.powi(4), 6.0 * s / a.powi(5)];
    let rise = q(height);
    let mut fall = q(-height);
    fall[0] = height;
    PiecewiseFn::new(vec![Piece::new(-a, 0.0, rise), Piece::new(0.0, a, fall)], Outside::Zero)
        .expect("smoothed tent pieces are disjoint")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> CertifyOptions {
        CertifyOptions { r: 2.0, grid_n: 4000 }
    }

    #[test]
    fn trivial_weight() {
        let m = log_majorant(&PiecewiseFn::one()).unwrap();
        assert!(m.is_zero());
        let c = certify_sigma(&Omega::Pointwise(PiecewiseFn::one()), 0.7, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.deriv_sup, 0.0);
        assert_eq!(c.margin, PI * 0.7);
    }

    #[test]
    fn range_errors() {
        let zero_gap = PiecewiseFn::new(vec![Piece::new(0.0, 1.0, vec![0.0])], Outside::One).unwrap();
        assert!(matches!(log_majorant(&zero_gap), Err(AdmissibilityError::Range(_))));
        let big = PiecewiseFn::new(vec![Piece::new(0.0, 1.0, vec![1.5])], Outside::One).unwrap();
        assert!(matches!(log_majorant(&big), Err(AdmissibilityError::Range(_))));
        assert!(matches!(log_majorant(&PiecewiseFn::zero()), Err(AdmissibilityError::Range(_))));
        let half = PiecewiseFn::new(vec![Piece::new(0.0, 1.0, vec![0.5])], Outside::One).unwrap();
        let m = log_majorant(&half).unwrap();
        assert_eq!(m.eval(0.5), 2f64.ln());
    }

    #[test]
    fn sharp_tent_never_passes() {
        let w = Omega::Exp(PiecewiseFn::unit_tent());
        for sigma in [0.1, 10.0, 1e6] {
            let c = certify_sigma(&w, sigma, &opts()).unwrap();
            assert_eq!(c.verdict, Verdict::Fail);
            assert!(c.deriv_sup.is_infinite());
        }
        let e = synthesize_testfn(&w, 5.0, 64.0, 1024, PhaseSign::Auto, &opts()).unwrap_err();
        assert!(matches!(e, AdmissibilityError::NotCertified(_)));
    }

    #[test]
    fn smoothed_tent_is_c2_and_monotone_in_sigma() {
        let m = smoothed_tent(1.0, 2.0);
        assert!(m.is_continuous() && m.derivative().is_continuous());
        assert_eq!(m.eval(0.0), 1.0);
        let w = Omega::Exp(m);
        let c = certify_sigma(&w, 1.0, &opts()).unwrap();
        assert!(c.deriv_sup.is_finite() && c.deriv_sup > 0.0);
        let s0 = c.deriv_sup / PI;
        assert_eq!(certify_sigma(&w, 0.99 * s0, &opts()).unwrap().verdict, Verdict::Fail);
        assert_eq!(certify_sigma(&w, 1.01 * s0, &opts()).unwrap().verdict, Verdict::Pass);
        assert_eq!(certify_sigma(&w, 10.0 * s0, &opts()).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn lipschitz_constant() {
        assert_eq!(bandlimited_lipschitz_bound(0.0, 3.0), 0.0);
        assert_eq!(bandlimited_lipschitz_bound(2.0, 0.0), 0.0);
        assert_eq!(bandlimited_lipschitz_bound(1.0, 1.0), 2.0 * PI);
    }

    #[test]
    fn modulated_taper_is_in_band() {
        let s = synthesize_testfn(&Omega::Pointwise(PiecewiseFn::one()), 4.0, 64.0, 1 << 12, PhaseSign::Plus, &opts())
            .unwrap();
        assert!(s.report.in_band_energy_fraction >= 0.99, "{:?}", s.report);
        for k in 0..s.x.len() {
            assert!((s.f[k].norm() - s.taper[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn unknown_keys_select_the_representation() {
        let text = r#"{"represents": "log_majorant", "default": 0, "pieces": [{"interval": [0, 1], "coeffs": [0.5]}]}"#;
        assert!(matches!(Omega::parse(text, "t").unwrap(), Omega::Exp(_)));
        let text = r#"{"default": 1, "pieces": [{"interval": [0, 1], "coeffs": [0.5]}]}"#;
        assert!(matches!(Omega::parse(text, "t").unwrap(), Omega::Pointwise(_)));
    }

    #[test]
    fn fixture_matches_constructor_and_frozen_sup() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/smooth_tent.json");
        let Omega::Exp(m) = Omega::read(&path).unwrap() else { panic!("fixture must be tagged as M") };
        let built = smoothed_tent(1.0, 2.0);
        for k in 0..=400 {
            let x = -2.5 + k as f64 * 0.0125;
            assert!((m.eval(x) - built.eval(x)).abs() <= 1e-15);
        }
        // Cauchy-weight adaptive quadrature of p.v. ∫ M'(t)/(x - t) dt, maximized over x
        let c = certify_sigma(&Omega::Exp(m), 1.0, &CertifyOptions::default()).unwrap();
        assert!((c.deriv_sup - 2.8209997824337956).abs() < 1e-9, "{}", c.deriv_sup);
        assert_eq!(c.verdict, Verdict::Pass);
    }
}
