//! Command-line front end. Each command writes `<command>.json` or one or
//! more `<command>*.csv` tables into the output directory and prints a
//! one-line summary.
//!
//! Exit codes: 0 success, 1 precondition violation, 2 I/O or parse error,
//! 3 internal invariant breach.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::admissibility::{
    certify_sigma, synthesize_testfn, AdmissibilityError, CertifyOptions, Omega, PhaseSign, Verdict,
};
use crate::funcmodel::{io::read_function, poisson_integral, vr_block_norms, DyadicBlock, FuncError, Interval, PiecewiseFn};
use crate::hilbert::{hilbert_pw_signed, hilbert_quad_oracle, HilbertError, KernelSign};
use crate::nazarov::{global_majorant, linear_growth_check, local_majorant, GlobalOptions, LocalOptions, NazarovError};
use crate::zoo::borichev::{borichev_iterate, first_subcritical, log_integral_divergence};
use crate::zoo::energy::{energy_block_quadrature, energy_lower};
use crate::zoo::obstruction::{bm_density_constant, lipschitz_obstruction};
use crate::zoo::{Family, MajorantSpec, Params, ZooError};

#[derive(Debug)]
pub enum CliError {
    Precondition(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => 1,
            CliError::Io(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Precondition(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<FuncError> for CliError {
    fn from(e: FuncError) -> Self {
        match e {
            FuncError::Io { .. } | FuncError::Parse { .. } => CliError::Io(e.to_string()),
            FuncError::Overflow => CliError::Internal(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<HilbertError> for CliError {
    fn from(e: HilbertError) -> Self {
        match e {
            HilbertError::Func(f) => f.into(),
            HilbertError::NoConvergence { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<NazarovError> for CliError {
    fn from(e: NazarovError) -> Self {
        match e {
            NazarovError::Func(f) => f.into(),
            NazarovError::Hilbert(h) => h.into(),
            NazarovError::PreconditionViolated(_) => CliError::Precondition(e.to_string()),
            NazarovError::ZeroIntegral => CliError::Internal(e.to_string()),
        }
    }
}

impl From<ZooError> for CliError {
    fn from(e: ZooError) -> Self {
        match e {
            ZooError::Func(f) => f.into(),
            ZooError::Param(_) | ZooError::Unsupported(_) => CliError::Precondition(e.to_string()),
            ZooError::Overlap { .. } | ZooError::Disjointness { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<AdmissibilityError> for CliError {
    fn from(e: AdmissibilityError) -> Self {
        match e {
            AdmissibilityError::Func(f) => f.into(),
            AdmissibilityError::Hilbert(h) => h.into(),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

fn precondition(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Precondition(msg()))
    }
}

#[derive(Parser, Debug)]
#[command(name = "bmtk", version, about = "Majorants, modified Hilbert transforms and admissibility certificates")]
struct Cli {
    /// Output directory.
    #[arg(long, env = "BMTK_OUT", default_value = ".", global = true)]
    out: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modified Hilbert transform p.v. ∫ f(t) (1/(x-t) + t/(1+t^2)) dt of a
    /// compactly supported piecewise polynomial. Table: x, Hf.
    Hilbert(HilbertArgs),
    /// Block means (|J|^{-1} ∫_J |f'|^r)^{1/r} over the dyadic blocks
    /// J_0 = [-2, 2), J_j = ±[2^|j|, 2^{|j|+1}). Table: j, lo, hi, value.
    VrNorm(VrArgs),
    /// ∫ f dx/(π(1+x^2)), the Poisson integral.
    Poisson(PoissonArgs),
    /// Local majorant F >= f on an interval I with supp F ⊂ (3/2)I and
    /// bounded (HF)', from the regularized system of essential intervals.
    NazarovLocal(LocalArgs),
    /// Global majorant Ω₁ >= Ω glued from local majorants over dyadic blocks,
    /// with its Poisson integral and sup |(HΩ₁)'|.
    NazarovGlobal(GlobalArgs),
    /// Admissibility certificate: ∫ log(1/ω) dP finite and
    /// sup |(H log(1/ω))'| < πσ.
    Certify(CertifyArgs),
    /// Samples ω exp(i(±H log(1/ω) + πσx)) on [-L, L) and measures its
    /// spectral energy in [0, σ]. Tables: x, re, im, abs, omega; xi, power.
    Synthesize(SynthArgs),
    /// Explicit log-majorant families built from hills at 2^n.
    Zoo(ZooArgs),
    /// Smallness propagation I_{n,m+1} = (h_m^α/2) I_{n,m} for functions
    /// bounded by the power-hills weight. Table: n, m, lo, hi, e_m, log_bound.
    Borichev(BorichevArgs),
    /// Σ n^{-2α} lower bound for the energy ∬ ((K(x)-K(y))/(x-y))^2 of the
    /// one-sided family's quotient K = M/x, with per-square quadrature.
    Energy(EnergyArgs),
    /// Least Poisson integral of a C0-Lipschitz function with
    /// Ω(2^n) >= 2^n/√n for 2 <= n <= N.
    Obstruction(ObstructionArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct HilbertArgs {
    /// Function file.
    #[arg(long = "fn")]
    func: PathBuf,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Uniform grid `lo,hi,count` added to the points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<f64>>,
    /// Also evaluate the quadrature oracle with this tolerance.
    #[arg(long)]
    oracle_tol: Option<f64>,
    /// Kernel orientation.
    #[arg(long, value_enum, default_value_t = SignArg::Standard)]
    kernel: SignArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SignArg {
    /// 1/(x - t)
    Standard,
    /// 1/(t - x)
    Reversed,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VrArgs {
    #[arg(long = "fn")]
    func: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = -8)]
    j_min: i32,
    #[arg(long, default_value_t = 8)]
    j_max: i32,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct PoissonArgs {
    #[arg(long = "fn")]
    func: PathBuf,
    #[arg(long, default_value_t = crate::funcmodel::DEFAULT_TAIL_TOL)]
    tail_tol: f64,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct LocalArgs {
    #[arg(long = "fn")]
    func: PathBuf,
    #[arg(long)]
    lo: f64,
    #[arg(long)]
    hi: f64,
    /// Height parameter: sup_I f <= δ l(I).
    #[arg(long)]
    delta: f64,
    /// Derivative parameter: ‖f'‖_{L^r(I)} <= κ l(I)^{1/r}.
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = LocalOptions::default().max_depth)]
    max_depth: u32,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GlobalArgs {
    /// Function file for Ω.
    #[arg(long = "fn", conflicts_with = "spec")]
    func: Option<PathBuf>,
    /// Family file `{"family", "params", "n_range"}`; its piecewise-linear form is used.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Ω is flattened to its max over [-R, R].
    #[arg(long, default_value_t = 2.0)]
    big_r: f64,
    #[arg(long, default_value_t = 16)]
    n_window: i32,
    #[arg(long, default_value_t = 100_000)]
    check_n: usize,
    #[arg(long, default_value_t = 20_000)]
    deriv_grid_n: usize,
    /// Points for the linear-growth estimate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    probes: Vec<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct CertifyArgs {
    /// Weight file; `"represents": "log_majorant"` marks it as log(1/ω).
    #[arg(long)]
    omega: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 20_000)]
    grid_n: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SynthArgs {
    #[arg(long)]
    omega: PathBuf,
    #[arg(long)]
    sigma: f64,
    /// Half-width L of the sampling window.
    #[arg(long = "half-width", default_value_t = 64.0)]
    half_width: f64,
    /// Sample count N, a power of two.
    #[arg(long, default_value_t = 1 << 14)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = PhaseArg::Auto)]
    sign: PhaseArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PhaseArg {
    Plus,
    Minus,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    PowerHills,
    DoublyLacunary,
    ExpNeedles,
    RootHeight,
    OneSided,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::PowerHills => Family::PowerHills,
            FamilyArg::DoublyLacunary => Family::DoublyLacunary,
            FamilyArg::ExpNeedles => Family::ExpNeedles,
            FamilyArg::RootHeight => Family::RootHeight,
            FamilyArg::OneSided => Family::OneSided,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    /// The hills: n, center, lo, hi, half_width, height.
    Spec,
    /// Block values of M (exponent --r, or --vr-r for the root-height family).
    Vr,
    /// Per-hill Poisson integrals and partial sums.
    Poisson,
    /// M as a piecewise-linear function file.
    Lower,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ZooArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    #[arg(long)]
    gamma: Option<f64>,
    /// Block-value exponent; for root-height also the family exponent.
    #[arg(long)]
    r: Option<f64>,
    /// Block-value exponent when it differs from the family's r.
    #[arg(long)]
    vr_r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n_min: u32,
    #[arg(long)]
    n_max: u32,
    #[arg(long, value_enum, default_value_t = Emit::Spec)]
    emit: Emit,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct BorichevArgs {
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    /// Decay constant C in (0, 1).
    #[arg(long = "c", default_value_t = 0.5)]
    c: f64,
    /// Dilation exponent in (0, 1/2).
    #[arg(long, default_value_t = 0.25)]
    alpha_b: f64,
    #[arg(long, default_value_t = 4)]
    m_max: u32,
    #[arg(long, default_value_t = 3)]
    n_min: u32,
    #[arg(long, default_value_t = 40)]
    n_max: u32,
    /// Caps for Σ n^{-e_m} at the first generation with e_m < 1.
    #[arg(long, value_delimiter = ',', default_values_t = vec![100u64, 10_000, 1_000_000])]
    n_cap: Vec<u64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EnergyArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Upper summation index N.
    #[arg(long, default_value_t = 10_000)]
    n_max: u64,
    /// Squares 3..=Q get a quadrature cross-check.
    #[arg(long, default_value_t = 8)]
    quad_n_max: u32,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ObstructionArgs {
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 10_000)]
    n_max: u64,
}

/// A CSV table: header names and rows of preformatted cells.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest representation that reads back to the same double.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn row(cells: &[f64]) -> Vec<String> {
    cells.iter().map(|&v| num(v)).collect()
}

pub fn write_table(t: &Table, path: &Path) -> Result<(), CliError> {
    let mut s = t.header.join(",");
    s.push('\n');
    for r in &t.rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Outcome {
    name: &'static str,
    json: Value,
    tables: Vec<(&'static str, Table)>,
    summary: String,
    /// Set when the computation finished but a construction invariant failed.
    breach: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialization")
}

fn emit(o: &Outcome, out: &Path, format: Format) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    match format {
        Format::Json => {
            let path = out.join(format!("{}.json", o.name));
            let text = serde_json::to_string_pretty(&o.json).expect("json") + "\n";
            fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        Format::Csv => {
            for (suffix, t) in &o.tables {
                write_table(t, &out.join(format!("{}{}.csv", o.name, suffix)))?;
            }
            Ok(())
        }
    }
}

fn read_fn(path: &Path) -> Result<PiecewiseFn, CliError> {
    Ok(read_function(path)?)
}

fn cmd_hilbert(a: &HilbertArgs) -> Result<Outcome, CliError> {
    let f = read_fn(&a.func)?;
    let mut xs = a.x.clone();
    if let Some(g) = &a.grid {
        precondition(g.len() == 3, || format!("--grid takes lo,hi,count; got {} values", g.len()))?;
        let (lo, hi, n) = (g[0], g[1], g[2]);
        precondition(n >= 2.0 && n.fract() == 0.0 && hi > lo, || format!("--grid {lo},{hi},{n}: need hi > lo and an integer count >= 2"))?;
        let n = n as usize;
        xs.extend((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64));
    }
    precondition(!xs.is_empty(), || "no evaluation points: pass --x or --grid".into())?;
    if let Some(t) = a.oracle_tol {
        precondition(t > 0.0, || format!("--oracle-tol {t} must be positive"))?;
    }
    let sign = match a.kernel {
        SignArg::Standard => KernelSign::Standard,
        SignArg::Reversed => KernelSign::Reversed,
    };
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &x in &xs {
        let v = hilbert_pw_signed(&f, x, sign)?.value;
        let q = match a.oracle_tol {
            Some(t) => Some(sign.factor() * hilbert_quad_oracle(&f, x, t)?.value),
            None => None,
        };
        let mut r = vec![x, v];
        r.extend(q);
        rows.push(row(&r));
        items.push(json!({"x": x, "Hf": v, "oracle": q}));
    }
    let mut header = vec!["x", "Hf"];
    if a.oracle_tol.is_some() {
        header.push("Hf_oracle");
    }
    Ok(Outcome {
        name: "hilbert",
        json: json!({"kernel": format!("{:?}", sign), "values": items}),
        tables: vec![("", Table { header, rows })],
        summary: format!("hilbert: {} points", xs.len()),
        breach: None,
    })
}

fn cmd_vr(a: &VrArgs) -> Result<Outcome, CliError> {
    precondition(a.j_min <= a.j_max, || format!("--j-min {} exceeds --j-max {}", a.j_min, a.j_max))?;
    let f = read_fn(&a.func)?;
    let rep = vr_block_norms(&f, a.r, a.j_min..=a.j_max)?;
    let rows = rep
        .blocks
        .iter()
        .map(|b| {
            let iv = DyadicBlock(b.j).interval();
            let mut r = vec![b.j.to_string()];
            r.extend(row(&[iv.lo, iv.hi, b.value]));
            r
        })
        .collect();
    Ok(Outcome {
        name: "vr-norm",
        summary: format!("vr-norm: r = {}, sup = {} at j = {:?}", a.r, num(rep.sup), rep.arg_sup),
        json: to_value(&rep),
        tables: vec![("", Table { header: vec!["j", "lo", "hi", "value"], rows })],
        breach: None,
    })
}

fn cmd_poisson(a: &PoissonArgs) -> Result<Outcome, CliError> {
    precondition(a.tail_tol > 0.0, || format!("--tail-tol {} must be positive", a.tail_tol))?;
    let f = read_fn(&a.func)?;
    let v = poisson_integral(&f, a.tail_tol)?;
    Ok(Outcome {
        name: "poisson",
        summary: format!("poisson: {}", num(v.value)),
        json: to_value(&v),
        tables: vec![("", Table { header: vec!["value", "tail_bound"], rows: vec![row(&[v.value, v.tail_bound])] })],
        breach: None,
    })
}

fn cmd_local(a: &LocalArgs) -> Result<Outcome, CliError> {
    precondition(a.hi > a.lo, || format!("--lo {} must be below --hi {}", a.lo, a.hi))?;
    let f = read_fn(&a.func)?;
    let iv = Interval::new(a.lo, a.hi);
    let opts = LocalOptions { max_depth: a.max_depth, ..LocalOptions::default() };
    let out = local_majorant(&f, &iv, a.delta, a.kappa, a.r, &opts)?;
    let rep = &out.report;
    let rows = out
        .tau
        .members
        .iter()
        .map(|m| {
            let g = Interval::new(m.interval.lo * iv.len() + iv.center(), m.interval.hi * iv.len() + iv.center());
            let mut r = vec![format!("{:?}", m.kind).to_lowercase()];
            r.extend(row(&[g.lo, g.hi]));
            r
        })
        .collect();
    let breach = (!(rep.support_ok && rep.majorize_ok))
        .then(|| format!("support_ok = {}, majorize_ok = {}", rep.support_ok, rep.majorize_ok));
    Ok(Outcome {
        name: "nazarov-local",
        summary: format!(
            "nazarov-local: {} intervals, sup |(HF)'| = {}, mass {} <= {}",
            rep.system_size,
            num(rep.deriv_sup),
            num(rep.mass_lhs),
            num(rep.mass_rhs)
        ),
        json: json!({"report": to_value(rep), "system_unit_coordinates": out.tau.to_json()}),
        tables: vec![("", Table { header: vec!["kind", "lo", "hi"], rows })],
        breach,
    })
}

fn cmd_global(a: &GlobalArgs) -> Result<Outcome, CliError> {
    let omega = match (&a.func, &a.spec) {
        (Some(p), None) => read_fn(p)?,
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            MajorantSpec::from_json(&text)
                .map_err(|e| match e {
                    ZooError::Param(m) => CliError::Io(format!("{}: {m}", p.display())),
                    e => e.into(),
                })?
                .lower()?
        }
        _ => return Err(CliError::Precondition("pass exactly one of --fn and --spec".into())),
    };
    precondition(a.n_window >= 0, || format!("--n-window {} must be non-negative", a.n_window))?;
    let opts = GlobalOptions {
        r: a.r,
        eps: a.eps,
        big_r: a.big_r,
        n_window: a.n_window,
        check_n: a.check_n,
        deriv_grid_n: a.deriv_grid_n,
        ..GlobalOptions::default()
    };
    let out = global_majorant(&omega, &opts)?;
    let rep = &out.report;
    let growth = if a.probes.is_empty() {
        Value::Null
    } else {
        to_value(&linear_growth_check(&omega, a.r, a.eps, a.n_window, &a.probes)?)
    };
    let rows = rep
        .blocks
        .iter()
        .map(|b| {
            let mut r = vec![b.j.to_string()];
            r.extend(row(&[b.interval.lo, b.interval.hi, b.sup, b.delta, b.kappa, b.system_size as f64, b.deriv_sup]));
            r
        })
        .collect();
    let breach = (!(rep.majorize_exact_ok && rep.majorize_grid_ok))
        .then(|| format!("majorize_exact_ok = {}, majorize_grid_ok = {}", rep.majorize_exact_ok, rep.majorize_grid_ok));
    Ok(Outcome {
        name: "nazarov-global",
        summary: format!(
            "nazarov-global: {} blocks, ∫ Ω₁ dP = {}, sup |(HΩ₁)'| = {}",
            rep.blocks.len(),
            num(rep.poisson_integral),
            num(rep.deriv_sup)
        ),
        json: json!({"report": to_value(rep), "growth": growth}),
        tables: vec![(
            "",
            Table { header: vec!["j", "lo", "hi", "sup", "delta", "kappa", "system_size", "deriv_sup"], rows },
        )],
        breach,
    })
}

fn cmd_certify(a: &CertifyArgs) -> Result<Outcome, CliError> {
    precondition(a.sigma > 0.0, || format!("--sigma {} must be positive", a.sigma))?;
    let omega = Omega::read(&a.omega)?;
    let c = certify_sigma(&omega, a.sigma, &CertifyOptions { r: a.r, grid_n: a.grid_n })?;
    let verdict = match c.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::LogDivergent => "log_divergent",
    };
    Ok(Outcome {
        name: "certify",
        summary: format!("certify: {verdict} (sup |(HM)'| = {}, πσ = {})", num(c.deriv_sup), num(c.threshold)),
        tables: vec![(
            "",
            Table {
                header: vec!["sigma", "log_integral", "vr_norm", "deriv_sup", "threshold", "margin", "verdict"],
                rows: vec![{
                    let mut r = row(&[c.sigma, c.log_integral, c.vr_norm, c.deriv_sup, c.threshold, c.margin]);
                    r.push(verdict.into());
                    r
                }],
            },
        )],
        json: to_value(&c),
        breach: None,
    })
}

fn cmd_synth(a: &SynthArgs) -> Result<Outcome, CliError> {
    precondition(a.sigma > 0.0, || format!("--sigma {} must be positive", a.sigma))?;
    precondition(a.samples.is_power_of_two() && a.samples >= 4, || format!("--samples {} must be a power of two >= 4", a.samples))?;
    precondition(a.half_width > 0.0, || format!("--half-width {} must be positive", a.half_width))?;
    let omega = Omega::read(&a.omega)?;
    let sign = match a.sign {
        PhaseArg::Plus => PhaseSign::Plus,
        PhaseArg::Minus => PhaseSign::Minus,
        PhaseArg::Auto => PhaseSign::Auto,
    };
    let s = synthesize_testfn(&omega, a.sigma, a.half_width, a.samples, sign, &CertifyOptions::default())?;
    let samples = (0..s.x.len()).map(|k| row(&[s.x[k], s.f[k].re, s.f[k].im, s.f[k].norm(), s.omega[k]])).collect();
    let power = s.power.iter().map(|&(nu, p)| row(&[2.0 * std::f64::consts::PI * nu, p])).collect();
    Ok(Outcome {
        name: "synthesize",
        summary: format!(
            "synthesize: in-band fraction {} with sign {:?}",
            num(s.report.in_band_energy_fraction),
            s.report.sign
        ),
        json: to_value(&s.report),
        tables: vec![
            ("", Table { header: vec!["x", "re", "im", "abs", "omega"], rows: samples }),
            ("-spectrum", Table { header: vec!["xi", "power"], rows: power }),
        ],
        breach: None,
    })
}

fn cmd_zoo(a: &ZooArgs) -> Result<Outcome, CliError> {
    let family: Family = a.family.into();
    let params = Params { gamma: a.gamma, r: a.r, rho: None, alpha: a.alpha, beta: a.beta };
    let spec = MajorantSpec::build(family, params, a.n_min, a.n_max)?;
    let name = "zoo";
    let summary = format!("zoo: {} with {} hills", family.name(), spec.hills.len());
    match a.emit {
        Emit::Spec => {
            let rows = spec
                .hills
                .iter()
                .map(|h| {
                    let mut r = vec![h.n.to_string()];
                    r.extend(row(&[h.center, h.lo(), h.hi(), h.half_width().to_f64(), h.height().to_f64()]));
                    r
                })
                .collect();
            let hills: Vec<Value> = spec
                .hills
                .iter()
                .map(|h| {
                    json!({"n": h.n, "center": h.center, "half_width": h.half_width().to_log(),
                           "slope": h.slope.to_log(), "height": h.height().to_log()})
                })
                .collect();
            Ok(Outcome {
                name,
                summary,
                json: json!({"spec": to_value(&spec), "hills": hills}),
                tables: vec![("", Table { header: vec!["n", "center", "lo", "hi", "half_width", "height"], rows })],
                breach: None,
            })
        }
        Emit::Vr => {
            let r = a.vr_r.or(a.r).ok_or_else(|| CliError::Precondition("--r (or --vr-r) is required for --emit vr".into()))?;
            precondition(r >= 1.0, || format!("block exponent {r} must be >= 1"))?;
            let (first, last) = (spec.hills[0], spec.hills[spec.hills.len() - 1]);
            let js = DyadicBlock::containing(first.lo()).0..=DyadicBlock::containing(last.hi()).0;
            let blocks = spec.vr_block_values(r, js);
            let rows = blocks
                .iter()
                .map(|b| {
                    let iv = DyadicBlock(b.j).interval();
                    let mut x = vec![b.j.to_string()];
                    x.extend(row(&[iv.lo, iv.hi, b.value]));
                    x
                })
                .collect();
            Ok(Outcome {
                name,
                summary,
                json: json!({"r": r, "blocks": to_value(&blocks)}),
                tables: vec![("", Table { header: vec!["j", "lo", "hi", "value"], rows })],
                breach: None,
            })
        }
        Emit::Poisson => {
            let terms = spec.poisson_terms();
            let tail = spec.poisson_tail_bound(a.n_max);
            let rows = terms
                .iter()
                .map(|t| {
                    let mut x = vec![t.n.to_string()];
                    x.extend(row(&[t.value, t.upper, t.partial]));
                    x
                })
                .collect();
            Ok(Outcome {
                name,
                summary: format!("{summary}; remainder bound {:?}", tail),
                json: json!({"terms": to_value(&terms), "remainder_bound": tail}),
                tables: vec![("", Table { header: vec!["n", "value", "upper", "partial"], rows })],
                breach: None,
            })
        }
        Emit::Lower => {
            let f = spec.lower()?;
            let rows = f.pieces().iter().map(|p| row(&[p.lo, p.hi, p.eval(p.lo), p.right_value()])).collect();
            Ok(Outcome {
                name,
                summary,
                json: serde_json::from_str(&crate::funcmodel::io::to_json(&f)).expect("function json"),
                tables: vec![("", Table { header: vec!["lo", "hi", "value_lo", "value_hi"], rows })],
                breach: None,
            })
        }
    }
}

fn cmd_borichev(a: &BorichevArgs) -> Result<Outcome, CliError> {
    let states = borichev_iterate(a.gamma, a.c, a.alpha_b, a.m_max, a.n_min, a.n_max)?;
    let m_star = first_subcritical(a.gamma, a.alpha_b);
    let gen: Vec<_> = states.iter().copied().filter(|s| s.m == m_star).collect();
    let mut sums = Vec::new();
    if !gen.is_empty() {
        for &cap in &a.n_cap {
            sums.push(log_integral_divergence(&gen, cap)?);
        }
    }
    let rows = states
        .iter()
        .map(|s| {
            let mut r = vec![s.n.to_string(), s.m.to_string()];
            r.extend(row(&[s.interval.lo, s.interval.hi, s.length_exponent, s.log_bound.to_f64()]));
            r
        })
        .collect();
    Ok(Outcome {
        name: "borichev",
        summary: format!("borichev: {} states, first generation with e_m < 1 is m = {m_star}", states.len()),
        json: json!({"first_subcritical": m_star, "states": to_value(&states), "divergence": to_value(&sums)}),
        tables: vec![("", Table { header: vec!["n", "m", "lo", "hi", "e_m", "log_bound"], rows })],
        breach: None,
    })
}

fn cmd_energy(a: &EnergyArgs) -> Result<Outcome, CliError> {
    let q_max = a.quad_n_max.max(3);
    let spec = MajorantSpec::one_sided(a.alpha, a.beta, 3, q_max)?;
    let total = energy_lower(a.alpha, 3, a.n_max);
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for n in 3..=a.quad_n_max {
        let q = energy_block_quadrature(&spec, n)?;
        let lower = (n as f64).powf(-2.0 * a.alpha);
        rows.push({
            let mut r = vec![n.to_string()];
            r.extend(row(&[q, lower, q / lower]));
            r
        });
        blocks.push(json!({"n": n, "quadrature": q, "lower": lower, "ratio": q / lower}));
    }
    Ok(Outcome {
        name: "energy",
        summary: format!("energy: Σ_{{n=3}}^{{{}}} n^(-2α) = {}", a.n_max, num(total)),
        json: json!({"alpha": a.alpha, "beta": a.beta, "n_max": a.n_max, "energy_lower": total, "blocks": blocks}),
        tables: vec![("", Table { header: vec!["n", "quadrature", "lower", "ratio"], rows })],
        breach: None,
    })
}

fn cmd_obstruction(a: &ObstructionArgs) -> Result<Outcome, CliError> {
    precondition(a.c0 > 0.0, || format!("--c0 {} must be positive", a.c0))?;
    let v = lipschitz_obstruction(a.c0, a.n_max);
    Ok(Outcome {
        name: "obstruction",
        summary: format!("obstruction: ∫ Ω dP >= {} for N = {}", num(v), a.n_max),
        json: json!({"c0": a.c0, "n_max": a.n_max, "integral_lower": v, "density": bm_density_constant()}),
        tables: vec![("", Table { header: vec!["c0", "n_max", "integral_lower"], rows: vec![row(&[a.c0, a.n_max as f64, v])] })],
        breach: None,
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Hilbert(a) => cmd_hilbert(a),
        Command::VrNorm(a) => cmd_vr(a),
        Command::Poisson(a) => cmd_poisson(a),
        Command::NazarovLocal(a) => cmd_local(a),
        Command::NazarovGlobal(a) => cmd_global(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Synthesize(a) => cmd_synth(a),
        Command::Zoo(a) => cmd_zoo(a),
        Command::Borichev(a) => cmd_borichev(a),
        Command::Energy(a) => cmd_energy(a),
        Command::Obstruction(a) => cmd_obstruction(a),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|o| {
        emit(&o, &cli.out, cli.format)?;
        Ok(o)
    });
    match result {
        Ok(o) => {
            println!("{}", o.summary);
            match o.breach {
                Some(m) => {
                    eprintln!("error: invariant breach: {m}");
                    3
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
