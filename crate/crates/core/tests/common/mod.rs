#![allow(dead_code)]

use bmtk::funcmodel::{Outside, Piece, PiecewiseFn};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise quadratic on 1..=6 touching pieces inside [-3, 3], zero outside.
/// Jumps are allowed.
pub fn random_pw_quadratic(rng: &mut ChaCha8Rng) -> PiecewiseFn {
    let k = rng.gen_range(1..=6);
    let mut knots: Vec<f64> = (0..=k).map(|_| rng.gen_range(-3.0..3.0)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut pieces = Vec::new();
    for w in knots.windows(2) {
        if w[1] - w[0] < 1e-3 {
            continue;
        }
        let c = vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        pieces.push(Piece::new(w[0], w[1], c));
    }
    if pieces.is_empty() {
        pieces.push(Piece::new(-1.0, 1.0, vec![1.0, 0.5, -0.25]));
    }
    PiecewiseFn::new(pieces, Outside::Zero).unwrap()
}

/// Continuous nonnegative piecewise-linear function on [lo, hi] vanishing at
/// both ends, with `k` interior knots.
pub fn random_pw_linear_bump(rng: &mut ChaCha8Rng, lo: f64, hi: f64, k: usize, max_height: f64) -> PiecewiseFn {
    let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut knots = vec![(lo, 0.0)];
    for x in xs {
        if x - knots.last().unwrap().0 > 1e-6 * (hi - lo) && hi - x > 1e-6 * (hi - lo) {
            knots.push((x, rng.gen_range(0.0..max_height)));
        }
    }
    knots.push((hi, 0.0));
    PiecewiseFn::linear_spline(&knots).unwrap()
}

/// A point at least `gap` away from every breakpoint.
pub fn random_point_away(rng: &mut ChaCha8Rng, f: &PiecewiseFn, lo: f64, hi: f64, gap: f64) -> f64 {
    let bps = f.breakpoints();
    loop {
        let x = rng.gen_range(lo..hi);
        if bps.iter().all(|&b| (b - x).abs() > gap) {
            return x;
        }
    }
}

use bmtk::funcmodel::Interval;

/// Nonnegative parabola bump `h·4(x-a)(b-x)/(b-a)^2` on `[a, b]`.
pub fn parabola_bump(a: f64, b: f64, h: f64) -> PiecewiseFn {
    let w = b - a;
    // local variable u = x - a: h·4u(w-u)/w^2
    let c = vec![0.0, 4.0 * h / w, -4.0 * h / (w * w)];
    PiecewiseFn::new(vec![Piece::new(a, b, c)], Outside::Zero).unwrap()
}

#[derive(Clone, Debug)]
pub struct LocalCase {
    pub f: PiecewiseFn,
    pub interval: Interval,
    pub r: f64,
    /// `δ = boost · sup f / l(I)`.
    pub boost: f64,
}

/// Deterministic local corpus: mixtures of piecewise-linear and parabolic
/// bumps at several scales on a handful of intervals.
pub fn local_corpus(n: usize, seed: u64) -> Vec<LocalCase> {
    let mut rng = rng(seed);
    let rs = [1.25, 2.0, 4.0, f64::INFINITY];
    let intervals = [
        Interval::new(-0.5, 0.5),
        Interval::new(2.0, 6.0),
        Interval::new(-10.0, -9.0),
        Interval::new(0.0, 0.25),
    ];
    (0..n)
        .map(|i| {
            let interval = intervals[i % intervals.len()];
            let r = rs[(i / intervals.len()) % rs.len()];
            let l = interval.len();
            let bumps = rng.gen_range(1..=4);
            let mut parts = Vec::new();
            let mut cursor = interval.lo;
            for _ in 0..bumps {
                let room = interval.hi - cursor;
                if room < 1e-3 * l {
                    break;
                }
                let a = cursor + rng.gen_range(0.0..0.5) * room;
                let w = rng.gen_range(0.05..0.5) * (interval.hi - a);
                let b = a + w;
                let h = l * 2f64.powf(-rng.gen_range(1.0..9.0));
                let h = h.min(0.5 * l);
                let part = if rng.gen_bool(0.5) {
                    parabola_bump(a, b, h)
                } else {
                    let k = rng.gen_range(1..5);
                    random_pw_linear_bump(&mut rng, a, b, k, h)
                };
                parts.push(part);
                cursor = b;
            }
            let refs: Vec<&PiecewiseFn> = parts.iter().collect();
            let boost = 2f64.powi(rng.gen_range(0..=9));
            LocalCase { f: PiecewiseFn::sum(&refs).unwrap(), interval, r, boost }
        })
        .collect()
}

/// A corpus case with its parameters fixed: `δ` and `κ` as used by the
/// local construction.
#[derive(Clone, Debug)]
pub struct FrozenCase {
    pub f: PiecewiseFn,
    pub interval: Interval,
    pub r: f64,
    pub delta: f64,
    pub kappa: f64,
}

fn r_to_json(r: f64) -> serde_json::Value {
    if r.is_infinite() {
        serde_json::json!("inf")
    } else {
        serde_json::json!(r)
    }
}

fn r_from_json(v: &serde_json::Value) -> f64 {
    match v.as_str() {
        Some("inf") => f64::INFINITY,
        _ => v.as_f64().expect("r"),
    }
}

/// `δ = boost · sup f / l(I)`; `κ` is the measured `‖f'‖_{L^r(I)} / l(I)^{1/r}`.
pub fn freeze(case: &LocalCase) -> FrozenCase {
    let l = case.interval.len();
    let delta = case.boost * case.f.sup_norm(&case.interval) / l;
    let dn = bmtk::nazarov::hadamard::derivative_lr_norm(&case.f, &case.interval, case.r);
    let kappa = if case.r.is_infinite() { dn } else { dn / l.powf(1.0 / case.r) };
    FrozenCase { f: case.f.clone(), interval: case.interval, r: case.r, delta, kappa }
}

pub fn corpus_to_json(cases: &[FrozenCase]) -> String {
    let rows: Vec<serde_json::Value> = cases
        .iter()
        .map(|c| {
            serde_json::json!({
                "function": serde_json::from_str::<serde_json::Value>(&bmtk::funcmodel::io::to_json(&c.f)).unwrap(),
                "interval": [c.interval.lo, c.interval.hi],
                "r": r_to_json(c.r),
                "delta": c.delta,
                "kappa": c.kappa,
            })
        })
        .collect();
    serde_json::to_string_pretty(&rows).unwrap() + "\n"
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load_corpus() -> Vec<FrozenCase> {
    let text = std::fs::read_to_string(fixture_path("local_corpus.json")).expect("frozen corpus; run the recorder");
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    rows.iter()
        .map(|v| {
            let f = bmtk::funcmodel::io::parse_function(&v["function"].to_string(), "corpus").unwrap();
            let iv = &v["interval"];
            FrozenCase {
                f,
                interval: Interval::new(iv[0].as_f64().unwrap(), iv[1].as_f64().unwrap()),
                r: r_from_json(&v["r"]),
                delta: v["delta"].as_f64().unwrap(),
                kappa: v["kappa"].as_f64().unwrap(),
            }
        })
        .collect()
}

/// Frozen constants, keyed by name.
pub fn load_constants() -> serde_json::Value {
    let text = std::fs::read_to_string(fixture_path("constants.json")).expect("frozen constants; run the recorder");
    serde_json::from_str(&text).unwrap()
}

pub const HL_EXPONENTS: [f64; 4] = [1.25, 2.0, 4.0, f64::INFINITY];

pub struct LocalMeasure {
    pub out: bmtk::nazarov::LocalOutput,
    pub separation: bmtk::nazarov::SeparationReport,
    /// Largest interpolation ratio over the system members, for each of
    /// `HL_EXPONENTS`.
    pub hl: [f64; 4],
}

pub fn measure_local(case: &FrozenCase) -> LocalMeasure {
    use bmtk::nazarov::{hadamard_landau_ratio, local_majorant, system_report, LocalOptions};
    let out = local_majorant(&case.f, &case.interval, case.delta, case.kappa, case.r, &LocalOptions::default()).unwrap();
    let separation = system_report(&out.tau);
    let mut hl = [0.0f64; 4];
    for m in &out.tau.members {
        for (k, &r) in HL_EXPONENTS.iter().enumerate() {
            if out.rescaled.sup_norm(&m.interval) > 0.0 {
                hl[k] = hl[k].max(hadamard_landau_ratio(&out.rescaled, &m.interval, r).unwrap());
            }
        }
    }
    LocalMeasure { out, separation, hl }
}

/// Global run on the root-height family, `r = 2`, `|j| <= 12`, `ε = 0.1`.
pub fn global_run() -> bmtk::nazarov::GlobalOutput {
    use bmtk::nazarov::{global_majorant, GlobalOptions};
    let spec = bmtk::zoo::MajorantSpec::root_height(2.0, 2, 12).unwrap();
    let omega = spec.lower().unwrap();
    let opts = GlobalOptions { r: 2.0, eps: 0.1, n_window: 12, ..GlobalOptions::default() };
    global_majorant(&omega, &opts).unwrap()
}
