//! Dense polynomial helpers. Coefficients are stored lowest degree first.

pub fn eval(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

pub fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|&a| a != 0.0).unwrap_or(0)
}

pub fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

pub fn deriv(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Antiderivative vanishing at 0.
pub fn antideriv(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(0.0);
    out.extend(c.iter().enumerate().map(|(k, &a)| a / (k as f64 + 1.0)));
    out
}

pub fn integral(c: &[f64], a: f64, b: f64) -> f64 {
    let anti = antideriv(c);
    eval(&anti, b) - eval(&anti, a)
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n).map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0)).collect()
}

pub fn scale(c: &[f64], s: f64) -> Vec<f64> {
    c.iter().map(|&a| a * s).collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn powi(c: &[f64], k: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = mul(&out, c);
    }
    out
}

/// Coefficients of `u ↦ p(u + d)`.
pub fn taylor_shift(c: &[f64], d: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    let n = out.len();
    if d == 0.0 {
        return out;
    }
    for i in 0..n {
        for k in (i..n - 1).rev() {
            out[k] += d * out[k + 1];
        }
    }
    out
}

/// Coefficients of `u ↦ p(s·u)`.
pub fn scale_var(c: &[f64], s: f64) -> Vec<f64> {
    let mut f = 1.0;
    c.iter()
        .map(|&a| {
            let v = a * f;
            f *= s;
            v
        })
        .collect()
}

/// Quotient `q` with `p(u) - p(xi) = (u - xi) q(u)`.
pub fn div_linear(c: &[f64], xi: f64) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut q = vec![0.0; n - 1];
    let mut acc = 0.0;
    for k in (1..n).rev() {
        acc = acc * xi + c[k];
        q[k - 1] = acc;
    }
    q
}

/// Real roots of `p` in `[a, b]`, sorted. Monotone segments between the
/// roots of `p'` hold at most one root each, located by bisection.
pub fn real_roots(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let d = degree(c);
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        let r = -c[0] / c[1];
        return if r >= a && r <= b { vec![r] } else { Vec::new() };
    }
    let crit = real_roots(&deriv(&c[..=d]), a, b);
    let mut knots = Vec::with_capacity(crit.len() + 2);
    knots.push(a);
    knots.extend(crit);
    knots.push(b);
    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (eval(c, lo), eval(c, hi));
        let r = if flo == 0.0 {
            Some(lo)
        } else if fhi == 0.0 {
            Some(hi)
        } else if flo.signum() != fhi.signum() {
            Some(bisect(c, lo, hi, flo))
        } else {
            None
        };
        if let Some(r) = r {
            if roots.last().map_or(true, |&last| r > last) {
                roots.push(r);
            }
        }
    }
    roots
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximum of `|p|` over `[a, b]` from endpoints and critical points.
pub fn max_abs(c: &[f64], a: f64, b: f64) -> f64 {
    let mut m = eval(c, a).abs().max(eval(c, b).abs());
    for r in real_roots(&deriv(c), a, b) {
        m = m.max(eval(c, r).abs());
    }
    m
}

/// Minimum of `p` over `[a, b]`.
pub fn min_value(c: &[f64], a: f64, b: f64) -> f64 {
    let mut m = eval(c, a).min(eval(c, b));
    for r in real_roots(&deriv(c), a, b) {
        m = m.min(eval(c, r));
    }
    m
}
