//! Dyadic interval systems: maximal essential intervals, their tails, the
//! regularized system and its separation contracts.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::funcmodel::{Interval, PiecewiseFn};

/// Dyadic subinterval of a root interval: `root.lo + index·2^{-level}·l(root)`
/// with length `2^{-level}·l(root)`. Indices outside `[0, 2^level)` describe
/// cells beyond the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cell {
    pub level: u32,
    pub index: i64,
}

impl Cell {
    pub const ROOT: Cell = Cell { level: 0, index: 0 };

    pub fn interval(&self, root: &Interval) -> Interval {
        let len = root.len() * 2f64.powi(-(self.level as i32));
        let lo = root.lo + self.index as f64 * len;
        Interval::new(lo, lo + len)
    }

    pub fn parent(&self) -> Option<Cell> {
        (self.level > 0).then(|| Cell { level: self.level - 1, index: self.index.div_euclid(2) })
    }

    pub fn children(&self) -> [Cell; 2] {
        let l = self.level + 1;
        [Cell { level: l, index: 2 * self.index }, Cell { level: l, index: 2 * self.index + 1 }]
    }

    pub fn inside_root(&self) -> bool {
        self.index >= 0 && self.index < (1i64 << self.level)
    }

    /// True when `self` lies inside `other` (or equals it).
    pub fn within(&self, other: &Cell) -> bool {
        self.level >= other.level && (self.index >> (self.level - other.level)) == other.index
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    EssentialMaximal,
    Tail,
    /// Last tail member before the march left the root interval.
    Clipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Member {
    pub interval: Interval,
    pub cell: Cell,
    pub kind: Kind,
    /// Index (into the essential list) of the interval whose tail produced this member.
    pub parent: Option<usize>,
    /// Tail generation.
    pub p: Option<u32>,
    /// Set for resolution-limited cells accepted as essential without
    /// meeting the threshold.
    pub promoted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalSystem {
    pub root: Interval,
    pub max_depth: u32,
    pub members: Vec<Member>,
}

impl IntervalSystem {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.members.iter().map(|m| m.interval).collect()
    }

    /// Dump in the flat `{"kind", "lo", "hi", "parent", "p"}` layout.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .members
            .iter()
            .map(|m| {
                serde_json::json!({
                    "kind": m.kind,
                    "lo": m.interval.lo,
                    "hi": m.interval.hi,
                    "parent": m.parent,
                    "p": m.p,
                })
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Maximal dyadic subintervals `I` of `root` with `sup_I f >= l(I)/2`.
/// Descent stops at essential or zero-sup cells; at `max_depth` a cell with
/// positive sup is promoted to essential.
pub fn essential_maximal(f: &PiecewiseFn, root: &Interval, max_depth: u32) -> IntervalSystem {
    let mut members = Vec::new();
    let mut stack = vec![Cell::ROOT];
    while let Some(cell) = stack.pop() {
        let iv = cell.interval(root);
        let s = f.sup_norm(&iv);
        if s == 0.0 {
            continue;
        }
        // ties at l/2 are common for dyadic data; keep them on the essential side under rounding
        let essential = s >= 0.5 * iv.len() * (1.0 - 1e-12);
        if essential || cell.level >= max_depth {
            members.push(Member {
                interval: iv,
                cell,
                kind: Kind::EssentialMaximal,
                parent: None,
                p: None,
                promoted: !essential,
            });
            continue;
        }
        let [a, b] = cell.children();
        stack.push(b);
        stack.push(a);
    }
    members.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));
    IntervalSystem { root: *root, max_depth, members }
}

/// Adds to every essential interval `c` its tail: for `p = 1, 2, ...`,
/// `3^p` contiguous cells of length `2^{-p} l(c)` on each side, marching
/// outward from where the previous generation ended. Generations stop at
/// the resolution `l(root)·2^{-max_depth}`; each side stops at the boundary
/// of the root. The result keeps the maximal-by-inclusion cells.
pub fn attach_tails(am: &IntervalSystem) -> IntervalSystem {
    let root = am.root;
    let mut origin: HashMap<Cell, (Kind, Option<usize>, Option<u32>, bool)> = HashMap::new();
    for (i, m) in am.members.iter().enumerate() {
        origin.entry(m.cell).or_insert((Kind::EssentialMaximal, Some(i), None, m.promoted));
    }
    for (i, m) in am.members.iter().enumerate() {
        let c = m.cell;
        // right side: next free index at the current level; left side: last used
        let mut right_end = c.index + 1; // in units of the current level
        let mut left_start = c.index;
        let mut right_open = true;
        let mut left_open = true;
        let mut level = c.level;
        let mut p = 0u32;
        while (right_open || left_open) && level < am.max_depth {
            p += 1;
            level += 1;
            right_end *= 2;
            left_start *= 2;
            let count = 3i64.saturating_pow(p);
            for side in [1i64, -1] {
                let open = if side > 0 { &mut right_open } else { &mut left_open };
                if !*open {
                    continue;
                }
                let mut placed = 0;
                while placed < count {
                    let idx = if side > 0 { right_end } else { left_start - 1 };
                    let cell = Cell { level, index: idx };
                    if !cell.inside_root() {
                        *open = false;
                        break;
                    }
                    origin.entry(cell).or_insert((Kind::Tail, Some(i), Some(p), false));
                    if side > 0 {
                        right_end += 1;
                    } else {
                        left_start -= 1;
                    }
                    placed += 1;
                }
                if !*open && placed > 0 {
                    let last = Cell { level, index: if side > 0 { right_end - 1 } else { left_start } };
                    if let Some(e) = origin.get_mut(&last) {
                        if e.0 == Kind::Tail {
                            e.0 = Kind::Clipped;
                        }
                    }
                }
            }
        }
    }
    let cells: HashSet<Cell> = origin.keys().copied().collect();
    let mut members: Vec<Member> = origin
        .into_iter()
        .filter(|(cell, _)| {
            let mut anc = cell.parent();
            while let Some(a) = anc {
                if cells.contains(&a) {
                    return false;
                }
                anc = a.parent();
            }
            true
        })
        .map(|(cell, (kind, parent, p, promoted))| Member {
            interval: cell.interval(&root),
            cell,
            kind,
            parent,
            p,
            promoted,
        })
        .collect();
    members.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));
    IntervalSystem { root, max_depth: am.max_depth, members }
}

/// Whether `b` is in the neighbourhood of `a`: length within a factor 2 and
/// `d(a, b) < 2 l(a)`. The closed condition `<=` also admits the intervals
/// that start exactly `2 l(a)` away, which in a dyadic system happens
/// generically and pushes the count to 11.
pub fn is_neighbour(a: &Interval, b: &Interval) -> bool {
    let ratio = a.len() / b.len();
    a.distance(b) < 2.0 * a.len() && (0.5..=2.0).contains(&ratio)
}

fn is_neighbour_closed(a: &Interval, b: &Interval) -> bool {
    let ratio = a.len() / b.len();
    a.distance(b) <= 2.0 * a.len() && (0.5..=2.0).contains(&ratio)
}

/// Neighbourhood of `a`, including `a` itself.
pub fn neighbours(tau: &IntervalSystem, a: usize) -> Vec<usize> {
    let ia = tau.members[a].interval;
    tau.members
        .iter()
        .enumerate()
        .filter(|(_, m)| is_neighbour(&ia, &m.interval))
        .map(|(j, _)| j)
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub distance: f64,
    pub required: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub members: usize,
    pub max_neighbours: usize,
    pub neighbours_ok: bool,
    /// The same count with `d(a, b) <= 2 l(a)`.
    pub max_neighbours_closed: usize,
    /// Pairs with `l(b) <= 2 l(a)` violating `d(2a, 2b) >= l(a)/2`.
    pub near_violations: usize,
    /// Pairs with `l(b) = 2^k l(a)`, `k >= 2`, violating `d(2a, 2b) >= 2·3^{k-2} l(a)`.
    pub far_violations: usize,
    pub worst_near: Option<Witness>,
    pub worst_far: Option<Witness>,
    pub multiplicity: usize,
    pub multiplicity_ok: bool,
}

impl SeparationReport {
    pub fn all_ok(&self) -> bool {
        self.neighbours_ok && self.near_violations == 0 && self.far_violations == 0 && self.multiplicity_ok
    }
}

/// Largest number of open intervals sharing a point.
pub fn max_multiplicity(intervals: &[Interval]) -> usize {
    let mut events: Vec<(f64, i32)> = intervals.iter().flat_map(|i| [(i.lo, 1), (i.hi, -1)]).collect();
    // closings before openings at equal coordinates: touching is not overlap
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cur = 0i32;
    let mut best = 0i32;
    for (_, d) in events {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}

/// Checks the neighbourhood bound, both separation inequalities for every
/// non-neighbour pair, and the multiplicity of the doubled intervals.
pub fn system_report(tau: &IntervalSystem) -> SeparationReport {
    let n = tau.members.len();
    let ivs = tau.intervals();
    // members grouped by length, each group sorted by left end
    let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, m) in tau.members.iter().enumerate() {
        groups.entry(m.cell.level).or_default().push(i);
    }
    let mut groups: Vec<(f64, Vec<usize>, Vec<f64>)> = groups
        .into_values()
        .map(|mut g| {
            g.sort_by(|&a, &b| ivs[a].lo.total_cmp(&ivs[b].lo));
            let los = g.iter().map(|&i| ivs[i].lo).collect();
            (ivs[g[0]].len(), g, los)
        })
        .collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut max_nb = 0;
    let mut max_nb_closed = 0;
    let mut near_v = 0;
    let mut far_v = 0;
    let mut worst_near: Option<(f64, Witness)> = None;
    let mut worst_far: Option<(f64, Witness)> = None;
    for a in 0..n {
        let ia = ivs[a];
        let la = ia.len();
        let da = ia.dilate(2.0);
        let mut nb = 0;
        let mut nb_closed = 0;
        for (lb, members, los) in &groups {
            let lb = *lb;
            let k = (lb / la).log2().round() as i32;
            let req = if lb <= 2.0 * la { 0.5 * la } else { 2.0 * 3f64.powi(k - 2) * la };
            // gap between a and b below which either check can fire
            let reach = (req + 0.5 * (la + lb)).max(2.0 * la);
            let start = los.partition_point(|&lo| lo < ia.lo - reach - lb);
            for &b in &members[start..] {
                let ib = ivs[b];
                if ib.lo > ia.hi + reach {
                    break;
                }
                if is_neighbour_closed(&ia, &ib) {
                    nb_closed += 1;
                }
                if is_neighbour(&ia, &ib) {
                    nb += 1;
                    continue;
                }
                let d = da.distance(&ib.dilate(2.0));
                if d >= req {
                    continue;
                }
                let w = Witness { a: [ia.lo, ia.hi], b: [ib.lo, ib.hi], distance: d, required: req };
                let deficit = (req - d) / la;
                if lb <= 2.0 * la {
                    near_v += 1;
                    if worst_near.as_ref().map_or(true, |x| deficit > x.0) {
                        worst_near = Some((deficit, w));
                    }
                } else {
                    far_v += 1;
                    if worst_far.as_ref().map_or(true, |x| deficit > x.0) {
                        worst_far = Some((deficit, w));
                    }
                }
            }
        }
        max_nb = max_nb.max(nb);
        max_nb_closed = max_nb_closed.max(nb_closed);
    }
    let doubled: Vec<Interval> = ivs.iter().map(|i| i.dilate(2.0)).collect();
    let multiplicity = max_multiplicity(&doubled);
    SeparationReport {
        members: n,
        max_neighbours: max_nb,
        neighbours_ok: max_nb <= 9,
        max_neighbours_closed: max_nb_closed,
        near_violations: near_v,
        far_violations: far_v,
        worst_near: worst_near.map(|w| w.1),
        worst_far: worst_far.map(|w| w.1),
        multiplicity,
        multiplicity_ok: multiplicity <= 9,
    }
}

/// Members of a system violating `sup_a f <= l(a)`, up to the relative
/// rounding slack `1e-12` that the input checks also allow.
pub fn ceiling_violations(f: &PiecewiseFn, tau: &IntervalSystem) -> Vec<usize> {
    tau.members
        .iter()
        .enumerate()
        .filter(|(_, m)| f.sup_norm(&m.interval) > m.interval.len() * (1.0 + 1e-12))
        .map(|(i, _)| i)
        .collect()
}

/// True when `f` vanishes on every part of the root not covered by the system.
pub fn covers_positivity(f: &PiecewiseFn, tau: &IntervalSystem) -> bool {
    let mut ivs = tau.intervals();
    ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut cursor = tau.root.lo;
    for iv in &ivs {
        if let Some(gap) = Interval::try_new(cursor, iv.lo) {
            if f.sup_norm(&gap) > 0.0 {
                return false;
            }
        }
        cursor = cursor.max(iv.hi);
    }
    Interval::try_new(cursor, tau.root.hi).map_or(true, |gap| f.sup_norm(&gap) == 0.0)
}
