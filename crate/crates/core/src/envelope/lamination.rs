use super::grid::GridFn;
use super::hull::lower_hull_unit;
use crate::error::{invalid, Error, Result};
use crate::integrand::Integrand;
use crate::matspace::{Mat, MatBox, RankOneDir};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Cap on node updates (points x directions x sweeps) per envelope run.
pub const WORK_BUDGET: u64 = 50_000_000_000;

/// Maximal grid chains of one direction, as flat start index plus length.
pub(crate) struct Chains {
    pub delta: isize,
    pub starts: Vec<usize>,
    pub lens: Vec<usize>,
}

fn chain_len(bx: &MatBox, off: &[i64], mi: &[usize]) -> usize {
    let mut len = usize::MAX;
    for (e, &o) in off.iter().enumerate() {
        if o == 0 {
            continue;
        }
        let r = bx.resolution[e] as i64;
        let i = mi[e] as i64;
        let l = if o > 0 { (r - 1 - i) / o + 1 } else { i / (-o) + 1 };
        len = len.min(l as usize);
    }
    len
}

fn is_start(bx: &MatBox, off: &[i64], mi: &[usize]) -> bool {
    off.iter().enumerate().any(|(e, &o)| {
        let j = mi[e] as i64 - o;
        j < 0 || j >= bx.resolution[e] as i64
    })
}

impl Chains {
    pub fn build(bx: &MatBox, dir: &RankOneDir) -> Result<Chains> {
        if !bx.supports(dir) {
            return Err(invalid(format!("direction {:?} x {:?} is not grid-aligned on this box", dir.a_int, dir.b_int)));
        }
        let off = dir.lattice_offsets();
        let strides = bx.strides();
        let delta: isize = off.iter().zip(&strides).map(|(o, s)| *o as isize * *s as isize).sum();
        let (starts, lens): (Vec<usize>, Vec<usize>) = (0..bx.point_count())
            .into_par_iter()
            .filter_map(|idx| {
                let mi = bx.multi_index(idx);
                if !is_start(bx, &off, &mi) {
                    return None;
                }
                let len = chain_len(bx, &off, &mi);
                (len >= 3).then_some((idx, len))
            })
            .unzip();
        Ok(Chains { delta, starts, lens })
    }

    fn node(&self, c: usize, k: usize) -> usize {
        (self.starts[c] as isize + k as isize * self.delta) as usize
    }
}

pub(crate) fn build_all(bx: &MatBox, dirs: &[RankOneDir]) -> Result<Vec<Chains>> {
    if dirs.is_empty() {
        return Err(invalid("empty direction set"));
    }
    dirs.iter().map(|d| Chains::build(bx, d)).collect()
}

/// Hull of every chain of `ch`, as (flat index, hull value) lists.
fn chain_hulls(ch: &Chains, v: &[f64]) -> Vec<Vec<f64>> {
    (0..ch.starts.len())
        .into_par_iter()
        .map_init(Vec::new, |scratch, c| {
            let mut vals: Vec<f64> = (0..ch.lens[c]).map(|k| v[ch.node(c, k)]).collect();
            lower_hull_unit(&mut vals, scratch);
            vals
        })
        .collect()
}

pub(crate) fn step_raw(all: &[Chains], v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for ch in all {
        let hulls = chain_hulls(ch, v);
        for (c, h) in hulls.iter().enumerate() {
            for (k, x) in h.iter().enumerate() {
                let i = ch.node(c, k);
                if *x < out[i] {
                    out[i] = *x;
                }
            }
        }
    }
    out
}

/// One lamination sweep: the 1D lower hull along every grid chain of every
/// direction, then the pointwise minimum over directions and the input.
pub fn lamination_step(f: &GridFn, dirs: &[RankOneDir]) -> Result<GridFn> {
    let chains = build_all(f.grid(), dirs)?;
    Ok(GridFn::from_raw(f.grid().clone(), step_raw(&chains, &f.raw())))
}

/// Sup-norm change between sweeps over finite points; a point turning
/// finite counts as its new value plus one.
pub(crate) fn sweep_change(old: &[f64], new: &[f64]) -> f64 {
    old.par_iter()
        .zip(new.par_iter())
        .map(|(a, b)| {
            if a.is_finite() {
                a - b
            } else if b.is_finite() {
                b + 1.0
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Sup-norm change of each sweep.
    pub changes: Vec<f64>,
    pub converged: bool,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.changes.len()
    }

    pub fn last_change(&self) -> Option<f64> {
        self.changes.last().copied()
    }
}

/// Iterates [`lamination_step`] from `f0` until a sweep changes less than
/// `tol`. Returns the grid that the final sweep left (almost) unchanged,
/// so it is a fixed point of one more sweep to within `tol`.
pub fn rank_one_envelope_from(f0: GridFn, dirs: &[RankOneDir], tol: f64, max_iter: usize) -> Result<(GridFn, Trace)> {
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let bx = f0.grid().clone();
    let chains = build_all(&bx, dirs)?;
    let mut cur = f0.raw();
    let mut trace = Trace::default();
    let per_sweep = bx.point_count() as u64 * dirs.len() as u64;
    for it in 0..max_iter {
        if per_sweep.saturating_mul(it as u64 + 1) > WORK_BUDGET {
            return Err(Error::Budget(format!("lamination work exceeds {WORK_BUDGET} node updates; sweep changes so far {:?}", trace.changes)));
        }
        let next = step_raw(&chains, &cur);
        let change = sweep_change(&cur, &next);
        trace.changes.push(change);
        if change < tol {
            trace.converged = true;
            break;
        }
        cur = next;
    }
    Ok((GridFn::from_raw(bx, cur), trace))
}

/// Samples `w` on `bx` and runs [`rank_one_envelope_from`]. The result is
/// an upper bound for the rank-one convex envelope (chains never leave the
/// box, which can only raise the infimum).
pub fn rank_one_envelope<W: Integrand + ?Sized>(
    w: &W,
    bx: &MatBox,
    dirs: &[RankOneDir],
    tol: f64,
    max_iter: usize,
) -> Result<(GridFn, Trace)> {
    rank_one_envelope_from(GridFn::sample(w, bx)?, dirs, tol, max_iter)
}

/// A point where the value exceeds a chord of its own chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Mat,
    pub minus: Mat,
    pub plus: Mat,
    /// Weight of `minus` in the chord.
    pub lambda: f64,
    pub value: f64,
    pub chord: f64,
}

fn hull_vertices(vals: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for i in 0..vals.len() {
        if !vals[i].is_finite() {
            continue;
        }
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (b - a) as f64 * (vals[i] - vals[a]) - (vals[b] - vals[a]) * (i - a) as f64;
            if cross <= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// Every finite chain node lying more than `tol` above the lower hull of
/// its chain, with the supporting chord as witness.
pub fn check_rank_one_convexity(f: &GridFn, dirs: &[RankOneDir], tol: f64) -> Result<Vec<Violation>> {
    let bx = f.grid();
    let chains = build_all(bx, dirs)?;
    let v = f.raw();
    let mut out = Vec::new();
    for ch in &chains {
        let found: Vec<Vec<Violation>> = (0..ch.starts.len())
            .into_par_iter()
            .map(|c| {
                let vals: Vec<f64> = (0..ch.lens[c]).map(|k| v[ch.node(c, k)]).collect();
                let h = hull_vertices(&vals);
                let mut res = Vec::new();
                for w in h.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    for j in a + 1..b {
                        if !vals[j].is_finite() {
                            continue;
                        }
                        let lambda = (b - j) as f64 / (b - a) as f64;
                        let chord = lambda * vals[a] + (1.0 - lambda) * vals[b];
                        if vals[j] > chord + tol {
                            res.push(Violation {
                                point: bx.point(ch.node(c, j)),
                                minus: bx.point(ch.node(c, a)),
                                plus: bx.point(ch.node(c, b)),
                                lambda,
                                value: vals[j],
                                chord,
                            });
                        }
                    }
                }
                res
            })
            .collect();
        out.extend(found.into_iter().flatten());
    }
    Ok(out)
}

/// The cheapest chord through the grid node `f` over all directions, as a
/// two-point laminate of `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Laminate {
    pub direction: RankOneDir,
    pub minus: Mat,
    pub plus: Mat,
    /// Weight of `plus`: `f = (1 - t) minus + t plus`.
    pub t: f64,
    pub minus_value: f64,
    pub plus_value: f64,
    pub value: f64,
}

pub fn laminate_at(g: &GridFn, dirs: &[RankOneDir], f: &Mat) -> Option<Laminate> {
    let bx = g.grid();
    let idx = bx.locate(f)?;
    let mi = bx.multi_index(idx);
    let strides = bx.strides();
    let v = g.values();
    let mut best: Option<Laminate> = None;
    for d in dirs.iter().filter(|d| bx.supports(d)) {
        let off = d.lattice_offsets();
        // Walk back to the chain start.
        let mut start = mi.clone();
        let mut pos = 0usize;
        loop {
            if is_start(bx, &off, &start) {
                break;
            }
            for e in 0..start.len() {
                start[e] = (start[e] as i64 - off[e]) as usize;
            }
            pos += 1;
        }
        let len = chain_len(bx, &off, &start);
        let delta: isize = off.iter().zip(&strides).map(|(o, s)| *o as isize * *s as isize).sum();
        let s0: usize = start.iter().zip(&strides).map(|(i, s)| i * s).sum();
        let node = |k: usize| (s0 as isize + k as isize * delta) as usize;
        let vals: Vec<f64> = (0..len).map(|k| v[node(k)].value()).collect();
        let h = hull_vertices(&vals);
        for w in h.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a < pos && pos < b {
                let t = (pos - a) as f64 / (b - a) as f64;
                let value = (1.0 - t) * vals[a] + t * vals[b];
                if best.as_ref().is_none_or(|l| value < l.value) {
                    best = Some(Laminate {
                        direction: d.clone(),
                        minus: bx.point(node(a)),
                        plus: bx.point(node(b)),
                        t,
                        minus_value: vals[a],
                        plus_value: vals[b],
                        value,
                    });
                }
            }
        }
    }
    best
}
