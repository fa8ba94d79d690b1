//! Fiber reduction `W0(xi) = inf_zeta W(xi | zeta)` from 3x3 to 3x2, the
//! membrane density `QW0`, and a two-path check of `Q[QW]_0 = QW0`.

use crate::envelope::{
    convex_lower, qw_bracket, rank_one_envelope_from, Bracketer, EnvelopeParams, EnvelopeReport, GridFn,
};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::integrand::{check_growth_d, ConstraintClass, Integrand, PredicateReport};
use crate::matspace::{directions_for_box, frob, Mat, MatBox};
use parking_lot::RwLock;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

/// Memo keys round every entry of `xi` to this resolution.
pub const QUANTUM: f64 = 1e-9;

/// Search region for the third column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSearch {
    pub center: [f64; 3],
    /// Half-width of the first grid; `None` means `4 (1 + |xi|)`.
    pub half_width: Option<f64>,
    /// Refinements after the first grid, each shrinking by `4`.
    pub levels: usize,
    /// Grid points per axis (odd).
    pub points: usize,
    /// Best cells of the first grid refined independently.
    pub candidates: usize,
}

impl Default for FiberSearch {
    fn default() -> FiberSearch {
        FiberSearch { center: [0.0; 3], half_width: None, levels: 3, points: 9, candidates: 4 }
    }
}

fn quantize(xi: &Mat) -> (Mat, [i64; 6]) {
    let mut key = [0i64; 6];
    let mut q = xi.clone();
    for (k, v) in q.as_mut_slice().iter_mut().enumerate() {
        let n = (*v / QUANTUM).round();
        key[k] = n as i64;
        *v = n * QUANTUM;
    }
    (q, key)
}

fn fiber_value<W: Integrand + ?Sized>(w: &W, xi: &Mat, z: &[f64; 3], buf: &mut Mat) -> Result<f64> {
    for i in 0..3 {
        buf.set(i, 0, xi.get(i, 0));
        buf.set(i, 1, xi.get(i, 1));
        buf.set(i, 2, z[i]);
    }
    Ok(w.value(buf)?.value())
}

/// Minimizes `W(xi | zeta)` over `zeta`: a first grid, then nested grids
/// and coordinate descent from each of its best few cells. Returns the
/// best value and its `zeta` (`None` when every probe was infinite).
pub fn reduce_w0_argmin<W: Integrand + ?Sized>(w: &W, xi: &Mat, search: &FiberSearch) -> Result<(ExtReal, Option<[f64; 3]>)> {
    if w.dims() != (3, 3) {
        return Err(invalid("fiber reduction needs a 3x3 integrand"));
    }
    if xi.dims() != (3, 2) {
        return Err(Error::Shape { expected: "3x2".into(), got: format!("{}x{}", xi.rows(), xi.cols()) });
    }
    if search.points < 3 || search.points.is_multiple_of(2) {
        return Err(invalid("fiber search needs an odd number of points >= 3"));
    }
    let mut buf = Mat::zeros(3, 3);
    let hw0 = search.half_width.unwrap_or(4.0 * (1.0 + frob(xi)));
    let first = grid_scan(w, xi, search.center, hw0, search.points, &mut buf)?;
    if first.is_empty() {
        return Ok((ExtReal::INFINITY, None));
    }
    let mut best: Option<(f64, [f64; 3])> = None;
    for &(_, z0) in first.iter().take(search.candidates.max(1)) {
        let (v, z) = refine(w, xi, z0, hw0 / 4.0, search, &mut buf)?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, z));
        }
    }
    let (val, z) = best.expect("at least one candidate");
    Ok((ExtReal::saturating(val), Some(z)))
}

/// Finite grid values around `center`, best first (ties by grid order).
fn grid_scan<W: Integrand + ?Sized>(
    w: &W,
    xi: &Mat,
    center: [f64; 3],
    hw: f64,
    n: usize,
    buf: &mut Mat,
) -> Result<Vec<(f64, [f64; 3])>> {
    let half = (n / 2) as f64;
    let h = hw / half;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let z = [
                    center[0] + (i as f64 - half) * h,
                    center[1] + (j as f64 - half) * h,
                    center[2] + (k as f64 - half) * h,
                ];
                let v = fiber_value(w, xi, &z, buf)?;
                if v.is_finite() {
                    out.push((v, z));
                }
            }
        }
    }
    // Stable sort keeps grid order among ties.
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Nested grids shrinking by 4 around `z0`, then coordinate descent.
fn refine<W: Integrand + ?Sized>(
    w: &W,
    xi: &Mat,
    z0: [f64; 3],
    mut hw: f64,
    search: &FiberSearch,
    buf: &mut Mat,
) -> Result<(f64, [f64; 3])> {
    let mut val = fiber_value(w, xi, &z0, buf)?;
    let mut z = z0;
    for _ in 0..search.levels {
        if let Some(&(v, t)) = grid_scan(w, xi, z, hw, search.points, buf)?.first() {
            if v < val {
                val = v;
                z = t;
            }
        }
        hw /= 4.0;
    }
    let mut step = hw;
    let floor = 1e-12 * (1.0 + hw);
    while step > floor {
        let mut moved = false;
        for c in 0..3 {
            for sign in [1.0, -1.0] {
                let mut t = z;
                t[c] += sign * step;
                let v = fiber_value(w, xi, &t, buf)?;
                if v < val {
                    val = v;
                    z = t;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((val, z))
}

/// `W0(xi)` after quantizing `xi` to the memo resolution.
pub fn reduce_w0<W: Integrand + ?Sized>(w: &W, xi: &Mat, search: &FiberSearch) -> Result<ExtReal> {
    let (q, _) = quantize(xi);
    Ok(reduce_w0_argmin(w, &q, search)?.0)
}

/// A 3x3 integrand seen through its fiber reduction, as a 3x2 integrand.
/// Values are memoized per quantized `xi`; concurrent use is safe and never
/// changes results, since every value is computed from the quantized key.
pub struct ReducedIntegrand<W> {
    source: W,
    search: FiberSearch,
    cache: RwLock<HashMap<[i64; 6], (ExtReal, Option<[f64; 3]>)>>,
    use_cache: bool,
}

impl<W: Integrand> ReducedIntegrand<W> {
    pub fn new(source: W, search: FiberSearch) -> Result<ReducedIntegrand<W>> {
        if source.dims() != (3, 3) {
            return Err(invalid("fiber reduction needs a 3x3 integrand"));
        }
        Ok(ReducedIntegrand { source, search, cache: RwLock::new(HashMap::new()), use_cache: true })
    }

    /// Disables memoization (for transparency tests).
    pub fn uncached(mut self) -> ReducedIntegrand<W> {
        self.use_cache = false;
        self
    }

    pub fn source(&self) -> &W {
        &self.source
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().len()
    }

    /// Value and optimal third column at `xi`.
    pub fn value_argmin(&self, xi: &Mat) -> Result<(ExtReal, Option<[f64; 3]>)> {
        let (q, key) = quantize(xi);
        if self.use_cache {
            if let Some(hit) = self.cache.read().get(&key) {
                return Ok(*hit);
            }
        }
        let r = reduce_w0_argmin(&self.source, &q, &self.search)?;
        if self.use_cache {
            self.cache.write().insert(key, r);
        }
        Ok(r)
    }
}

impl<W: Integrand> Integrand for ReducedIntegrand<W> {
    fn dims(&self) -> (usize, usize) {
        (3, 2)
    }

    fn p(&self) -> f64 {
        self.source.p()
    }

    fn value(&self, f: &Mat) -> Result<ExtReal> {
        Ok(self.value_argmin(f)?.0)
    }

    fn class_hint(&self) -> Option<ConstraintClass> {
        match self.source.class_hint() {
            Some(ConstraintClass::StrongDc) => Some(ConstraintClass::Cpc),
            Some(ConstraintClass::Finite) => Some(ConstraintClass::Finite),
            _ => None,
        }
    }
}

/// Default envelope parameters for 3x2 membrane queries: every entry free
/// with resolution 5 and half-width 1.
pub fn membrane_params(xi: &Mat) -> Result<EnvelopeParams> {
    let mut p = EnvelopeParams::around(xi.clone())?;
    p.grid = MatBox::uniform(xi.clone(), 1.0, 5)?;
    p.mesh_k = 4;
    p.restarts = 4;
    p.iters = 200;
    Ok(p)
}

/// Bracket of the membrane density `QW0(xi)`.
pub fn membrane_energy<W: Integrand>(w: W, xi: &Mat, params: &EnvelopeParams, search: &FiberSearch) -> Result<EnvelopeReport> {
    let red = ReducedIntegrand::new(w, search.clone())?;
    qw_bracket(&red, xi, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommuteParams {
    /// Threshold of the growth check run before anything else.
    pub alpha: f64,
    pub samples: usize,
    /// Free entries of `xi` (row-major in 3x2) on the in-plane slice.
    pub xi_free: Vec<usize>,
    pub xi_half_width: f64,
    pub xi_resolution: usize,
    pub zeta_half_width: f64,
    pub zeta_resolution: usize,
    pub directions: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mesh_k: usize,
    pub restarts: usize,
    pub iters: usize,
    pub search: FiberSearch,
}

impl Default for CommuteParams {
    fn default() -> CommuteParams {
        CommuteParams {
            alpha: 0.5,
            samples: 400,
            xi_free: vec![0, 3],
            xi_half_width: 1.0,
            xi_resolution: 9,
            zeta_half_width: 1.0,
            zeta_resolution: 9,
            directions: 12,
            tol: 1e-6,
            max_iter: 500,
            mesh_k: 4,
            restarts: 2,
            iters: 100,
            search: FiberSearch::default(),
        }
    }
}

/// Five fixed 3x2 query points used by default.
pub fn default_commute_points() -> Vec<Mat> {
    vec![
        Mat::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]),
        Mat::from_rows(&[&[1.5, 0.0], &[0.0, 0.5], &[0.0, 0.0]]),
        Mat::from_rows(&[&[1.0, 0.5], &[0.0, 1.0], &[0.0, 0.0]]),
        Mat::from_rows(&[&[0.5, 0.0], &[0.0, 1.0], &[0.5, 0.0]]),
        Mat::from_rows(&[&[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.5]]),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutePoint {
    pub query: Mat,
    /// Reduce, then relax.
    pub path_a: ExtReal,
    /// Relax on a 3x3 slice, reduce over the slice, relax again.
    pub path_b: ExtReal,
    pub discrepancy: ExtReal,
    pub relative: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommuteReport {
    pub growth_check: PredicateReport,
    pub points: Vec<CommutePoint>,
    pub max_discrepancy: ExtReal,
    pub max_relative: ExtReal,
}

fn gap(a: ExtReal, b: ExtReal) -> (ExtReal, ExtReal) {
    match (a.is_finite(), b.is_finite()) {
        (false, false) => (ExtReal::ZERO, ExtReal::ZERO),
        (true, true) => {
            let d = (a.value() - b.value()).abs();
            let s = a.value().abs().max(b.value().abs());
            (ExtReal::saturating(d), ExtReal::saturating(if s > 0.0 { d / s } else { 0.0 }))
        }
        _ => (ExtReal::INFINITY, ExtReal::INFINITY),
    }
}

/// Compares the upper bounds of both orders of relaxation and reduction.
/// Agreement is evidence for the identity on the tested slices, not proof.
pub fn commute_check<W: Integrand + Clone>(w: W, queries: &[Mat], params: &CommuteParams) -> Result<CommuteReport> {
    if w.dims() != (3, 3) {
        return Err(invalid("commute_check needs a 3x3 integrand"));
    }
    let d_box = MatBox::uniform(Mat::zeros(3, 3), 2.0, 3)?;
    let growth = check_growth_d(&w, params.alpha, w.p(), &d_box, params.samples)?;
    if !growth.holds() {
        return Err(Error::Precondition {
            msg: format!("growth condition with alpha = {} fails on the sample", params.alpha),
            witness: growth.witness.clone(),
        });
    }
    let red = Arc::new(ReducedIntegrand::new(w.clone(), params.search.clone())?);
    let mut points = Vec::new();
    for xi in queries {
        if xi.dims() != (3, 2) {
            return Err(invalid("commute queries must be 3x2"));
        }
        // Path A: reduce, then relax on the in-plane slice.
        let slice = MatBox::slice(xi.clone(), &params.xi_free, params.xi_half_width, params.xi_resolution)?;
        let env = EnvelopeParams {
            grid: slice.clone(),
            directions: params.directions,
            tol: params.tol,
            max_iter: params.max_iter,
            mesh_k: params.mesh_k,
            restarts: params.restarts,
            iters: params.iters,
        };
        let path_a = Bracketer::new(&*red, env)?.bracket(xi)?.upper;

        // Path B: relax W on (slice | zeta box), reduce over the zeta nodes,
        // relax the reduced grid on the same slice.
        let (_, zstar) = red.value_argmin(xi)?;
        let zc = zstar.unwrap_or([0.0; 3]);
        let center = xi.append_column(&zc);
        let mut free: Vec<usize> = params.xi_free.iter().map(|e| (e / 2) * 3 + e % 2).collect();
        free.extend([2, 5, 8]);
        let mut hw = vec![0.0; 9];
        let mut res = vec![1; 9];
        for &e in &free {
            let zeta = e % 3 == 2;
            hw[e] = if zeta { params.zeta_half_width } else { params.xi_half_width };
            res[e] = if zeta { params.zeta_resolution } else { params.xi_resolution };
        }
        let big = MatBox::new(center, hw, res)?;
        let dirs3 = directions_for_box(&big, params.directions)?;
        let (relaxed, _) = rank_one_envelope_from(GridFn::sample(&w, &big)?, &dirs3, params.tol, params.max_iter)?;
        let reduced: Vec<ExtReal> = (0..slice.point_count())
            .into_par_iter()
            .map(|i| {
                let p = slice.point(i);
                let mut best = ExtReal::INFINITY;
                let zs = params.zeta_resolution;
                for a in 0..zs {
                    for b in 0..zs {
                        for c in 0..zs {
                            let mut f = big.center.clone();
                            for r in 0..3 {
                                f.set(r, 0, p.get(r, 0));
                                f.set(r, 1, p.get(r, 1));
                            }
                            f.set(0, 2, big.coordinate(2, a));
                            f.set(1, 2, big.coordinate(5, b));
                            f.set(2, 2, big.coordinate(8, c));
                            if let Some(v) = relaxed.at(&f) {
                                best = best.min(v);
                            }
                        }
                    }
                }
                best
            })
            .collect();
        let g = GridFn::new(slice.clone(), reduced)?;
        let dirs2 = directions_for_box(&slice, params.directions)?;
        let (g2, _) = rank_one_envelope_from(g, &dirs2, params.tol, params.max_iter)?;
        let path_b = g2.at(xi).ok_or_else(|| Error::Internal("query missing from its own slice".into()))?;
        let (discrepancy, relative) = gap(path_a, path_b);
        points.push(CommutePoint { query: xi.clone(), path_a, path_b, discrepancy, relative });
    }
    let max_discrepancy = points.iter().map(|p| p.discrepancy).max().unwrap_or(ExtReal::ZERO);
    let max_relative = points.iter().map(|p| p.relative).max().unwrap_or(ExtReal::ZERO);
    Ok(CommuteReport { growth_check: growth, points, max_discrepancy, max_relative })
}

/// The convexified lower grid for a reduced integrand on `bx`, exposed for
/// reports that want the membrane lower bound on a whole slice.
pub fn membrane_lower<W: Integrand>(red: &ReducedIntegrand<W>, bx: &MatBox) -> Result<GridFn> {
    Ok(convex_lower(&GridFn::sample(red, bx)?))
}
