use super::convex::convex_lower;
use super::grid::GridFn;
use super::lamination::{laminate_at, rank_one_envelope_from, Laminate};
use super::mesh::TestFieldMesh;
use super::zest::{z_estimate, z_search};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::integrand::{Integrand, PredicateReport, Verdict};
use crate::matspace::{directions_for_box, frob_sq, Mat, MatBox, RankOneDir};
use serde::{Deserialize, Serialize};

/// Discretization parameters shared by the bracketing routines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub grid: MatBox,
    /// Number of rank-one directions (canonical ones first).
    pub directions: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Subdivisions of the unit cell for the one-cell estimate.
    pub mesh_k: usize,
    pub restarts: usize,
    /// Coordinate-descent sweeps per start.
    pub iters: usize,
}

pub const DEFAULT_HALF_WIDTH: f64 = 2.0;
pub const DEFAULT_RESOLUTION_2X2: usize = 17;
pub const DEFAULT_DIRECTIONS: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_MESH_K: usize = 16;
pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_ITERS: usize = 2000;

impl EnvelopeParams {
    /// Defaults around `center`: half-width 2 on every entry; resolution 17
    /// when there are at most four entries, otherwise the largest odd
    /// resolution keeping the grid under two million points.
    pub fn around(center: Mat) -> Result<EnvelopeParams> {
        let e = center.as_slice().len();
        let res = if e <= 4 {
            DEFAULT_RESOLUTION_2X2
        } else {
            let mut r = 3usize;
            while (r + 2).checked_pow(e as u32).is_some_and(|c| c <= 2_000_000) {
                r += 2;
            }
            r
        };
        Ok(EnvelopeParams {
            grid: MatBox::uniform(center, DEFAULT_HALF_WIDTH, res)?,
            directions: DEFAULT_DIRECTIONS,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            mesh_k: DEFAULT_MESH_K,
            restarts: DEFAULT_RESTARTS,
            iters: DEFAULT_ITERS,
        })
    }
}

/// Pointwise bracket `lower <= QW(F) <= upper` with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub query: Mat,
    pub w_value: ExtReal,
    pub upper: ExtReal,
    pub lower: ExtReal,
    pub lamination: ExtReal,
    pub z: ExtReal,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: Option<f64>,
    pub sweep_changes: Vec<f64>,
    pub direction_count: usize,
    pub mesh_k: usize,
    pub restarts: usize,
    pub grid: MatBox,
    /// Cheapest two-point laminate through the query on the final grid.
    pub laminate: Option<Laminate>,
}

impl EnvelopeReport {
    pub fn width(&self) -> ExtReal {
        if self.upper.is_infinite() {
            ExtReal::INFINITY
        } else {
            ExtReal::saturating((self.upper.value() - self.lower.value()).max(0.0))
        }
    }
}

/// Lamination and convexification computed once on a grid, queried at
/// many grid nodes.
pub struct Bracketer<'a, W: ?Sized> {
    w: &'a W,
    params: EnvelopeParams,
    dirs: Vec<RankOneDir>,
    sampled: GridFn,
    envelope: GridFn,
    lower: GridFn,
    trace: super::lamination::Trace,
    mesh: TestFieldMesh,
}

impl<'a, W: Integrand + ?Sized> Bracketer<'a, W> {
    pub fn new(w: &'a W, params: EnvelopeParams) -> Result<Bracketer<'a, W>> {
        let dirs = directions_for_box(&params.grid, params.directions)?;
        let mesh = TestFieldMesh::new(w.dims().1, params.mesh_k)?;
        let sampled = GridFn::sample(w, &params.grid)?;
        let (envelope, trace) = rank_one_envelope_from(sampled.clone(), &dirs, params.tol, params.max_iter)?;
        let lower = convex_lower(&sampled);
        Ok(Bracketer { w, params, dirs, sampled, envelope, lower, trace, mesh })
    }

    pub fn directions(&self) -> &[RankOneDir] {
        &self.dirs
    }

    pub fn sampled(&self) -> &GridFn {
        &self.sampled
    }

    pub fn envelope(&self) -> &GridFn {
        &self.envelope
    }

    pub fn lower(&self) -> &GridFn {
        &self.lower
    }

    pub fn trace(&self) -> &super::lamination::Trace {
        &self.trace
    }

    pub fn params(&self) -> &EnvelopeParams {
        &self.params
    }

    /// Bracket at a grid node of the parameter box.
    pub fn bracket(&self, f: &Mat) -> Result<EnvelopeReport> {
        let idx = self.params.grid.locate(f).ok_or_else(|| invalid(format!("{f:?} is not a node of the envelope grid")))?;
        let w_value = self.w.eval(f)?;
        let lamination = self.envelope.values()[idx];
        let z = z_search(self.w, f, &self.mesh, self.params.restarts, self.params.iters, None)?.value;
        let upper = lamination.min(z).min(w_value);
        let lower = self.lower.values()[idx];
        if upper.is_finite() && lower.value() > upper.value() + 1e-9 * (1.0 + upper.value()) {
            return Err(Error::Internal(format!("lower bound {lower} exceeds upper bound {upper} at {f:?}")));
        }
        Ok(EnvelopeReport {
            query: f.clone(),
            w_value,
            upper,
            lower,
            lamination,
            z,
            iterations: self.trace.iterations(),
            converged: self.trace.converged,
            last_change: self.trace.last_change(),
            sweep_changes: self.trace.changes.clone(),
            direction_count: self.dirs.len(),
            mesh_k: self.params.mesh_k,
            restarts: self.params.restarts,
            grid: self.params.grid.clone(),
            laminate: laminate_at(&self.envelope, &self.dirs, f),
        })
    }
}

/// Brackets `QW(F)`: upper = min(lamination, one-cell estimate), lower =
/// box-restricted convexification. A query inside the box but off the grid
/// re-centers the grid on it.
pub fn qw_bracket<W: Integrand + ?Sized>(w: &W, f: &Mat, params: &EnvelopeParams) -> Result<EnvelopeReport> {
    if !params.grid.contains(f) {
        return Err(invalid(format!("query {f:?} lies outside the envelope box")));
    }
    let mut p = params.clone();
    if p.grid.locate(f).is_none() {
        p.grid = MatBox::new(f.clone(), p.grid.half_widths.clone(), p.grid.resolution.clone())?;
    }
    Bracketer::new(w, p)?.bracket(f)
}

/// Parameters of the one-cell estimate alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZParams {
    pub mesh_k: usize,
    pub restarts: usize,
    pub iters: usize,
}

/// Fits the smallest `c` with `Z_inf W(F) <= c (1 + |F|^p)` at the query
/// points. An infinite estimate is inconclusive, never a failure: the
/// estimator is only an upper bound.
pub fn p_ample_probe<W: Integrand + ?Sized>(
    w: &W,
    p: f64,
    bx: &MatBox,
    queries: &[Mat],
    zp: ZParams,
) -> Result<PredicateReport> {
    let mesh = TestFieldMesh::new(w.dims().1, zp.mesh_k)?;
    let mut rep = PredicateReport::new("p-ample", bx);
    rep.samples = queries.len();
    rep.considered = queries.len();
    let mut c = 0.0f64;
    for f in queries {
        if !bx.contains(f) {
            return Err(invalid(format!("query {f:?} lies outside the probe box")));
        }
        let z = z_estimate(w, f, &mesh, zp.restarts, zp.iters)?;
        if z.is_infinite() {
            if rep.verdict == Verdict::HoldsOnSample {
                rep.verdict = Verdict::InconclusiveInfinite;
                rep.witness = Some(f.clone());
                rep.witness_value = Some(z);
            }
            continue;
        }
        c = c.max(z.value() / (1.0 + frob_sq(f).powf(p / 2.0)));
    }
    rep.upper_constant("c", c);
    Ok(rep)
}
