use super::mesh::TestFieldMesh;
use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::integrand::Integrand;
use crate::matspace::{frob, halton, Mat};
use rayon::prelude::*;
use std::cmp::Ordering;

/// Smallest coordinate step before a coordinate counts as converged.
pub const STEP_FLOOR: f64 = 1e-10;

/// Lexicographic objective: number of infinite simplices, then the finite
/// part of the energy. Lets the search walk out of `+inf` configurations.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Objective {
    inf: usize,
    sum: f64,
}

impl Objective {
    fn better_than(&self, o: &Objective) -> bool {
        self.inf < o.inf || (self.inf == o.inf && self.sum < o.sum - 1e-15 * o.sum.abs().max(1e-300))
    }

    fn cmp(&self, o: &Objective) -> Ordering {
        self.inf.cmp(&o.inf).then(self.sum.total_cmp(&o.sum))
    }

    fn value(&self) -> ExtReal {
        if self.inf > 0 {
            ExtReal::INFINITY
        } else {
            ExtReal::saturating(self.sum)
        }
    }
}

struct Energy<'a, W: ?Sized> {
    w: &'a W,
    f: &'a Mat,
    mesh: &'a TestFieldMesh,
    m: usize,
}

impl<W: Integrand + ?Sized> Energy<'_, W> {
    fn simplex(&self, u: &[f64], s: usize, buf: &mut Mat) -> Result<f64> {
        buf.as_mut_slice().copy_from_slice(self.f.as_slice());
        self.mesh.add_gradient(u, self.m, s, buf.as_mut_slice());
        Ok(self.w.value(buf)?.value() * self.mesh.volume())
    }

    fn all(&self, u: &[f64]) -> Result<(Vec<f64>, Objective)> {
        let mut buf = self.f.clone();
        let vals = (0..self.mesh.simplex_count()).map(|s| self.simplex(u, s, &mut buf)).collect::<Result<Vec<_>>>()?;
        let obj = objective(&vals);
        Ok((vals, obj))
    }

    /// Coordinate descent with per-coordinate adaptive steps: doubled on
    /// success, halved on failure, frozen below [`STEP_FLOOR`].
    fn descend(&self, mut u: Vec<f64>, iters: usize) -> Result<(Objective, Vec<f64>)> {
        let nodes = self.mesh.node_count();
        let (mut vals, mut obj) = self.all(&u)?;
        let s0 = 0.5 * self.mesh.h() * (1.0 + frob(self.f));
        let vars: Vec<(usize, usize)> =
            self.mesh.interior().iter().flat_map(|&n| (0..self.m).map(move |c| (n, c))).collect();
        let mut steps = vec![s0; vars.len()];
        let mut buf = self.f.clone();
        let mut trial = Vec::new();
        for _ in 0..iters {
            let mut active = false;
            for (vi, &(node, c)) in vars.iter().enumerate() {
                if steps[vi] < STEP_FLOOR {
                    continue;
                }
                active = true;
                let slot = c * nodes + node;
                let orig = u[slot];
                let touch = self.mesh.touching(node);
                let mut moved = false;
                for sign in [1.0, -1.0] {
                    u[slot] = orig + sign * steps[vi];
                    trial.clear();
                    let mut cand = obj;
                    for &s in touch {
                        let v = self.simplex(&u, s, &mut buf)?;
                        trial.push(v);
                        let old = vals[s];
                        if old.is_finite() {
                            cand.sum -= old;
                        } else {
                            cand.inf -= 1;
                        }
                        if v.is_finite() {
                            cand.sum += v;
                        } else {
                            cand.inf += 1;
                        }
                    }
                    if cand.better_than(&obj) {
                        for (&s, &v) in touch.iter().zip(&trial) {
                            vals[s] = v;
                        }
                        obj = cand;
                        moved = true;
                        break;
                    }
                }
                if moved {
                    steps[vi] = (steps[vi] * 2.0).min(8.0 * s0);
                } else {
                    u[slot] = orig;
                    steps[vi] *= 0.5;
                }
            }
            // Re-sum to shed accumulated rounding.
            obj = objective(&vals);
            if !active {
                break;
            }
        }
        Ok((obj, u))
    }
}

fn objective(vals: &[f64]) -> Objective {
    let mut o = Objective { inf: 0, sum: 0.0 };
    for v in vals {
        if v.is_finite() {
            o.sum += v;
        } else {
            o.inf += 1;
        }
    }
    o
}

/// Outcome of a one-cell search.
#[derive(Clone, Debug)]
pub struct ZResult {
    pub value: ExtReal,
    /// Best nodal field, component-major over all mesh nodes.
    pub field: Vec<f64>,
    /// Index of the winning start (0 is the zero field).
    pub start: usize,
}

/// Normals whose level lines are unions of Kuhn edges: the axes and the
/// differences `e_i - e_j`.
fn kuhn_normals(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        out.push(v);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0; n];
            v[i] = 1;
            v[j] = -1;
            out.push(v);
        }
    }
    out
}

/// Two-phase laminate profile: slope `1 - lambda` for `lambda P` steps,
/// then `-lambda`, period `P`, zero at `t = 0`.
fn sawtooth(t: i64, period: i64, rise: i64, h: f64) -> f64 {
    let lambda = rise as f64 / period as f64;
    let q = t.rem_euclid(period);
    if q <= rise {
        q as f64 * (1.0 - lambda) * h
    } else {
        rise as f64 * (1.0 - lambda) * h - (q - rise) as f64 * lambda * h
    }
}

const SEED_SCALES: [f64; 7] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];

/// Laminate fields `a phi(n.x)` with gradients `F + (1-lambda) a⊗n` and
/// `F - lambda a⊗n`, cut off by the zero boundary values.
fn laminate_seeds(mesh: &TestFieldMesh, m: usize) -> Vec<Vec<f64>> {
    let nodes = mesh.node_count();
    let mut out = Vec::new();
    for normal in kuhn_normals(mesh.dim()) {
        for period in [2i64, 4] {
            for rise in 1..period {
                if period == 4 && rise == 2 {
                    continue;
                }
                let profile: Vec<f64> = (0..nodes)
                    .map(|node| {
                        if !mesh.is_interior(node) {
                            return 0.0;
                        }
                        let idx = mesh.node_index(node);
                        let t: i64 = idx.iter().zip(&normal).map(|(i, n)| *i as i64 * n).sum();
                        sawtooth(t, period, rise, mesh.h())
                    })
                    .collect();
                for c in 0..m {
                    for s in SEED_SCALES {
                        for sign in [1.0, -1.0] {
                            let mut u = vec![0.0; m * nodes];
                            for (node, p) in profile.iter().enumerate() {
                                u[c * nodes + node] = sign * s * p;
                            }
                            out.push(u);
                        }
                    }
                }
            }
        }
    }
    out
}

fn perturbation(mesh: &TestFieldMesh, m: usize, f: &Mat, j: usize) -> Vec<f64> {
    let nodes = mesh.node_count();
    let amp = mesh.h() * (1.0 + frob(f)) * [0.5, 1.0, 2.0][j % 3];
    let mut u = vec![0.0; m * nodes];
    let nvars = mesh.interior().len() * m;
    let mut v = 0usize;
    for &node in mesh.interior() {
        for c in 0..m {
            let x = halton((j * nvars + v) as u64 + 1, j % 16);
            u[c * nodes + node] = amp * (2.0 * x - 1.0);
            v += 1;
        }
    }
    u
}

/// Minimizes the cell average of `W(F + grad u)` over piecewise-affine `u`
/// vanishing on the cell boundary. Starts: the zero field, an optional warm
/// start, the best laminate seeds, then low-discrepancy perturbations;
/// `restarts` counts all but the warm start.
pub fn z_search<W: Integrand + ?Sized>(
    w: &W,
    f: &Mat,
    mesh: &TestFieldMesh,
    restarts: usize,
    iters: usize,
    warm: Option<&[f64]>,
) -> Result<ZResult> {
    if restarts == 0 {
        return Err(invalid("restarts must be at least 1"));
    }
    let (m, n) = w.dims();
    if f.dims() != (m, n) || mesh.dim() != n {
        return Err(invalid("query matrix, integrand and mesh dimensions disagree"));
    }
    let direct = w.eval(f)?;
    let e = Energy { w, f, mesh, m };
    let nodes = mesh.node_count();
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; m * nodes]];
    if let Some(u) = warm {
        if u.len() != m * nodes {
            return Err(invalid("warm start has the wrong length"));
        }
        starts.push(u.to_vec());
    }
    if restarts > 1 && !mesh.interior().is_empty() {
        let n_seed = restarts / 2;
        let seeds = laminate_seeds(mesh, m);
        let scored = seeds
            .par_iter()
            .enumerate()
            .map(|(i, u)| e.all(u).map(|(_, o)| (o, i)))
            .collect::<Result<Vec<_>>>()?;
        let mut scored = scored;
        scored.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut seeds = seeds;
        for (_, i) in scored.into_iter().take(n_seed) {
            starts.push(std::mem::take(&mut seeds[i]));
        }
        let used = starts.len() - warm.is_some() as usize;
        for j in 0..restarts.saturating_sub(used) {
            starts.push(perturbation(mesh, m, f, j));
        }
    }
    let results = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, u)| e.descend(u, iters).map(|(o, u)| (o, i, u)))
        .collect::<Result<Vec<_>>>()?;
    let (obj, start, field) = results
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one start");
    let value = obj.value().min(direct);
    Ok(ZResult { value, field, start })
}

/// Upper bound for `ZW(F)` over the mesh class; never above `W(F)`.
pub fn z_estimate<W: Integrand + ?Sized>(w: &W, f: &Mat, mesh: &TestFieldMesh, restarts: usize, iters: usize) -> Result<ExtReal> {
    Ok(z_search(w, f, mesh, restarts, iters, None)?.value)
}

/// The same number as [`z_estimate`]: mesh fields are Lipschitz, so it also
/// bounds the `W^{1,inf}` one-cell envelope from above.
pub fn zinf_estimate<W: Integrand + ?Sized>(w: &W, f: &Mat, mesh: &TestFieldMesh, restarts: usize, iters: usize) -> Result<ExtReal> {
    z_estimate(w, f, mesh, restarts, iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::IntegrandSpec;

    #[test]
    fn convex_integrand_is_not_lowered() {
        let q = IntegrandSpec::quad(Mat::from_rows(&[&[0.3, -0.2], &[0.1, 0.5]]), 0.7).unwrap();
        let mesh = TestFieldMesh::new(2, 4).unwrap();
        for f in [Mat::identity(2), Mat::diag(&[-1.0, 0.4]), Mat::zeros(2, 2)] {
            let z = z_estimate(&q, &f, &mesh, 6, 200).unwrap();
            let w = q.eval(&f).unwrap();
            assert!(z <= w);
            assert!((z.value() - w.value()).abs() < 1e-8, "{z:?} {w:?}");
        }
    }

    #[test]
    fn kohn_strang_zero_and_laminate() {
        let ks = IntegrandSpec::kohn_strang(2, 2).unwrap();
        let mesh = TestFieldMesh::new(2, 8).unwrap();
        assert_eq!(z_estimate(&ks, &Mat::zeros(2, 2), &mesh, 4, 50).unwrap(), ExtReal::ZERO);
        let z = z_estimate(&ks, &Mat::diag(&[0.5, 0.0]), &mesh, 10, 400).unwrap().value();
        assert!(z < 1.25, "{z}");
    }

    #[test]
    fn double_well_drops() {
        let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap();
        let mesh = TestFieldMesh::new(2, 8).unwrap();
        let z = z_estimate(&dw, &Mat::zeros(2, 2), &mesh, 10, 400).unwrap().value();
        assert!(z < 0.5, "{z}");
    }

    #[test]
    fn refinement_with_warm_start_does_not_increase() {
        let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap();
        let coarse = TestFieldMesh::new(2, 4).unwrap();
        let f = Mat::diag(&[0.0, 0.5]);
        let r = z_search(&dw, &f, &coarse, 6, 300, None).unwrap();
        let (fine, warm) = coarse.prolong(&r.field, 2);
        let r2 = z_search(&dw, &f, &fine, 6, 300, Some(&warm)).unwrap();
        assert!(r2.value.value() <= r.value.value() + 1e-6, "{:?} {:?}", r2.value, r.value);
    }

    #[test]
    fn determinant_obstruction_stays_infinite() {
        let neo = IntegrandSpec::neohookean_sdc(2, 2.0).unwrap();
        let mesh = TestFieldMesh::new(2, 4).unwrap();
        let z = z_estimate(&neo, &Mat::diag(&[1.0, -0.5]), &mesh, 6, 100).unwrap();
        assert!(z.is_infinite());
    }

    #[test]
    fn sawtooth_is_periodic() {
        for (p, r) in [(2, 1), (4, 1), (4, 3)] {
            assert_eq!(sawtooth(0, p, r, 0.1), 0.0);
            assert!(sawtooth(p, p, r, 0.1).abs() < 1e-15);
            assert!((sawtooth(-1, p, r, 0.1) - sawtooth(p - 1, p, r, 0.1)).abs() < 1e-15);
        }
    }
}
