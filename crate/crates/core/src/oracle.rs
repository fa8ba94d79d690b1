//! Slow reference computations on tiny instances.
//!
//! Nothing here shares code with the envelope engine beyond the integrand
//! itself: the chord search and the one-node test field are written out
//! directly so the two can be compared.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::integrand::{Integrand, IntegrandSpec};
use crate::matspace::{Mat, RankOneDir};

/// Largest 1d grid the segment oracle accepts.
pub const MAX_SEGMENT_POINTS: usize = 20_001;

/// Value at `F` of the depth-`depth` lamination recursion restricted to the
/// line `F + t a⊗b`, `t` on `points` equispaced values in `[-radius, radius]`.
///
/// Level `d` at node `k` is the least chord of level `d - 1` over all pairs
/// `i <= k <= j`, the pair `i = j = k` included.
pub fn brute_envelope_segment<W: Integrand + ?Sized>(
    w: &W,
    f: &Mat,
    dir: &RankOneDir,
    radius: f64,
    points: usize,
    depth: usize,
) -> Result<ExtReal> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(invalid("points must be odd and at least 3"));
    }
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius must be positive"));
    }
    if points > MAX_SEGMENT_POINTS {
        return Err(Error::Budget(format!("{points} points exceeds {MAX_SEGMENT_POINTS}")));
    }
    if dir.dims() != w.dims() || f.dims() != w.dims() {
        return Err(Error::Shape { expected: format!("{:?}", w.dims()), got: format!("{:?}", f.dims()) });
    }
    let m = dir.matrix();
    let half = (points / 2) as i64;
    let ts: Vec<f64> = (0..points as i64).map(|k| radius * (k - half) as f64 / half as f64).collect();
    let mut level: Vec<f64> =
        ts.par_iter().map(|t| w.eval(&f.axpy(*t, &m)).map(|v| v.value())).collect::<Result<_>>()?;
    for _ in 0..depth {
        level = (0..points)
            .into_par_iter()
            .map(|k| {
                let mut best = level[k];
                for i in 0..=k {
                    if !level[i].is_finite() {
                        continue;
                    }
                    for j in k..points {
                        if j == i || !level[j].is_finite() {
                            continue;
                        }
                        let (a, b) = (ts[k] - ts[i], ts[j] - ts[k]);
                        let v = (b * level[i] + a * level[j]) / (ts[j] - ts[i]);
                        if v < best {
                            best = v;
                        }
                    }
                }
                best
            })
            .collect();
    }
    Ok(ExtReal::saturating(level[half as usize]))
}

/// Node values on a square grid `[lo, hi]^m` with the given step.
pub fn amplitude_grid(m: usize, lo: f64, hi: f64, step: f64) -> Result<Vec<Vec<f64>>> {
    if !(step > 0.0) || hi < lo {
        return Err(invalid("need lo <= hi and a positive step"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let axis: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p| axis.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    Ok(out)
}

// Unit square, 2x2 cells of side 1/2, each split along its main diagonal.
// Vertices are doubled coordinates; the only interior vertex is (1, 1).
const TRIANGLES: [[(u8, u8); 3]; 8] = [
    [(0, 0), (1, 0), (1, 1)],
    [(0, 0), (0, 1), (1, 1)],
    [(1, 0), (2, 0), (2, 1)],
    [(1, 0), (1, 1), (2, 1)],
    [(0, 1), (1, 1), (1, 2)],
    [(0, 1), (0, 2), (1, 2)],
    [(1, 1), (2, 1), (2, 2)],
    [(1, 1), (1, 2), (2, 2)],
];

/// Average energy of `F + grad phi` over the unit square for the piecewise
/// affine `phi` vanishing on the boundary with value `u` at the centre.
pub fn one_node_energy<W: Integrand + ?Sized>(w: &W, f: &Mat, u: &[f64]) -> Result<ExtReal> {
    let (m, n) = w.dims();
    if n != 2 || u.len() != m || f.dims() != (m, n) {
        return Err(Error::Shape { expected: format!("{m}x2 with a {m}-vector node"), got: format!("{:?}", f.dims()) });
    }
    let mut total = 0.0;
    for tri in &TRIANGLES {
        let val = |p: (u8, u8)| if p == (1, 1) { u.to_vec() } else { vec![0.0; m] };
        let p: Vec<[f64; 2]> = tri.iter().map(|&(x, y)| [x as f64 * 0.5, y as f64 * 0.5]).collect();
        let (e1, e2) = ([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        let (v0, v1, v2) = (val(tri[0]), val(tri[1]), val(tri[2]));
        let mut g = f.clone();
        for r in 0..m {
            let (d1, d2) = (v1[r] - v0[r], v2[r] - v0[r]);
            // Solve G [e1 e2] = [d1 d2] for the row G.
            let g0 = (d1 * e2[1] - d2 * e1[1]) / det;
            let g1 = (d2 * e1[0] - d1 * e2[0]) / det;
            g.set(r, 0, g.get(r, 0) + g0);
            g.set(r, 1, g.get(r, 1) + g1);
        }
        let v = w.eval(&g)?;
        if v.is_infinite() {
            return Ok(ExtReal::INFINITY);
        }
        total += 0.5 * det.abs() * v.value();
    }
    Ok(ExtReal::saturating(total))
}

/// Least one-node energy over the candidate centre values.
pub fn brute_z_one_node<W: Integrand + ?Sized>(w: &W, f: &Mat, amplitudes: &[Vec<f64>]) -> Result<ExtReal> {
    Ok(brute_z_one_node_argmin(w, f, amplitudes)?.0)
}

/// As [`brute_z_one_node`], with the first minimizing candidate.
pub fn brute_z_one_node_argmin<W: Integrand + ?Sized>(
    w: &W,
    f: &Mat,
    amplitudes: &[Vec<f64>],
) -> Result<(ExtReal, Option<Vec<f64>>)> {
    if w.dims().1 != 2 {
        return Err(invalid("the one-node oracle is two-dimensional"));
    }
    let values: Vec<ExtReal> = amplitudes.par_iter().map(|u| one_node_energy(w, f, u)).collect::<Result<_>>()?;
    let mut best: (ExtReal, Option<Vec<f64>>) = (ExtReal::INFINITY, None);
    for (v, u) in values.into_iter().zip(amplitudes) {
        if v < best.0 {
            best = (v, Some(u.clone()));
        }
    }
    Ok(best)
}

/// One oracle output with everything needed to recompute it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub name: String,
    pub operation: String,
    pub parameters: serde_json::Value,
    pub value: ExtReal,
}

fn record(name: &str, operation: &str, parameters: serde_json::Value, value: ExtReal) -> FixtureRecord {
    FixtureRecord { name: name.into(), operation: operation.into(), parameters, value }
}

/// Regenerates every committed oracle value.
pub fn fixtures() -> Result<Vec<FixtureRecord>> {
    let ks = IntegrandSpec::kohn_strang(2, 2)?;
    let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0)?;
    let quad = IntegrandSpec::quad(Mat::zeros(2, 2), 0.0)?;
    let e11 = RankOneDir::canonical(2, 2, 0, 0);
    let q = Mat::diag(&[0.5, 0.0]);
    let mut out = Vec::new();

    for (name, points) in [("ks-segment", 65), ("ks-segment-fine", 193)] {
        let v = brute_envelope_segment(&ks, &q, &e11, 2.0, points, 3)?;
        out.push(record(
            name,
            "brute_envelope_segment",
            json!({"integrand": "KOHN_STRANG", "dims": [2, 2], "f": [0.5, 0.0, 0.0, 0.0],
                   "direction": {"a": [1, 0], "b": [1, 0]}, "radius": 2.0, "points": points, "depth": 3}),
            v,
        ));
    }
    let v = brute_envelope_segment(&dw, &Mat::zeros(2, 2), &e11, 2.0, 9, 1)?;
    out.push(record(
        "dw-well-line",
        "brute_envelope_segment",
        json!({"integrand": "DOUBLE_WELL", "wells": "+-e1(x)e1", "p": 2.0, "dims": [2, 2], "f": [0.0, 0.0, 0.0, 0.0],
               "direction": {"a": [1, 0], "b": [1, 0]}, "radius": 2.0, "points": 9, "depth": 1}),
        v,
    ));

    let grid = amplitude_grid(2, -1.5, 1.5, 0.05)?;
    let cases: [(&str, &str, &IntegrandSpec, Mat); 3] = [
        ("dw-one-node", "DOUBLE_WELL", &dw, Mat::zeros(2, 2)),
        ("ks-one-node", "KOHN_STRANG", &ks, Mat::zeros(2, 2)),
        ("quad-one-node", "QUAD", &quad, Mat::from_rows(&[&[0.3, -0.2], &[0.1, 0.4]])),
    ];
    for (name, label, w, f) in cases {
        let (v, arg) = brute_z_one_node_argmin(w, &f, &grid)?;
        out.push(record(
            name,
            "brute_z_one_node",
            json!({"integrand": label, "dims": [2, 2], "f": f.as_slice(), "mesh_k": 2,
                   "amplitude_grid": {"lo": -1.5, "hi": 1.5, "step": 0.05, "dim": 2}, "argmin": arg}),
            v,
        ));
    }
    Ok(out)
}

pub fn fixtures_json(records: &[FixtureRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::Internal(e.to_string())).map(|s| s + "\n")
}

pub fn load_fixtures(path: &Path) -> Result<Vec<FixtureRecord>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_integrand_is_its_own_segment_envelope() {
        let quad = IntegrandSpec::quad(Mat::zeros(2, 2), 0.5).unwrap();
        let f = Mat::from_rows(&[&[0.3, -0.1], &[0.7, 0.2]]);
        let dir = RankOneDir::from_lattice(vec![1, 1], vec![1, -1]).unwrap();
        let v = brute_envelope_segment(&quad, &f, &dir, 1.5, 31, 2).unwrap();
        assert!((v.value() - quad.eval(&f).unwrap().value()).abs() < 1e-12);
    }

    #[test]
    fn double_well_line_is_flat() {
        let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap();
        let v = brute_envelope_segment(&dw, &Mat::zeros(2, 2), &RankOneDir::canonical(2, 2, 0, 0), 2.0, 9, 1).unwrap();
        assert_eq!(v, ExtReal::ZERO);
    }

    #[test]
    fn kohn_strang_segment_is_one() {
        let ks = IntegrandSpec::kohn_strang(2, 2).unwrap();
        let v = brute_envelope_segment(&ks, &Mat::diag(&[0.5, 0.0]), &RankOneDir::canonical(2, 2, 0, 0), 2.0, 65, 1)
            .unwrap();
        assert!((v.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segment_arguments_are_checked() {
        let ks = IntegrandSpec::kohn_strang(2, 2).unwrap();
        let d = RankOneDir::canonical(2, 2, 0, 0);
        let f = Mat::zeros(2, 2);
        assert!(brute_envelope_segment(&ks, &f, &d, 1.0, 4, 1).is_err());
        assert!(brute_envelope_segment(&ks, &f, &d, 1.0, 5, 0).is_err());
        assert!(matches!(brute_envelope_segment(&ks, &f, &d, 1.0, 40_001, 1), Err(Error::Budget(_))));
    }

    #[test]
    fn one_node_zero_is_the_integrand() {
        let quad = IntegrandSpec::quad(Mat::zeros(2, 2), 0.0).unwrap();
        let f = Mat::from_rows(&[&[0.3, -0.2], &[0.1, 0.4]]);
        let v = one_node_energy(&quad, &f, &[0.0, 0.0]).unwrap();
        assert!((v.value() - quad.eval(&f).unwrap().value()).abs() < 1e-15);
        let grid = amplitude_grid(2, -0.5, 0.5, 0.25).unwrap();
        assert_eq!(grid.len(), 25);
        let (b, arg) = brute_z_one_node_argmin(&quad, &f, &grid).unwrap();
        assert!((b.value() - 0.3).abs() < 1e-15);
        assert_eq!(arg.unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn one_node_energy_by_hand() {
        // W = |F|^2 at F = 0: six triangles see a gradient of norm 2|u|,
        // each of area 1/8.
        let quad = IntegrandSpec::quad(Mat::zeros(2, 2), 0.0).unwrap();
        let u = [0.3, -0.4];
        let v = one_node_energy(&quad, &Mat::zeros(2, 2), &u).unwrap().value();
        let mut want = 0.0;
        for tri in &TRIANGLES {
            // Gradient of the hat on each triangle, times u.
            let k = tri.iter().position(|p| *p == (1, 1));
            if k.is_some() {
                let others: Vec<_> = tri.iter().filter(|p| **p != (1, 1)).collect();
                let shared_x = others[0].0 == others[1].0;
                let g2 = if shared_x || others[0].1 == others[1].1 { 4.0 } else { 8.0 };
                want += 0.125 * g2 * (u[0] * u[0] + u[1] * u[1]);
            }
        }
        assert!((v - want).abs() < 1e-15, "{v} vs {want}");
    }
}
