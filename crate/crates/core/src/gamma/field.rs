use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{gauss_legendre, ThinFilmConfig};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::integrand::Integrand;
use crate::matspace::Mat;

/// A deformation of the plate given by node values at each height.
///
/// Nodes are numbered `j * (n + 1) + i` for the node at `(i h, j h)`.
pub trait ThickField {
    fn cells(&self) -> usize;

    /// `phi` at a node and height `x3`.
    fn value(&self, node: usize, x3: f64) -> [f64; 3];

    /// `d phi / d x3` at a node and height `x3`.
    fn normal_derivative(&self, node: usize, x3: f64) -> [f64; 3];
}

/// A planar map `Sigma -> R^3` by node values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarField {
    pub cells: usize,
    pub nodes: Vec<[f64; 3]>,
}

impl PlanarField {
    pub fn new(cells: usize, nodes: Vec<[f64; 3]>) -> Result<PlanarField> {
        if cells < 1 || nodes.len() != (cells + 1) * (cells + 1) {
            return Err(invalid("planar field needs (cells+1)^2 nodes"));
        }
        Ok(PlanarField { cells, nodes })
    }

    /// `psi(x) = xi x` for a 3x2 matrix `xi`.
    pub fn affine(cells: usize, xi: &Mat) -> Result<PlanarField> {
        if xi.dims() != (3, 2) {
            return Err(Error::Shape { expected: "3x2".into(), got: format!("{}x{}", xi.rows(), xi.cols()) });
        }
        let h = 1.0 / cells as f64;
        let nodes = node_coords(cells)
            .map(|(i, j)| {
                let (x, y) = (i as f64 * h, j as f64 * h);
                let mut p = [0.0; 3];
                for (r, v) in p.iter_mut().enumerate() {
                    *v = xi.get(r, 0) * x + xi.get(r, 1) * y;
                }
                p
            })
            .collect();
        Ok(PlanarField { cells, nodes })
    }

    /// Gradient on cell `(i, j)`: differences of the corner values, centred
    /// at the cell midpoint.
    pub fn cell_gradient(&self, i: usize, j: usize) -> Mat {
        let n1 = self.cells + 1;
        let h = 1.0 / self.cells as f64;
        let (a, b) = (self.nodes[j * n1 + i], self.nodes[j * n1 + i + 1]);
        let (c, d) = (self.nodes[(j + 1) * n1 + i], self.nodes[(j + 1) * n1 + i + 1]);
        let mut g = Mat::zeros(3, 2);
        for r in 0..3 {
            g.set(r, 0, (b[r] - a[r] + d[r] - c[r]) / (2.0 * h));
            g.set(r, 1, (c[r] - a[r] + d[r] - b[r]) / (2.0 * h));
        }
        g
    }

    pub fn max_abs_diff(&self, other: &PlanarField) -> f64 {
        self.nodes
            .iter()
            .zip(&other.nodes)
            .flat_map(|(a, b)| (0..3).map(move |r| (a[r] - b[r]).abs()))
            .fold(0.0, f64::max)
    }
}

fn node_coords(cells: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=cells).flat_map(move |j| (0..=cells).map(move |i| (i, j)))
}

/// Oscillation of frequency `kappa` along the planar axis `axis`:
/// `A(x) sin(theta) / (2 pi kappa) + x3 G(x) cos(theta)` with
/// `theta = 2 pi kappa x_axis`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrector {
    pub kappa: u32,
    pub axis: usize,
    pub amplitude: Vec<[f64; 3]>,
    pub director: Vec<[f64; 3]>,
}

/// `phi(x, x3) = psi(x) + x3 d(x) + corrector`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzField {
    pub psi: PlanarField,
    pub director: Vec<[f64; 3]>,
    pub corrector: Option<Corrector>,
    #[serde(skip)]
    phase: Vec<(f64, f64)>,
}

impl AnsatzField {
    pub fn new(psi: PlanarField, director: Vec<[f64; 3]>, corrector: Option<Corrector>) -> Result<AnsatzField> {
        let count = psi.nodes.len();
        if director.len() != count {
            return Err(invalid("director needs one value per node"));
        }
        let mut phase = Vec::new();
        if let Some(c) = &corrector {
            if c.kappa == 0 {
                return Err(invalid("corrector frequency must be positive"));
            }
            if c.axis > 1 {
                return Err(invalid("corrector axis must be 0 or 1"));
            }
            if c.amplitude.len() != count || c.director.len() != count {
                return Err(invalid("corrector needs one value per node"));
            }
            let h = 1.0 / psi.cells as f64;
            let k = 2.0 * PI * c.kappa as f64;
            phase = node_coords(psi.cells)
                .map(|(i, j)| {
                    let s = if c.axis == 0 { i } else { j } as f64 * h;
                    let (sn, cs) = (k * s).sin_cos();
                    (sn / k, cs)
                })
                .collect();
        }
        Ok(AnsatzField { psi, director, corrector, phase })
    }

    /// `x3`-independent extension of `psi`.
    pub fn flat(psi: PlanarField) -> AnsatzField {
        let director = vec![[0.0; 3]; psi.nodes.len()];
        AnsatzField { psi, director, corrector: None, phase: Vec::new() }
    }
}

impl ThickField for AnsatzField {
    fn cells(&self) -> usize {
        self.psi.cells
    }

    fn value(&self, node: usize, x3: f64) -> [f64; 3] {
        let (p, d) = (self.psi.nodes[node], self.director[node]);
        let mut v = [p[0] + x3 * d[0], p[1] + x3 * d[1], p[2] + x3 * d[2]];
        if let Some(c) = &self.corrector {
            let (s, cs) = self.phase[node];
            let (a, g) = (c.amplitude[node], c.director[node]);
            for r in 0..3 {
                v[r] += a[r] * s + x3 * g[r] * cs;
            }
        }
        v
    }

    fn normal_derivative(&self, node: usize, _x3: f64) -> [f64; 3] {
        let mut d = self.director[node];
        if let Some(c) = &self.corrector {
            let cs = self.phase[node].1;
            let g = c.director[node];
            for r in 0..3 {
                d[r] += g[r] * cs;
            }
        }
        d
    }
}

/// Through-thickness Gauss average of `phi` at every node.
pub fn pi_average<F: ThickField + ?Sized>(phi: &F, eps: f64, cfg: &ThinFilmConfig) -> Result<PlanarField> {
    if !(eps > 0.0) {
        return Err(invalid("thickness must be positive"));
    }
    let n = phi.cells();
    let (xs, ws) = gauss_legendre(cfg.gauss);
    let nodes = (0..(n + 1) * (n + 1))
        .map(|node| {
            let mut acc = [0.0; 3];
            for (x, w) in xs.iter().zip(&ws) {
                let v = phi.value(node, 0.5 * eps * x);
                for r in 0..3 {
                    acc[r] += 0.5 * w * v[r];
                }
            }
            acc
        })
        .collect();
    PlanarField::new(n, nodes)
}

/// `(1/eps) int W(grad phi)` over the plate: cell midpoints in the plane,
/// Gauss points through the thickness. Planar derivatives are differences
/// of the cell corner values; `d phi / d x3` is the corner average.
pub fn thin_film_energy<W, F>(w: &W, phi: &F, eps: f64, cfg: &ThinFilmConfig) -> Result<ExtReal>
where
    W: Integrand + ?Sized,
    F: ThickField + ?Sized,
{
    if w.dims() != (3, 3) {
        let (m, n) = w.dims();
        return Err(Error::Shape { expected: "3x3".into(), got: format!("{m}x{n}") });
    }
    if phi.cells() != cfg.cells {
        return Err(Error::Shape { expected: format!("{} cells", cfg.cells), got: format!("{} cells", phi.cells()) });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("thickness must be positive"));
    }
    let n = cfg.cells;
    let n1 = n + 1;
    let h = cfg.h();
    let (xs, ws) = gauss_legendre(cfg.gauss);
    let mut vals = vec![[0.0; 3]; n1 * n1];
    let mut dz = vec![[0.0; 3]; n1 * n1];
    let mut f = Mat::zeros(3, 3);
    let mut total = 0.0;
    for (x, wq) in xs.iter().zip(&ws) {
        let x3 = 0.5 * eps * x;
        for node in 0..n1 * n1 {
            vals[node] = phi.value(node, x3);
            dz[node] = phi.normal_derivative(node, x3);
        }
        let mut layer = 0.0;
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (j * n1 + i, j * n1 + i + 1, (j + 1) * n1 + i, (j + 1) * n1 + i + 1);
                let e = f.as_mut_slice();
                for r in 0..3 {
                    e[3 * r] = (vals[b][r] - vals[a][r] + vals[d][r] - vals[c][r]) / (2.0 * h);
                    e[3 * r + 1] = (vals[c][r] - vals[a][r] + vals[d][r] - vals[b][r]) / (2.0 * h);
                    e[3 * r + 2] = 0.25 * (dz[a][r] + dz[b][r] + dz[c][r] + dz[d][r]);
                }
                let v = w.value(&f)?;
                if v.is_infinite() {
                    return Ok(ExtReal::INFINITY);
                }
                layer += v.value();
            }
        }
        total += 0.5 * wq * layer;
    }
    Ok(ExtReal::saturating(total * cfg.cell_area()))
}
