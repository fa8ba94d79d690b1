use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Kuhn triangulation of the unit cell `(0,1)^N` with `k` subdivisions per
/// axis: every grid cell splits into `N!` simplices, one per ordering of the
/// axes, so piecewise-affine fields have exact constant gradients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MeshParams", try_from = "MeshParams")]
pub struct TestFieldMesh {
    n: usize,
    k: usize,
    /// Vertices `v_0 .. v_N` of each simplex as global node ids.
    simplices: Vec<Vec<usize>>,
    /// Axis order of each simplex: `v_{i+1} = v_i + h e_{perm[i]}`.
    perms: Vec<Vec<usize>>,
    interior: Vec<usize>,
    is_interior: Vec<bool>,
    /// Simplices touching each global node.
    touching: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MeshParams {
    pub dim: usize,
    pub k: usize,
}

impl From<TestFieldMesh> for MeshParams {
    fn from(m: TestFieldMesh) -> MeshParams {
        MeshParams { dim: m.n, k: m.k }
    }
}

impl TryFrom<MeshParams> for TestFieldMesh {
    type Error = crate::error::Error;
    fn try_from(p: MeshParams) -> Result<TestFieldMesh> {
        TestFieldMesh::new(p.dim, p.k)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

impl TestFieldMesh {
    pub fn new(n: usize, k: usize) -> Result<TestFieldMesh> {
        if n == 0 || n > 4 {
            return Err(invalid("mesh dimension must be between 1 and 4"));
        }
        if k == 0 {
            return Err(invalid("mesh subdivision k must be at least 1"));
        }
        let side = k + 1;
        let total = side.pow(n as u32);
        let stride: Vec<usize> = (0..n).map(|a| side.pow((n - 1 - a) as u32)).collect();
        let perms_all = permutations(n);
        let mut simplices = Vec::new();
        let mut perms = Vec::new();
        for cell in 0..k.pow(n as u32) {
            let mut rem = cell;
            let mut corner = 0;
            for a in (0..n).rev() {
                corner += (rem % k) * stride[a];
                rem /= k;
            }
            for p in &perms_all {
                let mut vs = vec![corner];
                let mut cur = corner;
                for &a in p {
                    cur += stride[a];
                    vs.push(cur);
                }
                simplices.push(vs);
                perms.push(p.clone());
            }
        }
        let mut is_interior = vec![false; total];
        let mut interior = Vec::new();
        for (node, flag) in is_interior.iter_mut().enumerate() {
            let inside = (0..n).all(|a| {
                let i = (node / stride[a]) % side;
                i > 0 && i < k
            });
            if inside {
                *flag = true;
                interior.push(node);
            }
        }
        let mut touching = vec![Vec::new(); total];
        for (s, vs) in simplices.iter().enumerate() {
            for &v in vs {
                touching[v].push(s);
            }
        }
        Ok(TestFieldMesh { n, k, simplices, perms, interior, is_interior, touching })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn node_count(&self) -> usize {
        (self.k + 1).pow(self.n as u32)
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    /// Volume of every simplex, `h^N / N!`.
    pub fn volume(&self) -> f64 {
        let fact: usize = (1..=self.n).product();
        self.h().powi(self.n as i32) / fact as f64
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.is_interior[node]
    }

    pub(crate) fn touching(&self, node: usize) -> &[usize] {
        &self.touching[node]
    }

    /// Grid coordinates of a node.
    pub fn node_index(&self, node: usize) -> Vec<usize> {
        let side = self.k + 1;
        let mut out = vec![0; self.n];
        let mut rem = node;
        for a in (0..self.n).rev() {
            out[a] = rem % side;
            rem /= side;
        }
        out
    }

    pub fn node_id(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, i| acc * (self.k + 1) + i)
    }

    /// Adds the gradient of the field `u` (component-major: `u[c * nodes +
    /// node]`) on simplex `s` into the row-major `m x N` buffer `out`.
    pub fn add_gradient(&self, u: &[f64], m: usize, s: usize, out: &mut [f64]) {
        let nodes = self.node_count();
        let vs = &self.simplices[s];
        let inv_h = self.k as f64;
        for (i, &a) in self.perms[s].iter().enumerate() {
            for c in 0..m {
                let d = (u[c * nodes + vs[i + 1]] - u[c * nodes + vs[i]]) * inv_h;
                out[c * self.n + a] += d;
            }
        }
    }

    /// Nodal interpolation of a field on this mesh onto the mesh with
    /// `2k` subdivisions; exact, since Kuhn refinement is nested.
    pub fn prolong(&self, u: &[f64], m: usize) -> (TestFieldMesh, Vec<f64>) {
        let fine = TestFieldMesh::new(self.n, 2 * self.k).expect("valid refinement");
        let (nc, nf) = (self.node_count(), fine.node_count());
        let mut out = vec![0.0; m * nf];
        for node in 0..nf {
            let idx = fine.node_index(node);
            let lo: Vec<usize> = idx.iter().map(|i| i / 2).collect();
            let hi: Vec<usize> = idx.iter().map(|i| i.div_ceil(2)).collect();
            let (a, b) = (self.node_id(&lo), self.node_id(&hi));
            for c in 0..m {
                out[c * nf + node] = 0.5 * (u[c * nc + a] + u[c * nc + b]);
            }
        }
        (fine, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_sum_to_one() {
        for (n, k) in [(1, 3), (2, 2), (2, 5), (3, 3)] {
            let m = TestFieldMesh::new(n, k).unwrap();
            assert!((m.volume() * m.simplex_count() as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k2_square_has_one_interior_node() {
        let m = TestFieldMesh::new(2, 2).unwrap();
        assert_eq!(m.interior(), &[4]);
        assert_eq!(m.simplex_count(), 8);
        // Two of the eight simplices miss the center node.
        assert_eq!(m.touching(4).len(), 6);
    }

    #[test]
    fn affine_field_has_constant_gradient() {
        let m = TestFieldMesh::new(2, 3).unwrap();
        let nodes = m.node_count();
        let mut u = vec![0.0; nodes];
        for node in 0..nodes {
            let idx = m.node_index(node);
            u[node] = 2.0 * idx[0] as f64 * m.h() - 0.5 * idx[1] as f64 * m.h();
        }
        for s in 0..m.simplex_count() {
            let mut g = [0.0; 2];
            m.add_gradient(&u, 1, s, &mut g);
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_zero_field_integrates_to_zero_gradient() {
        // Mean of the gradient over the cell is the boundary integral: zero.
        let m = TestFieldMesh::new(2, 4).unwrap();
        let nodes = m.node_count();
        let mut u = vec![0.0; 2 * nodes];
        for (j, &node) in m.interior().iter().enumerate() {
            u[node] = (j as f64 * 0.37).sin();
            u[nodes + node] = (j as f64 * 1.3).cos();
        }
        let mut mean = [0.0; 4];
        for s in 0..m.simplex_count() {
            let mut g = [0.0; 4];
            m.add_gradient(&u, 2, s, &mut g);
            for i in 0..4 {
                mean[i] += m.volume() * g[i];
            }
        }
        assert!(mean.iter().all(|x| x.abs() < 1e-12), "{mean:?}");
    }
}
