//! Matrix values, rank-one directions and regular boxes in matrix space.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default cap on the number of points of a [`MatBox`].
pub const DEFAULT_POINT_BUDGET: usize = 10_000_000;

/// Dense `rows x cols` real matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Mat> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Mat {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for (i, v) in entries.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds from nested rows; panics on ragged input. Test and fixture helper.
    pub fn from_rows(rows: &[&[f64]]) -> Mat {
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Mat { rows: rows.len(), cols, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &Mat) -> Mat {
        debug_assert_eq!(self.dims(), other.dims());
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + t * b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, t: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| t * v).collect() }
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                expected: format!("{} rows", self.cols),
                got: format!("{} rows", other.rows),
            });
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `(xi | zeta)`: appends `zeta` as a last column.
    pub fn append_column(&self, col: &[f64]) -> Mat {
        assert_eq!(col.len(), self.rows);
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
            data.push(col[i]);
        }
        Mat { rows: self.rows, cols, data }
    }

    /// Drops the last column.
    pub fn drop_last_column(&self) -> Mat {
        assert!(self.cols >= 2);
        let cols = self.cols - 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(&self.data[i * self.cols..i * self.cols + cols]);
        }
        Mat { rows: self.rows, cols, data }
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// Outer product `a ⊗ b`.
pub fn rank_one(a: &[f64], b: &[f64]) -> Result<Mat> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("rank_one needs non-empty vectors"));
    }
    if a.iter().all(|v| *v == 0.0) || b.iter().all(|v| *v == 0.0) {
        return Err(invalid("rank_one needs nonzero vectors"));
    }
    let data = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
    Mat::new(a.len(), b.len(), data)
}

/// Frobenius norm.
pub fn frob(f: &Mat) -> f64 {
    f.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frob_sq(f: &Mat) -> f64 {
    f.data.iter().map(|v| v * v).sum()
}

pub fn det(f: &Mat) -> Result<f64> {
    if !f.is_square() {
        return Err(Error::Shape { expected: "square matrix".into(), got: format!("{}x{}", f.rows, f.cols) });
    }
    Ok(det_square(&f.data, f.rows))
}

/// Determinant of a row-major `n x n` slice: cofactor formulas up to 3x3,
/// partial-pivoting LU beyond.
pub(crate) fn det_square(a: &[f64], n: usize) -> f64 {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let mut m = a.to_vec();
            let mut d = 1.0;
            for k in 0..n {
                let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap();
                if m[p * n + k] == 0.0 {
                    return 0.0;
                }
                if p != k {
                    for j in 0..n {
                        m.swap(k * n + j, p * n + j);
                    }
                    d = -d;
                }
                let piv = m[k * n + k];
                d *= piv;
                for i in k + 1..n {
                    let f = m[i * n + k] / piv;
                    for j in k..n {
                        m[i * n + j] -= f * m[k * n + j];
                    }
                }
            }
            d
        }
    }
}

/// Cross product of the two columns of a 3x2 matrix.
pub fn cross_cols(xi: &Mat) -> Result<[f64; 3]> {
    if xi.dims() != (3, 2) {
        return Err(Error::Shape { expected: "3x2".into(), got: format!("{}x{}", xi.rows, xi.cols) });
    }
    Ok(cross_3x2(&xi.data))
}

pub(crate) fn cross_3x2(d: &[f64]) -> [f64; 3] {
    let (u, v) = ([d[0], d[2], d[4]], [d[1], d[3], d[5]]);
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

/// A rank-one direction `a ⊗ b` with unit `a`, `b`. The integer lattice
/// vectors are what lamination uses to walk grid-aligned chains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneDir {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_int: Vec<i64>,
    pub b_int: Vec<i64>,
}

impl RankOneDir {
    pub fn from_lattice(a_int: Vec<i64>, b_int: Vec<i64>) -> Result<RankOneDir> {
        let na = a_int.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
        let nb = b_int.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Err(invalid("rank-one direction needs nonzero vectors"));
        }
        Ok(RankOneDir {
            a: a_int.iter().map(|v| *v as f64 / na).collect(),
            b: b_int.iter().map(|v| *v as f64 / nb).collect(),
            a_int,
            b_int,
        })
    }

    pub fn canonical(m: usize, n: usize, i: usize, j: usize) -> RankOneDir {
        let mut a = vec![0; m];
        let mut b = vec![0; n];
        a[i] = 1;
        b[j] = 1;
        RankOneDir::from_lattice(a, b).unwrap()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.len(), self.b.len())
    }

    /// Unit-norm matrix `a ⊗ b`.
    pub fn matrix(&self) -> Mat {
        rank_one(&self.a, &self.b).expect("unit vectors are nonzero")
    }

    /// Integer offsets `a_int ⊗ b_int`, row-major.
    pub fn lattice_offsets(&self) -> Vec<i64> {
        self.a_int.iter().flat_map(|x| self.b_int.iter().map(move |y| x * y)).collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.lattice_offsets().iter().filter(|v| **v != 0).count() == 1
    }

    fn key(&self) -> Vec<i64> {
        self.lattice_offsets()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Normalizes a lattice vector: divides by the gcd and makes the first
/// nonzero entry positive.
fn primitive(v: &mut [i64]) -> bool {
    let g = v.iter().fold(0, |g, x| gcd(g, *x));
    if g == 0 {
        return false;
    }
    let sign = v.iter().find(|x| **x != 0).map(|x| x.signum()).unwrap_or(1);
    for x in v.iter_mut() {
        *x = sign * *x / g;
    }
    true
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in base `PRIMES[dim]`.
pub fn halton(i: u64, dim: usize) -> f64 {
    let base = PRIMES[dim % PRIMES.len()];
    let mut f = 1.0;
    let mut r = 0.0;
    let mut n = i;
    while n > 0 {
        f /= base as f64;
        r += f * (n % base) as f64;
        n /= base;
    }
    r
}

/// Low-discrepancy point in `[0,1)^d`, offset so the origin is skipped.
pub fn halton_point(i: u64, d: usize, first_dim: usize) -> Vec<f64> {
    (0..d).map(|k| halton(i + 1, first_dim + k)).collect()
}

/// Deterministic direction set: the `m·N` canonical directions `e_i ⊗ e_j`,
/// then sphere samples snapped to small integer lattices, pairwise distinct
/// up to sign, until `budget` directions exist or the lattice is exhausted.
pub fn direction_set(m: usize, n: usize, budget: usize) -> Result<Vec<RankOneDir>> {
    if m == 0 || n == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    if budget < m * n {
        return Err(invalid(format!("direction budget {budget} below m*N = {}", m * n)));
    }
    let mut out = Vec::with_capacity(budget);
    for i in 0..m {
        for j in 0..n {
            out.push(RankOneDir::canonical(m, n, i, j));
        }
    }
    let mut seen: std::collections::HashSet<Vec<i64>> = out.iter().map(|d| d.key()).collect();
    let mut scale = 2i64;
    let mut idx = 0u64;
    let mut misses = 0;
    while out.len() < budget && scale <= 8 {
        let u = halton_point(idx, m + n, 0);
        idx += 1;
        let a = sphere_from_cube(&u[..m]);
        let b = sphere_from_cube(&u[m..]);
        let (Some(a), Some(b)) = (a, b) else { continue };
        let mut ai = snap(&a, scale);
        let mut bi = snap(&b, scale);
        if !primitive(&mut ai) || !primitive(&mut bi) {
            continue;
        }
        let d = RankOneDir::from_lattice(ai, bi)?;
        if seen.insert(d.key()) {
            out.push(d);
            misses = 0;
        } else {
            misses += 1;
            if misses > 2000 {
                scale += 1;
                misses = 0;
            }
        }
    }
    Ok(out)
}

fn sphere_from_cube(u: &[f64]) -> Option<Vec<f64>> {
    let v: Vec<f64> = u.iter().map(|x| 2.0 * x - 1.0).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(0.1..=1.0).contains(&n) {
        return None;
    }
    Some(v.iter().map(|x| x / n).collect())
}

fn snap(v: &[f64], scale: i64) -> Vec<i64> {
    let mx = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter().map(|x| (x / mx * scale as f64).round() as i64).collect()
}

/// A regular grid over a box in matrix space. Entries with resolution 1 are
/// frozen at the center value, which is how affine slices are expressed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatBox {
    pub center: Mat,
    pub half_widths: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl MatBox {
    pub fn new(center: Mat, half_widths: Vec<f64>, resolution: Vec<usize>) -> Result<MatBox> {
        Self::with_budget(center, half_widths, resolution, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(center: Mat, half_widths: Vec<f64>, resolution: Vec<usize>, budget: usize) -> Result<MatBox> {
        let e = center.as_slice().len();
        if half_widths.len() != e || resolution.len() != e {
            return Err(Error::Shape {
                expected: format!("{e} half-widths and resolutions"),
                got: format!("{} and {}", half_widths.len(), resolution.len()),
            });
        }
        for (k, (&h, &r)) in half_widths.iter().zip(&resolution).enumerate() {
            if r % 2 == 0 {
                return Err(invalid(format!("resolution of entry {k} must be odd, got {r}")));
            }
            if r >= 3 && !(h > 0.0 && h.is_finite()) {
                return Err(invalid(format!("half-width of entry {k} must be positive, got {h}")));
            }
        }
        let count = resolution.iter().try_fold(1usize, |acc, r| acc.checked_mul(*r));
        match count {
            Some(c) if c <= budget => {}
            _ => return Err(Error::Budget(format!("box has more than {budget} points"))),
        }
        Ok(MatBox { center, half_widths, resolution })
    }

    /// Uniform box: same half-width and resolution for every entry.
    pub fn uniform(center: Mat, half_width: f64, resolution: usize) -> Result<MatBox> {
        let e = center.as_slice().len();
        MatBox::new(center, vec![half_width; e], vec![resolution; e])
    }

    /// Box with only the listed entries free (row-major indices); all
    /// other entries are frozen at the center.
    pub fn slice(center: Mat, free: &[usize], half_width: f64, resolution: usize) -> Result<MatBox> {
        let e = center.as_slice().len();
        let mut hw = vec![0.0; e];
        let mut res = vec![1; e];
        for &k in free {
            if k >= e {
                return Err(invalid(format!("free entry {k} out of range")));
            }
            hw[k] = half_width;
            res[k] = resolution;
        }
        MatBox::new(center, hw, res)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.center.dims()
    }

    pub fn entries(&self) -> usize {
        self.resolution.len()
    }

    pub fn point_count(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_free(&self, e: usize) -> bool {
        self.resolution[e] > 1
    }

    pub fn free_entries(&self) -> Vec<usize> {
        (0..self.entries()).filter(|e| self.is_free(*e)).collect()
    }

    /// Grid spacing of entry `e` (zero for frozen entries).
    pub fn step(&self, e: usize) -> f64 {
        if self.resolution[e] > 1 {
            2.0 * self.half_widths[e] / (self.resolution[e] - 1) as f64
        } else {
            0.0
        }
    }

    /// Row-major strides: the last entry varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.entries()];
        for e in (0..self.entries().saturating_sub(1)).rev() {
            s[e] = s[e + 1] * self.resolution[e + 1];
        }
        s
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.entries()];
        for e in (0..self.entries()).rev() {
            out[e] = idx % self.resolution[e];
            idx /= self.resolution[e];
        }
        out
    }

    pub fn coordinate(&self, e: usize, i: usize) -> f64 {
        let r = self.resolution[e];
        if r == 1 {
            self.center.as_slice()[e]
        } else {
            let half = (r - 1) / 2;
            self.center.as_slice()[e] + (i as f64 - half as f64) * self.step(e)
        }
    }

    /// Writes the matrix at flat grid index `idx` into `out`.
    pub fn fill_point(&self, idx: usize, out: &mut Mat) {
        let mut rem = idx;
        for e in (0..self.entries()).rev() {
            let i = rem % self.resolution[e];
            rem /= self.resolution[e];
            out.data[e] = self.coordinate(e, i);
        }
    }

    pub fn point(&self, idx: usize) -> Mat {
        let mut m = self.center.clone();
        self.fill_point(idx, &mut m);
        m
    }

    pub fn center_index(&self) -> usize {
        let s = self.strides();
        (0..self.entries()).map(|e| s[e] * (self.resolution[e] - 1) / 2).sum()
    }

    /// Flat index of the grid node equal to `f` (within `1e-9` per entry).
    pub fn locate(&self, f: &Mat) -> Option<usize> {
        if f.dims() != self.dims() {
            return None;
        }
        let s = self.strides();
        let mut idx = 0;
        for e in 0..self.entries() {
            let x = f.data[e];
            let c = self.center.data[e];
            if self.resolution[e] == 1 {
                if (x - c).abs() > 1e-9 {
                    return None;
                }
                continue;
            }
            let t = (x - c) / self.step(e) + ((self.resolution[e] - 1) / 2) as f64;
            let i = t.round();
            if (t - i).abs() * self.step(e) > 1e-9 || i < 0.0 || i as usize >= self.resolution[e] {
                return None;
            }
            idx += s[e] * i as usize;
        }
        Some(idx)
    }

    pub fn contains(&self, f: &Mat) -> bool {
        if f.dims() != self.dims() {
            return false;
        }
        (0..self.entries()).all(|e| {
            let d = (f.data[e] - self.center.data[e]).abs();
            if self.resolution[e] == 1 {
                d <= 1e-9
            } else {
                d <= self.half_widths[e] + 1e-9
            }
        })
    }

    /// Whether `dir` walks grid-aligned chains in this box: its lattice
    /// offsets vanish on frozen entries and the induced displacement is
    /// still rank one.
    pub fn supports(&self, dir: &RankOneDir) -> bool {
        if dir.dims() != self.dims() {
            return false;
        }
        let off = dir.lattice_offsets();
        if off.iter().enumerate().any(|(e, o)| *o != 0 && !self.is_free(e)) {
            return false;
        }
        let (m, n) = self.dims();
        let disp: Vec<f64> = off.iter().enumerate().map(|(e, o)| *o as f64 * self.step(e)).collect();
        let scale = disp.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            return false;
        }
        for i in 0..m {
            for k in i + 1..m {
                for j in 0..n {
                    for l in j + 1..n {
                        let minor = disp[i * n + j] * disp[k * n + l] - disp[i * n + l] * disp[k * n + j];
                        if minor.abs() > 1e-12 * scale * scale {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Displacement matrix of one lattice step along `dir`.
    pub fn displacement(&self, dir: &RankOneDir) -> Mat {
        let off = dir.lattice_offsets();
        let data = off.iter().enumerate().map(|(e, o)| *o as f64 * self.step(e)).collect();
        Mat { rows: self.center.rows, cols: self.center.cols, data }
    }
}

/// Directions usable on `bx`: canonical ones over free entries first, then
/// sampled lattice directions the box supports, up to `budget`.
pub fn directions_for_box(bx: &MatBox, budget: usize) -> Result<Vec<RankOneDir>> {
    let (m, n) = bx.dims();
    let pool = direction_set(m, n, (m * n).max(budget.saturating_mul(8)).max(m * n))?;
    let out: Vec<RankOneDir> = pool.into_iter().filter(|d| bx.supports(d)).take(budget).collect();
    if out.is_empty() {
        return Err(invalid("box admits no grid-aligned rank-one direction"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_examples() {
        assert_eq!(rank_one(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), Mat::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(rank_one(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), Mat::from_rows(&[&[0.0, 0.0], &[0.0, 1.0]]));
        let s = 1.0 / 2f64.sqrt();
        let r = rank_one(&[s, s], &[s, -s]).unwrap();
        let want = Mat::from_rows(&[&[0.5, -0.5], &[0.5, -0.5]]);
        assert!(r.max_abs_diff(&want) < 1e-15);
        assert!(rank_one(&[0.0, 0.0], &[1.0]).is_err());
    }

    #[test]
    fn frob_det_cross_examples() {
        assert_eq!(frob(&Mat::zeros(2, 2)), 0.0);
        assert!((frob(&Mat::identity(2)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(frob(&Mat::from_rows(&[&[3.0, 4.0], &[0.0, 0.0]])), 5.0);
        assert_eq!(det(&Mat::identity(3)).unwrap(), 1.0);
        assert_eq!(det(&Mat::diag(&[2.0, 3.0])).unwrap(), 6.0);
        assert_eq!(det(&Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap(), 0.0);
        assert!(det(&Mat::zeros(3, 2)).is_err());
        let c = |a: [f64; 3], b: [f64; 3]| {
            cross_cols(&Mat::from_rows(&[&[a[0], b[0]], &[a[1], b[1]], &[a[2], b[2]]])).unwrap()
        };
        assert_eq!(c([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), [0.0, 0.0, 1.0]);
        assert_eq!(c([1.0, 0.0, 0.0], [2.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        assert_eq!(c([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]), [0.0, 0.0, -1.0]);
        assert!(cross_cols(&Mat::zeros(2, 2)).is_err());
    }

    #[test]
    fn lu_matches_cofactor() {
        let a = Mat::from_rows(&[&[2.0, -1.0, 0.5, 1.0], &[0.3, 4.0, -2.0, 0.0], &[1.0, 1.0, 1.0, 1.0], &[0.0, -3.0, 2.0, 5.0]]);
        // Laplace expansion along the first row.
        let minor = |c: usize| {
            let mut d = Vec::new();
            for i in 1..4 {
                for j in 0..4 {
                    if j != c {
                        d.push(a.get(i, j));
                    }
                }
            }
            det_square(&d, 3)
        };
        let want: f64 = (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * a.get(0, c) * minor(c)).sum();
        assert!((det(&a).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn direction_set_examples() {
        let d = direction_set(2, 2, 4).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.iter().all(|x| x.is_canonical()));
        assert_eq!(direction_set(3, 2, 6).unwrap().len(), 6);
        assert!(direction_set(2, 2, 3).is_err());

        let d = direction_set(2, 2, 20).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d.iter().filter(|x| x.is_canonical()).count(), 4);
        for i in 0..d.len() {
            let (ai, bi) = (d[i].matrix(), d[i].matrix().scaled(-1.0));
            for j in i + 1..d.len() {
                let mj = d[j].matrix();
                assert!(ai.max_abs_diff(&mj) > 1e-9 && bi.max_abs_diff(&mj) > 1e-9, "{i} vs {j}");
            }
        }
        for x in &d {
            let na: f64 = x.a.iter().map(|v| v * v).sum();
            let nb: f64 = x.b.iter().map(|v| v * v).sum();
            assert!((na - 1.0).abs() < 1e-12 && (nb - 1.0).abs() < 1e-12);
        }
        assert_eq!(direction_set(2, 2, 20).unwrap(), d);
    }

    #[test]
    fn box_indexing() {
        let bx = MatBox::uniform(Mat::zeros(2, 2), 2.0, 5).unwrap();
        assert_eq!(bx.point_count(), 625);
        let c = bx.center_index();
        assert_eq!(bx.point(c), Mat::zeros(2, 2));
        for idx in [0, 17, 312, 624] {
            assert_eq!(bx.locate(&bx.point(idx)), Some(idx));
        }
        assert!(MatBox::uniform(Mat::zeros(2, 2), 2.0, 4).is_err());
        assert!(matches!(
            MatBox::with_budget(Mat::zeros(2, 2), vec![1.0; 4], vec![11; 4], 1000),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn slice_supports_only_free_directions() {
        let bx = MatBox::slice(Mat::zeros(3, 2), &[0, 3], 1.0, 5).unwrap();
        let dirs = directions_for_box(&bx, 12).unwrap();
        assert!(!dirs.is_empty());
        for d in &dirs {
            let off = d.lattice_offsets();
            assert!(off.iter().enumerate().all(|(e, o)| *o == 0 || e == 0 || e == 3));
        }
    }
}
