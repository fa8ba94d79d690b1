use super::grid::GridFn;
use rayon::prelude::*;

/// `out[.., k, ..] = max_i (s_k x_i + a[.., i, ..])` along one axis;
/// `-inf` entries of `a` are absent.
fn transform_axis(a: &[f64], shape: &[usize], axis: usize, xs: &[f64], ss: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let (len_in, len_out) = (xs.len(), ss.len());
    let mut out = vec![f64::NEG_INFINITY; outer * len_out * inner];
    out.par_chunks_mut(len_out * inner).enumerate().for_each(|(o, chunk)| {
        let base = o * len_in * inner;
        for j in 0..inner {
            for (k, s) in ss.iter().enumerate() {
                let mut best = f64::NEG_INFINITY;
                for (i, x) in xs.iter().enumerate() {
                    let v = a[base + i * inner + j];
                    if v > f64::NEG_INFINITY {
                        let c = s * x + v;
                        if c > best {
                            best = c;
                        }
                    }
                }
                chunk[k * inner + j] = best;
            }
        }
    });
    let mut new_shape = shape.to_vec();
    new_shape[axis] = len_out;
    (out, new_shape)
}

/// Box-restricted convex lower bound: the discrete Legendre-Fenchel
/// biconjugate, computed one axis at a time. Slopes per axis are `2r + 1`
/// evenly spaced values over the range of adjacent finite differences,
/// always including zero, so the result stays `>= min f >= 0`. Every
/// output is a maximum of affine functions, hence convex along any segment.
pub fn convex_lower(f: &GridFn) -> GridFn {
    let bx = f.grid().clone();
    let raw = f.raw();
    if raw.iter().all(|v| !v.is_finite()) {
        return f.clone();
    }
    let shape = bx.resolution.clone();
    let strides = bx.strides();
    let axes: Vec<usize> = bx.free_entries();
    let mut xs_per = Vec::new();
    let mut ss_per = Vec::new();
    for &e in &axes {
        let r = shape[e];
        let h = bx.step(e);
        let half = ((r - 1) / 2) as f64;
        xs_per.push((0..r).map(|i| (i as f64 - half) * h).collect::<Vec<f64>>());
        let mut l = 0.0f64;
        for (idx, v) in raw.iter().enumerate() {
            let i = (idx / strides[e]) % r;
            if i + 1 < r {
                let w = raw[idx + strides[e]];
                if v.is_finite() && w.is_finite() {
                    l = l.max((w - v).abs() / h);
                }
            }
        }
        let ss: Vec<f64> = if l > 0.0 {
            let k = r as i64;
            (-k..=k).map(|j| l * j as f64 / k as f64).collect()
        } else {
            vec![0.0]
        };
        ss_per.push(ss);
    }
    // Forward: f*(s) = max_x (s.x - f(x)).
    let mut a: Vec<f64> = raw.iter().map(|v| if v.is_finite() { -v } else { f64::NEG_INFINITY }).collect();
    let mut sh = shape.clone();
    for (k, &e) in axes.iter().enumerate() {
        let (na, ns) = transform_axis(&a, &sh, e, &xs_per[k], &ss_per[k]);
        a = na;
        sh = ns;
    }
    // Backward: f**(x) = max_s (x.s - f*(s)).
    let mut b: Vec<f64> = a.iter().map(|v| -v).collect();
    for (k, &e) in axes.iter().enumerate() {
        let (nb, ns) = transform_axis(&b, &sh, e, &ss_per[k], &xs_per[k]);
        b = nb;
        sh = ns;
    }
    let out: Vec<f64> = b.iter().zip(&raw).map(|(c, w)| c.min(*w).max(0.0)).collect();
    GridFn::from_raw(bx, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{check_rank_one_convexity, rank_one_envelope};
    use crate::extreal::ExtReal;
    use crate::integrand::IntegrandSpec;
    use crate::matspace::{directions_for_box, Mat, MatBox};

    fn bx(res: usize) -> MatBox {
        MatBox::uniform(Mat::zeros(2, 2), 2.0, res).unwrap()
    }

    #[test]
    fn quad_is_fixed() {
        let q = IntegrandSpec::quad(Mat::from_rows(&[&[0.3, -0.2], &[0.1, 0.5]]), 0.7).unwrap();
        let g = GridFn::sample(&q, &bx(9)).unwrap();
        let c = convex_lower(&g);
        for (a, b) in c.values().iter().zip(g.values()) {
            assert!((a.value() - b.value()).abs() < 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn double_well_midpoint() {
        let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap();
        let c = convex_lower(&GridFn::sample(&dw, &bx(9)).unwrap());
        assert!(c.at(&Mat::zeros(2, 2)).unwrap().value() < 1e-12);
    }

    #[test]
    fn kohn_strang_lower_than_lamination() {
        let ks = IntegrandSpec::kohn_strang(2, 2).unwrap();
        let b = bx(9);
        let dirs = directions_for_box(&b, 12).unwrap();
        let (lam, _) = rank_one_envelope(&ks, &b, &dirs, 1e-9, 200).unwrap();
        let c = convex_lower(&GridFn::sample(&ks, &b).unwrap());
        let f = Mat::diag(&[0.5, 0.0]);
        assert!(c.at(&f).unwrap() <= lam.at(&f).unwrap());
        for (x, y) in c.values().iter().zip(lam.values()) {
            assert!(x.value() <= y.value() + 1e-12);
        }
        assert!(check_rank_one_convexity(&c, &dirs, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn infinite_input_stays_infinite() {
        let b = bx(3);
        let g = GridFn::new(b.clone(), vec![ExtReal::INFINITY; b.point_count()]).unwrap();
        assert_eq!(convex_lower(&g), g);
    }

    #[test]
    fn slices_only_transform_free_axes() {
        let b = MatBox::slice(Mat::diag(&[0.0, 1.0]), &[0, 1], 2.0, 9).unwrap();
        let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap();
        let c = convex_lower(&GridFn::sample(&dw, &b).unwrap());
        // On the slice F22 = 1 the wells are at distance 1: value 1 at F11 = 0.
        assert!((c.at(&Mat::diag(&[0.0, 1.0])).unwrap().value() - 1.0).abs() < 1e-9);
    }
}
