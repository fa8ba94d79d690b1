use crate::error::{invalid, Result};
use crate::extreal::ExtReal;

/// Lower convex envelope of the finite points of `(xs, vs)`, evaluated at
/// every `xs[i]`. Infinite nodes take no part in the construction; nodes
/// outside the hull of the finite ones stay infinite.
pub fn hull_1d(xs: &[f64], vs: &[ExtReal]) -> Result<Vec<ExtReal>> {
    if xs.len() != vs.len() {
        return Err(invalid("xs and vs differ in length"));
    }
    if xs.len() < 2 {
        return Err(invalid("hull_1d needs at least two nodes"));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("xs must be strictly increasing"));
    }
    let mut v: Vec<f64> = vs.iter().map(|x| x.value()).collect();
    let mut scratch = Vec::with_capacity(v.len());
    lower_hull_in_place(xs, &mut v, &mut scratch);
    Ok(v.into_iter().map(ExtReal::saturating).collect())
}

/// Replaces `v` by its lower convex envelope over the finite entries
/// (`f64::INFINITY` marks `+inf`). Output never exceeds input.
pub(crate) fn lower_hull_in_place(xs: &[f64], v: &mut [f64], hull: &mut Vec<usize>) {
    hull.clear();
    for i in 0..v.len() {
        if !v[i].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or above the chord a -> i.
            let cross = (xs[b] - xs[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.len() < 2 {
        return;
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (va, vb) = (v[a], v[b]);
        let span = xs[b] - xs[a];
        for j in a + 1..b {
            let c = va + (vb - va) * ((xs[j] - xs[a]) / span);
            if c < v[j] {
                v[j] = c;
            }
        }
    }
}

/// Unit-spaced variant used along grid chains.
pub(crate) fn lower_hull_unit(v: &mut [f64], hull: &mut Vec<usize>) {
    hull.clear();
    for i in 0..v.len() {
        if !v[i].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b - a) as f64 * (v[i] - v[a]) - (v[b] - v[a]) * (i - a) as f64;
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.len() < 2 {
        return;
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (va, vb) = (v[a], v[b]);
        let span = (b - a) as f64;
        for j in a + 1..b {
            let c = va + (vb - va) * ((j - a) as f64 / span);
            if c < v[j] {
                v[j] = c;
            }
        }
    }
}
