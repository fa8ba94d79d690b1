//! Sample-based certificates for coercivity, growth and constraint classes.
//! A verdict of `holds-on-sample` is evidence on the recorded sample only.

use super::{ConstraintClass, Integrand};
use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::matspace::{cross_3x2, det_square, frob_sq, halton_point, Mat, MatBox};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Safety margin applied to fitted constants, reported next to the raw fit.
pub const MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnSample,
    FailsWithWitness,
    /// An upper-bound estimator returned `+inf`; the true value may be finite.
    InconclusiveInfinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub predicate: String,
    pub verdict: Verdict,
    pub witness: Option<Mat>,
    pub witness_value: Option<ExtReal>,
    pub class: Option<ConstraintClass>,
    /// Raw fitted constants.
    pub constants: BTreeMap<String, ExtReal>,
    /// The same constants with the safety margin applied.
    pub margined: BTreeMap<String, ExtReal>,
    pub sample_box: MatBox,
    /// Points evaluated.
    pub samples: usize,
    /// Points inside the hypothesis set of the predicate.
    pub considered: usize,
}

impl PredicateReport {
    pub(crate) fn new(predicate: &str, bx: &MatBox) -> PredicateReport {
        PredicateReport {
            predicate: predicate.to_string(),
            verdict: Verdict::HoldsOnSample,
            witness: None,
            witness_value: None,
            class: None,
            constants: BTreeMap::new(),
            margined: BTreeMap::new(),
            sample_box: bx.clone(),
            samples: 0,
            considered: 0,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnSample
    }

    pub(crate) fn fail(&mut self, witness: Mat, value: ExtReal) {
        self.verdict = Verdict::FailsWithWitness;
        self.witness = Some(witness);
        self.witness_value = Some(value);
    }

    /// Records a fitted upper-type constant (margin raises it).
    pub(crate) fn upper_constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), ExtReal::saturating(v));
        self.margined.insert(name.into(), ExtReal::saturating(v * (1.0 + MARGIN)));
    }

    /// Records a fitted lower-type constant (margin lowers it).
    pub(crate) fn lower_constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), ExtReal::saturating(v));
        self.margined.insert(name.into(), ExtReal::saturating(v * (1.0 - MARGIN)));
    }
}

/// `count` low-discrepancy points in `bx`; frozen entries stay at the center.
pub fn sample_points(bx: &MatBox, count: usize) -> Vec<Mat> {
    let free = bx.free_entries();
    (0..count as u64)
        .map(|i| {
            let u = halton_point(i, free.len(), 0);
            let mut f = bx.center.clone();
            for (k, &e) in free.iter().enumerate() {
                let c = bx.center.as_slice()[e];
                f.as_mut_slice()[e] = c + (2.0 * u[k] - 1.0) * bx.half_widths[e];
            }
            f
        })
        .collect()
}

fn in_box(bx: &MatBox, f: &Mat) -> bool {
    bx.contains(f)
}

/// Square matrices with prescribed determinants on a 0.05 grid, made by
/// solving for entry (0,0); only those inside `bx` are kept.
fn det_probes(bx: &MatBox) -> Vec<Mat> {
    let (m, n) = bx.dims();
    if m != n || !bx.is_free(0) {
        return Vec::new();
    }
    let bases = sample_points(bx, 24);
    let mut out = Vec::new();
    for base in bases {
        let x = base.as_slice();
        let mut zeroed = x.to_vec();
        zeroed[0] = 0.0;
        let rest = det_square(&zeroed, n);
        let minor: Vec<f64> = (1..n).flat_map(|i| (1..n).map(move |j| (i, j))).map(|(i, j)| x[i * n + j]).collect();
        let cof = if n == 1 { 1.0 } else { det_square(&minor, n - 1) };
        if cof.abs() < 1e-3 {
            continue;
        }
        for k in -60i32..=60 {
            let t = k as f64 * 0.05;
            let mut f = base.clone();
            f.as_mut_slice()[0] = (t - rest) / cof;
            if in_box(bx, &f) {
                out.push(f);
            }
        }
    }
    out
}

/// 3x2 matrices with parallel columns (exact: power-of-two multiples).
fn parallel_probes(bx: &MatBox) -> Vec<Mat> {
    if bx.dims() != (3, 2) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for base in sample_points(bx, 24) {
        for lam in [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0] {
            let mut f = base.clone();
            for i in 0..3 {
                let v = f.get(i, 0) * lam;
                f.set(i, 1, v);
            }
            if in_box(bx, &f) {
                out.push(f);
            }
        }
    }
    out
}

fn evaluate<W: Integrand + ?Sized>(w: &W, pts: &[Mat]) -> Result<Vec<ExtReal>> {
    pts.par_iter().map(|f| w.eval(f)).collect()
}

fn det_of(f: &Mat) -> f64 {
    det_square(f.as_slice(), f.rows())
}

fn cross_norm(f: &Mat) -> f64 {
    let c = cross_3x2(f.as_slice());
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

fn pow_norm(f: &Mat, p: f64) -> f64 {
    frob_sq(f).powf(p / 2.0)
}

/// Largest `C` with `W(F) >= C |F|^p` on the sample; fails where
/// `W(F) < 1e-12 |F|^p`.
pub fn check_coercivity<W: Integrand + ?Sized>(w: &W, bx: &MatBox, samples: usize) -> Result<PredicateReport> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    let mut pts = vec![bx.center.clone()];
    pts.extend(sample_points(bx, samples));
    let vals = evaluate(w, &pts)?;
    let p = w.p();
    let mut rep = PredicateReport::new("coercivity", bx);
    rep.samples = pts.len();
    let mut c = f64::INFINITY;
    for (f, v) in pts.iter().zip(&vals) {
        let np = pow_norm(f, p);
        if np == 0.0 {
            continue;
        }
        rep.considered += 1;
        let ratio = v.value() / np;
        if v.value() < 1e-12 * np && rep.witness.is_none() {
            rep.fail(f.clone(), *v);
        }
        c = c.min(ratio);
    }
    rep.lower_constant("C", if c.is_finite() { c } else { f64::INFINITY });
    Ok(rep)
}

/// Matches the sampled infinity set against the candidate classes.
pub fn classify_constraint<W: Integrand + ?Sized>(w: &W, bx: &MatBox, samples: usize) -> Result<PredicateReport> {
    let (m, n) = w.dims();
    let mut pts = sample_points(bx, samples);
    pts.extend(det_probes(bx));
    pts.extend(parallel_probes(bx));
    let vals = evaluate(w, &pts)?;
    let mut rep = PredicateReport::new("constraint-class", bx);
    rep.samples = pts.len();
    rep.considered = pts.len();
    let inf: Vec<bool> = vals.iter().map(|v| v.is_infinite()).collect();

    if !inf.iter().any(|b| *b) {
        rep.class = Some(ConstraintClass::Finite);
        return Ok(rep);
    }
    if m == n {
        let dets: Vec<f64> = pts.iter().map(det_of).collect();
        if dets.iter().zip(&inf).all(|(d, i)| (*d <= 0.0) == *i) {
            rep.class = Some(ConstraintClass::StrongDc);
            return Ok(rep);
        }
        // w-DC: infinite exactly on a band [-delta, 0].
        let consistent = dets.iter().zip(&inf).all(|(d, i)| if *d > 0.0 { !i } else if *d == 0.0 { *i } else { true });
        let lo = dets.iter().zip(&inf).filter(|(d, i)| **i && **d < 0.0).map(|(d, _)| -d).fold(0.0f64, f64::max);
        let hi = dets.iter().zip(&inf).filter(|(d, i)| !**i && **d < 0.0).map(|(d, _)| -d).fold(f64::INFINITY, f64::min);
        if consistent && lo < hi && hi.is_finite() {
            let delta = 0.5 * (lo + hi);
            rep.class = Some(ConstraintClass::WeakDc(delta));
            rep.constants.insert("delta".into(), ExtReal::finite(delta));
            rep.constants.insert("delta_lo".into(), ExtReal::finite(lo));
            rep.constants.insert("delta_hi".into(), ExtReal::finite(hi));
            return Ok(rep);
        }
        let k = dets.iter().zip(&inf).position(|(d, i)| (*d <= 0.0) != *i).unwrap_or(0);
        rep.fail(pts[k].clone(), vals[k]);
        return Ok(rep);
    }
    if (m, n) == (3, 2) {
        let crosses: Vec<f64> = pts.iter().map(cross_norm).collect();
        if crosses.iter().zip(&inf).all(|(c, i)| (*c == 0.0) == *i) {
            rep.class = Some(ConstraintClass::Cpc);
            return Ok(rep);
        }
        let k = crosses.iter().zip(&inf).position(|(c, i)| (*c == 0.0) != *i).unwrap_or(0);
        rep.fail(pts[k].clone(), vals[k]);
        return Ok(rep);
    }
    let k = inf.iter().position(|b| *b).unwrap_or(0);
    rep.fail(pts[k].clone(), vals[k]);
    Ok(rep)
}

/// Shared fit for the growth-type predicates: on the points selected by
/// `keep`, `W` must be finite, and `beta = max W / (1 + |F|^p)`.
fn growth_fit<W: Integrand + ?Sized>(
    w: &W,
    name: &str,
    param: (&str, f64),
    p: f64,
    bx: &MatBox,
    pts: Vec<Mat>,
    keep: impl Fn(&Mat) -> bool,
) -> Result<PredicateReport> {
    let pts: Vec<Mat> = pts.into_iter().filter(|f| keep(f)).collect();
    let vals = evaluate(w, &pts)?;
    let mut rep = PredicateReport::new(name, bx);
    rep.samples = pts.len();
    rep.considered = pts.len();
    rep.constants.insert(param.0.into(), ExtReal::saturating(param.1));
    rep.margined.insert(param.0.into(), ExtReal::saturating(param.1));
    let mut beta = 0.0f64;
    for (f, v) in pts.iter().zip(&vals) {
        if v.is_infinite() {
            rep.fail(f.clone(), *v);
            break;
        }
        beta = beta.max(v.value() / (1.0 + pow_norm(f, p)));
    }
    if rep.holds() {
        rep.upper_constant("beta", beta);
    }
    Ok(rep)
}

fn growth_points(bx: &MatBox, samples: usize) -> Vec<Mat> {
    let mut pts = sample_points(bx, samples);
    pts.extend(det_probes(bx));
    pts
}

fn require_square<W: Integrand + ?Sized>(w: &W) -> Result<()> {
    let (m, n) = w.dims();
    if m != n {
        return Err(invalid(format!("predicate needs square dimensions, got {m}x{n}")));
    }
    Ok(())
}

/// `|det F| >= alpha  =>  W(F) <= beta (1 + |F|^p)`.
pub fn check_growth_d<W: Integrand + ?Sized>(w: &W, alpha: f64, p: f64, bx: &MatBox, samples: usize) -> Result<PredicateReport> {
    require_square(w)?;
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    growth_fit(w, "growth-D", ("alpha", alpha), p, bx, growth_points(bx, samples), |f| det_of(f).abs() >= alpha)
}

/// `|xi_1 x xi_2| >= alpha  =>  W0(xi) <= beta (1 + |xi|^p)` on 3x2 matrices.
pub fn check_growth_p<W: Integrand + ?Sized>(w: &W, alpha: f64, p: f64, bx: &MatBox, samples: usize) -> Result<PredicateReport> {
    if w.dims() != (3, 2) {
        return Err(invalid("growth-P needs a 3x2 integrand"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    growth_fit(w, "growth-P", ("alpha", alpha), p, bx, sample_points(bx, samples), |f| cross_norm(f) >= alpha)
}

/// `det F >= delta  =>  W(F) <= c_delta (1 + |F|^p)`.
pub fn check_growth_d2<W: Integrand + ?Sized>(w: &W, delta: f64, p: f64, bx: &MatBox, samples: usize) -> Result<PredicateReport> {
    require_square(w)?;
    if !(delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    let mut rep = growth_fit(w, "growth-D2", ("delta", delta), p, bx, growth_points(bx, samples), |f| det_of(f) >= delta)?;
    if let Some(b) = rep.constants.remove("beta") {
        rep.constants.insert("c_delta".into(), b);
        let mb = rep.margined.remove("beta").unwrap_or(b);
        rep.margined.insert("c_delta".into(), mb);
    }
    Ok(rep)
}
