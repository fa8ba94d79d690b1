use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{thin_film_energy, AnsatzField, Corrector, PlanarField};
use super::ThinFilmConfig;
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::integrand::Integrand;
use crate::matspace::{halton, Mat};
use crate::reduction::{membrane_energy, membrane_params, FiberSearch, ReducedIntegrand};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeParams {
    /// Corrector frequencies, searched in order; `0` means no corrector.
    pub kappas: Vec<u32>,
    /// Planar axes tried for the corrector.
    pub axes: Vec<usize>,
    /// Perturbed starts on top of the deterministic seeds.
    pub restarts: usize,
    /// Coordinate-descent sweeps per start.
    pub iters: usize,
    /// Width of the ramp that switches the corrector off near the boundary.
    pub window: f64,
    pub search: FiberSearch,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams { kappas: vec![0, 1, 2, 4], axes: vec![0, 1], restarts: 4, iters: 200, window: 0.125, search: FiberSearch::default() }
    }
}

/// One thickness and one frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub eps: f64,
    pub kappa: u32,
    /// Corrector axis of the best field at this frequency.
    pub axis: Option<usize>,
    /// Best energy at this frequency alone.
    pub energy: ExtReal,
    /// Best energy over this and all earlier frequencies.
    pub best: ExtReal,
    /// `best - target`; `None` when either is infinite.
    pub gap: Option<f64>,
    /// Search parameters of the best field: director offset, corrector
    /// amplitude, director oscillation.
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Cell quadrature of the membrane upper bounds at the gradients of psi.
    pub target: ExtReal,
    /// Same quadrature with the membrane lower bounds.
    pub target_lower: ExtReal,
    pub rows: Vec<ProbeRow>,
    /// Per thickness, the best energy over every frequency.
    pub best: Vec<ExtReal>,
    pub gaps: Vec<Option<f64>>,
    /// Whether `best` never increased along the frequency list.
    pub monotone: bool,
}

impl ProbeResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,kappa,energy,best,target,gap\n");
        for r in &self.rows {
            let gap = r.gap.map_or("inf".to_string(), |g| format!("{g:e}"));
            s.push_str(&format!(
                "{:e},{},{},{},{},{}\n",
                r.eps,
                r.kappa,
                r.energy.to_text(),
                r.best.to_text(),
                self.target.to_text(),
                gap
            ));
        }
        s
    }

    /// Row at thickness `eps` and frequency `kappa`.
    pub fn row(&self, eps: f64, kappa: u32) -> Option<&ProbeRow> {
        self.rows.iter().find(|r| r.eps == eps && r.kappa == kappa)
    }
}

const DIM: usize = 9;
const STEP0: f64 = 0.25;
const STEP_MAX: f64 = 2.0;
const STEP_FLOOR: f64 = 1e-9;

/// Searches Kirchhoff-Love fields with an oscillating corrector for the
/// least thin-film energy at each thickness. The planar field `psi` is kept
/// fixed; the director starts from the optimal third column of each cell.
pub fn gamma_probe<W>(w: &W, psi: &PlanarField, cfg: &ThinFilmConfig, params: &ProbeParams) -> Result<ProbeResult>
where
    W: Integrand + Clone,
{
    cfg.validate()?;
    if w.dims() != (3, 3) {
        let (m, n) = w.dims();
        return Err(Error::Shape { expected: "3x3".into(), got: format!("{m}x{n}") });
    }
    if psi.cells != cfg.cells {
        return Err(invalid("planar field and config disagree on the cell count"));
    }
    if params.kappas.is_empty() || params.axes.iter().any(|a| *a > 1) || params.axes.is_empty() {
        return Err(invalid("need frequencies and axes in {0, 1}"));
    }
    if !(params.window > 0.0 && params.window <= 0.5) {
        return Err(invalid("window must lie in (0, 1/2]"));
    }

    let (target, target_lower, mean_report) = membrane_target(w, psi, cfg, &params.search)?;
    let red = ReducedIntegrand::new(w.clone(), params.search.clone())?;
    let base = base_director(&red, psi)?;
    let seed = laminate_seed(&red, mean_report.as_ref(), &base[0])?;

    let per_eps: Vec<Vec<ProbeRow>> = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let mut rows = Vec::new();
            let mut best = ExtReal::INFINITY;
            let mut prev: Option<Vec<f64>> = None;
            for &kappa in &params.kappas {
                let axes: Vec<Option<usize>> =
                    if kappa == 0 { vec![None] } else { params.axes.iter().map(|a| Some(*a)).collect() };
                let mut here: Option<(ExtReal, Option<usize>, Vec<f64>)> = None;
                for axis in axes {
                    let mut seeds = vec![vec![0.0; DIM]];
                    if let Some((ax, s)) = &seed {
                        if axis == Some(*ax) || kappa == 0 {
                            seeds.push(s.clone());
                        }
                    }
                    if let Some(p) = &prev {
                        seeds.push(p.clone());
                    }
                    let active = if kappa == 0 { 3 } else { DIM };
                    let objective = |x: &[f64]| -> Result<ExtReal> {
                        let field = build_field(psi, &base, x, kappa, axis, params.window)?;
                        thin_film_energy(w, &field, eps, cfg)
                    };
                    let (v, x) = multistart(&objective, &seeds, active, params.restarts, params.iters)?;
                    if here.as_ref().is_none_or(|(b, _, _)| v < *b) {
                        here = Some((v, axis, x));
                    }
                }
                let (energy, axis, x) = here.expect("at least one axis");
                if energy < best || prev.is_none() {
                    best = best.min(energy);
                    prev = Some(x.clone());
                }
                let gap = if best.is_finite() && target.is_finite() { Some(best.value() - target.value()) } else { None };
                rows.push(ProbeRow { eps, kappa, axis, energy, best, gap, params: x });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut monotone = true;
    let mut best = Vec::new();
    let mut gaps = Vec::new();
    for rows in &per_eps {
        monotone &= rows.windows(2).all(|r| r[1].best <= r[0].best);
        let last = rows.last().expect("nonempty frequency list");
        best.push(last.best);
        gaps.push(last.gap);
    }
    Ok(ProbeResult { target, target_lower, rows: per_eps.into_iter().flatten().collect(), best, gaps, monotone })
}

type Target = (ExtReal, ExtReal, Option<crate::envelope::EnvelopeReport>);

// Quadrature over cells of the membrane bracket, one bracket per distinct
// gradient. Also returns the report at the mean gradient, for seeding.
fn membrane_target<W: Integrand + Clone>(
    w: &W,
    psi: &PlanarField,
    cfg: &ThinFilmConfig,
    search: &FiberSearch,
) -> Result<Target> {
    let n = cfg.cells;
    let mut grads: BTreeMap<Vec<i64>, (Mat, usize)> = BTreeMap::new();
    let mut mean = Mat::zeros(3, 2);
    for j in 0..n {
        for i in 0..n {
            let g = psi.cell_gradient(i, j);
            mean = mean.axpy(cfg.cell_area(), &g);
            let key: Vec<i64> = g.as_slice().iter().map(|v| (v / 1e-9).round() as i64).collect();
            grads.entry(key).or_insert((g, 0)).1 += 1;
        }
    }
    let entries: Vec<(Mat, usize)> = grads.into_values().collect();
    let reports = entries
        .par_iter()
        .map(|(g, _)| membrane_energy(w.clone(), g, &membrane_params(g)?, search))
        .collect::<Result<Vec<_>>>()?;
    let mut upper = ExtReal::ZERO;
    let mut lower = ExtReal::ZERO;
    for ((_, count), r) in entries.iter().zip(&reports) {
        let wt = *count as f64 * cfg.cell_area();
        upper = upper + r.upper * wt;
        lower = lower + r.lower * wt;
    }
    let mean_report = if entries.len() == 1 {
        reports.into_iter().next()
    } else {
        Some(membrane_energy(w.clone(), &mean, &membrane_params(&mean)?, search)?)
    };
    Ok((upper, lower, mean_report))
}

// Optimal third column at each node, from the gradients of the adjacent
// cells; nodes whose fiber is entirely infinite get zero.
fn base_director<W: Integrand>(red: &ReducedIntegrand<W>, psi: &PlanarField) -> Result<Vec<[f64; 3]>> {
    let n = psi.cells;
    let mut cell_zeta = vec![None; n * n];
    for j in 0..n {
        for i in 0..n {
            cell_zeta[j * n + i] = red.value_argmin(&psi.cell_gradient(i, j))?.1;
        }
    }
    let mut out = vec![[0.0; 3]; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            let mut acc = [0.0; 3];
            let mut count = 0.0;
            for (ci, cj) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)] {
                if ci < n && cj < n {
                    if let Some(z) = cell_zeta[cj * n + ci] {
                        for r in 0..3 {
                            acc[r] += z[r];
                        }
                        count += 1.0;
                    }
                }
            }
            if count > 0.0 {
                out[j * (n + 1) + i] = [acc[0] / count, acc[1] / count, acc[2] / count];
            }
        }
    }
    Ok(out)
}

// Corrector parameters that reproduce the two phases of the membrane
// laminate, when its normal is a coordinate axis.
fn laminate_seed<W: Integrand>(
    red: &ReducedIntegrand<W>,
    report: Option<&crate::envelope::EnvelopeReport>,
    base: &[f64; 3],
) -> Result<Option<(usize, Vec<f64>)>> {
    let Some(lam) = report.and_then(|r| r.laminate.as_ref()) else {
        return Ok(None);
    };
    let b = &lam.direction.b_int;
    let axis = match (b[0] != 0, b[1] != 0) {
        (true, false) => 0,
        (false, true) => 1,
        _ => return Ok(None),
    };
    let (Some(zp), Some(zm)) = (red.value_argmin(&lam.plus)?.1, red.value_argmin(&lam.minus)?.1) else {
        return Ok(None);
    };
    let mut x = vec![0.0; DIM];
    for r in 0..3 {
        x[r] = 0.5 * (zp[r] + zm[r]) - base[r];
        x[3 + r] = 0.5 * (lam.plus.get(r, axis) - lam.minus.get(r, axis));
        x[6 + r] = 0.5 * (zp[r] - zm[r]);
    }
    Ok(Some((axis, x)))
}

fn build_field(
    psi: &PlanarField,
    base: &[[f64; 3]],
    x: &[f64],
    kappa: u32,
    axis: Option<usize>,
    window: f64,
) -> Result<AnsatzField> {
    let director: Vec<[f64; 3]> = base.iter().map(|d| [d[0] + x[0], d[1] + x[1], d[2] + x[2]]).collect();
    let corrector = match axis {
        Some(axis) if kappa > 0 => {
            let n = psi.cells;
            let h = 1.0 / n as f64;
            let mut amplitude = Vec::with_capacity(base.len());
            let mut osc = Vec::with_capacity(base.len());
            for j in 0..=n {
                for i in 0..=n {
                    let s = if axis == 0 { j } else { i } as f64 * h;
                    let wt = (s / window).min((1.0 - s) / window).clamp(0.0, 1.0);
                    amplitude.push([wt * x[3], wt * x[4], wt * x[5]]);
                    osc.push([wt * x[6], wt * x[7], wt * x[8]]);
                }
            }
            Some(Corrector { kappa, axis, amplitude, director: osc })
        }
        _ => None,
    };
    AnsatzField::new(psi.clone(), director, corrector)
}

// Deterministic seeds, then Halton perturbations of the first informative
// seed. Only the leading `active` coordinates move.
fn multistart<F>(f: &F, seeds: &[Vec<f64>], active: usize, restarts: usize, iters: usize) -> Result<(ExtReal, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<ExtReal> + Sync,
{
    let center = seeds.get(1).unwrap_or(&seeds[0]).clone();
    let mut starts: Vec<Vec<f64>> = seeds.to_vec();
    for r in 0..restarts {
        let mut x = center.clone();
        for (c, v) in x.iter_mut().enumerate().take(active) {
            *v += 0.5 * (2.0 * halton(r as u64 + 1, c) - 1.0);
        }
        starts.push(x);
    }
    let results = starts.par_iter().map(|x| descend(f, x.clone(), active, iters)).collect::<Result<Vec<_>>>()?;
    let mut best: Option<(ExtReal, Vec<f64>)> = None;
    for (v, x) in results {
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, x));
        }
    }
    Ok(best.expect("at least one start"))
}

fn descend<F>(f: &F, mut x: Vec<f64>, active: usize, iters: usize) -> Result<(ExtReal, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<ExtReal>,
{
    let mut val = f(&x)?;
    let mut steps = vec![STEP0; active];
    for _ in 0..iters {
        if steps.iter().all(|s| *s < STEP_FLOOR) {
            break;
        }
        for c in 0..active {
            if steps[c] < STEP_FLOOR {
                continue;
            }
            let mut moved = false;
            for sign in [1.0, -1.0] {
                let mut t = x.clone();
                t[c] += sign * steps[c];
                let v = f(&t)?;
                if v < val {
                    val = v;
                    x = t;
                    moved = true;
                    break;
                }
            }
            steps[c] = if moved { (2.0 * steps[c]).min(STEP_MAX) } else { 0.5 * steps[c] };
        }
    }
    Ok((val, x))
}
