use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::RunConfig;
use super::{Command, Outcome};
use crate::envelope::{Bracketer, EnvelopeParams, EnvelopeReport, ZParams};
use crate::error::{invalid, Error, Result};
use crate::gamma::{gamma_probe, PlanarField};
use crate::integrand::{self, Integrand, IntegrandSpec, PredicateReport, Verdict};
use crate::matspace::{Mat, MatBox};
use crate::oracle;
use crate::reduction::{membrane_energy, reduce_w0_argmin};

pub(super) fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Envelope => envelope(cfg),
        Command::Reduce => reduce(cfg),
        Command::Membrane => membrane(cfg),
        Command::GammaProbe => gamma(cfg),
        Command::Check => check(cfg),
        Command::OracleFixtures => fixtures(cfg),
    }
}

pub(super) fn integrand_summary(cfg: &RunConfig) -> Value {
    let Some(section) = &cfg.integrand else {
        return Value::Null;
    };
    let mut v = serde_json::to_value(section).unwrap_or(Value::Null);
    if let (Value::Object(map), Ok(spec)) = (&mut v, section.build()) {
        map.insert("class_hint".into(), json!(spec.class_hint().map(|c| c.label())));
    }
    v
}

fn integrand(cfg: &RunConfig) -> Result<IntegrandSpec> {
    cfg.integrand.as_ref().ok_or_else(|| Error::Config("this command needs an [integrand] table".into()))?.build()
}

fn integrand_3x3(cfg: &RunConfig) -> Result<IntegrandSpec> {
    let w = integrand(cfg)?;
    if w.dims() != (3, 3) {
        return Err(Error::Config("this command needs a 3x3 integrand".into()));
    }
    Ok(w)
}

fn matrix(v: &[f64], m: usize, n: usize, what: &str) -> Result<Mat> {
    if v.is_empty() {
        return Ok(Mat::zeros(m, n));
    }
    Mat::new(m, n, v.to_vec()).map_err(|_| Error::Config(format!("{what} needs {} entries", m * n)))
}

fn object<T: Serialize>(t: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(t).map_err(|e| Error::Internal(e.to_string()))? {
        Value::Object(m) => Ok(m),
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            Ok(m)
        }
    }
}

fn entry_names(m: usize, n: usize) -> Vec<String> {
    (0..m).flat_map(|i| (0..n).map(move |j| format!("f{}{}", i + 1, j + 1))).collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn bracket_lines(r: &EnvelopeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "query       {}", join(r.query.as_slice()));
    let _ = writeln!(s, "W           {}", r.w_value);
    let _ = writeln!(s, "lamination  {}", r.lamination);
    let _ = writeln!(s, "one-cell    {}", r.z);
    let _ = writeln!(s, "upper       {}", r.upper);
    let _ = writeln!(s, "lower       {}", r.lower);
    let _ = writeln!(s, "width       {}", r.width());
    let _ = writeln!(s, "sweeps      {} (converged: {})", r.iterations, r.converged);
    if let Some(l) = &r.laminate {
        let _ = writeln!(s, "laminate    t={} between {} and {}", l.t, join(l.minus.as_slice()), join(l.plus.as_slice()));
    }
    s
}

fn envelope(cfg: &RunConfig) -> Result<Outcome> {
    let w = integrand(cfg)?;
    let (m, n) = w.dims();
    let s = &cfg.envelope;
    let query = matrix(&s.query, m, n, "envelope.query")?;
    let center = if s.center.is_empty() { query.clone() } else { matrix(&s.center, m, n, "envelope.center")? };
    let mut p = EnvelopeParams::around(center.clone())?;
    let res = if s.resolution == 0 { p.grid.resolution[0] } else { s.resolution };
    p.grid = MatBox::uniform(center, s.half_width, res)?;
    p.directions = s.directions;
    p.tol = s.tol;
    p.max_iter = s.max_iter;
    p.mesh_k = s.mesh_k;
    p.restarts = s.restarts;
    p.iters = s.iters;
    if !p.grid.contains(&query) {
        return Err(invalid("envelope.query lies outside the grid box"));
    }
    if p.grid.locate(&query).is_none() {
        p.grid = MatBox::new(query.clone(), p.grid.half_widths.clone(), p.grid.resolution.clone())?;
    }
    let b = Bracketer::new(&w, p)?;
    let r = b.bracket(&query)?;

    let bx = b.sampled().grid();
    let mut grid_csv = entry_names(m, n).join(",") + ",w,envelope,lower\n";
    for idx in 0..bx.point_count() {
        let f = bx.point(idx);
        let _ = writeln!(
            grid_csv,
            "{},{},{},{}",
            join(f.as_slice()),
            b.sampled().values()[idx].to_text(),
            b.envelope().values()[idx].to_text(),
            b.lower().values()[idx].to_text()
        );
    }
    let mut sweeps = String::from("sweep,change\n");
    for (k, c) in r.sweep_changes.iter().enumerate() {
        let _ = writeln!(sweeps, "{},{c:e}", k + 1);
    }
    let mut fields = object(&r)?;
    fields.insert("width".into(), json!(r.width()));
    Ok(Outcome {
        fields,
        csv: vec![("envelope.csv".into(), grid_csv), ("sweeps.csv".into(), sweeps)],
        report: format!("envelope bracket\n{}", bracket_lines(&r)),
        failed: None,
    })
}

fn reduce(cfg: &RunConfig) -> Result<Outcome> {
    let w = integrand_3x3(cfg)?;
    let s = &cfg.reduce;
    let xi = matrix(&s.xi, 3, 2, "reduce.xi")?;
    let (value, zeta) = reduce_w0_argmin(&w, &xi, &s.fiber.build()?)?;
    let mut fields = Map::new();
    fields.insert("xi".into(), json!(xi));
    fields.insert("value".into(), json!(value));
    fields.insert("zeta".into(), json!(zeta));
    let z = zeta.map_or(",,".to_string(), |z| join(&z));
    let csv = format!("{},w0,zeta1,zeta2,zeta3\n{},{},{}\n", entry_names(3, 2).join(","), join(xi.as_slice()), value.to_text(), z);
    let report = format!("fiber reduction\nxi     {}\nW0     {}\nzeta   {}\n", join(xi.as_slice()), value, z);
    Ok(Outcome { fields, csv: vec![("reduce.csv".into(), csv)], report, failed: None })
}

fn membrane(cfg: &RunConfig) -> Result<Outcome> {
    let w = integrand_3x3(cfg)?;
    let s = &cfg.membrane;
    let xi = matrix(&s.xi, 3, 2, "membrane.xi")?;
    let mut p = EnvelopeParams::around(xi.clone())?;
    p.grid = MatBox::uniform(xi.clone(), s.half_width, s.resolution)?;
    p.directions = s.directions;
    p.tol = s.tol;
    p.max_iter = s.max_iter;
    p.mesh_k = s.mesh_k;
    p.restarts = s.restarts;
    p.iters = s.iters;
    let r = membrane_energy(w, &xi, &p, &s.fiber.build()?)?;
    let csv = format!(
        "{},w0,lamination,z,upper,lower\n{},{},{},{},{},{}\n",
        entry_names(3, 2).join(","),
        join(xi.as_slice()),
        r.w_value.to_text(),
        r.lamination.to_text(),
        r.z.to_text(),
        r.upper.to_text(),
        r.lower.to_text()
    );
    let mut fields = object(&r)?;
    fields.insert("width".into(), json!(r.width()));
    Ok(Outcome {
        fields,
        csv: vec![("membrane.csv".into(), csv)],
        report: format!("membrane bracket\n{}", bracket_lines(&r)),
        failed: None,
    })
}

fn gamma(cfg: &RunConfig) -> Result<Outcome> {
    let w = integrand_3x3(cfg)?;
    let s = &cfg.gamma_probe;
    let xi = matrix(&s.xi, 3, 2, "gamma-probe.xi")?;
    let tf = s.thin_film();
    tf.validate()?;
    let psi = PlanarField::affine(tf.cells, &xi)?;
    let r = gamma_probe(&w, &psi, &tf, &s.probe()?)?;
    let mut report = format!("thin-film probe, affine psi with gradient {}\ntarget {} (lower {})\n", join(xi.as_slice()), r.target, r.target_lower);
    for (e, (b, g)) in tf.eps.iter().zip(r.best.iter().zip(&r.gaps)) {
        let gap = g.map_or("inf".to_string(), |g| format!("{g:e}"));
        let _ = writeln!(report, "eps {e:<10} best {b:<24} gap {gap}");
    }
    let _ = writeln!(report, "best never increased along the frequency list: {}", r.monotone);
    let mut fields = object(&r)?;
    fields.insert("eps".into(), json!(tf.eps));
    Ok(Outcome { fields, csv: vec![("gamma.csv".into(), r.to_csv())], report, failed: None })
}

fn check(cfg: &RunConfig) -> Result<Outcome> {
    let w = integrand(cfg)?;
    let (m, n) = w.dims();
    let s = &cfg.check;
    let center = matrix(&s.center, m, n, "check.center")?;
    // Samples are drawn continuously; the grid only needs to fit the budget.
    let bx = MatBox::uniform(center, s.half_width, if m * n > 4 { 3 } else { 9 })?;
    let p = if s.p > 0.0 { s.p } else { w.p() };
    let mut reports: Vec<PredicateReport> = Vec::new();
    for name in &s.predicates {
        let r = match name.as_str() {
            "coercivity" => integrand::check_coercivity(&w, &bx, s.samples)?,
            "constraint-class" => integrand::classify_constraint(&w, &bx, s.samples)?,
            "growth-D" => integrand::check_growth_d(&w, s.alpha, p, &bx, s.samples)?,
            "growth-D2" => integrand::check_growth_d2(&w, s.delta, p, &bx, s.samples)?,
            "growth-P" => integrand::check_growth_p(&w, s.alpha, p, &bx, s.samples)?,
            "p-ample" => {
                let queries = integrand::sample_points(&bx, s.ample_points);
                let zp = ZParams { mesh_k: s.mesh_k, restarts: s.restarts, iters: s.iters };
                crate::envelope::p_ample_probe(&w, p, &bx, &queries, zp)?
            }
            other => return Err(Error::Config(format!("unknown predicate {other:?}"))),
        };
        reports.push(r);
    }
    let class = reports.iter().find_map(|r| r.class).or(w.class_hint());
    let failed = reports.iter().find(|r| r.verdict == Verdict::FailsWithWitness);
    let mut fields = Map::new();
    fields.insert("constraint_class".into(), json!(class.map(|c| c.label())));
    fields.insert("class".into(), json!(class));
    fields.insert("predicates".into(), serde_json::to_value(&reports).map_err(|e| Error::Internal(e.to_string()))?);
    let mut csv = String::from("predicate,verdict,constants,witness\n");
    let mut report = String::from("integrand checks\n");
    for r in &reports {
        let verdict = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let consts: Vec<String> = r.constants.iter().map(|(k, v)| format!("{k}={}", v.to_text())).collect();
        let witness = r.witness.as_ref().map_or(String::new(), |f| join(f.as_slice()));
        let _ = writeln!(csv, "{},{},{},\"{}\"", r.predicate, verdict, consts.join(" "), witness);
        let _ = writeln!(report, "{:<18} {:<22} {}", r.predicate, verdict, consts.join(" "));
    }
    let _ = writeln!(report, "constraint class: {}", class.map_or("unknown", |c| c.label()));
    let failed = failed.map(|r| {
        if let Some(f) = &r.witness {
            fields.insert("witness".into(), json!(f));
        }
        format!("{} fails", r.predicate)
    });
    Ok(Outcome { fields, csv: vec![("predicates.csv".into(), csv)], report, failed })
}

fn fixtures(cfg: &RunConfig) -> Result<Outcome> {
    let records = oracle::fixtures()?;
    let body = oracle::fixtures_json(&records)?;
    let mut fields = Map::new();
    fields.insert("records".into(), serde_json::to_value(&records).map_err(|e| Error::Internal(e.to_string()))?);
    let mut report = String::from("oracle fixtures\n");
    for r in &records {
        let _ = writeln!(report, "{:<18} {:<24} {}", r.name, r.operation, r.value);
    }
    let mut failed = None;
    let compare = &cfg.oracle_fixtures.compare;
    if compare.is_empty() {
        fields.insert("matches".into(), Value::Null);
    } else {
        let committed = std::fs::read_to_string(compare)?;
        let same = committed == body;
        fields.insert("matches".into(), json!(same));
        let _ = writeln!(report, "matches {compare}: {same}");
        if !same {
            failed = Some(format!("regenerated fixtures differ from {compare}"));
        }
    }
    let mut csv = String::from("name,operation,value\n");
    for r in &records {
        let _ = writeln!(csv, "{},{},{}", r.name, r.operation, r.value.to_text());
    }
    Ok(Outcome { fields, csv: vec![("oracle.json".into(), body), ("oracle.csv".into(), csv)], report, failed })
}
