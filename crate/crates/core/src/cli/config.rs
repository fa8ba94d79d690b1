//! Run configuration: TOML with one table per command. Unknown keys are
//! errors; every numeric field has a default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{ProbeParams, ThinFilmConfig};
use crate::integrand::{ConstraintClass, IntegrandSpec};
use crate::matspace::Mat;
use crate::reduction::FiberSearch;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Command the file was written for; must match the command line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Output directory, used when `--out` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand: Option<IntegrandSection>,
    #[serde(default)]
    pub envelope: EnvelopeSection,
    #[serde(default)]
    pub reduce: ReduceSection,
    #[serde(default)]
    pub membrane: MembraneSection,
    #[serde(default, rename = "gamma-probe")]
    pub gamma_probe: GammaSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default, rename = "oracle-fixtures")]
    pub oracle_fixtures: OracleSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSection {
    /// QUAD, DOUBLE_WELL, KOHN_STRANG, NEOHOOKEAN_SDC or WDC_CAPPED.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Expression in `F`, instead of a family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default = "dims_2x2")]
    pub dims: [usize; 2],
    #[serde(default = "two")]
    pub p: f64,
    /// QUAD centre, or the first DOUBLE_WELL well (row-major).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    /// Second DOUBLE_WELL well (row-major).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub c0: f64,
    /// WDC_CAPPED band width.
    #[serde(default = "delta_default")]
    pub delta: f64,
    /// Declared class of an expression integrand: finite, s-DC, cpc, or
    /// w-DC (with `delta`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

fn dims_2x2() -> [usize; 2] {
    [2, 2]
}
fn two() -> f64 {
    2.0
}
fn delta_default() -> f64 {
    0.3
}

impl IntegrandSection {
    pub fn build(&self) -> Result<IntegrandSpec> {
        let [m, n] = self.dims;
        let mat = |v: &Option<Vec<f64>>, what: &str| -> Result<Option<Mat>> {
            v.as_ref()
                .map(|d| Mat::new(m, n, d.clone()).map_err(|_| cfg(format!("integrand.{what} needs {} entries", m * n))))
                .transpose()
        };
        let spec = match (&self.family, &self.expr) {
            (Some(_), Some(_)) => return Err(cfg("integrand: give either family or expr, not both")),
            (None, None) => return Err(cfg("integrand: family or expr is required")),
            (None, Some(text)) => IntegrandSpec::from_expr(text, m, n, self.p)?,
            (Some(fam), None) => match fam.as_str() {
                "QUAD" => IntegrandSpec::quad(mat(&self.a, "a")?.unwrap_or_else(|| Mat::zeros(m, n)), self.c0)?,
                "DOUBLE_WELL" => match (mat(&self.a, "a")?, mat(&self.b, "b")?) {
                    (None, None) => IntegrandSpec::symmetric_double_well(m, n, self.p)?,
                    (Some(a), Some(b)) => IntegrandSpec::double_well(a, b, self.p)?,
                    _ => return Err(cfg("DOUBLE_WELL needs both wells a and b, or neither")),
                },
                "KOHN_STRANG" => IntegrandSpec::kohn_strang(m, n)?,
                "NEOHOOKEAN_SDC" if m == n => IntegrandSpec::neohookean_sdc(n, self.p)?,
                "WDC_CAPPED" if m == n => IntegrandSpec::wdc_capped(n, self.p, self.delta)?,
                "NEOHOOKEAN_SDC" | "WDC_CAPPED" => return Err(cfg(format!("{fam} needs square dims"))),
                other => return Err(cfg(format!("unknown integrand family {other:?}"))),
            },
        };
        match (&self.class, &self.expr) {
            (None, _) => Ok(spec),
            (Some(_), None) => Err(cfg("integrand.class applies to expr integrands only")),
            (Some(c), Some(_)) => {
                let class = match c.as_str() {
                    "finite" => ConstraintClass::Finite,
                    "s-DC" => ConstraintClass::StrongDc,
                    "w-DC" => ConstraintClass::WeakDc(self.delta),
                    "cpc" => ConstraintClass::Cpc,
                    other => return Err(cfg(format!("unknown class {other:?}"))),
                };
                Ok(spec.with_hint(Some(class)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeSection {
    /// Query matrix, row-major; empty means zero.
    pub query: Vec<f64>,
    /// Grid centre; empty means the query.
    pub center: Vec<f64>,
    pub half_width: f64,
    /// Points per entry; 0 means 17 up to four entries, else the largest
    /// odd count under two million grid points.
    pub resolution: usize,
    pub directions: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mesh_k: usize,
    pub restarts: usize,
    pub iters: usize,
}

impl Default for EnvelopeSection {
    fn default() -> Self {
        EnvelopeSection {
            query: Vec::new(),
            center: Vec::new(),
            half_width: 2.0,
            resolution: 0,
            directions: 12,
            tol: 1e-4,
            max_iter: 500,
            mesh_k: 16,
            restarts: 20,
            iters: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSection {
    pub center: [f64; 3],
    /// First grid half-width; 0 means `4 (1 + |xi|)`.
    pub half_width: f64,
    pub levels: usize,
    pub points: usize,
    pub candidates: usize,
}

impl Default for FiberSection {
    fn default() -> Self {
        let d = FiberSearch::default();
        FiberSection { center: d.center, half_width: 0.0, levels: d.levels, points: d.points, candidates: d.candidates }
    }
}

impl FiberSection {
    pub fn build(&self) -> Result<FiberSearch> {
        if self.points < 3 || self.points.is_multiple_of(2) {
            return Err(cfg("fiber.points must be odd and at least 3"));
        }
        if self.half_width < 0.0 {
            return Err(cfg("fiber.half_width must be non-negative"));
        }
        Ok(FiberSearch {
            center: self.center,
            half_width: (self.half_width > 0.0).then_some(self.half_width),
            levels: self.levels,
            points: self.points,
            candidates: self.candidates.max(1),
        })
    }
}

fn identity_3x2() -> Vec<f64> {
    vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceSection {
    /// 3x2 matrix, row-major.
    pub xi: Vec<f64>,
    pub fiber: FiberSection,
}

impl Default for ReduceSection {
    fn default() -> Self {
        ReduceSection { xi: identity_3x2(), fiber: FiberSection::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MembraneSection {
    pub xi: Vec<f64>,
    pub half_width: f64,
    pub resolution: usize,
    pub directions: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mesh_k: usize,
    pub restarts: usize,
    pub iters: usize,
    pub fiber: FiberSection,
}

impl Default for MembraneSection {
    fn default() -> Self {
        MembraneSection {
            xi: identity_3x2(),
            half_width: 1.0,
            resolution: 5,
            directions: 12,
            tol: 1e-4,
            max_iter: 500,
            mesh_k: 4,
            restarts: 4,
            iters: 200,
            fiber: FiberSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GammaSection {
    /// Gradient of the affine planar field, 3x2 row-major.
    pub xi: Vec<f64>,
    pub cells: usize,
    pub eps: Vec<f64>,
    pub gauss: usize,
    pub kappas: Vec<u32>,
    pub axes: Vec<usize>,
    pub restarts: usize,
    pub iters: usize,
    pub window: f64,
    pub fiber: FiberSection,
}

impl Default for GammaSection {
    fn default() -> Self {
        let t = ThinFilmConfig::default();
        let p = ProbeParams::default();
        GammaSection {
            xi: identity_3x2(),
            cells: t.cells,
            eps: t.eps,
            gauss: t.gauss,
            kappas: p.kappas,
            axes: p.axes,
            restarts: p.restarts,
            iters: p.iters,
            window: p.window,
            fiber: FiberSection::default(),
        }
    }
}

impl GammaSection {
    pub fn thin_film(&self) -> ThinFilmConfig {
        ThinFilmConfig { cells: self.cells, eps: self.eps.clone(), gauss: self.gauss }
    }

    pub fn probe(&self) -> Result<ProbeParams> {
        Ok(ProbeParams {
            kappas: self.kappas.clone(),
            axes: self.axes.clone(),
            restarts: self.restarts,
            iters: self.iters,
            window: self.window,
            search: self.fiber.build()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    /// Sample box centre; empty means zero.
    pub center: Vec<f64>,
    pub half_width: f64,
    pub samples: usize,
    /// Any of coercivity, constraint-class, growth-D, growth-D2,
    /// growth-P, p-ample.
    pub predicates: Vec<String>,
    pub alpha: f64,
    pub delta: f64,
    /// Growth exponent; 0 means the integrand's own.
    pub p: f64,
    pub ample_points: usize,
    pub mesh_k: usize,
    pub restarts: usize,
    pub iters: usize,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            center: Vec::new(),
            half_width: 2.0,
            samples: 2000,
            predicates: vec!["coercivity".into(), "constraint-class".into()],
            alpha: 0.5,
            delta: 0.5,
            p: 0.0,
            ample_points: 5,
            mesh_k: 4,
            restarts: 4,
            iters: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct OracleSection {
    /// Committed fixture file to diff against; empty skips the diff.
    pub compare: String,
}


fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses the config text, applies `key=value` overrides and fills defaults.
///
/// A bare key names a field of the command's table (then of the top level);
/// `table.key` is explicit. Values are TOML; a bare comma list becomes an
/// array.
pub fn load(text: &str, command: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| cfg(e.to_string()))?;
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| cfg(format!("override {o:?} is not key=value")))?;
        let value = parse_value(raw.trim())?;
        let path: Vec<&str> = key.trim().split('.').collect();
        let path: Vec<&str> = match path.as_slice() {
            [single] if !is_top_level(single) => vec![command, single],
            _ => path,
        };
        set_path(&mut doc, &path, value)?;
    }
    let config: RunConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| cfg(e.to_string()))?;
    if let Some(c) = &config.command {
        if c != command {
            return Err(cfg(format!("config is for command {c:?}, not {command:?}")));
        }
    }
    Ok(config)
}

fn is_top_level(key: &str) -> bool {
    matches!(key, "command" | "out")
}

fn parse_value(raw: &str) -> Result<toml::Value> {
    let parse = |s: &str| -> Option<toml::Value> {
        toml::from_str::<toml::Table>(&format!("v = {s}")).ok().and_then(|mut t| t.remove("v"))
    };
    if let Some(v) = parse(raw) {
        return Ok(v);
    }
    if raw.contains(',') {
        let items: Option<Vec<toml::Value>> = raw.split(',').map(|s| parse(s.trim())).collect();
        if let Some(items) = items {
            return Ok(toml::Value::Array(items));
        }
    }
    Ok(toml::Value::String(raw.to_string()))
}

fn set_path(doc: &mut toml::Table, path: &[&str], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().ok_or_else(|| cfg("empty override key"))?;
    let mut table = doc;
    for p in parents {
        table = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| cfg(format!("override path {path:?} crosses a non-table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// The effective configuration as TOML.
pub fn to_toml(config: &RunConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Internal(e.to_string()))
}
