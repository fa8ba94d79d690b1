//! Integrands `W(F)` with values in `[0, +inf]`: built-in families and
//! expression-defined energies, plus sample-based constraint predicates.

mod predicates;

pub use predicates::{
    check_coercivity, check_growth_d, check_growth_d2, check_growth_p, classify_constraint, sample_points,
    PredicateReport, Verdict,
};

use crate::error::{invalid, Error, Result};
use crate::expr::{self, Expr};
use crate::extreal::ExtReal;
use crate::matspace::{det_square, Mat};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Anything that can be evaluated as an integrand on `m x N` matrices.
pub trait Integrand: Send + Sync {
    fn dims(&self) -> (usize, usize);

    /// Growth exponent `p > 1`.
    fn p(&self) -> f64;

    /// Value at `f`; `f` has already been shape-checked.
    fn value(&self, f: &Mat) -> Result<ExtReal>;

    fn eval(&self, f: &Mat) -> Result<ExtReal> {
        if f.dims() != self.dims() {
            let (m, n) = self.dims();
            return Err(Error::Shape { expected: format!("{m}x{n}"), got: format!("{}x{}", f.rows(), f.cols()) });
        }
        self.value(f)
    }

    /// Declared constraint class, when the definition fixes one.
    fn class_hint(&self) -> Option<ConstraintClass> {
        None
    }
}

/// The infinity-set classes an integrand can belong to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "delta")]
pub enum ConstraintClass {
    #[serde(rename = "finite")]
    Finite,
    /// `+inf` exactly on `-delta <= det F <= 0`.
    #[serde(rename = "w-DC")]
    WeakDc(f64),
    /// `+inf` exactly on `det F <= 0`.
    #[serde(rename = "s-DC")]
    StrongDc,
    /// 3x2: `+inf` exactly where the columns are parallel.
    #[serde(rename = "cpc")]
    Cpc,
}

impl ConstraintClass {
    pub fn label(&self) -> &'static str {
        match self {
            ConstraintClass::Finite => "finite",
            ConstraintClass::WeakDc(_) => "w-DC",
            ConstraintClass::StrongDc => "s-DC",
            ConstraintClass::Cpc => "cpc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// `|F - A|^2 + c0`.
    Quad { a: Mat, c0: f64 },
    /// `min(|F - A|^p, |F - B|^p)`.
    DoubleWell { a: Mat, b: Mat },
    /// `0` at `F = 0`, `1 + |F|^2` elsewhere.
    KohnStrang,
    /// `|F|^p + h(det F)` with `h(d) = d + 1/d - 2` for `d > 0`, `+inf` otherwise.
    NeohookeanSdc,
    /// `|F|^p`, except `+inf` on `-delta <= det F <= 0`.
    WdcCapped { delta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Definition {
    Builtin(Family),
    Expr { text: String, expr: Expr },
}

#[derive(Clone, PartialEq)]
pub struct IntegrandSpec {
    m: usize,
    n: usize,
    p: f64,
    def: Definition,
    hint: Option<ConstraintClass>,
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent p must exceed 1, got {p}")))
    }
}

impl IntegrandSpec {
    pub fn builtin(m: usize, n: usize, p: f64, family: Family) -> Result<IntegrandSpec> {
        check_p(p)?;
        if m == 0 || n == 0 {
            return Err(invalid("dimensions must be positive"));
        }
        let hint = match &family {
            Family::Quad { a, c0 } => {
                if a.dims() != (m, n) {
                    return Err(Error::Shape { expected: format!("{m}x{n}"), got: format!("{:?}", a.dims()) });
                }
                if !(*c0 >= 0.0 && c0.is_finite()) {
                    return Err(invalid("c0 must be finite and non-negative"));
                }
                ConstraintClass::Finite
            }
            Family::DoubleWell { a, b } => {
                if a.dims() != (m, n) || b.dims() != (m, n) {
                    return Err(Error::Shape { expected: format!("{m}x{n} wells"), got: format!("{:?}, {:?}", a.dims(), b.dims()) });
                }
                ConstraintClass::Finite
            }
            Family::KohnStrang => ConstraintClass::Finite,
            Family::NeohookeanSdc => {
                if m != n {
                    return Err(invalid("NEOHOOKEAN_SDC needs square dimensions"));
                }
                ConstraintClass::StrongDc
            }
            Family::WdcCapped { delta } => {
                if m != n {
                    return Err(invalid("WDC_CAPPED needs square dimensions"));
                }
                if !(*delta > 0.0 && delta.is_finite()) {
                    return Err(invalid("delta must be positive"));
                }
                ConstraintClass::WeakDc(*delta)
            }
        };
        Ok(IntegrandSpec { m, n, p, def: Definition::Builtin(family), hint: Some(hint) })
    }

    pub fn quad(a: Mat, c0: f64) -> Result<IntegrandSpec> {
        let (m, n) = a.dims();
        IntegrandSpec::builtin(m, n, 2.0, Family::Quad { a, c0 })
    }

    pub fn double_well(a: Mat, b: Mat, p: f64) -> Result<IntegrandSpec> {
        let (m, n) = a.dims();
        IntegrandSpec::builtin(m, n, p, Family::DoubleWell { a, b })
    }

    /// Double well with wells `+-e1 ⊗ e1`.
    pub fn symmetric_double_well(m: usize, n: usize, p: f64) -> Result<IntegrandSpec> {
        let mut a = Mat::zeros(m, n);
        a.set(0, 0, 1.0);
        IntegrandSpec::double_well(a.clone(), a.scaled(-1.0), p)
    }

    pub fn kohn_strang(m: usize, n: usize) -> Result<IntegrandSpec> {
        IntegrandSpec::builtin(m, n, 2.0, Family::KohnStrang)
    }

    pub fn neohookean_sdc(n: usize, p: f64) -> Result<IntegrandSpec> {
        IntegrandSpec::builtin(n, n, p, Family::NeohookeanSdc)
    }

    pub fn wdc_capped(n: usize, p: f64, delta: f64) -> Result<IntegrandSpec> {
        IntegrandSpec::builtin(n, n, p, Family::WdcCapped { delta })
    }

    pub fn from_expr(text: &str, m: usize, n: usize, p: f64) -> Result<IntegrandSpec> {
        check_p(p)?;
        let expr = expr::parse(text, m, n)?;
        Ok(IntegrandSpec { m, n, p, def: Definition::Expr { text: text.to_string(), expr }, hint: None })
    }

    pub fn with_hint(mut self, hint: Option<ConstraintClass>) -> IntegrandSpec {
        self.hint = hint;
        self
    }

    pub fn definition(&self) -> &Definition {
        &self.def
    }
}

impl fmt::Debug for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.def {
            Definition::Builtin(fam) => format!("{fam:?}"),
            Definition::Expr { text, .. } => format!("expr {text:?}"),
        };
        write!(f, "IntegrandSpec({}x{}, p={}, {what})", self.m, self.n, self.p)
    }
}

fn dist_sq(f: &[f64], a: &[f64]) -> f64 {
    f.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `|F|^p` from the squared norm, exact for `p = 2`.
fn pow_norm(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        sq
    } else {
        sq.powf(p / 2.0)
    }
}

impl Integrand for IntegrandSpec {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn class_hint(&self) -> Option<ConstraintClass> {
        self.hint
    }

    fn value(&self, f: &Mat) -> Result<ExtReal> {
        let x = f.as_slice();
        let v = match &self.def {
            Definition::Expr { expr, .. } => return expr.eval(f),
            Definition::Builtin(fam) => match fam {
                Family::Quad { a, c0 } => dist_sq(x, a.as_slice()) + c0,
                Family::DoubleWell { a, b } => {
                    pow_norm(dist_sq(x, a.as_slice()), self.p).min(pow_norm(dist_sq(x, b.as_slice()), self.p))
                }
                Family::KohnStrang => {
                    let sq: f64 = x.iter().map(|v| v * v).sum();
                    if sq == 0.0 {
                        0.0
                    } else {
                        1.0 + sq
                    }
                }
                Family::NeohookeanSdc => {
                    let d = det_square(x, self.n);
                    if d > 0.0 {
                        let sq: f64 = x.iter().map(|v| v * v).sum();
                        pow_norm(sq, self.p) + (d + 1.0 / d - 2.0).max(0.0)
                    } else {
                        f64::INFINITY
                    }
                }
                Family::WdcCapped { delta } => {
                    let d = det_square(x, self.n);
                    if d <= 0.0 && d >= -delta {
                        f64::INFINITY
                    } else {
                        pow_norm(x.iter().map(|v| v * v).sum(), self.p)
                    }
                }
            },
        };
        Ok(ExtReal::saturating(v))
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn p(&self) -> f64 {
        (**self).p()
    }
    fn value(&self, f: &Mat) -> Result<ExtReal> {
        (**self).value(f)
    }
    fn class_hint(&self) -> Option<ConstraintClass> {
        (**self).class_hint()
    }
}

impl<T: Integrand + ?Sized> Integrand for std::sync::Arc<T> {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn p(&self) -> f64 {
        (**self).p()
    }
    fn value(&self, f: &Mat) -> Result<ExtReal> {
        (**self).value(f)
    }
    fn class_hint(&self) -> Option<ConstraintClass> {
        (**self).class_hint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let ks = IntegrandSpec::kohn_strang(2, 2).unwrap();
        assert_eq!(ks.eval(&Mat::zeros(2, 2)).unwrap(), ExtReal::ZERO);
        assert_eq!(ks.eval(&Mat::identity(2)).unwrap(), ExtReal::finite(3.0));
        let neo = IntegrandSpec::neohookean_sdc(3, 2.0).unwrap();
        assert_eq!(neo.eval(&Mat::diag(&[1.0, 1.0, -1.0])).unwrap(), ExtReal::INFINITY);
        assert_eq!(neo.eval(&Mat::identity(3)).unwrap(), ExtReal::finite(3.0));
        assert!(matches!(ks.eval(&Mat::zeros(3, 2)), Err(Error::Shape { .. })));
    }

    #[test]
    fn wdc_band() {
        let w = IntegrandSpec::wdc_capped(2, 2.0, 0.5).unwrap();
        assert!(w.eval(&Mat::diag(&[1.0, -0.4])).unwrap().is_infinite());
        assert!(w.eval(&Mat::diag(&[1.0, 0.0])).unwrap().is_infinite());
        assert!((w.eval(&Mat::diag(&[1.0, -0.6])).unwrap().value() - 1.36).abs() < 1e-14);
        assert!((w.eval(&Mat::diag(&[1.0, 0.1])).unwrap().value() - 1.01).abs() < 1e-14);
    }

    #[test]
    fn double_well_values() {
        let dw = IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap();
        assert_eq!(dw.eval(&Mat::zeros(2, 2)).unwrap(), ExtReal::finite(1.0));
        assert_eq!(dw.eval(&Mat::diag(&[1.0, 0.0])).unwrap(), ExtReal::ZERO);
        assert_eq!(dw.eval(&Mat::diag(&[-1.0, 0.0])).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn expression_spec_matches_builtin() {
        let e = IntegrandSpec::from_expr("finite_if(det(F) > 0, norm(F)^2 + det(F) + inv(det(F)) - 2)", 2, 2, 2.0).unwrap();
        let b = IntegrandSpec::neohookean_sdc(2, 2.0).unwrap();
        for f in [Mat::diag(&[2.0, 0.5]), Mat::from_rows(&[&[1.0, 0.3], &[-0.2, 0.7]]), Mat::diag(&[1.0, -1.0])] {
            let (x, y) = (e.eval(&f).unwrap(), b.eval(&f).unwrap());
            assert_eq!(x.is_finite(), y.is_finite());
            if x.is_finite() {
                assert!((x.value() - y.value()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(IntegrandSpec::neohookean_sdc(2, 1.0).is_err());
        assert!(IntegrandSpec::builtin(3, 2, 2.0, Family::NeohookeanSdc).is_err());
        assert!(IntegrandSpec::quad(Mat::zeros(2, 2), -1.0).is_err());
    }
}
