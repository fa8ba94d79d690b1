use super::ast::{BinOp, Expr, Func};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::matspace::{cross_3x2, det_square, Mat};

/// Collapses every non-finite or NaN intermediate to `+inf`.
fn absorb(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn norm_sq(arg: &Expr, f: &Mat) -> f64 {
    match arg {
        Expr::F => f.as_slice().iter().map(|v| v * v).sum(),
        _ => {
            let c = cross_3x2(f.as_slice());
            c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
        }
    }
}

impl Expr {
    /// Evaluates at `f`. `+inf` where a guard fails or arithmetic breaks
    /// down; a finite negative result is rejected.
    pub fn eval(&self, f: &Mat) -> Result<ExtReal> {
        let v = self.scalar(f);
        if v.is_finite() && v < 0.0 {
            return Err(Error::NegativeEnergy(v));
        }
        Ok(ExtReal::saturating(v))
    }

    fn scalar(&self, f: &Mat) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::F => unreachable!("shape checker rejects bare F in scalar position"),
            Expr::Neg(a) => {
                let v = a.scalar(f);
                if v.is_finite() {
                    -v
                } else {
                    f64::INFINITY
                }
            }
            Expr::Bin(BinOp::Pow, a, b) if matches!(**a, Expr::Call(Func::Norm, _)) => {
                // |F|^y as (|F|^2)^(y/2): exact for the common even powers.
                let Expr::Call(_, args) = &**a else { unreachable!() };
                let y = b.scalar(f);
                if !y.is_finite() {
                    return f64::INFINITY;
                }
                absorb(norm_sq(&args[0], f).powf(y / 2.0))
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.scalar(f), b.scalar(f));
                if !x.is_finite() || !y.is_finite() {
                    return f64::INFINITY;
                }
                absorb(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            f64::INFINITY
                        } else {
                            x / y
                        }
                    }
                    BinOp::Pow => x.powf(y),
                })
            }
            Expr::Call(func, args) => match func {
                Func::Norm => norm_sq(&args[0], f).sqrt(),
                Func::Det => det_square(f.as_slice(), f.rows()),
                Func::Cross => unreachable!("cross is vector-valued"),
                Func::Min => args[0].scalar(f).min(args[1].scalar(f)),
                Func::Max => args[0].scalar(f).max(args[1].scalar(f)),
                Func::Abs => absorb(args[0].scalar(f).abs()),
                Func::Inv => {
                    let x = args[0].scalar(f);
                    if x == 0.0 || !x.is_finite() {
                        f64::INFINITY
                    } else {
                        absorb(1.0 / x)
                    }
                }
            },
            Expr::Guard { operands, ops, body } => {
                let vals: Vec<f64> = operands.iter().map(|o| o.scalar(f)).collect();
                if vals.iter().any(|v| !v.is_finite()) {
                    return f64::INFINITY;
                }
                let holds = ops.iter().enumerate().all(|(i, op)| op.holds(vals[i], vals[i + 1]));
                if holds {
                    body.scalar(f)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}
