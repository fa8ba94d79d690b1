use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Norm,
    Det,
    Cross,
    Min,
    Max,
    Abs,
    Inv,
}

impl Func {
    pub(crate) fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "norm" => Func::Norm,
            "det" => Func::Det,
            "cross" => Func::Cross,
            "min" => Func::Min,
            "max" => Func::Max,
            "abs" => Func::Abs,
            "inv" => Func::Inv,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Norm => "norm",
            Func::Det => "det",
            Func::Cross => "cross",
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::Inv => "inv",
        }
    }

    pub(crate) fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

impl CmpOp {
    pub(crate) fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Static type of a subexpression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueType {
    Scalar,
    Vector,
    Matrix,
}

/// Parsed, shape-checked expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    F,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// `finite_if(operands[0] ops[0] operands[1] ..., body)`.
    Guard { operands: Vec<Expr>, ops: Vec<CmpOp>, body: Box<Expr> },
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; reparsing yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::F => write!(f, "F"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Guard { operands, ops, body } => {
                write!(f, "finite_if({}", operands[0])?;
                for (op, e) in ops.iter().zip(&operands[1..]) {
                    write!(f, " {} {e}", op.symbol())?;
                }
                write!(f, ", {body})")
            }
        }
    }
}
