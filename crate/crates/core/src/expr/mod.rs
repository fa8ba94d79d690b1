//! A small expression language for user-defined integrands `W(F)`.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "F" | "(" expr ")"
//!         | func "(" expr { "," expr } ")"
//!         | "finite_if" "(" cond "," expr ")" ;
//! cond    = expr cmp expr { cmp expr } ;
//! cmp     = "<" | "<=" | ">" | ">=" ;
//! func    = "norm" | "det" | "cross" | "min" | "max" | "abs" | "inv" ;
//! ```
//!
//! `F` is the matrix variable; `det` needs a square `F`, `cross` a 3x2 `F`
//! and returns the cross product of its columns (a vector, usable only
//! inside `norm`). `finite_if(cond, body)` is `body` where the comparison
//! chain holds and `+inf` elsewhere. Evaluation is total: `+inf` absorbs
//! every arithmetic failure (division by zero, `inf - inf`, NaN powers).

mod ast;
mod eval;
mod parser;

pub use ast::{BinOp, CmpOp, Expr, Func, ValueType};
pub use parser::parse;
