use super::ast::{BinOp, CmpOp, Expr, Func, ValueType};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Cmp(CmpOp),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("bad number `{s}`") })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            '+' | '-' | '*' | '/' | '^' => out.push((Tok::Op(c), start)),
            '(' => out.push((Tok::LParen, start)),
            ')' => out.push((Tok::RParen, start)),
            ',' => out.push((Tok::Comma, start)),
            '<' | '>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                if eq {
                    i += 1;
                }
                out.push((Tok::Cmp(op), start));
            }
            _ => return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{c}`") }),
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "F" => Ok(Expr::F),
            Tok::Ident(name) if name == "finite_if" => {
                self.expect(Tok::LParen, "`(` after finite_if")?;
                let mut operands = vec![self.expr()?];
                let mut ops = Vec::new();
                while let Tok::Cmp(op) = *self.peek() {
                    self.bump();
                    ops.push(op);
                    operands.push(self.expr()?);
                }
                if ops.is_empty() {
                    return self.err("finite_if needs a comparison");
                }
                self.expect(Tok::Comma, "`,` after finite_if condition")?;
                let body = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Guard { operands, ops, body: Box::new(body) })
            }
            Tok::Ident(name) => {
                let Some(func) = Func::from_name(&name) else {
                    self.at -= 1;
                    return self.err(format!("unknown identifier `{name}`"));
                };
                self.expect(Tok::LParen, "`(`")?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != func.arity() {
                    return self.err(format!("{} takes {} argument(s)", func.name(), func.arity()));
                }
                Ok(Expr::Call(func, args))
            }
            Tok::End => self.err("unexpected end of input"),
            t => {
                self.at = self.at.saturating_sub(1);
                self.err(format!("unexpected token {t:?}"))
            }
        }
    }
}

/// Parses and shape-checks `text` for matrices of shape `m x n`.
pub fn parse(text: &str, m: usize, n: usize) -> Result<Expr> {
    if text.trim().is_empty() {
        return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    match check(&e, m, n)? {
        ValueType::Scalar => Ok(e),
        t => Err(Error::ExprShape { node: e.to_string(), msg: format!("expression must be scalar, found {t:?}") }),
    }
}

fn shape_err<T>(node: &Expr, msg: impl Into<String>) -> Result<T> {
    Err(Error::ExprShape { node: node.to_string(), msg: msg.into() })
}

/// Infers the type of `e`, rejecting ill-typed or shape-incompatible nodes.
pub(crate) fn check(e: &Expr, m: usize, n: usize) -> Result<ValueType> {
    use ValueType::*;
    match e {
        Expr::Num(_) => Ok(Scalar),
        Expr::F => Ok(Matrix),
        Expr::Neg(a) => match check(a, m, n)? {
            Scalar => Ok(Scalar),
            _ => shape_err(e, "negation applies to scalars"),
        },
        Expr::Bin(_, a, b) => {
            if check(a, m, n)? == Scalar && check(b, m, n)? == Scalar {
                Ok(Scalar)
            } else {
                shape_err(e, "arithmetic applies to scalars")
            }
        }
        Expr::Call(func, args) => {
            let tys = args.iter().map(|a| check(a, m, n)).collect::<Result<Vec<_>>>()?;
            match func {
                Func::Norm => match tys[0] {
                    Matrix | Vector => Ok(Scalar),
                    Scalar => shape_err(e, "norm takes F or cross(F)"),
                },
                Func::Det => {
                    if tys[0] != Matrix {
                        shape_err(e, "det takes F")
                    } else if m != n {
                        shape_err(e, format!("det needs a square matrix, F is {m}x{n}"))
                    } else {
                        Ok(Scalar)
                    }
                }
                Func::Cross => {
                    if tys[0] != Matrix {
                        shape_err(e, "cross takes F")
                    } else if (m, n) != (3, 2) {
                        shape_err(e, format!("cross needs a 3x2 matrix, F is {m}x{n}"))
                    } else {
                        Ok(Vector)
                    }
                }
                Func::Min | Func::Max | Func::Abs | Func::Inv => {
                    if tys.iter().all(|t| *t == Scalar) {
                        Ok(Scalar)
                    } else {
                        shape_err(e, format!("{} takes scalars", func.name()))
                    }
                }
            }
        }
        Expr::Guard { operands, body, .. } => {
            for o in operands {
                if check(o, m, n)? != Scalar {
                    return shape_err(o, "comparison operands must be scalar");
                }
            }
            if check(body, m, n)? != Scalar {
                return shape_err(body, "guard body must be scalar");
            }
            Ok(Scalar)
        }
    }
}
