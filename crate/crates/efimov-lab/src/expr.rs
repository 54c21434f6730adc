//! Small arithmetic expression language for coefficient files.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | variable | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := cosh | sinh | tanh | exp | ln | sin | cos
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus on its left,
//! so `-u^2` is `-(u^2)`. Variables are declared by the caller (normally
//! `u`, `v`, `w`).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Cosh,
    Sinh,
    Tanh,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}' at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(Error::Parse(format!("unknown identifier '{name}'"))),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

impl Expr {
    /// Parses `src`; `vars[i]` becomes variable index `i`.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let mut p = Parser { toks: lex(src)?, pos: 0, vars };
        if p.toks.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input after token {}", p.pos)));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(Error::Eval(format!("division by zero at {x:?}")));
                }
                a.eval(x)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let e = b.eval(x)?;
                if e.fract() == 0.0 && e.abs() <= 64.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Cosh => v.cosh(),
                    Func::Sinh => v.sinh(),
                    Func::Tanh => v.tanh(),
                    Func::Exp => v.exp(),
                    Func::Ln => {
                        if v <= 0.0 {
                            return Err(Error::Eval(format!("ln of non-positive value at {x:?}")));
                        }
                        v.ln()
                    }
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        })
    }
}

/// Parsed `key = expr` file with `range name = lo, hi` lines and `#` comments.
#[derive(Debug, Clone, Default)]
pub struct CoefficientFile {
    pub entries: Vec<(String, Expr)>,
    pub ranges: Vec<(String, f64, f64)>,
    pub scalars: Vec<(String, f64)>,
}

impl CoefficientFile {
    pub fn parse(text: &str, vars: &[&str]) -> Result<CoefficientFile> {
        let mut out = CoefficientFile::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'name = value'", n + 1)))?;
            let lhs = lhs.trim();
            let rhs = rhs.trim();
            if let Some(name) = lhs.strip_prefix("range ") {
                let (lo, hi) = rhs
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("line {}: range needs 'lo, hi'", n + 1)))?;
                let lo = Expr::parse(lo, &[])?.eval(&[])?;
                let hi = Expr::parse(hi, &[])?.eval(&[])?;
                if !(lo < hi) {
                    return Err(Error::Parse(format!("line {}: empty range", n + 1)));
                }
                out.ranges.push((name.trim().to_string(), lo, hi));
            } else if lhs == "step" || lhs == "orientation" {
                out.scalars.push((lhs.to_string(), Expr::parse(rhs, &[])?.eval(&[])?));
            } else {
                let e = Expr::parse(rhs, vars).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
                out.entries.push((lhs.to_string(), e));
            }
        }
        Ok(out)
    }

    pub fn entry(&self, key: &str) -> Option<&Expr> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    pub fn range(&self, key: &str) -> Option<(f64, f64)> {
        self.ranges.iter().find(|(k, _, _)| k == key).map(|&(_, lo, hi)| (lo, hi))
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        Expr::parse(s, &["u", "v", "w"]).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", &[0.0; 3]), 7.0);
        assert_eq!(ev("-2^2", &[0.0; 3]), -4.0);
        assert_eq!(ev("2^3^2", &[0.0; 3]), 512.0);
        assert_eq!(ev("(1 + 2) * 3", &[0.0; 3]), 9.0);
        assert_eq!(ev("2^-1", &[0.0; 3]), 0.5);
    }

    #[test]
    fn functions_and_vars() {
        let x = [0.3, -0.2, 0.05];
        let got = ev("(1 + 2*w) * cosh(v)^2 * cosh(w)^2", &x);
        let want = (1.0 + 2.0 * 0.05) * (-0.2f64).cosh().powi(2) * 0.05f64.cosh().powi(2);
        assert!((got - want).abs() < 1e-15);
        assert!((ev("ln(exp(u)) + sin(pi/2) - cos(0) + tanh(0) + sinh(0)", &x) - 0.3).abs() < 1e-15);
        assert_eq!(ev("1e-3 * 2E2", &x), 0.2);
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("1 +", &["u"]).is_err());
        assert!(Expr::parse("foo(u)", &["u"]).is_err());
        assert!(Expr::parse("z", &["u"]).is_err());
        assert!(Expr::parse("(u", &["u"]).is_err());
        let e = Expr::parse("1/u", &["u"]).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::Eval(_))));
    }

    #[test]
    fn coefficient_file() {
        let text = "# g_lambda\nrange u = -1, 1\nrange w = -0.1, 0.1\nstep = 1e-3\ng11 = 1 + u\ng33 = 1\n";
        let f = CoefficientFile::parse(text, &["u", "v", "w"]).unwrap();
        assert_eq!(f.range("w"), Some((-0.1, 0.1)));
        assert_eq!(f.scalar("step"), Some(1e-3));
        assert_eq!(f.entry("g11").unwrap().eval(&[2.0, 0.0, 0.0]).unwrap(), 3.0);
        assert!(f.entry("g22").is_none());
    }
}
