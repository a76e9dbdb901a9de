//! A small expression language over named state components: arithmetic,
//! powers, sin/cos/sqrt and the two-argument angle function. Enough to
//! state every closed-form conserved quantity of the test systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func1 {
    Sin,
    Cos,
    Sqrt,
    Abs,
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
    Call1(Func1, Box<Expr>),
    /// atan2(y, x); also spelled `arg`.
    Atan2(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluate against a state vector. Domain violations surface as
    /// non-finite values for the caller to filter.
    pub fn eval(&self, state: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => state[*i],
            Expr::Neg(a) => -a.eval(state),
            Expr::Add(a, b) => a.eval(state) + b.eval(state),
            Expr::Sub(a, b) => a.eval(state) - b.eval(state),
            Expr::Mul(a, b) => a.eval(state) * b.eval(state),
            Expr::Div(a, b) => a.eval(state) / b.eval(state),
            Expr::Pow(a, b) => {
                let base = a.eval(state);
                let exp = b.eval(state);
                if exp.fract() == 0.0 && exp.abs() <= 16.0 {
                    base.powi(exp as i32)
                } else {
                    base.powf(exp)
                }
            }
            Expr::Call1(f, a) => {
                let v = a.eval(state);
                match f {
                    Func1::Sin => v.sin(),
                    Func1::Cos => v.cos(),
                    Func1::Sqrt => v.sqrt(),
                    Func1::Abs => v.abs(),
                }
            }
            Expr::Atan2(y, x) => y.eval(state).atan2(x.eval(state)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::InvalidFormula(format!("bad number `{text}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(Error::InvalidFormula(format!("unexpected character `{other}`")))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: &Token) -> Result<()> {
        match self.bump() {
            Some(ref got) if got == t => Ok(()),
            got => Err(Error::InvalidFormula(format!("expected {t:?}, got {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Minus) => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            // Right-associative; exponent may be signed.
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(&Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    self.bump();
                    let first = self.expr()?;
                    match name.as_str() {
                        "sin" | "cos" | "sqrt" | "abs" => {
                            self.expect(&Token::RParen)?;
                            let f = match name.as_str() {
                                "sin" => Func1::Sin,
                                "cos" => Func1::Cos,
                                "sqrt" => Func1::Sqrt,
                                _ => Func1::Abs,
                            };
                            Ok(Expr::Call1(f, Box::new(first)))
                        }
                        "atan2" | "arg" => {
                            self.expect(&Token::Comma)?;
                            let second = self.expr()?;
                            self.expect(&Token::RParen)?;
                            Ok(Expr::Atan2(Box::new(first), Box::new(second)))
                        }
                        other => {
                            Err(Error::InvalidFormula(format!("unknown function `{other}`")))
                        }
                    }
                } else if name == "pi" {
                    Ok(Expr::Num(std::f64::consts::PI))
                } else {
                    let idx = self.vars.iter().position(|v| v == &name).ok_or_else(|| {
                        Error::InvalidFormula(format!(
                            "unknown symbol `{name}`; available: {}",
                            self.vars.join(", ")
                        ))
                    })?;
                    Ok(Expr::Var(idx))
                }
            }
            got => Err(Error::InvalidFormula(format!("unexpected token {got:?}"))),
        }
    }
}

/// Parse a formula over the given component names.
pub fn parse(src: &str, vars: &[String]) -> Result<Expr> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(Error::InvalidFormula("empty formula".into()));
    }
    let mut p = Parser { tokens, pos: 0, vars };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::InvalidFormula(format!(
            "trailing input from token {}",
            p.pos
        )));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> Vec<String> {
        vec!["x".into(), "y".into(), "xdot".into(), "ydot".into()]
    }

    #[test]
    fn precedence_and_powers() {
        let v = vars();
        let e = parse("1 + 2 * 3 ^ 2", &v).unwrap();
        assert_eq!(e.eval(&[0.0; 4]), 19.0);
        let e = parse("-x^2", &v).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0, 0.0]), -9.0);
        let e = parse("2^-1", &v).unwrap();
        assert_eq!(e.eval(&[0.0; 4]), 0.5);
    }

    #[test]
    fn kepler_energy_formula() {
        let v = vars();
        let e = parse("0.5*(xdot^2 + ydot^2) - 1/sqrt(x^2 + y^2)", &v).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0, 0.0, 1.0]), -0.5);
    }

    #[test]
    fn angle_function() {
        let v = vars();
        let e = parse("atan2(y, x)", &v).unwrap();
        assert!((e.eval(&[0.0, 2.0, 0.0, 0.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let e2 = parse("arg(y, x)", &v).unwrap();
        assert_eq!(e2, e);
    }

    #[test]
    fn unknown_symbols_and_junk_are_errors() {
        let v = vars();
        assert!(parse("q + 1", &v).is_err());
        assert!(parse("sin(x", &v).is_err());
        assert!(parse("x + ", &v).is_err());
        assert!(parse("x 3", &v).is_err());
        assert!(parse("", &v).is_err());
        assert!(parse("foo(x)", &v).is_err());
    }

    #[test]
    fn division_by_zero_is_non_finite_not_a_panic() {
        let v = vars();
        let e = parse("1/x", &v).unwrap();
        assert!(!e.eval(&[0.0, 0.0, 0.0, 0.0]).is_finite());
    }
}
