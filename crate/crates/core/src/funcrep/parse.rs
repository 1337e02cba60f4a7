//! Text syntax for exponential polynomials: sums of terms like
//! `3`, `(1+2i)*z^2`, `e^{2z}`, `-z*exp(-1/2 z)`, `2i z e^{iz}`.

use crate::error::{Error, Result};
use crate::exact::{gq_one, gq_zero, parse_gq, parse_rational, ExpPoly, Gq, Poly};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;

struct Term {
    coeff: Gq,
    power: usize,
    lambda: Gq,
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.i += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.s[self.i..].starts_with(lit.as_bytes()) {
            self.i += lit.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self, close: Option<u8>) -> Result<Vec<Term>> {
        let mut out = Vec::new();
        let mut sign = self.sign();
        loop {
            let mut t = self.term()?;
            if sign {
                t.coeff = -t.coeff;
            }
            out.push(t);
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    sign = false;
                }
                Some(b'-') => {
                    self.i += 1;
                    sign = true;
                }
                c if c == close => return Ok(out),
                Some(c) => return Err(err(format!("unexpected `{}` in expression", c as char))),
                None => return Err(err("unterminated expression")),
            }
        }
    }

    fn sign(&mut self) -> bool {
        self.skip_ws();
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                true
            }
            Some(b'+') => {
                self.i += 1;
                false
            }
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = Term { coeff: gq_one(), power: 0, lambda: gq_zero() };
        let mut any = false;
        loop {
            self.skip_ws();
            if any && self.peek() == Some(b'*') {
                self.i += 1;
                self.skip_ws();
            }
            let Some(c) = self.peek() else { break };
            if c.is_ascii_digit() || c == b'.' {
                let start = self.i;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == b'.' || c == b'/') {
                    self.i += 1;
                }
                let lit = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
                let v = parse_rational(lit).ok_or_else(|| err(format!("bad number `{lit}`")))?;
                let imaginary = self.peek() == Some(b'i') && !self.s.get(self.i + 1).is_some_and(|c| c.is_ascii_alphabetic());
                let v = if imaginary {
                    self.i += 1;
                    Complex::new(BigRational::zero(), v)
                } else {
                    Complex::new(v, BigRational::zero())
                };
                t.coeff = t.coeff * v;
            } else if c == b'(' {
                let start = self.i + 1;
                let end = start + self.s[start..].iter().position(|&c| c == b')').ok_or_else(|| err("missing `)`"))?;
                let lit = std::str::from_utf8(&self.s[start..end]).expect("ascii");
                let v = parse_gq(lit).ok_or_else(|| err(format!("bad complex number `{lit}`")))?;
                self.i = end + 1;
                t.coeff = t.coeff * v;
            } else if c == b'i' {
                self.i += 1;
                t.coeff = t.coeff * Complex::new(BigRational::zero(), BigRational::from_integer(1.into()));
            } else if c == b'z' {
                self.i += 1;
                let mut p = 1;
                if self.eat("^") {
                    self.skip_ws();
                    let start = self.i;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.i += 1;
                    }
                    p = std::str::from_utf8(&self.s[start..self.i])
                        .expect("ascii")
                        .parse()
                        .map_err(|_| err("bad exponent of z"))?;
                }
                t.power += p;
            } else if self.eat("e^{") {
                let l = self.exponent(b'}')?;
                t.lambda = &t.lambda + l;
            } else if self.eat("exp(") {
                let l = self.exponent(b')')?;
                t.lambda = &t.lambda + l;
            } else {
                break;
            }
            any = true;
        }
        if !any {
            return Err(err("empty term"));
        }
        Ok(t)
    }

    /// Linear exponent `c z`; returns c.
    fn exponent(&mut self, close: u8) -> Result<Gq> {
        let terms = self.expr(Some(close))?;
        self.i += 1;
        let mut l = gq_zero();
        for t in terms {
            if t.power != 1 || !t.lambda.re.is_zero() || !t.lambda.im.is_zero() {
                return Err(err("exponent must be linear in z"));
            }
            l = l + t.coeff;
        }
        Ok(l)
    }
}

pub fn parse_exppoly(s: &str) -> Result<ExpPoly> {
    let mut p = Parser { s: s.as_bytes(), i: 0 };
    let terms = p.expr(None)?;
    Ok(ExpPoly::new(
        terms
            .into_iter()
            .map(|t| {
                let mut coeffs = vec![gq_zero(); t.power + 1];
                coeffs[t.power] = t.coeff;
                (t.lambda, Poly::new(coeffs))
            })
            .collect(),
    ))
}
