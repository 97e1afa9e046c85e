//! Text format for polynomials.
//!
//! Terms are `coef * x1^a1 * ... * xk^ak` joined by `+`/`-`; coefficients are
//! integers or `p/q` fractions. Variables are `x1..xN` in the real case and
//! `z1..zN`, `c1..cN` (for the conjugates) in the complex case, where the
//! factor `i` denotes the imaginary unit. Whitespace is ignored everywhere;
//! parse errors carry a line and column.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::{GaussRational, Rational, Scalar};

#[derive(Clone, Copy, PartialEq, Debug)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Int,
    Var,
    Imag,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    // current token
    tok: Tok,
    tok_line: usize,
    tok_col: usize,
    int_val: BigInt,
    var_letter: u8,
    var_index: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            tok: Tok::Eof,
            tok_line: 1,
            tok_col: 1,
            int_val: BigInt::zero(),
            var_letter: 0,
            var_index: 0,
        };
        lx.advance()?;
        Ok(lx)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.tok_line,
            col: self.tok_col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn advance(&mut self) -> Result<()> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.bump();
        }
        self.tok_line = self.line;
        self.tok_col = self.col;
        let b = match self.bump() {
            None => {
                self.tok = Tok::Eof;
                return Ok(());
            }
            Some(b) => b,
        };
        self.tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'/' => Tok::Slash,
            b'0'..=b'9' => {
                let mut digits = vec![b];
                while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    digits.push(self.bump().unwrap());
                }
                self.int_val = String::from_utf8(digits).unwrap().parse().unwrap();
                Tok::Int
            }
            b'i' => Tok::Imag,
            b'x' | b'z' | b'c' => {
                let mut digits = Vec::new();
                while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    digits.push(self.bump().unwrap());
                }
                if digits.is_empty() {
                    return Err(Error::Parse {
                        line: self.tok_line,
                        col: self.tok_col,
                        msg: format!("variable '{}' must carry an index", b as char),
                    });
                }
                self.var_letter = b;
                self.var_index =
                    String::from_utf8(digits)
                        .unwrap()
                        .parse()
                        .map_err(|_| Error::Parse {
                            line: self.tok_line,
                            col: self.tok_col,
                            msg: "variable index out of range".into(),
                        })?;
                Tok::Var
            }
            other => {
                return Err(Error::Parse {
                    line: self.tok_line,
                    col: self.tok_col,
                    msg: format!("unexpected character '{}'", other as char),
                })
            }
        };
        Ok(())
    }
}

/// Variable naming scheme of a polynomial source text.
enum Scheme {
    /// `x1..xN`
    Real { nvars: usize },
    /// `z1..zN` then `c1..cN`; the ring has `2N` variables.
    Complex { n: usize },
}

impl Scheme {
    fn resolve(&self, letter: u8, index: usize, lx: &Lexer) -> Result<usize> {
        let fail = |msg: String| Error::Parse {
            line: lx.tok_line,
            col: lx.tok_col,
            msg,
        };
        match self {
            Scheme::Real { nvars } => {
                if letter != b'x' {
                    return Err(fail(format!(
                        "variable '{}' is not valid here; expected x1..x{}",
                        letter as char, nvars
                    )));
                }
                if index == 0 || index > *nvars {
                    return Err(fail(format!("x{} out of range 1..{}", index, nvars)));
                }
                Ok(index - 1)
            }
            Scheme::Complex { n } => {
                if index == 0 || index > *n {
                    return Err(fail(format!(
                        "{}{} out of range 1..{}",
                        letter as char, index, n
                    )));
                }
                match letter {
                    b'z' => Ok(index - 1),
                    b'c' => Ok(n + index - 1),
                    _ => Err(fail(format!(
                        "variable '{}' is not valid here; expected z or c",
                        letter as char
                    ))),
                }
            }
        }
    }
}

fn parse_poly<K: Scalar>(src: &str, scheme: Scheme, ring_vars: usize) -> Result<MultiPoly<K>> {
    let mut lx = Lexer::new(src)?;
    let mut acc = MultiPoly::<K>::zero(ring_vars);
    let mut negate = match lx.tok {
        Tok::Plus => {
            lx.advance()?;
            false
        }
        Tok::Minus => {
            lx.advance()?;
            true
        }
        _ => false,
    };
    loop {
        let term = parse_term::<K>(&mut lx, &scheme, ring_vars)?;
        acc = if negate {
            acc.sub(&term)
        } else {
            acc.add(&term)
        };
        match lx.tok {
            Tok::Plus => {
                negate = false;
                lx.advance()?;
            }
            Tok::Minus => {
                negate = true;
                lx.advance()?;
            }
            Tok::Eof => return Ok(acc),
            _ => return Err(lx.err("expected '+', '-' or end of input")),
        }
    }
}

fn parse_term<K: Scalar>(
    lx: &mut Lexer,
    scheme: &Scheme,
    ring_vars: usize,
) -> Result<MultiPoly<K>> {
    let mut term = MultiPoly::<K>::one(ring_vars);
    loop {
        let factor = parse_factor::<K>(lx, scheme, ring_vars)?;
        term = term.mul(&factor);
        if lx.tok == Tok::Star {
            lx.advance()?;
        } else {
            return Ok(term);
        }
    }
}

fn parse_factor<K: Scalar>(
    lx: &mut Lexer,
    scheme: &Scheme,
    ring_vars: usize,
) -> Result<MultiPoly<K>> {
    match lx.tok {
        Tok::Int => {
            let num = lx.int_val.clone();
            lx.advance()?;
            let coeff = if lx.tok == Tok::Slash {
                lx.advance()?;
                if lx.tok != Tok::Int {
                    return Err(lx.err("expected denominator after '/'"));
                }
                let den = lx.int_val.clone();
                if den.is_zero() {
                    return Err(lx.err("zero denominator"));
                }
                lx.advance()?;
                Rational::new(num, den)
            } else {
                Rational::from_integer(num)
            };
            Ok(MultiPoly::constant(ring_vars, K::from_rational(coeff)))
        }
        Tok::Imag => {
            lx.advance()?;
            match K::imaginary_unit() {
                Some(i) => Ok(MultiPoly::constant(ring_vars, i)),
                None => Err(lx.err("imaginary unit is not valid in a real polynomial")),
            }
        }
        Tok::Var => {
            let idx = scheme.resolve(lx.var_letter, lx.var_index, lx)?;
            lx.advance()?;
            let exp = if lx.tok == Tok::Caret {
                lx.advance()?;
                if lx.tok != Tok::Int {
                    return Err(lx.err("expected integer exponent after '^'"));
                }
                let e: usize = lx
                    .int_val
                    .to_string()
                    .parse()
                    .map_err(|_| lx.err("exponent too large"))?;
                lx.advance()?;
                e
            } else {
                1
            };
            Ok(MultiPoly::var(ring_vars, idx).pow(exp))
        }
        Tok::Eof => Err(lx.err("unexpected end of input")),
        _ => Err(lx.err("expected a coefficient or variable")),
    }
}

/// Parses a real polynomial in variables `x1..x{nvars}`.
pub fn parse_rational_poly(src: &str, nvars: usize) -> Result<MultiPoly<Rational>> {
    parse_poly(src, Scheme::Real { nvars }, nvars)
}

/// Parses a complex polynomial in `z1..zN` and conjugates `c1..cN`; the
/// resulting ring has `2n` variables with the conjugate block second.
pub fn parse_gauss_poly(src: &str, n: usize) -> Result<MultiPoly<GaussRational>> {
    parse_poly(src, Scheme::Complex { n }, 2 * n)
}

/// Parses an exact rational from its `p/q` or integer string form.
pub fn parse_rational(src: &str) -> Result<Rational> {
    let p = parse_rational_poly(src, 0)?;
    Ok(p.constant_term())
}

/// An open polynomial inequality such as `x1 > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub poly: MultiPoly<Rational>,
    /// true for `> 0`, false for `< 0`
    pub positive: bool,
}

impl Constraint {
    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let v = self.poly.eval(point);
        if self.positive {
            v > Rational::zero()
        } else {
            v < Rational::zero()
        }
    }
}

/// Parses `"<poly> > 0"` or `"<poly> < 0"`.
pub fn parse_constraint(src: &str, nvars: usize) -> Result<Constraint> {
    let (lhs, positive) = if let Some(idx) = src.find('>') {
        (&src[..idx], true)
    } else if let Some(idx) = src.find('<') {
        (&src[..idx], false)
    } else {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "constraint must contain '>' or '<'".into(),
        });
    };
    let rhs = &src[src.find(['>', '<']).unwrap() + 1..];
    if rhs.trim() != "0" {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "constraint right-hand side must be 0".into(),
        });
    }
    Ok(Constraint {
        poly: parse_rational_poly(lhs, nvars)?,
        positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Mono;
    use crate::scalar::{gauss_int, rat, rat_int};

    #[test]
    fn parses_surface_polynomial() {
        let p = parse_rational_poly("x5 - x1*x4 - x2^2 - x3^2", 5).unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.coeff(&Mono(vec![1, 0, 0, 1, 0])), rat_int(-1));
        assert_eq!(p.coeff(&Mono(vec![0, 0, 0, 0, 1])), rat_int(1));
        // round-trip through display
        let q = parse_rational_poly(&p.to_string(), 5).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parses_fractions_and_whitespace() {
        let p = parse_rational_poly("  3/2 * x1 ^ 2\n- 1/3", 1).unwrap();
        assert_eq!(p.coeff(&Mono(vec![2])), rat(3, 2));
        assert_eq!(p.constant_term(), rat(-1, 3));
    }

    #[test]
    fn parses_complex_with_conjugates() {
        let p = parse_gauss_poly("z1*c1 - 1 + i*z2", 2).unwrap();
        assert_eq!(p.coeff(&Mono(vec![1, 0, 1, 0])), gauss_int(1, 0));
        assert_eq!(p.coeff(&Mono(vec![0, 1, 0, 0])), gauss_int(0, 1));
        assert_eq!(p.constant_term(), gauss_int(-1, 0));
    }

    #[test]
    fn error_carries_line_and_column() {
        let err = parse_rational_poly("x1 +\n x9", 3).unwrap_err();
        match err {
            crate::error::Error::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_imaginary_unit_in_real_ring() {
        assert!(parse_rational_poly("i*x1", 2).is_err());
    }

    #[test]
    fn parses_constraint() {
        let c = parse_constraint("x1 > 0", 5).unwrap();
        assert!(c.positive);
        assert!(c.holds_at(&[rat_int(2), rat_int(0), rat_int(0), rat_int(0), rat_int(0)]));
        assert!(!c.holds_at(&[rat_int(-2), rat_int(0), rat_int(0), rat_int(0), rat_int(0)]));
    }
}
