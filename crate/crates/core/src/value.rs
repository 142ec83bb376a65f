//! Exact scalar values for couplings and Hamiltonian entries.
//!
//! Couplings are given by a small literal grammar: integers, rationals,
//! decimals, and square roots of rationals. Matrix entries are finite sums
//! of terms `c * sqrt(r)` with `c, r` rational, which is closed under the
//! additions performed while assembling a one-excitation block.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer, Rational};

/// A single coupling literal: `c * sqrt(r)` with `r` squarefree-normalized.
///
/// `r == 1` is the purely rational case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtTerm {
    pub coeff: Rational,
    pub radicand: Rational,
}

impl SqrtTerm {
    pub fn rational(c: Rational) -> Self {
        SqrtTerm {
            coeff: c,
            radicand: Rational::from(1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0
    }

    pub fn to_float(&self, prec: u32) -> Float {
        // Guard digits so the rounded product stays within 1 ulp at `prec`.
        let work = prec + 16;
        let r = Float::with_val(work, &self.radicand).sqrt();
        let c = Float::with_val(work, &self.coeff);
        Float::with_val(prec, c * r)
    }
}

/// Pull square factors out of `n`, returning (outside, squarefree inside).
fn squarefree_part(n: &Integer) -> (Integer, Integer) {
    let mut inside = n.clone();
    let mut outside = Integer::from(1);
    let mut d = Integer::from(2);
    // Trial division is fine: radicands come from small config literals.
    while Integer::from(&d * &d) <= inside {
        let d2 = Integer::from(&d * &d);
        while inside.is_divisible(&d2) {
            inside /= &d2;
            outside *= &d;
        }
        d += 1;
    }
    (outside, inside)
}

/// An exact value: a sum of `c_i * sqrt(r_i)` terms with distinct squarefree
/// radicands. Supports the ring operations needed for matrix assembly.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactValue {
    /// Terms sorted by radicand; no zero coefficients; radicands squarefree.
    terms: Vec<SqrtTerm>,
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue { terms: vec![] }
    }

    pub fn from_rational(c: Rational) -> Self {
        let mut v = ExactValue::zero();
        v.add_term(SqrtTerm::rational(c));
        v
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from(n))
    }

    /// `c * sqrt(a/b)` normalized so the radicand is a squarefree integer
    /// (sqrt(a/b) = sqrt(a*b)/b).
    pub fn sqrt_of(c: Rational, radicand: Rational) -> Self {
        assert!(radicand >= 0, "negative radicand");
        if radicand == 0 || c == 0 {
            return ExactValue::zero();
        }
        let (num, den) = radicand.into_numer_denom();
        let prod = Integer::from(&num * &den);
        let (out, inner) = squarefree_part(&prod);
        let coeff = c * Rational::from((out, den));
        if inner == 1 {
            Self::from_rational(coeff)
        } else {
            let mut v = ExactValue::zero();
            v.add_term(SqrtTerm {
                coeff,
                radicand: Rational::from(inner),
            });
            v
        }
    }

    fn add_term(&mut self, t: SqrtTerm) {
        if t.is_zero() {
            return;
        }
        match self
            .terms
            .binary_search_by(|probe| probe.radicand.cmp(&t.radicand))
        {
            Ok(i) => {
                self.terms[i].coeff += t.coeff;
                if self.terms[i].is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exactly rational? Returns the value if so.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::from(0)),
            1 if self.terms[0].radicand == 1 => Some(self.terms[0].coeff.clone()),
            _ => None,
        }
    }

    pub fn add(&self, other: &ExactValue) -> ExactValue {
        let mut out = self.clone();
        for t in &other.terms {
            out.add_term(t.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExactValue) -> ExactValue {
        let mut out = self.clone();
        for t in &other.terms {
            out.add_term(SqrtTerm {
                coeff: -t.coeff.clone(),
                radicand: t.radicand.clone(),
            });
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> ExactValue {
        if *c == 0 {
            return ExactValue::zero();
        }
        ExactValue {
            terms: self
                .terms
                .iter()
                .map(|t| SqrtTerm {
                    coeff: Rational::from(&t.coeff * c),
                    radicand: t.radicand.clone(),
                })
                .collect(),
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        let work = prec + 16 + 8 * self.terms.len() as u32;
        let mut acc = Float::with_val(work, 0);
        for t in &self.terms {
            acc += t.to_float(work);
        }
        Float::with_val(prec, acc)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if t.radicand == 1 {
                write!(f, "{}", t.coeff)?;
            } else if t.coeff == 1 {
                write!(f, "sqrt({})", t.radicand)?;
            } else {
                write!(f, "{}*sqrt({})", t.coeff, t.radicand)?;
            }
        }
        Ok(())
    }
}

/// Parse errors for coupling literals.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LiteralError {
    #[error("empty coupling literal")]
    Empty,
    #[error("malformed coupling literal `{0}`")]
    Malformed(String),
    #[error("negative radicand in `{0}`")]
    NegativeRadicand(String),
}

fn parse_rational(s: &str) -> Result<Rational, LiteralError> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = Integer::from_str(num.trim())
            .map_err(|_| LiteralError::Malformed(s.to_string()))?;
        let d = Integer::from_str(den.trim())
            .map_err(|_| LiteralError::Malformed(s.to_string()))?;
        if d == 0 {
            return Err(LiteralError::Malformed(s.to_string()));
        }
        return Ok(Rational::from((n, d)));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // Decimal digits are an exact rational.
        let digits = format!("{}{}", int_part.trim_start_matches(['+', '-']), frac_part);
        let n = Integer::from_str(&digits)
            .map_err(|_| LiteralError::Malformed(s.to_string()))?;
        let den = Integer::from(Integer::u_pow_u(10, frac_part.len() as u32));
        let mut r = Rational::from((n, den));
        if s.trim_start().starts_with('-') {
            r = -r;
        }
        return Ok(r);
    }
    Integer::from_str(s)
        .map(Rational::from)
        .map_err(|_| LiteralError::Malformed(s.to_string()))
}

/// Parse a coupling literal: `int`, `a/b`, decimal, or `sqrt(rational)`,
/// optionally with a leading sign or rational factor as in `2*sqrt(3)`.
pub fn parse_coupling(s: &str) -> Result<ExactValue, LiteralError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(LiteralError::Empty);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (Rational::from(-1), rest.trim()),
        None => (Rational::from(1), s.strip_prefix('+').unwrap_or(s).trim()),
    };
    let (factor, body) = match body.split_once('*') {
        Some((f, rest)) if rest.trim_start().starts_with("sqrt") => {
            (parse_rational(f)?, rest.trim())
        }
        _ => (Rational::from(1), body),
    };
    if let Some(rest) = body.strip_prefix("sqrt") {
        let rest = rest.trim();
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| LiteralError::Malformed(s.to_string()))?;
        let rad = parse_rational(inner)?;
        if rad < 0 {
            return Err(LiteralError::NegativeRadicand(s.to_string()));
        }
        return Ok(ExactValue::sqrt_of(sign * factor, rad));
    }
    Ok(ExactValue::from_rational(sign * factor * parse_rational(body)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64_of(v: &ExactValue) -> f64 {
        v.to_float(64).to_f64()
    }

    #[test]
    fn parses_literal_grammar() {
        assert_eq!(
            parse_coupling("2").unwrap(),
            ExactValue::from_integer(2)
        );
        assert_eq!(
            parse_coupling("4/3").unwrap(),
            ExactValue::from_rational(Rational::from((4, 3)))
        );
        assert_eq!(
            parse_coupling("1.5").unwrap(),
            ExactValue::from_rational(Rational::from((3, 2)))
        );
        assert!((f64_of(&parse_coupling("sqrt(3)").unwrap()) - 3f64.sqrt()).abs() < 1e-15);
        assert!(
            (f64_of(&parse_coupling("sqrt(5/2)").unwrap()) - (2.5f64).sqrt()).abs() < 1e-15
        );
        assert!((f64_of(&parse_coupling("-sqrt(2)").unwrap()) + 2f64.sqrt()).abs() < 1e-15);
        assert!(parse_coupling("sqrt(-1)").is_err());
        assert!(parse_coupling("").is_err());
        assert!(parse_coupling("abc").is_err());
    }

    #[test]
    fn sqrt_normalization_merges_terms() {
        // sqrt(8) = 2 sqrt(2), so sqrt(8) - 2 sqrt(2) = 0.
        let a = parse_coupling("sqrt(8)").unwrap();
        let b = parse_coupling("2*sqrt(2)").unwrap();
        assert!(a.sub(&b).is_zero());
        // sqrt(9/4) is exactly rational.
        let c = parse_coupling("sqrt(9/4)").unwrap();
        assert_eq!(c.as_rational(), Some(Rational::from((3, 2))));
    }

    #[test]
    fn arithmetic_and_display() {
        let a = parse_coupling("sqrt(2)").unwrap();
        let s = a.add(&a);
        assert!((f64_of(&s) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let sc = s.scale(&Rational::from((1, 2)));
        assert_eq!(sc, a);
        assert_eq!(ExactValue::from_integer(0).to_string(), "0");
    }
}
