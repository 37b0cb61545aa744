use std::fmt;

use crate::error::{Error, Result};
use crate::scalars::Rational;

/// Univariate polynomial over the rationals, coefficients lowest degree first.
///
/// Trailing zero coefficients are always stripped; the empty list is zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_int(c)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The monomial `c * x^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(Rational::is_one)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += &(a * b);
                }
            }
        }
        Poly::new(out)
    }

    /// Euclidean division: returns `(q, r)` with `self = q * divisor + r`
    /// and `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = divisor.coeffs[dd].recip()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let top = rem.len() - 1;
            let c = &rem[top] * &lead_inv;
            if !c.is_zero() {
                for (k, d) in divisor.coeffs.iter().enumerate() {
                    rem[top - dd + k] -= &(&c * d);
                }
            }
            quot[top - dd] = c;
            rem.pop();
            while rem.last().is_some_and(Rational::is_zero) {
                rem.pop();
            }
        }
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        if divisor.degree().is_some_and(|d| self.degree().is_none_or(|s| s < d)) {
            return Ok(self.clone());
        }
        Ok(self.div_rem(divisor)?.1)
    }

    /// Extended Euclid: returns `(g, s, t)` with `s*self + t*other = g` and `g`
    /// monic (or zero when both inputs vanish).
    pub fn ext_gcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (quo, rem) = r0.div_rem(&r1).expect("nonzero divisor");
            r0 = std::mem::replace(&mut r1, rem);
            let s2 = s0.sub(&quo.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&quo.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        match r0.leading().cloned() {
            Some(lead) => {
                let inv = lead.recip().expect("nonzero leading coefficient");
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
            None => (r0, s0, t0),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Human-readable rendering such as `x^2 - 1`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match k {
                0 => String::new(),
                1 => "x".into(),
                _ => format!("x^{k}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    /// Canonical coefficient-array encoding, e.g. `[-1, 0, 1]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl std::str::FromStr for Poly {
    type Err = Error;

    /// Parses the coefficient-array encoding produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("invalid polynomial {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(Poly::zero());
        }
        inner.split(',').map(str::parse).collect::<Result<Vec<_>>>().map(Poly::new)
    }
}

/// Element of `Q[x]/(m)` held by its reduced representative.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuotElem {
    modulus: Poly,
    rep: Poly,
}

pub fn check_modulus(m: &Poly) -> Result<()> {
    if m.is_monic() && m.degree().is_some_and(|d| d >= 1) {
        Ok(())
    } else {
        Err(Error::NonMonicModulus(m.to_string()))
    }
}

/// Reduces `p` modulo the monic polynomial `m`.
pub fn quot_reduce(p: &Poly, m: &Poly) -> Result<QuotElem> {
    check_modulus(m)?;
    Ok(QuotElem { modulus: m.clone(), rep: p.rem(m)? })
}

/// Inverts `e` by the extended Euclidean algorithm.
pub fn quot_invert(e: &QuotElem) -> Result<QuotElem> {
    let (g, s, _) = e.rep.ext_gcd(&e.modulus);
    if g.degree() != Some(0) {
        return Err(Error::NotInvertible);
    }
    quot_reduce(&s, &e.modulus)
}

impl QuotElem {
    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn rep(&self) -> &Poly {
        &self.rep
    }

    pub fn into_rep(self) -> Poly {
        self.rep
    }

    fn same_ring(&self, other: &QuotElem) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch {
                left: format!("Q[x]/({})", self.modulus.pretty()),
                right: format!("Q[x]/({})", other.modulus.pretty()),
            })
        }
    }

    pub fn add(&self, other: &QuotElem) -> Result<QuotElem> {
        self.same_ring(other)?;
        Ok(QuotElem { modulus: self.modulus.clone(), rep: self.rep.add(&other.rep) })
    }

    pub fn mul(&self, other: &QuotElem) -> Result<QuotElem> {
        self.same_ring(other)?;
        quot_reduce(&self.rep.mul(&other.rep), &self.modulus)
    }

    pub fn is_one(&self) -> bool {
        self.rep == Poly::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::q;

    fn x2m1() -> Poly {
        Poly::from_ints(&[-1, 0, 1])
    }

    #[test]
    fn trailing_zeros_are_stripped() {
        let p = Poly::new(vec![q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(Poly::new(vec![q(0, 1)]), Poly::zero());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(quot_reduce(&Poly::from_ints(&[0, 0, 1]), &x2m1()).unwrap().rep(), &Poly::one());
        assert_eq!(quot_reduce(&Poly::x(), &x2m1()).unwrap().rep(), &Poly::x());
        let p = Poly::from_ints(&[0, 1, 0, 1]);
        assert_eq!(quot_reduce(&p, &x2m1()).unwrap().rep(), &Poly::from_ints(&[0, 2]));
        assert!(matches!(
            quot_reduce(&p, &Poly::from_ints(&[-1, 0, 2])),
            Err(Error::NonMonicModulus(_))
        ));
        assert!(quot_reduce(&p, &Poly::one()).is_err());
    }

    #[test]
    fn invert_examples() {
        let x = quot_reduce(&Poly::x(), &x2m1()).unwrap();
        assert_eq!(quot_invert(&x).unwrap(), x);
        let one = quot_reduce(&Poly::one(), &x2m1()).unwrap();
        assert_eq!(quot_invert(&one).unwrap(), one);
        let xm1 = quot_reduce(&Poly::from_ints(&[-1, 1]), &x2m1()).unwrap();
        assert_eq!(quot_invert(&xm1), Err(Error::NotInvertible));
        let zero = quot_reduce(&Poly::zero(), &x2m1()).unwrap();
        assert_eq!(quot_invert(&zero), Err(Error::NotInvertible));
    }

    #[test]
    fn ext_gcd_bezout() {
        let a = Poly::from_ints(&[2, 3, 1]);
        let b = Poly::from_ints(&[-1, 0, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(g, Poly::from_ints(&[1, 1]));
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }

    #[test]
    fn text_round_trip() {
        let p = Poly::new(vec![q(-1, 2), q(0, 1), q(3, 1)]);
        assert_eq!(p.to_string(), "[-1/2, 0, 3]");
        assert_eq!(p.to_string().parse::<Poly>().unwrap(), p);
        assert_eq!("[]".parse::<Poly>().unwrap(), Poly::zero());
        assert_eq!(p.pretty(), "3*x^2 - 1/2");
    }
}
