use std::fmt;
use std::ops::{Add, Mul, Neg};
use std::str::FromStr;

use super::Rational;
use crate::error::{Error, Result};

/// Element of `Z[1/2]`: a rational whose denominator is a power of two.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyadic(Rational);

impl Dyadic {
    pub fn new(r: Rational) -> Result<Self> {
        match r.dyadic_exponent() {
            Some(_) => Ok(Dyadic(r)),
            None => Err(Error::NotDyadic(r.to_string())),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic(Rational::from_int(n))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn half(&self) -> Self {
        Dyadic(self.0.mul_pow2(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// Exponent `k` of the denominator `2^k`.
    pub fn exponent(&self) -> u32 {
        self.0.dyadic_exponent().expect("validated on construction")
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Dyadic::new(s.parse()?)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        Dyadic(&self.0 + &rhs.0)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic(&self.0 * &rhs.0)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::q;

    #[test]
    fn rejects_odd_denominators() {
        assert!(Dyadic::new(q(1, 3)).is_err());
        assert_eq!(Dyadic::one().half().half(), Dyadic::new(q(1, 4)).unwrap());
        assert_eq!("3/8".parse::<Dyadic>().unwrap().exponent(), 3);
    }
}
