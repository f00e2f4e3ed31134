use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{ExactError, Rat};

/// Dense univariate polynomial in β with rational coefficients.
///
/// `coeffs[k]` is the coefficient of β^k. Trailing zeros are always trimmed,
/// so the zero polynomial has an empty coefficient list.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BetaPoly {
    coeffs: Vec<Rat>,
}

impl BetaPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        BetaPoly { coeffs }
    }

    pub fn zero() -> Self {
        BetaPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        BetaPoly::new(vec![c])
    }

    pub fn one() -> Self {
        BetaPoly::constant(Rat::one())
    }

    /// c·β^k
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        BetaPoly::new(coeffs)
    }

    /// a·β + b
    pub fn linear(a: Rat, b: Rat) -> Self {
        BetaPoly::new(vec![b, a])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &Rat) -> BetaPoly {
        BetaPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> BetaPoly {
        match self.leading() {
            None => BetaPoly::zero(),
            Some(lc) => self.scale(&lc.recip().expect("nonzero leading coefficient")),
        }
    }

    pub fn eval(&self, beta: &Rat) -> Rat {
        // Horner
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * beta + c)
    }

    pub fn eval_f64(&self, beta: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * beta + c.to_f64())
    }

    /// Euclidean division over ℚ: `self = q·divisor + r` with deg r < deg divisor.
    pub fn div_rem(&self, divisor: &BetaPoly) -> Result<(BetaPoly, BetaPoly), ExactError> {
        let dd = divisor.degree().ok_or(ExactError::DivisionByZero)?;
        let lc_inv = divisor.leading().unwrap().recip()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((BetaPoly::zero(), self.clone()));
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &(&c * dc);
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((BetaPoly::new(quot), BetaPoly::new(rem)))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &BetaPoly, b: &BetaPoly) -> BetaPoly {
        let (mut a, mut b) = (a.monic(), b.monic());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b is nonzero");
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn pow(&self, exp: u32) -> BetaPoly {
        (0..exp).fold(BetaPoly::one(), |acc, _| &acc * self)
    }
}

impl fmt::Display for BetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})b")?,
                _ => write!(f, "({c})b^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &BetaPoly {
    type Output = BetaPoly;
    fn add(self, rhs: &BetaPoly) -> BetaPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        BetaPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &BetaPoly {
    type Output = BetaPoly;
    fn sub(self, rhs: &BetaPoly) -> BetaPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        BetaPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &BetaPoly {
    type Output = BetaPoly;
    fn mul(self, rhs: &BetaPoly) -> BetaPoly {
        if self.is_zero() || rhs.is_zero() {
            return BetaPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        BetaPoly::new(out)
    }
}

impl Neg for &BetaPoly {
    type Output = BetaPoly;
    fn neg(self) -> BetaPoly {
        BetaPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> BetaPoly {
        BetaPoly::new(c.iter().map(|&x| Rat::int(x)).collect())
    }

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
    }

    #[test]
    fn division_identity() {
        let a = p(&[3, -1, 4, 1, 5]);
        let b = p(&[2, 7, 1]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn gcd_of_products() {
        // (β+1)(2β+1) and (β+1)(β+3)
        let a = &p(&[1, 1]) * &p(&[1, 2]);
        let b = &p(&[1, 1]) * &p(&[3, 1]);
        assert_eq!(BetaPoly::gcd(&a, &b), p(&[1, 1]));
        assert_eq!(BetaPoly::gcd(&p(&[0, 2]), &p(&[0, 0, 4])), p(&[0, 1]));
    }

    #[test]
    fn horner_eval() {
        assert_eq!(p(&[1, 1]).eval(&Rat::frac(1, 2)), Rat::frac(3, 2));
    }
}
