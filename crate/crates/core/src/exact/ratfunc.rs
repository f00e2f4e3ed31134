use std::fmt;
use std::ops::{Add, Mul, Sub};

use super::{BetaPoly, ExactError, Rat};

/// Rational function in β in canonical form: numerator and denominator
/// coprime, denominator monic. Two values are equal iff their canonical
/// forms are identical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFuncBeta {
    num: BetaPoly,
    den: BetaPoly,
}

impl RatFuncBeta {
    pub fn zero() -> Self {
        RatFuncBeta {
            num: BetaPoly::zero(),
            den: BetaPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFuncBeta::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        RatFuncBeta {
            num: BetaPoly::constant(c),
            den: BetaPoly::one(),
        }
    }

    pub fn from_poly(p: BetaPoly) -> Self {
        RatFuncBeta {
            num: p,
            den: BetaPoly::one(),
        }
    }

    /// Σ_k coeffs[k]·β^{-k}, stored as (Σ_k coeffs[k] β^{d-k}) / β^d.
    pub fn from_inverse_powers(coeffs: &[Rat]) -> Self {
        if coeffs.is_empty() {
            return RatFuncBeta::zero();
        }
        let d = coeffs.len() - 1;
        let num = BetaPoly::new(coeffs.iter().rev().cloned().collect());
        ratfunc_normalize(num, BetaPoly::monomial(Rat::one(), d)).expect("β^d is nonzero")
    }

    pub fn num(&self) -> &BetaPoly {
        &self.num
    }

    pub fn den(&self) -> &BetaPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        ratfunc_normalize(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &RatFuncBeta) -> Result<Self, ExactError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn eval(&self, beta: &Rat) -> Result<Rat, ExactError> {
        eval_rational(self, beta)
    }

    /// Cross-multiplication test; agrees with `==` on canonical forms.
    pub fn equals_by_cross_product(&self, other: &RatFuncBeta) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

/// Reduces `num/den` to lowest terms with a monic denominator.
pub fn ratfunc_normalize(num: BetaPoly, den: BetaPoly) -> Result<RatFuncBeta, ExactError> {
    if den.is_zero() {
        return Err(ExactError::ZeroDenominator);
    }
    if num.is_zero() {
        return Ok(RatFuncBeta::zero());
    }
    let g = BetaPoly::gcd(&num, &den);
    let (num, _) = num.div_rem(&g)?;
    let (den, _) = den.div_rem(&g)?;
    let lc = den.leading().expect("nonzero").recip()?;
    Ok(RatFuncBeta {
        num: num.scale(&lc),
        den: den.scale(&lc),
    })
}

/// Exact value at a rational β.
pub fn eval_rational(rf: &RatFuncBeta, beta: &Rat) -> Result<Rat, ExactError> {
    let d = rf.den.eval(beta);
    if d.is_zero() {
        return Err(ExactError::Pole {
            beta: beta.clone(),
            denominator: rf.den.to_string(),
        });
    }
    Ok(rf.num.eval(beta) / d)
}

impl fmt::Display for RatFuncBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == BetaPoly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFuncBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &RatFuncBeta {
    type Output = RatFuncBeta;
    fn add(self, rhs: &RatFuncBeta) -> RatFuncBeta {
        if self.den == rhs.den {
            return ratfunc_normalize(&self.num + &rhs.num, self.den.clone()).expect("nonzero den");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        ratfunc_normalize(num, &self.den * &rhs.den).expect("nonzero den")
    }
}

impl Sub for &RatFuncBeta {
    type Output = RatFuncBeta;
    fn sub(self, rhs: &RatFuncBeta) -> RatFuncBeta {
        let num = &(&self.num * &rhs.den) - &(&rhs.num * &self.den);
        ratfunc_normalize(num, &self.den * &rhs.den).expect("nonzero den")
    }
}

impl Mul for &RatFuncBeta {
    type Output = RatFuncBeta;
    fn mul(self, rhs: &RatFuncBeta) -> RatFuncBeta {
        ratfunc_normalize(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero den")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> BetaPoly {
        BetaPoly::new(c.iter().map(|&x| Rat::int(x)).collect())
    }

    #[test]
    fn self_cancellation() {
        let rf = ratfunc_normalize(p(&[1, 1]), p(&[1, 1])).unwrap();
        assert_eq!(rf, RatFuncBeta::one());
    }

    #[test]
    fn monic_denominator() {
        // 1 / ((β+1)(2β+1))
        let rf = ratfunc_normalize(p(&[1]), &p(&[1, 1]) * &p(&[1, 2])).unwrap();
        assert_eq!(rf.num(), &BetaPoly::constant(Rat::frac(1, 2)));
        assert_eq!(
            rf.den(),
            &BetaPoly::new(vec![Rat::frac(1, 2), Rat::frac(3, 2), Rat::one()])
        );
    }

    #[test]
    fn gcd_reduction() {
        let rf = ratfunc_normalize(p(&[0, 2]), p(&[0, 0, 4])).unwrap();
        assert_eq!(rf.num(), &BetaPoly::constant(Rat::frac(1, 2)));
        assert_eq!(rf.den(), &p(&[0, 1]));
    }

    #[test]
    fn zero_denominator() {
        assert!(matches!(
            ratfunc_normalize(p(&[1]), BetaPoly::zero()),
            Err(ExactError::ZeroDenominator)
        ));
    }

    #[test]
    fn evaluation() {
        let rf = ratfunc_normalize(p(&[1]), p(&[1, 1])).unwrap();
        assert_eq!(eval_rational(&rf, &Rat::one()).unwrap(), Rat::frac(1, 2));
        // (β+1)/(2β²): the n = 2 variance polynomial
        let v = ratfunc_normalize(p(&[1, 1]), p(&[0, 0, 2])).unwrap();
        assert_eq!(eval_rational(&v, &Rat::one()).unwrap(), Rat::one());
        assert_eq!(eval_rational(&v, &Rat::int(2)).unwrap(), Rat::frac(3, 8));
        assert_eq!(
            v,
            RatFuncBeta::from_inverse_powers(&[Rat::zero(), Rat::frac(1, 2), Rat::frac(1, 2)])
        );
    }

    #[test]
    fn pole_is_reported() {
        let rf = ratfunc_normalize(p(&[1]), p(&[1, 1])).unwrap();
        let err = eval_rational(&rf, &Rat::int(-1)).unwrap_err();
        assert!(matches!(err, ExactError::Pole { .. }));
        assert!(err.to_string().contains("b + 1"));
    }
}
