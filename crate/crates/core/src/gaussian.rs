//! Exact moments E(x^p (x^q)^*) under the Gaussian law of the field, where
//! the f_n are independent complex Gaussians with E|f_n|² = 1/(nβ) and
//! x = exp(−f). Every such moment is a polynomial in s = β^{-1}.

use std::collections::HashMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::combinatorics::{f_weight, haar_weight, partitions, MultiIndex};
use crate::exact::{Rat, RatFuncBeta};

/// Largest degree accepted by [`gaussian_x_moment_raw`].
pub const RAW_DEGREE_GUARD: u32 = 8;
/// Largest n accepted by [`a_coefficients`].
pub const A_COEFF_GUARD: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("degree {deg} exceeds the limit {max} for the direct double sum")]
    DegreeGuard { deg: u32, max: u32 },
    #[error("n = {n} exceeds the limit {max}")]
    TooLarge { n: u32, max: u32 },
    #[error("partition sum and elementary-symmetric formula disagree at n = {n}, k = {k}: {by_partitions} vs {by_symmetric}")]
    Inconsistent {
        n: u32,
        k: u32,
        by_partitions: Rat,
        by_symmetric: Rat,
    },
}

/// Σ_k a_k β^{-k} with exact coefficients; `coeffs[k]` multiplies β^{-k}.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct MomentPolynomial {
    coeffs: Vec<Rat>,
}

impl MomentPolynomial {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        MomentPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        MomentPolynomial::default()
    }

    pub fn one() -> Self {
        MomentPolynomial::new(vec![Rat::one()])
    }

    /// c·β^{-k}
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        MomentPolynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of β^{-k}.
    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of β^{-1} present.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &MomentPolynomial) -> MomentPolynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        MomentPolynomial::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &MomentPolynomial) -> MomentPolynomial {
        if self.is_zero() || other.is_zero() {
            return MomentPolynomial::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        MomentPolynomial::new(out)
    }

    pub fn scale(&self, c: &Rat) -> MomentPolynomial {
        MomentPolynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, exp: u32) -> MomentPolynomial {
        (0..exp).fold(MomentPolynomial::one(), |acc, _| acc.mul(self))
    }

    /// Multiplies by β^{-1}.
    pub fn shift(&self) -> MomentPolynomial {
        if self.is_zero() {
            return MomentPolynomial::zero();
        }
        let mut coeffs = vec![Rat::zero()];
        coeffs.extend(self.coeffs.iter().cloned());
        MomentPolynomial::new(coeffs)
    }

    pub fn to_ratfunc(&self) -> RatFuncBeta {
        RatFuncBeta::from_inverse_powers(&self.coeffs)
    }

    /// Exact value at β; β must be nonzero unless the polynomial is constant.
    pub fn eval(&self, beta: &Rat) -> Rat {
        if self.coeffs.len() <= 1 {
            return self.coeff(0);
        }
        let s = beta.recip().expect("beta must be nonzero");
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * &s + c)
    }

    pub fn eval_f64(&self, beta: f64) -> f64 {
        let s = 1.0 / beta;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + c.to_f64())
    }

    /// Nonzero terms as (exponent k of β^{-k}, coefficient), highest k first.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
    }
}

impl std::fmt::Display for MomentPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .terms()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                k => format!("({c})b^-{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl std::fmt::Debug for MomentPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MomentPolynomial({self})")
    }
}

/// Serialized as `{"k": "num/den", ...}` for the nonzero coefficients of β^{-k}.
impl Serialize for MomentPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        for (k, c) in self.terms() {
            map.serialize_entry(&k.to_string(), c)?;
        }
        map.end()
    }
}

/// E(f^p (f^q)^*) = p!/∏ n^{p(n)} · β^{-|p|} when p = q, else 0.
pub fn gaussian_f_moment(p: &MultiIndex, q: &MultiIndex) -> MomentPolynomial {
    if p != q {
        return MomentPolynomial::zero();
    }
    let weights: num_bigint::BigInt = p
        .iter()
        .map(|(n, c)| num_traits::pow(num_bigint::BigInt::from(n), c as usize))
        .product();
    let c = Rat::new(p.factorial(), weights).expect("positive weight");
    MomentPolynomial::monomial(c, p.size() as usize)
}

/// Σ over cycle types L of deg(p) of haar(L)·f(p,L)·f(q,L)·β^{-|L|}.
///
/// Cycle types with a part longer than the smallest of the two largest parts
/// of p and q cannot be reached from both sides and are skipped.
pub fn gaussian_x_moment(p: &MultiIndex, q: &MultiIndex) -> MomentPolynomial {
    let d = p.deg();
    if d != q.deg() {
        return MomentPolynomial::zero();
    }
    let cut = p.max_support().min(q.max_support());
    let mut coeffs = vec![Rat::zero(); d as usize + 1];
    for l in partitions(d) {
        if l.max_support() > cut {
            debug_assert!(f_weight(p, &l) == 0 || f_weight(q, &l) == 0);
            continue;
        }
        let fp = f_weight(p, &l);
        if fp == 0 {
            continue;
        }
        let fq = f_weight(q, &l);
        if fq == 0 {
            continue;
        }
        coeffs[l.size() as usize] += haar_weight(&l) * Rat::int(fp) * Rat::int(fq);
    }
    MomentPolynomial::new(coeffs)
}

/// Every labelled family (J_{n,r}) with deg J_{n,r} = n, paired with
/// 1/∏ J_{n,r}! and the total Σ J_{n,r}.
fn labelled_families(p: &MultiIndex) -> Vec<(MultiIndex, Rat)> {
    let mut families = vec![(MultiIndex::empty(), Rat::one())];
    for n in p.parts() {
        let choices = partitions(n);
        families = families
            .iter()
            .flat_map(|(total, w)| {
                choices.iter().map(move |j| {
                    let inv = Rat::new(1, j.factorial()).expect("positive factorial");
                    (total.add(j), w * &inv)
                })
            })
            .collect();
    }
    families
}

/// The direct double sum over labelled families (J_{n,r}) of p and (K_{m,s})
/// of q with Σ J = Σ K = L, each pair contributing
/// L!/(∏ J_{n,r}! ∏ K_{m,s}! ∏_u u^{L(u)}) β^{-|L|}.
pub fn gaussian_x_moment_raw(
    p: &MultiIndex,
    q: &MultiIndex,
) -> Result<MomentPolynomial, GaussianError> {
    for deg in [p.deg(), q.deg()] {
        if deg > RAW_DEGREE_GUARD {
            return Err(GaussianError::DegreeGuard {
                deg,
                max: RAW_DEGREE_GUARD,
            });
        }
    }
    let d = p.deg();
    if d != q.deg() {
        return Ok(MomentPolynomial::zero());
    }
    let left = labelled_families(p);
    let right = labelled_families(q);
    let mut pair_weight: HashMap<&MultiIndex, Rat> = HashMap::new();
    let mut coeffs = vec![Rat::zero(); d as usize + 1];
    for (lj, wj) in &left {
        for (lk, wk) in &right {
            if lj != lk {
                continue;
            }
            let gauss = pair_weight.entry(lj).or_insert_with(|| {
                let powers: num_bigint::BigInt = lj
                    .iter()
                    .map(|(u, c)| num_traits::pow(num_bigint::BigInt::from(u), c as usize))
                    .product();
                Rat::new(lj.factorial(), powers).expect("positive")
            });
            coeffs[lj.size() as usize] += wj * wk * &*gauss;
        }
    }
    Ok(MomentPolynomial::new(coeffs))
}

/// ∏_{k=1}^n ((1/k)β^{-1} + (k−1)/k).
pub fn variance_pmf(n: u32) -> MomentPolynomial {
    (1..=n as i64).fold(MomentPolynomial::one(), |acc, k| {
        acc.mul(&MomentPolynomial::new(vec![
            Rat::frac(k - 1, k),
            Rat::frac(1, k),
        ]))
    })
}

/// ∏_n variance_pmf(n)^{p(n)}.
pub fn multiplicity_free_moment(p: &MultiIndex) -> MomentPolynomial {
    p.iter().fold(MomentPolynomial::one(), |acc, (n, c)| {
        acc.mul(&variance_pmf(n).pow(c))
    })
}

/// (a_1, ..., a_n) where a_k is the total Haar weight of cycle types of n
/// with k cycles, cross-checked against e_{n−k}(0, 1, ..., n−1)/n!.
pub fn a_coefficients(n: u32) -> Result<Vec<Rat>, GaussianError> {
    if n > A_COEFF_GUARD {
        return Err(GaussianError::TooLarge {
            n,
            max: A_COEFF_GUARD,
        });
    }
    let mut by_partitions = vec![Rat::zero(); n as usize + 1];
    for l in partitions(n) {
        by_partitions[l.size() as usize] += haar_weight(&l);
    }
    // e[j] = elementary symmetric polynomial of degree j in 0, 1, ..., n−1
    let mut e = vec![num_bigint::BigInt::from(0); n as usize + 1];
    e[0] = 1.into();
    for l in 0..n {
        for j in (1..=n as usize).rev() {
            let prev = e[j - 1].clone();
            e[j] += prev * l;
        }
    }
    let n_fact = crate::combinatorics::factorial(n);
    let mut out = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let by_symmetric = Rat::new(e[(n - k) as usize].clone(), n_fact.clone()).expect("n! > 0");
        let by_part = by_partitions[k as usize].clone();
        if by_part != by_symmetric {
            return Err(GaussianError::Inconsistent {
                n,
                k,
                by_partitions: by_part,
                by_symmetric,
            });
        }
        out.push(by_part);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    fn poly(pairs: &[(usize, i64, i64)]) -> MomentPolynomial {
        pairs
            .iter()
            .fold(MomentPolynomial::zero(), |acc, &(k, n, d)| {
                acc.add(&MomentPolynomial::monomial(Rat::frac(n, d), k))
            })
    }

    #[test]
    fn f_moments() {
        assert_eq!(
            gaussian_f_moment(&mi("1:1"), &mi("1:1")),
            poly(&[(1, 1, 1)])
        );
        assert!(gaussian_f_moment(&mi("1:1"), &mi("2:1")).is_zero());
        assert_eq!(
            gaussian_f_moment(&mi("1:2"), &mi("1:2")),
            poly(&[(2, 2, 1)])
        );
        assert_eq!(
            gaussian_f_moment(&mi("2:1"), &mi("2:1")),
            poly(&[(1, 1, 2)])
        );
    }

    #[test]
    fn x_moment_examples() {
        assert_eq!(
            gaussian_x_moment(&mi("1:1"), &mi("1:1")),
            poly(&[(1, 1, 1)])
        );
        assert_eq!(
            gaussian_x_moment(&mi("2:2"), &mi("2:2")),
            poly(&[(4, 3, 2), (3, 1, 1), (2, 1, 2)])
        );
        assert_eq!(
            gaussian_x_moment(&mi("2:1"), &mi("2:1")),
            poly(&[(2, 1, 2), (1, 1, 2)])
        );
        assert!(gaussian_x_moment(&mi("1:1"), &mi("1:2")).is_zero());
        assert_eq!(
            gaussian_x_moment(&MultiIndex::empty(), &MultiIndex::empty()),
            MomentPolynomial::one()
        );
    }

    #[test]
    fn raw_examples() {
        assert_eq!(
            gaussian_x_moment_raw(&mi("1:3"), &mi("1:3")).unwrap(),
            poly(&[(3, 6, 1)])
        );
        assert!(gaussian_x_moment_raw(&mi("1:1"), &mi("2:1"))
            .unwrap()
            .is_zero());
        assert_eq!(
            gaussian_x_moment_raw(&mi("9:1"), &mi("9:1")),
            Err(GaussianError::DegreeGuard { deg: 9, max: 8 })
        );
    }

    #[test]
    fn raw_matches_partition_form_small() {
        for d in 0..=4 {
            let ps = partitions(d);
            for p in &ps {
                for q in &ps {
                    assert_eq!(
                        gaussian_x_moment_raw(p, q).unwrap(),
                        gaussian_x_moment(p, q),
                        "{p} {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance_pmf(1), poly(&[(1, 1, 1)]));
        assert_eq!(variance_pmf(2), poly(&[(2, 1, 2), (1, 1, 2)]));
        assert_eq!(variance_pmf(3), poly(&[(3, 1, 6), (2, 1, 2), (1, 1, 3)]));
    }

    #[test]
    fn multiplicity_free_examples() {
        assert_eq!(
            multiplicity_free_moment(&mi("1:1,2:1")),
            poly(&[(3, 1, 2), (2, 1, 2)])
        );
        assert_eq!(multiplicity_free_moment(&mi("1:2")), poly(&[(2, 1, 1)]));
        assert_eq!(multiplicity_free_moment(&mi("4:1")), variance_pmf(4));
        assert_eq!(
            gaussian_x_moment(&mi("1:2"), &mi("2:1")),
            multiplicity_free_moment(&mi("1:2"))
        );
    }

    #[test]
    fn a_coefficient_examples() {
        assert_eq!(
            a_coefficients(3).unwrap(),
            vec![Rat::frac(1, 3), Rat::frac(1, 2), Rat::frac(1, 6)]
        );
        for n in 1..=12 {
            let a = a_coefficients(n).unwrap();
            assert_eq!(a.iter().sum::<Rat>(), Rat::one());
            assert_eq!(a.as_slice(), &variance_pmf(n).coeffs()[1..]);
        }
        assert!(a_coefficients(21).is_err());
    }

    #[test]
    fn evaluation_and_conversion() {
        let v2 = variance_pmf(2);
        assert_eq!(v2.eval(&Rat::one()), Rat::one());
        assert_eq!(v2.eval(&Rat::int(2)), Rat::frac(3, 8));
        assert_eq!(v2.to_ratfunc().eval(&Rat::int(2)).unwrap(), Rat::frac(3, 8));
        assert!((v2.eval_f64(0.5) - 3.0).abs() < 1e-15);
        assert_eq!(v2.shift(), poly(&[(3, 1, 2), (2, 1, 2)]));
    }

    #[test]
    fn serializes_highest_power_first() {
        let json = serde_json::to_string(&variance_pmf(3)).unwrap();
        assert_eq!(json, r#"{"3":"1/6","2":"1/2","1":"1/3"}"#);
    }
}
