//! Deterministic Verblunsky/Szegő machinery.
//!
//! Conventions: `α_0 = 1` is implicit and the nontrivial coefficients are
//! `α_1, α_2, ...` with `α_n = conj(p_n(0))` for the monic orthogonal
//! polynomials `p_n`. The reversed polynomial `r_N(z) = z^N conj(p_N(1/conj z))`
//! satisfies `r_N(0) = 1`; we write `r_N = 1 + Σ x_k z^k`.

mod jacobian;
mod measure;

pub use jacobian::{
    jacobian_determinant, jacobian_determinant_exact, ComplexRat, JacobianMode, JacobianResult,
};
pub use measure::{measure_density, trig_moments, verblunsky_from_moments, CircleDensity};

use num_complex::Complex64;
use thiserror::Error;

use crate::combinatorics::gap_sequences;
use crate::series::{log_series, ComplexSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpucError {
    #[error("Verblunsky coefficient alpha_{index} has modulus {modulus} >= 1")]
    OutsideDisk { index: usize, modulus: f64 },
    #[error("grid size {0} is too small (need at least 16)")]
    GridTooSmall(usize),
    #[error("cannot resolve {requested} moments on a grid of {grid} points")]
    TooManyMoments { requested: usize, grid: usize },
    #[error("moment sequence is not positive definite at order {order}")]
    NotPositiveDefinite { order: usize },
    #[error("density is not strictly positive at grid point {0}")]
    NonPositiveDensity(usize),
    #[error("empty moment sequence")]
    EmptyMoments,
    #[error("{len} coefficients exceeds the limit of {max}")]
    TooManyCoefficients { len: usize, max: usize },
}

/// Finite Verblunsky sequence `α_1..α_N`, each strictly inside the unit disk.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VerblunskySeq {
    alphas: Vec<Complex64>,
}

impl VerblunskySeq {
    pub fn new(alphas: Vec<Complex64>) -> Result<Self, OpucError> {
        for (k, a) in alphas.iter().enumerate() {
            let modulus = a.norm();
            // NaN fails this comparison as well.
            if !(modulus < 1.0) {
                return Err(OpucError::OutsideDisk {
                    index: k + 1,
                    modulus,
                });
            }
        }
        Ok(VerblunskySeq { alphas })
    }

    pub fn zeros(n: usize) -> Self {
        VerblunskySeq {
            alphas: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.alphas
    }

    /// `α_k` with `α_0 = 1` and zero beyond the stored length.
    pub fn get(&self, k: usize) -> Complex64 {
        match k {
            0 => Complex64::new(1.0, 0.0),
            k => self.alphas.get(k - 1).copied().unwrap_or_default(),
        }
    }

    /// ∏ (1 − |α_n|²)^{exponent(n)}
    pub fn weighted_product(&self, exponent: impl Fn(usize) -> i32) -> f64 {
        self.alphas
            .iter()
            .enumerate()
            .map(|(k, a)| (1.0 - a.norm_sqr()).powi(exponent(k + 1)))
            .product()
    }
}

/// `r_N = 1 + Σ x_k z^k` from the Szegő recursion in reversed form:
/// `r_n = r_{n-1} + α_n z^n r_{n-1}^*`, i.e. `x_j ← x_j + α_n conj(x_{n-j})`.
pub fn reversed_polynomial(alpha: &VerblunskySeq) -> ComplexSeries {
    let mut x = vec![Complex64::new(1.0, 0.0)];
    for (k, &a) in alpha.as_slice().iter().enumerate() {
        let n = k + 1;
        let prev = x.clone();
        x.push(Complex64::new(0.0, 0.0));
        for j in 1..=n {
            x[j] = prev.get(j).copied().unwrap_or_default() + a * prev[n - j].conj();
        }
    }
    ComplexSeries::new(x)
}

/// The gap-sequence expansion of `x_n`: Σ over i(1) > j(1) > ... > j(L) ≥ 0
/// with gap sum `n` and indices ≤ `max_index` of ∏ α_{i(u)} conj(α_{j(u)}).
///
/// `alpha(k)` must return 1 at `k = 0`.
pub fn x_series_truncated(alpha: impl Fn(u32) -> Complex64, n: u32, max_index: u32) -> Complex64 {
    gap_sequences(n, max_index)
        .iter()
        .map(|g| {
            g.pairs()
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, &(i, j)| {
                    acc * alpha(i) * alpha(j).conj()
                })
        })
        .sum()
}

/// `x_1..x_{n_max}` of the same expansion by a transfer scan over the
/// indices `0..=max_index`; O(max_index · n_max) instead of enumerating
/// every gap sequence. Returns `[1, x_1, ..., x_{n_max}]`.
pub fn x_coefficients_truncated(
    alpha: impl Fn(u32) -> Complex64,
    n_max: usize,
    max_index: u32,
) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    // closed[g]: completed pairs with total gap g; open[g]: one pair opened at
    // some j < t, with g counting completed gaps plus t - j.
    let mut closed = vec![zero; n_max + 1];
    let mut open = vec![zero; n_max + 1];
    closed[0] = Complex64::new(1.0, 0.0);
    for t in 0..=max_index {
        let a = alpha(t);
        let ac = a.conj();
        let mut next_closed = closed.clone();
        for g in 1..=n_max {
            next_closed[g] += a * open[g];
        }
        let mut next_open = vec![zero; n_max + 1];
        for g in 0..n_max {
            // carry an existing open pair across t -> t+1, or open a pair at t
            next_open[g + 1] = open[g] + ac * closed[g];
        }
        closed = next_closed;
        open = next_open;
    }
    closed
}

/// Number of zeros of `r` inside the unit disk by the argument principle on a
/// `grid`-point sampling of the circle, together with min |r| on the circle.
pub fn winding_number(r: &ComplexSeries, grid: usize) -> (i64, f64) {
    let mut total = 0.0;
    let mut min_mod = f64::INFINITY;
    let pt = |k: usize| {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
        r.eval(Complex64::from_polar(1.0, theta))
    };
    let mut prev = pt(0);
    for k in 1..=grid {
        let cur = pt(k % grid);
        min_mod = min_mod.min(cur.norm());
        total += (cur / prev).arg();
        prev = cur;
    }
    (
        (total / (2.0 * std::f64::consts::PI)).round() as i64,
        min_mod,
    )
}

/// True when `r` has no zeros in the closed unit disk (checked on a grid).
pub fn nonvanishing_on_closed_disk(r: &ComplexSeries, grid: usize) -> bool {
    let (w, min_mod) = winding_number(r, grid);
    w == 0 && min_mod > 0.0
}

/// |exp(−Σ_{m≤M} m|f_m|²) − ∏ (1−|α_n|²)^n| where `f = −log r_N` is expanded
/// as a power series to order `order`.
pub fn szego_identity_gap(alpha: &VerblunskySeq, order: usize) -> f64 {
    let r = reversed_polynomial(alpha).resized(order + 1);
    let f = log_series(&r).expect("r_N(0) = 1");
    let energy: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, c)| m as f64 * c.norm_sqr())
        .sum();
    let product = alpha.weighted_product(|n| n as i32);
    ((-energy).exp() - product).abs()
}
