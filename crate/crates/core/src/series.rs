//! Truncated complex power series and the maps between the field
//! coefficients `f` and the coefficients `x` of `x = e^{-f}`.
//!
//! Throughout, `x = 1 + Σ x_n z^n` and `f = Σ_{n≥1} f_n z^n` are related by
//! `x = exp(-f)`, equivalently `f = -log x`. With this sign convention
//! `f_1 = -x_1` and `f_2 = -x_2 + x_1²/2`.

use num_complex::Complex64;
use thiserror::Error;

use crate::combinatorics::partitions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("log_series needs constant term 1, got {0}")]
    ConstantNotOne(Complex64),
    #[error("exp_series needs constant term 0, got {0}")]
    ConstantNotZero(Complex64),
}

const CONSTANT_TOL: f64 = 1e-12;

/// Coefficients `c_0, c_1, ..., c_M` of a polynomial or truncated power series.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexSeries {
    pub coeffs: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        ComplexSeries { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Pads with zeros (or truncates) to exactly `len` coefficients.
    pub fn resized(&self, len: usize) -> ComplexSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, Complex64::new(0.0, 0.0));
        ComplexSeries { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

/// `f = -log(x)` to the length of `x`, via `x f' = -x'`.
pub fn log_series(x: &ComplexSeries) -> Result<ComplexSeries, SeriesError> {
    let Some(&x0) = x.coeffs.first() else {
        return Ok(ComplexSeries::default());
    };
    if (x0 - 1.0).norm() > CONSTANT_TOL {
        return Err(SeriesError::ConstantNotOne(x0));
    }
    let len = x.len();
    let mut f = vec![Complex64::new(0.0, 0.0); len];
    for n in 1..len {
        // Σ_{k=1}^{n} k f_k x_{n-k} = -n x_n
        let mut acc = -(n as f64) * x.coeffs[n];
        for k in 1..n {
            acc -= (k as f64) * f[k] * x.coeffs[n - k];
        }
        f[n] = acc / n as f64;
    }
    Ok(ComplexSeries::new(f))
}

/// `x = exp(-f)` to the length of `f`, via `n x_n = -Σ_{k=1}^{n} k f_k x_{n-k}`.
pub fn exp_series(f: &ComplexSeries) -> Result<ComplexSeries, SeriesError> {
    let Some(&f0) = f.coeffs.first() else {
        return Ok(ComplexSeries::new(vec![Complex64::new(1.0, 0.0)]));
    };
    if f0.norm() > CONSTANT_TOL {
        return Err(SeriesError::ConstantNotZero(f0));
    }
    let len = f.len();
    let mut x = vec![Complex64::new(0.0, 0.0); len];
    x[0] = Complex64::new(1.0, 0.0);
    for n in 1..len {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            acc -= (k as f64) * f.coeffs[k] * x[n - k];
        }
        x[n] = acc / n as f64;
    }
    Ok(ComplexSeries::new(x))
}

/// Coefficient `n` of `exp(-f)` as the partition sum Σ_{deg J = n} (-f)^J / J!.
pub fn exp_coefficient_by_partitions(f: &ComplexSeries, n: u32) -> Complex64 {
    partitions(n)
        .iter()
        .map(|j| {
            j.iter().fold(Complex64::new(1.0, 0.0), |acc, (u, c)| {
                let fu = -f.coeff(u as usize);
                let fact: f64 = (1..=c).map(f64::from).product();
                acc * fu.powu(c) / fact
            })
        })
        .sum()
}
