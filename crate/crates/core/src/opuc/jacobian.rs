//! Real Jacobian of α ↦ x = (x_1..x_N), the non-constant coefficients of r_N.
//!
//! Variables are ordered (Re α_1, Im α_1, Re α_2, ...) and outputs
//! (Re x_1, Im x_1, ...). The determinant should equal ∏ (1−|α_n|²)^{n−1}.

use std::ops::{Add, Mul, Neg};

use num_complex::Complex64;

use super::{reversed_polynomial, OpucError, VerblunskySeq};
use crate::combinatorics::gap_sequences;
use crate::exact::Rat;

/// Largest N accepted; the gap expansion grows quickly past this.
pub const MAX_JACOBIAN_LEN: usize = 8;
const FD_STEP: f64 = 1e-6;
const CONDITIONING_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JacobianMode {
    /// Central differences of the recursion with step 1e-6.
    #[default]
    FiniteDifference,
    /// Exact derivatives of the gap-sequence expansion, evaluated on the
    /// exact binary values of the inputs and rounded once at the end.
    Multilinear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianResult {
    pub det_abs: f64,
    pub volume_factor: f64,
    pub warning: Option<String>,
}

impl JacobianResult {
    pub fn relative_gap(&self) -> f64 {
        (self.det_abs - self.volume_factor).abs() / self.volume_factor
    }
}

/// Gaussian rational a + bi.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComplexRat {
    pub re: Rat,
    pub im: Rat,
}

impl ComplexRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        ComplexRat { re, im }
    }

    pub fn real(re: Rat) -> Self {
        ComplexRat {
            re,
            im: Rat::zero(),
        }
    }

    pub fn one() -> Self {
        ComplexRat::real(Rat::one())
    }

    pub fn i() -> Self {
        ComplexRat::new(Rat::zero(), Rat::one())
    }

    pub fn from_complex(z: Complex64) -> Option<Self> {
        Some(ComplexRat::new(Rat::from_f64(z.re)?, Rat::from_f64(z.im)?))
    }

    pub fn conj(&self) -> Self {
        ComplexRat::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for &ComplexRat {
    type Output = ComplexRat;
    fn add(self, rhs: &ComplexRat) -> ComplexRat {
        ComplexRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Mul for &ComplexRat {
    type Output = ComplexRat;
    fn mul(self, rhs: &ComplexRat) -> ComplexRat {
        ComplexRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &ComplexRat {
    type Output = ComplexRat;
    fn neg(self) -> ComplexRat {
        ComplexRat::new(-&self.re, -&self.im)
    }
}

fn check_len(len: usize) -> Result<(), OpucError> {
    if len > MAX_JACOBIAN_LEN {
        return Err(OpucError::TooManyCoefficients {
            len,
            max: MAX_JACOBIAN_LEN,
        });
    }
    Ok(())
}

/// (|det J|, ∏ (1−|α_n|²)^{n−1}) in floating point.
pub fn jacobian_determinant(
    alpha: &VerblunskySeq,
    mode: JacobianMode,
) -> Result<JacobianResult, OpucError> {
    check_len(alpha.len())?;
    let warning = alpha
        .as_slice()
        .iter()
        .position(|a| 1.0 - a.norm_sqr() < CONDITIONING_FLOOR)
        .map(|k| {
            format!(
                "alpha_{} is within 1e-6 of the unit circle; the Jacobian is ill-conditioned",
                k + 1
            )
        });
    let volume_factor = alpha.weighted_product(|n| n as i32 - 1);
    let det_abs = match mode {
        JacobianMode::FiniteDifference => det_f64(finite_difference_jacobian(alpha)).abs(),
        JacobianMode::Multilinear => {
            let exact: Vec<ComplexRat> = alpha
                .as_slice()
                .iter()
                .map(|&a| ComplexRat::from_complex(a).expect("finite by construction"))
                .collect();
            det_rat(multilinear_jacobian(&exact)).abs().to_f64()
        }
    };
    Ok(JacobianResult {
        det_abs,
        volume_factor,
        warning,
    })
}

/// (|det J|, ∏ (1−|α_n|²)^{n−1}) exactly, for Gaussian-rational α.
pub fn jacobian_determinant_exact(alpha: &[ComplexRat]) -> Result<(Rat, Rat), OpucError> {
    check_len(alpha.len())?;
    let one = Rat::one();
    let mut volume = Rat::one();
    for (k, a) in alpha.iter().enumerate() {
        let complement = &one - a.norm_sqr();
        if complement.is_negative() || complement.is_zero() {
            return Err(OpucError::OutsideDisk {
                index: k + 1,
                modulus: a.norm_sqr().to_f64().sqrt(),
            });
        }
        volume *= complement.pow(k as u32);
    }
    Ok((det_rat(multilinear_jacobian(alpha)).abs(), volume))
}

fn finite_difference_jacobian(alpha: &VerblunskySeq) -> Vec<Vec<f64>> {
    let n = alpha.len();
    let base = alpha.as_slice();
    // Perturbed points may leave the disk by ~h; the recursion doesn't care.
    let x_of = |alphas: Vec<Complex64>| reversed_polynomial(&VerblunskySeq { alphas }).coeffs;
    let mut jac = vec![vec![0.0; 2 * n]; 2 * n];
    for col in 0..2 * n {
        let dir = if col % 2 == 0 {
            Complex64::new(FD_STEP, 0.0)
        } else {
            Complex64::new(0.0, FD_STEP)
        };
        let mut plus = base.to_vec();
        plus[col / 2] += dir;
        let mut minus = base.to_vec();
        minus[col / 2] -= dir;
        let (xp, xm) = (x_of(plus), x_of(minus));
        for row in 1..=n {
            let d = (xp[row] - xm[row]) / (2.0 * FD_STEP);
            jac[2 * (row - 1)][col] = d.re;
            jac[2 * (row - 1) + 1][col] = d.im;
        }
    }
    jac
}

/// Each gap-sequence term is a product over distinct indices, so it is
/// multilinear in the α_k and conj(α_k) and differentiates factor by factor:
/// ∂/∂Re α_k hits α_k or conj(α_k) with 1, ∂/∂Im α_k with i or −i.
fn multilinear_jacobian(alpha: &[ComplexRat]) -> Vec<Vec<Rat>> {
    let n = alpha.len();
    let value = |k: u32, conj: bool| match (k, conj) {
        (0, _) => ComplexRat::one(),
        (k, false) => alpha[k as usize - 1].clone(),
        (k, true) => alpha[k as usize - 1].conj(),
    };
    let mut jac = vec![vec![Rat::zero(); 2 * n]; 2 * n];
    for deg in 1..=n {
        for seq in gap_sequences(deg as u32, n as u32) {
            let factors: Vec<(u32, bool)> = seq
                .pairs()
                .iter()
                .flat_map(|&(i, j)| [(i, false), (j, true)])
                .collect();
            for (pos, &(k, conj)) in factors.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let rest = factors
                    .iter()
                    .enumerate()
                    .filter(|&(other, _)| other != pos)
                    .fold(ComplexRat::one(), |acc, (_, &(k, c))| &acc * &value(k, c));
                let along_im = if conj {
                    -&ComplexRat::i()
                } else {
                    ComplexRat::i()
                };
                let d_im = &rest * &along_im;
                let col = 2 * (k as usize - 1);
                let row = 2 * (deg - 1);
                jac[row][col] += &rest.re;
                jac[row + 1][col] += &rest.im;
                jac[row][col + 1] += &d_im.re;
                jac[row + 1][col + 1] += &d_im.im;
            }
        }
    }
    jac
}

fn det_f64(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs()))
            .expect("non-empty range");
        if a[pivot][c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            a.swap(pivot, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let factor = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= factor * a[c][k];
            }
        }
    }
    det
}

fn det_rat(mut a: Vec<Vec<Rat>>) -> Rat {
    let n = a.len();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(pivot) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rat::zero();
        };
        if pivot != c {
            a.swap(pivot, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip().expect("pivot is nonzero");
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let factor = &a[r][c] * &inv;
            for k in c..n {
                let delta = &factor * &a[c][k];
                a[r][k] -= &delta;
            }
        }
    }
    det
}
