use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{reversed_polynomial, OpucError, VerblunskySeq};

/// Density of an absolutely continuous probability measure sampled on the
/// uniform grid θ_k = 2πk/G, with respect to dθ/2π.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleDensity {
    pub values: Vec<f64>,
}

impl CircleDensity {
    pub fn new(values: Vec<f64>) -> Result<Self, OpucError> {
        if values.len() < 16 {
            return Err(OpucError::GridTooSmall(values.len()));
        }
        if let Some(k) = values.iter().position(|v| !(*v > 0.0)) {
            return Err(OpucError::NonPositiveDensity(k));
        }
        Ok(CircleDensity { values })
    }

    pub fn grid(&self) -> usize {
        self.values.len()
    }

    /// Trapezoid-rule total mass, ≈ 1 for a probability density.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid() as f64
    }
}

/// ∏(1 − |α_n|²) / |r_N(e^{iθ})|² on a `grid`-point uniform grid.
pub fn measure_density(alpha: &VerblunskySeq, grid: usize) -> Result<CircleDensity, OpucError> {
    if grid < 16 {
        return Err(OpucError::GridTooSmall(grid));
    }
    let r = reversed_polynomial(alpha);
    let scale = alpha.weighted_product(|_| 1);
    let values = (0..grid)
        .map(|k| {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / grid as f64);
            scale / r.eval(z).norm_sqr()
        })
        .collect();
    CircleDensity::new(values)
}

/// c_k = ∫ e^{−ikθ} dμ for k = 0..=K by the discrete Fourier sum.
pub fn trig_moments(density: &CircleDensity, k_max: usize) -> Result<Vec<Complex64>, OpucError> {
    let g = density.grid();
    if 2 * k_max >= g {
        return Err(OpucError::TooManyMoments {
            requested: k_max,
            grid: g,
        });
    }
    Ok((0..=k_max)
        .map(|k| {
            let sum: Complex64 = density
                .values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    v * Complex64::from_polar(1.0, -TAU * ((k * j) % g) as f64 / g as f64)
                })
                .sum();
            sum / g as f64
        })
        .collect())
}

/// Recovers α_1..α_K from c_0..c_K by building the monic orthogonal
/// polynomials with the Szegő recursion (Levinson-type, O(K²)).
///
/// With μ_m = ∫ z^m dμ = conj(c_m), orthogonality of
/// p_n = z p_{n−1} + conj(α_n) z^{n−1} p_{n−1}^* against 1 gives
/// conj(α_n) = −Σ_j a_j μ_{j+1} / ‖p_{n−1}‖², where p_{n−1} = Σ a_j z^j.
pub fn verblunsky_from_moments(c: &[Complex64]) -> Result<VerblunskySeq, OpucError> {
    let Some(&c0) = c.first() else {
        return Err(OpucError::EmptyMoments);
    };
    if !(c0.re > 0.0) {
        return Err(OpucError::NotPositiveDefinite { order: 0 });
    }
    let mu: Vec<Complex64> = c.iter().map(|ck| ck.conj() / c0.re).collect();
    let mut p = vec![Complex64::new(1.0, 0.0)];
    let mut alphas = Vec::with_capacity(c.len() - 1);
    for n in 1..c.len() {
        // ‖p_{n−1}‖² = ∫ z^{n−1} conj(p_{n−1}) dμ
        let norm: Complex64 = p
            .iter()
            .enumerate()
            .map(|(j, a)| a.conj() * mu[n - 1 - j])
            .sum();
        if !(norm.re > 1e-14) {
            return Err(OpucError::NotPositiveDefinite { order: n });
        }
        let inner: Complex64 = p.iter().enumerate().map(|(j, a)| a * mu[j + 1]).sum();
        let alpha_conj = -inner / norm.re;
        let alpha = alpha_conj.conj();
        if !(alpha.norm() < 1.0) {
            return Err(OpucError::NotPositiveDefinite { order: n });
        }
        let mut next = vec![Complex64::new(0.0, 0.0); n + 1];
        for (j, a) in p.iter().enumerate() {
            next[j + 1] += a;
            // z^{n−1} p^*_{n−1}(z) = Σ_j conj(a_j) z^{n−1−j}
            next[n - 1 - j] += alpha_conj * a.conj();
        }
        p = next;
        alphas.push(alpha);
    }
    VerblunskySeq::new(alphas)
}
