//! Seeded samplers for the α-law and the Gaussian field law, empirical
//! x-moments, and the finite-radius pushforward experiment.
//!
//! Every worker w draws from ChaCha8 seeded with the run seed on stream w,
//! over a fixed contiguous chunk of the sample indices; chunks are
//! concatenated in worker order, so (seed, threads) fixes the output bit
//! for bit.

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::alpha::{alpha_x_moment, AlphaError};
use crate::combinatorics::MultiIndex;
use crate::exact::Rat;
use crate::gaussian::gaussian_x_moment;
use crate::opuc::{
    trig_moments, verblunsky_from_moments, x_coefficients_truncated, CircleDensity, OpucError,
    VerblunskySeq,
};
use crate::series::{exp_series, ComplexSeries};

pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = worker id";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("beta must be positive and finite, got {0}")]
    BadBeta(f64),
    #[error("x-moments are sampled only for deg(p), deg(q) <= 4, got {0} and {1}")]
    Degree(u32, u32),
    #[error("truncation {n_trunc} is below 4 * deg = {min}")]
    Truncation { n_trunc: usize, min: usize },
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("radius must lie in (0, 1), got {0}")]
    Radius(f64),
    #[error("beta^2 = {0} is not below 2; pass the override to run anyway")]
    BetaTooLarge(f64),
    #[error("quadrature grid {grid} is too coarse for {modes} modes (need at least {min})")]
    GridTooCoarse {
        grid: usize,
        modes: usize,
        min: usize,
    },
    #[error(transparent)]
    Opuc(#[from] OpucError),
    #[error(transparent)]
    Alpha(#[from] AlphaError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Seed(pub u64);

/// Sample mean with the standard error of the mean; for complex samples the
/// spread is measured by |z − mean|².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleStats {
    #[serde(serialize_with = "serialize_complex")]
    pub mean: Complex64,
    pub stderr: f64,
    pub count: usize,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl SampleStats {
    pub fn from_values(values: &[Complex64]) -> Result<Self, McError> {
        let count = values.len();
        if count < 2 {
            return Err(McError::TooFewSamples(count));
        }
        let n = count as f64;
        let mean = values.iter().sum::<Complex64>() / n;
        let var = values.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        Ok(SampleStats {
            mean,
            stderr: (var / n).sqrt(),
            count,
        })
    }

    pub fn from_reals(values: &[f64]) -> Result<Self, McError> {
        let zs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_values(&zs)
    }

    /// |mean − target| in units of stderr.
    pub fn z_score(&self, target: Complex64) -> f64 {
        (self.mean - target).norm() / self.stderr
    }
}

/// Runs `draw` once per sample across `threads` workers and returns the
/// values in sample order.
pub fn run_parallel<T: Send>(
    samples: usize,
    seed: Seed,
    threads: usize,
    draw: impl Fn(&mut ChaCha8Rng) -> T + Sync,
) -> Vec<T> {
    let threads = threads.clamp(1, samples.max(1));
    let chunk = samples.div_ceil(threads);
    let draw = &draw;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let len = chunk.min(samples.saturating_sub(w * chunk));
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
                    rng.set_stream(w as u64);
                    (0..len).map(|_| draw(&mut rng)).collect::<Vec<T>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn check_beta(beta: f64) -> Result<(), McError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(McError::BadBeta(beta));
    }
    Ok(())
}

/// α_1..α_n with |α_k|² ~ Beta(1, kβ) and uniform phase.
pub fn sample_alpha_with(rng: &mut impl Rng, beta: f64, n: usize) -> VerblunskySeq {
    let alphas = (1..=n)
        .map(|k| {
            // 1 − U^{1/(kβ)} with U in (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            let modulus_sq = -(u.ln() / (k as f64 * beta)).exp_m1();
            let phase = rng.random::<f64>() * TAU;
            Complex64::from_polar(modulus_sq.sqrt(), phase)
        })
        .collect();
    VerblunskySeq::new(alphas).expect("|alpha| < 1 by construction")
}

pub fn sample_alpha(beta: f64, n: usize, seed: Seed) -> Result<VerblunskySeq, McError> {
    check_beta(beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    Ok(sample_alpha_with(&mut rng, beta, n))
}

/// f_0 = 0 and f_1..f_n independent complex Gaussians, E|f_k|² = 1/(kβ).
pub fn sample_f_with(rng: &mut impl Rng, beta: f64, n: usize) -> ComplexSeries {
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Complex64::new(0.0, 0.0));
    for k in 1..=n {
        let sd = (1.0 / (2.0 * k as f64 * beta)).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        coeffs.push(Complex64::new(sd * re, sd * im));
    }
    ComplexSeries::new(coeffs)
}

pub fn sample_f(beta: f64, n: usize, seed: Seed) -> Result<ComplexSeries, McError> {
    check_beta(beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    Ok(sample_f_with(&mut rng, beta, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Gaussian,
    Alpha,
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Side::Gaussian),
            "alpha" => Ok(Side::Alpha),
            other => Err(format!(
                "unknown side {other:?} (expected gaussian or alpha)"
            )),
        }
    }
}

/// x^p (x^q)^* from x_0..x_d.
fn monomial(x: &[Complex64], p: &MultiIndex, q: &MultiIndex) -> Complex64 {
    let pow = |m: &MultiIndex| {
        m.iter().fold(Complex64::new(1.0, 0.0), |acc, (n, c)| {
            acc * x[n as usize].powu(c)
        })
    };
    pow(p) * pow(q).conj()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McParams {
    pub side: Side,
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub beta: Rat,
    pub n_trunc: usize,
    pub samples: usize,
    pub seed: Seed,
    pub threads: usize,
}

/// Raw samples of x^p (x^q)^*, in sample order.
///
/// Gaussian side: x = exp(−f) needs only f_1..f_d for coefficients up to
/// d = max(deg p, deg q), so nothing is truncated. Alpha side: α_1..α_{n_trunc} are
/// drawn and x_1..x_d follow from the reversed recursion.
pub fn mc_x_samples(params: &McParams) -> Result<Vec<Complex64>, McError> {
    let (p, q) = (&params.p, &params.q);
    let d = p.deg().max(q.deg());
    if d > 4 {
        return Err(McError::Degree(p.deg(), q.deg()));
    }
    let d = d as usize;
    if params.n_trunc < 4 * d {
        return Err(McError::Truncation {
            n_trunc: params.n_trunc,
            min: 4 * d,
        });
    }
    let beta = params.beta.to_f64();
    check_beta(beta)?;
    let n_trunc = params.n_trunc;
    let values = match params.side {
        Side::Gaussian => run_parallel(params.samples, params.seed, params.threads, |rng| {
            let f = sample_f_with(rng, beta, d);
            let x = exp_series(&f).expect("f_0 = 0");
            monomial(&x.coeffs, p, q)
        }),
        Side::Alpha => run_parallel(params.samples, params.seed, params.threads, |rng| {
            let alpha = sample_alpha_with(rng, beta, n_trunc);
            let x = x_coefficients_truncated(|k| alpha.get(k as usize), d, n_trunc as u32);
            monomial(&x, p, q)
        }),
    };
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McCheck {
    pub stats: SampleStats,
    /// Exact value of the quantity actually sampled: the Gaussian moment, or
    /// the α-side sum over indices ≤ n_trunc.
    pub exact_sampled: Rat,
    /// The Gaussian moment, i.e. the untruncated value.
    pub exact_limit: Rat,
    pub z_score: f64,
    /// |exact_limit − exact_sampled|, the bias from truncation.
    pub truncation_gap: f64,
    pub pass: bool,
}

/// Samples and compares with the exact engines; passes within 4 stderr of
/// the exact value of the sampled (possibly truncated) quantity.
pub fn mc_x_moment(params: &McParams) -> Result<McCheck, McError> {
    let values = mc_x_samples(params)?;
    let stats = SampleStats::from_values(&values)?;
    let exact_limit = gaussian_x_moment(&params.p, &params.q).eval(&params.beta);
    let exact_sampled = match params.side {
        Side::Gaussian => exact_limit.clone(),
        Side::Alpha => {
            alpha_x_moment(&params.p, &params.q, &params.beta, params.n_trunc as u32)?.value
        }
    };
    let z_score = stats.z_score(Complex64::new(exact_sampled.to_f64(), 0.0));
    Ok(McCheck {
        stats,
        truncation_gap: (&exact_limit - &exact_sampled).abs().to_f64(),
        exact_sampled,
        exact_limit,
        z_score,
        pass: z_score <= 4.0,
    })
}

/// One row per sample: `sample,re,im`.
pub fn write_samples_csv(mut out: impl Write, values: &[Complex64]) -> io::Result<()> {
    writeln!(out, "sample,re,im")?;
    for (k, z) in values.iter().enumerate() {
        writeln!(out, "{k},{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushforwardParams {
    pub beta: f64,
    pub modes: usize,
    pub radius: f64,
    pub samples: usize,
    pub max_alpha: usize,
    pub seed: Seed,
    pub threads: usize,
    /// Quadrature grid; defaults to the smallest power of two ≥ 8·modes
    /// (and ≥ 1024).
    pub grid: Option<usize>,
    /// Run even when β² ≥ 2.
    pub allow_large_beta: bool,
}

impl PushforwardParams {
    pub fn grid(&self) -> usize {
        self.grid
            .unwrap_or_else(|| (8 * self.modes).max(1024).next_power_of_two())
    }
}

/// α_1..α_K of the probability measure ∝ exp(2 Re f(r e^{iθ})) dθ.
pub fn alphas_from_field(
    f: &ComplexSeries,
    radius: f64,
    grid: usize,
    max_alpha: usize,
    planner: &mut FftPlanner<f64>,
) -> Result<VerblunskySeq, McError> {
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    let mut rn = 1.0;
    for (n, c) in f.coeffs.iter().enumerate() {
        if n > 0 && n < grid {
            buf[n] = c * rn;
        }
        rn *= radius;
    }
    // Σ_n a_n e^{+2πi nk/G} is the unnormalized inverse transform.
    planner.plan_fft_inverse(grid).process(&mut buf);
    let exponent: Vec<f64> = buf.iter().map(|z| 2.0 * z.re).collect();
    let top = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = exponent.iter().map(|e| (e - top).exp()).collect();
    let mass = raw.iter().sum::<f64>() / grid as f64;
    let density = CircleDensity::new(raw.iter().map(|v| v / mass).collect())?;
    let moments = trig_moments(&density, max_alpha)?;
    Ok(verblunsky_from_moments(&moments)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushforwardRow {
    pub n: usize,
    pub mean_abs_sq: SampleStats,
    pub target: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushforwardResult {
    pub grid: usize,
    pub rows: Vec<PushforwardRow>,
    pub warning: Option<String>,
}

/// Empirical E|α_n|² of the measures ∝ exp(2 Re f_+(r e^{iθ})) for Gaussian
/// fields truncated at `modes`, against the α-law value 1/(nβ+1).
pub fn pushforward_experiment(params: &PushforwardParams) -> Result<PushforwardResult, McError> {
    check_beta(params.beta)?;
    if !(params.radius > 0.0 && params.radius < 1.0) {
        return Err(McError::Radius(params.radius));
    }
    let b2 = params.beta * params.beta;
    let warning = if b2 >= 2.0 {
        if !params.allow_large_beta {
            return Err(McError::BetaTooLarge(b2));
        }
        Some(format!(
            "beta^2 = {b2} >= 2: outside the range where convergence is known"
        ))
    } else {
        None
    };
    let grid = params.grid();
    let min = (4 * params.modes).max(2 * params.max_alpha + 1).max(16);
    if grid < min {
        return Err(McError::GridTooCoarse {
            grid,
            modes: params.modes,
            min,
        });
    }
    let draws = run_parallel(params.samples, params.seed, params.threads, |rng| {
        let f = sample_f_with(rng, params.beta, params.modes);
        let mut planner = FftPlanner::new();
        alphas_from_field(&f, params.radius, grid, params.max_alpha, &mut planner)
    });
    let draws: Vec<VerblunskySeq> = draws.into_iter().collect::<Result<_, _>>()?;
    let rows = (1..=params.max_alpha)
        .map(|n| {
            let values: Vec<f64> = draws.iter().map(|a| a.get(n).norm_sqr()).collect();
            let stats = SampleStats::from_reals(&values)?;
            let target = 1.0 / (n as f64 * params.beta + 1.0);
            Ok(PushforwardRow {
                n,
                relative_error: (stats.mean.re - target).abs() / target,
                mean_abs_sq: stats,
                target,
            })
        })
        .collect::<Result<_, McError>>()?;
    Ok(PushforwardResult {
        grid,
        rows,
        warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingLevel {
    pub modes: usize,
    pub radius: f64,
    pub result: PushforwardResult,
}

/// Repeats the experiment with modes doubled and 1 − radius halved at each
/// level, starting from `base`.
pub fn pushforward_doubling_study(
    base: &PushforwardParams,
    levels: usize,
) -> Result<Vec<DoublingLevel>, McError> {
    let mut params = base.clone();
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let result = pushforward_experiment(&params)?;
        out.push(DoublingLevel {
            modes: params.modes,
            radius: params.radius,
            result,
        });
        params.modes *= 2;
        params.radius = 1.0 - (1.0 - params.radius) / 2.0;
        params.grid = base.grid.map(|g| g * 2);
    }
    Ok(out)
}
