//! Second oracle: Monte Carlo over the Glauber–Sudarshan decomposition of the
//! thermal pointer into coherent states.
//!
//! Each sampled coherent state `|α⟩` is pushed through the postselection in
//! the number basis, where the cross terms between `|α⟩` and `|e^{iφ₀}α⟩`
//! survive. Averaging over the Gaussian weight removes them and reproduces
//! the thermal result.
//!
//! Reproducibility: sample `i` belongs to batch `i / BATCH_SIZE`, and every
//! batch draws from its own ChaCha stream keyed by `(seed, batch)`. Batches are
//! reduced in fixed pairwise order, so any worker count yields the same bits.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    InteractionConfig, MonteCarloConfig, NumberDistribution, PostselectionOutcome, ThermalPointer,
    Truncation, P_FLOOR,
};
use crate::numeric::{half_angle_sin_sq, pairwise_sum};

pub const BATCH_SIZE: u64 = 4096;

/// Smallest sample count `mc_postselect` accepts.
pub const MIN_SAMPLES: u64 = 1000;

/// A coherent amplitude drawn from the thermal P-function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSample {
    pub alpha: Complex64,
}

impl CoherentSample {
    pub fn intensity(&self) -> f64 {
        self.alpha.norm_sqr()
    }
}

/// Draws `α` with `|α|² ~ Exponential(mean n̄)` and a uniform phase.
///
/// Always consumes the same amount of randomness, so sample streams stay
/// aligned even for the degenerate `n̄ = 0` pointer.
pub fn sample_thermal_alpha<R: Rng + ?Sized>(n_bar: f64, rng: &mut R) -> CoherentSample {
    let e: f64 = Exp1.sample(rng);
    let phase = 2.0 * PI * rng.random::<f64>();
    let intensity = n_bar * e;
    CoherentSample {
        alpha: Complex64::from_polar(intensity.sqrt(), phase),
    }
}

/// `sin²((θ + nφ₀)/2)` for `n = 0..=n_max`.
fn dark_port_factors(cfg: &InteractionConfig, n_max: usize) -> Vec<f64> {
    (0..=n_max)
        .map(|n| half_angle_sin_sq(cfg.theta() + n as f64 * cfg.phi0()))
        .collect()
}

/// Fills `out` with Poisson weights `e^{-λ} λⁿ / n!`.
fn poisson_weights(lambda: f64, out: &mut [f64]) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::NumericRange {
            level: 0,
            detail: format!("coherent intensity {lambda} is not finite"),
        });
    }
    if lambda < 700.0 {
        let mut q = (-lambda).exp();
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                q *= lambda / n as f64;
            }
            *slot = q;
        }
    } else {
        // e^{-λ} underflows; carry the recurrence in log space instead.
        let ln_lambda = lambda.ln();
        let mut ln_q = -lambda;
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                ln_q += ln_lambda - (n as f64).ln();
            }
            *slot = ln_q.exp();
        }
    }
    Ok(())
}

/// Unnormalized dark-port weights `e^{-|α|²} |α|^{2n} sin²((θ+nφ₀)/2) / n!`
/// of a coherent pointer.
pub fn coherent_pair_number_weights(
    alpha: Complex64,
    cfg: &InteractionConfig,
    trunc: &Truncation,
) -> Result<Vec<f64>> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    let lambda = alpha.norm_sqr();
    let n_max = trunc.resolve_poisson(lambda)?;
    let mut weights = vec![0.0; n_max + 1];
    poisson_weights(lambda, &mut weights)?;
    for (n, (w, f)) in weights.iter_mut().zip(dark_port_factors(cfg, n_max)).enumerate() {
        *w *= f;
        if !w.is_finite() {
            return Err(Error::NumericRange {
                level: n,
                detail: "non-finite coherent weight".into(),
            });
        }
    }
    Ok(weights)
}

/// Monte Carlo estimate of the postselected outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub outcome: PostselectionOutcome,
    /// Standard error of the success-probability estimate.
    pub std_error: f64,
    /// Per-level standard errors of the averaged weights divided by the
    /// estimated success probability; an error bar for each entry of the
    /// conditional distribution.
    pub level_std_errors: Vec<f64>,
}

impl MonteCarloEstimate {
    /// Half the sum of the per-level standard errors, the natural scale of
    /// the total-variation distance to the exact distribution.
    pub fn aggregate_std_error(&self) -> f64 {
        0.5 * self.level_std_errors.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone)]
struct Moments {
    total: f64,
    total_sq: f64,
    level: Vec<f64>,
    level_sq: Vec<f64>,
}

impl Moments {
    fn zeros(levels: usize) -> Self {
        Self {
            total: 0.0,
            total_sq: 0.0,
            level: vec![0.0; levels],
            level_sq: vec![0.0; levels],
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        self.total += other.total;
        self.total_sq += other.total_sq;
        for (a, b) in self.level.iter_mut().zip(&other.level) {
            *a += b;
        }
        for (a, b) in self.level_sq.iter_mut().zip(&other.level_sq) {
            *a += b;
        }
        self
    }
}

fn reduce_pairwise(parts: &[Moments]) -> Moments {
    match parts.len() {
        1 => parts[0].clone(),
        len => {
            let mid = len / 2;
            reduce_pairwise(&parts[..mid]).merge(&reduce_pairwise(&parts[mid..]))
        }
    }
}

fn run_batch(
    batch: u64,
    count: u64,
    n_bar: f64,
    seed: u64,
    factors: &[f64],
) -> Result<Moments> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let levels = factors.len();
    let mut acc = Moments::zeros(levels);
    let mut weights = vec![0.0; levels];
    for _ in 0..count {
        let sample = sample_thermal_alpha(n_bar, &mut rng);
        poisson_weights(sample.intensity(), &mut weights)?;
        let mut total = 0.0;
        for (n, (w, f)) in weights.iter_mut().zip(factors).enumerate() {
            *w *= f;
            if !w.is_finite() {
                return Err(Error::NumericRange {
                    level: n,
                    detail: "non-finite coherent weight".into(),
                });
            }
            total += *w;
            acc.level[n] += *w;
            acc.level_sq[n] += *w * *w;
        }
        acc.total += total;
        acc.total_sq += total * total;
    }
    Ok(acc)
}

fn std_err(sum: f64, sum_sq: f64, samples: f64) -> f64 {
    let mean = sum / samples;
    let var = ((sum_sq - sum * mean) / (samples - 1.0)).max(0.0);
    (var / samples).sqrt()
}

/// Averages coherent-state postselection over the thermal P-function.
///
/// Every sample uses the levels `0..=n_max` resolved from the thermal pointer.
pub fn mc_postselect(
    pointer: &ThermalPointer,
    cfg: &InteractionConfig,
    mc: &MonteCarloConfig,
    trunc: &Truncation,
) -> Result<MonteCarloEstimate> {
    if mc.samples() < MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "mc_postselect needs at least {MIN_SAMPLES} samples, got {}",
            mc.samples()
        )));
    }
    let n_max = trunc.resolve(pointer)?;
    let factors = dark_port_factors(cfg, n_max);
    let n_bar = pointer.mean_photon();
    let samples = mc.samples();
    let batches = samples.div_ceil(BATCH_SIZE);

    let parts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH_SIZE.min(samples - b * BATCH_SIZE);
            run_batch(b, count, n_bar, mc.seed(), &factors)
        })
        .collect::<Result<Vec<_>>>()?;
    let sums = reduce_pairwise(&parts);

    let count = samples as f64;
    let probability = sums.total / count;
    if probability <= P_FLOOR {
        return Err(Error::DegeneratePostselection { probability });
    }
    let std_error = std_err(sums.total, sums.total_sq, count);
    let level_std_errors = sums
        .level
        .iter()
        .zip(&sums.level_sq)
        .map(|(s, sq)| std_err(*s, *sq, count) / probability)
        .collect();

    let level_total = pairwise_sum(&sums.level);
    let probs: Vec<f64> = sums.level.iter().map(|s| s / level_total).collect();
    let distribution = NumberDistribution::new(probs, 0.0)?;
    let mean_photon = distribution.mean();
    Ok(MonteCarloEstimate {
        outcome: PostselectionOutcome {
            probability,
            distribution,
            mean_photon,
            // thermal tail bound; the coherent mixture has the same number statistics
            tail_probability_bound: pointer.z().powf((n_max + 1) as f64),
            tail_mean_bound: pointer.z().powf((n_max + 1) as f64)
                * ((n_max + 1) as f64 + n_bar)
                / probability,
        },
        std_error,
        level_std_errors,
    })
}
