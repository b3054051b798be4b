//! Domain types shared by the closed-form engine and both oracles.

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, wrap_angle};

/// Tail bound used when no truncation is requested explicitly.
pub const DEFAULT_TAIL_EPS: f64 = 1e-16;

/// Largest number of Fock levels any truncation may resolve to.
pub const MAX_LEVELS: usize = 50_000_000;

/// Success probabilities at or below this value are treated as degenerate.
pub const P_FLOOR: f64 = 1e-300;

/// Converts the dimensionless ratio `ħω / (k_B T)` to the Boltzmann factor `z`.
pub fn z_from_boltzmann_ratio(ratio: f64) -> Result<f64> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::invalid(format!(
            "Boltzmann ratio must be finite and > 0, got {ratio}"
        )));
    }
    Ok((-ratio).exp())
}

/// Thermal light pointer described by its Boltzmann factor `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPointer {
    z: f64,
}

impl ThermalPointer {
    pub fn new(z: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::invalid(format!("z must be in [0,1), got {z}")));
        }
        Ok(Self { z })
    }

    /// Builds the pointer from `ħω / (k_B T)`.
    pub fn from_boltzmann_ratio(ratio: f64) -> Result<Self> {
        Self::new(z_from_boltzmann_ratio(ratio)?)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Mean photon number `z / (1 - z)`.
    pub fn mean_photon(&self) -> f64 {
        self.z / (1.0 - self.z)
    }
}

/// Cross-phase per photon and the system phase-shifter angle, both in radians.
///
/// Both angles are stored wrapped into `(-π, π]`. A zero `phi0` is accepted
/// here; operations that cannot handle it reject it themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionConfig {
    phi0: f64,
    theta: f64,
}

impl InteractionConfig {
    pub fn new(phi0: f64, theta: f64) -> Result<Self> {
        if !phi0.is_finite() {
            return Err(Error::invalid(format!("phi0 must be finite, got {phi0}")));
        }
        if !theta.is_finite() {
            return Err(Error::invalid(format!("theta must be finite, got {theta}")));
        }
        Ok(Self {
            phi0: wrap_angle(phi0),
            theta: wrap_angle(theta),
        })
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.phi0, theta)
    }
}

/// How far the (formally infinite) Fock sums are carried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep levels `0..=n_max`.
    MaxLevel(usize),
    /// Keep the smallest `n_max` with `z^(n_max+1) <= eps`.
    TailEps(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::TailEps(DEFAULT_TAIL_EPS)
    }
}

impl Truncation {
    pub fn tail_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("tail_eps must be in (0,1), got {eps}")));
        }
        Ok(Truncation::TailEps(eps))
    }

    /// Resolves the highest retained level for a thermal pointer.
    pub fn resolve(&self, pointer: &ThermalPointer) -> Result<usize> {
        let n_max = match *self {
            Truncation::MaxLevel(n) => n,
            Truncation::TailEps(eps) => {
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::invalid(format!("tail_eps must be in (0,1), got {eps}")));
                }
                let z = pointer.z();
                if z == 0.0 {
                    0
                } else {
                    let estimate = (eps.ln() / z.ln()).ceil() - 1.0;
                    if estimate.is_nan() || estimate >= MAX_LEVELS as f64 {
                        return Err(too_many_levels(estimate));
                    }
                    let mut n = estimate.max(0.0) as usize;
                    while z.powf((n + 1) as f64) > eps {
                        n += 1;
                    }
                    while n > 0 && z.powf(n as f64) <= eps {
                        n -= 1;
                    }
                    n
                }
            }
        };
        if n_max >= MAX_LEVELS {
            return Err(too_many_levels(n_max as f64));
        }
        Ok(n_max)
    }

    /// Resolves the highest retained level for a Poisson (coherent-state)
    /// number distribution with mean `lambda`.
    pub fn resolve_poisson(&self, lambda: f64) -> Result<usize> {
        let n_max = match *self {
            Truncation::MaxLevel(n) => n,
            Truncation::TailEps(eps) => {
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::invalid(format!("tail_eps must be in (0,1), got {eps}")));
                }
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return Err(Error::invalid(format!("Poisson mean must be finite and >= 0, got {lambda}")));
                }
                if lambda == 0.0 {
                    0
                } else {
                    // Walk the log-weights until past the mode and the geometric
                    // bound on the remaining tail drops below eps.
                    let ln_lambda = lambda.ln();
                    let ln_eps = eps.ln();
                    let mut ln_q = -lambda;
                    let mut n = 0usize;
                    loop {
                        let ratio = lambda / (n + 1) as f64;
                        if ratio < 0.5 && ln_q + ratio.ln() - (1.0 - ratio).ln() <= ln_eps {
                            break n;
                        }
                        n += 1;
                        ln_q += ln_lambda - (n as f64).ln();
                        if n >= MAX_LEVELS {
                            return Err(too_many_levels(n as f64));
                        }
                    }
                }
            }
        };
        if n_max >= MAX_LEVELS {
            return Err(too_many_levels(n_max as f64));
        }
        Ok(n_max)
    }
}

fn too_many_levels(n: f64) -> Error {
    Error::invalid(format!(
        "truncation resolves to {n} levels, above the limit of {MAX_LEVELS}"
    ))
}

/// Photon-number probabilities for `n = 0..=n_max` plus the mass above `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl NumberDistribution {
    /// Tolerance on `sum(probs) + tail_mass == 1`.
    pub const NORMALIZATION_TOL: f64 = 1e-12;

    pub fn new(probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("distribution needs at least one level"));
        }
        if let Some((n, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!("probability at n = {n} is {p}")));
        }
        if !(tail_mass >= 0.0 && tail_mass.is_finite()) {
            return Err(Error::invalid(format!("tail mass must be finite and >= 0, got {tail_mass}")));
        }
        let total = pairwise_sum(&probs) + tail_mass;
        if (total - 1.0).abs() > Self::NORMALIZATION_TOL {
            return Err(Error::invalid(format!(
                "distribution not normalized: sum + tail = {total:.17}"
            )));
        }
        Ok(Self { probs, tail_mass })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `Σ n·p(n)` over the retained levels.
    pub fn mean(&self) -> f64 {
        let terms: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .collect();
        pairwise_sum(&terms)
    }
}

/// Dark-port success probability together with the conditional pointer state.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionOutcome {
    pub probability: f64,
    pub distribution: NumberDistribution,
    /// `Σ n·probs[n]` over the retained levels.
    pub mean_photon: f64,
    /// Upper bound on the unnormalized success probability carried by levels above `n_max`.
    pub tail_probability_bound: f64,
    /// Upper bound on the conditional mean contributed by levels above `n_max`.
    pub tail_mean_bound: f64,
}

/// Sample count and seed for the coherent-basis Monte Carlo oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    samples: u64,
    seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0,
        }
    }
}

impl MonteCarloConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::invalid("samples must be positive"));
        }
        Ok(Self { samples, seed })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}
