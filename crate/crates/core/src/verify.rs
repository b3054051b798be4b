//! Cross-checks of the closed forms against both oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;

use crate::closed_form::{eliminated_levels, final_distribution, postselect_probability, wigner_closed};
use crate::coherent::mc_postselect;
use crate::error::Result;
use crate::fock::{interferometer, oracle_postselect, wigner_series};
use crate::model::{InteractionConfig, MonteCarloConfig, ThermalPointer, Truncation};
use crate::sweep::PUBLISHED_PHI0;

pub const GRID_Z: [f64; 4] = [0.1, 0.5, 0.9, 0.99];
pub const GRID_PHI0: [f64; 4] = [1e-4, 0.1, PI / 2.0, PI];
pub const GRID_THETA: [f64; 3] = [0.0, 0.3, PI / 2.0];
pub const WIGNER_CASES: [(f64, f64, f64); 3] = [(0.5, PI, 0.0), (0.5, PI / 2.0, 0.0), (0.9, 0.1, 0.3)];
pub const MC_CASES: [(f64, f64, f64); 3] = [(0.3, 0.5, 0.0), (0.5, PI / 2.0, 0.0), (0.7, 1.0, 0.4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub samples: u64,
    pub seed: u64,
    /// Negative control: perturbs the closed-form probability by one part in 10⁹.
    pub corrupt_closed_form: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let mc = MonteCarloConfig::default();
        Self {
            samples: mc.samples(),
            seed: mc.seed(),
            corrupt_closed_form: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn new(name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_deviation,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<36} max_dev={:.6e} tol={:.1e} {}",
            self.name,
            self.max_deviation,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

struct Verifier {
    opts: VerifyOptions,
}

impl Verifier {
    fn closed_probability(&self, pointer: &ThermalPointer, cfg: &InteractionConfig) -> f64 {
        let p = postselect_probability(pointer, cfg);
        if self.opts.corrupt_closed_form {
            p * (1.0 + 1e-9)
        } else {
            p
        }
    }

    fn grid() -> impl Iterator<Item = (f64, f64, f64)> {
        GRID_Z.into_iter().flat_map(|z| {
            GRID_PHI0
                .into_iter()
                .flat_map(move |phi0| GRID_THETA.into_iter().map(move |theta| (z, phi0, theta)))
        })
    }

    fn fock_grid(&self) -> Result<Vec<CheckResult>> {
        let trunc = Truncation::TailEps(1e-16);
        let (mut dev_p, mut dev_dist) = (0.0f64, 0.0f64);
        for (z, phi0, theta) in Self::grid() {
            let pointer = ThermalPointer::new(z)?;
            let cfg = InteractionConfig::new(phi0, theta)?;
            let oracle = oracle_postselect(&pointer, &cfg, &trunc)?;
            let closed = final_distribution(&pointer, &cfg, &trunc)?;
            let p = self.closed_probability(&pointer, &cfg);
            dev_p = dev_p.max((oracle.probability / p - 1.0).abs());
            for (a, b) in oracle.distribution.probs().iter().zip(closed.distribution.probs()) {
                dev_dist = dev_dist.max((a - b).abs());
            }
        }
        Ok(vec![
            CheckResult::new("fock.probability_rel", dev_p, 1e-12),
            CheckResult::new("fock.distribution_abs", dev_dist, 1e-12),
        ])
    }

    fn fock_extreme(&self) -> Result<CheckResult> {
        let pointer = ThermalPointer::new(0.99999)?;
        let cfg = InteractionConfig::new(PUBLISHED_PHI0, 0.0)?;
        let oracle = oracle_postselect(&pointer, &cfg, &Truncation::MaxLevel(5_000_000))?;
        let p = self.closed_probability(&pointer, &cfg);
        Ok(CheckResult::new(
            "fock.extreme_z_probability_rel",
            (oracle.probability / p - 1.0).abs(),
            1e-6,
        ))
    }

    fn unitarity(&self) -> CheckResult {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let mut dev = 0.0f64;
        for _ in 0..1000 {
            let cfg = InteractionConfig::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI))
                .expect("finite angles");
            let u = interferometer(rng.random_range(0..1_000_000usize), &cfg);
            for i in 0..2 {
                for j in 0..2 {
                    let dot = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((dot.re - target).abs().max(dot.im.abs()));
                }
            }
        }
        CheckResult::new("fock.chain_unitarity", dev, 1e-14)
    }

    fn elimination(&self) -> Result<CheckResult> {
        let pointer = ThermalPointer::new(0.99999)?;
        let cfg = InteractionConfig::new(PUBLISHED_PHI0, 0.0)?;
        let out = final_distribution(&pointer, &cfg, &Truncation::MaxLevel(250_000))?;
        let levels = eliminated_levels(&cfg, 250_000)?;
        let mut dev = levels
            .iter()
            .map(|&n| out.distribution.probs()[n])
            .fold(0.0, f64::max);
        if levels != [0, 100_000, 200_000] {
            dev = f64::INFINITY;
        }
        Ok(CheckResult::new("closed.eliminated_level_weight", dev, 1e-18))
    }

    fn wigner(&self) -> Result<CheckResult> {
        let mut dev = 0.0f64;
        for (z, phi0, theta) in WIGNER_CASES {
            let pointer = ThermalPointer::new(z)?;
            let cfg = InteractionConfig::new(phi0, theta)?;
            let dist = final_distribution(&pointer, &cfg, &Truncation::default())?.distribution;
            for i in 0..21 {
                for j in 0..21 {
                    let x = -4.0 + 0.4 * i as f64;
                    let p = -4.0 + 0.4 * j as f64;
                    let a = wigner_closed(&pointer, &cfg, x, p)?;
                    let b = wigner_series(&dist, x, p)?;
                    dev = dev.max((a - b).abs());
                }
            }
        }
        Ok(CheckResult::new("wigner.closed_vs_laguerre_abs", dev, 1e-8))
    }

    fn monte_carlo(&self) -> Result<Vec<CheckResult>> {
        let mc = MonteCarloConfig::new(self.opts.samples, self.opts.seed)?;
        let mut checks = Vec::new();
        let mut base_error = None;
        for (z, phi0, theta) in MC_CASES {
            let pointer = ThermalPointer::new(z)?;
            let cfg = InteractionConfig::new(phi0, theta)?;
            let est = mc_postselect(&pointer, &cfg, &mc, &Truncation::default())?;
            let p = self.closed_probability(&pointer, &cfg);
            let sigmas = (est.outcome.probability - p).abs() / est.std_error;
            checks.push(CheckResult::new(
                format!("coherent.mc_sigma[z={z},phi0={phi0:.4},theta={theta}]"),
                sigmas,
                4.0,
            ));
            if (z, phi0, theta) == MC_CASES[1] {
                base_error = Some(est.std_error);
            }
        }
        let (z, phi0, theta) = MC_CASES[1];
        let quad = MonteCarloConfig::new(4 * self.opts.samples, self.opts.seed)?;
        let est = mc_postselect(
            &ThermalPointer::new(z)?,
            &InteractionConfig::new(phi0, theta)?,
            &quad,
            &Truncation::default(),
        )?;
        let ratio = base_error.expect("base case ran") / est.std_error;
        checks.push(CheckResult::new("coherent.std_error_scaling", (ratio / 2.0 - 1.0).abs(), 0.2));
        Ok(checks)
    }
}

/// Runs every check and returns the results in a fixed order.
pub fn run_checks(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let v = Verifier { opts: *opts };
    let mut out = v.fock_grid()?;
    out.push(v.fock_extreme()?);
    out.push(v.unitarity());
    out.push(v.elimination()?);
    out.push(v.wigner()?);
    out.extend(v.monte_carlo()?);
    Ok(out)
}
