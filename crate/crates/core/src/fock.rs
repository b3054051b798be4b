//! Brute-force verification path in the number basis.
//!
//! For each Fock level `n` of the pointer the single photon is pushed through
//! an explicit 2×2 matrix chain (splitter, phase shifter and cross-Kerr phase,
//! splitter) and projected on the dark port. No closed-form resummation is
//! used anywhere in this module.
//!
//! Convention: both splitters are the real symmetric matrix with rows
//! `(1, 1)/√2` and `(1, -1)/√2`; output port 1 is dark when all phases vanish.
//! The phase shifter in arm `a` retards by `θ` (factor `e^{-iθ}`), so the dark
//! amplitude is `(e^{-iθ} - e^{inφ₀})/2` with modulus `|sin((θ + nφ₀)/2)|`.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::model::{
    InteractionConfig, NumberDistribution, PostselectionOutcome, ThermalPointer, Truncation,
    P_FLOOR,
};
use crate::numeric::{pairwise_sum, scaled_angle};

pub type Matrix2 = [[Complex64; 2]; 2];

/// Index of the bright output port.
pub const BRIGHT_PORT: usize = 0;
/// Index of the dark output port, where detector D1 sits.
pub const DARK_PORT: usize = 1;

/// Amplitudes of the single photon in arms `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemAmplitudes {
    pub amp_a: Complex64,
    pub amp_b: Complex64,
}

impl SystemAmplitudes {
    /// Photon entering the first splitter through input port 0.
    pub fn input() -> Self {
        Self {
            amp_a: Complex64::new(1.0, 0.0),
            amp_b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_a.norm_sqr() + self.amp_b.norm_sqr()
    }

    pub fn apply(&self, m: &Matrix2) -> Self {
        Self {
            amp_a: m[0][0] * self.amp_a + m[0][1] * self.amp_b,
            amp_b: m[1][0] * self.amp_a + m[1][1] * self.amp_b,
        }
    }

    fn port(&self, idx: usize) -> Complex64 {
        if idx == 0 {
            self.amp_a
        } else {
            self.amp_b
        }
    }
}

pub fn beam_splitter() -> Matrix2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Phase shifter on arm `a` and cross-Kerr phase `e^{inφ₀}` on arm `b`.
pub fn arm_phases(n: usize, cfg: &InteractionConfig) -> Matrix2 {
    let zero = Complex64::new(0.0, 0.0);
    let (hi, lo) = scaled_angle(n, cfg.phi0());
    let kerr = Complex64::from_polar(1.0, hi) * Complex64::new(lo.cos(), lo.sin());
    [[Complex64::from_polar(1.0, -cfg.theta()), zero], [zero, kerr]]
}

pub fn matmul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// The full interferometer for pointer level `n`, before projection.
pub fn interferometer(n: usize, cfg: &InteractionConfig) -> Matrix2 {
    let bs = beam_splitter();
    matmul(&bs, &matmul(&arm_phases(n, cfg), &bs))
}

/// Photon state just before detection, for pointer level `n`.
pub fn output_state(n: usize, cfg: &InteractionConfig) -> SystemAmplitudes {
    let bs = beam_splitter();
    SystemAmplitudes::input()
        .apply(&bs)
        .apply(&arm_phases(n, cfg))
        .apply(&bs)
}

/// Amplitude for the photon to exit through the dark port when the pointer holds `n` photons.
pub fn dark_port_amplitude(n: usize, cfg: &InteractionConfig) -> Complex64 {
    output_state(n, cfg).port(DARK_PORT)
}

/// Exhaustive postselection over the retained Fock levels.
///
/// The distribution is normalized over the retained levels (its tail mass
/// is zero); the probability mass above `n_max` is reported separately as the
/// geometric bound `z^(n_max+1)`.
pub fn oracle_postselect(
    pointer: &ThermalPointer,
    cfg: &InteractionConfig,
    trunc: &Truncation,
) -> Result<PostselectionOutcome> {
    let n_max = trunc.resolve(pointer)?;
    let z = pointer.z();
    let weights: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .map(|n| (1.0 - z) * z.powf(n as f64) * dark_port_amplitude(n, cfg).norm_sqr())
        .collect();
    let accumulated = pairwise_sum(&weights);
    if accumulated <= P_FLOOR {
        return Err(Error::DegeneratePostselection {
            probability: accumulated,
        });
    }
    let tail_bound = z.powf((n_max + 1) as f64);
    let probs: Vec<f64> = weights.iter().map(|w| w / accumulated).collect();
    let distribution = NumberDistribution::new(probs, 0.0)?;
    let mean_photon = distribution.mean();
    // Σ_{n>N} n(1-z)zⁿ = z^(N+1)·(N+1 + z/(1-z)), with sin² ≤ 1
    let tail_mean = tail_bound * ((n_max + 1) as f64 + pointer.mean_photon()) / accumulated;
    Ok(PostselectionOutcome {
        probability: accumulated,
        distribution,
        mean_photon,
        tail_probability_bound: tail_bound,
        tail_mean_bound: tail_mean,
    })
}

/// Largest level `wigner_series` accepts.
pub const WIGNER_SERIES_MAX_LEVEL: usize = 1_000_000;

/// Wigner function of a number-diagonal state as a sum of Fock-state
/// Wigner functions `(2/π)(-1)ⁿ e^{-2r²} Lₙ(4r²)`.
pub fn wigner_series(dist: &NumberDistribution, x: f64, p: f64) -> Result<f64> {
    if dist.n_max() > WIGNER_SERIES_MAX_LEVEL {
        return Err(Error::invalid(format!(
            "wigner_series supports n_max <= {WIGNER_SERIES_MAX_LEVEL}, got {}",
            dist.n_max()
        )));
    }
    let r2 = x * x + p * p;
    let u = 4.0 * r2;
    let probs = dist.probs();

    let mut terms = Vec::with_capacity(probs.len());
    let (mut l_prev, mut l_cur) = (0.0, 1.0);
    for (n, &pn) in probs.iter().enumerate() {
        if n > 0 {
            // (k+1) L_{k+1} = (2k+1-u) L_k - k L_{k-1}, k = n-1
            let k = (n - 1) as f64;
            let next = ((2.0 * k + 1.0 - u) * l_cur - k * l_prev) / (k + 1.0);
            l_prev = l_cur;
            l_cur = next;
        }
        if !l_cur.is_finite() {
            return Err(Error::NumericRange {
                level: n,
                detail: format!("Laguerre recurrence overflowed at u = {u}"),
            });
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * pn * l_cur);
    }
    let w = 2.0 / std::f64::consts::PI * (-2.0 * r2).exp() * pairwise_sum(&terms);
    if !w.is_finite() {
        return Err(Error::NumericRange {
            level: dist.n_max(),
            detail: "non-finite Wigner value".into(),
        });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn cfg(phi0: f64, theta: f64) -> InteractionConfig {
        InteractionConfig::new(phi0, theta).unwrap()
    }

    #[test]
    fn dark_port_examples() {
        assert!(dark_port_amplitude(0, &cfg(0.3, 0.0)).norm() < 1e-16);
        for n in [0, 1, 7, 1000] {
            assert!((dark_port_amplitude(n, &cfg(0.0, PI)).norm() - 1.0).abs() < 1e-15);
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        // keep |nφ₀| modest: the rounding of the phase argument itself is ~ulp(nφ₀)
        for k in 0..100 {
            let (n, phi0) = if k % 2 == 0 {
                (rng.random_range(0..10usize), rng.random_range(-PI..PI))
            } else {
                (rng.random_range(0..200usize), rng.random_range(-0.1..0.1))
            };
            let theta = rng.random_range(-PI..PI);
            let c = cfg(phi0, theta);
            let m2 = dark_port_amplitude(n, &c).norm_sqr();
            let expect = ((c.theta() + n as f64 * c.phi0()) / 2.0).sin().powi(2);
            assert!((m2 - expect).abs() < 1e-14, "n={n}: {m2} vs {expect}");
        }
    }

    #[test]
    fn chain_is_unitary() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let c = cfg(rng.random_range(-PI..PI), rng.random_range(-PI..PI));
            let u = interferometer(rng.random_range(0..100_000usize), &c);
            for i in 0..2 {
                for j in 0..2 {
                    let dot = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - target).norm() < 1e-14);
                }
            }
            let out = output_state(3, &c);
            assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_examples() {
        let p = ThermalPointer::new(0.5).unwrap();
        let out = oracle_postselect(&p, &cfg(PI / 2.0, 0.0), &Truncation::default()).unwrap();
        assert!((out.probability - 0.3).abs() < 1e-12);

        let vac = ThermalPointer::new(0.0).unwrap();
        let err = oracle_postselect(&vac, &cfg(1.3, 0.0), &Truncation::default()).unwrap_err();
        assert!(matches!(err, Error::DegeneratePostselection { .. }));
    }

    #[test]
    fn oracle_matches_closed_form_elementwise() {
        let p = ThermalPointer::new(0.9).unwrap();
        let c = cfg(0.1, 0.3);
        let oracle = oracle_postselect(&p, &c, &Truncation::default()).unwrap();
        let closed = closed_form::final_distribution(&p, &c, &Truncation::default()).unwrap();
        assert!((oracle.probability / closed.probability - 1.0).abs() < 1e-12);
        for (a, b) in oracle.distribution.probs().iter().zip(closed.distribution.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wigner_series_anchors() {
        let vac = NumberDistribution::new(vec![1.0], 0.0).unwrap();
        assert!((wigner_series(&vac, 0.0, 0.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        let one = NumberDistribution::new(vec![0.0, 1.0], 0.0).unwrap();
        assert!((wigner_series(&one, 0.0, 0.0).unwrap() + 2.0 / PI).abs() < 1e-15);
        let thermal = closed_form::thermal_distribution(
            &ThermalPointer::new(0.5).unwrap(),
            &Truncation::default(),
        )
        .unwrap();
        // Σ(−z)ⁿ Lₙ(0) = 1/(1+z)
        let w = wigner_series(&thermal, 0.0, 0.0).unwrap();
        assert!((w - 2.0 / (3.0 * PI)).abs() < 1e-12, "{w}");
        assert!((2.0 / (3.0 * PI) - 0.212207).abs() < 1e-6);
    }

    #[test]
    fn wigner_series_vacuum_gaussian() {
        let vac = NumberDistribution::new(vec![1.0], 0.0).unwrap();
        let w = wigner_series(&vac, 0.7, -0.4).unwrap();
        assert!((w - 2.0 / PI * (-2.0 * 0.65f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn wigner_series_overflow_is_reported() {
        let mut probs = vec![0.0; 2000];
        probs[1999] = 1.0;
        let dist = NumberDistribution::new(probs, 0.0).unwrap();
        let err = wigner_series(&dist, 40.0, 40.0).unwrap_err();
        assert!(matches!(err, Error::NumericRange { .. }));
    }
}
