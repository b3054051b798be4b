//! Analytic engine: success probability, conditional photon-number
//! distribution, conditional mean and Wigner function of the postselected
//! pointer, for an arbitrary phase-shifter angle `theta`.
//!
//! Every complex expression is rearranged so that the small differences
//! `1 - e^{iφ₀}` and `1 - e^{iθ}` are formed from half-angle sines. With the
//! weak coupling `φ₀ = 2π·10⁻⁵` the naive forms lose most of their digits.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    InteractionConfig, NumberDistribution, PostselectionOutcome, ThermalPointer, Truncation,
    P_FLOOR,
};
use crate::numeric::{
    expm1_complex, half_angle_sin_sq, half_angle_sin_sq_split, level_angle, ln1p_complex, one_minus_cis, wrap_angle,
};

/// Tolerance used to decide that `(θ + nφ₀) / 2π` is an integer.
pub const ELIMINATION_TOL: f64 = 1e-9;

/// Unnormalized moments `(Σ wₙ, Σ n·wₙ)` with `wₙ = (1-z) zⁿ sin²((θ+nφ₀)/2)`.
fn weighted_moments(z: f64, phi0: f64, theta: f64) -> (f64, f64) {
    let e_phi = one_minus_cis(phi0);
    let e_theta = one_minus_cis(theta);
    let one_m_z = 1.0 - z;
    // 1 - z e^{iφ₀}
    let d = Complex64::new(one_m_z, 0.0) + e_phi * z;
    let z_tilde = (Complex64::new(1.0, 0.0) - e_phi) * z;

    let numer = e_theta * one_m_z + e_phi * z;
    let p = 0.5 * (numer * d.conj()).re / d.norm_sqr();

    let d2 = d * d;
    let m = if z == 0.0 {
        0.0
    } else {
        let bracket = e_phi * z * (Complex64::new(1.0, 0.0) - z_tilde * z) / one_m_z
            + e_theta * z_tilde * one_m_z;
        0.5 * (bracket / d2).re
    };
    (p.clamp(0.0, 1.0), m)
}

/// Dark-port success probability `P'`.
pub fn postselect_probability(pointer: &ThermalPointer, cfg: &InteractionConfig) -> f64 {
    weighted_moments(pointer.z(), cfg.phi0(), cfg.theta()).0
}

fn checked_probability(pointer: &ThermalPointer, cfg: &InteractionConfig) -> Result<f64> {
    let p = postselect_probability(pointer, cfg);
    if p <= P_FLOOR {
        return Err(Error::DegeneratePostselection { probability: p });
    }
    Ok(p)
}

/// Thermal photon-number distribution `(1-z) zⁿ` with the exact geometric tail.
pub fn thermal_distribution(pointer: &ThermalPointer, trunc: &Truncation) -> Result<NumberDistribution> {
    let n_max = trunc.resolve(pointer)?;
    let z = pointer.z();
    let probs: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .map(|n| (1.0 - z) * z.powf(n as f64))
        .collect();
    NumberDistribution::new(probs, z.powf((n_max + 1) as f64))
}

/// Conditional pointer distribution after a dark-port click.
pub fn final_distribution(
    pointer: &ThermalPointer,
    cfg: &InteractionConfig,
    trunc: &Truncation,
) -> Result<PostselectionOutcome> {
    let prob = checked_probability(pointer, cfg)?;
    let n_max = trunc.resolve(pointer)?;
    let (z, phi0, theta) = (pointer.z(), cfg.phi0(), cfg.theta());

    let probs: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let (hi, lo) = level_angle(theta, n, phi0);
            (1.0 - z) * z.powf(n as f64) * half_angle_sin_sq_split(hi, lo) / prob
        })
        .collect();

    // Levels above n_max form the same series shifted by (n_max+1) levels,
    // scaled by z^(n_max+1) with an effective angle θ + (n_max+1)φ₀.
    let (tail_p, tail_m) = if z == 0.0 {
        (0.0, 0.0)
    } else {
        let shift = (n_max + 1) as f64;
        let scale = z.powf(shift);
        let (p, m) = weighted_moments(z, phi0, wrap_angle(theta + shift * phi0));
        (scale * p, scale * (m + shift * p))
    };

    let distribution = NumberDistribution::new(probs, tail_p / prob)?;
    let mean_photon = distribution.mean();
    Ok(PostselectionOutcome {
        probability: prob,
        distribution,
        mean_photon,
        tail_probability_bound: tail_p,
        tail_mean_bound: tail_m / prob,
    })
}

/// Photon numbers in `0..=n_max` removed entirely by postselection, i.e.
/// those with `θ + n·φ₀ ≡ 0 (mod 2π)`.
pub fn eliminated_levels(cfg: &InteractionConfig, n_max: usize) -> Result<Vec<usize>> {
    if cfg.phi0() == 0.0 {
        return Err(Error::invalid("eliminated_levels needs a nonzero phi0"));
    }
    let (phi0, theta) = (cfg.phi0(), cfg.theta());
    Ok((0..=n_max)
        .filter(|&n| {
            let turns = (theta + n as f64 * phi0) / (2.0 * PI);
            (turns - turns.round()).abs() <= ELIMINATION_TOL
        })
        .collect())
}

/// Conditional mean photon number `n̄_f` and the ratio `R = n̄_f / n̄`.
pub fn mean_photon_final(pointer: &ThermalPointer, cfg: &InteractionConfig) -> Result<(f64, f64)> {
    if pointer.z() == 0.0 {
        return Err(Error::invalid(
            "z = 0 has zero thermal mean, the amplification ratio is undefined",
        ));
    }
    let (p, m) = weighted_moments(pointer.z(), cfg.phi0(), cfg.theta());
    if p <= P_FLOOR {
        return Err(Error::DegeneratePostselection { probability: p });
    }
    let n_f = m / p;
    Ok((n_f, n_f / pointer.mean_photon()))
}

/// Small-coupling limit of `n̄_f` at `θ = 0`.
///
/// Diagnostic only: it holds when `n̄·φ₀ ≪ 1` and is badly wrong otherwise
/// (at z = 0.99999 and φ₀ = 2π·10⁻⁵, n̄·φ₀ ≈ 2π).
pub fn small_phi_mean_asymptote(pointer: &ThermalPointer) -> f64 {
    let z = pointer.z();
    (1.0 + 4.0 * z + z * z) / ((1.0 + z) * (1.0 - z))
}

/// One evaluation of the Wigner function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSample {
    pub x: f64,
    pub p: f64,
    pub w: f64,
}

/// Wigner function of the postselected pointer, normalized so that the
/// vacuum is `(2/π) e^{-2(x²+p²)}`.
pub fn wigner_closed(pointer: &ThermalPointer, cfg: &InteractionConfig, x: f64, p: f64) -> Result<f64> {
    let prob = checked_probability(pointer, cfg)?;
    let z = pointer.z();
    let r2 = x * x + p * p;
    let e_phi = one_minus_cis(cfg.phi0());
    let e_theta = one_minus_cis(cfg.theta());

    // H(w) = exp(-2 r² (1-w)/(1+w)) / (1+w); the bracket is 2 Re[H(z) - e^{iθ} H(z̃)].
    let h_z = (-2.0 * r2 * (1.0 - z) / (1.0 + z)).exp() / (1.0 + z);
    let one_p_zt = Complex64::new(1.0 + z, 0.0) - e_phi * z;
    let delta = -ln1p_complex(-e_phi * z / (1.0 + z)) - e_phi * (4.0 * r2 * z) / (one_p_zt * (1.0 + z));
    let ratio_m1 = expm1_complex(delta);
    let h_zt = (ratio_m1 + 1.0) * h_z;
    let bracket = 2.0 * (-ratio_m1 * h_z + e_theta * h_zt).re;
    Ok((1.0 - z) / (2.0 * PI * prob) * bracket)
}

pub fn wigner_sample(pointer: &ThermalPointer, cfg: &InteractionConfig, x: f64, p: f64) -> Result<WignerSample> {
    Ok(WignerSample {
        x,
        p,
        w: wigner_closed(pointer, cfg, x, p)?,
    })
}

/// Wigner function at the phase-space origin for `θ = 0`; strictly negative
/// whenever postselection is possible.
pub fn wigner_origin(pointer: &ThermalPointer, cfg: &InteractionConfig) -> Result<f64> {
    if cfg.theta() != 0.0 {
        return Err(Error::invalid("wigner_origin is defined for theta = 0 only"));
    }
    let prob = checked_probability(pointer, cfg)?;
    let z = pointer.z();
    let s2 = half_angle_sin_sq(cfg.phi0());
    // 1 - cos φ₀ = 2 s², 1 + z² + 2z cos φ₀ = (1+z)² - 4 z s²
    let one_m_cos = 2.0 * s2;
    let denom_mod = (1.0 + z) * (1.0 + z) - 4.0 * z * s2;
    Ok(-z * (1.0 - z) * (1.0 - z) * one_m_cos / (PI * prob * (1.0 + z) * denom_mod))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PUBLISHED_PHI0: f64 = 2.0 * PI * 1e-5;

    fn ptr(z: f64) -> ThermalPointer {
        ThermalPointer::new(z).unwrap()
    }

    fn cfg(phi0: f64, theta: f64) -> InteractionConfig {
        InteractionConfig::new(phi0, theta).unwrap()
    }

    /// Brute-force series oracle: direct summation of the level weights.
    fn series(z: f64, phi0: f64, theta: f64) -> (f64, f64) {
        let (mut p, mut m, mut zn) = (0.0, 0.0, 1.0);
        let mut n = 0usize;
        while zn > 1e-40 || n < 10 {
            let w = (1.0 - z) * zn * ((theta + n as f64 * phi0) / 2.0).sin().powi(2);
            p += w;
            m += n as f64 * w;
            zn *= z;
            n += 1;
            if z == 0.0 {
                break;
            }
        }
        (p, m)
    }

    #[test]
    fn thermal_distribution_examples() {
        let vac = thermal_distribution(&ptr(0.0), &Truncation::default()).unwrap();
        assert_eq!(vac.probs(), &[1.0]);
        assert_eq!(vac.tail_mass(), 0.0);

        let half = thermal_distribution(&ptr(0.5), &Truncation::default()).unwrap();
        assert_eq!(&half.probs()[..3], &[0.5, 0.25, 0.125]);

        let nine = thermal_distribution(&ptr(0.5), &Truncation::MaxLevel(9)).unwrap();
        assert_eq!(nine.tail_mass(), 0.5f64.powi(10));
        assert!((nine.tail_mass() - 9.766e-4).abs() < 1e-7);
    }

    #[test]
    fn probability_examples() {
        let p = postselect_probability(&ptr(0.001), &cfg(PUBLISHED_PHI0, 0.0));
        assert!((p / 9.9e-13 - 1.0).abs() < 0.01, "{p}");
        let p = postselect_probability(&ptr(0.99999), &cfg(PUBLISHED_PHI0, 0.0));
        assert!((p / 0.4876 - 1.0).abs() < 0.005, "{p}");
        for z in [0.0, 0.3, 0.9] {
            assert_eq!(postselect_probability(&ptr(z), &cfg(0.0, 0.0)), 0.0);
        }
        assert_eq!(postselect_probability(&ptr(0.0), &cfg(0.7, 0.0)), 0.0);
        let p = postselect_probability(&ptr(0.5), &cfg(PI / 2.0, 0.0));
        // Σ 0.5·0.5ⁿ sin²(nπ/4) and ½(1 − (1−z)/(1+z²)) both give 0.3
        let (brute, _) = series(0.5, PI / 2.0, 0.0);
        assert!((brute - 0.3).abs() < 1e-15);
        assert!((0.5 * (1.0 - 0.5 / 1.25) - 0.3f64).abs() < 1e-15);
        assert!((p - 0.3).abs() < 1e-15, "{p}");
    }

    #[test]
    fn final_distribution_odd_levels_at_pi() {
        let out = final_distribution(&ptr(0.5), &cfg(PI, 0.0), &Truncation::default()).unwrap();
        assert!((out.probability - 1.0 / 3.0).abs() < 1e-15);
        let probs = out.distribution.probs();
        assert!((probs[1] - 0.75).abs() < 1e-14);
        assert!((probs[3] - 0.1875).abs() < 1e-14);
        for n in (0..probs.len()).step_by(2) {
            assert!(probs[n] < 1e-30, "even level {n}: {}", probs[n]);
        }
    }

    #[test]
    fn final_distribution_trivial_cases() {
        for z in [0.2, 0.7] {
            let out = final_distribution(&ptr(z), &cfg(0.0, PI), &Truncation::default()).unwrap();
            let thermal = thermal_distribution(&ptr(z), &Truncation::default()).unwrap();
            assert_eq!(out.probability, 1.0);
            for (a, b) in out.distribution.probs().iter().zip(thermal.probs()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        for phi0 in [0.1, 1.0, PUBLISHED_PHI0] {
            let out = final_distribution(&ptr(0.6), &cfg(phi0, 0.0), &Truncation::default()).unwrap();
            assert_eq!(out.distribution.probs()[0], 0.0);
        }
    }

    #[test]
    fn degenerate_postselection_is_refused() {
        let err = final_distribution(&ptr(0.5), &cfg(0.0, 0.0), &Truncation::default()).unwrap_err();
        assert!(matches!(err, Error::DegeneratePostselection { .. }));
        assert!(wigner_closed(&ptr(0.0), &cfg(1.0, 0.0), 0.0, 0.0).is_err());
        assert!(mean_photon_final(&ptr(0.5), &cfg(0.0, 0.0)).is_err());
        assert!(matches!(
            mean_photon_final(&ptr(0.0), &cfg(1.0, 0.5)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(wigner_origin(&ptr(0.0), &cfg(1.0, 0.0)).is_err());
        assert!(wigner_origin(&ptr(0.5), &cfg(0.0, 0.0)).is_err());
        assert!(wigner_origin(&ptr(0.5), &cfg(1.0, 0.2)).is_err());
    }

    #[test]
    fn eliminated_level_examples() {
        let levels = eliminated_levels(&cfg(PUBLISHED_PHI0, 0.0), 250_000).unwrap();
        assert_eq!(levels, vec![0, 100_000, 200_000]);
        assert_eq!(eliminated_levels(&cfg(PI, PI), 6).unwrap(), vec![1, 3, 5]);
        assert!(eliminated_levels(&cfg(PI / 2.0, PI / 4.0), 100).unwrap().is_empty());
        assert!(eliminated_levels(&cfg(0.0, 0.0), 10).is_err());
    }

    #[test]
    fn eliminated_levels_carry_no_weight() {
        let c = cfg(PUBLISHED_PHI0, 0.0);
        let out = final_distribution(&ptr(0.99999), &c, &Truncation::MaxLevel(250_000)).unwrap();
        for n in eliminated_levels(&c, 250_000).unwrap() {
            assert!(out.distribution.probs()[n] <= 1e-18, "n = {n}");
        }
        let c = cfg(0.3, 1.2);
        let out = final_distribution(&ptr(0.99), &c, &Truncation::default()).unwrap();
        let levels = eliminated_levels(&c, out.distribution.n_max()).unwrap();
        for n in levels {
            assert!(out.distribution.probs()[n] <= 1e-18);
        }
    }

    #[test]
    fn mean_photon_examples() {
        let (nf, r) = mean_photon_final(&ptr(0.001), &cfg(PUBLISHED_PHI0, 0.0)).unwrap();
        assert!((nf / 1.004 - 1.0).abs() < 0.005 && (r / 1003.0 - 1.0).abs() < 0.005);
        let (nf, r) = mean_photon_final(&ptr(0.5), &cfg(PUBLISHED_PHI0, 0.0)).unwrap();
        assert!((nf / 4.33 - 1.0).abs() < 0.005 && (r / 4.33 - 1.0).abs() < 0.005);
        let (nf, r) = mean_photon_final(&ptr(0.99999), &cfg(PUBLISHED_PHI0, 0.0)).unwrap();
        assert!((nf / 1.05e5 - 1.0).abs() < 0.01 && (r / 1.05 - 1.0).abs() < 0.01);
    }

    #[test]
    fn small_phi_limit() {
        // Σn²zⁿ and Σn³zⁿ moment identities give (1+4z+z²)/((1+z)(1−z)) = 13/3 at z = 1/2
        assert!((small_phi_mean_asymptote(&ptr(0.5)) - 13.0 / 3.0).abs() < 1e-15);
        let (nf, _) = mean_photon_final(&ptr(0.5), &cfg(1e-7, 0.0)).unwrap();
        assert!((nf - 13.0 / 3.0).abs() < 1e-9, "{nf}");
        let (nf, _) = mean_photon_final(&ptr(0.99999), &cfg(PUBLISHED_PHI0, 0.0)).unwrap();
        assert!((nf / small_phi_mean_asymptote(&ptr(0.99999)) - 1.0).abs() > 0.1);
    }

    #[test]
    fn series_and_closed_form_agree_on_grid() {
        for z in [0.1, 0.5, 0.9, 0.99] {
            for phi0 in [1e-4, 0.1, PI / 2.0, PI] {
                for theta in [0.0, 0.3, PI / 2.0] {
                    let c = cfg(phi0, theta);
                    let (sp, sm) = series(z, phi0, theta);
                    let p = postselect_probability(&ptr(z), &c);
                    assert!((p / sp - 1.0).abs() < 1e-12, "P z={z} phi0={phi0} theta={theta}: {p} vs {sp}");
                    let (nf, _) = mean_photon_final(&ptr(z), &c).unwrap();
                    assert!((nf / (sm / sp) - 1.0).abs() < 1e-9, "mean z={z} phi0={phi0} theta={theta}");
                }
            }
        }
    }

    #[test]
    fn mean_matches_distribution_sum() {
        for (z, phi0, theta) in [(0.5, 0.1, 0.0), (0.9, PI / 2.0, 0.3), (0.99, 1e-4, 0.0)] {
            let c = cfg(phi0, theta);
            let out = final_distribution(&ptr(z), &c, &Truncation::TailEps(1e-20)).unwrap();
            assert!(out.tail_mean_bound < 1e-10 * out.mean_photon);
            let (nf, _) = mean_photon_final(&ptr(z), &c).unwrap();
            assert!((out.mean_photon / nf - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn recorded_tail_is_exact() {
        let c = cfg(0.4, 0.2);
        let out = final_distribution(&ptr(0.8), &c, &Truncation::MaxLevel(20)).unwrap();
        let full = final_distribution(&ptr(0.8), &c, &Truncation::TailEps(1e-18)).unwrap();
        let tail: f64 = full.distribution.probs()[21..].iter().sum();
        assert!((out.distribution.tail_mass() - tail).abs() < 1e-15);
    }

    #[test]
    fn wigner_origin_values() {
        let w = wigner_origin(&ptr(0.5), &cfg(PI, 0.0)).unwrap();
        assert!((w + 2.0 / PI).abs() < 1e-14);
        let wc = wigner_closed(&ptr(0.5), &cfg(PI, 0.0), 0.0, 0.0).unwrap();
        assert!((wc + 2.0 / PI).abs() < 1e-14);
        for i in 0..20 {
            for j in 0..20 {
                let z = 0.05 + 0.9 * i as f64 / 19.0;
                let phi0 = 0.01 + 3.09 * j as f64 / 19.0;
                let c = cfg(phi0, 0.0);
                let w0 = wigner_origin(&ptr(z), &c).unwrap();
                let wc = wigner_closed(&ptr(z), &c, 0.0, 0.0).unwrap();
                assert!(w0 < 0.0);
                assert!((w0 / wc - 1.0).abs() < 1e-12, "z={z} phi0={phi0}: {w0} vs {wc}");
            }
        }
    }

    #[test]
    fn wigner_decays_far_from_origin() {
        let c = cfg(PI, 0.0);
        // on the circle r² = 25 only the e^{-2r²(1-z)/(1+z)} term survives:
        // (1-z)/(2πP)·2/(1+z)·e^{-50/3} with P = 1/3, about 1.84e-8
        let edge = 0.5 / (2.0 * PI / 3.0) * (2.0 / 1.5) * (-50.0f64 / 3.0).exp();
        for (x, p) in [(5.0, 0.0), (3.0, 4.0)] {
            let w = wigner_closed(&ptr(0.5), &c, x, p).unwrap();
            assert!((w - edge).abs() < 1e-20, "{w}");
        }
        for (x, p) in [(5.1, 0.0), (3.0, 4.2), (0.0, -6.0)] {
            assert!(wigner_closed(&ptr(0.5), &c, x, p).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn wigner_is_negative_at_origin_for_published_coupling() {
        for z in [0.001, 0.5, 0.99999] {
            let c = cfg(PUBLISHED_PHI0, 0.0);
            let w = wigner_closed(&ptr(z), &c, 0.0, 0.0).unwrap();
            let w0 = wigner_origin(&ptr(z), &c).unwrap();
            assert!(w < 0.0 && w0 < 0.0);
            assert!((w / w0 - 1.0).abs() < 1e-6, "z={z}: {w} vs {w0}");
        }
    }

    #[test]
    fn wigner_integrates_to_one() {
        for z in [0.1, 0.5] {
            for phi0 in [0.5, PI] {
                let c = cfg(phi0, 0.0);
                let half = 6.0 * ptr(z).mean_photon().sqrt().max(1.0);
                let pts = 801;
                let h = 2.0 * half / (pts - 1) as f64;
                let mut total = 0.0;
                for i in 0..pts {
                    let x = -half + h * i as f64;
                    let wx = if i == 0 || i == pts - 1 { 0.5 } else { 1.0 };
                    for j in 0..pts {
                        let p = -half + h * j as f64;
                        let wp = if j == 0 || j == pts - 1 { 0.5 } else { 1.0 };
                        total += wx * wp * wigner_closed(&ptr(z), &c, x, p).unwrap();
                    }
                }
                total *= h * h;
                assert!((total - 1.0).abs() < 1e-4, "z={z} phi0={phi0}: {total}");
            }
        }
    }

    proptest! {
        #[test]
        fn theta_periodicity(z in 0.0f64..0.99, phi0 in -3.0f64..3.0, theta in -3.0f64..3.0) {
            let a = postselect_probability(&ptr(z), &cfg(phi0, theta));
            let b = postselect_probability(&ptr(z), &cfg(phi0, theta + 2.0 * PI));
            prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300) + 1e-300);
        }

        #[test]
        fn phi0_sign_symmetry_at_zero_theta(z in 0.01f64..0.99, phi0 in 1e-4f64..3.0) {
            let a = postselect_probability(&ptr(z), &cfg(phi0, 0.0));
            let b = postselect_probability(&ptr(z), &cfg(-phi0, 0.0));
            prop_assert!((a / b - 1.0).abs() < 1e-13);
            let (ma, _) = mean_photon_final(&ptr(z), &cfg(phi0, 0.0)).unwrap();
            let (mb, _) = mean_photon_final(&ptr(z), &cfg(-phi0, 0.0)).unwrap();
            prop_assert!((ma / mb - 1.0).abs() < 1e-12);
        }

        #[test]
        fn wigner_bounded(z in 0.01f64..0.99, phi0 in 0.01f64..3.1, theta in -3.0f64..3.0,
                          x in -3.0f64..3.0, p in -3.0f64..3.0) {
            let w = wigner_closed(&ptr(z), &cfg(phi0, theta), x, p).unwrap();
            prop_assert!(w.abs() <= 2.0 / PI + 1e-12);
        }
    }
}
