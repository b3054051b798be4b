//! Postselected weak amplification of a thermal-light pointer coupled to a
//! single photon through a cross-Kerr interaction.
//!
//! * [`closed_form`] evaluates the analytic success probability, conditional
//!   photon-number distribution, conditional mean and Wigner function.
//! * [`fock`] recomputes them level by level through an explicit
//!   interferometer matrix chain and a Laguerre-series Wigner function.
//! * [`coherent`] recomputes them by Monte Carlo over the coherent-state
//!   (P-function) decomposition of the thermal pointer.
//! * [`sweep`], [`verify`] and [`cli`] drive parameter sweeps, cross-checks and
//!   the `tlk` binary.

pub mod cli;
pub mod closed_form;
pub mod coherent;
pub mod error;
pub mod fock;
pub mod model;
pub mod numeric;
pub mod sweep;
pub mod verify;

pub use closed_form::{
    eliminated_levels, final_distribution, mean_photon_final, postselect_probability,
    small_phi_mean_asymptote, thermal_distribution, wigner_closed, wigner_origin, WignerSample,
};
pub use coherent::{coherent_pair_number_weights, mc_postselect, sample_thermal_alpha, CoherentSample, MonteCarloEstimate};
pub use error::{Error, Result};
pub use fock::{dark_port_amplitude, oracle_postselect, wigner_series, SystemAmplitudes};
pub use model::{
    z_from_boltzmann_ratio, InteractionConfig, MonteCarloConfig, NumberDistribution,
    PostselectionOutcome, ThermalPointer, Truncation,
};
pub use sweep::{sweep_theta, sweep_z, wigner_grid, SweepResult};
