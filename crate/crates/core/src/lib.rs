//! One-dimensional wave-packet tunneling: grid propagation, arrival-time
//! distributions, closed-form square-barrier scattering, and Nelson
//! stochastic-mechanics path ensembles.
//!
//! Units are natural, `m = ħ = 1`.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrival;
pub mod error;
pub mod model;
pub mod nelson;
pub mod propagator;
pub mod quadrature;
pub mod scattering;
pub mod tridiag;

pub use arrival::{
    arrival_distribution, current_arrival_distribution, delta_t, distribution_peak, mean_arrival_time,
    ArrivalDistribution, DistributionKind, TimeWindow,
};
pub use error::{Error, Result};
pub use model::{gaussian_packet, mean_energy, potential_at, BarrierSpec, Grid, PacketSpec, WaveField};
pub use nelson::{
    drift_field, entrance_statistics, first_passage_distribution, occupation_distribution, sde_step, simulate_ensemble,
    CountingResult, Detector, DriftField, EnsembleConfig, EntranceStats, PathEnsemble,
};
pub use propagator::{
    evolve, evolve_with, free_gaussian_reference, step, Boundary, CrankNicolson, Evolution, EvolutionConfig,
    ProbeRecord,
};
pub use scattering::{
    phase_time, stationary_phase_delta, transmission, transmitted_momentum, transmitted_momentum_with,
    transmitted_packet, transmitted_stats, transmitted_stats_with, MomentumWeight, TransmissionResult,
    TransmittedStats,
};
