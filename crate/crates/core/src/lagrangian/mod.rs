//! Particle methods: exact shear characteristics, stochastic flows with
//! reproducible per-particle noise, and the statistics built on them.

pub mod flow;
pub mod rng;
pub mod sde;
pub mod stats;

pub use flow::{flow_deterministic, flow_points, flow_points_refined, stretches, Stretch};
pub use rng::{purpose, stream_id, RandomStream};
pub use sde::{
    brownian_sup_frequency, exit_free_probability, feynman_kac_estimate, mean_and_error, required_substeps, sde_advance,
    signed_gap, BrownianSup, FkEstimate, ParticleEnsemble,
};
pub use stats::{
    drift_threshold, flow_lipschitz_estimate, occupancy_statistics, pairwise_sum, stage_product, uniformity_chi2,
    window_displacement_stat, LipschitzEstimate, Occupancy, Probe, Uniformity, WindowDrift,
};
