//! Spot volatility estimation from high-frequency order prices observed
//! through lower-bounded, one-sided microstructure noise.
//!
//! Ask quotes sit above the latent efficient price, so observation errors
//! are non-negative and block-wise *minima* of the observations track the
//! efficient price closely. This crate provides the full pipeline built on
//! that idea:
//!
//! * [`sim`] — synthetic market days: a stochastic-volatility price with an
//!   intraday seasonality factor, compound-Poisson jumps, and one-sided
//!   noise (exponential, uniform, Pareto or none);
//! * [`blocks`] — block partitions of the trading day, block minima, their
//!   differences, and a quadratic noise-level estimator;
//! * [`estimators`] — spot volatility and quarticity from locally averaged
//!   squared minima differences, jump truncation, confidence intervals and
//!   intraday volatility curves;
//! * [`psi`] — a Monte-Carlo engine for the finite-sample bias map Psi_n
//!   with a fast backward-recursion sampler, isotonic smoothing, slope
//!   fitting and numerical inversion for bias correction;
//! * [`csvio`] — CSV serialization of every artifact above.

pub mod blocks;
pub mod csvio;
pub mod error;
pub mod estimators;
pub mod isotonic;
pub mod psi;
pub mod rng;
pub mod sim;
pub mod stats;

pub use blocks::{
    estimate_noise_level, local_minima, partition, partition_with, BlockMembership,
    BlockPartition, LocalMinima,
};
pub use error::{Error, Result};
pub use estimators::{
    confidence_interval, spot_quarticity, spot_vol, spot_vol_centered, spot_vol_post,
    spot_vol_pre, vol_jump_statistic, volatility_curve, BiasCorrection, EstimatorConfig,
    SpotEstimate, VolatilityCurve, WindowMode,
};
pub use psi::{
    build_psi_table, estimate_psi_point, fit_slope, invert_psi, sample_min_bruteforce,
    sample_min_dp, MinVariant, PsiConfig, PsiTable,
};
pub use sim::{
    add_jumps, simulate_path, simulate_price_on_vol, simulate_vol_path, synthesize_observations,
    Drift, JumpConfig, JumpSizeLaw, NoiseConfig, NoiseFamily, ObservationSeries, PathBundle,
    SvModelConfig, VolPath,
};
