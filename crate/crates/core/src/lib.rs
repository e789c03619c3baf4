//! Iterative secret-key-rate adaption over Gaussian sub-channels.
//!
//! A multicarrier transmitter spreads Gaussian-modulated quadratures over
//! many Gaussian sub-channels, each with its own transmittance and noise
//! level. This crate models those sub-channels, defines the shared ladder of
//! private-rate curves, and implements the greedy adaption loop that reaches
//! a target aggregate key rate while keeping the analytic bit error rate of
//! every transmission minimal. A multiuser layer assigns disjoint
//! sub-channel sets to users and equalizes each user's error rates with a
//! per-subcarrier modulation variance correction.
//!
//! Modules:
//!
//! - [`numerics`]: erfc, seeded Gaussian streams, unitary DFT kernels.
//! - [`channel`]: sub-channel model, block transmission, Monte Carlo BER.
//! - [`ladder`]: rate curves, per-rate noise profiles, SNR mapping.
//! - [`adapt`]: cumulative cost iteration, greedy selection, analytic BER,
//!   the adaption loop.
//! - [`multiuser`]: logical channels, variance correction, equalized BER.
//!
//! All randomized operations are driven by explicit [`numerics::Seed`]
//! values and are reproducible bit for bit.

pub mod adapt;
pub mod channel;
pub mod error;
pub mod ladder;
pub mod multiuser;
pub mod numerics;

pub use adapt::{
    ber_at, delta_chain, delta_diff, f_function, f_parts, run_adaption, select_channel,
    Allocation, BerPoint, DeltaState, FParts, StepRecord,
};
pub use channel::{
    monte_carlo_ber, transmit_block, ChannelEnsemble, QuadratureBlock, SubChannel, Transmittance,
};
pub use error::{Error, Result};
pub use ladder::{snr_db, NuProfile, RateIndex, RateLadder};
pub use multiuser::{
    adapt_user, equalized_ber, snr_increment, variance_correction, xi_user, LogicalChannel,
    VarianceCorrection,
};
pub use numerics::{dft, erfc, idft, ComplexVec, GaussianStream, Seed};
