//! Multiuser extension: per-user logical channels and the modulation
//! variance correction that equalizes every sub-channel of a user at the
//! minimal error rate.

use crate::adapt::{ber_at, f_function, run_adaption, Allocation, BerPoint};
use crate::channel::{ChannelEnsemble, SubChannel};
use crate::error::{Error, Result};
use crate::ladder::{snr_db, NuProfile, RateIndex, RateLadder};

/// The `m` sub-channels assigned to one user, with that user's target
/// secret-key rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalChannel {
    user_id: usize,
    sub_channels: Vec<SubChannel>,
    target: f64,
}

impl LogicalChannel {
    pub fn new(user_id: usize, sub_channels: Vec<SubChannel>, target: f64) -> Result<Self> {
        if sub_channels.is_empty() {
            return Err(Error::InvalidEnsemble(format!(
                "user {user_id} needs at least one sub-channel"
            )));
        }
        if !target.is_finite() || target < 0.0 {
            return Err(Error::InvalidInput(format!(
                "user {user_id} target must be finite and non-negative, got {target}"
            )));
        }
        let mut indices: Vec<usize> = sub_channels.iter().map(SubChannel::index).collect();
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidEnsemble(format!(
                "user {user_id} has duplicate sub-channel indices"
            )));
        }
        Ok(Self {
            user_id,
            sub_channels,
            target,
        })
    }

    pub fn user_id(&self) -> usize {
        self.user_id
    }

    pub fn sub_channels(&self) -> &[SubChannel] {
        &self.sub_channels
    }

    /// Number of sub-channels `m` of this user.
    pub fn len(&self) -> usize {
        self.sub_channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub_channels.is_empty()
    }

    pub fn target(&self) -> f64 {
        self.target
    }
}

/// Runs the adaption restricted to one user's sub-channels; same contract
/// as [`run_adaption`]. With a single user holding the whole ensemble this
/// reduces to the single-user run, trace for trace.
pub fn adapt_user(
    lc: &LogicalChannel,
    ladder: &RateLadder,
    profiles: &[NuProfile],
) -> Result<Allocation> {
    let n_total = lc
        .sub_channels()
        .iter()
        .map(SubChannel::index)
        .max()
        .expect("validated non-empty")
        + 1;
    let ensemble = ChannelEnsemble::new(lc.sub_channels().to_vec(), n_total)?;
    run_adaption(&ensemble, ladder, profiles, lc.target())
}

/// Minimum of the finite cumulative costs of a user's sub-channels.
///
/// Channels at the maximal rate (infinite cost) are excluded; if every
/// channel is exhausted there is nothing to equalize toward.
pub fn xi_user(deltas: &[f64]) -> Result<f64> {
    if deltas.is_empty() {
        return Err(Error::InvalidInput("empty cost set".into()));
    }
    if deltas.iter().any(|d| d.is_nan()) {
        return Err(Error::NonFinite { context: "xi_user" });
    }
    deltas
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |m| m.min(d)))
        })
        .ok_or(Error::NoEligibleChannel)
}

/// Per-channel modulation variance correction.
///
/// `correction` and `phi` both equal the channel's cost excess over the set
/// minimum; they are reported separately because one is added to the
/// modulation variance while the other is the residual cost after the
/// correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCorrection {
    /// Minimum cumulative cost of the user's set.
    pub xi: f64,
    /// Variance increment for this channel, `delta - xi` (zero for the
    /// minimum-cost channel).
    pub correction: f64,
    /// `sigma_omega_sq + correction`.
    pub corrected_variance: f64,
    /// Residual cost after correction, `delta - xi`.
    pub phi: f64,
    /// SNR increment, filled in by [`snr_increment`] when a profile context
    /// is available.
    pub snr_increment: Option<f64>,
}

/// Corrections that lift every channel's modulation variance just enough to
/// equalize the user's set at its minimum cost.
pub fn variance_correction(
    deltas: &[f64],
    sigma_omega_sq: f64,
) -> Result<Vec<VarianceCorrection>> {
    if !sigma_omega_sq.is_finite() || sigma_omega_sq <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "modulation variance must be positive and finite, got {sigma_omega_sq}"
        )));
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite {
            context: "variance_correction",
        });
    }
    let xi = xi_user(deltas)?;
    Ok(deltas
        .iter()
        .map(|&delta| {
            let excess = delta - xi;
            VarianceCorrection {
                xi,
                correction: excess,
                corrected_variance: sigma_omega_sq + excess,
                phi: excess,
                snr_increment: None,
            }
        })
        .collect())
}

/// SNR increment achieved by the variance correction at residual cost
/// `phi`: the decibel value of the set minimum less the SNR-ratio function
/// evaluated one ladder position past `up_to`.
pub fn snr_increment(
    phi: f64,
    profile: &NuProfile,
    up_to: RateIndex,
    xi: f64,
) -> Result<f64> {
    if !phi.is_finite() || phi < 0.0 {
        return Err(Error::InvalidInput(format!(
            "residual cost must be finite and non-negative, got {phi}"
        )));
    }
    if !xi.is_finite() || xi <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "set minimum must be positive and finite, got {xi}"
        )));
    }
    let next = up_to
        .successor(profile.num_levels())
        .ok_or(Error::MissingRateIndex(RateIndex::AtMax))?;
    Ok(snr_db(xi)? - f_function(profile, next)?)
}

/// Error rates after the variance correction.
///
/// Every corrected channel carries the cost of the minimum-cost channel, so
/// all of them share that channel's error rate: each returned point keeps
/// the channel's own rate position but takes its argument and error rate
/// from the zero-correction channel.
pub fn equalized_ber(
    profiles: &[NuProfile],
    targets: &[RateIndex],
    corrections: &[VarianceCorrection],
) -> Result<Vec<BerPoint>> {
    if profiles.is_empty() || profiles.len() != targets.len() || profiles.len() != corrections.len()
    {
        return Err(Error::InvalidInput(format!(
            "mismatched inputs: {} profiles, {} targets, {} corrections",
            profiles.len(),
            targets.len(),
            corrections.len()
        )));
    }
    let anchor = corrections
        .iter()
        .position(|c| c.phi == 0.0)
        .ok_or(Error::InternalInvariant(
            "at least one channel has zero correction",
        ))?;
    let anchor_point = ber_at(&profiles[anchor], targets[anchor])?;
    Ok((0..profiles.len())
        .map(|i| BerPoint {
            rate_index: targets[i],
            delta: corrections[i].xi,
            ..anchor_point
        })
        .collect())
}
