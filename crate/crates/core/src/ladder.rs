//! Private-rate curves: the ordered rate ladder, per-rate noise-to-gain
//! profiles and the SNR mapping.
//!
//! A [`RateLadder`] holds the shared ordered rate curves
//! `r_min < levels[0] < ... < levels[r-1] < r_max`. Each sub-channel gets a
//! [`NuProfile`] assigning a strictly decreasing noise-to-gain ratio to every
//! ladder position. Both validate at construction and are immutable after.

use crate::error::{Error, Result};
use std::fmt;

/// Position on the rate ladder, including the boundary curves.
///
/// Total order: `AtZero < AtMin < Level(0) < ... < Level(r-1) < AtMax`.
/// `AtZero` is the no-transmission state, `AtMin`/`AtMax` the boundary
/// rate curves enclosing the adaption region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateIndex {
    AtZero,
    AtMin,
    Level(usize),
    AtMax,
}

impl RateIndex {
    /// Next position up the ladder, `None` past the top.
    /// `num_levels` is the number of interior rate curves `r`.
    pub fn successor(self, num_levels: usize) -> Option<RateIndex> {
        match self {
            RateIndex::AtZero => Some(RateIndex::AtMin),
            RateIndex::AtMin => Some(RateIndex::Level(0)),
            RateIndex::Level(q) if q + 1 < num_levels => Some(RateIndex::Level(q + 1)),
            RateIndex::Level(_) => Some(RateIndex::AtMax),
            RateIndex::AtMax => None,
        }
    }

    /// Previous position, `None` below the bottom.
    pub fn predecessor(self, num_levels: usize) -> Option<RateIndex> {
        match self {
            RateIndex::AtZero => None,
            RateIndex::AtMin => Some(RateIndex::AtZero),
            RateIndex::Level(0) => Some(RateIndex::AtMin),
            RateIndex::Level(q) => Some(RateIndex::Level(q - 1)),
            RateIndex::AtMax if num_levels > 0 => Some(RateIndex::Level(num_levels - 1)),
            RateIndex::AtMax => Some(RateIndex::AtMin),
        }
    }
}

impl fmt::Display for RateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateIndex::AtZero => write!(f, "zero"),
            RateIndex::AtMin => write!(f, "min"),
            RateIndex::Level(q) => write!(f, "L{q}"),
            RateIndex::AtMax => write!(f, "max"),
        }
    }
}

/// Ordered private-rate curves shared by all sub-channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLadder {
    r_min: f64,
    levels: Vec<f64>,
    r_max: f64,
}

impl RateLadder {
    /// Validates the strict ordering `r_min < levels[0] < ... < r_max`,
    /// finiteness, non-negativity and `levels.len() >= 1`.
    pub fn new(r_min: f64, levels: Vec<f64>, r_max: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLadder(
                "at least one interior rate curve is required".into(),
            ));
        }
        let mut all = Vec::with_capacity(levels.len() + 2);
        all.push(r_min);
        all.extend_from_slice(&levels);
        all.push(r_max);
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidLadder(
                "rates must be finite and non-negative".into(),
            ));
        }
        for pair in all.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidLadder(format!(
                    "rates must be strictly increasing, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self {
            r_min,
            levels,
            r_max,
        })
    }

    /// Number of interior rate curves `r`.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Private rate at a ladder position; zero when not transmitting.
    pub fn rate_at(&self, idx: RateIndex) -> Result<f64> {
        match idx {
            RateIndex::AtZero => Ok(0.0),
            RateIndex::AtMin => Ok(self.r_min),
            RateIndex::Level(q) => self
                .levels
                .get(q)
                .copied()
                .ok_or(Error::MissingRateIndex(idx)),
            RateIndex::AtMax => Ok(self.r_max),
        }
    }

    /// All positions from `AtZero` to `AtMax` in ladder order.
    pub fn indices(&self) -> Vec<RateIndex> {
        let mut v = Vec::with_capacity(self.levels.len() + 3);
        v.push(RateIndex::AtZero);
        v.push(RateIndex::AtMin);
        v.extend((0..self.levels.len()).map(RateIndex::Level));
        v.push(RateIndex::AtMax);
        v
    }

    /// Checks that no ladder rate exceeds an optional configured capacity
    /// bound.
    pub fn check_capacity(&self, capacity: f64) -> Result<()> {
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(Error::InvalidLadder(format!(
                "capacity bound must be positive and finite, got {capacity}"
            )));
        }
        if self.r_max > capacity {
            return Err(Error::InvalidLadder(format!(
                "maximal rate {} exceeds the capacity bound {capacity}",
                self.r_max
            )));
        }
        Ok(())
    }
}

/// Per-rate noise-variance/gain table of one sub-channel.
///
/// Stores `(sigma, gain)` for every ladder position; the noise-to-gain
/// ratio `sigma / gain` must be non-increasing from the zero-rate entry to
/// the minimal-rate curve and strictly decreasing from there up.
#[derive(Debug, Clone, PartialEq)]
pub struct NuProfile {
    /// `(sigma, gain)` at zero rate; its ratio is the sub-channel's base
    /// noise-to-gain value.
    base: (f64, f64),
    /// `(sigma, gain)` at `AtMin`, `Level(0..r)`, `AtMax`, in ladder order.
    entries: Vec<(f64, f64)>,
}

impl NuProfile {
    /// Builds a profile from explicit `(sigma, gain)` pairs.
    ///
    /// `entries` run in ladder order `AtMin, Level(0), ..., Level(r-1),
    /// AtMax` and therefore have length `r + 2` with `r >= 1`.
    pub fn from_entries(base: (f64, f64), entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.len() < 3 {
            return Err(Error::InvalidProfile(
                "profile needs entries for the minimal rate, at least one interior curve and the maximal rate".into(),
            ));
        }
        for &(sigma, gain) in std::iter::once(&base).chain(entries.iter()) {
            if !sigma.is_finite() || !gain.is_finite() || sigma <= 0.0 || gain <= 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "sigma and gain must be positive and finite, got ({sigma}, {gain})"
                )));
            }
        }
        let profile = Self { base, entries };
        let ratios: Vec<f64> = profile.all_ratios();
        // Non-strict only at the zero-rate boundary.
        if ratios[0] < ratios[1] {
            return Err(Error::InvalidProfile(format!(
                "noise-to-gain ratio may not increase from zero rate to the minimal curve ({} -> {})",
                ratios[0], ratios[1]
            )));
        }
        for pair in ratios[1..].windows(2) {
            if pair[0] <= pair[1] {
                return Err(Error::InvalidProfile(format!(
                    "noise-to-gain ratio must strictly decrease along the ladder, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(profile)
    }

    /// Default generated profile: ratio `base_nu * exp(-beta * rate)` at
    /// every ladder position, with unit gain and the ratio stored as sigma.
    ///
    /// Any monotone profile may be supplied via [`NuProfile::from_entries`]
    /// instead; this generator only pins a concrete decreasing shape.
    pub fn exponential(base_nu: f64, beta: f64, ladder: &RateLadder) -> Result<Self> {
        if !base_nu.is_finite() || base_nu <= 0.0 {
            return Err(Error::InvalidProfile(format!(
                "base noise-to-gain ratio must be positive and finite, got {base_nu}"
            )));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidProfile(format!(
                "decay parameter must be positive, got {beta}"
            )));
        }
        let entry = |rate: f64| (base_nu * (-beta * rate).exp(), 1.0);
        let mut entries = Vec::with_capacity(ladder.num_levels() + 2);
        entries.push(entry(ladder.r_min()));
        for &rate in ladder.levels() {
            entries.push(entry(rate));
        }
        entries.push(entry(ladder.r_max()));
        Self::from_entries((base_nu, 1.0), entries)
    }

    /// Number of interior rate curves covered by this profile.
    pub fn num_levels(&self) -> usize {
        self.entries.len() - 2
    }

    /// Noise-to-gain ratio at a ladder position.
    pub fn nu_at(&self, idx: RateIndex) -> Result<f64> {
        let (sigma, gain) = match idx {
            RateIndex::AtZero => self.base,
            RateIndex::AtMin => self.entries[0],
            RateIndex::Level(q) => {
                if q >= self.num_levels() {
                    return Err(Error::MissingRateIndex(idx));
                }
                self.entries[q + 1]
            }
            RateIndex::AtMax => *self.entries.last().expect("validated non-empty"),
        };
        Ok(sigma / gain)
    }

    /// Base noise-to-gain ratio at zero rate.
    pub fn base_nu(&self) -> f64 {
        self.base.0 / self.base.1
    }

    fn all_ratios(&self) -> Vec<f64> {
        std::iter::once(self.base)
            .chain(self.entries.iter().copied())
            .map(|(s, g)| s / g)
            .collect()
    }
}

/// SNR in decibels of a noise-to-gain ratio: `10 * log10(1 / nu)`.
pub fn snr_db(nu: f64) -> Result<f64> {
    if !nu.is_finite() {
        return Err(Error::NonFinite { context: "snr_db" });
    }
    if nu <= 0.0 {
        return Err(Error::NonPositiveNu(nu));
    }
    Ok(10.0 * (1.0 / nu).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder() -> RateLadder {
        RateLadder::new(0.25, vec![0.5, 1.0, 1.5], 2.0).unwrap()
    }

    #[test]
    fn ladder_rejects_broken_ordering() {
        assert!(RateLadder::new(0.6, vec![0.5, 1.0], 2.0).is_err());
        assert!(RateLadder::new(0.1, vec![0.5, 0.5], 2.0).is_err());
        assert!(RateLadder::new(0.1, vec![0.5, 1.0], 1.0).is_err());
        assert!(RateLadder::new(0.1, vec![], 1.0).is_err());
        assert!(RateLadder::new(-0.1, vec![0.5], 1.0).is_err());
    }

    #[test]
    fn ladder_maps_indices_to_rates() {
        let l = ladder();
        assert_eq!(l.rate_at(RateIndex::AtZero).unwrap(), 0.0);
        assert_eq!(l.rate_at(RateIndex::AtMin).unwrap(), 0.25);
        assert_eq!(l.rate_at(RateIndex::Level(1)).unwrap(), 1.0);
        assert_eq!(l.rate_at(RateIndex::AtMax).unwrap(), 2.0);
        assert!(l.rate_at(RateIndex::Level(3)).is_err());
    }

    #[test]
    fn capacity_bound_is_enforced() {
        let l = ladder();
        assert!(l.check_capacity(2.0).is_ok());
        assert!(l.check_capacity(1.9).is_err());
        assert!(l.check_capacity(0.0).is_err());
    }

    #[test]
    fn rate_index_order_and_neighbours() {
        use RateIndex::*;
        assert!(AtZero < AtMin && AtMin < Level(0) && Level(0) < Level(1) && Level(1) < AtMax);
        assert_eq!(AtZero.successor(2), Some(AtMin));
        assert_eq!(AtMin.successor(2), Some(Level(0)));
        assert_eq!(Level(1).successor(2), Some(AtMax));
        assert_eq!(AtMax.successor(2), None);
        assert_eq!(AtMin.predecessor(2), Some(AtZero));
        assert_eq!(AtMax.predecessor(2), Some(Level(1)));
        assert_eq!(AtZero.predecessor(2), None);
    }

    #[test]
    fn snr_db_anchors() {
        assert_eq!(snr_db(1.0).unwrap(), 0.0);
        assert_eq!(snr_db(0.1).unwrap(), 10.0);
        assert!(snr_db(0.0).is_err());
        assert!(snr_db(-0.5).is_err());
        assert!(snr_db(f64::NAN).is_err());
    }

    #[test]
    fn snr_db_round_trips_on_the_5db_grid() {
        for s in [-5.0f64, 0.0, 5.0, 10.0, 15.0] {
            let nu = 10f64.powf(-s / 10.0);
            assert_eq!(snr_db(nu).unwrap(), s);
        }
    }

    #[test]
    fn exponential_profile_matches_frozen_values() {
        // nu(R) = 0.5 * exp(-0.3 R); values frozen from an independent
        // high-precision evaluation.
        let p = NuProfile::exponential(0.5, 0.3, &ladder()).unwrap();
        assert_eq!(p.nu_at(RateIndex::AtZero).unwrap(), 0.5);
        assert!((p.nu_at(RateIndex::Level(0)).unwrap() - 0.43035398821252890).abs() < 1e-12);
        assert!((p.nu_at(RateIndex::Level(1)).unwrap() - 0.37040911034085893).abs() < 1e-12);
        assert!((p.nu_at(RateIndex::Level(2)).unwrap() - 0.31881407581088665).abs() < 1e-12);
    }

    #[test]
    fn exponential_profile_is_strictly_decreasing() {
        let l = ladder();
        let p = NuProfile::exponential(0.5, 0.3, &l).unwrap();
        let mut prev = p.nu_at(RateIndex::AtZero).unwrap();
        for idx in &l.indices()[1..] {
            let nu = p.nu_at(*idx).unwrap();
            assert!(nu < prev);
            prev = nu;
        }
    }

    #[test]
    fn non_positive_beta_is_rejected() {
        assert!(NuProfile::exponential(0.5, 0.0, &ladder()).is_err());
        assert!(NuProfile::exponential(0.5, -0.1, &ladder()).is_err());
    }

    #[test]
    fn non_monotone_table_is_rejected() {
        // Ratio rises between the two interior curves.
        let bad = NuProfile::from_entries(
            (0.5, 1.0),
            vec![(0.4, 1.0), (0.3, 1.0), (0.35, 1.0), (0.1, 1.0)],
        );
        assert!(bad.is_err());
        // Equal adjacent ratios above the zero-rate boundary are rejected too.
        let flat = NuProfile::from_entries((0.5, 1.0), vec![(0.4, 1.0), (0.4, 1.0), (0.1, 1.0)]);
        assert!(flat.is_err());
        // Equality at the zero-rate boundary is allowed.
        let ok = NuProfile::from_entries((0.4, 1.0), vec![(0.4, 1.0), (0.3, 1.0), (0.1, 1.0)]);
        assert!(ok.is_ok());
    }

    #[test]
    fn nu_at_reports_missing_levels() {
        let p = NuProfile::exponential(0.5, 0.3, &ladder()).unwrap();
        assert_eq!(
            p.nu_at(RateIndex::Level(7)),
            Err(Error::MissingRateIndex(RateIndex::Level(7)))
        );
    }

    #[test]
    fn base_entry_uses_sigma_over_gain() {
        let p = NuProfile::from_entries(
            (0.5, 1.0),
            vec![(0.2, 0.5), (0.3, 1.0), (0.2, 1.0)],
        )
        .unwrap();
        assert_eq!(p.nu_at(RateIndex::AtZero).unwrap(), 0.5);
        assert_eq!(p.nu_at(RateIndex::AtMin).unwrap(), 0.4);
    }
}
