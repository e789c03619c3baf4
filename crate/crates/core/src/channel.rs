//! Gaussian sub-channel model: transmittance plus additive noise, the
//! noise-to-gain coefficient, block transmission and an empirical bit error
//! rate oracle.

use crate::error::{Error, Result};
use crate::numerics::{ComplexVec, GaussianStream, Seed};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest admissible value for either transmittance component.
pub const MAX_TRANSMITTANCE_COMPONENT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Complex transmittance of one sub-channel.
///
/// Both components lie in `[0, 1/sqrt(2)]` and are equal, so the squared
/// magnitude stays within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmittance {
    re: f64,
    im: f64,
}

impl Transmittance {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let in_range = |c: f64| c.is_finite() && (0.0..=MAX_TRANSMITTANCE_COMPONENT).contains(&c);
        if re != im || !in_range(re) || !in_range(im) {
            return Err(Error::InvalidTransmittance { re, im });
        }
        Ok(Self { re, im })
    }

    /// Transmittance with both quadrature components set to `component`.
    pub fn balanced(component: f64) -> Result<Self> {
        Self::new(component, component)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    /// Squared magnitude `re^2 + im^2`, in `[0, 1]`.
    pub fn magnitude_sq(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// One Gaussian sub-channel: transmittance, per-quadrature noise variance
/// (shot-noise units) and the Fourier-domain gain seen after decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SubChannel {
    index: usize,
    transmittance: Transmittance,
    noise_variance: f64,
    fourier_gain: f64,
}

impl SubChannel {
    /// `fourier_gain` is a configured scalar; when absent it defaults to the
    /// squared transmittance magnitude. Channels with zero gain are rejected
    /// here because their noise-to-gain ratio is undefined.
    pub fn new(
        index: usize,
        transmittance: Transmittance,
        noise_variance: f64,
        fourier_gain: Option<f64>,
    ) -> Result<Self> {
        if !noise_variance.is_finite() || noise_variance <= 0.0 {
            return Err(Error::InvalidSubChannel {
                index,
                reason: format!("noise variance must be positive, got {noise_variance}"),
            });
        }
        let gain = fourier_gain.unwrap_or_else(|| transmittance.magnitude_sq());
        if !gain.is_finite() || gain <= 0.0 {
            return Err(Error::InvalidSubChannel {
                index,
                reason: format!("Fourier gain must be positive, got {gain}"),
            });
        }
        Ok(Self {
            index,
            transmittance,
            noise_variance,
            fourier_gain: gain,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn transmittance(&self) -> Transmittance {
        self.transmittance
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn fourier_gain(&self) -> f64 {
        self.fourier_gain
    }

    /// Noise-to-gain ratio `noise_variance / fourier_gain`; strictly
    /// positive by construction.
    pub fn nu(&self) -> f64 {
        self.noise_variance / self.fourier_gain
    }
}

/// The `l` information-bearing sub-channels out of `n_total`.
///
/// The remaining `n_total - l` sub-channels carry nothing and are
/// represented by count only.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEnsemble {
    sub_channels: Vec<SubChannel>,
    n_total: usize,
}

impl ChannelEnsemble {
    pub fn new(sub_channels: Vec<SubChannel>, n_total: usize) -> Result<Self> {
        if sub_channels.is_empty() {
            return Err(Error::InvalidEnsemble(
                "at least one information-bearing sub-channel is required".into(),
            ));
        }
        let mut seen = vec![false; n_total];
        for ch in &sub_channels {
            if ch.index() >= n_total {
                return Err(Error::InvalidEnsemble(format!(
                    "sub-channel index {} outside [0, {n_total})",
                    ch.index()
                )));
            }
            if seen[ch.index()] {
                return Err(Error::InvalidEnsemble(format!(
                    "duplicate sub-channel index {}",
                    ch.index()
                )));
            }
            seen[ch.index()] = true;
        }
        Ok(Self {
            sub_channels,
            n_total,
        })
    }

    /// Number of information-bearing sub-channels `l`.
    pub fn len(&self) -> usize {
        self.sub_channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub_channels.is_empty()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn sub_channels(&self) -> &[SubChannel] {
        &self.sub_channels
    }

    /// Noise-to-gain ratios in ensemble order.
    pub fn nus(&self) -> Vec<f64> {
        self.sub_channels.iter().map(SubChannel::nu).collect()
    }
}

/// A block of complex quadratures with its modulation variance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureBlock {
    quadratures: ComplexVec,
    modulation_variance: f64,
}

impl QuadratureBlock {
    /// Draws `len` quadrature pairs i.i.d. from `N(0, modulation_variance)`
    /// per component.
    pub fn sample(len: usize, modulation_variance: f64, stream: &mut GaussianStream) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyVector);
        }
        let quadratures = (0..len)
            .map(|_| stream.complex_gaussian(modulation_variance))
            .collect::<Result<ComplexVec>>()?;
        Ok(Self {
            quadratures,
            modulation_variance,
        })
    }

    /// Wraps explicit quadratures; `modulation_variance` records their
    /// source variance.
    pub fn from_parts(quadratures: ComplexVec, modulation_variance: f64) -> Result<Self> {
        if quadratures.is_empty() {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            quadratures,
            modulation_variance,
        })
    }

    pub fn quadratures(&self) -> &[Complex64] {
        &self.quadratures
    }

    pub fn len(&self) -> usize {
        self.quadratures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadratures.is_empty()
    }

    pub fn modulation_variance(&self) -> f64 {
        self.modulation_variance
    }
}

/// Sends one subcarrier block through the ensemble:
/// `out_i = sqrt(gain_i) * d_i + noise_i` with i.i.d. `N(0, sigma_i^2)`
/// noise per quadrature. Deterministic for a fixed stream.
pub fn transmit_block(
    input: &QuadratureBlock,
    ensemble: &ChannelEnsemble,
    stream: &mut GaussianStream,
) -> Result<QuadratureBlock> {
    if input.len() != ensemble.len() {
        return Err(Error::BlockLengthMismatch {
            expected: ensemble.len(),
            got: input.len(),
        });
    }
    let mut out = Vec::with_capacity(input.len());
    for (d, ch) in input.quadratures().iter().zip(ensemble.sub_channels()) {
        let amplitude = ch.fourier_gain().sqrt();
        let noise = stream.complex_gaussian(ch.noise_variance())?;
        out.push(d * amplitude + noise);
    }
    QuadratureBlock::from_parts(out, input.modulation_variance())
}

/// Empirical bit error rate of antipodal signaling over an AWGN channel at
/// the given SNR, hard-decided by sign.
///
/// The expected value is `erfc(sqrt(snr_linear)) / 2`, which makes this the
/// matching Monte Carlo oracle for the analytic error-rate curve. Trials are
/// split into chunks with independent derived streams; the error count is a
/// plain sum, so the result does not depend on scheduling.
pub fn monte_carlo_ber(snr_db: f64, trials: u64, seed: Seed) -> Result<f64> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if !snr_db.is_finite() {
        return Err(Error::NonFinite { context: "monte_carlo_ber" });
    }
    let snr_linear = 10f64.powf(snr_db / 10.0);
    // Unit-amplitude symbols; variance chosen so BER = erfc(sqrt(snr)) / 2.
    let noise_sigma = (1.0 / (2.0 * snr_linear)).sqrt();

    const CHUNK: u64 = 1 << 16;
    let n_chunks = trials.div_ceil(CHUNK);
    let errors: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let len = CHUNK.min(trials - chunk * CHUNK);
            let mut stream = GaussianStream::with_stream(seed, chunk);
            let mut errors = 0u64;
            for _ in 0..len {
                let bit = stream.bit();
                let symbol = if bit { 1.0 } else { -1.0 };
                let received = symbol + noise_sigma * stream.standard();
                if (received >= 0.0) != bit {
                    errors += 1;
                }
            }
            errors
        })
        .sum();
    Ok(errors as f64 / trials as f64)
}
