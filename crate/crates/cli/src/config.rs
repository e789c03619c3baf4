//! Experiment configuration: JSON schema, validation and resolution into
//! core objects.
//!
//! Validation collects every violation instead of stopping at the first,
//! so `validate` can report the full list.

use keyadapt::{
    ChannelEnsemble, GaussianStream, LogicalChannel, NuProfile, RateIndex, RateLadder, Seed,
    SubChannel, Transmittance,
};
use serde::{Deserialize, Serialize};

/// Stream tag for the ensemble generator draws.
pub const TAG_ENSEMBLE: u64 = 1;
/// Stream tag for the initial-variance quadrature samples.
pub const TAG_QUAD_INITIAL: u64 = 2;
/// Stream tag for the corrected-variance quadrature samples.
pub const TAG_QUAD_CORRECTED: u64 = 3;
/// Stream tag for Monte Carlo cross-check seeds.
pub const TAG_MONTECARLO: u64 = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub channel: ChannelSpec,
    pub rate_ladder: LadderSpec,
    pub profile: ProfileSpec,
    pub adapt: AdaptSpec,
    #[serde(default)]
    pub multiuser: Option<MultiuserSpec>,
    pub montecarlo: MonteCarloSpec,
    #[serde(default)]
    pub figures: FiguresSpec,
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub n_total: usize,
    #[serde(default)]
    pub sub_channels: Option<Vec<SubChannelSpec>>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubChannelSpec {
    pub index: usize,
    /// Shared value of both transmittance components.
    pub component: f64,
    pub noise_variance: f64,
    /// Defaults to the squared transmittance magnitude.
    #[serde(default)]
    pub fourier_gain: Option<f64>,
}

/// Draws `count` unit-gain sub-channels with noise-to-gain ratios uniform
/// in `[nu_min, nu_max)`, using the run seed. The generator is part of this
/// artifact's configuration, not a claim about any particular measured
/// channel set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub count: usize,
    pub nu_min: f64,
    pub nu_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderSpec {
    pub r_min: f64,
    pub levels: Vec<f64>,
    pub r_max: f64,
    /// Optional private-capacity upper bound the rates must not exceed.
    #[serde(default)]
    pub capacity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSpec {
    /// Decay parameter of the generated exponential profile.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Explicit per-channel tables, in ensemble order. Each table holds the
    /// zero-rate pair plus one `[sigma, gain]` pair per ladder position.
    #[serde(default)]
    pub tables: Option<Vec<ProfileTableSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileTableSpec {
    pub base: [f64; 2],
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptSpec {
    pub target: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiuserSpec {
    pub users: Vec<UserSpec>,
}

/// Users take consecutive runs of the ensemble, in order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserSpec {
    pub m: usize,
    pub target: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloSpec {
    pub trials: u64,
    pub snr_grid_db: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiguresSpec {
    /// Input modulation variance per quadrature, shot-noise units.
    pub modulation_variance: f64,
    /// Ladder position the distribution and equalization pipelines snapshot.
    pub snapshot: RateIndexSpec,
    /// Grid points per ratio sweep.
    pub nu_sweep_points: usize,
}

impl Default for FiguresSpec {
    fn default() -> Self {
        Self {
            modulation_variance: 64.0,
            snapshot: RateIndexSpec::Named("max".into()),
            nu_sweep_points: 101,
        }
    }
}

/// A ladder position in config form: an integer selects an interior curve,
/// `"min"`/`"max"` the boundary curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateIndexSpec {
    Level(usize),
    Named(String),
}

impl RateIndexSpec {
    pub fn resolve(&self, num_levels: usize) -> Result<RateIndex, String> {
        match self {
            RateIndexSpec::Level(q) if *q < num_levels => Ok(RateIndex::Level(*q)),
            RateIndexSpec::Level(q) => Err(format!(
                "snapshot level {q} out of range, ladder has {num_levels} interior curves"
            )),
            RateIndexSpec::Named(s) => match s.as_str() {
                "min" => Ok(RateIndex::AtMin),
                "max" => Ok(RateIndex::AtMax),
                other => Err(format!(
                    "unknown snapshot name {other:?}, expected \"min\", \"max\" or a level number"
                )),
            },
        }
    }
}

/// Outcome of configuration validation: either clean or the full list of
/// violated invariants.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Fully constructed core objects for one experiment run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: Seed,
    pub ensemble: ChannelEnsemble,
    pub ladder: RateLadder,
    pub profiles: Vec<NuProfile>,
    pub target: f64,
    /// Per user: logical channel plus the matching profile slice.
    pub users: Vec<(LogicalChannel, Vec<NuProfile>)>,
    pub montecarlo: MonteCarloSpec,
    /// Decay parameter for the ratio sweeps of the figure pipelines; the
    /// configured profile beta, or 0.3 when explicit tables were given.
    pub sweep_beta: f64,
    pub modulation_variance: f64,
    pub snapshot: RateIndex,
    pub nu_sweep_points: usize,
    pub output_dir: String,
}

pub fn parse_config(bytes: &[u8]) -> Result<ExperimentConfig, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("config parse error: {e}"))
}

/// Builds every core object, collecting the full list of violations.
pub fn resolve_config(config: &ExperimentConfig) -> Result<Resolved, ValidationReport> {
    let mut violations = Vec::new();
    let seed = Seed(config.seed);

    let ladder = match RateLadder::new(
        config.rate_ladder.r_min,
        config.rate_ladder.levels.clone(),
        config.rate_ladder.r_max,
    ) {
        Ok(l) => {
            if let Some(cap) = config.rate_ladder.capacity {
                if let Err(e) = l.check_capacity(cap) {
                    violations.push(e.to_string());
                }
            }
            Some(l)
        }
        Err(e) => {
            violations.push(e.to_string());
            None
        }
    };

    let sub_channels = resolve_channels(&config.channel, seed, &mut violations);
    let ensemble = sub_channels.and_then(|chans| {
        match ChannelEnsemble::new(chans, config.channel.n_total) {
            Ok(e) => Some(e),
            Err(e) => {
                violations.push(e.to_string());
                None
            }
        }
    });

    let profiles = match (&ensemble, &ladder) {
        (Some(ens), Some(lad)) => resolve_profiles(&config.profile, ens, lad, &mut violations),
        _ => None,
    };

    if !config.adapt.target.is_finite() || config.adapt.target < 0.0 {
        violations.push(format!(
            "adaption target must be finite and non-negative, got {}",
            config.adapt.target
        ));
    }

    let users = match (&ensemble, &profiles, &config.multiuser) {
        (Some(ens), Some(profs), Some(spec)) => {
            resolve_users(spec, ens, profs, &mut violations)
        }
        (Some(ens), Some(profs), None) => {
            // Single-user view over the whole ensemble.
            match LogicalChannel::new(0, ens.sub_channels().to_vec(), config.adapt.target) {
                Ok(lc) => Some(vec![(lc, profs.clone())]),
                Err(e) => {
                    violations.push(e.to_string());
                    None
                }
            }
        }
        _ => None,
    };

    if config.montecarlo.trials < 10_000 {
        violations.push(format!(
            "Monte Carlo cross-check needs at least 10000 trials, got {}",
            config.montecarlo.trials
        ));
    }
    if config.montecarlo.snr_grid_db.is_empty() {
        violations.push("Monte Carlo SNR grid must not be empty".into());
    }
    if config.montecarlo.snr_grid_db.iter().any(|s| !s.is_finite()) {
        violations.push("Monte Carlo SNR grid must be finite".into());
    }

    if !config.figures.modulation_variance.is_finite() || config.figures.modulation_variance <= 0.0
    {
        violations.push(format!(
            "modulation variance must be positive and finite, got {}",
            config.figures.modulation_variance
        ));
    }
    if config.figures.nu_sweep_points < 2 {
        violations.push("ratio sweep needs at least 2 grid points".into());
    }
    let snapshot = match &ladder {
        Some(l) => match config.figures.snapshot.resolve(l.num_levels()) {
            Ok(idx) if idx >= RateIndex::AtMin => Some(idx),
            Ok(idx) => {
                violations.push(format!(
                    "snapshot position {idx} precedes the minimal rate curve"
                ));
                None
            }
            Err(e) => {
                violations.push(e);
                None
            }
        },
        None => None,
    };

    if config.output_dir.is_empty() {
        violations.push("output directory must not be empty".into());
    }

    if !violations.is_empty() {
        return Err(ValidationReport { violations });
    }
    Ok(Resolved {
        seed,
        ensemble: ensemble.expect("validated"),
        ladder: ladder.expect("validated"),
        profiles: profiles.expect("validated"),
        target: config.adapt.target,
        users: users.expect("validated"),
        montecarlo: config.montecarlo.clone(),
        sweep_beta: config.profile.beta.unwrap_or(0.3),
        modulation_variance: config.figures.modulation_variance,
        snapshot: snapshot.expect("validated"),
        nu_sweep_points: config.figures.nu_sweep_points,
        output_dir: config.output_dir.clone(),
    })
}

/// Validation-only entry point: the full violation list, empty on pass.
pub fn validate_config(config: &ExperimentConfig) -> ValidationReport {
    match resolve_config(config) {
        Ok(_) => ValidationReport::default(),
        Err(report) => report,
    }
}

fn resolve_channels(
    spec: &ChannelSpec,
    seed: Seed,
    violations: &mut Vec<String>,
) -> Option<Vec<SubChannel>> {
    match (&spec.sub_channels, &spec.generator) {
        (Some(_), Some(_)) => {
            violations.push("channel block must give either sub_channels or generator, not both".into());
            None
        }
        (None, None) => {
            violations.push("channel block must give sub_channels or a generator".into());
            None
        }
        (Some(list), None) => {
            let mut out = Vec::with_capacity(list.len());
            let mut ok = true;
            for ch in list {
                let transmittance = match Transmittance::balanced(ch.component) {
                    Ok(t) => t,
                    Err(e) => {
                        violations.push(format!("sub-channel {}: {e}", ch.index));
                        ok = false;
                        continue;
                    }
                };
                match SubChannel::new(ch.index, transmittance, ch.noise_variance, ch.fourier_gain)
                {
                    Ok(c) => out.push(c),
                    Err(e) => {
                        violations.push(e.to_string());
                        ok = false;
                    }
                }
            }
            ok.then_some(out)
        }
        (None, Some(generator)) => {
            if generator.count == 0 {
                violations.push("generator count must be at least 1".into());
                return None;
            }
            if !(generator.nu_min.is_finite()
                && generator.nu_max.is_finite()
                && 0.0 < generator.nu_min
                && generator.nu_min < generator.nu_max)
            {
                violations.push(format!(
                    "generator ratio range must satisfy 0 < nu_min < nu_max, got [{}, {}]",
                    generator.nu_min, generator.nu_max
                ));
                return None;
            }
            let mut stream = GaussianStream::with_stream(seed.derive(TAG_ENSEMBLE), 0);
            let component = keyadapt::channel::MAX_TRANSMITTANCE_COMPONENT;
            let mut out = Vec::with_capacity(generator.count);
            for index in 0..generator.count {
                let nu = stream.uniform_in(generator.nu_min, generator.nu_max);
                let transmittance = Transmittance::balanced(component).expect("in range");
                // Unit gain: the drawn ratio is the noise variance directly.
                match SubChannel::new(index, transmittance, nu, Some(1.0)) {
                    Ok(c) => out.push(c),
                    Err(e) => {
                        violations.push(e.to_string());
                        return None;
                    }
                }
            }
            Some(out)
        }
    }
}

fn resolve_profiles(
    spec: &ProfileSpec,
    ensemble: &ChannelEnsemble,
    ladder: &RateLadder,
    violations: &mut Vec<String>,
) -> Option<Vec<NuProfile>> {
    match (&spec.beta, &spec.tables) {
        (Some(_), Some(_)) => {
            violations.push("profile block must give either beta or tables, not both".into());
            None
        }
        (None, None) => {
            violations.push("profile block must give beta or tables".into());
            None
        }
        (Some(beta), None) => {
            let mut out = Vec::with_capacity(ensemble.len());
            let mut ok = true;
            for ch in ensemble.sub_channels() {
                match NuProfile::exponential(ch.nu(), *beta, ladder) {
                    Ok(p) => out.push(p),
                    Err(e) => {
                        violations.push(format!("sub-channel {}: {e}", ch.index()));
                        ok = false;
                    }
                }
            }
            ok.then_some(out)
        }
        (None, Some(tables)) => {
            if tables.len() != ensemble.len() {
                violations.push(format!(
                    "{} profile tables supplied for {} sub-channels",
                    tables.len(),
                    ensemble.len()
                ));
                return None;
            }
            let mut out = Vec::with_capacity(tables.len());
            let mut ok = true;
            for (table, ch) in tables.iter().zip(ensemble.sub_channels()) {
                let entries = table.entries.iter().map(|e| (e[0], e[1])).collect();
                match NuProfile::from_entries((table.base[0], table.base[1]), entries) {
                    Ok(p) => {
                        if p.num_levels() != ladder.num_levels() {
                            violations.push(format!(
                                "sub-channel {}: profile covers {} interior curves, ladder has {}",
                                ch.index(),
                                p.num_levels(),
                                ladder.num_levels()
                            ));
                            ok = false;
                        } else if (p.base_nu() - ch.nu()).abs() > 1e-12 * ch.nu() {
                            violations.push(format!(
                                "sub-channel {}: profile base ratio {} does not match channel ratio {}",
                                ch.index(),
                                p.base_nu(),
                                ch.nu()
                            ));
                            ok = false;
                        } else {
                            out.push(p);
                        }
                    }
                    Err(e) => {
                        violations.push(format!("sub-channel {}: {e}", ch.index()));
                        ok = false;
                    }
                }
            }
            ok.then_some(out)
        }
    }
}

fn resolve_users(
    spec: &MultiuserSpec,
    ensemble: &ChannelEnsemble,
    profiles: &[NuProfile],
    violations: &mut Vec<String>,
) -> Option<Vec<(LogicalChannel, Vec<NuProfile>)>> {
    if spec.users.is_empty() {
        violations.push("multiuser block must list at least one user".into());
        return None;
    }
    let total: usize = spec.users.iter().map(|u| u.m).sum();
    if total > ensemble.len() {
        violations.push(format!(
            "users claim {total} sub-channels, ensemble has {}",
            ensemble.len()
        ));
        return None;
    }
    let mut out = Vec::with_capacity(spec.users.len());
    let mut offset = 0;
    let mut ok = true;
    for (user_id, user) in spec.users.iter().enumerate() {
        let chans = ensemble.sub_channels()[offset..offset + user.m].to_vec();
        let profs = profiles[offset..offset + user.m].to_vec();
        match LogicalChannel::new(user_id, chans, user.target) {
            Ok(lc) => out.push((lc, profs)),
            Err(e) => {
                violations.push(e.to_string());
                ok = false;
            }
        }
        offset += user.m;
    }
    ok.then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_config() -> ExperimentConfig {
        parse_config(
            br#"{
            "seed": 7,
            "channel": { "n_total": 4, "generator": { "count": 3, "nu_min": 0.1, "nu_max": 0.3 } },
            "rate_ladder": { "r_min": 0.25, "levels": [0.5, 1.0], "r_max": 2.0 },
            "profile": { "beta": 0.3 },
            "adapt": { "target": 1.0 },
            "montecarlo": { "trials": 10000, "snr_grid_db": [0.0] },
            "output_dir": "out"
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn minimal_config_resolves() {
        let resolved = resolve_config(&minimal_config()).unwrap();
        assert_eq!(resolved.ensemble.len(), 3);
        assert_eq!(resolved.profiles.len(), 3);
        assert_eq!(resolved.users.len(), 1);
        assert_eq!(resolved.snapshot, RateIndex::AtMax);
    }

    #[test]
    fn generator_is_seed_deterministic() {
        let a = resolve_config(&minimal_config()).unwrap();
        let b = resolve_config(&minimal_config()).unwrap();
        assert_eq!(a.ensemble.nus(), b.ensemble.nus());
        let mut cfg = minimal_config();
        cfg.seed = 8;
        let c = resolve_config(&cfg).unwrap();
        assert_ne!(a.ensemble.nus(), c.ensemble.nus());
    }

    #[test]
    fn ladder_ordering_violation_is_reported() {
        let mut cfg = minimal_config();
        cfg.rate_ladder.levels = vec![0.1, 1.0];
        let report = validate_config(&cfg);
        assert!(!report.pass());
        assert!(report.violations.iter().any(|v| v.contains("strictly increasing")));
    }

    #[test]
    fn multiple_violations_are_all_collected() {
        let mut cfg = minimal_config();
        cfg.rate_ladder.levels = vec![0.1, 1.0];
        cfg.adapt.target = -1.0;
        cfg.montecarlo.trials = 10;
        let report = validate_config(&cfg);
        assert!(report.violations.len() >= 3, "{:?}", report.violations);
    }

    #[test]
    fn explicit_channels_catch_transmittance_violations() {
        let mut cfg = minimal_config();
        cfg.channel.generator = None;
        cfg.channel.sub_channels = Some(vec![SubChannelSpec {
            index: 0,
            component: 0.9,
            noise_variance: 0.2,
            fourier_gain: None,
        }]);
        let report = validate_config(&cfg);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("transmittance")));
    }

    #[test]
    fn users_must_fit_in_the_ensemble() {
        let mut cfg = minimal_config();
        cfg.multiuser = Some(MultiuserSpec {
            users: vec![UserSpec { m: 2, target: 0.5 }, UserSpec { m: 2, target: 0.5 }],
        });
        let report = validate_config(&cfg);
        assert!(report.violations.iter().any(|v| v.contains("claim")));
    }

    #[test]
    fn snapshot_specs_resolve() {
        assert_eq!(
            RateIndexSpec::Named("min".into()).resolve(2).unwrap(),
            RateIndex::AtMin
        );
        assert_eq!(RateIndexSpec::Level(1).resolve(2).unwrap(), RateIndex::Level(1));
        assert!(RateIndexSpec::Level(2).resolve(2).is_err());
        assert!(RateIndexSpec::Named("top".into()).resolve(2).is_err());
    }
}
