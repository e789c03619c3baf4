//! Experiment pipelines: adaption runs, equalization, Monte Carlo
//! cross-checks and the figure-data tables.
//!
//! Every pipeline is a pure function of the resolved configuration, so
//! re-running with the same config file produces byte-identical CSV output.

use crate::config::{Resolved, TAG_MONTECARLO, TAG_QUAD_CORRECTED, TAG_QUAD_INITIAL};
use crate::csvout::{fmt_flag, fmt_real, CsvTable};
use anyhow::{bail, Result};
use keyadapt::{
    adapt_user, ber_at, erfc, monte_carlo_ber, run_adaption, snr_db, snr_increment,
    variance_correction, xi_user, Allocation, Error, GaussianStream, NuProfile, RateLadder,
};
use sha2::{Digest, Sha256};

/// Fixed decibel anchors of the ratio-scaling figure.
pub const FIG4_SNR_GRID_DB: [f64; 5] = [15.0, 10.0, 5.0, 0.0, -5.0];

/// Hex digest identifying the configuration file a run was produced from.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

fn trace_table(
    pipeline: &str,
    file: &str,
    ladder: &RateLadder,
    channel_ids: &[usize],
    alloc: &Allocation,
) -> CsvTable {
    let mut t = CsvTable::new(pipeline, file, vec![
        "step",
        "channel",
        "channel_id",
        "rate_index",
        "rate",
        "delta_selected",
        "numerator",
        "denominator",
        "erfc_arg",
        "ber",
        "clamped",
    ]);
    for rec in &alloc.trace {
        t.push(vec![
            rec.step.to_string(),
            rec.channel.to_string(),
            channel_ids[rec.channel].to_string(),
            rec.reached.to_string(),
            fmt_real(ladder.rate_at(rec.reached).expect("trace index valid")),
            fmt_real(rec.delta_selected),
            fmt_real(rec.ber.numerator),
            fmt_real(rec.ber.denominator),
            fmt_real(rec.ber.erfc_arg),
            fmt_real(rec.ber.ber),
            fmt_flag(rec.ber.clamped),
        ]);
    }
    t
}

fn allocation_table(
    pipeline: &str,
    file: &str,
    channel_ids: &[usize],
    alloc: &Allocation,
) -> CsvTable {
    let mut t = CsvTable::new(pipeline, file, vec![
        "channel",
        "channel_id",
        "rate_index",
        "rate",
    ]);
    for (pos, (idx, rate)) in alloc
        .final_indices
        .iter()
        .zip(&alloc.per_channel_rate)
        .enumerate()
    {
        t.push(vec![
            pos.to_string(),
            channel_ids[pos].to_string(),
            idx.to_string(),
            fmt_real(*rate),
        ]);
    }
    t
}

fn summary_table(pipeline: &str, file: &str, alloc: &Allocation) -> CsvTable {
    let mut t = CsvTable::new(pipeline, file, vec![
        "target",
        "total_rate",
        "steps",
        "feasible",
    ]);
    t.push(vec![
        fmt_real(alloc.target),
        fmt_real(alloc.total_rate),
        alloc.trace.len().to_string(),
        fmt_flag(true),
    ]);
    t
}

fn infeasible_table(pipeline: &str, file: &str, target: f64, max_achievable: f64) -> CsvTable {
    let mut t = CsvTable::new(pipeline, file, vec!["target", "max_achievable"]);
    t.push(vec![fmt_real(target), fmt_real(max_achievable)]);
    t
}

/// Single-ensemble adaption run. Returns the emitted tables and whether the
/// target was feasible.
pub fn run_adapt(resolved: &Resolved) -> Result<(Vec<CsvTable>, bool)> {
    let ids: Vec<usize> = resolved
        .ensemble
        .sub_channels()
        .iter()
        .map(|c| c.index())
        .collect();
    match run_adaption(
        &resolved.ensemble,
        &resolved.ladder,
        &resolved.profiles,
        resolved.target,
    ) {
        Ok(alloc) => Ok((
            vec![
                trace_table("adapt", "adapt_trace.csv", &resolved.ladder, &ids, &alloc),
                allocation_table("adapt", "adapt_allocation.csv", &ids, &alloc),
                summary_table("adapt", "adapt_summary.csv", &alloc),
            ],
            true,
        )),
        Err(Error::InfeasibleTarget {
            target,
            max_achievable,
        }) => Ok((
            vec![infeasible_table(
                "adapt",
                "adapt_infeasible.csv",
                target,
                max_achievable,
            )],
            false,
        )),
        Err(e) => Err(e.into()),
    }
}

/// Per-user adaption runs. Feasibility is the conjunction over users.
pub fn run_multiuser(resolved: &Resolved) -> Result<(Vec<CsvTable>, bool)> {
    let mut tables = Vec::new();
    let mut all_feasible = true;
    let mut summary = CsvTable::new("multiuser", "multiuser_summary.csv", vec![
        "user",
        "m",
        "target",
        "total_rate",
        "steps",
        "feasible",
    ]);
    for (lc, profiles) in &resolved.users {
        let k = lc.user_id();
        let ids: Vec<usize> = lc.sub_channels().iter().map(|c| c.index()).collect();
        match adapt_user(lc, &resolved.ladder, profiles) {
            Ok(alloc) => {
                summary.push(vec![
                    k.to_string(),
                    lc.len().to_string(),
                    fmt_real(lc.target()),
                    fmt_real(alloc.total_rate),
                    alloc.trace.len().to_string(),
                    fmt_flag(true),
                ]);
                tables.push(trace_table(
                    "multiuser",
                    &format!("multiuser_user{k}_trace.csv"),
                    &resolved.ladder,
                    &ids,
                    &alloc,
                ));
                tables.push(allocation_table(
                    "multiuser",
                    &format!("multiuser_user{k}_allocation.csv"),
                    &ids,
                    &alloc,
                ));
            }
            Err(Error::InfeasibleTarget {
                target,
                max_achievable,
            }) => {
                all_feasible = false;
                summary.push(vec![
                    k.to_string(),
                    lc.len().to_string(),
                    fmt_real(target),
                    fmt_real(0.0),
                    "0".into(),
                    fmt_flag(false),
                ]);
                tables.push(infeasible_table(
                    "multiuser",
                    &format!("multiuser_user{k}_infeasible.csv"),
                    target,
                    max_achievable,
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    tables.push(summary);
    Ok((tables, all_feasible))
}

/// The per-user snapshot used by the equalization pipelines: cumulative
/// costs at the configured position, the set minimum and the corrections.
struct UserSnapshot {
    ids: Vec<usize>,
    deltas: Vec<f64>,
    xi: f64,
    corrections: Vec<keyadapt::VarianceCorrection>,
    pre: Vec<keyadapt::BerPoint>,
    post: Vec<keyadapt::BerPoint>,
    increments: Vec<f64>,
}

fn user_snapshot(resolved: &Resolved, user: usize) -> Result<UserSnapshot> {
    let (lc, profiles) = &resolved.users[user];
    let target = resolved.snapshot;
    let ids: Vec<usize> = lc.sub_channels().iter().map(|c| c.index()).collect();
    let pre: Vec<keyadapt::BerPoint> = profiles
        .iter()
        .map(|p| ber_at(p, target))
        .collect::<keyadapt::Result<_>>()?;
    let deltas: Vec<f64> = pre.iter().map(|p| p.delta).collect();
    let xi = xi_user(&deltas)?;
    let mut corrections = variance_correction(&deltas, resolved.modulation_variance)?;
    // The cost chain feeding this snapshot ends one position below the
    // target, so the increment evaluates the ratio function at the target.
    let up_to = target
        .predecessor(resolved.ladder.num_levels())
        .expect("snapshot is at least the minimal curve");
    let mut increments = Vec::with_capacity(profiles.len());
    for (profile, correction) in profiles.iter().zip(&mut corrections) {
        let inc = snr_increment(correction.phi, profile, up_to, xi)?;
        correction.snr_increment = Some(inc);
        increments.push(inc);
    }
    let targets = vec![target; profiles.len()];
    let post = keyadapt::equalized_ber(profiles, &targets, &corrections)?;
    Ok(UserSnapshot {
        ids,
        deltas,
        xi,
        corrections,
        pre,
        post,
        increments,
    })
}

/// Cost distribution and derived SNR over the whole ensemble.
pub fn pipeline_fig2(resolved: &Resolved) -> Result<CsvTable> {
    let mut t = CsvTable::new("fig2", "fig2_delta_distribution.csv", vec![
        "channel",
        "nu_base",
        "delta",
        "snr_db",
    ]);
    for (ch, profile) in resolved
        .ensemble
        .sub_channels()
        .iter()
        .zip(&resolved.profiles)
    {
        let delta = ber_at(profile, resolved.snapshot)?.delta;
        t.push(vec![
            ch.index().to_string(),
            fmt_real(ch.nu()),
            fmt_real(delta),
            fmt_real(snr_db(delta)?),
        ]);
    }
    Ok(t)
}

fn ber_sweep(
    file: &str,
    lo: f64,
    hi: f64,
    points: usize,
    beta: f64,
    ladder: &RateLadder,
) -> Result<CsvTable> {
    let mut t = CsvTable::new("fig3", file, vec![
        "nu",
        "rate_index",
        "numerator",
        "denominator",
        "erfc_arg",
        "ber",
        "clamped",
    ]);
    for k in 0..points {
        let nu = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let profile = NuProfile::exponential(nu, beta, ladder)?;
        for target in &ladder.indices()[1..] {
            let point = ber_at(&profile, *target)?;
            t.push(vec![
                fmt_real(nu),
                target.to_string(),
                fmt_real(point.numerator),
                fmt_real(point.denominator),
                fmt_real(point.erfc_arg),
                fmt_real(point.ber),
                fmt_flag(point.clamped),
            ]);
        }
    }
    Ok(t)
}

/// Error-rate sweeps over the low and mid ratio ranges, one row per ratio
/// and rate curve.
pub fn pipeline_fig3(resolved: &Resolved) -> Result<Vec<CsvTable>> {
    let n = resolved.nu_sweep_points;
    let beta = resolved.sweep_beta;
    Ok(vec![
        ber_sweep("fig3_ber_low.csv", 0.1, 0.3, n, beta, &resolved.ladder)?,
        ber_sweep("fig3_ber_high.csv", 0.3, 0.9, n, beta, &resolved.ladder)?,
    ])
}

/// Error rates with the base ratio scaled through the fixed 5 dB SNR grid.
pub fn pipeline_fig4(resolved: &Resolved) -> Result<CsvTable> {
    let mut t = CsvTable::new("fig4", "fig4_ber_snr_grid.csv", vec![
        "snr_db",
        "nu",
        "rate_index",
        "numerator",
        "denominator",
        "erfc_arg",
        "ber",
        "clamped",
    ]);
    for &snr in &FIG4_SNR_GRID_DB {
        let nu = 10f64.powf(-snr / 10.0);
        let profile = NuProfile::exponential(nu, resolved.sweep_beta, &resolved.ladder)?;
        for target in &resolved.ladder.indices()[1..] {
            let point = ber_at(&profile, *target)?;
            t.push(vec![
                fmt_real(snr),
                fmt_real(nu),
                target.to_string(),
                fmt_real(point.numerator),
                fmt_real(point.denominator),
                fmt_real(point.erfc_arg),
                fmt_real(point.ber),
                fmt_flag(point.clamped),
            ]);
        }
    }
    Ok(t)
}

/// Cost set, set minimum and variance corrections of the first user.
pub fn pipeline_s1(resolved: &Resolved) -> Result<CsvTable> {
    let snap = user_snapshot(resolved, 0)?;
    let mut t = CsvTable::new("s1", "s1_delta_corrections.csv", vec![
        "channel",
        "delta",
        "xi",
        "correction",
    ]);
    for (i, id) in snap.ids.iter().enumerate() {
        t.push(vec![
            id.to_string(),
            fmt_real(snap.deltas[i]),
            fmt_real(snap.xi),
            fmt_real(snap.corrections[i].correction),
        ]);
    }
    Ok(t)
}

/// Input quadratures at the constant and at the corrected modulation
/// variance.
pub fn pipeline_s2(resolved: &Resolved) -> Result<CsvTable> {
    let snap = user_snapshot(resolved, 0)?;
    let mut initial = GaussianStream::with_stream(resolved.seed.derive(TAG_QUAD_INITIAL), 0);
    let mut corrected = GaussianStream::with_stream(resolved.seed.derive(TAG_QUAD_CORRECTED), 0);
    let mut t = CsvTable::new("s2", "s2_quadratures.csv", vec![
        "channel",
        "x_initial",
        "x_corrected",
        "variance_initial",
        "variance_corrected",
    ]);
    for (i, id) in snap.ids.iter().enumerate() {
        let var0 = resolved.modulation_variance;
        let var1 = snap.corrections[i].corrected_variance;
        t.push(vec![
            id.to_string(),
            fmt_real(initial.sample(0.0, var0)?),
            fmt_real(corrected.sample(0.0, var1)?),
            fmt_real(var0),
            fmt_real(var1),
        ]);
    }
    Ok(t)
}

/// SNR differences achieved by the variance correction.
pub fn pipeline_s3(resolved: &Resolved) -> Result<CsvTable> {
    let snap = user_snapshot(resolved, 0)?;
    let mut t = CsvTable::new("s3", "s3_snr_increments.csv", vec![
        "channel",
        "phi",
        "delta_snr_input_db",
        "delta_snr_phi_db",
    ]);
    for (i, id) in snap.ids.iter().enumerate() {
        let ratio = snap.corrections[i].corrected_variance / resolved.modulation_variance;
        t.push(vec![
            id.to_string(),
            fmt_real(snap.corrections[i].phi),
            fmt_real(10.0 * ratio.log10()),
            fmt_real(snap.increments[i]),
        ]);
    }
    Ok(t)
}

/// Error rates before and after equalization.
pub fn pipeline_s4(resolved: &Resolved) -> Result<CsvTable> {
    let snap = user_snapshot(resolved, 0)?;
    let mut t = CsvTable::new("s4", "s4_ber_equalization.csv", vec![
        "channel",
        "numerator_pre",
        "denominator_pre",
        "erfc_arg_pre",
        "ber_pre",
        "clamped_pre",
        "xi",
        "numerator_post",
        "denominator_post",
        "erfc_arg_post",
        "ber_post",
        "clamped_post",
    ]);
    for (i, id) in snap.ids.iter().enumerate() {
        let pre = &snap.pre[i];
        let post = &snap.post[i];
        t.push(vec![
            id.to_string(),
            fmt_real(pre.numerator),
            fmt_real(pre.denominator),
            fmt_real(pre.erfc_arg),
            fmt_real(pre.ber),
            fmt_flag(pre.clamped),
            fmt_real(snap.xi),
            fmt_real(post.numerator),
            fmt_real(post.denominator),
            fmt_real(post.erfc_arg),
            fmt_real(post.ber),
            fmt_flag(post.clamped),
        ]);
    }
    Ok(t)
}

/// Full equalization audit per user: one table each.
pub fn run_equalize(resolved: &Resolved) -> Result<Vec<CsvTable>> {
    let mut tables = Vec::new();
    for user in 0..resolved.users.len() {
        let snap = user_snapshot(resolved, user)?;
        let k = resolved.users[user].0.user_id();
        let mut t = CsvTable::new("equalize", &format!("equalize_user{k}.csv"), vec![
            "channel",
            "delta",
            "xi",
            "correction",
            "corrected_variance",
            "phi",
            "snr_increment_db",
            "numerator_pre",
            "denominator_pre",
            "erfc_arg_pre",
            "ber_pre",
            "clamped_pre",
            "numerator_post",
            "denominator_post",
            "erfc_arg_post",
            "ber_post",
            "clamped_post",
        ]);
        for (i, id) in snap.ids.iter().enumerate() {
            let c = &snap.corrections[i];
            let pre = &snap.pre[i];
            let post = &snap.post[i];
            t.push(vec![
                id.to_string(),
                fmt_real(snap.deltas[i]),
                fmt_real(snap.xi),
                fmt_real(c.correction),
                fmt_real(c.corrected_variance),
                fmt_real(c.phi),
                fmt_real(snap.increments[i]),
                fmt_real(pre.numerator),
                fmt_real(pre.denominator),
                fmt_real(pre.erfc_arg),
                fmt_real(pre.ber),
                fmt_flag(pre.clamped),
                fmt_real(post.numerator),
                fmt_real(post.denominator),
                fmt_real(post.erfc_arg),
                fmt_real(post.ber),
                fmt_flag(post.clamped),
            ]);
        }
        tables.push(t);
    }
    Ok(tables)
}

/// Empirical-vs-analytic error rate table. The second value is `true` when
/// every grid point lies within three standard errors.
pub fn run_montecarlo(resolved: &Resolved) -> Result<(CsvTable, bool)> {
    if resolved.montecarlo.trials < 10_000 {
        bail!(
            "Monte Carlo cross-check needs at least 10000 trials, got {}",
            resolved.montecarlo.trials
        );
    }
    let trials = resolved.montecarlo.trials;
    let mut t = CsvTable::new("montecarlo", "montecarlo_crosscheck.csv", vec![
        "snr_db",
        "trials",
        "analytic_ber",
        "empirical_ber",
        "stderr",
        "pass",
    ]);
    let mut all_pass = true;
    for (i, &snr) in resolved.montecarlo.snr_grid_db.iter().enumerate() {
        let snr_linear = 10f64.powf(snr / 10.0);
        let analytic = 0.5 * erfc(snr_linear.sqrt())?;
        let seed = resolved.seed.derive(TAG_MONTECARLO).derive(i as u64);
        let empirical = monte_carlo_ber(snr, trials, seed)?;
        let stderr = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        let pass = (empirical - analytic).abs() <= 3.0 * stderr;
        all_pass &= pass;
        t.push(vec![
            fmt_real(snr),
            trials.to_string(),
            fmt_real(analytic),
            fmt_real(empirical),
            fmt_real(stderr),
            fmt_flag(pass),
        ]);
    }
    Ok((t, all_pass))
}

/// All figure tables, or one named pipeline.
pub fn run_figures(resolved: &Resolved, pipeline: Option<&str>) -> Result<Vec<CsvTable>> {
    let mut tables = Vec::new();
    let want = |name: &str| pipeline.is_none() || pipeline == Some(name);
    if want("fig2") {
        tables.push(pipeline_fig2(resolved)?);
    }
    if want("fig3") {
        tables.extend(pipeline_fig3(resolved)?);
    }
    if want("fig4") {
        tables.push(pipeline_fig4(resolved)?);
    }
    if want("s1") {
        tables.push(pipeline_s1(resolved)?);
    }
    if want("s2") {
        tables.push(pipeline_s2(resolved)?);
    }
    if want("s3") {
        tables.push(pipeline_s3(resolved)?);
    }
    if want("s4") {
        tables.push(pipeline_s4(resolved)?);
    }
    if tables.is_empty() {
        bail!(
            "unknown pipeline {:?}; expected one of fig2, fig3, fig4, s1, s2, s3, s4",
            pipeline.unwrap_or("")
        );
    }
    Ok(tables)
}

/// Everything a full experiment emits, with the feasibility and cross-check
/// outcomes needed for the exit code.
pub struct ExperimentOutput {
    pub tables: Vec<CsvTable>,
    pub feasible: bool,
    pub crosscheck_pass: bool,
}

/// Runs every pipeline enabled by the configuration.
pub fn run_experiment(resolved: &Resolved) -> Result<ExperimentOutput> {
    let mut tables = Vec::new();
    let (adapt_tables, feasible_single) = run_adapt(resolved)?;
    tables.extend(adapt_tables);
    let (user_tables, feasible_users) = run_multiuser(resolved)?;
    tables.extend(user_tables);
    tables.extend(run_equalize(resolved)?);
    let (mc, crosscheck_pass) = run_montecarlo(resolved)?;
    tables.push(mc);
    tables.extend(run_figures(resolved, None)?);
    Ok(ExperimentOutput {
        tables,
        feasible: feasible_single && feasible_users,
        crosscheck_pass,
    })
}
