//! Subcommand implementations. Each resolves its parameter block, runs the
//! corresponding library routine and emits CSV/JSON under the output
//! directory.

use std::path::Path;
use std::process::ExitCode;

use sinai_core::env::potential;
use sinai_core::experiments::{self, verify, PersistenceCampaign, SamplingMode};
use sinai_core::extrema::{decompose, sweep_sign_changes};
use sinai_core::plpath::{interpolate_potential, sample_two_sided_bm, PiecewiseLinearPath};
use sinai_core::seeds::{child_seed, tags};
use sinai_core::walk;

use crate::config::{
    grid_or_default, DistributionConfig, ExtremaBlock, FileConfig, LocalizationBlock, ModeConfig,
    PathSource, PersistenceBlock, RateFunctionBlock, SignChangesBlock, SignChangesMode,
    SimulateBlock, VerifyBlock,
};
use crate::output::{opt_cell, write_csv, write_json, Meta};
use crate::CliError;

const CAMPAIGN_HEADER: &str =
    "experiment,parameter,n_or_x_or_t,estimate,ci_low,ci_high,n_trials,seed";

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn build_path(
    source: PathSource,
    half_width: u32,
    config: &FileConfig,
    dist: &DistributionConfig,
    seed: u64,
) -> Result<PiecewiseLinearPath, CliError> {
    match source {
        PathSource::Bm => {
            let grid = grid_or_default(&config.grid);
            grid.validate().map_err(validation)?;
            sample_two_sided_bm(&grid, child_seed(seed, tags::BM_SAMPLE, 0)).map_err(runtime)
        }
        PathSource::Potential => {
            let env = dist
                .build()?
                .sample_environment(half_width, child_seed(seed, tags::ENV, 0))
                .map_err(validation)?;
            Ok(interpolate_potential(&potential(&env)))
        }
    }
}

pub fn simulate(
    config: &FileConfig,
    block: SimulateBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let dist = config.distribution.clone().unwrap_or_default().build()?;
    let meta = Meta::new("simulate", seed, &block)?;
    let env = dist
        .sample_environment(block.half_width, child_seed(seed, tags::ENV, 0))
        .map_err(validation)?;
    let walk_seed = child_seed(seed, tags::WALK, 0);
    let record = match &block.functional {
        Some(f) => {
            f.validate().map_err(validation)?;
            walk::simulate_with_functional(&env, block.n_steps, f, block.threshold, walk_seed)
                .map_err(runtime)?
        }
        None => walk::simulate_with_targets(&env, block.n_steps, &block.targets, walk_seed)
            .map_err(runtime)?,
    };
    write_json(out, "walk.json", &meta, &record)?;
    if block.emit_env {
        write_json(out, "environment.json", &meta, &env)?;
    }
    if block.stream {
        let positions = walk::walk_positions(&env, block.n_steps, walk_seed).map_err(runtime)?;
        let functional = block
            .functional
            .clone()
            .unwrap_or(walk::FunctionalSpec::Sign);
        let sums = walk::additive_functional_path(&positions, &functional).map_err(runtime)?;
        write_csv(
            out,
            "walk_stream.csv",
            &meta,
            "n,position,running_sum",
            positions
                .iter()
                .zip(&sums)
                .enumerate()
                .map(|(n, (p, s))| format!("{n},{p},{s}")),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify_formulas(
    _config: &FileConfig,
    block: VerifyBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    if block.n_cases < 1 || block.trials_per_case < 100 {
        return Err(CliError::Validation(
            "verify needs n_cases >= 1 and trials_per_case >= 100".into(),
        ));
    }
    let meta = Meta::new("verify-formulas", seed, &block)?;
    let reports = vec![
        verify::verify_exit_probabilities(
            block.n_cases,
            block.trials_per_case,
            child_seed(seed, tags::CASE, 1),
        ),
        verify::verify_expected_local_times(
            block.n_cases,
            block.trials_per_case,
            child_seed(seed, tags::CASE, 2),
        ),
        verify::verify_geometric_law(
            block.n_cases.div_ceil(2),
            2 * block.trials_per_case,
            child_seed(seed, tags::CASE, 3),
        ),
        verify::verify_exit_time_bounds(
            block.n_cases,
            block.trials_per_case.div_ceil(2),
            child_seed(seed, tags::CASE, 4),
        ),
    ];
    let mut rows = Vec::new();
    let mut failures = 0usize;
    let mut summary = Vec::new();
    for report in &reports {
        for r in &report.rows {
            if !r.pass {
                failures += 1;
            }
            rows.push(format!(
                "{},{},{},{},{}",
                r.case_id, r.closed_form, r.mc_estimate, r.se, r.pass
            ));
        }
        summary.push(serde_json::json!({
            "suite": report.name,
            "pass": report.n_pass(),
            "total": report.rows.len(),
        }));
        println!(
            "verify {}: {}/{} within tolerance",
            report.name,
            report.n_pass(),
            report.rows.len()
        );
    }
    write_csv(
        out,
        "verify.csv",
        &meta,
        "case,closed_form,mc_estimate,se,pass",
        rows.into_iter(),
    )?;
    write_json(out, "verify_summary.json", &meta, &summary)?;
    if failures > 0 {
        eprintln!("verify-formulas: {failures} case(s) outside tolerance");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn extrema(
    config: &FileConfig,
    block: ExtremaBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let dist = config.distribution.clone().unwrap_or_default();
    let meta = Meta::new("extrema", seed, &block)?;
    let path = build_path(block.source, block.half_width, config, &dist, seed)?;
    let dec = decompose(&path, block.scale).map_err(validation)?;
    write_csv(
        out,
        "extrema.csv",
        &meta,
        "k,location,value,kind,certified",
        dec.points.iter().enumerate().map(|(i, p)| {
            let k = dec.relative_index(i).unwrap_or(i as i64);
            format!("{k},{},{},{},{}", p.location, p.value, p.kind, p.certified)
        }),
    )?;
    write_json(
        out,
        "extrema_summary.json",
        &meta,
        &serde_json::json!({
            "scale": dec.scale,
            "n_points": dec.points.len(),
            "n_certified": dec.certified().count(),
            "tie_detected": dec.tie_detected,
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn sign_changes(
    config: &FileConfig,
    block: SignChangesBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let meta = Meta::new("sign-changes", seed, &block)?;
    match block.mode {
        SignChangesMode::Record => {
            let dist = config.distribution.clone().unwrap_or_default();
            let path = build_path(block.source, block.half_width, config, &dist, seed)?;
            let rec =
                sweep_sign_changes(&path, block.c, block.x_max, block.a).map_err(validation)?;
            write_csv(
                out,
                "sign_changes.csv",
                &meta,
                "x_k,b_before,b_after,e_minus,e_plus,strong",
                rec.changes.iter().map(|c| {
                    format!(
                        "{},{},{},{},{},{}",
                        c.scale, c.b_before, c.b_after, c.e_minus, c.e_plus, c.strong
                    )
                }),
            )?;
            write_json(
                out,
                "sign_changes_summary.json",
                &meta,
                &serde_json::json!({
                    "n_changes": rec.changes.len(),
                    "certified_up_to": rec.certified_up_to,
                    "complete": rec.complete,
                    "tie_detected": rec.tie_detected,
                }),
            )?;
        }
        SignChangesMode::Rate => {
            let grid = grid_or_default(&config.grid);
            let rows = experiments::sign_change_rate_check(
                &grid,
                &block.t_values,
                block.n_samples,
                child_seed(seed, tags::BM_SAMPLE, 1),
            )
            .map_err(validation)?;
            write_csv(
                out,
                "sign_change_rate.csv",
                &meta,
                CAMPAIGN_HEADER,
                rows.iter().map(|r| {
                    format!(
                        "sign_change_rate,count_per_t,{},{},{},{},{},{seed}",
                        r.t, r.mean_rate, r.ci_low, r.ci_high, r.n_effective
                    )
                }),
            )?;
            write_json(
                out,
                "sign_change_rate_summary.json",
                &meta,
                &serde_json::json!({
                    "rows": rows,
                    "rate_target": experiments::rate_function_zero(),
                }),
            )?;
        }
        SignChangesMode::Constant => {
            let grid = grid_or_default(&config.grid);
            let rows = experiments::sign_persistence_constant(
                &grid,
                &block.x_values,
                block.n_samples,
                child_seed(seed, tags::BM_SAMPLE, 2),
            )
            .map_err(validation)?;
            write_csv(
                out,
                "sign_persistence.csv",
                &meta,
                CAMPAIGN_HEADER,
                rows.iter().map(|r| {
                    format!(
                        "sign_persistence,q_hat,{},{},{},{},{},{seed}",
                        r.x, r.q_hat.point, r.q_hat.ci_low, r.q_hat.ci_high, r.q_hat.n_trials
                    )
                }),
            )?;
            write_json(
                out,
                "sign_persistence_summary.json",
                &meta,
                &serde_json::json!({
                    "rows": rows,
                    "limit_constant": experiments::sign_persistence_limit(),
                }),
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn persistence(
    config: &FileConfig,
    block: PersistenceBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let dist = config.distribution.clone().unwrap_or_default().build()?;
    let meta = Meta::new("persistence", seed, &block)?;
    let campaign = PersistenceCampaign {
        distribution: dist,
        horizons: block.horizons.clone(),
        functional: block.functional.clone(),
        threshold: block.threshold,
        n_envs: block.n_envs,
        walks_per_env: block.walks_per_env,
        master_seed: seed,
        mode: match block.mode {
            ModeConfig::Shared => SamplingMode::Shared,
            ModeConfig::Independent => SamplingMode::Independent,
        },
    };
    campaign.validate().map_err(validation)?;
    let result = experiments::run_persistence(&campaign).map_err(runtime)?;
    let functional_name = match &block.functional {
        walk::FunctionalSpec::Sign => "sign".to_string(),
        walk::FunctionalSpec::SignedPower { alpha } => format!("signed_power_{alpha}"),
        walk::FunctionalSpec::SignedPowerLog { alpha } => format!("signed_power_log_{alpha}"),
        walk::FunctionalSpec::CustomTable { .. } => "custom_table".to_string(),
    };
    write_csv(
        out,
        "persistence.csv",
        &meta,
        CAMPAIGN_HEADER,
        result.per_horizon.iter().map(|h| {
            format!(
                "persistence,{functional_name},{},{},{},{},{},{seed}",
                h.horizon,
                h.estimate.point,
                h.estimate.ci_low,
                h.estimate.ci_high,
                h.estimate.n_trials
            )
        }),
    )?;
    let fit = experiments::fit_exponent(&result.per_horizon).ok();
    write_json(
        out,
        "persistence_summary.json",
        &meta,
        &serde_json::json!({
            "per_horizon": result.per_horizon,
            "fit": fit,
            "asymptotic_exponent": -experiments::persistence_exponent(),
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn rate_function(
    _config: &FileConfig,
    block: RateFunctionBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    if !(block.x_max > 0.0) || block.steps < 2 {
        return Err(CliError::Validation(
            "rate-function needs x_max > 0 and steps >= 2".into(),
        ));
    }
    let meta = Meta::new("rate-function", seed, &block)?;
    let rows = (0..=block.steps).map(|k| {
        let x = block.x_max * k as f64 / block.steps as f64;
        let i = experiments::rate_function(x).expect("nonnegative grid");
        format!("{x},{i}")
    });
    write_csv(out, "rate_function.csv", &meta, "x,rate", rows)?;
    write_json(
        out,
        "rate_function_summary.json",
        &meta,
        &serde_json::json!({
            "rate_at_zero": experiments::rate_function(0.0).expect("zero is admissible"),
            "zero_of_rate": experiments::rate_function_zero(),
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn localization(
    config: &FileConfig,
    block: LocalizationBlock,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let dist = config.distribution.clone().unwrap_or_default().build()?;
    let meta = Meta::new("localization", seed, &block)?;
    let report =
        experiments::localization_diagnostic(&dist, block.n_steps, block.n_trials, seed)
            .map_err(validation)?;
    write_csv(
        out,
        "localization.csv",
        &meta,
        "trial,final_position,bottom,scaled_deviation,scaled_position",
        report.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.trial,
                r.final_position,
                opt_cell(r.bottom),
                opt_cell(r.scaled_deviation),
                r.scaled_position
            )
        }),
    )?;
    write_json(
        out,
        "localization_summary.json",
        &meta,
        &serde_json::json!({
            "n_steps": report.n_steps,
            "n_trials": report.rows.len(),
            "n_censored": report.n_censored,
            "median_abs_scaled_position": report.median_abs_scaled_position,
            "median_abs_scaled_deviation": report.median_abs_scaled_deviation,
        }),
    )?;
    println!(
        "localization: median |sigma^2 S_N / log^2 N| = {:.4}, median |(S_N - b)/log^2 N| = {:.4} ({} censored)",
        report.median_abs_scaled_position, report.median_abs_scaled_deviation, report.n_censored
    );
    Ok(ExitCode::SUCCESS)
}
