use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use xchannel::csit::Fraction;
use xchannel::metrics::{self, baseline_mix, dof_account_with, power_grid, rate_sweep, DofAccount, MetricsError};
use xchannel::pattern_lab::{classify, enumerate_candidates, Verdict};
use xchannel::pipeline::run_trial;
use xchannel::scheme::{classify_case, SchemeError, TABLE_1};
use xchannel::{AuditSummary, CsitPattern, LambdaDistribution, Rx};

use crate::format::{fmt_num, fmt_opt};
use crate::{CliError, ExperimentConfig, Format};

/// Accepted range for the fitted rate slope.
pub const SLOPE_RANGE: (f64, f64) = (1.20, 1.30);

fn receiver_string(p: &CsitPattern, rx: Rx) -> String {
    p.receiver(rx).iter().map(|s| s.letter()).collect()
}

fn write_csv(sink: &mut dyn Write, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(sink: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *sink, value)?;
    writeln!(sink)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub pattern: String,
    pub receiver1: String,
    pub receiver2: String,
    pub verdict: String,
    pub case: Option<u8>,
    pub mirrored: Option<bool>,
    pub failed_condition: Option<u8>,
    pub reason: Option<String>,
    pub lambda_p: String,
    pub lambda_d: String,
    pub lambda_n: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub command: String,
    pub candidates: Vec<Table1Row>,
    pub synergistic: usize,
    pub matches_table: bool,
}

pub fn cmd_table1(config: &ExperimentConfig, sink: &mut dyn Write, report: &mut dyn Write) -> Result<bool, CliError> {
    let rows: Vec<Table1Row> = enumerate_candidates()
        .iter()
        .map(|p| {
            let c = classify(p);
            let lambda = p.lambda();
            let (verdict, case, mirrored, reason) = match &c.verdict {
                Verdict::Synergistic(s) => ("synergistic", Some(s.kind.number()), Some(s.mirrored), None),
                Verdict::Dissociative(r) => ("dissociative", None, None, Some(r.to_string())),
            };
            Table1Row {
                pattern: p.to_string(),
                receiver1: receiver_string(p, Rx::R1),
                receiver2: receiver_string(p, Rx::R2),
                verdict: verdict.into(),
                case,
                mirrored,
                failed_condition: c.failed_condition(),
                reason,
                lambda_p: lambda.perfect().to_string(),
                lambda_d: lambda.delayed().to_string(),
                lambda_n: lambda.absent().to_string(),
            }
        })
        .collect();

    let derived: BTreeSet<(String, u8)> = rows
        .iter()
        .filter_map(|r| r.case.map(|c| (r.pattern.clone(), c)))
        .collect();
    let reference: BTreeSet<(String, u8)> = TABLE_1.iter().map(|(p, k)| (p.to_string(), k.number())).collect();
    let matches_table = rows.len() == 18 && derived == reference;

    match config.format {
        Format::Csv => write_csv(
            sink,
            &[
                "pattern",
                "receiver1",
                "receiver2",
                "verdict",
                "case",
                "mirrored",
                "failed_condition",
                "reason",
                "lambda_p",
                "lambda_d",
                "lambda_n",
            ],
            rows.iter().map(|r| {
                vec![
                    r.pattern.clone(),
                    r.receiver1.clone(),
                    r.receiver2.clone(),
                    r.verdict.clone(),
                    r.case.map(|c| c.to_string()).unwrap_or_default(),
                    r.mirrored.map(|m| m.to_string()).unwrap_or_default(),
                    r.failed_condition.map(|c| c.to_string()).unwrap_or_default(),
                    r.reason.clone().unwrap_or_default(),
                    r.lambda_p.clone(),
                    r.lambda_d.clone(),
                    r.lambda_n.clone(),
                ]
            }),
        )?,
        Format::Json => write_json(
            sink,
            &Table1Report {
                command: "table1".into(),
                synergistic: derived.len(),
                candidates: rows.clone(),
                matches_table,
            },
        )?,
    }

    writeln!(report, "candidates {}", rows.len())?;
    writeln!(report, "synergistic {}", derived.len())?;
    writeln!(report, "dissociative {}", rows.len() - derived.len())?;
    writeln!(
        report,
        "matches reference table: {}",
        if matches_table { "yes" } else { "no" }
    )?;
    Ok(matches_table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub trial: u64,
    pub decoded: bool,
    pub residual_u: Option<f64>,
    pub residual_v: Option<f64>,
    pub condition_u: Option<f64>,
    pub condition_v: Option<f64>,
    pub error_u: Option<f64>,
    pub error_v: Option<f64>,
    pub leakage: f64,
    pub reads: usize,
    pub forbidden: usize,
    pub resamples: u32,
    pub symbols_delivered: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub command: String,
    pub pattern: String,
    pub case: u8,
    pub mirrored: bool,
    pub seed: u64,
    pub trials: u64,
    pub noise_power: f64,
    pub success_rate: f64,
    pub dof: String,
    pub symbols_delivered: u32,
    pub slots_used: u32,
    pub reads: usize,
    pub forbidden: usize,
    pub max_leakage: f64,
    pub passed: bool,
    pub rows: Vec<SimulateRow>,
}

pub fn cmd_simulate(config: &ExperimentConfig, sink: &mut dyn Write, report: &mut dyn Write) -> Result<bool, CliError> {
    let pattern = config.pattern();
    let tol = config.tolerances;
    let case = match classify_case(pattern) {
        Ok(c) => c,
        Err(e) => {
            let why = match classify(pattern).verdict {
                Verdict::Dissociative(r) => match r.condition() {
                    Some(c) => format!("fails condition {c} ({r})"),
                    None => r.to_string(),
                },
                Verdict::Synergistic(_) => "no matching scheme".into(),
            };
            return Err(if config.allow_dissociative {
                CliError::Check(format!("{e}: {why}"))
            } else {
                CliError::Usage(format!(
                    "{e}: {why}; pass --allow-dissociative to report it as a failed check"
                ))
            });
        }
    };

    let rows: Vec<SimulateRow> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let out = run_trial(pattern, &case, config.seed, t, config.noise_power, &tol)?;
            let errors = out.estimate_errors();
            let report = out.decode.as_ref().ok();
            let delivered = report.map_or(0, |r| dof_account_with(r, pattern, tol.decode).symbols_delivered);
            Ok(SimulateRow {
                trial: t,
                decoded: out.success(&tol),
                residual_u: report.map(|r| r.residual_u),
                residual_v: report.map(|r| r.residual_v),
                condition_u: report.map(|r| r.condition_u),
                condition_v: report.map(|r| r.condition_v),
                error_u: errors.map(|e| e.0),
                error_v: errors.map(|e| e.1),
                leakage: out.leakage(),
                reads: out.audit.reads,
                forbidden: out.audit.forbidden,
                resamples: out.realization.resamples,
                symbols_delivered: delivered,
            })
        })
        .collect::<Result<_, SchemeError>>()
        .map_err(|e| CliError::Check(e.to_string()))?;

    let successes = rows.iter().filter(|r| r.decoded).count();
    let success_rate = successes as f64 / rows.len() as f64;
    let accounts: Vec<DofAccount> = rows
        .iter()
        .map(|r| DofAccount::new(r.symbols_delivered, pattern.len() as u32))
        .collect();
    let total = DofAccount::total(&accounts).expect("at least one trial");
    let audit = rows.iter().fold(AuditSummary::default(), |a, r| {
        a.merge(AuditSummary {
            reads: r.reads,
            forbidden: r.forbidden,
        })
    });
    let max_leakage = rows.iter().map(|r| r.leakage).fold(0.0, f64::max);
    let exact = config.noise_power > 0.0
        || rows
            .iter()
            .all(|r| r.error_u.is_some_and(|e| e < tol.decode) && r.error_v.is_some_and(|e| e < tol.decode));
    let passed = successes == rows.len() && audit.clean() && max_leakage < tol.cancellation && exact;

    match config.format {
        Format::Csv => write_csv(
            sink,
            &[
                "trial",
                "decoded",
                "residual_u",
                "residual_v",
                "condition_u",
                "condition_v",
                "error_u",
                "error_v",
                "leakage",
                "reads",
                "forbidden",
                "resamples",
                "symbols_delivered",
            ],
            rows.iter().map(|r| {
                vec![
                    r.trial.to_string(),
                    r.decoded.to_string(),
                    fmt_opt(r.residual_u),
                    fmt_opt(r.residual_v),
                    fmt_opt(r.condition_u),
                    fmt_opt(r.condition_v),
                    fmt_opt(r.error_u),
                    fmt_opt(r.error_v),
                    fmt_num(r.leakage),
                    r.reads.to_string(),
                    r.forbidden.to_string(),
                    r.resamples.to_string(),
                    r.symbols_delivered.to_string(),
                ]
            }),
        )?,
        Format::Json => write_json(
            sink,
            &SimulateReport {
                command: "simulate".into(),
                pattern: pattern.to_string(),
                case: case.kind.number(),
                mirrored: case.mirrored,
                seed: config.seed,
                trials: config.trials,
                noise_power: config.noise_power,
                success_rate,
                dof: total.dof.to_string(),
                symbols_delivered: total.symbols_delivered,
                slots_used: total.slots_used,
                reads: audit.reads,
                forbidden: audit.forbidden,
                max_leakage,
                passed,
                rows: rows.clone(),
            },
        )?,
    }

    writeln!(report, "pattern {pattern} {case}")?;
    writeln!(report, "trials {} success rate {}", rows.len(), fmt_num(success_rate))?;
    writeln!(
        report,
        "dof {} ({} symbols in {} slots)",
        total.dof, total.symbols_delivered, total.slots_used
    )?;
    writeln!(
        report,
        "causality audit: {} reads, {} forbidden",
        audit.reads, audit.forbidden
    )?;
    writeln!(report, "max leakage {}", fmt_num(max_leakage))?;
    writeln!(report, "status {}", if passed { "pass" } else { "fail" })?;
    Ok(passed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub power_exp: f64,
    pub power: f64,
    pub mean_rate: f64,
    pub std_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweepReport {
    pub command: String,
    pub pattern: String,
    pub seed: u64,
    pub trials: u64,
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub top_half_slope: f64,
    pub scheme_dof: String,
    pub baseline: String,
    pub resamples: u64,
    pub passed: bool,
}

pub fn cmd_rate_sweep(
    config: &ExperimentConfig,
    sink: &mut dyn Write,
    report: &mut dyn Write,
) -> Result<bool, CliError> {
    let pattern = config.pattern();
    let powers = power_grid(config.power_min_exp, config.power_max_exp, config.power_points);
    let sweep = rate_sweep(pattern, &powers, config.trials, config.seed).map_err(|e| match e {
        MetricsError::Scheme(s) => CliError::Usage(s.to_string()),
        other => CliError::Usage(other.to_string()),
    })?;
    let baseline: Fraction = baseline_mix(&LambdaDistribution::synergy_target());
    let passed = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&sweep.slope);
    let points: Vec<RatePoint> = sweep
        .log2_powers()
        .iter()
        .zip(&sweep.powers)
        .zip(sweep.mean_rate.iter().zip(&sweep.std_rate))
        .map(|((&e, &p), (&m, &s))| RatePoint {
            power_exp: e,
            power: p,
            mean_rate: m,
            std_rate: s,
        })
        .collect();
    let top = sweep.top_half_slope();

    match config.format {
        Format::Csv => write_csv(
            sink,
            &["power_exp", "power", "mean_rate", "std_rate"],
            points.iter().map(|p| {
                vec![
                    fmt_num(p.power_exp),
                    fmt_num(p.power),
                    fmt_num(p.mean_rate),
                    fmt_num(p.std_rate),
                ]
            }),
        )?,
        Format::Json => write_json(
            sink,
            &RateSweepReport {
                command: "rate-sweep".into(),
                pattern: pattern.to_string(),
                seed: config.seed,
                trials: config.trials,
                points: points.clone(),
                slope: sweep.slope,
                top_half_slope: top,
                scheme_dof: metrics::SCHEME_DOF.to_string(),
                baseline: baseline.to_string(),
                resamples: sweep.resamples,
                passed,
            },
        )?,
    }

    writeln!(report, "pattern {pattern} trials {}", sweep.trials)?;
    writeln!(report, "slope {} (top half {})", fmt_num(sweep.slope), fmt_num(top))?;
    writeln!(
        report,
        "scheme {} baseline {baseline} ({})",
        metrics::SCHEME_DOF,
        if baseline < metrics::SCHEME_DOF {
            "below scheme"
        } else {
            "not below scheme"
        }
    )?;
    writeln!(
        report,
        "status {} (slope range {}..{})",
        if passed { "pass" } else { "fail" },
        SLOPE_RANGE.0,
        SLOPE_RANGE.1
    )?;
    Ok(passed)
}
