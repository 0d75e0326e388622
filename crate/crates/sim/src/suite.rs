use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use sapsr_ppto::PptoDiagnostics;
use statrs::statistics::Statistics;

use crate::config::{PolicyKind, SimConfig};
use crate::error::SimError;
use crate::harness::{run_simulation, DayMetrics};
use crate::output::{save_metrics, save_ppto_log};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Uncontrolled,
    PolicyComparison,
    RhoSweep,
}

impl SuiteName {
    pub const ALL: [SuiteName; 3] = [
        SuiteName::Uncontrolled,
        SuiteName::PolicyComparison,
        SuiteName::RhoSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Uncontrolled => "uncontrolled",
            SuiteName::PolicyComparison => "policy-comparison",
            SuiteName::RhoSweep => "rho-sweep",
        }
    }

    /// Labelled configurations run on every seed.
    pub fn variants(self, base: &SimConfig) -> Vec<(String, SimConfig)> {
        match self {
            SuiteName::Uncontrolled => vec![(
                "none".into(),
                SimConfig {
                    policy: PolicyKind::None,
                    tests_per_day: 0,
                    ..base.clone()
                },
            )],
            SuiteName::PolicyComparison => [PolicyKind::Ts, PolicyKind::Tsdc, PolicyKind::Ppto]
                .into_iter()
                .map(|policy| {
                    (
                        policy.name().to_string(),
                        SimConfig {
                            policy,
                            ..base.clone()
                        },
                    )
                })
                .collect(),
            SuiteName::RhoSweep => [1.0, 0.75, 0.5]
                .into_iter()
                .map(|rho| {
                    (
                        format!("ppto_rho{:03}", (rho * 100.0f64).round() as u32),
                        SimConfig {
                            policy: PolicyKind::Ppto,
                            rho,
                            ..base.clone()
                        },
                    )
                })
                .collect(),
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub label: String,
    pub config: SimConfig,
    pub metrics: Vec<DayMetrics>,
    pub ppto_log: Vec<PptoDiagnostics>,
    /// Whether the ledger balanced after every day.
    pub conserved: bool,
}

impl RunRecord {
    pub fn cum_infections(&self) -> usize {
        self.metrics.last().map_or(0, |m| m.cum_infections)
    }

    pub fn file_stem(&self) -> String {
        format!("{}_seed{:04}", self.label, self.config.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub runs: usize,
    pub cum_infections_mean: f64,
    pub cum_infections_std: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: SuiteName,
    /// Grouped by variant, seeds ascending within each.
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SuiteReport {
    pub fn runs_for<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.label == label)
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("label,runs,cum_infections_mean,cum_infections_std\n");
        for row in &self.summary {
            s.push_str(&format!(
                "{},{},{:.3},{:.3}\n",
                row.label, row.runs, row.cum_infections_mean, row.cum_infections_std
            ));
        }
        s
    }
}

/// Runs every variant of `suite` on seeds `base.seed .. base.seed + seeds`,
/// in parallel, and writes per-run files plus `summary.csv` under `out`
/// when given.
pub fn run_suite(
    suite: SuiteName,
    base: &SimConfig,
    seeds: u32,
    out: Option<&Path>,
) -> Result<SuiteReport, SimError> {
    if seeds == 0 {
        return Err(SimError::Config("a suite needs at least one seed".into()));
    }
    let variants = suite.variants(base);
    let jobs: Vec<(String, SimConfig)> = variants
        .iter()
        .flat_map(|(label, cfg)| {
            (0..seeds as u64).map(move |i| {
                (
                    label.clone(),
                    SimConfig {
                        seed: base.seed + i,
                        ..cfg.clone()
                    },
                )
            })
        })
        .collect();

    let runs: Vec<RunRecord> = jobs
        .into_par_iter()
        .map(|(label, config)| {
            let outcome = run_simulation(config.clone())?;
            let n = config.population;
            let conserved = outcome.metrics.iter().all(|m| m.population() == n)
                && outcome.metrics.windows(2).all(|w| w[0].r <= w[1].r)
                && outcome.ledger.check_conservation();
            Ok(RunRecord {
                label,
                config,
                metrics: outcome.metrics,
                ppto_log: outcome.ppto_log,
                conserved,
            })
        })
        .collect::<Result<_, SimError>>()?;

    let summary = variants
        .iter()
        .map(|(label, _)| {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| &r.label == label)
                .map(|r| r.cum_infections() as f64)
                .collect();
            let std = if values.len() > 1 {
                (&values).std_dev()
            } else {
                0.0
            };
            SummaryRow {
                label: label.clone(),
                runs: values.len(),
                cum_infections_mean: (&values).mean(),
                cum_infections_std: std,
            }
        })
        .collect();

    let report = SuiteReport {
        suite,
        runs,
        summary,
    };
    if let Some(dir) = out {
        write_report(&report, dir)?;
    }
    Ok(report)
}

fn write_report(report: &SuiteReport, dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    for run in &report.runs {
        let stem = run.file_stem();
        save_metrics(&dir.join(format!("{stem}.csv")), &run.metrics)?;
        if !run.ppto_log.is_empty() {
            save_ppto_log(&dir.join(format!("{stem}.log")), &run.ppto_log)?;
        }
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, report.summary_csv()).map_err(|e| SimError::io(&path, e))
}
