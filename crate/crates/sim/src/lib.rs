//! Day-by-day driver for the SAPSR epidemic with swab-test policies.
//!
//! Each day: sample contacts among free agents, log them on the phones that
//! were recording, run the contagion, let the policy pick up to `K` agents
//! for testing, then isolate positives and everyone symptomatic.

pub mod config;
pub mod error;
pub mod harness;
pub mod output;
pub mod policy;
pub mod streams;
pub mod suite;

pub use config::{PolicyKind, PrevalenceSource, SimConfig};
pub use error::SimError;
pub use harness::{run_simulation, DayMetrics, SimOutcome, Simulation};
pub use output::{load_metrics, metrics_csv, save_metrics, save_ppto_log, CSV_HEADER};
pub use policy::{policy_ts, policy_tsdc, run_test, PolicyDecision, SwabTest, TestResult};
pub use suite::{run_suite, RunRecord, SuiteName, SuiteReport, SummaryRow};
