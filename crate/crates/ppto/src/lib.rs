//! Privacy-preserving test optimisation.
//!
//! Every day the health authority seeds `N` Monte-Carlo iterations from the
//! devices of recently positive individuals. Each iteration is a request
//! addressed to a contact token; the device owning it raises the flag of
//! the iteration, bumps its score, and forwards the trajectory backward in
//! time (to whoever most plausibly infected it) and forward in time (to
//! whoever it may have infected). Once the bus is quiet the devices report
//! `(pseudonym, score)` pairs and the highest scores are offered tests.
//!
//! The engine only ever sees device logs, tokens and aggregate prevalence.

mod bus;
mod engine;
mod error;
mod gamma;
mod kernel;
mod select;

pub use bus::{MessageBus, TrajectoryRequest};
pub use engine::{
    run_daily_ppto, DailyOutcome, Delivery, IterationStats, PptoConfig, PptoDiagnostics,
    TrajectorySimulator,
};
pub use error::PptoError;
pub use gamma::{gamma_weights, sample_weighted, GammaOrdering};
pub use kernel::{PrevalenceEstimate, TransmissionModel};
pub use select::{rank_scores, select_top_k, InfectionScore, Selection};
