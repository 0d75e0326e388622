//! SAPSR epidemic model.
//!
//! Individuals move through five classes: Susceptible, Asymptomatic,
//! Presymptomatic, sYmptomatic and Recovered. Transmission happens only
//! through direct contacts sampled from a static pairwise contact
//! structure, and each contact carries a distance and a duration that
//! shape the transmission probability.

pub mod contact;
pub mod contagion;
pub mod error;
pub mod health;
pub mod ledger;

pub use contact::{Contact, ContactGraph, GraphParams, TruncatedExp};
pub use contagion::{delta, ContagionParams, DayRange};
pub use error::CoreError;
pub use health::{AgentId, HealthState, Individual};
pub use ledger::{contagion_step, PopulationLedger, StepReport};
