use thiserror::Error;

use crate::health::AgentId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("contact references unknown agent {0}")]
    UnknownAgent(AgentId),

    #[error("contact references isolated agent {0}")]
    IsolatedAgent(AgentId),

    #[error("contact dated day {contact_day} fed to a step for day {ledger_day}")]
    DayMismatch { contact_day: u32, ledger_day: u32 },

    #[error("malformed edge list at line {line}: {reason}")]
    EdgeList { line: usize, reason: String },
}

impl CoreError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
