use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of an individual in the population, `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HealthState {
    Susceptible,
    Asymptomatic,
    Presymptomatic,
    Symptomatic,
    Recovered,
}

impl HealthState {
    pub const ALL: [HealthState; 5] = [
        HealthState::Susceptible,
        HealthState::Asymptomatic,
        HealthState::Presymptomatic,
        HealthState::Symptomatic,
        HealthState::Recovered,
    ];

    /// Position in [`HealthState::ALL`], used for per-class counters.
    #[inline]
    pub fn slot(self) -> usize {
        match self {
            HealthState::Susceptible => 0,
            HealthState::Asymptomatic => 1,
            HealthState::Presymptomatic => 2,
            HealthState::Symptomatic => 3,
            HealthState::Recovered => 4,
        }
    }

    #[inline]
    pub fn is_infectious(self) -> bool {
        matches!(
            self,
            HealthState::Asymptomatic | HealthState::Presymptomatic | HealthState::Symptomatic
        )
    }

    /// Whether `self -> next` is one of S→A, S→P, P→Y, A→R, Y→R.
    pub fn can_transition_to(self, next: HealthState) -> bool {
        use HealthState::*;
        matches!(
            (self, next),
            (Susceptible, Asymptomatic)
                | (Susceptible, Presymptomatic)
                | (Presymptomatic, Symptomatic)
                | (Asymptomatic, Recovered)
                | (Symptomatic, Recovered)
        )
    }

    pub fn letter(self) -> char {
        match self {
            HealthState::Susceptible => 'S',
            HealthState::Asymptomatic => 'A',
            HealthState::Presymptomatic => 'P',
            HealthState::Symptomatic => 'Y',
            HealthState::Recovered => 'R',
        }
    }
}

/// One member of the population together with its disease clocks.
///
/// `tau` is the recovery duration and `epsilon` the incubation duration,
/// both in whole days and drawn when the corresponding phase starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: AgentId,
    pub state: HealthState,
    pub infection_day: Option<u32>,
    pub symptom_onset_day: Option<u32>,
    pub alpha_s: f64,
    pub tau: Option<u32>,
    pub epsilon: Option<u32>,
    pub isolated: bool,
    pub app_active_prob: f64,
}

impl Individual {
    pub fn susceptible(id: AgentId, alpha_s: f64, app_active_prob: f64) -> Self {
        Individual {
            id,
            state: HealthState::Susceptible,
            infection_day: None,
            symptom_onset_day: None,
            alpha_s,
            tau: None,
            epsilon: None,
            isolated: false,
            app_active_prob,
        }
    }

    /// Day on which the current infectious phase ends, if any.
    pub fn recovery_day(&self) -> Option<u32> {
        match self.state {
            HealthState::Asymptomatic => Some(self.infection_day? + self.tau?),
            HealthState::Symptomatic => Some(self.symptom_onset_day? + self.tau?),
            _ => None,
        }
    }

    pub fn onset_due(&self) -> Option<u32> {
        match self.state {
            HealthState::Presymptomatic => Some(self.infection_day? + self.epsilon?),
            _ => None,
        }
    }
}
