use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sapsr_core::{ContagionParams, DayRange, GraphParams, TruncatedExp};
use sapsr_ppto::{GammaOrdering, PptoConfig};
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::policy::SwabTest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    None,
    Ts,
    Tsdc,
    Ppto,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::None,
        PolicyKind::Ts,
        PolicyKind::Tsdc,
        PolicyKind::Ppto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::None => "none",
            PolicyKind::Ts => "ts",
            PolicyKind::Tsdc => "tsdc",
            PolicyKind::Ppto => "ppto",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown policy {s:?}")))
    }
}

/// Where the daily class mixture used by the trajectory engine comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrevalenceSource {
    /// Today's true A/P/Y counts.
    #[default]
    GroundTruth,
    /// Long-run class shares implied by `alpha_s` and the mean clocks.
    /// Needs no population data at all.
    Stationary,
}

/// Full run configuration. Every key is optional in a config file; missing
/// keys take the calibrated defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub population: usize,
    pub days: u32,
    pub initial_symptomatic: usize,
    pub seed: u64,
    pub policy: PolicyKind,
    /// Daily swab tests.
    pub tests_per_day: usize,
    /// Monte-Carlo iterations per day.
    pub iterations: u32,
    /// Look-back window in days, shared by the engine and TSDC.
    pub window: u32,
    /// Probability that a phone is recording during a given contact.
    pub rho: f64,

    pub mean_degree: f64,
    pub heavy_share: f64,
    pub heavy_weight: f64,
    pub contact_distance_mean: f64,
    pub contact_distance_max: f64,
    pub contact_duration_mean: f64,
    pub contact_duration_max: f64,

    pub beta_a: f64,
    pub beta_p: f64,
    pub beta_y: f64,
    pub distance_scale: f64,
    pub duration_scale: f64,
    pub alpha_s: f64,
    pub tau_min: u32,
    pub tau_max: u32,
    pub epsilon_min: u32,
    pub epsilon_max: u32,

    pub sensitivity: f64,
    pub specificity: f64,
    pub prevalence_source: PrevalenceSource,
    pub gamma_ordering: GammaOrdering,
    pub hop_budget_factor: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            population: 10_000,
            days: 30,
            initial_symptomatic: 5,
            seed: 1,
            policy: PolicyKind::None,
            tests_per_day: 100,
            iterations: 100,
            window: 14,
            rho: 1.0,

            mean_degree: 10.0,
            heavy_share: 0.6,
            heavy_weight: 0.9,
            contact_distance_mean: 1.5,
            contact_distance_max: 5.0,
            contact_duration_mean: 15.0,
            contact_duration_max: 120.0,

            beta_a: 0.12,
            beta_p: 0.12,
            beta_y: 0.12,
            distance_scale: 2.0,
            duration_scale: 10.0,
            alpha_s: 0.87,
            tau_min: 5,
            tau_max: 15,
            epsilon_min: 1,
            epsilon_max: 12,

            sensitivity: 1.0,
            specificity: 1.0,
            prevalence_source: PrevalenceSource::GroundTruth,
            gamma_ordering: GammaOrdering::Sequential,
            hop_budget_factor: 10,
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn contagion(&self) -> ContagionParams {
        ContagionParams {
            beta_a: self.beta_a,
            beta_p: self.beta_p,
            beta_y: self.beta_y,
            distance_scale: self.distance_scale,
            duration_scale: self.duration_scale,
            alpha_s: self.alpha_s,
            tau: DayRange::new(self.tau_min, self.tau_max),
            epsilon: DayRange::new(self.epsilon_min, self.epsilon_max),
        }
    }

    pub fn graph(&self) -> Result<GraphParams, SimError> {
        Ok(GraphParams {
            mean_degree: self.mean_degree,
            heavy_share: self.heavy_share,
            heavy_weight: self.heavy_weight,
            distance: TruncatedExp::new(self.contact_distance_mean, self.contact_distance_max)?,
            duration: TruncatedExp::new(self.contact_duration_mean, self.contact_duration_max)?,
        })
    }

    pub fn ppto(&self) -> PptoConfig {
        PptoConfig {
            iterations: self.iterations,
            window: self.window,
            gamma_ordering: self.gamma_ordering,
            hop_budget_factor: self.hop_budget_factor,
        }
    }

    pub fn swab(&self) -> Result<SwabTest, SimError> {
        SwabTest::new(self.sensitivity, self.specificity)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.days == 0 {
            return bad("days must be at least 1");
        }
        if self.initial_symptomatic > self.population {
            return bad("initial_symptomatic exceeds population");
        }
        if self.window == 0 {
            return bad("window must be at least 1 day");
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad("rho must lie in [0, 1]");
        }
        if self.policy == PolicyKind::Ppto {
            self.ppto()
                .validate()
                .map_err(|e| SimError::Config(e.to_string()))?;
        }
        self.contagion().validate()?;
        self.graph()?;
        self.swab()?;
        Ok(())
    }
}
