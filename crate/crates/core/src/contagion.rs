use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::health::HealthState;

/// Inclusive range of whole days, sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    pub min: u32,
    pub max: u32,
}

impl DayRange {
    pub const fn new(min: u32, max: u32) -> Self {
        DayRange { min, max }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(self.min..=self.max)
    }

    pub fn mean(&self) -> f64 {
        (self.min as f64 + self.max as f64) / 2.0
    }
}

/// Transmission and disease-clock parameters shared by the whole population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContagionParams {
    pub beta_a: f64,
    pub beta_p: f64,
    pub beta_y: f64,
    /// Metres over which transmissibility decays by a factor e.
    pub distance_scale: f64,
    /// Minutes of exposure after which the saturation term reaches 1 - 1/e.
    pub duration_scale: f64,
    pub alpha_s: f64,
    pub tau: DayRange,
    pub epsilon: DayRange,
}

impl Default for ContagionParams {
    fn default() -> Self {
        ContagionParams {
            beta_a: 0.05,
            beta_p: 0.1,
            beta_y: 0.2,
            distance_scale: 2.0,
            duration_scale: 10.0,
            alpha_s: 0.5,
            tau: DayRange::new(5, 15),
            epsilon: DayRange::new(1, 12),
        }
    }
}

impl ContagionParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        for (name, v) in [
            ("beta_a", self.beta_a),
            ("beta_p", self.beta_p),
            ("beta_y", self.beta_y),
            ("alpha_s", self.alpha_s),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::param(name, format!("{v} not in [0, 1]")));
            }
        }
        if !(self.beta_a <= self.beta_p && self.beta_p <= self.beta_y) {
            return Err(CoreError::param(
                "beta",
                "class transmissibility must satisfy beta_a <= beta_p <= beta_y",
            ));
        }
        if !(self.distance_scale > 0.0 && self.distance_scale.is_finite()) {
            return Err(CoreError::param("distance_scale", "must be positive"));
        }
        if !(self.duration_scale > 0.0 && self.duration_scale.is_finite()) {
            return Err(CoreError::param("duration_scale", "must be positive"));
        }
        for (name, r) in [("tau", self.tau), ("epsilon", self.epsilon)] {
            if r.min < 1 || r.max < r.min {
                return Err(CoreError::param(
                    name,
                    format!("range [{}, {}] must satisfy 1 <= min <= max", r.min, r.max),
                ));
            }
        }
        Ok(())
    }

    /// Base transmissibility of an infector in `state`; zero for S and R.
    pub fn class_beta(&self, state: HealthState) -> f64 {
        match state {
            HealthState::Asymptomatic => self.beta_a,
            HealthState::Presymptomatic => self.beta_p,
            HealthState::Symptomatic => self.beta_y,
            HealthState::Susceptible | HealthState::Recovered => 0.0,
        }
    }

    /// Contact-shape factor `exp(-l/ds) * (1 - exp(-r/dr))`, shared by all classes.
    #[inline]
    pub fn exposure(&self, distance: f64, duration: f64) -> f64 {
        (-distance / self.distance_scale).exp() * (1.0 - (-duration / self.duration_scale).exp())
    }

    /// Unchecked transmission probability from an infector of class
    /// `infector` to a susceptible contact. Callers guarantee non-negative
    /// distance and duration.
    #[inline]
    pub fn transmission(&self, infector: HealthState, distance: f64, duration: f64) -> f64 {
        (self.class_beta(infector) * self.exposure(distance, duration)).clamp(0.0, 1.0)
    }
}

/// Probability that one contact between `infector_state` and
/// `target_state` transmits the infection.
///
/// Zero unless the target is susceptible and the infector is in A, P or Y.
pub fn delta(
    infector_state: HealthState,
    target_state: HealthState,
    distance: f64,
    duration: f64,
    params: &ContagionParams,
) -> Result<f64, CoreError> {
    if !(distance >= 0.0) {
        return Err(CoreError::param(
            "distance",
            format!("{distance} is negative"),
        ));
    }
    if !(duration >= 0.0) {
        return Err(CoreError::param(
            "duration",
            format!("{duration} is negative"),
        ));
    }
    if target_state != HealthState::Susceptible || !infector_state.is_infectious() {
        return Ok(0.0);
    }
    Ok(params.transmission(infector_state, distance, duration))
}
