use serde::{Deserialize, Serialize};

use crate::error::PptoError;

/// Per-contact transmission probabilities for an infector in each of the
/// three infectious classes, in `[asymptomatic, presymptomatic, symptomatic]`
/// order. The engine never learns which class any real device is in.
pub trait TransmissionModel {
    fn class_probabilities(&self, distance: f64, duration: f64) -> [f64; 3];
}

impl<F> TransmissionModel for F
where
    F: Fn(f64, f64) -> [f64; 3],
{
    fn class_probabilities(&self, distance: f64, duration: f64) -> [f64; 3] {
        self(distance, duration)
    }
}

/// Share of the currently infected population in each infectious class,
/// published once a day as an aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceEstimate {
    pub p_a: f64,
    pub p_p: f64,
    pub p_y: f64,
}

impl PrevalenceEstimate {
    pub fn new(p_a: f64, p_p: f64, p_y: f64) -> Result<Self, PptoError> {
        let ok = [p_a, p_p, p_y].iter().all(|p| (0.0..=1.0).contains(p))
            && ((p_a + p_p + p_y) - 1.0).abs() < 1e-9;
        if !ok {
            return Err(PptoError::Prevalence(p_a, p_p, p_y));
        }
        Ok(PrevalenceEstimate { p_a, p_p, p_y })
    }

    /// Normalises class counts; `None` when there is nobody infected.
    pub fn from_counts(a: f64, p: f64, y: f64) -> Option<Self> {
        let total = a + p + y;
        if !(total > 0.0) || a < 0.0 || p < 0.0 || y < 0.0 {
            return None;
        }
        Some(PrevalenceEstimate {
            p_a: a / total,
            p_p: p / total,
            p_y: y / total,
        })
    }

    pub fn uniform() -> Self {
        PrevalenceEstimate {
            p_a: 1.0 / 3.0,
            p_p: 1.0 / 3.0,
            p_y: 1.0 / 3.0,
        }
    }

    /// Class-averaged transmission probability of a contact.
    pub fn mix(&self, per_class: [f64; 3]) -> f64 {
        (self.p_a * per_class[0] + self.p_p * per_class[1] + self.p_y * per_class[2])
            .clamp(0.0, 1.0)
    }
}
