use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

/// Which earlier contacts enter the survival product of a backward weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaOrdering {
    /// Product over the contacts that precede the candidate in (day,
    /// insertion) order: the weight of a contact is the probability that it
    /// was the first one to transmit.
    #[default]
    Sequential,
    /// Product over every contact in the backward window, i.e. all contacts
    /// before the anchor day. Weights become proportional to the mixed
    /// transmission probability alone.
    AnchorProduct,
}

/// Unnormalised backward weights for contacts given in chronological order
/// with mixed transmission probabilities `deltas`.
pub fn gamma_weights(deltas: &[f64], ordering: GammaOrdering) -> Vec<f64> {
    match ordering {
        GammaOrdering::Sequential => {
            let mut survive = 1.0;
            deltas
                .iter()
                .map(|&d| {
                    let w = survive * d;
                    survive *= 1.0 - d;
                    w
                })
                .collect()
        }
        GammaOrdering::AnchorProduct => {
            let survive: f64 = deltas.iter().map(|d| 1.0 - d).product();
            deltas.iter().map(|&d| survive * d).collect()
        }
    }
}

/// Draws an index with probability proportional to `weights`. Returns
/// `None` if the weights are empty or sum to zero.
pub fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    // rounding can leave target == total
    last_positive
}
