use rand::seq::SliceRandom;
use rand::Rng;
use sapsr_device::Pseudonym;

/// An anonymous score report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InfectionScore {
    pub pseudonym: Pseudonym,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub selected: Vec<Pseudonym>,
    /// Tests left over because fewer than `k` devices had a positive score.
    pub shortfall: usize,
}

/// Positive-score reports sorted by decreasing score, ties in uniformly
/// random order.
pub fn rank_scores<R: Rng + ?Sized>(scores: &[InfectionScore], rng: &mut R) -> Vec<InfectionScore> {
    let mut ranked: Vec<InfectionScore> = scores.iter().copied().filter(|s| s.score > 0).collect();
    ranked.shuffle(rng);
    ranked.sort_by(|a, b| b.score.cmp(&a.score));
    ranked
}

/// The `k` highest-scoring devices. Zero scores are never selected.
pub fn select_top_k<R: Rng + ?Sized>(
    scores: &[InfectionScore],
    k: usize,
    rng: &mut R,
) -> Selection {
    let ranked = rank_scores(scores, rng);
    let selected: Vec<Pseudonym> = ranked.iter().take(k).map(|s| s.pseudonym).collect();
    Selection {
        shortfall: k - selected.len(),
        selected,
    }
}
