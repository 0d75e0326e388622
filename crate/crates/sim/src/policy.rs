use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, RngExt};
use sapsr_core::{AgentId, Individual};
use serde::{Deserialize, Serialize};

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwabTest {
    pub sensitivity: f64,
    pub specificity: f64,
}

impl Default for SwabTest {
    fn default() -> Self {
        SwabTest {
            sensitivity: 1.0,
            specificity: 1.0,
        }
    }
}

impl SwabTest {
    pub fn new(sensitivity: f64, specificity: f64) -> Result<Self, SimError> {
        for (name, v) in [("sensitivity", sensitivity), ("specificity", specificity)] {
            if !(v > 0.5 && v <= 1.0) {
                return Err(SimError::Config(format!(
                    "{name} must lie in (0.5, 1], got {v}"
                )));
            }
        }
        Ok(SwabTest {
            sensitivity,
            specificity,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestResult {
    Positive,
    Negative,
}

/// One swab. Anyone currently carrying the virus (A, P or Y) is infected.
pub fn run_test<R: Rng + ?Sized>(ind: &Individual, test: &SwabTest, rng: &mut R) -> TestResult {
    let p_positive = if ind.state.is_infectious() {
        test.sensitivity
    } else {
        1.0 - test.specificity
    };
    if rng.random_bool(p_positive) {
        TestResult::Positive
    } else {
        TestResult::Negative
    }
}

/// Tests chosen for one day and the agents they found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyDecision {
    pub day: u32,
    pub tested: Vec<AgentId>,
    pub positives: Vec<AgentId>,
}

/// Fills up to `k` slots tier by tier. A tier that does not fit is cut to a
/// uniform random subset; leftover slots go to uniformly random eligible
/// agents. Ineligible and repeated candidates are ignored.
pub fn fill_by_priority<R: Rng + ?Sized>(
    tiers: &[Vec<AgentId>],
    eligible: &[bool],
    k: usize,
    rng: &mut R,
) -> Vec<AgentId> {
    let mut chosen = Vec::with_capacity(k);
    let mut taken = HashSet::new();
    for tier in tiers {
        let fresh = dedup_eligible(tier, eligible, &taken);
        take_uniform(fresh, k, &mut chosen, &mut taken, rng);
    }
    random_fill(eligible, k, &mut chosen, &mut taken, rng);
    chosen
}

/// Takes eligible agents from `ranked` in order, then fills randomly.
pub fn fill_ranked<R: Rng + ?Sized>(
    ranked: &[AgentId],
    eligible: &[bool],
    k: usize,
    rng: &mut R,
) -> Vec<AgentId> {
    let mut chosen = Vec::with_capacity(k);
    let mut taken = HashSet::new();
    for &a in ranked {
        if chosen.len() == k {
            break;
        }
        if is_eligible(eligible, a) && taken.insert(a) {
            chosen.push(a);
        }
    }
    random_fill(eligible, k, &mut chosen, &mut taken, rng);
    chosen
}

/// Newly symptomatic first, then random.
pub fn policy_ts<R: Rng + ?Sized>(
    new_symptomatic: &[AgentId],
    eligible: &[bool],
    k: usize,
    rng: &mut R,
) -> Vec<AgentId> {
    fill_by_priority(&[new_symptomatic.to_vec()], eligible, k, rng)
}

/// Newly symptomatic first, then everyone they met within the window, then
/// random.
pub fn policy_tsdc<R, F>(
    new_symptomatic: &[AgentId],
    direct_contacts_of: F,
    eligible: &[bool],
    k: usize,
    rng: &mut R,
) -> Vec<AgentId>
where
    R: Rng + ?Sized,
    F: Fn(AgentId) -> Vec<AgentId>,
{
    let mut contacts: Vec<AgentId> = new_symptomatic
        .iter()
        .flat_map(|&s| direct_contacts_of(s))
        .collect();
    contacts.sort_unstable();
    contacts.dedup();
    fill_by_priority(&[new_symptomatic.to_vec(), contacts], eligible, k, rng)
}

fn is_eligible(eligible: &[bool], a: AgentId) -> bool {
    eligible.get(a.index()).copied().unwrap_or(false)
}

fn dedup_eligible(tier: &[AgentId], eligible: &[bool], taken: &HashSet<AgentId>) -> Vec<AgentId> {
    let mut seen = HashSet::new();
    tier.iter()
        .copied()
        .filter(|&a| is_eligible(eligible, a) && !taken.contains(&a) && seen.insert(a))
        .collect()
}

fn take_uniform<R: Rng + ?Sized>(
    candidates: Vec<AgentId>,
    k: usize,
    chosen: &mut Vec<AgentId>,
    taken: &mut HashSet<AgentId>,
    rng: &mut R,
) {
    let room = k - chosen.len();
    if candidates.len() <= room {
        taken.extend(candidates.iter().copied());
        chosen.extend(candidates);
        return;
    }
    let mut picks: Vec<usize> = index::sample(rng, candidates.len(), room).into_vec();
    picks.sort_unstable();
    for i in picks {
        taken.insert(candidates[i]);
        chosen.push(candidates[i]);
    }
}

fn random_fill<R: Rng + ?Sized>(
    eligible: &[bool],
    k: usize,
    chosen: &mut Vec<AgentId>,
    taken: &mut HashSet<AgentId>,
    rng: &mut R,
) {
    if chosen.len() >= k {
        return;
    }
    let pool: Vec<AgentId> = eligible
        .iter()
        .enumerate()
        .filter(|&(_, &ok)| ok)
        .map(|(i, _)| AgentId(i as u32))
        .filter(|a| !taken.contains(a))
        .collect();
    take_uniform(pool, k, chosen, taken, rng);
}
