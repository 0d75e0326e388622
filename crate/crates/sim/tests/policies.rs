use std::collections::HashSet;

use proptest::prelude::*;
use rand::rngs::ChaCha8Rng;
use rand::SeedableRng;
use sapsr_core::{AgentId, HealthState, Individual};
use sapsr_sim::policy::fill_ranked;
use sapsr_sim::{policy_ts, policy_tsdc, run_test, SwabTest, TestResult};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn ids(range: std::ops::Range<u32>) -> Vec<AgentId> {
    range.map(AgentId).collect()
}

#[test]
fn ts_truncates_symptomatics_uniformly() {
    let n = 1000;
    let symptomatic = ids(0..150);
    let eligible = vec![true; n];
    let reps = 3000;
    let mut counts = vec![0u32; n];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..reps {
        let picked = policy_ts(&symptomatic, &eligible, 100, &mut rng);
        assert_eq!(picked.len(), 100);
        for a in picked {
            counts[a.index()] += 1;
        }
    }
    assert!(
        counts[150..].iter().all(|&c| c == 0),
        "random fill used while symptomatics were left"
    );

    let p = 100.0 / 150.0;
    let expected = reps as f64 * p;
    let var = reps as f64 * p * (1.0 - p);
    let stat: f64 = counts[..150]
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / var)
        .sum();
    let p_value = 1.0 - ChiSquared::new(149.0).unwrap().cdf(stat);
    assert!(p_value > 0.001, "chi-square {stat:.1}, p = {p_value:.5}");
}

#[test]
fn tsdc_inclusion_frequency() {
    let symptomatic = ids(0..2);
    let contacts = ids(2..22);
    let eligible = vec![true; 100];
    let reps = 20_000;
    let mut counts = vec![0u32; 100];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..reps {
        let picked = policy_tsdc(
            &symptomatic,
            |a| {
                if a == AgentId(0) {
                    contacts[..12].to_vec()
                } else {
                    contacts[8..].to_vec()
                }
            },
            &eligible,
            5,
            &mut rng,
        );
        assert_eq!(&picked[..2], &symptomatic[..]);
        for a in picked {
            counts[a.index()] += 1;
        }
    }
    assert!(counts[22..].iter().all(|&c| c == 0));
    for (i, &c) in counts[2..22].iter().enumerate() {
        let freq = c as f64 / reps as f64;
        assert!(
            (freq - 0.15).abs() < 0.01,
            "contact {i} picked with frequency {freq}"
        );
    }
}

#[test]
fn swab_false_positive_rate() {
    let test = SwabTest::new(1.0, 0.98).unwrap();
    let healthy = Individual::susceptible(AgentId(0), 0.87, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reps = 100_000;
    let positives = (0..reps)
        .filter(|_| run_test(&healthy, &test, &mut rng) == TestResult::Positive)
        .count();
    let rate = positives as f64 / reps as f64;
    assert!(
        (0.017..=0.023).contains(&rate),
        "false positive rate {rate}"
    );
}

#[test]
fn swab_sensitivity_applies_to_every_carrier() {
    let test = SwabTest::new(0.8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for state in [
        HealthState::Asymptomatic,
        HealthState::Presymptomatic,
        HealthState::Symptomatic,
    ] {
        let mut ind = Individual::susceptible(AgentId(0), 0.87, 1.0);
        ind.state = state;
        let reps = 50_000;
        let hits = (0..reps)
            .filter(|_| run_test(&ind, &test, &mut rng) == TestResult::Positive)
            .count();
        let rate = hits as f64 / reps as f64;
        assert!((rate - 0.8).abs() < 0.01, "{state:?}: {rate}");
    }
}

proptest! {
    #[test]
    fn selections_respect_budget_and_eligibility(
        eligible in prop::collection::vec(any::<bool>(), 1..200),
        tier in prop::collection::vec(0u32..250, 0..60),
        k in 0usize..80,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tier: Vec<AgentId> = tier.into_iter().map(AgentId).collect();
        let available = eligible.iter().filter(|&&e| e).count();
        let picks = [
            policy_ts(&tier, &eligible, k, &mut rng),
            policy_tsdc(&tier, |a| vec![AgentId(a.0 / 2)], &eligible, k, &mut rng),
            fill_ranked(&tier, &eligible, k, &mut rng),
        ];
        for picked in picks {
            prop_assert_eq!(picked.len(), k.min(available));
            prop_assert_eq!(picked.iter().collect::<HashSet<_>>().len(), picked.len());
            prop_assert!(picked.iter().all(|a| eligible[a.index()]));
        }
    }
}
