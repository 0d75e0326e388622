use std::fmt;
use std::ops::Range;

use rand::seq::IndexedRandom;
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Geometric};
use sapsr_device::{DeviceHandle, DeviceNetwork, TokenId};
use serde::{Deserialize, Serialize};

use crate::bus::{MessageBus, TrajectoryRequest};
use crate::error::PptoError;
use crate::gamma::{gamma_weights, sample_weighted, GammaOrdering};
use crate::kernel::{PrevalenceEstimate, TransmissionModel};
use crate::select::{rank_scores, InfectionScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PptoConfig {
    /// Monte-Carlo iterations per day.
    pub iterations: u32,
    /// Look-back window in days.
    pub window: u32,
    pub gamma_ordering: GammaOrdering,
    /// Per-iteration cap on processed requests, as a multiple of the
    /// number of devices.
    pub hop_budget_factor: usize,
}

impl Default for PptoConfig {
    fn default() -> Self {
        PptoConfig {
            iterations: 100,
            window: 14,
            gamma_ordering: GammaOrdering::Sequential,
            hop_budget_factor: 10,
        }
    }
}

impl PptoConfig {
    pub fn validate(&self) -> Result<(), PptoError> {
        if self.iterations == 0 {
            return Err(PptoError::Config("iterations must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(PptoError::Config("window must be at least 1 day".into()));
        }
        if self.hop_budget_factor == 0 {
            return Err(PptoError::Config(
                "hop budget factor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What happened to one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    /// No device owns the token.
    Unrouted,
    /// The owner had already seen this iteration.
    Duplicate,
    Processed {
        backward: bool,
        forward: usize,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub delivered: usize,
    pub duplicates: usize,
    pub unrouted: usize,
    pub capped: bool,
}

/// Per-day run log entry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PptoDiagnostics {
    pub day: u32,
    pub iterations: u32,
    pub seeds: usize,
    pub seeds_without_tokens: usize,
    pub delivered: u64,
    pub duplicates: u64,
    pub unrouted: u64,
    pub max_delivered_per_iteration: usize,
    pub hop_cap_hits: u32,
    pub devices_touched: usize,
    pub device_count: usize,
    /// Score histogram over touched devices: 1, 2-4, 5-9, 10-49, 50+.
    pub histogram: [usize; 5],
}

impl PptoDiagnostics {
    fn bucket(score: u32) -> usize {
        match score {
            0 | 1 => 0,
            2..=4 => 1,
            5..=9 => 2,
            10..=49 => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for PptoDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.histogram;
        write!(
            f,
            "day={} iterations={} seeds={} seeds_without_tokens={} delivered={} duplicates={} \
             unrouted={} max_delivered_per_iteration={} devices={} hop_cap_hits={} \
             devices_touched={} score_hist=1:{},2-4:{},5-9:{},10-49:{},50+:{}",
            self.day,
            self.iterations,
            self.seeds,
            self.seeds_without_tokens,
            self.delivered,
            self.duplicates,
            self.unrouted,
            self.max_delivered_per_iteration,
            self.device_count,
            self.hop_cap_hits,
            self.devices_touched,
            h[0],
            h[1],
            h[2],
            h[3],
            h[4]
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyOutcome {
    /// Positive-score devices by decreasing score, ties shuffled.
    pub ranking: Vec<InfectionScore>,
    pub diagnostics: PptoDiagnostics,
}

/// Per-device quantities that stay fixed for the whole day.
#[derive(Debug, Clone)]
struct DeviceView {
    /// Mixed transmission probability of every record, aligned with
    /// `store.records()`.
    delta: Vec<f64>,
    /// Index of the first record inside the window.
    start: usize,
    /// Running sums of sequential backward weights from `start` on. The
    /// weights of any backward window are a prefix of this sequence
    /// because every window begins at the same day.
    cum_gamma: Vec<f64>,
    max_delta: f64,
    /// `bounds[k]` is the first record with day `>= window_start + k`, for
    /// every day up to `t + 1`.
    bounds: Vec<usize>,
    window_start: u32,
}

impl DeviceView {
    /// Positions of the records with `from <= day <= to`, clamped to the
    /// window.
    fn span(&self, from: u32, to: u32) -> Range<usize> {
        let last = self.bounds.len() - 1;
        let at = |d: u32| self.bounds[(d.saturating_sub(self.window_start) as usize).min(last)];
        if from > to {
            return 0..0;
        }
        at(from)..at(to.saturating_add(1))
    }
}

/// Above this bound forward thinning saves nothing.
const THINNING_LIMIT: f64 = 0.25;

/// Device-side trajectory propagation for one day.
///
/// Mixed transmission probabilities of each device's records are computed
/// on first contact with the device and reused for the rest of the day.
pub struct TrajectorySimulator<'a, K: TransmissionModel + ?Sized> {
    network: &'a mut DeviceNetwork,
    kernel: &'a K,
    prevalence: PrevalenceEstimate,
    day: u32,
    window: u32,
    ordering: GammaOrdering,
    views: Vec<Option<DeviceView>>,
    bus: MessageBus,
}

impl<'a, K: TransmissionModel + ?Sized> TrajectorySimulator<'a, K> {
    pub fn new(
        network: &'a mut DeviceNetwork,
        kernel: &'a K,
        prevalence: PrevalenceEstimate,
        day: u32,
        window: u32,
        ordering: GammaOrdering,
    ) -> Self {
        let n = network.len();
        TrajectorySimulator {
            network,
            kernel,
            prevalence,
            day,
            window,
            ordering,
            views: vec![None; n],
            bus: MessageBus::new(),
        }
    }

    pub fn network(&self) -> &DeviceNetwork {
        self.network
    }

    pub fn bus(&self) -> &MessageBus {
        &self.bus
    }

    pub fn bus_mut(&mut self) -> &mut MessageBus {
        &mut self.bus
    }

    fn window_start(&self) -> u32 {
        self.day.saturating_sub(self.window)
    }

    fn view(&mut self, h: DeviceHandle) -> &DeviceView {
        let slot = h.slot();
        if self.views[slot].is_none() {
            let store = self.network.store(h);
            let delta: Vec<f64> = store
                .records()
                .iter()
                .map(|r| {
                    self.prevalence
                        .mix(self.kernel.class_probabilities(r.distance, r.duration))
                })
                .collect();
            let window_start = self.window_start();
            let bounds: Vec<usize> = (window_start..=self.day + 1)
                .map(|d| store.records().partition_point(|r| r.day < d))
                .collect();
            let start = bounds[0];
            let mut acc = 0.0;
            let cum_gamma = gamma_weights(&delta[start..], GammaOrdering::Sequential)
                .into_iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect();
            let max_delta = delta.iter().copied().fold(0.0, f64::max);
            self.views[slot] = Some(DeviceView {
                delta,
                start,
                cum_gamma,
                max_delta,
                bounds,
                window_start,
            });
        }
        self.views[slot].as_ref().unwrap()
    }

    /// Mixed transmission probability of every record of `h`, aligned with
    /// `store.records()`.
    pub fn delta_hats(&mut self, h: DeviceHandle) -> &[f64] {
        &self.view(h).delta
    }

    /// Processes one request: route, flag guard, then backward and forward
    /// propagation from the day of the record that owns the token.
    pub fn handle_request<R: Rng + ?Sized>(
        &mut self,
        req: TrajectoryRequest,
        rng: &mut R,
    ) -> Delivery {
        let Some(h) = self.network.route(req.token) else {
            return Delivery::Unrouted;
        };
        let store = self.network.store_mut(h);
        if !store.raise_flag(req.iteration) {
            return Delivery::Duplicate;
        }
        let anchor = store
            .record_for(req.token)
            .map(|(_, r)| r.day)
            .expect("router delivered a token the device does not own");
        let backward = self
            .backward_trajectory(h, anchor, req.iteration, rng)
            .is_some();
        let forward = self.forward_trajectory(h, anchor, req.iteration, rng);
        Delivery::Processed { backward, forward }
    }

    /// Picks at most one earlier contact of `h` (days `[t - t_w, anchor - 1]`)
    /// as the likely source and sends a request to its peer.
    pub fn backward_trajectory<R: Rng + ?Sized>(
        &mut self,
        h: DeviceHandle,
        anchor: u32,
        iteration: u32,
        rng: &mut R,
    ) -> Option<TrajectoryRequest> {
        let last = anchor.checked_sub(1)?;
        let from = self.window_start();
        let range = self.view(h).span(from, last);
        if range.is_empty() {
            return None;
        }
        let pick = match self.ordering {
            GammaOrdering::Sequential => {
                let view = self.view(h);
                let cum = &view.cum_gamma[range.start - view.start..range.end - view.start];
                let total = *cum.last().unwrap();
                if !(total > 0.0) {
                    return None;
                }
                let target = rng.random::<f64>() * total;
                let mut k = cum.partition_point(|&c| c <= target);
                if k == cum.len() {
                    // rounding left target == total: take the last positive weight
                    k -= 1;
                    while k > 0 && cum[k - 1] == cum[k] {
                        k -= 1;
                    }
                }
                k
            }
            GammaOrdering::AnchorProduct => {
                let weights = gamma_weights(
                    &self.view(h).delta[range.clone()],
                    GammaOrdering::AnchorProduct,
                );
                sample_weighted(&weights, rng)?
            }
        };
        let req = TrajectoryRequest {
            iteration,
            token: self.network.store(h).records()[range.start + pick].peer_token,
        };
        self.bus.send(req);
        Some(req)
    }

    /// Simulates transmission over every later contact of `h` (days
    /// `[anchor + 1, t]`) and sends a request for each success.
    ///
    /// Small probabilities are drawn by thinning: candidates are visited
    /// with geometric skips at the device's largest probability and kept
    /// with the ratio, which gives each record an independent Bernoulli
    /// draw with its own probability.
    pub fn forward_trajectory<R: Rng + ?Sized>(
        &mut self,
        h: DeviceHandle,
        anchor: u32,
        iteration: u32,
        rng: &mut R,
    ) -> usize {
        let today = self.day;
        let range = self.view(h).span(anchor.saturating_add(1), today);
        if range.is_empty() {
            return 0;
        }
        let view = self.views[h.slot()].as_ref().unwrap();
        let records = self.network.store(h).records();
        let send = |i: usize, bus: &mut MessageBus| {
            bus.send(TrajectoryRequest {
                iteration,
                token: records[i].peer_token,
            })
        };
        let mut sent = 0;
        let p_max = view.max_delta;
        if p_max <= 0.0 {
            return 0;
        }
        if p_max > THINNING_LIMIT {
            for i in range {
                if rng.random_bool(view.delta[i]) {
                    send(i, &mut self.bus);
                    sent += 1;
                }
            }
            return sent;
        }
        let skips = Geometric::new(p_max).expect("probability in (0, 1]");
        let mut i = range.start;
        loop {
            let skip = skips.sample(rng);
            if skip >= (range.end - i) as u64 {
                break;
            }
            i += skip as usize;
            if rng.random::<f64>() * p_max < view.delta[i] {
                send(i, &mut self.bus);
                sent += 1;
            }
            i += 1;
        }
        sent
    }

    /// Seeds iteration `iteration` at `start` and drains the bus. Stops
    /// early, dropping pending requests, once `hop_budget` requests have
    /// been processed.
    pub fn run_iteration<R: Rng + ?Sized>(
        &mut self,
        iteration: u32,
        start: TokenId,
        hop_budget: usize,
        rng: &mut R,
    ) -> IterationStats {
        let mut stats = IterationStats::default();
        self.bus.send(TrajectoryRequest {
            iteration,
            token: start,
        });
        while let Some(req) = self.bus.next() {
            match self.handle_request(req, rng) {
                Delivery::Unrouted => stats.unrouted += 1,
                Delivery::Duplicate => stats.duplicates += 1,
                Delivery::Processed { .. } => stats.delivered += 1,
            }
            if stats.delivered >= hop_budget && !self.bus.is_quiet() {
                stats.capped = true;
                self.bus.clear();
            }
        }
        stats
    }
}

/// One day of the algorithm.
///
/// `seeds` holds, for each recently positive individual, the tokens their
/// device exchanged within the window. Scores and flags are reset and
/// pseudonyms rotated before the first iteration.
pub fn run_daily_ppto<K, R>(
    network: &mut DeviceNetwork,
    seeds: &[Vec<TokenId>],
    config: &PptoConfig,
    day: u32,
    kernel: &K,
    prevalence: PrevalenceEstimate,
    rng: &mut R,
) -> Result<DailyOutcome, PptoError>
where
    K: TransmissionModel + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    network.reset_scores();
    network.rotate_pseudonyms(rng);

    let usable: Vec<&Vec<TokenId>> = seeds.iter().filter(|s| !s.is_empty()).collect();
    let mut diag = PptoDiagnostics {
        day,
        seeds: seeds.len(),
        seeds_without_tokens: seeds.len() - usable.len(),
        device_count: network.len(),
        ..PptoDiagnostics::default()
    };
    if usable.is_empty() {
        return Ok(DailyOutcome {
            ranking: Vec::new(),
            diagnostics: diag,
        });
    }

    let hop_budget = config
        .hop_budget_factor
        .saturating_mul(network.len().max(1));
    let mut sim = TrajectorySimulator::new(
        network,
        kernel,
        prevalence,
        day,
        config.window,
        config.gamma_ordering,
    );
    for n in 1..=config.iterations {
        let tokens = usable.choose(rng).expect("non-empty");
        let start = *tokens.choose(rng).expect("non-empty");
        let stats = sim.run_iteration(n, start, hop_budget, rng);
        diag.iterations += 1;
        diag.delivered += stats.delivered as u64;
        diag.duplicates += stats.duplicates as u64;
        diag.unrouted += stats.unrouted as u64;
        diag.max_delivered_per_iteration = diag.max_delivered_per_iteration.max(stats.delivered);
        diag.hop_cap_hits += u32::from(stats.capped);
    }

    let reports: Vec<InfectionScore> = network
        .score_reports()
        .into_iter()
        .map(|(pseudonym, score)| InfectionScore { pseudonym, score })
        .collect();
    diag.devices_touched = reports.len();
    for r in &reports {
        diag.histogram[PptoDiagnostics::bucket(r.score)] += 1;
    }
    Ok(DailyOutcome {
        ranking: rank_scores(&reports, rng),
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::ChaCha8Rng;
    use rand::SeedableRng;
    use sapsr_device::ContactObservation;

    fn certain(_: f64, _: f64) -> [f64; 3] {
        [1.0, 1.0, 1.0]
    }

    fn obs(day: u32) -> ContactObservation {
        ContactObservation {
            day,
            distance: 1.0,
            duration: 10.0,
        }
    }

    #[test]
    fn unknown_token_is_a_silent_no_op() {
        let mut net = DeviceNetwork::new();
        net.register();
        let kernel = certain;
        let mut sim = TrajectorySimulator::new(
            &mut net,
            &kernel,
            PrevalenceEstimate::uniform(),
            5,
            14,
            GammaOrdering::Sequential,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let req = TrajectoryRequest {
            iteration: 1,
            token: TokenId::from_raw(7),
        };
        assert_eq!(sim.handle_request(req, &mut rng), Delivery::Unrouted);
        assert!(sim.bus().is_quiet());
        assert_eq!(sim.bus().sent(), 0);
    }

    #[test]
    fn repeated_iteration_counts_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = DeviceNetwork::new();
        let (a, b) = (net.register(), net.register());
        let (_, hb) = net.record_contact(a, b, obs(3), &mut rng);
        let kernel = certain;
        let mut sim = TrajectorySimulator::new(
            &mut net,
            &kernel,
            PrevalenceEstimate::uniform(),
            5,
            14,
            GammaOrdering::Sequential,
        );
        let req = TrajectoryRequest {
            iteration: 4,
            token: hb,
        };
        assert!(matches!(
            sim.handle_request(req, &mut rng),
            Delivery::Processed { .. }
        ));
        assert_eq!(sim.handle_request(req, &mut rng), Delivery::Duplicate);
        assert_eq!(sim.network().store(b).score(), 1);
    }

    #[test]
    fn isolated_contact_scores_without_propagating() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = DeviceNetwork::new();
        let (a, b) = (net.register(), net.register());
        let (_, hb) = net.record_contact(a, b, obs(3), &mut rng);
        let kernel = certain;
        let mut sim = TrajectorySimulator::new(
            &mut net,
            &kernel,
            PrevalenceEstimate::uniform(),
            5,
            14,
            GammaOrdering::Sequential,
        );
        let req = TrajectoryRequest {
            iteration: 1,
            token: hb,
        };
        assert_eq!(
            sim.handle_request(req, &mut rng),
            Delivery::Processed {
                backward: false,
                forward: 0
            }
        );
        assert!(sim.bus().is_quiet());
    }

    #[test]
    fn forward_with_certain_contact_sends_one_request() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = DeviceNetwork::new();
        let (a, b) = (net.register(), net.register());
        let (_, hb) = net.record_contact(a, b, obs(4), &mut rng);
        let kernel = certain;
        let mut sim = TrajectorySimulator::new(
            &mut net,
            &kernel,
            PrevalenceEstimate::uniform(),
            6,
            14,
            GammaOrdering::Sequential,
        );
        assert_eq!(sim.forward_trajectory(a, 2, 1, &mut rng), 1);
        assert_eq!(
            sim.bus_mut().next(),
            Some(TrajectoryRequest {
                iteration: 1,
                token: hb
            })
        );
        assert_eq!(sim.forward_trajectory(a, 4, 1, &mut rng), 0);
    }

    #[test]
    fn no_seeds_means_empty_ranking() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = DeviceNetwork::new();
        net.register();
        let out = run_daily_ppto(
            &mut net,
            &[],
            &PptoConfig::default(),
            3,
            &certain,
            PrevalenceEstimate::uniform(),
            &mut rng,
        )
        .unwrap();
        assert!(out.ranking.is_empty());
        assert_eq!(out.diagnostics.iterations, 0);

        let out = run_daily_ppto(
            &mut net,
            &[vec![]],
            &PptoConfig::default(),
            3,
            &certain,
            PrevalenceEstimate::uniform(),
            &mut rng,
        )
        .unwrap();
        assert!(out.ranking.is_empty());
        assert_eq!(out.diagnostics.seeds_without_tokens, 1);
    }

    #[test]
    fn config_validation() {
        let bad = PptoConfig {
            iterations: 0,
            ..PptoConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(PptoConfig::default().validate().is_ok());
    }

    #[test]
    fn diagnostics_line_is_single_line() {
        let d = PptoDiagnostics::default();
        let s = d.to_string();
        assert!(!s.contains('\n'));
        assert!(s.starts_with("day=0 iterations=0"));
    }
}
