use std::collections::{HashMap, HashSet, VecDeque};

use rand::rngs::ChaCha8Rng;
use rand::seq::{index, SliceRandom};
use sapsr_core::{
    contagion_step, AgentId, ContactGraph, ContagionParams, HealthState, PopulationLedger,
};
use sapsr_device::{apply_app_usage, ContactObservation, DeviceHandle, DeviceNetwork, TokenId};
use sapsr_ppto::{run_daily_ppto, PptoDiagnostics, PrevalenceEstimate};
use serde::{Deserialize, Serialize};

use crate::config::{PolicyKind, PrevalenceSource, SimConfig};
use crate::error::SimError;
use crate::policy::{
    fill_ranked, policy_ts, policy_tsdc, run_test, PolicyDecision, SwabTest, TestResult,
};
use crate::streams::{stream, Stream};

/// One CSV row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayMetrics {
    pub day: u32,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub isolated: usize,
    pub new_infections: usize,
    pub cum_infections: usize,
    pub tests_used: usize,
}

impl DayMetrics {
    pub fn population(&self) -> usize {
        self.s + self.a + self.p + self.y + self.r
    }

    pub fn infected(&self) -> usize {
        self.a + self.p + self.y
    }
}

#[derive(Debug)]
pub struct SimOutcome {
    pub metrics: Vec<DayMetrics>,
    pub ledger: PopulationLedger,
    /// One entry per day when the policy is `ppto`.
    pub ppto_log: Vec<PptoDiagnostics>,
    pub contacts_total: u64,
    pub contacts_recorded: u64,
}

/// A single run, advanced one day at a time.
pub struct Simulation {
    cfg: SimConfig,
    params: ContagionParams,
    swab: SwabTest,
    graph: ContactGraph,
    ledger: PopulationLedger,
    network: DeviceNetwork,
    /// Device of each agent, and owner of each device slot. Only the
    /// harness holds this mapping.
    device_of: Vec<DeviceHandle>,
    owner_of: Vec<AgentId>,
    /// Ground-truth contact pairs of the last `window` days, for TSDC.
    contact_log: VecDeque<(u32, Vec<(AgentId, AgentId)>)>,
    detected_on: Vec<Option<u32>>,
    contacts_rng: ChaCha8Rng,
    disease_rng: ChaCha8Rng,
    devices_rng: ChaCha8Rng,
    policy_rng: ChaCha8Rng,
    tests_rng: ChaCha8Rng,
    ppto_rng: ChaCha8Rng,
    metrics: Vec<DayMetrics>,
    ppto_log: Vec<PptoDiagnostics>,
    contacts_total: u64,
    contacts_recorded: u64,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let seed = cfg.seed;
        let params = cfg.contagion();
        let swab = cfg.swab()?;
        let n = cfg.population;

        let graph = ContactGraph::build(n, &cfg.graph()?, &mut stream(seed, Stream::Graph))?;

        let mut init_rng = stream(seed, Stream::Init);
        let mut ledger = PopulationLedger::susceptible(n, 1, cfg.alpha_s, cfg.rho)?;
        let mut seeds = index::sample(&mut init_rng, n, cfg.initial_symptomatic).into_vec();
        seeds.sort_unstable();
        for i in seeds {
            ledger.seed_symptomatic(AgentId(i as u32), &params, &mut init_rng)?;
        }

        // Devices join in random order so slots say nothing about agents.
        let mut devices_rng = stream(seed, Stream::Devices);
        let mut owner_of: Vec<AgentId> = (0..n as u32).map(AgentId).collect();
        owner_of.shuffle(&mut devices_rng);
        let mut network = DeviceNetwork::new();
        let mut device_of = vec![None; n];
        for &agent in &owner_of {
            device_of[agent.index()] = Some(network.register());
        }
        let device_of = device_of
            .into_iter()
            .map(|h| h.expect("every agent has a device"))
            .collect();

        Ok(Simulation {
            params,
            swab,
            graph,
            ledger,
            network,
            device_of,
            owner_of,
            contact_log: VecDeque::new(),
            detected_on: vec![None; n],
            contacts_rng: stream(seed, Stream::Contacts),
            disease_rng: stream(seed, Stream::Disease),
            devices_rng,
            policy_rng: stream(seed, Stream::Policy),
            tests_rng: stream(seed, Stream::Tests),
            ppto_rng: stream(seed, Stream::Ppto),
            metrics: Vec::with_capacity(cfg.days as usize),
            ppto_log: Vec::new(),
            contacts_total: 0,
            contacts_recorded: 0,
            cfg,
        })
    }

    pub fn ledger(&self) -> &PopulationLedger {
        &self.ledger
    }

    pub fn network(&self) -> &DeviceNetwork {
        &self.network
    }

    pub fn graph(&self) -> &ContactGraph {
        &self.graph
    }

    pub fn metrics(&self) -> &[DayMetrics] {
        &self.metrics
    }

    pub fn is_finished(&self) -> bool {
        self.metrics.len() >= self.cfg.days as usize
    }

    /// Runs one day: contacts, device logging, contagion, policy, tests,
    /// isolation, bookkeeping.
    pub fn step(&mut self) -> Result<DayMetrics, SimError> {
        let day = self.ledger.day();
        let window = self.cfg.window;

        let active: Vec<bool> = self
            .ledger
            .individuals()
            .iter()
            .map(|i| !i.isolated)
            .collect();
        let contacts = self.graph.sample_day(day, &active, &mut self.contacts_rng);

        for c in &contacts {
            let rho_u = self.ledger.individuals()[c.u.index()].app_active_prob;
            let rho_v = self.ledger.individuals()[c.v.index()].app_active_prob;
            if apply_app_usage(rho_u, rho_v, &mut self.devices_rng) {
                let obs = ContactObservation {
                    day,
                    distance: c.distance,
                    duration: c.duration,
                };
                self.network.record_contact(
                    self.device_of[c.u.index()],
                    self.device_of[c.v.index()],
                    obs,
                    &mut self.devices_rng,
                );
                self.contacts_recorded += 1;
            }
        }
        self.contacts_total += contacts.len() as u64;

        let report = contagion_step(
            &mut self.ledger,
            &contacts,
            &self.params,
            &mut self.disease_rng,
        )?;

        self.contact_log
            .push_back((day, contacts.iter().map(|c| (c.u, c.v)).collect()));
        while self
            .contact_log
            .front()
            .is_some_and(|(d, _)| *d < day.saturating_sub(window))
        {
            self.contact_log.pop_front();
        }

        // Y_t minus Y_{t-1}: the initial cases are never "new".
        let new_symptomatic = report.new_symptomatic.clone();
        for &a in &new_symptomatic {
            self.detected_on[a.index()].get_or_insert(day);
        }

        let decision = self.apply_policy(day, &new_symptomatic)?;

        for &a in &decision.positives {
            self.detected_on[a.index()].get_or_insert(day);
            self.ledger.isolate(a)?;
        }
        for a in self.ledger.members(HealthState::Symptomatic) {
            self.ledger.isolate(a)?;
        }

        let [s, a, p, y, r] = self.ledger.counts();
        let row = DayMetrics {
            day,
            s,
            a,
            p,
            y,
            r,
            isolated: self.ledger.isolated_count(),
            new_infections: report.new_infections.len(),
            cum_infections: self.ledger.cumulative_infections(),
            tests_used: decision.tested.len(),
        };
        self.metrics.push(row);

        self.network.prune_window(day, window);
        self.ledger.advance_day();
        Ok(row)
    }

    pub fn run(mut self) -> Result<SimOutcome, SimError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(SimOutcome {
            metrics: self.metrics,
            ledger: self.ledger,
            ppto_log: self.ppto_log,
            contacts_total: self.contacts_total,
            contacts_recorded: self.contacts_recorded,
        })
    }

    fn apply_policy(
        &mut self,
        day: u32,
        new_symptomatic: &[AgentId],
    ) -> Result<PolicyDecision, SimError> {
        let k = self.cfg.tests_per_day;
        let eligible: Vec<bool> = self
            .ledger
            .individuals()
            .iter()
            .map(|i| !i.isolated)
            .collect();
        let tested = match self.cfg.policy {
            PolicyKind::None => Vec::new(),
            PolicyKind::Ts => policy_ts(new_symptomatic, &eligible, k, &mut self.policy_rng),
            PolicyKind::Tsdc => {
                let met = self.recent_contacts_of(new_symptomatic);
                policy_tsdc(
                    new_symptomatic,
                    |a| met.get(&a).cloned().unwrap_or_default(),
                    &eligible,
                    k,
                    &mut self.policy_rng,
                )
            }
            PolicyKind::Ppto => {
                let ranked = self.ppto_ranking(day)?;
                // Today's symptomatics are isolated tonight anyway.
                let mut eligible = eligible;
                for a in new_symptomatic {
                    eligible[a.index()] = false;
                }
                fill_ranked(&ranked, &eligible, k, &mut self.policy_rng)
            }
        };

        let mut positives = Vec::new();
        for &a in &tested {
            let ind = &self.ledger.individuals()[a.index()];
            if run_test(ind, &self.swab, &mut self.tests_rng) == TestResult::Positive {
                positives.push(a);
            }
        }
        Ok(PolicyDecision {
            day,
            tested,
            positives,
        })
    }

    /// Everyone each of `agents` met during the window, from the ground-truth log.
    fn recent_contacts_of(&self, agents: &[AgentId]) -> HashMap<AgentId, Vec<AgentId>> {
        let wanted: HashSet<AgentId> = agents.iter().copied().collect();
        let mut met: HashMap<AgentId, Vec<AgentId>> = HashMap::new();
        for (_, pairs) in &self.contact_log {
            for &(u, v) in pairs {
                if wanted.contains(&u) {
                    met.entry(u).or_default().push(v);
                }
                if wanted.contains(&v) {
                    met.entry(v).or_default().push(u);
                }
            }
        }
        met
    }

    fn prevalence(&self) -> PrevalenceEstimate {
        let estimate = match self.cfg.prevalence_source {
            PrevalenceSource::GroundTruth => PrevalenceEstimate::from_counts(
                self.ledger.count(HealthState::Asymptomatic) as f64,
                self.ledger.count(HealthState::Presymptomatic) as f64,
                self.ledger.count(HealthState::Symptomatic) as f64,
            ),
            PrevalenceSource::Stationary => {
                let alpha = self.params.alpha_s;
                PrevalenceEstimate::from_counts(
                    alpha * self.params.tau.mean(),
                    (1.0 - alpha) * self.params.epsilon.mean(),
                    (1.0 - alpha) * self.params.tau.mean(),
                )
            }
        };
        estimate.unwrap_or_else(PrevalenceEstimate::uniform)
    }

    /// Agents ranked by today's trajectory scores.
    fn ppto_ranking(&mut self, day: u32) -> Result<Vec<AgentId>, SimError> {
        let window = self.cfg.window;
        let from = day.saturating_sub(window);
        let seeds: Vec<Vec<TokenId>> = self
            .detected_on
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_some_and(|d| d >= from && d <= day))
            .map(|(i, _)| {
                self.network
                    .store(self.device_of[i])
                    .peer_tokens_in(from, day)
            })
            .collect();
        let prevalence = self.prevalence();
        let params = &self.params;
        let kernel = |l: f64, r: f64| {
            let e = params.exposure(l, r);
            [params.beta_a * e, params.beta_p * e, params.beta_y * e].map(|p| p.min(1.0))
        };
        let outcome = run_daily_ppto(
            &mut self.network,
            &seeds,
            &self.cfg.ppto(),
            day,
            &kernel,
            prevalence,
            &mut self.ppto_rng,
        )?;
        self.ppto_log.push(outcome.diagnostics);
        Ok(outcome
            .ranking
            .iter()
            .filter_map(|s| self.network.resolve(s.pseudonym))
            .map(|h| self.owner_of[h.slot()])
            .collect())
    }
}

pub fn run_simulation(cfg: SimConfig) -> Result<SimOutcome, SimError> {
    Simulation::new(cfg)?.run()
}
