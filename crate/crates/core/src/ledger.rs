use rand::{Rng, RngExt};

use crate::contact::Contact;
use crate::contagion::ContagionParams;
use crate::error::CoreError;
use crate::health::{AgentId, HealthState, Individual};

/// The population partition on a given day.
///
/// Individuals are stored densely by [`AgentId`]; the five class sets are
/// views over that vector, so they are disjoint and cover the population
/// by construction. Per-class counters are kept in step with every
/// transition.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationLedger {
    day: u32,
    individuals: Vec<Individual>,
    counts: [usize; 5],
    isolated: usize,
    initially_infected: usize,
    cumulative_infections: usize,
}

/// What happened during one [`contagion_step`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    pub day: u32,
    pub new_infections: Vec<AgentId>,
    pub new_symptomatic: Vec<AgentId>,
    pub recovered: Vec<AgentId>,
}

impl PopulationLedger {
    /// Builds a ledger from individuals whose ids are exactly `0..len`.
    pub fn new(day: u32, individuals: Vec<Individual>) -> Result<Self, CoreError> {
        let mut counts = [0usize; 5];
        let mut isolated = 0;
        for (i, ind) in individuals.iter().enumerate() {
            if ind.id.index() != i {
                return Err(CoreError::param(
                    "individuals",
                    format!("id {} stored at position {i}", ind.id),
                ));
            }
            if !(0.0..=1.0).contains(&ind.alpha_s) || !(0.0..=1.0).contains(&ind.app_active_prob) {
                return Err(CoreError::param(
                    "individuals",
                    format!("probabilities of {} outside [0, 1]", ind.id),
                ));
            }
            counts[ind.state.slot()] += 1;
            isolated += usize::from(ind.isolated);
        }
        let initially_infected = individuals.len() - counts[HealthState::Susceptible.slot()];
        Ok(PopulationLedger {
            day,
            individuals,
            counts,
            isolated,
            initially_infected,
            cumulative_infections: 0,
        })
    }

    /// A fully susceptible population of `n` agents sharing `alpha_s` and
    /// app-usage probability `rho`.
    pub fn susceptible(n: usize, day: u32, alpha_s: f64, rho: f64) -> Result<Self, CoreError> {
        let individuals = (0..n)
            .map(|i| Individual::susceptible(AgentId(i as u32), alpha_s, rho))
            .collect();
        Self::new(day, individuals)
    }

    /// Turns a susceptible agent into a symptomatic seed whose symptoms
    /// start on the current day. The recovery clock is drawn from `tau`.
    pub fn seed_symptomatic<R: Rng + ?Sized>(
        &mut self,
        id: AgentId,
        params: &ContagionParams,
        rng: &mut R,
    ) -> Result<(), CoreError> {
        let day = self.day;
        let ind = self
            .individuals
            .get_mut(id.index())
            .ok_or(CoreError::UnknownAgent(id))?;
        if ind.state != HealthState::Susceptible {
            return Err(CoreError::param("seed", format!("{id} is not susceptible")));
        }
        ind.state = HealthState::Symptomatic;
        ind.infection_day = Some(day.saturating_sub(1));
        ind.symptom_onset_day = Some(day);
        ind.tau = Some(params.tau.sample(rng));
        self.counts[HealthState::Susceptible.slot()] -= 1;
        self.counts[HealthState::Symptomatic.slot()] += 1;
        self.initially_infected += 1;
        Ok(())
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn advance_day(&mut self) {
        self.day += 1;
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn individual(&self, id: AgentId) -> Option<&Individual> {
        self.individuals.get(id.index())
    }

    pub fn state(&self, id: AgentId) -> Option<HealthState> {
        self.individual(id).map(|i| i.state)
    }

    /// Replaces an individual's per-agent asymptomatic probability.
    pub fn set_alpha_s(&mut self, id: AgentId, alpha_s: f64) -> Result<(), CoreError> {
        if !(0.0..=1.0).contains(&alpha_s) {
            return Err(CoreError::param(
                "alpha_s",
                format!("{alpha_s} not in [0, 1]"),
            ));
        }
        self.individuals
            .get_mut(id.index())
            .ok_or(CoreError::UnknownAgent(id))?
            .alpha_s = alpha_s;
        Ok(())
    }

    /// Counts in S, A, P, Y, R order.
    pub fn counts(&self) -> [usize; 5] {
        self.counts
    }

    pub fn count(&self, state: HealthState) -> usize {
        self.counts[state.slot()]
    }

    pub fn infected_now(&self) -> usize {
        self.count(HealthState::Asymptomatic)
            + self.count(HealthState::Presymptomatic)
            + self.count(HealthState::Symptomatic)
    }

    pub fn members(&self, state: HealthState) -> Vec<AgentId> {
        self.individuals
            .iter()
            .filter(|i| i.state == state)
            .map(|i| i.id)
            .collect()
    }

    pub fn isolated_count(&self) -> usize {
        self.isolated
    }

    pub fn is_isolated(&self, id: AgentId) -> bool {
        self.individual(id).is_some_and(|i| i.isolated)
    }

    /// Agents still free to circulate, in id order.
    pub fn active(&self) -> Vec<AgentId> {
        self.individuals
            .iter()
            .filter(|i| !i.isolated)
            .map(|i| i.id)
            .collect()
    }

    pub fn isolate(&mut self, id: AgentId) -> Result<bool, CoreError> {
        let ind = self
            .individuals
            .get_mut(id.index())
            .ok_or(CoreError::UnknownAgent(id))?;
        if ind.isolated {
            return Ok(false);
        }
        ind.isolated = true;
        self.isolated += 1;
        Ok(true)
    }

    pub fn initially_infected(&self) -> usize {
        self.initially_infected
    }

    /// Infections that happened through contacts since the ledger was built.
    pub fn cumulative_infections(&self) -> usize {
        self.cumulative_infections
    }

    /// Recomputes the class counters from scratch and checks them against
    /// the cached ones and against the population size.
    pub fn check_conservation(&self) -> bool {
        let mut fresh = [0usize; 5];
        for ind in &self.individuals {
            fresh[ind.state.slot()] += 1;
        }
        fresh == self.counts && fresh.iter().sum::<usize>() == self.individuals.len()
    }

    fn move_to(&mut self, id: AgentId, next: HealthState) {
        let ind = &mut self.individuals[id.index()];
        debug_assert!(
            ind.state.can_transition_to(next),
            "{:?} -> {next:?}",
            ind.state
        );
        self.counts[ind.state.slot()] -= 1;
        self.counts[next.slot()] += 1;
        ind.state = next;
    }

    fn validate_contacts(&self, contacts: &[Contact]) -> Result<(), CoreError> {
        for c in contacts {
            if c.day != self.day {
                return Err(CoreError::DayMismatch {
                    contact_day: c.day,
                    ledger_day: self.day,
                });
            }
            for end in [c.u, c.v] {
                let ind = self.individual(end).ok_or(CoreError::UnknownAgent(end))?;
                if ind.isolated {
                    return Err(CoreError::IsolatedAgent(end));
                }
            }
        }
        Ok(())
    }
}

/// Advances the disease by one day.
///
/// Contacts are processed in the order given. An agent is infectious for a
/// contact only if it was already infected before today, so transmission
/// chains advance at most one link per day. Clock-driven transitions
/// (P→Y, A→R, Y→R) follow the contact phase. The ledger's day is not
/// advanced; callers do that once the day's policy has run.
pub fn contagion_step<R: Rng + ?Sized>(
    ledger: &mut PopulationLedger,
    contacts: &[Contact],
    params: &ContagionParams,
    rng: &mut R,
) -> Result<StepReport, CoreError> {
    ledger.validate_contacts(contacts)?;
    let today = ledger.day;
    let mut report = StepReport {
        day: today,
        ..StepReport::default()
    };

    let infectious_today = |ind: &Individual| {
        ind.state.is_infectious() && ind.infection_day.is_some_and(|d| d < today)
    };

    for c in contacts {
        let (u, v) = (
            &ledger.individuals[c.u.index()],
            &ledger.individuals[c.v.index()],
        );
        let (target, infector) = if u.state == HealthState::Susceptible && infectious_today(v) {
            (c.u, v.state)
        } else if v.state == HealthState::Susceptible && infectious_today(u) {
            (c.v, u.state)
        } else {
            continue;
        };
        let p = params.transmission(infector, c.distance, c.duration);
        if !rng.random_bool(p) {
            continue;
        }
        let alpha_s = ledger.individuals[target.index()].alpha_s;
        if rng.random_bool(alpha_s) {
            let tau = params.tau.sample(rng);
            let ind = &mut ledger.individuals[target.index()];
            ind.infection_day = Some(today);
            ind.tau = Some(tau);
            ledger.move_to(target, HealthState::Asymptomatic);
        } else {
            let epsilon = params.epsilon.sample(rng);
            let ind = &mut ledger.individuals[target.index()];
            ind.infection_day = Some(today);
            ind.epsilon = Some(epsilon);
            ledger.move_to(target, HealthState::Presymptomatic);
        }
        ledger.cumulative_infections += 1;
        report.new_infections.push(target);
    }

    for i in 0..ledger.individuals.len() {
        let id = AgentId(i as u32);
        let ind = &ledger.individuals[i];
        match ind.state {
            HealthState::Presymptomatic if ind.onset_due().is_some_and(|d| today >= d) => {
                let tau = params.tau.sample(rng);
                let ind = &mut ledger.individuals[i];
                ind.symptom_onset_day = Some(today);
                ind.tau = Some(tau);
                ledger.move_to(id, HealthState::Symptomatic);
                report.new_symptomatic.push(id);
            }
            HealthState::Asymptomatic | HealthState::Symptomatic
                if ind.recovery_day().is_some_and(|d| today >= d) =>
            {
                ledger.move_to(id, HealthState::Recovered);
                report.recovered.push(id);
            }
            _ => {}
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contagion::DayRange;
    use rand::rngs::ChaCha8Rng;
    use rand::SeedableRng;

    fn contact(u: u32, v: u32, day: u32) -> Contact {
        Contact::new(AgentId(u), AgentId(v), day, 0.5, 30.0).unwrap()
    }

    fn certain_params() -> ContagionParams {
        // beta = 1 and a huge distance scale make every exposure certain
        // up to the duration term, which saturates at r >> duration_scale.
        ContagionParams {
            beta_a: 1.0,
            beta_p: 1.0,
            beta_y: 1.0,
            distance_scale: 1e12,
            duration_scale: 1e-6,
            alpha_s: 1.0,
            tau: DayRange::new(3, 3),
            epsilon: DayRange::new(2, 2),
        }
    }

    #[test]
    fn empty_contacts_only_move_clocks() {
        let params = certain_params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ledger = PopulationLedger::susceptible(4, 1, 1.0, 1.0).unwrap();
        ledger
            .seed_symptomatic(AgentId(0), &params, &mut rng)
            .unwrap();
        let mut infections = 0;
        for _ in 0..10 {
            let r = contagion_step(&mut ledger, &[], &params, &mut rng).unwrap();
            infections += r.new_infections.len();
            ledger.advance_day();
        }
        assert_eq!(infections, 0);
        assert_eq!(ledger.count(HealthState::Recovered), 1);
        assert_eq!(ledger.count(HealthState::Susceptible), 3);
    }

    #[test]
    fn all_recovered_is_a_fixed_point() {
        let params = certain_params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let individuals: Vec<_> = (0..3)
            .map(|i| Individual {
                state: HealthState::Recovered,
                ..Individual::susceptible(AgentId(i), 0.5, 1.0)
            })
            .collect();
        let mut ledger = PopulationLedger::new(5, individuals).unwrap();
        let before = ledger.clone();
        let contacts = [contact(0, 1, 5), contact(1, 2, 5)];
        let report = contagion_step(&mut ledger, &contacts, &params, &mut rng).unwrap();
        assert_eq!(report.new_infections, vec![]);
        assert_eq!(ledger, before);
    }

    /// Hand trace: day 1 the symptomatic seed infects u with certainty,
    /// u becomes asymptomatic with tau = 3, so u recovers on day 4.
    #[test]
    fn two_agent_trace() {
        let params = certain_params();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ledger = PopulationLedger::susceptible(2, 1, 1.0, 1.0).unwrap();
        ledger
            .seed_symptomatic(AgentId(1), &params, &mut rng)
            .unwrap();

        let report = contagion_step(&mut ledger, &[contact(0, 1, 1)], &params, &mut rng).unwrap();
        assert_eq!(report.new_infections, vec![AgentId(0)]);
        assert_eq!(ledger.state(AgentId(0)), Some(HealthState::Asymptomatic));
        assert_eq!(ledger.individual(AgentId(0)).unwrap().tau, Some(3));
        ledger.advance_day();

        let mut states = vec![];
        for _ in 0..3 {
            contagion_step(&mut ledger, &[], &params, &mut rng).unwrap();
            states.push(ledger.state(AgentId(0)).unwrap());
            ledger.advance_day();
        }
        use HealthState::*;
        assert_eq!(states, vec![Asymptomatic, Asymptomatic, Recovered]);
    }

    #[test]
    fn presymptomatic_path_reaches_symptoms_then_recovery() {
        let params = ContagionParams {
            alpha_s: 0.0,
            ..certain_params()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ledger = PopulationLedger::susceptible(2, 1, 0.0, 1.0).unwrap();
        ledger
            .seed_symptomatic(AgentId(1), &params, &mut rng)
            .unwrap();
        contagion_step(&mut ledger, &[contact(0, 1, 1)], &params, &mut rng).unwrap();
        assert_eq!(ledger.state(AgentId(0)), Some(HealthState::Presymptomatic));
        ledger.advance_day();
        // epsilon = 2: onset on day 3, then tau = 3 more days -> R on day 6
        let mut onset = None;
        let mut recovered = None;
        for _ in 2..=8 {
            let r = contagion_step(&mut ledger, &[], &params, &mut rng).unwrap();
            if r.new_symptomatic.contains(&AgentId(0)) {
                onset = Some(r.day);
            }
            if r.recovered.contains(&AgentId(0)) {
                recovered = Some(r.day);
            }
            ledger.advance_day();
        }
        assert_eq!(onset, Some(3));
        assert_eq!(recovered, Some(6));
    }

    #[test]
    fn newly_infected_do_not_transmit_same_day() {
        let params = certain_params();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ledger = PopulationLedger::susceptible(3, 1, 1.0, 1.0).unwrap();
        ledger
            .seed_symptomatic(AgentId(0), &params, &mut rng)
            .unwrap();
        let contacts = [contact(0, 1, 1), contact(1, 2, 1)];
        let r = contagion_step(&mut ledger, &contacts, &params, &mut rng).unwrap();
        assert_eq!(r.new_infections, vec![AgentId(1)]);
        assert_eq!(ledger.state(AgentId(2)), Some(HealthState::Susceptible));
    }

    #[test]
    fn bad_contacts_are_rejected_without_mutation() {
        let params = certain_params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ledger = PopulationLedger::susceptible(2, 1, 1.0, 1.0).unwrap();
        ledger
            .seed_symptomatic(AgentId(0), &params, &mut rng)
            .unwrap();
        let before = ledger.clone();
        let stray = contact(0, 7, 1);
        assert_eq!(
            contagion_step(&mut ledger, &[stray], &params, &mut rng),
            Err(CoreError::UnknownAgent(AgentId(7)))
        );
        assert!(matches!(
            contagion_step(&mut ledger, &[contact(0, 1, 2)], &params, &mut rng),
            Err(CoreError::DayMismatch { .. })
        ));
        ledger.isolate(AgentId(0)).unwrap();
        assert_eq!(
            contagion_step(&mut ledger, &[contact(0, 1, 1)], &params, &mut rng),
            Err(CoreError::IsolatedAgent(AgentId(0)))
        );
        ledger.individuals[0].isolated = false;
        ledger.isolated -= 1;
        assert_eq!(ledger, before);
    }
}
