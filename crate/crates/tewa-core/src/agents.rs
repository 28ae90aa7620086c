//! Minimal BDI runtime: beliefsets, events, ranked plans and meta-level
//! plan selection, hosting the surveillance radar agent (SRA, which
//! detects jamming and runs ECCM plans) and the air-defense direction
//! center agent (ADDCA, which prioritizes threats and allocates weapons).
//!
//! Each step yields a [`TraceEntry`] recording the tick's active plans,
//! the selected plan instance and the emitted events; the eval module's
//! conflict checker consumes those traces.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::Arc;
use thiserror::Error;

use crate::fuzzy::RuleBase;
use crate::threat::{prioritize, ConflictLevel, TargetTrack, ThreatError, ThreatScore};
use crate::wta::{
    solve_exact, solve_ga, solve_greedy, AllocationMatrix, GaBudget, Solution, TargetTypeSpec,
    WeaponType, WtaError, WtaInstance,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("plan selection requires at least one candidate")]
    EmptyCandidates,
    #[error("relative difference undefined: previous status is zero")]
    ZeroBaseline,
    #[error("the radar needs a prior observation before stepping")]
    MissingBaseline,
    #[error("event kind {0:?} is not relevant to this agent")]
    UnknownEvent(EventKind),
    #[error(transparent)]
    Threat(#[from] ThreatError),
    #[error(transparent)]
    Wta(#[from] WtaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    StatusObserved,
    JammingSuspected,
    NewClusterEvent,
    NewClusterPriorityEvent,
    AllocationRequested,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::StatusObserved => "StatusObserved",
            EventKind::JammingSuspected => "JammingSuspected",
            EventKind::NewClusterEvent => "NewClusterEvent",
            EventKind::NewClusterPriorityEvent => "NewClusterPriorityEvent",
            EventKind::AllocationRequested => "AllocationRequested",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventPayload {
    StatusObserved { n_t: f64 },
    JammingSuspected { rd: f64 },
    NewCluster { track_ids: Vec<String> },
    NewClusterPriority { threats: Vec<ThreatScore> },
    AllocationRequested { solution: Solution, solver: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub tick: u64,
    pub payload: EventPayload,
}

/// Shared beliefset shape; each agent uses the facts it cares about.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Beliefset {
    /// Radar status observations, append-only within a run.
    pub status_history: Vec<f64>,
    pub jammed: bool,
    pub consecutive_jam_ticks: u32,
    /// Consecutive jammed ticks after which the radar escalates from
    /// hopping to messaging (kept here so plan contexts can read it).
    pub escalation_after: u32,
    pub cl: Option<ConflictLevel>,
    pub tracks: Vec<TargetTrack>,
    /// Weapon types with availability decremented as allocations commit.
    pub weapon_inventory: Vec<WeaponType>,
    pub target_types: Vec<TargetTypeSpec>,
    /// Set when a jamming report has been acted on (interceptor tasked).
    pub jam_reported: bool,
}

impl Beliefset {
    fn escalation_threshold(&self) -> u32 {
        self.escalation_after
    }
}

/// A plan in an agent's library: relevant event kind, context predicate
/// over the beliefset, and a base rank used when no per-instance rank
/// applies.
pub struct PlanSpec {
    pub id: &'static str,
    pub relevant_to: EventKind,
    pub context: fn(&Beliefset) -> bool,
    pub base_rank: f64,
}

/// Plans relevant to the event whose context predicate holds, in library
/// order.
pub fn applicable_plans<'a>(
    library: &'a [PlanSpec],
    beliefs: &Beliefset,
    kind: EventKind,
) -> Vec<&'a PlanSpec> {
    library
        .iter()
        .filter(|p| p.relevant_to == kind && (p.context)(beliefs))
        .collect()
}

/// One ranked plan instance competing for execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanInstance {
    pub plan: String,
    /// Instance discriminator (e.g. the target id the instance is about).
    pub instance: String,
    pub rank: f64,
}

/// Picks the maximum-rank instance; ties break toward the earliest
/// candidate in list order.
pub fn meta_select(candidates: &[PlanInstance]) -> Result<&PlanInstance, AgentError> {
    let mut best = candidates.first().ok_or(AgentError::EmptyCandidates)?;
    for c in &candidates[1..] {
        if c.rank > best.rank {
            best = c;
        }
    }
    Ok(best)
}

/// Relative difference of consecutive status observations,
/// `|(n_t - n_next) / n_t|` — the jamming indicator.
pub fn compute_rd(n_t: f64, n_next: f64) -> Result<f64, AgentError> {
    if n_t == 0.0 {
        return Err(AgentError::ZeroBaseline);
    }
    Ok(((n_t - n_next) / n_t).abs())
}

/// Per-tick record of an agent's plan state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub tick: u64,
    pub agent: String,
    /// Active flag per plan, in the agent's library order.
    pub state: Vec<(String, bool)>,
    pub selected_plan: Option<String>,
    /// Instance discriminator of the executed plan instance, when the
    /// selected plan had competing instances.
    pub selected_instance: Option<String>,
    /// Kinds of the events emitted this tick.
    pub events: Vec<EventKind>,
    /// Jam belief at the end of the tick (None when not applicable, e.g.
    /// a skipped observation or a non-radar agent).
    pub jam_belief: Option<bool>,
    /// Ranked instances that competed for selection this tick.
    pub candidates: Vec<PlanInstance>,
}

impl TraceEntry {
    pub fn plan_active(&self, plan: &str) -> bool {
        self.state.iter().any(|(id, on)| id == plan && *on)
    }
}

pub const SRA_AGENT_ID: &str = "sra";
pub const ADDCA_AGENT_ID: &str = "addca";

pub const SRA_PLANS: [&str; 4] = ["p1", "p2", "p3", "p4"];

/// Radar behavior knobs: the RD threshold above which the tick counts as
/// jammed, and how many consecutive jammed ticks escalate from frequency
/// hopping to messaging the direction center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    pub theta_jam: f64,
    pub escalate_after: u32,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            theta_jam: 0.3,
            escalate_after: 3,
        }
    }
}

/// Surveillance radar agent. Plans: p1 RadarIsNotJammed, p2 RadarIsJammed,
/// p3 SendTheMessageToADDCA, p4 FrequencyHopping.
///
/// Escalation: a fresh jam hops frequencies (p4); once the jam has
/// persisted `escalate_after` consecutive ticks despite hopping, the agent
/// messages the ADDCA (p3) instead. The contexts make p3 and p4 mutually
/// exclusive by construction.
pub struct SraAgent {
    pub beliefs: Beliefset,
    pub config: RadarConfig,
    library: [PlanSpec; 4],
    prev_p3: bool,
}

fn sra_library() -> [PlanSpec; 4] {
    [
        PlanSpec {
            id: "p1",
            relevant_to: EventKind::StatusObserved,
            context: |b| !b.jammed,
            base_rank: 1.0,
        },
        PlanSpec {
            id: "p2",
            relevant_to: EventKind::StatusObserved,
            context: |b| b.jammed,
            base_rank: 0.5,
        },
        PlanSpec {
            id: "p3",
            relevant_to: EventKind::StatusObserved,
            context: |b| b.jammed && b.consecutive_jam_ticks >= b.escalation_threshold(),
            base_rank: 0.9,
        },
        PlanSpec {
            id: "p4",
            relevant_to: EventKind::StatusObserved,
            context: |b| b.jammed && b.consecutive_jam_ticks < b.escalation_threshold(),
            base_rank: 0.8,
        },
    ]
}

impl SraAgent {
    pub fn new(config: RadarConfig) -> Self {
        let beliefs = Beliefset {
            escalation_after: config.escalate_after,
            ..Beliefset::default()
        };
        Self {
            beliefs,
            config,
            library: sra_library(),
            prev_p3: false,
        }
    }

    /// Records the first observation; RD needs two.
    pub fn prime(&mut self, n0: f64) {
        self.beliefs.status_history.push(n0);
    }

    /// Ingests one status observation and returns the tick's trace entry
    /// plus any events bound for the ADDCA. On a zero baseline the
    /// observation is still recorded and `ZeroBaseline` is returned so the
    /// caller can log a skipped tick.
    pub fn step(&mut self, tick: u64, n_t: f64) -> Result<(TraceEntry, Vec<Event>), AgentError> {
        let prev = *self
            .beliefs
            .status_history
            .last()
            .ok_or(AgentError::MissingBaseline)?;
        self.beliefs.status_history.push(n_t);
        let rd = compute_rd(prev, n_t)?;

        let jammed = rd > self.config.theta_jam;
        self.beliefs.jammed = jammed;
        self.beliefs.consecutive_jam_ticks = if jammed {
            self.beliefs.consecutive_jam_ticks + 1
        } else {
            0
        };

        let active = applicable_plans(&self.library, &self.beliefs, EventKind::StatusObserved);
        let candidates: Vec<PlanInstance> = active
            .iter()
            .map(|p| PlanInstance {
                plan: p.id.to_string(),
                instance: p.id.to_string(),
                rank: p.base_rank,
            })
            .collect();
        let selected = meta_select(&candidates)?.clone();

        let p3_active = active.iter().any(|p| p.id == "p3");
        let mut events = Vec::new();
        if p3_active && !self.prev_p3 {
            // One message per sustained jam: emit on the rising edge only.
            events.push(Event {
                kind: EventKind::JammingSuspected,
                tick,
                payload: EventPayload::JammingSuspected { rd },
            });
        }
        self.prev_p3 = p3_active;

        let entry = TraceEntry {
            tick,
            agent: SRA_AGENT_ID.to_string(),
            state: SRA_PLANS
                .iter()
                .map(|id| (id.to_string(), active.iter().any(|p| p.id == *id)))
                .collect(),
            selected_plan: Some(selected.plan.clone()),
            selected_instance: Some(selected.instance),
            events: events.iter().map(|e| e.kind).collect(),
            jam_belief: Some(jammed),
            candidates,
        };
        Ok((entry, events))
    }

    /// Trace entry for a tick whose RD was undefined (zero baseline): no
    /// plan is pursued and the jam belief is left unannotated.
    pub fn skipped_entry(&self, tick: u64) -> TraceEntry {
        TraceEntry {
            tick,
            agent: SRA_AGENT_ID.to_string(),
            state: SRA_PLANS.iter().map(|id| (id.to_string(), false)).collect(),
            selected_plan: None,
            selected_instance: None,
            events: Vec::new(),
            jam_belief: None,
            candidates: Vec::new(),
        }
    }
}

pub const ADDCA_PLANS: [&str; 3] = ["p1", "p2", "p3"];

/// Which solver the direction center runs when allocating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolverChoice {
    Exact,
    Greedy,
    Ga { budget: GaBudget },
}

/// Air-defense direction center agent. Plans: p1 NewClusterPlans,
/// p2 NewClusterPriorityPlans, p3 RedAircraftInterceptorPlans.
///
/// Plan instances are ranked by the fuzzy threat score of their target;
/// exactly one instance — the maximum-rank one — executes per event.
pub struct AddcaAgent {
    pub beliefs: Beliefset,
    rulebase: Arc<RuleBase>,
    solver: SolverChoice,
    solver_seed: u64,
    queue: VecDeque<Event>,
    library: [PlanSpec; 3],
}

fn addca_library() -> [PlanSpec; 3] {
    [
        PlanSpec {
            id: "p1",
            relevant_to: EventKind::NewClusterEvent,
            context: |b| !b.tracks.is_empty(),
            base_rank: 1.0,
        },
        PlanSpec {
            id: "p2",
            relevant_to: EventKind::NewClusterPriorityEvent,
            context: |_| true,
            base_rank: 1.0,
        },
        PlanSpec {
            id: "p3",
            relevant_to: EventKind::JammingSuspected,
            context: |_| true,
            base_rank: 1.0,
        },
    ]
}

impl AddcaAgent {
    pub fn new(
        rulebase: Arc<RuleBase>,
        cl: ConflictLevel,
        weapons: Vec<WeaponType>,
        solver: SolverChoice,
        solver_seed: u64,
    ) -> Self {
        let beliefs = Beliefset {
            cl: Some(cl),
            weapon_inventory: weapons,
            ..Beliefset::default()
        };
        Self {
            beliefs,
            rulebase,
            solver,
            solver_seed,
            queue: VecDeque::new(),
            library: addca_library(),
        }
    }

    pub fn rulebase(&self) -> &RuleBase {
        &self.rulebase
    }

    /// Queues an event for a later tick (per-agent FIFO, one per tick).
    pub fn post(&mut self, event: Event) {
        self.queue.push_back(event);
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Processes at most one queued event for this tick.
    pub fn step_queued(&mut self, tick: u64) -> Result<(TraceEntry, Vec<Event>), AgentError> {
        match self.queue.pop_front() {
            Some(event) => self.step(tick, &event),
            None => Ok((self.idle_entry(tick), Vec::new())),
        }
    }

    pub fn idle_entry(&self, tick: u64) -> TraceEntry {
        TraceEntry {
            tick,
            agent: ADDCA_AGENT_ID.to_string(),
            state: ADDCA_PLANS
                .iter()
                .map(|id| (id.to_string(), false))
                .collect(),
            selected_plan: None,
            selected_instance: None,
            events: Vec::new(),
            jam_belief: None,
            candidates: Vec::new(),
        }
    }

    /// Handles one event: NewClusterEvent prioritizes and posts the
    /// priority event; NewClusterPriorityEvent solves the allocation,
    /// commits weapon availability and emits the allocation; a jamming
    /// message tasks the interceptor plan.
    pub fn step(&mut self, tick: u64, event: &Event) -> Result<(TraceEntry, Vec<Event>), AgentError> {
        let active = applicable_plans(&self.library, &self.beliefs, event.kind);
        if active.is_empty() {
            return Err(AgentError::UnknownEvent(event.kind));
        }
        let plan_id = active[0].id;

        let mut events = Vec::new();
        let (candidates, selected_instance) = match (plan_id, &event.payload) {
            ("p1", _) => {
                let cl = self.beliefs.cl.expect("addca beliefs carry a CL");
                let threats = prioritize(&self.beliefs.tracks, cl, &self.rulebase)?;
                let candidates: Vec<PlanInstance> = threats
                    .iter()
                    .map(|t| PlanInstance {
                        plan: plan_id.to_string(),
                        instance: t.target_id.clone(),
                        rank: t.score,
                    })
                    .collect();
                let selected = meta_select(&candidates)?.instance.clone();
                events.push(Event {
                    kind: EventKind::NewClusterPriorityEvent,
                    tick,
                    payload: EventPayload::NewClusterPriority { threats },
                });
                (candidates, selected)
            }
            ("p2", EventPayload::NewClusterPriority { threats }) => {
                let candidates: Vec<PlanInstance> = threats
                    .iter()
                    .map(|t| PlanInstance {
                        plan: plan_id.to_string(),
                        instance: t.target_id.clone(),
                        rank: t.score,
                    })
                    .collect();
                let selected = meta_select(&candidates)?.instance.clone();
                let (solution, solver_name) = self.allocate()?;
                events.push(Event {
                    kind: EventKind::AllocationRequested,
                    tick,
                    payload: EventPayload::AllocationRequested {
                        solution,
                        solver: solver_name,
                    },
                });
                (candidates, selected)
            }
            ("p3", _) => {
                self.beliefs.jam_reported = true;
                let candidates = vec![PlanInstance {
                    plan: plan_id.to_string(),
                    instance: "interceptor".to_string(),
                    rank: active[0].base_rank,
                }];
                (candidates, "interceptor".to_string())
            }
            _ => return Err(AgentError::UnknownEvent(event.kind)),
        };

        let entry = TraceEntry {
            tick,
            agent: ADDCA_AGENT_ID.to_string(),
            state: ADDCA_PLANS
                .iter()
                .map(|id| (id.to_string(), *id == plan_id))
                .collect(),
            selected_plan: Some(plan_id.to_string()),
            selected_instance: Some(selected_instance),
            events: events.iter().map(|e| e.kind).collect(),
            jam_belief: None,
            candidates,
        };
        Ok((entry, events))
    }

    /// Solves the allocation over the current target-type counts with the
    /// currently available inventory, then commits the consumption so no
    /// weapon unit can appear in two allocations.
    fn allocate(&mut self) -> Result<(Solution, String), AgentError> {
        let instance = WtaInstance::new(
            self.beliefs.weapon_inventory.clone(),
            self.beliefs.target_types.clone(),
        )?;
        let (solution, name) = match self.solver {
            SolverChoice::Exact => (solve_exact(&instance)?, "exact".to_string()),
            SolverChoice::Greedy => (solve_greedy(&instance), "greedy".to_string()),
            SolverChoice::Ga { budget } => (
                solve_ga(&instance, budget, self.solver_seed),
                "ga".to_string(),
            ),
        };
        for (w, weapon) in self.beliefs.weapon_inventory.iter_mut().enumerate() {
            let consumed: u64 = solution.allocation.y[w]
                .iter()
                .zip(&weapon.salvo)
                .map(|(&units, &n)| units as u64 * n as u64)
                .sum();
            weapon.inventory -= consumed as u32;
        }
        Ok((solution, name))
    }
}

/// Consumption of one allocation per weapon index (units times salvo).
pub fn allocation_consumption(weapons: &[WeaponType], y: &AllocationMatrix) -> Vec<u64> {
    weapons
        .iter()
        .enumerate()
        .map(|(w, weapon)| {
            y.y[w]
                .iter()
                .zip(&weapon.salvo)
                .map(|(&units, &n)| units as u64 * n as u64)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threat::{threat_rulebase, IffStatus, Lethality};

    fn steady_then_spiked(sra: &mut SraAgent, spikes: &[f64]) -> Vec<TraceEntry> {
        sra.prime(20.0);
        let mut entries = Vec::new();
        for (i, &n) in spikes.iter().enumerate() {
            let (entry, _) = sra.step(i as u64 + 1, n).unwrap();
            entries.push(entry);
        }
        entries
    }

    #[test]
    fn rd_examples() {
        assert_eq!(compute_rd(20.0, 20.0).unwrap(), 0.0);
        assert_eq!(compute_rd(20.0, 30.0).unwrap(), 0.5);
        assert_eq!(compute_rd(10.0, 0.0).unwrap(), 1.0);
        assert_eq!(compute_rd(0.0, 5.0).unwrap_err(), AgentError::ZeroBaseline);
    }

    #[test]
    fn meta_select_argmax_and_tie_break() {
        let inst = |i: &str, r: f64| PlanInstance {
            plan: "p".into(),
            instance: i.into(),
            rank: r,
        };
        let c = vec![inst("a", 0.2), inst("b", 0.9), inst("c", 0.5)];
        assert_eq!(meta_select(&c).unwrap().instance, "b");
        let tie = vec![inst("first", 0.5), inst("second", 0.5)];
        assert_eq!(meta_select(&tie).unwrap().instance, "first");
        let single = vec![inst("only", 0.1)];
        assert_eq!(meta_select(&single).unwrap().instance, "only");
        assert_eq!(meta_select(&[]).unwrap_err(), AgentError::EmptyCandidates);
    }

    #[test]
    fn applicable_plans_filters_by_event_and_context() {
        let sra = SraAgent::new(RadarConfig::default());
        // no plan is relevant to an allocation event
        assert!(applicable_plans(
            &sra.library,
            &sra.beliefs,
            EventKind::AllocationRequested
        )
        .is_empty());
        // not jammed: only p1 passes context
        let plans = applicable_plans(&sra.library, &sra.beliefs, EventKind::StatusObserved);
        assert_eq!(plans.iter().map(|p| p.id).collect::<Vec<_>>(), vec!["p1"]);
    }

    #[test]
    fn quiet_stream_stays_on_p1() {
        let mut sra = SraAgent::new(RadarConfig::default());
        let entries = steady_then_spiked(&mut sra, &[20.0, 20.0, 20.0, 20.0]);
        for e in entries {
            assert!(e.plan_active("p1"));
            assert!(!e.plan_active("p2") && !e.plan_active("p3") && !e.plan_active("p4"));
            assert_eq!(e.selected_plan.as_deref(), Some("p1"));
        }
    }

    #[test]
    fn fresh_jam_hops_first() {
        let mut sra = SraAgent::new(RadarConfig::default());
        let entries = steady_then_spiked(&mut sra, &[40.0]);
        let e = &entries[0];
        let vector: Vec<bool> = e.state.iter().map(|(_, on)| *on).collect();
        assert_eq!(vector, vec![false, true, false, true]);
        assert_eq!(e.selected_plan.as_deref(), Some("p4"));
        assert!(e.events.is_empty());
    }

    #[test]
    fn sustained_jam_escalates_to_message() {
        let mut sra = SraAgent::new(RadarConfig::default());
        sra.prime(20.0);
        // alternating 20/40 keeps RD = 0.5 or 1.0, always above 0.3
        let stream = [40.0, 20.0, 40.0, 20.0, 40.0];
        let mut message_events = 0;
        let mut vectors = Vec::new();
        for (i, &n) in stream.iter().enumerate() {
            let (entry, events) = sra.step(i as u64 + 1, n).unwrap();
            message_events += events
                .iter()
                .filter(|e| e.kind == EventKind::JammingSuspected)
                .count();
            vectors.push(entry.state.iter().map(|(_, on)| *on).collect::<Vec<_>>());
        }
        assert_eq!(vectors[0], vec![false, true, false, true]);
        assert_eq!(vectors[1], vec![false, true, false, true]);
        // third consecutive jammed tick: message instead of hop
        assert_eq!(vectors[2], vec![false, true, true, false]);
        assert_eq!(vectors[3], vec![false, true, true, false]);
        // one sustained jam, one message (rising edge only)
        assert_eq!(message_events, 1);
    }

    #[test]
    fn conflict_pairs_never_coactive() {
        let mut sra = SraAgent::new(RadarConfig::default());
        sra.prime(20.0);
        let stream = [
            20.0, 40.0, 18.0, 18.0, 50.0, 12.0, 40.0, 40.0, 40.0, 9.0, 20.0, 21.0,
        ];
        for (i, &n) in stream.iter().enumerate() {
            let (e, _) = sra.step(i as u64 + 1, n).unwrap();
            let p = |id: &str| e.plan_active(id);
            assert!(!(p("p1") && p("p2")));
            assert!(!(p("p3") && p("p4")));
            assert!(!(p("p3") && p("p1")));
            assert!(!(p("p4") && p("p1")));
            // jammed implies p2 plus exactly one response
            if e.jam_belief == Some(true) {
                assert!(p("p2") && !p("p1"));
                assert!(p("p3") ^ p("p4"));
            } else {
                assert!(p("p1") && !p("p2") && !p("p3") && !p("p4"));
            }
        }
    }

    #[test]
    fn zero_baseline_is_reported_and_recovers() {
        let mut sra = SraAgent::new(RadarConfig::default());
        sra.prime(0.0);
        assert_eq!(sra.step(1, 20.0).unwrap_err(), AgentError::ZeroBaseline);
        // the observation was still recorded; the next tick works
        let (e, _) = sra.step(2, 20.0).unwrap();
        assert!(e.plan_active("p1"));
    }

    fn test_track(id: &str, range: f64, mach: f64) -> TargetTrack {
        let mut ev = [0.0; 10];
        ev[0] = 0.5;
        ev[8] = 0.5;
        TargetTrack {
            id: id.into(),
            range_km: range,
            velocity_mach: mach,
            altitude_km: 2.0,
            aoa_deg: 60.0,
            lethality: Lethality::Lethal,
            intent_evidence: ev,
            iff: IffStatus::Suspect,
        }
    }

    fn test_addca(weapons: Vec<WeaponType>) -> AddcaAgent {
        AddcaAgent::new(
            Arc::new(threat_rulebase()),
            ConflictLevel::new(0.7).unwrap(),
            weapons,
            SolverChoice::Exact,
            11,
        )
    }

    fn one_weapon() -> Vec<WeaponType> {
        vec![WeaponType {
            id: "sam".into(),
            inventory: 4,
            salvo: vec![1],
            kill_prob: vec![0.8],
        }]
    }

    #[test]
    fn cluster_event_produces_priorities_then_allocation() {
        let mut addca = test_addca(one_weapon());
        addca.beliefs.tracks = vec![test_track("far", 180.0, 0.7), test_track("near", 30.0, 2.0)];
        addca.beliefs.target_types = vec![TargetTypeSpec {
            id: "fighter".into(),
            count: 2,
            value: 5.0,
        }];

        let cluster = Event {
            kind: EventKind::NewClusterEvent,
            tick: 3,
            payload: EventPayload::NewCluster {
                track_ids: vec!["far".into(), "near".into()],
            },
        };
        let (entry, events) = addca.step(3, &cluster).unwrap();
        assert!(entry.plan_active("p1"));
        assert_eq!(entry.selected_instance.as_deref(), Some("near"));
        assert_eq!(events.len(), 1);
        let EventPayload::NewClusterPriority { threats } = &events[0].payload else {
            panic!("expected a priority event");
        };
        assert_eq!(threats[0].target_id, "near");
        assert_eq!(threats[0].rank, 1);

        let (entry, out) = addca.step(4, &events[0]).unwrap();
        assert!(entry.plan_active("p2"));
        let EventPayload::AllocationRequested { solution, solver } = &out[0].payload else {
            panic!("expected an allocation event");
        };
        assert_eq!(solver, "exact");
        assert_eq!(solution.allocation.y, vec![vec![2]]);
        // availability committed
        assert_eq!(addca.beliefs.weapon_inventory[0].inventory, 2);
    }

    #[test]
    fn zero_inventory_allocates_nothing() {
        let mut addca = test_addca(vec![WeaponType {
            id: "sam".into(),
            inventory: 0,
            salvo: vec![1],
            kill_prob: vec![0.8],
        }]);
        addca.beliefs.target_types = vec![TargetTypeSpec {
            id: "fighter".into(),
            count: 3,
            value: 5.0,
        }];
        let event = Event {
            kind: EventKind::NewClusterPriorityEvent,
            tick: 1,
            payload: EventPayload::NewClusterPriority {
                threats: vec![ThreatScore {
                    target_id: "t".into(),
                    score: 0.8,
                    rank: 1,
                }],
            },
        };
        let (_, out) = addca.step(1, &event).unwrap();
        let EventPayload::AllocationRequested { solution, .. } = &out[0].payload else {
            panic!("expected an allocation event");
        };
        assert_eq!(solution.allocation.y, vec![vec![0]]);
        assert_eq!(solution.tvd, 0.0);
    }

    #[test]
    fn jamming_message_tasks_interceptor_plan() {
        let mut addca = test_addca(one_weapon());
        let event = Event {
            kind: EventKind::JammingSuspected,
            tick: 9,
            payload: EventPayload::JammingSuspected { rd: 0.9 },
        };
        let (entry, out) = addca.step(9, &event).unwrap();
        assert!(entry.plan_active("p3"));
        assert!(out.is_empty());
        assert!(addca.beliefs.jam_reported);
    }

    #[test]
    fn unknown_event_is_rejected() {
        let mut addca = test_addca(one_weapon());
        let event = Event {
            kind: EventKind::AllocationRequested,
            tick: 1,
            payload: EventPayload::StatusObserved { n_t: 20.0 },
        };
        assert!(matches!(
            addca.step(1, &event),
            Err(AgentError::UnknownEvent(_))
        ));
    }

    #[test]
    fn queued_events_process_one_per_tick() {
        let mut addca = test_addca(one_weapon());
        addca.beliefs.tracks = vec![test_track("a", 50.0, 1.5)];
        addca.beliefs.target_types = vec![TargetTypeSpec {
            id: "fighter".into(),
            count: 1,
            value: 5.0,
        }];
        addca.post(Event {
            kind: EventKind::NewClusterEvent,
            tick: 1,
            payload: EventPayload::NewCluster {
                track_ids: vec!["a".into()],
            },
        });
        let (e1, out) = addca.step_queued(1).unwrap();
        assert!(e1.plan_active("p1"));
        for ev in out {
            addca.post(ev);
        }
        let (e2, _) = addca.step_queued(2).unwrap();
        assert!(e2.plan_active("p2"));
        let (idle, _) = addca.step_queued(3).unwrap();
        assert_eq!(idle.selected_plan, None);
    }
}
