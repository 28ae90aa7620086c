//! Propositional conflict checking over plan-state traces: forbidden plan
//! combinations (optionally guarded by the jam belief), the written-out
//! belief/state consistency rules, and the max-rank selection rule.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::EvalError;
use crate::agents::TraceEntry;

/// Guard on the entry's recorded jam belief. Entries without a belief
/// annotation never satisfy a guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JamGuard {
    pub jammed: bool,
}

/// A set of plans that must never be simultaneously active (while the
/// guard, if any, holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictRule {
    pub name: String,
    pub forbidden: Vec<String>,
    pub guard: Option<JamGuard>,
}

impl ConflictRule {
    pub fn new(
        name: impl Into<String>,
        forbidden: Vec<String>,
        guard: Option<JamGuard>,
    ) -> Result<Self, EvalError> {
        let name = name.into();
        if forbidden.len() < 2 {
            return Err(EvalError::InvalidRule(name));
        }
        Ok(Self {
            name,
            forbidden,
            guard,
        })
    }

    pub fn pair(a: &str, b: &str) -> Self {
        Self {
            name: format!("{a}&{b}"),
            forbidden: vec![a.to_string(), b.to_string()],
            guard: None,
        }
    }
}

/// The standard rule set for the surveillance radar agent's four plans:
/// message-vs-hop, jammed-vs-clear, and each response plan against the
/// all-clear plan.
pub fn sra_conflict_rules() -> Vec<ConflictRule> {
    vec![
        ConflictRule::pair("p3", "p4"),
        ConflictRule::pair("p1", "p2"),
        ConflictRule::pair("p3", "p1"),
        ConflictRule::pair("p4", "p1"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictHit {
    pub tick: u64,
    pub agent: String,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub total_ticks: usize,
    pub conflicts: Vec<ConflictHit>,
    pub clean: bool,
}

/// Scans a trace for conflicts. Beyond the supplied forbidden-set rules,
/// every entry carrying a jam-belief annotation is checked against the
/// belief/state consistency rules (eq5: jammed implies not-p1 and some
/// response; eq6: clear implies exactly p1; eq7: p2 without a jam belief
/// implies p3 or p4), and every entry with recorded candidates is checked
/// for max-rank selection (eq8-10).
pub fn check_trace_conflicts(
    trace: &[TraceEntry],
    rules: &[ConflictRule],
) -> Result<TraceReport, EvalError> {
    let mut seen: BTreeSet<(u64, &str)> = BTreeSet::new();
    let mut last_tick_per_agent: Vec<(&str, u64)> = Vec::new();
    for entry in trace {
        if !seen.insert((entry.tick, entry.agent.as_str())) {
            return Err(EvalError::MalformedTrace(format!(
                "duplicate entry for tick {} agent {}",
                entry.tick, entry.agent
            )));
        }
        match last_tick_per_agent
            .iter_mut()
            .find(|(agent, _)| *agent == entry.agent)
        {
            Some((_, last)) => {
                if entry.tick < *last {
                    return Err(EvalError::MalformedTrace(format!(
                        "ticks of agent {} go backwards at {}",
                        entry.agent, entry.tick
                    )));
                }
                *last = entry.tick;
            }
            None => last_tick_per_agent.push((entry.agent.as_str(), entry.tick)),
        }
    }

    let mut conflicts = Vec::new();
    for entry in trace {
        let active = |plan: &str| entry.plan_active(plan);

        for rule in rules {
            let guard_holds = match rule.guard {
                None => true,
                Some(g) => entry.jam_belief == Some(g.jammed),
            };
            if guard_holds && rule.forbidden.iter().all(|p| active(p)) {
                conflicts.push(ConflictHit {
                    tick: entry.tick,
                    agent: entry.agent.clone(),
                    rule: rule.name.clone(),
                });
            }
        }

        match entry.jam_belief {
            Some(true) => {
                if active("p1") || !(active("p2") || active("p3") || active("p4")) {
                    conflicts.push(ConflictHit {
                        tick: entry.tick,
                        agent: entry.agent.clone(),
                        rule: "eq5".to_string(),
                    });
                }
            }
            Some(false) => {
                if !active("p1") || active("p2") || active("p3") || active("p4") {
                    conflicts.push(ConflictHit {
                        tick: entry.tick,
                        agent: entry.agent.clone(),
                        rule: "eq6".to_string(),
                    });
                }
                if active("p2") && !(active("p3") || active("p4")) {
                    conflicts.push(ConflictHit {
                        tick: entry.tick,
                        agent: entry.agent.clone(),
                        rule: "eq7".to_string(),
                    });
                }
            }
            None => {}
        }

        if !entry.candidates.is_empty() {
            if let Some(selected) = &entry.selected_instance {
                let mut best = &entry.candidates[0];
                for c in &entry.candidates[1..] {
                    if c.rank > best.rank {
                        best = c;
                    }
                }
                if &best.instance != selected {
                    conflicts.push(ConflictHit {
                        tick: entry.tick,
                        agent: entry.agent.clone(),
                        rule: "eq8-10".to_string(),
                    });
                }
            }
        }
    }

    let total_ticks = seen
        .iter()
        .map(|(tick, _)| *tick)
        .collect::<BTreeSet<_>>()
        .len();
    Ok(TraceReport {
        total_ticks,
        clean: conflicts.is_empty(),
        conflicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::PlanInstance;

    fn entry(tick: u64, flags: [bool; 4], jam: Option<bool>) -> TraceEntry {
        TraceEntry {
            tick,
            agent: "sra".into(),
            state: ["p1", "p2", "p3", "p4"]
                .iter()
                .zip(flags)
                .map(|(id, on)| (id.to_string(), on))
                .collect(),
            selected_plan: None,
            selected_instance: None,
            events: Vec::new(),
            jam_belief: jam,
            candidates: Vec::new(),
        }
    }

    #[test]
    fn clean_trace_reports_clean() {
        let trace = vec![
            entry(1, [true, false, false, false], Some(false)),
            entry(2, [false, true, false, true], Some(true)),
            entry(3, [false, true, true, false], Some(true)),
        ];
        // the third entry only passes eq5 with a consecutive streak >= k,
        // which is what the running agent produces
        let report = check_trace_conflicts(&trace, &sra_conflict_rules()).unwrap();
        assert!(report.clean, "unexpected conflicts: {:?}", report.conflicts);
        assert_eq!(report.total_ticks, 3);
    }

    #[test]
    fn message_and_hop_together_is_flagged_at_the_tick() {
        let trace = vec![
            entry(4, [true, false, false, false], Some(false)),
            entry(5, [false, true, true, true], Some(true)),
        ];
        let report = check_trace_conflicts(&trace, &sra_conflict_rules()).unwrap();
        assert!(!report.clean);
        assert_eq!(report.conflicts.len(), 1);
        assert_eq!(report.conflicts[0].tick, 5);
        assert_eq!(report.conflicts[0].rule, "p3&p4");
    }

    #[test]
    fn jammed_and_clear_together_is_flagged() {
        let trace = vec![entry(1, [true, true, false, false], None)];
        let report = check_trace_conflicts(&trace, &sra_conflict_rules()).unwrap();
        assert_eq!(report.conflicts.len(), 1);
        assert_eq!(report.conflicts[0].rule, "p1&p2");
    }

    #[test]
    fn belief_state_rules_check_as_written() {
        // jammed but pursuing p1: eq5 (and the p-pair rules see nothing)
        let trace = vec![entry(1, [true, false, false, false], Some(true))];
        let report = check_trace_conflicts(&trace, &[]).unwrap();
        assert_eq!(report.conflicts[0].rule, "eq5");

        // clear but p2 active without any response: eq6 and eq7
        let trace = vec![entry(1, [true, true, false, false], Some(false))];
        let report = check_trace_conflicts(&trace, &[]).unwrap();
        let rules: Vec<&str> = report.conflicts.iter().map(|c| c.rule.as_str()).collect();
        assert_eq!(rules, vec!["eq6", "eq7"]);
    }

    #[test]
    fn guarded_rule_skips_unannotated_entries() {
        let rule = ConflictRule::new(
            "p1-under-jam",
            vec!["p1".into(), "p4".into()],
            Some(JamGuard { jammed: true }),
        )
        .unwrap();
        let unannotated = vec![entry(1, [true, false, false, true], None)];
        let report = check_trace_conflicts(&unannotated, &[rule.clone()]).unwrap();
        assert!(report.clean);
        let annotated = vec![entry(1, [true, false, false, true], Some(true))];
        let report = check_trace_conflicts(&annotated, &[rule]).unwrap();
        assert!(!report.clean);
    }

    #[test]
    fn non_argmax_selection_is_flagged() {
        let mut e = entry(7, [true, false, false, false], None);
        e.candidates = vec![
            PlanInstance {
                plan: "p1".into(),
                instance: "a".into(),
                rank: 0.3,
            },
            PlanInstance {
                plan: "p1".into(),
                instance: "b".into(),
                rank: 0.9,
            },
        ];
        e.selected_instance = Some("a".into());
        let report = check_trace_conflicts(&[e], &[]).unwrap();
        assert_eq!(report.conflicts[0].rule, "eq8-10");
    }

    #[test]
    fn duplicate_and_backwards_entries_are_malformed() {
        let trace = vec![
            entry(1, [true, false, false, false], None),
            entry(1, [true, false, false, false], None),
        ];
        assert!(matches!(
            check_trace_conflicts(&trace, &[]),
            Err(EvalError::MalformedTrace(_))
        ));
        let trace = vec![
            entry(2, [true, false, false, false], None),
            entry(1, [true, false, false, false], None),
        ];
        assert!(matches!(
            check_trace_conflicts(&trace, &[]),
            Err(EvalError::MalformedTrace(_))
        ));
    }

    #[test]
    fn checking_is_monotone_in_the_trace() {
        let bad = entry(5, [false, true, true, true], Some(true));
        let mut trace = vec![
            entry(1, [true, false, false, false], Some(false)),
            bad,
        ];
        let before = check_trace_conflicts(&trace, &sra_conflict_rules()).unwrap();
        trace.push(entry(6, [true, false, false, false], Some(false)));
        trace.push(entry(7, [false, true, false, true], Some(true)));
        let after = check_trace_conflicts(&trace, &sra_conflict_rules()).unwrap();
        for hit in &before.conflicts {
            assert!(after.conflicts.contains(hit));
        }
    }

    #[test]
    fn rules_need_two_members() {
        assert!(matches!(
            ConflictRule::new("solo", vec!["p1".into()], None),
            Err(EvalError::InvalidRule(_))
        ));
    }
}
