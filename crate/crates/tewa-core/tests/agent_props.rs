//! Property tests over the agent runtime: randomized radar streams never
//! produce conflicting plan states, and solver outputs stay feasible on
//! randomized instances.

use proptest::prelude::*;

use tewa_core::agents::{RadarConfig, SraAgent};
use tewa_core::eval::{check_trace_conflicts, sra_conflict_rules};
use tewa_core::wta::{feasible, solve_ga, solve_greedy, GaBudget, TargetTypeSpec, WeaponType, WtaInstance};

proptest! {
    #[test]
    fn sra_traces_stay_conflict_free(stream in prop::collection::vec(1.0..60.0f64, 2..80)) {
        let mut sra = SraAgent::new(RadarConfig::default());
        sra.prime(stream[0]);
        let mut trace = Vec::new();
        for (i, &n) in stream[1..].iter().enumerate() {
            let (entry, _) = sra.step(i as u64 + 1, n).unwrap();
            trace.push(entry);
        }
        let report = check_trace_conflicts(&trace, &sra_conflict_rules()).unwrap();
        prop_assert!(report.clean, "conflicts: {:?}", report.conflicts);
    }

    #[test]
    fn randomized_instances_keep_solvers_feasible(
        seed in 0u64..500,
        inventories in prop::collection::vec(0u32..6, 1..3),
        counts in prop::collection::vec(0u32..6, 1..3),
    ) {
        let weapons: Vec<WeaponType> = inventories.iter().enumerate().map(|(w, &ni)| WeaponType {
            id: format!("w{w}"),
            inventory: ni,
            salvo: counts.iter().map(|_| 1 + (w as u32 % 2)).collect(),
            kill_prob: counts.iter().map(|&c| ((c + 1) as f64 / 7.0).min(1.0)).collect(),
        }).collect();
        let targets: Vec<TargetTypeSpec> = counts.iter().enumerate().map(|(s, &c)| TargetTypeSpec {
            id: format!("s{s}"),
            count: c,
            value: (s + 1) as f64,
        }).collect();
        let instance = WtaInstance::new(weapons, targets).unwrap();
        let greedy = solve_greedy(&instance);
        prop_assert!(feasible(&instance, &greedy.allocation).unwrap().0);
        let ga = solve_ga(&instance, GaBudget::Generations(20), seed);
        prop_assert!(feasible(&instance, &ga.allocation).unwrap().0);
        prop_assert!(ga.tvd >= greedy.tvd - 1e-12);
    }
}
