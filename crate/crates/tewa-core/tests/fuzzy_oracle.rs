//! Cross-checks the inference engine against an independently written
//! reference Mamdani evaluator on randomized inputs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tewa_core::fuzzy::{Membership, RuleBase, VarInput};
use tewa_core::threat::{
    assess_threat, fuzzy_inputs, threat_rulebase, ConflictLevel, IffStatus, Lethality,
    TargetTrack,
};

/// Reference trapezoid grade via the min/max composition form, written
/// separately from the engine's piecewise branches.
fn oracle_trapezoid_grade(bp: (f64, f64, f64, f64), x: f64) -> f64 {
    let (a, b, c, d) = bp;
    let rising = if a == f64::NEG_INFINITY {
        f64::INFINITY
    } else if x <= a {
        0.0
    } else {
        (x - a) / (b - a)
    };
    let falling = if d == f64::INFINITY {
        f64::INFINITY
    } else if x >= d {
        0.0
    } else {
        (d - x) / (d - c)
    };
    let _ = (b, c);
    rising.min(falling).clamp(0.0, 1.0)
}

/// Reference Mamdani evaluation: grade every label, take rule products,
/// average consequent representatives by firing strength.
fn oracle_infer(rb: &RuleBase, inputs: &[VarInput]) -> Option<f64> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for rule in &rb.rules {
        let mut strength = 1.0;
        for (var, (&label_idx, input)) in rb
            .variables
            .iter()
            .zip(rule.antecedent.iter().zip(inputs))
        {
            let label = &var.labels[label_idx];
            let grade = match (&label.membership, input) {
                (Membership::Trapezoid(t), VarInput::Crisp(x)) => {
                    oracle_trapezoid_grade(t.breakpoints(), *x)
                }
                (Membership::Classes(members), VarInput::ClassGrades(grades)) => {
                    // locate this label's members in the flattened class list
                    let classes = var.class_names();
                    members
                        .iter()
                        .map(|m| {
                            let pos = classes.iter().position(|c| c == m).unwrap();
                            grades[pos]
                        })
                        .fold(0.0f64, f64::max)
                }
                _ => panic!("input form does not match the variable"),
            };
            strength *= grade;
        }
        let rep = rb
            .outputs
            .iter()
            .find(|o| o.name == rule.consequent)
            .unwrap()
            .representative;
        numerator += strength * rep;
        denominator += strength;
    }
    (denominator > 0.0).then(|| numerator / denominator)
}

fn random_inputs(rng: &mut ChaCha8Rng) -> Vec<VarInput> {
    let mut lethality = vec![0.0; 3];
    lethality[rng.random_range(0..3)] = 1.0;
    let intent: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
    vec![
        VarInput::Crisp(rng.random_range(0.0..300.0)),
        VarInput::Crisp(rng.random_range(0.0..3.0)),
        VarInput::Crisp(rng.random_range(0.0..15.0)),
        VarInput::Crisp(rng.random_range(0.0..90.0)),
        VarInput::ClassGrades(lethality),
        VarInput::ClassGrades(intent),
    ]
}

#[test]
fn infer_matches_reference_on_1000_random_vectors() {
    let rb = threat_rulebase();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let started = std::time::Instant::now();
    for i in 0..1000 {
        let inputs = random_inputs(&mut rng);
        let engine = rb.infer(&inputs).expect("coverage makes inference total");
        let reference = oracle_infer(&rb, &inputs).expect("reference fired");
        assert!(
            (engine - reference).abs() <= 1e-9,
            "vector {i}: engine {engine} vs reference {reference}"
        );
    }
    assert!(
        started.elapsed().as_secs_f64() < 5.0,
        "1000 inferences took {:?}",
        started.elapsed()
    );
}

#[test]
fn assess_threat_matches_reference_on_a_mixed_track() {
    let rb = threat_rulebase();
    let mut evidence = [0.0; 10];
    evidence[0] = 0.5; // Strike
    evidence[7] = 0.5; // Escort
    let track = TargetTrack {
        id: "mixed".into(),
        range_km: 120.0,
        velocity_mach: 1.0,
        altitude_km: 5.0,
        aoa_deg: 40.0,
        lethality: Lethality::Lethal,
        intent_evidence: evidence,
        iff: IffStatus::Suspect,
    };
    let cl = ConflictLevel::new(0.5).unwrap();
    let engine = assess_threat(&track, cl, &rb).unwrap();
    let reference = oracle_infer(&rb, &fuzzy_inputs(&track, cl)).unwrap();
    assert!((engine - reference).abs() <= 1e-9);
    assert!((0.0..=1.0).contains(&engine));
}
