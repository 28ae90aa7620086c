//! Threat assessment: builds the 1215-rule air-defense rulebase, maps
//! target tracks and the conflict level to fuzzy inputs, and produces
//! prioritized threat lists.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::fuzzy::{
    interpolate_rules, FuzzyError, FuzzyVariable, Label, Membership, OutputLabel, Rule, RuleBase,
    RuleOrigin, Trapezoid, VarInput,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThreatError {
    #[error("zero-length vector given to the angle computation")]
    ZeroVector,
    #[error("unknown platform kind '{0}'")]
    UnknownPlatform(String),
    #[error("cannot prioritize an empty track list")]
    EmptyTrackList,
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("invalid track '{id}': {reason}")]
    InvalidTrack { id: String, reason: String },
}

/// Target lethality classes, least to most lethal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lethality {
    LessLethal,
    Lethal,
    VeryLethal,
}

/// IFF classification of a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IffStatus {
    Friendly,
    Suspect,
    Unknown,
}

/// The ten intent classes, in fixed order. Consecutive pairs form the five
/// intent groups used by the rule grid.
pub const INTENT_CLASSES: [&str; 10] = [
    "Strike",
    "Interdiction",
    "Suppression",
    "TacticalBombing",
    "StrategicBombing",
    "Electronic",
    "CloseAirSupport",
    "Escort",
    "Surveillance",
    "Reconnaissance",
];

/// Danger index of each intent group, aligned with the pairs of
/// [`INTENT_CLASSES`]: (Strike, Interdiction) = 1.0 down to
/// (Surveillance, Reconnaissance) = 0.0.
pub const INTENT_GROUP_DANGER: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.0];

/// Index of the group an intent class belongs to.
pub fn intent_group_of(class_idx: usize) -> usize {
    class_idx / 2
}

/// One sensed target: kinematics, lethality class, and intent evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTrack {
    pub id: String,
    pub range_km: f64,
    pub velocity_mach: f64,
    pub altitude_km: f64,
    pub aoa_deg: f64,
    pub lethality: Lethality,
    /// Non-negative evidence per intent class, summing to 1.
    pub intent_evidence: [f64; 10],
    pub iff: IffStatus,
}

impl TargetTrack {
    pub fn validate(&self) -> Result<(), ThreatError> {
        let bad = |reason: &str| {
            Err(ThreatError::InvalidTrack {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        for (name, v) in [
            ("range_km", self.range_km),
            ("velocity_mach", self.velocity_mach),
            ("altitude_km", self.altitude_km),
            ("aoa_deg", self.aoa_deg),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(&format!("{name} must be finite and non-negative"));
            }
        }
        if self.aoa_deg > 90.0 {
            return bad("aoa_deg must lie in [0, 90]");
        }
        if self.intent_evidence.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return bad("intent evidence entries must lie in [0, 1]");
        }
        let sum: f64 = self.intent_evidence.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad("intent evidence must sum to 1");
        }
        Ok(())
    }
}

/// Operator-supplied conflict level: 0 = peacetime, 1 = full-scale war.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictLevel(f64);

impl ConflictLevel {
    pub fn new(cl: f64) -> Option<Self> {
        (cl.is_finite() && (0.0..=1.0).contains(&cl)).then_some(Self(cl))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatScore {
    pub target_id: String,
    pub score: f64,
    /// 1 = most threatening.
    pub rank: usize,
}

/// Platform catalogue entry: lethality class plus the military value used
/// as `V_s` when the platform kind becomes a weapon-allocation target type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub lethality: Lethality,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_mach: Option<f64>,
}

pub type PlatformCatalogue = BTreeMap<String, PlatformSpec>;

/// Looks a platform kind up in the catalogue.
pub fn classify_lethality(
    catalogue: &PlatformCatalogue,
    kind: &str,
) -> Result<Lethality, ThreatError> {
    catalogue
        .get(kind)
        .map(|spec| spec.lethality)
        .ok_or_else(|| ThreatError::UnknownPlatform(kind.to_string()))
}

fn trap(a: f64, b: f64, c: f64, d: f64) -> Trapezoid {
    Trapezoid::new(a, b, c, d).expect("static breakpoints are valid")
}

fn scalar_label(name: &str, t: Trapezoid, danger: f64) -> Label {
    Label {
        name: name.into(),
        membership: Membership::Trapezoid(t),
        danger,
    }
}

const NEG: f64 = f64::NEG_INFINITY;
const POS: f64 = f64::INFINITY;

/// The threat rulebase skeleton with only the two extreme anchor rules:
/// all-benign maps to Low and all-hostile maps to High.
pub fn threat_anchor_rulebase() -> RuleBase {
    let variables = vec![
        FuzzyVariable {
            name: "range".into(),
            unit: "km".into(),
            labels: vec![
                scalar_label("Close", trap(NEG, 0.0, 40.0, 80.0), 1.0),
                scalar_label("Medium", trap(40.0, 80.0, 120.0, 160.0), 0.5),
                scalar_label("Far", trap(120.0, 160.0, POS, POS), 0.0),
            ],
        },
        FuzzyVariable {
            name: "velocity".into(),
            unit: "Mach".into(),
            labels: vec![
                scalar_label("Slow", trap(NEG, 0.0, 0.4, 0.8), 0.0),
                scalar_label("Medium", trap(0.4, 0.8, 1.2, 1.6), 0.5),
                scalar_label("Fast", trap(1.2, 1.6, POS, POS), 1.0),
            ],
        },
        FuzzyVariable {
            name: "altitude".into(),
            unit: "km".into(),
            labels: vec![
                scalar_label("Low", trap(NEG, 0.0, 1.0, 3.0), 1.0),
                scalar_label("Medium", trap(1.0, 3.0, 6.0, 9.0), 0.5),
                scalar_label("High", trap(6.0, 9.0, POS, POS), 0.0),
            ],
        },
        FuzzyVariable {
            name: "aoa".into(),
            unit: "deg".into(),
            labels: vec![
                scalar_label("Low", trap(NEG, 0.0, 15.0, 35.0), 0.0),
                scalar_label("Medium", trap(15.0, 35.0, 55.0, 75.0), 0.5),
                scalar_label("High", trap(55.0, 75.0, POS, POS), 1.0),
            ],
        },
        FuzzyVariable {
            name: "target_type".into(),
            unit: "class".into(),
            labels: vec![
                Label {
                    name: "VeryLethal".into(),
                    membership: Membership::Classes(vec!["VeryLethal".into()]),
                    danger: 1.0,
                },
                Label {
                    name: "Lethal".into(),
                    membership: Membership::Classes(vec!["Lethal".into()]),
                    danger: 0.5,
                },
                Label {
                    name: "LessLethal".into(),
                    membership: Membership::Classes(vec!["LessLethal".into()]),
                    danger: 0.0,
                },
            ],
        },
        FuzzyVariable {
            name: "intent".into(),
            unit: "grade".into(),
            labels: (0..5)
                .map(|g| Label {
                    name: format!(
                        "{}Or{}",
                        INTENT_CLASSES[2 * g],
                        INTENT_CLASSES[2 * g + 1]
                    ),
                    membership: Membership::Classes(vec![
                        INTENT_CLASSES[2 * g].into(),
                        INTENT_CLASSES[2 * g + 1].into(),
                    ]),
                    danger: INTENT_GROUP_DANGER[g],
                })
                .collect(),
        },
    ];
    let outputs = vec![
        OutputLabel {
            name: "Low".into(),
            representative: 0.2,
            shape: trap(NEG, 0.0, 0.2, 0.4),
        },
        OutputLabel {
            name: "Medium".into(),
            representative: 0.5,
            shape: trap(0.3, 0.45, 0.55, 0.7),
        },
        OutputLabel {
            name: "High".into(),
            representative: 0.8,
            shape: trap(0.6, 0.8, 1.0, POS),
        },
    ];
    let rules = vec![
        // R1: Far, Slow, High altitude, Low AOA, LessLethal,
        //     Surveillance or Reconnaissance -> Low.
        Rule {
            antecedent: vec![2, 0, 2, 0, 2, 4],
            consequent: "Low".into(),
            origin: RuleOrigin::Anchor,
        },
        // R1215: Close, Fast, Low altitude, High AOA, VeryLethal,
        //        Strike or Interdiction -> High.
        Rule {
            antecedent: vec![0, 2, 0, 2, 0, 0],
            consequent: "High".into(),
            origin: RuleOrigin::Anchor,
        },
    ];
    RuleBase {
        variables,
        outputs,
        rules,
    }
}

/// The complete interpolated threat rulebase (1215 rules).
pub fn threat_rulebase() -> RuleBase {
    interpolate_rules(&threat_anchor_rulebase()).expect("anchor rulebase interpolates")
}

/// Angle, in degrees, between the velocity vector's projection and the
/// longitudinal axis. The projection plane is the plane spanned by the two
/// vectors, so this is the full angle between them, clamped to [0, 180].
pub fn compute_aoa(velocity: [f64; 3], axis: [f64; 3]) -> Result<f64, ThreatError> {
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let nv = norm(velocity);
    let na = norm(axis);
    if nv == 0.0 || na == 0.0 {
        return Err(ThreatError::ZeroVector);
    }
    let dot = velocity[0] * axis[0] + velocity[1] * axis[1] + velocity[2] * axis[2];
    let cos = (dot / (nv * na)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees().clamp(0.0, 180.0))
}

/// Per-class intent evidence after conflict-level weighting: class `c` in
/// group `g` is scaled by `cl + (1 - cl) * (1 - d_g)` and clipped to
/// `[0, 1]`. At `cl = 0` hostile-intent evidence is fully discounted; at
/// `cl = 1` evidence passes through unchanged.
pub fn scaled_intent_evidence(evidence: &[f64; 10], cl: ConflictLevel) -> [f64; 10] {
    let cl = cl.value();
    let mut out = [0.0; 10];
    for (c, &e) in evidence.iter().enumerate() {
        let d = INTENT_GROUP_DANGER[intent_group_of(c)];
        out[c] = (e * (cl + (1.0 - cl) * (1.0 - d))).clamp(0.0, 1.0);
    }
    out
}

/// Intent-group membership values: the max of each group's two class
/// evidences, conflict-level weighted as in [`scaled_intent_evidence`].
pub fn intent_membership(evidence: &[f64; 10], cl: ConflictLevel) -> [f64; 5] {
    let scaled = scaled_intent_evidence(evidence, cl);
    let mut out = [0.0; 5];
    for g in 0..5 {
        out[g] = scaled[2 * g].max(scaled[2 * g + 1]);
    }
    out
}

/// Fuzzy input vector for one track, in the rulebase's variable order.
pub fn fuzzy_inputs(track: &TargetTrack, cl: ConflictLevel) -> Vec<VarInput> {
    let lethality_grades = match track.lethality {
        Lethality::VeryLethal => vec![1.0, 0.0, 0.0],
        Lethality::Lethal => vec![0.0, 1.0, 0.0],
        Lethality::LessLethal => vec![0.0, 0.0, 1.0],
    };
    vec![
        VarInput::Crisp(track.range_km),
        VarInput::Crisp(track.velocity_mach),
        VarInput::Crisp(track.altitude_km),
        VarInput::Crisp(track.aoa_deg),
        VarInput::ClassGrades(lethality_grades),
        VarInput::ClassGrades(scaled_intent_evidence(&track.intent_evidence, cl).to_vec()),
    ]
}

/// Crisp threat score of one track in `[0, 1]`.
pub fn assess_threat(
    track: &TargetTrack,
    cl: ConflictLevel,
    rb: &RuleBase,
) -> Result<f64, ThreatError> {
    Ok(rb.infer(&fuzzy_inputs(track, cl))?)
}

/// Scores every track and returns the list sorted most-threatening first.
/// Ties break toward the smaller range, then the lexicographically smaller
/// id; ranks are assigned 1..N.
pub fn prioritize(
    tracks: &[TargetTrack],
    cl: ConflictLevel,
    rb: &RuleBase,
) -> Result<Vec<ThreatScore>, ThreatError> {
    if tracks.is_empty() {
        return Err(ThreatError::EmptyTrackList);
    }
    let mut scored: Vec<(f64, &TargetTrack)> = Vec::with_capacity(tracks.len());
    for track in tracks {
        scored.push((assess_threat(track, cl, rb)?, track));
    }
    scored.sort_by(|(sa, ta), (sb, tb)| {
        sb.partial_cmp(sa)
            .expect("threat scores are finite")
            .then_with(|| {
                ta.range_km
                    .partial_cmp(&tb.range_km)
                    .expect("ranges are finite")
            })
            .then_with(|| ta.id.cmp(&tb.id))
    });
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (score, track))| ThreatScore {
            target_id: track.id.clone(),
            score,
            rank: i + 1,
        })
        .collect())
}

/// IFF challenge: only an exact response to the expected code is friendly;
/// a wrong or missing response classifies the unit as suspect.
pub fn iff_classify(response: Option<&str>, expected: &str) -> IffStatus {
    match response {
        Some(r) if r == expected => IffStatus::Friendly,
        _ => IffStatus::Suspect,
    }
}
