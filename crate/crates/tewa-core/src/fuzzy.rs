//! Mamdani fuzzy inference: trapezoidal memberships, product conjunction,
//! weighted-average defuzzification, and interpolation of a complete rule
//! grid from a sparse set of anchor rules.
//!
//! The engine is generic over the variable set; the air-defense threat
//! system built on top of it lives in [`crate::threat`]. Everything here is
//! immutable after construction and safe to evaluate from many threads.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("invalid trapezoid breakpoints ({0}, {1}, {2}, {3})")]
    InvalidTrapezoid(f64, f64, f64, f64),
    #[error("rule references unknown label: {0}")]
    UnknownLabel(String),
    #[error("rule antecedent arity {got} does not match {expected} variables")]
    ArityMismatch { got: usize, expected: usize },
    #[error("input for variable '{variable}' has the wrong form: {reason}")]
    InputMismatch { variable: String, reason: String },
    #[error("expected one input per variable, got {got} for {expected}")]
    InputArity { got: usize, expected: usize },
    #[error("no rule fired: inputs lie outside every membership support")]
    NoRuleFired,
    #[error("conflicting anchors: antecedent {0} maps to both '{1}' and '{2}'")]
    ConflictingAnchors(String, String, String),
    #[error("anchor set is missing the {0} extreme rule")]
    MissingExtremeAnchor(&'static str),
}

/// Trapezoidal membership on the real line. Grade is 0 below `a`, ramps to
/// 1 on `[a, b]`, holds 1 on `[b, c]`, ramps to 0 on `[c, d]`. An infinite
/// `a` (resp. `d`) makes the left (right) shoulder flat at 1, i.e. a
/// semi-trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrapezoidRepr", into = "TrapezoidRepr")]
pub struct Trapezoid {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

/// JSON form: `[a, b, c, d]` with `null` standing for the infinite end.
#[derive(Serialize, Deserialize)]
struct TrapezoidRepr([Option<f64>; 4]);

impl From<Trapezoid> for TrapezoidRepr {
    fn from(t: Trapezoid) -> Self {
        let enc = |v: f64| if v.is_finite() { Some(v) } else { None };
        TrapezoidRepr([enc(t.a), enc(t.b), enc(t.c), enc(t.d)])
    }
}

impl TryFrom<TrapezoidRepr> for Trapezoid {
    type Error = FuzzyError;

    fn try_from(r: TrapezoidRepr) -> Result<Self, FuzzyError> {
        let [a, b, c, d] = r.0;
        Trapezoid::new(
            a.unwrap_or(f64::NEG_INFINITY),
            b.unwrap_or(f64::NEG_INFINITY),
            c.unwrap_or(f64::INFINITY),
            d.unwrap_or(f64::INFINITY),
        )
    }
}

impl Trapezoid {
    /// Requires `a <= b <= c <= d` and at least one of `b`, `c` finite.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        let ordered = a <= b && b <= c && c <= d;
        let plateau_anchored = b.is_finite() || c.is_finite();
        if !ordered || !plateau_anchored || a.is_nan() || d.is_nan() {
            return Err(FuzzyError::InvalidTrapezoid(a, b, c, d));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn breakpoints(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    /// Piecewise-linear membership grade in `[0, 1]`.
    pub fn grade(&self, x: f64) -> f64 {
        if x < self.b {
            if self.a.is_infinite() {
                1.0
            } else if x <= self.a {
                0.0
            } else {
                (x - self.a) / (self.b - self.a)
            }
        } else if x <= self.c {
            1.0
        } else if self.d.is_infinite() {
            1.0
        } else if x >= self.d {
            0.0
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }

    /// Support interval `[a, d]` (grades are 0 strictly outside it).
    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }
}

/// Trapezoidal membership grade of `x`, as a free function.
pub fn membership_grade(t: &Trapezoid, x: f64) -> f64 {
    t.grade(x)
}

/// How a label derives its grade from the variable's input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Graded from a crisp scalar input via the trapezoid.
    Trapezoid(Trapezoid),
    /// Graded as the maximum over the named member classes' grades
    /// (a fuzzy OR, e.g. an intent label covering two intent classes).
    Classes(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub membership: Membership,
    /// Normalized danger index in `[0, 1]` used by rule interpolation.
    pub danger: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable {
    pub name: String,
    pub unit: String,
    pub labels: Vec<Label>,
}

impl FuzzyVariable {
    /// Member-class names of all labels, flattened in label order. Empty
    /// for trapezoid-graded variables.
    pub fn class_names(&self) -> Vec<&str> {
        self.labels
            .iter()
            .flat_map(|l| match &l.membership {
                Membership::Classes(cs) => cs.iter().map(|c| c.as_str()).collect(),
                Membership::Trapezoid(_) => Vec::new(),
            })
            .collect()
    }

    fn is_class_graded(&self) -> bool {
        self.labels
            .iter()
            .any(|l| matches!(l.membership, Membership::Classes(_)))
    }
}

/// One crisp output level. Defuzzification uses only `representative`;
/// `shape` documents the label's fuzzy set on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputLabel {
    pub name: String,
    pub representative: f64,
    pub shape: Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleOrigin {
    Anchor,
    Interpolated,
}

/// A single inference rule: one label index per input variable, in
/// variable order, and the name of the consequent output label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Vec<usize>,
    pub consequent: String,
    pub origin: RuleOrigin,
}

/// The input supplied for one variable when firing rules.
#[derive(Debug, Clone, PartialEq)]
pub enum VarInput {
    /// Crisp scalar, graded against each label's trapezoid.
    Crisp(f64),
    /// Pre-computed grades, one per member class in the variable's
    /// flattened class order; a label's grade is the max over its members.
    ClassGrades(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub variables: Vec<FuzzyVariable>,
    pub outputs: Vec<OutputLabel>,
    pub rules: Vec<Rule>,
}

/// A structural defect found by [`validate_rulebase`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewLabels { variable: String, count: usize },
    DuplicateLabelName { variable: String, label: String },
    DuplicateClassName { variable: String, class: String },
    MixedMembershipKinds { variable: String },
    CoverageGap { variable: String, at: f64 },
    NoOutputs,
    DuplicateOutputName { output: String },
    RepresentativeOutsidePlateau { output: String },
    BadArity { rule: usize },
    LabelIndexOutOfRange { rule: usize, variable: String },
    UnknownConsequent { rule: usize, consequent: String },
    DuplicateAntecedent { antecedent: Vec<usize> },
    MissingRule { antecedent: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewLabels { variable, count } => {
                write!(f, "variable '{variable}' has {count} labels (needs >= 2)")
            }
            Violation::DuplicateLabelName { variable, label } => {
                write!(f, "variable '{variable}' repeats label '{label}'")
            }
            Violation::DuplicateClassName { variable, class } => {
                write!(f, "variable '{variable}' repeats member class '{class}'")
            }
            Violation::MixedMembershipKinds { variable } => {
                write!(f, "variable '{variable}' mixes trapezoid and class labels")
            }
            Violation::CoverageGap { variable, at } => {
                write!(f, "labels of '{variable}' leave a coverage gap near {at}")
            }
            Violation::NoOutputs => write!(f, "rulebase declares no output labels"),
            Violation::DuplicateOutputName { output } => {
                write!(f, "duplicate output label '{output}'")
            }
            Violation::RepresentativeOutsidePlateau { output } => {
                write!(f, "output '{output}' representative lies outside its plateau")
            }
            Violation::BadArity { rule } => write!(f, "rule #{rule} has wrong antecedent arity"),
            Violation::LabelIndexOutOfRange { rule, variable } => {
                write!(f, "rule #{rule} indexes a label out of range for '{variable}'")
            }
            Violation::UnknownConsequent { rule, consequent } => {
                write!(f, "rule #{rule} names unknown consequent '{consequent}'")
            }
            Violation::DuplicateAntecedent { antecedent } => {
                write!(f, "duplicate antecedent {antecedent:?}")
            }
            Violation::MissingRule { antecedent } => {
                write!(f, "grid is missing a rule for antecedent {antecedent:?}")
            }
        }
    }
}

impl RuleBase {
    /// Number of antecedent combinations in the complete grid.
    pub fn grid_size(&self) -> usize {
        self.variables.iter().map(|v| v.labels.len()).product()
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|o| o.name == name)
    }

    /// Grade of every label of every variable for the given inputs.
    fn grade_table(&self, inputs: &[VarInput]) -> Result<Vec<Vec<f64>>, FuzzyError> {
        if inputs.len() != self.variables.len() {
            return Err(FuzzyError::InputArity {
                got: inputs.len(),
                expected: self.variables.len(),
            });
        }
        let mut table = Vec::with_capacity(self.variables.len());
        for (var, input) in self.variables.iter().zip(inputs) {
            let mut grades = Vec::with_capacity(var.labels.len());
            match input {
                VarInput::Crisp(x) => {
                    for label in &var.labels {
                        match &label.membership {
                            Membership::Trapezoid(t) => grades.push(t.grade(*x)),
                            Membership::Classes(_) => {
                                return Err(FuzzyError::InputMismatch {
                                    variable: var.name.clone(),
                                    reason: "class-graded variable given a crisp input".into(),
                                })
                            }
                        }
                    }
                }
                VarInput::ClassGrades(class_grades) => {
                    let classes = var.class_names();
                    if classes.len() != class_grades.len() {
                        return Err(FuzzyError::InputMismatch {
                            variable: var.name.clone(),
                            reason: format!(
                                "expected {} class grades, got {}",
                                classes.len(),
                                class_grades.len()
                            ),
                        });
                    }
                    let mut offset = 0;
                    for label in &var.labels {
                        match &label.membership {
                            Membership::Classes(members) => {
                                let grade = class_grades[offset..offset + members.len()]
                                    .iter()
                                    .fold(0.0_f64, |acc, g| acc.max(*g));
                                grades.push(grade);
                                offset += members.len();
                            }
                            Membership::Trapezoid(_) => {
                                return Err(FuzzyError::InputMismatch {
                                    variable: var.name.clone(),
                                    reason: "trapezoid variable given class grades".into(),
                                })
                            }
                        }
                    }
                }
            }
            table.push(grades);
        }
        Ok(table)
    }

    /// Firing strength of one rule: the product of its antecedent label
    /// grades (class-group labels grade as the max over member classes).
    pub fn fire_rule(&self, rule: &Rule, inputs: &[VarInput]) -> Result<f64, FuzzyError> {
        if rule.antecedent.len() != self.variables.len() {
            return Err(FuzzyError::ArityMismatch {
                got: rule.antecedent.len(),
                expected: self.variables.len(),
            });
        }
        if self.output_index(&rule.consequent).is_none() {
            return Err(FuzzyError::UnknownLabel(rule.consequent.clone()));
        }
        let table = self.grade_table(inputs)?;
        let mut strength = 1.0;
        for (var_idx, &label_idx) in rule.antecedent.iter().enumerate() {
            let grades = &table[var_idx];
            let grade = grades.get(label_idx).ok_or_else(|| {
                FuzzyError::UnknownLabel(format!(
                    "{}[{}]",
                    self.variables[var_idx].name, label_idx
                ))
            })?;
            strength *= grade;
        }
        Ok(strength)
    }

    /// Crisp output: the firing-strength-weighted average of the fired
    /// consequents' representative values.
    pub fn infer(&self, inputs: &[VarInput]) -> Result<f64, FuzzyError> {
        let table = self.grade_table(inputs)?;
        let mut weight_sum = 0.0;
        let mut weighted = 0.0;
        for (idx, rule) in self.rules.iter().enumerate() {
            if rule.antecedent.len() != self.variables.len() {
                return Err(FuzzyError::ArityMismatch {
                    got: rule.antecedent.len(),
                    expected: self.variables.len(),
                });
            }
            let mut strength = 1.0;
            for (var_idx, &label_idx) in rule.antecedent.iter().enumerate() {
                match table[var_idx].get(label_idx) {
                    Some(g) => strength *= g,
                    None => {
                        return Err(FuzzyError::UnknownLabel(format!(
                            "rule #{idx}: {}[{label_idx}]",
                            self.variables[var_idx].name
                        )))
                    }
                }
                if strength == 0.0 {
                    break;
                }
            }
            if strength > 0.0 {
                let out = self
                    .output_index(&rule.consequent)
                    .ok_or_else(|| FuzzyError::UnknownLabel(rule.consequent.clone()))?;
                weight_sum += strength;
                weighted += strength * self.outputs[out].representative;
            }
        }
        if weight_sum == 0.0 {
            return Err(FuzzyError::NoRuleFired);
        }
        Ok(weighted / weight_sum)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Convenience wrapper matching the operation vocabulary.
pub fn infer(rb: &RuleBase, inputs: &[VarInput]) -> Result<f64, FuzzyError> {
    rb.infer(inputs)
}

fn antecedent_key(antecedent: &[usize]) -> String {
    let parts: Vec<String> = antecedent.iter().map(|i| i.to_string()).collect();
    parts.join(",")
}

/// Completes the rule grid from the anchor rules carried in `rb.rules`.
///
/// Every antecedent combination without an anchor receives a consequent
/// chosen by its mean label danger index: the `[0, 1]` danger range is cut
/// into as many equal bins as there are output labels (ordered by
/// representative value), with strict upper boundaries, and the mean picks
/// the bin. Anchor rules are preserved verbatim; rules are emitted in grid
/// enumeration order (first variable most significant).
pub fn interpolate_rules(rb: &RuleBase) -> Result<RuleBase, FuzzyError> {
    let n_vars = rb.variables.len();

    let mut anchors: BTreeMap<Vec<usize>, &Rule> = BTreeMap::new();
    for rule in &rb.rules {
        if rule.antecedent.len() != n_vars {
            return Err(FuzzyError::ArityMismatch {
                got: rule.antecedent.len(),
                expected: n_vars,
            });
        }
        for (var_idx, &label_idx) in rule.antecedent.iter().enumerate() {
            if label_idx >= rb.variables[var_idx].labels.len() {
                return Err(FuzzyError::UnknownLabel(format!(
                    "{}[{}]",
                    rb.variables[var_idx].name, label_idx
                )));
            }
        }
        if rb.output_index(&rule.consequent).is_none() {
            return Err(FuzzyError::UnknownLabel(rule.consequent.clone()));
        }
        if let Some(prev) = anchors.insert(rule.antecedent.clone(), rule) {
            if prev.consequent != rule.consequent {
                return Err(FuzzyError::ConflictingAnchors(
                    antecedent_key(&rule.antecedent),
                    prev.consequent.clone(),
                    rule.consequent.clone(),
                ));
            }
        }
    }

    // The anchor set must span the two extreme threat perceptions.
    let most_dangerous: Vec<usize> = rb
        .variables
        .iter()
        .map(|v| argmax_by(&v.labels, |l| l.danger))
        .collect();
    let most_benign: Vec<usize> = rb
        .variables
        .iter()
        .map(|v| argmax_by(&v.labels, |l| -l.danger))
        .collect();
    if !anchors.contains_key(&most_benign) {
        return Err(FuzzyError::MissingExtremeAnchor("all-benign"));
    }
    if !anchors.contains_key(&most_dangerous) {
        return Err(FuzzyError::MissingExtremeAnchor("all-hostile"));
    }

    // Output labels ordered by representative value, least to most severe.
    let mut output_order: Vec<usize> = (0..rb.outputs.len()).collect();
    output_order.sort_by(|&i, &j| {
        rb.outputs[i]
            .representative
            .partial_cmp(&rb.outputs[j].representative)
            .expect("finite representatives")
    });
    let bins = output_order.len();

    let mut rules = Vec::with_capacity(rb.grid_size());
    let mut antecedent = vec![0usize; n_vars];
    loop {
        if let Some(anchor) = anchors.get(&antecedent) {
            rules.push((*anchor).clone());
        } else {
            let mean_danger: f64 = antecedent
                .iter()
                .enumerate()
                .map(|(var_idx, &label_idx)| rb.variables[var_idx].labels[label_idx].danger)
                .sum::<f64>()
                / n_vars as f64;
            let bin = (0..bins)
                .find(|&i| mean_danger < (i + 1) as f64 / bins as f64)
                .unwrap_or(bins - 1);
            rules.push(Rule {
                antecedent: antecedent.clone(),
                consequent: rb.outputs[output_order[bin]].name.clone(),
                origin: RuleOrigin::Interpolated,
            });
        }

        // Advance the grid odometer, last variable fastest.
        let mut pos = n_vars;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            antecedent[pos] += 1;
            if antecedent[pos] < rb.variables[pos].labels.len() {
                break;
            }
            antecedent[pos] = 0;
        }
        if antecedent.iter().all(|&i| i == 0) {
            break;
        }
    }

    Ok(RuleBase {
        variables: rb.variables.clone(),
        outputs: rb.outputs.clone(),
        rules,
    })
}

fn argmax_by(labels: &[Label], key: impl Fn(&Label) -> f64) -> usize {
    let mut best = 0;
    for (i, label) in labels.iter().enumerate().skip(1) {
        if key(label) > key(&labels[best]) {
            best = i;
        }
    }
    best
}

/// Structural check of every rulebase invariant. Returns an empty list iff
/// the rulebase is a complete, well-formed grid with total input coverage.
pub fn validate_rulebase(rb: &RuleBase) -> Vec<Violation> {
    let mut out = Vec::new();

    for var in &rb.variables {
        if var.labels.len() < 2 {
            out.push(Violation::TooFewLabels {
                variable: var.name.clone(),
                count: var.labels.len(),
            });
        }
        let mut seen = Vec::new();
        for label in &var.labels {
            if seen.contains(&&label.name) {
                out.push(Violation::DuplicateLabelName {
                    variable: var.name.clone(),
                    label: label.name.clone(),
                });
            }
            seen.push(&label.name);
        }
        let n_trap = var
            .labels
            .iter()
            .filter(|l| matches!(l.membership, Membership::Trapezoid(_)))
            .count();
        if n_trap != 0 && n_trap != var.labels.len() {
            out.push(Violation::MixedMembershipKinds {
                variable: var.name.clone(),
            });
        }
        if var.is_class_graded() {
            let mut classes: Vec<&str> = Vec::new();
            for c in var.class_names() {
                if classes.contains(&c) {
                    out.push(Violation::DuplicateClassName {
                        variable: var.name.clone(),
                        class: c.to_string(),
                    });
                }
                classes.push(c);
            }
        } else if n_trap == var.labels.len() {
            check_coverage(var, &mut out);
        }
    }

    if rb.outputs.is_empty() {
        out.push(Violation::NoOutputs);
    }
    let mut seen_out = Vec::new();
    for output in &rb.outputs {
        if seen_out.contains(&&output.name) {
            out.push(Violation::DuplicateOutputName {
                output: output.name.clone(),
            });
        }
        seen_out.push(&output.name);
        let (_, b, c, _) = output.shape.breakpoints();
        if !(b..=c).contains(&output.representative) {
            out.push(Violation::RepresentativeOutsidePlateau {
                output: output.name.clone(),
            });
        }
    }

    let mut seen_antecedents: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (idx, rule) in rb.rules.iter().enumerate() {
        if rule.antecedent.len() != rb.variables.len() {
            out.push(Violation::BadArity { rule: idx });
            continue;
        }
        let mut in_range = true;
        for (var_idx, &label_idx) in rule.antecedent.iter().enumerate() {
            if label_idx >= rb.variables[var_idx].labels.len() {
                out.push(Violation::LabelIndexOutOfRange {
                    rule: idx,
                    variable: rb.variables[var_idx].name.clone(),
                });
                in_range = false;
            }
        }
        if rb.output_index(&rule.consequent).is_none() {
            out.push(Violation::UnknownConsequent {
                rule: idx,
                consequent: rule.consequent.clone(),
            });
        }
        if in_range && seen_antecedents.insert(rule.antecedent.clone(), idx).is_some() {
            out.push(Violation::DuplicateAntecedent {
                antecedent: rule.antecedent.clone(),
            });
        }
    }

    // Grid completeness, only meaningful when shapes are otherwise sane.
    if rb.variables.iter().all(|v| v.labels.len() >= 2) {
        let mut antecedent = vec![0usize; rb.variables.len()];
        loop {
            if !seen_antecedents.contains_key(&antecedent) {
                out.push(Violation::MissingRule {
                    antecedent: antecedent.clone(),
                });
            }
            let mut pos = rb.variables.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                antecedent[pos] += 1;
                if antecedent[pos] < rb.variables[pos].labels.len() {
                    break;
                }
                antecedent[pos] = 0;
            }
            if antecedent.iter().all(|&i| i == 0) {
                break;
            }
        }
    }

    out
}

/// Trapezoid labels must jointly cover the whole axis with strictly
/// overlapping supports, otherwise some crisp input grades 0 everywhere
/// and `infer` reports `NoRuleFired`.
fn check_coverage(var: &FuzzyVariable, out: &mut Vec<Violation>) {
    let mut supports: Vec<(f64, f64)> = var
        .labels
        .iter()
        .filter_map(|l| match &l.membership {
            Membership::Trapezoid(t) => Some(t.support()),
            Membership::Classes(_) => None,
        })
        .collect();
    supports.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("no NaN breakpoints"));
    if supports.is_empty() {
        return;
    }
    if supports[0].0 != f64::NEG_INFINITY {
        out.push(Violation::CoverageGap {
            variable: var.name.clone(),
            at: supports[0].0,
        });
    }
    let mut reach = supports[0].1;
    for &(a, d) in &supports[1..] {
        if a >= reach {
            out.push(Violation::CoverageGap {
                variable: var.name.clone(),
                at: a,
            });
        }
        reach = reach.max(d);
    }
    if reach != f64::INFINITY {
        out.push(Violation::CoverageGap {
            variable: var.name.clone(),
            at: reach,
        });
    }
}
