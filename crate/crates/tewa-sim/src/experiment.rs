//! Canned experiments: the jamming-detection study, threat-surface grids,
//! order-statistics fits, and the allocation scaling sweep.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::stream::{derive_seed, generate_status_stream, JamInjection};
use crate::SimError;
use tewa_core::agents::{AgentError, EventKind, RadarConfig, SraAgent};
use tewa_core::eval::{
    fit_report, ks_critical, ks_statistic, order_statistics_sim, DistributionSpec, Extreme,
    FitReport, FAMILY_LIBRARY,
};
use tewa_core::fuzzy::{RuleBase, VarInput};
use tewa_core::threat::{scaled_intent_evidence, threat_rulebase, ConflictLevel};
use tewa_core::wta::{
    feasible, solve_ga, GaBudget, Solution, TargetTypeSpec, WeaponType, WtaInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    Jamming,
    Surfaces,
    OrderStats,
    Scaling,
}

impl ExperimentName {
    pub fn parse(name: &str) -> Result<Self, SimError> {
        Ok(match name {
            "jamming" => ExperimentName::Jamming,
            "surfaces" => ExperimentName::Surfaces,
            "order_stats" => ExperimentName::OrderStats,
            "scaling" => ExperimentName::Scaling,
            other => return Err(SimError::UnknownExperiment(other.to_string())),
        })
    }
}

/// Runs one experiment and writes its report files under `dir`.
pub fn experiment(
    name: ExperimentName,
    seed: u64,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, SimError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| SimError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    match name {
        ExperimentName::Jamming => {
            let report = run_jamming(seed, 500, 200)?;
            Ok(vec![write_json(dir.join("jamming.json"), &report)?])
        }
        ExperimentName::Surfaces => {
            let report = run_surfaces();
            let mut written = Vec::new();
            for grid in &report.grids {
                written.push(write_file(
                    dir.join(format!("surface_{}.csv", grid.name)),
                    &grid.to_csv(),
                )?);
            }
            written.push(write_json(dir.join("surfaces.json"), &report)?);
            Ok(written)
        }
        ExperimentName::OrderStats => {
            let report = run_order_stats(seed)?;
            Ok(vec![write_json(dir.join("order_stats.json"), &report)?])
        }
        ExperimentName::Scaling => {
            let report = run_scaling(seed);
            Ok(vec![write_json(dir.join("scaling.json"), &report)?])
        }
    }
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<PathBuf, SimError> {
    let mut json = serde_json::to_string_pretty(value).expect("report serializes");
    json.push('\n');
    write_file(path, &json)
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, SimError> {
    std::fs::write(&path, contents).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

// --- jamming -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JamRow {
    pub replication: u32,
    pub rd_ticks: u64,
    pub jam_ticks: u64,
    pub messages: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JammingReport {
    pub replications: Vec<JamRow>,
    pub total_rd_ticks: u64,
    pub total_jam_ticks: u64,
    pub total_messages: u64,
    /// Fraction of evaluated ticks judged jammed.
    pub jam_rate: f64,
    /// Replications in which at least one jam was detected.
    pub replications_with_jams: u32,
    pub rd_fit: FitReport,
}

/// Radar-only study: `replications` status streams with jamming injected,
/// stepping the radar agent and pooling RD values for the distribution
/// fit.
pub fn run_jamming(seed: u64, replications: u32, ticks: u64) -> Result<JammingReport, SimError> {
    let mut rows = Vec::with_capacity(replications as usize);
    let mut pooled_rd = Vec::new();
    for rep in 0..replications {
        let stream = generate_status_stream(
            derive_seed(seed, "jam", rep as u64),
            ticks,
            JamInjection::on(),
        );
        let mut sra = SraAgent::new(RadarConfig::default());
        sra.prime(stream[0]);
        let mut row = JamRow {
            replication: rep,
            rd_ticks: 0,
            jam_ticks: 0,
            messages: 0,
        };
        for (tick, &n) in stream.iter().enumerate().skip(1) {
            match sra.step(tick as u64, n) {
                Ok((entry, events)) => {
                    row.rd_ticks += 1;
                    if entry.plan_active("p2") {
                        row.jam_ticks += 1;
                    }
                    row.messages += events
                        .iter()
                        .filter(|e| e.kind == EventKind::JammingSuspected)
                        .count() as u64;
                    pooled_rd.push(
                        tewa_core::agents::compute_rd(stream[tick - 1], n)
                            .expect("nonzero baseline"),
                    );
                }
                Err(AgentError::ZeroBaseline) => {}
                Err(source) => {
                    return Err(SimError::Agent {
                        tick: tick as u64,
                        source,
                    })
                }
            }
        }
        rows.push(row);
    }
    let total_rd_ticks: u64 = rows.iter().map(|r| r.rd_ticks).sum();
    let total_jam_ticks: u64 = rows.iter().map(|r| r.jam_ticks).sum();
    let total_messages: u64 = rows.iter().map(|r| r.messages).sum();
    let rd_fit = fit_report(&pooled_rd, &FAMILY_LIBRARY, 0.05)?;
    Ok(JammingReport {
        replications_with_jams: rows.iter().filter(|r| r.jam_ticks > 0).count() as u32,
        replications: rows,
        total_rd_ticks,
        total_jam_ticks,
        total_messages,
        jam_rate: total_jam_ticks as f64 / total_rd_ticks as f64,
        rd_fit,
    })
}

// --- threat surfaces ----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    RangeKm,
    VelocityMach,
    AltitudeKm,
    AoaDeg,
    /// Intent severity parameter in [0, 1], blending evidence between
    /// danger-adjacent intent groups.
    IntentSeverity,
    /// Target-type severity parameter in [0, 1], blending between
    /// adjacent lethality classes.
    TargetTypeSeverity,
}

impl Axis {
    fn span(&self) -> (f64, f64) {
        match self {
            Axis::RangeKm => (0.0, 250.0),
            Axis::VelocityMach => (0.0, 3.0),
            Axis::AltitudeKm => (0.0, 12.0),
            Axis::AoaDeg => (0.0, 90.0),
            Axis::IntentSeverity | Axis::TargetTypeSeverity => (0.0, 1.0),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Axis::RangeKm | Axis::AltitudeKm => Direction::NonIncreasing,
            _ => Direction::NonDecreasing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub name: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `threat[i][j]` is the score at `(x[i], y[j])`.
    pub threat: Vec<Vec<f64>>,
}

impl SurfaceGrid {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("x,y,threat\n");
        for (i, &xv) in self.x.iter().enumerate() {
            for (j, &yv) in self.y.iter().enumerate() {
                writeln!(out, "{xv},{yv},{}", self.threat[i][j]).expect("string write");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacesReport {
    pub grid_points: usize,
    pub conflict_level: f64,
    pub grids: Vec<SurfaceGrid>,
}

/// Intent evidence blending between danger-adjacent groups: severity 0 is
/// pure surveillance/reconnaissance, 1 is pure strike/interdiction.
pub fn intent_evidence_at(severity: f64) -> [f64; 10] {
    let t = severity.clamp(0.0, 1.0);
    let segment = ((t * 4.0).floor() as usize).min(3);
    let f = t * 4.0 - segment as f64;
    // group indices run from 4 (benign) down to 0 (hostile)
    let lower_group = 4 - segment;
    let upper_group = lower_group - 1;
    let mut evidence = [0.0; 10];
    evidence[2 * lower_group] = 1.0 - f;
    evidence[2 * upper_group] = f;
    evidence
}

/// Lethality class grades blending between adjacent classes: severity 0
/// is purely less lethal, 1 purely very lethal. Grade order matches the
/// rulebase's class list (very lethal, lethal, less lethal).
pub fn lethality_grades_at(severity: f64) -> Vec<f64> {
    let t = severity.clamp(0.0, 1.0);
    if t <= 0.5 {
        let f = t * 2.0;
        vec![0.0, f, 1.0 - f]
    } else {
        let f = t * 2.0 - 1.0;
        vec![f, 1.0 - f, 0.0]
    }
}

/// Fixed settings for the axes a surface does not sweep.
#[derive(Debug, Clone, Copy)]
struct Fixed {
    range_km: f64,
    velocity_mach: f64,
    altitude_km: f64,
    aoa_deg: f64,
    target_type_severity: f64,
    intent_severity: f64,
    cl: f64,
}

const FIXED: Fixed = Fixed {
    range_km: 100.0,
    velocity_mach: 1.0,
    altitude_km: 5.0,
    aoa_deg: 45.0,
    target_type_severity: 0.5,
    intent_severity: 0.5,
    cl: 0.5,
};

fn surface_inputs(fixed: &Fixed, overrides: &[(Axis, f64)]) -> Vec<VarInput> {
    let mut v = *fixed;
    for &(axis, value) in overrides {
        match axis {
            Axis::RangeKm => v.range_km = value,
            Axis::VelocityMach => v.velocity_mach = value,
            Axis::AltitudeKm => v.altitude_km = value,
            Axis::AoaDeg => v.aoa_deg = value,
            Axis::IntentSeverity => v.intent_severity = value,
            Axis::TargetTypeSeverity => v.target_type_severity = value,
        }
    }
    let cl = ConflictLevel::new(v.cl).expect("fixed cl is valid");
    vec![
        VarInput::Crisp(v.range_km),
        VarInput::Crisp(v.velocity_mach),
        VarInput::Crisp(v.altitude_km),
        VarInput::Crisp(v.aoa_deg),
        VarInput::ClassGrades(lethality_grades_at(v.target_type_severity)),
        VarInput::ClassGrades(
            scaled_intent_evidence(&intent_evidence_at(v.intent_severity), cl).to_vec(),
        ),
    ]
}

fn surface_grid(rb: &RuleBase, name: &str, x_axis: Axis, y_axis: Axis, points: usize) -> SurfaceGrid {
    let lin = |(lo, hi): (f64, f64)| -> Vec<f64> {
        (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect()
    };
    let x = lin(x_axis.span());
    let y = lin(y_axis.span());
    let threat = x
        .iter()
        .map(|&xv| {
            y.iter()
                .map(|&yv| {
                    rb.infer(&surface_inputs(&FIXED, &[(x_axis, xv), (y_axis, yv)]))
                        .expect("surface inputs keep at least one rule firing")
                })
                .collect()
        })
        .collect();
    SurfaceGrid {
        name: name.to_string(),
        x_axis,
        y_axis,
        x,
        y,
        threat,
    }
}

/// The four threat surfaces: range/velocity, intent/target type,
/// altitude/angle-of-attack, and target type/range, with the remaining
/// factors held at mid-scale settings.
pub fn run_surfaces() -> SurfacesReport {
    run_surfaces_with_points(50)
}

pub fn run_surfaces_with_points(points: usize) -> SurfacesReport {
    let rb = threat_rulebase();
    SurfacesReport {
        grid_points: points,
        conflict_level: FIXED.cl,
        grids: vec![
            surface_grid(&rb, "range_velocity", Axis::RangeKm, Axis::VelocityMach, points),
            surface_grid(
                &rb,
                "intent_target_type",
                Axis::IntentSeverity,
                Axis::TargetTypeSeverity,
                points,
            ),
            surface_grid(&rb, "altitude_aoa", Axis::AltitudeKm, Axis::AoaDeg, points),
            surface_grid(
                &rb,
                "target_type_range",
                Axis::TargetTypeSeverity,
                Axis::RangeKm,
                points,
            ),
        ],
    }
}

// --- order statistics ---------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsCheck {
    pub hypothesis: DistributionSpec,
    pub ks: f64,
    pub critical: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStatsReport {
    pub group_size: usize,
    pub groups: usize,
    pub min_fit: FitReport,
    pub max_fit: FitReport,
    /// The exact law of the uniform minimum/maximum, checked directly.
    pub min_beta_check: KsCheck,
    pub max_beta_check: KsCheck,
}

/// Draws minima and maxima of Uniform(0, 1) groups, ranks the library
/// fits for each, and checks the exact Beta laws.
pub fn run_order_stats(seed: u64) -> Result<OrderStatsReport, SimError> {
    let n = 10usize;
    let groups = 500usize;
    let minima = order_statistics_sim(n, groups, Extreme::Min, derive_seed(seed, "order_min", 0));
    let maxima = order_statistics_sim(n, groups, Extreme::Max, derive_seed(seed, "order_max", 0));
    let check = |sample: &[f64], spec: DistributionSpec| -> Result<KsCheck, SimError> {
        let ks = ks_statistic(sample, &spec)?;
        let critical = ks_critical(0.05, sample.len())?;
        Ok(KsCheck {
            hypothesis: spec,
            ks,
            critical,
            accepted: ks <= critical,
        })
    };
    Ok(OrderStatsReport {
        group_size: n,
        groups,
        min_fit: fit_report(&minima, &FAMILY_LIBRARY, 0.05)?,
        max_fit: fit_report(&maxima, &FAMILY_LIBRARY, 0.05)?,
        min_beta_check: check(
            &minima,
            DistributionSpec::Beta {
                alpha: 1.0,
                beta: n as f64,
            },
        )?,
        max_beta_check: check(
            &maxima,
            DistributionSpec::Beta {
                alpha: n as f64,
                beta: 1.0,
            },
        )?,
    })
}

// --- allocation scaling ---------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub total_targets: u32,
    pub tvd: f64,
    /// Total military value of the raid.
    pub raid_value: f64,
    /// Fraction of the raid's value the allocation expects to destroy;
    /// with a fixed blue force this is the quality measure that shrinks
    /// as the raid grows.
    pub coverage: f64,
    pub elapsed_secs: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub weapon_units: u32,
    pub generations: u32,
    pub rows: Vec<ScalingRow>,
}

/// Fixed blue force for the sweep: three weapon types, ten units each.
fn scaling_weapons() -> Vec<WeaponType> {
    vec![
        WeaponType {
            id: "sam_long".into(),
            inventory: 10,
            salvo: vec![1, 1, 2],
            kill_prob: vec![0.85, 0.6, 0.5],
        },
        WeaponType {
            id: "sam_medium".into(),
            inventory: 10,
            salvo: vec![1, 1, 1],
            kill_prob: vec![0.7, 0.75, 0.55],
        },
        WeaponType {
            id: "sam_short".into(),
            inventory: 10,
            salvo: vec![2, 1, 1],
            kill_prob: vec![0.5, 0.65, 0.7],
        },
    ]
}

/// A scaling instance: `total` targets split across three types of
/// descending value, against the fixed 30-unit blue force.
pub fn scaling_instance(total: u32) -> WtaInstance {
    let base = total / 3;
    let extra = total % 3;
    let counts = [
        base + u32::from(extra > 0),
        base + u32::from(extra > 1),
        base,
    ];
    let values = [9.0, 5.0, 2.0];
    let targets = (0..3)
        .map(|s| TargetTypeSpec {
            id: format!("t{s}"),
            count: counts[s],
            value: values[s],
        })
        .collect();
    WtaInstance::new(scaling_weapons(), targets).expect("static instance is valid")
}

/// GA sweep over raid sizes with the blue force fixed; 200 generations
/// per size, seeded per size.
pub fn run_scaling(seed: u64) -> ScalingReport {
    let generations = 200u32;
    let rows = [30u32, 50, 70, 90]
        .iter()
        .map(|&total| {
            let instance = scaling_instance(total);
            let started = Instant::now();
            let solution = solve_ga(
                &instance,
                GaBudget::Generations(generations),
                derive_seed(seed, "scaling", total as u64),
            );
            scaling_row(&instance, total, solution, started.elapsed().as_secs_f64())
        })
        .collect();
    ScalingReport {
        weapon_units: scaling_weapons().iter().map(|w| w.inventory).sum(),
        generations,
        rows,
    }
}

pub fn scaling_row(
    instance: &WtaInstance,
    total_targets: u32,
    solution: Solution,
    elapsed_secs: f64,
) -> ScalingRow {
    let raid_value: f64 = instance
        .targets
        .iter()
        .map(|t| t.count as f64 * t.value)
        .sum();
    let ok = feasible(instance, &solution.allocation)
        .map(|(ok, _)| ok)
        .unwrap_or(false);
    ScalingRow {
        total_targets,
        tvd: solution.tvd,
        raid_value,
        coverage: solution.tvd / raid_value,
        elapsed_secs,
        feasible: ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intent_blend_hits_pure_groups_at_grid_points() {
        let e = intent_evidence_at(0.0);
        assert_eq!(e[8], 1.0); // Surveillance
        let e = intent_evidence_at(1.0);
        assert_eq!(e[0], 1.0); // Strike
        let e = intent_evidence_at(0.5);
        assert_eq!(e[4], 1.0); // StrategicBombing
        let e = intent_evidence_at(0.375);
        assert!((e[6] - 0.5).abs() < 1e-12 && (e[4] - 0.5).abs() < 1e-12);
        for t in [0.0, 0.1, 0.33, 0.62, 0.99, 1.0] {
            let sum: f64 = intent_evidence_at(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lethality_blend_endpoints() {
        assert_eq!(lethality_grades_at(0.0), vec![0.0, 0.0, 1.0]);
        assert_eq!(lethality_grades_at(0.5), vec![0.0, 1.0, 0.0]);
        assert_eq!(lethality_grades_at(1.0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn small_surface_grids_are_monotone() {
        let report = run_surfaces_with_points(12);
        for grid in &report.grids {
            let slack = 1e-12;
            for i in 0..grid.x.len() {
                for j in 0..grid.y.len() {
                    if i + 1 < grid.x.len() {
                        let (a, b) = (grid.threat[i][j], grid.threat[i + 1][j]);
                        match grid.x_axis.direction() {
                            Direction::NonIncreasing => assert!(b <= a + slack, "{} x", grid.name),
                            Direction::NonDecreasing => assert!(b + slack >= a, "{} x", grid.name),
                        }
                    }
                    if j + 1 < grid.y.len() {
                        let (a, b) = (grid.threat[i][j], grid.threat[i][j + 1]);
                        match grid.y_axis.direction() {
                            Direction::NonIncreasing => assert!(b <= a + slack, "{} y", grid.name),
                            Direction::NonDecreasing => assert!(b + slack >= a, "{} y", grid.name),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn surface_csv_has_full_grid() {
        let report = run_surfaces_with_points(5);
        let csv = report.grids[0].to_csv();
        assert_eq!(csv.lines().count(), 26); // header + 25 points
    }

    #[test]
    fn scaling_rows_scale_down_in_coverage() {
        let report = run_scaling(3);
        assert_eq!(report.weapon_units, 30);
        for pair in report.rows.windows(2) {
            assert!(pair[1].coverage <= pair[0].coverage + 1e-9);
        }
        for row in &report.rows {
            assert!(row.feasible);
        }
    }

    #[test]
    fn jamming_smoke_run() {
        let report = run_jamming(5, 20, 120).unwrap();
        assert_eq!(report.replications.len(), 20);
        assert!(report.total_jam_ticks > 0);
        assert!(report.total_messages < report.total_jam_ticks);
        assert!(!report.rd_fit.fits.is_empty());
    }

    #[test]
    fn order_stats_checks_beta_laws() {
        let report = run_order_stats(11).unwrap();
        assert!(report.min_beta_check.accepted);
        assert!(report.max_beta_check.accepted);
        assert!(!report.min_fit.fits.is_empty());
        assert!(!report.max_fit.fits.is_empty());
    }
}
