//! Command-line interface: simulate, assess, allocate, fit, check-trace
//! and experiment subcommands. Exit codes: 0 success, 1 validation error,
//! 2 runtime error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::experiment::{experiment, ExperimentName};
use crate::report::{emit_report, read_trace_csv, ReportFormat};
use crate::runner::{run, PlanningBudget, SimConfig};
use crate::scenario::load_scenario;
use crate::stream::JamInjection;
use crate::SimError;
use tewa_core::eval::{check_trace_conflicts, fit_report, sra_conflict_rules, FAMILY_LIBRARY};
use tewa_core::threat::{prioritize, threat_rulebase, ConflictLevel, TargetTrack};
use tewa_core::wta::{
    solve_exact, solve_ga, solve_greedy, GaBudget, Solution, TargetTypeSpec, WeaponType,
    WtaInstance,
};

#[derive(Parser)]
#[command(
    name = "tewa",
    about = "Threat evaluation and weapon assignment engine with a deterministic combat-simulation harness"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario tick loop and write report files.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        ticks: u64,
        #[arg(long, default_value_t = 1)]
        replications: u32,
        #[arg(long)]
        out: PathBuf,
        /// Run replications across threads (output is identical).
        #[arg(long)]
        parallel: bool,
        /// Disable the jamming injection model.
        #[arg(long)]
        no_jamming: bool,
        /// Planning budget for the allocation GA, e.g. "50g" or "30s".
        #[arg(long, default_value = "50g")]
        planning: String,
    },
    /// Score and rank the tracks in a JSON track file.
    Assess {
        #[arg(long = "track-file")]
        track_file: PathBuf,
        #[arg(long)]
        cl: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a weapon-allocation instance file.
    Allocate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = ["exact", "greedy", "ga"])]
        solver: String,
        /// GA budget: "<n>g" generations (default unit) or "<s>s" seconds.
        #[arg(long, default_value = "200g")]
        budget: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the distribution library to a newline-separated sample file.
    Fit {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a trace CSV for conflicting plan states.
    CheckTrace {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run a canned experiment and write its report files.
    Experiment {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_budget(text: &str) -> Result<GaBudget, SimError> {
    let bad = || SimError::validation("budget", format!("cannot parse budget '{text}'"));
    if let Some(stripped) = text.strip_suffix('s') {
        let secs: f64 = stripped.parse().map_err(|_| bad())?;
        if secs <= 0.0 {
            return Err(bad());
        }
        Ok(GaBudget::WallClockSecs(secs))
    } else {
        let gens: u32 = text
            .strip_suffix('g')
            .unwrap_or(text)
            .parse()
            .map_err(|_| bad())?;
        Ok(GaBudget::Generations(gens))
    }
}

fn read_to_string(path: &PathBuf) -> Result<String, SimError> {
    std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &PathBuf, text: &str) -> Result<T, SimError> {
    serde_json::from_str(text).map_err(|e| SimError::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn write_or_print(out: Option<PathBuf>, contents: &str) -> Result<(), SimError> {
    match out {
        Some(path) => std::fs::write(&path, contents).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    solver: &'a str,
    seed: u64,
    budget: &'a str,
    tvd: f64,
    y: &'a Vec<Vec<u32>>,
    weapon_ids: Vec<&'a str>,
    target_ids: Vec<&'a str>,
}

#[derive(serde::Deserialize)]
struct InstanceFile {
    weapons: Vec<WeaponType>,
    targets: Vec<TargetTypeSpec>,
}

pub fn run_cli(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Simulate {
            scenario,
            seed,
            ticks,
            replications,
            out,
            parallel,
            no_jamming,
            planning,
        } => {
            let scenario = load_scenario(&scenario)?;
            let planning = match parse_budget(&planning)? {
                GaBudget::Generations(g) => PlanningBudget::Generations(g),
                GaBudget::WallClockSecs(s) => PlanningBudget::WallClockSecs(s),
            };
            let config = SimConfig {
                seed,
                ticks,
                replications,
                jam_injection: if no_jamming {
                    JamInjection::default()
                } else {
                    JamInjection::on()
                },
                planning,
                parallel,
            };
            let report = run(&scenario, &config)?;
            let written = emit_report(&report, ReportFormat::Both, &out)?;
            for path in written {
                println!("{}", path.display());
            }
            println!(
                "replications: {}  jam rate: {:.3}  messages: {}  conflicts: {}",
                report.replications.len(),
                report.aggregate.jam_rate,
                report.aggregate.total_messages,
                report.aggregate.total_conflicts
            );
            Ok(())
        }
        Command::Assess { track_file, cl, out } => {
            let cl = ConflictLevel::new(cl)
                .ok_or_else(|| SimError::validation("cl", "conflict level must lie in [0, 1]"))?;
            let text = read_to_string(&track_file)?;
            let tracks: Vec<TargetTrack> = parse_json(&track_file, &text)?;
            for track in &tracks {
                track.validate()?;
            }
            let rb = threat_rulebase();
            let scores = prioritize(&tracks, cl, &rb)?;
            let mut csv = String::from("target_id,score,rank\n");
            for s in &scores {
                use std::fmt::Write as _;
                writeln!(csv, "{},{},{}", s.target_id, s.score, s.rank).expect("string write");
            }
            write_or_print(out, &csv)
        }
        Command::Allocate {
            instance,
            solver,
            budget,
            seed,
            out,
        } => {
            let text = read_to_string(&instance)?;
            let file: InstanceFile = parse_json(&instance, &text)?;
            let inst = WtaInstance::new(file.weapons, file.targets)?;
            let ga_budget = parse_budget(&budget)?;
            let solution: Solution = match solver.as_str() {
                "exact" => solve_exact(&inst)?,
                "greedy" => solve_greedy(&inst),
                _ => solve_ga(&inst, ga_budget, seed),
            };
            let doc = SolutionFile {
                solver: &solver,
                seed,
                budget: &budget,
                tvd: solution.tvd,
                y: &solution.allocation.y,
                weapon_ids: inst.weapons.iter().map(|w| w.id.as_str()).collect(),
                target_ids: inst.targets.iter().map(|t| t.id.as_str()).collect(),
            };
            let mut json = serde_json::to_string_pretty(&doc).expect("solution serializes");
            json.push('\n');
            write_or_print(out, &json)
        }
        Command::Fit { sample, alpha, out } => {
            let text = read_to_string(&sample)?;
            let values: Result<Vec<f64>, SimError> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    l.trim().parse::<f64>().map_err(|_| SimError::Parse {
                        path: sample.display().to_string(),
                        reason: format!("bad number '{l}'"),
                    })
                })
                .collect();
            let report = fit_report(&values?, &FAMILY_LIBRARY, alpha)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            write_or_print(out, &json)
        }
        Command::CheckTrace { trace } => {
            let entries = read_trace_csv(&trace)?;
            let report = check_trace_conflicts(&entries, &sra_conflict_rules())?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            print!("{json}");
            if report.clean {
                println!("trace is clean over {} ticks", report.total_ticks);
            } else {
                println!(
                    "{} conflicting ticks out of {}",
                    report.conflicts.len(),
                    report.total_ticks
                );
            }
            Ok(())
        }
        Command::Experiment { name, seed, out } => {
            let name = ExperimentName::parse(&name)?;
            let written = experiment(name, seed, &out)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}
