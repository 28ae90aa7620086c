//! Report emission: stable JSON, CSV projections of the same report, and
//! the trace CSV interchange format consumed by the conflict checker.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::runner::RunReport;
use crate::SimError;
use tewa_core::agents::{EventKind, TraceEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Both,
}

/// Writes the report under `dir` and returns the written paths. Field
/// ordering and formatting are stable, so re-emitting an identical report
/// is byte-identical.
pub fn emit_report(
    report: &RunReport,
    format: ReportFormat,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, SimError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| SimError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        let mut json = serde_json::to_string_pretty(report).expect("report serializes");
        json.push('\n');
        written.push(write_file(dir.join("report.json"), &json)?);
    }

    if matches!(format, ReportFormat::Csv | ReportFormat::Both) {
        written.push(write_file(dir.join("threats.csv"), &threats_csv(report))?);
        written.push(write_file(
            dir.join("allocations.csv"),
            &allocations_csv(report),
        )?);
        for rep in &report.replications {
            let mut combined = rep.sra_trace.clone();
            combined.extend(rep.addca_trace.iter().cloned());
            combined.sort_by_key(|e| (e.tick, e.agent.clone()));
            written.push(write_file(
                dir.join(format!("trace_rep{:03}.csv", rep.replication)),
                &trace_csv(&combined),
            )?);
        }
    }

    Ok(written)
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, SimError> {
    std::fs::write(&path, contents).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn threats_csv(report: &RunReport) -> String {
    let mut out = String::from("replication,tick,target_id,score,rank\n");
    for rep in &report.replications {
        for row in &rep.threats {
            writeln!(
                out,
                "{},{},{},{},{}",
                rep.replication, row.tick, row.target_id, row.score, row.rank
            )
            .expect("string write");
        }
    }
    out
}

fn allocations_csv(report: &RunReport) -> String {
    let mut out = String::from("replication,tick,solver,tvd,weapon,target,units\n");
    for rep in &report.replications {
        for row in &rep.allocations {
            for (w, weapon) in row.weapon_ids.iter().enumerate() {
                for (s, target) in row.target_kinds.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        rep.replication, row.tick, row.solver, row.tvd, weapon, target, row.y[w][s]
                    )
                    .expect("string write");
                }
            }
        }
    }
    out
}

/// Trace CSV: one row per entry; plan-state flags are 1/0 and empty for
/// plans the agent does not have; events joined by `|`.
pub fn trace_csv(entries: &[TraceEntry]) -> String {
    let mut out = String::from("tick,agent,p1,p2,p3,p4,selected_plan,events\n");
    for e in entries {
        let flag = |plan: &str| -> String {
            match e.state.iter().find(|(id, _)| id == plan) {
                Some((_, true)) => "1".to_string(),
                Some((_, false)) => "0".to_string(),
                None => String::new(),
            }
        };
        let events: Vec<&str> = e.events.iter().map(|k| k.as_str()).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.tick,
            e.agent,
            flag("p1"),
            flag("p2"),
            flag("p3"),
            flag("p4"),
            e.selected_plan.as_deref().unwrap_or(""),
            events.join("|")
        )
        .expect("string write");
    }
    out
}

fn parse_event_kind(name: &str) -> Option<EventKind> {
    Some(match name {
        "StatusObserved" => EventKind::StatusObserved,
        "JammingSuspected" => EventKind::JammingSuspected,
        "NewClusterEvent" => EventKind::NewClusterEvent,
        "NewClusterPriorityEvent" => EventKind::NewClusterPriorityEvent,
        "AllocationRequested" => EventKind::AllocationRequested,
        _ => return None,
    })
}

/// Reads a trace CSV back into entries (plan flags and selection only;
/// belief and rank annotations are not part of the interchange format).
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceEntry>, SimError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_trace_csv(&text).map_err(|reason| SimError::Parse {
        path: path.display().to_string(),
        reason,
    })
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceEntry>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty trace file")?;
    if header != "tick,agent,p1,p2,p3,p4,selected_plan,events" {
        return Err(format!("unexpected header '{header}'"));
    }
    let mut entries = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(format!("line {}: expected 8 fields", lineno + 2));
        }
        let tick: u64 = fields[0]
            .parse()
            .map_err(|_| format!("line {}: bad tick '{}'", lineno + 2, fields[0]))?;
        let mut state = Vec::new();
        for (i, plan) in ["p1", "p2", "p3", "p4"].iter().enumerate() {
            match fields[2 + i] {
                "" => {}
                "1" => state.push((plan.to_string(), true)),
                "0" => state.push((plan.to_string(), false)),
                other => {
                    return Err(format!("line {}: bad flag '{}'", lineno + 2, other));
                }
            }
        }
        let events = if fields[7].is_empty() {
            Vec::new()
        } else {
            fields[7]
                .split('|')
                .map(|name| {
                    parse_event_kind(name)
                        .ok_or_else(|| format!("line {}: unknown event '{name}'", lineno + 2))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        entries.push(TraceEntry {
            tick,
            agent: fields[1].to_string(),
            state,
            selected_plan: (!fields[6].is_empty()).then(|| fields[6].to_string()),
            selected_instance: None,
            events,
            jam_belief: None,
            candidates: Vec::new(),
        });
    }
    Ok(entries)
}
