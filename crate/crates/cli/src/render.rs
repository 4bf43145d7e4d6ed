//! Plain-text tables. Numbers print in shortest round-trip form so the table
//! carries the same values as the JSON output.

use std::io::{self, Write};

use clap::ValueEnum;
use lapguard::io::{
    format_ext, AnalysisReport, BoundOutput, Cell, CellGrid, CriticalOutput, EdgeId, IntervalRow,
    ReferenceComparison, StepLine,
};
use lapguard::sim::{SimLog, SimSummary};
use lapguard::SolveReport;
use serde::Serialize;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

fn cell(c: &Cell) -> String {
    c.0.map_or_else(|| "x".to_string(), format_ext)
}

fn ids(edges: &[EdgeId]) -> String {
    let parts: Vec<String> = edges
        .iter()
        .map(|e| format!("({},{})", e.agent, e.task))
        .collect();
    parts.join(" ")
}

pub fn grid(out: &mut impl Write, cells: &CellGrid) -> io::Result<()> {
    let text: Vec<Vec<String>> = cells.iter().map(|r| r.iter().map(cell).collect()).collect();
    let width = text.iter().flatten().map(String::len).max().unwrap_or(1);
    for row in &text {
        let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        writeln!(out, "{}", padded.join("  "))?;
    }
    Ok(())
}

pub fn solve(out: &mut impl Write, report: &SolveReport) -> io::Result<()> {
    writeln!(out, "assignment: {}", report.assignment)?;
    writeln!(out, "cost: {}", report.cost)?;
    writeln!(out, "unique: {}", report.unique)
}

pub fn bound(out: &mut impl Write, bound: &BoundOutput) -> io::Result<()> {
    grid(out, &bound.deltas)?;
    if !bound.saturated.is_empty() {
        writeln!(out, "saturated: {}", ids(&bound.saturated))?;
    }
    Ok(())
}

pub fn critical(
    out: &mut impl Write,
    c: &CriticalOutput,
    reference: Option<&ReferenceComparison>,
) -> io::Result<()> {
    grid(out, &c.deltas)?;
    writeln!(out, "iterations: {}", c.iterations)?;
    writeln!(out, "residual: {}", c.residual)?;
    writeln!(out, "stop_tol: {}", c.stop_tol)?;
    writeln!(out, "converged: {}", c.converged)?;
    writeln!(out, "is_critical: {}", c.is_critical)?;
    writeln!(out, "allowable: {}", c.allowable)?;
    if !c.saturated.is_empty() {
        writeln!(out, "saturated: {}", ids(&c.saturated))?;
    }
    if let Some(r) = reference {
        writeln!(out, "divergence from reference:")?;
        grid(out, &r.divergence)?;
        writeln!(out, "max_abs_divergence: {}", r.max_abs_divergence)?;
        writeln!(out, "reference_allowable: {}", r.reference_allowable)?;
        writeln!(
            out,
            "reference_residual: {}",
            format_ext(r.reference_residual)
        )?;
        writeln!(out, "reference_critical: {}", r.reference_critical)?;
    }
    Ok(())
}

pub fn intervals(out: &mut impl Write, rows: &[IntervalRow]) -> io::Result<()> {
    writeln!(out, "agent,task,assigned,lower,upper")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.agent,
            r.task,
            r.assigned,
            cell(&r.lower),
            cell(&r.upper)
        )?;
    }
    Ok(())
}

pub fn verdict<T: Serialize>(out: &mut impl Write, format: Format, v: &T) -> io::Result<()> {
    let value = serde_json::to_value(v)?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&value)?),
        Format::Table => writeln!(out, "{}", value["result"]),
    }
}

pub fn analysis(out: &mut impl Write, r: &AnalysisReport) -> io::Result<()> {
    writeln!(out, "agents: {}  tasks: {}", r.num_agents, r.num_tasks)?;
    writeln!(out, "assignment: {}", ids(&r.solve.assignment))?;
    writeln!(out, "cost: {}", r.solve.cost)?;
    writeln!(out, "unique: {}", r.solve.unique)?;
    writeln!(out, "\nsensitivities:")?;
    grid(out, &r.sensitivities)?;
    writeln!(out, "\nallowable bound:")?;
    bound(out, &r.allowable_bound)?;
    writeln!(out, "\ncritical perturbation:")?;
    critical(out, &r.critical, None)?;
    writeln!(out, "\nintervals:")?;
    intervals(out, &r.intervals)
}

pub fn simulation(
    out: &mut impl Write,
    seed: u64,
    log: &SimLog,
    summary: &SimSummary,
    summary_only: bool,
) -> io::Result<()> {
    if !summary_only {
        writeln!(out, "seed {seed} policy {}", log.policy)?;
        writeln!(out, "step  assignment  certified  reassigned")?;
        for record in &log.steps {
            let line = StepLine::new(log, record);
            writeln!(
                out,
                "{:>4}  {}  {}  {}",
                line.step,
                ids(&line.assignment),
                line.certified,
                line.reassigned
            )?;
        }
    }
    let cert = summary
        .certification_step
        .map_or_else(|| "none".to_string(), |s| s.to_string());
    writeln!(
        out,
        "seed {seed} policy {}: steps {} distance {} reassignments {} (after lock {}) \
         certified at {cert} completed {} optimal {} gap {}",
        summary.policy,
        summary.steps,
        summary.total_distance,
        summary.reassignments,
        summary.reassignments_after_certification,
        summary.completed,
        summary.ground_truth_optimal_distance,
        summary.optimality_gap,
    )
}
