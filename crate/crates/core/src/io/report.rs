//! Structured reports and their JSON form.
//!
//! Agent and task numbers are one-based. Matrix cells serialize as JSON
//! numbers when finite, and as the strings `"inf"`, `"-inf"`, or `"x"` (no
//! edge) otherwise.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve_lap, Assignment, BipartiteInstance, Edge, SolveReport};
use crate::error::Result;
use crate::io::matrix::{format_ext, map_to_grid};
use crate::perturbation::{
    allowable_bound, critical_search, elementwise_sensitivities, halfspace_intervals, is_critical,
    verify_allowable, AllowableBound, CriticalOptions, CriticalSearchReport, IntervalTable,
    Perturbation, SensitivityMatrix,
};
use crate::sim::{Point, SimLog, StepRecord};

/// One matrix cell: a finite number, `±inf`, or no edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell(pub Option<f64>);

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            None => s.serialize_str("x"),
            Some(v) if v.is_finite() => s.serialize_f64(v),
            Some(v) => s.serialize_str(&format_ext(v)),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct CellVisitor;

        impl Visitor<'_> for CellVisitor {
            type Value = Cell;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, \"inf\", \"-inf\", or \"x\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Cell, E> {
                Ok(Cell(Some(v)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Cell, E> {
                Ok(Cell(Some(v as f64)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Cell, E> {
                Ok(Cell(Some(v as f64)))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Cell, E> {
                match v {
                    "x" => Ok(Cell(None)),
                    "inf" => Ok(Cell(Some(f64::INFINITY))),
                    "-inf" => Ok(Cell(Some(f64::NEG_INFINITY))),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(CellVisitor)
    }
}

pub type CellGrid = Vec<Vec<Cell>>;

fn cells<T: Copy>(map: &crate::assignment::EdgeMap<T>, f: impl FnMut(T) -> f64) -> CellGrid {
    map_to_grid(map, f)
        .into_iter()
        .map(|row| row.into_iter().map(Cell).collect())
        .collect()
}

pub fn sensitivity_cells(s: &SensitivityMatrix) -> CellGrid {
    cells(s.as_map(), |v| v)
}

pub fn perturbation_cells(p: &Perturbation) -> CellGrid {
    cells(p.as_map(), |v| v)
}

/// A one-based (agent, task) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeId {
    pub agent: usize,
    pub task: usize,
}

impl From<Edge> for EdgeId {
    fn from(e: Edge) -> Self {
        Self {
            agent: e.agent + 1,
            task: e.task + 1,
        }
    }
}

pub fn assignment_ids(a: &Assignment) -> Vec<EdgeId> {
    a.edges().map(EdgeId::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub assignment: Vec<EdgeId>,
    pub cost: f64,
    pub unique: bool,
}

impl From<&SolveReport> for SolveOutput {
    fn from(r: &SolveReport) -> Self {
        Self {
            assignment: assignment_ids(&r.assignment),
            cost: r.cost,
            unique: r.unique,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutput {
    pub deltas: CellGrid,
    pub saturated: Vec<EdgeId>,
}

impl From<&AllowableBound> for BoundOutput {
    fn from(b: &AllowableBound) -> Self {
        Self {
            deltas: perturbation_cells(&b.perturbation),
            saturated: b.saturated.iter().copied().map(EdgeId::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalOutput {
    pub deltas: CellGrid,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub stop_tol: f64,
    pub saturated: Vec<EdgeId>,
    /// Independent recheck: every finite sensitivity of the perturbed weights
    /// is within `stop_tol` of zero.
    pub is_critical: bool,
    pub allowable: bool,
}

impl CriticalOutput {
    pub fn new(
        instance: &BipartiteInstance,
        optimum: &Assignment,
        report: &CriticalSearchReport,
    ) -> Result<Self> {
        Ok(Self {
            deltas: perturbation_cells(&report.perturbation),
            iterations: report.iterations,
            residual: report.residual,
            converged: report.converged,
            stop_tol: report.stop_tol,
            saturated: report.saturated.iter().copied().map(EdgeId::from).collect(),
            is_critical: is_critical(instance, optimum, &report.perturbation, report.stop_tol)?,
            allowable: verify_allowable(instance, optimum, &report.perturbation)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub agent: usize,
    pub task: usize,
    pub assigned: bool,
    pub lower: Cell,
    pub upper: Cell,
}

pub fn interval_rows(table: &IntervalTable, optimum: &Assignment) -> Vec<IntervalRow> {
    table
        .iter()
        .map(|(e, iv)| IntervalRow {
            agent: e.agent + 1,
            task: e.task + 1,
            assigned: optimum.contains(e),
            lower: Cell(Some(iv.lower)),
            upper: Cell(Some(iv.upper)),
        })
        .collect()
}

/// Everything the analysis derives for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub num_agents: usize,
    pub num_tasks: usize,
    pub solve: SolveOutput,
    pub sensitivities: CellGrid,
    pub allowable_bound: BoundOutput,
    pub critical: CriticalOutput,
    /// Half-space intervals around the critical perturbation.
    pub intervals: Vec<IntervalRow>,
}

impl AnalysisReport {
    pub fn build(instance: &BipartiteInstance, options: &CriticalOptions) -> Result<Self> {
        let solved = solve_lap(instance)?;
        let optimum = &solved.assignment;
        let sens = elementwise_sensitivities(instance, optimum)?;
        let bound = allowable_bound(&sens, instance.num_tasks());
        let search = critical_search(instance, optimum, options)?;
        let table = halfspace_intervals(&search.perturbation, optimum);
        Ok(Self {
            num_agents: instance.num_agents(),
            num_tasks: instance.num_tasks(),
            solve: SolveOutput::from(&solved),
            sensitivities: sensitivity_cells(&sens),
            allowable_bound: BoundOutput::from(&bound),
            critical: CriticalOutput::new(instance, optimum, &search)?,
            intervals: interval_rows(&table, optimum),
        })
    }
}

/// How a computed perturbation compares with an externally supplied one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    /// Computed minus reference, per edge.
    pub divergence: CellGrid,
    pub max_abs_divergence: f64,
    pub reference_allowable: bool,
    /// Largest finite sensitivity magnitude on the weights shifted by the
    /// reference; zero for a critical reference.
    pub reference_residual: f64,
    pub reference_critical: bool,
}

pub fn compare_with_reference(
    instance: &BipartiteInstance,
    optimum: &Assignment,
    computed: &Perturbation,
    reference: &Perturbation,
    tol: f64,
) -> Result<ReferenceComparison> {
    let diff = computed
        .as_map()
        .map(|e, &d| d - reference.get(e).unwrap_or(f64::NAN));
    let max_abs_divergence = diff.iter().fold(0.0f64, |m, (_, d)| m.max(d.abs()));
    let allowable = verify_allowable(instance, optimum, reference)?;
    let shifted = reference.apply(instance)?;
    let residual = crate::perturbation::elementwise_sensitivities_with(
        &shifted,
        optimum,
        crate::perturbation::SensitivityOptions::degenerate_ok(),
    )
    .map(|s| s.max_abs_finite());
    let (reference_residual, reference_critical) = match residual {
        Ok(r) => (r, allowable && r <= tol),
        // The reference pushed the optimum out; no residual is defined.
        Err(crate::error::Error::NotOptimal { .. }) => (f64::INFINITY, false),
        Err(e) => return Err(e),
    };
    Ok(ReferenceComparison {
        divergence: cells(&diff, |v| v),
        max_abs_divergence,
        reference_allowable: allowable,
        reference_residual,
        reference_critical,
    })
}

/// One line of the simulation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLine {
    pub policy: crate::sim::Policy,
    pub step: usize,
    pub weights: Vec<Vec<f64>>,
    pub assignment: Vec<EdgeId>,
    pub positions: Vec<Point>,
    pub certified: bool,
    pub reassigned: bool,
}

impl StepLine {
    pub fn new(log: &SimLog, record: &StepRecord) -> Self {
        Self {
            policy: log.policy,
            step: record.step,
            weights: record.weights.clone(),
            assignment: assignment_ids(&record.assignment),
            positions: record.positions.clone(),
            certified: record.certified,
            reassigned: record.reassigned,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_use_explicit_tokens() {
        let row = vec![
            Cell(Some(1.5)),
            Cell(Some(f64::INFINITY)),
            Cell(Some(f64::NEG_INFINITY)),
            Cell(None),
        ];
        let json = serde_json::to_string(&row).unwrap();
        assert_eq!(json, r#"[1.5,"inf","-inf","x"]"#);
        let back: Vec<Cell> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, row);
        assert!(serde_json::from_str::<Cell>("\"nan\"").is_err());
    }

    #[test]
    fn analysis_report_round_trips() {
        let inst = BipartiteInstance::from_dense(&[
            [91.0, 33.0, 15.0],
            [5.0, 86.0, 92.0],
            [85.0, 9.0, 42.0],
        ])
        .unwrap();
        let report = AnalysisReport::build(&inst, &CriticalOptions::default()).unwrap();
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(report.critical.is_critical);
        assert!(report.critical.allowable);
    }

    #[test]
    fn pinned_edges_render_as_infinities() {
        let inst = BipartiteInstance::from_dense(&[[5.0]]).unwrap();
        let report = AnalysisReport::build(&inst, &CriticalOptions::default()).unwrap();
        let json = serde_json::to_string(&report.sensitivities).unwrap();
        assert_eq!(json, r#"[["inf"]]"#);
        let back: AnalysisReport =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
