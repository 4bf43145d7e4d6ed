//! File formats and serializable reports.

mod matrix;
mod report;

pub use matrix::{
    format_ext, map_to_grid, parse_error_bounds, parse_ext_grid, parse_grid, parse_matrix,
    parse_perturbation, serialize_grid, serialize_instance, FormatError, Grid,
};
pub use report::{
    assignment_ids, compare_with_reference, interval_rows, perturbation_cells, sensitivity_cells,
    AnalysisReport, BoundOutput, Cell, CellGrid, CriticalOutput, EdgeId, IntervalRow,
    ReferenceComparison, SolveOutput, StepLine,
};
