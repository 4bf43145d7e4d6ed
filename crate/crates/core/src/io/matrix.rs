//! Comma-separated matrix files.
//!
//! Rows are agents and columns are tasks. A cell is a decimal number, `x` for
//! a missing edge, or (in extended-real grids only) `inf` / `-inf`. Blank
//! lines and lines starting with `#` are ignored.

use thiserror::Error;

use crate::assignment::{BipartiteInstance, Edge, EdgeMap};
use crate::error::Error;
use crate::perturbation::{ErrorBounds, Perturbation};

pub type Grid = Vec<Vec<Option<f64>>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Shape {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix has no rows")]
    Empty,
    #[error(transparent)]
    Model(#[from] Error),
}

/// Renders an extended real the way the parser reads it back.
pub fn format_ext(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

fn parse_cell(token: &str, allow_infinite: bool) -> Result<Option<f64>, String> {
    match token {
        "x" | "X" => return Ok(None),
        "inf" | "+inf" if allow_infinite => return Ok(Some(f64::INFINITY)),
        "-inf" if allow_infinite => return Ok(Some(f64::NEG_INFINITY)),
        _ => {}
    }
    // `f64::from_str` also accepts spellings like `nan` and `infinity`.
    let looks_numeric = token
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    match token.parse::<f64>() {
        Ok(v) if looks_numeric && v.is_finite() => Ok(Some(v)),
        Ok(_) if looks_numeric => Err(format!("`{token}` overflows a 64-bit float")),
        _ => Err(format!("expected a number or `x`, found `{token}`")),
    }
}

fn parse_grid_inner(text: &str, allow_infinite: bool) -> Result<Grid, FormatError> {
    let mut rows: Grid = Vec::new();
    let mut width = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split(',')
            .enumerate()
            .map(|(col, tok)| {
                parse_cell(tok.trim(), allow_infinite).map_err(|message| FormatError::Parse {
                    line,
                    column: col + 1,
                    message,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(FormatError::Shape {
                    line,
                    expected: w,
                    found: row.len(),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FormatError::Empty);
    }
    Ok(rows)
}

/// Reads a grid whose cells may be `inf` / `-inf`.
pub fn parse_ext_grid(text: &str) -> Result<Grid, FormatError> {
    parse_grid_inner(text, true)
}

/// Reads a grid of finite numbers and `x` cells.
pub fn parse_grid(text: &str) -> Result<Grid, FormatError> {
    parse_grid_inner(text, false)
}

/// Parses a cost matrix into an instance with edges exactly at the numeric
/// cells. A task column with no numeric cell can never be covered and is
/// reported as infeasible right away.
pub fn parse_matrix(text: &str) -> Result<BipartiteInstance, FormatError> {
    let grid = parse_grid(text)?;
    let tasks = grid[0].len();
    if (0..tasks).any(|t| grid.iter().all(|row| row[t].is_none())) {
        return Err(Error::Infeasible.into());
    }
    Ok(BipartiteInstance::from_sparse(grid)?)
}

pub fn serialize_grid(grid: &[Vec<Option<f64>>]) -> String {
    let mut out = String::new();
    for row in grid {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(|| "x".to_string(), format_ext))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn map_to_grid<T: Copy>(map: &EdgeMap<T>, mut f: impl FnMut(T) -> f64) -> Grid {
    (0..map.num_agents())
        .map(|a| {
            (0..map.num_tasks())
                .map(|t| map.get(Edge::new(a, t)).map(|v| f(*v)))
                .collect()
        })
        .collect()
}

pub fn serialize_instance(instance: &BipartiteInstance) -> String {
    serialize_grid(&map_to_grid(instance.weights(), |w| w))
}

fn grid_on_instance(text: &str, instance: &BipartiteInstance) -> Result<EdgeMap<f64>, FormatError> {
    let grid = parse_grid(text)?;
    let map = EdgeMap::from_rows(grid, instance.num_tasks())?;
    if !map.same_support(instance.weights()) {
        return Err(Error::ShapeMismatch(format!(
            "expected a {}x{} grid with `x` exactly where the instance has no edge",
            instance.num_agents(),
            instance.num_tasks()
        ))
        .into());
    }
    Ok(map)
}

/// Perturbation file: same grammar and shape as the instance's matrix.
pub fn parse_perturbation(
    text: &str,
    instance: &BipartiteInstance,
) -> Result<Perturbation, FormatError> {
    Ok(Perturbation::new(grid_on_instance(text, instance)?)?)
}

pub fn parse_error_bounds(
    text: &str,
    instance: &BipartiteInstance,
) -> Result<ErrorBounds, FormatError> {
    Ok(ErrorBounds::new(grid_on_instance(text, instance)?)?)
}
