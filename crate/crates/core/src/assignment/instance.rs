use std::fmt;

use crate::error::{Error, Result};

/// An (agent, task) pair. Indices are zero-based; `Display` renders the
/// one-based `(agent,task)` form used in matrix notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub agent: usize,
    pub task: usize,
}

impl Edge {
    pub const fn new(agent: usize, task: usize) -> Self {
        Self { agent, task }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.agent + 1, self.task + 1)
    }
}

/// Dense agent-by-task grid holding a value for each edge and nothing for
/// each non-edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap<T> {
    num_agents: usize,
    num_tasks: usize,
    cells: Vec<Option<T>>,
}

impl<T> EdgeMap<T> {
    pub fn from_rows(rows: Vec<Vec<Option<T>>>, num_tasks: usize) -> Result<Self> {
        let num_agents = rows.len();
        let mut cells = Vec::with_capacity(num_agents * num_tasks);
        for (agent, row) in rows.into_iter().enumerate() {
            if row.len() != num_tasks {
                return Err(Error::ShapeMismatch(format!(
                    "row {} has {} entries, expected {num_tasks}",
                    agent + 1,
                    row.len()
                )));
            }
            cells.extend(row);
        }
        Ok(Self {
            num_agents,
            num_tasks,
            cells,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    fn index(&self, edge: Edge) -> Option<usize> {
        (edge.agent < self.num_agents && edge.task < self.num_tasks)
            .then(|| edge.agent * self.num_tasks + edge.task)
    }

    pub fn get(&self, edge: Edge) -> Option<&T> {
        self.index(edge).and_then(|i| self.cells[i].as_ref())
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.get(edge).is_some()
    }

    /// Present entries in row-major (agent, then task) order.
    pub fn iter(&self) -> impl Iterator<Item = (Edge, &T)> + '_ {
        let tasks = self.num_tasks;
        self.cells.iter().enumerate().filter_map(move |(i, c)| {
            c.as_ref()
                .map(|v| (Edge::new(i / tasks.max(1), i % tasks.max(1)), v))
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.iter().map(|(e, _)| e)
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<T>]> + '_ {
        self.cells
            .chunks(self.num_tasks.max(1))
            .take(self.num_agents)
    }

    /// True when both maps have the same dimensions and the same set of
    /// present cells.
    pub fn same_support<U>(&self, other: &EdgeMap<U>) -> bool {
        self.num_agents == other.num_agents
            && self.num_tasks == other.num_tasks
            && self
                .cells
                .iter()
                .zip(&other.cells)
                .all(|(a, b)| a.is_some() == b.is_some())
    }

    pub fn map<U>(&self, mut f: impl FnMut(Edge, &T) -> U) -> EdgeMap<U> {
        let tasks = self.num_tasks.max(1);
        EdgeMap {
            num_agents: self.num_agents,
            num_tasks: self.num_tasks,
            cells: self
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| c.as_ref().map(|v| f(Edge::new(i / tasks, i % tasks), v)))
                .collect(),
        }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(Edge, &T) -> Result<U>) -> Result<EdgeMap<U>> {
        let tasks = self.num_tasks.max(1);
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.as_ref()
                    .map(|v| f(Edge::new(i / tasks, i % tasks), v))
                    .transpose()
            })
            .collect::<Result<_>>()?;
        Ok(EdgeMap {
            num_agents: self.num_agents,
            num_tasks: self.num_tasks,
            cells,
        })
    }

    pub(crate) fn get_mut(&mut self, edge: Edge) -> Option<&mut T> {
        let i = self.index(edge)?;
        self.cells[i].as_mut()
    }
}

/// The weighted bipartite graph: agents are rows, tasks are columns, and
/// an absent cell means the agent cannot take the task.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteInstance {
    weights: EdgeMap<f64>,
}

impl BipartiteInstance {
    pub fn new(weights: EdgeMap<f64>) -> Result<Self> {
        if weights.num_agents() < weights.num_tasks() {
            return Err(Error::TooFewAgents {
                agents: weights.num_agents(),
                tasks: weights.num_tasks(),
            });
        }
        if let Some((edge, &value)) = weights.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::NonFiniteWeight { edge, value });
        }
        Ok(Self { weights })
    }

    /// Complete bipartite instance from a dense agent-by-task matrix.
    pub fn from_dense<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let num_tasks = rows.first().map_or(0, |r| r.as_ref().len());
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().copied().map(Some).collect())
            .collect();
        Self::new(EdgeMap::from_rows(rows, num_tasks)?)
    }

    pub fn from_sparse(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let num_tasks = rows.first().map_or(0, Vec::len);
        Self::new(EdgeMap::from_rows(rows, num_tasks)?)
    }

    pub fn from_edges(
        num_agents: usize,
        num_tasks: usize,
        edges: impl IntoIterator<Item = (Edge, f64)>,
    ) -> Result<Self> {
        let mut rows = vec![vec![None; num_tasks]; num_agents];
        for (edge, w) in edges {
            if edge.agent >= num_agents || edge.task >= num_tasks {
                return Err(Error::EdgeOutOfRange {
                    edge,
                    agents: num_agents,
                    tasks: num_tasks,
                });
            }
            rows[edge.agent][edge.task] = Some(w);
        }
        let weights = EdgeMap {
            num_agents,
            num_tasks,
            cells: rows.into_iter().flatten().collect(),
        };
        Self::new(weights)
    }

    pub fn num_agents(&self) -> usize {
        self.weights.num_agents()
    }

    pub fn num_tasks(&self) -> usize {
        self.weights.num_tasks()
    }

    pub fn weight(&self, edge: Edge) -> Option<f64> {
        self.weights.get(edge).copied()
    }

    pub fn weights(&self) -> &EdgeMap<f64> {
        &self.weights
    }

    pub fn has_edge(&self, edge: Edge) -> bool {
        self.weights.contains(edge)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.weights.edges()
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    /// Instance on the same graph with every weight shifted by the matching
    /// entry of `deltas`.
    pub fn shifted(&self, deltas: &EdgeMap<f64>) -> Result<Self> {
        if !self.weights.same_support(deltas) {
            return Err(Error::ShapeMismatch(
                "perturbation is not defined on exactly the instance's edges".into(),
            ));
        }
        let weights = self
            .weights
            .map(|e, w| w + deltas.get(e).copied().unwrap_or(0.0));
        Self::new(weights)
    }
}

/// A full assignment: every task is mapped to a distinct agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    agent_of_task: Vec<usize>,
}

impl Assignment {
    /// Builds an assignment from a task-indexed agent list, checking that no
    /// agent is used twice.
    pub fn from_task_agents(agent_of_task: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(agent_of_task.len());
        for (task, &agent) in agent_of_task.iter().enumerate() {
            if !seen.insert(agent) {
                return Err(Error::InvalidAssignment(format!(
                    "agent {} assigned to more than one task (second is task {})",
                    agent + 1,
                    task + 1
                )));
            }
        }
        Ok(Self { agent_of_task })
    }

    /// Builds an assignment from explicit edges, which must cover tasks
    /// `0..num_tasks` exactly once.
    pub fn from_edges(num_tasks: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut slots = vec![None; num_tasks];
        for e in edges {
            let slot = slots.get_mut(e.task).ok_or_else(|| {
                Error::InvalidAssignment(format!("task {} out of range", e.task + 1))
            })?;
            if slot.replace(e.agent).is_some() {
                return Err(Error::InvalidAssignment(format!(
                    "task {} assigned twice",
                    e.task + 1
                )));
            }
        }
        let agents = slots
            .into_iter()
            .enumerate()
            .map(|(t, a)| {
                a.ok_or_else(|| Error::InvalidAssignment(format!("task {} unassigned", t + 1)))
            })
            .collect::<Result<_>>()?;
        Self::from_task_agents(agents)
    }

    pub fn agent_for(&self, task: usize) -> Option<usize> {
        self.agent_of_task.get(task).copied()
    }

    pub fn agents(&self) -> &[usize] {
        &self.agent_of_task
    }

    pub fn num_tasks(&self) -> usize {
        self.agent_of_task.len()
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.agent_for(edge.task) == Some(edge.agent)
    }

    /// Assigned edges in task order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.agent_of_task
            .iter()
            .enumerate()
            .map(|(task, &agent)| Edge::new(agent, task))
    }

    /// Checks the assignment is total on the instance's tasks and uses only
    /// instance edges.
    pub fn validate_for(&self, instance: &BipartiteInstance) -> Result<()> {
        if self.num_tasks() != instance.num_tasks() {
            return Err(Error::InvalidAssignment(format!(
                "assignment covers {} tasks, instance has {}",
                self.num_tasks(),
                instance.num_tasks()
            )));
        }
        match self.edges().find(|&e| !instance.has_edge(e)) {
            Some(e) => Err(Error::UnknownEdge(e)),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.edges().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}
