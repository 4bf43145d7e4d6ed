//! Shortest-augmenting-path LAP solver and its force/block variants.
//!
//! Tasks are the rows that must all be covered; agents are columns, each used
//! at most once. Non-edges and blocked edges never enter the search, so an
//! uncoverable task surfaces as [`Error::Infeasible`] rather than as a huge
//! "optimal" cost.

use crate::assignment::{Assignment, BipartiteInstance, Edge};
use crate::error::{Error, Result};

/// Base tolerance used when comparing assignment costs for equality.
pub const TOL_EQ: f64 = 1e-9;

/// Cost-equality tolerance at the magnitude of `cost`: [`TOL_EQ`] absolute
/// for costs up to 1, relative beyond.
pub fn tie_tolerance(cost: f64) -> f64 {
    TOL_EQ * cost.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub assignment: Assignment,
    pub cost: f64,
    /// No other assignment satisfying the same constraints attains `cost`.
    pub unique: bool,
}

/// Membership constraint placed on a single edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeConstraint {
    /// The edge must be assigned.
    Force,
    /// The edge must not be assigned.
    Block,
}

impl std::str::FromStr for EdgeConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "force" => Ok(Self::Force),
            "block" => Ok(Self::Block),
            other => Err(Error::InvalidParameter(format!(
                "unknown constraint mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Restriction {
    forced: Vec<Edge>,
    blocked: Vec<Edge>,
}

impl Restriction {
    fn single(edge: Edge, mode: EdgeConstraint) -> Self {
        match mode {
            EdgeConstraint::Force => Self {
                forced: vec![edge],
                blocked: Vec::new(),
            },
            EdgeConstraint::Block => Self {
                forced: Vec::new(),
                blocked: vec![edge],
            },
        }
    }

    fn with_forced(&self, edge: Edge) -> Self {
        let mut next = self.clone();
        next.forced.push(edge);
        next
    }

    fn with_blocked(&self, edge: Edge) -> Self {
        let mut next = self.clone();
        next.blocked.push(edge);
        next
    }

    fn allows(&self, edge: Edge) -> bool {
        !self.blocked.contains(&edge)
            && self
                .forced
                .iter()
                .all(|f| *f == edge || (f.agent != edge.agent && f.task != edge.task))
    }
}

/// Dual potentials and column owners, one-based with slot 0 as the virtual
/// source column. Row indices past the real rows are zero-cost padding rows;
/// a column owned by one of them is simply unused.
#[derive(Debug, Clone)]
struct Potentials {
    u: Vec<f64>,
    v: Vec<f64>,
    owner: Vec<usize>,
}

/// `rows x cols` (rows <= cols) costs, row-major, `INFINITY` where no edge
/// exists. Implicitly padded to square with all-zero rows.
#[derive(Debug, Clone)]
struct Dense {
    rows: usize,
    cols: usize,
    cost: Vec<f64>,
}

impl Dense {
    fn from_instance(instance: &BipartiteInstance) -> Self {
        let (rows, cols) = (instance.num_tasks(), instance.num_agents());
        let mut cost = Vec::with_capacity(rows * cols);
        for t in 0..rows {
            for a in 0..cols {
                cost.push(instance.weight(Edge::new(a, t)).unwrap_or(f64::INFINITY));
            }
        }
        Self { rows, cols, cost }
    }

    /// Solves the real rows from zero potentials, then parks padding rows on
    /// the leftover columns. Free columns never have their potential
    /// lowered, so the padded state is still dual feasible and tight.
    fn solve(&self) -> Option<Potentials> {
        let n = self.cols;
        let mut p = Potentials {
            u: vec![0.0; n + 1],
            v: vec![0.0; n + 1],
            owner: vec![0; n + 1],
        };
        for row in 1..=self.rows {
            if !self.augment(&mut p, row, None, None) {
                return None;
            }
        }
        let mut pad = self.rows;
        for j in 1..=n {
            if p.owner[j] == 0 {
                pad += 1;
                p.owner[j] = pad;
            }
        }
        Some(p)
    }

    /// One shortest-augmenting-path phase from the free one-based `row`.
    /// Requires feasible potentials with every matched edge tight. The
    /// `blocked` (row, col) pair is treated as absent and `skip` as a column
    /// that may not be entered. Returns false when no free column is
    /// reachable, leaving `p` in an unspecified state.
    fn augment(
        &self,
        p: &mut Potentials,
        row: usize,
        blocked: Option<(usize, usize)>,
        skip: Option<usize>,
    ) -> bool {
        let n = self.cols;
        let inf = f64::INFINITY;
        let mut way = vec![0usize; n + 1];
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        if let Some(col) = skip {
            used[col] = true;
        }
        p.owner[0] = row;
        let mut j0 = 0usize;
        loop {
            used[j0] = true;
            let i0 = p.owner[j0];
            let row_costs = (i0 <= self.rows).then(|| &self.cost[(i0 - 1) * n..i0 * n]);
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let c = match row_costs {
                    _ if blocked == Some((i0, j)) => inf,
                    Some(costs) => costs[j - 1],
                    None => 0.0,
                };
                if c.is_finite() {
                    let reduced = c - p.u[i0] - p.v[j];
                    if reduced < minv[j] {
                        minv[j] = reduced;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return false;
            }
            for j in 0..=n {
                if used[j] {
                    p.u[p.owner[j]] += delta;
                    p.v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p.owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p.owner[j0] = p.owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
        true
    }

    /// Zero-based column of every real row.
    fn columns(&self, p: &Potentials) -> Vec<usize> {
        let mut col_of_row = vec![usize::MAX; self.rows];
        for j in 1..=self.cols {
            let i = p.owner[j];
            if (1..=self.rows).contains(&i) {
                col_of_row[i - 1] = j - 1;
            }
        }
        col_of_row
    }
}

/// Column chosen for each row of a `rows x cols` problem, or `None` when some
/// row cannot be covered.
fn shortest_augmenting_path(rows: usize, cols: usize, cost: Vec<f64>) -> Option<Vec<usize>> {
    debug_assert!(rows <= cols);
    debug_assert_eq!(cost.len(), rows * cols);
    let dense = Dense { rows, cols, cost };
    let p = dense.solve()?;
    Some(dense.columns(&p))
}

fn matching_cost(instance: &BipartiteInstance, agent_of_task: &[usize]) -> f64 {
    agent_of_task
        .iter()
        .enumerate()
        .map(|(t, &a)| {
            instance
                .weight(Edge::new(a, t))
                .expect("solver only picks edges")
        })
        .sum()
}

/// Optimal agent-of-task vector under `restriction`, with its cost.
fn solve_restricted(
    instance: &BipartiteInstance,
    restriction: &Restriction,
) -> Option<(Vec<usize>, f64)> {
    let n_tasks = instance.num_tasks();
    let n_agents = instance.num_agents();
    let mut agent_taken = vec![false; n_agents];
    let mut task_taken = vec![false; n_tasks];
    let mut agent_of_task = vec![usize::MAX; n_tasks];
    for f in &restriction.forced {
        if !instance.has_edge(*f) || restriction.blocked.contains(f) {
            return None;
        }
        agent_taken[f.agent] = true;
        task_taken[f.task] = true;
        agent_of_task[f.task] = f.agent;
    }
    let tasks: Vec<usize> = (0..n_tasks).filter(|&t| !task_taken[t]).collect();
    let agents: Vec<usize> = (0..n_agents).filter(|&a| !agent_taken[a]).collect();
    if tasks.len() > agents.len() {
        return None;
    }

    let mut cost = Vec::with_capacity(tasks.len() * agents.len());
    for &t in &tasks {
        for &a in &agents {
            let e = Edge::new(a, t);
            let w = match instance.weight(e) {
                Some(w) if !restriction.blocked.contains(&e) => w,
                _ => f64::INFINITY,
            };
            cost.push(w);
        }
    }
    let picks = shortest_augmenting_path(tasks.len(), agents.len(), cost)?;
    for (row, col) in picks.into_iter().enumerate() {
        agent_of_task[tasks[row]] = agents[col];
    }
    let total = matching_cost(instance, &agent_of_task);
    Some((agent_of_task, total))
}

/// An optimal solution kept with its dual potentials, answering single-edge
/// force and block queries with one augmentation each instead of a full
/// solve.
#[derive(Debug, Clone)]
pub(crate) struct WarmStart<'a> {
    instance: &'a BipartiteInstance,
    dense: Dense,
    potentials: Potentials,
    agent_of_task: Vec<usize>,
    cost: f64,
}

impl<'a> WarmStart<'a> {
    /// `None` when the instance is infeasible.
    pub(crate) fn new(instance: &'a BipartiteInstance) -> Option<Self> {
        let dense = Dense::from_instance(instance);
        let potentials = dense.solve()?;
        let agent_of_task = dense.columns(&potentials);
        let cost = matching_cost(instance, &agent_of_task);
        Some(Self {
            instance,
            dense,
            potentials,
            agent_of_task,
            cost,
        })
    }

    pub(crate) fn cost(&self) -> f64 {
        self.cost
    }

    pub(crate) fn agent_of_task(&self) -> &[usize] {
        &self.agent_of_task
    }

    /// Optimal cost with `edge` forced or blocked; `None` when infeasible.
    pub(crate) fn constrained_cost(&self, edge: Edge, mode: EdgeConstraint) -> Option<f64> {
        let current = self.agent_of_task[edge.task];
        let (row, col) = (edge.task + 1, edge.agent + 1);
        let mut p = self.potentials.clone();
        let reached = match mode {
            EdgeConstraint::Block if current != edge.agent => return Some(self.cost),
            EdgeConstraint::Force if current == edge.agent => return Some(self.cost),
            EdgeConstraint::Block => {
                p.owner[col] = 0;
                self.dense.augment(&mut p, row, Some((row, col)), None)
            }
            EdgeConstraint::Force => {
                self.instance.weight(edge)?;
                let displaced = p.owner[col];
                p.owner[current + 1] = 0;
                p.owner[col] = row;
                self.dense.augment(&mut p, displaced, None, Some(col))
            }
        };
        reached.then(|| matching_cost(self.instance, &self.dense.columns(&p)))
    }

    /// Whether blocking some edge of `agent_of_task` still reaches `cost`.
    fn has_tie(&self, agent_of_task: &[usize], cost: f64) -> bool {
        let tol = tie_tolerance(cost);
        agent_of_task.iter().enumerate().any(|(t, &a)| {
            self.constrained_cost(Edge::new(a, t), EdgeConstraint::Block)
                .is_some_and(|c| c <= cost + tol)
        })
    }
}

/// Whether some other assignment obeying `restriction` ties `cost`. An
/// alternative optimum must drop at least one assigned edge, so blocking each
/// non-forced assigned edge in turn is exhaustive.
fn has_tie(
    instance: &BipartiteInstance,
    restriction: &Restriction,
    agent_of_task: &[usize],
    cost: f64,
) -> bool {
    let tol = tie_tolerance(cost);
    agent_of_task.iter().enumerate().any(|(t, &a)| {
        let e = Edge::new(a, t);
        !restriction.forced.contains(&e)
            && solve_restricted(instance, &restriction.with_blocked(e))
                .is_some_and(|(_, c)| c <= cost + tol)
    })
}

/// Among assignments tied with `optimum`, the one whose task-ordered
/// agent list is lexicographically smallest.
fn lexicographic_optimum(
    instance: &BipartiteInstance,
    restriction: &Restriction,
    optimum: f64,
) -> (Vec<usize>, f64) {
    let tol = tie_tolerance(optimum);
    let mut current = restriction.clone();
    for task in 0..instance.num_tasks() {
        if current.forced.iter().any(|f| f.task == task) {
            continue;
        }
        let fixed = (0..instance.num_agents())
            .map(|a| Edge::new(a, task))
            .filter(|&e| instance.has_edge(e) && current.allows(e))
            .find_map(|e| {
                let next = current.with_forced(e);
                solve_restricted(instance, &next)
                    .filter(|(_, c)| *c <= optimum + tol)
                    .map(|_| next)
            })
            .expect("an optimal completion always exists");
        current = fixed;
    }
    solve_restricted(instance, &current).expect("fully forced restriction is feasible")
}

fn finish(
    instance: &BipartiteInstance,
    restriction: &Restriction,
    agents: Vec<usize>,
    cost: f64,
    unique: bool,
) -> Result<SolveReport> {
    let (agents, cost) = if unique {
        (agents, cost)
    } else {
        lexicographic_optimum(instance, restriction, cost)
    };
    Ok(SolveReport {
        assignment: Assignment::from_task_agents(agents)?,
        cost,
        unique,
    })
}

fn report_for(instance: &BipartiteInstance, restriction: &Restriction) -> Result<SolveReport> {
    let (agents, cost) = solve_restricted(instance, restriction).ok_or(Error::Infeasible)?;
    let unique = !has_tie(instance, restriction, &agents, cost);
    finish(instance, restriction, agents, cost, unique)
}

/// Minimum-cost assignment covering every task. Ties resolve to the
/// lexicographically smallest task-ordered agent list.
pub fn solve_lap(instance: &BipartiteInstance) -> Result<SolveReport> {
    let warm = WarmStart::new(instance).ok_or(Error::Infeasible)?;
    let unique = !warm.has_tie(warm.agent_of_task(), warm.cost());
    finish(
        instance,
        &Restriction::default(),
        warm.agent_of_task().to_vec(),
        warm.cost(),
        unique,
    )
}

/// Best assignment that contains (`Force`) or avoids (`Block`) `edge`.
///
/// Forcing contracts the edge's agent and task out of the problem; blocking
/// deletes the edge. Neither path uses sentinel weights.
pub fn constrained_solve(
    instance: &BipartiteInstance,
    edge: Edge,
    mode: EdgeConstraint,
) -> Result<SolveReport> {
    if !instance.has_edge(edge) {
        return Err(Error::UnknownEdge(edge));
    }
    report_for(instance, &Restriction::single(edge, mode))
}

/// Optimal cost, or `None` when infeasible.
pub(crate) fn optimal_cost(instance: &BipartiteInstance) -> Option<f64> {
    solve_restricted(instance, &Restriction::default()).map(|(_, c)| c)
}

pub fn assignment_cost(instance: &BipartiteInstance, assignment: &Assignment) -> Result<f64> {
    assignment
        .edges()
        .map(|e| instance.weight(e).ok_or(Error::UnknownEdge(e)))
        .sum()
}

/// True iff `assignment` is the only optimum: blocking any of its edges
/// strictly raises the cost. This is equivalent to every element-wise
/// sensitivity being nonzero.
pub fn uniqueness_check(instance: &BipartiteInstance, assignment: &Assignment) -> Result<bool> {
    assignment.validate_for(instance)?;
    let cost = assignment_cost(instance, assignment)?;
    let warm = WarmStart::new(instance).ok_or(Error::Infeasible)?;
    Ok(!warm.has_tie(assignment.agents(), cost))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> BipartiteInstance {
        BipartiteInstance::from_dense(&[[91.0, 33.0, 15.0], [5.0, 86.0, 92.0], [85.0, 9.0, 42.0]])
            .unwrap()
    }

    fn edges(report: &SolveReport) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = report
            .assignment
            .edges()
            .map(|e| (e.agent + 1, e.task + 1))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn solves_three_by_three_example() {
        let r = solve_lap(&worked_example()).unwrap();
        assert_eq!(edges(&r), vec![(1, 3), (2, 1), (3, 2)]);
        assert_eq!(r.cost, 29.0);
        assert!(r.unique);
    }

    #[test]
    fn single_cell() {
        let inst = BipartiteInstance::from_dense(&[[5.0]]).unwrap();
        let r = solve_lap(&inst).unwrap();
        assert_eq!(r.assignment.agents(), &[0]);
        assert_eq!(r.cost, 5.0);
        assert!(r.unique);
    }

    #[test]
    fn anti_diagonal_penalty_picks_diagonal() {
        let inst = BipartiteInstance::from_dense(&[[0.0, 10.0], [10.0, 0.0]]).unwrap();
        let r = solve_lap(&inst).unwrap();
        assert_eq!(r.assignment.agents(), &[0, 1]);
        assert_eq!(r.cost, 0.0);
        assert!(r.unique);
    }

    #[test]
    fn ties_break_lexicographically() {
        let inst = BipartiteInstance::from_dense(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let r = solve_lap(&inst).unwrap();
        assert!(!r.unique);
        assert_eq!(r.assignment.agents(), &[0, 1]);

        let inst =
            BipartiteInstance::from_dense(&[[2.0, 2.0, 9.0], [1.0, 1.0, 9.0], [9.0, 9.0, 0.0]])
                .unwrap();
        let r = solve_lap(&inst).unwrap();
        assert!(!r.unique);
        assert_eq!(r.assignment.agents(), &[0, 1, 2]);
    }

    #[test]
    fn infeasible_when_hall_condition_fails() {
        let inst =
            BipartiteInstance::from_sparse(vec![vec![Some(1.0), None], vec![Some(1.0), None]])
                .unwrap();
        assert_eq!(solve_lap(&inst).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn rectangular_uses_cheapest_agents() {
        let inst = BipartiteInstance::from_dense(&[[4.0], [1.0], [3.0]]).unwrap();
        let r = solve_lap(&inst).unwrap();
        assert_eq!(r.assignment.agents(), &[1]);
        assert_eq!(r.cost, 1.0);
    }

    #[test]
    fn block_example() {
        let r =
            constrained_solve(&worked_example(), Edge::new(1, 0), EdgeConstraint::Block).unwrap();
        assert_eq!(edges(&r), vec![(1, 3), (2, 2), (3, 1)]);
        assert_eq!(r.cost, 186.0);
    }

    #[test]
    fn force_example() {
        let r =
            constrained_solve(&worked_example(), Edge::new(0, 0), EdgeConstraint::Force).unwrap();
        assert_eq!(edges(&r), vec![(1, 1), (2, 3), (3, 2)]);
        assert_eq!(r.cost, 192.0);
    }

    #[test]
    fn blocking_only_edge_is_infeasible() {
        let inst = BipartiteInstance::from_dense(&[[5.0]]).unwrap();
        assert_eq!(
            constrained_solve(&inst, Edge::new(0, 0), EdgeConstraint::Block).unwrap_err(),
            Error::Infeasible
        );
    }

    #[test]
    fn constrained_solve_rejects_non_edges() {
        let inst =
            BipartiteInstance::from_sparse(vec![vec![Some(1.0), None], vec![None, Some(1.0)]])
                .unwrap();
        assert_eq!(
            constrained_solve(&inst, Edge::new(0, 1), EdgeConstraint::Force).unwrap_err(),
            Error::UnknownEdge(Edge::new(0, 1))
        );
    }

    #[test]
    fn costs_by_direct_summation() {
        let c = worked_example();
        let star = Assignment::from_task_agents(vec![1, 2, 0]).unwrap();
        let diag = Assignment::from_task_agents(vec![0, 1, 2]).unwrap();
        assert_eq!(assignment_cost(&c, &star).unwrap(), 29.0);
        assert_eq!(assignment_cost(&c, &diag).unwrap(), 219.0);

        let empty = BipartiteInstance::from_dense(&[[0.0; 0]; 2]).unwrap();
        let none = Assignment::from_task_agents(vec![]).unwrap();
        assert_eq!(assignment_cost(&empty, &none).unwrap(), 0.0);
    }

    #[test]
    fn cost_of_non_edge_is_an_error() {
        let inst =
            BipartiteInstance::from_sparse(vec![vec![Some(1.0), None], vec![None, Some(1.0)]])
                .unwrap();
        let anti = Assignment::from_task_agents(vec![1, 0]).unwrap();
        assert_eq!(
            assignment_cost(&inst, &anti).unwrap_err(),
            Error::UnknownEdge(Edge::new(1, 0))
        );
    }

    #[test]
    fn uniqueness_examples() {
        let c = worked_example();
        let star = Assignment::from_task_agents(vec![1, 2, 0]).unwrap();
        assert!(uniqueness_check(&c, &star).unwrap());

        let flat = BipartiteInstance::from_dense(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        for agents in [vec![0, 1], vec![1, 0]] {
            let a = Assignment::from_task_agents(agents).unwrap();
            assert!(!uniqueness_check(&flat, &a).unwrap());
        }

        let diag = BipartiteInstance::from_dense(&[[0.0, 10.0], [10.0, 0.0]]).unwrap();
        let a = Assignment::from_task_agents(vec![0, 1]).unwrap();
        assert!(uniqueness_check(&diag, &a).unwrap());
    }

    #[test]
    fn empty_instance_solves_to_zero() {
        let inst = BipartiteInstance::from_dense(&[[0.0; 0]; 3]).unwrap();
        let r = solve_lap(&inst).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.assignment.num_tasks(), 0);
    }

    #[test]
    fn warm_queries_match_fresh_solves() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let tasks = rng.gen_range(1..=5);
            let agents = tasks + rng.gen_range(0..=3);
            let rows: Vec<Vec<Option<f64>>> = (0..agents)
                .map(|_| {
                    (0..tasks)
                        .map(|_| rng.gen_bool(0.8).then(|| f64::from(rng.gen_range(0..20))))
                        .collect()
                })
                .collect();
            let inst = BipartiteInstance::from_sparse(rows).unwrap();
            let Some(warm) = WarmStart::new(&inst) else {
                assert!(solve_restricted(&inst, &Restriction::default()).is_none());
                continue;
            };
            assert_eq!(Some(warm.cost()), optimal_cost(&inst));
            for e in inst.edges().collect::<Vec<_>>() {
                for mode in [EdgeConstraint::Force, EdgeConstraint::Block] {
                    let fresh = solve_restricted(&inst, &Restriction::single(e, mode)).map(|r| r.1);
                    assert_eq!(warm.constrained_cost(e, mode), fresh, "{e} {mode:?}");
                }
            }
        }
    }
}
