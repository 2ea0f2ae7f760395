//! Anytime exact solver for the time-expanded flow model.
//!
//! For each horizon `T` (ascending) a depth-first branch-and-bound searches
//! serial action sequences whose earliest-start schedule fits in `T`. The
//! optimum can only improve as `T` grows, so by default the search starts at
//! the largest horizon. Each incumbent is converted into a flow solution of
//! the model whose horizon is the incumbent's own makespan.

mod bound;
pub mod schedule;
mod search;

use std::collections::hash_map::{Entry, HashMap};
use std::time::{Duration, Instant};

use crate::domain::{Action, Instance};
use crate::flow::{build_model, FlowModel, FlowSolution};
use crate::error::FlowError;
use crate::gadget::{gadget_for, GadgetGraph};

pub use bound::{demand, lower_bound, makespan_bound, static_horizon, static_lower_bound, Demand, GoalIndex, LowerBound, Unreachable};
use search::{Outcome, Search};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub budget_ms: u64,
    /// Defaults to `horizon_max`.
    pub horizon_min: Option<usize>,
    /// Defaults to `2ℓ + S`.
    pub horizon_max: Option<usize>,
    pub seed: u64,
    /// Stop once `incumbent - lower bound <= gap`.
    pub optimality_gap_stop: u32,
    /// Deterministic cap on expanded nodes, checked alongside the budget.
    pub node_limit: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            budget_ms: 30_000,
            horizon_min: None,
            horizon_max: None,
            seed: 0,
            optimality_gap_stop: 0,
            node_limit: None,
        }
    }
}

impl SolveConfig {
    pub fn with_budget(budget_ms: u64) -> Self {
        SolveConfig { budget_ms, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    FeasibleBudgetExhausted,
    /// Stopped early because the incumbent is within the configured gap.
    GapLimitReached,
    InfeasibleUpToHorizon,
    NoSolutionInBudget,
}

impl Status {
    pub fn is_feasible(self) -> bool {
        matches!(self, Status::Optimal | Status::FeasibleBudgetExhausted | Status::GapLimitReached)
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::FeasibleBudgetExhausted => "feasible_budget_exhausted",
            Status::GapLimitReached => "gap_limit_reached",
            Status::InfeasibleUpToHorizon => "infeasible_up_to_horizon",
            Status::NoSolutionInBudget => "no_solution_in_budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub t_ms: f64,
    pub objective: u32,
    pub horizon: usize,
    pub nodes_expanded: u64,
    pub solution: FlowSolution,
    /// The serial sequence the search found (extraction may reorder ties).
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub incumbents: Vec<Incumbent>,
    pub time_to_first_feasible_ms: Option<f64>,
    pub status: Status,
    pub lower_bound: u32,
    pub nodes_expanded: u64,
    pub elapsed_ms: f64,
    pub graph: GadgetGraph,
}

impl SolveResult {
    pub fn best(&self) -> Option<&Incumbent> {
        self.incumbents.last()
    }

    pub fn objective(&self) -> Option<u32> {
        self.best().map(|i| i.objective)
    }

    /// Best objective found within the first `budget_ms` of the run.
    pub fn objective_at(&self, budget_ms: f64) -> Option<u32> {
        self.incumbents.iter().take_while(|i| i.t_ms <= budget_ms).last().map(|i| i.objective)
    }

    /// One line per incumbent: `t_ms objective horizon nodes_expanded`.
    pub fn trace(&self) -> String {
        self.incumbents
            .iter()
            .map(|i| format!("{:.3} {} {} {}\n", i.t_ms, i.objective, i.horizon, i.nodes_expanded))
            .collect()
    }
}

pub fn default_horizon_max(inst: &Instance) -> usize {
    2 * inst.object_count() + inst.stack_count()
}

/// Solves `inst` with the action set given by its options.
pub fn solve_anytime(inst: &Instance, config: &SolveConfig) -> Result<SolveResult, FlowError> {
    let graph = gadget_for(inst)?;
    solve_on(inst, graph, config)
}

pub fn solve_on(inst: &Instance, graph: GadgetGraph, config: &SolveConfig) -> Result<SolveResult, FlowError> {
    let started = Instant::now();
    let deadline = started + Duration::from_millis(config.budget_ms.max(1));
    let mut result = SolveResult {
        incumbents: Vec::new(),
        time_to_first_feasible_ms: None,
        status: Status::InfeasibleUpToHorizon,
        lower_bound: 0,
        nodes_expanded: 0,
        elapsed_ms: 0.0,
        graph,
    };
    let root_lb = match lower_bound(inst, &result.graph) {
        Ok(lb) => lb.value,
        Err(_) => {
            result.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            return Ok(result);
        }
    };
    result.lower_bound = root_lb;
    let idx = GoalIndex::new(inst);
    let root_clock = schedule::Clock::new(inst);
    let root_makespan = makespan_bound(&demand(&idx, &inst.start), &root_clock) as usize;
    let h_max = config.horizon_max.unwrap_or_else(|| default_horizon_max(inst));
    let h_min = config.horizon_min.unwrap_or(h_max).max(static_horizon(inst, &result.graph)).max(root_makespan);
    let mut models: HashMap<usize, FlowModel> = HashMap::new();

    let mut best: Option<u32> = None;
    let mut nodes = 0u64;
    let mut aborted = false;
    let mut gap_hit = false;
    for horizon in h_min..=h_max {
        let mut found: Vec<(Vec<Action>, u32, u64, f64)> = Vec::new();
        let gap = config.optimality_gap_stop;
        let mut search = Search::new(
            inst,
            &idx,
            horizon as u32,
            best,
            deadline,
            config.node_limit,
            nodes,
            config.seed,
            |path: &[Action], cost: u32, n: u64| {
                found.push((path.to_vec(), cost, n, started.elapsed().as_secs_f64() * 1e3));
                if cost <= root_lb + gap { Outcome::Stop } else { Outcome::Continue }
            },
        );
        search.run();
        nodes = search.nodes;
        let (time_pruned, stopped) = (search.time_pruned, search.stopped);
        aborted = search.aborted;
        best = search.best;
        drop(search);
        for (actions, cost, n, t_ms) in found {
            let makespan = schedule::schedule_plan(inst, &actions).iter().map(|t| t.end as usize).max().unwrap_or(0);
            let model = match models.entry(makespan) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(build_model(inst, &result.graph, makespan)?),
            };
            let solution = schedule::plan_to_flow(model, inst, &actions).expect("a schedule fits its own makespan");
            result.incumbents.push(Incumbent { t_ms, objective: cost, horizon: makespan, nodes_expanded: n, solution, actions });
        }
        if stopped {
            gap_hit = best.is_some_and(|b| b > root_lb);
            break;
        }
        if aborted {
            break;
        }
        if !time_pruned {
            break;
        }
    }
    result.nodes_expanded = nodes;
    result.time_to_first_feasible_ms = result.incumbents.first().map(|i| i.t_ms);
    result.status = match (best.is_some(), aborted, gap_hit) {
        (true, _, true) => Status::GapLimitReached,
        (true, false, false) => Status::Optimal,
        (true, true, _) => Status::FeasibleBudgetExhausted,
        (false, true, _) => Status::NoSolutionInBudget,
        (false, false, _) => Status::InfeasibleUpToHorizon,
    };
    result.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(result)
}

#[cfg(test)]
mod tests;
