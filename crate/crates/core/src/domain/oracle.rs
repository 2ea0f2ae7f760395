//! Breadth-first optimal planner. Slow but obviously correct; every derived
//! reference value in the test suites comes from here.

use std::collections::{HashMap, VecDeque};

use super::{apply, is_goal, legal_actions, Action, ActionOptions, Arrangement, Instance, Plan};
use crate::error::DomainError;

pub const DEFAULT_STATE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimalPlanResult {
    Found { plan: Plan, cost: usize },
    Infeasible,
}

impl OptimalPlanResult {
    pub fn cost(&self) -> Option<usize> {
        match self {
            OptimalPlanResult::Found { cost, .. } => Some(*cost),
            OptimalPlanResult::Infeasible => None,
        }
    }
}

/// Minimum-action plan under `options`, or `Infeasible` if the goal is
/// unreachable. States are deduplicated modulo table poses.
pub fn brute_force_plan(
    inst: &Instance,
    options: ActionOptions,
    state_cap: usize,
) -> Result<OptimalPlanResult, DomainError> {
    let inst = inst.with_options(options);
    if is_goal(&inst.start, &inst.goal) {
        return Ok(OptimalPlanResult::Found { plan: Plan::default(), cost: 0 });
    }
    // parent[key] = (parent key, action leading here)
    let mut parent: HashMap<Vec<u16>, Option<(Vec<u16>, Action)>> = HashMap::new();
    let mut queue: VecDeque<Arrangement> = VecDeque::new();
    parent.insert(inst.start.symbolic_key(), None);
    queue.push_back(inst.start.clone());
    while let Some(arr) = queue.pop_front() {
        let key = arr.symbolic_key();
        for action in legal_actions(&inst, &arr) {
            let next = apply(&inst, &arr, &action)?;
            let next_key = next.symbolic_key();
            if parent.contains_key(&next_key) {
                continue;
            }
            parent.insert(next_key.clone(), Some((key.clone(), action)));
            if is_goal(&next, &inst.goal) {
                let mut actions = Vec::new();
                let mut cur = next_key;
                while let Some(Some((prev, a))) = parent.get(&cur) {
                    actions.push(*a);
                    cur = prev.clone();
                }
                actions.reverse();
                let cost = actions.len();
                return Ok(OptimalPlanResult::Found { plan: Plan::new(actions), cost });
            }
            if parent.len() >= state_cap {
                return Err(DomainError::BudgetExceeded { states_explored: parent.len() });
            }
            queue.push_back(next);
        }
    }
    Ok(OptimalPlanResult::Infeasible)
}
