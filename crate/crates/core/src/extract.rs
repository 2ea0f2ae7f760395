//! Flow solution to action sequence: drop the zero-cost bookkeeping moves and
//! order each step's parallel actions so every one is legal when applied.

use std::collections::BTreeSet;

use crate::domain::{Action, ActionHistogram, ContainerId, Instance, ObjectId, Plan, RegionId, StackId};
use crate::error::ExtractError;
use crate::flow::{FlowSolution, Step};
use crate::gadget::{pebble_state, EdgeKind, GadgetGraph, NodeId, NodeKind};
use crate::solver::schedule::Clock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Resource {
    Stack(usize),
    Container(usize),
}

struct Pending {
    action: Action,
    stack: usize,
    vacates: Vec<Resource>,
    fills: Vec<Resource>,
}

fn rank(a: &Action) -> u8 {
    match a {
        Action::Topple { .. } => 0,
        Action::ScoopCarry { .. } => 1,
        Action::PickPlace { .. } => 2,
        Action::TablePick { .. } => 3,
        Action::ScoopLoad { .. } => 4,
        Action::ScoopUnload { .. } => 5,
    }
}

fn container_of(g: &GadgetGraph, v: NodeId) -> Option<(usize, usize)> {
    match g.nodes[v].kind {
        NodeKind::Container { container, region } => Some((container, region)),
        _ => None,
    }
}

/// Kahn's algorithm; ties go to the lowest (kind rank, stack id).
fn linearize(pending: Vec<Pending>, t: usize) -> Result<Vec<Action>, ExtractError> {
    let n = pending.len();
    let mut indegree = vec![0usize; n];
    let mut after: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in 0..n {
            if a != b && pending[a].vacates.iter().any(|r| pending[b].fills.contains(r)) {
                after[a].push(b);
                indegree[b] += 1;
            }
        }
    }
    let mut ready: BTreeSet<(u8, usize, usize)> =
        (0..n).filter(|&i| indegree[i] == 0).map(|i| (rank(&pending[i].action), pending[i].stack, i)).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let i = first.2;
        out.push(pending[i].action);
        for &b in &after[i] {
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.insert((rank(&pending[b].action), pending[b].stack, b));
            }
        }
    }
    if out.len() != n {
        return Err(ExtractError::LinearizationCycle { t });
    }
    Ok(out)
}

/// Converts a feasible flow solution into a plan of the same cost.
pub fn extract(sol: &FlowSolution, g: &GadgetGraph, inst: &Instance) -> Result<Plan, ExtractError> {
    pebble_state(&inst.start, g).map_err(|e| ExtractError::Malformed { t: 0, msg: e.to_string() })?;
    let mut actions = Vec::new();
    for t in 0..sol.horizon {
        let row = &sol.steps[t];
        let mut pending = Vec::new();
        for (o, step) in row.iter().enumerate() {
            let Step::Move(e) = *step else { continue };
            let edge = g.edge(e);
            let malformed = |msg: &str| ExtractError::Malformed { t, msg: format!("o{o}: {msg}") };
            let object = ObjectId(o);
            let p = match edge.kind {
                EdgeKind::CrossTop => {
                    let u = g.top_of(edge.from).ok_or_else(|| malformed("cross edge off a top"))?;
                    let w = g.top_of(edge.to).ok_or_else(|| malformed("cross edge off a top"))?;
                    Pending {
                        action: Action::PickPlace { from: StackId(u), to: StackId(w) },
                        stack: u,
                        vacates: vec![Resource::Stack(u)],
                        fills: vec![Resource::Stack(w)],
                    }
                }
                EdgeKind::TablePick => {
                    let s = g.top_of(edge.to).ok_or_else(|| malformed("table pick off a top"))?;
                    Pending {
                        action: Action::TablePick { object, to: StackId(s) },
                        stack: s,
                        vacates: vec![],
                        fills: vec![Resource::Stack(s)],
                    }
                }
                EdgeKind::ScoopLoad => {
                    let (c, r) = container_of(g, edge.to).ok_or_else(|| malformed("load into non-container"))?;
                    let from = g.top_of(edge.from);
                    Pending {
                        action: Action::ScoopLoad { object, container: ContainerId(c), region: RegionId(r) },
                        stack: from.unwrap_or(usize::MAX),
                        vacates: from.map(Resource::Stack).into_iter().collect(),
                        fills: vec![Resource::Container(c)],
                    }
                }
                EdgeKind::ScoopUnload => {
                    let (c, _) = container_of(g, edge.from).ok_or_else(|| malformed("unload from non-container"))?;
                    let s = g.top_of(edge.to).ok_or_else(|| malformed("unload off a top"))?;
                    Pending {
                        action: Action::ScoopUnload { object, to: StackId(s) },
                        stack: s,
                        vacates: vec![Resource::Container(c)],
                        fills: vec![Resource::Stack(s)],
                    }
                }
                _ => continue,
            };
            pending.push(p);
        }
        for &a in &sol.activations[t] {
            let edge = g.edge(a);
            let carried = row.iter().filter(|s| **s == Step::Move(a)).count();
            if carried == 0 {
                return Err(ExtractError::Malformed { t, msg: format!("activation of e{a} carries nothing") });
            }
            let p = match edge.kind {
                EdgeKind::ToppleAggregate => {
                    let s = g.stack_of(edge.from).expect("staging belongs to a stack");
                    Pending {
                        action: Action::Topple { stack: StackId(s), count: carried },
                        stack: s,
                        vacates: vec![Resource::Stack(s)],
                        fills: vec![],
                    }
                }
                EdgeKind::ScoopCarryAggregate => {
                    let (c, _) = container_of(g, edge.from).expect("carry leaves a container");
                    let (_, r) = container_of(g, edge.to).expect("carry enters a container");
                    Pending {
                        action: Action::ScoopCarry { container: ContainerId(c), to_region: RegionId(r) },
                        stack: usize::MAX,
                        vacates: vec![Resource::Container(c)],
                        fills: vec![Resource::Container(c)],
                    }
                }
                _ => return Err(ExtractError::Malformed { t, msg: format!("e{a} is not an aggregate edge") }),
            };
            pending.push(p);
        }
        actions.extend(linearize(pending, t)?);
    }
    Ok(Plan::new(actions))
}

/// Per-kind counts, total and topple throughput.
pub fn action_histogram(plan: &Plan) -> ActionHistogram {
    ActionHistogram::of(&plan.actions)
}

/// Earliest-start makespan of a plan, in steps.
pub fn plan_makespan(inst: &Instance, plan: &Plan) -> usize {
    let mut clock = Clock::new(inst);
    let mut arr = inst.start.clone();
    for a in &plan.actions {
        clock = clock.schedule(&arr, a).0;
        match crate::domain::apply(inst, &arr, a) {
            Ok(next) => arr = next,
            Err(_) => break,
        }
    }
    clock.makespan as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{row_layout, validate_plan, ActionOptions, Arrangement, GoalSpec};
    use crate::flow::{build_model, check_solution, violations};
    use crate::gadget::gadget_for;
    use crate::solver::schedule::plan_to_flow;

    fn inst() -> Instance {
        Instance {
            name: "t".into(),
            stacks: row_layout(4, 3),
            buffers: 0,
            containers: vec![],
            start: Arrangement::from_stacks(&[vec![0, 1], vec![2, 3]], 4, 0),
            goal: GoalSpec::Multi { target: Arrangement::from_stacks(&[vec![], vec![], vec![3, 0], vec![1, 2]], 4, 0) },
            options: ActionOptions::TOPPLE,
        }
    }

    #[test]
    fn all_wait_gives_empty_plan() {
        let i = inst();
        let g = gadget_for(&i).unwrap();
        let model = build_model(&i, &g, 3).unwrap();
        let sol = FlowSolution::all_wait(&model);
        assert!(extract(&sol, &g, &i).unwrap().is_empty());
    }

    #[test]
    fn parallel_moves_ordered_by_stack() {
        let i = inst();
        let g = gadget_for(&i).unwrap();
        let pp = |a: usize, b: usize| Action::PickPlace { from: StackId(a), to: StackId(b) };
        // moves 0->2 and 1->3 happen in the same step
        let actions = [pp(1, 3), pp(0, 2), pp(1, 2), pp(0, 3)];
        let model = build_model(&i, &g, 2).unwrap();
        let sol = plan_to_flow(&model, &i, &actions).expect("fits in two steps");
        assert!(check_solution(&model, &sol), "{:?}", violations(&model, &sol));
        let plan = extract(&sol, &g, &i).unwrap();
        assert_eq!(plan.actions, vec![pp(0, 2), pp(1, 3), pp(0, 3), pp(1, 2)]);
        assert!(validate_plan(&i, &plan).success);
        assert_eq!(plan_makespan(&i, &plan), 2);
    }

    #[test]
    fn zero_flow_activation_is_rejected() {
        let i = inst();
        let g = gadget_for(&i).unwrap();
        let model = build_model(&i, &g, 1).unwrap();
        let mut sol = FlowSolution::all_wait(&model);
        sol.activations[0].push(g.topple_edges[0].unwrap());
        assert!(matches!(extract(&sol, &g, &i), Err(ExtractError::Malformed { .. })));
    }
}
