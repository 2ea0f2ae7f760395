//! Admissible lower bounds on the remaining action count and makespan.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::domain::{Arrangement, GoalSpec, Instance, Location, ObjectId, StackId};
use crate::gadget::{pebble_state, GadgetGraph, NodeId, NodeKind};

use super::schedule::Clock;

/// Lower bound on the optimal objective of every feasible horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LowerBound {
    pub value: u32,
}

/// Some object cannot reach any admissible terminal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unreachable {
    pub object: ObjectId,
}

/// Cheapest path costs from `src`, with aggregate edges charged `1/cap`.
/// Costs are scaled by `scale` (a common multiple of all capacities) so the
/// search stays in integers.
fn dijkstra(g: &GadgetGraph, src: NodeId, scale: u64) -> Vec<Option<u64>> {
    let mut dist = vec![None; g.nodes.len()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        for &e in g.out_edges(v) {
            let edge = g.edge(e);
            let w = if edge.kind.is_aggregate() {
                scale / edge.capacity as u64
            } else {
                u64::from(edge.cost) * scale
            };
            if dist[edge.to].is_none() {
                heap.push(Reverse((d + w, edge.to)));
            }
        }
    }
    dist
}

fn hops(g: &GadgetGraph, src: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.nodes.len()];
    let mut queue = std::collections::VecDeque::from([src]);
    dist[src] = Some(0);
    while let Some(v) = queue.pop_front() {
        for &e in g.out_edges(v) {
            let to = g.edge(e).to;
            if dist[to].is_none() {
                dist[to] = Some(dist[v].unwrap() + 1);
                queue.push_back(to);
            }
        }
    }
    dist
}

fn lcm_of_caps(g: &GadgetGraph) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    g.aggregate_edges().fold(1u64, |acc, e| {
        let c = e.capacity as u64;
        acc / gcd(acc, c) * c
    })
}

/// Nodes object `o` may end on.
fn terminal_nodes(inst: &Instance, g: &GadgetGraph, o: ObjectId) -> Vec<NodeId> {
    let target = inst.goal.target_of(o);
    match target {
        Some(Location::OnStack { stack, above }) => {
            let h = g.heights[stack.0];
            if above < h { vec![g.slots[stack.0][h - 1 - above]] } else { vec![] }
        }
        Some(Location::OnTable { .. }) => g.table.into_iter().collect(),
        Some(Location::InContainer { container }) => g.containers.get(container.0).cloned().unwrap_or_default(),
        None => (0..g.nodes.len())
            .filter(|&v| !matches!(g.nodes[v].kind, NodeKind::ToppleStaging { .. } | NodeKind::TableInterface { .. }))
            .collect(),
    }
}

/// Sum over objects of the cheapest static gadget path to an admissible
/// terminal node, aggregate edges charged `1/capacity`, rounded up.
pub fn static_lower_bound(inst: &Instance, g: &GadgetGraph) -> Result<LowerBound, Unreachable> {
    let start = match pebble_state(&inst.start, g) {
        Ok(p) => p,
        Err(_) => return Err(Unreachable { object: ObjectId(0) }),
    };
    let scale = lcm_of_caps(g);
    let mut total = 0u64;
    for (o, &src) in start.iter().enumerate() {
        let dist = dijkstra(g, src, scale);
        let best = terminal_nodes(inst, g, ObjectId(o)).into_iter().filter_map(|v| dist[v]).min();
        total += best.ok_or(Unreachable { object: ObjectId(o) })?;
    }
    Ok(LowerBound { value: total.div_ceil(scale) as u32 })
}

/// The larger of [`static_lower_bound`] and the blocker-aware bound of the
/// start arrangement.
pub fn lower_bound(inst: &Instance, g: &GadgetGraph) -> Result<LowerBound, Unreachable> {
    let fixed = static_lower_bound(inst, g)?;
    let idx = GoalIndex::new(inst);
    let blockers = demand(&idx, &inst.start).cost(&idx) as u32;
    Ok(LowerBound { value: fixed.value.max(blockers) })
}

/// Smallest horizon in which every object can traverse its shortest (in
/// edges) static path to an admissible terminal node.
pub fn static_horizon(inst: &Instance, g: &GadgetGraph) -> usize {
    let Ok(start) = pebble_state(&inst.start, g) else { return 0 };
    start
        .iter()
        .enumerate()
        .map(|(o, &src)| {
            let dist = hops(g, src);
            terminal_nodes(inst, g, ObjectId(o)).into_iter().filter_map(|v| dist[v]).min().unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// Goal data precomputed once per instance.
#[derive(Debug, Clone)]
pub struct GoalIndex {
    targets: Vec<Option<Location>>,
    /// For full multi goals: target position counted from the stack bottom.
    from_bottom: Option<Vec<usize>>,
    heights: Vec<usize>,
    /// Objects a single topple may carry; 1 without topples.
    batch: usize,
}

impl GoalIndex {
    pub fn new(inst: &Instance) -> Self {
        let n = inst.object_count();
        let targets = inst.goal.targets(n);
        let from_bottom = match &inst.goal {
            GoalSpec::Multi { target } => {
                let goal_heights: Vec<usize> = (0..inst.stack_count()).map(|s| target.height(StackId(s))).collect();
                Some(
                    target
                        .locations()
                        .iter()
                        .map(|l| match *l {
                            Location::OnStack { stack, above } => goal_heights[stack.0] - 1 - above,
                            _ => usize::MAX,
                        })
                        .collect(),
                )
            }
            _ => None,
        };
        GoalIndex {
            targets,
            from_bottom,
            heights: inst.heights(),
            batch: if inst.options.topple { inst.topple_cap().max(1) } else { 1 },
        }
    }
}

/// Per-state analysis shared by the cost and makespan bounds.
#[derive(Debug, Clone, Default)]
pub struct Demand {
    /// Actions that must place a specific object.
    pub placements: usize,
    /// Unconstrained or table-bound objects that must leave each stack.
    pub removals: Vec<usize>,
    /// Objects that must leave each stack.
    pub leave: Vec<usize>,
    /// Objects that must still arrive on each stack.
    pub arrive: Vec<usize>,
    /// Off-stack objects that still need a placement.
    pub waiting: Vec<ObjectId>,
}

impl Demand {
    pub fn cost(&self, idx: &GoalIndex) -> usize {
        self.placements + self.removals.iter().map(|&b| b.div_ceil(idx.batch)).sum::<usize>()
    }
}

/// Objects (bottom first) that must leave their stack, plus placement needs.
pub fn demand(idx: &GoalIndex, arr: &Arrangement) -> Demand {
    let stacks = idx.heights.len();
    let mut d = Demand {
        removals: vec![0; stacks],
        leave: vec![0; stacks],
        arrive: vec![0; stacks],
        ..Demand::default()
    };
    let mut contents: Vec<Vec<ObjectId>> = vec![Vec::new(); stacks];
    for (o, loc) in arr.locations().iter().enumerate() {
        if let Location::OnStack { stack, .. } = loc {
            contents[stack.0].push(ObjectId(o));
        }
    }
    for (s, objs) in contents.iter_mut().enumerate() {
        // bottom first
        objs.sort_unstable_by_key(|o| std::cmp::Reverse(match arr.location(*o) {
            Location::OnStack { above, .. } => above,
            _ => 0,
        }));
        let first_leaving = match &idx.from_bottom {
            Some(fb) => objs
                .iter()
                .enumerate()
                .position(|(j, o)| {
                    !matches!(idx.targets[o.0], Some(Location::OnStack { stack, .. }) if stack.0 == s) || fb[o.0] != j
                })
                .unwrap_or(objs.len()),
            None => {
                let mut first = objs.len();
                for (j, o) in objs.iter().enumerate() {
                    match idx.targets[o.0] {
                        Some(Location::OnStack { stack, above }) if stack.0 == s => {
                            if j + 1 + above <= idx.heights[s] {
                                first = first.min(j + 1 + above);
                            } else {
                                first = first.min(j);
                            }
                        }
                        Some(_) => first = first.min(j),
                        None => {}
                    }
                }
                first
            }
        };
        for &o in &objs[first_leaving.min(objs.len())..] {
            d.leave[s] += 1;
            match idx.targets[o.0] {
                Some(Location::OnStack { stack, .. }) => {
                    d.placements += 1;
                    d.arrive[stack.0] += 1;
                }
                Some(Location::InContainer { .. }) => d.placements += 1,
                _ => d.removals[s] += 1,
            }
        }
    }
    for (o, loc) in arr.locations().iter().enumerate() {
        let target = idx.targets[o];
        match (loc, target) {
            (Location::OnStack { .. }, _) | (_, None) => {}
            (Location::OnTable { .. }, Some(Location::OnTable { .. })) => {}
            (Location::InContainer { container: a }, Some(Location::InContainer { container: b })) if *a == b => {}
            (_, Some(t)) => {
                d.placements += 1;
                if let Location::OnStack { stack, .. } = t {
                    d.arrive[stack.0] += 1;
                }
                d.waiting.push(ObjectId(o));
            }
        }
    }
    d
}

/// Lower bound on the makespan of any completion from `clock`.
pub fn makespan_bound(d: &Demand, clock: &Clock) -> u32 {
    let mut bound = clock.makespan;
    for s in 0..d.leave.len() {
        let work = (d.leave[s] + d.arrive[s]) as u32;
        if work > 0 {
            bound = bound.max(clock.stage_free[s] + work);
        }
    }
    for o in &d.waiting {
        bound = bound.max(clock.ready[o.0] + 1);
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{row_layout, ActionOptions};
    use crate::gadget::gadget_for;

    fn blocked(options: ActionOptions) -> Instance {
        Instance {
            name: "blocked".into(),
            stacks: row_layout(3, 4),
            buffers: 0,
            containers: vec![],
            start: Arrangement::from_stacks(&[vec![0, 1, 2, 3]], 4, 0),
            goal: GoalSpec::Single { object: ObjectId(3), stack: StackId(2), above: 0 },
            options,
        }
    }

    #[test]
    fn static_bound_blocked() {
        let pap = blocked(ActionOptions::PICK_PLACE);
        let g = gadget_for(&pap).unwrap();
        assert_eq!(static_lower_bound(&pap, &g).unwrap().value, 1);
        assert_eq!(lower_bound(&pap, &g).unwrap().value, 4);
        let smash = blocked(ActionOptions::TOPPLE);
        let g = gadget_for(&smash).unwrap();
        assert_eq!(static_lower_bound(&smash, &g).unwrap().value, 1);
        assert_eq!(lower_bound(&smash, &g).unwrap().value, 2);
    }

    #[test]
    fn demand_bound_blocked() {
        let pap = blocked(ActionOptions::PICK_PLACE);
        assert_eq!(demand(&GoalIndex::new(&pap), &pap.start).cost(&GoalIndex::new(&pap)), 4);
        let smash = blocked(ActionOptions::TOPPLE);
        let idx = GoalIndex::new(&smash);
        assert_eq!(demand(&idx, &smash.start).cost(&idx), 2);
        let capped = blocked(ActionOptions { topple: true, max_topple: Some(2), scoop: false });
        let idx = GoalIndex::new(&capped);
        assert_eq!(demand(&idx, &capped.start).cost(&idx), 3);
    }

    #[test]
    fn trivial_bounds_are_zero() {
        let mut inst = blocked(ActionOptions::TOPPLE);
        inst.goal = GoalSpec::Multi { target: inst.start.clone() };
        let g = gadget_for(&inst).unwrap();
        assert_eq!(lower_bound(&inst, &g).unwrap().value, 0);
        let idx = GoalIndex::new(&inst);
        assert_eq!(demand(&idx, &inst.start).cost(&idx), 0);
        assert_eq!(static_horizon(&inst, &g), 0);
    }

    #[test]
    fn unreachable_goal() {
        let mut inst = blocked(ActionOptions::PICK_PLACE);
        inst.start = Arrangement::from_stacks(&[vec![1, 2, 3]], 4, 0);
        inst.start.set_location(ObjectId(0), Location::TABLE);
        inst.options = ActionOptions::TOPPLE;
        let g = gadget_for(&inst).unwrap();
        assert!(lower_bound(&inst, &g).is_ok());
        let pap_g = gadget_for(&inst.with_options(ActionOptions::PICK_PLACE)).unwrap();
        assert!(static_lower_bound(&inst, &pap_g).is_err());
    }
}
