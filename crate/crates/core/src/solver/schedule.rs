//! Earliest-start scheduling of a serial action sequence onto the
//! time-expanded graph, and materialization of the schedule as a flow
//! solution.
//!
//! Resource rules (each mirrors a flow row family):
//! * a manipulation at a stack top occupies that top for one step,
//! * a topple of `m` stages its objects in the `m` steps before it fires and
//!   freezes the stack until it fires,
//! * aggregate activations occupy a global slot, one per step,
//! * a toppled object reaches an interface node one step after landing.

use crate::domain::{Action, Arrangement, ContainerId, Instance, Location, ObjectId, RegionId, StackId};
use crate::flow::{FlowModel, FlowSolution, Step};
use crate::gadget::{EdgeKind, GadgetGraph, NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clock {
    /// Earliest step a pick/place may touch the top of each stack.
    pub ext_free: Vec<u32>,
    /// Earliest step a stage-select may start at each stack.
    pub stage_free: Vec<u32>,
    /// Earliest step for the next aggregate activation.
    pub slot_free: u32,
    /// Earliest step each object can be taken from the table or a container.
    pub ready: Vec<u32>,
    pub load_min: Vec<u32>,
    pub carry_min: Vec<u32>,
    pub makespan: u32,
}

/// One scheduled action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timed {
    pub action: Action,
    /// Step of the main transition (activation step for aggregates).
    pub step: u32,
    pub end: u32,
    /// Moved objects; for topples, top first.
    pub objects: Vec<ObjectId>,
    pub from_table: bool,
    /// Region a carried container leaves.
    pub from_region: Option<RegionId>,
}

impl Clock {
    pub fn new(inst: &Instance) -> Self {
        let s = inst.stack_count();
        let c = inst.containers.len();
        let ready = inst
            .start
            .locations()
            .iter()
            .map(|l| u32::from(matches!(l, Location::OnTable { .. })))
            .collect();
        Clock {
            ext_free: vec![0; s],
            stage_free: vec![0; s],
            slot_free: 0,
            ready,
            load_min: vec![0; c],
            carry_min: vec![0; c],
            makespan: 0,
        }
    }

    fn touch(&mut self, s: StackId, t: u32) {
        self.ext_free[s.0] = t + 1;
        self.stage_free[s.0] = t + 1;
    }

    /// Schedules `action` taken in `arr` (which must be legal there).
    pub fn schedule(&self, arr: &Arrangement, action: &Action) -> (Clock, Timed) {
        let mut next = self.clone();
        let mut timed = Timed { action: *action, step: 0, end: 0, objects: Vec::new(), from_table: false, from_region: None };
        match *action {
            Action::PickPlace { from, to } => {
                let t = self.ext_free[from.0].max(self.ext_free[to.0]);
                next.touch(from, t);
                next.touch(to, t);
                timed.step = t;
                timed.end = t + 1;
                timed.objects.push(arr.top(from).expect("legal pick has a top"));
            }
            Action::Topple { stack, count } => {
                let f = (self.stage_free[stack.0] + count as u32).max(self.slot_free);
                next.ext_free[stack.0] = f + 1;
                next.stage_free[stack.0] = f;
                next.slot_free = f + 1;
                let toppled = arr.stack_contents(stack);
                for &o in &toppled[..count] {
                    next.ready[o.0] = f + 2;
                }
                timed.step = f;
                timed.end = f + 1;
                timed.objects.extend_from_slice(&toppled[..count]);
            }
            Action::TablePick { object, to } => {
                let t = self.ready[object.0].max(self.ext_free[to.0]);
                next.touch(to, t);
                timed.step = t;
                timed.end = t + 1;
                timed.objects.push(object);
                timed.from_table = true;
            }
            Action::ScoopLoad { object, container, .. } => {
                let t = match arr.location(object) {
                    Location::OnStack { stack, .. } => {
                        let t = self.ext_free[stack.0].max(self.load_min[container.0]);
                        next.touch(stack, t);
                        t
                    }
                    _ => {
                        timed.from_table = true;
                        self.ready[object.0].max(self.load_min[container.0])
                    }
                };
                next.ready[object.0] = t + 1;
                next.carry_min[container.0] = self.carry_min[container.0].max(t + 1);
                timed.step = t;
                timed.end = t + 1;
                timed.objects.push(object);
            }
            Action::ScoopCarry { container, .. } => {
                let contents = arr.container_contents(container);
                let k = contents.iter().map(|o| self.ready[o.0]).fold(self.carry_min[container.0].max(self.slot_free), u32::max);
                next.slot_free = k + 1;
                next.load_min[container.0] = k + 1;
                next.carry_min[container.0] = k + 1;
                for o in &contents {
                    next.ready[o.0] = k + 1;
                }
                timed.step = k;
                timed.end = k + 1;
                timed.objects = contents;
                timed.from_region = arr.container_region(container);
            }
            Action::ScoopUnload { object, to } => {
                let t = self.ready[object.0].max(self.ext_free[to.0]);
                next.touch(to, t);
                if let Location::InContainer { container } = arr.location(object) {
                    next.carry_min[container.0] = self.carry_min[container.0].max(t);
                }
                timed.step = t;
                timed.end = t + 1;
                timed.objects.push(object);
            }
        }
        next.makespan = self.makespan.max(timed.end);
        (next, timed)
    }

    /// Flattened clock for dominance comparisons.
    pub fn key(&self, out: &mut Vec<u16>) {
        out.extend(self.ext_free.iter().map(|&v| v as u16));
        out.extend(self.stage_free.iter().map(|&v| v as u16));
        out.push(self.slot_free as u16);
        out.extend(self.ready.iter().map(|&v| v as u16));
        out.extend(self.load_min.iter().map(|&v| v as u16));
        out.extend(self.carry_min.iter().map(|&v| v as u16));
    }
}

/// Schedules a whole plan from the instance start.
pub fn schedule_plan(inst: &Instance, actions: &[Action]) -> Vec<Timed> {
    let mut clock = Clock::new(inst);
    let mut arr = inst.start.clone();
    let mut out = Vec::with_capacity(actions.len());
    for a in actions {
        let (next, timed) = clock.schedule(&arr, a);
        arr = crate::domain::apply(inst, &arr, a).expect("schedule_plan needs a valid plan");
        clock = next;
        out.push(timed);
    }
    out
}

enum Prim {
    Move { object: ObjectId, from: NodeId, kind: EdgeKind, to: NodeId },
    Shift { stack: usize, up: bool, except: Option<ObjectId> },
    Fire { from: NodeId, to: NodeId },
}

fn container_node(g: &GadgetGraph, c: ContainerId, r: RegionId) -> NodeId {
    g.containers[c.0][r.0]
}

/// Builds the flow trajectory of a scheduled plan. `arrangements[i]` is the
/// state before action `i`.
pub fn materialize(
    model: &FlowModel,
    arrangements: &[Arrangement],
    timed: &[Timed],
) -> FlowSolution {
    let g = &model.graph;
    let horizon = model.horizon;
    let mut prims: Vec<Vec<Prim>> = (0..horizon).map(|_| Vec::new()).collect();
    let iface = |o: ObjectId| g.interfaces[o.0];
    let table = || g.table.expect("table node");
    for (i, tm) in timed.iter().enumerate() {
        let t = tm.step as usize;
        let arr = &arrangements[i];
        match tm.action {
            Action::PickPlace { from, to } => {
                let o = tm.objects[0];
                prims[t].push(Prim::Move { object: o, from: g.top(from.0), kind: EdgeKind::CrossTop, to: g.top(to.0) });
                prims[t].push(Prim::Shift { stack: from.0, up: true, except: Some(o) });
                prims[t].push(Prim::Shift { stack: to.0, up: false, except: None });
            }
            Action::Topple { stack, count } => {
                let staging = g.staging[stack.0].expect("staging node");
                for (j, &o) in tm.objects.iter().enumerate() {
                    let ts = t - count + j;
                    prims[ts].push(Prim::Move { object: o, from: g.top(stack.0), kind: EdgeKind::StageSelect, to: staging });
                    prims[ts].push(Prim::Shift { stack: stack.0, up: true, except: Some(o) });
                }
                prims[t].push(Prim::Fire { from: staging, to: table() });
            }
            Action::TablePick { object, to } => {
                prims[t - 1].push(Prim::Move { object, from: table(), kind: EdgeKind::TableFanout, to: iface(object) });
                prims[t].push(Prim::Move { object, from: iface(object), kind: EdgeKind::TablePick, to: g.top(to.0) });
                prims[t].push(Prim::Shift { stack: to.0, up: false, except: None });
            }
            Action::ScoopLoad { object, container, region } => {
                let dest = container_node(g, container, region);
                if tm.from_table {
                    prims[t - 1].push(Prim::Move { object, from: table(), kind: EdgeKind::TableFanout, to: iface(object) });
                    prims[t].push(Prim::Move { object, from: iface(object), kind: EdgeKind::ScoopLoad, to: dest });
                } else {
                    let Location::OnStack { stack, .. } = arr.location(object) else { unreachable!() };
                    prims[t].push(Prim::Move { object, from: g.top(stack.0), kind: EdgeKind::ScoopLoad, to: dest });
                    prims[t].push(Prim::Shift { stack: stack.0, up: true, except: Some(object) });
                }
            }
            Action::ScoopCarry { container, to_region } => {
                let from = container_node(g, container, tm.from_region.expect("loaded container"));
                prims[t].push(Prim::Fire { from, to: container_node(g, container, to_region) });
            }
            Action::ScoopUnload { object, to } => {
                let Location::InContainer { container } = arr.location(object) else { unreachable!() };
                let region = arr.container_region(container).expect("loaded container");
                let from = container_node(g, container, region);
                prims[t].push(Prim::Move { object, from, kind: EdgeKind::ScoopUnload, to: g.top(to.0) });
                prims[t].push(Prim::Shift { stack: to.0, up: false, except: None });
            }
        }
    }

    let n = model.objects();
    let mut pos = model.start.clone();
    let mut steps = Vec::with_capacity(horizon);
    let mut activations = Vec::with_capacity(horizon);
    let mut objective = 0i64;
    for layer in prims {
        let mut row: Vec<Option<Step>> = vec![None; n];
        let mut fired = Vec::new();
        for p in layer {
            match p {
                Prim::Move { object, from, kind, to } => {
                    debug_assert_eq!(pos[object.0], from, "object {object} not where the schedule expects");
                    let e = g.find_edge(from, to, kind).expect("schedule uses gadget edges");
                    row[object.0] = Some(Step::Move(e));
                    objective += i64::from(g.edges[e].cost == 1 && !kind.is_aggregate());
                }
                Prim::Shift { stack, up, except } => {
                    for o in 0..n {
                        if Some(ObjectId(o)) == except || row[o].is_some() {
                            continue;
                        }
                        if let NodeKind::StackSlot { stack: s, level } = g.nodes[pos[o]].kind {
                            if s == stack {
                                let target = if up { g.slots[s][level] } else { g.slots[s][level - 2] };
                                let kind = if up { EdgeKind::ShiftUp } else { EdgeKind::ShiftDown };
                                row[o] = Some(Step::Move(g.find_edge(pos[o], target, kind).expect("shift edge")));
                            }
                        }
                    }
                }
                Prim::Fire { from, to } => {
                    let e = g.out_edges(from).iter().copied().find(|&e| g.edges[e].to == to).expect("aggregate edge");
                    for o in 0..n {
                        if pos[o] == from {
                            row[o] = Some(Step::Move(e));
                        }
                    }
                    fired.push(e);
                    objective += 1;
                }
            }
        }
        let row: Vec<Step> = row.into_iter().enumerate().map(|(o, s)| s.unwrap_or(Step::Wait(pos[o]))).collect();
        for (o, s) in row.iter().enumerate() {
            if let Step::Move(e) = s {
                pos[o] = g.edges[*e].to;
            }
        }
        steps.push(row);
        activations.push(fired);
    }
    FlowSolution { horizon, steps, activations, objective }
}

/// Schedules and materializes `actions` at `model.horizon`. Returns `None`
/// when the earliest-start schedule does not fit the horizon.
pub fn plan_to_flow(model: &FlowModel, inst: &Instance, actions: &[Action]) -> Option<FlowSolution> {
    let mut arrangements = Vec::with_capacity(actions.len());
    let mut arr = inst.start.clone();
    for a in actions {
        let next = crate::domain::apply(inst, &arr, a).ok()?;
        arrangements.push(std::mem::replace(&mut arr, next));
    }
    let timed = schedule_plan(inst, actions);
    if timed.iter().any(|t| t.end as usize > model.horizon) {
        return None;
    }
    Some(materialize(model, &arrangements, &timed))
}
