//! Time-expanded integer multi-commodity flow over a gadget graph.
//!
//! Variables for `t in 0..T`:
//! * `x[o,e,t]` object `o` traverses edge `e` between layers `t` and `t+1`,
//! * `w[o,v,t]` object `o` waits at node `v`,
//! * `y[a,t]` aggregate edge `a` fires.
//!
//! Rows are generated on demand by [`FlowModel::constraints`]; the solver
//! never materializes them.

mod lp;

use std::fmt;

use crate::domain::{GoalSpec, Instance, Location};
use crate::error::FlowError;
use crate::gadget::{gadget_for, pebble_state, EdgeId, EdgeKind, GadgetGraph, NodeId, NodeKind};

pub use lp::{export_lp, lp_text};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Flow conservation.
    Conservation,
    /// Start positions.
    Source,
    /// Goal positions and forbidden terminal nodes.
    Terminal,
    /// Node capacity.
    NodeCapacity,
    /// Edge capacity.
    EdgeCapacity,
    /// Flow on an aggregate edge requires its activation.
    Coupling,
    /// A firing aggregate edge discharges its source completely.
    Discharge,
    /// At most one aggregate activation per step.
    Exclusivity,
    /// No manipulation at a stack top while its staging node is occupied.
    StagingFreeze,
    /// No head-on swaps along a stack chain.
    NoSwap,
    /// At most one manipulation touches a stack top per step.
    TopExclusive,
    /// A container's contents sit in one region.
    ContainerRegion,
    /// Stack occupants stay packed against the top slot.
    Compact,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Conservation => "cons",
            Family::Source => "src",
            Family::Terminal => "term",
            Family::NodeCapacity => "ncap",
            Family::EdgeCapacity => "ecap",
            Family::Coupling => "couple",
            Family::Discharge => "dis",
            Family::Exclusivity => "excl",
            Family::StagingFreeze => "stage",
            Family::NoSwap => "swap",
            Family::TopExclusive => "top",
            Family::ContainerRegion => "region",
            Family::Compact => "pack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Row {
    pub fn holds(&self, value: impl Fn(VarId) -> bool) -> bool {
        let lhs: i64 = self.terms.iter().filter(|(v, _)| value(*v)).map(|(_, c)| c).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Move { object: usize, edge: EdgeId, t: usize },
    Wait { object: usize, node: NodeId, t: usize },
    Activation { edge: EdgeId, t: usize },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::Move { object, edge, t } => write!(f, "x_o{object}_e{edge}_t{t}"),
            Var::Wait { object, node, t } => write!(f, "w_o{object}_v{node}_t{t}"),
            Var::Activation { edge, t } => write!(f, "y_e{edge}_t{t}"),
        }
    }
}

/// Allowed terminal nodes of one object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    OneOf(Vec<NodeId>),
    /// Anywhere except staging and interface nodes.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
}

#[derive(Debug, Clone)]
pub struct FlowModel {
    pub graph: GadgetGraph,
    pub horizon: usize,
    pub start: Vec<NodeId>,
    pub terminal: Vec<Terminal>,
    aggregates: Vec<EdgeId>,
    agg_index: Vec<Option<usize>>,
}

impl FlowModel {
    pub fn objects(&self) -> usize {
        self.start.len()
    }

    fn block(&self) -> usize {
        self.graph.edges.len() + self.graph.nodes.len()
    }

    pub fn aggregates(&self) -> &[EdgeId] {
        &self.aggregates
    }

    pub fn variable_count(&self) -> usize {
        self.objects() * self.block() * self.horizon + self.aggregates.len() * self.horizon
    }

    pub fn x(&self, o: usize, e: EdgeId, t: usize) -> VarId {
        t * self.objects() * self.block() + o * self.block() + e
    }

    pub fn w(&self, o: usize, v: NodeId, t: usize) -> VarId {
        t * self.objects() * self.block() + o * self.block() + self.graph.edges.len() + v
    }

    pub fn y(&self, e: EdgeId, t: usize) -> VarId {
        let k = self.agg_index[e].expect("not an aggregate edge");
        self.objects() * self.block() * self.horizon + t * self.aggregates.len() + k
    }

    pub fn var(&self, id: VarId) -> Var {
        let flow = self.objects() * self.block() * self.horizon;
        if id >= flow {
            let rest = id - flow;
            let t = rest / self.aggregates.len();
            return Var::Activation { edge: self.aggregates[rest % self.aggregates.len()], t };
        }
        let per_t = self.objects() * self.block();
        let t = id / per_t;
        let object = (id % per_t) / self.block();
        let k = id % self.block();
        if k < self.graph.edges.len() {
            Var::Move { object, edge: k, t }
        } else {
            Var::Wait { object, node: k - self.graph.edges.len(), t }
        }
    }

    /// Objective coefficient (0 or 1).
    pub fn cost(&self, id: VarId) -> i64 {
        match self.var(id) {
            Var::Move { edge, .. } => {
                let e = &self.graph.edges[edge];
                i64::from(!e.kind.is_aggregate() && e.cost == 1)
            }
            Var::Wait { .. } => 0,
            Var::Activation { .. } => 1,
        }
    }

    fn outflow(&self, o: usize, v: NodeId, t: usize) -> Vec<(VarId, i64)> {
        let mut terms: Vec<(VarId, i64)> = self.graph.out_edges(v).iter().map(|&e| (self.x(o, e, t), 1)).collect();
        terms.push((self.w(o, v, t), 1));
        terms
    }

    fn inflow(&self, o: usize, v: NodeId, t: usize) -> Vec<(VarId, i64)> {
        let mut terms: Vec<(VarId, i64)> =
            self.graph.in_edges(v).iter().map(|&e| (self.x(o, e, t - 1), 1)).collect();
        terms.push((self.w(o, v, t - 1), 1));
        terms
    }

    /// Terms whose sum is 1 iff `o` sits on `v` at layer `t` (requires T > 0).
    fn occupancy(&self, o: usize, v: NodeId, t: usize) -> Vec<(VarId, i64)> {
        if t < self.horizon {
            self.outflow(o, v, t)
        } else {
            self.inflow(o, v, t)
        }
    }

    fn transient(&self, v: NodeId) -> bool {
        matches!(self.graph.nodes[v].kind, NodeKind::ToppleStaging { .. } | NodeKind::TableInterface { .. })
    }

    pub fn terminal_ok(&self, o: usize, v: NodeId) -> bool {
        match &self.terminal[o] {
            Terminal::OneOf(nodes) => nodes.contains(&v),
            Terminal::Free => !self.transient(v),
        }
    }

    /// Whether the horizon-0 model is feasible (start already satisfies the goal).
    pub fn trivially_feasible(&self) -> bool {
        (0..self.objects()).all(|o| self.terminal_ok(o, self.start[o]))
    }

    /// Manipulation edges incident to the top of stack `s`.
    fn top_manipulations(&self, s: usize) -> Vec<EdgeId> {
        let top = self.graph.top(s);
        let mut edges: Vec<EdgeId> = self
            .graph
            .out_edges(top)
            .iter()
            .chain(self.graph.in_edges(top))
            .copied()
            .filter(|&e| self.graph.edges[e].kind.is_manipulation())
            .collect();
        edges.sort_unstable();
        edges
    }

    fn stage_select(&self, s: usize) -> Option<EdgeId> {
        let staging = self.graph.staging[s]?;
        self.graph.find_edge(self.graph.top(s), staging, EdgeKind::StageSelect)
    }

    /// All constraint rows in deterministic order.
    pub fn constraints(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        let big_t = self.horizon;
        if big_t == 0 {
            return rows;
        }
        let n = self.objects();
        let g = &self.graph;
        let nv = g.nodes.len();
        let sum_objects = |f: &dyn Fn(usize) -> Vec<(VarId, i64)>| -> Vec<(VarId, i64)> { (0..n).flat_map(f).collect() };
        let push = |rows: &mut Vec<Row>, family: Family, name: String, terms: Vec<(VarId, i64)>, sense, rhs| {
            rows.push(Row { name: format!("{}_{}", family.tag(), name), family, terms, sense, rhs });
        };

        for t in 1..big_t {
            for o in 0..n {
                for v in 0..nv {
                    let mut terms = self.inflow(o, v, t);
                    terms.extend(self.outflow(o, v, t).into_iter().map(|(id, c)| (id, -c)));
                    push(&mut rows, Family::Conservation, format!("o{o}_v{v}_t{t}"), terms, Sense::Eq, 0);
                }
            }
        }
        for o in 0..n {
            for v in 0..nv {
                let rhs = i64::from(self.start[o] == v);
                push(&mut rows, Family::Source, format!("o{o}_v{v}"), self.outflow(o, v, 0), Sense::Eq, rhs);
            }
        }
        for o in 0..n {
            if let Terminal::OneOf(nodes) = &self.terminal[o] {
                let terms = nodes.iter().flat_map(|&v| self.inflow(o, v, big_t)).collect();
                push(&mut rows, Family::Terminal, format!("o{o}_goal"), terms, Sense::Eq, 1);
            }
            for v in (0..nv).filter(|&v| self.transient(v)) {
                push(&mut rows, Family::Terminal, format!("o{o}_v{v}_transient"), self.inflow(o, v, big_t), Sense::Eq, 0);
            }
        }
        for t in 0..=big_t {
            for v in 0..nv {
                let terms = sum_objects(&|o| self.occupancy(o, v, t));
                let cap = g.nodes[v].capacity as i64;
                push(&mut rows, Family::NodeCapacity, format!("v{v}_t{t}"), terms, Sense::Le, cap);
            }
        }
        for t in 0..big_t {
            for e in &g.edges {
                let terms = (0..n).map(|o| (self.x(o, e.id, t), 1)).collect();
                push(&mut rows, Family::EdgeCapacity, format!("e{}_t{t}", e.id), terms, Sense::Le, e.capacity as i64);
            }
        }
        for t in 0..big_t {
            for &a in &self.aggregates {
                let cap = g.edges[a].capacity as i64;
                let mut terms: Vec<(VarId, i64)> = (0..n).map(|o| (self.x(o, a, t), 1)).collect();
                terms.push((self.y(a, t), -cap));
                push(&mut rows, Family::Coupling, format!("e{a}_t{t}"), terms, Sense::Le, 0);
            }
        }
        for t in 0..big_t {
            for &a in &self.aggregates {
                let from = g.edges[a].from;
                for o in 0..n {
                    let terms = vec![(self.w(o, from, t), 1), (self.y(a, t), 1)];
                    push(&mut rows, Family::Discharge, format!("e{a}_o{o}_t{t}"), terms, Sense::Le, 1);
                }
            }
        }
        if !self.aggregates.is_empty() {
            for t in 0..big_t {
                let terms = self.aggregates.iter().map(|&a| (self.y(a, t), 1)).collect();
                push(&mut rows, Family::Exclusivity, format!("t{t}"), terms, Sense::Le, 1);
            }
        }
        for s in 0..g.stack_count() {
            let Some(staging) = g.staging[s] else { continue };
            let ext = self.top_manipulations(s);
            for t in 0..big_t {
                for o2 in 0..n {
                    let mut terms: Vec<(VarId, i64)> =
                        ext.iter().flat_map(|&e| (0..n).map(move |o| (e, o))).map(|(e, o)| (self.x(o, e, t), 1)).collect();
                    terms.extend(self.outflow(o2, staging, t));
                    push(&mut rows, Family::StagingFreeze, format!("s{s}_o{o2}_t{t}"), terms, Sense::Le, 1);
                }
            }
        }
        for t in 0..big_t {
            for up in g.edges_of_kind(EdgeKind::ShiftUp) {
                let down = g.find_edge(up.to, up.from, EdgeKind::ShiftDown).expect("shift edges come in pairs");
                let terms = (0..n).flat_map(|o| [(self.x(o, up.id, t), 1), (self.x(o, down, t), 1)]).collect();
                push(&mut rows, Family::NoSwap, format!("e{}_e{down}_t{t}", up.id), terms, Sense::Le, 1);
            }
        }
        for s in 0..g.stack_count() {
            let mut edges = self.top_manipulations(s);
            edges.extend(self.stage_select(s));
            for t in 0..big_t {
                let terms = edges.iter().flat_map(|&e| (0..n).map(move |o| (e, o))).map(|(e, o)| (self.x(o, e, t), 1)).collect();
                push(&mut rows, Family::TopExclusive, format!("s{s}_t{t}"), terms, Sense::Le, 1);
            }
        }
        for (c, nodes) in g.containers.iter().enumerate() {
            for t in 0..=big_t {
                for (r, &v) in nodes.iter().enumerate() {
                    for (r2, &v2) in nodes.iter().enumerate().skip(r + 1) {
                        for o in 0..n {
                            for o2 in (0..n).filter(|&o2| o2 != o) {
                                let mut terms = self.occupancy(o, v, t);
                                terms.extend(self.occupancy(o2, v2, t));
                                let name = format!("c{c}_r{r}_r{r2}_o{o}_o{o2}_t{t}");
                                push(&mut rows, Family::ContainerRegion, name, terms, Sense::Le, 1);
                            }
                        }
                    }
                }
            }
        }
        for (s, chain) in g.slots.iter().enumerate() {
            for t in 0..=big_t {
                for i in 1..chain.len() {
                    let mut terms = sum_objects(&|o| self.occupancy(o, chain[i - 1], t));
                    terms.extend(sum_objects(&|o| self.occupancy(o, chain[i], t)).into_iter().map(|(id, c)| (id, -c)));
                    push(&mut rows, Family::Compact, format!("s{s}_l{}_t{t}", i + 1), terms, Sense::Le, 0);
                }
            }
        }
        rows
    }

    pub fn stats(&self) -> ModelStats {
        let rows = self.constraints();
        ModelStats {
            variables: self.variable_count(),
            constraints: rows.len(),
            nonzeros: rows.iter().map(|r| r.terms.len()).sum(),
        }
    }
}

/// Terminal rule for each object under `goal`.
fn terminals(inst: &Instance, g: &GadgetGraph) -> Result<Vec<Terminal>, FlowError> {
    let slot = |stack: usize, above: usize| -> Result<NodeId, FlowError> {
        let h = g.heights.get(stack).copied().ok_or_else(|| FlowError::InvalidGoal(format!("unknown stack s{stack}")))?;
        if above >= h {
            return Err(FlowError::InvalidGoal(format!("slot {above} deep does not exist on s{stack}")));
        }
        Ok(g.slots[stack][h - 1 - above])
    };
    let node_for = |loc: &Location| -> Result<Vec<NodeId>, FlowError> {
        match *loc {
            Location::OnStack { stack, above } => Ok(vec![slot(stack.0, above)?]),
            Location::OnTable { .. } => {
                g.table.map(|v| vec![v]).ok_or_else(|| FlowError::InvalidGoal("table goal without table node".into()))
            }
            Location::InContainer { container } => g
                .containers
                .get(container.0)
                .cloned()
                .ok_or_else(|| FlowError::InvalidGoal(format!("unknown container {container}"))),
        }
    };
    let n = inst.object_count();
    let mut out = vec![Terminal::Free; n];
    match &inst.goal {
        GoalSpec::Single { object, stack, above } => out[object.0] = Terminal::OneOf(vec![slot(stack.0, *above)?]),
        GoalSpec::Multi { target } => {
            for (o, loc) in target.locations().iter().enumerate() {
                out[o] = Terminal::OneOf(node_for(loc)?);
            }
        }
        GoalSpec::Partial { targets } => {
            for (o, loc) in targets {
                out[o.0] = Terminal::OneOf(node_for(loc)?);
            }
        }
    }
    let mut fixed = vec![0usize; g.nodes.len()];
    for t in &out {
        if let Terminal::OneOf(nodes) = t {
            if nodes.len() == 1 {
                fixed[nodes[0]] += 1;
                if fixed[nodes[0]] > g.nodes[nodes[0]].capacity {
                    return Err(FlowError::InvalidGoal(format!("goal node {} over capacity", nodes[0])));
                }
            }
        }
    }
    Ok(out)
}

/// Compiles `inst` over `g` with horizon `horizon`.
pub fn build_model(inst: &Instance, g: &GadgetGraph, horizon: usize) -> Result<FlowModel, FlowError> {
    let start = pebble_state(&inst.start, g)?;
    let terminal = terminals(inst, g)?;
    let aggregates: Vec<EdgeId> = g.aggregate_edges().map(|e| e.id).collect();
    let mut agg_index = vec![None; g.edges.len()];
    for (k, &e) in aggregates.iter().enumerate() {
        agg_index[e] = Some(k);
    }
    Ok(FlowModel { graph: g.clone(), horizon, start, terminal, aggregates, agg_index })
}

/// Builds the gadget matching the instance options, then the model.
pub fn build_model_for(inst: &Instance, horizon: usize) -> Result<FlowModel, FlowError> {
    let g = gadget_for(inst)?;
    build_model(inst, &g, horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Wait(NodeId),
    Move(EdgeId),
}

/// A full assignment in trajectory form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    pub horizon: usize,
    /// `steps[t][o]` for `t in 0..horizon`.
    pub steps: Vec<Vec<Step>>,
    /// Aggregate edges fired at each step.
    pub activations: Vec<Vec<EdgeId>>,
    pub objective: i64,
}

impl FlowSolution {
    /// All objects wait in place for `horizon` steps.
    pub fn all_wait(model: &FlowModel) -> Self {
        let steps = vec![model.start.iter().map(|&v| Step::Wait(v)).collect(); model.horizon];
        FlowSolution { horizon: model.horizon, steps, activations: vec![Vec::new(); model.horizon], objective: 0 }
    }

    /// Node of each object at layer `t`, following the trajectory from `start`.
    pub fn positions(&self, model: &FlowModel, t: usize) -> Vec<NodeId> {
        if t == 0 {
            return model.start.clone();
        }
        self.steps[t - 1]
            .iter()
            .map(|s| match *s {
                Step::Wait(v) => v,
                Step::Move(e) => model.graph.edges[e].to,
            })
            .collect()
    }

    /// Ids of the variables set to 1.
    pub fn assignment(&self, model: &FlowModel) -> Vec<VarId> {
        let mut ones = Vec::new();
        for (t, row) in self.steps.iter().enumerate() {
            for (o, s) in row.iter().enumerate() {
                ones.push(match *s {
                    Step::Wait(v) => model.w(o, v, t),
                    Step::Move(e) => model.x(o, e, t),
                });
            }
        }
        for (t, fired) in self.activations.iter().enumerate() {
            for &a in fired {
                ones.push(model.y(a, t));
            }
        }
        ones.sort_unstable();
        ones
    }

    /// Recomputes the objective from the trajectory.
    pub fn recompute_objective(&self, model: &FlowModel) -> i64 {
        self.assignment(model).into_iter().map(|id| model.cost(id)).sum()
    }
}

/// Names of the violated rows (plus structural problems), empty iff valid.
pub fn violations(model: &FlowModel, sol: &FlowSolution) -> Vec<String> {
    let mut bad = Vec::new();
    if sol.horizon != model.horizon || sol.steps.len() != model.horizon || sol.activations.len() != model.horizon {
        bad.push(format!("horizon mismatch: model {} solution {}", model.horizon, sol.horizon));
        return bad;
    }
    if sol.steps.iter().any(|row| row.len() != model.objects()) {
        bad.push("object count mismatch".into());
        return bad;
    }
    let g = &model.graph;
    for row in &sol.steps {
        for s in row {
            let ok = match *s {
                Step::Wait(v) => v < g.nodes.len(),
                Step::Move(e) => e < g.edges.len(),
            };
            if !ok {
                bad.push(format!("dangling reference {s:?}"));
                return bad;
            }
        }
    }
    for fired in &sol.activations {
        if fired.iter().any(|&a| a >= g.edges.len() || !g.edges[a].kind.is_aggregate()) {
            bad.push("activation of a non-aggregate edge".into());
            return bad;
        }
        let mut seen = fired.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != fired.len() {
            bad.push("duplicate activation".into());
            return bad;
        }
    }
    if model.horizon == 0 {
        if !model.trivially_feasible() {
            bad.push("term_start_not_goal".into());
        }
    } else {
        let mut value = vec![false; model.variable_count()];
        for id in sol.assignment(model) {
            value[id] = true;
        }
        for row in model.constraints() {
            if !row.holds(|id| value[id]) {
                bad.push(row.name);
            }
        }
    }
    let objective = sol.recompute_objective(model);
    if objective != sol.objective {
        bad.push(format!("objective reported {} actual {objective}", sol.objective));
    }
    bad
}

/// True iff `sol` satisfies every row of `model` and reports its objective correctly.
pub fn check_solution(model: &FlowModel, sol: &FlowSolution) -> bool {
    violations(model, sol).is_empty()
}

#[cfg(test)]
mod tests;
