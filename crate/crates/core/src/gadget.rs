//! Gadget graphs: stacks become capacity-1 node chains, the table and the
//! topple staging areas become high-capacity nodes, and aggregate actions
//! become activation-priced edges.

use std::fmt::Write as _;

use crate::domain::{Arrangement, ContainerDesc, Instance, Location, ObjectId, RegionId, StackId};
use crate::error::GadgetError;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// `level` runs 1..=h; level h is the top slot.
    StackSlot { stack: usize, level: usize },
    ToppleStaging { stack: usize },
    Table,
    TableInterface { index: usize },
    Container { container: usize, region: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub capacity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    ShiftUp,
    ShiftDown,
    CrossTop,
    StageSelect,
    ToppleAggregate,
    TableFanout,
    TablePick,
    ScoopLoad,
    ScoopCarryAggregate,
    ScoopUnload,
}

impl EdgeKind {
    pub fn is_aggregate(self) -> bool {
        matches!(self, EdgeKind::ToppleAggregate | EdgeKind::ScoopCarryAggregate)
    }

    /// Edges that pick an object off a stack top or put one onto it.
    pub fn is_manipulation(self) -> bool {
        matches!(self, EdgeKind::CrossTop | EdgeKind::TablePick | EdgeKind::ScoopLoad | EdgeKind::ScoopUnload)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub cost: u32,
    pub capacity: usize,
    pub kind: EdgeKind,
}

/// Region assignment and containers for the scoop extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoopLayout {
    pub stack_regions: Vec<RegionId>,
    pub containers: Vec<ContainerDesc>,
    pub region_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetGraph {
    pub nodes: Vec<GadgetNode>,
    pub edges: Vec<GadgetEdge>,
    pub objects: usize,
    pub heights: Vec<usize>,
    /// `slots[s][level - 1]`.
    pub slots: Vec<Vec<NodeId>>,
    pub staging: Vec<Option<NodeId>>,
    pub table: Option<NodeId>,
    pub interfaces: Vec<NodeId>,
    /// `containers[c][r]`.
    pub containers: Vec<Vec<NodeId>>,
    pub topple_cap: Option<usize>,
    pub scoop: Option<ScoopLayout>,
    /// ToppleAggregate edge per stack.
    pub topple_edges: Vec<Option<EdgeId>>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

impl GadgetGraph {
    pub fn stack_count(&self) -> usize {
        self.heights.len()
    }

    pub fn top(&self, s: usize) -> NodeId {
        self.slots[s][self.heights[s] - 1]
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn edge(&self, e: EdgeId) -> &GadgetEdge {
        &self.edges[e]
    }

    pub fn node(&self, v: NodeId) -> &GadgetNode {
        &self.nodes[v]
    }

    pub fn aggregate_edges(&self) -> impl Iterator<Item = &GadgetEdge> {
        self.edges.iter().filter(|e| e.kind.is_aggregate())
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &GadgetEdge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    /// Stack a slot or staging node belongs to.
    pub fn stack_of(&self, v: NodeId) -> Option<usize> {
        match self.nodes[v].kind {
            NodeKind::StackSlot { stack, .. } | NodeKind::ToppleStaging { stack } => Some(stack),
            _ => None,
        }
    }

    /// Stack whose top node is `v`.
    pub fn top_of(&self, v: NodeId) -> Option<usize> {
        match self.nodes[v].kind {
            NodeKind::StackSlot { stack, level } if level == self.heights[stack] => Some(stack),
            _ => None,
        }
    }

    pub fn find_edge(&self, from: NodeId, to: NodeId, kind: EdgeKind) -> Option<EdgeId> {
        self.out_edges[from].iter().copied().find(|&e| self.edges[e].to == to && self.edges[e].kind == kind)
    }

    /// Graphviz rendering; node label is the kind, edge label `cost/capacity`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph gadget {\n");
        for n in &self.nodes {
            let label = match n.kind {
                NodeKind::StackSlot { stack, level } => format!("slot s{stack} l{level}"),
                NodeKind::ToppleStaging { stack } => format!("staging s{stack}"),
                NodeKind::Table => "table".to_string(),
                NodeKind::TableInterface { index } => format!("iface {index}"),
                NodeKind::Container { container, region } => format!("container c{container} r{region}"),
            };
            writeln!(out, "  n{} [label=\"{} (cap {})\"];", n.id, label, n.capacity).unwrap();
        }
        for e in &self.edges {
            writeln!(out, "  n{} -> n{} [label=\"{}/{}\" kind=\"{:?}\"];", e.from, e.to, e.cost, e.capacity, e.kind)
                .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

struct Builder {
    nodes: Vec<GadgetNode>,
    edges: Vec<GadgetEdge>,
}

impl Builder {
    fn node(&mut self, kind: NodeKind, capacity: usize) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(GadgetNode { id, kind, capacity });
        id
    }

    fn edge(&mut self, from: NodeId, to: NodeId, cost: u32, capacity: usize, kind: EdgeKind) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(GadgetEdge { id, from, to, cost, capacity, kind });
        id
    }
}

/// Pick-and-place gadget over stacks with the given heights.
pub fn build_pap_gadget(heights: &[usize], objects: usize) -> Result<GadgetGraph, GadgetError> {
    build(heights, objects, None, None)
}

/// Pick-and-place gadget plus topple machinery, optionally capped, and the
/// scoop edges when a layout is given.
pub fn build_smash_gadget(
    heights: &[usize],
    objects: usize,
    max_topple: Option<usize>,
    scoop: Option<ScoopLayout>,
) -> Result<GadgetGraph, GadgetError> {
    let cap = max_topple.map_or(objects, |m| m.min(objects)).max(1);
    build(heights, objects, Some(cap), scoop)
}

/// Gadget matching the instance's enabled actions.
pub fn gadget_for(inst: &Instance) -> Result<GadgetGraph, GadgetError> {
    let heights = inst.heights();
    let scoop = inst.options.scoop.then(|| ScoopLayout {
        stack_regions: (0..inst.stack_count()).map(|s| inst.region(StackId(s))).collect(),
        containers: inst.containers.clone(),
        region_count: inst.region_count(),
    });
    let topple = inst.options.topple.then(|| inst.topple_cap());
    build(&heights, inst.object_count(), topple, scoop)
}

fn build(
    heights: &[usize],
    objects: usize,
    topple_cap: Option<usize>,
    scoop: Option<ScoopLayout>,
) -> Result<GadgetGraph, GadgetError> {
    if let Some((stack, &height)) = heights.iter().enumerate().find(|(_, &h)| h == 0) {
        return Err(GadgetError::InvalidDescriptor { stack, height });
    }
    let mut b = Builder { nodes: Vec::new(), edges: Vec::new() };
    let slots: Vec<Vec<NodeId>> = heights
        .iter()
        .enumerate()
        .map(|(stack, &h)| (1..=h).map(|level| b.node(NodeKind::StackSlot { stack, level }, 1)).collect())
        .collect();
    let tops: Vec<NodeId> = slots.iter().map(|chain| *chain.last().unwrap()).collect();
    for chain in &slots {
        for pair in chain.windows(2) {
            b.edge(pair[0], pair[1], 0, 1, EdgeKind::ShiftUp);
        }
        for pair in chain.windows(2) {
            b.edge(pair[1], pair[0], 0, 1, EdgeKind::ShiftDown);
        }
    }
    for (s, &from) in tops.iter().enumerate() {
        for (d, &to) in tops.iter().enumerate() {
            if s != d {
                b.edge(from, to, 1, 1, EdgeKind::CrossTop);
            }
        }
    }

    let mut staging = vec![None; heights.len()];
    let mut topple_edges = vec![None; heights.len()];
    let mut table = None;
    let mut interfaces = Vec::new();
    let ell = objects.max(1);
    if let Some(cap) = topple_cap {
        for (s, slot) in staging.iter_mut().enumerate() {
            *slot = Some(b.node(NodeKind::ToppleStaging { stack: s }, ell));
        }
        let t = b.node(NodeKind::Table, ell);
        table = Some(t);
        interfaces = (0..objects).map(|index| b.node(NodeKind::TableInterface { index }, 1)).collect();
        for (s, &top) in tops.iter().enumerate() {
            b.edge(top, staging[s].unwrap(), 0, 1, EdgeKind::StageSelect);
        }
        for (s, edge) in topple_edges.iter_mut().enumerate() {
            *edge = Some(b.edge(staging[s].unwrap(), t, 1, cap, EdgeKind::ToppleAggregate));
        }
        for &i in &interfaces {
            b.edge(t, i, 0, 1, EdgeKind::TableFanout);
        }
        for &i in &interfaces {
            for &top in &tops {
                b.edge(i, top, 1, 1, EdgeKind::TablePick);
            }
        }
    }

    let mut containers = Vec::new();
    if let Some(layout) = &scoop {
        for (c, desc) in layout.containers.iter().enumerate() {
            let per_region = (0..layout.region_count)
                .map(|region| b.node(NodeKind::Container { container: c, region }, desc.capacity.max(1)))
                .collect::<Vec<_>>();
            containers.push(per_region);
        }
        for (c, desc) in layout.containers.iter().enumerate() {
            for (s, &top) in tops.iter().enumerate() {
                b.edge(top, containers[c][layout.stack_regions[s].0], 1, 1, EdgeKind::ScoopLoad);
            }
            for &i in &interfaces {
                for r in 0..layout.region_count {
                    b.edge(i, containers[c][r], 1, 1, EdgeKind::ScoopLoad);
                }
            }
            for r in 0..layout.region_count {
                for r2 in (0..layout.region_count).filter(|&r2| r2 != r) {
                    b.edge(containers[c][r], containers[c][r2], 1, desc.capacity.max(1), EdgeKind::ScoopCarryAggregate);
                }
            }
            for (s, &top) in tops.iter().enumerate() {
                b.edge(containers[c][layout.stack_regions[s].0], top, 1, 1, EdgeKind::ScoopUnload);
            }
        }
    }

    let mut out_edges = vec![Vec::new(); b.nodes.len()];
    let mut in_edges = vec![Vec::new(); b.nodes.len()];
    for e in &b.edges {
        out_edges[e.from].push(e.id);
        in_edges[e.to].push(e.id);
    }
    Ok(GadgetGraph {
        nodes: b.nodes,
        edges: b.edges,
        objects,
        heights: heights.to_vec(),
        slots,
        staging,
        table,
        interfaces,
        containers,
        topple_cap,
        scoop,
        topple_edges,
        out_edges,
        in_edges,
    })
}

/// Node each object's pebble sits on.
pub fn pebble_state(arr: &Arrangement, g: &GadgetGraph) -> Result<Vec<NodeId>, GadgetError> {
    let mut out = Vec::with_capacity(arr.object_count());
    for (o, loc) in arr.locations().iter().enumerate() {
        let node = match *loc {
            Location::OnStack { stack, above } => {
                let h = g.heights[stack.0];
                if above >= h {
                    return Err(GadgetError::HeightOverflow { object: ObjectId(o), above, height: h });
                }
                g.slots[stack.0][h - 1 - above]
            }
            Location::OnTable { .. } => g.table.ok_or(GadgetError::UnsupportedLocation { object: ObjectId(o) })?,
            Location::InContainer { container } => {
                if g.containers.len() <= container.0 {
                    return Err(GadgetError::UnsupportedLocation { object: ObjectId(o) });
                }
                let region = arr.container_region(container).map_or(0, |r| r.0);
                g.containers[container.0][region]
            }
        };
        out.push(node);
    }
    let mut counts = vec![0usize; g.nodes.len()];
    for &v in &out {
        counts[v] += 1;
        if counts[v] > g.nodes[v].capacity {
            return Err(GadgetError::CapacityExceeded { node: v, count: counts[v], capacity: g.nodes[v].capacity });
        }
    }
    Ok(out)
}

/// Inverse of [`pebble_state`] for pebbles on slot, table and container nodes.
/// Returns `None` if some pebble sits on a transient node.
pub fn arrangement_of(pebbles: &[NodeId], g: &GadgetGraph) -> Option<Arrangement> {
    let containers = g.containers.len();
    let mut regions = vec![None; containers];
    let mut locations = Vec::with_capacity(pebbles.len());
    for &v in pebbles {
        let loc = match g.nodes[v].kind {
            NodeKind::StackSlot { stack, level } => Location::on_stack(stack, g.heights[stack] - level),
            NodeKind::Table => Location::TABLE,
            NodeKind::Container { container, region } => {
                regions[container] = Some(RegionId(region));
                Location::InContainer { container: crate::domain::ContainerId(container) }
            }
            _ => return None,
        };
        locations.push(loc);
    }
    Some(Arrangement::new(locations, containers).with_container_regions(regions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{row_layout, ActionOptions, GoalSpec, Instance, StackId};

    fn count(g: &GadgetGraph, kind: EdgeKind) -> usize {
        g.edges_of_kind(kind).count()
    }

    #[test]
    fn pap_counts() {
        let g = build_pap_gadget(&[4, 4, 4], 4).unwrap();
        assert_eq!(g.nodes.len(), 12);
        assert_eq!(count(&g, EdgeKind::ShiftUp), 9);
        assert_eq!(count(&g, EdgeKind::ShiftDown), 9);
        assert_eq!(count(&g, EdgeKind::CrossTop), 6);
        assert_eq!(g.edges.len(), 24);
        assert_eq!(count(&build_pap_gadget(&[4], 4).unwrap(), EdgeKind::CrossTop), 0);
    }

    #[test]
    fn buffer_stack_has_single_slot() {
        let g = build_pap_gadget(&[4, 1], 2).unwrap();
        assert_eq!(g.slots[1].len(), 1);
        assert_eq!(g.out_edges(g.top(1)).len(), 1);
        assert_eq!(g.in_edges(g.top(1)).len(), 1);
        assert!(g.edges.iter().filter(|e| e.from == g.top(1) || e.to == g.top(1)).all(|e| e.kind == EdgeKind::CrossTop));
    }

    #[test]
    fn zero_height_rejected() {
        assert!(matches!(build_pap_gadget(&[4, 0], 2), Err(GadgetError::InvalidDescriptor { stack: 1, height: 0 })));
    }

    #[test]
    fn smash_counts() {
        let pap = build_pap_gadget(&[4, 4, 4], 4).unwrap();
        let g = build_smash_gadget(&[4, 4, 4], 4, None, None).unwrap();
        assert_eq!(g.nodes.len(), 12 + 8);
        assert_eq!(count(&g, EdgeKind::StageSelect), 3);
        assert_eq!(count(&g, EdgeKind::ToppleAggregate), 3);
        assert_eq!(count(&g, EdgeKind::TableFanout), 4);
        assert_eq!(count(&g, EdgeKind::TablePick), 12);
        assert!(g.containers.is_empty());
        assert_eq!(&g.edges[..pap.edges.len()], &pap.edges[..]);
        assert!(g.aggregate_edges().all(|e| e.capacity == 4 && e.cost == 1));
        let capped = build_smash_gadget(&[4, 4, 4], 4, Some(2), None).unwrap();
        assert!(capped.aggregate_edges().all(|e| e.capacity == 2));
    }

    #[test]
    fn node_capacities() {
        let g = build_smash_gadget(&[3, 2], 5, None, None).unwrap();
        for n in &g.nodes {
            let expect = match n.kind {
                NodeKind::StackSlot { .. } | NodeKind::TableInterface { .. } => 1,
                NodeKind::ToppleStaging { .. } | NodeKind::Table => 5,
                NodeKind::Container { .. } => unreachable!(),
            };
            assert_eq!(n.capacity, expect);
        }
    }

    #[test]
    fn shift_chains_end_at_top() {
        let g = build_smash_gadget(&[4, 2, 1], 3, None, None).unwrap();
        for v in 0..g.nodes.len() {
            if let NodeKind::StackSlot { stack, .. } = g.nodes[v].kind {
                let mut cur = v;
                let mut steps = 0;
                while let Some(&e) = g.out_edges(cur).iter().find(|&&e| g.edges[e].kind == EdgeKind::ShiftUp) {
                    cur = g.edges[e].to;
                    steps += 1;
                    assert!(steps <= g.heights[stack]);
                }
                assert_eq!(cur, g.top(stack));
            }
        }
    }

    #[test]
    fn deterministic_build() {
        let a = build_smash_gadget(&[4, 4, 1], 4, Some(3), None).unwrap();
        let b = build_smash_gadget(&[4, 4, 1], 4, Some(3), None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_dot(), b.to_dot());
    }

    fn blocked() -> Instance {
        Instance {
            name: "blocked".into(),
            stacks: row_layout(3, 4),
            buffers: 0,
            containers: vec![],
            start: Arrangement::from_stacks(&[vec![0, 1, 2, 3]], 4, 0),
            goal: GoalSpec::Single { object: ObjectId(3), stack: StackId(2), above: 0 },
            options: ActionOptions::TOPPLE,
        }
    }

    #[test]
    fn blocked_pebbles() {
        let inst = blocked();
        let g = gadget_for(&inst).unwrap();
        let p = pebble_state(&inst.start, &g).unwrap();
        let levels: Vec<usize> = p
            .iter()
            .map(|&v| match g.nodes[v].kind {
                NodeKind::StackSlot { level, .. } => level,
                _ => panic!(),
            })
            .collect();
        assert_eq!(levels, vec![4, 3, 2, 1]);
        assert_eq!(arrangement_of(&p, &g).unwrap(), inst.start);
    }

    #[test]
    fn toppled_share_table() {
        let mut arr = blocked().start;
        arr.set_location(ObjectId(0), Location::TABLE);
        arr.set_location(ObjectId(1), Location::TABLE);
        arr.set_location(ObjectId(2), Location::on_stack(0, 0));
        arr.set_location(ObjectId(3), Location::on_stack(0, 1));
        let g = build_smash_gadget(&[4, 4, 4], 4, None, None).unwrap();
        let p = pebble_state(&arr, &g).unwrap();
        assert_eq!(p[0], g.table.unwrap());
        assert_eq!(p[1], g.table.unwrap());
    }

    #[test]
    fn overflow_detected() {
        let arr = Arrangement::from_stacks(&[vec![0, 1, 2]], 3, 0);
        let g = build_pap_gadget(&[2], 3).unwrap();
        assert!(matches!(pebble_state(&arr, &g), Err(GadgetError::HeightOverflow { above: 2, .. })));
    }
}
