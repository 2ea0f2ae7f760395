//! Symbolic stack-world model.
//!
//! Objects rest either on a stack (indexed by how many objects sit above
//! them), on the table with a possibly unknown pose, or inside a scoop
//! container. Actions follow LIFO stack semantics; toppled objects land on
//! the table with their pose left ungrounded until execution.

mod format;
pub mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Violation};

pub use format::{parse_instance, parse_plan, write_instance, write_plan};

macro_rules! index_newtype {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        #[derive(Default)]
pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

index_newtype!(
    /// Object index in `[0, ℓ)`.
    ObjectId,
    "o"
);
index_newtype!(
    /// Stack index. Real stacks come first, buffers after them.
    StackId,
    "s"
);
index_newtype!(ContainerId, "c");
index_newtype!(RegionId, "r");

/// Planar table coordinate in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    /// `above` counts the objects resting on top of this one.
    OnStack { stack: StackId, above: usize },
    /// `pose == None` means the object is on the table but not grounded yet.
    OnTable { pose: Option<Point2> },
    InContainer { container: ContainerId },
}

impl Location {
    pub fn on_stack(stack: usize, above: usize) -> Self {
        Location::OnStack { stack: StackId(stack), above }
    }

    pub const TABLE: Location = Location::OnTable { pose: None };

    /// Equality that ignores table poses.
    pub fn same_place(&self, other: &Location) -> bool {
        match (self, other) {
            (Location::OnTable { .. }, Location::OnTable { .. }) => true,
            _ => self == other,
        }
    }
}

/// Full symbolic world state.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    locations: Vec<Location>,
    /// Region each container currently sits in. An empty container has no
    /// region: it can be loaded anywhere.
    container_regions: Vec<Option<RegionId>>,
}

impl Arrangement {
    pub fn new(locations: Vec<Location>, containers: usize) -> Self {
        Self { locations, container_regions: vec![None; containers] }
    }

    /// Builds an arrangement from per-stack contents listed top first.
    pub fn from_stacks(stacks: &[Vec<usize>], objects: usize, containers: usize) -> Self {
        let mut locations = vec![Location::TABLE; objects];
        for (s, contents) in stacks.iter().enumerate() {
            for (above, &o) in contents.iter().enumerate() {
                locations[o] = Location::on_stack(s, above);
            }
        }
        Self::new(locations, containers)
    }

    pub fn with_container_regions(mut self, regions: Vec<Option<RegionId>>) -> Self {
        self.container_regions = regions;
        self
    }

    pub fn object_count(&self) -> usize {
        self.locations.len()
    }

    pub fn location(&self, o: ObjectId) -> Location {
        self.locations[o.0]
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn container_region(&self, c: ContainerId) -> Option<RegionId> {
        self.container_regions[c.0]
    }

    pub fn container_regions(&self) -> &[Option<RegionId>] {
        &self.container_regions
    }

    pub fn set_location(&mut self, o: ObjectId, loc: Location) {
        self.locations[o.0] = loc;
    }

    /// Objects on `stack`, top first.
    pub fn stack_contents(&self, stack: StackId) -> Vec<ObjectId> {
        let mut found: Vec<(usize, ObjectId)> = self
            .locations
            .iter()
            .enumerate()
            .filter_map(|(o, loc)| match *loc {
                Location::OnStack { stack: s, above } if s == stack => Some((above, ObjectId(o))),
                _ => None,
            })
            .collect();
        found.sort_unstable();
        found.into_iter().map(|(_, o)| o).collect()
    }

    pub fn height(&self, stack: StackId) -> usize {
        self.locations
            .iter()
            .filter(|loc| matches!(loc, Location::OnStack { stack: s, .. } if *s == stack))
            .count()
    }

    pub fn top(&self, stack: StackId) -> Option<ObjectId> {
        self.locations.iter().position(|loc| *loc == Location::OnStack { stack, above: 0 }).map(ObjectId)
    }

    pub fn container_contents(&self, c: ContainerId) -> Vec<ObjectId> {
        self.locations
            .iter()
            .enumerate()
            .filter(|(_, loc)| **loc == Location::InContainer { container: c })
            .map(|(o, _)| ObjectId(o))
            .collect()
    }

    pub fn table_objects(&self) -> Vec<ObjectId> {
        self.locations
            .iter()
            .enumerate()
            .filter(|(_, loc)| matches!(loc, Location::OnTable { .. }))
            .map(|(o, _)| ObjectId(o))
            .collect()
    }

    /// Equality modulo table poses.
    pub fn same_symbolic(&self, other: &Arrangement) -> bool {
        self.locations.len() == other.locations.len()
            && self.locations.iter().zip(&other.locations).all(|(a, b)| a.same_place(b))
            && self.container_regions == other.container_regions
    }

    /// Compact hashable key that ignores table poses.
    pub fn symbolic_key(&self) -> Vec<u16> {
        let mut key = Vec::with_capacity(self.locations.len() * 2 + self.container_regions.len());
        for loc in &self.locations {
            match *loc {
                Location::OnStack { stack, above } => {
                    key.push(stack.0 as u16);
                    key.push(above as u16);
                }
                Location::OnTable { .. } => {
                    key.push(u16::MAX);
                    key.push(0);
                }
                Location::InContainer { container } => {
                    key.push(u16::MAX - 1);
                    key.push(container.0 as u16);
                }
            }
        }
        key.extend(self.container_regions.iter().map(|r| r.map_or(u16::MAX, |r| r.0 as u16)));
        key
    }

    /// Checks stack contiguity, heights and container capacities.
    pub fn check(&self, inst: &Instance) -> Result<(), DomainError> {
        if self.locations.len() != inst.object_count() {
            return Err(DomainError::InvalidArrangement(format!(
                "{} locations for {} objects",
                self.locations.len(),
                inst.object_count()
            )));
        }
        let mut seen = vec![Vec::new(); inst.stack_count()];
        for (o, loc) in self.locations.iter().enumerate() {
            match *loc {
                Location::OnStack { stack, above } => {
                    if stack.0 >= inst.stack_count() {
                        return Err(DomainError::InvalidArrangement(format!("o{o} on unknown stack {stack}")));
                    }
                    seen[stack.0].push(above);
                }
                Location::InContainer { container } => {
                    if container.0 >= inst.containers.len() {
                        return Err(DomainError::InvalidArrangement(format!("o{o} in unknown container {container}")));
                    }
                }
                Location::OnTable { .. } => {}
            }
        }
        for (s, mut aboves) in seen.into_iter().enumerate() {
            aboves.sort_unstable();
            if aboves.iter().enumerate().any(|(i, &a)| i != a) {
                return Err(DomainError::InvalidArrangement(format!("stack s{s} is not contiguous")));
            }
            if aboves.len() > inst.max_height(StackId(s)) {
                return Err(DomainError::InvalidArrangement(format!("stack s{s} exceeds its max height")));
            }
        }
        for (c, desc) in inst.containers.iter().enumerate() {
            let n = self.container_contents(ContainerId(c)).len();
            if n > desc.capacity {
                return Err(DomainError::InvalidArrangement(format!("container c{c} over capacity")));
            }
            if n > 0 && self.container_regions.get(c).copied().flatten().is_none() {
                return Err(DomainError::InvalidArrangement(format!("loaded container c{c} has no region")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackDesc {
    pub max_height: usize,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub region: RegionId,
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainerDesc {
    pub capacity: usize,
    /// Region the container is drawn in when idle; loading is allowed in any region.
    pub region: RegionId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionOptions {
    pub topple: bool,
    pub max_topple: Option<usize>,
    pub scoop: bool,
}

impl ActionOptions {
    pub const PICK_PLACE: ActionOptions = ActionOptions { topple: false, max_topple: None, scoop: false };
    pub const TOPPLE: ActionOptions = ActionOptions { topple: true, max_topple: None, scoop: false };
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self::TOPPLE
    }
}

/// `count` real stacks of equal height in a row in front of the robot base.
pub fn row_layout(count: usize, max_height: usize) -> Vec<StackDesc> {
    (0..count)
        .map(|i| StackDesc {
            max_height,
            x: 0.55,
            y: (i as f64 - (count as f64 - 1.0) / 2.0) * 0.2,
            region: RegionId(0),
        })
        .collect()
}

/// Where buffer `i` sits on the table. Buffers alternate between the two
/// sides of the real-stack column, two rows deep.
pub fn buffer_position(i: usize) -> Point2 {
    let side = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let k = i / 2;
    let x = 0.30 + 0.10 * (k % 3) as f64;
    let y = side * (0.42 + 0.10 * (k / 3) as f64);
    Point2::new(x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoalSpec {
    /// One object must end at the given stack location; the rest are free.
    Single { object: ObjectId, stack: StackId, above: usize },
    /// Every object must match `target` (table poses are not compared).
    Multi { target: Arrangement },
    /// Only the listed objects are constrained.
    Partial { targets: Vec<(ObjectId, Location)> },
}

impl GoalSpec {
    /// Required final location of `o`, if any.
    pub fn target_of(&self, o: ObjectId) -> Option<Location> {
        match self {
            GoalSpec::Single { object, stack, above } => {
                (*object == o).then_some(Location::OnStack { stack: *stack, above: *above })
            }
            GoalSpec::Multi { target } => Some(target.location(o)),
            GoalSpec::Partial { targets } => targets.iter().find(|(t, _)| *t == o).map(|(_, l)| *l),
        }
    }

    pub fn targets(&self, objects: usize) -> Vec<Option<Location>> {
        (0..objects).map(|o| self.target_of(ObjectId(o))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    /// Real stack locations. Buffers are appended implicitly.
    pub stacks: Vec<StackDesc>,
    pub buffers: usize,
    pub containers: Vec<ContainerDesc>,
    pub start: Arrangement,
    pub goal: GoalSpec,
    pub options: ActionOptions,
}

impl Instance {
    pub fn stack_count(&self) -> usize {
        self.stacks.len() + self.buffers
    }

    pub fn real_stack_count(&self) -> usize {
        self.stacks.len()
    }

    pub fn object_count(&self) -> usize {
        self.start.object_count()
    }

    pub fn is_buffer(&self, s: StackId) -> bool {
        s.0 >= self.stacks.len()
    }

    pub fn max_height(&self, s: StackId) -> usize {
        self.stacks.get(s.0).map_or(1, |d| d.max_height)
    }

    pub fn position(&self, s: StackId) -> Point2 {
        match self.stacks.get(s.0) {
            Some(d) => Point2::new(d.x, d.y),
            None => buffer_position(s.0 - self.stacks.len()),
        }
    }

    pub fn region(&self, s: StackId) -> RegionId {
        self.stacks.get(s.0).map_or(RegionId(0), |d| d.region)
    }

    pub fn region_count(&self) -> usize {
        let stacks = (0..self.stack_count()).map(|s| self.region(StackId(s)).0);
        let containers = self.containers.iter().map(|c| c.region.0);
        stacks.chain(containers).max().map_or(1, |m| m + 1)
    }

    pub fn heights(&self) -> Vec<usize> {
        (0..self.stack_count()).map(|s| self.max_height(StackId(s))).collect()
    }

    /// Capacity of one topple activation.
    pub fn topple_cap(&self) -> usize {
        let l = self.object_count().max(1);
        self.options.max_topple.map_or(l, |m| m.min(l))
    }

    pub fn with_options(&self, options: ActionOptions) -> Instance {
        Instance { options, ..self.clone() }
    }

    /// Validates start and goal against the stack layout.
    pub fn check(&self) -> Result<(), DomainError> {
        if self.stack_count() == 0 {
            return Err(DomainError::InvalidInstance("no stacks".into()));
        }
        if let Some(s) = self.stacks.iter().position(|d| d.max_height == 0) {
            return Err(DomainError::InvalidInstance(format!("stack s{s} has max height 0")));
        }
        self.start.check(self)?;
        if self.start.container_regions.len() != self.containers.len() {
            return Err(DomainError::InvalidInstance("container region vector length mismatch".into()));
        }
        let l = self.object_count();
        match &self.goal {
            GoalSpec::Single { object, stack, above } => {
                if object.0 >= l {
                    return Err(DomainError::InvalidGoal(format!("unknown goal object {object}")));
                }
                if stack.0 >= self.stack_count() || *above >= self.max_height(*stack) {
                    return Err(DomainError::InvalidGoal(format!("goal slot {stack}/{above} does not exist")));
                }
            }
            GoalSpec::Multi { target } => target.check(self).map_err(|e| DomainError::InvalidGoal(e.to_string()))?,
            GoalSpec::Partial { targets } => {
                for (o, loc) in targets {
                    if o.0 >= l {
                        return Err(DomainError::InvalidGoal(format!("unknown goal object {o}")));
                    }
                    if let Location::OnStack { stack, above } = loc {
                        if stack.0 >= self.stack_count() || *above >= self.max_height(*stack) {
                            return Err(DomainError::InvalidGoal(format!("goal slot {stack}/{above} does not exist")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    PickPlace { from: StackId, to: StackId },
    Topple { stack: StackId, count: usize },
    TablePick { object: ObjectId, to: StackId },
    ScoopLoad { object: ObjectId, container: ContainerId, region: RegionId },
    ScoopCarry { container: ContainerId, to_region: RegionId },
    ScoopUnload { object: ObjectId, to: StackId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    PickPlace,
    Topple,
    TablePick,
    ScoopLoad,
    ScoopCarry,
    ScoopUnload,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::PickPlace,
        ActionKind::Topple,
        ActionKind::TablePick,
        ActionKind::ScoopLoad,
        ActionKind::ScoopCarry,
        ActionKind::ScoopUnload,
    ];
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::PickPlace { .. } => ActionKind::PickPlace,
            Action::Topple { .. } => ActionKind::Topple,
            Action::TablePick { .. } => ActionKind::TablePick,
            Action::ScoopLoad { .. } => ActionKind::ScoopLoad,
            Action::ScoopCarry { .. } => ActionKind::ScoopCarry,
            Action::ScoopUnload { .. } => ActionKind::ScoopUnload,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Action::PickPlace { from, to } => write!(f, "pick_place({from}->{to})"),
            Action::Topple { stack, count } => write!(f, "topple({stack}, {count})"),
            Action::TablePick { object, to } => write!(f, "table_pick({object}->{to})"),
            Action::ScoopLoad { object, container, region } => write!(f, "scoop_load({object}->{container}@{region})"),
            Action::ScoopCarry { container, to_region } => write!(f, "scoop_carry({container}->{to_region})"),
            Action::ScoopUnload { object, to } => write!(f, "scoop_unload({object}->{to})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<Action>,
}

impl Plan {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Per-kind action counts of a plan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionHistogram {
    pub pick_place: usize,
    pub topple: usize,
    pub table_pick: usize,
    pub scoop_load: usize,
    pub scoop_carry: usize,
    pub scoop_unload: usize,
    /// Total number of objects moved by topples.
    pub toppled_objects: usize,
}

impl ActionHistogram {
    pub fn of(actions: &[Action]) -> Self {
        let mut h = Self::default();
        for a in actions {
            match *a {
                Action::PickPlace { .. } => h.pick_place += 1,
                Action::Topple { count, .. } => {
                    h.topple += 1;
                    h.toppled_objects += count;
                }
                Action::TablePick { .. } => h.table_pick += 1,
                Action::ScoopLoad { .. } => h.scoop_load += 1,
                Action::ScoopCarry { .. } => h.scoop_carry += 1,
                Action::ScoopUnload { .. } => h.scoop_unload += 1,
            }
        }
        h
    }

    pub fn total(&self) -> usize {
        self.pick_place + self.topple + self.table_pick + self.scoop_load + self.scoop_carry + self.scoop_unload
    }

    pub fn count(&self, kind: ActionKind) -> usize {
        match kind {
            ActionKind::PickPlace => self.pick_place,
            ActionKind::Topple => self.topple,
            ActionKind::TablePick => self.table_pick,
            ActionKind::ScoopLoad => self.scoop_load,
            ActionKind::ScoopCarry => self.scoop_carry,
            ActionKind::ScoopUnload => self.scoop_unload,
        }
    }
}

fn violated(which: Violation) -> DomainError {
    DomainError::PreconditionViolated { which }
}

fn check_stack(inst: &Instance, s: StackId) -> Result<(), DomainError> {
    if s.0 >= inst.stack_count() {
        return Err(violated(Violation::UnknownStack(s)));
    }
    Ok(())
}

fn shift_stack(next: &mut Arrangement, stack: StackId, delta: isize) {
    for loc in &mut next.locations {
        if let Location::OnStack { stack: s, above } = loc {
            if *s == stack {
                *above = (*above as isize + delta) as usize;
            }
        }
    }
}

/// Applies one action. Never mutates `arr`.
pub fn apply(inst: &Instance, arr: &Arrangement, action: &Action) -> Result<Arrangement, DomainError> {
    let mut next = arr.clone();
    match *action {
        Action::PickPlace { from, to } => {
            check_stack(inst, from)?;
            check_stack(inst, to)?;
            if from == to {
                return Err(violated(Violation::SameStack(from)));
            }
            let obj = arr.top(from).ok_or(violated(Violation::EmptySource(from)))?;
            if arr.height(to) >= inst.max_height(to) {
                return Err(violated(Violation::DestinationFull(to)));
            }
            next.locations[obj.0] = Location::TABLE;
            shift_stack(&mut next, from, -1);
            shift_stack(&mut next, to, 1);
            next.locations[obj.0] = Location::OnStack { stack: to, above: 0 };
        }
        Action::Topple { stack, count } => {
            if !inst.options.topple {
                return Err(violated(Violation::ActionDisabled(ActionKind::Topple)));
            }
            check_stack(inst, stack)?;
            let height = arr.height(stack);
            if count == 0 || count > height {
                return Err(violated(Violation::ToppleCount { stack, count, height }));
            }
            if count > inst.topple_cap() {
                return Err(violated(Violation::ToppleCap { count, cap: inst.topple_cap() }));
            }
            for loc in &mut next.locations {
                if let Location::OnStack { stack: s, above } = loc {
                    if *s == stack {
                        if *above < count {
                            *loc = Location::TABLE;
                        } else {
                            *above -= count;
                        }
                    }
                }
            }
        }
        Action::TablePick { object, to } => {
            check_stack(inst, to)?;
            if object.0 >= arr.object_count() || !matches!(arr.location(object), Location::OnTable { .. }) {
                return Err(violated(Violation::NotOnTable(object)));
            }
            if arr.height(to) >= inst.max_height(to) {
                return Err(violated(Violation::DestinationFull(to)));
            }
            shift_stack(&mut next, to, 1);
            next.locations[object.0] = Location::OnStack { stack: to, above: 0 };
        }
        Action::ScoopLoad { object, container, region } => {
            if !inst.options.scoop {
                return Err(violated(Violation::ActionDisabled(ActionKind::ScoopLoad)));
            }
            let desc = inst.containers.get(container.0).ok_or(violated(Violation::UnknownContainer(container)))?;
            if object.0 >= arr.object_count() {
                return Err(violated(Violation::NotLoadable(object)));
            }
            if arr.container_contents(container).len() >= desc.capacity {
                return Err(violated(Violation::ContainerFull(container)));
            }
            if arr.container_region(container).is_some_and(|r| r != region) {
                return Err(violated(Violation::RegionMismatch { container, region }));
            }
            match arr.location(object) {
                Location::OnStack { stack, above: 0 } if inst.region(stack) == region => {
                    shift_stack(&mut next, stack, -1);
                }
                Location::OnTable { .. } => {}
                _ => return Err(violated(Violation::NotLoadable(object))),
            }
            next.locations[object.0] = Location::InContainer { container };
            next.container_regions[container.0] = Some(region);
        }
        Action::ScoopCarry { container, to_region } => {
            if !inst.options.scoop {
                return Err(violated(Violation::ActionDisabled(ActionKind::ScoopCarry)));
            }
            if container.0 >= inst.containers.len() {
                return Err(violated(Violation::UnknownContainer(container)));
            }
            match arr.container_region(container) {
                Some(r) if r != to_region && to_region.0 < inst.region_count() => {}
                _ => return Err(violated(Violation::RegionMismatch { container, region: to_region })),
            }
            next.container_regions[container.0] = Some(to_region);
        }
        Action::ScoopUnload { object, to } => {
            if !inst.options.scoop {
                return Err(violated(Violation::ActionDisabled(ActionKind::ScoopUnload)));
            }
            check_stack(inst, to)?;
            let container = match arr.locations.get(object.0) {
                Some(Location::InContainer { container }) => *container,
                _ => return Err(violated(Violation::NotInContainer(object))),
            };
            if arr.container_region(container) != Some(inst.region(to)) {
                return Err(violated(Violation::RegionMismatch { container, region: inst.region(to) }));
            }
            if arr.height(to) >= inst.max_height(to) {
                return Err(violated(Violation::DestinationFull(to)));
            }
            shift_stack(&mut next, to, 1);
            next.locations[object.0] = Location::OnStack { stack: to, above: 0 };
            if next.container_contents(container).is_empty() {
                next.container_regions[container.0] = None;
            }
        }
    }
    Ok(next)
}

/// Every applicable action in a fixed enumeration order: pick-place by
/// (from, to), topples by (stack, count), table picks by (object, to),
/// then scoop loads, carries and unloads.
pub fn legal_actions(inst: &Instance, arr: &Arrangement) -> Vec<Action> {
    let n = inst.stack_count();
    let heights: Vec<usize> = (0..n).map(|s| arr.height(StackId(s))).collect();
    let room = |s: usize| heights[s] < inst.max_height(StackId(s));
    let mut out = Vec::new();
    for from in 0..n {
        if heights[from] == 0 {
            continue;
        }
        for to in (0..n).filter(|&to| to != from && room(to)) {
            out.push(Action::PickPlace { from: StackId(from), to: StackId(to) });
        }
    }
    if inst.options.topple {
        let cap = inst.topple_cap();
        for s in 0..n {
            for count in 1..=heights[s].min(cap) {
                out.push(Action::Topple { stack: StackId(s), count });
            }
        }
    }
    for o in arr.table_objects() {
        for to in (0..n).filter(|&to| room(to)) {
            out.push(Action::TablePick { object: o, to: StackId(to) });
        }
    }
    if inst.options.scoop {
        for (c, desc) in inst.containers.iter().enumerate() {
            let c = ContainerId(c);
            let current = arr.container_region(c);
            if arr.container_contents(c).len() < desc.capacity {
                for o in 0..arr.object_count() {
                    let o = ObjectId(o);
                    let regions: Vec<RegionId> = match arr.location(o) {
                        Location::OnStack { stack, above: 0 } => vec![inst.region(stack)],
                        Location::OnTable { .. } => (0..inst.region_count()).map(RegionId).collect(),
                        _ => continue,
                    };
                    for region in regions.into_iter().filter(|&r| current.is_none_or(|cur| cur == r)) {
                        out.push(Action::ScoopLoad { object: o, container: c, region });
                    }
                }
            }
            if let Some(r) = current {
                for to_region in (0..inst.region_count()).map(RegionId).filter(|&t| t != r) {
                    out.push(Action::ScoopCarry { container: c, to_region });
                }
                for o in arr.container_contents(c) {
                    for to in (0..n).filter(|&to| room(to) && inst.region(StackId(to)) == r) {
                        out.push(Action::ScoopUnload { object: o, to: StackId(to) });
                    }
                }
            }
        }
    }
    out
}

pub fn is_goal(arr: &Arrangement, goal: &GoalSpec) -> bool {
    match goal {
        GoalSpec::Single { object, stack, above } => {
            arr.location(*object) == Location::OnStack { stack: *stack, above: *above }
        }
        GoalSpec::Multi { target } => {
            arr.locations.len() == target.locations.len()
                && arr.locations.iter().zip(&target.locations).all(|(a, b)| a.same_place(b))
        }
        GoalSpec::Partial { targets } => targets.iter().all(|(o, loc)| arr.location(*o).same_place(loc)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Every step applied cleanly and the final arrangement satisfies the goal.
    pub success: bool,
    pub failed_step: Option<usize>,
    pub violation: Option<Violation>,
    pub goal_reached: bool,
    pub final_arrangement: Arrangement,
    pub histogram: ActionHistogram,
}

/// Replays `plan` from the instance start. Failures are reported, not raised.
pub fn validate_plan(inst: &Instance, plan: &Plan) -> ValidationReport {
    let mut arr = inst.start.clone();
    let mut failed_step = None;
    let mut violation = None;
    for (i, action) in plan.actions.iter().enumerate() {
        match apply(inst, &arr, action) {
            Ok(next) => arr = next,
            Err(DomainError::PreconditionViolated { which }) => {
                failed_step = Some(i);
                violation = Some(which);
                break;
            }
            Err(other) => {
                failed_step = Some(i);
                violation = Some(Violation::Other(other.to_string()));
                break;
            }
        }
    }
    let goal_reached = failed_step.is_none() && is_goal(&arr, &inst.goal);
    ValidationReport {
        success: failed_step.is_none() && goal_reached,
        failed_step,
        violation,
        goal_reached,
        final_arrangement: arr,
        histogram: ActionHistogram::of(&plan.actions),
    }
}
