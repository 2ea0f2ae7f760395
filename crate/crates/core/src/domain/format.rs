//! TOML instance and plan files.

use serde::{Deserialize, Serialize};

use super::{
    ActionOptions, Arrangement, ContainerDesc, GoalSpec, Instance, Location, ObjectId, Plan, Point2, RegionId,
    StackDesc, StackId,
};
use crate::error::DomainError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    #[serde(default)]
    buffers: usize,
    #[serde(default)]
    options: OptionsFile,
    stacks: Vec<StackFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    containers: Vec<ContainerFile>,
    objects: Vec<PlacedObject>,
    goal: GoalFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsFile {
    topple_enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_topple: Option<usize>,
    #[serde(default)]
    scoop_enabled: bool,
}

impl Default for OptionsFile {
    fn default() -> Self {
        Self { topple_enabled: true, max_topple: None, scoop_enabled: false }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StackFile {
    id: usize,
    max_height: usize,
    x: f64,
    y: f64,
    #[serde(default)]
    region: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContainerFile {
    id: usize,
    capacity: usize,
    region: usize,
    /// Region the container starts in when it is loaded at start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_region: Option<usize>,
}

/// One object location. Exactly one of `stack`, `table`, `container` is set.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacedObject {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stack: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    above: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    table: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    container: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GoalFile {
    Single { object: usize, stack: usize, above: usize },
    Multi { locations: Vec<PlacedObject> },
    Partial { locations: Vec<PlacedObject> },
}

fn placed(id: usize, loc: &Location) -> PlacedObject {
    let mut p = PlacedObject { id, stack: None, above: None, table: false, x: None, y: None, container: None };
    match *loc {
        Location::OnStack { stack, above } => {
            p.stack = Some(stack.0);
            p.above = Some(above);
        }
        Location::OnTable { pose } => {
            p.table = true;
            p.x = pose.map(|q| q.x);
            p.y = pose.map(|q| q.y);
        }
        Location::InContainer { container } => p.container = Some(container.0),
    }
    p
}

fn location(p: &PlacedObject) -> Result<Location, DomainError> {
    let bad = || DomainError::Parse(format!("object {} must name exactly one of stack, table, container", p.id));
    match (p.stack, p.table, p.container) {
        (Some(s), false, None) => {
            let above = p.above.ok_or_else(|| DomainError::Parse(format!("object {} is missing `above`", p.id)))?;
            Ok(Location::on_stack(s, above))
        }
        (None, true, None) => {
            let pose = match (p.x, p.y) {
                (Some(x), Some(y)) => Some(Point2::new(x, y)),
                (None, None) => None,
                _ => return Err(DomainError::Parse(format!("object {} has half a pose", p.id))),
            };
            Ok(Location::OnTable { pose })
        }
        (None, false, Some(c)) => Ok(Location::InContainer { container: super::ContainerId(c) }),
        _ => Err(bad()),
    }
}

fn locations(list: &[PlacedObject], count: usize) -> Result<Vec<Option<Location>>, DomainError> {
    let mut out = vec![None; count];
    for p in list {
        let slot = out.get_mut(p.id).ok_or_else(|| DomainError::Parse(format!("object id {} out of range", p.id)))?;
        if slot.is_some() {
            return Err(DomainError::Parse(format!("object {} listed twice", p.id)));
        }
        *slot = Some(location(p)?);
    }
    Ok(out)
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, DomainError> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| DomainError::Parse(e.to_string()))?;
    for (i, s) in file.stacks.iter().enumerate() {
        if s.id != i {
            return Err(DomainError::Parse(format!("stack ids must be 0..n in order, found {} at {i}", s.id)));
        }
    }
    for (i, c) in file.containers.iter().enumerate() {
        if c.id != i {
            return Err(DomainError::Parse(format!("container ids must be 0..n in order, found {} at {i}", c.id)));
        }
    }
    let n = file.objects.len();
    let start = locations(&file.objects, n)?
        .into_iter()
        .enumerate()
        .map(|(o, l)| l.ok_or_else(|| DomainError::Parse(format!("object {o} has no start location"))))
        .collect::<Result<Vec<_>, _>>()?;
    let regions = file.containers.iter().map(|c| c.start_region.map(RegionId)).collect();
    let start = Arrangement::new(start, file.containers.len()).with_container_regions(regions);
    let goal = match &file.goal {
        GoalFile::Single { object, stack, above } => {
            GoalSpec::Single { object: ObjectId(*object), stack: StackId(*stack), above: *above }
        }
        GoalFile::Multi { locations: list } => {
            let target = locations(list, n)?
                .into_iter()
                .enumerate()
                .map(|(o, l)| l.ok_or_else(|| DomainError::Parse(format!("multi goal misses object {o}"))))
                .collect::<Result<Vec<_>, _>>()?;
            GoalSpec::Multi { target: Arrangement::new(target, file.containers.len()) }
        }
        GoalFile::Partial { locations: list } => {
            let targets = list.iter().map(|p| Ok((ObjectId(p.id), location(p)?))).collect::<Result<_, DomainError>>()?;
            GoalSpec::Partial { targets }
        }
    };
    let inst = Instance {
        name: file.name,
        stacks: file
            .stacks
            .iter()
            .map(|s| StackDesc { max_height: s.max_height, x: s.x, y: s.y, region: RegionId(s.region) })
            .collect(),
        buffers: file.buffers,
        containers: file
            .containers
            .iter()
            .map(|c| ContainerDesc { capacity: c.capacity, region: RegionId(c.region) })
            .collect(),
        start,
        goal,
        options: ActionOptions {
            topple: file.options.topple_enabled,
            max_topple: file.options.max_topple,
            scoop: file.options.scoop_enabled,
        },
    };
    inst.check()?;
    Ok(inst)
}

pub fn write_instance(inst: &Instance) -> String {
    let file = InstanceFile {
        name: inst.name.clone(),
        buffers: inst.buffers,
        options: OptionsFile {
            topple_enabled: inst.options.topple,
            max_topple: inst.options.max_topple,
            scoop_enabled: inst.options.scoop,
        },
        stacks: inst
            .stacks
            .iter()
            .enumerate()
            .map(|(id, s)| StackFile { id, max_height: s.max_height, x: s.x, y: s.y, region: s.region.0 })
            .collect(),
        containers: inst
            .containers
            .iter()
            .enumerate()
            .map(|(id, c)| ContainerFile {
                id,
                capacity: c.capacity,
                region: c.region.0,
                start_region: inst.start.container_regions()[id].map(|r| r.0),
            })
            .collect(),
        objects: inst.start.locations().iter().enumerate().map(|(o, l)| placed(o, l)).collect(),
        goal: match &inst.goal {
            GoalSpec::Single { object, stack, above } => {
                GoalFile::Single { object: object.0, stack: stack.0, above: *above }
            }
            GoalSpec::Multi { target } => {
                GoalFile::Multi { locations: target.locations().iter().enumerate().map(|(o, l)| placed(o, l)).collect() }
            }
            GoalSpec::Partial { targets } => {
                GoalFile::Partial { locations: targets.iter().map(|(o, l)| placed(o.0, l)).collect() }
            }
        },
    };
    toml::to_string(&file).expect("instance is always representable as TOML")
}

pub fn parse_plan(text: &str) -> Result<Plan, DomainError> {
    toml::from_str(text).map_err(|e| DomainError::Parse(e.to_string()))
}

pub fn write_plan(plan: &Plan) -> String {
    toml::to_string(plan).expect("plan is always representable as TOML")
}
