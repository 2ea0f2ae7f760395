//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{row_layout, ActionOptions, Arrangement, GoalSpec, Instance, ObjectId, StackId};
use crate::error::BenchError;

/// Shape shared by the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub real_stacks: usize,
    pub max_height: usize,
    pub buffers: usize,
}

impl Layout {
    pub fn new(real_stacks: usize, max_height: usize, buffers: usize) -> Self {
        Layout { real_stacks, max_height, buffers }
    }
}

/// Three stacks, four objects on the first; the bottom object must reach the
/// empty third stack.
pub fn blocked_instance(options: ActionOptions) -> Instance {
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

/// Stacks objects in a random order, each onto a uniformly chosen non-full
/// stack among `stacks`. Returns stack contents top first.
fn scatter(rng: &mut ChaCha8Rng, objects: usize, stacks: &[usize], total: usize, h: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..objects).collect();
    order.shuffle(rng);
    let mut bottom_up: Vec<Vec<usize>> = vec![Vec::new(); total];
    for o in order {
        let open: Vec<usize> = stacks.iter().copied().filter(|&s| bottom_up[s].len() < h).collect();
        let s = open[rng.gen_range(0..open.len())];
        bottom_up[s].push(o);
    }
    bottom_up
        .into_iter()
        .map(|mut v| {
            v.reverse();
            v
        })
        .collect()
}

/// Objects fill every real stack but the last, which is the empty goal
/// location; the goal object is uniform and must end there, uncovered.
pub fn gen_single_goal(objects: usize, layout: Layout, seed: u64) -> Result<Instance, BenchError> {
    let sources = layout.real_stacks.saturating_sub(1);
    if objects > sources * layout.max_height || objects == 0 {
        return Err(BenchError::CapacityExceeded { objects, capacity: sources * layout.max_height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source_ids: Vec<usize> = (0..sources).collect();
    let stacks = scatter(&mut rng, objects, &source_ids, layout.real_stacks, layout.max_height);
    let goal_object = ObjectId(rng.gen_range(0..objects));
    Ok(Instance {
        name: format!("single_l{objects}_s{seed}"),
        stacks: row_layout(layout.real_stacks, layout.max_height),
        buffers: layout.buffers,
        containers: vec![],
        start: Arrangement::from_stacks(&stacks, objects, 0),
        goal: GoalSpec::Single { object: goal_object, stack: StackId(layout.real_stacks - 1), above: 0 },
        options: ActionOptions::TOPPLE,
    })
}

/// Start and goal both scattered uniformly over the real stacks.
pub fn gen_multi_goal(objects: usize, layout: Layout, seed: u64) -> Result<Instance, BenchError> {
    let capacity = layout.real_stacks * layout.max_height;
    if objects > capacity {
        return Err(BenchError::CapacityExceeded { objects, capacity });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<usize> = (0..layout.real_stacks).collect();
    let start = scatter(&mut rng, objects, &ids, layout.real_stacks, layout.max_height);
    let goal = scatter(&mut rng, objects, &ids, layout.real_stacks, layout.max_height);
    Ok(Instance {
        name: format!("multi_l{objects}_s{seed}"),
        stacks: row_layout(layout.real_stacks, layout.max_height),
        buffers: layout.buffers,
        containers: vec![],
        start: Arrangement::from_stacks(&start, objects, 0),
        goal: GoalSpec::Multi { target: Arrangement::from_stacks(&goal, objects, 0) },
        options: ActionOptions::TOPPLE,
    })
}

/// Objects above the goal object at the start (single-goal instances only).
pub fn goal_object_depth(inst: &Instance) -> Option<usize> {
    match inst.goal {
        GoalSpec::Single { object, .. } => match inst.start.location(object) {
            crate::domain::Location::OnStack { above, .. } => Some(above),
            _ => None,
        },
        _ => None,
    }
}

/// Expected goal-object depth of [`gen_single_goal`] when no stack fills up:
/// each other object shares the goal object's stack with probability
/// `1/sources` and lies above it with probability one half.
pub fn expected_single_goal_depth(objects: usize, sources: usize) -> f64 {
    (objects as f64 - 1.0) / (2.0 * sources as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::write_instance;

    #[test]
    fn generators_are_reproducible() {
        let layout = Layout::new(3, 4, 2);
        let a = write_instance(&gen_multi_goal(6, layout, 11).unwrap());
        let b = write_instance(&gen_multi_goal(6, layout, 11).unwrap());
        assert_eq!(a, b);
        let a = write_instance(&gen_single_goal(4, layout, 3).unwrap());
        assert_eq!(a, write_instance(&gen_single_goal(4, layout, 3).unwrap()));
    }

    #[test]
    fn single_goal_forced_structure() {
        for seed in 0..20 {
            let inst = gen_single_goal(4, Layout::new(2, 4, 0), seed).unwrap();
            inst.check().unwrap();
            assert_eq!(inst.start.height(StackId(0)), 4);
            assert_eq!(inst.start.height(StackId(1)), 0);
            assert!(goal_object_depth(&inst).unwrap() <= 3);
        }
    }

    #[test]
    fn single_goal_mean_depth_matches_expectation() {
        let n = 4000;
        let layout = Layout::new(3, 4, 0);
        let sum: usize = (0..n).map(|s| goal_object_depth(&gen_single_goal(4, layout, s).unwrap()).unwrap()).sum();
        let mean = sum as f64 / n as f64;
        let expected = expected_single_goal_depth(4, 2);
        assert!((mean - expected).abs() < 0.05, "mean {mean} expected {expected}");
        assert!((0.6..=1.8).contains(&expected));
    }

    #[test]
    fn capacity_is_checked() {
        assert!(matches!(gen_single_goal(9, Layout::new(3, 4, 0), 0), Err(BenchError::CapacityExceeded { .. })));
        assert!(matches!(gen_multi_goal(13, Layout::new(3, 4, 0), 0), Err(BenchError::CapacityExceeded { .. })));
    }
}
