//! Two-region demo: eight blocks stacked on the left, a two-slot scoop on the
//! left, and the two bottom blocks wanted on the right.

use crate::domain::{
    ActionOptions, Arrangement, ContainerDesc, GoalSpec, Instance, Location, ObjectId, RegionId, StackDesc,
};

pub const LEFT: RegionId = RegionId(0);
pub const RIGHT: RegionId = RegionId(1);

/// Topple, pick-and-place and scoop all enabled.
pub const SCOOP_OPTIONS: ActionOptions = ActionOptions { topple: true, max_topple: None, scoop: true };

/// Stacks 0 and 1 (left, full, height 4) hold objects 0..4 and 4..8 top
/// first; stacks 2 and 3 are the empty right-hand goal slots. Three buffers
/// sit on the left.
pub fn build_scoop_demo_instance() -> Instance {
    let stack = |y: f64, region: RegionId| StackDesc { max_height: 4, x: 0.55, y, region };
    Instance {
        name: "scoop_demo".into(),
        stacks: vec![stack(0.25, LEFT), stack(0.45, LEFT), stack(-0.25, RIGHT), stack(-0.45, RIGHT)],
        buffers: 3,
        containers: vec![ContainerDesc { capacity: 2, region: LEFT }],
        start: Arrangement::from_stacks(&[vec![0, 1, 2, 3], vec![4, 5, 6, 7]], 8, 1),
        goal: GoalSpec::Partial {
            targets: vec![(ObjectId(3), Location::on_stack(2, 0)), (ObjectId(7), Location::on_stack(3, 0))],
        },
        options: SCOOP_OPTIONS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::oracle::{brute_force_plan, OptimalPlanResult, DEFAULT_STATE_CAP};
    use crate::domain::{parse_instance, validate_plan, write_instance, Plan};

    #[test]
    fn demo_shape() {
        let inst = build_scoop_demo_instance();
        inst.check().unwrap();
        assert_eq!(inst.object_count(), 8);
        assert_eq!(inst.region_count(), 2);
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn oracle_costs() {
        let inst = build_scoop_demo_instance();
        let cost = |options| match brute_force_plan(&inst, options, DEFAULT_STATE_CAP).unwrap() {
            OptimalPlanResult::Found { cost, plan } => {
                assert!(validate_plan(&inst.with_options(options), &Plan::new(plan.actions.clone())).goal_reached);
                cost
            }
            OptimalPlanResult::Infeasible => panic!("demo is solvable"),
        };
        assert_eq!(cost(ActionOptions::PICK_PLACE), 8);
        assert_eq!(cost(SCOOP_OPTIONS), 4);
    }
}
