use proptest::prelude::*;

use super::lp::lp_text;
use super::*;
use crate::bench::blocked_instance;
use crate::domain::{apply, legal_actions, row_layout, Action, ActionOptions, Arrangement, GoalSpec, ObjectId, StackId};
use crate::solver::schedule::{plan_to_flow, schedule_plan};

fn pp(from: usize, to: usize) -> Action {
    Action::PickPlace { from: StackId(from), to: StackId(to) }
}

fn settled() -> Instance {
    let start = Arrangement::from_stacks(&[vec![0, 1], vec![2]], 3, 0);
    Instance {
        name: "settled".into(),
        stacks: row_layout(3, 3),
        buffers: 0,
        containers: vec![],
        goal: GoalSpec::Multi { target: start.clone() },
        start,
        options: ActionOptions::TOPPLE,
    }
}

#[test]
fn variable_count_formula() {
    let inst = blocked_instance(ActionOptions::TOPPLE);
    for t in [0, 1, 5] {
        let m = build_model_for(&inst, t).unwrap();
        let g = &m.graph;
        let expected = 4 * (g.edges.len() + g.nodes.len()) * t + m.aggregates().len() * t;
        assert_eq!(m.variable_count(), expected);
        assert!((0..m.variable_count()).all(|id| matches!(m.cost(id), 0 | 1)));
    }
}

#[test]
fn all_wait_on_settled_instance() {
    let inst = settled();
    for t in [0, 3] {
        let m = build_model_for(&inst, t).unwrap();
        let sol = FlowSolution::all_wait(&m);
        assert!(check_solution(&m, &sol), "{:?}", violations(&m, &sol));
    }
    let blocked = build_model_for(&blocked_instance(ActionOptions::TOPPLE), 3).unwrap();
    let idle = FlowSolution::all_wait(&blocked);
    assert!(violations(&blocked, &idle).iter().any(|r| r.starts_with("term")));
}

#[test]
fn blocked_topple_plan_costs_two() {
    let inst = blocked_instance(ActionOptions::TOPPLE);
    let plan = [Action::Topple { stack: StackId(0), count: 3 }, pp(0, 2)];
    let m = build_model_for(&inst, 5).unwrap();
    let sol = plan_to_flow(&m, &inst, &plan).expect("fits in five steps");
    assert!(check_solution(&m, &sol), "{:?}", violations(&m, &sol));
    assert_eq!(sol.objective, 2);
    let short = build_model_for(&inst, 4).unwrap();
    assert!(plan_to_flow(&short, &inst, &plan).is_none());
}

#[test]
fn blocked_pick_place_plan_costs_four() {
    let inst = blocked_instance(ActionOptions::PICK_PLACE);
    let plan = [pp(0, 1), pp(0, 1), pp(0, 1), pp(0, 2)];
    let m = build_model_for(&inst, 4).unwrap();
    let sol = plan_to_flow(&m, &inst, &plan).unwrap();
    assert!(check_solution(&m, &sol), "{:?}", violations(&m, &sol));
    assert_eq!(sol.objective, 4);
    // no aggregate edges: the objective is the number of cross moves
    assert!(m.aggregates().is_empty());
    let crosses = sol.steps.iter().flatten().filter(|s| matches!(s, Step::Move(e) if m.graph.edges[*e].kind == EdgeKind::CrossTop)).count();
    assert_eq!(crosses as i64, sol.objective);
}

#[test]
fn tampered_solutions_are_rejected() {
    let inst = blocked_instance(ActionOptions::TOPPLE);
    let plan = [Action::Topple { stack: StackId(0), count: 3 }, pp(0, 2)];
    let m = build_model_for(&inst, 5).unwrap();
    let sol = plan_to_flow(&m, &inst, &plan).unwrap();
    let fire = sol.activations.iter().position(|a| !a.is_empty()).unwrap();

    let mut twice = sol.clone();
    let a = twice.activations[fire][0];
    twice.activations[fire].push(a);
    assert!(!check_solution(&m, &twice));

    let mut unpaid = sol.clone();
    unpaid.activations[fire].clear();
    unpaid.objective -= 1;
    assert!(violations(&m, &unpaid).iter().any(|r| r.starts_with("couple")));

    let mut misreported = sol.clone();
    misreported.objective = 1;
    assert!(!check_solution(&m, &misreported));
}

#[test]
fn one_topple_per_step() {
    // two full stacks toppled in the same step
    let inst = Instance {
        name: "two".into(),
        stacks: row_layout(3, 2),
        buffers: 0,
        containers: vec![],
        start: Arrangement::from_stacks(&[vec![0, 1], vec![2, 3]], 4, 0),
        goal: GoalSpec::Single { object: ObjectId(1), stack: StackId(2), above: 0 },
        options: ActionOptions::TOPPLE,
    };
    let plan = [Action::Topple { stack: StackId(0), count: 2 }, Action::Topple { stack: StackId(1), count: 2 }];
    let m = build_model_for(&inst, 6).unwrap();
    let sol = plan_to_flow(&m, &inst, &plan).unwrap();
    let fired: Vec<usize> = (0..m.horizon).filter(|&t| !sol.activations[t].is_empty()).collect();
    assert_eq!(fired.len(), 2);
    assert_ne!(fired[0], fired[1]);

    // move the second firing onto the first one's step
    let mut merged = sol.clone();
    let (t0, t1) = (fired[0], fired[1]);
    let e1 = merged.activations[t1].pop().unwrap();
    merged.activations[t0].push(e1);
    for o in 0..4 {
        if merged.steps[t1][o] == Step::Move(e1) {
            merged.steps[t0][o] = Step::Move(e1);
            merged.steps[t1][o] = Step::Wait(m.graph.edges[e1].to);
        }
    }
    let bad = violations(&m, &merged);
    assert!(bad.iter().any(|r| r.starts_with("excl")), "{bad:?}");
}

#[test]
fn lp_export_is_deterministic() {
    let inst = blocked_instance(ActionOptions::TOPPLE);
    let a = lp_text(&build_model_for(&inst, 3).unwrap());
    let b = lp_text(&build_model_for(&inst, 3).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("\\ "));
    assert!(a.contains("Minimize") && a.contains("Subject To") && a.contains("Binary") && a.ends_with("End\n"));
    assert!(a.contains("y_e") && a.contains("x_o0_e") && a.contains("w_o3_v"));
}

#[test]
fn lp_export_at_horizon_zero() {
    let m = build_model_for(&settled(), 0).unwrap();
    let text = lp_text(&m);
    assert_eq!(text.matches("fixed at node").count(), 3);
    assert!(!text.contains("x_o"));
    let mut buf = Vec::new();
    lp::export_lp(&m, &mut buf).unwrap();
    assert_eq!(buf, text.as_bytes());
}

fn random_start() -> impl Strategy<Value = Arrangement> {
    (Just(()), proptest::collection::vec(0usize..3, 4)).prop_map(|(_, picks)| {
        let mut stacks = vec![Vec::new(); 3];
        for (o, s) in picks.into_iter().enumerate() {
            stacks[s].insert(0, o);
        }
        Arrangement::from_stacks(&stacks, 4, 0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Random action sequences become flow solutions that satisfy every row,
    /// with occupancy conserved and cost equal to the action count.
    #[test]
    fn random_plans_are_feasible_flows(start in random_start(), picks in proptest::collection::vec(0usize..64, 0..6)) {
        let mut inst = Instance {
            name: "p".into(),
            stacks: row_layout(3, 4),
            buffers: 1,
            containers: vec![],
            start: start.clone(),
            goal: GoalSpec::Multi { target: start.clone() },
            options: ActionOptions::TOPPLE,
        };
        let mut arr = start;
        let mut actions = Vec::new();
        for p in picks {
            let legal = legal_actions(&inst, &arr);
            let a = legal[p % legal.len()];
            arr = apply(&inst, &arr, &a).unwrap();
            actions.push(a);
        }
        if arr.table_objects().is_empty() {
            inst.goal = GoalSpec::Multi { target: arr.clone() };
        } else {
            inst.goal = GoalSpec::Single { object: ObjectId(0), stack: StackId(0), above: 0 };
            prop_assume!(arr.location(ObjectId(0)) == crate::domain::Location::on_stack(0, 0));
        }
        let makespan = schedule_plan(&inst, &actions).iter().map(|t| t.end).max().unwrap_or(0) as usize;
        let m = build_model_for(&inst, makespan).unwrap();
        let sol = plan_to_flow(&m, &inst, &actions).expect("schedule fits its own makespan");
        prop_assert!(check_solution(&m, &sol), "{:?}", violations(&m, &sol));
        prop_assert_eq!(sol.objective, actions.len() as i64);
        for t in 0..=m.horizon {
            prop_assert_eq!(sol.positions(&m, t).len(), 4);
        }
    }
}
