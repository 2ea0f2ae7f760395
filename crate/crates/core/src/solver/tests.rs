use super::*;
use crate::bench::{blocked_instance, gen_multi_goal, gen_single_goal, Layout};
use crate::domain::oracle::{brute_force_plan, OptimalPlanResult, DEFAULT_STATE_CAP};
use crate::domain::{row_layout, ActionOptions, Arrangement, GoalSpec};
use crate::flow::{build_model, check_solution, violations};

fn config() -> SolveConfig {
    SolveConfig { budget_ms: 20_000, ..Default::default() }
}

fn oracle_cost(inst: &Instance) -> Option<usize> {
    match brute_force_plan(inst, inst.options, DEFAULT_STATE_CAP).unwrap() {
        OptimalPlanResult::Found { cost, .. } => Some(cost),
        OptimalPlanResult::Infeasible => None,
    }
}

fn assert_sound(inst: &Instance, r: &SolveResult) {
    for inc in &r.incumbents {
        let model = build_model(inst, &r.graph, inc.horizon).unwrap();
        assert!(check_solution(&model, &inc.solution), "{:?}", violations(&model, &inc.solution));
        assert_eq!(inc.solution.objective, i64::from(inc.objective));
        assert_eq!(inc.actions.len(), inc.objective as usize);
    }
    assert!(r.incumbents.windows(2).all(|w| w[1].objective < w[0].objective));
}

#[test]
fn settled_instance_is_free() {
    let start = Arrangement::from_stacks(&[vec![0, 1], vec![2]], 3, 0);
    let inst = Instance {
        name: "settled".into(),
        stacks: row_layout(3, 3),
        buffers: 0,
        containers: vec![],
        goal: GoalSpec::Multi { target: start.clone() },
        start,
        options: ActionOptions::TOPPLE,
    };
    let r = solve_anytime(&inst, &config()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert_eq!(r.objective(), Some(0));
    assert_eq!(r.lower_bound, 0);
    assert!(r.time_to_first_feasible_ms.is_some());
    assert_sound(&inst, &r);
}

#[test]
fn blocked_optima() {
    let smash = blocked_instance(ActionOptions::TOPPLE);
    let r = solve_anytime(&smash, &config()).unwrap();
    assert_eq!((r.status, r.objective()), (Status::Optimal, Some(2)));
    assert_sound(&smash, &r);

    let pap = blocked_instance(ActionOptions::PICK_PLACE);
    let r = solve_anytime(&pap, &config()).unwrap();
    assert_eq!((r.status, r.objective()), (Status::Optimal, Some(4)));
    assert_sound(&pap, &r);
}

#[test]
fn fixed_seed_is_deterministic() {
    let inst = gen_multi_goal(5, Layout::new(3, 4, 1), 7).unwrap();
    let cfg = SolveConfig { seed: 3, node_limit: Some(200_000), ..config() };
    let a = solve_anytime(&inst, &cfg).unwrap();
    let b = solve_anytime(&inst, &cfg).unwrap();
    let seq = |r: &SolveResult| r.incumbents.iter().map(|i| (i.objective, i.horizon, i.actions.clone())).collect::<Vec<_>>();
    assert_eq!(seq(&a), seq(&b));
    assert_eq!(a.status, b.status);
}

#[test]
fn horizon_cap_reports_infeasible() {
    let inst = blocked_instance(ActionOptions::PICK_PLACE);
    let cfg = SolveConfig { horizon_max: Some(2), ..config() };
    let r = solve_anytime(&inst, &cfg).unwrap();
    assert_eq!(r.status, Status::InfeasibleUpToHorizon);
    assert!(r.incumbents.is_empty());
}

#[test]
fn node_limit_reports_budget() {
    let inst = gen_multi_goal(6, Layout::new(3, 4, 2), 1).unwrap();
    let cfg = SolveConfig { node_limit: Some(3), ..config() };
    let r = solve_anytime(&inst, &cfg).unwrap();
    assert!(matches!(r.status, Status::NoSolutionInBudget | Status::FeasibleBudgetExhausted));
}

#[test]
fn gap_stop() {
    let inst = gen_multi_goal(5, Layout::new(3, 4, 1), 2).unwrap();
    let exact = solve_anytime(&inst, &config()).unwrap();
    let loose = solve_anytime(&inst, &SolveConfig { optimality_gap_stop: 100, ..config() }).unwrap();
    assert!(loose.status.is_feasible());
    assert_eq!(loose.incumbents.len(), 1);
    assert!(loose.objective() >= exact.objective());
}

#[test]
fn matches_oracle_on_small_instances() {
    for seed in 0..12 {
        for options in [ActionOptions::PICK_PLACE, ActionOptions::TOPPLE] {
            let inst = gen_multi_goal(4, Layout::new(3, 3, 1), seed).unwrap().with_options(options);
            let r = solve_anytime(&inst, &config()).unwrap();
            assert_eq!(r.status, Status::Optimal, "{}", inst.name);
            assert_eq!(r.objective().map(|c| c as usize), oracle_cost(&inst), "{} {:?}", inst.name, options);
            assert!(r.lower_bound <= r.objective().unwrap());
            assert_sound(&inst, &r);

            let single = gen_single_goal(4, Layout::new(3, 3, 0), seed).unwrap().with_options(options);
            let r = solve_anytime(&single, &config()).unwrap();
            assert_eq!(r.objective().map(|c| c as usize), oracle_cost(&single), "{}", single.name);
            assert_sound(&single, &r);
        }
    }
}

#[test]
fn ascending_horizons_agree() {
    for seed in 0..6 {
        let inst = gen_multi_goal(4, Layout::new(3, 3, 1), seed).unwrap();
        let top = solve_anytime(&inst, &config()).unwrap();
        let up = solve_anytime(&inst, &SolveConfig { horizon_min: Some(0), ..config() }).unwrap();
        assert_eq!(up.status, Status::Optimal);
        assert_eq!(top.objective(), up.objective());
        assert_sound(&inst, &up);
    }
}
