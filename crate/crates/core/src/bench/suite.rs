//! Paired benchmark runs: every instance is solved once per toggle.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{validate_plan, ActionKind, ActionOptions, Instance, Plan};
use crate::error::BenchError;
use crate::exec_sim::{execute, ExecConfig};
use crate::extract::{action_histogram, extract};
use crate::solver::{solve_anytime, SolveConfig, SolveResult, Status};

use super::gen::{gen_multi_goal, gen_single_goal, goal_object_depth, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    SingleGoal,
    MultiGoal,
}

impl Protocol {
    pub fn label(self) -> &'static str {
        match self {
            Protocol::SingleGoal => "single_goal",
            Protocol::MultiGoal => "multi_goal",
        }
    }
}

/// A named action set; comparisons always run every toggle on the same instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toggle {
    pub label: String,
    pub options: ActionOptions,
}

impl Toggle {
    pub fn new(label: &str, options: ActionOptions) -> Self {
        Toggle { label: label.into(), options }
    }

    pub fn topple_pair() -> Vec<Toggle> {
        vec![Toggle::new("no_topple", ActionOptions::PICK_PLACE), Toggle::new("topple", ActionOptions::TOPPLE)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub protocol: Protocol,
    pub sizes: Vec<usize>,
    pub instances_per_setting: usize,
    pub real_stacks: usize,
    /// Real-stack height per size; `None` means the object count.
    pub max_height: Option<usize>,
    pub buffers: usize,
    pub budget_ms: u64,
    pub seed: u64,
    pub toggles: Vec<Toggle>,
    pub exec: ExecConfig,
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            protocol: Protocol::MultiGoal,
            sizes: vec![4, 6, 9],
            instances_per_setting: 20,
            real_stacks: 3,
            max_height: None,
            buffers: 12,
            budget_ms: 30_000,
            seed: 0,
            toggles: Toggle::topple_pair(),
            exec: ExecConfig::default(),
            workers: 1,
        }
    }
}

impl BenchConfig {
    pub fn layout(&self, objects: usize) -> Layout {
        Layout::new(self.real_stacks, self.max_height.unwrap_or(objects), self.buffers)
    }

    /// Seed of instance `k` at size `objects`; shared by all toggles.
    pub fn instance_seed(&self, objects: usize, k: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add((objects * 10_000 + k) as u64)
    }

    pub fn instances(&self) -> Result<Vec<Instance>, BenchError> {
        let mut out = Vec::new();
        for &objects in &self.sizes {
            for k in 0..self.instances_per_setting {
                let seed = self.instance_seed(objects, k);
                out.push(match self.protocol {
                    Protocol::SingleGoal => gen_single_goal(objects, self.layout(objects), seed)?,
                    Protocol::MultiGoal => gen_multi_goal(objects, self.layout(objects), seed)?,
                });
            }
        }
        Ok(out)
    }
}

/// One (instance, toggle) outcome. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub objects: usize,
    pub buffers: usize,
    pub toggle: String,
    pub status: String,
    pub plan_found: bool,
    pub plan_valid: bool,
    pub exec_success: bool,
    pub success: bool,
    pub failure_reason: String,
    pub actions: Option<usize>,
    pub pick_place: usize,
    pub topples: usize,
    pub table_picks: usize,
    pub scoop_actions: usize,
    pub toppled_objects: usize,
    pub lower_bound: u32,
    pub time_to_first_feasible_ms: Option<f64>,
    pub solve_ms: f64,
    pub exec_proxy_s: Option<f64>,
    pub goal_object_depth: Option<usize>,
    pub budget_ms: u64,
    /// Incumbent objectives in discovery order, `;`-separated.
    pub incumbents: String,
}

pub const ROW_COLUMNS: [&str; 23] = [
    "instance",
    "objects",
    "buffers",
    "toggle",
    "status",
    "plan_found",
    "plan_valid",
    "exec_success",
    "success",
    "failure_reason",
    "actions",
    "pick_place",
    "topples",
    "table_picks",
    "scoop_actions",
    "toppled_objects",
    "lower_bound",
    "time_to_first_feasible_ms",
    "solve_ms",
    "exec_proxy_s",
    "goal_object_depth",
    "budget_ms",
    "incumbents",
];

/// A plan taken from a solve, with its checks.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: SolveResult,
    pub plan: Option<Plan>,
    pub row: BenchRow,
}

fn incumbent_list(r: &SolveResult, upto_ms: f64) -> String {
    let objs: Vec<String> =
        r.incumbents.iter().take_while(|i| i.t_ms <= upto_ms).map(|i| i.objective.to_string()).collect();
    objs.join(";")
}

/// Status the run would have reported had it stopped at `budget_ms`.
pub fn status_at(result: &SolveResult, budget_ms: u64) -> &'static str {
    if result.elapsed_ms <= budget_ms as f64 {
        result.status.label()
    } else if result.objective_at(budget_ms as f64).is_some() {
        Status::FeasibleBudgetExhausted.label()
    } else {
        Status::NoSolutionInBudget.label()
    }
}

/// Builds the row for the best incumbent found within `budget_ms` of `result`.
pub fn evaluate(inst: &Instance, toggle: &str, result: &SolveResult, budget_ms: u64, exec: &ExecConfig) -> (BenchRow, Option<Plan>) {
    let within = result.incumbents.iter().take_while(|i| i.t_ms <= budget_ms as f64).last();
    let plan = within.map(|inc| extract(&inc.solution, &result.graph, inst).expect("solver incumbents are feasible"));
    let mut row = BenchRow {
        instance: inst.name.clone(),
        objects: inst.object_count(),
        buffers: inst.buffers,
        toggle: toggle.into(),
        status: status_at(result, budget_ms).into(),
        plan_found: plan.is_some(),
        plan_valid: false,
        exec_success: false,
        success: false,
        failure_reason: String::new(),
        actions: None,
        pick_place: 0,
        topples: 0,
        table_picks: 0,
        scoop_actions: 0,
        toppled_objects: 0,
        lower_bound: result.lower_bound,
        time_to_first_feasible_ms: result.time_to_first_feasible_ms.filter(|&t| t <= budget_ms as f64),
        solve_ms: result.elapsed_ms.min(budget_ms as f64),
        exec_proxy_s: None,
        goal_object_depth: goal_object_depth(inst),
        budget_ms,
        incumbents: incumbent_list(result, budget_ms as f64),
    };
    if let Some(plan) = &plan {
        let report = validate_plan(inst, plan);
        row.plan_valid = report.success && report.goal_reached;
        let h = action_histogram(plan);
        row.actions = Some(plan.len());
        row.pick_place = h.count(ActionKind::PickPlace);
        row.topples = h.count(ActionKind::Topple);
        row.table_picks = h.count(ActionKind::TablePick);
        row.scoop_actions =
            h.count(ActionKind::ScoopLoad) + h.count(ActionKind::ScoopCarry) + h.count(ActionKind::ScoopUnload);
        row.toppled_objects = h.toppled_objects;
        let exec_report = execute(plan, inst, exec);
        row.exec_success = exec_report.success;
        row.exec_proxy_s = Some(exec_report.proxy_seconds);
        if let Some(f) = exec_report.failure {
            row.failure_reason = f.reason.label().into();
        }
        row.success = row.plan_valid && row.exec_success;
    } else {
        row.failure_reason = "no_plan".into();
    }
    (row, plan)
}

/// Solves and evaluates one instance under one toggle.
pub fn run_one(inst: &Instance, toggle: &Toggle, solve: &SolveConfig, exec: &ExecConfig) -> Outcome {
    let inst = inst.with_options(toggle.options);
    let result = solve_anytime(&inst, solve).expect("generated instances are well formed");
    let (row, plan) = evaluate(&inst, &toggle.label, &result, solve.budget_ms, exec);
    Outcome { result, plan, row }
}

/// Exec seed of instance index `k`, shared across toggles.
fn exec_for(config: &ExecConfig, k: usize) -> ExecConfig {
    ExecConfig { seed: config.seed.wrapping_add(k as u64), ..*config }
}

pub(crate) fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool")
}

/// Runs every toggle on every instance. Rows come back in (instance, toggle) order.
pub fn run_instances(instances: &[Instance], toggles: &[Toggle], solve: &SolveConfig, exec: &ExecConfig, workers: usize) -> Vec<BenchRow> {
    let jobs: Vec<(usize, &Toggle)> = (0..instances.len()).flat_map(|k| toggles.iter().map(move |t| (k, t))).collect();
    pool(workers).install(|| {
        jobs.par_iter()
            .map(|&(k, t)| run_one(&instances[k], t, solve, &exec_for(exec, k)).row)
            .collect()
    })
}

pub fn run_suite(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let instances = config.instances()?;
    let solve = SolveConfig { budget_ms: config.budget_ms, seed: config.seed, ..Default::default() };
    Ok(run_instances(&instances, &config.toggles, &solve, &config.exec, config.workers))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanSd {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<MeanSd> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Some(MeanSd { mean, sd: var.sqrt(), n: v.len() })
    }
}

/// Aggregates for one (objects, toggle) group, recomputed from rows only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub objects: usize,
    pub toggle: String,
    pub runs: usize,
    pub success_rate: f64,
    pub actions: Option<MeanSd>,
    pub time_to_first_feasible_ms: Option<MeanSd>,
    pub exec_proxy_s: Option<MeanSd>,
    pub goal_object_depth: Option<MeanSd>,
}

pub fn summarize(rows: &[BenchRow]) -> Vec<Summary> {
    let mut keys: Vec<(usize, String)> = Vec::new();
    for r in rows {
        let key = (r.objects, r.toggle.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(objects, toggle)| {
            let group: Vec<&BenchRow> = rows.iter().filter(|r| r.objects == objects && r.toggle == toggle).collect();
            let ok: Vec<&&BenchRow> = group.iter().filter(|r| r.success).collect();
            Summary {
                objects,
                runs: group.len(),
                success_rate: ok.len() as f64 / group.len() as f64,
                actions: MeanSd::of(ok.iter().filter_map(|r| r.actions.map(|a| a as f64))),
                time_to_first_feasible_ms: MeanSd::of(group.iter().filter_map(|r| r.time_to_first_feasible_ms)),
                exec_proxy_s: MeanSd::of(ok.iter().filter_map(|r| r.exec_proxy_s)),
                goal_object_depth: MeanSd::of(group.iter().filter_map(|r| r.goal_object_depth.map(|d| d as f64))),
                toggle,
            }
        })
        .collect()
}

/// Human-readable summary table.
pub fn summary_text(summaries: &[Summary]) -> String {
    let fmt = |m: &Option<MeanSd>| m.map_or("-".to_string(), |m| format!("{:.2} ± {:.2}", m.mean, m.sd));
    let mut out = String::from("objects  toggle      success  actions          first feasible ms  exec proxy s      depth\n");
    for s in summaries {
        out.push_str(&format!(
            "{:<8} {:<11} {:<8.2} {:<16} {:<18} {:<17} {}\n",
            s.objects,
            s.toggle,
            s.success_rate,
            fmt(&s.actions),
            fmt(&s.time_to_first_feasible_ms),
            fmt(&s.exec_proxy_s),
            fmt(&s.goal_object_depth)
        ));
    }
    out
}
