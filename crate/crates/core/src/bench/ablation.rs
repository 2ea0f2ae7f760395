//! Budget × buffer sweep. Each (instance, buffers, toggle) is solved once
//! with the largest budget; smaller budgets read the incumbent timeline.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::BenchError;
use crate::exec_sim::ExecConfig;
use crate::solver::{solve_anytime, SolveConfig};

use super::gen::{gen_multi_goal, Layout};
use super::suite::{evaluate, pool, BenchRow, Toggle};

#[derive(Debug, Clone, PartialEq)]
pub struct AblationConfig {
    pub budgets_ms: Vec<u64>,
    pub buffers: Vec<usize>,
    pub objects: usize,
    pub real_stacks: usize,
    pub max_height: usize,
    pub n_instances: usize,
    pub seed: u64,
    pub toggles: Vec<Toggle>,
    pub exec: ExecConfig,
    pub workers: usize,
}

impl Default for AblationConfig {
    /// Six objects on three full stacks of two.
    fn default() -> Self {
        AblationConfig {
            budgets_ms: vec![1_000, 5_000, 15_000],
            buffers: vec![0, 2, 4, 8],
            objects: 6,
            real_stacks: 3,
            max_height: 2,
            n_instances: 20,
            seed: 0,
            toggles: Toggle::topple_pair(),
            exec: ExecConfig::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationCell {
    pub budget_ms: u64,
    pub buffers: usize,
    pub toggle: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful runs.
    pub mean_actions: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationResult {
    pub rows: Vec<BenchRow>,
    pub cells: Vec<AblationCell>,
}

impl AblationResult {
    pub fn cell(&self, budget_ms: u64, buffers: usize, toggle: &str) -> Option<&AblationCell> {
        self.cells.iter().find(|c| c.budget_ms == budget_ms && c.buffers == buffers && c.toggle == toggle)
    }

    /// Smallest buffer count at which `toggle` reaches `rate` under every budget.
    pub fn first_buffers_reaching(&self, toggle: &str, rate: f64) -> Option<usize> {
        let mut buffers: Vec<usize> = self.cells.iter().map(|c| c.buffers).collect();
        buffers.sort_unstable();
        buffers.dedup();
        buffers.into_iter().find(|&b| {
            self.cells.iter().filter(|c| c.buffers == b && c.toggle == toggle).all(|c| c.success_rate >= rate)
        })
    }
}

/// Cells recomputed from rows alone. Success here is task-planning
/// success: a valid plan within the budget, execution aside.
pub fn cells_from_rows(rows: &[BenchRow]) -> Vec<AblationCell> {
    let mut keys: Vec<(u64, usize, String)> = rows.iter().map(|r| (r.budget_ms, r.buffers, r.toggle.clone())).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(budget_ms, buffers, toggle)| {
            let group: Vec<&BenchRow> =
                rows.iter().filter(|r| r.budget_ms == budget_ms && r.buffers == buffers && r.toggle == toggle).collect();
            let ok: Vec<usize> = group.iter().filter(|r| r.plan_valid).filter_map(|r| r.actions).collect();
            AblationCell {
                budget_ms,
                buffers,
                runs: group.len(),
                successes: ok.len(),
                success_rate: ok.len() as f64 / group.len() as f64,
                mean_actions: (!ok.is_empty()).then(|| ok.iter().sum::<usize>() as f64 / ok.len() as f64),
                toggle,
            }
        })
        .collect()
}

pub fn run_ablation(config: &AblationConfig) -> Result<AblationResult, BenchError> {
    let max_budget = config.budgets_ms.iter().copied().max().unwrap_or(1_000);
    let mut jobs = Vec::new();
    for &b in &config.buffers {
        for k in 0..config.n_instances {
            let seed = config.seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
            let inst = gen_multi_goal(config.objects, Layout::new(config.real_stacks, config.max_height, b), seed)?;
            for t in &config.toggles {
                jobs.push((k, inst.with_options(t.options), t));
            }
        }
    }
    let solve = SolveConfig { budget_ms: max_budget, seed: config.seed, ..Default::default() };
    let per_job: Vec<Vec<BenchRow>> = pool(config.workers).install(|| {
        jobs.par_iter()
            .map(|(k, inst, t)| {
                let result = solve_anytime(inst, &solve).expect("generated instances are well formed");
                let exec = ExecConfig { seed: config.exec.seed.wrapping_add(*k as u64), ..config.exec };
                config.budgets_ms.iter().map(|&budget| evaluate(inst, &t.label, &result, budget, &exec).0).collect()
            })
            .collect()
    });
    let rows: Vec<BenchRow> = per_job.into_iter().flatten().collect();
    let cells = cells_from_rows(&rows);
    Ok(AblationResult { rows, cells })
}
