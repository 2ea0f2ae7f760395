//! Generators, experiment protocols and report writers.

pub mod ablation;
pub mod gen;
pub mod report;
pub mod suite;

pub use ablation::{cells_from_rows, run_ablation, AblationCell, AblationConfig, AblationResult};
pub use gen::{expected_single_goal_depth, blocked_instance, gen_multi_goal, gen_single_goal, goal_object_depth, Layout};
pub use report::{ablation_heatmaps, rows_csv_string, write_cells_csv, write_rows_csv, Heatmap};
pub use suite::{
    evaluate, run_instances, run_one, run_suite, summarize, summary_text, BenchConfig, BenchRow, MeanSd, Protocol,
    Summary, Toggle, ROW_COLUMNS,
};

#[cfg(test)]
mod tests;
