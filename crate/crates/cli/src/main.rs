use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use smash_core::bench::{
    ablation_heatmaps, blocked_instance, gen_multi_goal, gen_single_goal, run_ablation, run_suite, summarize,
    summary_text, write_cells_csv, write_rows_csv, AblationConfig, BenchConfig, Layout, Protocol,
};
use smash_core::domain::{parse_instance, parse_plan, validate_plan, write_instance, write_plan, ActionOptions, Instance};
use smash_core::exec_sim::{execute, monte_carlo_success, report_text, ExecConfig};
use smash_core::extract::{action_histogram, extract};
use smash_core::flow::{build_model_for, export_lp};
use smash_core::scoop::build_scoop_demo_instance;
use smash_core::solver::{solve_anytime, SolveConfig};

#[derive(Parser)]
#[command(name = "smash", version, about = "Stack rearrangement planning with topple actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ActionFlags {
    /// Disable topple actions.
    #[arg(long)]
    no_topple: bool,
    /// Largest number of objects one topple may move.
    #[arg(long, value_name = "N")]
    max_topple: Option<usize>,
    /// Enable scoop actions.
    #[arg(long)]
    scoop: bool,
}

impl ActionFlags {
    fn apply(&self, mut options: ActionOptions) -> ActionOptions {
        if self.no_topple {
            options.topple = false;
        }
        if self.max_topple.is_some() {
            options.max_topple = self.max_topple;
        }
        if self.scoop {
            options.scoop = true;
        }
        options
    }
}

#[derive(Args, Clone)]
struct SolveFlags {
    #[arg(long, value_name = "N", default_value_t = 30_000)]
    budget_ms: u64,
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "N")]
    horizon_max: Option<usize>,
}

impl SolveFlags {
    fn config(&self) -> SolveConfig {
        SolveConfig { budget_ms: self.budget_ms, seed: self.seed, horizon_max: self.horizon_max, ..Default::default() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Single,
    Multi,
    Blocked,
    ScoopDemo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Single,
    Multi,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the plan.
    Plan {
        instance: PathBuf,
        #[command(flatten)]
        actions: ActionFlags,
        #[command(flatten)]
        solve: SolveFlags,
        /// Override the number of buffer locations.
        #[arg(long, value_name = "N")]
        buffers: Option<usize>,
        /// Also print the incumbent trace.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check a plan against an instance.
    Validate {
        instance: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        actions: ActionFlags,
    },
    /// Execute a plan under the stochastic landing model.
    Simulate {
        instance: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        actions: ActionFlags,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        /// Report a Monte Carlo success rate over this many trials instead.
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
        /// Meters of landing spread per toppled object.
        #[arg(long, value_name = "M")]
        dispersion: Option<f64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run a paired benchmark suite and write rows.csv and summary.txt.
    Bench {
        #[arg(long, value_enum, default_value = "multi")]
        protocol: ProtocolArg,
        #[arg(long, value_delimiter = ',', default_value = "4,6,9")]
        sizes: Vec<usize>,
        #[arg(long, value_name = "N", default_value_t = 20)]
        instances: usize,
        #[arg(long, value_name = "N", default_value_t = 12)]
        buffers: usize,
        /// Real-stack height; defaults to the object count.
        #[arg(long, value_name = "N")]
        max_height: Option<usize>,
        #[arg(long, value_name = "N", default_value_t = 30_000)]
        budget_ms: u64,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "N", default_value_t = 1)]
        workers: usize,
        #[arg(long, value_name = "PATH", default_value = "bench_out")]
        out: PathBuf,
    },
    /// Sweep budgets and buffer counts; write cells.csv, rows.csv and heatmaps.
    Ablate {
        #[arg(long, value_name = "N", default_value_t = 6)]
        objects: usize,
        #[arg(long, value_name = "N", default_value_t = 3)]
        stacks: usize,
        #[arg(long, value_name = "N", default_value_t = 2)]
        max_height: usize,
        #[arg(long, value_delimiter = ',', default_value = "1000,5000,15000")]
        budgets: Vec<u64>,
        #[arg(long = "buffer-list", value_delimiter = ',', default_value = "0,2,4,8")]
        buffer_list: Vec<usize>,
        #[arg(long, value_name = "N", default_value_t = 20)]
        instances: usize,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "N", default_value_t = 1)]
        workers: usize,
        #[arg(long, value_name = "PATH", default_value = "ablation_out")]
        out: PathBuf,
    },
    /// Write the flow model at a fixed horizon in LP format.
    ExportLp {
        instance: PathBuf,
        #[arg(long, value_name = "T")]
        horizon: usize,
        #[command(flatten)]
        actions: ActionFlags,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Generate an instance file.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, value_name = "N", default_value_t = 6)]
        objects: usize,
        #[arg(long, value_name = "N", default_value_t = 3)]
        stacks: usize,
        /// Defaults to the object count.
        #[arg(long, value_name = "N")]
        max_height: Option<usize>,
        #[arg(long, value_name = "N", default_value_t = 0)]
        buffers: usize,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        actions: ActionFlags,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn read_instance(path: &Path, flags: &ActionFlags) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    let options = flags.apply(inst.options);
    Ok(inst.with_options(options))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Plan { instance, actions, solve, buffers, trace, out } => {
            let mut inst = read_instance(&instance, &actions)?;
            if let Some(b) = buffers {
                inst.buffers = b;
                inst.check().context("instance does not fit the requested buffer count")?;
            }
            let result = solve_anytime(&inst, &solve.config())?;
            eprintln!(
                "status {} objective {} lower_bound {} first_feasible_ms {} elapsed_ms {:.1}",
                result.status.label(),
                result.objective().map_or("-".into(), |o| o.to_string()),
                result.lower_bound,
                result.time_to_first_feasible_ms.map_or("-".into(), |t| format!("{t:.1}")),
                result.elapsed_ms
            );
            if trace {
                eprint!("{}", result.trace());
            }
            if let Some(best) = result.best() {
                let plan = extract(&best.solution, &result.graph, &inst)?;
                let h = action_histogram(&plan);
                eprintln!("actions {} toppled_objects {}", h.total(), h.toppled_objects);
                emit(out.as_deref(), &write_plan(&plan))?;
            }
        }
        Command::Validate { instance, plan, actions } => {
            let inst = read_instance(&instance, &actions)?;
            let text = fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let plan = parse_plan(&text)?;
            let report = validate_plan(&inst, &plan);
            println!("success = {}", report.success);
            println!("goal_reached = {}", report.goal_reached);
            println!("actions = {}", report.histogram.total());
            if let (Some(step), Some(v)) = (report.failed_step, &report.violation) {
                println!("failed_step = {step}");
                println!("violation = \"{v}\"");
            }
        }
        Command::Simulate { instance, plan, actions, seed, trials, dispersion, out } => {
            let inst = read_instance(&instance, &actions)?;
            let text = fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let plan = parse_plan(&text)?;
            let mut config = ExecConfig { seed, ..Default::default() };
            if let Some(d) = dispersion {
                if d < 0.0 {
                    bail!("--dispersion must be nonnegative");
                }
                config.topple_dispersion_scale = d;
            }
            match trials {
                Some(0) => bail!("--trials must be at least 1"),
                Some(n) => emit(out.as_deref(), &format!("trials = {n}\nsuccess_rate = {}\n", monte_carlo_success(&plan, &inst, &config, n)))?,
                None => emit(out.as_deref(), &report_text(&execute(&plan, &inst, &config)))?,
            }
        }
        Command::Bench { protocol, sizes, instances, buffers, max_height, budget_ms, seed, workers, out } => {
            let config = BenchConfig {
                protocol: match protocol {
                    ProtocolArg::Single => Protocol::SingleGoal,
                    ProtocolArg::Multi => Protocol::MultiGoal,
                },
                sizes,
                instances_per_setting: instances,
                max_height,
                buffers,
                budget_ms,
                seed,
                workers,
                ..Default::default()
            };
            let rows = run_suite(&config)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_rows_csv(&rows, fs::File::create(out.join("rows.csv"))?)?;
            let summary = summary_text(&summarize(&rows));
            fs::write(out.join("summary.txt"), &summary)?;
            print!("{summary}");
        }
        Command::Ablate { objects, stacks, max_height, budgets, buffer_list, instances, seed, workers, out } => {
            let config = AblationConfig {
                budgets_ms: budgets,
                buffers: buffer_list,
                objects,
                real_stacks: stacks,
                max_height,
                n_instances: instances,
                seed,
                workers,
                ..Default::default()
            };
            let result = run_ablation(&config)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_cells_csv(&result.cells, fs::File::create(out.join("cells.csv"))?)?;
            write_rows_csv(&result.rows, fs::File::create(out.join("rows.csv"))?)?;
            for (name, map) in ablation_heatmaps(&result) {
                fs::write(out.join(name), map.to_svg())?;
            }
            for c in &result.cells {
                println!(
                    "budget_ms {} buffers {} {} success {:.2} mean_actions {}",
                    c.budget_ms,
                    c.buffers,
                    c.toggle,
                    c.success_rate,
                    c.mean_actions.map_or("-".into(), |a| format!("{a:.2}"))
                );
            }
        }
        Command::ExportLp { instance, horizon, actions, out } => {
            let inst = read_instance(&instance, &actions)?;
            let model = build_model_for(&inst, horizon)?;
            let stats = model.stats();
            eprintln!("variables {} constraints {} nonzeros {}", stats.variables, stats.constraints, stats.nonzeros);
            match out {
                Some(path) => export_lp(&model, fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?)?,
                None => export_lp(&model, std::io::stdout().lock())?,
            }
        }
        Command::Gen { kind, objects, stacks, max_height, buffers, seed, actions, out } => {
            let layout = Layout::new(stacks, max_height.unwrap_or(objects), buffers);
            let inst = match kind {
                GenKind::Single => gen_single_goal(objects, layout, seed)?,
                GenKind::Multi => gen_multi_goal(objects, layout, seed)?,
                GenKind::Blocked => blocked_instance(ActionOptions::TOPPLE),
                GenKind::ScoopDemo => build_scoop_demo_instance(),
            };
            let options = actions.apply(inst.options);
            emit(out.as_deref(), &write_instance(&inst.with_options(options)))?;
        }
    }
    Ok(())
}
