//! Command-line front end: `plan`, `pool`, `learn`, `verify` and `width`.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::parse_config;
use crate::features::{generate_pool, FeaturePool, PoolBounds};
use crate::model::{State, Task};
use crate::pddl;
use crate::planner::{iw_search, solve, Budget, Classifier, SearchError};
use crate::policy::{analyze, AnalyzeOptions, Outcome, Policy, PolicyError};
use crate::wrapper::{pool_sample, run_wrapper, FailureReason, RunReport, Strategy, WrapperConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;
pub const EXIT_EXHAUSTED: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "plearn", about = "Learn and check rule-based general policies")]
pub struct Cli {
    /// Worker threads for verification and width evaluation.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shortest plan for one problem.
    Plan(PlanArgs),
    /// Generate and prune a feature pool.
    Pool(PoolArgs),
    /// Learn a policy from training problems.
    Learn(LearnArgs),
    /// Check a policy on problems.
    Verify(VerifyArgs),
    /// Coverage and effective width of a policy used as a sketch.
    Width(WidthArgs),
}

#[derive(Clone, Debug, Default, Args)]
pub struct BudgetArgs {
    /// Node budget for each search.
    #[arg(long)]
    pub node_budget: Option<usize>,
    /// Time budget in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            nodes: self.node_budget,
            time: self.time_budget.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    pub domain: PathBuf,
    pub problem: PathBuf,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    pub domain: PathBuf,
    /// Problem files or glob patterns.
    #[arg(required = true)]
    pub problems: Vec<String>,
    #[arg(long, default_value_t = 6)]
    pub complexity: usize,
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
    /// States expanded for pruning.
    #[arg(long, default_value_t = 3000)]
    pub sample: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    pub domain: PathBuf,
    #[arg(required = true)]
    pub problems: Vec<String>,
    /// Pool JSON; generated from the training problems when absent.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub complexity: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub simplify: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Policy JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub domain: PathBuf,
    pub policy: PathBuf,
    #[arg(required = true)]
    pub problems: Vec<String>,
    /// Explore every state instead of one per symmetry class.
    #[arg(long)]
    pub no_symmetry: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    pub domain: PathBuf,
    pub policy: PathBuf,
    #[arg(required = true)]
    pub problems: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub k_max: usize,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Expands glob patterns; plain paths pass through. Order is as given, with
/// each pattern's matches sorted.
pub fn expand_problems(patterns: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in patterns {
        if p.contains(['*', '?', '[']) {
            let mut found: Vec<PathBuf> = glob::glob(p)
                .map_err(|e| usage(format!("{p}: {e}")))?
                .filter_map(Result::ok)
                .collect();
            if found.is_empty() {
                return Err(usage(format!("{p}: no matching files")));
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(PathBuf::from(p));
        }
    }
    let mut seen = HashSet::new();
    out.retain(|p| seen.insert(p.clone()));
    Ok(out)
}

pub fn load_domain(path: &Path) -> Result<Arc<crate::model::DomainSpec>, CliError> {
    let text = read(path)?;
    let name = path.display().to_string();
    pddl::parse_domain_named(&text, &name)
        .map(Arc::new)
        .map_err(|e| usage(e.to_string()))
}

pub fn load_task(domain: &Arc<crate::model::DomainSpec>, path: &Path) -> Result<Task, CliError> {
    let text = read(path)?;
    let name = path.display().to_string();
    let inst = pddl::parse_problem_named(&text, domain, &name).map_err(|e| usage(e.to_string()))?;
    Task::new(domain.clone(), &inst).map_err(|e| usage(format!("{name}: {e}")))
}

fn load_tasks(domain: &Path, problems: &[String]) -> Result<Vec<Task>, CliError> {
    let d = load_domain(domain)?;
    let paths = expand_problems(problems)?;
    if paths.is_empty() {
        return Err(usage("no problem files"));
    }
    paths.iter().map(|p| load_task(&d, p)).collect()
}

fn load_policy(path: &Path) -> Result<Policy, CliError> {
    let p = Policy::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    p.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(p)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| usage(e.to_string())),
    }
}

pub fn cmd_plan(args: &PlanArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let d = load_domain(&args.domain)?;
    let task = load_task(&d, &args.problem)?;
    match solve(&task, 0, &task.init, args.budget.budget()) {
        Ok(plan) => {
            emit(out, args.out.as_deref(), &plan.to_text(&task))?;
            Ok(EXIT_OK)
        }
        Err(SearchError::Unsolvable) => {
            eprintln!("{}: unsolvable", task.name);
            Ok(EXIT_FAILURE)
        }
        Err(e @ SearchError::BudgetExceeded { .. }) => {
            eprintln!("{}: {e}", task.name);
            Ok(EXIT_BUDGET)
        }
    }
}

pub fn cmd_pool(args: &PoolArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let tasks = load_tasks(&args.domain, &args.problems)?;
    if args.complexity == 0 || args.depth == 0 || args.sample == 0 {
        return Err(usage("bounds must be positive"));
    }
    let sample = pool_sample(&tasks, args.sample);
    let bounds = PoolBounds {
        complexity: args.complexity,
        depth: args.depth,
    };
    let pool = generate_pool(&tasks[0].domain, &tasks, &sample, bounds).map_err(|e| usage(e.to_string()))?;
    eprintln!("{} features", pool.len());
    emit(out, args.out.as_deref(), &pool.to_json())?;
    Ok(EXIT_OK)
}

/// Exit code for a wrapper outcome.
pub fn learn_exit_code(reason: Option<FailureReason>) -> i32 {
    match reason {
        None => EXIT_OK,
        Some(FailureReason::Edge | FailureReason::NoEligible | FailureReason::NoInstances) => EXIT_FAILURE,
        Some(FailureReason::Timeout) => EXIT_BUDGET,
        Some(FailureReason::Cyclic) => EXIT_INTERNAL,
        Some(FailureReason::Exhausted) => EXIT_EXHAUSTED,
    }
}

pub fn learn_config(args: &LearnArgs) -> Result<WrapperConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => parse_config(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => WrapperConfig::default(),
    };
    if let Some(c) = args.complexity {
        cfg.complexity = c;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(s) = args.strategy {
        cfg.strategy = s;
    }
    cfg.simplify |= args.simplify;
    if let Some(n) = args.budget.node_budget {
        cfg.plan_budget = Budget::nodes(n);
        cfg.verify_budget = Budget::nodes(n);
        cfg.classify_budget = Budget::nodes(n);
    }
    if let Some(t) = args.budget.time_budget {
        if t.is_nan() || t <= 0.0 {
            return Err(usage("time budget must be positive"));
        }
        cfg.time_limit = Some(Duration::from_secs_f64(t));
    }
    if cfg.k == 0 || cfg.complexity == 0 || cfg.depth == 0 {
        return Err(usage("bounds must be positive"));
    }
    Ok(cfg)
}

pub fn cmd_learn(args: &LearnArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = learn_config(args)?;
    let tasks = load_tasks(&args.domain, &args.problems)?;
    let pool = match &args.pool {
        Some(p) => FeaturePool::from_json(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => {
            let sample = pool_sample(&tasks, cfg.pool_sample);
            let bounds = PoolBounds {
                complexity: cfg.complexity,
                depth: cfg.depth,
            };
            generate_pool(&tasks[0].domain, &tasks, &sample, bounds).map_err(|e| usage(e.to_string()))?
        }
    };
    let run = run_wrapper(tasks, &pool, &cfg);
    let mut text = RunReport::table(std::slice::from_ref(&run.report));
    match &run.result {
        Ok(policy) => {
            text.push('\n');
            text.push_str(&policy.pretty());
            if let Some(p) = &args.out {
                write_file(p, &policy.to_json())?;
            }
        }
        Err(f) => {
            text.push_str(&format!("failure: {:?}", f.reason));
            if let Some(w) = &f.witness {
                text.push_str(&format!(" ({w})"));
            }
            text.push('\n');
        }
    }
    out.write_all(text.as_bytes()).map_err(|e| usage(e.to_string()))?;
    if let Some(p) = &args.report {
        write_file(p, &run.report.to_json())?;
    }
    Ok(learn_exit_code(run.report.reason))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub name: String,
    pub outcome: Result<Outcome, String>,
    pub visited: usize,
}

/// Analyzes `policy` on every task, in parallel.
pub fn verify_tasks(policy: &Policy, tasks: &[Task], opts: &AnalyzeOptions) -> Vec<VerifyRow> {
    tasks
        .par_iter()
        .map(|t| {
            let oracle = Classifier::new(opts.budget);
            match analyze(policy, t, &oracle, opts) {
                Ok(v) => VerifyRow {
                    name: t.name.clone(),
                    outcome: Ok(v.outcome),
                    visited: v.visited,
                },
                Err(e) => VerifyRow {
                    name: t.name.clone(),
                    outcome: Err(e.to_string()),
                    visited: 0,
                },
            }
        })
        .collect()
}

fn percent(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let policy = load_policy(&args.policy)?;
    let tasks = load_tasks(&args.domain, &args.problems)?;
    let opts = AnalyzeOptions {
        budget: args.budget.budget(),
        symmetry: !args.no_symmetry,
    };
    let rows = verify_tasks(&policy, &tasks, &opts);
    let mut text = String::new();
    let mut solved = 0;
    let mut budget_hit = false;
    for r in &rows {
        let verdict = match &r.outcome {
            Ok(o) => o.name().to_string(),
            Err(e) => {
                budget_hit = true;
                format!("error: {e}")
            }
        };
        if r.outcome == Ok(Outcome::Solves) {
            solved += 1;
        }
        text.push_str(&format!("{}\t{}\t{}\n", r.name, verdict, r.visited));
    }
    text.push_str(&format!("coverage: {:.1}%\n", percent(solved, rows.len())));
    emit(out, args.out.as_deref(), &text)?;
    Ok(if solved == rows.len() {
        EXIT_OK
    } else if budget_hit {
        EXIT_BUDGET
    } else {
        EXIT_FAILURE
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidthRow {
    pub name: String,
    pub solved: bool,
    pub max: usize,
    pub avg: f64,
    /// Set when a search ran out of budget.
    pub note: Option<String>,
}

/// Follows `policy` as a sketch: from each state, IW search up to `k_max`
/// for the nearest state the policy accepts as a successor pair.
pub fn effective_width(policy: &Policy, task: &Task, k_max: usize, budget: Budget) -> Result<WidthRow, PolicyError> {
    let ev = policy.evaluator(task)?;
    let bound = ev.bind(task)?;
    let kinds = policy.kinds();
    let mut row = WidthRow {
        name: task.name.clone(),
        solved: false,
        max: 0,
        avg: 0.0,
        note: None,
    };
    let mut widths = Vec::new();
    let mut seen: HashSet<State> = HashSet::new();
    let mut s = task.init.clone();
    while !task.is_goal(&s) {
        if !seen.insert(s.clone()) {
            row.note = Some("cycle".into());
            break;
        }
        let vs = bound.values(&s);
        let accept = |_: &State, t: &State| policy.accepts(&kinds, &vs, &bound.values(t));
        match iw_search(task, &s, k_max, accept, budget) {
            Ok(Some((t, w))) => {
                widths.push(w);
                s = t;
            }
            Ok(None) => break,
            Err(e) => {
                row.note = Some(e.to_string());
                break;
            }
        }
    }
    row.solved = task.is_goal(&s);
    row.max = widths.iter().copied().max().unwrap_or(0);
    if !widths.is_empty() {
        row.avg = widths.iter().sum::<usize>() as f64 / widths.len() as f64;
    }
    Ok(row)
}

pub fn cmd_width(args: &WidthArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let policy = load_policy(&args.policy)?;
    let tasks = load_tasks(&args.domain, &args.problems)?;
    let budget = args.budget.budget();
    let rows: Vec<Result<WidthRow, PolicyError>> = tasks
        .par_iter()
        .map(|t| effective_width(&policy, t, args.k_max, budget))
        .collect();
    let rows: Vec<WidthRow> = rows.into_iter().collect::<Result<_, _>>().map_err(|e| usage(e.to_string()))?;
    let mut text = String::new();
    for r in &rows {
        text.push_str(&format!(
            "{}\t{}\t{}\t{:.2}{}\n",
            r.name,
            if r.solved { "solved" } else { "unsolved" },
            r.max,
            r.avg,
            r.note.as_ref().map(|n| format!("\t{n}")).unwrap_or_default()
        ));
    }
    let solved: Vec<&WidthRow> = rows.iter().filter(|r| r.solved).collect();
    let max = solved.iter().map(|r| r.max as f64).fold(0.0, f64::max);
    let avg = solved.iter().map(|r| r.avg).fold(0.0, f64::max);
    text.push_str(&format!(
        "coverage: {:.1}%  max width: {:.2}  avg width: {:.2}\n",
        percent(solved.len(), rows.len()),
        max,
        avg
    ));
    emit(out, args.out.as_deref(), &text)?;
    Ok(if solved.len() == rows.len() { EXIT_OK } else { EXIT_FAILURE })
}

/// Parses `args` and runs the command, writing results to `out`. Returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a, out),
        Command::Pool(a) => cmd_pool(a, out),
        Command::Learn(a) => cmd_learn(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Width(a) => cmd_width(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
