use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{ExperimentConfig, Task};
use super::run_theory_suite;
use crate::agent;
use crate::env::{self, Policy};
use crate::error::{Error, Result};
use crate::util::{self, seeded};

#[derive(Debug, Parser)]
#[command(name = "lvrep", version, about = "Latent variable representations for tabular reinforcement learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimistic online exploration; writes runlog_<seed>.{csv,json}, model_<seed>.json, policy_<seed>.json.
    RunOnline(Common),
    /// Pessimistic offline planning from behavior data; also writes diagnostics_<seed>.json.
    RunOffline(Common),
    /// Numerical checks of the supporting lemmas; writes report_<suite>.json.
    CheckTheory(Common),
    /// True value of saved policies; writes report_eval.json.
    Eval(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run with this seed only, overriding `seeds`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Theory suite: simulation, logdet, concentration, mle, gaussian, rff or all.
    #[arg(long, default_value = "all")]
    suite: String,
}

/// Parse `argv`, run the subcommand, and return the process exit code:
/// 0 on success, 1 on configuration or I/O errors, 2 on numeric failures
/// (including a failed theory check).
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    }
}

fn load(common: &Common, task: Task) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(t) = cfg.task {
        if t != task {
            return Err(Error::Config(format!("config task {t} does not match subcommand {task}")));
        }
    }
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        Error::Config(format!("output directory {} is not writable: {e}", cfg.output_dir.display()))
    })?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::RunOnline(c) => run_online(&load(&c, Task::RunOnline)?),
        Command::RunOffline(c) => run_offline(&load(&c, Task::RunOffline)?),
        Command::CheckTheory(c) => check_theory(&load(&c, Task::CheckTheory)?, &c.suite),
        Command::Eval(c) => eval(&load(&c, Task::Eval)?),
    }
}

/// Runs one closure per seed on its own thread and returns results in seed order.
fn per_seed<T, F>(seeds: &[u64], job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    std::thread::scope(|scope| {
        let job = &job;
        let handles: Vec<_> = seeds.iter().map(|&seed| scope.spawn(move || job(seed))).collect();
        handles.into_iter().map(|h| h.join().expect("seed worker panicked")).collect()
    })
}

fn run_online(cfg: &ExperimentConfig) -> Result<()> {
    let mdp = cfg.env.build()?;
    let runs = per_seed(&cfg.seeds, |seed| {
        let agent_cfg = agent::AgentConfig { seed, ..cfg.agent.clone() };
        agent::run_online(&mdp, &agent_cfg, &mut seeded(seed))
    })?;
    for (seed, run) in cfg.seeds.iter().zip(runs) {
        let dir = &cfg.output_dir;
        write(dir, &format!("runlog_{seed}.csv"), &run.log.to_csv())?;
        write(dir, &format!("runlog_{seed}.json"), &(run.log.to_json() + "\n"))?;
        if let Some(model) = &run.model {
            write(dir, &format!("model_{seed}.json"), &(model.to_json() + "\n"))?;
        }
        let policy = run.policies.last().expect("pi_0 is always present");
        write(dir, &format!("policy_{seed}.json"), &to_json(policy)?)?;
        if let Some(last) = run.log.last() {
            println!("seed {seed}: value {:.4} of {:.4}, regret {:.2}", last.value, last.v_star, last.regret);
        }
    }
    Ok(())
}

fn run_offline(cfg: &ExperimentConfig) -> Result<()> {
    let mdp = cfg.env.build()?;
    let behavior = cfg.offline.behavior_policy(&mdp)?;
    let runs = per_seed(&cfg.seeds, |seed| {
        let agent_cfg = agent::AgentConfig { seed, ..cfg.agent.clone() };
        agent::run_offline(&mdp, &behavior, cfg.offline.n_samples, &agent_cfg, &mut seeded(seed))
    })?;
    for (seed, run) in cfg.seeds.iter().zip(runs) {
        let dir = &cfg.output_dir;
        write(dir, &format!("runlog_{seed}.csv"), &run.log.to_csv())?;
        write(dir, &format!("runlog_{seed}.json"), &(run.log.to_json() + "\n"))?;
        write(dir, &format!("model_{seed}.json"), &(run.model.to_json() + "\n"))?;
        write(dir, &format!("policy_{seed}.json"), &to_json(&run.policy)?)?;
        write(dir, &format!("diagnostics_{seed}.json"), &to_json(&run.diagnostics)?)?;
        for w in &run.diagnostics.warnings {
            eprintln!("warning (seed {seed}): {w}");
        }
        println!(
            "seed {seed}: value {:.4} of {:.4}",
            run.diagnostics.value, run.diagnostics.v_star
        );
    }
    Ok(())
}

fn check_theory(cfg: &ExperimentConfig, suite: &str) -> Result<()> {
    let seed = cfg.seeds[0];
    let report = run_theory_suite(suite, &cfg.theory, seed)?;
    write(&cfg.output_dir, &format!("report_{suite}.json"), &to_json(&report)?)?;
    for check in &report.checks {
        println!("{:<20} {}", check.name, if check.passed { "pass" } else { "FAIL" });
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Error::Numeric(format!("theory checks failed: {}", failed.join(", "))))
    }
}

#[derive(Debug, Serialize)]
struct EvalEntry {
    seed: u64,
    policy: PathBuf,
    value: f64,
    v_star: f64,
    ratio: f64,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    config: ExperimentConfig,
    entries: Vec<EvalEntry>,
}

fn eval(cfg: &ExperimentConfig) -> Result<()> {
    let mdp = cfg.env.build()?;
    let oracle = env::exact_value_iteration(&mdp, None, 1e-10)?;
    let v_star = util::dot(mdp.init_dist(), &oracle.v);
    let mut entries = Vec::new();
    for &seed in &cfg.seeds {
        let path = cfg
            .eval_policy
            .clone()
            .unwrap_or_else(|| cfg.output_dir.join(format!("policy_{seed}.json")));
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Read {
            path: path.clone(),
            source,
        })?;
        let policy: Policy = serde_json::from_str(&text)?;
        if policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions() {
            return Err(Error::Config(format!("{} does not match the environment", path.display())));
        }
        let value = env::evaluate_policy(&mdp, &policy, None)?.expected(mdp.init_dist());
        println!("seed {seed}: value {value:.4} of {v_star:.4}");
        entries.push(EvalEntry {
            seed,
            policy: path,
            value,
            v_star,
            ratio: value / v_star,
        });
    }
    let report = EvalReport {
        config: cfg.clone(),
        entries,
    };
    write(&cfg.output_dir, "report_eval.json", &to_json(&report)?)
}
