//! Flat `key = value` experiment configuration.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored;
//! list values are comma separated. Unknown keys are rejected. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `task` | `run_online`, `run_offline`, `check_theory` or `eval` | subcommand |
//! | `seeds` | comma-separated list of seeds | `1` |
//! | `output_dir` | where outputs go | `out` |
//! | `env` | `chain`, `block` or `file` | `chain` |
//! | `env.n_states` | states (chain, block) | `10` |
//! | `env.n_actions` | actions (block) | `2` |
//! | `env.n_latent` | latent size (block) | `3` |
//! | `env.slip` | chance that RIGHT slips left (chain) | `0.1` |
//! | `env.gamma` | discount (chain, block) | `0.95` |
//! | `env.concentration` | Dirichlet concentration (block) | `1` |
//! | `env.seed` | generator seed (block) | `0` |
//! | `env.path` | serialized MDP (file) | none |
//! | `agent.n_episodes`, `agent.n_latent`, `agent.refit_every`, `agent.tuples_per_episode`, `agent.plan_tol`, `agent.covariance_on_union`, `agent.warm_start` | online/offline agent | see [`AgentConfig`] |
//! | `fit.max_iters`, `fit.tol`, `fit.restarts`, `fit.init_concentration`, `fit.mode` (`em`/`gradient`), `fit.learning_rate` | model fitting | see [`AgentConfig`] |
//! | `bonus.mode` (`norm_clipped`/`quadratic`), `bonus.lambda`, `bonus.clip`, `bonus.scale`, `bonus.c_norm`, `bonus.delta`, `bonus.model_class_log` | bonus schedule | see [`BonusConfig`](crate::agent::BonusConfig) |
//! | `offline.behavior` | `uniform`, `optimal_mixture` or `prefix` | `uniform` |
//! | `offline.weight` | weight on the optimal policy (`optimal_mixture`) | `0.5` |
//! | `offline.covered` | covered chain prefix (`prefix`) | `5` |
//! | `offline.n_samples` | dataset size | `2000` |
//! | `eval.policy` | policy JSON to evaluate | `<output_dir>/policy_<seed>.json` |
//! | `theory.*` | theory-check parameters | see [`TheoryConfig`] |

use std::fmt::{self, Display};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{self, AgentConfig};
use crate::env::{self, BlockMdpSpec, Policy, TabularMdp};
use crate::error::{Error, Result};
use crate::explore::BonusMode;
use crate::latent_model::FitMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    RunOnline,
    RunOffline,
    CheckTheory,
    Eval,
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "run_online" => Ok(Task::RunOnline),
            "run_offline" => Ok(Task::RunOffline),
            "check_theory" => Ok(Task::CheckTheory),
            "eval" => Ok(Task::Eval),
            _ => Err(Error::Config(format!("unknown task {s:?}"))),
        }
    }
}

impl Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::RunOnline => "run_online",
            Task::RunOffline => "run_offline",
            Task::CheckTheory => "check_theory",
            Task::Eval => "eval",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Chain,
    Block,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub n_states: usize,
    pub n_actions: usize,
    pub n_latent: usize,
    pub slip: f64,
    pub gamma: f64,
    pub concentration: f64,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            kind: EnvKind::Chain,
            n_states: 10,
            n_actions: 2,
            n_latent: 3,
            slip: 0.1,
            gamma: 0.95,
            concentration: 1.0,
            seed: 0,
            path: None,
        }
    }
}

impl EnvConfig {
    pub fn build(&self) -> Result<TabularMdp> {
        let as_config = |e: Error| match e {
            Error::Param(msg) => Error::Config(format!("env: {msg}")),
            other => other,
        };
        match self.kind {
            EnvKind::Chain => env::build_chain_mdp(self.n_states, self.slip, self.gamma).map_err(as_config),
            EnvKind::Block => {
                let spec = BlockMdpSpec {
                    gamma: self.gamma,
                    ..BlockMdpSpec::new(self.n_states, self.n_actions, self.n_latent, self.concentration, self.seed)
                };
                env::build_random_block_mdp(&spec).map(|(mdp, _)| mdp).map_err(as_config)
            }
            EnvKind::File => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("env = file needs env.path".into()))?;
                let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
                    path: path.clone(),
                    source,
                })?;
                TabularMdp::from_json(&text).map_err(as_config)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorKind {
    Uniform,
    OptimalMixture,
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub behavior: BehaviorKind,
    pub weight: f64,
    pub covered: usize,
    pub n_samples: usize,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        OfflineConfig {
            behavior: BehaviorKind::Uniform,
            weight: 0.5,
            covered: 5,
            n_samples: 2000,
        }
    }
}

impl OfflineConfig {
    pub fn behavior_policy(&self, mdp: &TabularMdp) -> Result<Policy> {
        match self.behavior {
            BehaviorKind::Uniform => Ok(Policy::uniform(mdp.n_states(), mdp.n_actions())),
            BehaviorKind::OptimalMixture => agent::optimal_mixture_behavior(mdp, self.weight),
            BehaviorKind::Prefix => {
                if mdp.n_actions() != 2 {
                    return Err(Error::Config("prefix behavior needs a two-action chain".into()));
                }
                agent::prefix_coverage_behavior(mdp.n_states(), self.covered)
            }
        }
    }
}

/// Parameters of the theory checks; the defaults are the acceptance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub sim_trials: usize,
    pub logdet_alphas: Vec<f64>,
    pub logdet_dirs: usize,
    pub finite_beta: usize,
    pub poly_beta: f64,
    pub poly_dim: usize,
    pub exp_beta: f64,
    pub exp_dim: usize,
    pub conc_dim: usize,
    pub conc_n: usize,
    pub conc_lambda: f64,
    pub conc_dirs: usize,
    pub mle_states: usize,
    pub mle_actions: usize,
    pub mle_latent: usize,
    pub mle_sizes: Vec<usize>,
    pub mle_seeds: usize,
    pub mle_restarts: usize,
    pub gaussian_grid: usize,
    pub gaussian_sigma: f64,
    pub gaussian_slope: f64,
    pub gaussian_precision: f64,
    pub rff_bandwidth: f64,
    pub rff_embed_dim: usize,
    pub rff_points: usize,
    pub rff_counts: Vec<usize>,
    /// Seeds used are `seed, seed + 1, ...`.
    pub rff_seeds: usize,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            sim_trials: 100,
            logdet_alphas: vec![1e2, 1e3, 1e4],
            logdet_dirs: 200,
            finite_beta: 5,
            poly_beta: 2.0,
            poly_dim: 200,
            exp_beta: 1.0,
            exp_dim: 40,
            conc_dim: 8,
            conc_n: 10_000,
            conc_lambda: 10.0,
            conc_dirs: 1000,
            mle_states: 20,
            mle_actions: 4,
            mle_latent: 3,
            mle_sizes: vec![500, 2000, 8000],
            mle_seeds: 5,
            mle_restarts: 3,
            gaussian_grid: 256,
            gaussian_sigma: 0.1,
            gaussian_slope: 1.0,
            gaussian_precision: 1.0,
            rff_bandwidth: 1.0,
            rff_embed_dim: 3,
            rff_points: 40,
            rff_counts: vec![256, 1024, 4096],
            rff_seeds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub offline: OfflineConfig,
    pub eval_policy: Option<PathBuf>,
    pub theory: TheoryConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: None,
            seeds: vec![1],
            output_dir: PathBuf::from("out"),
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            offline: OfflineConfig::default(),
            eval_policy: None,
            theory: TheoryConfig::default(),
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {raw:?}")))
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|item| value(key, item.trim())).collect()
}

fn boolean(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {raw:?}"))),
    }
}

fn keyword<T>(key: &str, raw: &str, options: &[(&str, T)]) -> Result<T>
where
    T: Copy,
{
    options.iter().find(|(name, _)| *name == raw).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        Error::Config(format!("{key}: expected one of {names:?}, got {raw:?}"))
    })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), raw.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let a = &mut self.agent;
        let t = &mut self.theory;
        match key {
            "task" => self.task = Some(raw.parse()?),
            "seeds" => self.seeds = list(key, raw)?,
            "output_dir" => self.output_dir = PathBuf::from(raw),

            "env" => {
                self.env.kind = keyword(
                    key,
                    raw,
                    &[("chain", EnvKind::Chain), ("block", EnvKind::Block), ("file", EnvKind::File)],
                )?
            }
            "env.n_states" => self.env.n_states = value(key, raw)?,
            "env.n_actions" => self.env.n_actions = value(key, raw)?,
            "env.n_latent" => self.env.n_latent = value(key, raw)?,
            "env.slip" => self.env.slip = value(key, raw)?,
            "env.gamma" => self.env.gamma = value(key, raw)?,
            "env.concentration" => self.env.concentration = value(key, raw)?,
            "env.seed" => self.env.seed = value(key, raw)?,
            "env.path" => self.env.path = Some(PathBuf::from(raw)),

            "agent.n_episodes" => a.n_episodes = value(key, raw)?,
            "agent.n_latent" => a.n_latent = value(key, raw)?,
            "agent.refit_every" => a.refit_every = value(key, raw)?,
            "agent.tuples_per_episode" => a.tuples_per_episode = value(key, raw)?,
            "agent.plan_tol" => a.plan_tol = value(key, raw)?,
            "agent.covariance_on_union" => a.covariance_on_union = boolean(key, raw)?,
            "agent.warm_start" => a.warm_start = boolean(key, raw)?,

            "fit.max_iters" => a.fit.max_iters = value(key, raw)?,
            "fit.tol" => a.fit.tol = value(key, raw)?,
            "fit.restarts" => a.fit.restarts = value(key, raw)?,
            "fit.init_concentration" => a.fit.init_concentration = value(key, raw)?,
            "fit.mode" => a.fit.mode = keyword(key, raw, &[("em", FitMode::Em), ("gradient", FitMode::Gradient)])?,
            "fit.learning_rate" => a.fit.learning_rate = value(key, raw)?,

            "bonus.mode" => {
                a.bonus.mode = keyword(
                    key,
                    raw,
                    &[("norm_clipped", BonusMode::NormClipped), ("quadratic", BonusMode::Quadratic)],
                )?
            }
            "bonus.lambda" => a.bonus.lambda = value(key, raw)?,
            "bonus.clip" => a.bonus.clip = value(key, raw)?,
            "bonus.scale" => a.bonus.scale = value(key, raw)?,
            "bonus.c_norm" => a.bonus.c_norm = value(key, raw)?,
            "bonus.delta" => a.bonus.delta = value(key, raw)?,
            "bonus.model_class_log" => a.bonus.model_class_log = value(key, raw)?,

            "offline.behavior" => {
                self.offline.behavior = keyword(
                    key,
                    raw,
                    &[
                        ("uniform", BehaviorKind::Uniform),
                        ("optimal_mixture", BehaviorKind::OptimalMixture),
                        ("prefix", BehaviorKind::Prefix),
                    ],
                )?
            }
            "offline.weight" => self.offline.weight = value(key, raw)?,
            "offline.covered" => self.offline.covered = value(key, raw)?,
            "offline.n_samples" => self.offline.n_samples = value(key, raw)?,

            "eval.policy" => self.eval_policy = Some(PathBuf::from(raw)),

            "theory.sim_trials" => t.sim_trials = value(key, raw)?,
            "theory.logdet_alphas" => t.logdet_alphas = list(key, raw)?,
            "theory.logdet_dirs" => t.logdet_dirs = value(key, raw)?,
            "theory.finite_beta" => t.finite_beta = value(key, raw)?,
            "theory.poly_beta" => t.poly_beta = value(key, raw)?,
            "theory.poly_dim" => t.poly_dim = value(key, raw)?,
            "theory.exp_beta" => t.exp_beta = value(key, raw)?,
            "theory.exp_dim" => t.exp_dim = value(key, raw)?,
            "theory.conc_dim" => t.conc_dim = value(key, raw)?,
            "theory.conc_n" => t.conc_n = value(key, raw)?,
            "theory.conc_lambda" => t.conc_lambda = value(key, raw)?,
            "theory.conc_dirs" => t.conc_dirs = value(key, raw)?,
            "theory.mle_states" => t.mle_states = value(key, raw)?,
            "theory.mle_actions" => t.mle_actions = value(key, raw)?,
            "theory.mle_latent" => t.mle_latent = value(key, raw)?,
            "theory.mle_sizes" => t.mle_sizes = list(key, raw)?,
            "theory.mle_seeds" => t.mle_seeds = value(key, raw)?,
            "theory.mle_restarts" => t.mle_restarts = value(key, raw)?,
            "theory.gaussian_grid" => t.gaussian_grid = value(key, raw)?,
            "theory.gaussian_sigma" => t.gaussian_sigma = value(key, raw)?,
            "theory.gaussian_slope" => t.gaussian_slope = value(key, raw)?,
            "theory.gaussian_precision" => t.gaussian_precision = value(key, raw)?,
            "theory.rff_bandwidth" => t.rff_bandwidth = value(key, raw)?,
            "theory.rff_embed_dim" => t.rff_embed_dim = value(key, raw)?,
            "theory.rff_points" => t.rff_points = value(key, raw)?,
            "theory.rff_counts" => t.rff_counts = list(key, raw)?,
            "theory.rff_seeds" => t.rff_seeds = value(key, raw)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        self.agent.validate().map_err(|e| Error::Config(strip_prefix(e)))
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) | Error::Param(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn parses_every_section() {
        let text = "
            # chain exploration
            task = run_online
            seeds = 1, 2,3
            output_dir = runs/a
            env = block
            env.n_states = 12
            env.n_actions = 3
            env.n_latent = 2
            env.gamma = 0.9   # trailing comment
            agent.n_episodes = 50
            agent.warm_start = false
            fit.mode = gradient
            fit.restarts = 4
            bonus.mode = quadratic
            bonus.scale = 0
            offline.behavior = prefix
            offline.covered = 4
            theory.mle_sizes = 100, 400
        ";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.task, Some(Task::RunOnline));
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.output_dir, PathBuf::from("runs/a"));
        assert_eq!(cfg.env.kind, EnvKind::Block);
        assert_eq!((cfg.env.n_states, cfg.env.n_actions, cfg.env.n_latent), (12, 3, 2));
        assert_eq!(cfg.agent.n_episodes, 50);
        assert!(!cfg.agent.warm_start);
        assert_eq!(cfg.agent.fit.mode, FitMode::Gradient);
        assert_eq!(cfg.agent.fit.restarts, 4);
        assert_eq!(cfg.agent.bonus.mode, BonusMode::Quadratic);
        assert_eq!(cfg.agent.bonus.scale, 0.0);
        assert_eq!(cfg.offline.behavior, BehaviorKind::Prefix);
        assert_eq!(cfg.theory.mle_sizes, vec![100, 400]);
        let mdp = cfg.env.build().unwrap();
        assert_eq!((mdp.n_states(), mdp.n_actions()), (12, 3));
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        let err = ExperimentConfig::parse("seeds = 1\nnonsense = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(ExperimentConfig::parse("no equals sign").is_err());
        assert!(ExperimentConfig::parse("env.slip = abc").is_err());
        assert!(ExperimentConfig::parse("env = torus").is_err());
        assert!(ExperimentConfig::parse("seeds = ").is_err());
        assert!(ExperimentConfig::parse("fit.restarts = 0").is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/exp.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/exp.cfg"));
    }

    #[test]
    fn file_env_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mdp.json");
        let mdp = env::build_chain_mdp(4, 0.2, 0.9).unwrap();
        std::fs::write(&path, mdp.to_json()).unwrap();
        let cfg = ExperimentConfig::parse(&format!("env = file\nenv.path = {}", path.display())).unwrap();
        assert_eq!(cfg.env.build().unwrap(), mdp);
        let missing = ExperimentConfig::parse("env = file").unwrap();
        assert!(matches!(missing.env.build(), Err(Error::Config(_))));
    }
}
