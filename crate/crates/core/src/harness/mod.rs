//! Command-line entry point, experiment configuration, and the numerical
//! checks behind the method's supporting lemmas.

pub mod cli;
pub mod config;
pub mod theory;

use serde::Serialize;
use serde_json::Value;

use crate::env::BlockMdpSpec;
use crate::error::{Error, Result};
use crate::latent_model::FitConfig;
use crate::util::seeded;
use config::TheoryConfig;
use theory::SyntheticSpectrum;

pub const SUITES: &[&str] = &["simulation", "logdet", "concentration", "mle", "gaussian", "rff"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub report: Value,
}

/// Everything needed to recompute the verdicts of one `check-theory` run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub config: TheoryConfig,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

fn outcome<T: Serialize>(name: &str, passed: bool, report: &T) -> Result<CheckOutcome> {
    Ok(CheckOutcome {
        name: name.to_string(),
        passed,
        report: serde_json::to_value(report)?,
    })
}

fn run_one(name: &str, cfg: &TheoryConfig, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = seeded(seed);
    Ok(match name {
        "simulation" => {
            let r = theory::check_simulation_lemma(cfg.sim_trials, &mut rng)?;
            vec![outcome("simulation", r.passed, &r)?]
        }
        "logdet" => {
            let spectra = [
                ("logdet_finite", SyntheticSpectrum::finite(cfg.finite_beta)),
                ("logdet_polynomial", SyntheticSpectrum::polynomial(cfg.poly_beta, cfg.poly_dim)),
                ("logdet_exponential", SyntheticSpectrum::exponential(cfg.exp_beta, cfg.exp_dim)),
            ];
            spectra
                .iter()
                .map(|(label, spec)| {
                    let r = theory::check_logdet_suite(spec, &cfg.logdet_alphas, cfg.logdet_dirs, &mut rng)?;
                    outcome(label, r.passed, &r)
                })
                .collect::<Result<_>>()?
        }
        "concentration" => {
            let r = theory::check_bonus_concentration(cfg.conc_dim, cfg.conc_n, cfg.conc_lambda, cfg.conc_dirs, &mut rng)?;
            vec![outcome("concentration", r.passed, &r)?]
        }
        "mle" => {
            let block = BlockMdpSpec::new(cfg.mle_states, cfg.mle_actions, cfg.mle_latent, 1.0, seed);
            let fit = FitConfig {
                restarts: cfg.mle_restarts,
                ..FitConfig::default()
            };
            let r = theory::check_mle_rate(&block, &cfg.mle_sizes, cfg.mle_seeds, &fit, &mut rng)?;
            vec![outcome("mle", r.passed, &r)?]
        }
        "gaussian" => {
            let r = theory::check_gaussian_factorization(
                cfg.gaussian_grid,
                cfg.gaussian_sigma,
                cfg.gaussian_slope,
                cfg.gaussian_precision,
            )?;
            vec![outcome("gaussian", r.passed, &r)?]
        }
        "rff" => {
            let seeds: Vec<u64> = (0..cfg.rff_seeds as u64).map(|k| seed.wrapping_add(k)).collect();
            let r = theory::check_rff_fidelity(cfg.rff_bandwidth, cfg.rff_embed_dim, cfg.rff_points, &cfg.rff_counts, &seeds)?;
            vec![outcome("rff", r.passed, &r)?]
        }
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; expected one of {SUITES:?} or \"all\""
            )))
        }
    })
}

/// Run one named suite (or `all`) with the given seed.
pub fn run_theory_suite(suite: &str, cfg: &TheoryConfig, seed: u64) -> Result<SuiteReport> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for name in names {
        checks.extend(run_one(name, cfg, seed)?);
    }
    Ok(SuiteReport {
        suite: suite.to_string(),
        seed,
        config: cfg.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
