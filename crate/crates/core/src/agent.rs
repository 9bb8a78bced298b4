//! Online exploration and offline exploitation loops built from the pieces in
//! the other modules, plus run logging.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{self, Policy, TabularMdp};
use crate::error::{Error, Result};
use crate::explore::{self, AlphaConstants, BonusMode, BonusParams, CovarianceState};
use crate::features::{lvrep_feature, FeatureVector};
use crate::latent_model::{self, FitConfig, LatentFactorModel, TransitionDataset};
use crate::planner::{self, AugmentedReward};
use crate::util::{self, fork};

/// Tolerance for the oracle value iteration used in logging.
const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionTuple {
    pub s: usize,
    pub a: usize,
    pub s_next: usize,
    pub a_next: usize,
    pub s_tilde: usize,
}

/// `s ~ d^pi`, `a ~ U(A)`, `s' ~ T(.|s,a)`, `a' ~ U(A)`, `s~ ~ T(.|s',a')`.
pub fn collect_tuple<R: Rng + ?Sized>(mdp: &TabularMdp, policy: &Policy, rng: &mut R) -> TransitionTuple {
    let s = env::sample_occupancy_state(mdp, policy, rng);
    let a = rng.random_range(0..mdp.n_actions());
    let s_next = mdp.sample_next(s, a, rng);
    let a_next = rng.random_range(0..mdp.n_actions());
    let s_tilde = mdp.sample_next(s_next, a_next, rng);
    TransitionTuple {
        s,
        a,
        s_next,
        a_next,
        s_tilde,
    }
}

/// How the bonus width is scheduled. `scale` multiplies the theoretical
/// confidence width; setting it to zero disables the bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonusConfig {
    pub mode: BonusMode,
    pub lambda: f64,
    pub clip: f64,
    pub scale: f64,
    pub c_norm: f64,
    pub delta: f64,
    pub model_class_log: f64,
}

impl Default for BonusConfig {
    fn default() -> Self {
        let consts = AlphaConstants::default();
        BonusConfig {
            mode: BonusMode::NormClipped,
            lambda: 1.0,
            clip: 2.0,
            scale: consts.c,
            c_norm: consts.c_norm,
            delta: 0.1,
            model_class_log: 0.0,
        }
    }
}

impl BonusConfig {
    pub fn params_at(&self, n: usize, gamma: f64, n_actions: usize) -> Result<BonusParams> {
        let consts = AlphaConstants {
            c: self.scale,
            c_norm: self.c_norm,
        };
        let alpha = explore::alpha_schedule(n.max(1), gamma, n_actions, self.lambda, self.model_class_log, self.delta, &consts)?;
        Ok(BonusParams {
            alpha,
            lambda: self.lambda,
            mode: self.mode,
            clip: self.clip,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !(self.clip > 0.0) || !(self.delta > 0.0) {
            return Err(Error::param("bonus lambda, clip and delta must be positive"));
        }
        if !(self.scale >= 0.0) || !(self.c_norm >= 0.0) {
            return Err(Error::param("bonus scale and c_norm must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub n_episodes: usize,
    pub n_latent: usize,
    pub fit: FitConfig,
    pub bonus: BonusConfig,
    pub refit_every: usize,
    pub tuples_per_episode: usize,
    pub plan_tol: f64,
    pub seed: u64,
    /// Also feed the second-stage pairs `(s', a')` into the bonus covariance.
    pub covariance_on_union: bool,
    /// Seed each refit with the previous model alongside the random restarts.
    pub warm_start: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            n_episodes: 100,
            n_latent: 4,
            fit: FitConfig {
                max_iters: 200,
                tol: 1e-8,
                restarts: 1,
                ..FitConfig::default()
            },
            bonus: BonusConfig::default(),
            refit_every: 1,
            tuples_per_episode: 1,
            plan_tol: 1e-8,
            seed: 0,
            covariance_on_union: false,
            warm_start: true,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_latent == 0 || self.refit_every == 0 || self.tuples_per_episode == 0 {
            return Err(Error::param("n_latent, refit_every and tuples_per_episode must be positive"));
        }
        if !(self.plan_tol > 0.0) {
            return Err(Error::param("plan_tol must be positive"));
        }
        self.fit.validate()?;
        self.bonus.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// True value of the policy produced at this episode.
    pub value: f64,
    pub v_star: f64,
    /// Cumulative `V* - V^{pi_k}` over episodes `k <= episode`.
    pub regret: f64,
    /// Squared-L1 model error weighted by the empirical state distribution
    /// of the data times a uniform action.
    pub tv_error: f64,
    pub mean_bonus: f64,
    pub max_bonus: f64,
    pub wall_ms: f64,
}

pub const CSV_HEADER: &str = "episode,value,v_star,regret,tv_error,mean_bonus,max_bonus,wall_ms";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<EpisodeRecord>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RunLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.episode, r.value, r.v_star, r.regret, r.tv_error, r.mean_bonus, r.max_bonus, r.wall_ms
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run log serializes")
    }

    pub fn last(&self) -> Option<&EpisodeRecord> {
        self.records.last()
    }

    pub fn regret_at(&self, episode: usize) -> Option<f64> {
        self.records.iter().find(|r| r.episode == episode).map(|r| r.regret)
    }
}

#[derive(Debug, Clone)]
pub struct OnlineRun {
    /// `pi_0, pi_1, ..., pi_N`.
    pub policies: Vec<Policy>,
    pub log: RunLog,
    pub model: Option<LatentFactorModel>,
}

/// Bonus at every `(s, a)` under the current model's features, with the
/// covariance built from the observed pair counts.
fn bonus_table(
    model: &LatentFactorModel,
    pair_counts: &[usize],
    params: &BonusParams,
) -> Result<Vec<f64>> {
    let na = model.n_actions();
    let feats: Vec<FeatureVector> = (0..model.n_states() * na)
        .map(|sa| lvrep_feature(model, sa / na, sa % na))
        .collect::<Result<_>>()?;
    if params.alpha == 0.0 {
        return Ok(vec![0.0; feats.len()]);
    }
    let cov = CovarianceState::rebuild_weighted(
        feats.iter().zip(pair_counts).filter(|(_, &c)| c > 0).map(|(f, &c)| (f, c as f64)),
        model.n_latent(),
        params.lambda,
    )?;
    feats.iter().map(|f| explore::bonus(&cov, f, params)).collect()
}

fn empirical_weighting(data: &TransitionDataset, n_states: usize, n_actions: usize) -> Vec<f64> {
    let mut w = vec![0.0; n_states * n_actions];
    let n = data.len() as f64;
    for &(s, _, _) in data.triples() {
        for a in 0..n_actions {
            w[s * n_actions + a] += 1.0 / (n * n_actions as f64);
        }
    }
    w
}

fn bonus_stats(bonus: &[f64], data: &TransitionDataset, n_actions: usize) -> (f64, f64) {
    if data.is_empty() {
        return (0.0, 0.0);
    }
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for &(s, a, _) in data.triples() {
        let b = bonus[s * n_actions + a];
        sum += b;
        max = max.max(b);
    }
    (sum / data.len() as f64, max)
}

/// Online exploration: collect under the previous policy, refit the latent
/// model on all data, rebuild the bonus covariance under the new features,
/// and plan optimistically on the learned model.
pub fn run_online<R: Rng + ?Sized>(mdp: &TabularMdp, cfg: &AgentConfig, rng: &mut R) -> Result<OnlineRun> {
    cfg.validate()?;
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut collect_rng = fork(rng);
    let mut fit_rng = fork(rng);

    let oracle = env::exact_value_iteration(mdp, None, ORACLE_TOL)?;
    let v_star = util::dot(mdp.init_dist(), &oracle.v);

    let mut policy = Policy::uniform(ns, na);
    let mut policies = vec![policy.clone()];
    let mut log = RunLog::default();
    let mut first = TransitionDataset::new(ns, na);
    let mut second = TransitionDataset::new(ns, na);
    let mut model: Option<LatentFactorModel> = None;
    let mut regret = 0.0;

    for episode in 1..=cfg.n_episodes {
        let started = Instant::now();
        for _ in 0..cfg.tuples_per_episode {
            let t = collect_tuple(mdp, &policy, &mut collect_rng);
            first.push(t.s, t.a, t.s_next)?;
            second.push(t.s_next, t.a_next, t.s_tilde)?;
        }
        let run_episode = |model: &mut Option<LatentFactorModel>, fit_rng: &mut util::SimRng| -> Result<(Policy, Vec<f64>)> {
            if model.is_none() || episode % cfg.refit_every == 0 {
                let all = first.union(&second)?;
                let warm = if cfg.warm_start { model.as_ref() } else { None };
                *model = Some(latent_model::fit_from(&all, cfg.n_latent, &cfg.fit, warm, fit_rng)?.model);
            }
            let m = model.as_ref().expect("fitted above");
            let counts = if cfg.covariance_on_union {
                first.union(&second)?.pair_counts()
            } else {
                first.pair_counts()
            };
            let params = cfg.bonus.params_at(episode, mdp.gamma(), na)?;
            let bonus = bonus_table(m, &counts, &params)?;
            let aug = AugmentedReward::optimistic(mdp.reward().to_vec(), &bonus)?;
            let plan = planner::plan_on_model(m, &aug, mdp.gamma(), cfg.plan_tol)?;
            Ok((plan.policy, bonus))
        };
        let (next_policy, bonus) = run_episode(&mut model, &mut fit_rng).map_err(|e| e.in_episode(episode))?;
        policy = next_policy;
        let m = model.as_ref().expect("fitted");
        let value = env::evaluate_policy(mdp, &policy, None)
            .map_err(|e| e.in_episode(episode))?
            .expected(mdp.init_dist());
        regret += v_star - value;
        let weighting = empirical_weighting(&first, ns, na);
        let tv = latent_model::tv_error(m, mdp, &weighting).map_err(|e| e.in_episode(episode))?;
        let (mean_bonus, max_bonus) = bonus_stats(&bonus, &first, na);
        log.records.push(EpisodeRecord {
            episode,
            value,
            v_star,
            regret,
            tv_error: tv,
            mean_bonus,
            max_bonus,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        policies.push(policy.clone());
    }
    Ok(OnlineRun { policies, log, model })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineDiagnostics {
    pub n_samples: usize,
    pub alpha: f64,
    /// Penalized value of the returned policy on the learned model.
    pub estimated_value: f64,
    pub value: f64,
    pub v_star: f64,
    /// `C*` of the returned policy in the learned feature space; infinite when
    /// the behavior data does not cover it.
    pub concentrability: f64,
    /// `max_{s,a} 1 / pi_b(a|s)`.
    pub omega: f64,
    pub mean_penalty: f64,
    pub max_penalty: f64,
    pub tv_error: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct OfflineRun {
    pub policy: Policy,
    pub model: LatentFactorModel,
    pub log: RunLog,
    pub diagnostics: OfflineDiagnostics,
}

/// Draw `(s, a, s')` with `s ~ d^{pi_b}`, `a ~ pi_b(.|s)`, `s' ~ T(.|s,a)`.
pub fn collect_offline<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    behavior: &Policy,
    n_samples: usize,
    rng: &mut R,
) -> Result<TransitionDataset> {
    let mut data = TransitionDataset::new(mdp.n_states(), mdp.n_actions());
    for _ in 0..n_samples {
        let s = env::sample_occupancy_state(mdp, behavior, rng);
        let a = behavior.sample(s, rng);
        let s2 = mdp.sample_next(s, a, rng);
        data.push(s, a, s2)?;
    }
    Ok(data)
}

/// Offline exploitation: fit once on behavior data and plan with the reward
/// reduced by the elliptical penalty.
pub fn run_offline<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    behavior: &Policy,
    n_samples: usize,
    cfg: &AgentConfig,
    rng: &mut R,
) -> Result<OfflineRun> {
    cfg.validate()?;
    if n_samples == 0 {
        return Err(Error::EmptyDataset);
    }
    if behavior.n_states() != mdp.n_states() || behavior.n_actions() != mdp.n_actions() {
        return Err(Error::param("behavior policy does not match the MDP"));
    }
    let started = Instant::now();
    let na = mdp.n_actions();
    let mut collect_rng = fork(rng);
    let mut fit_rng = fork(rng);
    let mut warnings = Vec::new();

    let data = collect_offline(mdp, behavior, n_samples, &mut collect_rng)?;
    let model = latent_model::fit(&data, cfg.n_latent, &cfg.fit, &mut fit_rng)?;
    let params = cfg.bonus.params_at(n_samples, mdp.gamma(), na)?;
    let penalty = bonus_table(&model, &data.pair_counts(), &params)?;
    let aug = AugmentedReward::pessimistic(mdp.reward().to_vec(), &penalty)?;
    let plan = planner::plan_on_model(&model, &aug, mdp.gamma(), cfg.plan_tol)?;
    let estimated_value = planner::evaluate_on_model(&model, &aug, mdp.gamma(), &plan.policy)?.expected(mdp.init_dist());

    let oracle = env::exact_value_iteration(mdp, None, ORACLE_TOL)?;
    let v_star = util::dot(mdp.init_dist(), &oracle.v);
    let value = env::evaluate_policy(mdp, &plan.policy, None)?.expected(mdp.init_dist());

    let omega = behavior.probs().iter().map(|&p| 1.0 / p).fold(0.0, f64::max);
    if omega.is_infinite() {
        warnings.push("behavior policy assigns zero probability to some actions: omega is infinite".to_string());
    }
    let behavior_occ = env::occupancy_measure(mdp, behavior)?;
    let concentrability = match env::concentrability(mdp, &plan.policy, &behavior_occ, |s, a| model.phi_row(s, a).to_vec()) {
        Ok(c) => c,
        Err(Error::SingularCoverage { target_mass, .. }) => {
            warnings.push(format!(
                "behavior data does not cover the returned policy (uncovered mass {target_mass:.3e}): concentrability is infinite"
            ));
            f64::INFINITY
        }
        Err(e) => return Err(e),
    };
    let tv = latent_model::tv_error(&model, mdp, &normalized(behavior_occ.dist.clone()))?;
    let (mean_penalty, max_penalty) = bonus_stats(&penalty, &data, na);

    let record = EpisodeRecord {
        episode: 1,
        value,
        v_star,
        regret: v_star - value,
        tv_error: tv,
        mean_bonus: mean_penalty,
        max_bonus: max_penalty,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let diagnostics = OfflineDiagnostics {
        n_samples,
        alpha: params.alpha,
        estimated_value,
        value,
        v_star,
        concentrability,
        omega,
        mean_penalty,
        max_penalty,
        tv_error: tv,
        warnings: warnings.clone(),
    };
    Ok(OfflineRun {
        policy: plan.policy,
        model,
        log: RunLog {
            records: vec![record],
            warnings,
        },
        diagnostics,
    })
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// `weight * pi* + (1 - weight) * uniform`.
pub fn optimal_mixture_behavior(mdp: &TabularMdp, weight: f64) -> Result<Policy> {
    let opt = env::exact_value_iteration(mdp, None, ORACLE_TOL)?.greedy;
    opt.mix(&Policy::uniform(mdp.n_states(), mdp.n_actions()), weight)
}

/// Chain behavior that only ever sees the first `covered` states: uniform
/// below state `covered - 1`, LEFT from there on.
pub fn prefix_coverage_behavior(n_states: usize, covered: usize) -> Result<Policy> {
    if covered < 2 || covered > n_states {
        return Err(Error::param("covered must lie in [2, n_states]"));
    }
    let mut probs = Vec::with_capacity(n_states * 2);
    for s in 0..n_states {
        if s + 1 < covered {
            probs.extend([0.5, 0.5]);
        } else {
            probs.extend([1.0, 0.0]);
        }
    }
    Policy::new(n_states, 2, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::build_chain_mdp;
    use crate::util::seeded;

    fn small_cfg(n_episodes: usize) -> AgentConfig {
        AgentConfig {
            n_episodes,
            n_latent: 3,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn collected_tuples_follow_occupancy_and_uniform_actions() {
        let mdp = build_chain_mdp(5, 0.2, 0.9).unwrap();
        let policy = Policy::uniform(5, 2);
        let occ = env::occupancy_measure(&mdp, &policy).unwrap().state_marginal();
        let n = 40_000;
        let mut rng = seeded(3);
        let mut s_counts = [0.0; 5];
        let mut a_counts = [0.0; 2];
        let mut a_next_counts = [0.0; 2];
        for _ in 0..n {
            let t = collect_tuple(&mdp, &policy, &mut rng);
            s_counts[t.s] += 1.0 / n as f64;
            a_counts[t.a] += 1.0 / n as f64;
            a_next_counts[t.a_next] += 1.0 / n as f64;
            assert!(mdp.row(t.s, t.a)[t.s_next] > 0.0);
            assert!(mdp.row(t.s_next, t.a_next)[t.s_tilde] > 0.0);
        }
        for (emp, exact) in s_counts.iter().zip(&occ) {
            assert!((emp - exact).abs() < 0.01, "{emp} vs {exact}");
        }
        for c in a_counts.iter().chain(&a_next_counts) {
            assert!((c - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn zero_episodes_returns_initial_policy() {
        let mdp = build_chain_mdp(5, 0.1, 0.9).unwrap();
        let run = run_online(&mdp, &small_cfg(0), &mut seeded(0)).unwrap();
        assert_eq!(run.policies, vec![Policy::uniform(5, 2)]);
        assert!(run.log.records.is_empty());
        assert!(run.model.is_none());
        assert_eq!(run.log.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn online_log_is_consistent() {
        let mdp = build_chain_mdp(6, 0.1, 0.9).unwrap();
        let run = run_online(&mdp, &small_cfg(12), &mut seeded(5)).unwrap();
        assert_eq!(run.policies.len(), 13);
        assert_eq!(run.log.records.len(), 12);
        let mut regret = 0.0;
        for (k, r) in run.log.records.iter().enumerate() {
            assert_eq!(r.episode, k + 1);
            let v = env::evaluate_policy(&mdp, &run.policies[k + 1], None).unwrap().expected(mdp.init_dist());
            assert!((r.value - v).abs() < 1e-12);
            regret += r.v_star - r.value;
            assert!((r.regret - regret).abs() < 1e-9);
            assert!(r.value <= r.v_star + 1e-8);
            assert!(r.max_bonus >= r.mean_bonus && r.mean_bonus >= 0.0);
        }
        assert_eq!(run.log.regret_at(12), Some(run.log.last().unwrap().regret));
        assert_eq!(run.log.regret_at(13), None);
    }

    #[test]
    fn online_runs_are_deterministic() {
        let mdp = build_chain_mdp(6, 0.1, 0.9).unwrap();
        let a = run_online(&mdp, &small_cfg(8), &mut seeded(9)).unwrap();
        let b = run_online(&mdp, &small_cfg(8), &mut seeded(9)).unwrap();
        assert_eq!(a.policies, b.policies);
        assert_eq!(a.model, b.model);
        let strip = |log: &RunLog| log.records.iter().map(|r| (r.value, r.regret, r.tv_error, r.mean_bonus)).collect::<Vec<_>>();
        assert_eq!(strip(&a.log), strip(&b.log));
    }

    #[test]
    fn warm_start_flag_changes_only_the_initialization() {
        let mdp = build_chain_mdp(6, 0.1, 0.9).unwrap();
        let cold = AgentConfig {
            warm_start: false,
            ..small_cfg(6)
        };
        let warm = run_online(&mdp, &small_cfg(6), &mut seeded(2)).unwrap();
        let cold = run_online(&mdp, &cold, &mut seeded(2)).unwrap();
        // Episode 1 has no previous model, so the two runs agree there.
        assert_eq!(warm.policies[1], cold.policies[1]);
        assert_eq!(warm.log.records[0].tv_error, cold.log.records[0].tv_error);
    }

    #[test]
    fn zero_scale_disables_the_bonus() {
        let mdp = build_chain_mdp(6, 0.1, 0.9).unwrap();
        let mut cfg = small_cfg(5);
        cfg.bonus.scale = 0.0;
        let run = run_online(&mdp, &cfg, &mut seeded(1)).unwrap();
        assert!(run.log.records.iter().all(|r| r.max_bonus == 0.0));
    }

    #[test]
    fn offline_rejects_bad_inputs() {
        let mdp = build_chain_mdp(5, 0.1, 0.9).unwrap();
        let behavior = Policy::uniform(5, 2);
        let cfg = small_cfg(1);
        assert!(matches!(
            run_offline(&mdp, &behavior, 0, &cfg, &mut seeded(0)),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            run_offline(&mdp, &Policy::uniform(4, 2), 10, &cfg, &mut seeded(0)),
            Err(Error::Param(_))
        ));
        let bad = AgentConfig { n_latent: 0, ..cfg };
        assert!(run_offline(&mdp, &behavior, 10, &bad, &mut seeded(0)).is_err());
    }

    #[test]
    fn offline_diagnostics_are_consistent() {
        let mdp = build_chain_mdp(5, 0.1, 0.9).unwrap();
        let behavior = Policy::uniform(5, 2);
        let run = run_offline(&mdp, &behavior, 500, &small_cfg(1), &mut seeded(4)).unwrap();
        let d = &run.diagnostics;
        assert_eq!(d.n_samples, 500);
        assert!((d.omega - 2.0).abs() < 1e-12);
        assert!(d.value <= d.v_star + 1e-8);
        let v = env::evaluate_policy(&mdp, &run.policy, None).unwrap().expected(mdp.init_dist());
        assert!((d.value - v).abs() < 1e-12);
        assert_eq!(run.log.records.len(), 1);
        assert!((run.log.records[0].regret - (d.v_star - d.value)).abs() < 1e-12);
    }

    #[test]
    fn behavior_constructors() {
        let p = prefix_coverage_behavior(6, 3).unwrap();
        assert_eq!(p.row(1), &[0.5, 0.5]);
        assert_eq!(p.row(2), &[1.0, 0.0]);
        assert!(prefix_coverage_behavior(6, 1).is_err());
        assert!(prefix_coverage_behavior(6, 7).is_err());

        let mdp = build_chain_mdp(5, 0.1, 0.9).unwrap();
        let mix = optimal_mixture_behavior(&mdp, 0.5).unwrap();
        // pi* goes RIGHT everywhere on this chain.
        for s in 0..5 {
            assert!((mix.prob(s, 1) - 0.75).abs() < 1e-12);
        }
    }
}
