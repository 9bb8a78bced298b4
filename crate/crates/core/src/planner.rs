//! Exact planning on a learned latent model with the reward shifted up by an
//! exploration bonus or down by a pessimism penalty.

use serde::{Deserialize, Serialize};

use crate::env::{self, Policy};
use crate::error::{Error, Result};
use crate::features::LinearQ;
use crate::latent_model::LatentFactorModel;
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjustmentSign {
    Optimistic,
    Pessimistic,
}

/// `base + adjustment`, where the adjustment is a bonus (>= 0) or a penalty (<= 0).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedReward {
    base: Vec<f64>,
    adjustment: Vec<f64>,
    sign: AdjustmentSign,
}

impl AugmentedReward {
    pub fn new(base: Vec<f64>, adjustment: Vec<f64>, sign: AdjustmentSign) -> Result<Self> {
        if base.len() != adjustment.len() {
            return Err(Error::param("reward and adjustment differ in size"));
        }
        let ok = match sign {
            AdjustmentSign::Optimistic => adjustment.iter().all(|&x| x >= 0.0),
            AdjustmentSign::Pessimistic => adjustment.iter().all(|&x| x <= 0.0),
        };
        if !ok {
            return Err(Error::param(format!("adjustment has the wrong sign for {sign:?}")));
        }
        Ok(AugmentedReward { base, adjustment, sign })
    }

    /// Bonus added to the base reward.
    pub fn optimistic(base: Vec<f64>, bonus: &[f64]) -> Result<Self> {
        AugmentedReward::new(base, bonus.to_vec(), AdjustmentSign::Optimistic)
    }

    /// Penalty (given as a nonnegative magnitude) subtracted from the base reward.
    pub fn pessimistic(base: Vec<f64>, penalty: &[f64]) -> Result<Self> {
        AugmentedReward::new(base, penalty.iter().map(|p| -p).collect(), AdjustmentSign::Pessimistic)
    }

    pub fn unadjusted(base: Vec<f64>) -> Self {
        let n = base.len();
        AugmentedReward {
            base,
            adjustment: vec![0.0; n],
            sign: AdjustmentSign::Optimistic,
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn adjustment(&self) -> &[f64] {
        &self.adjustment
    }

    pub fn sign(&self) -> AdjustmentSign {
        self.sign
    }

    pub fn total(&self) -> Vec<f64> {
        self.base.iter().zip(&self.adjustment).map(|(r, b)| r + b).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    /// Flattened `(s, a)`.
    pub q: Vec<f64>,
    pub policy: Policy,
}

/// Value iteration on the composed model transition with reward `base + adjustment`.
pub fn plan_on_model(model: &LatentFactorModel, aug: &AugmentedReward, gamma: f64, tol: f64) -> Result<Plan> {
    let (ns, na) = (model.n_states(), model.n_actions());
    check_shapes(model, aug, gamma)?;
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let transition = model.compose_transition();
    let sol = env::solve_optimal_q(ns, na, &transition, &aug.total(), gamma, tol)?;
    Ok(Plan {
        q: sol.q,
        policy: sol.greedy,
    })
}

/// Exact `Q^pi` of a fixed policy on the model under the augmented reward.
pub fn evaluate_on_model(
    model: &LatentFactorModel,
    aug: &AugmentedReward,
    gamma: f64,
    policy: &Policy,
) -> Result<env::PolicyValue> {
    check_shapes(model, aug, gamma)?;
    env::evaluate_policy_raw(
        model.n_states(),
        model.n_actions(),
        &model.compose_transition(),
        &aug.total(),
        gamma,
        policy,
    )
}

fn check_shapes(model: &LatentFactorModel, aug: &AugmentedReward, gamma: f64) -> Result<()> {
    if aug.base.len() != model.n_states() * model.n_actions() {
        return Err(Error::param("reward does not match the model's state-action space"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::param("gamma must lie in [0, 1)"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LinearPlan {
    pub q_latent: LinearQ,
    pub q: Vec<f64>,
    pub policy: Policy,
    pub iterations: usize,
    /// Sup-norm change in Q over the last iteration.
    pub last_change: f64,
    pub converged: bool,
}

/// Fitted value iteration inside the linear-in-`p(z|s,a)` class:
/// `w(z) = sum_{s'} p(s'|z) max_a Q(s',a)` and
/// `Q(s,a) = r(s,a) + adj(s,a) + gamma <p(.|s,a), w>`, starting from `Q = 0`.
/// Stops early once an iteration changes Q by less than 1e-13.
pub fn linear_q_planner(model: &LatentFactorModel, aug: &AugmentedReward, gamma: f64, iters: usize) -> Result<LinearPlan> {
    check_shapes(model, aug, gamma)?;
    if iters == 0 {
        return Err(Error::param("need at least one iteration"));
    }
    let (ns, na, nz) = (model.n_states(), model.n_actions(), model.n_latent());
    let reward = aug.total();
    let mut q = vec![0.0; ns * na];
    let mut w = vec![0.0; nz];
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < iters {
        iterations += 1;
        let v: Vec<f64> = q.chunks(na).map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).collect();
        for (z, wz) in w.iter_mut().enumerate() {
            *wz = util::dot(model.mu_row(z), &v);
        }
        last_change = 0.0;
        for (sa, qsa) in q.iter_mut().enumerate() {
            let phi = &model.phi()[sa * nz..(sa + 1) * nz];
            let next = reward[sa] + gamma * util::dot(phi, &w);
            last_change = f64::max(last_change, (next - *qsa).abs());
            *qsa = next;
        }
        if last_change < 1e-13 {
            break;
        }
    }
    let actions: Vec<usize> = q.chunks(na).map(util::argmax_lowest).collect();
    Ok(LinearPlan {
        q_latent: LinearQ::new(1.0, w)?,
        policy: Policy::deterministic(na, &actions)?,
        q,
        iterations,
        last_change,
        converged: last_change < 1e-13,
    })
}
