//! Ground-truth tabular MDPs and the exact oracles everything else is checked
//! against: value iteration, policy evaluation, discounted occupancy measures
//! and the concentrability coefficient.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent_model::LatentFactorModel;
use crate::util::{self, check_distribution, check_stochastic_rows, sample_categorical, STOCHASTIC_TOL};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Reward collected by taking LEFT in the leftmost chain state.
pub const CHAIN_SMALL_REWARD: f64 = 0.005;

/// Iteration cap for value iteration.
pub const MAX_VI_ITERS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpDoc", into = "MdpDoc")]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    /// Flattened `(s, a, s')`.
    transition: Vec<f64>,
    /// Flattened `(s, a)`.
    reward: Vec<f64>,
    gamma: f64,
    init_dist: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MdpDoc {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    init_dist: Vec<f64>,
    reward: Vec<Vec<f64>>,
    transition: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<MdpDoc> for TabularMdp {
    type Error = Error;

    fn try_from(doc: MdpDoc) -> Result<Self> {
        let (ns, na) = (doc.n_states, doc.n_actions);
        if doc.transition.len() != ns {
            return Err(Error::param(format!(
                "transition: expected {ns} states, got {}",
                doc.transition.len()
            )));
        }
        let mut transition = Vec::with_capacity(ns * na * ns);
        for (s, per_action) in doc.transition.iter().enumerate() {
            transition.extend(util::from_matrix(&format!("transition[{s}]"), per_action, na, ns)?);
        }
        let reward = util::from_matrix("reward", &doc.reward, ns, na)?;
        TabularMdp::new(ns, na, transition, reward, doc.gamma, doc.init_dist)
    }
}

impl From<TabularMdp> for MdpDoc {
    fn from(m: TabularMdp) -> Self {
        let (ns, na) = (m.n_states, m.n_actions);
        MdpDoc {
            n_states: ns,
            n_actions: na,
            gamma: m.gamma,
            reward: util::to_matrix(&m.reward, na),
            transition: m.transition.chunks(na * ns).map(|c| util::to_matrix(c, ns)).collect(),
            init_dist: m.init_dist,
        }
    }
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        gamma: f64,
        init_dist: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::param("MDP needs at least one state and one action"));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(Error::param("transition tensor has the wrong size"));
        }
        if reward.len() != n_states * n_actions || init_dist.len() != n_states {
            return Err(Error::param("reward or init_dist has the wrong size"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if let Some(r) = reward.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::param(format!("reward {r} outside [0, 1]")));
        }
        check_stochastic_rows("transition", &transition, n_states, STOCHASTIC_TOL)?;
        check_distribution("init_dist", &init_dist, STOCHASTIC_TOL)?;
        Ok(TabularMdp {
            n_states,
            n_actions,
            transition,
            reward,
            gamma,
            init_dist,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_pairs(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn init_dist(&self) -> &[f64] {
        &self.init_dist
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn reward_at(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    /// Next-state distribution `T(. | s, a)`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    /// Same dynamics and initial distribution, different reward.
    pub fn with_reward(&self, reward: Vec<f64>) -> Result<Self> {
        TabularMdp::new(
            self.n_states,
            self.n_actions,
            self.transition.clone(),
            reward,
            self.gamma,
            self.init_dist.clone(),
        )
    }

    pub fn sample_next<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> usize {
        sample_categorical(self.row(s, a), rng)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("MDP serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Policy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for Policy {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_actions = rows.first().map_or(0, Vec::len);
        let probs = util::from_matrix("policy", &rows, rows.len(), n_actions)?;
        Policy::new(rows.len(), n_actions, probs)
    }
}

impl From<Policy> for Vec<Vec<f64>> {
    fn from(p: Policy) -> Self {
        util::to_matrix(&p.probs, p.n_actions)
    }
}

impl Policy {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 || probs.len() != n_states * n_actions {
            return Err(Error::param("policy shape mismatch"));
        }
        check_stochastic_rows("policy", &probs, n_actions, STOCHASTIC_TOL)?;
        Ok(Policy {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::param(format!("action {a} out of range at state {s}")));
            }
            probs[s * n_actions + a] = 1.0;
        }
        Policy::new(actions.len(), n_actions, probs)
    }

    /// `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Policy, weight: f64) -> Result<Self> {
        if self.n_states != other.n_states || self.n_actions != other.n_actions {
            return Err(Error::param("cannot mix policies of different shapes"));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| weight * p + (1.0 - weight) * q)
            .collect();
        Policy::new(self.n_states, self.n_actions, probs)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    /// The action chosen at each state, if the policy is deterministic.
    pub fn greedy_actions(&self) -> Vec<usize> {
        (0..self.n_states).map(|s| util::argmax_lowest(self.row(s))).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        sample_categorical(self.row(s), rng)
    }

    fn check_against(&self, mdp: &TabularMdp) -> Result<()> {
        if self.n_states != mdp.n_states || self.n_actions != mdp.n_actions {
            return Err(Error::param("policy shape does not match the MDP"));
        }
        Ok(())
    }
}

/// Discounted state-action visitation, normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyMeasure {
    pub n_states: usize,
    pub n_actions: usize,
    pub dist: Vec<f64>,
}

impl OccupancyMeasure {
    pub fn at(&self, s: usize, a: usize) -> f64 {
        self.dist[s * self.n_actions + a]
    }

    pub fn state_marginal(&self) -> Vec<f64> {
        self.dist.chunks(self.n_actions).map(|r| r.iter().sum()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ValueSolution {
    /// Flattened `(s, a)`.
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub greedy: Policy,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct PolicyValue {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl PolicyValue {
    /// Expected value under the initial distribution.
    pub fn expected(&self, init_dist: &[f64]) -> f64 {
        util::dot(init_dist, &self.v)
    }
}

/// RiverSwim-style chain. RIGHT advances with probability `1 - slip` and
/// otherwise slips one state left; LEFT always moves left. The only rewards
/// are 1 for RIGHT in the last state and a small 0.005 for LEFT in state 0.
pub fn build_chain_mdp(n_states: usize, slip: f64, gamma: f64) -> Result<TabularMdp> {
    if n_states < 3 {
        return Err(Error::param(format!("chain needs at least 3 states, got {n_states}")));
    }
    if !(0.0..1.0).contains(&slip) {
        return Err(Error::param(format!("slip must lie in [0, 1), got {slip}")));
    }
    let ns = n_states;
    let mut transition = vec![0.0; ns * 2 * ns];
    let mut reward = vec![0.0; ns * 2];
    for s in 0..ns {
        let left = s.saturating_sub(1);
        let right = (s + 1).min(ns - 1);
        transition[(s * 2 + LEFT) * ns + left] = 1.0;
        transition[(s * 2 + RIGHT) * ns + right] += 1.0 - slip;
        transition[(s * 2 + RIGHT) * ns + left] += slip;
    }
    reward[(ns - 1) * 2 + RIGHT] = 1.0;
    reward[LEFT] = CHAIN_SMALL_REWARD;
    let mut init = vec![0.0; ns];
    init[0] = 1.0;
    TabularMdp::new(ns, 2, transition, reward, gamma, init)
}

/// Parameters of a randomly generated block MDP with an exactly low-rank
/// transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_latent: usize,
    pub concentration: f64,
    pub seed: u64,
    #[serde(default = "default_block_gamma")]
    pub gamma: f64,
}

fn default_block_gamma() -> f64 {
    0.9
}

impl BlockMdpSpec {
    pub fn new(n_states: usize, n_actions: usize, n_latent: usize, concentration: f64, seed: u64) -> Self {
        BlockMdpSpec {
            n_states,
            n_actions,
            n_latent,
            concentration,
            seed,
            gamma: default_block_gamma(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_actions == 0 || self.n_latent == 0 {
            return Err(Error::param("block MDP sizes must be positive"));
        }
        if self.n_latent > self.n_states {
            return Err(Error::param("n_latent must not exceed n_states"));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::param("concentration must be positive"));
        }
        Ok(())
    }
}

/// Sample `p(z|s,a)` and `p(s'|z)` rows from a symmetric Dirichlet and return
/// the composed MDP together with its generating factors. Rewards are uniform
/// on [0, 1] and the initial distribution is uniform.
pub fn build_random_block_mdp(spec: &BlockMdpSpec) -> Result<(TabularMdp, LatentFactorModel)> {
    spec.validate()?;
    let mut rng = util::seeded(spec.seed);
    let model = LatentFactorModel::random(
        spec.n_states,
        spec.n_actions,
        spec.n_latent,
        spec.concentration,
        &mut rng,
    )?;
    let reward = (0..spec.n_states * spec.n_actions).map(|_| rng.random::<f64>()).collect();
    let init = vec![1.0 / spec.n_states as f64; spec.n_states];
    let mdp = model.to_mdp(reward, spec.gamma, init)?;
    Ok((mdp, model))
}

/// Bellman optimality iteration until the sup-norm residual drops to `tol`.
/// The greedy policy takes the lowest-index action among ties.
pub fn exact_value_iteration(
    mdp: &TabularMdp,
    reward_override: Option<&[f64]>,
    tol: f64,
) -> Result<ValueSolution> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let reward = match reward_override {
        Some(r) if r.len() != mdp.n_pairs() => {
            return Err(Error::param("reward override has the wrong size"));
        }
        Some(r) => r,
        None => mdp.reward(),
    };
    solve_optimal_q(mdp.n_states, mdp.n_actions, mdp.transition(), reward, mdp.gamma, tol)
}

pub(crate) fn solve_optimal_q(
    ns: usize,
    na: usize,
    transition: &[f64],
    reward: &[f64],
    gamma: f64,
    tol: f64,
) -> Result<ValueSolution> {
    let mut q = vec![0.0; ns * na];
    let mut v = vec![0.0; ns];
    let mut next = vec![0.0; ns * na];
    for iter in 1..=MAX_VI_ITERS {
        let mut residual: f64 = 0.0;
        for (sa, out) in next.iter_mut().enumerate() {
            let row = &transition[sa * ns..(sa + 1) * ns];
            *out = reward[sa] + gamma * util::dot(row, &v);
            residual = residual.max((*out - q[sa]).abs());
        }
        if residual <= tol {
            let greedy_actions: Vec<usize> = q.chunks(na).map(util::argmax_lowest).collect();
            return Ok(ValueSolution {
                greedy: Policy::deterministic(na, &greedy_actions)?,
                q,
                v,
                iterations: iter,
                residual,
            });
        }
        std::mem::swap(&mut q, &mut next);
        for (vs, row) in v.iter_mut().zip(q.chunks(na)) {
            *vs = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        }
        if iter == MAX_VI_ITERS {
            return Err(Error::NotConverged {
                iterations: iter,
                residual,
            });
        }
    }
    unreachable!()
}

/// Exact `Q^pi` and `V^pi` for `reward` by a dense linear solve of
/// `(I - gamma P_pi) V = r_pi`.
pub fn evaluate_policy(mdp: &TabularMdp, policy: &Policy, reward: Option<&[f64]>) -> Result<PolicyValue> {
    policy.check_against(mdp)?;
    let reward = reward.unwrap_or(mdp.reward());
    if reward.len() != mdp.n_pairs() {
        return Err(Error::param("reward has the wrong size"));
    }
    evaluate_policy_raw(mdp.n_states, mdp.n_actions, mdp.transition(), reward, mdp.gamma, policy)
}

pub(crate) fn evaluate_policy_raw(
    ns: usize,
    na: usize,
    transition: &[f64],
    reward: &[f64],
    gamma: f64,
    policy: &Policy,
) -> Result<PolicyValue> {
    let mut lhs = DMatrix::<f64>::identity(ns, ns);
    let mut rhs = DVector::<f64>::zeros(ns);
    for s in 0..ns {
        for a in 0..na {
            let p = policy.prob(s, a);
            if p == 0.0 {
                continue;
            }
            rhs[s] += p * reward[s * na + a];
            let row = &transition[(s * na + a) * ns..(s * na + a + 1) * ns];
            for (s2, &t) in row.iter().enumerate() {
                lhs[(s, s2)] -= gamma * p * t;
            }
        }
    }
    let v = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("policy evaluation system is singular".into()))?;
    let v: Vec<f64> = v.iter().copied().collect();
    let q = (0..ns * na)
        .map(|sa| reward[sa] + gamma * util::dot(&transition[sa * ns..(sa + 1) * ns], &v))
        .collect();
    Ok(PolicyValue { q, v })
}

/// Normalized discounted occupancy: the solution of
/// `d = (1 - gamma) d0 x pi + gamma P_pi^T d` by a dense linear solve.
pub fn occupancy_measure(mdp: &TabularMdp, policy: &Policy) -> Result<OccupancyMeasure> {
    policy.check_against(mdp)?;
    let (ns, na) = (mdp.n_states, mdp.n_actions);
    let n = ns * na;
    let gamma = mdp.gamma;
    // Row (s', a') of the system collects inflow from every (s, a).
    let mut lhs = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s2 in 0..ns {
        for a2 in 0..na {
            let target = s2 * na + a2;
            let pi = policy.prob(s2, a2);
            rhs[target] = (1.0 - gamma) * mdp.init_dist[s2] * pi;
            if pi == 0.0 {
                continue;
            }
            for sa in 0..n {
                let t = mdp.transition[sa * ns + s2];
                if t != 0.0 {
                    lhs[(target, sa)] -= gamma * t * pi;
                }
            }
        }
    }
    let d = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("occupancy system is singular".into()))?;
    Ok(OccupancyMeasure {
        n_states: ns,
        n_actions: na,
        dist: d.iter().map(|x| x.max(0.0)).collect(),
    })
}

/// Draw `s_t` where `t` is the first step at which a Bernoulli(1 - gamma)
/// coin fires, starting from `s_0 ~ d0` and following `policy`.
pub fn sample_occupancy_state<R: Rng + ?Sized>(mdp: &TabularMdp, policy: &Policy, rng: &mut R) -> usize {
    let mut s = sample_categorical(&mdp.init_dist, rng);
    loop {
        if rng.random::<f64>() < 1.0 - mdp.gamma {
            return s;
        }
        let a = policy.sample(s, rng);
        s = mdp.sample_next(s, a, rng);
    }
}

/// Largest generalized eigenvalue of `(E_target[phi phi^T], E_behavior[phi phi^T])`,
/// i.e. `sup_x x^T A x / x^T B x` over the feature span.
pub fn concentrability<F>(
    mdp: &TabularMdp,
    target: &Policy,
    behavior: &OccupancyMeasure,
    features: F,
) -> Result<f64>
where
    F: Fn(usize, usize) -> Vec<f64>,
{
    let target_occ = occupancy_measure(mdp, target)?;
    if behavior.dist.len() != mdp.n_pairs() {
        return Err(Error::param("behavior distribution has the wrong size"));
    }
    let feats: Vec<Vec<f64>> = (0..mdp.n_states)
        .flat_map(|s| (0..mdp.n_actions).map(move |a| (s, a)))
        .map(|(s, a)| features(s, a))
        .collect();
    let dim = feats.first().map_or(0, Vec::len);
    if dim == 0 || feats.iter().any(|f| f.len() != dim) {
        return Err(Error::param("features must share a positive dimension"));
    }
    let second_moment = |weights: &[f64]| {
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (w, f) in weights.iter().zip(&feats) {
            if *w != 0.0 {
                let v = DVector::from_column_slice(f);
                m += *w * &v * v.transpose();
            }
        }
        m
    };
    let a = second_moment(&target_occ.dist);
    let b = second_moment(&behavior.dist);
    generalized_max_eigenvalue(&a, &b)
}

pub(crate) fn generalized_max_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::new(b.clone());
    let scale = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let cutoff = scale * 1e-10;
    let mut kept = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let u = eig.eigenvectors.column(i);
        if lam > cutoff {
            kept.push(i);
        } else {
            let mass = (u.transpose() * a * u)[(0, 0)];
            if mass > cutoff.max(1e-12) {
                return Err(Error::SingularCoverage {
                    direction: u.iter().copied().collect(),
                    target_mass: mass,
                });
            }
        }
    }
    if kept.is_empty() {
        return Ok(0.0);
    }
    let k = kept.len();
    let mut whitened = DMatrix::<f64>::zeros(a.nrows(), k);
    for (j, &i) in kept.iter().enumerate() {
        let col = eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt();
        whitened.set_column(j, &col);
    }
    let reduced = whitened.transpose() * a * &whitened;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    Ok(SymmetricEigen::new(reduced).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}
