//! Latent-factorized transition model `T(s'|s,a) = sum_z p(z|s,a) p(s'|z)`:
//! composition, exact posteriors, likelihood, ELBO, EM and ancestral sampling.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::TabularMdp;
use crate::error::{Error, Result};
use crate::util::{self, check_stochastic_rows, sample_categorical, SimRng, STOCHASTIC_TOL};

/// Additive smoothing applied to expected counts in every M-step.
pub const EM_SMOOTHING: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct LatentFactorModel {
    n_states: usize,
    n_actions: usize,
    n_latent: usize,
    /// Rows `p(z | s, a)`, indexed `((s, a), z)`.
    phi: Vec<f64>,
    /// Rows `p(s' | z)`, indexed `(z, s')`.
    mu: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    n_states: usize,
    n_actions: usize,
    n_latent: usize,
    phi: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
}

impl TryFrom<ModelDoc> for LatentFactorModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        let phi = util::from_matrix("phi", &doc.phi, doc.n_states * doc.n_actions, doc.n_latent)?;
        let mu = util::from_matrix("mu", &doc.mu, doc.n_latent, doc.n_states)?;
        LatentFactorModel::new(doc.n_states, doc.n_actions, doc.n_latent, phi, mu)
    }
}

impl From<LatentFactorModel> for ModelDoc {
    fn from(m: LatentFactorModel) -> Self {
        ModelDoc {
            n_states: m.n_states,
            n_actions: m.n_actions,
            n_latent: m.n_latent,
            phi: util::to_matrix(&m.phi, m.n_latent),
            mu: util::to_matrix(&m.mu, m.n_states),
        }
    }
}

impl LatentFactorModel {
    pub fn new(n_states: usize, n_actions: usize, n_latent: usize, phi: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 || n_latent == 0 {
            return Err(Error::param("model sizes must be positive"));
        }
        if phi.len() != n_states * n_actions * n_latent || mu.len() != n_latent * n_states {
            return Err(Error::param("factor matrices have the wrong size"));
        }
        check_stochastic_rows("phi", &phi, n_latent, STOCHASTIC_TOL)?;
        check_stochastic_rows("mu", &mu, n_states, STOCHASTIC_TOL)?;
        Ok(LatentFactorModel {
            n_states,
            n_actions,
            n_latent,
            phi,
            mu,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize, n_latent: usize) -> Self {
        LatentFactorModel {
            n_states,
            n_actions,
            n_latent,
            phi: vec![1.0 / n_latent as f64; n_states * n_actions * n_latent],
            mu: vec![1.0 / n_states as f64; n_latent * n_states],
        }
    }

    /// Every row drawn independently from a symmetric Dirichlet.
    pub fn random<R: Rng + ?Sized>(
        n_states: usize,
        n_actions: usize,
        n_latent: usize,
        concentration: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(concentration > 0.0 && concentration.is_finite()) {
            return Err(Error::param("Dirichlet concentration must be positive"));
        }
        if n_states == 0 || n_actions == 0 || n_latent == 0 {
            return Err(Error::param("model sizes must be positive"));
        }
        let phi = (0..n_states * n_actions)
            .flat_map(|_| util::dirichlet_row(n_latent, concentration, rng))
            .collect();
        let mu = (0..n_latent)
            .flat_map(|_| util::dirichlet_row(n_states, concentration, rng))
            .collect();
        Ok(LatentFactorModel {
            n_states,
            n_actions,
            n_latent,
            phi,
            mu,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_latent(&self) -> usize {
        self.n_latent
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `p(. | s, a)`.
    pub fn phi_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_latent;
        &self.phi[start..start + self.n_latent]
    }

    /// `p(. | z)`.
    pub fn mu_row(&self, z: usize) -> &[f64] {
        &self.mu[z * self.n_states..(z + 1) * self.n_states]
    }

    /// Relabel latents: new latent `k` is old latent `perm[k]`.
    pub fn permute_latents(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_latent];
        if perm.len() != self.n_latent || perm.iter().any(|&p| p >= self.n_latent || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::param("not a permutation of the latent indices"));
        }
        let zs = self.n_latent;
        let phi = self
            .phi
            .chunks(zs)
            .flat_map(|row| perm.iter().map(move |&p| row[p]))
            .collect();
        let mu = perm.iter().flat_map(|&p| self.mu_row(p).iter().copied()).collect();
        Ok(LatentFactorModel { phi, mu, ..*self })
    }

    /// `T(s' | s, a)` as a flattened `(s, a, s')` tensor.
    pub fn compose_transition(&self) -> Vec<f64> {
        let ns = self.n_states;
        let mut out = vec![0.0; self.n_states * self.n_actions * ns];
        for (row_out, phi_row) in out.chunks_mut(ns).zip(self.phi.chunks(self.n_latent)) {
            for (z, &w) in phi_row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (o, &m) in row_out.iter_mut().zip(self.mu_row(z)) {
                    *o += w * m;
                }
            }
        }
        out
    }

    pub fn transition_prob(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.phi_row(s, a)
            .iter()
            .enumerate()
            .map(|(z, w)| w * self.mu[z * self.n_states + s_next])
            .sum()
    }

    /// The composed MDP with the given reward, discount and start distribution.
    pub fn to_mdp(&self, reward: Vec<f64>, gamma: f64, init_dist: Vec<f64>) -> Result<TabularMdp> {
        let mut transition = self.compose_transition();
        // Renormalize away floating-point drift so the MDP validates at 1e-12.
        for row in transition.chunks_mut(self.n_states) {
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= total);
        }
        TabularMdp::new(self.n_states, self.n_actions, transition, reward, gamma, init_dist)
    }

    fn check_indices(&self, s: usize, a: usize, s_next: usize) -> Result<()> {
        if s >= self.n_states || a >= self.n_actions || s_next >= self.n_states {
            return Err(Error::param(format!("index ({s}, {a}, {s_next}) out of range")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }
}

/// Observed `(s, a, s')` triples with a sparse tally.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionDataset {
    n_states: usize,
    n_actions: usize,
    triples: Vec<(usize, usize, usize)>,
    counts: BTreeMap<(usize, usize, usize), usize>,
}

impl TransitionDataset {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        TransitionDataset {
            n_states,
            n_actions,
            triples: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn from_triples(n_states: usize, n_actions: usize, triples: &[(usize, usize, usize)]) -> Result<Self> {
        let mut data = TransitionDataset::new(n_states, n_actions);
        for &(s, a, s2) in triples {
            data.push(s, a, s2)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, s: usize, a: usize, s_next: usize) -> Result<()> {
        if s >= self.n_states || a >= self.n_actions || s_next >= self.n_states {
            return Err(Error::param(format!("triple ({s}, {a}, {s_next}) out of range")));
        }
        self.triples.push((s, a, s_next));
        *self.counts.entry((s, a, s_next)).or_insert(0) += 1;
        Ok(())
    }

    /// Concatenation of two datasets over the same spaces.
    pub fn union(&self, other: &TransitionDataset) -> Result<Self> {
        if self.n_states != other.n_states || self.n_actions != other.n_actions {
            return Err(Error::param("datasets cover different state/action spaces"));
        }
        let mut out = self.clone();
        for &(s, a, s2) in &other.triples {
            out.push(s, a, s2)?;
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn triples(&self) -> &[(usize, usize, usize)] {
        &self.triples
    }

    pub fn counts(&self) -> &BTreeMap<(usize, usize, usize), usize> {
        &self.counts
    }

    /// Number of observations per `(s, a)`, flattened.
    pub fn pair_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_states * self.n_actions];
        for (&(s, a, _), &c) in &self.counts {
            out[s * self.n_actions + a] += c;
        }
        out
    }

    fn check_model(&self, model: &LatentFactorModel) -> Result<()> {
        if model.n_states != self.n_states || model.n_actions != self.n_actions {
            return Err(Error::param("dataset and model cover different spaces"));
        }
        Ok(())
    }
}

/// `q*(z) ∝ p(z|s,a) p(s'|z)`.
pub fn exact_posterior(model: &LatentFactorModel, s: usize, a: usize, s_next: usize) -> Result<Vec<f64>> {
    model.check_indices(s, a, s_next)?;
    let mut post: Vec<f64> = model
        .phi_row(s, a)
        .iter()
        .enumerate()
        .map(|(z, w)| w * model.mu[z * model.n_states + s_next])
        .collect();
    let total: f64 = post.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedPosterior { s, a, s_next });
    }
    post.iter_mut().for_each(|x| *x /= total);
    Ok(post)
}

/// `sum over triples of log T(s'|s,a)`.
pub fn log_likelihood(model: &LatentFactorModel, data: &TransitionDataset) -> Result<f64> {
    data.check_model(model)?;
    let mut total = 0.0;
    for (&(s, a, s2), &c) in &data.counts {
        let p = model.transition_prob(s, a, s2);
        if !(p > 0.0) {
            return Err(Error::NegativeInfinity { s, a, s_next: s2 });
        }
        total += c as f64 * p.ln();
    }
    Ok(total)
}

/// Evidence lower bound `sum_t E_q[log p(s'|z)] - KL(q || p(.|s,a))`, with
/// `q[t]` the variational distribution for `data.triples()[t]`.
pub fn elbo(model: &LatentFactorModel, q: &[Vec<f64>], data: &TransitionDataset) -> Result<f64> {
    data.check_model(model)?;
    if q.len() != data.len() {
        return Err(Error::param("need one variational distribution per triple"));
    }
    let mut total = 0.0;
    for (qt, &(s, a, s2)) in q.iter().zip(&data.triples) {
        if qt.len() != model.n_latent {
            return Err(Error::param("variational distribution has the wrong length"));
        }
        util::check_distribution("q", qt, 1e-9)?;
        total += elbo_term(model, qt, s, a, s2)?;
    }
    Ok(total)
}

pub(crate) fn elbo_term(model: &LatentFactorModel, q: &[f64], s: usize, a: usize, s_next: usize) -> Result<f64> {
    let prior = model.phi_row(s, a);
    let mut term = 0.0;
    for (z, (&qz, &pz)) in q.iter().zip(prior).enumerate() {
        if qz == 0.0 {
            continue;
        }
        let emit = model.mu[z * model.n_states + s_next];
        if pz == 0.0 || emit == 0.0 {
            return Err(Error::NegativeInfinity { s, a, s_next });
        }
        term += qz * (emit.ln() - (qz / pz).ln());
    }
    Ok(term)
}

/// One EM iteration. (s, a) rows without data keep their current values.
pub fn em_step(model: &LatentFactorModel, data: &TransitionDataset) -> Result<LatentFactorModel> {
    em_step_scored(model, data).map(|(m, _)| m)
}

/// EM step that also returns the log-likelihood of the *input* model, which
/// falls out of the E-step for free.
fn em_step_scored(model: &LatentFactorModel, data: &TransitionDataset) -> Result<(LatentFactorModel, f64)> {
    data.check_model(model)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (ns, zs) = (model.n_states, model.n_latent);
    let mut phi_acc = vec![0.0; model.phi.len()];
    let mut seen = vec![false; model.n_states * model.n_actions];
    let mut mu_acc = vec![0.0; model.mu.len()];
    let mut post = vec![0.0; zs];
    let mut ll = 0.0;
    for (&(s, a, s2), &c) in &data.counts {
        let sa = s * model.n_actions + a;
        let prior = &model.phi[sa * zs..(sa + 1) * zs];
        let mut total = 0.0;
        for z in 0..zs {
            post[z] = prior[z] * model.mu[z * ns + s2];
            total += post[z];
        }
        if !(total > 0.0) {
            return Err(Error::UndefinedPosterior { s, a, s_next: s2 });
        }
        ll += c as f64 * total.ln();
        let weight = c as f64 / total;
        seen[sa] = true;
        for z in 0..zs {
            let r = post[z] * weight;
            phi_acc[sa * zs + z] += r;
            mu_acc[z * ns + s2] += r;
        }
    }
    let mut phi = model.phi.clone();
    for (sa, _) in seen.iter().enumerate().filter(|(_, &v)| v) {
        normalize_smoothed(&phi_acc[sa * zs..(sa + 1) * zs], &mut phi[sa * zs..(sa + 1) * zs]);
    }
    let mut mu = vec![0.0; model.mu.len()];
    for z in 0..zs {
        normalize_smoothed(&mu_acc[z * ns..(z + 1) * ns], &mut mu[z * ns..(z + 1) * ns]);
    }
    Ok((LatentFactorModel { phi, mu, ..*model }, ll))
}

fn normalize_smoothed(acc: &[f64], out: &mut [f64]) {
    let total: f64 = acc.iter().sum::<f64>() + EM_SMOOTHING * acc.len() as f64;
    for (o, &x) in out.iter_mut().zip(acc) {
        *o = (x + EM_SMOOTHING) / total;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    Em,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iters: usize,
    /// Stop once the mean per-triple log-likelihood improves by less than this.
    pub tol: f64,
    pub restarts: usize,
    pub init_concentration: f64,
    pub mode: FitMode,
    /// Step size on the mean log-likelihood (gradient mode only).
    pub learning_rate: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: 500,
            tol: 1e-9,
            restarts: 3,
            init_concentration: 1.0,
            mode: FitMode::Em,
            learning_rate: 1.0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::param("max_iters and restarts must be at least 1"));
        }
        if !(self.tol > 0.0) || !(self.init_concentration > 0.0) || !(self.learning_rate > 0.0) {
            return Err(Error::param("tol, init_concentration and learning_rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: LatentFactorModel,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Final log-likelihood of every initialization, warm start first.
    pub restart_scores: Vec<f64>,
}

/// Maximize the ELBO by EM (or gradient ascent on softmax logits) from
/// `cfg.restarts` random initializations, keeping the restart with the best
/// final log-likelihood. Ties go to the earliest restart.
pub fn fit<R: Rng + ?Sized>(
    data: &TransitionDataset,
    n_latent: usize,
    cfg: &FitConfig,
    rng: &mut R,
) -> Result<LatentFactorModel> {
    fit_detailed(data, n_latent, cfg, rng).map(|o| o.model)
}

pub fn fit_detailed<R: Rng + ?Sized>(
    data: &TransitionDataset,
    n_latent: usize,
    cfg: &FitConfig,
    rng: &mut R,
) -> Result<FitOutcome> {
    fit_from(data, n_latent, cfg, None, rng)
}

/// Share of uniform mass blended into a warm start so that no entry is zero.
const WARM_BLEND: f64 = 0.01;

/// As [`fit_detailed`], with an optional extra initialization (typically the
/// previous fit) competing against the random restarts. It is scored first,
/// so it wins ties; the random restarts consume the same streams either way.
pub fn fit_from<R: Rng + ?Sized>(
    data: &TransitionDataset,
    n_latent: usize,
    cfg: &FitConfig,
    warm: Option<&LatentFactorModel>,
    rng: &mut R,
) -> Result<FitOutcome> {
    cfg.validate()?;
    if let Some(w) = warm {
        if (w.n_states, w.n_actions, w.n_latent) != (data.n_states, data.n_actions, n_latent) {
            return Err(Error::param("warm start does not match the dataset and latent size"));
        }
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_latent == 0 {
        return Err(Error::param("n_latent must be positive"));
    }
    let streams: Vec<SimRng> = (0..cfg.restarts).map(|_| util::fork(rng)).collect();
    let mut inits = Vec::with_capacity(cfg.restarts + 1);
    if let Some(w) = warm {
        let blend = |p: &[f64], width: usize| -> Vec<f64> {
            p.iter().map(|x| (1.0 - WARM_BLEND) * x + WARM_BLEND / width as f64).collect()
        };
        inits.push(LatentFactorModel {
            phi: blend(&w.phi, n_latent),
            mu: blend(&w.mu, data.n_states),
            ..w.clone()
        });
    }
    for mut stream in streams {
        inits.push(LatentFactorModel::random(
            data.n_states,
            data.n_actions,
            n_latent,
            cfg.init_concentration,
            &mut stream,
        )?);
    }
    let mut best: Option<FitOutcome> = None;
    let mut scores = Vec::with_capacity(inits.len());
    for init in inits {
        let (model, ll, iterations) = match cfg.mode {
            FitMode::Em => run_em(init, data, cfg)?,
            FitMode::Gradient => run_gradient(init, data, cfg)?,
        };
        scores.push(ll);
        if best.as_ref().is_none_or(|b| ll > b.log_likelihood) {
            best = Some(FitOutcome {
                model,
                log_likelihood: ll,
                iterations,
                restart_scores: Vec::new(),
            });
        }
    }
    let mut best = best.expect("at least one restart");
    best.restart_scores = scores;
    Ok(best)
}

fn run_em(
    mut model: LatentFactorModel,
    data: &TransitionDataset,
    cfg: &FitConfig,
) -> Result<(LatentFactorModel, f64, usize)> {
    let n = data.len() as f64;
    let mut prev = f64::NEG_INFINITY;
    for iter in 1..=cfg.max_iters {
        let (next, ll) = em_step_scored(&model, data)?;
        if (ll - prev) / n < cfg.tol {
            return Ok((model, ll, iter));
        }
        prev = ll;
        model = next;
    }
    let ll = log_likelihood(&model, data)?;
    Ok((model, ll, cfg.max_iters))
}

/// Plain gradient ascent on the mean log-likelihood in softmax-logit
/// coordinates. At the exact posterior the ELBO gradient coincides with it.
fn run_gradient(
    init: LatentFactorModel,
    data: &TransitionDataset,
    cfg: &FitConfig,
) -> Result<(LatentFactorModel, f64, usize)> {
    let (ns, zs) = (init.n_states, init.n_latent);
    let n = data.len() as f64;
    let mut phi_logits: Vec<f64> = init.phi.iter().map(|p| p.max(1e-300).ln()).collect();
    let mut mu_logits: Vec<f64> = init.mu.iter().map(|p| p.max(1e-300).ln()).collect();
    let mut model = init;
    let mut prev = log_likelihood(&model, data)?;
    for iter in 1..=cfg.max_iters {
        let mut g_phi = vec![0.0; phi_logits.len()];
        let mut g_mu = vec![0.0; mu_logits.len()];
        for (&(s, a, s2), &c) in &data.counts {
            let sa = s * model.n_actions + a;
            let q = exact_posterior(&model, s, a, s2)?;
            let w = c as f64 / n;
            for z in 0..zs {
                g_phi[sa * zs + z] += w * (q[z] - model.phi[sa * zs + z]);
                for s3 in 0..ns {
                    let ind = if s3 == s2 { 1.0 } else { 0.0 };
                    g_mu[z * ns + s3] += w * q[z] * (ind - model.mu[z * ns + s3]);
                }
            }
        }
        for (l, g) in phi_logits.iter_mut().zip(&g_phi) {
            *l += cfg.learning_rate * g;
        }
        for (l, g) in mu_logits.iter_mut().zip(&g_mu) {
            *l += cfg.learning_rate * g;
        }
        model = LatentFactorModel {
            phi: softmax_rows(&phi_logits, zs),
            mu: softmax_rows(&mu_logits, ns),
            ..model
        };
        let ll = log_likelihood(&model, data)?;
        if (ll - prev) / n < cfg.tol {
            return Ok((model, ll, iter));
        }
        prev = ll;
    }
    Ok((model, prev, cfg.max_iters))
}

fn softmax_rows(logits: &[f64], width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks(width) {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|x| (x - m).exp()).collect();
        let total: f64 = exps.iter().sum();
        out.extend(exps.iter().map(|e| e / total));
    }
    out
}

/// Ancestral draw: `z ~ p(.|s,a)`, then `s' ~ p(.|z)`.
pub fn sample_next_state<R: Rng + ?Sized>(model: &LatentFactorModel, s: usize, a: usize, rng: &mut R) -> usize {
    let z = sample_categorical(model.phi_row(s, a), rng);
    sample_categorical(model.mu_row(z), rng)
}

/// `sum_{s,a} w(s,a) * ||T_model(.|s,a) - T_true(.|s,a)||_1^2`.
pub fn tv_error(model: &LatentFactorModel, truth: &TabularMdp, weighting: &[f64]) -> Result<f64> {
    weighted_l1(model, truth, weighting, true)
}

/// Unsquared variant: `sum_{s,a} w(s,a) * ||T_model(.|s,a) - T_true(.|s,a)||_1`.
pub fn tv_error_l1(model: &LatentFactorModel, truth: &TabularMdp, weighting: &[f64]) -> Result<f64> {
    weighted_l1(model, truth, weighting, false)
}

fn weighted_l1(model: &LatentFactorModel, truth: &TabularMdp, weighting: &[f64], squared: bool) -> Result<f64> {
    if model.n_states != truth.n_states() || model.n_actions != truth.n_actions() {
        return Err(Error::param("model and MDP cover different spaces"));
    }
    if weighting.len() != truth.n_pairs() {
        return Err(Error::param("weighting has the wrong size"));
    }
    util::check_distribution("weighting", weighting, 1e-9)?;
    let composed = model.compose_transition();
    let ns = model.n_states;
    let mut total = 0.0;
    for (sa, &w) in weighting.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let d = util::l1_distance(&composed[sa * ns..(sa + 1) * ns], &truth.transition()[sa * ns..(sa + 1) * ns]);
        total += w * if squared { d * d } else { d };
    }
    Ok(total)
}
