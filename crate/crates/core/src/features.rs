//! Feature maps on top of a latent factor model: the exact representation
//! `phi(s,a) = p(.|s,a)` and a random Fourier feature parameterization of
//! latent value functions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent_model::LatentFactorModel;
use crate::util::{self, sample_categorical};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        FeatureVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(v: Vec<f64>) -> Self {
        FeatureVector(v)
    }
}

/// `Q(s,a) = reward_weight * r(s,a) + gamma * <phi(s,a), latent_weights>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearQ {
    pub reward_weight: f64,
    pub latent_weights: Vec<f64>,
}

impl LinearQ {
    pub fn new(reward_weight: f64, latent_weights: Vec<f64>) -> Result<Self> {
        if !reward_weight.is_finite() || latent_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("linear Q weights must be finite"));
        }
        Ok(LinearQ {
            reward_weight,
            latent_weights,
        })
    }

    /// Latent weights `w(z) = sum_{s'} p(s'|z) V(s')` that make `exact_q`
    /// reproduce the Bellman backup of `v`.
    pub fn from_state_values(model: &LatentFactorModel, v: &[f64]) -> Result<Self> {
        if v.len() != model.n_states() {
            return Err(Error::param("value vector has the wrong length"));
        }
        let w = (0..model.n_latent()).map(|z| util::dot(model.mu_row(z), v)).collect();
        LinearQ::new(1.0, w)
    }
}

pub fn lvrep_feature(model: &LatentFactorModel, s: usize, a: usize) -> Result<FeatureVector> {
    if s >= model.n_states() || a >= model.n_actions() {
        return Err(Error::param(format!("({s}, {a}) out of range")));
    }
    Ok(FeatureVector(model.phi_row(s, a).to_vec()))
}

/// Exact linear Q: `w0 r(s,a) + gamma <p(.|s,a), w>`. `reward` is flattened `(s, a)`.
pub fn exact_q(
    model: &LatentFactorModel,
    q_latent: &LinearQ,
    reward: &[f64],
    gamma: f64,
    s: usize,
    a: usize,
) -> Result<f64> {
    if q_latent.latent_weights.len() != model.n_latent() {
        return Err(Error::param("latent weight length differs from n_latent"));
    }
    if reward.len() != model.n_states() * model.n_actions() {
        return Err(Error::param("reward has the wrong size"));
    }
    let phi = lvrep_feature(model, s, a)?;
    Ok(q_latent.reward_weight * reward[s * model.n_actions() + a] + gamma * util::dot(&phi.0, &q_latent.latent_weights))
}

/// Random Fourier features for the Gaussian kernel `exp(-|x - x'|^2 / sigma^2)`:
/// `psi(x; xi_i) = sqrt(2) cos(<w_i, x> + b_i)` with `w_i ~ N(0, 2/sigma^2 I)`
/// and `b_i ~ U[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFeatureMap {
    pub frequencies: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub bandwidth: f64,
}

pub fn build_rff<R: Rng + ?Sized>(bandwidth: f64, m: usize, embed_dim: usize, rng: &mut R) -> Result<RandomFeatureMap> {
    if m == 0 || embed_dim == 0 {
        return Err(Error::param("feature count and embedding dimension must be positive"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::param("bandwidth must be positive"));
    }
    let normal = Normal::new(0.0, 2.0f64.sqrt() / bandwidth).expect("finite scale");
    let mut frequencies = Vec::with_capacity(m);
    let mut offsets = Vec::with_capacity(m);
    for _ in 0..m {
        frequencies.push((0..embed_dim).map(|_| normal.sample(rng)).collect());
        offsets.push(rng.random_range(0.0..2.0 * PI));
    }
    Ok(RandomFeatureMap {
        frequencies,
        offsets,
        bandwidth,
    })
}

impl RandomFeatureMap {
    pub fn m(&self) -> usize {
        self.offsets.len()
    }

    pub fn embed_dim(&self) -> usize {
        self.frequencies.first().map_or(0, Vec::len)
    }

    pub fn psi(&self, x: &[f64], i: usize) -> f64 {
        2.0f64.sqrt() * (util::dot(&self.frequencies[i], x) + self.offsets[i]).cos()
    }

    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m()).map(|i| self.psi(x, i)).collect()
    }

    /// `(1/m) sum_i psi(x; xi_i) psi(y; xi_i)`.
    pub fn kernel_estimate(&self, x: &[f64], y: &[f64]) -> f64 {
        let fx = self.features(x);
        let fy = self.features(y);
        util::dot(&fx, &fy) / self.m() as f64
    }

    /// The latent function `w(z) = (1/m) sum_i w~_i psi(e_z; xi_i)` at every
    /// one-hot embedded latent.
    pub fn latent_function(&self, weights: &[f64], n_latent: usize) -> Vec<f64> {
        (0..n_latent)
            .map(|z| {
                let e = one_hot(z, n_latent);
                util::dot(&self.features(&e), weights) / self.m() as f64
            })
            .collect()
    }

    /// Minimum-norm second-layer weights `w~` with `latent_function(w~) = target`
    /// on the one-hot latents (ridge-stabilized).
    pub fn fit_latent_weights(&self, target: &[f64], ridge: f64) -> Result<Vec<f64>> {
        let nz = target.len();
        if nz != self.embed_dim() {
            return Err(Error::param("target must cover every latent of the embedding"));
        }
        let m = self.m();
        let design = DMatrix::from_fn(nz, m, |z, i| self.psi(&one_hot(z, nz), i) / m as f64);
        let gram = &design * design.transpose() + DMatrix::identity(nz, nz) * ridge;
        let alpha = gram
            .cholesky()
            .ok_or_else(|| Error::Numeric("random feature Gram matrix is not positive definite".into()))?
            .solve(&DVector::from_column_slice(target));
        Ok((design.transpose() * alpha).iter().copied().collect())
    }
}

pub fn gaussian_kernel(x: &[f64], y: &[f64], bandwidth: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (bandwidth * bandwidth)).exp()
}

pub fn one_hot(i: usize, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

/// Monte-Carlo Q through random features: draw `n_mc` latents from
/// `p(z|s,a)` (one-hot embedded) and average the random-feature latent
/// function, giving `r + gamma * mean_j (1/m) sum_i w~_i psi(z_j; xi_i)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_q<R: Rng + ?Sized>(
    model: &LatentFactorModel,
    rff: &RandomFeatureMap,
    q_latent: &LinearQ,
    reward: &[f64],
    gamma: f64,
    s: usize,
    a: usize,
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    if q_latent.latent_weights.len() != rff.m() {
        return Err(Error::param("latent weight length differs from the feature count"));
    }
    if rff.embed_dim() != model.n_latent() {
        return Err(Error::param("feature map embedding does not match n_latent"));
    }
    if s >= model.n_states() || a >= model.n_actions() || reward.len() != model.n_states() * model.n_actions() {
        return Err(Error::param("state/action out of range or reward mis-sized"));
    }
    if n_mc == 0 {
        return Err(Error::param("n_mc must be positive"));
    }
    let r = q_latent.reward_weight * reward[s * model.n_actions() + a];
    if q_latent.latent_weights.iter().all(|&w| w == 0.0) {
        return Ok(r);
    }
    let values = rff.latent_function(&q_latent.latent_weights, model.n_latent());
    let phi = model.phi_row(s, a);
    let total: f64 = (0..n_mc).map(|_| values[sample_categorical(phi, rng)]).sum();
    Ok(r + gamma * total / n_mc as f64)
}
