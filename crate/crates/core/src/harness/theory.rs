//! Numerical checks for the supporting lemmas: exact identities are checked
//! to round-off, rates and bands statistically. Every report carries its
//! inputs and the raw numbers behind its verdict.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::{self, BlockMdpSpec, Policy, TabularMdp};
use crate::error::{Error, Result};
use crate::features::{build_rff, gaussian_kernel};
use crate::latent_model::{self, FitConfig, TransitionDataset};
use crate::util::{self, dirichlet_row, fork, sample_categorical};

// ---------------------------------------------------------------------------
// Simulation identities

/// Two transition kernels sharing reward, bonus, policy and initial law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationInstance {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub init_dist: Vec<f64>,
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
    pub reward: Vec<f64>,
    pub bonus: Vec<f64>,
    pub policy: Policy,
}

/// `lhs = V_{P',r+b} - V_{P,r}` and the two occupancy-weighted right-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSides {
    pub lhs: f64,
    pub first: f64,
    pub second: f64,
}

impl SimulationSides {
    pub fn residuals(&self) -> (f64, f64) {
        ((self.lhs - self.first).abs(), (self.lhs - self.second).abs())
    }
}

impl SimulationInstance {
    pub fn random<R: Rng + ?Sized>(n_states: usize, n_actions: usize, gamma: f64, rng: &mut R) -> Self {
        let kernel = |rng: &mut R| -> Vec<f64> {
            (0..n_states * n_actions).flat_map(|_| dirichlet_row(n_states, 1.0, rng)).collect()
        };
        let p = kernel(rng);
        let p_prime = kernel(rng);
        let reward = (0..n_states * n_actions).map(|_| rng.random::<f64>()).collect();
        let bonus = (0..n_states * n_actions).map(|_| rng.random::<f64>()).collect();
        let probs = (0..n_states).flat_map(|_| dirichlet_row(n_actions, 1.0, rng)).collect();
        let policy = Policy::new(n_states, n_actions, probs).expect("Dirichlet rows are distributions");
        SimulationInstance {
            n_states,
            n_actions,
            gamma,
            init_dist: dirichlet_row(n_states, 1.0, rng),
            p,
            p_prime,
            reward,
            bonus,
            policy,
        }
    }

    fn mdp(&self, transition: &[f64]) -> Result<TabularMdp> {
        TabularMdp::new(
            self.n_states,
            self.n_actions,
            transition.to_vec(),
            vec![0.0; self.n_states * self.n_actions],
            self.gamma,
            self.init_dist.clone(),
        )
    }

    pub fn sides(&self) -> Result<SimulationSides> {
        let (ns, na, g) = (self.n_states, self.n_actions, self.gamma);
        let shifted: Vec<f64> = self.reward.iter().zip(&self.bonus).map(|(r, b)| r + b).collect();
        let v_prime = env::evaluate_policy_raw(ns, na, &self.p_prime, &shifted, g, &self.policy)?.v;
        let v = env::evaluate_policy_raw(ns, na, &self.p, &self.reward, g, &self.policy)?.v;
        let lhs = util::dot(&self.init_dist, &v_prime) - util::dot(&self.init_dist, &v);

        let d_p = env::occupancy_measure(&self.mdp(&self.p)?, &self.policy)?;
        let d_p_prime = env::occupancy_measure(&self.mdp(&self.p_prime)?, &self.policy)?;
        let rhs = |d: &[f64], values: &[f64]| -> f64 {
            let total: f64 = (0..ns * na)
                .map(|sa| {
                    let gap = util::dot(&self.p_prime[sa * ns..(sa + 1) * ns], values)
                        - util::dot(&self.p[sa * ns..(sa + 1) * ns], values);
                    d[sa] * (self.bonus[sa] + g * gap)
                })
                .sum();
            total / (1.0 - g)
        };
        Ok(SimulationSides {
            lhs,
            first: rhs(&d_p.dist, &v_prime),
            second: rhs(&d_p_prime.dist, &v),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n_trials: usize,
    pub n_states: usize,
    pub n_actions: usize,
    pub gammas: Vec<f64>,
    pub first_residuals: Vec<f64>,
    pub second_residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const SIMULATION_TOL: f64 = 1e-8;

/// Both identities on `n_trials` random 5-state, 3-action instances with
/// `gamma ~ U[0.5, 0.99)`.
pub fn check_simulation_lemma<R: Rng + ?Sized>(n_trials: usize, rng: &mut R) -> Result<SimulationReport> {
    if n_trials == 0 {
        return Err(Error::Config("simulation check needs at least one trial".into()));
    }
    let (ns, na) = (5, 3);
    let mut gammas = Vec::with_capacity(n_trials);
    let mut first = Vec::with_capacity(n_trials);
    let mut second = Vec::with_capacity(n_trials);
    for _ in 0..n_trials {
        let gamma = rng.random_range(0.5..0.99);
        let inst = SimulationInstance::random(ns, na, gamma, rng);
        let (r1, r2) = inst.sides()?.residuals();
        gammas.push(gamma);
        first.push(r1);
        second.push(r2);
    }
    let max_residual = first.iter().chain(&second).cloned().fold(0.0, f64::max);
    Ok(SimulationReport {
        n_trials,
        n_states: ns,
        n_actions: na,
        gammas,
        first_residuals: first,
        second_residuals: second,
        max_residual,
        tolerance: SIMULATION_TOL,
        passed: max_residual < SIMULATION_TOL,
    })
}

// ---------------------------------------------------------------------------
// Log-determinant potential

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Finite,
    Polynomial,
    Exponential,
}

/// Eigenvalues `mu_i`, `i = 1..=dim`: `c0` for `i <= beta` (finite),
/// `c0 i^{-beta}` (polynomial) or `c1 exp(-c2 i^beta)` (exponential).
/// Features in the unit ball are `phi = (mu_i u_i)_i` with `|u| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpectrum {
    pub kind: SpectrumKind,
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub dim: usize,
}

pub const TAIL_MASS_LIMIT: f64 = 1e-6;

impl SyntheticSpectrum {
    pub fn finite(beta: usize) -> Self {
        SyntheticSpectrum {
            kind: SpectrumKind::Finite,
            beta: beta as f64,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            dim: beta,
        }
    }

    pub fn polynomial(beta: f64, dim: usize) -> Self {
        SyntheticSpectrum {
            kind: SpectrumKind::Polynomial,
            beta,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            dim,
        }
    }

    pub fn exponential(beta: f64, dim: usize) -> Self {
        SyntheticSpectrum {
            kind: SpectrumKind::Exponential,
            beta,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            dim,
        }
    }

    fn mu(&self, i: usize) -> f64 {
        let x = i as f64;
        match self.kind {
            SpectrumKind::Finite => {
                if x <= self.beta {
                    self.c0
                } else {
                    0.0
                }
            }
            SpectrumKind::Polynomial => self.c0 * x.powf(-self.beta),
            SpectrumKind::Exponential => self.c1 * (-self.c2 * x.powf(self.beta)).exp(),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.dim).map(|i| self.mu(i)).collect()
    }

    /// `sum_{i > dim} mu_i^2`, the squared feature mass lost to truncation.
    pub fn tail_mass(&self) -> f64 {
        match self.kind {
            SpectrumKind::Finite => 0.0,
            SpectrumKind::Polynomial => {
                if self.beta <= 0.5 {
                    return f64::INFINITY;
                }
                let cutoff = 100 * self.dim.max(1);
                let head: f64 = (self.dim + 1..=cutoff).map(|i| self.mu(i).powi(2)).sum();
                head + self.c0 * self.c0 * (cutoff as f64).powf(1.0 - 2.0 * self.beta) / (2.0 * self.beta - 1.0)
            }
            SpectrumKind::Exponential => {
                let mut total = 0.0;
                for i in self.dim + 1.. {
                    let term = self.mu(i).powi(2);
                    total += term;
                    if term < 1e-30 * total.max(1e-300) || term == 0.0 {
                        break;
                    }
                }
                total
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || !(self.beta > 0.0) {
            return Err(Error::Config("spectrum needs dim >= 1 and beta > 0".into()));
        }
        if !(self.c0 > 0.0 && self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::Config("spectrum constants must be positive".into()));
        }
        if self.kind == SpectrumKind::Finite && (self.beta.fract() != 0.0 || (self.dim as f64) < self.beta) {
            return Err(Error::Config("finite spectrum needs integer beta <= dim".into()));
        }
        if self.eigenvalues().iter().take_while(|&&m| m > 0.0).count() == 0 {
            return Err(Error::Config("spectrum underflows to zero".into()));
        }
        let tail = self.tail_mass();
        if !(tail <= TAIL_MASS_LIMIT) {
            return Err(Error::Config(format!(
                "truncation at dim {} leaves tail mass {tail:e} > {TAIL_MASS_LIMIT:e}",
                self.dim
            )));
        }
        Ok(())
    }

    /// The growth rate the potential is compared against.
    pub fn rate(&self, alpha: f64) -> f64 {
        match self.kind {
            SpectrumKind::Finite => self.beta * (1.0 + alpha / self.beta).ln(),
            SpectrumKind::Polynomial => alpha.powf(1.0 / (2.0 * self.beta)) * alpha.ln(),
            SpectrumKind::Exponential => alpha.ln().powf(1.0 + 1.0 / self.beta),
        }
    }
}

/// `max_p sum_i log(1 + alpha lambda_i p_i)` over the simplex, by water-filling.
/// Returns the value and the maximizing weights.
pub fn water_filling(lambdas: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    // p_i = max(0, t - 1/(alpha lambda_i)); find the level t with sum p = 1.
    let inv: Vec<f64> = lambdas
        .iter()
        .map(|&l| if l > 0.0 { 1.0 / (alpha * l) } else { f64::INFINITY })
        .collect();
    let mass = |t: f64| inv.iter().map(|&c| (t - c).max(0.0)).sum::<f64>();
    let lo_start = inv.iter().cloned().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (lo_start, lo_start + 1.0);
    while mass(hi) < 1.0 {
        hi = lo_start + 2.0 * (hi - lo_start);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut p: Vec<f64> = inv.iter().map(|&c| (t - c).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    let value = lambdas.iter().zip(&p).map(|(&l, &pi)| (alpha * l * pi).ln_1p()).sum();
    (value, p)
}

/// `log det(I + alpha sum_k w_k phi_k phi_k^T)` through the `K x K` Gram matrix.
fn mixture_logdet(points: &[Vec<f64>], weights: &[f64], alpha: f64) -> f64 {
    let k = points.len();
    let gram = DMatrix::from_fn(k, k, |i, j| alpha * (weights[i] * weights[j]).sqrt() * util::dot(&points[i], &points[j]));
    let eig = (DMatrix::identity(k, k) + gram).symmetric_eigenvalues();
    eig.iter().map(|e| e.max(1.0).ln()).sum()
}

fn diagonal_logdet(lambdas: &[f64], p: &[f64], alpha: f64) -> f64 {
    lambdas.iter().zip(p).map(|(&l, &pi)| (alpha * l * pi).ln_1p()).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogdetReport {
    pub spectrum: SyntheticSpectrum,
    pub alpha: f64,
    pub n_dirs: usize,
    pub tail_mass: f64,
    /// Largest log det over the random mixtures.
    pub random_max: f64,
    /// Best `nu` uniform over the first `k` basis directions, and its `k`.
    pub uniform_basis: f64,
    pub uniform_basis_k: usize,
    /// Exact supremum (water-filling over basis directions).
    pub supremum: f64,
    /// Largest amount by which any sampled `nu` exceeded the supremum.
    pub supremum_violation: f64,
    pub worst: f64,
    pub rate: f64,
    /// `worst / rate`: the constant the bound needs at this `alpha`.
    pub fitted_constant: f64,
    /// For the finite spectrum: `|uniform over beta directions - beta log(1 + alpha c0^2 / beta)|`.
    pub equality_error: Option<f64>,
}

/// Potential `log det(alpha E_nu[phi phi^T] + I)` over many `nu` on the unit
/// ball of the spectrum-weighted feature space.
pub fn check_logdet_potential<R: Rng + ?Sized>(
    spectrum: &SyntheticSpectrum,
    alpha: f64,
    n_dirs: usize,
    rng: &mut R,
) -> Result<LogdetReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config("alpha must be positive".into()));
    }
    spectrum.validate()?;
    let mu = spectrum.eigenvalues();
    let lambdas: Vec<f64> = mu.iter().map(|m| m * m).collect();
    let dim = spectrum.dim;

    let mut random_max: f64 = 0.0;
    for _ in 0..n_dirs {
        let k = rng.random_range(1..=dim.min(16));
        let weights = dirichlet_row(k, 1.0, rng);
        let points: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = util::dot(&g, &g).sqrt().max(f64::MIN_POSITIVE);
                let radius = rng.random::<f64>().powf(0.25);
                g.iter().zip(&mu).map(|(x, m)| m * radius * x / norm).collect()
            })
            .collect();
        random_max = random_max.max(mixture_logdet(&points, &weights, alpha));
    }

    let (mut uniform_basis, mut uniform_basis_k) = (0.0, 1);
    for k in 1..=dim {
        let p: Vec<f64> = (0..dim).map(|i| if i < k { 1.0 / k as f64 } else { 0.0 }).collect();
        let v = diagonal_logdet(&lambdas, &p, alpha);
        if v > uniform_basis {
            uniform_basis = v;
            uniform_basis_k = k;
        }
    }
    let (supremum, _) = water_filling(&lambdas, alpha);
    let supremum_violation = (random_max.max(uniform_basis) - supremum).max(0.0);
    let worst = random_max.max(uniform_basis).max(supremum);
    let rate = spectrum.rate(alpha);
    let equality_error = (spectrum.kind == SpectrumKind::Finite).then(|| {
        let b = spectrum.beta as usize;
        let p: Vec<f64> = (0..dim).map(|i| if i < b { 1.0 / b as f64 } else { 0.0 }).collect();
        let target = spectrum.beta * (alpha * spectrum.c0 * spectrum.c0 / spectrum.beta).ln_1p();
        (diagonal_logdet(&lambdas, &p, alpha) - target).abs()
    });
    Ok(LogdetReport {
        spectrum: *spectrum,
        alpha,
        n_dirs,
        tail_mass: spectrum.tail_mass(),
        random_max,
        uniform_basis,
        uniform_basis_k,
        supremum,
        supremum_violation,
        worst,
        rate,
        fitted_constant: worst / rate,
        equality_error,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogdetSuiteReport {
    pub reports: Vec<LogdetReport>,
    /// max/min of the fitted constants across `alpha`.
    pub constant_spread: f64,
    pub spread_limit: f64,
    pub equality_tolerance: f64,
    pub passed: bool,
}

pub const LOGDET_SPREAD_LIMIT: f64 = 3.0;
pub const LOGDET_EQUALITY_TOL: f64 = 1e-9;

/// Run the potential check for each `alpha` and judge the regime: the finite
/// case by its equality instance, the decaying cases by how stable the
/// fitted constant stays across `alpha`.
pub fn check_logdet_suite<R: Rng + ?Sized>(
    spectrum: &SyntheticSpectrum,
    alphas: &[f64],
    n_dirs: usize,
    rng: &mut R,
) -> Result<LogdetSuiteReport> {
    if alphas.is_empty() {
        return Err(Error::Config("need at least one alpha".into()));
    }
    let reports: Vec<LogdetReport> = alphas
        .iter()
        .map(|&a| check_logdet_potential(spectrum, a, n_dirs, rng))
        .collect::<Result<_>>()?;
    let consts: Vec<f64> = reports.iter().map(|r| r.fitted_constant).collect();
    let max = consts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    let constant_spread = if min > 0.0 { max / min } else { f64::INFINITY };
    let sound = reports.iter().all(|r| r.supremum_violation <= 1e-9 * (1.0 + r.supremum));
    let passed = sound
        && match spectrum.kind {
            SpectrumKind::Finite => reports.iter().all(|r| r.equality_error.is_some_and(|e| e <= LOGDET_EQUALITY_TOL)),
            _ => constant_spread < LOGDET_SPREAD_LIMIT,
        };
    Ok(LogdetSuiteReport {
        reports,
        constant_spread,
        spread_limit: LOGDET_SPREAD_LIMIT,
        equality_tolerance: LOGDET_EQUALITY_TOL,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Bonus concentration

/// A finite mixture of fixed feature vectors, so its second moment is exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturePopulation {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl FeaturePopulation {
    pub fn point_mass(atom: Vec<f64>) -> Self {
        FeaturePopulation {
            atoms: vec![atom],
            weights: vec![1.0],
        }
    }

    /// `n_atoms` probability vectors of length `dim` with Dirichlet weights.
    pub fn random_simplex<R: Rng + ?Sized>(dim: usize, n_atoms: usize, rng: &mut R) -> Self {
        FeaturePopulation {
            atoms: (0..n_atoms).map(|_| dirichlet_row(dim, 1.0, rng)).collect(),
            weights: dirichlet_row(n_atoms, 5.0, rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, Vec::len)
    }

    pub fn second_moment(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            let v = DVector::from_column_slice(a);
            m += *w * &v * v.transpose();
        }
        m
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub dim: usize,
    pub n: usize,
    pub lambda: f64,
    pub n_dirs: usize,
    pub population: FeaturePopulation,
    /// Draw count of each atom.
    pub counts: Vec<usize>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub band: (f64, f64),
    pub passed: bool,
}

pub const CONCENTRATION_BAND: (f64, f64) = (0.8, 1.25);

/// Ratio of `x^T (sum phi phi^T + lambda I) x` to `x^T (n Sigma + lambda I) x`
/// over random unit directions, with features drawn from a random mixture of
/// `2 dim` simplex vectors.
pub fn check_bonus_concentration<R: Rng + ?Sized>(
    dim: usize,
    n: usize,
    lambda: f64,
    n_dirs: usize,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    if dim == 0 {
        return Err(Error::Config("dim must be positive".into()));
    }
    let population = FeaturePopulation::random_simplex(dim, 2 * dim, rng);
    check_bonus_concentration_with(population, n, lambda, n_dirs, rng)
}

pub fn check_bonus_concentration_with<R: Rng + ?Sized>(
    population: FeaturePopulation,
    n: usize,
    lambda: f64,
    n_dirs: usize,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    let dim = population.dim();
    if dim == 0 || population.atoms.len() != population.weights.len() {
        return Err(Error::Config("population needs atoms of positive dimension, one weight each".into()));
    }
    util::check_distribution("population weights", &population.weights, 1e-9)?;
    if !(lambda > 0.0) || n_dirs == 0 {
        return Err(Error::Config("lambda must be positive and n_dirs at least 1".into()));
    }
    let mut counts = vec![0usize; population.atoms.len()];
    for _ in 0..n {
        counts[sample_categorical(&population.weights, rng)] += 1;
    }
    let mut empirical = DMatrix::<f64>::identity(dim, dim) * lambda;
    for (a, &c) in population.atoms.iter().zip(&counts) {
        let v = DVector::from_column_slice(a);
        empirical += c as f64 * &v * v.transpose();
    }
    let population_form = population.second_moment() * n as f64 + DMatrix::identity(dim, dim) * lambda;
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..n_dirs {
        let x = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let ratio = (x.transpose() * &empirical * &x)[(0, 0)] / (x.transpose() * &population_form * &x)[(0, 0)];
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let band = CONCENTRATION_BAND;
    Ok(ConcentrationReport {
        dim,
        n,
        lambda,
        n_dirs,
        population,
        counts,
        min_ratio,
        max_ratio,
        band,
        passed: min_ratio >= band.0 && max_ratio <= band.1,
    })
}

// ---------------------------------------------------------------------------
// Maximum-likelihood rate

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MleRateReport {
    pub block: BlockMdpSpec,
    pub fit: FitConfig,
    pub sample_sizes: Vec<usize>,
    pub n_seeds: usize,
    /// `errors[i][k]`: squared-L1 error at `sample_sizes[i]`, seed `k`.
    pub errors: Vec<Vec<f64>>,
    pub mean_errors: Vec<f64>,
    /// Least-squares slope of `log mean_error` against `log n`.
    pub slope: f64,
    pub slope_band: (f64, f64),
    pub final_error_limit: f64,
    pub passed: bool,
}

pub const MLE_SLOPE_BAND: (f64, f64) = (-1.4, -0.6);
pub const MLE_FINAL_ERROR_LIMIT: f64 = 0.1;

/// Fit on `n` triples with `(s, a)` uniform and measure the squared-L1 model
/// error under the same sampling law, for each `n` and seed.
pub fn check_mle_rate<R: Rng + ?Sized>(
    block: &BlockMdpSpec,
    sample_sizes: &[usize],
    n_seeds: usize,
    fit: &FitConfig,
    rng: &mut R,
) -> Result<MleRateReport> {
    if sample_sizes.is_empty() || sample_sizes.contains(&0) {
        return Err(Error::Config("sample sizes must be positive".into()));
    }
    if sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sample sizes must be increasing".into()));
    }
    if n_seeds == 0 {
        return Err(Error::Config("need at least one seed".into()));
    }
    let (mdp, _) = env::build_random_block_mdp(block)?;
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let weighting = vec![1.0 / (ns * na) as f64; ns * na];
    let seed_streams: Vec<util::SimRng> = (0..n_seeds).map(|_| fork(rng)).collect();
    let mut errors = vec![Vec::with_capacity(n_seeds); sample_sizes.len()];
    for mut stream in seed_streams {
        for (i, &n) in sample_sizes.iter().enumerate() {
            let mut data = TransitionDataset::new(ns, na);
            for _ in 0..n {
                let s = stream.random_range(0..ns);
                let a = stream.random_range(0..na);
                let s2 = mdp.sample_next(s, a, &mut stream);
                data.push(s, a, s2)?;
            }
            let model = latent_model::fit(&data, block.n_latent, fit, &mut stream)?;
            errors[i].push(latent_model::tv_error(&model, &mdp, &weighting)?);
        }
    }
    let mean_errors: Vec<f64> = errors.iter().map(|e| e.iter().sum::<f64>() / e.len() as f64).collect();
    let xs: Vec<f64> = sample_sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mean_errors.iter().map(|e| e.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let last = *mean_errors.last().expect("nonempty");
    let passed = slope >= MLE_SLOPE_BAND.0 && slope <= MLE_SLOPE_BAND.1 && last <= MLE_FINAL_ERROR_LIMIT;
    Ok(MleRateReport {
        block: block.clone(),
        fit: fit.clone(),
        sample_sizes: sample_sizes.to_vec(),
        n_seeds,
        errors,
        mean_errors,
        slope,
        slope_band: MLE_SLOPE_BAND,
        final_error_limit: MLE_FINAL_ERROR_LIMIT,
        passed,
    })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

// ---------------------------------------------------------------------------
// Gaussian factorization

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianFactorizationReport {
    pub n_grid: usize,
    pub sigma: f64,
    pub f_slope: f64,
    /// `c` in the factors `exp(-c (z - .)^2 / sigma^2)`.
    pub factor_precision: f64,
    pub interior_rows: Vec<usize>,
    pub row_tv: Vec<f64>,
    pub max_row_tv: f64,
    /// Same check with factor precision 2.
    pub precision_two_max_row_tv: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const GAUSSIAN_TV_TOL: f64 = 0.05;
/// Rows whose mean lies closer than this many `sigma` to an end are excluded.
pub const GAUSSIAN_MARGIN: f64 = 4.0;

/// Cell centres of `[0, 1]` cut into `n_grid` cells.
fn grid(n_grid: usize) -> Vec<f64> {
    (0..n_grid).map(|j| (j as f64 + 0.5) / n_grid as f64).collect()
}

fn gaussian_rows(centres: &[f64], points: &[f64], coeff: f64) -> Vec<Vec<f64>> {
    centres
        .iter()
        .map(|&c| {
            let row: Vec<f64> = points.iter().map(|&x| (-coeff * (x - c) * (x - c)).exp()).collect();
            let total: f64 = row.iter().sum();
            row.iter().map(|v| v / total).collect()
        })
        .collect()
}

/// Per-row TV between `sum_z p(z|s) p(s'|z)` and the discretized
/// `N(f(s), sigma^2)` on the grid, for factors
/// `p(z|s) ∝ exp(-c (z - f(s))^2 / sigma^2)` and `p(s'|z) ∝ exp(-c (z - s')^2 / sigma^2)`.
/// `f(s) = 1/2 + f_slope (s - 1/2)`.
fn factorization_tv(n_grid: usize, sigma: f64, f_slope: f64, precision: f64) -> (Vec<usize>, Vec<f64>) {
    let x = grid(n_grid);
    let f: Vec<f64> = x.iter().map(|&s| 0.5 + f_slope * (s - 0.5)).collect();
    let coeff = precision / (sigma * sigma);
    let p_z = gaussian_rows(&f, &x, coeff);
    let p_next = gaussian_rows(&x, &x, coeff);
    let target = gaussian_rows(&f, &x, 1.0 / (2.0 * sigma * sigma));
    let margin = GAUSSIAN_MARGIN * sigma;
    let mut interior: Vec<usize> = (0..n_grid).filter(|&s| f[s] >= margin && f[s] <= 1.0 - margin).collect();
    if interior.is_empty() {
        // Flat limit: sigma spans the whole interval, so no row is interior.
        interior = (0..n_grid).collect();
    }
    let tvs = interior
        .iter()
        .map(|&s| {
            let mut composed = vec![0.0; n_grid];
            for (z, &pz) in p_z[s].iter().enumerate() {
                for (c, &pn) in composed.iter_mut().zip(&p_next[z]) {
                    *c += pz * pn;
                }
            }
            util::tv_distance(&composed, &target[s])
        })
        .collect();
    (interior, tvs)
}

/// Precision 1 makes the composition exactly `N(f, sigma^2)` in the continuum;
/// precision 2 gives `N(f, sigma^2 / 2)` and is reported for comparison.
pub fn check_gaussian_factorization(
    n_grid: usize,
    sigma: f64,
    f_slope: f64,
    factor_precision: f64,
) -> Result<GaussianFactorizationReport> {
    if n_grid < 16 {
        return Err(Error::Config(format!("n_grid must be at least 16, got {n_grid}")));
    }
    if !(sigma > 0.0) || !(factor_precision > 0.0) {
        return Err(Error::Config("sigma and factor precision must be positive".into()));
    }
    let spacing = 1.0 / n_grid as f64;
    if spacing > sigma {
        return Err(Error::Config(format!(
            "grid spacing {spacing} is coarser than sigma {sigma}"
        )));
    }
    let (interior_rows, row_tv) = factorization_tv(n_grid, sigma, f_slope, factor_precision);
    let (_, two) = factorization_tv(n_grid, sigma, f_slope, 2.0);
    let max_row_tv = row_tv.iter().cloned().fold(0.0, f64::max);
    Ok(GaussianFactorizationReport {
        n_grid,
        sigma,
        f_slope,
        factor_precision,
        interior_rows,
        row_tv,
        max_row_tv,
        precision_two_max_row_tv: two.iter().cloned().fold(0.0, f64::max),
        tolerance: GAUSSIAN_TV_TOL,
        passed: max_row_tv < GAUSSIAN_TV_TOL,
    })
}

// ---------------------------------------------------------------------------
// Random-feature kernel fidelity

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RffReport {
    pub bandwidth: f64,
    pub embed_dim: usize,
    pub n_points: usize,
    pub feature_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    /// `max_errors[i][k]`: sup over point pairs at `feature_counts[i]`, seed `k`.
    pub max_errors: Vec<Vec<f64>>,
    pub median_errors: Vec<f64>,
    /// `median_errors[i] / median_errors[i + 1]`.
    pub reductions: Vec<f64>,
    pub required_reduction: f64,
    pub passed: bool,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Max kernel error over all pairs of `n_points` points uniform in
/// `[-1, 1]^embed_dim`; each seed fixes the points and the feature draws.
/// Feature counts must grow by 4x per step; the seed-median error must at
/// least halve at each step.
pub fn check_rff_fidelity(
    bandwidth: f64,
    embed_dim: usize,
    n_points: usize,
    feature_counts: &[usize],
    seeds: &[u64],
) -> Result<RffReport> {
    if feature_counts.len() < 2 || seeds.is_empty() || n_points == 0 {
        return Err(Error::Config("need two feature counts, a seed and a point".into()));
    }
    if feature_counts.windows(2).any(|w| w[1] != 4 * w[0]) {
        return Err(Error::Config("feature counts must grow by a factor of 4".into()));
    }
    let mut max_errors = vec![Vec::with_capacity(seeds.len()); feature_counts.len()];
    for &seed in seeds {
        let mut rng = util::seeded(seed);
        let points: Vec<Vec<f64>> = (0..n_points)
            .map(|_| (0..embed_dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        for (i, &m) in feature_counts.iter().enumerate() {
            let rff = build_rff(bandwidth, m, embed_dim, &mut rng)?;
            let feats: Vec<Vec<f64>> = points.iter().map(|p| rff.features(p)).collect();
            let mut worst: f64 = 0.0;
            for a in 0..n_points {
                for b in a..n_points {
                    let est = util::dot(&feats[a], &feats[b]) / m as f64;
                    worst = worst.max((est - gaussian_kernel(&points[a], &points[b], bandwidth)).abs());
                }
            }
            max_errors[i].push(worst);
        }
    }
    let median_errors: Vec<f64> = max_errors.iter().map(|e| median(e)).collect();
    let reductions: Vec<f64> = median_errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(RffReport {
        bandwidth,
        embed_dim,
        n_points,
        feature_counts: feature_counts.to_vec(),
        seeds: seeds.to_vec(),
        passed: reductions.iter().all(|&r| r >= 2.0),
        max_errors,
        median_errors,
        reductions,
        required_reduction: 2.0,
    })
}
