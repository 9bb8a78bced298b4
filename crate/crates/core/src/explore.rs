//! Regularized feature covariance with rank-one inverse updates, and the
//! elliptical-potential bonus used for optimism (online) and pessimism
//! (offline).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Rank-one updates between full re-inversions.
pub const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone)]
pub struct CovarianceState {
    dim: usize,
    sigma: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    lambda: f64,
    count: usize,
    since_refactor: usize,
}

impl CovarianceState {
    /// `sigma = lambda I`.
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("covariance dimension must be positive"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda must be positive"));
        }
        Ok(CovarianceState {
            dim,
            sigma: DMatrix::identity(dim, dim) * lambda,
            sigma_inv: DMatrix::identity(dim, dim) / lambda,
            lambda,
            count: 0,
            since_refactor: 0,
        })
    }

    /// `sigma += phi phi^T`, keeping the inverse current by Sherman-Morrison.
    pub fn update(&mut self, phi: &FeatureVector) -> Result<()> {
        self.check_dim(phi)?;
        self.count += 1;
        if phi.0.iter().all(|&x| x == 0.0) {
            return Ok(());
        }
        let u = DVector::from_column_slice(&phi.0);
        self.sigma += &u * u.transpose();
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            return self.refactor();
        }
        let inv_u = &self.sigma_inv * &u;
        let denom = 1.0 + u.dot(&inv_u);
        if !(denom > 0.0) {
            return Err(Error::Numeric(format!("rank-one update denominator {denom} is not positive")));
        }
        self.sigma_inv -= (&inv_u * inv_u.transpose()) / denom;
        symmetrize(&mut self.sigma_inv);
        Ok(())
    }

    /// `lambda I + sum_i phi_i phi_i^T`, inverted directly.
    pub fn rebuild(features: &[FeatureVector], dim: usize, lambda: f64) -> Result<Self> {
        Self::rebuild_weighted(features.iter().map(|f| (f, 1.0)), dim, lambda)
    }

    /// `lambda I + sum_i c_i phi_i phi_i^T` for nonnegative multiplicities.
    pub fn rebuild_weighted<'a, I>(features: I, dim: usize, lambda: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a FeatureVector, f64)>,
    {
        let mut state = CovarianceState::new(dim, lambda)?;
        let mut total = 0.0;
        for (phi, c) in features {
            state.check_dim(phi)?;
            if c < 0.0 {
                return Err(Error::param("feature multiplicity must be nonnegative"));
            }
            let u = DVector::from_column_slice(&phi.0);
            state.sigma += c * &u * u.transpose();
            total += c;
        }
        state.count = total.round() as usize;
        state.refactor()?;
        Ok(state)
    }

    fn refactor(&mut self) -> Result<()> {
        symmetrize(&mut self.sigma);
        let chol = self
            .sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric("covariance lost positive definiteness".into()))?;
        self.sigma_inv = chol.inverse();
        symmetrize(&mut self.sigma_inv);
        self.since_refactor = 0;
        Ok(())
    }

    fn check_dim(&self, phi: &FeatureVector) -> Result<()> {
        if phi.dim() != self.dim {
            return Err(Error::param(format!(
                "feature has dimension {}, covariance has {}",
                phi.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn sigma_inv(&self) -> &DMatrix<f64> {
        &self.sigma_inv
    }

    /// `phi^T sigma^{-1} phi`, clamped at zero.
    pub fn quadratic_form(&self, phi: &FeatureVector) -> Result<f64> {
        self.check_dim(phi)?;
        let u = DVector::from_column_slice(&phi.0);
        Ok(u.dot(&(&self.sigma_inv * &u)).max(0.0))
    }

    /// `log det(sigma / lambda) = log det(I + (1/lambda) sum phi phi^T)`.
    pub fn log_det_ratio(&self) -> Result<f64> {
        let chol = (&self.sigma / self.lambda)
            .cholesky()
            .ok_or_else(|| Error::Numeric("covariance lost positive definiteness".into()))?;
        Ok(2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>())
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

pub fn cov_init(dim: usize, lambda: f64) -> Result<CovarianceState> {
    CovarianceState::new(dim, lambda)
}

pub fn cov_update(state: &CovarianceState, phi: &FeatureVector) -> Result<CovarianceState> {
    let mut next = state.clone();
    next.update(phi)?;
    Ok(next)
}

pub fn cov_rebuild(features: &[FeatureVector], dim: usize, lambda: f64) -> Result<CovarianceState> {
    CovarianceState::rebuild(features, dim, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonusMode {
    /// `min(alpha * sqrt(phi^T sigma^{-1} phi), clip)`.
    NormClipped,
    /// `alpha * phi^T sigma^{-1} phi`.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonusParams {
    pub alpha: f64,
    pub lambda: f64,
    pub mode: BonusMode,
    pub clip: f64,
}

impl Default for BonusParams {
    fn default() -> Self {
        BonusParams {
            alpha: 1.0,
            lambda: 1.0,
            mode: BonusMode::NormClipped,
            clip: 2.0,
        }
    }
}

pub fn bonus(state: &CovarianceState, phi: &FeatureVector, params: &BonusParams) -> Result<f64> {
    let quad = state.quadratic_form(phi)?;
    Ok(match params.mode {
        BonusMode::NormClipped => (params.alpha * quad.sqrt()).min(params.clip),
        BonusMode::Quadratic => params.alpha * quad,
    })
}

/// Constants hidden inside the Theta(.) of the confidence width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaConstants {
    pub c: f64,
    pub c_norm: f64,
}

impl Default for AlphaConstants {
    fn default() -> Self {
        AlphaConstants { c: 0.1, c_norm: 1.0 }
    }
}

/// `c * gamma/(1-gamma) * sqrt(|A| (log|P| + log(n/delta)) + lambda C)`.
pub fn alpha_schedule(
    n: usize,
    gamma: f64,
    n_actions: usize,
    lambda: f64,
    model_class_log: f64,
    delta: f64,
    consts: &AlphaConstants,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("episode index starts at 1"));
    }
    if !(0.0..1.0).contains(&gamma) || !(delta > 0.0) {
        return Err(Error::param("need gamma in [0, 1) and delta > 0"));
    }
    let inner = n_actions as f64 * (model_class_log + (n as f64 / delta).ln()) + lambda * consts.c_norm;
    Ok(consts.c * gamma / (1.0 - gamma) * inner.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{dirichlet_row, seeded};
    use rand::Rng;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    #[test]
    fn init_is_scaled_identity() {
        let s = cov_init(3, 2.0).unwrap();
        assert_eq!(s.sigma(), &(DMatrix::identity(3, 3) * 2.0));
        let s = cov_init(5, 0.5).unwrap();
        assert_eq!(s.sigma_inv(), &(DMatrix::identity(5, 5) * 2.0));
        assert_eq!(s.count(), 0);
        assert!(cov_init(3, 0.0).is_err());
    }

    #[test]
    fn zero_feature_only_counts() {
        let s = cov_init(3, 1.0).unwrap();
        let t = cov_update(&s, &FeatureVector::zeros(3)).unwrap();
        assert_eq!(t.count(), 1);
        assert_eq!(t.sigma(), s.sigma());
        assert_eq!(t.sigma_inv(), s.sigma_inv());
    }

    #[test]
    fn single_axis_update() {
        let s = cov_init(3, 1.0).unwrap();
        let t = cov_update(&s, &FeatureVector(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(t.sigma()[(0, 0)], 2.0);
        assert!((t.sigma_inv()[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(t.sigma_inv()[(1, 1)], 1.0);
    }

    #[test]
    fn incremental_inverse_tracks_direct_inverse() {
        let mut rng = seeded(8);
        let mut s = cov_init(8, 1.0).unwrap();
        for _ in 0..200 {
            let phi = FeatureVector((0..8).map(|_| rng.random_range(-1.0..1.0)).collect());
            s.update(&phi).unwrap();
        }
        let direct = s.sigma().clone().try_inverse().unwrap();
        assert!(max_abs(&(s.sigma_inv() - direct)) < 1e-8);
        let ident = s.sigma() * s.sigma_inv();
        assert!(max_abs(&(ident - DMatrix::identity(8, 8))) < 1e-8);
    }

    #[test]
    fn rebuild_matches_incremental() {
        assert_eq!(cov_rebuild(&[], 4, 1.5).unwrap().sigma(), cov_init(4, 1.5).unwrap().sigma());
        let mut rng = seeded(9);
        let feats: Vec<FeatureVector> = (0..500).map(|_| FeatureVector(dirichlet_row(6, 1.0, &mut rng))).collect();
        let batch = cov_rebuild(&feats, 6, 1.0).unwrap();
        let mut inc = cov_init(6, 1.0).unwrap();
        for f in &feats {
            inc.update(f).unwrap();
        }
        assert!(max_abs(&(batch.sigma() - inc.sigma())) < 1e-9);
        assert!(max_abs(&(batch.sigma_inv() - inc.sigma_inv())) < 1e-9);
        let one = cov_rebuild(&feats[..1], 6, 1.0).unwrap();
        let single = cov_update(&cov_init(6, 1.0).unwrap(), &feats[0]).unwrap();
        assert!(max_abs(&(one.sigma_inv() - single.sigma_inv())) < 1e-10);
    }

    #[test]
    fn bonus_without_data_is_feature_norm() {
        let s = cov_init(4, 1.0).unwrap();
        let phi = FeatureVector(vec![0.1, 0.2, 0.3, 0.4]);
        let norm = phi.0.iter().map(|x| x * x).sum::<f64>().sqrt();
        let p = BonusParams::default();
        assert!((bonus(&s, &phi, &p).unwrap() - norm).abs() < 1e-15);
        let zero = FeatureVector::zeros(4);
        assert_eq!(bonus(&s, &zero, &p).unwrap(), 0.0);
        let q = BonusParams {
            mode: BonusMode::Quadratic,
            ..p
        };
        assert_eq!(bonus(&s, &zero, &q).unwrap(), 0.0);
    }

    #[test]
    fn bonus_matches_dense_solve() {
        let mut rng = seeded(10);
        let mut s = cov_init(4, 1.0).unwrap();
        for _ in 0..50 {
            s.update(&FeatureVector((0..4).map(|_| rng.random::<f64>()).collect())).unwrap();
        }
        let phi = FeatureVector((0..4).map(|_| rng.random::<f64>()).collect());
        let x = s.sigma().clone().lu().solve(&DVector::from_column_slice(&phi.0)).unwrap();
        let dense = DVector::from_column_slice(&phi.0).dot(&x);
        let p = BonusParams {
            alpha: 0.7,
            mode: BonusMode::Quadratic,
            ..BonusParams::default()
        };
        assert!((bonus(&s, &phi, &p).unwrap() - 0.7 * dense).abs() < 1e-10);
    }

    #[test]
    fn bonus_shrinks_with_repeated_data() {
        let phi = FeatureVector(vec![0.6, 0.8, 0.0]);
        let (alpha, lambda) = (1.5, 1.0);
        let p = BonusParams {
            alpha,
            lambda,
            mode: BonusMode::Quadratic,
            clip: 2.0,
        };
        let mut s = cov_init(3, lambda).unwrap();
        let mut prev = bonus(&s, &phi, &p).unwrap();
        for _ in 0..1000 {
            s.update(&phi).unwrap();
            let b = bonus(&s, &phi, &p).unwrap();
            assert!(b <= prev + 1e-12);
            assert!(b < lambda * alpha / s.count() as f64 + 1e-9);
            prev = b;
        }
    }

    #[test]
    fn alpha_schedule_cases() {
        let c = AlphaConstants::default();
        assert_eq!(alpha_schedule(5, 0.0, 4, 1.0, 0.0, 0.1, &c).unwrap(), 0.0);
        let mut prev = 0.0;
        for n in 1..100 {
            let a = alpha_schedule(n, 0.9, 2, 1.0, 0.0, 0.1, &c).unwrap();
            assert!(a >= prev);
            prev = a;
        }
        let want = 0.1 * (0.95 / 0.05) * (4.0 * (10.0f64 / 0.1).ln() + 1.0).sqrt();
        let got = alpha_schedule(10, 0.95, 4, 1.0, 0.0, 0.1, &c).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!(alpha_schedule(0, 0.9, 2, 1.0, 0.0, 0.1, &c).is_err());
    }
}
