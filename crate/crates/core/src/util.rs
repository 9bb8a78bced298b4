//! Small sampling and validation helpers shared across modules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

/// Tolerance on row sums for stochastic matrices.
pub const STOCHASTIC_TOL: f64 = 1e-12;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Split off an independent stream from `rng`.
pub fn fork<R: Rng + ?Sized>(rng: &mut R) -> SimRng {
    ChaCha8Rng::seed_from_u64(rng.random())
}

/// Inverse-CDF draw from a probability vector. Falls back to the last index
/// with positive mass when rounding leaves `u` past the total.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// One Dirichlet(concentration, ..., concentration) row of length `len`.
pub fn dirichlet_row<R: Rng + ?Sized>(len: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("concentration checked by caller");
    loop {
        let mut row: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        let total: f64 = row.iter().sum();
        if total > 0.0 && total.is_finite() {
            row.iter_mut().for_each(|x| *x /= total);
            return row;
        }
    }
}

pub fn check_distribution(what: &str, row: &[f64], tol: f64) -> Result<()> {
    if let Some(bad) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::param(format!("{what}: entry {bad} is not a probability")));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::param(format!("{what}: sums to {total}, expected 1")));
    }
    Ok(())
}

pub fn check_stochastic_rows(what: &str, data: &[f64], width: usize, tol: f64) -> Result<()> {
    for (i, row) in data.chunks(width).enumerate() {
        check_distribution(&format!("{what} row {i}"), row, tol)?;
    }
    Ok(())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Total-variation distance, half the L1 distance.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * l1_distance(a, b)
}

pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn to_matrix(rows: &[f64], width: usize) -> Vec<Vec<f64>> {
    rows.chunks(width).map(<[f64]>::to_vec).collect()
}

pub(crate) fn from_matrix(what: &str, rows: &[Vec<f64>], height: usize, width: usize) -> Result<Vec<f64>> {
    if rows.len() != height {
        return Err(Error::param(format!("{what}: expected {height} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(height * width);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::param(format!(
                "{what}: row {i} has length {}, expected {width}",
                row.len()
            )));
        }
        out.extend_from_slice(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categorical_respects_zero_mass() {
        let mut rng = seeded(3);
        for _ in 0..1000 {
            assert_ne!(sample_categorical(&[0.5, 0.0, 0.5], &mut rng), 1);
        }
    }

    #[test]
    fn dirichlet_rows_are_distributions() {
        let mut rng = seeded(5);
        for c in [0.05, 1.0, 20.0] {
            let row = dirichlet_row(7, c, &mut rng);
            check_distribution("row", &row, 1e-12).unwrap();
        }
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_lowest(&[2.0, 2.0]), 0);
    }
}
