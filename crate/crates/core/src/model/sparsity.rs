//! Monte Carlo study of how sparse networks drawn from the prior are.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::types::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::sigmoid;

/// `{0.05, 0.10, ..., 0.95}`.
pub fn default_weight_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparsityStudyResult {
    pub n_draws: usize,
    pub w_grid: Vec<f64>,
    /// `counts[j][k]`: genes whose estimated prior inclusion is at least 0.5
    /// for TF `j` when every weight equals `w_grid[k]`.
    pub counts: Vec<Vec<usize>>,
    /// Per grid point, the genes x TFs Monte Carlo inclusion frequencies.
    pub estimates: Vec<Matrix>,
}

/// For each weight in `w_grid` (shared by all TFs), draws `n_draws` prior
/// networks and tabulates per TF the number of genes included in at least
/// half of them.
///
/// Cells are independent under the prior, so the count of draws with
/// `C_ij = 1` is generated as a single `Binomial(n_draws, p_ij)` variate.
pub fn prior_sparsity_study<R: Rng + ?Sized>(
    dataset: &Dataset,
    w_grid: &[f64],
    n_draws: usize,
    rng: &mut R,
) -> Result<SparsityStudyResult> {
    if w_grid.is_empty() {
        return Err(Error::invalid("empty weight grid"));
    }
    if n_draws == 0 {
        return Err(Error::invalid("n_draws must be at least 1"));
    }
    if let Some(bad) = w_grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::invalid(format!("weight {bad} outside [0, 1]")));
    }
    let (n, j_count) = (dataset.n_genes(), dataset.n_tfs());
    let mut counts = vec![vec![0usize; w_grid.len()]; j_count];
    let mut estimates = Vec::with_capacity(w_grid.len());
    for (k, &w) in w_grid.iter().enumerate() {
        let mut est = Matrix::zeros(n, j_count);
        for i in 0..n {
            for (j, tf_counts) in counts.iter_mut().enumerate() {
                let p = sigmoid(dataset.prior_log_odds_at(i, j, w));
                let hits = Binomial::new(n_draws as u64, p)
                    .map_err(|e| Error::invalid(e.to_string()))?
                    .sample(rng);
                let freq = hits as f64 / n_draws as f64;
                est.set(i, j, freq);
                if freq >= 0.5 {
                    tf_counts[k] += 1;
                }
            }
        }
        estimates.push(est);
    }
    Ok(SparsityStudyResult {
        n_draws,
        w_grid: w_grid.to_vec(),
        counts,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClampPolicy, DatasetParts};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset(b: Matrix, m: Matrix) -> Dataset {
        let (n, j) = (b.rows(), b.cols());
        Dataset::new(
            DatasetParts {
                gene_ids: (0..n).map(|i| format!("g{i}")).collect(),
                tf_ids: (0..j).map(|i| format!("t{i}")).collect(),
                experiment_ids: vec!["e".into()],
                g: Matrix::zeros(n, 1),
                f: Matrix::zeros(j, 1),
                b,
                m,
                tf_gene_map: vec![None; j],
            },
            ClampPolicy::default(),
        )
        .unwrap()
    }

    #[test]
    fn below_half_gives_no_targets() {
        let ds = dataset(Matrix::filled(30, 3, 0.4), Matrix::filled(30, 3, 0.4));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = prior_sparsity_study(&ds, &default_weight_grid(), 10_000, &mut rng).unwrap();
        assert!(r.counts.iter().flatten().all(|&c| c == 0));
    }

    #[test]
    fn above_half_gives_all_targets() {
        let ds = dataset(Matrix::filled(30, 3, 0.6), Matrix::filled(30, 3, 0.6));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = prior_sparsity_study(&ds, &default_weight_grid(), 10_000, &mut rng).unwrap();
        assert!(r.counts.iter().flatten().all(|&c| c == 30));
    }

    #[test]
    fn strong_binding_dominates_at_high_weight() {
        let mut b = Matrix::filled(50, 1, 0.01);
        for i in 0..10 {
            b.set(i, 0, 0.99);
        }
        let ds = dataset(b, Matrix::filled(50, 1, 0.01));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = prior_sparsity_study(&ds, &[0.95], 10_000, &mut rng).unwrap();
        assert_eq!(r.counts[0][0], 10);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let ds = dataset(Matrix::filled(2, 1, 0.5), Matrix::filled(2, 1, 0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(prior_sparsity_study(&ds, &[], 10, &mut rng).is_err());
    }
}
