//! Expression model evaluation and the incrementally maintained residuals
//! used by the Gibbs sweep.
//!
//! The prediction for gene `i` in experiment `t` is
//! `alpha_i + sum_j beta_j C_ij f_jt + sum_{j<k} gamma_jk C_ij C_ik f_jt f_kt`,
//! with the pair sum dropped when interactions are disabled.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{pair_index, Dataset, ModelParams, NetworkState};

fn check_state(dataset: &Dataset, network: &NetworkState, params: &ModelParams) -> Result<()> {
    if network.n_genes() != dataset.n_genes() || network.n_tfs() != dataset.n_tfs() {
        return Err(Error::DimensionMismatch(format!(
            "network is {}x{}, dataset is {}x{}",
            network.n_genes(),
            network.n_tfs(),
            dataset.n_genes(),
            dataset.n_tfs()
        )));
    }
    params.validate(dataset.n_genes(), dataset.n_tfs())
}

/// Fills `out` with the predicted expression row of gene `i`.
pub(crate) fn predicted_row(f: &Matrix, c_row: &[u8], alpha_i: f64, beta: &[f64], gamma: &[f64], out: &mut [f64]) {
    out.fill(alpha_i);
    let n_tfs = beta.len();
    let active: Vec<usize> = (0..n_tfs).filter(|&j| c_row[j] == 1).collect();
    for &j in &active {
        let bj = beta[j];
        for (o, &fj) in out.iter_mut().zip(f.row(j)) {
            *o += bj * fj;
        }
    }
    if !gamma.is_empty() {
        for (a, &j) in active.iter().enumerate() {
            for &k in &active[a + 1..] {
                let gjk = gamma[pair_index(j, k, n_tfs)];
                for ((o, &fj), &fk) in out.iter_mut().zip(f.row(j)).zip(f.row(k)) {
                    *o += gjk * fj * fk;
                }
            }
        }
    }
}

/// Expected expression of gene `i` in experiment `t`.
pub fn predicted_expression(
    dataset: &Dataset,
    network: &NetworkState,
    params: &ModelParams,
    i: usize,
    t: usize,
) -> Result<f64> {
    check_state(dataset, network, params)?;
    if i >= dataset.n_genes() {
        return Err(Error::IndexOutOfRange {
            what: "gene",
            index: i,
            len: dataset.n_genes(),
        });
    }
    if t >= dataset.n_experiments() {
        return Err(Error::IndexOutOfRange {
            what: "experiment",
            index: t,
            len: dataset.n_experiments(),
        });
    }
    let mut row = vec![0.0; dataset.n_experiments()];
    predicted_row(
        dataset.f(),
        network.row(i),
        params.alpha[i],
        &params.beta,
        &params.gamma,
        &mut row,
    );
    Ok(row[t])
}

/// Full residual matrix `g - predicted`.
pub fn residuals(dataset: &Dataset, network: &NetworkState, params: &ModelParams) -> Result<Matrix> {
    check_state(dataset, network, params)?;
    let mut r = Matrix::zeros(dataset.n_genes(), dataset.n_experiments());
    let mut pred = vec![0.0; dataset.n_experiments()];
    for i in 0..dataset.n_genes() {
        predicted_row(
            dataset.f(),
            network.row(i),
            params.alpha[i],
            &params.beta,
            &params.gamma,
            &mut pred,
        );
        for ((r, &g), &p) in r.row_mut(i).iter_mut().zip(dataset.g().row(i)).zip(&pred) {
            *r = g - p;
        }
    }
    Ok(r)
}

fn gaussian_log_likelihood(rss: f64, cells: usize, sigma2: f64) -> f64 {
    -0.5 * cells as f64 * (2.0 * PI * sigma2).ln() - rss / (2.0 * sigma2)
}

/// Gaussian log-likelihood of all expression data.
pub fn log_likelihood(dataset: &Dataset, network: &NetworkState, params: &ModelParams) -> Result<f64> {
    if !(params.sigma2 > 0.0) {
        return Err(Error::InvalidState(format!("sigma2 = {}", params.sigma2)));
    }
    let r = residuals(dataset, network, params)?;
    let rss: f64 = r.iter().map(|x| x * x).sum();
    Ok(gaussian_log_likelihood(rss, r.as_slice().len(), params.sigma2))
}

/// Change in the expression row of gene `i` when TF `j` switches on, given the
/// other indicators in `c_row`: `f_jt (beta_j + sum_k gamma_jk f_kt)` over
/// active partners `k != j`.
#[inline]
pub(crate) fn toggle_effect(f: &Matrix, c_row: &[u8], beta: &[f64], gamma: &[f64], j: usize, out: &mut [f64]) {
    let n_tfs = beta.len();
    out.fill(beta[j]);
    if !gamma.is_empty() {
        for k in (0..n_tfs).filter(|&k| k != j && c_row[k] == 1) {
            let gjk = gamma[pair_index(j, k, n_tfs)];
            if gjk != 0.0 {
                for (o, &fk) in out.iter_mut().zip(f.row(k)) {
                    *o += gjk * fk;
                }
            }
        }
    }
    for (o, &fj) in out.iter_mut().zip(f.row(j)) {
        *o *= fj;
    }
}

/// `log L(C_ij = 1) - log L(C_ij = 0)` for one residual row, where `effect`
/// comes from [`toggle_effect`] and `currently_on` is the present value of `C_ij`.
#[inline]
pub(crate) fn toggle_delta_from_effect(res_row: &[f64], effect: &[f64], currently_on: bool, sigma2: f64) -> f64 {
    let mut s = 0.0;
    if currently_on {
        for (&r, &d) in res_row.iter().zip(effect) {
            s += d * (2.0 * r + d);
        }
    } else {
        for (&r, &d) in res_row.iter().zip(effect) {
            s += d * (2.0 * r - d);
        }
    }
    s / (2.0 * sigma2)
}

/// Residuals `g - predicted` kept in step with the sampler state.
#[derive(Clone, Debug)]
pub struct GibbsWorkspace {
    residual: Matrix,
}

impl GibbsWorkspace {
    /// Builds a workspace from a full recompute.
    pub fn new(dataset: &Dataset, network: &NetworkState, params: &ModelParams) -> Result<Self> {
        Ok(GibbsWorkspace {
            residual: residuals(dataset, network, params)?,
        })
    }

    pub(crate) fn from_residual(residual: Matrix) -> Self {
        GibbsWorkspace { residual }
    }

    /// Full recompute of the residuals.
    pub fn refresh(&mut self, dataset: &Dataset, network: &NetworkState, params: &ModelParams) -> Result<()> {
        self.residual = residuals(dataset, network, params)?;
        Ok(())
    }

    /// Compares against a full recompute and resynchronises. Fails if the
    /// incremental residuals drifted by more than `tolerance`.
    pub fn audit(
        &mut self,
        dataset: &Dataset,
        network: &NetworkState,
        params: &ModelParams,
        tolerance: f64,
        sweep: usize,
    ) -> Result<f64> {
        let fresh = residuals(dataset, network, params)?;
        let deviation = fresh.max_abs_diff(&self.residual);
        if !(deviation <= tolerance) {
            return Err(Error::Consistency {
                deviation,
                tolerance,
                sweep,
            });
        }
        self.residual = fresh;
        Ok(deviation)
    }

    pub fn residual(&self) -> &Matrix {
        &self.residual
    }

    pub(crate) fn residual_mut(&mut self) -> &mut Matrix {
        &mut self.residual
    }

    /// Residual sum of squares.
    pub fn residual_sum_squares(&self) -> f64 {
        self.residual.iter().map(|r| r * r).sum()
    }

    /// Log-likelihood from the cached residuals.
    pub fn log_likelihood(&self, sigma2: f64) -> Result<f64> {
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidState(format!("sigma2 = {sigma2}")));
        }
        Ok(gaussian_log_likelihood(
            self.residual_sum_squares(),
            self.residual.as_slice().len(),
            sigma2,
        ))
    }

    /// Log-likelihood difference between `C_ij = 1` and `C_ij = 0`, all else
    /// fixed, in O(T) from the cached residuals.
    pub fn toggle_delta_log_likelihood(
        &self,
        dataset: &Dataset,
        network: &NetworkState,
        params: &ModelParams,
        i: usize,
        j: usize,
    ) -> Result<f64> {
        if i >= dataset.n_genes() || j >= dataset.n_tfs() {
            return Err(Error::IndexOutOfRange {
                what: "cell",
                index: i * dataset.n_tfs() + j,
                len: dataset.n_genes() * dataset.n_tfs(),
            });
        }
        let mut effect = vec![0.0; dataset.n_experiments()];
        toggle_effect(dataset.f(), network.row(i), &params.beta, &params.gamma, j, &mut effect);
        Ok(toggle_delta_from_effect(
            self.residual.row(i),
            &effect,
            network.get(i, j),
            params.sigma2,
        ))
    }

    /// Switches `C_ij` and updates the residual row accordingly.
    pub fn apply_toggle(
        &mut self,
        dataset: &Dataset,
        network: &mut NetworkState,
        params: &ModelParams,
        i: usize,
        j: usize,
        on: bool,
    ) {
        if network.get(i, j) == on {
            return;
        }
        let mut effect = vec![0.0; dataset.n_experiments()];
        toggle_effect(dataset.f(), network.row(i), &params.beta, &params.gamma, j, &mut effect);
        let sign = if on { -1.0 } else { 1.0 };
        for (r, d) in self.residual.row_mut(i).iter_mut().zip(&effect) {
            *r += sign * d;
        }
        network.set(i, j, on);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClampPolicy, DatasetParts};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(g: Matrix, f: Matrix) -> Dataset {
        let (n, t, j) = (g.rows(), g.cols(), f.rows());
        Dataset::new(
            DatasetParts {
                gene_ids: (0..n).map(|i| format!("g{i}")).collect(),
                tf_ids: (0..j).map(|i| format!("t{i}")).collect(),
                experiment_ids: (0..t).map(|i| format!("e{i}")).collect(),
                g,
                f,
                b: Matrix::filled(n, j, 0.5),
                m: Matrix::filled(n, j, 0.5),
                tf_gene_map: vec![None; j],
            },
            ClampPolicy::default(),
        )
        .unwrap()
    }

    fn two_tf_params(alpha: f64) -> ModelParams {
        ModelParams {
            alpha: vec![alpha],
            beta: vec![1.0, 1.0],
            gamma: vec![2.0],
            sigma2: 1.0,
            w: vec![0.5, 0.5],
        }
    }

    #[test]
    fn prediction_spot_values() {
        let ds = dataset(Matrix::zeros(1, 1), Matrix::filled(2, 1, 1.0));
        let p = two_tf_params(0.0);
        let both = NetworkState::from_rows(&[vec![1, 1]]).unwrap();
        let one = NetworkState::from_rows(&[vec![1, 0]]).unwrap();
        let none = NetworkState::from_rows(&[vec![0, 0]]).unwrap();
        assert_eq!(predicted_expression(&ds, &both, &p, 0, 0).unwrap(), 4.0);
        assert_eq!(predicted_expression(&ds, &one, &p, 0, 0).unwrap(), 1.0);
        let p3 = two_tf_params(3.5);
        assert_eq!(predicted_expression(&ds, &none, &p3, 0, 0).unwrap(), 3.5);
        assert!(predicted_expression(&ds, &none, &p3, 1, 0).is_err());
        assert!(predicted_expression(&ds, &none, &p3, 0, 1).is_err());
    }

    #[test]
    fn log_likelihood_spot_values() {
        let ds = dataset(Matrix::filled(1, 1, 2.0), Matrix::zeros(1, 1));
        let net = NetworkState::empty(1, 1);
        let mut p = ModelParams::zeros(1, 1, false);
        p.alpha[0] = 2.0;
        let half_log_2pi = 0.5 * (2.0 * PI).ln();
        assert!((log_likelihood(&ds, &net, &p).unwrap() + half_log_2pi).abs() < 1e-14);
        p.alpha[0] = 0.0;
        assert!((log_likelihood(&ds, &net, &p).unwrap() + half_log_2pi + 2.0).abs() < 1e-14);
        p.sigma2 = 0.0;
        assert!(log_likelihood(&ds, &net, &p).is_err());
    }

    #[test]
    fn toggle_delta_spot_values() {
        let ds = dataset(Matrix::filled(1, 1, 1.0), Matrix::filled(1, 1, 1.0));
        let net = NetworkState::empty(1, 1);
        let mut p = ModelParams::zeros(1, 1, false);
        p.beta[0] = 1.0;
        let ws = GibbsWorkspace::new(&ds, &net, &p).unwrap();
        let d = ws.toggle_delta_log_likelihood(&ds, &net, &p, 0, 0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        p.beta[0] = 0.0;
        let ws = GibbsWorkspace::new(&ds, &net, &p).unwrap();
        assert_eq!(ws.toggle_delta_log_likelihood(&ds, &net, &p, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn scaling_residuals_and_sigma_only_moves_log_determinant() {
        let ds = dataset(Matrix::from_rows(&[vec![1.0, -2.0, 0.5]]).unwrap(), Matrix::zeros(1, 3));
        let ds2 = dataset(Matrix::from_rows(&[vec![3.0, -6.0, 1.5]]).unwrap(), Matrix::zeros(1, 3));
        let net = NetworkState::empty(1, 1);
        let mut p = ModelParams::zeros(1, 1, false);
        p.sigma2 = 0.7;
        let l1 = log_likelihood(&ds, &net, &p).unwrap();
        p.sigma2 = 0.7 * 9.0;
        let l2 = log_likelihood(&ds2, &net, &p).unwrap();
        assert!((l1 - l2 - 3.0 * 9f64.ln() / 2.0).abs() < 1e-12);
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize, j: usize, t: usize) -> (Dataset, NetworkState, ModelParams) {
        let g = Matrix::from_vec(n, t, (0..n * t).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let f = Matrix::from_vec(j, t, (0..j * t).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let ds = dataset(g, f);
        let net = NetworkState::from_vec(n, j, (0..n * j).map(|_| rng.random_range(0..2u8)).collect()).unwrap();
        let mut p = ModelParams::zeros(n, j, true);
        p.alpha.iter_mut().for_each(|a| *a = rng.random_range(-1.0..1.0));
        p.beta.iter_mut().for_each(|a| *a = rng.random_range(-1.0..1.0));
        p.gamma.iter_mut().for_each(|a| *a = rng.random_range(-1.0..1.0));
        p.sigma2 = rng.random_range(0.3..2.0);
        (ds, net, p)
    }

    #[test]
    fn toggle_delta_matches_two_full_evaluations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (ds, mut net, p) = random_state(&mut rng, 3, 4, 5);
            let ws = GibbsWorkspace::new(&ds, &net, &p).unwrap();
            let (i, j) = (rng.random_range(0..3), rng.random_range(0..4));
            let d = ws.toggle_delta_log_likelihood(&ds, &net, &p, i, j).unwrap();
            net.set(i, j, true);
            let l1 = log_likelihood(&ds, &net, &p).unwrap();
            net.set(i, j, false);
            let l0 = log_likelihood(&ds, &net, &p).unwrap();
            assert!((d - (l1 - l0)).abs() < 1e-8, "{d} vs {}", l1 - l0);
        }
    }

    #[test]
    fn refresh_is_idempotent_and_matches_incremental_toggle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (ds, mut net, p) = random_state(&mut rng, 4, 3, 6);
        let mut ws = GibbsWorkspace::new(&ds, &net, &p).unwrap();
        let before = ws.residual().clone();
        ws.refresh(&ds, &net, &p).unwrap();
        assert_eq!(&before, ws.residual());
        let on = !net.get(2, 1);
        ws.apply_toggle(&ds, &mut net, &p, 2, 1, on);
        let full = GibbsWorkspace::new(&ds, &net, &p).unwrap();
        assert!(full.residual().max_abs_diff(ws.residual()) < 1e-8);
    }

    #[test]
    fn without_interactions_matches_linear_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (ds, net, mut p) = random_state(&mut rng, 5, 4, 3);
        p.gamma.clear();
        for i in 0..5 {
            for t in 0..3 {
                let mut expect = p.alpha[i];
                for j in 0..4 {
                    if net.get(i, j) {
                        expect += p.beta[j] * ds.f().get(j, t);
                    }
                }
                assert_eq!(predicted_expression(&ds, &net, &p, i, t).unwrap(), expect);
            }
        }
    }

    proptest! {
        #[test]
        fn sigma2_at_residual_moment_maximizes_likelihood(seed in 0u64..1000, scale in 0.2f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ds, net, mut p) = random_state(&mut rng, 3, 2, 4);
            let ws = GibbsWorkspace::new(&ds, &net, &p).unwrap();
            let best = ws.residual_sum_squares() / 12.0;
            p.sigma2 = best;
            let at_best = log_likelihood(&ds, &net, &p).unwrap();
            p.sigma2 = best * scale;
            let perturbed = log_likelihood(&ds, &net, &p).unwrap();
            prop_assert!(perturbed <= at_best + 1e-12);
        }
    }
}
