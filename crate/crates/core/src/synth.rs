//! Forward simulation from the generative model, and exact oracles that are
//! coded separately from the sampler so the two can be cross-checked.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{pair_count, ClampPolicy, Dataset, DatasetParts, Hyperparams, ModelParams, NetworkState};

/// Settings of a synthetic regulatory problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_genes: usize,
    pub n_tfs: usize,
    pub n_experiments: usize,
    /// Probability that any gene-TF pair is a true edge.
    pub sparsity: f64,
    pub alpha_scale: f64,
    pub beta_scale: f64,
    pub gamma_scale: f64,
    pub sigma: f64,
    /// Mean binding probability on true edges (and one minus it on non-edges).
    pub prior_fidelity: f64,
    /// Same for the motif source; defaults to `prior_fidelity`.
    pub motif_fidelity: Option<f64>,
    /// Beta concentration of the simulated prior probabilities.
    pub prior_concentration: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_genes: 200,
            n_tfs: 5,
            n_experiments: 50,
            sparsity: 0.05,
            alpha_scale: 1.0,
            beta_scale: 2.0,
            gamma_scale: 0.0,
            sigma: 1.0,
            prior_fidelity: 0.8,
            motif_fidelity: None,
            prior_concentration: 10.0,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_genes == 0 || self.n_tfs == 0 || self.n_experiments == 0 {
            return Err(Error::invalid("synthetic sizes must be at least 1"));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::invalid("sigma must be positive"));
        }
        let motif = self.motif_fidelity.unwrap_or(self.prior_fidelity);
        for (name, p) in [
            ("sparsity", self.sparsity),
            ("prior_fidelity", self.prior_fidelity),
            ("motif_fidelity", motif),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.alpha_scale < 0.0 || self.beta_scale < 0.0 || self.gamma_scale < 0.0 {
            return Err(Error::invalid("effect scales must be non-negative"));
        }
        if !(self.prior_concentration > 0.0) {
            return Err(Error::invalid("prior_concentration must be positive"));
        }
        Ok(())
    }
}

/// A simulated dataset with the network and parameters that generated it.
#[derive(Clone, Debug)]
pub struct SyntheticProblem {
    pub dataset: Dataset,
    pub network: NetworkState,
    pub params: ModelParams,
}

fn prior_source(rng: &mut ChaCha8Rng, edge: bool, fidelity: f64, kappa: f64) -> f64 {
    let mu = if edge { fidelity } else { 1.0 - fidelity };
    if mu <= 0.0 || mu >= 1.0 {
        return mu;
    }
    Beta::new(kappa * mu, kappa * (1.0 - mu))
        .expect("positive shape parameters")
        .sample(rng)
}

/// Draws a network, effects and expression data from the model.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SyntheticProblem> {
    spec.validate()?;
    let (n, j, t) = (spec.n_genes, spec.n_tfs, spec.n_experiments);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let cells: Vec<u8> = (0..n * j).map(|_| rng.random_bool(spec.sparsity) as u8).collect();
    let network = NetworkState::from_vec(n, j, cells)?;
    let f = Matrix::from_vec(j, t, (0..j * t).map(|_| std_normal.sample(&mut rng)).collect())?;
    let alpha: Vec<f64> = (0..n).map(|_| spec.alpha_scale * std_normal.sample(&mut rng)).collect();
    let beta: Vec<f64> = (0..j).map(|_| spec.beta_scale * std_normal.sample(&mut rng)).collect();
    let gamma: Vec<f64> = if spec.gamma_scale > 0.0 {
        (0..pair_count(j))
            .map(|_| spec.gamma_scale * std_normal.sample(&mut rng))
            .collect()
    } else {
        Vec::new()
    };
    let params = ModelParams {
        alpha,
        beta,
        gamma,
        sigma2: spec.sigma * spec.sigma,
        w: vec![0.5; j],
    };

    let mut g = Matrix::zeros(n, t);
    let mut pred = vec![0.0; t];
    for i in 0..n {
        crate::likelihood::predicted_row(
            &f,
            network.row(i),
            params.alpha[i],
            &params.beta,
            &params.gamma,
            &mut pred,
        );
        for (out, p) in g.row_mut(i).iter_mut().zip(&pred) {
            *out = p + spec.sigma * std_normal.sample(&mut rng);
        }
    }

    let motif_fidelity = spec.motif_fidelity.unwrap_or(spec.prior_fidelity);
    let mut b = Matrix::zeros(n, j);
    let mut m = Matrix::zeros(n, j);
    for i in 0..n {
        for jj in 0..j {
            let edge = network.get(i, jj);
            b.set(
                i,
                jj,
                prior_source(&mut rng, edge, spec.prior_fidelity, spec.prior_concentration),
            );
            m.set(
                i,
                jj,
                prior_source(&mut rng, edge, motif_fidelity, spec.prior_concentration),
            );
        }
    }

    let dataset = Dataset::new(
        DatasetParts {
            gene_ids: (0..n).map(|i| format!("G{i:05}")).collect(),
            tf_ids: (0..j).map(|i| format!("TF{i:03}")).collect(),
            experiment_ids: (0..t).map(|i| format!("E{i:04}")).collect(),
            g,
            f,
            b,
            m,
            tf_gene_map: vec![None; j],
        },
        ClampPolicy::default(),
    )?;
    Ok(SyntheticProblem {
        dataset,
        network,
        params,
    })
}

/// Exact conditional distribution of indicator row `i` over all `2^J`
/// configurations, with bit `j` of the index holding `C_ij`.
pub fn exhaustive_indicator_posterior(
    dataset: &Dataset,
    params: &ModelParams,
    w: &[f64],
    i: usize,
) -> Result<Vec<f64>> {
    let n_tfs = dataset.n_tfs();
    if n_tfs > 12 {
        return Err(Error::invalid(format!("{n_tfs} TFs is too many to enumerate (max 12)")));
    }
    if i >= dataset.n_genes() || w.len() != n_tfs {
        return Err(Error::invalid("gene index or weight length out of range"));
    }
    let g = dataset.g().row(i);
    let f = dataset.f();
    let configs = 1usize << n_tfs;
    let mut log_post = Vec::with_capacity(configs);
    for mask in 0..configs {
        let on = |j: usize| mask >> j & 1 == 1;
        let mut ss = 0.0;
        for (t, &gt) in g.iter().enumerate() {
            let mut mu = params.alpha[i];
            for j in 0..n_tfs {
                if on(j) {
                    mu += params.beta[j] * f.get(j, t);
                }
            }
            if !params.gamma.is_empty() {
                let mut idx = 0;
                for j in 0..n_tfs {
                    for k in j + 1..n_tfs {
                        if on(j) && on(k) {
                            mu += params.gamma[idx] * f.get(j, t) * f.get(k, t);
                        }
                        idx += 1;
                    }
                }
            }
            ss += (gt - mu) * (gt - mu);
        }
        let mut prior = 1.0;
        for j in 0..n_tfs {
            let (b, m) = (dataset.b().get(i, j), dataset.m().get(i, j));
            let yes = b.powf(w[j]) * m.powf(1.0 - w[j]);
            let no = (1.0 - b).powf(w[j]) * (1.0 - m).powf(1.0 - w[j]);
            prior *= if on(j) { yes } else { no } / (yes + no);
        }
        log_post.push(-ss / (2.0 * params.sigma2) + prior.ln());
    }
    let hi = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = log_post.iter().map(|l| (l - hi).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    Ok(unnorm.into_iter().map(|p| p / z).collect())
}

/// Inputs to the closed-form conditional of one parameter block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SufficientStats {
    /// Intercept of one gene: `n_obs` experiments, `sum_y` the summed partial residuals.
    Intercept { n_obs: usize, sum_y: f64, sigma2: f64 },
    /// Linear (`pair = false`) or interaction coefficient.
    Coefficient {
        txx: f64,
        tvx: f64,
        sigma2: f64,
        pair: bool,
    },
    /// Residual variance from `n_cells` residuals with sum of squares `rss`.
    Variance { n_cells: usize, rss: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleParams {
    Normal { mean: f64, variance: f64 },
    ScaledInvChiSquared { df: f64, scale: f64 },
}

/// Closed-form conditional parameters, in precision form.
pub fn conjugate_posterior_oracle(stats: SufficientStats, hyper: &Hyperparams) -> OracleParams {
    let normal = |data_precision: f64, score: f64, prior_var: f64| {
        let precision = data_precision + prior_var.recip();
        OracleParams::Normal {
            mean: score / precision,
            variance: precision.recip(),
        }
    };
    match stats {
        SufficientStats::Intercept { n_obs, sum_y, sigma2 } => {
            normal(n_obs as f64 / sigma2, sum_y / sigma2, hyper.tau_alpha2)
        }
        SufficientStats::Coefficient { txx, tvx, sigma2, pair } => {
            let tau2 = if pair { hyper.tau_gamma2 } else { hyper.tau_beta2 };
            normal(txx / sigma2, tvx / sigma2, tau2)
        }
        SufficientStats::Variance { n_cells, rss } => {
            let df = n_cells as f64 + hyper.nu;
            OracleParams::ScaledInvChiSquared {
                df,
                scale: (rss + 1.0) / df,
            }
        }
    }
}
