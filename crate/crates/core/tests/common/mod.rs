#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use regnet::model::{pair_count, ClampPolicy, Dataset, DatasetParts, ModelParams, NetworkState};
use regnet::sampler::{run_chains, ChainConfig, ChainTrace};
use regnet::synth::SynthSpec;
use regnet::Matrix;

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn dataset(g: Matrix, f: Matrix, b: Matrix, m: Matrix) -> Dataset {
    let (n, t, j) = (g.rows(), g.cols(), f.rows());
    Dataset::new(
        DatasetParts {
            gene_ids: ids("g", n),
            tf_ids: ids("tf", j),
            experiment_ids: ids("e", t),
            g,
            f,
            b,
            m,
            tf_gene_map: vec![None; j],
        },
        ClampPolicy::default(),
    )
    .unwrap()
}

/// Dataset carrying only priors; expression is a single zero column.
pub fn prior_dataset(b: Matrix, m: Matrix) -> Dataset {
    let (n, j) = (b.rows(), b.cols());
    dataset(Matrix::zeros(n, 1), Matrix::zeros(j, 1), b, m)
}

pub struct Fuzzed {
    pub dataset: Dataset,
    pub network: NetworkState,
    pub params: ModelParams,
}

/// Random data, network and parameters; expression is unrelated to the
/// parameters so residuals are not small.
pub fn fuzz<R: Rng>(rng: &mut R, n: usize, j: usize, t: usize, interactions: bool) -> Fuzzed {
    let g = Matrix::from_vec(n, t, (0..n * t).map(|_| 3.0 * normal(rng)).collect()).unwrap();
    let f = Matrix::from_vec(j, t, (0..j * t).map(|_| normal(rng)).collect()).unwrap();
    let b = Matrix::from_vec(n, j, (0..n * j).map(|_| rng.random_range(0.02..0.98)).collect()).unwrap();
    let m = Matrix::from_vec(n, j, (0..n * j).map(|_| rng.random_range(0.02..0.98)).collect()).unwrap();
    let network = NetworkState::from_vec(n, j, (0..n * j).map(|_| rng.random_bool(0.5) as u8).collect()).unwrap();
    let params = ModelParams {
        alpha: (0..n).map(|_| normal(rng)).collect(),
        beta: (0..j).map(|_| 2.0 * normal(rng)).collect(),
        gamma: if interactions {
            (0..pair_count(j)).map(|_| normal(rng)).collect()
        } else {
            Vec::new()
        },
        sigma2: rng.random_range(0.3..3.0),
        w: (0..j).map(|_| rng.random_range(0.0..1.0)).collect(),
    };
    Fuzzed {
        dataset: dataset(g, f, b, m),
        network,
        params,
    }
}

/// Area under the ROC curve by pairwise comparison, ties counted as half.
pub fn auc(scores: &[f64], labels: &[bool]) -> f64 {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(s, _)| *s)
        .collect();
    let mut wins = 0.0;
    for p in &pos {
        for q in &neg {
            wins += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Median by sorting, averaging the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// Frozen recovery fixture: seed chosen once, then fixed.
pub const RECOVERY_SEED: u64 = 1;

pub fn recovery_spec() -> SynthSpec {
    SynthSpec {
        n_genes: 200,
        n_tfs: 5,
        n_experiments: 50,
        sparsity: 0.05,
        beta_scale: 2.0,
        sigma: 1.0,
        prior_fidelity: 0.8,
        seed: RECOVERY_SEED,
        ..SynthSpec::default()
    }
}

pub fn recovery_chain_config() -> ChainConfig {
    ChainConfig {
        n_iterations: 2000,
        burn_in: 500,
        thin: 1,
        n_chains: 2,
        seed: RECOVERY_SEED,
        ..ChainConfig::default()
    }
}

pub fn run_all(dataset: &Dataset, hyper: &regnet::model::Hyperparams, config: &ChainConfig) -> Vec<ChainTrace> {
    run_chains(dataset, hyper, config)
        .into_iter()
        .map(Result::unwrap)
        .collect()
}
