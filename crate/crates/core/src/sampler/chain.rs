//! Chain initialization, trace recording, checkpoints and multi-chain runs.

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::Lane;
use super::sweep::{ChainState, SweepPlan, SweepSettings, Sweeper};
use crate::error::{Error, Result};
use crate::likelihood::{residuals, GibbsWorkspace};
use crate::matrix::Matrix;
use crate::model::{
    pair_count, pair_index, sample_network_from_prior, Dataset, Hyperparams, ModelParams, NetworkState,
};
use crate::numeric::{mean, sample_variance};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub n_chains: usize,
    pub parallel_genes: bool,
    /// Full residual recompute every this many sweeps (0 disables).
    pub audit_every: usize,
    pub audit_tolerance: f64,
    pub random_scan: bool,
    pub allow_self_regulation: bool,
    /// Number of indicator cells whose state is traced for
    /// convergence diagnostics.
    pub monitor_cells: usize,
    /// Keep a full indicator snapshot every this many retained draws (0 = never).
    pub snapshot_stride: usize,
    pub plan: SweepPlan,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_iterations: 3000,
            burn_in: 1000,
            thin: 2,
            seed: 1,
            n_chains: 2,
            parallel_genes: false,
            audit_every: 50,
            audit_tolerance: 1e-6,
            random_scan: false,
            allow_self_regulation: true,
            monitor_cells: 100,
            snapshot_stride: 0,
            plan: SweepPlan::default(),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iterations {
            return Err(Error::invalid(format!(
                "burn_in ({}) must be below n_iterations ({})",
                self.burn_in, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        if self.n_chains == 0 {
            return Err(Error::invalid("n_chains must be at least 1"));
        }
        if !(self.audit_tolerance > 0.0) {
            return Err(Error::invalid("audit tolerance must be positive"));
        }
        Ok(())
    }

    /// `floor((n_iterations - burn_in) / thin)`.
    pub fn retained_count(&self) -> usize {
        (self.n_iterations - self.burn_in) / self.thin
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            plan: self.plan,
            parallel_genes: self.parallel_genes,
            random_scan: self.random_scan,
            allow_self_regulation: self.allow_self_regulation,
        }
    }

    fn is_retained(&self, sweep: usize) -> bool {
        sweep > self.burn_in && (sweep - self.burn_in).is_multiple_of(self.thin)
    }
}

/// Low-dimensional parameters recorded at each retained sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSample {
    pub iteration: usize,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sigma2: f64,
    pub w: Vec<f64>,
}

/// Retained output of one chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub chain_index: usize,
    pub seed: u64,
    pub n_genes: usize,
    pub n_tfs: usize,
    pub samples: Vec<ParamSample>,
    /// Running sum of each intercept over retained sweeps.
    pub alpha_sum: Vec<f64>,
    /// Retained sweeps with `C_ij = 1`, genes x TFs row-major.
    pub inclusion_counts: Vec<u32>,
    /// Per TF pair, summed over retained sweeps, the number of genes regulated by both.
    pub co_target_counts: Vec<u64>,
    pub monitored_cells: Vec<(usize, usize)>,
    /// Per retained sweep, the indicator value of each monitored cell.
    pub monitored_states: Vec<Vec<u8>>,
    pub snapshots: Vec<(usize, NetworkState)>,
}

impl ChainTrace {
    fn new(chain_index: usize, seed: u64, n_genes: usize, n_tfs: usize, monitored_cells: Vec<(usize, usize)>) -> Self {
        ChainTrace {
            chain_index,
            seed,
            n_genes,
            n_tfs,
            samples: Vec::new(),
            alpha_sum: vec![0.0; n_genes],
            inclusion_counts: vec![0; n_genes * n_tfs],
            co_target_counts: vec![0; pair_count(n_tfs)],
            monitored_cells,
            monitored_states: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn retained(&self) -> usize {
        self.samples.len()
    }

    pub fn inclusion_count(&self, i: usize, j: usize) -> u32 {
        self.inclusion_counts[i * self.n_tfs + j]
    }

    /// Per-chain inclusion frequencies.
    pub fn inclusion_matrix(&self) -> Matrix {
        let n = self.retained().max(1) as f64;
        let data = self.inclusion_counts.iter().map(|&c| c as f64 / n).collect();
        Matrix::from_vec(self.n_genes, self.n_tfs, data).expect("consistent trace dimensions")
    }

    pub fn alpha_mean(&self) -> Vec<f64> {
        let n = self.retained().max(1) as f64;
        self.alpha_sum.iter().map(|s| s / n).collect()
    }

    pub fn beta_trace(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.beta[j]).collect()
    }

    pub fn gamma_trace(&self, j: usize, k: usize) -> Vec<f64> {
        let p = pair_index(j, k, self.n_tfs);
        self.samples.iter().map(|s| s.gamma[p]).collect()
    }

    pub fn sigma2_trace(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.sigma2).collect()
    }

    pub fn weight_trace(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.w[j]).collect()
    }

    pub fn monitored_trace(&self, cell: usize) -> Vec<f64> {
        self.monitored_states.iter().map(|row| row[cell] as f64).collect()
    }

    pub fn has_interactions(&self) -> bool {
        self.samples.first().is_some_and(|s| !s.gamma.is_empty())
    }

    fn record(&mut self, state: &ChainState, snapshot_stride: usize) {
        let p = &state.params;
        self.samples.push(ParamSample {
            iteration: state.completed,
            beta: p.beta.clone(),
            gamma: p.gamma.clone(),
            sigma2: p.sigma2,
            w: p.w.clone(),
        });
        for (s, a) in self.alpha_sum.iter_mut().zip(&p.alpha) {
            *s += a;
        }
        let net = &state.network;
        for (count, &c) in self.inclusion_counts.iter_mut().zip(net.as_slice()) {
            *count += c as u32;
        }
        let mut active = Vec::with_capacity(self.n_tfs);
        for i in 0..self.n_genes {
            active.clear();
            active.extend((0..self.n_tfs).filter(|&j| net.get(i, j)));
            for (a, &j) in active.iter().enumerate() {
                for &k in &active[a + 1..] {
                    self.co_target_counts[pair_index(j, k, self.n_tfs)] += 1;
                }
            }
        }
        let states = self.monitored_cells.iter().map(|&(i, j)| net.get(i, j) as u8).collect();
        self.monitored_states.push(states);
        if snapshot_stride > 0 && self.retained().is_multiple_of(snapshot_stride) {
            self.snapshots.push((state.completed, net.clone()));
        }
    }
}

/// Resumable snapshot of a chain at a sweep boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub hyper: Hyperparams,
    pub config: ChainConfig,
    pub chain_index: usize,
    pub completed: usize,
    pub network: NetworkState,
    pub params: ModelParams,
    pub residual: Matrix,
    pub trace: ChainTrace,
}

/// Cells whose inclusion is traced for diagnostics; shared across chains of a run.
pub fn monitored_cells(seed: u64, n_genes: usize, n_tfs: usize, count: usize) -> Vec<(usize, usize)> {
    let total = n_genes * n_tfs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6e69_746f_7273);
    let mut idx = sample_indices(&mut rng, total, count.min(total)).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|c| (c / n_tfs, c % n_tfs)).collect()
}

fn pooled_variance(g: &Matrix) -> f64 {
    let v = if g.cols() >= 2 {
        mean(&(0..g.rows()).map(|i| sample_variance(g.row(i))).collect::<Vec<_>>())
    } else if g.rows() >= 2 {
        sample_variance(g.as_slice())
    } else {
        0.0
    };
    if v > 0.0 && v.is_finite() {
        v
    } else {
        1.0
    }
}

/// Starting point: indicators from the prior at `w = 0.5`, intercepts at the
/// gene means, zero coefficients, pooled expression variance, weights 0.5.
pub fn initial_state(dataset: &Dataset, hyper: &Hyperparams, sweeper: &Sweeper) -> Result<(NetworkState, ModelParams)> {
    let (n, j) = (dataset.n_genes(), dataset.n_tfs());
    let mut params = ModelParams::zeros(n, j, hyper.include_interactions);
    let mut rng = sweeper.streams().rng(0, Lane::Init, 0);
    let mut network = sample_network_from_prior(dataset, &params.w, &mut rng)?;
    if !sweeper.settings().allow_self_regulation {
        for (tf, gene) in dataset.tf_gene_map().iter().enumerate() {
            if let Some(i) = *gene {
                network.set(i, tf, false);
            }
        }
    }
    for (a, i) in params.alpha.iter_mut().zip(0..n) {
        *a = mean(dataset.g().row(i));
    }
    params.sigma2 = pooled_variance(dataset.g());
    Ok((network, params))
}

/// Runs one chain sweep by sweep; can be checkpointed and resumed.
pub struct ChainRunner<'a> {
    dataset: &'a Dataset,
    hyper: Hyperparams,
    config: ChainConfig,
    chain_index: usize,
    sweeper: Sweeper,
    state: ChainState,
    trace: ChainTrace,
}

impl<'a> ChainRunner<'a> {
    pub fn new(dataset: &'a Dataset, hyper: &Hyperparams, config: &ChainConfig, chain_index: usize) -> Result<Self> {
        hyper.validate()?;
        config.validate()?;
        let sweeper = Sweeper::new(config.seed, chain_index, config.sweep_settings());
        let (network, params) = initial_state(dataset, hyper, &sweeper)?;
        let state = ChainState::new(dataset, network, params)?;
        let cells = monitored_cells(config.seed, dataset.n_genes(), dataset.n_tfs(), config.monitor_cells);
        let trace = ChainTrace::new(chain_index, config.seed, dataset.n_genes(), dataset.n_tfs(), cells);
        Ok(ChainRunner {
            dataset,
            hyper: hyper.clone(),
            config: config.clone(),
            chain_index,
            sweeper,
            state,
            trace,
        })
    }

    pub fn from_checkpoint(dataset: &'a Dataset, checkpoint: Checkpoint) -> Result<Self> {
        if checkpoint.format_version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch {
                found: checkpoint.format_version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let Checkpoint {
            hyper,
            config,
            chain_index,
            completed,
            network,
            params,
            residual,
            trace,
            ..
        } = checkpoint;
        if network.n_genes() != dataset.n_genes()
            || network.n_tfs() != dataset.n_tfs()
            || residual.rows() != dataset.n_genes()
            || residual.cols() != dataset.n_experiments()
        {
            return Err(Error::DimensionMismatch("checkpoint does not match dataset".into()));
        }
        params.validate(dataset.n_genes(), dataset.n_tfs())?;
        // the stored residuals must describe this dataset; they are kept as-is
        // (not refreshed) so the resumed chain stays bit-identical
        let deviation = residuals(dataset, &network, &params)?.max_abs_diff(&residual);
        let tolerance = config.audit_tolerance.max(1e-6);
        if !(deviation <= tolerance) {
            return Err(Error::Consistency {
                deviation,
                tolerance,
                sweep: completed,
            });
        }
        let sweeper = Sweeper::new(config.seed, chain_index, config.sweep_settings());
        let state = ChainState {
            network,
            params,
            workspace: GibbsWorkspace::from_residual(residual),
            completed,
        };
        Ok(ChainRunner {
            dataset,
            hyper,
            config,
            chain_index,
            sweeper,
            state,
            trace,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn chain_index(&self) -> usize {
        self.chain_index
    }

    pub fn is_done(&self) -> bool {
        self.state.completed >= self.config.n_iterations
    }

    /// Runs up to `n` more sweeps (stopping at `n_iterations`).
    pub fn run_sweeps(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            if self.is_done() {
                break;
            }
            self.sweeper.sweep(&mut self.state, self.dataset, &self.hyper)?;
            let done = self.state.completed;
            if self.config.audit_every > 0 && done.is_multiple_of(self.config.audit_every) {
                let ChainState {
                    network,
                    params,
                    workspace,
                    ..
                } = &mut self.state;
                workspace.audit(self.dataset, network, params, self.config.audit_tolerance, done)?;
            }
            if self.config.is_retained(done) {
                self.trace.record(&self.state, self.config.snapshot_stride);
            }
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            hyper: self.hyper.clone(),
            config: self.config.clone(),
            chain_index: self.chain_index,
            completed: self.state.completed,
            network: self.state.network.clone(),
            params: self.state.params.clone(),
            residual: self.state.workspace.residual().clone(),
            trace: self.trace.clone(),
        }
    }

    pub fn run_to_end(mut self) -> Result<ChainTrace> {
        let remaining = self.config.n_iterations.saturating_sub(self.state.completed);
        self.run_sweeps(remaining)?;
        Ok(self.trace)
    }
}

/// Runs chain `chain_index` to completion; deterministic in `(seed, chain_index)`.
pub fn run_chain(
    dataset: &Dataset,
    hyper: &Hyperparams,
    config: &ChainConfig,
    chain_index: usize,
) -> Result<ChainTrace> {
    ChainRunner::new(dataset, hyper, config, chain_index)?.run_to_end()
}

/// Runs `config.n_chains` chains concurrently; results are in chain order.
pub fn run_chains(dataset: &Dataset, hyper: &Hyperparams, config: &ChainConfig) -> Vec<Result<ChainTrace>> {
    (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_chain(dataset, hyper, config, c))
        .collect()
}
