//! One systematic Gibbs scan: intercepts, coefficients, residual variance,
//! indicators, then prior weights.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conditionals::{
    alpha_conditional_row, indicator_log_odds_row, sample_coefficient_with, sample_sigma2, sample_weight_on_grid,
    set_indicator_row, shift_row, CoefficientId,
};
use super::rng::{ChainStreams, Lane};
use crate::error::{Error, Result};
use crate::likelihood::GibbsWorkspace;
use crate::model::{pairs, Dataset, Hyperparams, ModelParams, NetworkState};
use crate::numeric::sigmoid;

/// Which blocks a sweep updates. Freezing blocks is used for testing
/// individual conditionals against exact oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub theta: bool,
    pub indicators: bool,
    pub weights: bool,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            theta: true,
            indicators: true,
            weights: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub plan: SweepPlan,
    pub parallel_genes: bool,
    /// Visit TFs within a gene row in a fresh random order each sweep.
    pub random_scan: bool,
    /// When false, `C_ij` is held at 0 for the gene that encodes TF `j`.
    pub allow_self_regulation: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            plan: SweepPlan::default(),
            parallel_genes: false,
            random_scan: false,
            allow_self_regulation: true,
        }
    }
}

/// Mutable sampler state of one chain.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub network: NetworkState,
    pub params: ModelParams,
    pub workspace: GibbsWorkspace,
    /// Number of completed sweeps.
    pub completed: usize,
}

impl ChainState {
    pub fn new(dataset: &Dataset, network: NetworkState, params: ModelParams) -> Result<Self> {
        let workspace = GibbsWorkspace::new(dataset, &network, &params)?;
        Ok(ChainState {
            network,
            params,
            workspace,
            completed: 0,
        })
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let p = &self.params;
        let iteration = self.completed;
        let bad = |parameter: String| Err(Error::NonFinite { parameter, iteration });
        if !p.sigma2.is_finite() || p.sigma2 <= 0.0 {
            return bad("sigma2".into());
        }
        for (name, v) in [("alpha", &p.alpha), ("beta", &p.beta), ("gamma", &p.gamma)] {
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return bad(format!("{name}[{k}]"));
            }
        }
        Ok(())
    }
}

/// Drives sweeps for one chain using its counter-based random streams.
#[derive(Clone, Debug)]
pub struct Sweeper {
    streams: ChainStreams,
    settings: SweepSettings,
}

impl Sweeper {
    pub fn new(seed: u64, chain_index: usize, settings: SweepSettings) -> Self {
        Sweeper {
            streams: ChainStreams::new(seed, chain_index),
            settings,
        }
    }

    pub fn settings(&self) -> &SweepSettings {
        &self.settings
    }

    pub(crate) fn streams(&self) -> &ChainStreams {
        &self.streams
    }

    /// Runs one full scan and advances `state.completed`.
    pub fn sweep(&self, state: &mut ChainState, dataset: &Dataset, hyper: &Hyperparams) -> Result<()> {
        let sweep = state.completed;
        let plan = self.settings.plan;
        if plan.theta {
            self.alpha_step(state, dataset, hyper, sweep);
            self.coefficient_step(state, dataset, hyper, sweep);
        }
        if plan.indicators {
            self.indicator_step(state, dataset, sweep);
        }
        if plan.weights {
            self.weight_step(state, dataset, hyper, sweep);
        }
        state.completed += 1;
        state.check_finite()
    }

    fn alpha_step(&self, state: &mut ChainState, dataset: &Dataset, hyper: &Hyperparams, sweep: usize) {
        let t = dataset.n_experiments();
        let sigma2 = state.params.sigma2;
        let tau2 = hyper.tau_alpha2;
        let streams = &self.streams;
        let body = |(i, (row, alpha)): (usize, (&mut [f64], &mut f64))| {
            let mut rng = streams.rng(sweep, Lane::Alpha, i);
            let new = alpha_conditional_row(row, *alpha, sigma2, tau2).sample(&mut rng);
            shift_row(row, new - *alpha);
            *alpha = new;
        };
        let residual = state.workspace.residual_mut().as_mut_slice();
        if self.settings.parallel_genes {
            residual
                .par_chunks_mut(t)
                .zip(state.params.alpha.par_iter_mut())
                .enumerate()
                .for_each(body);
        } else {
            residual
                .chunks_mut(t)
                .zip(state.params.alpha.iter_mut())
                .enumerate()
                .for_each(body);
        }
    }

    fn coefficient_step(&self, state: &mut ChainState, dataset: &Dataset, hyper: &Hyperparams, sweep: usize) {
        let mut rng = self.streams.rng(sweep, Lane::Global, 0);
        let mut x = vec![0.0; dataset.n_experiments()];
        let ChainState {
            network,
            params,
            workspace,
            ..
        } = state;
        for j in 0..dataset.n_tfs() {
            sample_coefficient_with(
                workspace,
                dataset,
                network,
                params,
                hyper,
                CoefficientId::Linear(j),
                &mut x,
                &mut rng,
            );
        }
        if params.has_interactions() {
            for (j, k) in pairs(dataset.n_tfs()) {
                sample_coefficient_with(
                    workspace,
                    dataset,
                    network,
                    params,
                    hyper,
                    CoefficientId::Pair(j, k),
                    &mut x,
                    &mut rng,
                );
            }
        }
        sample_sigma2(workspace, params, hyper, &mut rng);
    }

    fn indicator_step(&self, state: &mut ChainState, dataset: &Dataset, sweep: usize) {
        let t = dataset.n_experiments();
        let n_tfs = dataset.n_tfs();
        let streams = &self.streams;
        let settings = self.settings;
        let ChainState {
            network,
            params,
            workspace,
            ..
        } = state;
        let params: &ModelParams = params;
        let body = |(i, (res_row, c_row)): (usize, (&mut [f64], &mut [u8]))| {
            let mut rng = streams.rng(sweep, Lane::Indicator, i);
            let mut order: Vec<usize> = (0..n_tfs).collect();
            if settings.random_scan {
                order.shuffle(&mut rng);
            }
            let mut effect = vec![0.0; t];
            for &j in &order {
                if !settings.allow_self_regulation && dataset.tf_gene_map()[j] == Some(i) {
                    crate::likelihood::toggle_effect(dataset.f(), c_row, &params.beta, &params.gamma, j, &mut effect);
                    set_indicator_row(res_row, c_row, j, false, &effect);
                    continue;
                }
                let odds = indicator_log_odds_row(
                    dataset,
                    res_row,
                    c_row,
                    &params.beta,
                    &params.gamma,
                    params.sigma2,
                    params.w[j],
                    i,
                    j,
                    &mut effect,
                );
                let on = rand::Rng::random::<f64>(&mut rng) < sigmoid(odds);
                set_indicator_row(res_row, c_row, j, on, &effect);
            }
        };
        let residual = workspace.residual_mut().as_mut_slice();
        let cells = network.raw_mut();
        if settings.parallel_genes {
            residual
                .par_chunks_mut(t)
                .zip(cells.par_chunks_mut(n_tfs))
                .enumerate()
                .for_each(body);
        } else {
            residual
                .chunks_mut(t)
                .zip(cells.chunks_mut(n_tfs))
                .enumerate()
                .for_each(body);
        }
    }

    fn weight_step(&self, state: &mut ChainState, dataset: &Dataset, hyper: &Hyperparams, sweep: usize) {
        let grid = hyper.weight_grid();
        let network = &state.network;
        let draw = |j: usize| {
            let mut rng = self.streams.rng(sweep, Lane::Weight, j);
            sample_weight_on_grid(dataset, network, j, &grid, &mut rng)
        };
        let w: Vec<f64> = if self.settings.parallel_genes {
            (0..dataset.n_tfs()).into_par_iter().map(draw).collect()
        } else {
            (0..dataset.n_tfs()).map(draw).collect()
        };
        state.params.w = w;
    }
}
