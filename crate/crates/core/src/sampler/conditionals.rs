//! Full conditional distributions of the Gibbs sampler.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{toggle_delta_from_effect, toggle_effect, GibbsWorkspace};
use crate::model::{pair_index, prior::column_weight_log_density, Dataset, Hyperparams, ModelParams, NetworkState};
use crate::numeric::sigmoid;

/// Normal conditional `N(mean, variance)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalConditional {
    pub mean: f64,
    pub variance: f64,
}

impl NormalConditional {
    /// Posterior of a coefficient with likelihood precision `xx / sigma2`,
    /// score `xy / sigma2` and a `N(0, tau2)` prior.
    #[inline]
    pub(crate) fn from_stats(xx: f64, xy: f64, sigma2: f64, tau2: f64) -> Self {
        let variance = 1.0 / (xx / sigma2 + 1.0 / tau2);
        NormalConditional {
            mean: variance / sigma2 * xy,
            variance,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.variance.sqrt() * z
    }
}

/// Scaled inverse chi-square conditional for the residual variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledInvChiSquared {
    pub df: f64,
    pub scale: f64,
}

impl ScaledInvChiSquared {
    pub fn mean(&self) -> Option<f64> {
        (self.df > 2.0).then(|| self.df * self.scale / (self.df - 2.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let chi = ChiSquared::new(self.df).expect("positive degrees of freedom");
        self.df * self.scale / chi.sample(rng)
    }
}

/// A linear effect `beta_j` or an interaction effect `gamma_jk` (`j < k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientId {
    Linear(usize),
    Pair(usize, usize),
}

impl CoefficientId {
    pub fn pair(j: usize, k: usize) -> Self {
        CoefficientId::Pair(j.min(k), j.max(k))
    }
}

// --- intercepts --------------------------------------------------------------

#[inline]
pub(crate) fn alpha_conditional_row(res_row: &[f64], alpha_i: f64, sigma2: f64, tau2: f64) -> NormalConditional {
    // Y_t = g_it - (regression terms) = r_it + alpha_i
    let sum_y: f64 = res_row.iter().sum::<f64>() + res_row.len() as f64 * alpha_i;
    NormalConditional::from_stats(res_row.len() as f64, sum_y, sigma2, tau2)
}

#[inline]
pub(crate) fn shift_row(res_row: &mut [f64], by: f64) {
    for r in res_row {
        *r -= by;
    }
}

pub fn alpha_conditional(
    workspace: &GibbsWorkspace,
    params: &ModelParams,
    hyper: &Hyperparams,
    i: usize,
) -> NormalConditional {
    alpha_conditional_row(
        workspace.residual().row(i),
        params.alpha[i],
        params.sigma2,
        hyper.tau_alpha2,
    )
}

/// Draws a new intercept for gene `i` and updates the residuals.
pub fn sample_alpha<R: Rng + ?Sized>(
    workspace: &mut GibbsWorkspace,
    params: &mut ModelParams,
    hyper: &Hyperparams,
    i: usize,
    rng: &mut R,
) -> f64 {
    let cond = alpha_conditional(workspace, params, hyper, i);
    let new = cond.sample(rng);
    shift_row(workspace.residual_mut().row_mut(i), new - params.alpha[i]);
    params.alpha[i] = new;
    new
}

// --- regression coefficients -----------------------------------------------

fn check_coefficient(id: CoefficientId, params: &ModelParams) -> Result<()> {
    let n_tfs = params.beta.len();
    match id {
        CoefficientId::Linear(j) if j < n_tfs => Ok(()),
        CoefficientId::Pair(j, k) if j < k && k < n_tfs && params.has_interactions() => Ok(()),
        _ => Err(Error::invalid(format!("no coefficient {id:?}"))),
    }
}

fn coefficient_value(params: &ModelParams, id: CoefficientId) -> f64 {
    match id {
        CoefficientId::Linear(j) => params.beta[j],
        CoefficientId::Pair(j, k) => params.gamma[pair_index(j, k, params.beta.len())],
    }
}

fn coefficient_slot(params: &mut ModelParams, id: CoefficientId) -> &mut f64 {
    match id {
        CoefficientId::Linear(j) => &mut params.beta[j],
        CoefficientId::Pair(j, k) => {
            let n = params.beta.len();
            &mut params.gamma[pair_index(j, k, n)]
        }
    }
}

/// Genes whose regressor for `id` is active.
fn active_genes(network: &NetworkState, id: CoefficientId) -> Vec<usize> {
    (0..network.n_genes())
        .filter(|&i| match id {
            CoefficientId::Linear(j) => network.get(i, j),
            CoefficientId::Pair(j, k) => network.get(i, j) && network.get(i, k),
        })
        .collect()
}

#[inline]
fn regressor(dataset: &Dataset, id: CoefficientId, t: usize) -> f64 {
    let f = dataset.f();
    match id {
        CoefficientId::Linear(j) => f.get(j, t),
        CoefficientId::Pair(j, k) => f.get(j, t) * f.get(k, t),
    }
}

/// Sufficient statistics `(T_XX, T_VX)` for one coefficient, where `V`
/// excludes the coefficient's own contribution.
pub(crate) fn coefficient_stats(
    workspace: &GibbsWorkspace,
    dataset: &Dataset,
    active: &[usize],
    id: CoefficientId,
    current: f64,
    x: &mut [f64],
) -> (f64, f64) {
    for (t, xt) in x.iter_mut().enumerate() {
        *xt = regressor(dataset, id, t);
    }
    let xx_row: f64 = x.iter().map(|v| v * v).sum();
    let mut txx = 0.0;
    let mut tvx = 0.0;
    for &i in active {
        let r = workspace.residual().row(i);
        let mut rx = 0.0;
        for (&rt, &xt) in r.iter().zip(x.iter()) {
            rx += rt * xt;
        }
        txx += xx_row;
        tvx += rx + current * xx_row;
    }
    (txx, tvx)
}

fn tau2_for(id: CoefficientId, hyper: &Hyperparams) -> f64 {
    match id {
        CoefficientId::Linear(_) => hyper.tau_beta2,
        CoefficientId::Pair(..) => hyper.tau_gamma2,
    }
}

pub fn coefficient_conditional(
    workspace: &GibbsWorkspace,
    dataset: &Dataset,
    network: &NetworkState,
    params: &ModelParams,
    hyper: &Hyperparams,
    id: CoefficientId,
) -> Result<NormalConditional> {
    check_coefficient(id, params)?;
    let active = active_genes(network, id);
    let mut x = vec![0.0; dataset.n_experiments()];
    let (txx, tvx) = coefficient_stats(workspace, dataset, &active, id, coefficient_value(params, id), &mut x);
    Ok(NormalConditional::from_stats(
        txx,
        tvx,
        params.sigma2,
        tau2_for(id, hyper),
    ))
}

pub(crate) fn sample_coefficient_with<R: Rng + ?Sized>(
    workspace: &mut GibbsWorkspace,
    dataset: &Dataset,
    network: &NetworkState,
    params: &mut ModelParams,
    hyper: &Hyperparams,
    id: CoefficientId,
    x: &mut [f64],
    rng: &mut R,
) -> f64 {
    let active = active_genes(network, id);
    let old = coefficient_value(params, id);
    let (txx, tvx) = coefficient_stats(workspace, dataset, &active, id, old, x);
    let cond = NormalConditional::from_stats(txx, tvx, params.sigma2, tau2_for(id, hyper));
    let new = cond.sample(rng);
    let delta = new - old;
    if delta != 0.0 {
        let res = workspace.residual_mut();
        for &i in &active {
            for (r, &xt) in res.row_mut(i).iter_mut().zip(x.iter()) {
                *r -= delta * xt;
            }
        }
    }
    *coefficient_slot(params, id) = new;
    new
}

/// Draws a linear or interaction coefficient and updates the residuals.
pub fn sample_coefficient<R: Rng + ?Sized>(
    workspace: &mut GibbsWorkspace,
    dataset: &Dataset,
    network: &NetworkState,
    params: &mut ModelParams,
    hyper: &Hyperparams,
    id: CoefficientId,
    rng: &mut R,
) -> Result<f64> {
    check_coefficient(id, params)?;
    let mut x = vec![0.0; dataset.n_experiments()];
    Ok(sample_coefficient_with(
        workspace, dataset, network, params, hyper, id, &mut x, rng,
    ))
}

// --- residual variance -------------------------------------------------------

/// Scaled inverse chi-square with `N T + nu` degrees of freedom and scale
/// `(RSS + 1) / (N T + nu)`.
pub fn sigma2_conditional(workspace: &GibbsWorkspace, hyper: &Hyperparams) -> ScaledInvChiSquared {
    let cells = workspace.residual().as_slice().len() as f64;
    let df = cells + hyper.nu;
    ScaledInvChiSquared {
        df,
        scale: (workspace.residual_sum_squares() + 1.0) / df,
    }
}

pub fn sample_sigma2<R: Rng + ?Sized>(
    workspace: &GibbsWorkspace,
    params: &mut ModelParams,
    hyper: &Hyperparams,
    rng: &mut R,
) -> f64 {
    let s = sigma2_conditional(workspace, hyper).sample(rng);
    params.sigma2 = s;
    s
}

// --- regulation indicators ---------------------------------------------------

/// `log Z1 - log Z0` for one cell given the rest of the row.
#[inline]
pub(crate) fn indicator_log_odds_row(
    dataset: &Dataset,
    res_row: &[f64],
    c_row: &[u8],
    params_beta: &[f64],
    params_gamma: &[f64],
    sigma2: f64,
    w_j: f64,
    i: usize,
    j: usize,
    effect: &mut [f64],
) -> f64 {
    toggle_effect(dataset.f(), c_row, params_beta, params_gamma, j, effect);
    let delta = toggle_delta_from_effect(res_row, effect, c_row[j] == 1, sigma2);
    delta + dataset.prior_log_odds_at(i, j, w_j)
}

/// Conditional log odds of `C_ij = 1`.
pub fn indicator_log_odds(
    workspace: &GibbsWorkspace,
    dataset: &Dataset,
    network: &NetworkState,
    params: &ModelParams,
    i: usize,
    j: usize,
) -> f64 {
    let mut effect = vec![0.0; dataset.n_experiments()];
    indicator_log_odds_row(
        dataset,
        workspace.residual().row(i),
        network.row(i),
        &params.beta,
        &params.gamma,
        params.sigma2,
        params.w[j],
        i,
        j,
        &mut effect,
    )
}

/// Conditional probability of `C_ij = 1`.
pub fn indicator_probability(
    workspace: &GibbsWorkspace,
    dataset: &Dataset,
    network: &NetworkState,
    params: &ModelParams,
    i: usize,
    j: usize,
) -> f64 {
    sigmoid(indicator_log_odds(workspace, dataset, network, params, i, j))
}

/// Applies a new value of `C_ij` to one row, updating its residuals.
#[inline]
pub(crate) fn set_indicator_row(res_row: &mut [f64], c_row: &mut [u8], j: usize, on: bool, effect: &[f64]) {
    if (c_row[j] == 1) == on {
        return;
    }
    let sign = if on { -1.0 } else { 1.0 };
    for (r, &d) in res_row.iter_mut().zip(effect) {
        *r += sign * d;
    }
    c_row[j] = on as u8;
}

/// Draws `C_ij` from its conditional and updates network and residuals.
pub fn sample_indicator<R: Rng + ?Sized>(
    workspace: &mut GibbsWorkspace,
    dataset: &Dataset,
    network: &mut NetworkState,
    params: &ModelParams,
    i: usize,
    j: usize,
    rng: &mut R,
) -> bool {
    let p = indicator_probability(workspace, dataset, network, params, i, j);
    let on = rng.random::<f64>() < p;
    workspace.apply_toggle(dataset, network, params, i, j, on);
    on
}

// --- prior weights -----------------------------------------------------------

/// Normalized probabilities of the weight grid points for TF `j`.
pub fn weight_grid_probabilities(dataset: &Dataset, network: &NetworkState, j: usize, grid: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = grid
        .iter()
        .map(|&w| column_weight_log_density(dataset, network, j, w))
        .collect();
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logs.iter().map(|l| (l - hi).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

pub(crate) fn sample_weight_on_grid<R: Rng + ?Sized>(
    dataset: &Dataset,
    network: &NetworkState,
    j: usize,
    grid: &[f64],
    rng: &mut R,
) -> f64 {
    let p = weight_grid_probabilities(dataset, network, j, grid);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        acc += pk;
        if u < acc {
            return grid[k];
        }
    }
    // rounding left u above the accumulated mass
    let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(grid.len() - 1);
    grid[last]
}

/// Grid draw of TF `j`'s prior weight from `grid_size` equally spaced points on [0, 1].
pub fn sample_weight<R: Rng + ?Sized>(
    dataset: &Dataset,
    network: &NetworkState,
    j: usize,
    grid_size: usize,
    rng: &mut R,
) -> Result<f64> {
    if grid_size < 2 {
        return Err(Error::invalid("grid_size must be at least 2"));
    }
    if j >= dataset.n_tfs() {
        return Err(Error::IndexOutOfRange {
            what: "TF",
            index: j,
            len: dataset.n_tfs(),
        });
    }
    let last = (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|k| k as f64 / last).collect();
    Ok(sample_weight_on_grid(dataset, network, j, &grid, rng))
}
