//! Convergence diagnostics: split potential scale reduction and effective
//! sample size, following the Stan reference definitions.

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean, sample_variance};
use crate::sampler::ChainTrace;

fn trimmed(chains: &[Vec<f64>], min_len: usize) -> Result<Vec<&[f64]>> {
    if chains.is_empty() {
        return Err(Error::invalid("no chains"));
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if n < min_len {
        return Err(Error::invalid(format!(
            "chains need at least {min_len} draws, shortest has {n}"
        )));
    }
    if chains.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite draw"));
    }
    Ok(chains.iter().map(|c| &c[..n]).collect())
}

fn check_pooled_variance(chains: &[&[f64]]) -> Result<()> {
    let all: Vec<f64> = chains.iter().flat_map(|c| c.iter().copied()).collect();
    if sample_variance(&all) <= 0.0 {
        return Err(Error::Degenerate("zero pooled variance".into()));
    }
    Ok(())
}

/// Split R-hat: each chain is halved and the classic potential scale
/// reduction `sqrt(((n-1)/n W + B/n) / W)` is computed over the halves.
/// With an odd length the middle draw is dropped.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let chains = trimmed(chains, 4)?;
    check_pooled_variance(&chains)?;
    let n = chains[0].len();
    let half = n / 2;
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in &chains {
        halves.push(&c[..half]);
        halves.push(&c[n - half..]);
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = mean(&halves.iter().map(|h| sample_variance(h)).collect::<Vec<_>>());
    let h = half as f64;
    let b = h * sample_variance(&means);
    if w == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((((h - 1.0) / h * w + b / h) / w).sqrt())
}

fn autocovariance(x: &[f64], mu: f64, lag: usize) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for t in 0..n - lag {
        s += (x[t] - mu) * (x[t + lag] - mu);
    }
    s / n as f64
}

/// Multi-chain effective sample size using Geyer's initial monotone
/// sequence. The value is capped at `S log10 S` for `S` total draws, which
/// only binds for antithetic chains.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<f64> {
    let chains = trimmed(chains, 4)?;
    check_pooled_variance(&chains)?;
    let m = chains.len();
    let n = chains[0].len();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let mean_var = mean(&chains.iter().map(|c| sample_variance(c)).collect::<Vec<_>>());
    let mut var_plus = mean_var * (n as f64 - 1.0) / n as f64;
    if m > 1 {
        var_plus += sample_variance(&means);
    }
    if var_plus <= 0.0 {
        return Err(Error::Degenerate("zero within-chain variance".into()));
    }
    let rho = |lag: usize| -> f64 {
        let acov = mean(
            &chains
                .iter()
                .zip(&means)
                .map(|(c, &mu)| autocovariance(c, mu, lag))
                .collect::<Vec<_>>(),
        );
        1.0 - (mean_var - acov) / var_plus
    };

    // rho_hat[t] is the autocorrelation at lag t
    let mut rho_hat = vec![0.0; n];
    let mut even = 1.0;
    let mut odd = rho(1);
    rho_hat[0] = even;
    rho_hat[1] = odd;
    // Geyer initial positive sequence over pairs (t, t + 1), t even
    let mut t = 0;
    while t + 5 < n && (even + odd) > 0.0 {
        t += 2;
        even = rho(t);
        odd = rho(t + 1);
        if even + odd >= 0.0 {
            rho_hat[t] = even;
            rho_hat[t + 1] = odd;
        }
    }
    let max_t = t;
    // kept as a bias term, which reduces variance for antithetic chains
    if even > 0.0 {
        rho_hat[max_t] = even;
    }
    // initial monotone sequence
    let mut t = 2;
    while t + 2 <= max_t {
        let prev = rho_hat[t - 2] + rho_hat[t - 1];
        if rho_hat[t] + rho_hat[t + 1] > prev {
            rho_hat[t] = prev / 2.0;
            rho_hat[t + 1] = prev / 2.0;
        }
        t += 2;
    }
    let total = (m * n) as f64;
    let tau = -1.0 + 2.0 * rho_hat[..max_t].iter().sum::<f64>() + rho_hat[max_t];
    let tau = tau.max(1.0 / total.log10());
    Ok(total / tau)
}

/// Which scalar traces enter the convergence report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSelector {
    pub sigma2: bool,
    pub weights: bool,
    pub betas: bool,
    pub gammas: bool,
    /// How many of the traced inclusion cells to include.
    pub inclusion_cells: usize,
    pub seed: u64,
}

impl Default for MonitorSelector {
    fn default() -> Self {
        MonitorSelector {
            sigma2: true,
            weights: true,
            betas: true,
            gammas: false,
            inclusion_cells: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterDiagnostic {
    pub name: String,
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
    /// Why the parameter was skipped, if it was.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub parameters: Vec<ParameterDiagnostic>,
    pub worst_rhat: Option<f64>,
    pub threshold: f64,
    pub verdict: Verdict,
    pub single_chain: bool,
    pub n_chains: usize,
    pub draws_per_chain: usize,
}

fn monitored_series(traces: &[ChainTrace], selector: &MonitorSelector) -> Vec<(String, Vec<Vec<f64>>)> {
    let mut out = Vec::new();
    let n_tfs = traces[0].n_tfs;
    if selector.sigma2 {
        out.push((
            "sigma2".to_string(),
            traces.iter().map(ChainTrace::sigma2_trace).collect(),
        ));
    }
    if selector.weights {
        for j in 0..n_tfs {
            out.push((format!("w[{j}]"), traces.iter().map(|t| t.weight_trace(j)).collect()));
        }
    }
    if selector.betas {
        for j in 0..n_tfs {
            out.push((format!("beta[{j}]"), traces.iter().map(|t| t.beta_trace(j)).collect()));
        }
    }
    if selector.gammas && traces.iter().all(ChainTrace::has_interactions) {
        for (j, k) in crate::model::pairs(n_tfs) {
            out.push((
                format!("gamma[{j},{k}]"),
                traces.iter().map(|t| t.gamma_trace(j, k)).collect(),
            ));
        }
    }
    let available = traces[0].monitored_cells.len();
    if selector.inclusion_cells > 0
        && available > 0
        && traces.iter().all(|t| t.monitored_cells == traces[0].monitored_cells)
    {
        let mut rng = ChaCha8Rng::seed_from_u64(selector.seed);
        let mut picks = sample_indices(&mut rng, available, selector.inclusion_cells.min(available)).into_vec();
        picks.sort_unstable();
        for c in picks {
            let (i, j) = traces[0].monitored_cells[c];
            out.push((
                format!("inclusion[{i},{j}]"),
                traces.iter().map(|t| t.monitored_trace(c)).collect(),
            ));
        }
    }
    out
}

/// Per-parameter R-hat and ESS; passes iff the worst R-hat is below `threshold`.
/// Parameters whose traces are degenerate are skipped and flagged.
pub fn convergence_report(
    traces: &[ChainTrace],
    selector: &MonitorSelector,
    threshold: f64,
) -> Result<ConvergenceReport> {
    if traces.is_empty() {
        return Err(Error::invalid("no traces"));
    }
    let series = monitored_series(traces, selector);
    if series.is_empty() {
        return Err(Error::invalid("monitored parameter set is empty"));
    }
    let draws_per_chain = traces.iter().map(ChainTrace::retained).min().unwrap_or(0);
    let total = (draws_per_chain * traces.len()) as f64;
    let mut parameters = Vec::with_capacity(series.len());
    let mut worst: Option<f64> = None;
    for (name, chains) in series {
        let diag = match (split_rhat(&chains), effective_sample_size(&chains)) {
            (Ok(r), Ok(e)) => {
                worst = Some(worst.map_or(r, |w: f64| w.max(r)));
                ParameterDiagnostic {
                    name,
                    rhat: Some(r),
                    ess: Some(e.min(total)),
                    skipped: None,
                }
            }
            (Err(e), _) | (_, Err(e)) => ParameterDiagnostic {
                name,
                rhat: None,
                ess: None,
                skipped: Some(e.to_string()),
            },
        };
        parameters.push(diag);
    }
    let verdict = match worst {
        None => Verdict::Degenerate,
        Some(r) if r < threshold => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    Ok(ConvergenceReport {
        parameters,
        worst_rhat: worst,
        threshold,
        verdict,
        single_chain: traces.len() == 1,
        n_chains: traces.len(),
        draws_per_chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normal_chain(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Vec<f64> {
        (0..n).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    fn ar1(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> Vec<f64> {
        let mut x = rng.sample::<f64, _>(StandardNormal) / (1.0 - rho * rho).sqrt();
        (0..n)
            .map(|_| {
                x = rho * x + rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect()
    }

    #[test]
    fn rhat_near_one_for_stationary_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chains: Vec<_> = (0..4).map(|_| normal_chain(&mut rng, 20_000, 0.0)).collect();
        let r = split_rhat(&chains).unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
    }

    #[test]
    fn rhat_large_for_separated_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let chains = vec![normal_chain(&mut rng, 500, 0.0), normal_chain(&mut rng, 500, 10.0)];
        assert!(split_rhat(&chains).unwrap() > 3.0);
    }

    #[test]
    fn constant_chains_are_degenerate() {
        let chains = vec![vec![1.0; 10], vec![1.0; 10]];
        assert!(matches!(split_rhat(&chains), Err(Error::Degenerate(_))));
        assert!(matches!(effective_sample_size(&chains), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_short_chains_error() {
        assert!(split_rhat(&[vec![1.0, 2.0, 3.0]]).is_err());
    }

    #[test]
    fn ess_of_iid_draws_is_close_to_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chains: Vec<_> = (0..2).map(|_| normal_chain(&mut rng, 5000, 0.0)).collect();
        let ess = effective_sample_size(&chains).unwrap();
        assert!((ess / 10_000.0 - 1.0).abs() < 0.15, "{ess}");
    }

    #[test]
    fn ess_of_alternating_sequence_exceeds_n() {
        let chain: Vec<f64> = (0..1000).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ess = effective_sample_size(&[chain]).unwrap();
        assert!(ess > 1000.0);
        assert!(ess <= 1000.0 * 3.0 + 1e-9);
    }

    #[test]
    fn ess_of_ar1_matches_theory() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = 0.9;
        let n = 20_000;
        let ess = effective_sample_size(&[ar1(&mut rng, n, rho)]).unwrap();
        let expect = n as f64 * (1.0 - rho) / (1.0 + rho);
        assert!((ess / expect - 1.0).abs() < 0.25, "{ess} vs {expect}");
    }

    proptest! {
        #[test]
        fn affine_invariance(seed in 0u64..200, a in 0.1..10.0f64, b in -50.0..50.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chains: Vec<_> = (0..3).map(|k| normal_chain(&mut rng, 200, k as f64 * 0.2)).collect();
            let moved: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|x| a * x + b).collect()).collect();
            let (r1, r2) = (split_rhat(&chains).unwrap(), split_rhat(&moved).unwrap());
            prop_assert!((r1 - r2).abs() < 1e-9 * r1);
            let (e1, e2) = (effective_sample_size(&chains).unwrap(), effective_sample_size(&moved).unwrap());
            prop_assert!((e1 - e2).abs() < 1e-6 * e1);
        }

        #[test]
        fn rhat_lower_bound(seed in 0u64..200, len in 4usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chains: Vec<_> = (0..2).map(|_| normal_chain(&mut rng, len, 0.0)).collect();
            let h = (len / 2) as f64;
            prop_assert!(split_rhat(&chains).unwrap() >= ((h - 1.0) / h).sqrt() - 1e-12);
        }
    }
}
