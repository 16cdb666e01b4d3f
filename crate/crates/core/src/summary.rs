//! Posterior summaries of chain traces: inclusion probabilities, target
//! sets, credible intervals of effects, and weight quantiles.
//!
//! Thresholds on inclusion probabilities are inclusive (`>=`). Coefficient
//! intervals use every retained draw; since a TF's effect only enters genes
//! it regulates, an interval for `beta_j` describes the effect of TF `j` on
//! the genes where it is a regulator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::pairs;
use crate::numeric::{mean, quantile_sorted};
use crate::sampler::{ChainTrace, CoefficientId};

/// Quantile levels reported for each prior weight.
pub const WEIGHT_QUANTILES: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub id: CoefficientId,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub tf: usize,
    /// Values at [`WEIGHT_QUANTILES`].
    pub quantiles: [f64; 5],
    /// Fraction of draws strictly above 0.5.
    pub mass_above_half: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionPair {
    pub j: usize,
    pub k: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub shared_targets: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub threshold: f64,
    pub level: f64,
    pub min_shared_targets: usize,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            threshold: 0.5,
            level: 0.95,
            min_shared_targets: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub gene_ids: Vec<String>,
    pub tf_ids: Vec<String>,
    pub options: SummaryOptions,
    pub retained: usize,
    pub inclusion: Matrix,
    pub alpha_mean: Vec<f64>,
    pub linear: Vec<CoefficientSummary>,
    pub interactions: Vec<CoefficientSummary>,
    pub weights: Vec<WeightSummary>,
    /// Per TF, genes with inclusion at or above the threshold.
    pub target_sets: Vec<Vec<usize>>,
    /// Significant pairs with their shared-target counts, before filtering.
    pub interaction_pairs: Vec<InteractionPair>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignificantEffects {
    pub activators: Vec<usize>,
    pub repressors: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

fn check_traces(traces: &[ChainTrace]) -> Result<(usize, usize)> {
    let first = traces.first().ok_or_else(|| Error::invalid("no traces"))?;
    let dims = (first.n_genes, first.n_tfs);
    if traces.iter().any(|t| (t.n_genes, t.n_tfs) != dims) {
        return Err(Error::DimensionMismatch("traces disagree on dimensions".into()));
    }
    if traces.iter().map(ChainTrace::retained).sum::<usize>() == 0 {
        return Err(Error::invalid("traces have no retained iterations"));
    }
    Ok(dims)
}

/// Pooled fraction of retained sweeps with `C_ij = 1`.
pub fn inclusion_probabilities(traces: &[ChainTrace]) -> Result<Matrix> {
    let (n, j) = check_traces(traces)?;
    let total: usize = traces.iter().map(ChainTrace::retained).sum();
    let mut counts = vec![0u64; n * j];
    for t in traces {
        for (c, &x) in counts.iter_mut().zip(&t.inclusion_counts) {
            *c += x as u64;
        }
    }
    Matrix::from_vec(n, j, counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// Genes with inclusion at least `threshold` for TF `j`, by descending
/// inclusion and then by gene id.
pub fn target_genes_from(inclusion: &Matrix, gene_ids: &[String], j: usize, threshold: f64) -> Result<Vec<usize>> {
    if j >= inclusion.cols() {
        return Err(Error::IndexOutOfRange {
            what: "TF",
            index: j,
            len: inclusion.cols(),
        });
    }
    let mut genes: Vec<usize> = (0..inclusion.rows())
        .filter(|&i| inclusion.get(i, j) >= threshold)
        .collect();
    genes.sort_by(|&a, &b| {
        inclusion
            .get(b, j)
            .total_cmp(&inclusion.get(a, j))
            .then_with(|| gene_ids[a].cmp(&gene_ids[b]))
    });
    Ok(genes)
}

/// Central interval from empirical quantiles at `(1 - level) / 2` and
/// `1 - (1 - level) / 2`, interpolating linearly between order statistics.
pub fn credible_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 draws, got {}", values.len())));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("level {level} not in (0, 1)")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&sorted, tail), quantile_sorted(&sorted, 1.0 - tail)))
}

fn summarize_draws(id: CoefficientId, draws: &[f64], level: f64) -> Result<CoefficientSummary> {
    let (lower, upper) = credible_interval(draws, level)?;
    Ok(CoefficientSummary {
        id,
        mean: mean(draws),
        lower,
        upper,
    })
}

/// Quantiles of each TF weight over all retained draws.
pub fn weight_summary(traces: &[ChainTrace]) -> Result<Vec<WeightSummary>> {
    let (_, n_tfs) = check_traces(traces)?;
    (0..n_tfs)
        .map(|j| {
            let mut draws: Vec<f64> = traces.iter().flat_map(|t| t.weight_trace(j)).collect();
            if draws.len() < 2 {
                return Err(Error::invalid("need at least 2 retained weight draws"));
            }
            draws.sort_by(f64::total_cmp);
            let mut quantiles = [0.0; 5];
            for (q, &level) in quantiles.iter_mut().zip(&WEIGHT_QUANTILES) {
                *q = quantile_sorted(&draws, level);
            }
            let above = draws.iter().filter(|&&w| w > 0.5).count();
            Ok(WeightSummary {
                tf: j,
                quantiles,
                mass_above_half: above as f64 / draws.len() as f64,
            })
        })
        .collect()
}

fn excludes_zero(lower: f64, upper: f64) -> bool {
    lower > 0.0 || upper < 0.0
}

fn shared_count(a: &[usize], b: &[usize]) -> usize {
    let set: std::collections::HashSet<_> = a.iter().collect();
    b.iter().filter(|x| set.contains(x)).count()
}

/// Builds the full posterior summary from one or more chains.
pub fn summarize(
    traces: &[ChainTrace],
    gene_ids: &[String],
    tf_ids: &[String],
    options: SummaryOptions,
) -> Result<PosteriorSummary> {
    let (n, n_tfs) = check_traces(traces)?;
    if gene_ids.len() != n || tf_ids.len() != n_tfs {
        return Err(Error::DimensionMismatch("identifier lists do not match traces".into()));
    }
    let inclusion = inclusion_probabilities(traces)?;
    let retained: usize = traces.iter().map(ChainTrace::retained).sum();

    let mut alpha_mean = vec![0.0; n];
    for t in traces {
        for (m, s) in alpha_mean.iter_mut().zip(&t.alpha_sum) {
            *m += s / retained as f64;
        }
    }

    let linear = (0..n_tfs)
        .map(|j| {
            let draws: Vec<f64> = traces.iter().flat_map(|t| t.beta_trace(j)).collect();
            summarize_draws(CoefficientId::Linear(j), &draws, options.level)
        })
        .collect::<Result<Vec<_>>>()?;

    let interactions = if traces.iter().all(ChainTrace::has_interactions) {
        pairs(n_tfs)
            .into_iter()
            .map(|(j, k)| {
                let draws: Vec<f64> = traces.iter().flat_map(|t| t.gamma_trace(j, k)).collect();
                summarize_draws(CoefficientId::Pair(j, k), &draws, options.level)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let weights = weight_summary(traces)?;
    let target_sets = (0..n_tfs)
        .map(|j| target_genes_from(&inclusion, gene_ids, j, options.threshold))
        .collect::<Result<Vec<_>>>()?;

    let interaction_pairs = interactions
        .iter()
        .filter(|c| excludes_zero(c.lower, c.upper))
        .map(|c| {
            let CoefficientId::Pair(j, k) = c.id else {
                unreachable!("interaction list holds pairs only")
            };
            InteractionPair {
                j,
                k,
                mean: c.mean,
                lower: c.lower,
                upper: c.upper,
                shared_targets: shared_count(&target_sets[j], &target_sets[k]),
            }
        })
        .collect();

    Ok(PosteriorSummary {
        gene_ids: gene_ids.to_vec(),
        tf_ids: tf_ids.to_vec(),
        options,
        retained,
        inclusion,
        alpha_mean,
        linear,
        interactions,
        weights,
        target_sets,
        interaction_pairs,
    })
}

impl PosteriorSummary {
    pub fn target_genes(&self, j: usize, threshold: f64) -> Result<Vec<usize>> {
        target_genes_from(&self.inclusion, &self.gene_ids, j, threshold)
    }

    pub fn tf_index(&self, id: &str) -> Result<usize> {
        self.tf_ids
            .iter()
            .position(|t| t == id)
            .ok_or_else(|| Error::invalid(format!("unknown TF '{id}'")))
    }
}

/// Activators (interval above zero), repressors (below zero) and pairs whose
/// interval excludes zero.
pub fn significant_effects(summary: &PosteriorSummary) -> SignificantEffects {
    let mut out = SignificantEffects::default();
    for c in &summary.linear {
        let CoefficientId::Linear(j) = c.id else { continue };
        if c.lower > 0.0 {
            out.activators.push(j);
        } else if c.upper < 0.0 {
            out.repressors.push(j);
        }
    }
    for c in &summary.interactions {
        if let CoefficientId::Pair(j, k) = c.id {
            if excludes_zero(c.lower, c.upper) {
                out.pairs.push((j, k));
            }
        }
    }
    out
}

/// Significant pairs whose target sets share at least `min_shared_targets` genes.
pub fn interaction_pairs(summary: &PosteriorSummary, min_shared_targets: usize) -> Vec<InteractionPair> {
    summary
        .interaction_pairs
        .iter()
        .filter(|p| p.shared_targets >= min_shared_targets)
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::ParamSample;
    use proptest::prelude::*;

    fn trace(n_genes: usize, n_tfs: usize, counts: Vec<u32>, samples: Vec<ParamSample>) -> ChainTrace {
        ChainTrace {
            chain_index: 0,
            seed: 0,
            n_genes,
            n_tfs,
            alpha_sum: vec![0.0; n_genes],
            inclusion_counts: counts,
            co_target_counts: vec![0; n_tfs * (n_tfs - 1) / 2],
            monitored_cells: vec![],
            monitored_states: vec![vec![]; samples.len()],
            snapshots: vec![],
            samples,
        }
    }

    fn sample(beta: Vec<f64>, gamma: Vec<f64>, w: Vec<f64>) -> ParamSample {
        ParamSample {
            iteration: 0,
            beta,
            gamma,
            sigma2: 1.0,
            w,
        }
    }

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn inclusion_edge_cases() {
        let s: Vec<_> = (0..4).map(|_| sample(vec![0.0], vec![], vec![0.5])).collect();
        let all = trace(1, 1, vec![4], s.clone());
        assert_eq!(inclusion_probabilities(&[all]).unwrap().get(0, 0), 1.0);
        let alt = trace(1, 1, vec![2], s);
        assert_eq!(inclusion_probabilities(&[alt]).unwrap().get(0, 0), 0.5);
        assert!(inclusion_probabilities(&[]).is_err());
        let empty = trace(1, 1, vec![0], vec![]);
        assert!(inclusion_probabilities(&[empty]).is_err());
    }

    #[test]
    fn pooled_inclusion_is_weighted_mean() {
        let a = trace(
            1,
            2,
            vec![3, 1],
            (0..4).map(|_| sample(vec![0.0; 2], vec![0.0], vec![0.5; 2])).collect(),
        );
        let b = trace(
            1,
            2,
            vec![5, 0],
            (0..10).map(|_| sample(vec![0.0; 2], vec![0.0], vec![0.5; 2])).collect(),
        );
        let pooled = inclusion_probabilities(&[a.clone(), b.clone()]).unwrap();
        let weighted = (a.inclusion_matrix().get(0, 0) * 4.0 + b.inclusion_matrix().get(0, 0) * 10.0) / 14.0;
        assert!((pooled.get(0, 0) - weighted).abs() < 1e-12);
    }

    #[test]
    fn target_gene_thresholds() {
        let inc = Matrix::from_rows(&[vec![0.3], vec![0.9], vec![0.5]]).unwrap();
        let genes = vec!["c".to_string(), "a".to_string(), "b".to_string()];
        assert_eq!(target_genes_from(&inc, &genes, 0, 0.5).unwrap(), vec![1, 2]);
        assert!(target_genes_from(&inc, &genes, 0, 0.9 + 1e-9).unwrap().is_empty());
        assert_eq!(target_genes_from(&inc, &genes, 0, 1e-12).unwrap().len(), 3);
        assert!(target_genes_from(&inc, &genes, 1, 0.5).is_err());
    }

    #[test]
    fn ties_break_by_gene_id() {
        let inc = Matrix::from_rows(&[vec![0.7], vec![0.7]]).unwrap();
        let genes = vec!["z".to_string(), "a".to_string()];
        assert_eq!(target_genes_from(&inc, &genes, 0, 0.5).unwrap(), vec![1, 0]);
    }

    #[test]
    fn interval_spot_values() {
        assert_eq!(credible_interval(&[2.5; 10], 0.95).unwrap(), (2.5, 2.5));
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let (lo, hi) = credible_interval(&xs, 0.95).unwrap();
        assert!((lo - 3.475).abs() < 1e-12 && (hi - 97.525).abs() < 1e-12);
        assert!(credible_interval(&[1.0], 0.95).is_err());
    }

    fn summary_with(linear: Vec<(f64, f64)>, pairs: Vec<((usize, usize), (f64, f64), usize)>) -> PosteriorSummary {
        PosteriorSummary {
            gene_ids: vec![],
            tf_ids: vec![],
            options: SummaryOptions::default(),
            retained: 0,
            inclusion: Matrix::zeros(0, 0),
            alpha_mean: vec![],
            linear: linear
                .iter()
                .enumerate()
                .map(|(j, &(lower, upper))| CoefficientSummary {
                    id: CoefficientId::Linear(j),
                    mean: (lower + upper) / 2.0,
                    lower,
                    upper,
                })
                .collect(),
            interactions: pairs
                .iter()
                .map(|&((j, k), (lower, upper), _)| CoefficientSummary {
                    id: CoefficientId::Pair(j, k),
                    mean: 0.0,
                    lower,
                    upper,
                })
                .collect(),
            weights: vec![],
            target_sets: vec![],
            interaction_pairs: pairs
                .iter()
                .filter(|(_, (l, u), _)| excludes_zero(*l, *u))
                .map(|&((j, k), (lower, upper), shared)| InteractionPair {
                    j,
                    k,
                    mean: 0.0,
                    lower,
                    upper,
                    shared_targets: shared,
                })
                .collect(),
        }
    }

    #[test]
    fn classifies_effects() {
        let s = summary_with(
            vec![(0.2, 0.8), (-0.1, 0.3), (-0.8, -0.2)],
            vec![((0, 1), (0.1, 0.4), 0), ((0, 2), (-1.0, 1.0), 9)],
        );
        let e = significant_effects(&s);
        assert_eq!(e.activators, vec![0]);
        assert_eq!(e.repressors, vec![2]);
        assert_eq!(e.pairs, vec![(0, 1)]);
    }

    #[test]
    fn shared_target_filter() {
        let s = summary_with(
            vec![],
            vec![
                ((0, 1), (0.1, 0.4), 0),
                ((1, 2), (0.2, 0.5), 4),
                ((0, 2), (-0.5, -0.1), 3),
            ],
        );
        assert_eq!(interaction_pairs(&s, 0).len(), 3);
        let kept = interaction_pairs(&s, 4);
        assert_eq!(kept.len(), 1);
        assert_eq!((kept[0].j, kept[0].k), (1, 2));
        assert_eq!(shared_count(&(0..10).collect::<Vec<_>>(), &[6, 7, 8, 9, 20, 21]), 4);
    }

    #[test]
    fn constant_weights_summary() {
        let t = trace(
            1,
            2,
            vec![0, 0],
            (0..5)
                .map(|_| sample(vec![0.0; 2], vec![0.0], vec![0.8, 0.8]))
                .collect(),
        );
        let ws = weight_summary(&[t]).unwrap();
        assert_eq!(ws.len(), 2);
        for w in ws {
            assert!(w.quantiles.iter().all(|&q| (q - 0.8).abs() < 1e-15));
            assert_eq!(w.mass_above_half, 1.0);
        }
    }

    #[test]
    fn summarize_end_to_end_on_handmade_trace() {
        let samples: Vec<_> = (0..20)
            .map(|k| {
                sample(
                    vec![1.0 + 0.01 * k as f64, -0.5, 0.0],
                    vec![0.5, 0.0, 0.0],
                    vec![0.6, 0.4, 0.5],
                )
            })
            .collect();
        // gene 0: TF0+TF1 always, gene 1: TF0 only, gene 2: nothing
        let counts = vec![20, 20, 0, 20, 0, 0, 0, 0, 0];
        let t = trace(3, 3, counts, samples);
        let s = summarize(&[t], &ids("g", 3), &ids("t", 3), SummaryOptions::default()).unwrap();
        assert_eq!(s.target_sets[0], vec![0, 1]);
        assert_eq!(s.target_sets[1], vec![0]);
        assert_eq!(s.interaction_pairs.len(), 1);
        assert_eq!(s.interaction_pairs[0].shared_targets, 1);
        let e = significant_effects(&s);
        assert_eq!(e.activators, vec![0]);
        assert_eq!(e.repressors, vec![1]);
    }

    proptest! {
        #[test]
        fn thresholding_is_monotone(vals in proptest::collection::vec(0.0..=1.0f64, 1..30), t1 in 0.0..1.0f64, t2 in 0.0..1.0f64) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let inc = Matrix::from_vec(vals.len(), 1, vals.clone()).unwrap();
            let genes = ids("g", vals.len());
            let wide = target_genes_from(&inc, &genes, 0, lo).unwrap();
            let narrow = target_genes_from(&inc, &genes, 0, hi).unwrap();
            prop_assert!(narrow.iter().all(|g| wide.contains(g)));
        }

        #[test]
        fn interval_is_affine_equivariant(vals in proptest::collection::vec(-10.0..10.0f64, 2..50), a in 0.1..5.0f64, b in -5.0..5.0f64) {
            let (lo, hi) = credible_interval(&vals, 0.9).unwrap();
            let moved: Vec<f64> = vals.iter().map(|x| a * x + b).collect();
            let (lo2, hi2) = credible_interval(&moved, 0.9).unwrap();
            prop_assert!((lo2 - (a * lo + b)).abs() < 1e-9);
            prop_assert!((hi2 - (a * hi + b)).abs() < 1e-9);
            prop_assert!(lo <= hi);
        }

        #[test]
        fn effect_labels_ignore_draw_order(mut draws in proptest::collection::vec(-3.0..3.0f64, 5..40), seed in 0u64..100) {
            let before = summarize_draws(CoefficientId::Linear(0), &draws, 0.95).unwrap();
            let n = draws.len();
            draws.rotate_left(seed as usize % n);
            let after = summarize_draws(CoefficientId::Linear(0), &draws, 0.95).unwrap();
            prop_assert_eq!(before.lower, after.lower);
            prop_assert_eq!(before.upper, after.upper);
        }
    }
}
