//! External checks of inferred targets: knockout response, functional
//! enrichment, and the single-source baselines they are compared with.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::numeric::{log_sum_exp, mean, sample_variance};

/// Per-gene expression change between a TF knockout strain and wild type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnockoutExperiment {
    pub tf: String,
    pub response: BTreeMap<String, f64>,
}

impl KnockoutExperiment {
    pub fn new(tf: impl Into<String>, response: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((g, v)) = response.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite knockout response {v} for gene '{g}'"
            )));
        }
        Ok(KnockoutExperiment {
            tf: tf.into(),
            response,
        })
    }
}

/// Gene to functional-category assignments over a gene universe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalAnnotation {
    pub categories: BTreeMap<String, BTreeSet<String>>,
    pub universe_size: usize,
}

impl FunctionalAnnotation {
    pub fn new(categories: BTreeMap<String, BTreeSet<String>>, universe_size: usize) -> Result<Self> {
        if categories.len() > universe_size {
            return Err(Error::invalid(format!(
                "{} annotated genes exceed universe size {universe_size}",
                categories.len()
            )));
        }
        Ok(FunctionalAnnotation {
            categories,
            universe_size,
        })
    }

    /// Genes per category.
    pub fn category_sizes(&self) -> BTreeMap<&str, usize> {
        let mut sizes = BTreeMap::new();
        for cats in self.categories.values() {
            for c in cats {
                *sizes.entry(c.as_str()).or_insert(0) += 1;
            }
        }
        sizes
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TStatMode {
    /// Welch two-sample statistic, targets versus all other genes.
    #[default]
    Welch,
    /// One-sample statistic of the targets against the background mean.
    OneSample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TStatOptions {
    pub mode: TStatMode,
    /// Compare absolute responses (default) or signed ones.
    pub absolute: bool,
}

impl Default for TStatOptions {
    fn default() -> Self {
        TStatOptions {
            mode: TStatMode::Welch,
            absolute: true,
        }
    }
}

fn split_groups(targets: &HashSet<&str>, experiment: &KnockoutExperiment, absolute: bool) -> (Vec<f64>, Vec<f64>) {
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for (gene, &r) in &experiment.response {
        let v = if absolute { r.abs() } else { r };
        if targets.contains(gene.as_str()) {
            inside.push(v);
        } else {
            outside.push(v);
        }
    }
    (inside, outside)
}

/// t-statistic of the knockout response of inferred targets against all other
/// measured genes.
pub fn knockout_tstat_with(targets: &[String], experiment: &KnockoutExperiment, options: TStatOptions) -> Result<f64> {
    let set: HashSet<&str> = targets.iter().map(String::as_str).collect();
    let (t, b) = split_groups(&set, experiment, options.absolute);
    if t.len() < 2 || b.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 targets and 2 background genes with responses, got {} and {}",
            t.len(),
            b.len()
        )));
    }
    let (vt, vb) = (sample_variance(&t), sample_variance(&b));
    let diff = mean(&t) - mean(&b);
    let se2 = match options.mode {
        TStatMode::Welch => {
            if vt <= 0.0 || vb <= 0.0 {
                return Err(Error::Degenerate("zero variance in a comparison group".into()));
            }
            vt / t.len() as f64 + vb / b.len() as f64
        }
        TStatMode::OneSample => {
            if vt <= 0.0 {
                return Err(Error::Degenerate("zero variance among targets".into()));
            }
            vt / t.len() as f64
        }
    };
    Ok(diff / se2.sqrt())
}

/// Welch t-statistic on absolute knockout responses.
pub fn knockout_tstat(targets: &[String], experiment: &KnockoutExperiment) -> Result<f64> {
    knockout_tstat_with(targets, experiment, TStatOptions::default())
}

/// Upper tail `P(X >= k)` for `X ~ Hypergeometric(universe, category, drawn)`:
/// the chance that `drawn` genes picked at random from `universe` include at
/// least `k` of the `category` genes.
pub fn hypergeometric_enrichment(k: usize, drawn: usize, category: usize, universe: usize) -> Result<f64> {
    if drawn > universe || category > universe || k > drawn.min(category) {
        return Err(Error::invalid(format!(
            "inconsistent counts k={k}, n={drawn}, K={category}, N={universe}"
        )));
    }
    let lower = (drawn + category).saturating_sub(universe);
    let upper = drawn.min(category);
    if k <= lower {
        return Ok(1.0);
    }
    let ln_total = ln_binomial(universe as u64, drawn as u64);
    let mut terms = Vec::with_capacity(upper - k + 1);
    // log P(X = k) then the exact term ratio for successive x
    let mut log_p = ln_binomial(category as u64, k as u64)
        + ln_binomial((universe - category) as u64, (drawn - k) as u64)
        - ln_total;
    terms.push(log_p);
    for x in k..upper {
        let num = ((category - x) * (drawn - x)) as f64;
        let den = ((x + 1) * (x + 1 + universe - category - drawn)) as f64;
        log_p += num.ln() - den.ln();
        terms.push(log_p);
    }
    Ok(log_sum_exp(&terms).exp().min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrichedCategory {
    pub category: String,
    pub overlap: usize,
    pub category_size: usize,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentResult {
    pub enriched: Vec<EnrichedCategory>,
    /// Fraction of targets in at least one enriched category.
    pub proportion_in_enriched: f64,
}

/// Tests every category overlapping the targets and keeps those with `p < alpha`.
pub fn enriched_categories(
    targets: &[String],
    annotation: &FunctionalAnnotation,
    alpha: f64,
) -> Result<EnrichmentResult> {
    if targets.is_empty() {
        return Err(Error::invalid("empty target set"));
    }
    let unique: BTreeSet<&str> = targets.iter().map(String::as_str).collect();
    let drawn = unique.len();
    let sizes = annotation.category_sizes();
    let mut overlap: BTreeMap<&str, usize> = BTreeMap::new();
    for g in &unique {
        if let Some(cats) = annotation.categories.get(*g) {
            for c in cats {
                *overlap.entry(c.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut enriched = Vec::new();
    for (cat, &k) in &overlap {
        let size = sizes[cat];
        let p = hypergeometric_enrichment(k, drawn, size, annotation.universe_size.max(drawn))?;
        if p < alpha {
            enriched.push(EnrichedCategory {
                category: cat.to_string(),
                overlap: k,
                category_size: size,
                p_value: p,
            });
        }
    }
    enriched.sort_by(|a, b| {
        a.p_value
            .total_cmp(&b.p_value)
            .then_with(|| a.category.cmp(&b.category))
    });
    let hit: HashSet<&str> = enriched.iter().map(|e| e.category.as_str()).collect();
    let covered = unique
        .iter()
        .filter(|g| {
            annotation
                .categories
                .get(**g)
                .is_some_and(|cats| cats.iter().any(|c| hit.contains(c.as_str())))
        })
        .count();
    Ok(EnrichmentResult {
        enriched,
        proportion_in_enriched: covered as f64 / drawn as f64,
    })
}

/// Genes whose binding p-value is strictly below `cutoff`, for one TF column.
pub fn baseline_chip_targets(pvalues: &[f64], cutoff: f64) -> Result<Vec<usize>> {
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    Ok((0..pvalues.len()).filter(|&i| pvalues[i] < cutoff).collect())
}

/// [`baseline_chip_targets`] for every column of a genes x TFs p-value matrix.
pub fn baseline_chip_target_sets(pvalues: &crate::Matrix, cutoff: f64) -> Result<Vec<Vec<usize>>> {
    (0..pvalues.cols())
        .map(|j| baseline_chip_targets(&pvalues.column(j), cutoff))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationMode {
    #[default]
    Signed,
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTargets {
    pub genes: Vec<usize>,
    /// Genes with zero expression variance, assigned correlation 0.
    pub zero_variance: Vec<usize>,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// The `ceil(top_fraction * N)` genes most correlated with TF `j`'s
/// expression, ties broken by gene id.
pub fn baseline_correlation_targets(
    dataset: &Dataset,
    j: usize,
    top_fraction: f64,
    mode: CorrelationMode,
) -> Result<CorrelationTargets> {
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::invalid(format!("top_fraction {top_fraction} not in (0, 1]")));
    }
    if j >= dataset.n_tfs() {
        return Err(Error::IndexOutOfRange {
            what: "TF",
            index: j,
            len: dataset.n_tfs(),
        });
    }
    let f = dataset.f().row(j);
    let mut zero_variance = Vec::new();
    let mut scored: Vec<(usize, f64)> = (0..dataset.n_genes())
        .map(|i| {
            let r = pearson(dataset.g().row(i), f).unwrap_or_else(|| {
                zero_variance.push(i);
                0.0
            });
            (i, if mode == CorrelationMode::Absolute { r.abs() } else { r })
        })
        .collect();
    let ids = dataset.gene_ids();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| ids[a.0].cmp(&ids[b.0])));
    let take = ((top_fraction * dataset.n_genes() as f64).ceil() as usize).min(dataset.n_genes());
    Ok(CorrelationTargets {
        genes: scored.into_iter().take(take).map(|(i, _)| i).collect(),
        zero_variance,
    })
}

/// Intersection size and Jaccard index of two gene sets.
pub fn target_overlap<T: Eq + std::hash::Hash>(a: &[T], b: &[T]) -> (usize, f64) {
    let sa: HashSet<&T> = a.iter().collect();
    let sb: HashSet<&T> = b.iter().collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    (inter, if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// Gene ids of `idx`, for handing index-based target sets to the id-based checks.
pub fn gene_names(dataset_ids: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| dataset_ids[i].clone()).collect()
}

/// Builds an annotation from `(gene, category)` pairs.
pub fn annotation_from_pairs<'a>(
    pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    universe_size: usize,
) -> Result<FunctionalAnnotation> {
    let mut map: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (g, c) in pairs {
        map.entry(g.to_string()).or_default().insert(c.to_string());
    }
    FunctionalAnnotation::new(map.into_iter().collect(), universe_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ko(pairs: &[(&str, f64)]) -> KnockoutExperiment {
        KnockoutExperiment::new("tf", pairs.iter().map(|&(g, v)| (g.to_string(), v)).collect()).unwrap()
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn welch_hand_example() {
        let e = ko(&[("a", 2.0), ("b", -4.0), ("c", 0.0), ("d", 2.0)]);
        let t = knockout_tstat(&names(&["a", "b"]), &e).unwrap();
        assert!((t - 2.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn equal_means_give_zero() {
        let e = ko(&[("a", 1.0), ("b", 3.0), ("c", 3.0), ("d", 1.0)]);
        assert_eq!(knockout_tstat(&names(&["a", "b"]), &e).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_groups_error() {
        let e = ko(&[("a", 1.0), ("b", 3.0), ("c", 3.0)]);
        assert!(knockout_tstat(&names(&["a", "b"]), &e).is_err());
        let e = ko(&[("a", 1.0), ("b", 1.0), ("c", 3.0), ("d", 2.0)]);
        assert!(knockout_tstat(&names(&["a", "b"]), &e).is_err());
    }

    #[test]
    fn one_sample_variant() {
        let e = ko(&[("a", 2.0), ("b", 4.0), ("c", 0.0), ("d", 2.0)]);
        let opts = TStatOptions {
            mode: TStatMode::OneSample,
            absolute: true,
        };
        let t = knockout_tstat_with(&names(&["a", "b"]), &e, opts).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hypergeometric_spot_values() {
        assert_eq!(hypergeometric_enrichment(0, 2, 5, 10).unwrap(), 1.0);
        assert!((hypergeometric_enrichment(2, 2, 5, 10).unwrap() - 10.0 / 45.0).abs() < 1e-12);
        assert!(hypergeometric_enrichment(3, 2, 5, 10).is_err());
        assert!(hypergeometric_enrichment(1, 11, 5, 10).is_err());
    }

    #[test]
    fn hypergeometric_large_universe_is_finite() {
        let p = hypergeometric_enrichment(40, 100, 2000, 10_000_000).unwrap();
        assert!(p > 0.0 && p < 1e-50);
    }

    #[test]
    fn enrichment_single_category() {
        // 10-gene universe, category "x" covers 5 genes, all 3 targets in it
        let pairs: Vec<(String, String)> = (0..5).map(|i| (format!("g{i}"), "x".to_string())).collect();
        let ann = annotation_from_pairs(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())), 10).unwrap();
        let targets = names(&["g0", "g1", "g2"]);
        let p = hypergeometric_enrichment(3, 3, 5, 10).unwrap();
        let strict = enriched_categories(&targets, &ann, p / 2.0).unwrap();
        assert!(strict.enriched.is_empty());
        assert_eq!(strict.proportion_in_enriched, 0.0);
        let loose = enriched_categories(&targets, &ann, p * 2.0).unwrap();
        assert_eq!(loose.enriched.len(), 1);
        assert!((loose.enriched[0].p_value - p).abs() < 1e-15);
        assert_eq!(loose.proportion_in_enriched, 1.0);
        assert!(enriched_categories(&targets, &ann, 0.0).unwrap().enriched.is_empty());
        assert!(enriched_categories(&[], &ann, 0.5).is_err());
    }

    #[test]
    fn chip_baseline_is_strict() {
        assert_eq!(baseline_chip_targets(&[0.0005, 0.001, 0.002], 0.001).unwrap(), vec![0]);
        assert!(baseline_chip_targets(&[0.5; 4], 0.001).unwrap().is_empty());
        assert_eq!(baseline_chip_targets(&[0.2, 1.0, 0.99], 1.0).unwrap(), vec![0, 2]);
        assert!(baseline_chip_targets(&[1.5], 0.1).is_err());
    }

    #[test]
    fn overlap_statistics() {
        assert_eq!(target_overlap(&[1, 2, 3], &[1, 2, 3]), (3, 1.0));
        assert_eq!(target_overlap(&[1, 2], &[3, 4]), (0, 0.0));
        assert_eq!(target_overlap(&[1, 2], &[1, 2, 3, 4]), (2, 0.5));
    }

    proptest! {
        #[test]
        fn tail_is_monotone_in_k(universe in 1usize..60, a in 0usize..60, b in 0usize..60) {
            let category = a % (universe + 1);
            let drawn = b % (universe + 1);
            let mut last = 1.0f64;
            for k in 0..=drawn.min(category) {
                let p = hypergeometric_enrichment(k, drawn, category, universe).unwrap();
                prop_assert!(p <= last + 1e-12);
                last = p;
            }
        }

        #[test]
        fn tstat_sign_flips_when_groups_swap(xs in proptest::collection::vec(-5.0..5.0f64, 6..20)) {
            let half = xs.len() / 2;
            let e = KnockoutExperiment::new("tf", xs.iter().enumerate().map(|(i, &v)| (format!("g{i:02}"), v)).collect()).unwrap();
            let a: Vec<String> = (0..half).map(|i| format!("g{i:02}")).collect();
            let b: Vec<String> = (half..xs.len()).map(|i| format!("g{i:02}")).collect();
            if let (Ok(t1), Ok(t2)) = (knockout_tstat(&a, &e), knockout_tstat(&b, &e)) {
                prop_assert!((t1 + t2).abs() < 1e-9 * (1.0 + t1.abs()));
            }
        }

        #[test]
        fn tstat_location_invariant(xs in proptest::collection::vec(0.0..5.0f64, 6..20), shift in 0.0..10.0f64) {
            let mk = |s: f64| KnockoutExperiment::new("tf", xs.iter().enumerate().map(|(i, &v)| (format!("g{i:02}"), v + s)).collect()).unwrap();
            let a: Vec<String> = (0..3).map(|i| format!("g{i:02}")).collect();
            if let (Ok(t1), Ok(t2)) = (knockout_tstat(&a, &mk(0.0)), knockout_tstat(&a, &mk(shift))) {
                prop_assert!((t1 - t2).abs() < 1e-7 * (1.0 + t1.abs()));
            }
        }
    }
}
