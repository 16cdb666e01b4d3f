//! Checking inferred target sets against outside evidence: functional
//! enrichment, a knockout experiment and two single-source baselines.
//!
//!     cargo run --example target_validation

use std::collections::BTreeMap;

use regnet::validation::{
    annotation_from_pairs, baseline_chip_targets, enriched_categories, hypergeometric_enrichment, knockout_tstat,
    knockout_tstat_with, target_overlap, KnockoutExperiment, TStatMode, TStatOptions,
};

fn main() -> regnet::Result<()> {
    // 2 of 2 drawn genes fall in a category of 5 out of 10
    println!(
        "P(X >= 2) drawing 2 of 10 with 5 marked: {:.4}",
        hypergeometric_enrichment(2, 2, 5, 10)?
    );

    // 200 annotated genes; the first 15 share a pathway
    let genes: Vec<String> = (0..200).map(|i| format!("YG{i:03}")).collect();
    let mut pairs = Vec::new();
    for (i, g) in genes.iter().enumerate() {
        pairs.push((
            g.as_str(),
            if i < 15 {
                "ribosome"
            } else if i % 3 == 0 {
                "transport"
            } else {
                "other"
            },
        ));
    }
    let annotation = annotation_from_pairs(pairs, genes.len())?;
    let targets: Vec<String> = genes[..10].iter().chain(&genes[100..104]).cloned().collect();
    let result = enriched_categories(&targets, &annotation, 0.05)?;
    for c in &result.enriched {
        println!(
            "enriched: {} ({} of {} targets, category size {}, p = {:.2e})",
            c.category,
            c.overlap,
            targets.len(),
            c.category_size,
            c.p_value
        );
    }
    println!(
        "fraction of targets in an enriched category: {:.2}",
        result.proportion_in_enriched
    );

    // knockout: targets respond strongly, everything else barely moves
    let mut response = BTreeMap::new();
    for (i, g) in genes.iter().enumerate() {
        let r = if i < 10 {
            2.0 + (i as f64) * 0.1
        } else {
            ((i * 37) % 11) as f64 * 0.05 - 0.25
        };
        response.insert(g.clone(), r);
    }
    let ko = KnockoutExperiment::new("TF1", response)?;
    println!("\nknockout t (Welch, absolute): {:.4}", knockout_tstat(&targets, &ko)?);
    let one = TStatOptions {
        mode: TStatMode::OneSample,
        absolute: true,
    };
    println!(
        "knockout t (one-sample):      {:.4}",
        knockout_tstat_with(&targets, &ko, one)?
    );

    // thresholded binding baseline and its overlap with the model's targets
    let pvalues: Vec<f64> = (0..genes.len()).map(|i| if i < 12 { 1e-4 } else { 0.2 }).collect();
    let chip = baseline_chip_targets(&pvalues, 1e-3)?;
    let target_idx: Vec<usize> = (0..10).chain(100..104).collect();
    let (shared, fraction) = target_overlap(&target_idx, &chip);
    println!(
        "\nbinding baseline: {} genes, {shared} shared with the model ({fraction:.2})",
        chip.len()
    );
    Ok(())
}
