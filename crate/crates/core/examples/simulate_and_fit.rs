//! Simulate a network with known truth, fit it with two chains and compare
//! the posterior with what was planted.
//!
//!     cargo run --release --example simulate_and_fit

use regnet::model::Hyperparams;
use regnet::sampler::{run_chains, ChainConfig};
use regnet::summary::{significant_effects, summarize, SummaryOptions};
use regnet::synth::{generate_synthetic, SynthSpec};

fn main() -> regnet::Result<()> {
    let spec = SynthSpec {
        n_genes: 120,
        n_tfs: 4,
        n_experiments: 40,
        sparsity: 0.08,
        prior_fidelity: 0.8,
        seed: 3,
        ..SynthSpec::default()
    };
    let truth = generate_synthetic(&spec)?;
    let ds = &truth.dataset;
    println!(
        "{} genes x {} TFs x {} experiments, {} true edges",
        ds.n_genes(),
        ds.n_tfs(),
        ds.n_experiments(),
        truth.network.count_active()
    );

    let config = ChainConfig {
        n_iterations: 1500,
        burn_in: 500,
        thin: 1,
        n_chains: 2,
        seed: 11,
        ..ChainConfig::default()
    };
    let traces = run_chains(ds, &Hyperparams::default(), &config)
        .into_iter()
        .collect::<regnet::Result<Vec<_>>>()?;
    let summary = summarize(&traces, ds.gene_ids(), ds.tf_ids(), SummaryOptions::default())?;

    println!(
        "\n{:<8} {:>8} {:>8} {:>18} {:>8} {:>8}",
        "TF", "true b", "mean", "95% interval", "targets", "correct"
    );
    for (j, c) in summary.linear.iter().enumerate() {
        let targets = &summary.target_sets[j];
        let correct = targets.iter().filter(|&&i| truth.network.get(i, j)).count();
        println!(
            "{:<8} {:>8.3} {:>8.3} [{:>7.3}, {:>7.3}] {:>8} {:>8}",
            ds.tf_ids()[j],
            truth.params.beta[j],
            c.mean,
            c.lower,
            c.upper,
            targets.len(),
            correct
        );
    }
    let eff = significant_effects(&summary);
    println!("\nactivators {:?}, repressors {:?}", eff.activators, eff.repressors);
    for w in &summary.weights {
        println!(
            "w[{}] median {:.2}, P(w > 0.5) = {:.2}",
            ds.tf_ids()[w.tf],
            w.quantiles[2],
            w.mass_above_half
        );
    }
    Ok(())
}
