//! How many targets does the prior alone give each TF as the weight moves
//! between the two sources?
//!
//!     cargo run --example sparsity_study

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regnet::model::{default_weight_grid, prior_sparsity_study};
use regnet::synth::{generate_synthetic, SynthSpec};

fn main() -> regnet::Result<()> {
    let p = generate_synthetic(&SynthSpec {
        n_genes: 500,
        n_tfs: 3,
        n_experiments: 2,
        sparsity: 0.05,
        prior_fidelity: 0.85,
        motif_fidelity: Some(0.6),
        seed: 8,
        ..SynthSpec::default()
    })?;
    let grid = default_weight_grid();
    let study = prior_sparsity_study(&p.dataset, &grid, 10_000, &mut ChaCha8Rng::seed_from_u64(1))?;

    let true_counts: Vec<usize> = (0..3)
        .map(|j| (0..500).filter(|&i| p.network.get(i, j)).count())
        .collect();
    println!("genes with prior inclusion >= 0.5 (true targets: {true_counts:?})");
    print!("{:>6}", "w");
    for id in p.dataset.tf_ids() {
        print!("{id:>8}");
    }
    println!();
    for (k, w) in study.w_grid.iter().enumerate().step_by(2) {
        print!("{w:>6.2}");
        for counts in &study.counts {
            print!("{:>8}", counts[k]);
        }
        println!();
    }
    Ok(())
}
