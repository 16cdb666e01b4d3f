//! Convergence checks: split R-hat and effective sample size on toy series,
//! then a full report for a short fit.
//!
//!     cargo run --release --example convergence

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use regnet::diagnostics::{convergence_report, effective_sample_size, split_rhat, MonitorSelector};
use regnet::model::Hyperparams;
use regnet::sampler::{run_chains, ChainConfig};
use regnet::synth::{generate_synthetic, SynthSpec};

fn ar1(rng: &mut ChaCha8Rng, phi: f64, start: f64, n: usize) -> Vec<f64> {
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = start;
    (0..n)
        .map(|_| {
            x = phi * x + noise.sample(rng);
            x
        })
        .collect()
}

fn main() -> regnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:<32} {:>8} {:>10}", "series", "R-hat", "ESS");
    for (label, phi, starts) in [
        ("independent draws", 0.0, [0.0, 0.0, 0.0]),
        ("sticky AR(1), phi = 0.95", 0.95, [0.0, 0.0, 0.0]),
        ("sticky AR(1), far-apart starts", 0.99, [-30.0, 0.0, 30.0]),
    ] {
        let chains: Vec<Vec<f64>> = starts.iter().map(|&s| ar1(&mut rng, phi, s, 1000)).collect();
        println!(
            "{label:<32} {:>8.3} {:>10.1}",
            split_rhat(&chains)?,
            effective_sample_size(&chains)?
        );
    }

    let p = generate_synthetic(&SynthSpec {
        n_genes: 60,
        n_tfs: 3,
        n_experiments: 20,
        seed: 2,
        ..SynthSpec::default()
    })?;
    let config = ChainConfig {
        n_iterations: 800,
        burn_in: 200,
        n_chains: 3,
        ..ChainConfig::default()
    };
    let traces = run_chains(&p.dataset, &Hyperparams::default(), &config)
        .into_iter()
        .collect::<regnet::Result<Vec<_>>>()?;
    let report = convergence_report(&traces, &MonitorSelector::default(), 1.1)?;
    println!(
        "\nfit: {} chains x {} draws, verdict {:?}, worst R-hat {:.4}",
        report.n_chains,
        report.draws_per_chain,
        report.verdict,
        report.worst_rhat.unwrap_or(f64::NAN)
    );
    for d in report.parameters.iter().filter(|d| !d.name.starts_with("inclusion")) {
        match (d.rhat, d.ess, &d.skipped) {
            (Some(r), Some(e), _) => println!("  {:<10} R-hat {r:.4}  ESS {e:8.1}", d.name),
            (_, _, Some(why)) => println!("  {:<10} skipped: {why}", d.name),
            _ => {}
        }
    }
    Ok(())
}
