//! The file-based workflow behind the `regnet` binary: write a synthetic
//! dataset to disk, fit it from a run configuration, and read the manifest
//! back to repeat the run.
//!
//!     cargo run --release --example file_pipeline

use regnet::io::{read_manifest, run_fit, write_synthetic, InputPaths, PriorTransform, RunConfig};
use regnet::sampler::ChainConfig;
use regnet::synth::{generate_synthetic, SynthSpec};

fn main() -> regnet::Result<()> {
    let root = std::env::temp_dir().join("regnet-file-pipeline");
    let spec = SynthSpec {
        n_genes: 60,
        n_tfs: 3,
        n_experiments: 20,
        seed: 12,
        ..SynthSpec::default()
    };
    let problem = generate_synthetic(&spec)?;
    let data = root.join("data");
    write_synthetic(&data, &problem, &serde_json::to_string_pretty(&spec).unwrap())?;

    let mut config = RunConfig {
        inputs: InputPaths {
            expression: data.join("expression.tsv"),
            chip: data.join("chip.tsv"),
            motif: data.join("motif.tsv"),
            tf_profiles: Some(data.join("tf_profiles.tsv")),
            ..InputPaths::default()
        },
        chain: ChainConfig {
            n_iterations: 600,
            burn_in: 200,
            ..ChainConfig::default()
        },
        output_dir: root.join("fit"),
        ..RunConfig::default()
    };
    // the simulated priors already are probabilities
    config.preprocessing.chip_transform = PriorTransform::None;
    config.preprocessing.motif_transform = PriorTransform::None;

    let outcome = run_fit(&config, false)?;
    println!("convergence: {:?}", outcome.report.verdict);
    for path in &outcome.written {
        println!("wrote {}", path.display());
    }

    let manifest = read_manifest(&config.output_dir.join("manifest.json"))?;
    let mut again = manifest.config.clone();
    again.output_dir = root.join("rerun");
    run_fit(&again, false)?;
    let same = std::fs::read(root.join("fit/traces.json")).ok() == std::fs::read(root.join("rerun/traces.json")).ok();
    println!("rerun from manifest identical: {same}");
    Ok(())
}
