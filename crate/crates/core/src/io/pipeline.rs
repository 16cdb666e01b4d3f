use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;

use super::assemble::{assemble_dataset, AssembleOptions, AssemblyReport};
use super::load::{load_expression, load_prior_matrix, load_tf_map, PriorKind};
use super::output::{
    checkpoint_path, ensure_dir, read_checkpoint, write_checkpoint, write_outputs, write_traces, RunConfig,
    RunManifest, TraceFile, FILE_FORMAT_VERSION,
};
use super::tsv::read_matrix;
use crate::diagnostics::{convergence_report, ConvergenceReport};
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::sampler::{ChainRunner, ChainTrace};
use crate::summary::{summarize, PosteriorSummary};

pub struct LoadedInputs {
    pub dataset: Dataset,
    pub assembly: AssemblyReport,
    pub imputed_cells: usize,
}

/// Reads and aligns every input named in `config`.
pub fn load_inputs(config: &RunConfig) -> Result<LoadedInputs> {
    let pre = &config.preprocessing;
    let inputs = &config.inputs;
    let expression = load_expression(&inputs.expression, pre.imputation)?;
    let chip = load_prior_matrix(&inputs.chip, PriorKind::Chip, pre.chip_transform, pre.clamp)?;
    let motif = load_prior_matrix(&inputs.motif, PriorKind::Motif, pre.motif_transform, pre.clamp)?;
    let tf_map = match &inputs.tf_map {
        Some(p) => load_tf_map(p)?,
        None => BTreeMap::new(),
    };
    let profiles = inputs.tf_profiles.as_deref().map(read_matrix).transpose()?;
    let assembled = assemble_dataset(
        &expression.matrix,
        &chip,
        &motif,
        &tf_map,
        profiles.as_ref(),
        AssembleOptions {
            center_rows: pre.center_rows,
            clamp: pre.clamp,
        },
    )?;
    Ok(LoadedInputs {
        dataset: assembled.dataset,
        assembly: assembled.report,
        imputed_cells: expression.imputed,
    })
}

pub struct FitOutcome {
    pub dataset: Dataset,
    pub traces: Vec<ChainTrace>,
    pub summary: PosteriorSummary,
    pub report: ConvergenceReport,
    pub manifest: RunManifest,
    pub written: Vec<PathBuf>,
}

fn run_one(dataset: &Dataset, config: &RunConfig, chain: usize, resume: bool) -> Result<ChainTrace> {
    let path = checkpoint_path(&config.output_dir, chain);
    let mut runner = if resume && path.is_file() {
        let cp = read_checkpoint(&path)?;
        if cp.config != config.chain || cp.hyper != config.hyper || cp.chain_index != chain {
            return Err(Error::invalid(format!(
                "{} was written by a run with different settings",
                path.display()
            )));
        }
        ChainRunner::from_checkpoint(dataset, cp)?
    } else {
        ChainRunner::new(dataset, &config.hyper, &config.chain, chain)?
    };
    if config.checkpoint_every == 0 {
        return runner.run_to_end();
    }
    while !runner.is_done() {
        runner.run_sweeps(config.checkpoint_every)?;
        write_checkpoint(&path, &runner.checkpoint())?;
    }
    runner.run_to_end()
}

/// Runs every chain, summarizes, and writes all outputs into `config.output_dir`.
///
/// With `resume`, chains restart from their checkpoint files where present.
pub fn run_fit(config: &RunConfig, resume: bool) -> Result<FitOutcome> {
    config.validate()?;
    let LoadedInputs {
        dataset,
        assembly,
        imputed_cells,
    } = load_inputs(config)?;
    ensure_dir(&config.output_dir)?;
    if config.checkpoint_every > 0 {
        ensure_dir(&config.output_dir.join("checkpoints"))?;
    }
    let traces = (0..config.chain.n_chains)
        .into_par_iter()
        .map(|c| run_one(&dataset, config, c, resume))
        .collect::<Result<Vec<_>>>()?;

    let summary = summarize(&traces, dataset.gene_ids(), dataset.tf_ids(), config.summary)?;
    let report = convergence_report(&traces, &config.monitor, config.rhat_threshold)?;
    let manifest = RunManifest::new(config, &dataset, assembly, imputed_cells);
    let mut written = write_outputs(&config.output_dir, &summary, &report, &manifest)?;
    let trace_file = TraceFile {
        format_version: FILE_FORMAT_VERSION,
        gene_ids: dataset.gene_ids().to_vec(),
        tf_ids: dataset.tf_ids().to_vec(),
        traces,
    };
    let trace_path = config.output_dir.join("traces.json");
    write_traces(&trace_path, &trace_file)?;
    written.push(trace_path);
    Ok(FitOutcome {
        dataset,
        traces: trace_file.traces,
        summary,
        report,
        manifest,
        written,
    })
}
