use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::assemble::AssemblyReport;
use super::load::{Imputation, PriorTransform};
use super::tsv::{format_real, read_text, write_matrix, write_text, LabeledMatrix};
use crate::diagnostics::{ConvergenceReport, MonitorSelector};
use crate::error::{Error, Result};
use crate::model::{ClampPolicy, Dataset, Hyperparams, NetworkState};
use crate::sampler::{ChainConfig, ChainTrace, Checkpoint, CoefficientId, CHECKPOINT_VERSION};
use crate::summary::{significant_effects, PosteriorSummary, SummaryOptions};
use crate::synth::SyntheticProblem;

/// Version of the trace and manifest JSON layouts.
pub const FILE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InputPaths {
    pub expression: PathBuf,
    pub chip: PathBuf,
    pub motif: PathBuf,
    /// `tf<TAB>gene` map; needed unless every TF has an explicit profile.
    pub tf_map: Option<PathBuf>,
    /// TFs x experiments activity profiles overriding the map.
    pub tf_profiles: Option<PathBuf>,
    pub annotation: Option<PathBuf>,
    pub knockout: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub center_rows: bool,
    pub clamp: ClampPolicy,
    pub chip_transform: PriorTransform,
    pub motif_transform: PriorTransform,
    pub imputation: Imputation,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Preprocessing {
            center_rows: false,
            clamp: ClampPolicy::default(),
            chip_transform: PriorTransform::OneMinusP,
            motif_transform: PriorTransform::OneMinusP,
            imputation: Imputation::RowMean,
        }
    }
}

/// Everything needed to reproduce a fit. Interaction and self-regulation
/// switches live in `hyper` and `chain` respectively.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub inputs: InputPaths,
    pub preprocessing: Preprocessing,
    pub hyper: Hyperparams,
    pub chain: ChainConfig,
    pub summary: SummaryOptions,
    pub monitor: MonitorSelector,
    pub rhat_threshold: f64,
    /// Edges with inclusion strictly above this are written to `edges.tsv`.
    pub emission_floor: f64,
    /// Write a resumable checkpoint every this many sweeps (0 = never).
    pub checkpoint_every: usize,
    /// Not recorded in the manifest so reruns elsewhere stay byte-identical.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: InputPaths::default(),
            preprocessing: Preprocessing::default(),
            hyper: Hyperparams::default(),
            chain: ChainConfig::default(),
            summary: SummaryOptions::default(),
            monitor: MonitorSelector::default(),
            rhat_threshold: 1.1,
            emission_floor: 0.0,
            checkpoint_every: 0,
            output_dir: PathBuf::from("regnet-out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        self.chain.validate()?;
        let i = &self.inputs;
        let required = [Some(&i.expression), Some(&i.chip), Some(&i.motif)];
        let optional = [
            i.tf_map.as_ref(),
            i.tf_profiles.as_ref(),
            i.annotation.as_ref(),
            i.knockout.as_ref(),
        ];
        for p in required.into_iter().chain(optional).flatten() {
            if !p.is_file() {
                return Err(Error::invalid(format!("input file {} does not exist", p.display())));
            }
        }
        if i.tf_map.is_none() && i.tf_profiles.is_none() {
            return Err(Error::invalid("either a TF map or explicit TF profiles is required"));
        }
        if !(0.0..1.0).contains(&self.emission_floor) {
            return Err(Error::invalid("emission floor must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetShape {
    pub n_genes: usize,
    pub n_tfs: usize,
    pub n_experiments: usize,
}

/// Machine-readable record of a run, sufficient to repeat it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub config: RunConfig,
    /// Chain `c` draws from the counter-based stream keyed by `(seed, c)`.
    pub chain_seeds: Vec<(usize, u64)>,
    pub dataset: DatasetShape,
    pub assembly: AssemblyReport,
    pub imputed_cells: usize,
}

impl RunManifest {
    pub fn new(config: &RunConfig, dataset: &Dataset, assembly: AssemblyReport, imputed_cells: usize) -> Self {
        RunManifest {
            format_version: FILE_FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            chain_seeds: (0..config.chain.n_chains).map(|c| (c, config.chain.seed)).collect(),
            dataset: DatasetShape {
                n_genes: dataset.n_genes(),
                n_tfs: dataset.n_tfs(),
                n_experiments: dataset.n_experiments(),
            },
            assembly,
            imputed_cells,
        }
    }
}

/// All chains of a run with the identifiers needed to summarize them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub format_version: u32,
    pub gene_ids: Vec<String>,
    pub tf_ids: Vec<String>,
    pub traces: Vec<ChainTrace>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// Reads a JSON document after checking its `format_version` field.
fn read_versioned<T: DeserializeOwned>(path: &Path, expected: u32) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(&read_text(path)?)?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::invalid(format!("{}: missing format_version", path.display())))?;
    if found != expected as u64 {
        return Err(Error::VersionMismatch {
            found: found.min(u32::MAX as u64) as u32,
            expected,
        });
    }
    Ok(serde_json::from_value(value)?)
}

pub fn write_traces(path: &Path, file: &TraceFile) -> Result<()> {
    write_json(path, file)
}

pub fn read_traces(path: &Path) -> Result<TraceFile> {
    read_versioned(path, FILE_FORMAT_VERSION)
}

pub fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    // write-then-rename so an interrupted write never leaves a torn checkpoint
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let tmp = path.with_extension("json.tmp");
    write_json(&tmp, checkpoint)?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_versioned(path, CHECKPOINT_VERSION)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    read_versioned(path, FILE_FORMAT_VERSION)
}

pub fn checkpoint_path(dir: &Path, chain: usize) -> PathBuf {
    dir.join("checkpoints").join(format!("chain-{chain}.json"))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn name_of(summary: &PosteriorSummary, id: CoefficientId) -> (String, String, &'static str) {
    match id {
        CoefficientId::Linear(j) => (summary.tf_ids[j].clone(), "-".into(), "beta"),
        CoefficientId::Pair(j, k) => (summary.tf_ids[j].clone(), summary.tf_ids[k].clone(), "gamma"),
    }
}

pub fn edges_tsv(summary: &PosteriorSummary, floor: f64) -> String {
    let mut out = String::from("gene\ttf\tinclusion\n");
    for (i, gene) in summary.gene_ids.iter().enumerate() {
        for (j, tf) in summary.tf_ids.iter().enumerate() {
            let p = summary.inclusion.get(i, j);
            if p > floor {
                let _ = writeln!(out, "{gene}\t{tf}\t{}", format_real(p));
            }
        }
    }
    out
}

pub fn coefficients_tsv(summary: &PosteriorSummary) -> String {
    let effects = significant_effects(summary);
    let mut out = format!(
        "term\ttf\tpartner\tmean\tlower_{0}\tupper_{0}\tcall\n",
        summary.options.level
    );
    for c in summary.linear.iter().chain(&summary.interactions) {
        let (tf, partner, term) = name_of(summary, c.id);
        let call = match c.id {
            CoefficientId::Linear(j) if effects.activators.contains(&j) => "activator",
            CoefficientId::Linear(j) if effects.repressors.contains(&j) => "repressor",
            CoefficientId::Pair(j, k) if effects.pairs.contains(&(j, k)) => "significant",
            _ => "none",
        };
        let _ = writeln!(
            out,
            "{term}\t{tf}\t{partner}\t{}\t{}\t{}\t{call}",
            format_real(c.mean),
            format_real(c.lower),
            format_real(c.upper)
        );
    }
    out
}

pub fn weights_tsv(summary: &PosteriorSummary) -> String {
    let mut out = String::from("tf\tq0.025\tq0.25\tq0.5\tq0.75\tq0.975\tmass_above_0.5\n");
    for w in &summary.weights {
        let _ = write!(out, "{}", summary.tf_ids[w.tf]);
        for q in w.quantiles {
            let _ = write!(out, "\t{}", format_real(q));
        }
        let _ = writeln!(out, "\t{}", format_real(w.mass_above_half));
    }
    out
}

pub fn interactions_tsv(summary: &PosteriorSummary) -> String {
    let mut out = String::from("tf_a\ttf_b\tmean\tlower\tupper\tshared_targets\tpasses_shared_filter\n");
    for p in &summary.interaction_pairs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            summary.tf_ids[p.j],
            summary.tf_ids[p.k],
            format_real(p.mean),
            format_real(p.lower),
            format_real(p.upper),
            p.shared_targets,
            p.shared_targets >= summary.options.min_shared_targets
        );
    }
    out
}

pub fn convergence_tsv(report: &ConvergenceReport) -> String {
    let opt = |v: Option<f64>| v.map(format_real).unwrap_or_else(|| "NA".into());
    let mut out = String::from("parameter\trhat\tess\tnote\n");
    for p in &report.parameters {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            p.name,
            opt(p.rhat),
            opt(p.ess),
            p.skipped.as_deref().unwrap_or("")
        );
    }
    out
}

fn put(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    write_text(&path, text)?;
    written.push(path);
    Ok(())
}

/// Writes the posterior tables: edges, inclusion matrix, coefficients,
/// weights, interaction pairs and the full summary as JSON.
pub fn write_summary_tables(dir: &Path, summary: &PosteriorSummary, emission_floor: f64) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    put(dir, "edges.tsv", &edges_tsv(summary, emission_floor), &mut written)?;
    put(dir, "coefficients.tsv", &coefficients_tsv(summary), &mut written)?;
    put(dir, "weights.tsv", &weights_tsv(summary), &mut written)?;
    put(dir, "interactions.tsv", &interactions_tsv(summary), &mut written)?;
    put(dir, "summary.json", &to_json(summary)?, &mut written)?;
    let inclusion = LabeledMatrix::new(
        "gene",
        summary.gene_ids.clone(),
        summary.tf_ids.clone(),
        summary.inclusion.clone(),
    )?;
    let path = dir.join("inclusion.tsv");
    write_matrix(&path, &inclusion)?;
    written.push(path);
    Ok(written)
}

pub fn write_report(dir: &Path, report: &ConvergenceReport) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    put(dir, "convergence.tsv", &convergence_tsv(report), &mut written)?;
    put(dir, "convergence.json", &to_json(report)?, &mut written)?;
    Ok(written)
}

/// Writes the result tables, convergence report and manifest into `dir`.
/// Returns the paths written.
pub fn write_outputs(
    dir: &Path,
    summary: &PosteriorSummary,
    report: &ConvergenceReport,
    manifest: &RunManifest,
) -> Result<Vec<PathBuf>> {
    let mut written = write_summary_tables(dir, summary, manifest.config.emission_floor)?;
    written.extend(write_report(dir, report)?);
    put(dir, "manifest.json", &to_json(manifest)?, &mut written)?;
    Ok(written)
}

fn network_tsv(dataset: &Dataset, network: &NetworkState) -> String {
    let mut out = String::from("gene");
    for tf in dataset.tf_ids() {
        out.push('\t');
        out.push_str(tf);
    }
    out.push('\n');
    for (i, gene) in dataset.gene_ids().iter().enumerate() {
        out.push_str(gene);
        for &c in network.row(i) {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
    }
    out
}

/// Writes a synthetic problem as fit-ready inputs plus its ground truth.
///
/// Prior files hold probabilities, so fit them with transform `none`.
pub fn write_synthetic(dir: &Path, problem: &SyntheticProblem, spec_json: &str) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let ds = &problem.dataset;
    let genes = ds.gene_ids().to_vec();
    let tfs = ds.tf_ids().to_vec();
    let exps = ds.experiment_ids().to_vec();
    let files = [
        (
            "expression.tsv",
            LabeledMatrix::new("gene", genes.clone(), exps.clone(), ds.g().clone())?,
        ),
        (
            "chip.tsv",
            LabeledMatrix::new("gene", genes.clone(), tfs.clone(), ds.b().clone())?,
        ),
        (
            "motif.tsv",
            LabeledMatrix::new("gene", genes, tfs.clone(), ds.m().clone())?,
        ),
        ("tf_profiles.tsv", LabeledMatrix::new("tf", tfs, exps, ds.f().clone())?),
    ];
    let mut written = Vec::new();
    for (name, m) in &files {
        let path = dir.join(name);
        write_matrix(&path, m)?;
        written.push(path);
    }
    let extra = [
        ("truth_network.tsv", network_tsv(ds, &problem.network)),
        ("truth_params.json", to_json(&problem.params)?),
        ("synth_spec.json", spec_json.to_string()),
    ];
    for (name, text) in extra {
        let path = dir.join(name);
        write_text(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}
