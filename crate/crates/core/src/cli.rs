//! Command-line surface. Exit codes: 0 success, 1 usage, 2 data, 3 numeric.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{convergence_report, MonitorSelector};
use crate::error::{Error, Result};
use crate::io::{
    self, format_real, load_annotation, load_knockout, load_prior_matrix, read_manifest, read_matrix, read_traces,
    write_json, write_report, write_summary_tables, write_synthetic, Imputation, InputPaths, LabeledMatrix,
    Preprocessing, PriorKind, PriorTransform, RunConfig,
};
use crate::matrix::Matrix;
use crate::model::{default_weight_grid, prior_sparsity_study, ClampPolicy, Dataset, DatasetParts, Hyperparams};
use crate::sampler::{ChainConfig, SweepPlan};
use crate::summary::{summarize, PosteriorSummary, SummaryOptions};
use crate::synth::{generate_synthetic, SynthSpec};
use crate::validation::{
    baseline_chip_targets, enriched_categories, knockout_tstat_with, EnrichmentResult, TStatMode, TStatOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "regnet",
    version,
    about = "Bayesian regulatory network inference from expression and binding priors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Gibbs sampler and write posterior tables, report and manifest.
    Fit(Box<FitArgs>),
    /// Turn a traces file into posterior tables.
    Summarize(SummarizeArgs),
    /// Enrichment and knockout statistics for inferred target sets.
    Validate(ValidateArgs),
    /// Generate a synthetic dataset with known network.
    Simulate(SimulateArgs),
    /// Prior-only sparsity study over a grid of weights.
    PriorStudy(PriorStudyArgs),
    /// Convergence report for a traces file.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct PriorFileArgs {
    /// How ChIP cells become probabilities. one-minus-p treats them as p-values
    #[arg(long, value_enum, default_value_t = PriorTransform::OneMinusP)]
    pub chip_transform: PriorTransform,
    /// How motif cells become probabilities
    #[arg(long, value_enum, default_value_t = PriorTransform::OneMinusP)]
    pub motif_transform: PriorTransform,
    /// Prior probabilities are clamped into [eps, 1 - eps]
    #[arg(long, default_value_t = 1e-6)]
    pub clamp_epsilon: f64,
    /// Keep exact 0/1 priors as hard constraints instead of clamping [default: off]
    #[arg(long)]
    pub hard_priors: bool,
}

impl PriorFileArgs {
    fn clamp(&self) -> ClampPolicy {
        if self.hard_priors {
            ClampPolicy::Hard
        } else {
            ClampPolicy::Clamp {
                epsilon: self.clamp_epsilon,
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Rerun exactly the configuration recorded in a manifest.json; other model flags are ignored
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Expression matrix, genes x experiments
    #[arg(long, required_unless_present = "manifest")]
    pub expression: Option<PathBuf>,
    /// ChIP binding matrix, genes x TFs
    #[arg(long, required_unless_present = "manifest")]
    pub chip: Option<PathBuf>,
    /// Motif matrix, genes x TFs
    #[arg(long, required_unless_present = "manifest")]
    pub motif: Option<PathBuf>,
    /// Two-column TF -> encoding gene map
    #[arg(long)]
    pub tf_map: Option<PathBuf>,
    /// Explicit TF activity profiles, TFs x experiments
    #[arg(long)]
    pub tf_profiles: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "regnet-out")]
    pub out: PathBuf,

    #[command(flatten)]
    pub priors: PriorFileArgs,
    /// Missing expression cells
    #[arg(long, value_enum, default_value_t = Imputation::RowMean)]
    pub imputation: Imputation,
    /// Center every expression row (and TF profile) at zero [default: off]
    #[arg(long)]
    pub center_rows: bool,

    /// Drop the pairwise interaction terms [default: interactions on]
    #[arg(long)]
    pub no_interactions: bool,
    /// Forbid a TF from regulating its own gene [default: allowed]
    #[arg(long)]
    pub no_self_regulation: bool,

    #[arg(long, default_value_t = 3000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 2)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub chains: usize,
    /// Update gene rows on parallel workers; output is identical to sequential [default: off]
    #[arg(long)]
    pub parallel_genes: bool,
    /// Visit indicators in a random order within each gene row [default: off]
    #[arg(long)]
    pub random_scan: bool,
    /// Recompute residuals from scratch every this many sweeps (0 disables)
    #[arg(long, default_value_t = 50)]
    pub audit_every: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub audit_tolerance: f64,
    /// Inclusion cells traced for the convergence report
    #[arg(long, default_value_t = 100)]
    pub monitor_cells: usize,
    /// Keep a full network snapshot every this many retained draws (0 = never)
    #[arg(long, default_value_t = 0)]
    pub snapshot_stride: usize,

    #[arg(long, default_value_t = 1e4)]
    pub tau2_alpha: f64,
    #[arg(long, default_value_t = 1e4)]
    pub tau2_beta: f64,
    #[arg(long, default_value_t = 1e4)]
    pub tau2_gamma: f64,
    /// Degrees of freedom of the residual-variance prior
    #[arg(long, default_value_t = 2.0)]
    pub nu: f64,
    /// Points on the weight grid over [0, 1]
    #[arg(long, default_value_t = 101)]
    pub grid_size: usize,

    #[command(flatten)]
    pub summary: SummaryArgs,
    /// Convergence passes when every R-hat is below this
    #[arg(long, default_value_t = 1.1)]
    pub rhat_threshold: f64,

    /// Write a checkpoint per chain every this many sweeps (0 = never)
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    /// Continue chains from checkpoints in the output directory [default: off]
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    /// Target-gene inclusion threshold (inclusive)
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Credible interval level
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Shared targets needed for an interaction pair
    #[arg(long, default_value_t = 4)]
    pub min_shared: usize,
    /// Edges with inclusion above this are listed in edges.tsv
    #[arg(long, default_value_t = 0.0)]
    pub emission_floor: f64,
}

impl SummaryArgs {
    fn options(&self) -> SummaryOptions {
        SummaryOptions {
            threshold: self.threshold,
            level: self.level,
            min_shared_targets: self.min_shared,
        }
    }
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// traces.json written by fit
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long, default_value = "regnet-summary")]
    pub out: PathBuf,
    #[command(flatten)]
    pub summary: SummaryArgs,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    /// Leave sigma2 out of the report [default: included]
    #[arg(long)]
    pub no_sigma2: bool,
    /// Leave the weights out [default: included]
    #[arg(long)]
    pub no_weights: bool,
    /// Leave the linear coefficients out [default: included]
    #[arg(long)]
    pub no_betas: bool,
    /// Include the interaction coefficients [default: off]
    #[arg(long)]
    pub gammas: bool,
    /// Traced inclusion cells to include
    #[arg(long, default_value_t = 100)]
    pub inclusion_cells: usize,
}

impl MonitorArgs {
    fn selector(&self) -> MonitorSelector {
        MonitorSelector {
            sigma2: !self.no_sigma2,
            weights: !self.no_weights,
            betas: !self.no_betas,
            gammas: self.gammas,
            inclusion_cells: self.inclusion_cells,
            seed: 0,
        }
    }
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long, default_value_t = 1.1)]
    pub threshold: f64,
    #[command(flatten)]
    pub monitor: MonitorArgs,
    /// Write convergence.tsv/json here instead of printing
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// summary.json written by fit or summarize
    #[arg(long)]
    pub summary: PathBuf,
    /// Target-gene inclusion threshold (inclusive)
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Restrict to these TFs (comma separated) [default: all]
    #[arg(long, value_delimiter = ',')]
    pub tfs: Vec<String>,
    /// Gene -> category annotation
    #[arg(long)]
    pub annotation: Option<PathBuf>,
    /// Annotation universe size [default: number of annotated genes]
    #[arg(long)]
    pub universe: Option<usize>,
    /// Enrichment significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Gene -> knockout response for one TF
    #[arg(long, requires = "knockout_tf")]
    pub knockout: Option<PathBuf>,
    /// TF deleted in the knockout experiment
    #[arg(long)]
    pub knockout_tf: Option<String>,
    #[arg(long, value_enum, default_value_t = TStatArg::Welch)]
    pub tstat: TStatArg,
    /// Compare signed instead of absolute responses [default: absolute]
    #[arg(long)]
    pub signed: bool,
    /// Binding p-values (genes x TFs) for the threshold baseline
    #[arg(long)]
    pub baseline_chip: Option<PathBuf>,
    /// Baseline target rule: p-value strictly below this
    #[arg(long, default_value_t = 0.001)]
    pub baseline_cutoff: f64,
    /// Write the JSON result here instead of printing
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TStatArg {
    Welch,
    OneSample,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 200)]
    pub genes: usize,
    #[arg(long, default_value_t = 5)]
    pub tfs: usize,
    #[arg(long, default_value_t = 50)]
    pub experiments: usize,
    /// Probability of a true edge
    #[arg(long, default_value_t = 0.05)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_scale: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta_scale: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Mean binding probability on true edges
    #[arg(long, default_value_t = 0.8)]
    pub prior_fidelity: f64,
    /// Same for motifs [default: prior fidelity]
    #[arg(long)]
    pub motif_fidelity: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub prior_concentration: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "regnet-sim")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PriorStudyArgs {
    #[arg(long)]
    pub chip: PathBuf,
    #[arg(long)]
    pub motif: PathBuf,
    #[command(flatten)]
    pub priors: PriorFileArgs,
    /// Weights shared by all TFs, comma separated [default: 0.05,0.10,...,0.95]
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Prior networks drawn per weight
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "regnet-prior-study")]
    pub out: PathBuf,
}

fn warn_transform(priors: &PriorFileArgs) {
    if priors.chip_transform == PriorTransform::OneMinusP || priors.motif_transform == PriorTransform::OneMinusP {
        eprintln!(
            "warning: prior cells are read as p-values and converted with 1 - p; \
             this conversion is a convention, pass --chip-transform none / --motif-transform none for probabilities"
        );
    }
}

impl FitArgs {
    fn to_config(&self) -> Result<RunConfig> {
        if let Some(path) = &self.manifest {
            let mut config = read_manifest(path)?.config;
            config.output_dir = self.out.clone();
            return Ok(config);
        }
        warn_transform(&self.priors);
        let missing = || Error::invalid("missing input path");
        Ok(RunConfig {
            inputs: InputPaths {
                expression: self.expression.clone().ok_or_else(missing)?,
                chip: self.chip.clone().ok_or_else(missing)?,
                motif: self.motif.clone().ok_or_else(missing)?,
                tf_map: self.tf_map.clone(),
                tf_profiles: self.tf_profiles.clone(),
                annotation: None,
                knockout: None,
            },
            preprocessing: Preprocessing {
                center_rows: self.center_rows,
                clamp: self.priors.clamp(),
                chip_transform: self.priors.chip_transform,
                motif_transform: self.priors.motif_transform,
                imputation: self.imputation,
            },
            hyper: Hyperparams {
                tau_alpha2: self.tau2_alpha,
                tau_beta2: self.tau2_beta,
                tau_gamma2: self.tau2_gamma,
                nu: self.nu,
                grid_size: self.grid_size,
                include_interactions: !self.no_interactions,
            },
            chain: ChainConfig {
                n_iterations: self.iterations,
                burn_in: self.burn_in,
                thin: self.thin,
                seed: self.seed,
                n_chains: self.chains,
                parallel_genes: self.parallel_genes,
                audit_every: self.audit_every,
                audit_tolerance: self.audit_tolerance,
                random_scan: self.random_scan,
                allow_self_regulation: !self.no_self_regulation,
                monitor_cells: self.monitor_cells,
                snapshot_stride: self.snapshot_stride,
                plan: SweepPlan::default(),
            },
            summary: self.summary.options(),
            monitor: MonitorSelector::default(),
            rhat_threshold: self.rhat_threshold,
            emission_floor: self.summary.emission_floor,
            checkpoint_every: self.checkpoint_every,
            output_dir: self.out.clone(),
        })
    }
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let config = args.to_config()?;
    let outcome = io::run_fit(&config, args.resume)?;
    let r = &outcome.report;
    eprintln!(
        "fit: {} genes x {} TFs, {} chains, {} retained draws; convergence {:?} (worst R-hat {})",
        outcome.dataset.n_genes(),
        outcome.dataset.n_tfs(),
        r.n_chains,
        outcome.summary.retained,
        r.verdict,
        r.worst_rhat.map(|v| format!("{v:.4}")).unwrap_or_else(|| "NA".into())
    );
    if outcome.manifest.imputed_cells > 0 {
        eprintln!(
            "fit: imputed {} missing expression cells",
            outcome.manifest.imputed_cells
        );
    }
    let a = &outcome.manifest.assembly;
    if !a.dropped_prior_genes.is_empty() || !a.dropped_expression_genes.is_empty() || !a.dropped_tfs.is_empty() {
        eprintln!(
            "fit: dropped {} prior-only genes, {} expression-only genes, {} TFs",
            a.dropped_prior_genes.len(),
            a.dropped_expression_genes.len(),
            a.dropped_tfs.len()
        );
    }
    eprintln!("fit: wrote {}", config.output_dir.display());
    Ok(())
}

fn cmd_summarize(args: &SummarizeArgs) -> Result<()> {
    let file = read_traces(&args.traces)?;
    let summary = summarize(&file.traces, &file.gene_ids, &file.tf_ids, args.summary.options())?;
    write_summary_tables(&args.out, &summary, args.summary.emission_floor)?;
    eprintln!("summarize: wrote {}", args.out.display());
    Ok(())
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let file = read_traces(&args.traces)?;
    let report = convergence_report(&file.traces, &args.monitor.selector(), args.threshold)?;
    match &args.out {
        Some(dir) => {
            write_report(dir, &report)?;
        }
        None => print!("{}", io::convergence_tsv(&report)),
    }
    eprintln!(
        "diagnose: {:?} (worst R-hat {}, {} chains{})",
        report.verdict,
        report
            .worst_rhat
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "NA".into()),
        report.n_chains,
        if report.single_chain {
            ", single chain: split halves only"
        } else {
            ""
        }
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct TfValidation {
    tf: String,
    n_targets: usize,
    enrichment: Option<EnrichmentResult>,
    knockout_t: Option<f64>,
    baseline_targets: Option<usize>,
    baseline_enrichment: Option<EnrichmentResult>,
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let summary: PosteriorSummary = io::read_json(&args.summary)?;
    let annotation = args
        .annotation
        .as_deref()
        .map(|p| load_annotation(p, args.universe))
        .transpose()?;
    let knockout = match (&args.knockout, &args.knockout_tf) {
        (Some(p), Some(tf)) => Some(load_knockout(p, tf)?),
        _ => None,
    };
    let baseline = args.baseline_chip.as_deref().map(read_matrix).transpose()?;
    let options = TStatOptions {
        mode: match args.tstat {
            TStatArg::Welch => TStatMode::Welch,
            TStatArg::OneSample => TStatMode::OneSample,
        },
        absolute: !args.signed,
    };
    let selected: Vec<usize> = if args.tfs.is_empty() {
        (0..summary.tf_ids.len()).collect()
    } else {
        args.tfs.iter().map(|t| summary.tf_index(t)).collect::<Result<_>>()?
    };

    let mut out = Vec::new();
    for j in selected {
        let tf = summary.tf_ids[j].clone();
        let targets: Vec<String> = summary
            .target_genes(j, args.threshold)?
            .into_iter()
            .map(|i| summary.gene_ids[i].clone())
            .collect();
        let enrich = |genes: &[String]| -> Result<Option<EnrichmentResult>> {
            match &annotation {
                Some(a) if !genes.is_empty() => enriched_categories(genes, a, args.alpha).map(Some),
                _ => Ok(None),
            }
        };
        let knockout_t = match &knockout {
            Some(k) if k.tf == tf && !targets.is_empty() => Some(knockout_tstat_with(&targets, k, options)?),
            _ => None,
        };
        let (baseline_targets, baseline_enrichment) = match &baseline {
            Some(m) => {
                let col = m.col_index().get(tf.as_str()).copied();
                match col {
                    Some(c) => {
                        let genes: Vec<String> = baseline_chip_targets(&m.values.column(c), args.baseline_cutoff)?
                            .into_iter()
                            .map(|i| m.row_ids[i].clone())
                            .collect();
                        (Some(genes.len()), enrich(&genes)?)
                    }
                    None => (None, None),
                }
            }
            None => (None, None),
        };
        out.push(TfValidation {
            tf,
            n_targets: targets.len(),
            enrichment: enrich(&targets)?,
            knockout_t,
            baseline_targets,
            baseline_enrichment,
        });
    }
    match &args.out {
        Some(p) => write_json(p, &out)?,
        None => println!("{}", serde_json::to_string_pretty(&out)?),
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = SynthSpec {
        n_genes: args.genes,
        n_tfs: args.tfs,
        n_experiments: args.experiments,
        sparsity: args.sparsity,
        alpha_scale: args.alpha_scale,
        beta_scale: args.beta_scale,
        gamma_scale: args.gamma_scale,
        sigma: args.sigma,
        prior_fidelity: args.prior_fidelity,
        motif_fidelity: args.motif_fidelity,
        prior_concentration: args.prior_concentration,
        seed: args.seed,
    };
    let problem = generate_synthetic(&spec)?;
    let spec_json = serde_json::to_string_pretty(&spec)? + "\n";
    write_synthetic(&args.out, &problem, &spec_json)?;
    eprintln!(
        "simulate: {} true edges; wrote {} (prior files hold probabilities: fit with --chip-transform none --motif-transform none --tf-profiles)",
        problem.network.count_active(),
        args.out.display()
    );
    Ok(())
}

/// A dataset carrying only the prior matrices, for prior-only computations.
pub fn prior_only_dataset(chip: &LabeledMatrix, motif: &LabeledMatrix, clamp: ClampPolicy) -> Result<Dataset> {
    if chip.row_ids != motif.row_ids || chip.col_ids != motif.col_ids {
        return Err(Error::DimensionMismatch(
            "binding and motif tables must list the same genes and TFs in the same order".into(),
        ));
    }
    let (n, j) = (chip.row_ids.len(), chip.col_ids.len());
    Dataset::new(
        DatasetParts {
            gene_ids: chip.row_ids.clone(),
            tf_ids: chip.col_ids.clone(),
            experiment_ids: vec!["none".into()],
            g: Matrix::zeros(n, 1),
            f: Matrix::zeros(j, 1),
            b: chip.values.clone(),
            m: motif.values.clone(),
            tf_gene_map: vec![None; j],
        },
        clamp,
    )
}

fn cmd_prior_study(args: &PriorStudyArgs) -> Result<()> {
    warn_transform(&args.priors);
    let clamp = args.priors.clamp();
    let chip = load_prior_matrix(&args.chip, PriorKind::Chip, args.priors.chip_transform, clamp)?;
    let motif = load_prior_matrix(&args.motif, PriorKind::Motif, args.priors.motif_transform, clamp)?;
    let ds = prior_only_dataset(&chip, &motif, clamp)?;
    let grid = if args.weights.is_empty() {
        default_weight_grid()
    } else {
        args.weights.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let study = prior_sparsity_study(&ds, &grid, args.draws, &mut rng)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut counts = String::from("tf");
    let mut means = String::from("tf");
    for w in &grid {
        let _ = write!(counts, "\tw={w}");
        let _ = write!(means, "\tw={w}");
    }
    counts.push('\n');
    means.push('\n');
    for (j, tf) in ds.tf_ids().iter().enumerate() {
        counts.push_str(tf);
        means.push_str(tf);
        for (k, est) in study.estimates.iter().enumerate() {
            let _ = write!(counts, "\t{}", study.counts[j][k]);
            let col = est.column(j);
            let _ = write!(means, "\t{}", format_real(col.iter().sum::<f64>() / col.len() as f64));
        }
        counts.push('\n');
        means.push('\n');
    }
    write_text(&args.out.join("target_counts.tsv"), &counts)?;
    write_text(&args.out.join("mean_inclusion.tsv"), &means)?;
    write_json(&args.out.join("prior_study.json"), &study)?;
    eprintln!("prior-study: wrote {}", args.out.display());
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::PriorStudy(a) => cmd_prior_study(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
