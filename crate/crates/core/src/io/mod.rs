//! File formats, dataset assembly and the fit pipeline.
//!
//! Matrices are tab-delimited with a header row of column ids and the row id
//! in the first column. Reals are written with 17 significant digits, so a
//! write followed by a load reproduces the values exactly. Manifests, traces,
//! reports and checkpoints are JSON carrying a `format_version`.

mod assemble;
mod load;
mod output;
mod pipeline;
mod tsv;

pub use assemble::{assemble_dataset, AssembleOptions, Assembled, AssemblyReport};
pub use load::{
    load_annotation, load_expression, load_knockout, load_prior_matrix, load_tf_map, Expression, Imputation, PriorKind,
    PriorTransform,
};
pub use output::{
    checkpoint_path, coefficients_tsv, convergence_tsv, edges_tsv, interactions_tsv, read_checkpoint, read_json,
    read_manifest, read_traces, weights_tsv, write_checkpoint, write_json, write_outputs, write_report,
    write_summary_tables, write_synthetic, write_traces, DatasetShape, InputPaths, Preprocessing, RunConfig,
    RunManifest, TraceFile, FILE_FORMAT_VERSION,
};
pub use pipeline::{load_inputs, run_fit, FitOutcome, LoadedInputs};
pub use tsv::{format_real, matrix_to_tsv, read_matrix, write_matrix, LabeledMatrix};
