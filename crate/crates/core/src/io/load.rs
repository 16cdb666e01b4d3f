use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tsv::{parse_pairs, parse_real, parse_table, read_text, LabeledMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::ClampPolicy;
use crate::validation::{FunctionalAnnotation, KnockoutExperiment};

/// How empty expression cells are filled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Imputation {
    /// Mean of the observed cells in the same gene row.
    #[default]
    RowMean,
    /// Refuse files with missing cells.
    Reject,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    /// Genes x experiments.
    pub matrix: LabeledMatrix,
    /// Number of cells filled by imputation.
    pub imputed: usize,
}

pub fn load_expression(path: &Path, imputation: Imputation) -> Result<Expression> {
    parse_expression(path, &read_text(path)?, imputation)
}

pub(crate) fn parse_expression(path: &Path, text: &str, imputation: Imputation) -> Result<Expression> {
    let table = parse_table(path, text)?;
    if imputation == Imputation::Reject {
        return Ok(Expression {
            matrix: table.complete(path)?,
            imputed: 0,
        });
    }
    let (n, t) = (table.row_ids.len(), table.col_ids.len());
    let mut data = Vec::with_capacity(n * t);
    let mut imputed = 0;
    for (row, &line) in table.cells.iter().zip(&table.lines) {
        let observed: Vec<f64> = row.iter().flatten().copied().collect();
        if observed.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "row has no observed values to impute from".into(),
            });
        }
        let fill = observed.iter().sum::<f64>() / observed.len() as f64;
        imputed += t - observed.len();
        data.extend(row.iter().map(|v| v.unwrap_or(fill)));
    }
    let values = Matrix::from_vec(n, t, data)?;
    Ok(Expression {
        matrix: LabeledMatrix::new(table.corner, table.row_ids, table.col_ids, values)?,
        imputed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    Chip,
    Motif,
}

/// How prior-file cells become probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PriorTransform {
    /// Cells already are probabilities.
    None,
    /// Cells are p-values; the probability is `1 - p`.
    #[default]
    OneMinusP,
}

/// Loads a genes x TFs prior matrix, applies `transform`, then `clamp`.
pub fn load_prior_matrix(
    path: &Path,
    kind: PriorKind,
    transform: PriorTransform,
    clamp: ClampPolicy,
) -> Result<LabeledMatrix> {
    parse_prior_matrix(path, &read_text(path)?, kind, transform, clamp)
}

pub(crate) fn parse_prior_matrix(
    path: &Path,
    text: &str,
    kind: PriorKind,
    transform: PriorTransform,
    clamp: ClampPolicy,
) -> Result<LabeledMatrix> {
    let table = parse_table(path, text)?;
    let label = match kind {
        PriorKind::Chip => "binding",
        PriorKind::Motif => "motif",
    };
    for (row, &line) in table.cells.iter().zip(&table.lines) {
        if let Some(v) = row.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{label} value {v} outside [0, 1]"),
            });
        }
    }
    let mut m = table.complete(path)?;
    let eps = match clamp {
        ClampPolicy::Clamp { epsilon } => Some(epsilon),
        ClampPolicy::Hard => None,
    };
    m.values = m.values.map(|v| {
        let p = match transform {
            PriorTransform::None => v,
            PriorTransform::OneMinusP => 1.0 - v,
        };
        match eps {
            Some(e) => p.clamp(e, 1.0 - e),
            None => p,
        }
    });
    Ok(m)
}

/// `tf<TAB>gene` lines after a header: the gene encoding each TF.
pub fn load_tf_map(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read_text(path)?;
    let mut map = BTreeMap::new();
    for (line, tf, gene) in parse_pairs(path, &text)? {
        if map.insert(tf.to_string(), gene.to_string()).is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("TF {tf:?} mapped twice"),
            });
        }
    }
    Ok(map)
}

/// `gene<TAB>category` lines after a header. The universe defaults to the
/// number of distinct annotated genes.
pub fn load_annotation(path: &Path, universe: Option<usize>) -> Result<FunctionalAnnotation> {
    let text = read_text(path)?;
    let mut categories: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (_, gene, cat) in parse_pairs(path, &text)? {
        categories.entry(gene.to_string()).or_default().insert(cat.to_string());
    }
    let n = universe.unwrap_or(categories.len());
    FunctionalAnnotation::new(categories, n)
}

/// `gene<TAB>response` lines after a header.
pub fn load_knockout(path: &Path, tf: &str) -> Result<KnockoutExperiment> {
    let text = read_text(path)?;
    let mut response = BTreeMap::new();
    for (line, gene, value) in parse_pairs(path, &text)? {
        let v = parse_real(path, line, value)?;
        if response.insert(gene.to_string(), v).is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate gene {gene:?}"),
            });
        }
    }
    KnockoutExperiment::new(tf, response)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("x.tsv")
    }

    #[test]
    fn expression_two_by_two() {
        let e = parse_expression(p(), "gene\te1\te2\ng1\t1\t2\ng2\t3.5\t-4\n", Imputation::RowMean).unwrap();
        assert_eq!(e.matrix.values.as_slice(), &[1.0, 2.0, 3.5, -4.0]);
        assert_eq!(e.imputed, 0);
    }

    #[test]
    fn expression_row_mean_imputation() {
        let e = parse_expression(p(), "gene\te1\te2\te3\ng1\t1\t\t3\n", Imputation::RowMean).unwrap();
        assert_eq!(e.matrix.values.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(e.imputed, 1);
        assert!(parse_expression(p(), "gene\te1\te2\ng1\t1\t\n", Imputation::Reject).is_err());
    }

    #[test]
    fn duplicate_gene_names_id_and_line() {
        let err = parse_expression(p(), "gene\te1\nYAL1\t1\nYAL1\t2\n", Imputation::RowMean).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("YAL1") && msg.contains(":3:"), "{msg}");
    }

    #[test]
    fn prior_transforms() {
        let none = parse_prior_matrix(
            p(),
            "gene\tTF1\ng1\t0.7\n",
            PriorKind::Chip,
            PriorTransform::None,
            ClampPolicy::Hard,
        )
        .unwrap();
        assert_eq!(none.values.get(0, 0), 0.7);
        let flipped = parse_prior_matrix(
            p(),
            "gene\tTF1\ng1\t0.001\n",
            PriorKind::Chip,
            PriorTransform::OneMinusP,
            ClampPolicy::Hard,
        )
        .unwrap();
        assert_eq!(flipped.values.get(0, 0), 1.0 - 0.001);
        assert!(parse_prior_matrix(
            p(),
            "gene\tTF1\ng1\t1.2\n",
            PriorKind::Motif,
            PriorTransform::None,
            ClampPolicy::Hard
        )
        .is_err());
        let clamped = parse_prior_matrix(
            p(),
            "gene\tTF1\ng1\t0\n",
            PriorKind::Chip,
            PriorTransform::None,
            ClampPolicy::default(),
        )
        .unwrap();
        assert_eq!(clamped.values.get(0, 0), 1e-6);
    }
}
