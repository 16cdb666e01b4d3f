use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tsv::LabeledMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{ClampPolicy, Dataset, DatasetParts};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// Subtract each gene's mean expression (and each explicit TF profile's mean).
    pub center_rows: bool,
    pub clamp: ClampPolicy,
}

/// What [`assemble_dataset`] had to leave out.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyReport {
    /// Genes present in a prior matrix but not in the expression data.
    pub dropped_prior_genes: Vec<String>,
    /// Genes with expression but missing from a prior matrix.
    pub dropped_expression_genes: Vec<String>,
    /// TFs missing from one of the two prior matrices, or whose encoding gene
    /// has no expression profile.
    pub dropped_tfs: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Assembled {
    pub dataset: Dataset,
    pub report: AssemblyReport,
}

fn centered(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let mu = row.iter().sum::<f64>() / row.len() as f64;
        row.iter_mut().for_each(|v| *v -= mu);
    }
    out
}

/// Aligns expression, binding and motif tables into a [`Dataset`].
///
/// Genes kept are those in all three tables; TFs kept are those in both prior
/// tables whose activity profile can be resolved, either from the expression
/// row of the gene named in `tf_map` or from the explicit `tf_profiles`
/// (TFs x experiments). Output rows and columns are sorted by id.
pub fn assemble_dataset(
    expression: &LabeledMatrix,
    chip: &LabeledMatrix,
    motif: &LabeledMatrix,
    tf_map: &BTreeMap<String, String>,
    tf_profiles: Option<&LabeledMatrix>,
    options: AssembleOptions,
) -> Result<Assembled> {
    let mut report = AssemblyReport::default();
    let expr_rows = expression.row_index();
    let (chip_rows, motif_rows) = (chip.row_index(), motif.row_index());
    let (chip_cols, motif_cols) = (chip.col_index(), motif.col_index());

    let prior_genes: BTreeSet<&str> = chip_rows.keys().chain(motif_rows.keys()).copied().collect();
    let genes: Vec<String> = prior_genes
        .iter()
        .filter(|g| chip_rows.contains_key(*g) && motif_rows.contains_key(*g) && expr_rows.contains_key(*g))
        .map(|g| g.to_string())
        .collect();
    report.dropped_prior_genes = prior_genes
        .iter()
        .filter(|g| !expr_rows.contains_key(*g))
        .map(|g| g.to_string())
        .collect();
    let mut missing: Vec<String> = expression
        .row_ids
        .iter()
        .filter(|g| !chip_rows.contains_key(g.as_str()) || !motif_rows.contains_key(g.as_str()))
        .cloned()
        .collect();
    missing.sort();
    report.dropped_expression_genes = missing;
    if genes.is_empty() {
        return Err(Error::invalid(
            "no gene appears in the expression, binding and motif tables",
        ));
    }

    let profile_index = tf_profiles.map(|p| p.row_index());
    if let Some(p) = tf_profiles {
        if p.col_ids != expression.col_ids {
            return Err(Error::DimensionMismatch(
                "TF profile experiments differ from the expression experiments".into(),
            ));
        }
    }

    let g_all = if options.center_rows {
        centered(&expression.values)
    } else {
        expression.values.clone()
    };
    let profiles_all = tf_profiles.map(|p| {
        if options.center_rows {
            centered(&p.values)
        } else {
            p.values.clone()
        }
    });

    let tf_universe: BTreeSet<&str> = chip_cols.keys().chain(motif_cols.keys()).copied().collect();
    let mut tfs = Vec::new();
    // None: taken from a gene row of g; Some(k): explicit profile row k
    let mut sources: Vec<(Option<usize>, Option<usize>)> = Vec::new();
    for tf in tf_universe {
        if !(chip_cols.contains_key(tf) && motif_cols.contains_key(tf)) {
            report.dropped_tfs.push(tf.to_string());
            continue;
        }
        let explicit = profile_index.as_ref().and_then(|ix| ix.get(tf).copied());
        let mapped = tf_map.get(tf).map(|g| expr_rows.get(g.as_str()).copied());
        match (explicit, mapped) {
            (Some(k), m) => sources.push((m.flatten(), Some(k))),
            (None, Some(Some(row))) => sources.push((Some(row), None)),
            (None, Some(None)) => {
                report.dropped_tfs.push(tf.to_string());
                continue;
            }
            (None, None) => {
                return Err(Error::invalid(format!(
                    "TF {tf:?} has no entry in the TF map and no explicit activity profile"
                )))
            }
        }
        tfs.push(tf.to_string());
    }
    if tfs.is_empty() {
        return Err(Error::invalid("no TF could be resolved"));
    }

    let t = expression.col_ids.len();
    let gene_rows: Vec<usize> = genes.iter().map(|g| expr_rows[g.as_str()]).collect();
    let g = g_all.select_rows(&gene_rows);
    let mut f = Matrix::zeros(tfs.len(), t);
    for (j, &(expr_row, explicit)) in sources.iter().enumerate() {
        let src = match (explicit, expr_row) {
            (Some(k), _) => profiles_all.as_ref().map(|p| p.row(k)).unwrap_or_default(),
            (None, Some(r)) => g_all.row(r),
            (None, None) => unreachable!("unresolved TFs are rejected above"),
        };
        f.row_mut(j).copy_from_slice(src);
    }
    let gene_pos: BTreeMap<&str, usize> = genes.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let tf_gene_map = tfs
        .iter()
        .map(|tf| tf_map.get(tf).and_then(|g| gene_pos.get(g.as_str()).copied()))
        .collect();

    let pick = |src: &LabeledMatrix,
                rows: &std::collections::HashMap<&str, usize>,
                cols: &std::collections::HashMap<&str, usize>| {
        let mut out = Matrix::zeros(genes.len(), tfs.len());
        for (i, gname) in genes.iter().enumerate() {
            for (j, tf) in tfs.iter().enumerate() {
                out.set(i, j, src.values.get(rows[gname.as_str()], cols[tf.as_str()]));
            }
        }
        out
    };
    let b = pick(chip, &chip_rows, &chip_cols);
    let m = pick(motif, &motif_rows, &motif_cols);

    let dataset = Dataset::new(
        DatasetParts {
            gene_ids: genes,
            tf_ids: tfs,
            experiment_ids: expression.col_ids.clone(),
            g,
            f,
            b,
            m,
            tf_gene_map,
        },
        options.clamp,
    )?;
    Ok(Assembled { dataset, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lm(rows: &[&str], cols: &[&str], data: &[f64]) -> LabeledMatrix {
        LabeledMatrix::new(
            "id",
            rows.iter().map(|s| s.to_string()).collect(),
            cols.iter().map(|s| s.to_string()).collect(),
            Matrix::from_vec(rows.len(), cols.len(), data.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn tf_map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn tf_profile_comes_from_its_gene_row_and_extra_prior_gene_is_dropped() {
        let expr = lm(&["g2", "g1"], &["e1", "e2", "e3"], &[4.0, 5.0, 6.0, 1.0, 2.0, 3.0]);
        let chip = lm(&["g1", "g2", "g3"], &["T"], &[0.5, 0.6, 0.7]);
        let motif = lm(&["g3", "g2", "g1"], &["T"], &[0.1, 0.2, 0.3]);
        let out = assemble_dataset(
            &expr,
            &chip,
            &motif,
            &tf_map(&[("T", "g2")]),
            None,
            AssembleOptions::default(),
        )
        .unwrap();
        let ds = &out.dataset;
        assert_eq!(ds.gene_ids(), &["g1".to_string(), "g2".to_string()]);
        assert_eq!(ds.f().row(0), &[4.0, 5.0, 6.0]);
        assert_eq!(ds.g().row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(ds.m().get(0, 0), 0.3);
        assert_eq!(ds.tf_gene_map(), &[Some(1)]);
        assert_eq!(out.report.dropped_prior_genes, vec!["g3".to_string()]);
    }

    #[test]
    fn centering_zeroes_row_means() {
        let expr = lm(&["a", "b"], &["e1", "e2", "e3"], &[1.0, 2.0, 6.0, -3.0, 0.5, 10.0]);
        let p = lm(&["a", "b"], &["T"], &[0.5, 0.5]);
        let opts = AssembleOptions {
            center_rows: true,
            ..Default::default()
        };
        let out = assemble_dataset(&expr, &p, &p, &tf_map(&[("T", "b")]), None, opts).unwrap();
        for i in 0..2 {
            assert!(out.dataset.g().row(i).iter().sum::<f64>().abs() < 1e-12);
        }
        assert!(out.dataset.f().row(0).iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn unresolvable_tf_is_an_error() {
        let expr = lm(&["a"], &["e1", "e2"], &[1.0, 2.0]);
        let p = lm(&["a"], &["T"], &[0.5]);
        assert!(assemble_dataset(&expr, &p, &p, &BTreeMap::new(), None, AssembleOptions::default()).is_err());
    }

    #[test]
    fn row_order_does_not_matter() {
        let e1 = lm(&["a", "b"], &["e1", "e2"], &[1.0, 2.0, 3.0, 5.0]);
        let e2 = lm(&["b", "a"], &["e1", "e2"], &[3.0, 5.0, 1.0, 2.0]);
        let p1 = lm(&["a", "b"], &["T", "U"], &[0.1, 0.2, 0.3, 0.4]);
        let p2 = lm(&["b", "a"], &["U", "T"], &[0.4, 0.3, 0.2, 0.1]);
        let map = tf_map(&[("T", "a"), ("U", "b")]);
        let x = assemble_dataset(&e1, &p1, &p1, &map, None, AssembleOptions::default())
            .unwrap()
            .dataset;
        let y = assemble_dataset(&e2, &p2, &p2, &map, None, AssembleOptions::default())
            .unwrap()
            .dataset;
        assert_eq!(x.g(), y.g());
        assert_eq!(x.b(), y.b());
        assert_eq!(x.f(), y.f());
    }
}
