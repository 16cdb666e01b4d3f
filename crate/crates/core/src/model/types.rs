use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_CLAMP_EPSILON: f64 = 1e-6;

/// How binding and motif probabilities are treated at ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClampPolicy {
    /// Clamp into `[eps, 1 - eps]`.
    Clamp { epsilon: f64 },
    /// Keep exact 0 and 1 as hard constraints.
    Hard,
}

impl Default for ClampPolicy {
    fn default() -> Self {
        ClampPolicy::Clamp {
            epsilon: DEFAULT_CLAMP_EPSILON,
        }
    }
}

/// Raw pieces of a [`Dataset`], validated by [`Dataset::new`].
#[derive(Clone, Debug)]
pub struct DatasetParts {
    pub gene_ids: Vec<String>,
    pub tf_ids: Vec<String>,
    pub experiment_ids: Vec<String>,
    /// Genes x experiments.
    pub g: Matrix,
    /// TFs x experiments.
    pub f: Matrix,
    /// Genes x TFs binding probabilities.
    pub b: Matrix,
    /// Genes x TFs motif probabilities.
    pub m: Matrix,
    /// Gene row encoding each TF, if present in `g`.
    pub tf_gene_map: Vec<Option<usize>>,
}

/// Cached logarithms of the prior sources, one entry per (gene, TF).
#[derive(Clone, Debug)]
pub(crate) struct PriorLogs {
    pub ln_b: Matrix,
    pub ln_not_b: Matrix,
    pub ln_m: Matrix,
    pub ln_not_m: Matrix,
}

/// Aligned expression and prior data.
#[derive(Clone, Debug)]
pub struct Dataset {
    gene_ids: Vec<String>,
    tf_ids: Vec<String>,
    experiment_ids: Vec<String>,
    g: Matrix,
    f: Matrix,
    b: Matrix,
    m: Matrix,
    tf_gene_map: Vec<Option<usize>>,
    clamp: ClampPolicy,
    logs: PriorLogs,
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::invalid(format!("duplicate {what} id '{id}'")));
        }
    }
    Ok(())
}

fn check_dims(m: &Matrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

impl Dataset {
    pub fn new(parts: DatasetParts, clamp: ClampPolicy) -> Result<Self> {
        let DatasetParts {
            gene_ids,
            tf_ids,
            experiment_ids,
            g,
            f,
            b,
            m,
            tf_gene_map,
        } = parts;
        let (n, j, t) = (gene_ids.len(), tf_ids.len(), experiment_ids.len());
        if n == 0 || j == 0 || t == 0 {
            return Err(Error::invalid(format!(
                "dataset needs at least one gene, TF and experiment (got {n}, {j}, {t})"
            )));
        }
        check_unique(&gene_ids, "gene")?;
        check_unique(&tf_ids, "TF")?;
        check_unique(&experiment_ids, "experiment")?;
        check_dims(&g, n, t, "g")?;
        check_dims(&f, j, t, "f")?;
        check_dims(&b, n, j, "b")?;
        check_dims(&m, n, j, "m")?;
        if tf_gene_map.len() != j {
            return Err(Error::DimensionMismatch(format!(
                "tf_gene_map has {} entries for {j} TFs",
                tf_gene_map.len()
            )));
        }
        if let Some(bad) = tf_gene_map.iter().flatten().find(|&&gi| gi >= n) {
            return Err(Error::IndexOutOfRange {
                what: "gene",
                index: *bad,
                len: n,
            });
        }
        if g.iter().chain(f.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite value in expression data"));
        }
        for (name, mat) in [("b", &b), ("m", &m)] {
            if let Some(x) = mat.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::invalid(format!("{name} contains {x}, outside [0, 1]")));
            }
        }
        let (b, m) = match clamp {
            ClampPolicy::Clamp { epsilon } => {
                if !(epsilon > 0.0 && epsilon < 0.5) {
                    return Err(Error::invalid(format!("clamp epsilon {epsilon} not in (0, 0.5)")));
                }
                let c = |x: f64| x.clamp(epsilon, 1.0 - epsilon);
                (b.map(c), m.map(c))
            }
            ClampPolicy::Hard => {
                // b = 1 with m = 0 (or the reverse) leaves no admissible indicator
                // value for any weight strictly inside (0, 1).
                for i in 0..n {
                    for jj in 0..j {
                        let (bv, mv) = (b.get(i, jj), m.get(i, jj));
                        if (bv == 0.0 && mv == 1.0) || (bv == 1.0 && mv == 0.0) {
                            return Err(Error::invalid(format!(
                                "hard prior conflict at gene '{}', TF '{}': b={bv}, m={mv}",
                                gene_ids[i], tf_ids[jj]
                            )));
                        }
                    }
                }
                (b, m)
            }
        };
        let logs = PriorLogs {
            ln_b: b.map(f64::ln),
            ln_not_b: b.map(|x| (1.0 - x).ln()),
            ln_m: m.map(f64::ln),
            ln_not_m: m.map(|x| (1.0 - x).ln()),
        };
        Ok(Dataset {
            gene_ids,
            tf_ids,
            experiment_ids,
            g,
            f,
            b,
            m,
            tf_gene_map,
            clamp,
            logs,
        })
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_tfs(&self) -> usize {
        self.tf_ids.len()
    }

    pub fn n_experiments(&self) -> usize {
        self.experiment_ids.len()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn tf_ids(&self) -> &[String] {
        &self.tf_ids
    }

    pub fn experiment_ids(&self) -> &[String] {
        &self.experiment_ids
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn tf_gene_map(&self) -> &[Option<usize>] {
        &self.tf_gene_map
    }

    pub fn clamp_policy(&self) -> ClampPolicy {
        self.clamp
    }

    pub fn tf_index(&self, id: &str) -> Option<usize> {
        self.tf_ids.iter().position(|t| t == id)
    }

    pub(crate) fn logs(&self) -> &PriorLogs {
        &self.logs
    }

    /// Log prior odds of `C_ij = 1` under the weighted geometric prior.
    #[inline]
    pub fn prior_log_odds_at(&self, i: usize, j: usize, w: f64) -> f64 {
        let l = &self.logs;
        super::log_odds_from_logs(
            l.ln_b.get(i, j),
            l.ln_not_b.get(i, j),
            l.ln_m.get(i, j),
            l.ln_not_m.get(i, j),
            w,
        )
    }
}

/// Binary regulation indicators, genes x TFs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkState {
    n_genes: usize,
    n_tfs: usize,
    c: Vec<u8>,
}

impl NetworkState {
    pub fn empty(n_genes: usize, n_tfs: usize) -> Self {
        NetworkState {
            n_genes,
            n_tfs,
            c: vec![0; n_genes * n_tfs],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_tfs = rows.first().map_or(0, Vec::len);
        let mut c = Vec::with_capacity(rows.len() * n_tfs);
        for row in rows {
            if row.len() != n_tfs {
                return Err(Error::DimensionMismatch("ragged indicator rows".into()));
            }
            c.extend_from_slice(row);
        }
        Self::from_vec(rows.len(), n_tfs, c)
    }

    pub fn from_vec(n_genes: usize, n_tfs: usize, c: Vec<u8>) -> Result<Self> {
        if c.len() != n_genes * n_tfs {
            return Err(Error::DimensionMismatch(format!(
                "{} indicators for {n_genes}x{n_tfs}",
                c.len()
            )));
        }
        if c.iter().any(|&x| x > 1) {
            return Err(Error::invalid("indicator entries must be 0 or 1"));
        }
        Ok(NetworkState { n_genes, n_tfs, c })
    }

    pub fn n_genes(&self) -> usize {
        self.n_genes
    }

    pub fn n_tfs(&self) -> usize {
        self.n_tfs
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.c[i * self.n_tfs + j] == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.c[i * self.n_tfs + j] = on as u8;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.c[i * self.n_tfs..(i + 1) * self.n_tfs]
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [u8] {
        &mut self.c
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.c
    }

    pub fn count_active(&self) -> usize {
        self.c.iter().map(|&x| x as usize).sum()
    }

    /// Genes with `C_ij = 1` for TF `j`.
    pub fn targets_of(&self, j: usize) -> Vec<usize> {
        (0..self.n_genes).filter(|&i| self.get(i, j)).collect()
    }
}

/// Number of unordered TF pairs `j < k`.
pub fn pair_count(n_tfs: usize) -> usize {
    n_tfs * n_tfs.saturating_sub(1) / 2
}

/// Position of the unordered pair `{j, k}` in lexicographic order of `(min, max)`.
#[inline]
pub fn pair_index(j: usize, k: usize, n_tfs: usize) -> usize {
    let (a, b) = if j < k { (j, k) } else { (k, j) };
    debug_assert!(a != b && b < n_tfs);
    a * (2 * n_tfs - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(j, k)` with `j < k`, in [`pair_index`] order.
pub fn pairs(n_tfs: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n_tfs));
    for j in 0..n_tfs {
        for k in j + 1..n_tfs {
            out.push((j, k));
        }
    }
    out
}

/// Linear-model parameters plus the per-TF prior weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Indexed by [`pair_index`]; empty when interactions are disabled.
    pub gamma: Vec<f64>,
    pub sigma2: f64,
    pub w: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(n_genes: usize, n_tfs: usize, interactions: bool) -> Self {
        ModelParams {
            alpha: vec![0.0; n_genes],
            beta: vec![0.0; n_tfs],
            gamma: if interactions {
                vec![0.0; pair_count(n_tfs)]
            } else {
                Vec::new()
            },
            sigma2: 1.0,
            w: vec![0.5; n_tfs],
        }
    }

    pub fn has_interactions(&self) -> bool {
        !self.gamma.is_empty()
    }

    pub fn gamma(&self, j: usize, k: usize) -> f64 {
        if self.gamma.is_empty() || j == k {
            0.0
        } else {
            self.gamma[pair_index(j, k, self.beta.len())]
        }
    }

    pub fn validate(&self, n_genes: usize, n_tfs: usize) -> Result<()> {
        if self.alpha.len() != n_genes || self.beta.len() != n_tfs || self.w.len() != n_tfs {
            return Err(Error::DimensionMismatch("parameter vector lengths".into()));
        }
        if !self.gamma.is_empty() && self.gamma.len() != pair_count(n_tfs) {
            return Err(Error::DimensionMismatch(format!(
                "{} interaction coefficients for {n_tfs} TFs",
                self.gamma.len()
            )));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::InvalidState(format!("sigma2 = {}", self.sigma2)));
        }
        if self.w.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidState("weight outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// Prior hyperparameters and model switches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub tau_alpha2: f64,
    pub tau_beta2: f64,
    pub tau_gamma2: f64,
    /// Degrees of freedom of the inverse-chi-square prior on sigma^2.
    pub nu: f64,
    /// Number of equally spaced weight grid points on [0, 1].
    pub grid_size: usize,
    pub include_interactions: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            tau_alpha2: 10_000.0,
            tau_beta2: 10_000.0,
            tau_gamma2: 10_000.0,
            nu: 2.0,
            grid_size: 101,
            include_interactions: true,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_alpha2", self.tau_alpha2),
            ("tau_beta2", self.tau_beta2),
            ("tau_gamma2", self.tau_gamma2),
            ("nu", self.nu),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid_size < 2 {
            return Err(Error::invalid("grid_size must be at least 2"));
        }
        Ok(())
    }

    /// The weight grid `{0, 1/(n-1), ..., 1}`.
    pub fn weight_grid(&self) -> Vec<f64> {
        let last = (self.grid_size - 1) as f64;
        (0..self.grid_size).map(|k| k as f64 / last).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(b: f64, m: f64) -> DatasetParts {
        DatasetParts {
            gene_ids: vec!["g1".into(), "g2".into()],
            tf_ids: vec!["t1".into()],
            experiment_ids: vec!["e1".into(), "e2".into()],
            g: Matrix::zeros(2, 2),
            f: Matrix::zeros(1, 2),
            b: Matrix::filled(2, 1, b),
            m: Matrix::filled(2, 1, m),
            tf_gene_map: vec![None],
        }
    }

    #[test]
    fn clamps_prior_sources() {
        let ds = Dataset::new(parts(0.0, 1.0), ClampPolicy::default()).unwrap();
        assert_eq!(ds.b().get(0, 0), 1e-6);
        assert_eq!(ds.m().get(1, 0), 1.0 - 1e-6);
    }

    #[test]
    fn hard_policy_rejects_conflicting_certainties() {
        assert!(Dataset::new(parts(0.0, 1.0), ClampPolicy::Hard).is_err());
        let ds = Dataset::new(parts(0.0, 0.3), ClampPolicy::Hard).unwrap();
        assert_eq!(ds.b().get(0, 0), 0.0);
    }

    #[test]
    fn rejects_duplicates_and_bad_values() {
        let mut p = parts(0.5, 0.5);
        p.gene_ids[1] = "g1".into();
        assert!(Dataset::new(p, ClampPolicy::default()).is_err());
        let mut p = parts(0.5, 0.5);
        p.g.set(0, 0, f64::NAN);
        assert!(Dataset::new(p, ClampPolicy::default()).is_err());
        assert!(Dataset::new(parts(1.2, 0.5), ClampPolicy::default()).is_err());
        let mut p = parts(0.5, 0.5);
        p.f = Matrix::zeros(2, 2);
        assert!(matches!(
            Dataset::new(p, ClampPolicy::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pair_index_is_dense_and_ordered() {
        for n in 1..8 {
            let ps = pairs(n);
            assert_eq!(ps.len(), pair_count(n));
            for (idx, &(j, k)) in ps.iter().enumerate() {
                assert_eq!(pair_index(j, k, n), idx);
                assert_eq!(pair_index(k, j, n), idx);
            }
        }
    }

    #[test]
    fn weight_grid_spans_unit_interval() {
        let g = Hyperparams::default().weight_grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!((g[37] - 0.37).abs() < 1e-15);
    }
}
