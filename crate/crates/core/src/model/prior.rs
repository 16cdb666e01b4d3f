//! Weighted geometric prior over regulation indicators and its normalizer.
//!
//! For a cell with binding probability `b`, motif probability `m` and TF
//! weight `w`, the unnormalized prior mass is `b^w m^(1-w)` for `C = 1` and
//! `(1-b)^w (1-m)^(1-w)` for `C = 0`. Everything is evaluated in log space.

use rand::Rng;

use super::types::{Dataset, NetworkState};
use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, sigmoid};

/// `w * ln_p` with the convention `0 * ln 0 = 0`.
#[inline]
fn scaled(w: f64, ln_p: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * ln_p
    }
}

/// Unnormalized log prior mass of `(C = 1, C = 0)`.
#[inline]
pub(crate) fn cell_log_masses(ln_b: f64, ln_not_b: f64, ln_m: f64, ln_not_m: f64, w: f64) -> (f64, f64) {
    (
        scaled(w, ln_b) + scaled(1.0 - w, ln_m),
        scaled(w, ln_not_b) + scaled(1.0 - w, ln_not_m),
    )
}

/// `log P(C=1) - log P(C=0)` from precomputed logs.
#[inline]
pub fn log_odds_from_logs(ln_b: f64, ln_not_b: f64, ln_m: f64, ln_not_m: f64, w: f64) -> f64 {
    let (on, off) = cell_log_masses(ln_b, ln_not_b, ln_m, ln_not_m, w);
    on - off
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("{name} = {x} is not a probability")));
    }
    Ok(())
}

/// Log prior odds of inclusion for raw `(b, m, w)`.
pub fn prior_log_odds(b: f64, m: f64, w: f64) -> Result<f64> {
    check_prob("b", b)?;
    check_prob("m", m)?;
    check_prob("w", w)?;
    let odds = log_odds_from_logs(b.ln(), (1.0 - b).ln(), m.ln(), (1.0 - m).ln(), w);
    if odds.is_nan() {
        return Err(Error::invalid(format!("prior is undefined for b={b}, m={m}, w={w}")));
    }
    Ok(odds)
}

/// Prior probability `P(C = 1 | b, m, w)` under the weighted geometric mean.
pub fn prior_probability(b: f64, m: f64, w: f64) -> Result<f64> {
    prior_log_odds(b, m, w).map(sigmoid)
}

/// Alternative prior: the arithmetic mixture `w b + (1 - w) m`.
pub fn prior_probability_arithmetic(b: f64, m: f64, w: f64) -> Result<f64> {
    check_prob("b", b)?;
    check_prob("m", m)?;
    check_prob("w", w)?;
    Ok(w * b + (1.0 - w) * m)
}

/// `log A(w)`: the log of the product over genes of the per-gene prior normalizers.
pub fn weight_normalizing_constant_log(b_col: &[f64], m_col: &[f64], w: f64) -> Result<f64> {
    if b_col.len() != m_col.len() {
        return Err(Error::invalid(format!(
            "column lengths differ: {} vs {}",
            b_col.len(),
            m_col.len()
        )));
    }
    check_prob("w", w)?;
    let mut total = 0.0;
    for (&b, &m) in b_col.iter().zip(m_col) {
        check_prob("b", b)?;
        check_prob("m", m)?;
        let (on, off) = cell_log_masses(b.ln(), (1.0 - b).ln(), m.ln(), (1.0 - m).ln(), w);
        total += log_add_exp(on, off);
    }
    Ok(total)
}

/// Log of the (unnormalized over `w`) conditional density of a TF weight given
/// its indicator column.
pub fn weight_log_density(b_col: &[f64], m_col: &[f64], c_col: &[bool], w: f64) -> Result<f64> {
    if b_col.len() != c_col.len() {
        return Err(Error::invalid("indicator column length differs from prior column"));
    }
    let log_a = weight_normalizing_constant_log(b_col, m_col, w)?;
    let mut s = 0.0;
    for ((&b, &m), &c) in b_col.iter().zip(m_col).zip(c_col) {
        let (on, off) = cell_log_masses(b.ln(), (1.0 - b).ln(), m.ln(), (1.0 - m).ln(), w);
        s += if c { on } else { off };
    }
    Ok(s - log_a)
}

/// Same as [`weight_log_density`] for column `j` of a dataset, using its cached logs.
pub(crate) fn column_weight_log_density(dataset: &Dataset, network: &NetworkState, j: usize, w: f64) -> f64 {
    let l = dataset.logs();
    let mut s = 0.0;
    for i in 0..dataset.n_genes() {
        let (on, off) = cell_log_masses(
            l.ln_b.get(i, j),
            l.ln_not_b.get(i, j),
            l.ln_m.get(i, j),
            l.ln_not_m.get(i, j),
            w,
        );
        let chosen = if network.get(i, j) { on } else { off };
        s += chosen - log_add_exp(on, off);
    }
    s
}

/// Draws every indicator independently from its prior at the given TF weights.
pub fn sample_network_from_prior<R: Rng + ?Sized>(dataset: &Dataset, w: &[f64], rng: &mut R) -> Result<NetworkState> {
    if w.len() != dataset.n_tfs() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} TFs",
            w.len(),
            dataset.n_tfs()
        )));
    }
    if let Some(bad) = w.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::invalid(format!("weight {bad} outside [0, 1]")));
    }
    let mut net = NetworkState::empty(dataset.n_genes(), dataset.n_tfs());
    for i in 0..dataset.n_genes() {
        for (j, &wj) in w.iter().enumerate() {
            let p = sigmoid(dataset.prior_log_odds_at(i, j, wj));
            net.set(i, j, rng.random::<f64>() < p);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spot_values() {
        assert!((prior_probability(0.9, 0.2, 1.0).unwrap() - 0.9).abs() < 1e-14);
        assert_eq!(prior_probability(0.5, 0.5, 0.3).unwrap(), 0.5);
        assert!((prior_probability(0.8, 0.2, 0.75).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn arithmetic_spot_values() {
        assert!((prior_probability_arithmetic(0.9, 0.1, 1.0).unwrap() - 0.9).abs() < 1e-15);
        assert!((prior_probability_arithmetic(0.9, 0.1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((prior_probability_arithmetic(0.3, 0.3, 0.77).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn normalizer_spot_values() {
        let half = vec![0.5; 7];
        assert_eq!(weight_normalizing_constant_log(&half, &half, 0.37).unwrap(), 0.0);
        let b = [0.1, 0.7, 0.99];
        let m = [0.4, 0.2, 0.05];
        assert!(weight_normalizing_constant_log(&b, &m, 1.0).unwrap().abs() < 1e-15);
        let la = weight_normalizing_constant_log(&[0.9], &[0.1], 0.5).unwrap();
        assert!((la - 0.6f64.ln()).abs() < 1e-14);
        assert!((la + 0.5108).abs() < 1e-4);
    }

    #[test]
    fn non_finite_and_mismatched_inputs_error() {
        assert!(prior_probability(f64::NAN, 0.5, 0.5).is_err());
        assert!(prior_probability(0.5, 0.5, 1.5).is_err());
        assert!(weight_normalizing_constant_log(&[0.5], &[0.5, 0.5], 0.5).is_err());
    }

    #[test]
    fn hard_zero_with_zero_weight_is_ignored() {
        // b = 0 exactly, but w = 0 means only m matters.
        assert!((prior_probability(0.0, 0.3, 0.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(prior_probability(0.0, 0.3, 1.0).unwrap(), 0.0);
        assert!(prior_probability(0.0, 1.0, 0.5).is_err());
    }

    fn prob() -> impl Strategy<Value = f64> {
        1e-6..(1.0 - 1e-6)
    }

    proptest! {
        #[test]
        fn endpoints_reduce_to_single_source(b in prob(), m in prob()) {
            prop_assert!((prior_probability(b, m, 1.0).unwrap() - b).abs() < 1e-12);
            prop_assert!((prior_probability(b, m, 0.0).unwrap() - m).abs() < 1e-12);
        }

        #[test]
        fn complementary_branches_sum_to_one(b in prob(), m in prob(), w in 0.0..=1.0f64) {
            let p1 = prior_probability(b, m, w).unwrap();
            let p0 = prior_probability(1.0 - b, 1.0 - m, w).unwrap();
            prop_assert!((p1 + p0 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn swapping_sources_mirrors_weight(b in prob(), m in prob(), w in 0.0..=1.0f64) {
            let a = prior_probability(b, m, w).unwrap();
            let s = prior_probability(m, b, 1.0 - w).unwrap();
            prop_assert!((a - s).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_each_source(b in prob(), m in prob(), w in 0.01..0.99f64, db in 1e-4..0.1f64) {
            let b2 = (b + db).min(1.0 - 1e-6);
            let m2 = (m + db).min(1.0 - 1e-6);
            prop_assert!(prior_probability(b2, m, w).unwrap() >= prior_probability(b, m, w).unwrap());
            prop_assert!(prior_probability(b, m2, w).unwrap() >= prior_probability(b, m, w).unwrap());
        }
    }
}
