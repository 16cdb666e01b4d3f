use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use regnet::io::{
    assemble_dataset, load_expression, load_prior_matrix, load_tf_map, matrix_to_tsv, read_matrix, write_matrix,
    AssembleOptions, Imputation, LabeledMatrix, PriorKind, PriorTransform,
};
use regnet::model::ClampPolicy;
use regnet::Matrix;

fn labeled(prefix: &str, cols: &[&str], rows: Vec<Vec<f64>>) -> LabeledMatrix {
    let ids = (0..rows.len()).map(|i| format!("{prefix}{i:02}")).collect();
    LabeledMatrix::new(
        "id",
        ids,
        cols.iter().map(|c| c.to_string()).collect(),
        Matrix::from_rows(&rows).unwrap(),
    )
    .unwrap()
}

/// Writes `m` with its rows in the given order.
fn write_reordered(path: &Path, m: &LabeledMatrix, order: &[usize]) {
    let text = matrix_to_tsv(m);
    let mut lines: Vec<&str> = text.lines().collect();
    let body: Vec<&str> = order.iter().map(|&i| lines[i + 1]).collect();
    lines.truncate(1);
    lines.extend(body);
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrices_round_trip_bit_for_bit(
        cells in proptest::collection::vec(
            any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..40),
        cols in 1usize..5,
    ) {
        let rows = cells.len().div_ceil(cols);
        let mut data = cells.clone();
        data.resize(rows * cols, -0.0);
        let m = LabeledMatrix::new(
            "gene",
            (0..rows).map(|i| format!("g{i}")).collect(),
            (0..cols).map(|j| format!("e{j}")).collect(),
            Matrix::from_vec(rows, cols, data.clone()).unwrap(),
        ).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tsv");
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        prop_assert_eq!(&back.row_ids, &m.row_ids);
        prop_assert_eq!(&back.col_ids, &m.col_ids);
        for (a, b) in back.values.as_slice().iter().zip(&data) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn assembly_ignores_row_order(seed in 0u64..1000) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let exps = ["e0", "e1", "e2", "e3"];
        let tfs = ["TFA", "TFB"];
        let expr = labeled("g", &exps, (0..n).map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect()).collect());
        let chip = labeled("g", &tfs, (0..n).map(|_| (0..2).map(|_| rng.random_range(0.0..1.0)).collect()).collect());
        let motif = labeled("g", &tfs, (0..n).map(|_| (0..2).map(|_| rng.random_range(0.0..1.0)).collect()).collect());

        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        fs::write(d.join("map.tsv"), "tf\tgene\nTFA\tg03\nTFB\tg07\n").unwrap();
        let identity: Vec<usize> = (0..n).collect();
        let load = |order: &[usize], tag: &str| {
            let (e, c, m) = (d.join(format!("e{tag}.tsv")), d.join(format!("c{tag}.tsv")), d.join(format!("m{tag}.tsv")));
            write_reordered(&e, &expr, order);
            write_reordered(&c, &chip, order);
            write_reordered(&m, &motif, order);
            let clamp = ClampPolicy::default();
            let e = load_expression(&e, Imputation::RowMean).unwrap();
            let c = load_prior_matrix(&c, PriorKind::Chip, PriorTransform::None, clamp).unwrap();
            let m = load_prior_matrix(&m, PriorKind::Motif, PriorTransform::None, clamp).unwrap();
            let map: BTreeMap<String, String> = load_tf_map(&d.join("map.tsv")).unwrap();
            assemble_dataset(&e.matrix, &c, &m, &map, None, AssembleOptions { center_rows: true, clamp }).unwrap().dataset
        };
        let mut shuffled = identity.clone();
        shuffled.shuffle(&mut rng);
        let a = load(&identity, "a");
        let b = load(&shuffled, "b");
        prop_assert_eq!(a.gene_ids(), b.gene_ids());
        prop_assert_eq!(a.tf_ids(), b.tf_ids());
        prop_assert_eq!(a.g(), b.g());
        prop_assert_eq!(a.f(), b.f());
        prop_assert_eq!(a.b(), b.b());
        prop_assert_eq!(a.m(), b.m());
    }
}

#[test]
fn malformed_inputs_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.tsv");
    fs::write(&p, "gene\te0\te1\ng0\t1\t2\ng1\t3\n").unwrap();
    let err = read_matrix(&p).unwrap_err().to_string();
    assert!(err.contains("x.tsv:3:"), "{err}");
    fs::write(&p, "gene\te0\ng0\tabc\n").unwrap();
    let err = read_matrix(&p).unwrap_err().to_string();
    assert!(err.contains("abc"), "{err}");
    fs::write(&p, "gene\tTF\ng0\t1.5\n").unwrap();
    assert!(load_prior_matrix(&p, PriorKind::Chip, PriorTransform::None, ClampPolicy::default()).is_err());
}
