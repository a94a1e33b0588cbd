mod common;

use common::{floats, reference, reference_graph};
use mlmc_expmv::oracle::{dense_expmv, strang_local_error_term, strang_reference, DenseMatrix};
use mlmc_expmv::{ChainDecomposition, SparseMatrix};
use proptest::prelude::*;

fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    got.iter().zip(want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

#[test]
fn signed_matrices_match_reference() {
    let r = reference();
    for (name, n) in [("signed_10", 10), ("signed_20", 20)] {
        let a = common::matrix_from_triplets(n, &r[name]["triplets"]);
        let got = dense_expmv(&a, &floats(&r[name]["u"]), 1.0).unwrap();
        let err = max_rel_err(&got, &floats(&r[name]["exact"]));
        assert!(err <= 1e-12, "{name}: {err:e}");
        let dense = DenseMatrix::from_sparse(&a).unwrap();
        let again = dense_expmv(&dense, &floats(&r[name]["u"]), 1.0).unwrap();
        assert!(max_rel_err(&again, &got) <= 1e-14);
    }
}

#[test]
fn graph_communicabilities_match_reference() {
    for name in ["smallw_100", "smallw_1000", "pref_1000"] {
        let (a, entry) = reference_graph(name);
        let beta = entry["beta"].as_f64().unwrap();
        let x = dense_expmv(&a, &vec![1.0; a.n()], beta).unwrap();
        let node0 = entry["node0"].as_f64().unwrap();
        let total = entry["total"].as_f64().unwrap();
        assert!((x[0] - node0).abs() <= 1e-12 * node0, "{name} node 0");
        assert!((x.iter().sum::<f64>() - total).abs() <= 1e-12 * total, "{name} total");
    }
}

#[test]
fn large_norm_rotation_stays_accurate() {
    // ||beta A||_1 = 1e4; e^{beta A} (1, 0) = (cos, -sin) of the angle
    let theta = 1e4;
    let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
    let x = dense_expmv(&a, &[1.0, 0.0], theta).unwrap();
    let err = max_rel_err(&x, &[theta.cos(), -theta.sin()]);
    assert!(err <= 1e-12, "{err:e}");
    let d = SparseMatrix::diagonal(&[-1e4, 0.5, -3.0]);
    let y = dense_expmv(&d, &[1.0, 1.0, 1.0], 1.0).unwrap();
    assert!(max_rel_err(&y, &[(-1e4f64).exp(), 0.5f64.exp(), (-3f64).exp()]) <= 1e-12);
}

#[test]
fn one_step_error_approaches_the_commutator_term() {
    let a = SparseMatrix::from_dense(&[
        vec![0.5, -1.0, 0.0, 0.3, 0.0],
        vec![0.2, -0.4, 0.8, 0.0, -0.6],
        vec![0.0, 1.1, 0.1, -0.5, 0.0],
        vec![-0.7, 0.0, 0.4, 0.9, 0.2],
        vec![0.0, 0.3, 0.0, -1.2, -0.2],
    ])
    .unwrap();
    let dec = ChainDecomposition::decompose(&a).unwrap();
    let u = [1.0, -0.5, 2.0, 0.25, 1.5];
    let gaps: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
        .iter()
        .map(|&h| {
            let split = strang_reference(&dec, &u, h, 1).unwrap();
            let exact = dense_expmv(&a, &u, h).unwrap();
            let err: Vec<f64> = split.iter().zip(&exact).map(|(s, e)| s - e).collect();
            max_rel_err(&err, &strang_local_error_term(&dec, &u, h).unwrap())
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] <= 0.1, "{gaps:?}");
}

fn small_matrix() -> impl Strategy<Value = SparseMatrix> {
    (1usize..=8).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, -2.0f64..2.0), 0..3 * n)
            .prop_map(move |t| SparseMatrix::from_triplets(n, n, t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup(a in small_matrix(), beta in 0.0f64..1.5) {
        let u: Vec<f64> = (0..a.n()).map(|j| 1.0 - 0.3 * j as f64).collect();
        let twice = dense_expmv(&a, &dense_expmv(&a, &u, beta).unwrap(), beta).unwrap();
        let once = dense_expmv(&a, &u, 2.0 * beta).unwrap();
        let scale = once.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, y) in twice.iter().zip(&once) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn strang_is_exact_when_d_is_constant(n in 2usize..6, c in -1.0f64..1.0, w in 0.1f64..2.0) {
        // ring with equal weights: D = (c + w) I commutes with T
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c));
            t.push((i, (i + 1) % n, w));
        }
        let a = SparseMatrix::from_triplets(n, n, t).unwrap();
        let dec = ChainDecomposition::decompose(&a).unwrap();
        let u: Vec<f64> = (0..n).map(|j| j as f64 + 1.0).collect();
        let split = strang_reference(&dec, &u, 1.0, 2).unwrap();
        let exact = dense_expmv(&a, &u, 1.0).unwrap();
        prop_assert!(max_rel_err(&split, &exact) <= 1e-12);
    }
}
