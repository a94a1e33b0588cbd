mod common;

use mlmc_expmv::{pref, smallw, ChainDecomposition, GraphKind, GraphSpec, SparseMatrix};
use proptest::prelude::*;

fn degrees(a: &SparseMatrix) -> Vec<usize> {
    (0..a.n()).map(|i| a.row(i).0.len()).collect()
}

fn assert_simple_undirected(a: &SparseMatrix) {
    assert!(a.is_symmetric());
    for (i, j, v) in a.triplets() {
        assert_ne!(i, j, "self loop at {i}");
        assert_eq!(v, 1.0);
    }
}

#[test]
fn million_node_small_world_keeps_degrees_small() {
    let a = smallw(1_000_000, 2, 0.1, 1).unwrap();
    let deg = degrees(&a);
    let d_max = *deg.iter().max().unwrap();
    assert!(d_max <= 10, "d_max = {d_max}");
    assert!(deg.iter().all(|&d| d >= 4));
}

#[test]
fn preferential_attachment_tail_exponent() {
    let a = pref(100_000, 2, 3).unwrap();
    let deg = degrees(&a);
    let n = deg.len() as f64;
    // log-log fit of the complementary CDF P(D >= k); a density exponent
    // gamma gives a CCDF slope of 1 - gamma
    let points: Vec<(f64, f64)> = (4..=100)
        .filter_map(|k| {
            let tail = deg.iter().filter(|&&d| d >= k).count();
            (tail >= 10).then(|| ((k as f64).ln(), (tail as f64 / n).ln()))
        })
        .collect();
    let gamma = 1.0 - common::slope(&points);
    assert!((gamma - 3.0).abs() <= 0.5, "gamma = {gamma}");
    assert!(*deg.iter().max().unwrap() > 200, "no hubs");
}

#[test]
fn spectral_scale_of_a_scale_free_graph() {
    let a = pref(10_000, 2, 4).unwrap();
    let d_max = *degrees(&a).iter().max().unwrap() as f64;
    let dec = ChainDecomposition::decompose(&a).unwrap();
    assert_eq!(dec.d_max(), d_max);
    assert_eq!(dec.spectral_scale().unwrap(), 1.0 / d_max);
}

#[test]
fn specs_match_the_free_functions() {
    let s = GraphSpec::smallw(500, 9);
    assert_eq!((s.kind, s.k, s.p), (GraphKind::Smallw, 2, 0.1));
    assert_eq!(s.generate().unwrap(), smallw(500, 2, 0.1, 9).unwrap());
    let p = GraphSpec::pref(500, 9);
    assert_eq!((p.kind, p.d), (GraphKind::Pref, 2));
    assert_eq!(p.generate().unwrap(), pref(500, 2, 9).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn small_world_is_simple_and_deterministic(n in 7usize..300, k in 1usize..4, p in 0.0f64..=1.0, seed: u64) {
        prop_assume!(2 * k < n);
        let a = smallw(n, k, p, seed).unwrap();
        assert_simple_undirected(&a);
        prop_assert!(degrees(&a).iter().all(|&d| d >= 2 * k));
        prop_assert_eq!(a, smallw(n, k, p, seed).unwrap());
    }

    #[test]
    fn preferential_attachment_is_simple_and_deterministic(n in 4usize..300, d in 1usize..4, seed: u64) {
        prop_assume!(n > d);
        let a = pref(n, d, seed).unwrap();
        assert_simple_undirected(&a);
        let edges = d * (d - 1) / 2 + (n - d) * d;
        prop_assert_eq!(a.nnz(), 2 * edges);
        prop_assert_eq!(a, pref(n, d, seed).unwrap());
    }
}
