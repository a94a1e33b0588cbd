#![allow(dead_code)]

use mlmc_expmv::{pref, smallw, SparseMatrix};
use serde_json::Value;

/// Reference values computed once with SciPy by `fixtures/make_reference.py`.
pub fn reference() -> Value {
    serde_json::from_str(include_str!("../fixtures/reference.json")).expect("fixture parses")
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_f64().expect("number"))
        .collect()
}

pub fn matrix_from_triplets(n: usize, v: &Value) -> SparseMatrix {
    let entries = v.as_array().expect("triplet list").iter().map(|t| {
        let t = t.as_array().expect("triplet");
        (
            t[0].as_u64().unwrap() as usize,
            t[1].as_u64().unwrap() as usize,
            t[2].as_f64().unwrap(),
        )
    });
    SparseMatrix::from_triplets(n, n, entries).unwrap()
}

pub fn matrix_from_rows(v: &Value) -> SparseMatrix {
    let rows: Vec<Vec<f64>> = v.as_array().unwrap().iter().map(floats).collect();
    SparseMatrix::from_dense(&rows).unwrap()
}

/// Edge checksum used by the fixture script: sum of (i + 1)(j + 1).
pub fn checksum(a: &SparseMatrix) -> u64 {
    a.triplets().map(|(i, j, _)| (i as u64 + 1) * (j as u64 + 1)).sum()
}

/// Graph generated with the default parameters and generator seed 1, checked
/// against the fixture so its reference numbers can be trusted.
pub fn reference_graph(name: &str) -> (SparseMatrix, Value) {
    let all = reference();
    let entry = all["graphs"][name].clone();
    let n = entry["n"].as_u64().unwrap() as usize;
    let a = if name.starts_with("smallw") {
        smallw(n, 2, 0.1, 1).unwrap()
    } else {
        pref(n, 2, 1).unwrap()
    };
    assert_eq!(a.nnz() as u64, entry["nnz"].as_u64().unwrap(), "{name}: edge count drifted");
    assert_eq!(checksum(&a), entry["checksum"].as_u64().unwrap(), "{name}: edge set drifted");
    (a, entry)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Splitting bias of the level-`level` functional, read off the coupled
/// correction `P_level - P_{level-1}` (second-order decay puts the remaining
/// error at a third of it), padded by three of its standard errors.
pub fn splitting_bias(problem: &mlmc_expmv::Problem<'_>, level: u32, samples: u64, seed: u64) -> f64 {
    let mut s = mlmc_expmv::LevelStats::new(level);
    mlmc_expmv::mlmc::run_level(problem, level - 1, &mut s, samples, seed).unwrap();
    let se = (s.variance() / s.samples as f64).sqrt();
    (s.mean().abs() + 3.0 * se) / 3.0
}
