use std::collections::BTreeMap;

use mlmc_expmv::io::{
    parse_matrix_market, parse_vector, read_matrix_market, read_result, read_result_from, read_vector,
    write_matrix_market, write_matrix_market_to, write_result, write_result_to, write_vector, Format, LevelRow,
    ResultRecord,
};
use mlmc_expmv::{mlmc_driver, ChainDecomposition, Error, MlmcConfig, Problem, SparseMatrix};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = SparseMatrix> {
    (1usize..=30).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, prop::num::f64::NORMAL), 0..4 * n)
            .prop_map(move |t| SparseMatrix::from_triplets(n, n, t).unwrap())
    })
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
}

fn record() -> impl Strategy<Value = ResultRecord> {
    let row = (0u32..40, finite(), any::<u64>(), finite(), finite(), any::<u64>()).prop_map(
        |(level, dt, samples, mean, variance, cost)| LevelRow {
            level,
            dt,
            samples,
            mean,
            variance,
            cost,
        },
    );
    (
        (finite(), finite(), finite(), any::<u64>(), finite(), any::<bool>()),
        proptest::collection::vec(row, 0..6),
        proptest::collection::btree_map("[a-z_]{1,8}", "[ -~]{0,12}", 0..4),
    )
        .prop_map(|((estimate, statistical_error, bias_estimate, total_cost, wall, converged), levels, config)| {
            ResultRecord {
                estimate,
                statistical_error,
                bias_estimate,
                total_cost,
                wall_time_seconds: wall,
                converged,
                levels,
                config,
            }
        })
}

proptest! {
    #[test]
    fn matrix_market_round_trip(a in matrix()) {
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        prop_assert_eq!(parse_matrix_market(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn vector_round_trip(x in proptest::collection::vec(finite(), 1..50)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        write_vector(&x, &path).unwrap();
        prop_assert_eq!(read_vector(&path).unwrap(), x);
    }

    #[test]
    fn result_round_trip(r in record()) {
        for format in [Format::Json, Format::Csv] {
            let mut buf = Vec::new();
            write_result_to(&r, &mut buf, format).unwrap();
            prop_assert_eq!(&read_result_from(buf.as_slice(), format).unwrap(), &r);
        }
    }
}

#[test]
fn matrix_market_file_round_trip() {
    let a = SparseMatrix::from_dense(&[vec![1.5, 0.0, -2e-300], vec![0.0, 0.0, 3.0], vec![1e300, 0.1, 0.0]]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    write_matrix_market(&a, &path).unwrap();
    assert_eq!(read_matrix_market(&path).unwrap(), a);
}

#[test]
fn symmetric_header_expands_to_full_storage() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 1\n2 1 4.5\n";
    let a = parse_matrix_market(text.as_bytes()).unwrap();
    assert_eq!(a.nnz(), 2);
    assert_eq!((a.get(0, 1), a.get(1, 0)), (4.5, 4.5));
}

#[test]
fn bad_entries_report_their_line() {
    let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
    match parse_matrix_market(text.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    match parse_vector("1.0\n2.0\nx\n".as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn vectors_accept_scientific_notation_and_reject_empty_files() {
    assert_eq!(parse_vector("1e-3 2.5E2\n-4\n".as_bytes()).unwrap(), vec![1e-3, 250.0, -4.0]);
    assert!(parse_vector("".as_bytes()).is_err());
    assert!(parse_vector("% only a comment\n".as_bytes()).is_err());
}

#[test]
fn driver_record_round_trips_through_files() {
    let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, -0.5]]).unwrap();
    let dec = ChainDecomposition::decompose(&a).unwrap();
    let u = [1.0, 2.0];
    let r = mlmc_driver(&Problem::Entry { dec: &dec, u: &u, i: 1, beta: 0.7 }, &MlmcConfig::new(1e-3, 3)).unwrap();
    let record = ResultRecord::from_mlmc(&r, 0.7, 0.01)
        .with_config("seed", 3)
        .with_config("note", "a, \"quoted\" value");
    assert_eq!(record.levels.len(), r.levels.len());
    assert_eq!(record.levels[2].dt, 0.7 / 2f64.powi(r.l0 as i32 + 2));
    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [("r.json", Format::Json), ("r.csv", Format::Csv)] {
        let path = dir.path().join(name);
        write_result(&record, &path, format).unwrap();
        assert_eq!(read_result(&path, format).unwrap(), record);
    }
}

#[test]
fn empty_level_table_and_nan_fields() {
    let record = ResultRecord {
        estimate: f64::NAN,
        statistical_error: f64::INFINITY,
        bias_estimate: 0.0,
        total_cost: 0,
        wall_time_seconds: 0.0,
        converged: false,
        levels: Vec::new(),
        config: BTreeMap::new(),
    };
    let mut json = Vec::new();
    write_result_to(&record, &mut json, Format::Json).unwrap();
    let text = String::from_utf8(json.clone()).unwrap();
    assert!(text.contains("\"estimate\": null"));
    assert!(text.contains("\"converged\": false"));
    assert!(text.contains("\"levels\": []"));
    let mut csv = Vec::new();
    write_result_to(&record, &mut csv, Format::Csv).unwrap();
    assert!(String::from_utf8(csv.clone()).unwrap().contains("summary,,estimate,null"));
    for (buf, format) in [(json, Format::Json), (csv, Format::Csv)] {
        let back = read_result_from(buf.as_slice(), format).unwrap();
        assert!(back.estimate.is_nan() && back.statistical_error.is_nan());
        assert!(back.levels.is_empty() && !back.converged);
    }
}
