mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use approx_cd::io::{
    gen_synthetic, parse_runlog, read_libsvm, read_runlog, write_libsvm, write_runlog, LibsvmData, Regime,
};
use approx_cd::solver::{LogRecord, RunLog};
use approx_cd::BlockPartition;
use proptest::prelude::*;

use common::*;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_approx-cd"))
}

#[test]
fn libsvm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.svm");
    let mut r = rng(1);
    let mut matrix = random_sparse(30, 12, 0.3, &mut r);
    // make sure the last column is present so the width survives
    let mut t: Vec<_> = matrix.triplets().collect();
    if !t.iter().any(|&(_, c, _)| c == 11) {
        t.push((0, 11, 1.0));
    }
    matrix = approx_cd::SparseMatrix::from_triplets(30, 12, &t).unwrap();
    let data = LibsvmData {
        targets: normal_vec(30, &mut r),
        matrix,
    };
    write_libsvm(&data, &path).unwrap();
    let back = read_libsvm(&path).unwrap();
    assert_eq!(back.targets, data.targets);
    assert_eq!(back.matrix, data.matrix);
}

#[test]
fn libsvm_parse_errors_name_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.svm");
    fs::write(&path, "1 1:2\n-1 2:1 2:3\n").unwrap();
    let msg = read_libsvm(&path).unwrap_err().to_string();
    assert!(msg.contains("bad.svm:2"), "{msg}");
    fs::write(&path, "").unwrap();
    assert!(read_libsvm(&path).is_err());
    assert!(read_libsvm(dir.path().join("missing.svm")).is_err());
}

#[test]
fn synthetic_regimes_have_the_prescribed_row_counts() {
    for regime in Regime::ALL {
        let a = gen_synthetic(regime, 1000, 1000, 3).unwrap();
        let omega = a.row_block_counts(&BlockPartition::unit(1000).unwrap());
        assert_eq!(omega, regime.row_counts(1000));
        assert_eq!(a.row_nnz(), omega);
        assert_eq!(a, gen_synthetic(regime, 1000, 1000, 3).unwrap());
        assert_ne!(a, gen_synthetic(regime, 1000, 1000, 4).unwrap());
    }
}

#[test]
fn runlog_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    let log = RunLog {
        metadata: vec![("seed".into(), "3".into()), ("loss".into(), "square".into())],
        records: vec![
            LogRecord { k: 0, elapsed_s: 0.0, objective: 5.0, distance: None },
            LogRecord { k: 10, elapsed_s: 0.25, objective: 1.0 / 3.0, distance: None },
        ],
    };
    write_runlog(&log, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[..3], ["# seed=3", "# loss=square", "k,elapsed_s,objective"]);
    assert_eq!(lines.len(), 5);
    assert_eq!(read_runlog(&path).unwrap(), log);
}

#[test]
fn cli_gen_solve_compare() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("inter.svm");
    let status = cli()
        .args(["gen", "--regime", "intermediate", "--m", "200", "--n", "100", "--seed", "9", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let loaded = read_libsvm(&data).unwrap();
    assert_eq!(loaded.matrix.rows(), 200);
    assert_eq!(loaded.matrix.row_nnz(), Regime::Intermediate.row_counts(200));

    let log = dir.path().join("run.csv");
    let out = cli()
        .args(["solve", "--input"])
        .arg(&data)
        .args([
            "--loss", "square", "--reg", "l1", "--lambda", "0.5", "--tau", "10", "--mode", "approx", "--stepsizes",
            "fr", "--max-iters", "400", "--seed", "2", "--log-period", "50", "--threads", "2", "--log",
        ])
        .arg(&log)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = read_runlog(&log).unwrap();
    let ks: Vec<usize> = parsed.records.iter().map(|r| r.k).collect();
    assert_eq!(ks, (0..=8).map(|i| i * 50).collect::<Vec<_>>());
    assert!(parsed.records.last().unwrap().objective < parsed.records[0].objective);
    assert!(parsed.metadata.contains(&("seed".to_string(), "2".to_string())));
    assert!(fs::read_to_string(&log).unwrap().contains("\nk,elapsed_s,objective\n"));

    let out = cli()
        .args(["compare-stepsizes", "--input"])
        .arg(&data)
        .args(["--tau", "1,10,100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tau,l1_fr,l1_rt,l1_nc,omega,omega_bar");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("100,"));
}

#[test]
fn cli_solves_other_problem_types() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("signs.svm");
    assert!(cli()
        .args(["gen", "--regime", "uniform", "--m", "60", "--n", "40", "--labels", "sign", "--out"])
        .arg(&data)
        .status()
        .unwrap()
        .success());
    let xfile = dir.path().join("x.txt");
    for extra in [
        vec!["--problem", "dual-svm", "--tau", "6"],
        vec!["--loss", "logistic", "--reg", "l1", "--lambda", "0.01", "--tau", "4"],
        vec!["--loss", "smoothed-abs", "--mu", "0.2", "--tau", "4", "--block-size", "3", "--mode", "pcdm"],
        vec!["--reg", "box-linear", "--box-lo", "-1", "--box-hi", "1", "--sampling", "independent", "--tau", "4"],
    ] {
        let out = cli()
            .args(["solve", "--input"])
            .arg(&data)
            .args(&extra)
            .args(["--max-iters", "200", "--out"])
            .arg(&xfile)
            .output()
            .unwrap();
        assert!(out.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&out.stderr));
        let xs: Vec<f64> = fs::read_to_string(&xfile).unwrap().lines().map(|l| l.parse().unwrap()).collect();
        if extra[1] == "dual-svm" {
            assert_eq!(xs.len(), 60);
            assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&x)));
        } else {
            assert_eq!(xs.len(), 40);
        }
    }
}

#[test]
fn cli_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.svm");
    fs::write(&bad, "1 1:1\n1 x:2\n").unwrap();
    let out = cli().args(["solve", "--input"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));

    let real = dir.path().join("real.svm");
    fs::write(&real, "0.5 1:1\n-2 2:1\n").unwrap();
    for args in [
        vec!["--loss", "logistic"],
        vec!["--loss", "logistic", "--stepsizes", "nc"],
        vec!["--tau", "3"],
        vec!["--loss", "smoothed-abs", "--mu", "0"],
    ] {
        let out = cli().args(["solve", "--input"]).arg(&real).args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
    let out = cli()
        .args(["gen", "--regime", "extreme", "--m", "5", "--n", "10", "--out"])
        .arg(dir.path().join("x.svm"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

proptest! {
    #[test]
    fn runlog_text_round_trip(objs in proptest::collection::vec(-1e6f64..1e6, 0..20), seed in any::<u64>()) {
        let log = RunLog {
            metadata: vec![("seed".into(), seed.to_string())],
            records: objs
                .iter()
                .enumerate()
                .map(|(i, &o)| LogRecord { k: 3 * i, elapsed_s: i as f64 * 0.125, objective: o, distance: None })
                .collect(),
        };
        let mut buf = Vec::new();
        approx_cd::io::format_runlog(&log, &mut buf).unwrap();
        prop_assert_eq!(parse_runlog(buf.as_slice(), Path::new("mem")).unwrap(), log);
    }
}
