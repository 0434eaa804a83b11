//! CLI acceptance: the table command reproduces the analytic comparison
//! rows (criterion 10), plus exit-code and file-interchange behavior.

use grat_core::maskplan::SchemeConfig;
use grat_core::metrics::mask_stats;
use grat_core::tensorio::{read_tensor, write_tensor};
use grat_core::{GridShape, GroupShape, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::{Command, Output};

fn grat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// (scheme, ref sparsity %, ref farthest) in display order.
type RefRow = (&'static str, f64, u64);

#[test]
fn c10_table_reproduction() {
    let presets: [(&str, Vec<usize>, Vec<RefRow>); 2] = [
        (
            "image",
            vec![512, 512],
            vec![
                ("full", 0.0, 724),
                ("circular", 99.50, 16),
                ("neighborhood", 99.42, 23),
                ("grat-b", 99.03, 45),
                ("grat-x", 93.67, 512),
            ],
        ),
        (
            "video",
            vec![32, 48, 80],
            vec![
                ("full", 0.0, 98),
                ("grat-b", 94.3, 24),
                ("grat-x", 60.8, 81),
            ],
        ),
    ];

    for (preset, dims, expected) in presets {
        let out = grat(&["table", "--preset", preset, "--json"]);
        assert_eq!(exit_code(&out), 0);
        let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        let rows = rows.as_array().unwrap();
        assert_eq!(rows.len(), expected.len(), "{preset} row count");

        let grid = GridShape::new(dims.clone()).unwrap();
        for (row, (scheme_name, ref_sparsity, ref_farthest)) in rows.iter().zip(&expected) {
            assert_eq!(row["scheme"], *scheme_name, "{preset} scheme order");
            assert_eq!(row["ref_sparsity_pct"].as_f64().unwrap(), *ref_sparsity);
            assert_eq!(row["ref_farthest"].as_u64().unwrap(), *ref_farthest);

            // every computed column must match the metrics oracle exactly
            let scheme = scheme_for_table(scheme_name, &dims);
            let stats = mask_stats(&scheme, &grid).unwrap();
            assert_eq!(row["pair_count"].as_u64().unwrap(), stats.pair_count);
            assert_eq!(
                row["sparsity_pct"].as_f64().unwrap(),
                stats.flops_sparsity * 100.0
            );
            assert_eq!(row["farthest"].as_f64().unwrap(), stats.farthest);
            assert_eq!(row["farthest_ceil"].as_u64().unwrap(), stats.farthest_ceil);
        }

        // the video grat-b row carries the boundary-free sparsity 94.375%
        if preset == "video" {
            let gb = &rows[1];
            let interior = gb["interior_sparsity_pct"].as_f64().unwrap();
            assert_eq!(interior, (1.0 - 6912.0 / 122_880.0) * 100.0);
            assert!((interior - 94.3).abs() < 0.1);
        }
    }

    // human-readable mode shows the same rows
    let out = grat(&["table", "--preset", "image"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    for name in ["full", "circular", "neighborhood", "grat-b", "grat-x"] {
        assert!(text.contains(name), "missing {name} in table");
    }
    println!("ACCEPTANCE C10 PASS: image and video tables match the metrics oracle; video grat-b interior sparsity 94.375% alongside reference 94.3%");
}

fn scheme_for_table(name: &str, dims: &[usize]) -> SchemeConfig {
    let group = if dims.len() == 2 {
        GroupShape::new(vec![16, 16]).unwrap()
    } else {
        GroupShape::new(vec![4, 8, 8]).unwrap()
    };
    match name {
        "full" => SchemeConfig::Full,
        "circular" => SchemeConfig::CircularRadius { radius: 16.0 },
        "neighborhood" => SchemeConfig::Neighborhood {
            window: vec![32, 32],
        },
        "grat-b" => SchemeConfig::GratB {
            group,
            b: vec![1; dims.len()],
        },
        "grat-x" => SchemeConfig::GratX { group },
        other => panic!("unexpected scheme {other}"),
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(exit_code(&grat(&["table", "--preset", "audio"])), 2);
    assert_eq!(
        exit_code(&grat(&[
            "bench", "--scheme", "grat-b", "--grid", "8x8", "--group", "2x2", "--b", "1", "--reps",
            "2"
        ])),
        2
    );
    // missing --k
    assert_eq!(
        exit_code(&grat(&[
            "run", "--scheme", "full", "--grid", "2x2", "--q", "q.grt", "--v", "v.grt", "--out",
            "o.grt"
        ])),
        2
    );
    // grouped scheme without --group
    assert_eq!(
        exit_code(&grat(&["stats", "--scheme", "grat-x", "--grid", "8x8"])),
        2
    );
}

#[test]
fn computation_errors_exit_1() {
    let out = grat(&[
        "stats", "--scheme", "grat-b", "--grid", "5x4", "--group", "2x2", "--b", "1",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not divide"));
}

#[test]
fn stats_pins_derived_values() {
    let out = grat(&[
        "stats", "--scheme", "grat-b", "--grid", "32x48x80", "--group", "4x8x8", "--b", "1",
        "--json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        v["formula_sparsity"].as_f64().unwrap(),
        1.0 - 6912.0 / 122_880.0
    );

    // JSON stats round-trip through the typed reader
    let parsed: grat_core::metrics::MaskStats = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed.pair_count, 645_922_816);

    let out = grat(&["stats", "--scheme", "full", "--grid", "8x8"]);
    assert!(stdout(&out).contains("sparsity     0.00%"));
}

#[test]
fn run_executes_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 64;
    let d = 8;
    let mk = |rng: &mut ChaCha8Rng| {
        Tensor::from_vec(
            vec![n, d],
            (0..n * d).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
        )
        .unwrap()
    };
    let q = mk(&mut rng);
    let k = mk(&mut rng);
    let v = mk(&mut rng);
    let paths: Vec<_> = ["q", "k", "v", "out"]
        .iter()
        .map(|s| dir.path().join(format!("{s}.grt")))
        .collect();
    write_tensor(&paths[0], &q).unwrap();
    write_tensor(&paths[1], &k).unwrap();
    write_tensor(&paths[2], &v).unwrap();

    let out = grat(&[
        "run",
        "--scheme",
        "grat-b",
        "--grid",
        "8x8",
        "--group",
        "2x2",
        "--b",
        "1",
        "--q",
        paths[0].to_str().unwrap(),
        "--k",
        paths[1].to_str().unwrap(),
        "--v",
        paths[2].to_str().unwrap(),
        "--out",
        paths[3].to_str().unwrap(),
        "--verify",
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let dev: f64 = text
        .lines()
        .find(|l| l.starts_with("verify:"))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(dev <= 1e-5, "verify deviation {dev}");
    assert_eq!(read_tensor(&paths[3]).unwrap().shape(), &[n, d]);

    // mismatched grid is a computation error
    let out = grat(&[
        "run",
        "--scheme",
        "full",
        "--grid",
        "4x4",
        "--q",
        paths[0].to_str().unwrap(),
        "--k",
        paths[1].to_str().unwrap(),
        "--v",
        paths[2].to_str().unwrap(),
        "--out",
        paths[3].to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn run_single_token_full_returns_values() {
    let dir = tempfile::tempdir().unwrap();
    let q = Tensor::from_vec(vec![1, 3], vec![0.1, 0.2, 0.3]).unwrap();
    let v = Tensor::from_vec(vec![1, 3], vec![-4.0, 5.5, 0.125]).unwrap();
    let qp = dir.path().join("q.grt");
    let vp = dir.path().join("v.grt");
    let op = dir.path().join("o.grt");
    write_tensor(&qp, &q).unwrap();
    write_tensor(&vp, &v).unwrap();

    let out = grat(&[
        "run",
        "--scheme",
        "full",
        "--grid",
        "1x1",
        "--q",
        qp.to_str().unwrap(),
        "--k",
        qp.to_str().unwrap(),
        "--v",
        vp.to_str().unwrap(),
        "--out",
        op.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let result = read_tensor(&op).unwrap();
    for (a, b) in result.data().iter().zip(v.data()) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn massdist_identity_weights_all_near() {
    let dir = tempfile::tempdir().unwrap();
    let n = 16;
    let mut w = vec![0.0f32; n * n];
    for i in 0..n {
        w[i * n + i] = 1.0;
    }
    let wp = dir.path().join("w.grt");
    write_tensor(&wp, &Tensor::from_vec(vec![n, n], w).unwrap()).unwrap();

    let out = grat(&[
        "massdist",
        "--weights",
        wp.to_str().unwrap(),
        "--grid",
        "4x4",
        "--bins",
        "10",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("mass below 0.2 normalized distance: 100.00%"));

    // non-stochastic rows exit 1
    let bad = Tensor::from_vec(vec![2, 2], vec![0.4f32, 0.4, 0.5, 0.5]).unwrap();
    let bp = dir.path().join("bad.grt");
    write_tensor(&bp, &bad).unwrap();
    let out = grat(&[
        "massdist",
        "--weights",
        bp.to_str().unwrap(),
        "--grid",
        "2x1",
        "--bins",
        "4",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sums to"));
}

#[test]
fn bench_cli_reports_all_executors() {
    let out = grat(&[
        "bench", "--scheme", "grat-b", "--grid", "8x8", "--group", "2x2", "--b", "1", "--d", "4",
        "--reps", "3", "--seed", "11", "--json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["dense"]["pairs"].as_u64().unwrap(), 64 * 64);
    assert_eq!(
        v["grouped"]["pairs"].as_u64().unwrap(),
        v["scattered"]["pairs"].as_u64().unwrap()
    );
    assert!(v["grouped_max_abs"].as_f64().unwrap() <= 1e-5);
}
