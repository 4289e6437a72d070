mod common;

use std::fs;
use std::path::Path;

use common::*;
use qdep::calibration::{build_null_pool, run_test};
use qdep::cli::{pgm_level, run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use qdep::power::PowerTable;
use qdep::ranks::TiePolicy;
use qdep::stats::{StatConfig, Statistic};

fn qdep(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("qdep").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(qdep(&["simulate", "sr1", "--n", "5", "--seed", "1", "-o", s(&a)]).0, EXIT_OK);
    assert_eq!(qdep(&["simulate", "sr1", "--n", "5", "--seed", "1", "-o", s(&b)]).0, EXIT_OK);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("x,y\n"));
    assert_eq!(text.lines().count(), 6);

    let (code, _, err) = qdep(&["simulate", "bm99", "--n", "5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("unknown model"));
}

#[test]
fn test_command_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    qdep(&["simulate", "bm1", "--n", "80", "--seed", "3", "-o", s(&data)]);
    let (code, out, _) = qdep(&["test", s(&data), "--mc", "300", "--seed", "2"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["meta"]["n"], 80);
    assert_eq!(v["meta"]["mc"], 300);
    assert_eq!(v["meta"]["generator"], qdep::rng::GENERATOR_ID);
    for k in ["l_r2", "l_r6", "d_s0", "d_s4", "hhg"] {
        assert!(v["statistics"][k].is_f64() && v["p_values"][k].is_f64());
    }
    for k in ["p_l", "p_hhg", "m", "p_value"] {
        assert!(v["min_p"][k].is_f64());
    }
}

#[test]
fn malformed_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "x,y\n1,2\n2,3\n4,5,6\n").unwrap();
    let (code, _, err) = qdep(&["test", s(&data), "--mc", "100"]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn pool_cache_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let cache = dir.path().join("cache");
    qdep(&["simulate", "bm8", "--n", "50", "-o", s(&data)]);
    let args = ["test", s(&data), "--mc", "200", "--pool-cache", s(&cache)];
    let first = qdep(&args);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    let second = qdep(&args);
    let fresh = qdep(&["test", s(&data), "--mc", "200"]);
    assert_eq!(first.1, second.1);
    assert_eq!(first.1, fresh.1);
}

fn read_grid(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,u,v,q,z"));
    lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect()
}

#[test]
fn heatmap_csv_and_pgm_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let prefix = dir.path().join("map");
    let n = 60;
    qdep(&["simulate", "bm5", "--n", &n.to_string(), "-o", s(&data)]);
    let (code, _, _) = qdep(&["heatmap", s(&data), "--smooth", "3", "-o", s(&prefix), "--pgm"]);
    assert_eq!(code, EXIT_OK);
    for tag in ["s0", "s3"] {
        let rows = read_grid(&dir.path().join(format!("map-{tag}.csv")));
        assert_eq!(rows.len(), (n + 1) * (n + 1));
        let pgm = fs::read(dir.path().join(format!("map-{tag}.pgm"))).unwrap();
        let header = format!("P5\n{} {}\n255\n", n + 1, n + 1);
        assert!(pgm.starts_with(header.as_bytes()));
        let pixels = &pgm[header.len()..];
        assert_eq!(pixels.len(), (n + 1) * (n + 1));
        for row in rows {
            let (i, j, z) = (row[0] as usize, row[1] as usize, row[5]);
            let at = (n - j) * (n + 1) + i;
            assert_eq!(pixels[at], pgm_level(z), "({i},{j})");
        }
    }
}

#[test]
fn heatmap_rejects_oversized_radius() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    qdep(&["simulate", "sr2", "--n", "6", "-o", s(&data)]);
    let (code, _, err) = qdep(&["heatmap", s(&data), "--smooth", "4", "-o", s(&dir.path().join("m"))]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("smoothing radius"));
}

#[test]
fn null_heatmap_has_few_extreme_cells() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let prefix = dir.path().join("null");
    qdep(&["simulate", "null", "--n", "200", "--seed", "8", "-o", s(&data)]);
    assert_eq!(qdep(&["heatmap", s(&data), "-o", s(&prefix)]).0, EXIT_OK);
    let rows = read_grid(&dir.path().join("null-s0.csv"));
    let extreme = rows.iter().filter(|r| r[5].abs() > 3.0).count() as f64 / rows.len() as f64;
    assert!(extreme < 0.01, "{extreme}");
}

#[test]
fn null_samples_rarely_look_significant() {
    let n = 100;
    let pool = build_null_pool(n, 2000, 81, StatConfig::default()).unwrap();
    let mut rng = rng(82);
    let trials = 200;
    let clean = (0..trials)
        .filter(|_| {
            let report = run_test(&random_ranked(n, &mut rng), &pool, TiePolicy::Error).unwrap();
            Statistic::ALL.iter().all(|&st| report.p_values.get(st) > 0.001)
        })
        .count();
    assert!(clean as f64 >= 0.99 * trials as f64, "{clean} of {trials}");
}

#[test]
fn power_command_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("p.csv"), dir.path().join("p.json"));
    let (code, _, err) = qdep(&[
        "power", "--models", "null", "--reps", "500", "--csv", s(&csv), "--json", s(&json),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("[1/1] null,"));

    let text = fs::read_to_string(&json).unwrap();
    let table: PowerTable = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&table).unwrap() + "\n", text);
    let se = (0.05f64 * 0.95 / 500.0).sqrt();
    for cell in &table.rows[0].cells {
        assert!((cell.power - 0.05).abs() <= 3.0 * se, "{}", cell.power);
    }

    let lines: Vec<String> = fs::read_to_string(&csv).unwrap().lines().map(String::from).collect();
    assert_eq!(lines[0], PowerTable::csv_header());
    assert_eq!(lines[1], table.rows[0].csv_line());
}

#[test]
fn unknown_flags_are_rejected() {
    assert_eq!(qdep(&["simulate", "sr1", "--n", "5", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(qdep(&["power", "--models", "nope"]).0, EXIT_USAGE);
}
