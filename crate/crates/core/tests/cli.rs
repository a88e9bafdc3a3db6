use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use thermal_arealaw::cli::report::CSV_COLUMNS;

const MINIMAL: &str = "d = 1\nL = 4\nL_A = 2\nn_max = 3\nbeta = 1.0\nJ = 1.0\nU = 1.0\nmu = 1.0\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermal-arealaw"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_config(dir: &Path, text: &str, out: &str) -> Output {
    let config = write_config(dir, &format!("{out}.toml"), text);
    let out = dir.join(out);
    run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Rows of a CSV file as column-name lookups.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("missing column {name}"));
    row[i].parse().unwrap()
}

#[test]
fn minimal_run_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let o = run_config(dir.path(), MINIMAL, "out");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/report.csv"));
    assert_eq!(header, CSV_COLUMNS);
    assert_eq!(rows.len(), 1);
    for name in [
        "exact_mi",
        "lemma1_value",
        "prop1_value",
        "prop2_value",
        "theorem_value",
        "slack_lemma1",
        "slack_prop1",
        "slack_theorem",
    ] {
        assert!(column(&header, &rows[0], name).is_finite());
    }
    assert!(dir.path().join("out/report.json").exists());
    assert!(!dir.path().join("out/convergence.csv").exists());
}

#[test]
fn beta_sweep_gives_monotone_rows() {
    let dir = TempDir::new().unwrap();
    let text = MINIMAL.replace("beta = 1.0", "beta = [0.25, 0.5, 1.0, 2.0, 4.0]");
    let o = run_config(dir.path(), &text, "out");
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("out/report.csv"));
    assert_eq!(rows.len(), 5);
    for row in &rows {
        let chain: Vec<f64> = ["exact_mi", "lemma1_value", "prop1_value", "theorem_value"]
            .iter()
            .map(|n| column(&header, row, n))
            .collect();
        for w in chain.windows(2) {
            assert!(w[0] <= w[1] + 1e-8, "{chain:?}");
        }
    }
    let betas: Vec<f64> = rows.iter().map(|r| column(&header, r, "beta")).collect();
    assert_eq!(betas, vec![0.25, 0.5, 1.0, 2.0, 4.0]);
}

#[test]
fn zero_hopping_has_no_correlations() {
    let dir = TempDir::new().unwrap();
    let text = MINIMAL
        .replace("J = 1.0", "J = 0.0")
        .replace("beta = 1.0", "beta = [0.25, 0.5, 1.0, 2.0, 4.0]");
    assert!(run_config(dir.path(), &text, "out").status.success());
    let (header, rows) = read_csv(&dir.path().join("out/report.csv"));
    for row in &rows {
        assert!(column(&header, row, "exact_mi").abs() < 1e-10);
        assert!(column(&header, row, "translation_deviation") < 1e-10);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let text = format!("{MINIMAL}pinsker = true\n").replace("beta = 1.0", "beta = [0.5, 2.0]");
    let config = write_config(dir.path(), "c.toml", &text);
    let c = config.to_str().unwrap();
    for (out, jobs) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let target = dir.path().join(out);
        let o = run(&[
            "run",
            "--config",
            c,
            "--out",
            target.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert!(o.status.success());
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("report.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
}

#[test]
fn json_and_csv_agree() {
    let dir = TempDir::new().unwrap();
    let text = MINIMAL.replace("beta = 1.0", "beta = [0.5, 2.0]");
    assert!(run_config(dir.path(), &text, "out").status.success());
    let (header, rows) = read_csv(&dir.path().join("out/report.csv"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    assert_eq!(json["config_hash"].as_str().unwrap(), rows[0][1]);
    for (record, row) in records.iter().zip(&rows) {
        let chain = &record["chain"];
        for name in [
            "exact_mi",
            "lemma1_value",
            "prop1_value",
            "prop2_value",
            "theorem_value",
            "g",
            "eps2",
        ] {
            let from_json = chain[name].as_f64().unwrap();
            let from_csv = column(&header, row, name);
            assert!(
                (from_json - from_csv).abs() <= 1e-11 * from_json.abs().max(1e-300),
                "{name}: {from_json} vs {from_csv}"
            );
        }
    }
    // the embedded config is enough to re-run the record
    let config = serde_json::to_string(&json["config"]).unwrap();
    let path = write_config(dir.path(), "again.json", &config);
    let again = dir.path().join("again");
    let o = run(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap(),
        std::fs::read_to_string(again.join("report.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = run_config(dir.path(), &MINIMAL.replace("U = 1.0", "U = 0.0"), "bad");
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(run(&["run"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let quad =
        "d = 3\nL = 2\nn_max = 1\nbeta = 1.0\nJ = 1.0\nU = 1.0\nmu = 1.0\nquad_tol = 1e-300\n";
    let o = run_config(dir.path(), quad, "quad");
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let guard = format!("{MINIMAL}dim_guard = 5\n");
    let o = run_config(dir.path(), &guard, "guard");
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
}

#[test]
fn converge_reports_status_and_table() {
    let dir = TempDir::new().unwrap();
    let decoupled =
        "d = 1\nL = 4\nn_max_range = [2, 4]\nbeta = [0.5, 2.0]\nJ = 0.0\nU = 1.0\nmu = 1.0\n";
    let config = write_config(dir.path(), "j0.toml", decoupled);
    let out = dir.path().join("j0");
    let o = run(&[
        "converge",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("L=4: converged"), "{}", stdout(&o));
    let (header, rows) = read_csv(&out.join("convergence.csv"));
    assert_eq!(rows.len(), 3 * 2);
    assert!(rows
        .iter()
        .all(|r| column(&header, r, "exact_mi").abs() < 1e-10));

    let hardcore = "d = 1\nL = 4\nn_max_range = [1, 2]\nbeta = 1.0\nJ = 1.0\nU = 1.0\nmu = 1.0\n";
    let config = write_config(dir.path(), "hc.toml", hardcore);
    let o = run(&[
        "converge",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("hc").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("not converged"));

    let fixed = write_config(dir.path(), "fixed.toml", MINIMAL);
    assert_eq!(
        run(&["converge", "--config", fixed.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn run_with_range_records_convergence() {
    let dir = TempDir::new().unwrap();
    let text = "d = 1\nL = 3\nn_max_range = [2, 16]\nbeta = 1.0\nJ = 1.0\nU = 1.0\nmu = 1.0\n";
    assert!(run_config(dir.path(), text, "out").status.success());
    let (header, rows) = read_csv(&dir.path().join("out/report.csv"));
    assert_eq!(
        rows[0][header.iter().position(|h| h == "convergence").unwrap()],
        "converged"
    );
    assert!(dir.path().join("out/convergence.csv").exists());
}

#[test]
fn spectrum_tables() {
    let o = run(&["spectrum", "--side", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let multiplicities: Vec<(f64, usize)> = text
        .lines()
        .skip_while(|l| !l.starts_with("eigenvalue  multiplicity"))
        .skip(1)
        .take_while(|l| !l.starts_with("max deviation"))
        .map(|l| {
            let mut it = l.split_whitespace();
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(multiplicities.len(), 3);
    for ((value, count), (ev, ec)) in multiplicities.iter().zip([(0.0, 1), (2.0, 2), (4.0, 1)]) {
        assert!((value - ev).abs() < 1e-6);
        assert_eq!(*count, ec);
    }
    let residuals: Vec<f64> = text
        .lines()
        .skip(1)
        .take(4)
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(residuals.iter().all(|&r| r < 1e-10));

    let three = stdout(&run(&["spectrum", "--side", "3"]));
    assert!(
        three.contains("0.000000    1") && three.contains("3.000000    2"),
        "{three}"
    );
    let square = run(&["spectrum", "--side", "3", "--dim", "2"]);
    assert!(square.status.success());
    assert_eq!(run(&["spectrum", "--side", "1"]).status.code(), Some(1));
}

#[test]
fn check_suites_pass() {
    let o = run(&["check", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("seed 7"));
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.starts_with("pass")), "{text}");
}
