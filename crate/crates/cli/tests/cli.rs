use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qtomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtomo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = qtomo(args);
    assert!(
        out.status.success(),
        "qtomo {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV output, split into fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn q_int(n: usize, q: f64) -> f64 {
    (0..n).map(|k| q.powi(2 * k as i32)).sum()
}

const SQRT_HALF: &str = "0.7071067811865476";

#[test]
fn vacuum_dump_is_a_single_row() {
    let text = stdout_ok(&["state", "--state", "vacuum", "--q", "0.7"]);
    assert!(text.starts_with("# config: {"));
    assert_eq!(text.lines().nth(1), Some("n,re,im,prob"));
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "0");
    assert_eq!(num(&r[0][3]), 1.0);
}

#[test]
fn even_cat_dump_has_no_odd_rows() {
    let text = stdout_ok(&["state", "--state", "cat-even", "--alpha-re", SQRT_HALF, "--q", "0.9"]);
    let r = rows(&text);
    assert!(r.len() > 3);
    assert!(r.iter().all(|row| row[0].parse::<usize>().unwrap() % 2 == 0));
    let total: f64 = r.iter().map(|row| num(&row[3])).sum();
    assert!((total - 1.0).abs() < 1e-14);
}

#[test]
fn squeezed_vacuum_matches_coefficient_oracle() {
    let q = 0.9;
    let text = stdout_ok(&["state", "--state", "squeezed-vacuum", "--r", "0.5", "--q", "0.9"]);
    let r = rows(&text);
    // c_{2n} ∝ ξ^n sqrt([2n-1]!! / [2n]!!), ξ = -tanh r.
    let xi = -(0.5f64).tanh();
    let raw: Vec<f64> = (0..60)
        .map(|n| {
            let ratio: f64 = (1..=n).map(|k| q_int(2 * k - 1, q) / q_int(2 * k, q)).product();
            xi.powi(n as i32) * ratio.sqrt()
        })
        .collect();
    let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    for row in &r {
        let m: usize = row[0].parse().unwrap();
        assert_eq!(m % 2, 0);
        let expect = raw[m / 2] / norm;
        assert!((num(&row[1]) - expect).abs() < 1e-13, "n = {m}");
        assert_eq!(num(&row[2]), 0.0);
    }
}

#[test]
fn bad_inputs_exit_nonzero_with_a_diagnostic() {
    for args in [
        vec!["state", "--q", "1.5"],
        vec!["state", "--q", "0"],
        vec!["state", "--state", "cat-odd", "--q", "0.7"],
        vec!["state", "--state", "coherent", "--alpha-re", "100", "--q", "0.7"],
        vec!["state", "--state", "nonsense"],
        vec!["tomogram", "--nx", "1"],
    ] {
        let out = qtomo(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn tomogram_csv_layout_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = [
        "tomogram",
        "--state",
        "cat-even",
        "--alpha-re",
        SQRT_HALF,
        "--q",
        "0.9",
        "--ntheta",
        "16",
        "--nx",
        "24",
    ];
    for path in [&a, &b] {
        let mut args = base.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        stdout_ok(&args);
    }
    let text_a = std::fs::read(&a).unwrap();
    let text_b = std::fs::read(&b).unwrap();
    let text = String::from_utf8(text_a.clone()).unwrap();
    // The echoed output path differs, everything else must match.
    let strip = |t: &[u8]| {
        String::from_utf8(t.to_vec())
            .unwrap()
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&text_a), strip(&text_b));
    assert_eq!(text.lines().nth(1), Some("theta,x,omega"));
    let r = rows(&text);
    assert_eq!(r.len(), 16 * 24);
    // θ is the outer index.
    assert!(r[..24].iter().all(|row| num(&row[0]) == 0.0));
    assert!(r.iter().all(|row| num(&row[2]) >= 0.0));
    // Identical invocations are byte-identical.
    let again = stdout_ok(&base);
    assert_eq!(again, stdout_ok(&base));
}

#[test]
fn vacuum_grid_rows_are_identical() {
    let text = stdout_ok(&[
        "tomogram", "--state", "vacuum", "--q", "0.7", "--ntheta", "8", "--nx", "16",
    ]);
    let r = rows(&text);
    for i in 1..8 {
        for j in 0..16 {
            let a = num(&r[j][2]);
            let b = num(&r[i * 16 + j][2]);
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn tomogram_json_has_meta_and_matrix() {
    let text = stdout_ok(&[
        "tomogram",
        "--state",
        "coherent",
        "--alpha-re",
        "0.5",
        "--q",
        "0.7",
        "--ntheta",
        "4",
        "--nx",
        "8",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["q"], 0.7);
    assert_eq!(v["meta"]["state"]["kind"], "coherent");
    assert_eq!(v["thetas"].as_array().unwrap().len(), 4);
    assert_eq!(v["xs"].as_array().unwrap().len(), 8);
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 4);
    assert!(values.iter().all(|row| row.as_array().unwrap().len() == 8));
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn grid_max(text: &str) -> f64 {
    rows(text).iter().map(|r| num(&r[2])).fold(0.0, f64::max)
}

#[test]
fn figure_panels_from_config_files() {
    let dir = TempDir::new().unwrap();
    for (kind, extra) in [
        ("cat-even", format!("alpha = [{SQRT_HALF}, 0.0]")),
        ("squeezed-vacuum", "r = 0.5".to_owned()),
        ("cat-odd", format!("alpha = [{SQRT_HALF}, 0.0]")),
        ("squeezed-excited", "r = 0.5".to_owned()),
    ] {
        let mut peaks = Vec::new();
        for q in ["0.9", "0.7"] {
            let body = format!("q = {q}\n[state]\nkind = \"{kind}\"\n{extra}\n[grid]\nn_theta = 32\nn_x = 64\n");
            let cfg = write_config(dir.path(), &format!("{kind}-{q}.toml"), &body);
            let text = stdout_ok(&["tomogram", "--config", &cfg]);
            assert!(text.contains(&format!("\"kind\":\"{kind}\"")));
            peaks.push(grid_max(&text));
        }
        assert!(peaks[1] > peaks[0], "{kind}: {peaks:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "q = 0.5\ngamma_max = 3\n[state]\nkind = \"number\"\nn = 2\n",
    );
    let text = stdout_ok(&["state", "--config", &cfg, "--q", "0.8"]);
    assert!(text.contains("\"q\":0.8"));
    assert_eq!(rows(&text)[0][0], "2");
    let bad = write_config(dir.path(), "bad.toml", "q = 0.5\nunknown = 1\n");
    assert!(!qtomo(&["state", "--config", &bad]).status.success());
}

fn moment(rows: &[Vec<String>], a: usize, b: usize) -> (f64, f64) {
    let row = rows
        .iter()
        .find(|r| r[0] == a.to_string() && r[1] == b.to_string())
        .unwrap();
    (num(&row[2]), num(&row[3]))
}

#[test]
fn coherent_first_moment() {
    let text = stdout_ok(&[
        "moments",
        "--state",
        "coherent",
        "--alpha-re",
        SQRT_HALF,
        "--q",
        "0.9",
        "--gamma-max",
        "2",
    ]);
    assert!(text.contains("alpha,beta,re,im,direct_re,direct_im,abs_diff"));
    let (re, im) = moment(&rows(&text), 0, 1);
    assert!((re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5 && im.abs() < 1e-5);
}

#[test]
fn vacuum_moments_vanish() {
    let text = stdout_ok(&["moments", "--state", "vacuum", "--q", "0.7", "--gamma-max", "6"]);
    let r = rows(&text);
    assert_eq!(r.len(), 28);
    for row in &r {
        let (a, b) = (row[0].as_str(), row[1].as_str());
        let expect = if (a, b) == ("0", "0") { 1.0 } else { 0.0 };
        assert!((num(&row[2]) - expect).abs() < 1e-12 && num(&row[3]).abs() < 1e-12);
    }
}

#[test]
fn figure_states_round_trip_report() {
    for q in ["0.9", "0.7"] {
        for args in [
            vec!["--state", "cat-even", "--alpha-re", SQRT_HALF],
            vec!["--state", "cat-odd", "--alpha-re", SQRT_HALF],
            vec!["--state", "squeezed-vacuum", "--r", "0.5"],
            vec!["--state", "squeezed-excited", "--r", "0.5"],
        ] {
            let mut full = vec!["moments", "--q", q, "--gamma-max", "6"];
            full.extend(args);
            let text = stdout_ok(&full);
            let worst = rows(&text).iter().map(|r| num(&r[6])).fold(0.0, f64::max);
            assert!(worst < 1e-6, "{full:?}: {worst}");
        }
    }
}

#[test]
fn moments_from_grid_files() {
    let dir = TempDir::new().unwrap();
    let state = ["--state", "squeezed-excited", "--r", "0.5", "--q", "0.7"];
    let direct = stdout_ok(&[&["moments", "--gamma-max", "4"][..], &state].concat());
    let direct = rows(&direct);
    for (format, layout, nx) in [
        ("csv", "gauss", "96"),
        ("json", "gauss", "96"),
        ("csv", "uniform", "256"),
    ] {
        let path = dir.path().join(format!("grid-{layout}.{format}"));
        let path = path.to_str().unwrap();
        stdout_ok(
            &[
                &[
                    "tomogram", "--ntheta", "32", "--nx", nx, "--layout", layout, "--format", format, "--out", path,
                ][..],
                &state,
            ]
            .concat(),
        );
        let text = stdout_ok(&["moments", "--q", "0.7", "--gamma-max", "4", "--input", path]);
        let from_file = rows(&text);
        assert_eq!(from_file.len(), 15);
        let tol = if layout == "gauss" { 1e-10 } else { 1e-8 };
        for (a, b) in from_file.iter().zip(&direct) {
            let err = (num(&a[2]) - num(&b[4])).abs() + (num(&a[3]) - num(&b[5])).abs();
            assert!(err < tol, "{format}/{layout} ({},{}): {err}", a[0], a[1]);
        }
    }
}

#[test]
fn moments_reject_mismatched_grid() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.csv");
    let path = path.to_str().unwrap();
    stdout_ok(&["tomogram", "--q", "0.7", "--ntheta", "8", "--nx", "16", "--out", path]);
    for extra in [vec!["--q", "0.9"], vec!["--q", "0.7", "--nx", "32"]] {
        let mut args = vec!["moments", "--input", path];
        args.extend(extra);
        let out = qtomo(&args);
        assert!(!out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("incompatible"));
    }
    let missing = dir.path().join("missing.csv");
    let out = qtomo(&["moments", "--input", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn verify_passes_and_catches_sabotage() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = qtomo(&["verify", "--out", report.to_str().unwrap()]);
    let human = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{human}");
    assert!(human.contains("peak omega"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["peak_omega"].as_array().unwrap().len(), 4);

    let out = qtomo(&["verify", "--sabotage-qint", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["suite"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|s| s.starts_with("orthonormality")));
}
