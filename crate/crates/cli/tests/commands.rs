use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn infreg(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("job.conf");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_infreg"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV written by the tool, after its comment and header lines.
fn rows(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let body = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (comment, header, body)
}

const EXCLUDED_P3: &str = "command = classify\nn = 2\np = 3\n[domain]\nfamily = excluded-ball\nradius = 2\n";

#[test]
fn classify_excluded_ball_is_irregular() {
    let dir = TempDir::new().unwrap();
    let o = infreg(dir.path(), EXCLUDED_P3, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("irregular"), "{out}");
    assert!(out.contains("boundary is bounded"), "{out}");
    let (comment, header, body) = rows(&dir.path().join("out/classify.csv"));
    assert!(comment.starts_with("# infreg classify") && comment.contains("variant=square-shell"), "{comment}");
    assert_eq!(header, ["class", "variant", "certificate"]);
    assert_eq!(body[0][0], "irregular");
}

#[test]
fn sparse_ball_example_approaches_three_quarters() {
    let dir = TempDir::new().unwrap();
    let o = infreg(dir.path(), "command = examples\nn = 2\np = 2\n", &["--which", "sparse-balls"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, header, body) = rows(&dir.path().join("out/sparse_balls.csv"));
    assert_eq!(header, ["J", "partial_sum", "closed_form"]);
    let last: f64 = body.last().unwrap()[1].parse().unwrap();
    assert!((last - 0.75).abs() < 1e-6, "{last}");
    assert_eq!(body[0][1], "0.0000000000000000e0");
    assert!(stdout(&o).contains("irregular"));
}

#[test]
fn clustered_example_reports_both_series() {
    let dir = TempDir::new().unwrap();
    let o = infreg(dir.path(), "command = examples\nn = 2\np = 2\nterms = 12\nwhich = clustered-balls\n", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, header, body) = rows(&dir.path().join("out/clustered_balls.csv"));
    assert_eq!(header, ["J", "half_shell_sum", "ball_lower_sum"]);
    assert_eq!(body.len(), 12);
    let lower: Vec<f64> = body.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(lower.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn too_few_samples_per_decade_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = infreg(dir.path(), "command = wiener\nn = 2\np = 2\nsamples_per_decade = 0\n[domain]\nfamily = half-space\n", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("samples_per_decade"));
}

#[test]
fn p_below_n_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = infreg(dir.path(), "command = classify\nn = 2\np = 1.5\n[domain]\nfamily = half-space\n", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("requires p ≥ n"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_3_with_a_position() {
    let dir = TempDir::new().unwrap();
    let o = infreg(dir.path(), "command = classify\nn = 2\np = 2\n[domain]\nball {\n  center = 0, zero\n  radius = 1\n}\n", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 6, column 15"), "{}", stderr(&o));
}

#[test]
fn solver_budget_exhaustion_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = solve\nn = 2\np = 3\ndata = coordinate(1)\ntol = 1e-14\nmax_iter = 1\n[domain]\nball {\n  center = 0, 0\n  radius = 1\n}\n";
    let o = infreg(dir.path(), cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn wiener_csv_has_round_trip_floats() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = wiener\nn = 2\np = 2\nsamples_per_decade = 8\n[domain]\nfamily = sparse-balls\n";
    let o = infreg(dir.path(), cfg, &["--rmax", "1e4", "--variant", "square-shell"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (comment, header, body) = rows(&dir.path().join("out/wiener.csv"));
    assert!(comment.contains("variant=square-shell") && comment.contains("r_max=10000"), "{comment}");
    assert_eq!(header, ["r", "capacity", "integrand", "partial_sum"]);
    assert_eq!(body.len(), 33);
    for cell in body.iter().flatten() {
        let v: f64 = cell.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), *cell);
        // 17 significant digits
        assert_eq!(cell.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
    let sums: Vec<f64> = body.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    assert!(stdout(&o).contains("verdict: convergent"));
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = capacity\nn = 2\np = 3\ngrid_h = 0.05\nseed = 11\n[k]\nclosed_ball {\n  center = 2, 0\n  radius = 0.5\n}\n[g]\nball {\n  center = 2, 0.25\n  radius = 1.5\n}\n";
    let a = infreg(dir.path(), cfg, &[]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let first = fs::read(dir.path().join("out/capacity.csv")).unwrap();
    let b = infreg(dir.path(), cfg, &[]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(first, fs::read(dir.path().join("out/capacity.csv")).unwrap());
}

#[test]
fn inverting_twice_restores_the_domain() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = invert\nn = 2\np = 2\n[domain]\nannulus {\n  center = 0, 0\n  inner = 1\n  outer = 4\n  closed = false\n}\n";
    let o = infreg(dir.path(), cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let once = fs::read_to_string(dir.path().join("out/inverted.conf")).unwrap();
    assert!(once.contains("radius = 0.25") && !once.contains("-0"), "{once}");
    let o = infreg(dir.path(), &once, &[]);
    assert_eq!(o.status.code(), Some(0));
    let twice = fs::read_to_string(dir.path().join("out/inverted.conf")).unwrap();
    let set = |text: &str| match infreg_cli::parse_config(text).unwrap().domain {
        Some(infreg_cli::config::DomainConfig::Set(s)) => s,
        other => panic!("{other:?}"),
    };
    let (a, b) = (set(cfg), set(&twice));
    for i in 0..200 {
        let t = i as f64 * 0.1;
        let x = [0.05 * t * t.cos(), 0.05 * t * t.sin()];
        assert_eq!(a.contains(&x, 1).unwrap(), b.contains(&x, 1).unwrap(), "{x:?}");
    }
}

#[test]
fn solve_with_a_probe_writes_both_files() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = solve\nn = 2\np = 2\ndata = bump(0.5)\nhalf_width = 1\ngrid_h = 0.03125\npoint = 0, 0\nprobe_radii = 0.4, 0.2, 0.1\n\
               [domain]\nintersection {\n  ball {\n    center = 0, 0\n    radius = 0.95\n  }\n  complement {\n    origin\n  }\n}\n";
    let o = infreg(dir.path(), cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // a puncture is invisible to the limit problem
    assert!(stdout(&o).contains("consistent with irregular"), "{}", stdout(&o));
    let (comment, header, body) = rows(&dir.path().join("out/probe.csv"));
    assert!(comment.contains("deviation=0.02") && comment.contains("refinement=2"), "{comment}");
    assert_eq!(header.len(), 5);
    assert_eq!(body.len(), 3);
    let (_, header, body) = rows(&dir.path().join("out/solution.csv"));
    assert_eq!(header, ["x", "y", "u", "inside"]);
    assert_eq!(body.len(), 65 * 65);
}

#[test]
fn poincare_and_flag_only_jobs_run() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_infreg"))
        .args(["--command", "poincare", "--grid-h", "0.0625", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, header, body) = rows(&dir.path().join("poincare.csv"));
    assert_eq!(header, ["constant", "quotient", "outer_iterations"]);
    let c: f64 = body[0][0].parse().unwrap();
    // first Dirichlet eigenvalue of the unit disk is j_{0,1}^2 ≈ 5.783
    assert!((1.0 / c - 5.783).abs() < 0.3, "{c}");
    let none = Command::new(env!("CARGO_BIN_EXE_infreg")).output().unwrap();
    assert_eq!(none.status.code(), Some(3));
}
