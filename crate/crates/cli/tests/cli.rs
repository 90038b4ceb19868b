use std::path::Path;
use std::process::{Command, Output};

fn d2clust(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2clust"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run d2clust")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = d2clust(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no {key} in {text:?}"))
        .parse()
        .unwrap()
}

fn gen_two_groups(dir: &Path) {
    ok(
        dir,
        &[
            "gen", "--n", "40", "--d", "2", "--m", "4", "--clusters", "2", "--sep", "20", "--seed", "3", "-o",
            "data.d2s", "--labels", "truth.txt",
        ],
    );
}

#[test]
fn barycenter_of_one_distribution_is_itself() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.d2s"), "2\n3\n0.2 0.3 0.5\n0 0\n1 0\n0 2\n").unwrap();
    let stdout = ok(dir.path(), &["barycenter", "one.d2s", "--m", "3", "--iters", "1000", "-o", "c.d2s"]);
    // zero up to the residual stopping tolerance
    assert!(value(&stdout, "objective").abs() < 1e-6, "{stdout}");

    let c = std::fs::read_to_string(dir.path().join("c.d2s")).unwrap();
    let lines: Vec<&str> = c.lines().collect();
    assert_eq!(&lines[..2], &["2", "3"]);
    let w: Vec<f64> = lines[2].split_whitespace().map(|v| v.parse().unwrap()).collect();
    let x: Vec<f64> = lines[3..6].iter().flat_map(|l| l.split_whitespace()).map(|v| v.parse().unwrap()).collect();
    // support points in any order; match each input point to its weight
    for (wi, xi) in [(0.2, [0.0, 0.0]), (0.3, [1.0, 0.0]), (0.5, [0.0, 2.0])] {
        let j = (0..3)
            .min_by(|&a, &b| {
                let da = (x[2 * a] - xi[0]).powi(2) + (x[2 * a + 1] - xi[1]).powi(2);
                let db = (x[2 * b] - xi[0]).powi(2) + (x[2 * b + 1] - xi[1]).powi(2);
                da.total_cmp(&db)
            })
            .unwrap();
        assert!((x[2 * j] - xi[0]).abs() < 1e-6 && (x[2 * j + 1] - xi[1]).abs() < 1e-6, "{c}");
        assert!((w[j] - wi).abs() < 1e-6, "{c}");
    }
}

#[test]
fn barycenter_writes_residual_csv() {
    let dir = tempfile::tempdir().unwrap();
    gen_two_groups(dir.path());
    ok(dir.path(), &["barycenter", "data.d2s", "--iters", "40", "--rule", "r2", "-o", "c.d2s", "--residuals", "r.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,primal,dual"));
    // one row per iteration, fewer on an early stop
    assert!((1..=40).contains(&lines.count()));
}

#[test]
fn eval_identical_labels() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.txt"), "0\n0\n1\n2\n2\n").unwrap();
    let out = ok(dir.path(), &["eval", "--truth", "a.txt", "--pred", "a.txt"]);
    for key in ["ami", "ari", "homogeneity", "completeness"] {
        assert_eq!(value(&out, key), 1.0, "{key}");
    }
    let only = ok(dir.path(), &["eval", "--truth", "a.txt", "--pred", "a.txt", "--metric", "ari"]);
    assert_eq!(only, "ari,1\n");
}

#[test]
fn cluster_recovers_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    gen_two_groups(dir.path());
    ok(
        dir.path(),
        &["cluster", "data.d2s", "--k", "2", "--seed", "1", "--labels", "pred.txt", "--centroids", "c.d2s", "--trace", "t.csv"],
    );
    let out = ok(dir.path(), &["eval", "--truth", "truth.txt", "--pred", "pred.txt", "--metric", "ari"]);
    assert!(value(&out, "ari") >= 0.99, "{out}");

    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.starts_with("outer_iter,objective\n0,"));
    let centroids = std::fs::read_to_string(dir.path().join("c.d2s")).unwrap();
    assert_eq!(centroids.lines().filter(|l| *l == "2").count(), 2);
}

#[test]
fn repeated_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    gen_two_groups(dir.path());
    let files = |tag: &str| {
        for (workers, solver) in [("1", "badmm"), ("3", "admm")] {
            ok(
                dir.path(),
                &[
                    "cluster", "data.d2s", "--k", "3", "--seed", "7", "--workers", workers, "--solver", solver,
                    "--labels", &format!("l{tag}{workers}"), "--centroids", &format!("c{tag}{workers}"),
                    "--trace", &format!("t{tag}{workers}"),
                ],
            );
        }
    };
    files("a");
    files("b");
    for w in ["1", "3"] {
        for f in ["l", "c", "t"] {
            let a = std::fs::read(dir.path().join(format!("{f}a{w}"))).unwrap();
            let b = std::fs::read(dir.path().join(format!("{f}b{w}"))).unwrap();
            assert_eq!(a, b, "{f} with {w} workers");
        }
    }
}

#[test]
fn distance_matrix() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.d2s"), "1\n1\n1\n0\n1\n2\n0.5 0.5\n0\n1\n").unwrap();
    std::fs::write(dir.path().join("b.d2s"), "1\n1\n1\n3\n").unwrap();
    let out = ok(dir.path(), &["distance", "a.d2s", "b.d2s"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "a,b0");
    let d: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((d[0] - 3.0).abs() < 1e-12);
    // W2^2 = (0.5 * 9 + 0.5 * 4)
    assert!((d[1] - 6.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn profile_log() {
    let dir = tempfile::tempdir().unwrap();
    gen_two_groups(dir.path());
    let out = ok(dir.path(), &["profile", "data.d2s", "--k", "2", "--t-total", "0.2"]);
    assert!(out.starts_with("outer_iter,elapsed_sec,objective,label_changes,skipped\n"));
    assert!(out.lines().count() >= 2);
}

fn error_line(out: &Output) -> String {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "{err:?}");
    assert!(err.starts_with("error: kind="), "{err:?}");
    err
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.d2s"), "1\n2\n0.5 0.2\n0\n1\n").unwrap();
    gen_two_groups(dir.path());
    let cases: &[&[&str]] = &[
        &["cluster", "data.d2s", "--k", "2", "--bogus"],
        &["barycenter", "data.d2s", "--solver", "ibp", "--rho0", "1"],
        &["barycenter", "data.d2s", "--solver", "badmm", "--epsilon0", "0.1"],
        &["barycenter", "data.d2s", "--solver", "ibp", "--fixed-support", "--variant", "v1"],
        &["cluster", "data.d2s", "--k", "2", "--solver", "ibp"],
        &["cluster", "data.d2s", "--k", "0"],
        &["barycenter", "missing.d2s"],
        &["barycenter", "bad.d2s"],
    ];
    for args in cases {
        let out = d2clust(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        error_line(&out);
    }
    let out = d2clust(dir.path(), &["barycenter", "bad.d2s"]);
    assert!(error_line(&out).contains("kind=weight_sum"));
}

#[test]
fn ibp_overflow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    gen_two_groups(dir.path());
    let out = d2clust(
        dir.path(),
        &["barycenter", "data.d2s", "--solver", "ibp", "--epsilon0", "1e-5", "--iters", "50", "-o", "c.d2s"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(error_line(&out).contains("kind=ibp_overflow"));
}
