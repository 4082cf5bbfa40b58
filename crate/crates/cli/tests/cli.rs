use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gauge-reduce"));
    cmd.args(args)
        .arg("--set")
        .arg(format!("output.dir={}", dir.display()));
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn csv_rows(path: &Path) -> (String, Vec<csv::StringRecord>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (comment, body) = text.split_once('\n').unwrap();
    let rows = csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect();
    (comment.to_string(), rows)
}

#[test]
fn default_check_passes_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["check"], dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (comment, rows) = csv_rows(&dir.path().join("check.csv"));
    assert!(comment.starts_with("# gauge-reduce "));
    assert!(comment.contains("config_hash=") && comment.ends_with("seed=1"));
    assert!(rows.len() >= 12);
    assert!(rows.iter().all(|r| &r[3] == "true"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["check", "--set", "lattice.n=1"], dir.path(), &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["check", "--set", "lattice.size=4"], dir.path(), &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["check", "--config", "/nonexistent.cfg"], dir.path(), &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate"], dir.path(), &[("GAUGE_REDUCE_THREADS", "0")])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"], dir.path(), &[]).status.code(), Some(2));

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "lattice.dim = 2\nlattice.dim = 3\n").unwrap();
    assert_eq!(
        run(
            &["check", "--config", cfg.to_str().unwrap()],
            dir.path(),
            &[]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn corrupted_projector_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["check", "--set", "check.inject_fault=projector"],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let (_, rows) = csv_rows(&dir.path().join("check.csv"));
    let bad: Vec<&str> = rows
        .iter()
        .filter(|r| &r[3] == "false")
        .map(|r| r.get(0).unwrap())
        .collect();
    assert!(bad.contains(&"projector_idempotent"), "{bad:?}");
}

#[test]
fn jacobian_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let vacuum = run(&["jacobian", "--set", "field.amplitude=0"], dir.path(), &[]);
    assert_eq!(vacuum.status.code(), Some(1));
    let (_, rows) = csv_rows(&dir.path().join("jacobian.csv"));
    assert!(rows[0][10].contains("singular"));

    let args = [
        "jacobian",
        "--set",
        "field.source=random",
        "--set",
        "field.seed=9",
    ];
    assert_eq!(run(&args, dir.path(), &[]).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("jacobian.csv")).unwrap();
    assert_eq!(run(&args, dir.path(), &[]).status.code(), Some(0));
    assert_eq!(
        first,
        std::fs::read(dir.path().join("jacobian.csv")).unwrap()
    );
}

#[test]
fn jacobian_reads_field_files() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("f.txt");
    std::fs::write(&field, "# two sites\n1 2 doublet\n1.1 0\n0 1.1\n").unwrap();
    let f = format!("field.file={}", field.display());
    let args = [
        "jacobian",
        "--set",
        "lattice.dim=1",
        "--set",
        "lattice.n=2",
        "--set",
        "field.source=file",
        "--set",
        &f,
    ];
    let out = run(&args, dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, rows) = csv_rows(&dir.path().join("jacobian.csv"));
    let j: f64 = rows[0][8].parse().unwrap();
    let want = gauge_reduce_cli::checks::two_site_closed_form(1.0, 1.21, 1.0);
    assert!((j - want).abs() <= 1e-10 * want.abs());

    std::fs::write(&field, "1 3 doublet\n1 0\n1 0\n1 0\n").unwrap();
    assert_eq!(run(&args, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn trivial_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--set",
        "fk.potential=zero",
        "--set",
        "fk.observable=one",
        "--set",
        "sde.n_paths=100",
    ];
    assert_eq!(run(&args, dir.path(), &[]).status.code(), Some(0));
    let (_, rows) = csv_rows(&dir.path().join("simulate.csv"));
    assert_eq!(rows[0][10].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][11].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn overflowing_weights_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--set",
        "fk.potential=constant",
        "--set",
        "fk.c=2000",
        "--set",
        "sde.n_paths=10",
    ];
    assert_eq!(run(&args, dir.path(), &[]).status.code(), Some(1));
    let (_, rows) = csv_rows(&dir.path().join("simulate.csv"));
    assert_eq!(&rows[0][8], "10");
    assert_eq!(&rows[0][12], "false");
}

#[test]
fn oracle_comparisons_pass() {
    let dir = tempfile::tempdir().unwrap();
    let mehler = [
        "compare-oracle",
        "--set",
        "fk.dof=2",
        "--set",
        "fk.initial=0.3,-0.2",
        "--set",
        "oracle.grid_points=41",
        "--set",
        "sde.n_paths=5000",
        "--set",
        "sde.dt=0.005",
        "--set",
        "sde.n_steps=100",
    ];
    let out = run(&mehler, dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let girsanov = [
        "compare-oracle",
        "--set",
        "oracle.kind=girsanov",
        "--set",
        "lattice.dim=1",
        "--set",
        "lattice.n=2",
        "--set",
        "field.amplitude=1.5",
        "--set",
        "fk.observable=square",
        "--set",
        "sde.n_paths=5000",
        "--set",
        "sde.dt=0.01",
        "--set",
        "sde.n_steps=30",
    ];
    let out = run(&girsanov, dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, rows) = csv_rows(&dir.path().join("compare_oracle.csv"));
    assert_eq!(&rows[0][0], "girsanov");
    assert_ne!(rows[0][1], rows[0][3]);
}

#[test]
fn girsanov_rejects_large_lattices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["compare-oracle", "--set", "oracle.kind=girsanov"],
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
}
