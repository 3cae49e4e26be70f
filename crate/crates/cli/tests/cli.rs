use std::fs;
use std::path::Path;
use std::process::Command;

use lagrange_galerkin::diagnostics::CSV_HEADER;
use lagrange_galerkin::elements::ElementKind;
use lg_cli::config::{ExperimentConfig, ProblemName, SchemeName};
use lg_cli::runner::{csv_name, field_dump_name, run_single, run_sweep, RunOptions, SUMMARY_HEADER};
use lg_cli::CliError;
use proptest::prelude::*;

fn opts(dir: &Path) -> RunOptions {
    RunOptions {
        out: Some(dir.to_path_buf()),
        ..RunOptions::default()
    }
}

#[test]
fn lg_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::default();
    let rec = run_single(&cfg, 0.01, &opts(dir.path())).unwrap();
    assert_eq!(rec.rows.len(), 100);
    let text = fs::read_to_string(dir.path().join(csv_name(0.01))).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[101].starts_with("# l2_error="));
    assert!(lines[101].contains(" runtime_s=") && lines[101].contains(" flags=norm_rule=42"));
    for (i, l) in lines[1..101].iter().enumerate() {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert_eq!(cols[0].parse::<usize>().unwrap(), i + 1);
        let t: f64 = cols[1].parse().unwrap();
        assert!((t - (i + 1) as f64 * 0.01).abs() < 1e-14);
    }
}

#[test]
fn cylinder_dc_run_reports_extrema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        problem: ProblemName::SlottedCylinder,
        scheme: SchemeName::Dc,
        element: ElementKind::P2,
        leg: 0.1,
        quadrature: 16,
        dt: vec![0.05],
        ..ExperimentConfig::default()
    };
    let rec = run_single(&cfg, 0.05, &opts(dir.path())).unwrap();
    assert_eq!(rec.rows.len(), 20);
    assert!(rec.rows.iter().all(|r| r.max > 0.5 && r.min < 0.1 && r.dc_iters >= 1));
}

#[test]
fn misconfiguration_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let mut cfg = ExperimentConfig::parse("[run]\nscheme = lps\nelement = p2\n[lps]\nlevel = one\nprojection = p0\n").unwrap();
    cfg.output = out.clone();
    let err = run_single(&cfg, 0.01, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(!out.exists());
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = ExperimentConfig {
        leg: 0.2,
        dt: vec![0.1, 0.05],
        timing: false,
        ..ExperimentConfig::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    one.install(|| run_sweep(&cfg, &opts(a.path())).unwrap());
    one.install(|| run_sweep(&cfg, &opts(b.path())).unwrap());
    for name in [csv_name(0.1), csv_name(0.05), "summary.csv".to_string()] {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
    // Several workers produce the same bits.
    let c = tempfile::tempdir().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    four.install(|| run_sweep(&cfg, &opts(c.path())).unwrap());
    assert_eq!(
        fs::read(a.path().join("summary.csv")).unwrap(),
        fs::read(c.path().join("summary.csv")).unwrap()
    );
}

#[test]
fn sweep_has_one_row_per_step_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        leg: 0.25,
        dt: vec![0.5, 0.25, 0.2, 0.125, 0.1, 0.0625, 0.05, 0.04],
        ..ExperimentConfig::default()
    };
    let rows = run_sweep(&cfg, &opts(dir.path())).unwrap();
    assert_eq!(rows.len(), 8);
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SUMMARY_HEADER);
    assert_eq!(lines.len(), 9);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6 && l.ends_with(",0")));
}

#[test]
fn dumps_mesh_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        element: ElementKind::P2,
        leg: 0.25,
        dt: vec![0.25],
        ..ExperimentConfig::default()
    };
    let o = RunOptions {
        dump_mesh: true,
        dump_field_every: Some(2),
        ..opts(dir.path())
    };
    run_single(&cfg, 0.25, &o).unwrap();
    let mesh = fs::read_to_string(dir.path().join("mesh.txt")).unwrap();
    assert_eq!(mesh.lines().next().unwrap(), "81 128");
    for n in [0, 2, 4] {
        let f = fs::read_to_string(dir.path().join(field_dump_name(0.25, n))).unwrap();
        let mut lines = f.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("# space=p2 ndof=289 t="), "{head}");
        assert_eq!(lines.count(), 289);
    }
    assert!(!dir.path().join(field_dump_name(0.25, 1)).exists());
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_lgfem");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[run]\nmystery = 3\n").unwrap();
    let out = Command::new(exe).args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=config code=2 message="), "{err}");

    let missing = Command::new(exe).args(["run", "/nonexistent/cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let good = dir.path().join("good.cfg");
    fs::write(&good, "[run]\nleg = 0.5\ndt = 0.5\ntiming = false\n").unwrap();
    let res = dir.path().join("res");
    let ok = Command::new(exe)
        .args(["run", good.to_str().unwrap(), "--out", res.to_str().unwrap(), "--threads", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(res.join(csv_name(0.5)).exists());
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        prop::sample::select(vec!["hump", "slotted_cylinder"]),
        prop::sample::select(vec!["lg", "lps", "dc"]),
        prop::sample::select(vec!["p1", "p2", "p1bubble"]),
        0.01f64..1.0,
        prop::collection::vec(1e-5f64..0.5, 1..5),
        prop::sample::select(vec![7usize, 12, 16, 25, 42]),
        any::<u64>(),
        0usize..16,
        any::<bool>(),
        (0.0f64..1.0, 1.0f64..2.0, 1usize..100),
        prop::sample::select(vec!["one", "two"]),
        prop::sample::select(vec!["auto", "none", "bary3", "uniform4"]),
    )
        .prop_map(|(problem, scheme, element, leg, dt, q, seed, threads, timing, dc, level, refine)| {
            let dts: Vec<String> = dt.iter().map(f64::to_string).collect();
            let text = format!(
                "[run]\nproblem = {problem}\nscheme = {scheme}\nelement = {element}\nleg = {leg}\n\
                 dt = {}\nquadrature = {q}\nseed = {seed}\nthreads = {threads}\ntiming = {timing}\n\
                 refine = {refine}\n[lps]\nlevel = {level}\n[dc]\nc_eps = {}\nalpha = {}\nmax_iter = {}\n",
                dts.join(","),
                dc.0,
                dc.1,
                dc.2
            );
            ExperimentConfig::parse(&text).unwrap()
        })
}

proptest! {
    #[test]
    fn config_round_trip(cfg in arb_config()) {
        let text = cfg.serialize();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.serialize(), text);
    }
}
