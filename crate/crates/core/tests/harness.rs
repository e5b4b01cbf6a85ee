use std::fs;

use addfield::harness::{run_experiment, ExperimentConfig, ExperimentKind, Reference, Report};
use addfield::sampler::read_path_dump;
use addfield::{Error, KernelSpec};

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(kind);
    c.replicates = 40;
    match kind {
        ExperimentKind::CrossingScan | ExperimentKind::WindowScan | ExperimentKind::Slice3D => c.sizes = vec![16.0, 32.0],
        ExperimentKind::GumbelStudy | ExperimentKind::ExtremesStudy => c.sizes = vec![64.0, 128.0],
        ExperimentKind::BlockingStudy => {
            c.sizes = vec![2.0, 4.0];
            c.ladder_rungs = vec![2, 3];
            c.ladder_replicates = 20;
        }
        ExperimentKind::CertificateAudit => {
            c.sizes = vec![16.0];
            c.blocking_replicates = 200;
        }
        ExperimentKind::Render => c.render_size = 64,
        ExperimentKind::Sample => c.replicates = 2,
    }
    c
}

fn text(report: &Report) -> String {
    let mut out = report.rows_csv();
    for t in &report.tables {
        out.push_str(&t.to_csv());
    }
    out
}

const KINDS: [ExperimentKind; 9] = [
    ExperimentKind::CrossingScan,
    ExperimentKind::WindowScan,
    ExperimentKind::GumbelStudy,
    ExperimentKind::ExtremesStudy,
    ExperimentKind::BlockingStudy,
    ExperimentKind::CertificateAudit,
    ExperimentKind::Slice3D,
    ExperimentKind::Render,
    ExperimentKind::Sample,
];

#[test]
fn every_kind_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    for kind in KINDS {
        let one = small(kind);
        let mut three = one.clone();
        three.workers = 3;
        let a = run_experiment(&one, &dir.path().join("a")).unwrap();
        let b = run_experiment(&three, &dir.path().join("b")).unwrap();
        assert_eq!(text(&a), text(&b), "{kind}");
        for (fa, fb) in a.files.iter().zip(&b.files) {
            assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap(), "{kind}: {}", fa.display());
        }
    }
}

#[test]
fn master_seed_changes_the_outcome() {
    let a = run_experiment(&small(ExperimentKind::GumbelStudy), std::path::Path::new(".")).unwrap();
    let mut c = small(ExperimentKind::GumbelStudy);
    c.master_seed += 1;
    let b = run_experiment(&c, std::path::Path::new(".")).unwrap();
    assert_ne!(text(&a), text(&b));
}

#[test]
fn zero_replicates_is_a_config_error() {
    for kind in KINDS {
        let mut c = small(kind);
        c.replicates = 0;
        assert!(matches!(run_experiment(&c, std::path::Path::new(".")), Err(Error::Config(_))), "{kind}");
    }
}

#[test]
fn window_scan_rejects_unequal_variances() {
    let mut c = small(ExperimentKind::WindowScan);
    c.kernels[1] = KernelSpec::gaussian(2.0, 1.0).unwrap();
    assert!(matches!(run_experiment(&c, std::path::Path::new(".")), Err(Error::Config(_))));
}

#[test]
fn rows_carry_consistent_counts() {
    let report = run_experiment(&small(ExperimentKind::CrossingScan), std::path::Path::new(".")).unwrap();
    assert!(!report.rows.is_empty());
    for row in &report.rows {
        assert!(row.successes <= row.replicates);
        assert_eq!(row.p_hat, row.successes as f64 / row.replicates as f64);
        assert!(row.ci_low <= row.p_hat && row.p_hat <= row.ci_high);
    }
    let crossing: Vec<_> = report.select("crossing").collect();
    assert_eq!(crossing.len(), 2);
    assert!(matches!(crossing[0].reference, Reference::Bounds(lo, hi) if lo < 0.03 && hi > 0.97));
}

#[test]
fn csv_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(ExperimentKind::ExtremesStudy), dir.path()).unwrap();
    let written = report.write_csv(dir.path(), "extremes").unwrap();
    let names: Vec<String> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["extremes.csv", "extremes_tail.csv", "extremes_variance_ratio.csv"]);
    let rows = fs::read_to_string(dir.path().join("extremes.csv")).unwrap();
    assert!(rows.starts_with("experiment,kernel1,kernel2,R,rho,level,h,replicates,successes,p_hat,ci_low,ci_high,closed_form_reference,master_seed\n"));
    assert_eq!(rows.lines().count(), 1 + 2 * 4);
}

#[test]
fn sample_dumps_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(ExperimentKind::Sample), dir.path()).unwrap();
    assert_eq!(report.files.len(), 4);
    let dump = read_path_dump(fs::File::open(dir.path().join("path_g2_r1.anf")).unwrap()).unwrap();
    assert_eq!(dump.values.len(), 257);
    assert_eq!(dump.eps, 0.25);
    let table = report.table("paths").unwrap();
    assert_eq!(table.lookup("file", "path_g2_r1.anf", "seed"), Some(dump.seed.to_string().as_str()));
}

#[test]
fn render_writes_a_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(ExperimentKind::Render), dir.path()).unwrap();
    let bytes = fs::read(dir.path().join("nodal_gaussian_gaussian.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n64 64\n255\n"));
    assert_eq!(bytes.len(), b"P5\n64 64\n255\n".len() + 64 * 64);
    let table = report.table("render").unwrap();
    let fraction: f64 = table.rows[0][4].parse().unwrap();
    let black = bytes.iter().rev().take(64 * 64).filter(|&&b| b == 0).count();
    assert_eq!(fraction, black as f64 / 4096.0);
}
