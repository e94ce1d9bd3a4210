use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use boussinesq_core::snapshot::read_snapshot;
use boussinesq_core::Norm;

const SMALL: &str = "epsilon = 0.3\nt_end = 1.0\nstride = 5\n\n[grid]\nL = 14\nN = 112\n";

fn bsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsq-lab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path.to_str().unwrap().to_owned()
}

fn kv(path: &Path, key: &str) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from {}", path.display()))
        .to_owned()
}

fn num(path: &Path, key: &str) -> f64 {
    kv(path, key).parse().unwrap()
}

#[test]
fn build_data_dumps_readable_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "\n[perturbation]\nh3_norm = 0.01\n");
    let out = dir.path().join("data");
    let o = bsq(&["build-data", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (label, theta0) = read_snapshot(fs::File::open(out.join("theta0.bsq")).unwrap(), None).unwrap();
    assert_eq!(label, "theta0");
    let kvp = out.join("summary.kv");
    let linf = num(&kvp, "theta0_linf");
    assert!((theta0.to_physical().norm(Norm::Linf) - linf).abs() <= 1e-6 * linf);
    assert!((num(&kvp, "theta0_besov_s0_pinf_r1") - linf).abs() <= 1e-6 * linf);
    let (_, v0) = read_snapshot(fs::File::open(out.join("v0.bsq")).unwrap(), Some(theta0.grid())).unwrap();
    assert!((v0.norm(Norm::Hm(3)) - 0.01).abs() < 1e-12);
}

#[test]
fn linear_writes_series_and_integrals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "\n[linear]\nsamples = 11\n");
    let out = dir.path().join("lin");
    let o = bsq(&["linear", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("linear.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,U_h3,Theta_h3,f_h3,g_h3,linf");
    assert_eq!(lines.len(), 12);
    assert!(lines[11].starts_with("1.000000,"));
    let kvp = out.join("summary.kv");
    assert!(num(&kvp, "e0") > 0.0 && num(&kvp, "e0") <= num(&kvp, "e0_upper"));
    assert!(num(&kvp, "f0") <= num(&kvp, "f0_upper"));
}

#[test]
fn simulate_reports_a_bounded_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "\n[output]\nsnapshot_times = [0.5]\n");
    let out = dir.path().join("sim");
    let o = bsq(&["simulate", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,v_h3,theta_h3,A,B"));
    assert_eq!(csv.lines().count(), 1 + 1 + 4);
    let kvp = out.join("summary.kv");
    assert_eq!(kv(&kvp, "status"), "completed");
    assert_eq!(kv(&kvp, "monitor"), "never_exited");
    assert!(num(&kvp, "sup_a") <= num(&kvp, "eta"));
    assert!(out.join("t0.5000_u.bsq").exists());
}

#[test]
fn full_and_perturbation_modes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let series = |mode: &str| {
        let cfg = dir.path().join(format!("{mode}.toml"));
        fs::write(&cfg, format!("mode = \"{mode}\"\n{SMALL}[perturbation]\nh3_norm = 0.01\n")).unwrap();
        let cfg = cfg.to_str().unwrap().to_owned();
        let out = dir.path().join(mode);
        let o = bsq(&["simulate", "-c", &cfg, "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(out.join("series.csv")).unwrap();
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    let (a, b) = (series("full"), series("perturbation"));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-8 * y, "{x} vs {y}");
    }
}

#[test]
fn verify_passes_and_condition_can_be_required() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "\n[verify]\npairs = 4\n");
    let o = bsq(&["verify", "-c", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("identity_pass") && text.contains("condition_lhs_c8"));

    let strict = write_config(dir.path(), "\n[verify]\npairs = 4\nrequire_condition = true\n[condition]\ndelta = 1e-9\n");
    let o = bsq(&["verify", "-c", &strict]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_sorted_and_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "\n[sweep]\nepsilon = [0.35, 0.3]\nnu = [2.0, 1.0]\nupper_bound = true\n");
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = bsq(&["sweep", "-c", &cfg, "-o", out.to_str().unwrap(), "-j", jobs]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let (one, many) = (run("1", "a.csv"), run("4", "b.csv"));
    assert_eq!(one, many);
    let keys: Vec<(String, String)> = one
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_owned(), f[1].to_owned())
        })
        .collect();
    assert_eq!(keys.len(), 4);
    assert_eq!(keys[0], ("0.3".to_owned(), "1".to_owned()));
    assert_eq!(keys[3], ("0.35".to_owned(), "2".to_owned()));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(dir.path(), "[colour]\nhue = 3\n");
    assert_eq!(bsq(&["linear", "-c", &bad_key]).status.code(), Some(2));
    assert_eq!(bsq(&["linear", "-c", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(bsq(&["frobnicate"]).status.code(), Some(2));

    let coarse = dir.path().join("coarse.toml");
    fs::write(&coarse, "epsilon = 0.3\n[grid]\nL = 4\nN = 32\n").unwrap();
    let o = bsq(&["build-data", "-c", coarse.to_str().unwrap(), "-o", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolve"));

    let fast = dir.path().join("fast.toml");
    fs::write(&fast, format!("dt_max = 0.5\ncfl = 0.001\namplitude = 100.0\n{SMALL}")).unwrap();
    let fast = fast.to_str().unwrap().to_owned();
    let o = bsq(&["simulate", "-c", &fast, "-o", dir.path().join("y").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
