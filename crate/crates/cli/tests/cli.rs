use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sobolev-recon"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sobolev-recon-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// Contribution column of an expansion table.
fn contributions(text: &str) -> Vec<f64> {
    text.lines()
        .filter(|l| l.starts_with('('))
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect()
}

fn labelled(text: &str, label: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(label))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn expand_x2y() {
    let o = run(&["expand", "--example", "x2y-2d", "--delta", "2,1", "--point", "1,1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let c = contributions(&text);
    assert_eq!(c.len(), 6);
    assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-14, "{text}");
}

#[test]
fn expand_order_zero_is_the_value() {
    let o = run(&["expand", "--example", "x2y-2d", "--delta", "0,0", "--point", "0.5,0.5"]);
    assert!(o.status.success());
    let c = contributions(&stdout(&o));
    assert_eq!(c, vec![0.125]);
}

#[test]
fn expand_example1() {
    let o = run(&["expand", "--example", "example1-1d", "--point", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(contributions(&text).len(), 6);
    assert!(labelled(&text, "difference") < 1e-8, "{text}");
    let o = run(&["expand", "--example", "example1-1d", "--point", "-0.25"]);
    assert!(labelled(&stdout(&o), "difference") < 1e-8);
}

#[test]
fn invalid_input_is_rejected() {
    let o = run(&["expand", "--example", "x2y-2d", "--point", "2,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the domain"));
    let o = run(&["expand", "--example", "nope", "--point", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("known examples"));
    assert_eq!(run(&["reproduce", "fig9"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "everything"]).status.code(), Some(2));
    let o = run(&["sweep", "--example", "example1-1d", "--method", "legendre", "--gamma", "6", "--degrees", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "roundtrip", "--trials", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS roundtrip/")).count() >= 6);
    assert!(!text.contains("FAIL"));
    let o = run(&["verify", "identities", "--seed", "7"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS identities/fund-int trials=1500 failures=0"));
    let o = run(&["verify", "optimality", "--trials", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn verify_is_reproducible() {
    let a = stdout(&run(&["verify", "identities", "--trials", "10", "--seed", "3"]));
    let b = stdout(&run(&["verify", "identities", "--trials", "10", "--seed", "3"]));
    assert_eq!(a, b);
}

#[test]
fn reproduce_exact_recovery() {
    let dir = scratch_dir("fig4");
    let o = run(&["reproduce", "fig4", "--degrees", "2,4,8", "--out", dir.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("[PASS] gamma=(3,3) K=4 L2 error"));
    let csv = std::fs::read_to_string(dir.join("example2-2d_step_gamma3-3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("param,l2_error,s_error,w_error,runtime_s\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn reproduce_step_rates() {
    let dir = scratch_dir("fig2");
    let o = run(&["reproduce", "fig2", "--out", dir.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    for g in [1, 3, 5] {
        assert!(text.contains(&format!("[PASS] gamma={g} L2 slope over [16,256]")));
    }
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 4);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweeps_are_byte_identical() {
    let args = ["sweep", "--example", "example2-2d", "--method", "step", "--gamma", "1,1", "--cells", "2:8"];
    let a = run(&args);
    let b = bin().args(args).env("SOBOLEV_RECON_THREADS", "1").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 4);
}

#[test]
fn quadrature_flags() {
    let base = ["sweep", "--example", "x2y-2d", "--method", "legendre", "--gamma", "0,0", "--degrees", "2,3"];
    let o = bin().args(base).args(["--quad-nodes", "8", "--quad-panels", "4", "--quad-grade", "none"]).output().unwrap();
    assert!(o.status.success());
    let last = stdout(&o).lines().last().unwrap().to_string();
    let l2: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(l2 < 1e-14, "{last}");
    let o = bin().args(base).args(["--quad-nodes", "0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(base).env("SOBOLEV_RECON_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
