use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coherence_core::harness::format_sig;
use coherence_core::measurement::{bell_basis, outcome_probs};
use coherence_core::states::qubit_family;
use coherence_core::Measure;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coherence-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

const FIG1A_SMALL: &str = "\
family = qubit
grid = default
schemes = cms_qubit, direct_pauli, adaptive_2step, tomo_qubit
measure = l1
repetitions = 5
budget_N = 1200
master_seed = 20200101
";

#[test]
fn probs_qubit_theta() {
    let o = bench(&["probs", "--family", "qubit", "--theta", "pi/6"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "P"), "(0.375, 0, 0.5, 0.125)");
}

#[test]
fn probs_bloch_origin() {
    let o = bench(&["probs", "--bloch", "0,0,0"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "P"), "(0.25, 0.25, 0.25, 0.25)");
    assert_eq!(field(&stdout(&o), "C_l1"), "0");
}

#[test]
fn probs_qutrit_alpha() {
    let o = bench(&[
        "probs",
        "--family",
        "qutrit",
        "--alpha",
        "0.7853981633974483",
    ]);
    assert!(o.status.success());
    let c: f64 = field(&stdout(&o), "C_l1").parse().unwrap();
    assert_eq!(format!("{c:.6}"), "1.914214");
}

#[test]
fn probs_agrees_with_library_to_nine_digits() {
    for theta in [0.1, 0.4, 0.9, 1.3] {
        let o = bench(&["probs", "--family", "qubit", "--theta", &theta.to_string()]);
        let text = stdout(&o);
        let rho = qubit_family(theta).unwrap();
        let p = outcome_probs(&rho.two_copies(), &bell_basis()).unwrap();
        let expected: Vec<String> = p
            .probabilities()
            .iter()
            .map(|x| format_sig(*x, 9))
            .collect();
        assert_eq!(field(&text, "P"), format!("({})", expected.join(", ")));
        for (key, m) in [
            ("C_l1", Measure::L1),
            ("C_r", Measure::RelEnt),
            ("C_f", Measure::Formation),
        ] {
            assert_eq!(field(&text, key), format_sig(m.evaluate(&rho).unwrap(), 9));
        }
    }
}

#[test]
fn probs_rejects_malformed_specs() {
    for args in [
        vec!["probs", "--family", "qubit"],
        vec!["probs", "--bloch", "1,2"],
        vec!["probs", "--bloch", "1,1,1"],
        vec!["probs", "--family", "qutrit", "--theta", "0.3"],
        vec!["probs", "--family", "qubit", "--theta", "abc"],
        vec!["probs", "--family", "qubit", "--theta", "3"],
    ] {
        assert_eq!(bench(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig1a.conf");
    fs::write(&cfg, FIG1A_SMALL).unwrap();
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let o = bench(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "family,parameter_rad,scheme,measure,budget_N,repetitions,mean_error,std_error,master_seed,rng_algo"
    );
    assert_eq!(lines.len(), 1 + 13 * 4);
    assert!(!text.contains('\r'));
    let svg = fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(
        doc.descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count(),
        4
    );
}

#[test]
fn sweep_missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, FIG1A_SMALL.replace("master_seed = 20200101\n", "")).unwrap();
    let csv = dir.path().join("out.csv");
    let o = bench(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("master_seed"));
    assert!(!csv.exists());
}

#[test]
fn sweep_unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.conf");
    fs::write(
        &cfg,
        FIG1A_SMALL.replace("repetitions = 5", "repetitions = 1"),
    )
    .unwrap();
    let csv = dir.path().join("missing").join("dir").join("out.csv");
    let o = bench(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_unreadable_config_is_a_config_error() {
    let o = bench(&[
        "sweep",
        "--config",
        "/nonexistent/x.conf",
        "--csv",
        "/tmp/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_figure_and_bad_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&["figure", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bench(&["figure", "fig2"]).status.code(), Some(2));
}

fn run_fig(name: &str, dir: &Path) {
    let o = bench(&[
        "figure",
        name,
        "--out",
        dir.to_str().unwrap(),
        "--reps",
        "4",
        "--shots",
        "240",
        "--seed",
        "11",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn figure_outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_fig("fig2", a.path());
    run_fig("fig2", b.path());
    for f in ["fig2.csv", "fig2.svg", "fig2_averages.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let avg = fs::read_to_string(a.path().join("fig2_averages.csv")).unwrap();
    assert_eq!(
        avg.lines().filter(|l| l.starts_with("simulated,")).count(),
        4
    );
    let reference: Vec<&str> = avg
        .lines()
        .filter_map(|l| l.strip_prefix("reference,"))
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        reference,
        ["0.0263", "0.0234", "0.0156", "0.0176", "0.0187"]
    );
}

#[test]
fn fig3_has_qutrit_rows() {
    let dir = tempfile::tempdir().unwrap();
    run_fig("fig3", dir.path());
    let csv = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 26);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("qutrit,")));
    assert!(!dir.path().join("fig3_averages.csv").exists());
}
