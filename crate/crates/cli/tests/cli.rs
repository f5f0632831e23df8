use std::path::Path;
use std::process::{Command, Output};

use curvmax_cli::commands::{
    ContinuitySummary, FourierSummary, MaximalSummary, RegionsSummary, SparseSummary,
    WeightsSummary,
};
use curvmax_core::counterexamples::ScalingReport;
use curvmax_core::regions::Verdict;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tempfile::TempDir;

fn curvmax(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvmax"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = curvmax(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

/// Decodes the summary file, checks it matches stdout and survives a round trip.
fn summary<T: DeserializeOwned + Serialize + PartialEq + std::fmt::Debug>(
    dir: &Path,
    name: &str,
    stdout: &str,
) -> T {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    let from_file: T = serde_json::from_str(&text).unwrap();
    let from_stdout: T = serde_json::from_str(stdout).unwrap();
    assert_eq!(from_file, from_stdout);
    let again: T = serde_json::from_str(&serde_json::to_string(&from_file).unwrap()).unwrap();
    assert_eq!(again, from_file);
    from_file
}

#[test]
fn delta1_and_delta0_agree_for_cubic() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(
        dir.path(),
        &[
            "regions",
            "--family",
            "delta1",
            "--d",
            "3",
            "--compare",
            "delta0",
        ],
    );
    let s: RegionsSummary = summary(dir.path(), "regions_summary.json", &stdout);
    assert_eq!(s.verdict, Some(Verdict::Equal));
    assert!(s.only_first.is_none() && s.only_second.is_none());
    let csv = std::fs::read_to_string(dir.path().join("regions_boundary.csv")).unwrap();
    assert!(csv.starts_with("region,vertex,inv_p,inv_q,inv_p_f64,inv_q_f64\n"));
}

#[test]
fn random_data_is_reproducible_from_the_seed() {
    let args = |seed: &'static str| {
        vec![
            "--seed",
            seed,
            "maximal-norm",
            "--data",
            "random",
            "--resolution",
            "12",
            "--eval-resolution",
            "12",
            "--time-samples",
            "8",
        ]
    };
    let run = |seed| {
        let dir = TempDir::new().unwrap();
        ok(dir.path(), &args(seed));
        std::fs::read(dir.path().join("maximal_norm.csv")).unwrap()
    };
    let first = run("7");
    assert_eq!(first, run("7"));
    assert_ne!(first, run("8"));
}

#[test]
fn summaries_round_trip() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();

    let out = ok(
        p,
        &[
            "fourier-decay",
            "--direction",
            "normal",
            "--lambda-max-exp",
            "7",
        ],
    );
    let f: FourierSummary = summary(p, "fourier_decay_summary.json", &out);
    assert_eq!(f.lambdas.len(), 4);
    assert!(f.zero_frequency > 0.0);

    let out = ok(
        p,
        &[
            "maximal-norm",
            "--resolution",
            "8",
            "--eval-resolution",
            "8",
            "--time-samples",
            "4",
        ],
    );
    let m: MaximalSummary = summary(p, "maximal_norm_summary.json", &out);
    assert_eq!(m.rows.len(), 2);

    let out = ok(
        p,
        &[
            "scaling",
            "--tag",
            "S1",
            "--kmin",
            "1",
            "--kmax",
            "3",
            "--cells",
            "8",
            "--domain-nodes",
            "16",
        ],
    );
    let s: ScalingReport = summary(p, "scaling_summary.json", &out);
    assert_eq!(s.rows.len(), 3);

    let out = ok(p, &["sparse", "--depth", "2", "--resolution", "8"]);
    let sp: SparseSummary = summary(p, "sparse_summary.json", &out);
    assert!(!sp.selected.is_empty());
    assert!(p.join("sparse_selection.json").exists());

    let out = ok(
        p,
        &[
            "weights",
            "--weight",
            "constant",
            "--resolution",
            "8",
            "--ps",
            "2,3",
        ],
    );
    let w: WeightsSummary = summary(p, "weights_summary.json", &out);
    for c in &w.characteristics {
        assert!((c.ap - 1.0).abs() < 1e-12 && (c.rh - 1.0).abs() < 1e-12);
    }

    let out = ok(
        p,
        &[
            "continuity",
            "--resolution",
            "32",
            "--eval-resolution",
            "16",
            "--zmax-exp",
            "5",
        ],
    );
    let c: ContinuitySummary = summary(p, "continuity_summary.json", &out);
    assert_eq!(c.shifts.len(), c.differences.len());
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"family": "delta1", "d": 4, "compare": "delta0"}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();

    let stdout = ok(dir.path(), &["--config", cfg, "regions"]);
    let s: RegionsSummary = serde_json::from_str(&stdout).unwrap();
    assert_eq!((s.d, s.compare.as_deref()), (4, Some("delta0")));

    let stdout = ok(dir.path(), &["--config", cfg, "regions", "--d", "2"]);
    let s: RegionsSummary = serde_json::from_str(&stdout).unwrap();
    assert_eq!(s.d, 2);
    assert!(s.region.starts_with("delta1"));
}

#[test]
fn unknown_config_key_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"famly": "delta1"}"#).unwrap();
    let o = curvmax(
        dir.path(),
        &["--config", config.to_str().unwrap(), "regions"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("famly"));
}

#[test]
fn bad_values_exit_with_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["sparse", "--c", "0.5"],
        vec!["scaling", "--p", "1/2"],
        vec!["regions", "--family", "delta9"],
    ] {
        assert_eq!(
            curvmax(dir.path(), &args).status.code(),
            Some(2),
            "{args:?}"
        );
    }
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = TempDir::new().unwrap();
    // With no refinement below the root every sparse form vanishes.
    let o = curvmax(dir.path(), &["sparse", "--depth", "0", "--resolution", "8"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical"));
}
