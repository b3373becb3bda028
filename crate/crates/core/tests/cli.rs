use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gfl_core::harness::synthetic_image;
use gfl_core::imagecore::save_image;

fn gfl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfl"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    save_image(
        &synthetic_image(32, 32, 1, 1).unwrap(),
        dir.path().join("a.png"),
    )
    .unwrap();
    save_image(
        &synthetic_image(32, 32, 1, 2).unwrap(),
        dir.path().join("b.png"),
    )
    .unwrap();
    save_image(
        &synthetic_image(16, 16, 1, 3).unwrap(),
        dir.path().join("small.png"),
    )
    .unwrap();
    dir
}

#[test]
fn metrics_self_comparison() {
    let dir = setup();
    let o = gfl(&["metrics", "a.png", "a.png"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "120.000000,1.000000\n");
}

#[test]
fn loss_eval_identical_images() {
    let dir = setup();
    let o = gfl(&["loss-eval", "a.png", "a.png"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.000001,0,0,0.001\n");

    let o = gfl(
        &[
            "loss-eval",
            "a.png",
            "b.png",
            "--mask-omega",
            "4",
            "--header",
        ],
        dir.path(),
    );
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ch_c,pi_c,theta_c,total"));
    let vals: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(vals[2] > 0.0);
    assert!((vals[0] + vals[1] + vals[2]).sqrt() - vals[3] < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(gfl(&[], dir.path()).status.code(), Some(1));
    assert_eq!(gfl(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(gfl(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(
        gfl(&["metrics", "a.png"], dir.path()).status.code(),
        Some(1)
    );

    let o = gfl(&["metrics", "a.png", "missing.png"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.png"));

    let o = gfl(&["loss-eval", "a.png", "small.png"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    fs::write(dir.path().join("junk.png"), b"not an image").unwrap();
    assert_eq!(
        gfl(&["metrics", "junk.png", "a.png"], dir.path())
            .status
            .code(),
        Some(2)
    );

    assert_eq!(
        gfl(
            &["pyramid", "small.png", "--depth", "2", "--out", "p"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

const ABLATION_SCHEDULE: &str = r#"{"schedule": {"omega0": 255, "omegaF": 10, "epochs": 100, "stages": 2,
    "mode": "static", "interpretation": "literal"}, "seed": 3}"#;

#[test]
fn schedule_trace_rows() {
    let dir = setup();
    fs::write(dir.path().join("s.json"), ABLATION_SCHEDULE).unwrap();
    let o = gfl(
        &[
            "schedule-trace",
            "--config",
            "s.json",
            "--out",
            "t/trace.csv",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("t/trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,omega,frozen");
    assert_eq!(
        &lines[1..5],
        &["1,255,false", "2,132.5,false", "3,132.5,false", "4,10,true"]
    );
    assert_eq!(lines.len(), 101);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t/run-manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["schedule"]["omegaF"], 10.0);
}

#[test]
fn strict_config_rejected_before_work() {
    let dir = setup();
    fs::write(
        dir.path().join("bad.json"),
        ABLATION_SCHEDULE.replace("\"stages\"", "\"stagse\""),
    )
    .unwrap();
    let o = gfl(
        &[
            "schedule-trace",
            "--config",
            "bad.json",
            "--out",
            "t/trace.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("t").exists());

    let cfg = r#"{"task": "denoising", "loss": "mse", "steps": 5, "learning_rate": 0.1,
        "input": "a.png", "output_dir": "o", "lerning_rate": 1}"#;
    fs::write(dir.path().join("opt.json"), cfg).unwrap();
    assert_eq!(
        gfl(&["optimize", "--config", "opt.json"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert!(!dir.path().join("o").exists());
}

#[test]
fn degrade_pyramid_and_spectrum_outputs() {
    let dir = setup();
    let o = gfl(
        &[
            "degrade",
            "a.png",
            "--task",
            "super-resolution",
            "--out",
            "d/lr.png",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let lr = gfl_core::imagecore::load_image(dir.path().join("d/lr.png")).unwrap();
    assert_eq!(lr.dims(), (8, 8, 1));
    assert!(dir.path().join("d/run-manifest.json").exists());

    let o = gfl(
        &["pyramid", "a.png", "--depth", "2", "--out", "pyr"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    for f in ["level_0.png", "level_1.png", "base.png"] {
        assert!(dir.path().join("pyr").join(f).exists(), "{f}");
    }

    let o = gfl(
        &[
            "analyze-spectrum",
            "a.png",
            "--out",
            "s/spec.csv",
            "--keep-above",
            "6",
            "--filtered-out",
            "s/hi.png",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("s/spec.csv")).unwrap();
    assert!(csv.starts_with("radius,power\n0,"));
    assert_eq!(csv.lines().count(), 1 + 17);
    assert!(dir.path().join("s/hi.png").exists());
}

fn write_opt_config(dir: &Path, out: &str) {
    let cfg = format!(
        r#"{{"task": "denoising", "loss": "gfl", "steps": 60, "learning_rate": 0.5, "seed": 11,
            "schedule": {{"omega0": 20, "omegaF": 4, "epochs": 6, "stages": 3, "mode": "static"}},
            "input": "a.png", "output_dir": "{out}"}}"#
    );
    fs::write(dir.join(format!("{out}.json")), cfg).unwrap();
}

#[test]
fn optimize_is_deterministic() {
    let dir = setup();
    for out in ["r1", "r2"] {
        write_opt_config(dir.path(), out);
        let o = gfl(
            &["optimize", "--config", &format!("{out}.json")],
            dir.path(),
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    for f in ["history.csv", "report.csv", "restored.png", "degraded.png"] {
        let a = fs::read(dir.path().join("r1").join(f)).unwrap();
        let b = fs::read(dir.path().join("r2").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let history = fs::read_to_string(dir.path().join("r1/history.csv")).unwrap();
    assert!(history.starts_with("step,ch_c,pi_c,theta_c,total,omega,psnr\n1,"));
    assert_eq!(history.lines().count(), 61);
    let report = fs::read_to_string(dir.path().join("r1/report.csv")).unwrap();
    assert!(report.starts_with("image,loss,psnr_in,psnr_out,ssim_in,ssim_out\na,gfl,"));
    let manifest = fs::read_to_string(dir.path().join("r1/run-manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 11"));
}

#[test]
fn train_on_corpus() {
    let dir = setup();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for i in 0..5 {
        save_image(
            &synthetic_image(32, 32, 1, 50 + i).unwrap(),
            corpus.join(format!("img{i}.png")),
        )
        .unwrap();
    }
    fs::write(corpus.join("notes.txt"), "ignored").unwrap();
    let cfg = r#"{"task": "denoising", "loss": "mse", "steps": 10, "learning_rate": 0.1,
        "seed": 2, "output_dir": "trained"}"#;
    fs::write(dir.path().join("t.json"), cfg).unwrap();
    let o = gfl(
        &[
            "train",
            "--config",
            "t.json",
            "--corpus",
            "corpus",
            "--kernel-size",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let kernel = fs::read_to_string(dir.path().join("trained/kernel.csv")).unwrap();
    assert_eq!(kernel.lines().count(), 3);
    assert!(kernel.lines().all(|l| l.split(',').count() == 3));
    let report = fs::read_to_string(dir.path().join("trained/report.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().starts_with("img4,mse,"));
}
