use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_eigenshadow"));
    c.env_remove("EIGENSHADOW_OUTPUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a 12-frame synthetic scene; returns (input, ground truth) dirs.
fn scene(root: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let (input, gt) = (root.join("input"), root.join("gt"));
    let o = run(&["synth", "-i", p(&input), "-g", p(&gt), "--width", "96", "--height", "64", "--frames", "12"]);
    assert!(o.status.success(), "{o:?}");
    (input, gt)
}

const SCENE_INTERVALS: &str = "0 160 290 310";

#[test]
fn run_writes_named_artifacts_and_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "run", "-i", p(&input), "-g", p(&gt), "-o", p(&out), "--intervals", SCENE_INTERVALS, "--dataset", "demo",
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("demo\t1.00\t1.00"), "{text}");
    for stage in ["motion", "filled", "dualmap", "classes"] {
        assert!(out.join(format!("in000002.{stage}.png")).is_file(), "{stage}");
        assert!(out.join(format!("in000012.{stage}.png")).is_file(), "{stage}");
    }
    assert!(!out.join("in000001.motion.png").exists());
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("Mean\t1.00\t1.00"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# demo\ninput = {}\nground_truth = {}\nintervals = 0 1 2 3\nemit = none\nlast = 4\n",
            input.display(),
            gt.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["run", "-c", p(&cfg), "-o", p(&out), "--intervals", SCENE_INTERVALS, "--emit", "dualmap"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("3 frame pairs"), "{}", stdout(&o));
    assert!(stdout(&o).contains("1.00\t1.00"), "{}", stdout(&o));
    let mut names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["in000002.dualmap.png", "in000003.dualmap.png", "in000004.dualmap.png"]);
}

#[test]
fn output_defaults_to_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = scene(dir.path());
    let env_out = dir.path().join("from-env");
    let o = bin()
        .args(["run", "-i", p(&input), "--intervals", SCENE_INTERVALS, "--emit", "motion"])
        .env("EIGENSHADOW_OUTPUT", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(env_out.join("in000002.motion.png").is_file());
}

#[test]
fn calibrate_prints_config_line() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let line = dir.path().join("iv.cfg");
    let o = run(&["calibrate", "-i", p(&input), "-g", p(&gt), "--percentile", "1e-9", "--write", p(&line)]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o), "intervals = 24 148 300 300\n");
    assert_eq!(fs::read_to_string(line).unwrap(), "intervals = 24 148 300 300\n");
}

#[test]
fn sweep_ranks_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let o = run(&[
        "sweep", "-i", p(&input), "-g", p(&gt), "--thresholds", "10,5", "--candidate", "0 100 200 250",
        "--candidate", SCENE_INTERVALS,
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("rank\tthreshold"));
    assert!(lines[1].starts_with("1\t10\t0\t160\t290\t310\t1.000000\t1.000000\t1.000000"), "{text}");
}

#[test]
fn eval_reads_class_maps() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let out = dir.path().join("out");
    assert!(run(&["run", "-i", p(&input), "-o", p(&out), "--intervals", SCENE_INTERVALS, "--emit", "classes"])
        .status
        .success());
    let o = run(&["eval", "a", p(&out), p(&gt), "b", p(&out), p(&gt)]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(
        stdout(&o),
        "Dataset\tF Cast shadow\tF Self shadow\na\t1.00\t1.00\nb\t1.00\t1.00\nMean\t1.00\t1.00\n"
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let out = dir.path().join("out");
    let cases: Vec<Vec<&str>> = vec![
        vec!["bogus"],
        vec!["run", "--threshold", "abc"],
        vec!["run", "-i", p(&input), "-o", p(&out)],
        vec!["run", "-i", p(&input), "-o", p(&out), "--intervals", "1 2 3"],
        vec!["run", "-i", p(&input), "-o", p(&out), "--intervals", "5 1 2 3"],
        vec!["run", "-i", p(&input), "-o", p(&out), "--intervals", SCENE_INTERVALS, "--threshold", "-1"],
        vec!["run", "-i", p(&input), "-o", p(&out), "--intervals", SCENE_INTERVALS, "--first", "9", "--last", "3"],
        vec!["run", "-i", p(&input), "-o", p(&out), "--intervals", SCENE_INTERVALS, "--structuring-element", "disk"],
        vec!["sweep", "-i", p(&input), "-o", p(&out), "--candidate", SCENE_INTERVALS],
        vec!["calibrate", "-i", p(&input), "-o", p(&out)],
        vec!["calibrate", "-i", p(&input), "-g", p(&gt), "--percentile", "60"],
        vec!["eval", "a", "b"],
        vec!["eval", "a", "b", "c", "d"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = scene(dir.path());
    let out = dir.path().join("out");
    let missing = dir.path().join("missing");
    let o = run(&["run", "-i", p(&missing), "-o", p(&out), "--intervals", SCENE_INTERVALS]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    fs::write(input.join("in000005.png"), b"not a png").unwrap();
    let o = run(&["run", "-i", p(&input), "-o", p(&out), "--intervals", SCENE_INTERVALS]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");

    let o = run(&["eval", "x", p(&missing), p(&gt)]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");

    let o = run(&["run", "-c", p(&missing)]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");
}

#[test]
fn help_and_version_exit_0() {
    for args in [&["--help"][..], &["--version"], &["run", "--help"]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
    }
    let help = stdout(&run(&["run", "--help"]));
    for flag in [
        "--input", "--output", "--first", "--last", "--threshold", "--erosion-passes", "--structuring-element",
        "--intervals", "--calibrate", "--percentile", "--ground-truth", "--emit", "--dataset", "--config",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}
