//! Exit codes and outputs of the `corrode` binary.

use std::path::Path;
use std::process::Command;

fn corrode(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_corrode")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn card(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn mesh_subcommand_reports_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let (code, stdout, _) = corrode(&["mesh", "--out", &out]);
    assert_eq!(code, 0);
    assert!(stdout.contains("steel interface"));
    let vtk = std::fs::read_to_string(dir.path().join("mesh.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
}

#[test]
fn card_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml").to_string_lossy().into_owned();
    assert_eq!(corrode(&["run", "--card", &missing]).0, 2);

    let unknown = card(dir.path(), "unknown.toml", "[geometry]\ncolour = \"red\"\n");
    let (code, _, stderr) = corrode(&["run", "--card", &unknown]);
    assert_eq!(code, 2);
    assert!(stderr.contains("colour"), "{stderr}");

    let units = card(dir.path(), "units.toml", "[geometry]\ncover = \"20 s\"\n");
    assert_eq!(corrode(&["run", "--card", &units]).0, 2);

    let negative = card(dir.path(), "negative.toml", "[time]\ndt = \"-1 d\"\n");
    assert_eq!(corrode(&["run", "--card", &negative]).0, 2);

    assert_eq!(corrode(&["run", "--preset", "atlantis"]).0, 2);
    assert_eq!(corrode(&["run", "--mode", "sideways"]).0, 2);
}

#[test]
fn numerical_abort_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = "preset = \"ye2017\"\n[transport]\nundershoot_tolerance = 1e-12\n[time]\nhorizon = \"10 d\"\n";
    let strict = card(dir.path(), "strict.toml", text);
    let out = dir.path().join("out");
    let (code, _, stderr) = corrode(&["run", "--card", &strict, "--out", &out.to_string_lossy()]);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("halvings"), "{stderr}");
    // the time series is flushed even on abort
    assert!(out.join("timeline.csv").exists());
}

#[test]
fn short_run_writes_timeline_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[time]\nhorizon = \"30 d\"\n";
    let short = card(dir.path(), "short.toml", text);
    let out = dir.path().join("out");
    let (code, stdout, stderr) = corrode(&[
        "run", "--preset", "ye2017", "--card", &short, "--out", &out.to_string_lossy(), "--seedless",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("final crack width"));
    let timeline = std::fs::read_to_string(out.join("timeline.csv")).unwrap();
    assert!(timeline.starts_with("t_s,t_days,w_m,w_rel,mass_loss_rel,activated_frac,max_Ctot_pct,max_Sp\n"));
    assert_eq!(timeline.lines().count(), 1 + 1 + 15);
    let snapshots = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("snap_"))
        .count();
    assert_eq!(snapshots, 1);
}

#[test]
fn fit_needs_deep_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let data = card(dir.path(), "data.csv", "depth_m,C_tot_pct,t_s\n0.002,0.3,5e6\n0.004,0.2,5e6\n0.010,0.1,5e6\n");
    let (code, _, stderr) = corrode(&["fit-diffusivity", "--data", &data]);
    assert_eq!(code, 2, "{stderr}");
    let bad = card(dir.path(), "bad.csv", "depth,content\n1,2\n");
    assert_eq!(corrode(&["fit-diffusivity", "--data", &bad]).0, 2);
}
