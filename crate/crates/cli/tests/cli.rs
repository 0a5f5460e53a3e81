use std::path::Path;
use std::process::{Command, Output};

fn rmrp(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmrp"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("run rmrp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn scene_then_train_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = rmrp(out, &["scene", "--generator", "sphere-single", "--param", "radius=1.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scene = out.join("scene.toml");
    let text = std::fs::read_to_string(&scene).unwrap();
    assert!(text.contains("format_version = 1"));

    let o = rmrp(
        out,
        &["train", "--scene", scene.to_str().unwrap(), "--kind", "occupancy", "--feature-dim", "80", "--export-samples"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("accuracy="));
    assert_eq!(header(&out.join("samples.csv")), "x,y,z,label");
    let ckpt = out.join("occupancy.ckpt");
    assert!(ckpt.exists());

    let o = rmrp(out, &["query", "--checkpoint", ckpt.to_str().unwrap(), "--point", "0,0,0", "--point", "4,4,4", "--gradient"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("query.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "x,y,z,value,dx,dy,dz");
    assert_eq!(rows.len(), 3);
    // Sphere center scores higher than a far corner.
    let value = |r: &str| r.split(',').nth(3).unwrap().parse::<f64>().unwrap();
    assert!(value(rows[1]) > value(rows[2]));
}

#[test]
fn train_from_samples_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let mut csv = String::from("x,y,label\n");
    for i in 0..200 {
        let x = i as f64 / 20.0;
        csv.push_str(&format!("{x},{},{}\n", (i % 7) as f64 * 0.3, 0.1 * x));
    }
    let data = out.join("terrain.csv");
    std::fs::write(&data, csv).unwrap();
    let o = rmrp(out, &["train", "--data", data.to_str().unwrap(), "--kind", "terrain", "--feature-dim", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("r2="));
    assert!(out.join("terrain.ckpt").exists());
}

#[test]
fn plan_uav_frontend_stage_writes_waypoints_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = out.join("cfg.toml");
    std::fs::write(
        &cfg,
        "[backend_uav.run.field]\nfeature_dim = 120\n[backend_uav.run.sensing]\nvolumetric = 2000\n[backend_uav.run.sensing.scan]\nrays = 300\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rmrp"))
        .args(["--config", cfg.to_str().unwrap(), "--out"])
        .arg(out)
        .args(["plan-uav", "--generator", "corridor", "--stage", "frontend"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("nodes_visited="));
    assert_eq!(header(&out.join("waypoints.csv")), "x,y,z");
    assert_eq!(header(&out.join("refine_trace.csv")), "iteration,cost");
}

#[test]
fn plan_ugv_writes_trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = out.join("cfg.toml");
    std::fs::write(&cfg, "[backend_ugv.run]\nterrain_samples = 800\n[backend_ugv.run.field]\nfeature_dim = 120\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rmrp"))
        .args(["--config", cfg.to_str().unwrap(), "--out"])
        .arg(out)
        .args(["plan-ugv", "--generator", "pits-flat"])
        .output()
        .unwrap();
    assert!(o.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout(&o);
    for key in ["length=", "min_clearance=", "n_pit=", "iterations=", "wall_s="] {
        assert!(summary.contains(key), "{summary}");
    }
    assert_eq!(header(&out.join("trajectory.csv")), "t,x,y,z,v,a");
    assert_eq!(header(&out.join("control_points.csv")), "i,x,y");
    assert_eq!(header(&out.join("cost_trace.csv")), "iteration,cost");
}

#[test]
fn verify_theorem_reports_and_writes_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = rmrp(out, &["verify-theorem", "--m", "120", "--k", "100", "--trials", "50"]);
    assert!(o.status.code().is_some_and(|c| c <= 1));
    let report = std::fs::read_to_string(out.join("theorem_report.txt")).unwrap();
    assert!(report.contains("formula k=218"));
    assert!(report.contains("rate_residual="));
    let trials = std::fs::read_to_string(out.join("theorem_trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 51);
    assert!(trials.starts_with("trial,"));
}

#[test]
fn unknown_suite_and_generator_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = rmrp(dir.path(), &["benchmark", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
    let o = rmrp(dir.path(), &["scene", "--generator", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_exit_code_follows_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    // Quick theorem suite passes; the quick mapping suite misses its
    // full-size accuracy targets.
    let o = rmrp(out, &["benchmark", "--quick", "theorem"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS theorem passing k found"));
    assert!(out.join("theorem/theorem_trials.csv").exists());
    let o = rmrp(out, &["benchmark", "--quick", "mapping"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(header(&out.join("mapping/mapping.csv")).contains("thr"));
}

#[test]
fn complete_fills_mask_and_lists_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = out.join("cfg.toml");
    std::fs::write(&cfg, "[completion.run]\ntraining_scenes = 3\nsamples_per_scene = 800\n[completion.run.field]\nfeature_dim = 120\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rmrp"))
        .args(["--config", cfg.to_str().unwrap(), "--out"])
        .arg(out)
        .args(["complete", "--generator", "corner"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("idempotent=true"));
    assert_eq!(header(&out.join("completed_cells.csv")), "i,j,k,x,y,z");
}
