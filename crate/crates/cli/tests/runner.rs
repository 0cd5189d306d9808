use std::fs;
use std::path::Path;
use std::process::Command;

fn deltalayer(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_deltalayer"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            let name = p.file_name().unwrap().to_str().unwrap().to_string();
            // strip the timestamp, which is the only run-dependent part
            let parts: Vec<&str> = name.split('-').collect();
            let key = parts
                .iter()
                .filter(|s| !s.ends_with('Z'))
                .copied()
                .collect::<Vec<_>>()
                .join("-");
            (key, fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

const SMALL: &str = "seed = 11\n[beta]\nstart = 0.05\nstop = 0.02\ncount = 2\n[transverse]\ntrials = 50\nwidth_ratios = [5.0, 10.0]\n";

#[test]
fn identical_runs_give_identical_tables() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), SMALL);
    let a = root.path().join("a");
    let b = root.path().join("b");
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        for exp in ["transverse", "sphere", "asymptotics"] {
            let (code, _, err) = deltalayer(&[
                exp,
                "--config",
                &cfg,
                "--out",
                dir.to_str().unwrap(),
                "--jobs",
                jobs,
            ]);
            assert!(code <= 1, "{exp}: {err}");
        }
    }
    let (ta, tb) = (csv_bodies(&a), csv_bodies(&b));
    assert!(ta.len() >= 4);
    assert_eq!(ta, tb);
}

#[test]
fn manifest_echoes_resolved_config() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), SMALL);
    let out = root.path().join("out");
    let (code, stdout, _) = deltalayer(&[
        "transverse",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert_eq!(code, 0, "{stdout}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 99);
    assert_eq!(manifest["config"]["beta"]["count"], 2);
    assert_eq!(manifest["experiment"], "transverse");
    assert_eq!(manifest["passed"], true);
    for f in manifest["files"].as_array().unwrap() {
        let name = f.as_str().unwrap();
        assert!(name.starts_with("transverse-sphere-"), "{name}");
        assert!(out.join(name).exists());
    }
    let table = fs::read_to_string(out.join(manifest["files"][0].as_str().unwrap())).unwrap();
    let row = table.lines().nth(1).unwrap();
    assert!(row.starts_with("5.0000000000000003e-2,"), "{row}");
}

#[test]
fn malformed_config_exits_with_two() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("out");
    let cfg = write_config(
        root.path(),
        "[beta]\nstart = -0.1\nstop = 0.01\ncount = 3\n",
    );
    let (code, _, err) = deltalayer(&[
        "transverse",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("beta.start"));
    assert!(!out.exists());
    let cfg = write_config(root.path(), "seeed = 3\n");
    assert_eq!(deltalayer(&["sphere", "--config", &cfg]).0, 2);
    let (code, _, _) = deltalayer(&["transverse", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code, 2);
}

#[test]
fn out_of_regime_rows_are_marked() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(
        root.path(),
        "[beta]\nstart = 0.1\nstop = 0.05\ncount = 2\n[transverse]\nwidth_ratios = [1.0]\ntrials = 20\n",
    );
    let out = root.path().join("out");
    let (code, _, err) = deltalayer(&[
        "transverse",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("out of regime"), "{err}");
    let bounds = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_str().unwrap().ends_with("-bounds.csv"))
        .unwrap();
    let text = fs::read_to_string(bounds).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(4) == Some("false")));
}

#[test]
fn sphere_experiment_needs_a_sphere() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(
        root.path(),
        "[surface]\nname = \"torus\"\nR = 3.0\nr = 1.0\n",
    );
    assert_eq!(
        deltalayer(&[
            "sphere",
            "--config",
            &cfg,
            "--out",
            root.path().to_str().unwrap()
        ])
        .0,
        2
    );
}

#[test]
fn full_run_on_unit_sphere() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("out");
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sphere.toml");
    let (code, stdout, err) =
        deltalayer(&["full", "--config", cfg, "--out", out.to_str().unwrap()]);
    println!("{stdout}{err}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let experiments: Vec<&str> = manifest["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["experiment"].as_str().unwrap())
        .collect();
    for e in [
        "geometry-check",
        "transverse",
        "effective",
        "sphere",
        "asymptotics",
    ] {
        assert!(experiments.contains(&e), "{e}");
    }
    assert_eq!(code, 0);
}
