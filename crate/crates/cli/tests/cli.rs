use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accessplan"))
}

fn run(args: &[&str], cwd: &Path) -> i32 {
    let out = bin().args(args).current_dir(cwd).output().unwrap();
    out.status.code().unwrap()
}

#[test]
fn synth_then_allocate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["synth", "--n", "6", "--out", "fx"], d), 0);
    for cmd in ["access", "cluster", "allocate", "far", "evaluate"] {
        assert_eq!(run(&[cmd, "--config", "fx/config.json", "--out", cmd], d), 0, "{cmd}");
    }
    for f in [
        "access/blocks.geojson",
        "access/segments.geojson",
        "cluster/clusters.csv",
        "allocate/allocation.geojson",
        "allocate/shares.csv",
        "far/lots.geojson",
        "far/construction.csv",
        "evaluate/record.json",
        "evaluate/manifest.json",
    ] {
        assert!(d.join(f).is_file(), "{f}");
    }
    let clusters = std::fs::read_to_string(d.join("cluster/clusters.csv")).unwrap();
    assert!(clusters.starts_with("block_id,tier,cluster_id,is_center\n"));
    assert_eq!(clusters.lines().count(), 1 + 25 * 3);
    let blocks = std::fs::read_to_string(d.join("access/blocks.geojson")).unwrap();
    assert!(blocks.contains("\"A_t2\"") && blocks.contains("\"lot_area\""));
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["synth", "--n", "5", "--out", "fx"], d), 0);
    for out in ["a", "b"] {
        assert_eq!(run(&["sample", "--config", "fx/config.json", "--n", "100", "--seed", "7", "--out", out], d), 0);
    }
    let a = std::fs::read(d.join("a/records.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b/records.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 101);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["pareto", "--records", "missing.csv"], d), 1);
    assert_eq!(run(&["sample", "--no-such-flag"], d), 1);
    assert_eq!(run(&["frobnicate"], d), 1);
    assert_eq!(run(&["--help"], d), 0);
    assert_eq!(run(&["synth", "--n", "1"], d), 1);
    assert_eq!(run(&["allocate"], d), 1, "no site configured");
    std::fs::write(d.join("bad.json"), r#"{"policy": {"radii": [1200, -1, 350]}}"#).unwrap();
    assert_eq!(run(&["evaluate", "--config", "bad.json"], d), 1);

    // A records file with no valid record has an empty front.
    assert_eq!(run(&["synth", "--n", "4", "--out", "fx"], d), 0);
    assert_eq!(run(&["sample", "--config", "fx/config.json", "--n", "3", "--out", "fx"], d), 0);
    let text = std::fs::read_to_string(d.join("fx/records.csv")).unwrap();
    let header = text.lines().next().unwrap();
    std::fs::write(d.join("empty.csv"), format!("{header}\n")).unwrap();
    assert_eq!(run(&["pareto", "--records", "empty.csv"], d), 1);

    // Output directory that cannot be created.
    std::fs::write(d.join("taken"), "").unwrap();
    assert_eq!(run(&["synth", "--out", "taken"], d), 2);
}

#[test]
fn config_hash_in_manifest_matches_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["synth", "--n", "3", "--out", "fx"], d), 0);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("fx/manifest.json")).unwrap()).unwrap();
    let cfg = accessplan::io::RunConfig::load(&d.join("fx/config.json")).unwrap();
    assert_eq!(m["config_hash"], cfg.hash());
    assert_eq!(m["inputs"].as_object().unwrap().len(), 2);
}
