use std::process::Command;

fn cgconf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cgconf")).args(args).output().expect("binary runs")
}

#[test]
fn list_names_every_scenario() {
    let out = cgconf(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.contains("bundle-conformality"));
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        &["run", "no-such-thing"][..],
        &["run", "gauss-relation", "--samples", "0"],
        &["run", "gauss-relation", "--param", "q=1"],
        &["run", "bundle-conformality", "--param", "pair=3"],
        &["run", "bundle-conformality", "--param", "pair"],
        &["run", "gauss-relation", "--tol", "-1"],
        &["frobnicate"],
    ] {
        assert_eq!(cgconf(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn report_file_and_exit_status() {
    let dir = std::env::temp_dir().join(format!("cgconf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = cgconf(&["run", "bundle-conformality", "--samples", "5", "--param", "pair=2", "--param", "q=1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["overall_pass"], true);
    assert_eq!(doc["config"]["params"]["pair"], 2.0);

    let failing = cgconf(&["run", "gauss-relation", "--samples", "2", "--tol", "1e-300"]);
    assert_eq!(failing.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&failing.stdout).unwrap();
    assert_eq!(doc["overall_pass"], false);
    std::fs::remove_dir_all(&dir).ok();
}
