use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polyseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyseq")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
        .display()
        .to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn parse_reports_bad_lines_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "*CONO*\n*C(*\n*NOCO*\n");
    let o = polyseq(&["parse", &f]);
    assert_eq!(o.status.code(), Some(2));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["atoms"].as_array().unwrap().len(), 4);
    assert_eq!(lines[1]["line"], 2);
    assert!(lines[1]["error"].as_str().unwrap().contains("position"));
    assert_eq!(lines[2]["atoms"].as_array().unwrap().len(), 4);
}

#[test]
fn canon_keys_match_for_translations() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "*CONO*\n*NOCO*\n*CONOCONO*\n*CONNO*\n");
    let o = polyseq(&["canon", &f]);
    assert!(o.status.success());
    let keys: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(keys[0], keys[1]);
    assert_eq!(keys[0], keys[2]);
    assert_ne!(keys[0], keys[3]);
    let star = stdout(&polyseq(&["canon", "--key", "star", &f]));
    let star: Vec<&str> = star.lines().collect();
    assert_eq!(star[0], star[1]);
    assert_ne!(star[0], star[2]);
}

#[test]
fn augment_is_seeded_and_canon_equal() {
    let dir = tempfile::tempdir().unwrap();
    let src = "*CC(=O)Oc1ccc(cc1)N*\n*CONO*\n";
    let f = write(dir.path(), "c.txt", src);
    let a = polyseq(&["augment", "--variants", "3", "--seed", "9", &f]);
    let b = polyseq(&["augment", "--variants", "3", "--seed", "9", &f]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert_eq!(out.lines().count(), 6);
    let aug = write(dir.path(), "a.txt", &out);
    let keys = stdout(&polyseq(&["canon", &aug]));
    let src_keys = stdout(&polyseq(&["canon", &f]));
    let src_keys: Vec<&str> = src_keys.lines().collect();
    for (i, k) in keys.lines().enumerate() {
        assert_eq!(k, src_keys[i / 3]);
    }
}

#[test]
fn link_and_backbone() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "*CC(C)*\n");
    let link: serde_json::Value = serde_json::from_str(&stdout(&polyseq(&["link", &f]))).unwrap();
    assert!(link["link_edge"].is_array());
    let bb: serde_json::Value = serde_json::from_str(&stdout(&polyseq(&["backbone", &f]))).unwrap();
    assert_eq!(bb["backbone"], serde_json::json!([0, 1]));
}

#[test]
fn distances_dump() {
    let o = polyseq(&["distances", "*CONO*", "--d-thres", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["dist"][0][2], 2);
    assert_eq!(v["dist"][0][3], 1);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(polyseq(&["bogus"]).status.code(), Some(1));
    assert_eq!(polyseq(&["verify", "--d-thres", "0"]).status.code(), Some(1));
    assert_eq!(polyseq(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_input_exits_2() {
    assert_eq!(polyseq(&["parse", "/nonexistent/corpus.txt"]).status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    let o = polyseq(&["verify", "theorem1", "--monomers", "10"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().last().unwrap().contains("PASS"));
    let o = polyseq(&["verify", "theorem2", "--monomers", "5", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["passed"], true);
    assert!(stdout(&polyseq(&["verify", "theorem2", "--monomers", "2"])).contains("EXPECTED-FAIL"));
}

#[test]
fn stats_table() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "c.txt",
        "*CC*\n*c1ccc(cc1)*\n*c1ccc2cc(ccc2c1)c1ccc(cc1)*\n",
    );
    let o = polyseq(&["stats", "--json", &f]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["polymers"], 3);
    assert_eq!(v[0]["mean_rings"], 4.0 / 3.0);
    assert_eq!(v[0]["frac_more_than_two"], 1.0 / 3.0);
}

fn rsit_data(dir: &Path) -> String {
    let text = std::fs::read_to_string(data("rsit_200.csv")).unwrap();
    write(
        dir,
        "d.csv",
        &text.lines().take(31).map(|l| format!("{l}\n")).collect::<String>(),
    )
}

#[test]
fn rsit_link_is_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let d = rsit_data(dir.path());
    let report = dir.path().join("r.json");
    let o = polyseq(&[
        "rsit",
        &d,
        "--dim",
        "16",
        "--require-invariant",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["samples"].as_array().unwrap().len(), 30);
    assert!(r["max_prediction_shift"].as_f64().unwrap() < 1e-6);
}

#[test]
fn rsit_keep_fails_required_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let d = rsit_data(dir.path());
    let o = polyseq(&["rsit", &d, "--dim", "16", "--strategy", "keep", "--require-invariant"]);
    assert_eq!(o.status.code(), Some(3));
    let o = polyseq(&["rsit", &d, "--dim", "16", "--strategy", "keep"]);
    assert!(o.status.success());
}

#[test]
fn rsit_compare_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = rsit_data(dir.path());
    let a = polyseq(&["rsit", &d, "--dim", "16", "--compare", "--metric", "rmse"]);
    let b = polyseq(&["rsit", &d, "--dim", "16", "--compare", "--metric", "rmse"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.lines().nth(4).unwrap().starts_with("link"));
    assert!(out.lines().nth(4).unwrap().trim_end().ends_with("0.000000"));
}

#[test]
fn forward_with_saved_weights_and_descriptors() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "*CONO*\n*NOCO*\n");
    let w = dir.path().join("w.json");
    let a = polyseq(&["forward", &f, "--dim", "8", "--save-weights", w.to_str().unwrap()]);
    assert!(a.status.success());
    let b = polyseq(&[
        "forward",
        &f,
        "--dim",
        "8",
        "--seed",
        "99",
        "--weights",
        w.to_str().unwrap(),
    ]);
    assert_eq!(a.stdout, b.stdout);
    let ys: Vec<f64> = stdout(&a)
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["y_hat"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!((ys[0] - ys[1]).abs() < 1e-9);

    let desc = write(
        dir.path(),
        "d.csv",
        "psmiles,q,v1,v2\n*CONO*,0.5,1.0,2.0\n*NOCO*,0.5,1.0,2.0\n",
    );
    let groups = write(dir.path(), "g.json", r#"{"charge": ["q"], "shape": ["v1", "v2"]}"#);
    let c = polyseq(&["forward", &f, "--dim", "8", "--descriptors", &desc, "--groups", &groups]);
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
    assert_ne!(c.stdout, a.stdout);
    let missing = write(dir.path(), "m.txt", "*CCC*\n");
    let o = polyseq(&[
        "forward",
        &missing,
        "--dim",
        "8",
        "--descriptors",
        &desc,
        "--groups",
        &groups,
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fragcam_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let frag = write(
        dir.path(),
        "f.json",
        r#"[{"psmiles": "*CC(=O)O*", "fragments": [{"class": "ethyl", "atoms": [0, 1]}, {"class": "carboxyl", "atoms": [2, 3]}]},
            {"psmiles": "*OCCO*", "fragments": [{"class": "ether", "atoms": [0]}, {"class": "ethyl", "atoms": [1, 2]}, {"class": "ether", "atoms": [3]}]}]"#,
    );
    let o = polyseq(&["fragcam", &frag, "--dim", "8", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classes"].as_array().unwrap().len(), 3);
    assert!(v["max_completeness_error"].as_f64().unwrap() < 1e-9);

    let bad = write(
        dir.path(),
        "b.json",
        r#"[{"psmiles": "*CCO*", "fragments": [{"class": "a", "atoms": [0, 1]}, {"class": "b", "atoms": [1, 2]}]}]"#,
    );
    assert_eq!(polyseq(&["fragcam", &bad, "--dim", "8"]).status.code(), Some(2));
    let o = polyseq(&["fragcam", &bad, "--dim", "8", "--resolve-overlaps"]);
    assert!(o.status.success());
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "*CONO*\n");
    let out = dir.path().join("o.txt");
    let o = polyseq(&["canon", &f, "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 1);
}
