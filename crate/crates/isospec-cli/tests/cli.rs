//! Black-box tests against the built binary.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_isospec"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("stdout is utf-8"),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isospec-cli-{}-{}", std::process::id(), name));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn jmap_sample_is_deterministic() {
    let dir = scratch("sample");
    let out_file = dir.join("j.json");
    let (code1, text1) = run(&[
        "jmap-sample",
        "--family",
        "so",
        "--n",
        "5",
        "--seed",
        "9",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    let (code2, text2) = run(&["jmap-sample", "--family", "so", "--n", "5", "--seed", "9"]);
    assert_eq!((code1, code2), (0, 0));
    assert_eq!(text1, text2);
    assert_eq!(fs::read_to_string(&out_file).unwrap(), text1);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn dims_reports_known_dimension() {
    let (code, text) = run(&["dims", "--family", "so", "--n", "5", "--seed", "1"]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["d"], 2);
    assert_eq!(v["flagged"], false);
}

#[test]
fn missing_input_gives_machine_readable_error() {
    let (code, text) = run(&["check-isospec", "--a", "/nonexistent/a.json", "--b", "/nonexistent/b.json"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["error"].is_string());
    assert_eq!(v["kind"], "io");
}

#[test]
fn certify_flags_self_comparison() {
    let dir = scratch("certify");
    let j = dir.join("j.json");
    let (code, _) = run(&[
        "jmap-sample",
        "--family",
        "sp",
        "--n",
        "2",
        "--seed",
        "3",
        "--out",
        j.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, text) = run(&[
        "certify",
        "--a",
        j.to_str().unwrap(),
        "--b",
        j.to_str().unwrap(),
        "--word-len",
        "4",
        "--grid",
        "120",
    ]);
    assert_eq!(code, 3, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["verdict"], "inconclusive");
    assert_eq!(v["margin"], 0.0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn compare_rejects_mismatched_archives() {
    let dir = scratch("compare");
    let mut csvs = Vec::new();
    for (family, n) in [("sp", "2"), ("so", "5")] {
        let j = dir.join(format!("{family}.json"));
        let csv = dir.join(format!("{family}.csv"));
        let (code, _) = run(&[
            "jmap-sample",
            "--family",
            family,
            "--n",
            n,
            "--seed",
            "3",
            "--out",
            j.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let (code, _) = run(&[
            "spectrum",
            "--in",
            j.to_str().unwrap(),
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        csvs.push(csv);
    }
    let (code, text) = run(&[
        "compare",
        "--a",
        csvs[0].to_str().unwrap(),
        "--b",
        csvs[1].to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["kind"], "provenance");

    let (code, text) = run(&[
        "compare",
        "--a",
        csvs[0].to_str().unwrap(),
        "--b",
        csvs[0].to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{text}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn pipeline_writes_deterministic_artifacts() {
    let dir = scratch("pipeline");
    let args = |out: &str| {
        vec![
            "pipeline".to_string(),
            "--family".into(),
            "sp".into(),
            "--n".into(),
            "2".into(),
            "--seed".into(),
            "3".into(),
            "--num-params".into(),
            "1".into(),
            "--num-steps".into(),
            "1".into(),
            "--cert-pairs".into(),
            "1".into(),
            "--cert-grid".into(),
            "240".into(),
            "--out-dir".into(),
            out.into(),
        ]
    };
    let run1 = dir.join("run1");
    let run2 = dir.join("run2");
    for (out, expect_summary) in [(&run1, true), (&run2, false)] {
        let argv = args(out.to_str().unwrap());
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let (code, text) = run(&argv);
        assert_eq!(code, 0, "{text}");
        if expect_summary {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["all_pairs_nonequivalent"], true);
            assert_eq!(v["all_spectra_match"], true);
        }
    }
    for f in ["family.json", "spectra.csv", "certificates.json", "summary.json"] {
        assert_eq!(
            fs::read(run1.join(f)).unwrap(),
            fs::read(run2.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let _ = fs::remove_dir_all(&dir);
}
