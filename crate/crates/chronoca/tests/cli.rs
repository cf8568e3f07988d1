//! Integration tests for the `chronoca` binary: subcommand behavior, exit
//! codes, diagnostics, and file outputs.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{regime_events_csv, REGIME_BOUNDARIES};

const LINE_FIXTURE: &str = "obs,a,b\ns1,20,80\ns2,25,75\ns3,70,30\ns4,75,25\n";

fn chronoca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronoca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, content: &str) -> String {
    fs::write(path, content).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn pipeline_on_synthetic_events_prints_seven_boundaries() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(&tmp.path().join("events.csv"), &regime_events_csv(3));
    let out_dir = tmp.path().join("out");

    let out = chronoca(&[
        "pipeline",
        "--input",
        &input,
        "--kind",
        "events",
        "--bin",
        "month",
        "--k",
        "8",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--emit",
        "report-text,dendrogram-json,newick",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let text = stdout(&out);
    assert!(text.contains("boundaries (k=8): 7"), "{text}");
    for p in REGIME_BOUNDARIES {
        assert!(
            text.contains(&format!("between rows {} and {}", p, p + 1)),
            "missing boundary {p} in: {text}"
        );
    }
    assert!(out_dir.join("report.txt").exists());
    assert!(out_dir.join("dendrogram.json").exists());
    assert!(out_dir.join("tree.nwk").exists());
    assert!(!out_dir.join("factors.json").exists(), "not requested");
    // no stray temp files
    for entry in fs::read_dir(&out_dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(!name.starts_with(".tmp."), "leftover temp file {name}");
    }
}

#[test]
fn pipeline_default_emits_all_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(
        &tmp.path().join("wide.csv"),
        "obs,a,b,c\ns1,20,70,10\ns2,25,65,15\ns3,70,20,30\ns4,75,15,40\n",
    );

    let run = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let out = chronoca(&[
            "pipeline",
            "--input",
            &input,
            "--k",
            "2",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };

    let a = run(&tmp.path().join("out_a"));
    let b = run(&tmp.path().join("out_b"));
    assert_eq!(a, b, "pipeline outputs must be byte-identical");
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "dendrogram.json",
            "dendrogram.svg",
            "factor_map.svg",
            "factors.json",
            "report.txt",
            "tree.nwk"
        ]
    );
}

#[test]
fn ingest_normalizes_and_warns_on_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(&tmp.path().join("raw.csv"), "obs,a,b\ns1,1,2\ns2,0,0\ns3,2,1\n");

    let out = chronoca(&["ingest", "--input", &input]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("WARN dropped row s2"), "{}", stderr(&out));
    let csv = stdout(&out);
    assert!(csv.contains("s1") && csv.contains("s3") && !csv.contains("s2"), "{csv}");
}

#[test]
fn ingest_applies_binarize_and_merge_rare() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(
        &tmp.path().join("raw.csv"),
        "obs,a,b,c,d\ns1,9,1,0,1\ns2,9,0,1,0\n",
    );
    let out = chronoca(&[
        "ingest",
        "--input",
        &input,
        "--binarize",
        "0",
        "--merge-rare",
        "2",
        "--other-label",
        "rest",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = stdout(&out);
    assert!(csv.starts_with("obs,a,rest\n"), "{csv}");
    assert!(csv.contains("s1,1,2"), "{csv}");
}

#[test]
fn ca_cluster_cut_changepoints_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(&tmp.path().join("line.csv"), LINE_FIXTURE);
    let factors = tmp.path().join("factors.json");
    let dendrogram = tmp.path().join("dendrogram.json");
    let newick = tmp.path().join("tree.nwk");

    let out = chronoca(&["ca", "--input", &input, "--out", factors.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("factors: 1"), "{text}");
    assert!(text.contains("explained (1 factors): 100.0%"), "{text}");

    let out = chronoca(&[
        "cluster",
        "--factors",
        factors.to_str().unwrap(),
        "--out",
        dendrogram.to_str().unwrap(),
        "--newick",
        newick.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let tree = fs::read_to_string(&newick).unwrap();
    assert!(tree.ends_with(";") && tree.contains("s1"), "{tree}");

    let out = chronoca(&["cut", "--dendrogram", dendrogram.to_str().unwrap(), "--k", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1 1 2 2");

    let out = chronoca(&[
        "changepoints",
        "--dendrogram",
        dendrogram.to_str().unwrap(),
        "--k",
        "2",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("between rows 2 and 3"), "{}", stdout(&out));
}

#[test]
fn cluster_from_table_renders_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(&tmp.path().join("line.csv"), LINE_FIXTURE);
    let svg_path = tmp.path().join("dendrogram.svg");
    let json_path = tmp.path().join("dendrogram.json");

    let out = chronoca(&[
        "cluster",
        "--input",
        &input,
        "--out",
        json_path.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let svg = fs::read_to_string(&svg_path).unwrap();
    common::assert_well_formed_xml(&svg);
    assert_eq!(svg.matches("<text class=\"leaf\"").count(), 4);
}

#[test]
fn independence_table_exits_zero_with_skip_message() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(&tmp.path().join("indep.csv"), "obs,a,b\ns1,2,2\ns2,1,1\n");
    let out = chronoca(&[
        "pipeline",
        "--input",
        &input,
        "--k",
        "2",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
        "--emit",
        "factors-json",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out).trim(),
        "total inertia 0; no factors; clustering skipped"
    );
}

#[test]
fn exit_codes_match_error_classes() {
    let tmp = tempfile::tempdir().unwrap();

    // 3: missing input file
    let out = chronoca(&[
        "pipeline",
        "--input",
        tmp.path().join("missing.csv").to_str().unwrap(),
        "--k",
        "2",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));

    // 1: domain error (negative count)
    let bad = write(&tmp.path().join("neg.csv"), "obs,a\ns1,-3\n");
    let out = chronoca(&["ca", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("negative count"));

    // 1: parse error (non-numeric cell)
    let bad = write(&tmp.path().join("text.csv"), "obs,a\ns1,xyz\n");
    let out = chronoca(&["ca", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));

    // 2: usage error (k = 0)
    let good = write(&tmp.path().join("line.csv"), LINE_FIXTURE);
    let out = chronoca(&[
        "pipeline",
        "--input",
        &good,
        "--k",
        "0",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));

    // 2: clap rejects unknown flags
    let out = chronoca(&["pipeline", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}
