//! Drives the built binary through every subcommand and the main error
//! paths.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scimap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scimap"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Two planted groups of 12 documents each: group 1 holds d01..d12 under
/// topic X01.100, group 2 holds d13..d24 under X02.100. Topic size 12 gives
/// a one-point profile grid at coverage 0.5.
fn write_fixture(dir: &Path) {
    let doc = |i: usize| format!("d{i:02}");
    let group_docs = |g: usize| (1 + g * 12..=12 + g * 12).map(doc).collect::<Vec<_>>();

    let mut documents = String::from("document_id\n");
    for g in 0..2 {
        for d in group_docs(g) {
            documents.push_str(&d);
            documents.push('\n');
        }
    }
    fs::write(dir.join("documents.tsv"), documents).unwrap();

    // Per group, two overlapping elements cover all twelve documents.
    let mut links = String::from("element_id\tdocument_id\n");
    for g in 0..2 {
        let docs = group_docs(g);
        for d in &docs[..8] {
            links.push_str(&format!("e{g}a\t{d}\n"));
        }
        for d in &docs[4..] {
            links.push_str(&format!("e{g}b\t{d}\n"));
        }
    }
    fs::write(dir.join("links.tsv"), links).unwrap();

    // A similarity chain within each group plus one weak cross-group pair.
    let mut similarity = String::from("doc_a\tdoc_b\tscore\n");
    for g in 0..2 {
        let docs = group_docs(g);
        for pair in docs.windows(2) {
            similarity.push_str(&format!("{}\t{}\t0.9\n", pair[0], pair[1]));
        }
    }
    similarity.push_str("d01\td13\t0.05\n");
    fs::write(dir.join("similarity.tsv"), similarity).unwrap();

    let mut annotations = String::from("document_id\tterm_id\n");
    for g in 0..2 {
        for d in group_docs(g) {
            annotations.push_str(&format!("{d}\tm-x{}\n", g + 1));
        }
    }
    fs::write(dir.join("annotations.tsv"), annotations).unwrap();

    fs::write(
        dir.join("tree.tsv"),
        "tree_code\tterm_id\tterm_name\n\
         X01\tm-x1r\tGroup one\nX01.100\tm-x1\tGroup one leaf\n\
         X02\tm-x2r\tGroup two\nX02.100\tm-x2\tGroup two leaf\n",
    )
    .unwrap();
    fs::write(
        dir.join("categories.tsv"),
        "category_id\tprefixes\tdisplay_name\nX01\tX01\tOnes\nX02\tX02\tTwos\n",
    )
    .unwrap();
    fs::write(
        dir.join("citations.tsv"),
        "citing_id\tcited_id\n\
         d01\td02\nd02\td03\nd13\td14\nd14\td15\n\
         n1\td01\nn1\td13\n",
    )
    .unwrap();
}

fn run_args<'a>(dir: &'a Path, out: &'a Path) -> Vec<String> {
    [
        "--links",
        "links.tsv",
        "--similarity",
        "similarity.tsv",
        "--documents",
        "documents.tsv",
        "--annotations",
        "annotations.tsv",
        "--tree",
        "tree.tsv",
        "--categories",
        "categories.tsv",
    ]
    .chunks(2)
    .flat_map(|pair| {
        [
            pair[0].to_string(),
            dir.join(pair[1]).display().to_string(),
        ]
    })
    .chain(["--output".to_string(), out.display().to_string()])
    .collect()
}

#[test]
fn full_cli_workflow_on_a_tiny_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture(tmp.path());
    let out = tmp.path().join("out");

    // ingest-check prints table sizes and exits 0.
    let mut args = vec!["ingest-check".to_string()];
    args.extend(run_args(tmp.path(), &out));
    args.extend([
        "--citations".to_string(),
        tmp.path().join("citations.tsv").display().to_string(),
    ]);
    let check = scimap(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(check.status.success());
    let stdout = String::from_utf8(check.stdout).unwrap();
    assert!(stdout.contains("documents\t24"), "{stdout}");
    assert!(stdout.contains("citations\t6"), "{stdout}");

    // Full run with the citation variant. The tiny topics sit below the
    // default bin base, so bins start at 1 for this fixture.
    let mut args = vec!["run".to_string()];
    args.extend(run_args(tmp.path(), &out));
    args.extend(
        [
            "--citations",
            &tmp.path().join("citations.tsv").display().to_string(),
            "--bin-base",
            "1",
            "--min-per-bin",
            "1",
            "--sweep-count",
            "12",
            "--coverages",
            "0.5",
        ]
        .map(String::from),
    );
    let run = scimap(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(
        run.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    for name in [
        "solutions.csv",
        "topic_profiles.csv",
        "category_profiles.csv",
        "summary.csv",
        "manifest.json",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let solutions = fs::read_to_string(out.join("solutions.csv")).unwrap();
    for variant in ["pure", "similarity", "mixed", "extended_citation"] {
        assert!(
            solutions.contains(variant),
            "solutions.csv lacks {variant} rows"
        );
    }

    // Plot a topic profile.
    let plot = scimap(&[
        "plot",
        "--dir",
        &out.display().to_string(),
        "--subject",
        "X01.100",
        "--coverage",
        "0.5",
    ]);
    assert!(
        plot.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&plot.stderr)
    );
    let svg_path = out.join("plots/X01_100_0.5.svg");
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("<polyline"));

    // Unknown subject lists nearest matches and fails.
    let missing = scimap(&[
        "plot",
        "--dir",
        &out.display().to_string(),
        "--subject",
        "X01.999",
        "--coverage",
        "0.5",
    ]);
    assert!(!missing.status.success());
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert!(stderr.contains("nearest matches"), "{stderr}");
    assert!(stderr.contains("X01.100"), "{stderr}");
}

#[test]
fn config_file_with_cli_override() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture(tmp.path());
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("run.cfg");
    let text = format!(
        "links = {}\nsimilarity = {}\ndocuments = {}\nannotations = {}\ntree = {}\ncategories = {}\noutput = {}\nbin_base = 1\nmin_per_bin = 1\nsweep_count = 10\ncoverages = 0.5\nseed = 5\n",
        tmp.path().join("links.tsv").display(),
        tmp.path().join("similarity.tsv").display(),
        tmp.path().join("documents.tsv").display(),
        tmp.path().join("annotations.tsv").display(),
        tmp.path().join("tree.tsv").display(),
        tmp.path().join("categories.tsv").display(),
        out.display(),
    );
    fs::write(&cfg, text).unwrap();

    let run = scimap(&[
        "run",
        "--config",
        &cfg.display().to_string(),
        "--sweep-count",
        "8",
    ]);
    assert!(
        run.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    // The override wins: 8 sweep values per network.
    let solutions = fs::read_to_string(out.join("solutions.csv")).unwrap();
    let pure_rows = solutions
        .lines()
        .filter(|l| l.starts_with("pure\t"))
        .count();
    assert_eq!(pure_rows, 8);
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"sweep_count\": 8"));
}

#[test]
fn ingest_errors_are_stage_tagged_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture(tmp.path());
    let out = tmp.path().join("out");

    // Malformed similarity row (2 fields where 3 expected).
    fs::write(
        tmp.path().join("similarity.tsv"),
        "doc_a\tdoc_b\tscore\nd01\td02\t0.9\nd01\td03\n",
    )
    .unwrap();
    let mut args = vec!["run".to_string()];
    args.extend(run_args(tmp.path(), &out));
    let run = scimap(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(!run.status.success());
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stderr.contains("[ingest]"), "{stderr}");
    assert!(stderr.contains("line 3"), "{stderr}");
    assert!(stderr.contains("expected 3 fields"), "{stderr}");
    assert!(!out.join("solutions.csv").exists(), "no partial outputs");

    // Dangling annotation reference.
    write_fixture(tmp.path());
    fs::write(
        tmp.path().join("annotations.tsv"),
        "document_id\tterm_id\nd01\tm-x1\nghost\tm-x1\n",
    )
    .unwrap();
    let mut args = vec!["run".to_string()];
    args.extend(run_args(tmp.path(), &out));
    let run = scimap(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(!run.status.success());
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stderr.contains("unknown documents"), "{stderr}");
    assert!(stderr.contains("ghost"), "{stderr}");
}

#[test]
fn synth_subcommand_emits_a_runnable_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("input");
    let synth = scimap(&[
        "synth",
        "--out",
        &input.display().to_string(),
        "--topics",
        "2",
        "--docs-per-topic",
        "30",
        "--elements",
        "40",
        "--p-in",
        "0.9",
        "--p-out",
        "0.05",
        "--links-per-element",
        "3",
        "--similarity-mode",
        "aligned",
        "--seed",
        "3",
    ]);
    assert!(
        synth.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&synth.stderr)
    );
    assert!(input.join("manifest.json").exists());

    let out = tmp.path().join("out");
    let run = scimap(&[
        "run",
        "--links",
        &input.join("links.tsv").display().to_string(),
        "--similarity",
        &input.join("similarity.tsv").display().to_string(),
        "--documents",
        &input.join("documents.tsv").display().to_string(),
        "--annotations",
        &input.join("annotations.tsv").display().to_string(),
        "--tree",
        &input.join("tree.tsv").display().to_string(),
        "--categories",
        &input.join("categories.tsv").display().to_string(),
        "--output",
        &out.display().to_string(),
        "--bin-base",
        "10",
        "--min-per-bin",
        "1",
        "--sweep-count",
        "10",
        "--coverages",
        "0.5",
    ]);
    assert!(
        run.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(out.join("summary.csv").exists());
}
