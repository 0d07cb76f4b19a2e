//! End-to-end tests of the command line interface: exit codes, output
//! formats, and determinism.

mod common;

use std::fs;

use common::{check_dot, fixtures_dir, ingest_fixture, run, run_ok};
use tempfile::TempDir;

#[test]
fn ingest_prints_stats_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let archive = dir.path().join("g.kg");
    let facts = fixtures_dir().join("facts.csv");
    let ontology = fixtures_dir().join("ontology.txt");
    let out = run(&[
        "ingest",
        "--facts",
        facts.to_str().unwrap(),
        "--ontology",
        ontology.to_str().unwrap(),
        "--strict",
        "--closure",
        "--out",
        archive.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("entities: 16"), "{stdout}");
    assert!(stdout.contains("asserted facts: 10"), "{stdout}");
    assert!(stdout.contains("derived facts: 2"), "{stdout}");
    assert!(archive.exists());
}

#[test]
fn malformed_row_exits_one_with_line_number() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "subject,predicate,object,episode,timestamp,revealed_by\nA,r,B\n,missing,C\n",
    )
    .unwrap();
    let out = run(&[
        "ingest",
        "--facts",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("g.kg").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn missing_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "ingest",
        "--facts",
        "/nonexistent/facts.csv",
        "--out",
        dir.path().join("g.kg").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_dim_embed_exits_one() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let out = run(&[
        "embed",
        "--archive",
        archive.to_str().unwrap(),
        "--dim",
        "0",
        "--out",
        dir.path().join("m.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn query_by_subject_and_full_listing() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &["--closure"]);
    let stdout = run_ok(&[
        "query",
        "--archive",
        archive.to_str().unwrap(),
        "--subject",
        "Veronica_Mars",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("Veronica_Mars child_of Keith_Mars"));
    assert!(lines[1].starts_with("Veronica_Mars friend_of Lilly_Kane"));

    let all = run_ok(&["query", "--archive", archive.to_str().unwrap()]);
    assert_eq!(all.lines().count(), 12); // 10 asserted + 2 derived

    let none = run_ok(&[
        "query",
        "--archive",
        archive.to_str().unwrap(),
        "--subject",
        "Nonexistent_Person",
    ]);
    assert!(none.is_empty());
}

#[test]
fn export_dot_passes_a_grammar_check() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &["--closure"]);
    let dot = run_ok(&["export", "--archive", archive.to_str().unwrap(), "--dot"]);
    check_dot(&dot).unwrap_or_else(|e| panic!("bad DOT: {e}\n{dot}"));
    assert!(dot.contains("\"Lilly_Kane's_room\""));
}

#[test]
fn export_ntriples_matches_fact_count() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &["--closure"]);
    let nt = run_ok(&[
        "export",
        "--archive",
        archive.to_str().unwrap(),
        "--ntriples",
    ]);
    assert_eq!(nt.lines().count(), 12);
    assert!(nt.lines().all(|l| l.ends_with(" .")));
}

#[test]
fn subgraph_keeps_subject_facts_only() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let dot = run_ok(&[
        "subgraph",
        "--archive",
        archive.to_str().unwrap(),
        "--character",
        "Wanda_Varner",
    ]);
    check_dot(&dot).unwrap();
    assert!(dot.contains("runs_for"));
    assert!(
        !dot.contains("threatens"),
        "object-position fact kept: {dot}"
    );

    let both = run_ok(&[
        "subgraph",
        "--archive",
        archive.to_str().unwrap(),
        "--character",
        "Wanda_Varner",
        "--include-object-facts",
    ]);
    assert!(both.contains("threatens"));

    let missing = run(&[
        "subgraph",
        "--archive",
        archive.to_str().unwrap(),
        "--character",
        "Nobody",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn reify_then_query_and_suppress_temporal() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let reified = dir.path().join("reified.kg");
    run_ok(&[
        "reify",
        "--archive",
        archive.to_str().unwrap(),
        "--subject",
        "white_sneakers",
        "--predicate",
        "seen_at",
        "--object",
        "Lilly_Kane's_room",
        "--occurs-at",
        "E06",
        "--revealed-by",
        "Veronica_Mars",
        "--out",
        reified.to_str().unwrap(),
    ]);
    let occurs = run_ok(&[
        "query",
        "--archive",
        reified.to_str().unwrap(),
        "--predicate",
        "occurs_at",
    ]);
    assert_eq!(occurs.lines().count(), 1);
    assert!(occurs.contains("E06"));

    let plain = run_ok(&["export", "--archive", reified.to_str().unwrap(), "--dot"]);
    assert!(plain.contains("E06"));
    let suppressed = run_ok(&[
        "export",
        "--archive",
        reified.to_str().unwrap(),
        "--dot",
        "--suppress-temporal",
    ]);
    check_dot(&suppressed).unwrap();
    assert!(!suppressed.contains("E06"));
    assert!(!suppressed.contains("occurs_at"));
}

#[test]
fn reify_annotated_covers_episode_facts() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let reified = dir.path().join("annotated.kg");
    let stdout = run_ok(&[
        "reify",
        "--archive",
        archive.to_str().unwrap(),
        "--annotated",
        "--out",
        reified.to_str().unwrap(),
    ]);
    // 6 fixture facts carry an episode annotation.
    assert!(stdout.contains("reified 6 statement(s)"), "{stdout}");
    let occurs = run_ok(&[
        "query",
        "--archive",
        reified.to_str().unwrap(),
        "--predicate",
        "occurs_at",
    ]);
    assert_eq!(occurs.lines().count(), 6);
    assert!(occurs.contains("E01") && occurs.contains("E06"));
}

#[test]
fn topics_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let mut outputs = Vec::new();
    for run_idx in 0..2 {
        let topics = dir.path().join(format!("topics{run_idx}.csv"));
        let corpus = dir.path().join(format!("corpus{run_idx}.txt"));
        run_ok(&[
            "topics",
            "--archive",
            archive.to_str().unwrap(),
            "--n",
            "200",
            "--len",
            "20",
            "--topics",
            "5",
            "--seed",
            "7",
            "--out",
            topics.to_str().unwrap(),
            "--corpus-out",
            corpus.to_str().unwrap(),
        ]);
        outputs.push((fs::read(&topics).unwrap(), fs::read(&corpus).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}

#[test]
fn eval_prints_metrics_on_a_splittable_graph() {
    let dir = TempDir::new().unwrap();
    // A single chain relation repeated 12 times splits cleanly.
    let facts = dir.path().join("chain.csv");
    let mut csv = String::from("subject,predicate,object,episode,timestamp,revealed_by\n");
    for i in 0..12 {
        csv.push_str(&format!("E{i},next,E{},,,\n", i + 1));
    }
    fs::write(&facts, csv).unwrap();
    let archive = dir.path().join("chain.kg");
    run_ok(&[
        "ingest",
        "--facts",
        facts.to_str().unwrap(),
        "--out",
        archive.to_str().unwrap(),
    ]);
    let report = dir.path().join("report.csv");
    let stdout = run_ok(&[
        "eval",
        "--archive",
        archive.to_str().unwrap(),
        "--split",
        "0.75",
        "--seed",
        "7",
        "--dim",
        "16",
        "--epochs",
        "50",
        "--out",
        report.to_str().unwrap(),
    ]);
    for needle in ["hits@1", "hits@3", "hits@10", "MRR", "test facts"] {
        assert!(stdout.contains(needle), "missing {needle}:\n{stdout}");
    }
    let csv_text = fs::read_to_string(&report).unwrap();
    assert!(csv_text.contains("metric,value"));
    assert!(csv_text.contains("mrr,"));
}

#[test]
fn corrupt_archive_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.kg");
    fs::write(&bad, "definitely not an archive\n").unwrap();
    let out = run(&["query", "--archive", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn query_asserted_only_hides_derived_facts() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &["--closure"]);
    let all = run_ok(&["query", "--archive", archive.to_str().unwrap()]);
    let asserted = run_ok(&[
        "query",
        "--archive",
        archive.to_str().unwrap(),
        "--asserted-only",
    ]);
    assert_eq!(all.lines().count(), 12);
    assert_eq!(asserted.lines().count(), 10);
    assert!(!asserted.contains("derived"));
}

#[test]
fn embed_accepts_a_key_value_config_file() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let config = dir.path().join("train.conf");
    fs::write(
        &config,
        "# training settings\ndim = 16\nepochs = 3\nseed = 11\nloss = hinge\n",
    )
    .unwrap();
    let from_file = dir.path().join("a.csv");
    run_ok(&[
        "embed",
        "--archive",
        archive.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        from_file.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&from_file).unwrap();
    assert!(text.contains("dim=16 epochs=3"), "config file ignored");
    assert!(text.contains("seed=11"));

    // Explicit flags override the file.
    let overridden = dir.path().join("b.csv");
    run_ok(&[
        "embed",
        "--archive",
        archive.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--dim",
        "8",
        "--out",
        overridden.to_str().unwrap(),
    ]);
    assert!(fs::read_to_string(&overridden)
        .unwrap()
        .contains("dim=8 epochs=3"));

    // Unknown keys are rejected.
    fs::write(&config, "bogus = 1\n").unwrap();
    let out = run(&[
        "embed",
        "--archive",
        archive.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn predict_typed_candidates_shrink_the_pool() {
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let model = dir.path().join("model.csv");
    run_ok(&[
        "embed",
        "--archive",
        archive.to_str().unwrap(),
        "--dim",
        "16",
        "--epochs",
        "20",
        "--out",
        model.to_str().unwrap(),
    ]);
    let untyped = run_ok(&[
        "predict",
        "--archive",
        archive.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--triple",
        "Don_Lamb,employee_of,Keith_Mars",
    ]);
    assert!(untyped.contains("/16"), "{untyped}");

    // employee_of has range Person: only the 9 typed Person entities remain.
    let typed = run_ok(&[
        "predict",
        "--archive",
        archive.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--triple",
        "Don_Lamb,employee_of,Keith_Mars",
        "--typed-candidates",
    ]);
    assert!(typed.contains("/9"), "{typed}");
}

#[test]
fn eval_on_the_fixture_reports_the_split_constraint() {
    // Every fixture relation occurs exactly once, so no test fact can have
    // its relation covered by train; the split must refuse with the
    // achievable fraction.
    let dir = TempDir::new().unwrap();
    let archive = ingest_fixture(dir.path(), &[]);
    let out = run(&[
        "eval",
        "--archive",
        archive.to_str().unwrap(),
        "--split",
        "0.9",
        "--dim",
        "16",
        "--epochs",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("achievable"), "{stderr}");
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for sub in [
        "ingest", "query", "subgraph", "export", "reify", "embed", "project", "topics", "predict",
        "eval",
    ] {
        assert!(stdout.contains(sub), "missing {sub} in help");
    }
}

#[test]
fn unknown_flag_exits_one() {
    let out = run(&["ingest", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}
