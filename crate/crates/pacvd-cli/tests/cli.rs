//! End-to-end tests of the `pacvd` binary: help snapshot, exit codes, and
//! the detect/eval flows against the mock provider.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pacvd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pacvd"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../pacvd-core/fixtures")
}

fn listing1_paths() -> Vec<String> {
    ["sg.c", "block.c"]
        .iter()
        .map(|f| fixtures().join("listing1").join(f).display().to_string())
        .collect()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

const MAIN_HELP: &str = "\
Primitive-API abstraction and context-enhanced vulnerability detection

Usage: pacvd <COMMAND>

Commands:
  catalog   Print and validate the primitive-API catalog
  abstract  Abstract a target function's callees into an API usage report
  prompt    Preview the prompt a strategy would send, without dispatching
  detect    Run one detection dialogue and print the verdict
  eval      Evaluate a dataset across abstraction levels and prompt strategies
  help      Print this message or the help of the given subcommand(s)

Options:
  -h, --help     Print help
  -V, --version  Print version
";

#[test]
fn help_snapshot_and_flag_inventory() {
    let out = pacvd().arg("--help").output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out), MAIN_HELP);

    let inventory: &[(&str, &[&str])] = &[
        ("catalog", &["--catalog", "--lint", "--format"]),
        (
            "abstract",
            &[
                "--target",
                "--level",
                "--depth",
                "--catalog",
                "--path-cap",
                "--include-fuzzy-at-a2",
                "--format",
                "--out",
                "--dump-graphs",
            ],
        ),
        (
            "prompt",
            &[
                "--target", "--level", "--depth", "--catalog", "--path-cap",
                "--include-fuzzy-at-a2", "--strategy", "--exemplars", "--seed", "--k",
                "--no-api", "--format",
            ],
        ),
        (
            "detect",
            &[
                "--target", "--level", "--depth", "--catalog", "--path-cap",
                "--include-fuzzy-at-a2", "--strategy", "--exemplars", "--seed", "--k",
                "--no-api", "--provider-config", "--provider", "--out",
            ],
        ),
        (
            "eval",
            &[
                "--dataset", "--levels", "--strategies", "--context", "--depth",
                "--catalog", "--seed", "--k", "--provider-config", "--provider",
                "--out", "--resume", "--workers",
            ],
        ),
    ];
    for (sub, flags) in inventory {
        let out = pacvd().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success());
        let text = stdout(&out);
        for flag in *flags {
            assert!(text.contains(flag), "{sub} help is missing {flag}");
        }
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = pacvd()
        .args(["abstract", "--definitely-not-a-flag"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn abstract_reproduces_the_fuzzy_report() {
    let mut args = vec!["abstract".to_string()];
    args.extend(listing1_paths());
    args.extend(
        ["--target", "sg_common_write", "--level", "A1", "--depth", "4"]
            .iter()
            .map(|s| s.to_string()),
    );
    let out = pacvd().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("In the \"blk_end_request_all\" function:"));
    assert!(text.contains("On all branches, the \"free\" API is called."));
    assert!(text.contains("On some branches, the \"free\" API is called."));
}

#[test]
fn abstract_json_round_trips_and_dumps_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let graphs_path = dir.path().join("graphs.txt");
    let mut args = vec!["abstract".to_string()];
    args.extend(listing1_paths());
    for s in [
        "--target",
        "sg_common_write",
        "--level",
        "A4",
        "--depth",
        "4",
        "--format",
        "json",
    ] {
        args.push(s.to_string());
    }
    args.push("--out".into());
    args.push(report_path.display().to_string());
    args.push("--dump-graphs".into());
    args.push(graphs_path.display().to_string());
    let out = pacvd().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["target"], "sg_common_write");
    assert_eq!(report["level"], "A4");
    assert!(report["facts"].as_array().unwrap().len() >= 2);

    let graphs = std::fs::read_to_string(&graphs_path).unwrap();
    assert!(graphs.contains("callgraph sg_common_write"));
    assert!(graphs.contains("node mempool_free depth 4"));
    assert!(graphs.contains("cfg sg_finish_rem_req"));
    assert!(graphs.contains("edge"));
}

#[test]
fn missing_target_exits_one_with_diagnostic() {
    let mut args = vec!["abstract".to_string()];
    args.extend(listing1_paths());
    args.push("--target".into());
    args.push("does_not_exist".into());
    let out = pacvd().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("does_not_exist"));
}

#[test]
fn parse_error_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.c");
    std::fs::write(&bad, "int f() { if (x").unwrap();
    let out = pacvd()
        .args([
            "abstract",
            &bad.display().to_string(),
            "--target",
            "f",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("bad.c"), "{err}");
    assert!(err.contains("parse error at 1:"), "{err}");
}

#[test]
fn empty_activity_renders_explicit_line() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("empty.c");
    std::fs::write(&src, "int f(void) { return 0; }").unwrap();
    let out = pacvd()
        .args([
            "abstract",
            &src.display().to_string(),
            "--target",
            "f",
            "--level",
            "A3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("No primitive API activity detected within depth 3."));
}

#[test]
fn detect_prints_verdict_and_writes_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("transcript.json");
    let mut args = vec!["detect".to_string()];
    args.extend(listing1_paths());
    for s in [
        "--target",
        "sg_common_write",
        "--level",
        "A1",
        "--depth",
        "4",
        "--provider",
        "mock:yes-if-contains:On some branches, the \"free\"",
        "--out",
    ] {
        args.push(s.to_string());
    }
    args.push(transcript.display().to_string());
    let out = pacvd().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("yes\n"), "{text}");
    assert!(text.contains("prompt-hash: "));
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&transcript).unwrap()).unwrap();
    assert_eq!(saved["verdict"], "yes");
    assert!(saved["rounds"].as_array().unwrap().len() == 1);

    // replaying the transcript reproduces the verdict without a rule
    let mut replay_args = vec!["detect".to_string()];
    replay_args.extend(listing1_paths());
    for s in [
        "--target",
        "sg_common_write",
        "--level",
        "A1",
        "--depth",
        "4",
        "--provider",
    ] {
        replay_args.push(s.to_string());
    }
    replay_args.push(format!("mock:replay:{}", transcript.display()));
    let replay = pacvd().args(&replay_args).output().unwrap();
    assert_eq!(replay.status.code(), Some(0), "{}", stderr(&replay));
    assert!(stdout(&replay).starts_with("yes\n"));
}

#[test]
fn seeded_few_shot_prompt_hash_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let exemplars = dir.path().join("exemplars.jsonl");
    std::fs::write(
        &exemplars,
        concat!(
            "{\"id\":\"e1\",\"code\":\"void a(void) { free(p); free(p); }\",\"api_text\":\"x\",\"label\":true}\n",
            "{\"id\":\"e2\",\"code\":\"void b(void) { }\",\"api_text\":\"\",\"label\":false}\n",
            "{\"id\":\"e3\",\"code\":\"void c(void) { use(); }\",\"api_text\":\"\",\"label\":false}\n",
        ),
    )
    .unwrap();
    let run = || {
        let mut args = vec!["detect".to_string()];
        args.extend(listing1_paths());
        for s in [
            "--target",
            "sg_common_write",
            "--level",
            "A1",
            "--depth",
            "4",
            "--strategy",
            "few-shot-random",
            "--seed",
            "7",
            "--exemplars",
        ] {
            args.push(s.to_string());
        }
        args.push(exemplars.display().to_string());
        args.push("--provider".into());
        args.push("mock:always:no".into());
        let out = pacvd().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
            .lines()
            .find(|l| l.starts_with("prompt-hash: "))
            .unwrap()
            .to_string()
    };
    assert_eq!(run(), run());
}

#[test]
fn detect_without_credentials_fails_with_auth_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("provider.toml");
    std::fs::write(
        &config,
        "endpoint = \"https://api.example.invalid/v1/chat\"\nmodel = \"m\"\nauth_env = \"PACVD_CLI_TEST_UNSET_TOKEN\"\n",
    )
    .unwrap();
    let mut args = vec!["detect".to_string()];
    args.extend(listing1_paths());
    for s in ["--target", "sg_common_write", "--provider-config"] {
        args.push(s.to_string());
    }
    args.push(config.display().to_string());
    let out = pacvd()
        .args(&args)
        .env_remove("PACVD_CLI_TEST_UNSET_TOKEN")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("PACVD_CLI_TEST_UNSET_TOKEN"));
}

#[test]
fn prompt_no_api_drops_scaffolding() {
    let mut args = vec!["prompt".to_string()];
    args.extend(listing1_paths());
    for s in [
        "--target",
        "sg_common_write",
        "--strategy",
        "chain-of-thought",
        "--no-api",
    ] {
        args.push(s.to_string());
    }
    let out = pacvd().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains("API information"), "{text}");
    assert!(text.contains("locate all positions where pointers"));
}

#[test]
fn eval_table_resume_and_bad_dataset() {
    let dataset = fixtures().join("dataset/two_samples.jsonl");
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let run = |resume: bool| {
        let mut args = vec![
            "eval".to_string(),
            "--dataset".into(),
            dataset.display().to_string(),
            "--levels".into(),
            "A1".into(),
            "--strategies".into(),
            "basic".into(),
            "--provider".into(),
            "mock:yes-if-contains:On some branches, the \"free\"".into(),
            "--out".into(),
            out_dir.display().to_string(),
        ];
        if resume {
            args.push("--resume".into());
        }
        pacvd().args(&args).output().unwrap()
    };
    let first = run(false);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let table = stdout(&first);
    assert!(table.contains("accuracy"));
    assert!(table.contains("1.0000"), "{table}");
    let run_json = std::fs::read(out_dir.join("run.json")).unwrap();
    assert!(out_dir.join("verdicts").read_dir().unwrap().count() == 2);

    let second = run(true);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(stdout(&second), table, "resume table must be identical");
    assert_eq!(std::fs::read(out_dir.join("run.json")).unwrap(), run_json);

    // a broken line reports its number and exits 1
    let bad = dir.path().join("bad.jsonl");
    let good_line = std::fs::read_to_string(&dataset)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    std::fs::write(&bad, format!("{good_line}\nnot json\n")).unwrap();
    let broken = pacvd()
        .args([
            "eval",
            "--dataset",
            &bad.display().to_string(),
            "--provider",
            "mock:always:no",
            "--out",
            &dir.path().join("run2").display().to_string(),
        ])
        .output()
        .unwrap();
    assert_eq!(broken.status.code(), Some(1));
    assert!(stderr(&broken).contains("line 2"), "{}", stderr(&broken));
}

#[test]
fn catalog_prints_and_validates() {
    let out = pacvd().arg("catalog").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("api malloc memory-alloc"));
    assert!(text.contains("pair malloc free"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad-catalog.txt");
    std::fs::write(&bad, "api foo memory-alloc\npair foo bar\n").unwrap();
    let invalid = pacvd()
        .args(["catalog", "--catalog", &bad.display().to_string()])
        .output()
        .unwrap();
    assert_eq!(invalid.status.code(), Some(1));

    let unpaired = dir.path().join("unpaired.txt");
    std::fs::write(&unpaired, "api xfree memory-free\n").unwrap();
    let linted = pacvd()
        .args(["catalog", "--catalog", &unpaired.display().to_string(), "--lint"])
        .output()
        .unwrap();
    assert_eq!(linted.status.code(), Some(0));
    assert!(stderr(&linted).contains("xfree"));
}
