//! End-to-end pipeline tests over the bundled two-sample dataset: a
//! double-free target whose guarded release shows up as a "some branches"
//! line, and a leak-free variant with balanced malloc/free.

use pacvd_core::catalog::default_catalog;
use pacvd_core::eval::{
    format_table, load_dataset, run_grid, ContextKind, RunConfig,
};
use pacvd_core::gateway::{Gateway, MockScript};
use pacvd_core::prompt::PromptStrategy;

fn dataset_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/dataset/two_samples.jsonl")
}

fn mock_rule_gateway() -> Gateway {
    Gateway::mock(MockScript::YesIfContains(
        "On some branches, the \"free\"".to_string(),
    ))
}

#[test]
fn mock_rule_grid_is_perfect_and_deterministic() {
    let samples = load_dataset(&dataset_path()).unwrap();
    assert_eq!(samples.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        levels: vec![pacvd_core::abstraction::AbstractionLevel::A1],
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let gateway = mock_rule_gateway();
    let run = run_grid(&samples, &config, &default_catalog(), &gateway).unwrap();
    assert_eq!(run.cells.len(), 1);
    let cell = &run.cells[0];
    assert!(cell.errors.is_empty(), "{:?}", cell.errors);
    assert_eq!(cell.confusion.true_positives, 1);
    assert_eq!(cell.confusion.true_negatives, 1);
    assert_eq!(cell.confusion.false_positives, 0);
    assert_eq!(cell.confusion.false_negatives, 0);
    assert_eq!(cell.metrics.f1, 1.0);
    assert_eq!(cell.metrics.mcc, 1.0);

    // repeated fresh run produces byte-identical run.json
    let dir2 = tempfile::tempdir().unwrap();
    let config2 = RunConfig {
        levels: vec![pacvd_core::abstraction::AbstractionLevel::A1],
        out_dir: dir2.path().to_path_buf(),
        ..RunConfig::default()
    };
    let gateway2 = mock_rule_gateway();
    run_grid(&samples, &config2, &default_catalog(), &gateway2).unwrap();
    let a = std::fs::read(dir.path().join("run.json")).unwrap();
    let b = std::fs::read(dir2.path().join("run.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn resume_reuses_the_verdict_cache_without_dispatching() {
    let samples = load_dataset(&dataset_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let gateway = mock_rule_gateway();
    let first = run_grid(&samples, &config, &default_catalog(), &gateway).unwrap();
    let calls_after_first = gateway.dispatch_count();
    assert!(calls_after_first > 0);
    let first_json = std::fs::read(dir.path().join("run.json")).unwrap();

    let resumed_config = RunConfig {
        resume: true,
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let second = run_grid(&samples, &resumed_config, &default_catalog(), &gateway).unwrap();
    assert_eq!(
        gateway.dispatch_count(),
        calls_after_first,
        "resume must not call the provider"
    );
    assert_eq!(second.cells[0].cache_hits, samples.len());
    assert_eq!(second.cells[0].confusion, first.cells[0].confusion);
    let second_json = std::fs::read(dir.path().join("run.json")).unwrap();
    assert_eq!(first_json, second_json, "resume output must be byte-identical");
}

#[test]
fn empty_strategy_set_errors_before_dispatch() {
    let samples = load_dataset(&dataset_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        strategies: Vec::new(),
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let gateway = mock_rule_gateway();
    let err = run_grid(&samples, &config, &default_catalog(), &gateway).unwrap_err();
    assert!(err.to_string().contains("empty"));
    assert_eq!(gateway.dispatch_count(), 0);
}

#[test]
fn grid_runs_across_levels_strategies_and_workers() {
    use pacvd_core::abstraction::AbstractionLevel;
    let samples = load_dataset(&dataset_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        levels: vec![AbstractionLevel::A1, AbstractionLevel::A3],
        strategies: vec![
            PromptStrategy::BasicPrompt,
            PromptStrategy::RolePlaying,
            PromptStrategy::ChainOfThought,
            PromptStrategy::InContext,
            PromptStrategy::FewShotRandom,
            PromptStrategy::FewShotContrastive,
        ],
        workers: 4,
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let gateway = mock_rule_gateway();
    let run = run_grid(&samples, &config, &default_catalog(), &gateway).unwrap();
    assert_eq!(run.cells.len(), 12);
    // contrastive has one paired record; excluding the sample under test
    // leaves zero for the vulnerable sample itself
    let contrastive_errors: usize = run
        .cells
        .iter()
        .filter(|c| c.strategy == "few-shot-contrastive")
        .map(|c| c.errors.len())
        .sum();
    assert!(contrastive_errors > 0, "leakage guard must bite here");
    // every other cell is clean and perfect under the rule mock at A1;
    // at A3 there are no fuzzy lines, so the rule answers "no" everywhere
    for cell in run.cells.iter().filter(|c| c.strategy == "basic") {
        match cell.level.as_str() {
            "A1" => {
                assert_eq!(cell.confusion.true_positives, 1);
                assert_eq!(cell.confusion.true_negatives, 1);
            }
            "A3" => {
                assert_eq!(cell.confusion.false_negatives, 1);
                assert_eq!(cell.confusion.true_negatives, 1);
            }
            other => panic!("unexpected level {other}"),
        }
    }
    let table = format_table(&run);
    assert!(table.contains("accuracy"));
    assert!(table.lines().count() >= 13);
}

#[test]
fn baseline_contexts_flow_through_the_grid() {
    let samples = load_dataset(&dataset_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        context: ContextKind::AllCallees,
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    // raw-code context carries the guarded free() call textually, so match
    // on the guard interior instead of the abstraction sentence
    let gateway = Gateway::mock(MockScript::YesIfContains(
        "srp->rq->cmd != srp->rq->__cmd".to_string(),
    ));
    let run = run_grid(&samples, &config, &default_catalog(), &gateway).unwrap();
    assert_eq!(run.cells.len(), 1);
    assert_eq!(run.cells[0].level, "all-callees");
    assert_eq!(run.cells[0].confusion.true_positives, 1);
    assert_eq!(run.cells[0].confusion.true_negatives, 1);
}
