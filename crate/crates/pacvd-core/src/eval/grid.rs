//! Experiment orchestration across (abstraction level x prompt strategy)
//! cells, with a resumable on-disk verdict cache keyed by sample, cell,
//! provider and prompt hash. Cells fail independently; metric reduction is
//! a deterministic fold over sample order, whatever the completion order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::context::{build_context, ContextKind};
use super::dataset::SampleRecord;
use super::metrics::{score, ConfusionMatrix, MetricsReport, Prediction};
use super::EvalError;
use crate::abstraction::{AbstractionLevel, EngineOptions};
use crate::catalog::ApiCatalog;
use crate::gateway::{ChatMessage, Gateway, VerdictLabel};
use crate::prompt::{build_prompt, BuildContext, ExemplarRecord, ExemplarStore, PromptStrategy};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub levels: Vec<AbstractionLevel>,
    pub strategies: Vec<PromptStrategy>,
    pub context: ContextKind,
    pub seed: u64,
    /// Few-shot exemplar count; strategy default when absent.
    pub k: Option<usize>,
    pub depth: usize,
    pub path_cap: usize,
    pub include_fuzzy_at_a2: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub resume: bool,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            levels: vec![AbstractionLevel::A3],
            strategies: vec![PromptStrategy::BasicPrompt],
            context: ContextKind::PacVd,
            seed: 0,
            k: None,
            depth: crate::abstraction::DEFAULT_DEPTH_LIMIT,
            path_cap: crate::abstraction::DEFAULT_PATH_CAP,
            include_fuzzy_at_a2: false,
            out_dir: PathBuf::from("eval-run"),
            resume: false,
            workers: 1,
        }
    }
}

impl RunConfig {
    fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            depth_limit: self.depth,
            path_cap: self.path_cap,
            include_fuzzy_at_a2: self.include_fuzzy_at_a2,
        }
    }

    /// Cell axis: levels for the abstraction context, the single baseline
    /// label otherwise.
    fn level_labels(&self) -> Vec<String> {
        match self.context {
            ContextKind::PacVd => self.levels.iter().map(|l| l.to_string()).collect(),
            other => vec![other.as_str().to_string()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub level: String,
    pub strategy: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    /// Per-sample failures (gateway errors, missing exemplars); the cell
    /// still scores over the samples that completed.
    pub errors: Vec<String>,
    #[serde(skip)]
    pub cache_hits: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRun {
    pub config: RunConfig,
    pub provider_id: String,
    pub sample_count: usize,
    pub cells: Vec<CellResult>,
}

/// One persisted verdict: the cache entry and the audit transcript in one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictCacheEntry {
    pub sample_id: String,
    pub level: String,
    pub strategy: String,
    pub provider_id: String,
    pub prompt_hash: String,
    pub verdict: VerdictLabel,
    pub raw: String,
    pub dialogue: Vec<ChatMessage>,
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

fn prompt_hash(turns_json: &str) -> String {
    let digest = Sha256::digest(turns_json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct SampleOutcome {
    prediction: Option<Prediction>,
    error: Option<String>,
    cache_hit: bool,
}

pub fn run_grid(
    samples: &[SampleRecord],
    config: &RunConfig,
    catalog: &ApiCatalog,
    gateway: &Gateway,
) -> Result<EvalRun, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if config.strategies.is_empty() {
        return Err(EvalError::EmptyGrid("no prompt strategies".to_string()));
    }
    let level_labels = config.level_labels();
    if level_labels.is_empty() {
        return Err(EvalError::EmptyGrid("no abstraction levels".to_string()));
    }
    let verdict_dir = config.out_dir.join("verdicts");
    std::fs::create_dir_all(&verdict_dir)?;
    let opts = config.engine_options();
    let provider_id = gateway.config().provider_id();

    // contexts and exemplar stores per level label, computed up front so the
    // parallel section only prompts and dispatches
    let mut contexts: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut stores: BTreeMap<String, ExemplarStore> = BTreeMap::new();
    for label in &level_labels {
        let strategy = context_strategy(config, label);
        let mut records = Vec::new();
        for s in samples {
            let ctx = build_context(s, strategy, catalog, config.seed, &opts);
            contexts.insert((label.clone(), s.id.clone()), ctx.text.clone());
            records.push(ExemplarRecord {
                id: s.id.clone(),
                code: s.target_code.clone(),
                api_text: ctx.text,
                label: s.label.is_vulnerable(),
                before_fix: s.fixed_code.as_ref().map(|_| s.target_code.clone()),
                after_fix: s.fixed_code.clone(),
            });
        }
        stores.insert(label.clone(), ExemplarStore::new(records));
    }

    let mut cells = Vec::new();
    for label in &level_labels {
        for strategy in &config.strategies {
            let store = &stores[label];
            let outcomes = run_cell_samples(
                samples,
                config,
                gateway,
                &verdict_dir,
                label,
                *strategy,
                store,
                &contexts,
                &provider_id,
            );
            let mut predictions = Vec::new();
            let mut errors = Vec::new();
            let mut cache_hits = 0usize;
            for (s, outcome) in samples.iter().zip(outcomes) {
                if let Some(p) = outcome.prediction {
                    predictions.push(p);
                }
                if let Some(e) = outcome.error {
                    errors.push(format!("{}: {}", s.id, e));
                }
                cache_hits += usize::from(outcome.cache_hit);
            }
            let (confusion, metrics) = if predictions.is_empty() {
                (ConfusionMatrix::default(), ConfusionMatrix::default().metrics())
            } else {
                score(&predictions)?
            };
            cells.push(CellResult {
                level: label.clone(),
                strategy: strategy.to_string(),
                confusion,
                metrics,
                errors,
                cache_hits,
            });
        }
    }

    let run = EvalRun {
        config: config.clone(),
        provider_id,
        sample_count: samples.len(),
        cells,
    };
    let run_json = serde_json::to_string_pretty(&run).expect("run serializes");
    atomic_write(&config.out_dir.join("run.json"), run_json.as_bytes())?;
    Ok(run)
}

fn context_strategy(config: &RunConfig, label: &str) -> super::context::ContextStrategy {
    match config.context {
        ContextKind::PacVd => {
            let level: AbstractionLevel = label.parse().expect("label came from levels");
            ContextKind::PacVd.with_level(level)
        }
        other => other.with_level(AbstractionLevel::A1),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_cell_samples(
    samples: &[SampleRecord],
    config: &RunConfig,
    gateway: &Gateway,
    verdict_dir: &Path,
    label: &str,
    strategy: PromptStrategy,
    store: &ExemplarStore,
    contexts: &BTreeMap<(String, String), String>,
    provider_id: &str,
) -> Vec<SampleOutcome> {
    let slots: Vec<Mutex<Option<SampleOutcome>>> =
        samples.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = config.workers.max(1).min(samples.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= samples.len() {
                    break;
                }
                let outcome = evaluate_sample(
                    &samples[i],
                    config,
                    gateway,
                    verdict_dir,
                    label,
                    strategy,
                    store,
                    contexts,
                    provider_id,
                    i,
                );
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every slot visited"))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn evaluate_sample(
    sample: &SampleRecord,
    config: &RunConfig,
    gateway: &Gateway,
    verdict_dir: &Path,
    label: &str,
    strategy: PromptStrategy,
    store: &ExemplarStore,
    contexts: &BTreeMap<(String, String), String>,
    provider_id: &str,
    ordinal: usize,
) -> SampleOutcome {
    let api_text = contexts
        .get(&(label.to_string(), sample.id.clone()))
        .cloned()
        .unwrap_or_default();
    let bundle = match build_prompt(
        strategy,
        &sample.target_code,
        &BuildContext {
            api_text: &api_text,
            store: Some(store),
            seed: Some(config.seed),
            k: config.k,
            exclude_id: Some(&sample.id),
        },
    ) {
        Ok(b) => b,
        Err(e) => {
            return SampleOutcome {
                prediction: None,
                error: Some(e.to_string()),
                cache_hit: false,
            }
        }
    };
    let turns_json = serde_json::to_string(&bundle.turns).expect("turns serialize");
    let hash = prompt_hash(&turns_json);
    let file = verdict_dir.join(format!(
        "{}__{}__{}.json",
        sanitize(label),
        sanitize(&strategy.to_string()),
        sanitize(&sample.id)
    ));

    if config.resume {
        if let Ok(text) = std::fs::read_to_string(&file) {
            if let Ok(entry) = serde_json::from_str::<VerdictCacheEntry>(&text) {
                if entry.prompt_hash == hash && entry.provider_id == provider_id {
                    return SampleOutcome {
                        prediction: Some(Prediction {
                            label: sample.label,
                            verdict: entry.verdict,
                            cwe: sample.cwe.clone(),
                        }),
                        error: None,
                        cache_hit: true,
                    };
                }
            }
        }
    }

    match gateway.complete(&bundle) {
        Ok(verdict) => {
            let entry = VerdictCacheEntry {
                sample_id: sample.id.clone(),
                level: label.to_string(),
                strategy: strategy.to_string(),
                provider_id: provider_id.to_string(),
                prompt_hash: hash,
                verdict: verdict.label,
                raw: verdict.raw.clone(),
                dialogue: verdict.turns.clone(),
            };
            let text = serde_json::to_string_pretty(&entry).expect("entry serializes");
            if let Err(e) = atomic_write_indexed(&file, text.as_bytes(), ordinal) {
                return SampleOutcome {
                    prediction: None,
                    error: Some(format!("cache write failed: {e}")),
                    cache_hit: false,
                };
            }
            SampleOutcome {
                prediction: Some(Prediction {
                    label: sample.label,
                    verdict: verdict.label,
                    cwe: sample.cwe.clone(),
                }),
                error: None,
                cache_hit: false,
            }
        }
        Err(e) => SampleOutcome {
            prediction: None,
            error: Some(e.to_string()),
            cache_hit: false,
        },
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    atomic_write_indexed(path, bytes, 0)
}

fn atomic_write_indexed(path: &Path, bytes: &[u8], ordinal: usize) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp{ordinal}"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

/// Plain-text table with one row per grid cell.
pub fn format_table(run: &EvalRun) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<22} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>12}\n",
        "level", "strategy", "n", "accuracy", "precision", "recall", "f1", "mcc", "unparseable"
    ));
    for cell in &run.cells {
        out.push_str(&format!(
            "{:<12} {:<22} {:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>12}\n",
            cell.level,
            cell.strategy,
            cell.confusion.total(),
            cell.metrics.accuracy,
            cell.metrics.precision,
            cell.metrics.recall,
            cell.metrics.f1,
            cell.metrics.mcc,
            cell.confusion.unparseable,
        ));
    }
    out
}
