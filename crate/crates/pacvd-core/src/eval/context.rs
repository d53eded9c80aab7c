//! Context builders: the abstraction-based context plus the five raw-code
//! baselines. Raw-code baselines draw from callees within three call
//! layers; selections are deterministic under a seed.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{CalleeRecord, SampleRecord};
use super::similarity::{called_names, Similarity};
use crate::abstraction::{abstract_target, AbstractionLevel, EngineOptions};
use crate::catalog::ApiCatalog;
use crate::frontend::{parse_unit_str, SourceUnit};

/// Raw-code baselines use callees within this many call layers.
pub const BASELINE_DEPTH: usize = 3;
/// Sampling baselines select this many callees.
pub const BASELINE_QUOTA: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextStrategy {
    PacVd(AbstractionLevel),
    AllCallees,
    ApiGuided,
    SimilarityBased,
    RandomSampling,
    HierarchySampling,
}

impl ContextStrategy {
    pub fn label(&self) -> String {
        match self {
            ContextStrategy::PacVd(level) => level.to_string(),
            ContextStrategy::AllCallees => "all-callees".to_string(),
            ContextStrategy::ApiGuided => "api-guided".to_string(),
            ContextStrategy::SimilarityBased => "similarity".to_string(),
            ContextStrategy::RandomSampling => "random".to_string(),
            ContextStrategy::HierarchySampling => "hierarchy".to_string(),
        }
    }
}

/// Context kind without a bound abstraction level; the grid binds levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextKind {
    PacVd,
    AllCallees,
    ApiGuided,
    SimilarityBased,
    RandomSampling,
    HierarchySampling,
}

impl ContextKind {
    pub fn with_level(self, level: AbstractionLevel) -> ContextStrategy {
        match self {
            ContextKind::PacVd => ContextStrategy::PacVd(level),
            ContextKind::AllCallees => ContextStrategy::AllCallees,
            ContextKind::ApiGuided => ContextStrategy::ApiGuided,
            ContextKind::SimilarityBased => ContextStrategy::SimilarityBased,
            ContextKind::RandomSampling => ContextStrategy::RandomSampling,
            ContextKind::HierarchySampling => ContextStrategy::HierarchySampling,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContextKind::PacVd => "pacvd",
            ContextKind::AllCallees => "all-callees",
            ContextKind::ApiGuided => "api-guided",
            ContextKind::SimilarityBased => "similarity",
            ContextKind::RandomSampling => "random",
            ContextKind::HierarchySampling => "hierarchy",
        }
    }
}

impl FromStr for ContextKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pacvd" => Ok(ContextKind::PacVd),
            "all-callees" | "all" => Ok(ContextKind::AllCallees),
            "api-guided" | "api" => Ok(ContextKind::ApiGuided),
            "similarity" | "similarity-based" => Ok(ContextKind::SimilarityBased),
            "random" | "random-sampling" => Ok(ContextKind::RandomSampling),
            "hierarchy" | "hierarchy-sampling" => Ok(ContextKind::HierarchySampling),
            other => Err(format!("unknown context strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextResult {
    pub text: String,
    /// Selected callee names, in emission order (empty for the abstraction
    /// context).
    pub selected: Vec<String>,
    /// Set when a sampling strategy had fewer candidates than its quota, or
    /// when analysis degraded.
    pub flagged: bool,
}

fn retained(sample: &SampleRecord) -> Vec<&CalleeRecord> {
    let mut kept: Vec<&CalleeRecord> = sample
        .callees
        .iter()
        .filter(|c| c.depth <= BASELINE_DEPTH)
        .collect();
    kept.sort_by(|a, b| (a.depth, &a.name).cmp(&(b.depth, &b.name)));
    kept
}

fn emit(selected: Vec<&CalleeRecord>, flagged: bool) -> ContextResult {
    let names = selected.iter().map(|c| c.name.clone()).collect();
    let text = selected
        .iter()
        .map(|c| c.code.as_str())
        .collect::<Vec<_>>()
        .join("\n\n");
    ContextResult {
        text,
        selected: names,
        flagged,
    }
}

/// Parse target and callee codes into units for the abstraction pipeline.
pub fn sample_units(sample: &SampleRecord) -> Vec<SourceUnit> {
    let mut units = Vec::new();
    if let Ok(u) = parse_unit_str(&format!("{}:target", sample.id), &sample.target_code) {
        units.push(u);
    }
    for c in &sample.callees {
        if let Ok(u) = parse_unit_str(&format!("{}:{}", sample.id, c.name), &c.code) {
            // a callee body may redefine something already parsed; the
            // function index takes the first definition, so order is stable
            units.push(u);
        }
    }
    units
}

pub fn build_context(
    sample: &SampleRecord,
    strategy: ContextStrategy,
    catalog: &ApiCatalog,
    seed: u64,
    opts: &EngineOptions,
) -> ContextResult {
    build_context_with_quota(sample, strategy, catalog, seed, opts, BASELINE_QUOTA)
}

pub fn build_context_with_quota(
    sample: &SampleRecord,
    strategy: ContextStrategy,
    catalog: &ApiCatalog,
    seed: u64,
    opts: &EngineOptions,
    quota: usize,
) -> ContextResult {
    let quota = quota.max(1);
    match strategy {
        ContextStrategy::PacVd(level) => {
            let units = sample_units(sample);
            match abstract_target(&units, &sample.target_name, catalog, level, opts) {
                Ok(report) => ContextResult {
                    text: report.rendered,
                    selected: Vec::new(),
                    flagged: report.overflow_fallback_used,
                },
                Err(_) => ContextResult {
                    text: "(static analysis unavailable for this sample)".to_string(),
                    selected: Vec::new(),
                    flagged: true,
                },
            }
        }
        ContextStrategy::AllCallees => {
            let kept = retained(sample);
            let flagged = kept.is_empty();
            emit(kept, flagged)
        }
        ContextStrategy::ApiGuided => {
            let kept = retained(sample);
            // closure of called names within the retained set
            let mut calls: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
            for c in &kept {
                calls.insert(&c.name, called_names(&c.code));
            }
            let retained_names: BTreeSet<&str> = kept.iter().map(|c| c.name.as_str()).collect();
            let mut reach: BTreeMap<&str, BTreeSet<String>> = calls.clone();
            loop {
                let mut changed = false;
                for name in retained_names.iter().copied().collect::<Vec<_>>() {
                    let callees: Vec<String> = reach[name]
                        .iter()
                        .filter(|n| retained_names.contains(n.as_str()))
                        .cloned()
                        .collect();
                    for callee in callees {
                        let add: Vec<String> = reach[callee.as_str()]
                            .iter()
                            .filter(|n| !reach[name].contains(*n))
                            .cloned()
                            .collect();
                        if !add.is_empty() {
                            let set = reach.get_mut(name).expect("present");
                            set.extend(add);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let selected: Vec<&CalleeRecord> = kept
                .iter()
                .filter(|c| {
                    reach[c.name.as_str()]
                        .iter()
                        .any(|n| catalog.lookup(n).is_some())
                })
                .copied()
                .collect();
            let flagged = selected.is_empty();
            emit(selected, flagged)
        }
        ContextStrategy::SimilarityBased => {
            let kept = retained(sample);
            if kept.len() <= quota {
                let flagged = kept.len() < quota;
                return emit(kept, flagged);
            }
            let sim = Similarity::new(kept.iter().map(|c| c.code.clone()).collect());
            let mut scored: Vec<(usize, f64)> = (0..kept.len())
                .map(|i| (i, sim.score(&sample.target_code, i)))
                .collect();
            scored.sort_by(|(ia, sa), (ib, sb)| {
                sb.partial_cmp(sa)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| kept[*ia].name.cmp(&kept[*ib].name))
            });
            let mut pick: Vec<usize> = scored
                .into_iter()
                .take(quota)
                .map(|(i, _)| i)
                .collect();
            pick.sort(); // back to (depth, name) order
            emit(pick.into_iter().map(|i| kept[i]).collect(), false)
        }
        ContextStrategy::RandomSampling => {
            let kept = retained(sample);
            if kept.len() <= quota {
                let flagged = kept.len() < quota;
                return emit(kept, flagged);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pick: Vec<usize> =
                rand::seq::index::sample(&mut rng, kept.len(), quota).into_vec();
            pick.sort();
            emit(pick.into_iter().map(|i| kept[i]).collect(), false)
        }
        ContextStrategy::HierarchySampling => {
            let kept = retained(sample);
            if kept.len() <= quota {
                let flagged = kept.len() < quota;
                return emit(kept, flagged);
            }
            // quota split round-robin across depths 1..=3
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pools: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, c) in kept.iter().enumerate() {
                pools.entry(c.depth).or_default().push(i);
            }
            let depths: Vec<usize> = pools.keys().copied().collect();
            let mut pick: Vec<usize> = Vec::new();
            let mut round = 0usize;
            while pick.len() < quota {
                let mut any = false;
                for d in &depths {
                    if pick.len() >= quota {
                        break;
                    }
                    let pool = pools.get_mut(d).expect("depth present");
                    if pool.is_empty() {
                        continue;
                    }
                    any = true;
                    let idx = rand::seq::index::sample(&mut rng, pool.len(), 1).index(0);
                    pick.push(pool.remove(idx));
                }
                if !any {
                    break;
                }
                round += 1;
                if round > quota {
                    break;
                }
            }
            pick.sort();
            emit(pick.into_iter().map(|i| kept[i]).collect(), false)
        }
    }
}
