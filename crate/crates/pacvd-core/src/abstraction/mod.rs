//! Primitive-API usage abstraction at four levels.
//!
//! For every direct callee of a target function, the engine classifies
//! whether each resource API is called on all, some or no control-flow
//! branches (A1), records the concrete guard conditions and call chains
//! under which it fires (A2), adds static call counts (A3) and the key
//! variables operated on (A4), then renders the result as deterministic
//! plain text ready to accompany the target's source in a prompt.

pub mod analysis;
mod render;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::ApiCatalog;
use crate::frontend::ast::SourceUnit;
use crate::graphs::GraphError;

pub use analysis::{ApiHit, ProgramAnalysis, SiteCtx};
pub use render::render_report;

pub const DEFAULT_DEPTH_LIMIT: usize = 3;
pub const DEFAULT_PATH_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FuzzyClass {
    AllBranches,
    SomeBranches,
    NoBranch,
}

impl FuzzyClass {
    pub fn phrase(self) -> &'static str {
        match self {
            FuzzyClass::AllBranches => "all branches",
            FuzzyClass::SomeBranches => "some branches",
            FuzzyClass::NoBranch => "no branch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AbstractionLevel {
    A1,
    A2,
    A3,
    A4,
}

impl AbstractionLevel {
    pub const ALL: [AbstractionLevel; 4] = [
        AbstractionLevel::A1,
        AbstractionLevel::A2,
        AbstractionLevel::A3,
        AbstractionLevel::A4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AbstractionLevel::A1 => "A1",
            AbstractionLevel::A2 => "A2",
            AbstractionLevel::A3 => "A3",
            AbstractionLevel::A4 => "A4",
        }
    }
}

impl FromStr for AbstractionLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(AbstractionLevel::A1),
            "A2" => Ok(AbstractionLevel::A2),
            "A3" => Ok(AbstractionLevel::A3),
            "A4" => Ok(AbstractionLevel::A4),
            other => Err(format!("unknown abstraction level `{other}`")),
        }
    }
}

impl std::fmt::Display for AbstractionLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Guard conditions and call chain under which one API fires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteCondition {
    /// Canonical API name.
    pub api: String,
    /// Rendered guard texts, outermost first; empty means unconditional.
    pub guards: Vec<String>,
    /// Function names from the analyzed callee down to the API call frame.
    pub chain: Vec<String>,
}

/// Per (callee, API) record; fields beyond the requested level stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiUsageFacts {
    pub callee: String,
    /// Canonical API name.
    pub api: String,
    pub fuzzy: Option<FuzzyClass>,
    pub conditions: Vec<ConcreteCondition>,
    pub count: Option<usize>,
    pub key_variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionReport {
    pub target: String,
    pub level: AbstractionLevel,
    pub depth_limit: usize,
    pub overflow_fallback_used: bool,
    pub facts: Vec<ApiUsageFacts>,
    pub rendered: String,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub depth_limit: usize,
    pub path_cap: usize,
    /// Ablation switch: also emit fuzzy lines at levels above A1.
    pub include_fuzzy_at_a2: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            depth_limit: DEFAULT_DEPTH_LIMIT,
            path_cap: DEFAULT_PATH_CAP,
            include_fuzzy_at_a2: false,
        }
    }
}

impl EngineOptions {
    fn level_has_fuzzy(&self, level: AbstractionLevel) -> bool {
        level == AbstractionLevel::A1 || self.include_fuzzy_at_a2
    }

    fn level_has_conditions(&self, level: AbstractionLevel) -> bool {
        level >= AbstractionLevel::A2
    }

    fn level_has_counts(&self, level: AbstractionLevel) -> bool {
        level >= AbstractionLevel::A3
    }

    fn level_has_key_variables(&self, level: AbstractionLevel) -> bool {
        level >= AbstractionLevel::A4
    }
}

/// Build the level-filtered abstraction report for `target`.
pub fn abstract_target(
    units: &[SourceUnit],
    target: &str,
    catalog: &ApiCatalog,
    level: AbstractionLevel,
    opts: &EngineOptions,
) -> Result<AbstractionReport, GraphError> {
    let analysis = ProgramAnalysis::new(units, target, opts.depth_limit, catalog)?;
    let (facts, overflow) = compute_facts(&analysis, level, opts);
    let rendered = render_report(&facts, level, opts, catalog);
    Ok(AbstractionReport {
        target: target.to_string(),
        level,
        depth_limit: opts.depth_limit,
        overflow_fallback_used: overflow,
        facts,
        rendered,
    })
}

/// Compute facts for every analyzed callee at the requested level. Returns
/// the facts plus whether any fuzzy classification fell back to the
/// edge-coverage check because of a path-cap overflow.
pub fn compute_facts(
    analysis: &ProgramAnalysis,
    level: AbstractionLevel,
    opts: &EngineOptions,
) -> (Vec<ApiUsageFacts>, bool) {
    let catalog = analysis.catalog;
    let mut facts = Vec::new();
    let mut overflow_used = false;
    for callee in analysis.analyzed_callees() {
        let hits = analysis.collect_hits(&callee);
        if hits.is_empty() {
            continue;
        }
        let present = ProgramAnalysis::present_apis(&hits);
        let counts = analysis.count_calls(&hits);
        let conditions = analysis.collect_conditions(&hits);
        let key_vars = if opts.level_has_key_variables(level) {
            analysis.extract_key_variables(&hits)
        } else {
            Default::default()
        };
        // pair partners of present APIs, absent themselves, in catalog order
        let mut partners: Vec<String> = Vec::new();
        for api in &present {
            for p in catalog.family_partners(api) {
                if !present.contains(&p) && !partners.contains(&p) {
                    partners.push(p);
                }
            }
        }
        partners.sort_by_key(|p| catalog.family_order(p));

        for api in present.iter().chain(partners.iter()) {
            let is_present = present.contains(api);
            let fuzzy = if opts.level_has_fuzzy(level) {
                if is_present {
                    let (class, fell_back) =
                        analysis.classify_fuzzy(&callee, api, opts.path_cap);
                    overflow_used |= fell_back;
                    Some(class)
                } else {
                    Some(FuzzyClass::NoBranch)
                }
            } else {
                None
            };
            let conditions = if opts.level_has_conditions(level) {
                conditions
                    .iter()
                    .filter(|c| &c.api == api)
                    .cloned()
                    .collect()
            } else {
                Vec::new()
            };
            let count = if opts.level_has_counts(level) {
                Some(counts.get(api).copied().unwrap_or(0))
            } else {
                None
            };
            let key_variables = if opts.level_has_key_variables(level) {
                key_vars.get(api).cloned().unwrap_or_default()
            } else {
                Vec::new()
            };
            facts.push(ApiUsageFacts {
                callee: callee.clone(),
                api: api.clone(),
                fuzzy,
                conditions,
                count,
                key_variables,
            });
        }
    }
    (facts, overflow_used)
}

/// Field-projection of higher-level facts down to `level`, for the
/// monotonicity checks: an A4 fact projected to A2 equals the fact computed
/// directly at A2.
pub fn project_facts(
    facts: &[ApiUsageFacts],
    level: AbstractionLevel,
    opts: &EngineOptions,
) -> Vec<ApiUsageFacts> {
    facts
        .iter()
        .map(|f| ApiUsageFacts {
            callee: f.callee.clone(),
            api: f.api.clone(),
            fuzzy: if opts.level_has_fuzzy(level) {
                f.fuzzy
            } else {
                None
            },
            conditions: if opts.level_has_conditions(level) {
                f.conditions.clone()
            } else {
                Vec::new()
            },
            count: if opts.level_has_counts(level) {
                f.count
            } else {
                None
            },
            key_variables: if opts.level_has_key_variables(level) {
                f.key_variables.clone()
            } else {
                Vec::new()
            },
        })
        .collect()
}
