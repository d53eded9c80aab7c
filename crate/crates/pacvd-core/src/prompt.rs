//! Prompt assembly for the six detection strategies.
//!
//! Templates are fixed text with `[CODE]` / `[API]` slots filled at build
//! time; the chain-of-thought second turn keeps a `[Code Analysis]` slot
//! that the gateway fills with the first turn's reply. In no-API runs the
//! API sections disappear wholesale rather than rendering empty headers.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PromptStrategy {
    BasicPrompt,
    RolePlaying,
    ChainOfThought,
    InContext,
    FewShotRandom,
    FewShotContrastive,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 6] = [
        PromptStrategy::BasicPrompt,
        PromptStrategy::RolePlaying,
        PromptStrategy::ChainOfThought,
        PromptStrategy::InContext,
        PromptStrategy::FewShotRandom,
        PromptStrategy::FewShotContrastive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptStrategy::BasicPrompt => "basic",
            PromptStrategy::RolePlaying => "role-playing",
            PromptStrategy::ChainOfThought => "chain-of-thought",
            PromptStrategy::InContext => "in-context",
            PromptStrategy::FewShotRandom => "few-shot-random",
            PromptStrategy::FewShotContrastive => "few-shot-contrastive",
        }
    }

    pub fn is_two_turn(self) -> bool {
        matches!(
            self,
            PromptStrategy::ChainOfThought | PromptStrategy::InContext
        )
    }

    fn needs_exemplars(self) -> bool {
        matches!(
            self,
            PromptStrategy::FewShotRandom | PromptStrategy::FewShotContrastive
        )
    }

    /// Default exemplar count: two plain examples, one contrastive pair.
    pub fn default_exemplar_count(self) -> usize {
        match self {
            PromptStrategy::FewShotContrastive => 1,
            _ => 2,
        }
    }
}

impl FromStr for PromptStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "basic" | "basic-prompt" => Ok(PromptStrategy::BasicPrompt),
            "role-playing" | "role" => Ok(PromptStrategy::RolePlaying),
            "chain-of-thought" | "cot" => Ok(PromptStrategy::ChainOfThought),
            "in-context" | "ic" => Ok(PromptStrategy::InContext),
            "few-shot-random" | "fsr" => Ok(PromptStrategy::FewShotRandom),
            "few-shot-contrastive" | "fsc" => Ok(PromptStrategy::FewShotContrastive),
            other => Err(format!("unknown prompt strategy `{other}`")),
        }
    }
}

impl std::fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    /// Placeholder the gateway replaces with the model's reply.
    AssistantPlaceholder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub strategy: PromptStrategy,
    pub turns: Vec<Turn>,
    /// `[CODE]` and `[API]` are resolved at build time; `[Code Analysis]`
    /// resolves at dispatch.
    pub placeholders_resolved: bool,
    pub exemplars: Vec<String>,
    pub seed: Option<u64>,
}

impl PromptBundle {
    /// Concatenated text of every turn, used by rule-based mocks and for
    /// prompt hashing.
    pub fn full_text(&self) -> String {
        self.turns
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// One labeled code snippet usable as a few-shot exemplar. Contrastive
/// records carry both the vulnerable and the fixed version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarRecord {
    pub id: String,
    pub code: String,
    #[serde(default)]
    pub api_text: String,
    /// True means vulnerable ("yes").
    pub label: bool,
    #[serde(default)]
    pub before_fix: Option<String>,
    #[serde(default)]
    pub after_fix: Option<String>,
}

impl ExemplarRecord {
    fn is_contrastive(&self) -> bool {
        self.before_fix.is_some() && self.after_fix.is_some()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExemplarStore {
    pub records: Vec<ExemplarRecord>,
}

impl ExemplarStore {
    pub fn new(records: Vec<ExemplarRecord>) -> Self {
        ExemplarStore { records }
    }

    pub fn get(&self, id: &str) -> Option<&ExemplarRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("strategy `{strategy}` needs {needed} exemplar(s), store has {available}")]
    InsufficientExemplars {
        strategy: PromptStrategy,
        needed: usize,
        available: usize,
    },
    #[error("unresolved placeholder `{0}` in built prompt")]
    UnresolvedPlaceholder(String),
}

/// Select exemplar ids: seeded uniform sampling without replacement,
/// restricted to paired records for the contrastive strategy and excluding
/// the sample under test. Selected ids are returned in id order.
pub fn select_exemplars(
    store: &ExemplarStore,
    strategy: PromptStrategy,
    k: usize,
    seed: u64,
    exclude_id: Option<&str>,
) -> Result<Vec<String>, PromptError> {
    let eligible: Vec<&ExemplarRecord> = store
        .records
        .iter()
        .filter(|r| Some(r.id.as_str()) != exclude_id)
        .filter(|r| strategy != PromptStrategy::FewShotContrastive || r.is_contrastive())
        .collect();
    if eligible.len() < k {
        return Err(PromptError::InsufficientExemplars {
            strategy,
            needed: k,
            available: eligible.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, eligible.len(), k);
    let mut ids: Vec<String> = picked.iter().map(|i| eligible[i].id.clone()).collect();
    ids.sort();
    Ok(ids)
}

/// Everything `build_prompt` needs beyond the target code itself.
#[derive(Debug, Clone, Default)]
pub struct BuildContext<'a> {
    /// Rendered abstraction (or baseline context). Empty means a no-API run
    /// and removes the API sections wholesale.
    pub api_text: &'a str,
    pub store: Option<&'a ExemplarStore>,
    pub seed: Option<u64>,
    /// Exemplar count; strategy default when `None`.
    pub k: Option<usize>,
    /// Sample under evaluation, excluded from exemplar selection.
    pub exclude_id: Option<&'a str>,
}

const INSTRUCTION_BLOCK: &str = "Provide a detailed response on the vulnerability status of the code. If the code is vulnerable, start your answer with \"yes\" and provide a brief explanation. If not, start with \"no\" and explain why.";

fn code_api_slot(code: &str, api_text: &str) -> String {
    if api_text.is_empty() {
        code.to_string()
    } else {
        format!("{code}, {api_text}")
    }
}

/// Assemble a prompt bundle for one strategy.
pub fn build_prompt(
    strategy: PromptStrategy,
    code: &str,
    ctx: &BuildContext,
) -> Result<PromptBundle, PromptError> {
    let api = ctx.api_text;
    let no_api = api.is_empty();
    let mut exemplar_ids = Vec::new();
    let mut turns: Vec<Turn> = Vec::new();

    match strategy {
        PromptStrategy::BasicPrompt => {
            let lead = if no_api {
                format!("Analyze the following code snippet: {code}.")
            } else {
                format!(
                    "Analyze the following code snippet and associated API information: {}.",
                    code_api_slot(code, api)
                )
            };
            turns.push(Turn {
                role: Role::User,
                text: format!("{lead} {INSTRUCTION_BLOCK}"),
            });
        }
        PromptStrategy::RolePlaying => {
            turns.push(Turn {
                role: Role::System,
                text: "You are an expert vulnerability detection system. Provide precise and direct answers with explanations only when necessary.".to_string(),
            });
            let lead = if no_api {
                format!("Analyze the following code snippet: {code}.")
            } else {
                format!(
                    "Analyze the following code snippet and associated API information: {}.",
                    code_api_slot(code, api)
                )
            };
            turns.push(Turn {
                role: Role::User,
                text: format!("{lead} {INSTRUCTION_BLOCK}"),
            });
        }
        PromptStrategy::ChainOfThought => {
            let first = if no_api {
                format!("{code} Based on the above code, please provide a detailed summary of the code's functionality, analyze the code structure, and locate all positions where pointers are constructed and dereferenced.")
            } else {
                format!("{code}, {api} Based on the above code and API information, please provide a detailed summary of the code's functionality, analyze the code structure, and locate all positions where pointers are constructed and dereferenced.")
            };
            turns.push(Turn {
                role: Role::User,
                text: first,
            });
            turns.push(Turn {
                role: Role::AssistantPlaceholder,
                text: String::new(),
            });
            turns.push(Turn {
                role: Role::User,
                text: "Based on your previous analysis: [Code Analysis], determine whether the code contains significant vulnerabilities. Answer 'yes' or 'no' and provide reasons if vulnerabilities are identified.".to_string(),
            });
        }
        PromptStrategy::InContext => {
            let first = if no_api {
                format!("As a code reviewer, evaluate this code snippet for clarity, functionality, and maintainability. {code}.")
            } else {
                format!("As a code reviewer, evaluate this code snippet for clarity, functionality, and maintainability. Consider also the associated API information to ensure that the control flow aligns with the intended use and structure of the code. {}.", code_api_slot(code, api))
            };
            turns.push(Turn {
                role: Role::User,
                text: first,
            });
            turns.push(Turn {
                role: Role::AssistantPlaceholder,
                text: String::new(),
            });
            let second = if no_api {
                "Based on your initial observations, make a final assessment of whether the code meets the standards for clarity, functionality, and maintainability. Respond with 'yes' if improvements are needed, or 'no' if it meets the criteria.".to_string()
            } else {
                "Based on your initial observations and the API information, make a final assessment of whether the code meets the standards for clarity, functionality, and maintainability. Respond with 'yes' if improvements are needed, or 'no' if it meets the criteria.".to_string()
            };
            turns.push(Turn {
                role: Role::User,
                text: second,
            });
        }
        PromptStrategy::FewShotRandom => {
            let store = ctx.store.ok_or(PromptError::InsufficientExemplars {
                strategy,
                needed: ctx.k.unwrap_or(strategy.default_exemplar_count()),
                available: 0,
            })?;
            let k = ctx.k.unwrap_or(strategy.default_exemplar_count());
            exemplar_ids =
                select_exemplars(store, strategy, k, ctx.seed.unwrap_or(0), ctx.exclude_id)?;
            let mut text = String::new();
            for (i, id) in exemplar_ids.iter().enumerate() {
                let r = store.get(id).expect("selected id exists");
                let label = if r.label { "yes" } else { "no" };
                if i > 0 {
                    text.push_str("; ");
                }
                if no_api || r.api_text.is_empty() {
                    text.push_str(&format!(
                        "Code Example {}: {} Output: {}",
                        i + 1,
                        r.code,
                        label
                    ));
                } else {
                    text.push_str(&format!(
                        "Code Example {}: {} API Information: {} Output: {}",
                        i + 1,
                        r.code,
                        r.api_text,
                        label
                    ));
                }
            }
            text.push_str(". ");
            if no_api {
                text.push_str(&format!(
                    "Refer to the examples above, then analyze the following code snippet: {code}. "
                ));
            } else {
                text.push_str(&format!(
                    "Refer to the examples above, then analyze the following code snippet and associated API information: {}. ",
                    code_api_slot(code, api)
                ));
            }
            text.push_str(INSTRUCTION_BLOCK);
            turns.push(Turn {
                role: Role::User,
                text,
            });
        }
        PromptStrategy::FewShotContrastive => {
            let store = ctx.store.ok_or(PromptError::InsufficientExemplars {
                strategy,
                needed: ctx.k.unwrap_or(strategy.default_exemplar_count()),
                available: 0,
            })?;
            let k = ctx.k.unwrap_or(strategy.default_exemplar_count());
            exemplar_ids =
                select_exemplars(store, strategy, k, ctx.seed.unwrap_or(0), ctx.exclude_id)?;
            let mut text = String::from("Examine the 'Before Fix' and 'After Fix' code snippets to understand the vulnerability remediation. Determine if the 'Before Fix' version is vulnerable, and if so, explain how the 'After Fix' version addresses the issue. ");
            for id in &exemplar_ids {
                let r = store.get(id).expect("selected id exists");
                text.push_str(&format!(
                    "Before Fix: {}, After Fix: {} ",
                    r.before_fix.as_deref().unwrap_or(""),
                    r.after_fix.as_deref().unwrap_or("")
                ));
            }
            text.push_str("Refer to these examples. ");
            if no_api {
                text.push_str(&format!(
                    "Now, analyze the following code snippet: {code}. "
                ));
            } else {
                text.push_str(&format!(
                    "Now, analyze the following code snippet and API Information: {}. ",
                    code_api_slot(code, api)
                ));
            }
            text.push_str("Respond with 'yes' if it is vulnerable, otherwise answer 'no'.");
            turns.push(Turn {
                role: Role::User,
                text,
            });
        }
    }

    let bundle = PromptBundle {
        strategy,
        turns,
        placeholders_resolved: true,
        exemplars: exemplar_ids,
        seed: ctx.seed,
    };
    check_placeholders(&bundle)?;
    Ok(bundle)
}

/// Internal assertion: `[CODE]` / `[API]` never survive into a built
/// bundle. `[Code Analysis]` may, but only in the turn after an assistant
/// placeholder.
fn check_placeholders(bundle: &PromptBundle) -> Result<(), PromptError> {
    for (i, turn) in bundle.turns.iter().enumerate() {
        for marker in ["[CODE]", "[API]", "[CODE1]", "[CODE2]"] {
            if turn.text.contains(marker) {
                return Err(PromptError::UnresolvedPlaceholder(marker.to_string()));
            }
        }
        if turn.text.contains("[Code Analysis]") {
            let after_assistant = i > 0
                && matches!(
                    bundle.turns[i - 1].role,
                    Role::AssistantPlaceholder
                );
            if !after_assistant {
                return Err(PromptError::UnresolvedPlaceholder(
                    "[Code Analysis]".to_string(),
                ));
            }
        }
    }
    if bundle.strategy.is_two_turn() {
        let placeholders = bundle
            .turns
            .iter()
            .filter(|t| t.role == Role::AssistantPlaceholder)
            .count();
        if placeholders != 1 {
            return Err(PromptError::UnresolvedPlaceholder(
                "assistant placeholder".to_string(),
            ));
        }
    }
    let _ = bundle.strategy.needs_exemplars();
    Ok(())
}
