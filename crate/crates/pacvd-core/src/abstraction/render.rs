//! Deterministic plain-text rendering of abstraction facts.
//!
//! Each level renders as a sequence of sections; within a section every
//! analyzed callee appears exactly once, in the order it is first called by
//! the target. Identical inputs produce byte-identical text.

use crate::catalog::ApiCatalog;

use super::{AbstractionLevel, ApiUsageFacts, ConcreteCondition, EngineOptions};

pub fn render_report(
    facts: &[ApiUsageFacts],
    level: AbstractionLevel,
    opts: &EngineOptions,
    catalog: &ApiCatalog,
) -> String {
    if facts.is_empty() {
        return format!(
            "No primitive API activity detected within depth {}.\n",
            opts.depth_limit
        );
    }
    let mut sections: Vec<String> = Vec::new();
    if opts.level_has_fuzzy(level) {
        sections.push(fuzzy_section(facts));
    }
    if opts.level_has_conditions(level) {
        sections.push(concrete_section(facts));
    }
    if opts.level_has_counts(level) {
        sections.push(counts_section(facts, catalog));
    }
    if opts.level_has_key_variables(level) {
        sections.push(key_variables_section(facts));
    }
    sections.retain(|s| !s.is_empty());
    sections.join("")
}

fn callee_order(facts: &[ApiUsageFacts]) -> Vec<&str> {
    let mut order: Vec<&str> = Vec::new();
    for f in facts {
        if !order.contains(&f.callee.as_str()) {
            order.push(&f.callee);
        }
    }
    order
}

fn fuzzy_section(facts: &[ApiUsageFacts]) -> String {
    let mut out = String::new();
    for callee in callee_order(facts) {
        let rows: Vec<&ApiUsageFacts> = facts
            .iter()
            .filter(|f| f.callee == callee && f.fuzzy.is_some())
            .collect();
        if rows.is_empty() {
            continue;
        }
        out.push_str(&format!("In the \"{callee}\" function:\n"));
        for f in rows {
            let class = f.fuzzy.expect("filtered on fuzzy");
            out.push_str(&format!(
                "On {}, the \"{}\" API is called.\n",
                class.phrase(),
                f.api
            ));
        }
    }
    out
}

fn condition_clause(cond: &ConcreteCondition) -> String {
    if cond.guards.is_empty() {
        "unconditionally".to_string()
    } else {
        cond.guards
            .iter()
            .map(|g| format!("({g})"))
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

fn concrete_section(facts: &[ApiUsageFacts]) -> String {
    let mut out = String::new();
    for callee in callee_order(facts) {
        let conditions: Vec<&ConcreteCondition> = facts
            .iter()
            .filter(|f| f.callee == callee)
            .flat_map(|f| f.conditions.iter())
            .collect();
        if conditions.is_empty() {
            continue;
        }
        let mut narrated: Vec<String> = Vec::new();
        let mut headed = false;
        for cond in conditions {
            if cond.chain.len() <= 1 {
                // API called directly in the analyzed callee
                if !headed {
                    out.push_str(&format!("In the \"{callee}\" function:\n"));
                    headed = true;
                }
                if cond.guards.is_empty() {
                    out.push_str(&format!(
                        "If unconditionally, the \"{}\" API is called.\n",
                        cond.api
                    ));
                } else {
                    out.push_str(&format!(
                        "If {}, the \"{}\" API is called.\n",
                        condition_clause(cond),
                        cond.api
                    ));
                }
            } else {
                // narrate the chain, then the condition in its final frame
                for pair in cond.chain.windows(2) {
                    let sentence = format!(
                        "In the \"{}\" function, the \"{}\" function is called.\n",
                        pair[0], pair[1]
                    );
                    if !narrated.contains(&sentence) {
                        out.push_str(&sentence);
                        narrated.push(sentence);
                    }
                }
                let last = cond.chain.last().expect("nonempty chain");
                let clause = if cond.guards.is_empty() {
                    "if unconditionally".to_string()
                } else {
                    format!("if {}", condition_clause(cond))
                };
                out.push_str(&format!(
                    "In the \"{}\" function, {}, the \"{}\" API is called.\n",
                    last, clause, cond.api
                ));
            }
        }
    }
    out
}

fn counts_section(facts: &[ApiUsageFacts], catalog: &ApiCatalog) -> String {
    let mut out = String::new();
    for callee in callee_order(facts) {
        let mut rows: Vec<(&str, usize)> = facts
            .iter()
            .filter(|f| f.callee == callee)
            .filter_map(|f| f.count.map(|c| (f.api.as_str(), c)))
            .collect();
        if rows.is_empty() {
            continue;
        }
        rows.sort_by_key(|(api, _)| catalog.family_order(api));
        out.push_str(&format!("In the \"{callee}\" function:\n"));
        let n = rows.len();
        for (i, (api, count)) in rows.into_iter().enumerate() {
            let sep = if i + 1 == n { '.' } else { ',' };
            out.push_str(&format!(
                "the \"{api}\" API is called {count} times{sep}\n"
            ));
        }
    }
    out
}

fn key_variables_section(facts: &[ApiUsageFacts]) -> String {
    let mut out = String::new();
    for callee in callee_order(facts) {
        let rows: Vec<&ApiUsageFacts> = facts
            .iter()
            .filter(|f| f.callee == callee && !f.key_variables.is_empty())
            .collect();
        if rows.is_empty() {
            continue;
        }
        out.push_str(&format!("In the \"{callee}\" function:\n"));
        for f in rows {
            for var in &f.key_variables {
                out.push_str(&format!(
                    "the \"{}\" API operates on the \"{}\" variable.\n",
                    f.api, var
                ));
            }
        }
    }
    out
}
