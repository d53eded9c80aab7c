//! Static-analysis toolkit for memory-safety triage: parses a C subset,
//! builds per-function control-flow graphs and a depth-limited call graph,
//! abstracts primitive-API usage (fuzzy branches, concrete branch conditions,
//! call counts, key variables) at four levels, renders the result as
//! LLM-ready context, and runs a prompt -> detect -> score evaluation
//! pipeline against chat-completion providers (or a deterministic mock).

pub mod abstraction;
pub mod catalog;
pub mod eval;
pub mod frontend;
pub mod gateway;
pub mod graphs;
pub mod prompt;
