//! Subcommand implementations.

use std::io::Write;

use anyhow::{Context, Result};

/// Print to stdout, swallowing broken pipes: `pacvd ... | head` must not
/// abort the command mid-way.
macro_rules! say {
    ($($arg:tt)*) => {{
        let mut out = std::io::stdout().lock();
        let _ = write!(out, $($arg)*);
        let _ = out.flush();
    }};
}
use sha2::{Digest, Sha256};

use pacvd_core::abstraction::{abstract_target, ProgramAnalysis};
use pacvd_core::catalog::serialize_catalog;
use pacvd_core::eval::{format_table, load_dataset, run_grid, ContextKind, RunConfig};
use pacvd_core::graphs::{build_call_graph, build_cfg, function_index};
use pacvd_core::prompt::{build_prompt, BuildContext, PromptBundle, Role};

use crate::ops;
use crate::{AbstractArgs, CatalogArgs, DetectArgs, EvalArgs, PromptArgs, PromptishArgs};

pub fn catalog(args: CatalogArgs) -> Result<()> {
    let catalog = ops::load_catalog_flag(args.catalog.as_deref())?;
    match args.format.as_str() {
        "json" => say!("{}\n", serde_json::to_string_pretty(&catalog)?),
        _ => say!("{}", serialize_catalog(&catalog)),
    }
    if args.lint {
        for warning in catalog.lint() {
            eprintln!("warning: {warning}");
        }
    }
    Ok(())
}

pub fn abstract_cmd(args: AbstractArgs) -> Result<()> {
    let units = ops::load_units(&args.analysis.paths)?;
    let catalog = ops::load_catalog_flag(args.analysis.catalog.as_deref())?;
    let level = ops::parse_level(&args.analysis.level)?;
    let opts = ops::engine_options(&args.analysis);
    let report = abstract_target(&units, &args.analysis.target, &catalog, level, &opts)?;

    if let Some(path) = &args.dump_graphs {
        let graph = build_call_graph(&units, &args.analysis.target, opts.depth_limit)?;
        let index = function_index(&units);
        let mut text = graph.to_debug_text();
        for name in &graph.nodes {
            if let Some(f) = index.get(name.as_str()) {
                text.push_str(&build_cfg(f).to_debug_text());
            }
        }
        std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }

    let output = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report)? + "\n",
        _ => report.rendered.clone(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, output)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => say!("{output}"),
    }
    Ok(())
}

fn build_bundle(args: &PromptishArgs) -> Result<(PromptBundle, String)> {
    let units = ops::load_units(&args.analysis.paths)?;
    let catalog = ops::load_catalog_flag(args.analysis.catalog.as_deref())?;
    let level = ops::parse_level(&args.analysis.level)?;
    let strategy = ops::parse_strategy(&args.strategy)?;
    let opts = ops::engine_options(&args.analysis);

    // resolves the target (or errors) even in no-API mode
    let analysis = ProgramAnalysis::new(&units, &args.analysis.target, opts.depth_limit, &catalog)?;
    let api_text = if args.no_api {
        String::new()
    } else {
        abstract_target(&units, &args.analysis.target, &catalog, level, &opts)?.rendered
    };
    // the prompt carries the target's source as written
    let code = units
        .iter()
        .find_map(|u| {
            u.function(analysis.root())
                .map(|f| u.text[f.span.0..f.span.1].to_string())
        })
        .unwrap_or_default();

    let store = ops::load_exemplars(args.exemplars.as_deref())?;
    let bundle = build_prompt(
        strategy,
        &code,
        &BuildContext {
            api_text: &api_text,
            store: Some(&store),
            seed: Some(args.seed),
            k: args.k,
            exclude_id: None,
        },
    )?;
    let turns_json = serde_json::to_string(&bundle.turns)?;
    let digest = Sha256::digest(turns_json.as_bytes());
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((bundle, hash))
}

pub fn prompt(args: PromptArgs) -> Result<()> {
    let (bundle, hash) = build_bundle(&args.promptish)?;
    match args.format.as_str() {
        "json" => say!("{}\n", serde_json::to_string_pretty(&bundle)?),
        _ => {
            for turn in &bundle.turns {
                let role = match turn.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::AssistantPlaceholder => "assistant (model reply goes here)",
                };
                say!("--- {role} ---\n{}\n", turn.text);
            }
        }
    }
    say!("prompt-hash: {hash}\n");
    Ok(())
}

pub fn detect(args: DetectArgs) -> Result<()> {
    let (bundle, hash) = build_bundle(&args.promptish)?;
    let gateway = ops::gateway_from_flags(
        args.provider.as_deref(),
        args.provider_config.as_deref(),
    )?;
    let verdict = gateway.complete(&bundle)?;
    // persist before printing so a closed pipe cannot lose the transcript
    if let Some(path) = &args.out {
        verdict
            .to_transcript()
            .save(path)
            .with_context(|| format!("cannot write transcript {}", path.display()))?;
    }
    say!("{}\n", verdict.label);
    say!("prompt-hash: {hash}\n");
    if let Some(path) = &args.out {
        say!("transcript: {}\n", path.display());
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let samples = load_dataset(&args.dataset)?;
    let catalog = ops::load_catalog_flag(args.catalog.as_deref())?;
    let gateway = ops::gateway_from_flags(
        args.provider.as_deref(),
        args.provider_config.as_deref(),
    )?;
    let context: ContextKind = args
        .context
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let config = RunConfig {
        levels: ops::parse_levels(&args.levels)?,
        strategies: ops::parse_strategies(&args.strategies)?,
        context,
        seed: args.seed,
        k: args.k,
        depth: args.depth,
        out_dir: args.out.clone(),
        resume: args.resume,
        workers: args.workers,
        ..RunConfig::default()
    };
    let run = run_grid(&samples, &config, &catalog, &gateway)?;
    say!("{}", format_table(&run));
    let errors: usize = run.cells.iter().map(|c| c.errors.len()).sum();
    if errors > 0 {
        eprintln!("{errors} sample cell(s) failed; see run.json");
        for cell in &run.cells {
            for e in &cell.errors {
                eprintln!("  [{} {}] {}", cell.level, cell.strategy, e);
            }
        }
    }
    eprintln!("run written to {}", args.out.display());
    Ok(())
}
