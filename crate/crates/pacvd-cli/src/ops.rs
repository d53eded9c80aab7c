//! Shared plumbing between subcommands: parsing inputs, loading catalogs
//! and exemplar stores, and constructing gateways from flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use pacvd_core::abstraction::{AbstractionLevel, EngineOptions};
use pacvd_core::catalog::{default_catalog, load_catalog, ApiCatalog};
use pacvd_core::frontend::{parse_unit, SourceUnit};
use pacvd_core::gateway::{Gateway, MockBackend, ProviderConfig};
use pacvd_core::prompt::{ExemplarRecord, ExemplarStore, PromptStrategy};

pub fn load_units(paths: &[PathBuf]) -> Result<Vec<SourceUnit>> {
    let mut units = Vec::new();
    for path in paths {
        let bytes =
            std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let unit = parse_unit(&path.display().to_string(), &bytes)
            .with_context(|| format!("cannot parse {}", path.display()))?;
        units.push(unit);
    }
    Ok(units)
}

pub fn load_catalog_flag(path: Option<&Path>) -> Result<ApiCatalog> {
    match path {
        None => Ok(default_catalog()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read catalog {}", p.display()))?;
            load_catalog(&text).with_context(|| format!("invalid catalog {}", p.display()))
        }
    }
}

pub fn engine_options(args: &crate::AnalysisArgs) -> EngineOptions {
    EngineOptions {
        depth_limit: args.depth,
        path_cap: args.path_cap,
        include_fuzzy_at_a2: args.include_fuzzy_at_a2,
    }
}

pub fn parse_level(s: &str) -> Result<AbstractionLevel> {
    s.parse().map_err(|e: String| anyhow::anyhow!(e))
}

pub fn parse_levels(s: &str) -> Result<Vec<AbstractionLevel>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(AbstractionLevel::ALL.to_vec());
    }
    s.split(',')
        .map(|part| parse_level(part.trim()))
        .collect()
}

pub fn parse_strategy(s: &str) -> Result<PromptStrategy> {
    s.parse().map_err(|e: String| anyhow::anyhow!(e))
}

pub fn parse_strategies(s: &str) -> Result<Vec<PromptStrategy>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(PromptStrategy::ALL.to_vec());
    }
    s.split(',')
        .map(|part| parse_strategy(part.trim()))
        .collect()
}

pub fn load_exemplars(path: Option<&Path>) -> Result<ExemplarStore> {
    let Some(path) = path else {
        return Ok(ExemplarStore::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read exemplars {}", path.display()))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ExemplarRecord = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad exemplar record", path.display(), i + 1))?;
        records.push(record);
    }
    Ok(ExemplarStore::new(records))
}

/// Build a gateway from `--provider` / `--provider-config` / $PACVD_CONFIG,
/// in that order of precedence.
pub fn gateway_from_flags(
    provider: Option<&str>,
    provider_config: Option<&Path>,
) -> Result<Gateway> {
    if let Some(spec) = provider {
        let rest = spec
            .strip_prefix("mock:")
            .ok_or_else(|| anyhow::anyhow!("--provider only accepts mock:<script> specs"))?;
        let backend = MockBackend::from_spec(rest).map_err(|e| anyhow::anyhow!(e))?;
        return Ok(Gateway::new(ProviderConfig::default(), Box::new(backend)));
    }
    let config_path = match provider_config {
        Some(p) => p.to_path_buf(),
        None => match std::env::var("PACVD_CONFIG") {
            Ok(p) => PathBuf::from(p),
            Err(_) => bail!(
                "no provider configured: pass --provider mock:<script>, \
                 --provider-config <file>, or set PACVD_CONFIG"
            ),
        },
    };
    let text = std::fs::read_to_string(&config_path)
        .with_context(|| format!("cannot read provider config {}", config_path.display()))?;
    let config = ProviderConfig::from_toml(&text)?;
    Ok(Gateway::http(config)?)
}
