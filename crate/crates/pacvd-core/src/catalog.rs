//! Catalog of primitive resource-management APIs: names, categories,
//! acquire/release pairs, and optional canonical family names (calloc and
//! realloc report under the malloc family).
//!
//! Catalog documents are line-oriented text:
//!
//! ```text
//! # comment
//! api <name> <category> [canonical=<name>] [cwe=<id>,...]
//! pair <acquire> <release>
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApiCategory {
    MemoryAlloc,
    MemoryFree,
    FileOpen,
    FileClose,
    DirOpen,
    DirClose,
    Lock,
    Unlock,
    OtherResource,
}

impl ApiCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ApiCategory::MemoryAlloc => "memory-alloc",
            ApiCategory::MemoryFree => "memory-free",
            ApiCategory::FileOpen => "file-open",
            ApiCategory::FileClose => "file-close",
            ApiCategory::DirOpen => "dir-open",
            ApiCategory::DirClose => "dir-close",
            ApiCategory::Lock => "lock",
            ApiCategory::Unlock => "unlock",
            ApiCategory::OtherResource => "other-resource",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "memory-alloc" => ApiCategory::MemoryAlloc,
            "memory-free" => ApiCategory::MemoryFree,
            "file-open" => ApiCategory::FileOpen,
            "file-close" => ApiCategory::FileClose,
            "dir-open" => ApiCategory::DirOpen,
            "dir-close" => ApiCategory::DirClose,
            "lock" => ApiCategory::Lock,
            "unlock" => ApiCategory::Unlock,
            "other-resource" => ApiCategory::OtherResource,
            _ => return None,
        })
    }
}

impl fmt::Display for ApiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEntry {
    pub name: String,
    pub category: ApiCategory,
    /// Family head this entry reports under, e.g. `malloc` for `calloc`.
    pub canonical: Option<String>,
    pub associated_cwes: Vec<String>,
}

impl ApiEntry {
    /// Name the entry renders and aggregates under.
    pub fn family(&self) -> &str {
        self.canonical.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiCatalog {
    pub entries: Vec<ApiEntry>,
    /// `(acquire, release)` pairs by entry name.
    pub pairs: Vec<(String, String)>,
    pub version: String,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("duplicate catalog entry `{0}`")]
    DuplicateEntry(String),
}

impl ApiCatalog {
    pub fn empty() -> Self {
        ApiCatalog {
            entries: Vec::new(),
            pairs: Vec::new(),
            version: "0".to_string(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&ApiEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Position of the family head in the entry list; used for deterministic
    /// render ordering.
    pub fn family_order(&self, family: &str) -> usize {
        self.entries
            .iter()
            .position(|e| e.family() == family)
            .unwrap_or(usize::MAX)
    }

    /// Pair partners of `family`, canonicalized and deduplicated, in entry
    /// order.
    pub fn family_partners(&self, family: &str) -> Vec<String> {
        let canon = |name: &str| -> Option<String> {
            self.lookup(name).map(|e| e.family().to_string())
        };
        let mut partners: Vec<String> = Vec::new();
        for (acq, rel) in &self.pairs {
            let (acq_f, rel_f) = match (canon(acq), canon(rel)) {
                (Some(a), Some(r)) => (a, r),
                _ => continue,
            };
            let other = if acq_f == family {
                rel_f
            } else if rel_f == family {
                acq_f
            } else {
                continue;
            };
            if other != family && !partners.contains(&other) {
                partners.push(other);
            }
        }
        partners.sort_by_key(|p| self.family_order(p));
        partners
    }

    /// Release-side entries that no pair targets. A smell in a hand-written
    /// catalog, not an error.
    pub fn lint(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for e in &self.entries {
            let is_release = matches!(
                e.category,
                ApiCategory::MemoryFree
                    | ApiCategory::FileClose
                    | ApiCategory::DirClose
                    | ApiCategory::Unlock
            );
            if is_release && !self.pairs.iter().any(|(_, rel)| *rel == e.name) {
                warnings.push(format!(
                    "release API `{}` is not the target of any pair",
                    e.name
                ));
            }
        }
        warnings
    }

    fn validate(&self) -> Result<(), CatalogError> {
        for (i, e) in self.entries.iter().enumerate() {
            if self.entries[..i].iter().any(|p| p.name == e.name) {
                return Err(CatalogError::DuplicateEntry(e.name.clone()));
            }
            if let Some(c) = &e.canonical {
                if self.lookup(c).is_none() {
                    return Err(CatalogError::Schema {
                        line: 0,
                        message: format!(
                            "entry `{}` names unknown canonical `{}`",
                            e.name, c
                        ),
                    });
                }
            }
        }
        for (acq, rel) in &self.pairs {
            if self.lookup(acq).is_none() || self.lookup(rel).is_none() {
                return Err(CatalogError::Schema {
                    line: 0,
                    message: format!("pair ({acq}, {rel}) references undeclared entries"),
                });
            }
        }
        Ok(())
    }
}

/// Exact-name match after canonicalization; no fuzzy or prefix matching.
/// Wrapper functions are never matched by name: a wrapper only counts when
/// inter-procedural traversal reaches a true catalog call inside it.
pub fn match_call<'c>(catalog: &'c ApiCatalog, callee: &str) -> Option<&'c ApiEntry> {
    catalog.lookup(callee)
}

/// The built-in catalog: memory allocation (malloc family) paired with
/// free, and file/directory open functions paired with their close
/// counterparts.
pub fn default_catalog() -> ApiCatalog {
    fn entry(name: &str, category: ApiCategory, canonical: Option<&str>) -> ApiEntry {
        ApiEntry {
            name: name.to_string(),
            category,
            canonical: canonical.map(str::to_string),
            associated_cwes: Vec::new(),
        }
    }
    let catalog = ApiCatalog {
        entries: vec![
            entry("malloc", ApiCategory::MemoryAlloc, None),
            entry("calloc", ApiCategory::MemoryAlloc, Some("malloc")),
            entry("realloc", ApiCategory::MemoryAlloc, Some("malloc")),
            entry("free", ApiCategory::MemoryFree, None),
            entry("open", ApiCategory::FileOpen, None),
            entry("fopen", ApiCategory::FileOpen, None),
            entry("fdopen", ApiCategory::FileOpen, None),
            entry("opendir", ApiCategory::DirOpen, None),
            entry("close", ApiCategory::FileClose, None),
            entry("fclose", ApiCategory::FileClose, None),
            entry("closedir", ApiCategory::DirClose, None),
        ],
        pairs: vec![
            ("malloc".to_string(), "free".to_string()),
            ("calloc".to_string(), "free".to_string()),
            ("realloc".to_string(), "free".to_string()),
            ("open".to_string(), "close".to_string()),
            ("fopen".to_string(), "fclose".to_string()),
            ("fdopen".to_string(), "fclose".to_string()),
            ("opendir".to_string(), "closedir".to_string()),
        ],
        version: "builtin-1".to_string(),
    };
    debug_assert!(catalog.validate().is_ok());
    catalog
}

/// Parse a catalog document. Duplicate names and dangling references are
/// rejected with the offending line.
pub fn load_catalog(source: &str) -> Result<ApiCatalog, CatalogError> {
    let mut catalog = ApiCatalog::empty();
    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut parts = text.split_whitespace();
        match parts.next() {
            Some("version") => {
                catalog.version = parts.next().unwrap_or("0").to_string();
            }
            Some("api") => {
                let name = parts.next().ok_or(CatalogError::Schema {
                    line,
                    message: "api line needs a name".to_string(),
                })?;
                let category_text = parts.next().ok_or(CatalogError::Schema {
                    line,
                    message: format!("api `{name}` needs a category"),
                })?;
                let category =
                    ApiCategory::parse(category_text).ok_or(CatalogError::Schema {
                        line,
                        message: format!("unknown category `{category_text}`"),
                    })?;
                if catalog.lookup(name).is_some() {
                    return Err(CatalogError::DuplicateEntry(name.to_string()));
                }
                let mut entry = ApiEntry {
                    name: name.to_string(),
                    category,
                    canonical: None,
                    associated_cwes: Vec::new(),
                };
                for opt in parts {
                    if let Some(v) = opt.strip_prefix("canonical=") {
                        entry.canonical = Some(v.to_string());
                    } else if let Some(v) = opt.strip_prefix("cwe=") {
                        entry.associated_cwes =
                            v.split(',').map(str::to_string).collect();
                    } else {
                        return Err(CatalogError::Schema {
                            line,
                            message: format!("unknown option `{opt}`"),
                        });
                    }
                }
                catalog.entries.push(entry);
            }
            Some("pair") => {
                let acq = parts.next().ok_or(CatalogError::Schema {
                    line,
                    message: "pair line needs two names".to_string(),
                })?;
                let rel = parts.next().ok_or(CatalogError::Schema {
                    line,
                    message: "pair line needs two names".to_string(),
                })?;
                catalog.pairs.push((acq.to_string(), rel.to_string()));
            }
            Some(other) => {
                return Err(CatalogError::Schema {
                    line,
                    message: format!("unknown directive `{other}`"),
                });
            }
            None => {}
        }
    }
    catalog.validate().map_err(|e| match e {
        // validation has no line info; keep whatever it produced
        CatalogError::Schema { message, .. } => CatalogError::Schema { line: 0, message },
        other => other,
    })?;
    Ok(catalog)
}

/// Bit-exact serializer: `load_catalog(serialize(c))` reproduces `c`.
pub fn serialize_catalog(catalog: &ApiCatalog) -> String {
    let mut out = String::new();
    out.push_str(&format!("version {}\n", catalog.version));
    for e in &catalog.entries {
        out.push_str(&format!("api {} {}", e.name, e.category));
        if let Some(c) = &e.canonical {
            out.push_str(&format!(" canonical={c}"));
        }
        if !e.associated_cwes.is_empty() {
            out.push_str(&format!(" cwe={}", e.associated_cwes.join(",")));
        }
        out.push('\n');
    }
    for (acq, rel) in &catalog.pairs {
        out.push_str(&format!("pair {acq} {rel}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_has_free_paired_with_malloc() {
        let c = default_catalog();
        let free = c.lookup("free").expect("free entry");
        assert_eq!(free.category, ApiCategory::MemoryFree);
        assert!(c
            .pairs
            .iter()
            .any(|(a, r)| a == "malloc" && r == "free"));
        assert_eq!(c.family_partners("free"), vec!["malloc".to_string()]);
    }

    #[test]
    fn default_has_closedir_paired_with_opendir() {
        let c = default_catalog();
        assert!(c.lookup("closedir").is_some());
        assert!(c
            .pairs
            .iter()
            .any(|(a, r)| a == "opendir" && r == "closedir"));
    }

    #[test]
    fn printf_is_absent() {
        assert!(match_call(&default_catalog(), "printf").is_none());
    }

    #[test]
    fn calloc_reports_under_malloc_family() {
        let c = default_catalog();
        let e = match_call(&c, "calloc").unwrap();
        assert_eq!(e.name, "calloc");
        assert_eq!(e.family(), "malloc");
    }

    #[test]
    fn memcpy_not_matched() {
        assert!(match_call(&default_catalog(), "memcpy").is_none());
    }

    #[test]
    fn load_extends_with_kernel_pair() {
        let doc = "api kmalloc memory-alloc\napi kfree memory-free\npair kmalloc kfree\n";
        let c = load_catalog(doc).unwrap();
        assert_eq!(c.entries.len(), 2);
        assert_eq!(c.pairs.len(), 1);
    }

    #[test]
    fn empty_document_is_valid_empty_catalog() {
        let c = load_catalog("").unwrap();
        assert!(c.entries.is_empty());
        assert!(c.pairs.is_empty());
    }

    #[test]
    fn dangling_pair_is_schema_error() {
        let doc = "api foo memory-alloc\npair foo bar\n";
        assert!(matches!(
            load_catalog(doc),
            Err(CatalogError::Schema { .. })
        ));
    }

    #[test]
    fn duplicate_entry_rejected() {
        let doc = "api foo memory-alloc\napi foo memory-free\n";
        assert!(matches!(
            load_catalog(doc),
            Err(CatalogError::DuplicateEntry(_))
        ));
    }

    #[test]
    fn serialize_round_trips_default_and_custom() {
        for c in [default_catalog(), {
            let doc = "version v2\napi kmalloc memory-alloc cwe=CWE-401,CWE-415\napi kfree memory-free canonical=kfree\n";
            // canonical pointing at itself is legal if declared
            load_catalog(doc).unwrap()
        }] {
            let text = serialize_catalog(&c);
            let back = load_catalog(&text).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn lint_flags_unpaired_release() {
        let doc = "api xfree memory-free\n";
        let c = load_catalog(doc).unwrap();
        let warnings = c.lint();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("xfree"));
        assert!(default_catalog().lint().is_empty());
    }
}
