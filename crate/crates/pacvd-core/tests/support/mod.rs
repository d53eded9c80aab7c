//! Shared test support: seeded random C-subset program generation and an
//! independent acyclic-path oracle. The oracle walks CFG edges directly
//! (no edge reused) and never calls the classification code it checks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pacvd_core::graphs::{BlockId, Cfg};

/// Enumerate entry-to-exit paths that reuse no edge, capped; independent of
/// the library's enumerator.
pub fn oracle_paths(cfg: &Cfg, cap: usize) -> Vec<Vec<BlockId>> {
    let mut paths = Vec::new();
    let edges: Vec<(BlockId, BlockId)> = cfg.edges.iter().map(|e| (e.from, e.to)).collect();
    let mut used = vec![false; edges.len()];
    let mut path = vec![cfg.entry];
    walk(cfg, &edges, &mut used, &mut path, &mut paths, cap);
    paths
}

fn walk(
    cfg: &Cfg,
    edges: &[(BlockId, BlockId)],
    used: &mut Vec<bool>,
    path: &mut Vec<BlockId>,
    out: &mut Vec<Vec<BlockId>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    let here = *path.last().unwrap();
    if here == cfg.exit {
        out.push(path.clone());
        return;
    }
    for (i, (from, to)) in edges.iter().enumerate() {
        if *from == here && !used[i] {
            used[i] = true;
            path.push(*to);
            walk(cfg, edges, used, path, out, cap);
            path.pop();
            used[i] = false;
        }
    }
}

/// Random single-function program text: nested if/else and while blocks
/// sprinkled with `free`/`malloc` calls and filler statements.
pub struct ProgramGen {
    pub rng: ChaCha8Rng,
    pub max_depth: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_depth: 3,
        }
    }

    pub fn function(&mut self, name: &str) -> String {
        let body = self.block(0);
        format!("void {name}(int a, int b, int *p, int *q) {{\n{body}}}\n")
    }

    fn cond(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => "a".to_string(),
            1 => "a != b".to_string(),
            2 => "p".to_string(),
            _ => "a < b".to_string(),
        }
    }

    fn block(&mut self, depth: usize) -> String {
        let n = self.rng.gen_range(1..=3);
        let mut out = String::new();
        for _ in 0..n {
            let choice = if depth >= self.max_depth {
                self.rng.gen_range(0..4)
            } else {
                self.rng.gen_range(0..6)
            };
            match choice {
                0 => out.push_str("free(p);\n"),
                1 => out.push_str("q = malloc(a);\n"),
                2 => out.push_str("a = a + b;\n"),
                3 => out.push_str("use(q);\n"),
                4 => {
                    let c = self.cond();
                    let t = self.block(depth + 1);
                    if self.rng.gen_bool(0.5) {
                        let e = self.block(depth + 1);
                        out.push_str(&format!("if ({c}) {{\n{t}}} else {{\n{e}}}\n"));
                    } else {
                        out.push_str(&format!("if ({c}) {{\n{t}}}\n"));
                    }
                }
                _ => {
                    let c = self.cond();
                    let b = self.block(depth + 1);
                    out.push_str(&format!("while ({c}) {{\n{b}}}\n"));
                }
            }
        }
        out
    }
}

/// Random multi-function corpus: a target function calling a pool of
/// helpers that may call each other (acyclic, by index order) and the
/// primitive APIs.
pub struct CorpusGen {
    pub rng: StdRng,
}

pub struct Corpus {
    pub source: String,
    pub target: String,
}

impl CorpusGen {
    pub fn new(seed: u64) -> Self {
        CorpusGen {
            rng: StdRng::seed_from_u64(seed),
        }
    }

    /// A corpus of `n` helpers; helper i may call helpers with larger
    /// indices, keeping the call graph acyclic with depth up to `n`.
    pub fn corpus(&mut self, n: usize) -> Corpus {
        let mut source = String::new();
        let mut target_body = String::new();
        for i in 0..n {
            let guard = match self.rng.gen_range(0..3) {
                0 => None,
                1 => Some("x".to_string()),
                _ => Some("x != 0".to_string()),
            };
            let mut body = String::new();
            match self.rng.gen_range(0..4) {
                0 => body.push_str("free(p);\n"),
                1 => body.push_str("p = malloc(x);\n"),
                2 => {}
                _ => body.push_str("tick(x);\n"),
            }
            if i + 1 < n && self.rng.gen_bool(0.7) {
                let callee = self.rng.gen_range(i + 1..n);
                body.push_str(&format!("helper_{callee}(x, p);\n"));
            }
            let inner = match guard {
                Some(g) => format!("if ({g}) {{\n{body}}}\n"),
                None => body,
            };
            source.push_str(&format!(
                "void helper_{i}(int x, int *p) {{\n{inner}}}\n\n"
            ));
            if self.rng.gen_bool(0.8) || i == 0 {
                target_body.push_str(&format!("helper_{i}(a, buf);\n"));
            }
        }
        source.push_str(&format!(
            "int target(int a, int *buf) {{\n{target_body}return 0;\n}}\n"
        ));
        Corpus {
            source,
            target: "target".to_string(),
        }
    }
}
