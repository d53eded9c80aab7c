//! Code-similarity components for the similarity-based baseline: token-set
//! Jaccard, called-name Jaccard, normalized token edit distance, and BM25
//! over the sample's callee corpus. The combined score is their mean, each
//! component normalized into [0, 1].

use std::collections::BTreeSet;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

/// Split code into identifier/number runs and single punctuation characters.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            cur.push(c);
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Names that look like calls: identifier immediately followed by `(`,
/// control keywords excluded. Token-level, so it works on snippets the
/// parser rejects.
pub fn called_names(text: &str) -> BTreeSet<String> {
    const KEYWORDS: [&str; 8] = ["if", "while", "for", "switch", "return", "sizeof", "case", "do"];
    let toks = tokenize(text);
    let mut out = BTreeSet::new();
    for w in toks.windows(2) {
        let ident = &w[0];
        if w[1] == "("
            && ident
                .chars()
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_')
            && !KEYWORDS.contains(&ident.as_str())
        {
            out.insert(ident.clone());
        }
    }
    out
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    intersection / union
}

/// Classic two-row dynamic-programming edit distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Okapi BM25 over a fixed document corpus.
pub struct Bm25 {
    docs: Vec<Vec<String>>,
    avgdl: f64,
    k1: f64,
    b: f64,
}

impl Bm25 {
    pub fn new(docs: Vec<Vec<String>>, k1: f64, b: f64) -> Self {
        let avgdl = if docs.is_empty() {
            0.0
        } else {
            docs.iter().map(|d| d.len() as f64).sum::<f64>() / docs.len() as f64
        };
        Bm25 { docs, avgdl, k1, b }
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self
            .docs
            .iter()
            .filter(|d| d.iter().any(|t| t == term))
            .count() as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    pub fn score(&self, query: &[String], doc_index: usize) -> f64 {
        let doc = &self.docs[doc_index];
        if doc.is_empty() || self.avgdl == 0.0 {
            return 0.0;
        }
        let dl = doc.len() as f64;
        let query_terms: BTreeSet<&String> = query.iter().collect();
        let mut total = 0.0;
        for term in query_terms {
            let tf = doc.iter().filter(|t| *t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let idf = self.idf(term);
            total += idf * (tf * (self.k1 + 1.0))
                / (tf + self.k1 * (1.0 - self.b + self.b * dl / self.avgdl));
        }
        total
    }
}

/// Combined similarity of each corpus document against a target snippet.
pub struct Similarity {
    corpus: Vec<String>,
    corpus_tokens: Vec<Vec<String>>,
    bm25: Bm25,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityComponents {
    pub token_jaccard: f64,
    pub call_jaccard: f64,
    pub edit: f64,
    pub bm25: f64,
}

impl SimilarityComponents {
    pub fn mean(&self) -> f64 {
        (self.token_jaccard + self.call_jaccard + self.edit + self.bm25) / 4.0
    }
}

impl Similarity {
    /// `corpus` is the sample's callee bodies; BM25 statistics come from it.
    pub fn new(corpus: Vec<String>) -> Self {
        let corpus_tokens: Vec<Vec<String>> = corpus.iter().map(|c| tokenize(c)).collect();
        let bm25 = Bm25::new(corpus_tokens.clone(), BM25_K1, BM25_B);
        Similarity {
            corpus,
            corpus_tokens,
            bm25,
        }
    }

    pub fn len(&self) -> usize {
        self.corpus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corpus.is_empty()
    }

    /// All four components of `target` vs corpus document `idx`. The BM25
    /// component is min-max normalized across the corpus for this target.
    pub fn components(&self, target: &str, idx: usize) -> SimilarityComponents {
        let target_tokens = tokenize(target);
        let target_set: BTreeSet<String> = target_tokens.iter().cloned().collect();
        let doc_set: BTreeSet<String> = self.corpus_tokens[idx].iter().cloned().collect();
        let token_jaccard = jaccard(&target_set, &doc_set);
        let call_jaccard = jaccard(&called_names(target), &called_names(&self.corpus[idx]));
        let max_len = target_tokens.len().max(self.corpus_tokens[idx].len());
        let edit = if max_len == 0 {
            1.0
        } else {
            1.0 - levenshtein(&target_tokens, &self.corpus_tokens[idx]) as f64 / max_len as f64
        };
        let raw: Vec<f64> = (0..self.corpus.len())
            .map(|i| self.bm25.score(&target_tokens, i))
            .collect();
        let (min, max) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
        let bm25 = if max > min {
            (raw[idx] - min) / (max - min)
        } else {
            0.0
        };
        SimilarityComponents {
            token_jaccard,
            call_jaccard,
            edit,
            bm25,
        }
    }

    /// Equal-weight mean of the four components, in [0, 1].
    pub fn score(&self, target: &str, idx: usize) -> f64 {
        self.components(target, idx).mean()
    }

    /// Weighted combination; weights are normalized by their sum.
    pub fn score_weighted(&self, target: &str, idx: usize, weights: &[f64; 4]) -> f64 {
        let c = self.components(target, idx);
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        (c.token_jaccard * weights[0]
            + c.call_jaccard * weights[1]
            + c.edit * weights[2]
            + c.bm25 * weights[3])
            / total
    }
}

/// Combined similarity of `callee` against `target`, with `corpus` (the
/// sample's callee bodies) supplying the BM25 statistics. `callee` must be
/// one of the corpus documents.
pub fn similarity_score(target: &str, callee: &str, corpus: &[String]) -> f64 {
    let sim = Similarity::new(corpus.to_vec());
    match corpus.iter().position(|c| c == callee) {
        Some(idx) => sim.score(target, idx),
        None => {
            let mut extended = corpus.to_vec();
            extended.push(callee.to_string());
            Similarity::new(extended).score(target, corpus.len())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_worked_example() {
        let a: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let b: BTreeSet<String> = ["b", "c"].iter().map(|s| s.to_string()).collect();
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn levenshtein_kitten_sitting() {
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        assert_eq!(levenshtein(&a, &b), 3);
    }

    #[test]
    fn identical_texts_score_components_at_one() {
        let sim = Similarity::new(vec![
            "int f(void) { return g(); }".to_string(),
            "void other(void) { }".to_string(),
        ]);
        let c = sim.components("int f(void) { return g(); }", 0);
        assert_eq!(c.token_jaccard, 1.0);
        assert_eq!(c.edit, 1.0);
        assert_eq!(c.call_jaccard, 1.0);
    }

    #[test]
    fn disjoint_texts_score_near_zero() {
        let sim = Similarity::new(vec!["aaa bbb ccc".to_string(), "xx yy".to_string()]);
        let c = sim.components("qq ww ee", 0);
        assert_eq!(c.token_jaccard, 0.0);
        assert!(c.edit <= 0.01);
    }

    #[test]
    fn bm25_prefers_rare_token_overlap() {
        // five docs; `frobnicate` is rare, `int` is everywhere
        let docs = vec![
            "int frobnicate ( buffer )".to_string(),
            "int a ; int b ; int c".to_string(),
            "int x".to_string(),
            "int y".to_string(),
            "int z".to_string(),
        ];
        let sim = Similarity::new(docs);
        let target = "int frobnicate ( p )";
        let rare = sim.components(target, 0).bm25;
        let ubiquitous = sim.components(target, 1).bm25;
        assert!(
            rare > ubiquitous,
            "rare-token doc ranked below ubiquitous-token doc: {rare} vs {ubiquitous}"
        );
    }

    #[test]
    fn called_names_picks_calls_not_keywords() {
        let names = called_names("if (x) { free(p); blk_end_request_all(rq, 0); }");
        assert!(names.contains("free"));
        assert!(names.contains("blk_end_request_all"));
        assert!(!names.contains("if"));
    }

    #[test]
    fn combined_score_stays_in_unit_interval() {
        let corpus = vec![
            "int f(void) { return g(); }".to_string(),
            "void h(int *p) { free(p); }".to_string(),
        ];
        for callee in &corpus {
            let s = similarity_score("int f(void) { return g(); }", callee, &corpus);
            assert!((0.0..=1.0).contains(&s), "{s}");
        }
        let sim = Similarity::new(corpus);
        let equal = sim.score("int f(void) { return g(); }", 0);
        let weighted = sim.score_weighted(
            "int f(void) { return g(); }",
            0,
            &[0.25, 0.25, 0.25, 0.25],
        );
        assert!((equal - weighted).abs() < 1e-12);
    }
}
