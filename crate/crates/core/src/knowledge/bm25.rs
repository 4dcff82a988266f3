use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

/// Scores candidate documents against a query; higher is more relevant.
pub trait RelevanceScorer {
    fn score(&self, query: &str, docs: &[&str]) -> Vec<f64>;
}

/// Lowercased alphanumeric runs; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Okapi BM25 with `idf = ln(1 + (N - n + 0.5) / (n + 0.5))`.
///
/// `N`, `n` and the average length are taken over the documents that share
/// at least one term with the query, so documents with no overlap neither
/// score nor influence the ranking of the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25 {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25 {
    fn default() -> Self {
        Bm25 { k1: 1.2, b: 0.75 }
    }
}

impl RelevanceScorer for Bm25 {
    fn score(&self, query: &str, docs: &[&str]) -> Vec<f64> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let tokenized: Vec<Vec<String>> = docs.iter().map(|d| tokenize(d)).collect();
        let counts: Vec<BTreeMap<&str, usize>> = tokenized
            .iter()
            .map(|toks| {
                let mut m = BTreeMap::new();
                for t in toks {
                    *m.entry(t.as_str()).or_insert(0) += 1;
                }
                m
            })
            .collect();
        let matching: Vec<usize> =
            (0..docs.len()).filter(|&i| terms.iter().any(|t| counts[i].contains_key(t.as_str()))).collect();
        let mut scores = alloc::vec![0.0; docs.len()];
        if matching.is_empty() {
            return scores;
        }
        let n_docs = matching.len() as f64;
        let avg_len = matching.iter().map(|&i| tokenized[i].len() as f64).sum::<f64>() / n_docs;
        for term in &terms {
            let df = matching.iter().filter(|&&i| counts[i].contains_key(term.as_str())).count() as f64;
            if df == 0.0 {
                continue;
            }
            let idf = libm::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            for &i in &matching {
                let Some(&tf) = counts[i].get(term.as_str()) else { continue };
                let tf = tf as f64;
                let len = tokenized[i].len() as f64;
                let norm = self.k1 * (1.0 - self.b + self.b * len / avg_len);
                scores[i] += idf * tf * (self.k1 + 1.0) / (tf + norm);
            }
        }
        scores
    }
}
