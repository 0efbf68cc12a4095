use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{Lexicon, TagSet};
use crate::error::{Error, Result};

/// Probability distribution over a [`TagSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct PosDistribution {
    pub probs: Vec<f64>,
}

impl PosDistribution {
    pub fn uniform(n: usize) -> Self {
        PosDistribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Normalizes non-negative weights; all-zero weights give the uniform
    /// distribution.
    pub fn from_weights(weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            PosDistribution {
                probs: weights.into_iter().map(|w| w / total).collect(),
            }
        } else {
            PosDistribution::uniform(weights.len())
        }
    }
}

/// Per-word raw tag counts, keyed by source tag.
#[derive(Debug, Clone, Default)]
pub struct PosCounts {
    counts: HashMap<String, BTreeMap<String, f64>>,
}

impl PosCounts {
    pub fn add(&mut self, word: &str, tag: &str, count: f64) {
        *self
            .counts
            .entry(word.to_string())
            .or_default()
            .entry(tag.to_string())
            .or_insert(0.0) += count;
    }

    pub fn get(&self, word: &str) -> Option<&BTreeMap<String, f64>> {
        self.counts.get(word)
    }

    /// Reads `word tag count` rows. Blank lines and `#` comments are skipped.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut out = PosCounts::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = if line.contains('\t') {
                line.split('\t').collect()
            } else {
                line.split_whitespace().collect()
            };
            let parse_err = |message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: message.to_string(),
            };
            if cols.len() != 3 {
                return Err(parse_err("expected columns word, tag, count"));
            }
            let count: f64 = cols[2].trim().parse().map_err(|_| parse_err("bad count"))?;
            if !(count >= 0.0 && count.is_finite()) {
                return Err(parse_err("count must be finite and non-negative"));
            }
            let word = super::normalize_word(cols[0]);
            out.add(&word, cols[1].trim(), count);
        }
        Ok(out)
    }

    /// Counts the tags of each word's conventional senses.
    pub fn from_conventional(lex: &Lexicon) -> Self {
        let mut out = PosCounts::default();
        for sense in lex.conventional_senses() {
            out.add(&sense.word, &sense.pos, 1.0);
        }
        out
    }
}

fn mapped_weights(counts: &BTreeMap<String, f64>, tag_set: &TagSet) -> Vec<f64> {
    let mut weights = vec![0.0; tag_set.len()];
    for (tag, &c) in counts {
        let category = tag_set.categorize(tag);
        let i = tag_set.index_of(category).expect("categorize returns a member tag");
        weights[i] += c.max(0.0);
    }
    weights
}

/// A word's POS profile from `counts`, falling back to `fallback` when the
/// primary source has no mass for the word.
pub fn pos_distribution(
    word: &str,
    counts: &PosCounts,
    fallback: &PosCounts,
    tag_set: &TagSet,
) -> PosDistribution {
    for source in [counts, fallback] {
        if let Some(c) = source.get(word) {
            let weights = mapped_weights(c, tag_set);
            if weights.iter().sum::<f64>() > 0.0 {
                return PosDistribution::from_weights(weights);
            }
        }
    }
    PosDistribution::uniform(tag_set.len())
}
