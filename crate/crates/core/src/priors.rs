//! Contextual priors over the vocabulary: uniform, syntactic shift from a POS
//! transition matrix, linguistic context from imported LM scores, and their
//! products.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lexicon::{pos_distribution, Lexicon, PosCounts, PosDistribution, TagSet};

pub const DEFAULT_ALPHA: f64 = 0.001;
pub const DEFAULT_QUERY_EPSILON: f64 = 0.1;
const PROB_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    Uniform,
    Syntactic,
    Linguistic,
    Combined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector {
    pub probs: Vec<f64>,
    pub kind: PriorKind,
}

impl PriorVector {
    fn normalized(weights: Vec<f64>, kind: PriorKind) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Numerical(format!("{kind:?} prior has no mass")));
        }
        Ok(PriorVector {
            probs: weights.into_iter().map(|w| w / total).collect(),
            kind,
        })
    }
}

pub fn uniform_prior(vocabulary: &[String]) -> Result<PriorVector> {
    if vocabulary.is_empty() {
        return Err(Error::data("uniform prior over an empty vocabulary"));
    }
    let n = vocabulary.len();
    Ok(PriorVector {
        probs: vec![1.0 / n as f64; n],
        kind: PriorKind::Uniform,
    })
}

/// Elementwise product of aligned priors, renormalized.
pub fn combine_priors(priors: &[PriorVector]) -> Result<PriorVector> {
    let first = priors
        .first()
        .ok_or_else(|| Error::data("no priors to combine"))?;
    let mut product = first.probs.clone();
    for p in &priors[1..] {
        if p.probs.len() != product.len() {
            return Err(Error::Dimension {
                expected: product.len(),
                got: p.probs.len(),
            });
        }
        product.iter_mut().zip(&p.probs).for_each(|(a, b)| *a *= b);
    }
    let kind = if priors.len() == 1 {
        first.kind
    } else {
        PriorKind::Combined
    };
    PriorVector::normalized(product, kind)
}

/// Which priors a model multiplies together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PriorSpec {
    pub ssp: bool,
    pub lcp: bool,
}

impl PriorSpec {
    pub const UNIFORM: PriorSpec = PriorSpec {
        ssp: false,
        lcp: false,
    };
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.ssp, self.lcp) {
            (false, false) => "uniform",
            (true, false) => "ssp",
            (false, true) => "lcp",
            (true, true) => "ssp+lcp",
        })
    }
}

impl FromStr for PriorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = PriorSpec::default();
        for part in s.split('+').map(|p| p.trim().to_lowercase()) {
            match part.as_str() {
                "uniform" => {}
                "ssp" => spec.ssp = true,
                "lcp" => spec.lcp = true,
                other => {
                    return Err(Error::config("prior", format!("unknown prior `{other}`")));
                }
            }
        }
        Ok(spec)
    }
}

/// Column-stochastic matrix of POS shifts: rows are slang tags, columns
/// conventional tags.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    tag_set: TagSet,
    /// Row-major, `n × n`.
    t: Vec<f64>,
}

impl TransitionMatrix {
    /// Counts (slang tag, conventional tag) pairs over every training slang
    /// sense and every conventional sense of its word, then normalizes
    /// columns. Unobserved columns are uniform.
    pub fn estimate(train_ids: &[String], lex: &Lexicon) -> Result<Self> {
        if train_ids.is_empty() {
            return Err(Error::data("transition matrix needs training senses"));
        }
        let tags = lex.tag_set();
        let n = tags.len();
        let mut counts = vec![0.0; n * n];
        for id in train_ids {
            let s = lex.require_slang(id)?;
            let row = tags
                .index_of(&s.pos)
                .ok_or_else(|| Error::UnknownTag(s.pos.clone()))?;
            for c in lex.conventional(&s.word) {
                let col = tags
                    .index_of(&c.pos)
                    .ok_or_else(|| Error::UnknownTag(c.pos.clone()))?;
                counts[row * n + col] += 1.0;
            }
        }
        Ok(Self::from_counts(tags.clone(), counts))
    }

    fn from_counts(tag_set: TagSet, mut t: Vec<f64>) -> Self {
        let n = tag_set.len();
        for col in 0..n {
            let total: f64 = (0..n).map(|r| t[r * n + col]).sum();
            for r in 0..n {
                t[r * n + col] = if total > 0.0 {
                    t[r * n + col] / total
                } else {
                    1.0 / n as f64
                };
            }
        }
        TransitionMatrix { tag_set, t }
    }

    pub fn tag_set(&self) -> &TagSet {
        &self.tag_set
    }

    /// Probability of slang tag `row` given conventional tag `col`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.t[row * self.tag_set.len() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.tag_set.len()).map(|r| self.get(r, col)).collect()
    }

    pub fn apply(&self, dist: &PosDistribution) -> Result<PosDistribution> {
        let n = self.tag_set.len();
        if dist.probs.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: dist.probs.len(),
            });
        }
        Ok(PosDistribution {
            probs: (0..n)
                .map(|r| (0..n).map(|c| self.get(r, c) * dist.probs[c]).sum())
                .collect(),
        })
    }

    /// Tab-separated grid: a header row of conventional tags, then one row
    /// per slang tag.
    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        let mut out = String::from(header);
        out.push_str("slang\\conventional");
        for tag in self.tag_set.tags() {
            out.push('\t');
            out.push_str(tag);
        }
        out.push('\n');
        for (r, tag) in self.tag_set.tags().iter().enumerate() {
            out.push_str(tag);
            for c in 0..self.tag_set.len() {
                out.push_str(&format!("\t{}", self.get(r, c)));
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hn, head) = rows.next().ok_or_else(|| parse_err(1, "empty matrix file"))?;
        let tags: Vec<&str> = head.split('\t').skip(1).collect();
        let tag_set = TagSet::new(tags.iter().copied()).map_err(|e| parse_err(hn + 1, &e.to_string()))?;
        let n = tag_set.len();
        let mut t = vec![0.0; n * n];
        let mut seen = 0;
        for (ln, line) in rows {
            let cols: Vec<&str> = line.split('\t').collect();
            if seen >= n || cols.len() != n + 1 || cols[0] != tags[seen] {
                return Err(parse_err(ln + 1, "row does not match the tag header"));
            }
            for c in 0..n {
                let v: f64 = cols[c + 1]
                    .parse()
                    .map_err(|_| parse_err(ln + 1, "bad probability"))?;
                t[seen * n + c] = v;
            }
            seen += 1;
        }
        if seen != n {
            return Err(parse_err(hn + 1, "matrix is not square"));
        }
        Ok(TransitionMatrix { tag_set, t })
    }
}

/// `1 − epsilon` on `tag`, the rest spread evenly over the other tags.
pub fn smoothed_query_distribution(tag: &str, tag_set: &TagSet, epsilon: f64) -> Result<PosDistribution> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::config("query_epsilon", format!("{epsilon} is outside [0, 1)")));
    }
    let i = tag_set
        .index_of(tag)
        .ok_or_else(|| Error::UnknownTag(tag.to_string()))?;
    let n = tag_set.len();
    let rest = if n > 1 { epsilon / (n - 1) as f64 } else { 0.0 };
    let mut probs = vec![rest; n];
    probs[i] = if n > 1 { 1.0 - epsilon } else { 1.0 };
    Ok(PosDistribution { probs })
}

fn floored(p: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = p.iter().map(|x| x.max(PROB_FLOOR)).collect();
    let total: f64 = v.iter().sum();
    v.into_iter().map(|x| x / total).collect()
}

/// `KL(p ‖ q)` in nats after flooring both at 1e-10.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = (floored(p), floored(q));
    p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Conventional POS profile of every vocabulary word, in vocabulary order.
pub fn word_pos_distributions(
    lex: &Lexicon,
    counts: &PosCounts,
    fallback: &PosCounts,
) -> Vec<PosDistribution> {
    lex.vocabulary()
        .iter()
        .map(|w| pos_distribution(w, counts, fallback, lex.tag_set()))
        .collect()
}

/// `∝ exp(−KL(P_w ‖ T·P_S))^½` where `P_S` is the smoothed query tag.
pub fn syntactic_prior(
    query_tag: &str,
    word_dists: &[PosDistribution],
    t: &TransitionMatrix,
    epsilon: f64,
) -> Result<PriorVector> {
    let query = smoothed_query_distribution(query_tag, t.tag_set(), epsilon)?;
    let shifted = t.apply(&query)?;
    let scores = word_dists
        .iter()
        .map(|d| {
            if d.probs.len() != shifted.probs.len() {
                return Err(Error::Dimension {
                    expected: shifted.probs.len(),
                    got: d.probs.len(),
                });
            }
            Ok((-kl_divergence(&d.probs, &shifted.probs)).exp().sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    PriorVector::normalized(scores, PriorKind::Syntactic)
}

/// Imported LM infilling scores per (slang sense, candidate word).
#[derive(Debug, Clone, PartialEq)]
pub struct LmScoreTable {
    pub alpha: f64,
    scores: BTreeMap<String, BTreeMap<String, f64>>,
}

impl LmScoreTable {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::config("alpha", format!("{alpha} is not positive")));
        }
        Ok(LmScoreTable {
            alpha,
            scores: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, sense_id: &str, word: &str, score: f64) -> Result<()> {
        if !(score >= 0.0 && score.is_finite()) {
            return Err(Error::data(format!(
                "score {score} for ({sense_id}, {word}) is not finite and non-negative"
            )));
        }
        self.scores
            .entry(sense_id.to_string())
            .or_default()
            .insert(word.to_string(), score);
        Ok(())
    }

    pub fn score(&self, sense_id: &str, word: &str) -> f64 {
        self.scores
            .get(sense_id)
            .and_then(|m| m.get(word))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn has_sense(&self, sense_id: &str) -> bool {
        self.scores.contains_key(sense_id)
    }

    pub fn len(&self) -> usize {
        self.scores.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Reads an `alpha <value>` line followed by `sense_id word score` rows.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut table: Option<LmScoreTable> = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            match &mut table {
                None => {
                    if cols.len() != 2 || cols[0] != "alpha" {
                        return Err(parse_err(n + 1, "expected `alpha <value>`".into()));
                    }
                    let alpha = cols[1]
                        .parse()
                        .map_err(|_| parse_err(n + 1, "bad alpha".into()))?;
                    table = Some(LmScoreTable::new(alpha).map_err(|e| parse_err(n + 1, e.to_string()))?);
                }
                Some(t) => {
                    if cols.len() != 3 {
                        return Err(parse_err(n + 1, "expected columns sense_id, word, score".into()));
                    }
                    let score: f64 = cols[2]
                        .parse()
                        .map_err(|_| parse_err(n + 1, "bad score".into()))?;
                    t.insert(cols[0], cols[1], score)
                        .map_err(|e| parse_err(n + 1, e.to_string()))?;
                }
            }
        }
        table.ok_or_else(|| parse_err(1, "missing `alpha` header".into()))
    }

    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "{header}alpha {}", self.alpha).map_err(io)?;
        for (sense, words) in &self.scores {
            for (word, score) in words {
                writeln!(out, "{sense}\t{word}\t{score}").map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }

    /// Rows naming senses or words the lexicon does not know.
    pub fn validate(&self, lex: &Lexicon) -> Vec<String> {
        let mut warnings = Vec::new();
        for (sense, words) in &self.scores {
            if lex.slang_sense(sense).is_none() {
                warnings.push(format!("unknown slang sense `{sense}`"));
            }
            for word in words.keys() {
                if lex.word_index(word).is_none() {
                    warnings.push(format!("unknown word `{word}` for sense `{sense}`"));
                }
            }
        }
        warnings
    }
}

/// `∝ score(sense, w) + alpha` over the vocabulary.
pub fn linguistic_prior(sense_id: &str, table: &LmScoreTable, vocabulary: &[String]) -> Result<PriorVector> {
    if vocabulary.is_empty() {
        return Err(Error::data("linguistic prior over an empty vocabulary"));
    }
    let weights = vocabulary
        .iter()
        .map(|w| table.score(sense_id, w) + table.alpha)
        .collect();
    PriorVector::normalized(weights, PriorKind::Linguistic)
}

/// Everything needed to build the prior of any slang sense.
#[derive(Debug, Clone)]
pub struct PriorContext {
    pub spec: PriorSpec,
    pub transition: Option<TransitionMatrix>,
    pub word_dists: Vec<PosDistribution>,
    pub lm: Option<LmScoreTable>,
    pub epsilon: f64,
}

impl PriorContext {
    pub fn uniform() -> Self {
        PriorContext {
            spec: PriorSpec::UNIFORM,
            transition: None,
            word_dists: Vec::new(),
            lm: None,
            epsilon: DEFAULT_QUERY_EPSILON,
        }
    }

    pub fn prior(&self, sense_id: &str, lex: &Lexicon) -> Result<PriorVector> {
        let mut parts = vec![uniform_prior(lex.vocabulary())?];
        if self.spec.ssp {
            let t = self
                .transition
                .as_ref()
                .ok_or_else(|| Error::config("prior", "ssp needs a transition matrix"))?;
            let s = lex.require_slang(sense_id)?;
            parts.push(syntactic_prior(&s.pos, &self.word_dists, t, self.epsilon)?);
        }
        if self.spec.lcp {
            let lm = self
                .lm
                .as_ref()
                .ok_or_else(|| Error::config("lm_scores", "lcp needs an LM score table"))?;
            parts.push(linguistic_prior(sense_id, lm, lex.vocabulary())?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        combine_priors(&parts[1..])
    }
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}
