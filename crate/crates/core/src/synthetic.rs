//! Toy lexicons with known structure, for demos and end-to-end tests.
//!
//! Every word gets conventional senses whose vectors pool toy-embedded
//! definition tokens. Each slang sense copies one conventional sense of its
//! word through a fixed rotation of a random coordinate subspace plus
//! Gaussian noise, so a learned encoder can undo what raw distances cannot.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::embedding::{norm, toy_embedder, EmbeddingStore};
use crate::error::{Error, Result};
use crate::lexicon::{write_raw_records, RawRecord, SenseKind};
use crate::priors::{LmScoreTable, DEFAULT_ALPHA};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub words: usize,
    pub conventional_senses: usize,
    pub slang_senses: usize,
    pub dim: usize,
    /// Coordinates moved by the rotation; rounded down to an even count.
    pub rotated_dims: usize,
    /// Rotation angle in each rotated plane, radians.
    pub angle: f64,
    pub noise: f64,
    pub tokens_per_definition: usize,
    /// Swap noun and verb between conventional and slang usage.
    pub pos_shift: bool,
    /// Decades assigned round-robin to slang senses; empty for none.
    pub decades: Vec<i32>,
    /// Number of distractor words scored per slang sense in the LM table.
    pub lm_distractors: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            words: 60,
            conventional_senses: 3,
            slang_senses: 5,
            dim: 16,
            rotated_dims: 8,
            angle: 2.0,
            noise: 0.05,
            tokens_per_definition: 4,
            pos_shift: true,
            decades: Vec::new(),
            lm_distractors: 5,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, m: &str| Err(Error::config(f, m));
        if self.words < 2 {
            return field("words", "need at least two words");
        }
        if self.conventional_senses < 1 || self.slang_senses < 1 {
            return field("senses", "need at least one sense of each kind per word");
        }
        if self.dim < 2 || self.rotated_dims > self.dim {
            return field("rotated_dims", "must not exceed dim, and dim must be at least 2");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) || !self.angle.is_finite() {
            return field("noise", "noise and angle must be finite, noise non-negative");
        }
        if self.tokens_per_definition < 1 {
            return field("tokens_per_definition", "must be at least 1");
        }
        Ok(())
    }
}

/// Givens rotations on disjoint coordinate pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneRotation {
    pub pairs: Vec<(usize, usize)>,
    pub angle: f64,
}

impl PlaneRotation {
    pub fn random<R: Rng>(dim: usize, rotated: usize, angle: f64, rng: &mut R) -> Self {
        let mut coords: Vec<usize> = (0..dim).collect();
        coords.shuffle(rng);
        let pairs = coords[..rotated / 2 * 2]
            .chunks(2)
            .map(|c| (c[0], c[1]))
            .collect();
        PlaneRotation { pairs, angle }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (s, c) = self.angle.sin_cos();
        let mut out = v.to_vec();
        for &(i, j) in &self.pairs {
            out[i] = c * v[i] - s * v[j];
            out[j] = s * v[i] + c * v[j];
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub slang: Vec<RawRecord>,
    pub conventional: Vec<RawRecord>,
    /// Rows for every word and every sense id.
    pub vectors: EmbeddingStore,
    pub lm: LmScoreTable,
    pub rotation: PlaneRotation,
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gl", "pl",
    "sk", "st", "tr", "kr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];

/// Draws pronounceable lowercase tokens that never repeat.
struct TokenSource<'a> {
    used: HashSet<String>,
    rng: &'a mut ChaCha8Rng,
}

impl TokenSource<'_> {
    fn next(&mut self, syllables: usize) -> String {
        loop {
            let mut t = String::new();
            for _ in 0..syllables {
                t.push_str(ONSETS[self.rng.gen_range(0..ONSETS.len())]);
                t.push_str(VOWELS[self.rng.gen_range(0..VOWELS.len())]);
            }
            if crate::lexicon::STOPWORDS.contains(&t.as_str()) {
                continue;
            }
            if self.used.insert(t.clone()) {
                return t;
            }
        }
    }
}

fn pooled(tokens: &[String], dim: usize, seed: u64) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    for t in tokens {
        for (s, x) in sum.iter_mut().zip(toy_embedder(t, dim, seed)) {
            *s += x;
        }
    }
    sum.iter_mut().for_each(|s| *s /= tokens.len() as f64);
    sum
}

fn slang_pos(conventional: &str, shift: bool) -> &str {
    match (conventional, shift) {
        ("noun", true) => "verb",
        ("verb", true) => "noun",
        (pos, _) => pos,
    }
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rotation = PlaneRotation::random(cfg.dim, cfg.rotated_dims, cfg.angle, &mut rng);
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| Error::config("noise", e.to_string()))?;
    let mut token_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_70c5);
    let mut tokens = TokenSource {
        used: HashSet::new(),
        rng: &mut token_rng,
    };

    let words: Vec<String> = (0..cfg.words).map(|_| tokens.next(3)).collect();
    let mut vectors = EmbeddingStore::new(cfg.dim, "synthetic")?;
    let mut slang = Vec::new();
    let mut conventional = Vec::new();
    let mut slang_count = 0usize;

    for word in &words {
        let pos = ["noun", "verb", "adj"][rng.gen_range(0..3)];
        let mut conv_vectors = Vec::with_capacity(cfg.conventional_senses);
        for k in 0..cfg.conventional_senses {
            let defn: Vec<String> = (0..cfg.tokens_per_definition).map(|_| tokens.next(2)).collect();
            let id = format!("{word}/c{}", k + 1);
            let v = pooled(&defn, cfg.dim, cfg.seed);
            vectors.insert(id.clone(), &v)?;
            conv_vectors.push(v);
            conventional.push(RawRecord {
                id: Some(id),
                word: Some(word.clone()),
                definition: Some(defn.join(" ")),
                pos: Some(pos.to_string()),
                kind: Some(SenseKind::Conventional),
                ..RawRecord::default()
            });
        }
        let mut proto = vec![0.0; cfg.dim];
        for v in &conv_vectors {
            proto.iter_mut().zip(v).for_each(|(p, x)| *p += x);
        }
        let n = norm(&proto);
        vectors.insert(word.clone(), &proto.iter().map(|p| p / n).collect::<Vec<_>>())?;

        for k in 0..cfg.slang_senses {
            let source = &conv_vectors[rng.gen_range(0..conv_vectors.len())];
            let v: Vec<f64> = rotation
                .apply(source)
                .into_iter()
                .map(|x| x + noise.sample(&mut rng))
                .collect();
            let defn: Vec<String> = (0..cfg.tokens_per_definition).map(|_| tokens.next(2)).collect();
            let id = format!("{word}/s{}", k + 1);
            vectors.insert(id.clone(), &v)?;
            let decade = (!cfg.decades.is_empty())
                .then(|| i64::from(cfg.decades[slang_count % cfg.decades.len()]));
            slang_count += 1;
            slang.push(RawRecord {
                id: Some(id),
                word: Some(word.clone()),
                definition: Some(defn.join(" ")),
                pos: Some(slang_pos(pos, cfg.pos_shift).to_string()),
                kind: Some(SenseKind::Slang),
                decade,
                example: Some(format!("they said {word} again")),
                ..RawRecord::default()
            });
        }
    }

    let mut lm = LmScoreTable::new(DEFAULT_ALPHA)?;
    let mut lm_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x114d_5c0e);
    for r in &slang {
        let (id, word) = (r.id.as_deref().unwrap(), r.word.as_deref().unwrap());
        lm.insert(id, word, lm_rng.gen_range(0.005..0.02))?;
        for _ in 0..cfg.lm_distractors {
            let other = &words[lm_rng.gen_range(0..words.len())];
            if other != word {
                lm.insert(id, other, lm_rng.gen_range(0.0..0.02))?;
            }
        }
    }

    Ok(SyntheticData {
        slang,
        conventional,
        vectors,
        lm,
        rotation,
    })
}

/// Where [`write`] puts each file.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPaths {
    pub slang: PathBuf,
    pub conventional: PathBuf,
    pub vectors: PathBuf,
    pub lm_scores: PathBuf,
}

impl SyntheticPaths {
    pub fn in_dir(dir: &Path) -> Self {
        SyntheticPaths {
            slang: dir.join("slang.jsonl"),
            conventional: dir.join("conventional.jsonl"),
            vectors: dir.join("vectors.txt"),
            lm_scores: dir.join("lm_scores.tsv"),
        }
    }
}

pub fn write(data: &SyntheticData, dir: &Path, header: &str) -> Result<SyntheticPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = SyntheticPaths::in_dir(dir);
    write_raw_records(&paths.slang, &data.slang, header)?;
    write_raw_records(&paths.conventional, &data.conventional, header)?;
    data.vectors.write(&paths.vectors, header)?;
    data.lm.write(&paths.lm_scores, header)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::squared_distance;

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = PlaneRotation::random(10, 6, 1.1, &mut rng);
        assert_eq!(r.pairs.len(), 3);
        let a: Vec<f64> = (0..10).map(|i| i as f64 * 0.3 - 1.0).collect();
        let b: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let d0 = squared_distance(&a, &b);
        let d1 = squared_distance(&r.apply(&a), &r.apply(&b));
        assert!((d0 - d1).abs() < 1e-12);
        let fixed: HashSet<usize> = (0..10)
            .filter(|i| !r.pairs.iter().any(|&(p, q)| p == *i || q == *i))
            .collect();
        let ra = r.apply(&a);
        assert!(fixed.iter().all(|&i| ra[i] == a[i]));
    }

    #[test]
    fn generation_is_deterministic_and_well_formed() {
        let cfg = SyntheticConfig {
            words: 12,
            decades: vec![1950, 1960],
            ..SyntheticConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.slang, b.slang);
        assert_eq!(a.conventional, b.conventional);
        assert_eq!(a.lm, b.lm);
        assert_eq!(a.slang.len(), 60);
        assert_eq!(a.conventional.len(), 36);
        assert_eq!(a.vectors.len(), 12 + 96);
        assert!(a.slang.iter().all(|r| matches!(r.decade, Some(1950 | 1960))));

        let ingested = crate::lexicon::ingest(&a.slang, &a.conventional, &Default::default()).unwrap();
        assert!(ingested.rejections.is_empty(), "{:?}", ingested.rejections);
        assert_eq!(ingested.lexicon.slang().len(), 60);
    }

    #[test]
    fn pos_shift_swaps_noun_and_verb() {
        let d = generate(&SyntheticConfig {
            words: 30,
            ..SyntheticConfig::default()
        })
        .unwrap();
        for s in &d.slang {
            let c = d
                .conventional
                .iter()
                .find(|c| c.word == s.word)
                .unwrap();
            let expect = slang_pos(c.pos.as_deref().unwrap(), true);
            assert_eq!(s.pos.as_deref(), Some(expect));
        }
    }
}
