//! Fixed-dimension word and sense vectors, sentence pooling, and cosine
//! neighborhoods in word-vector space.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lexicon::{content_words, Lexicon, WordSet, PHRASE_JOINER};

/// Norm below which a vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `1 − cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu < ZERO_NORM || nv < ZERO_NORM {
        return Err(Error::ZeroVector);
    }
    Ok((1.0 - dot(u, v) / (nu * nv)).clamp(0.0, 2.0))
}

/// Word and sense vectors keyed by id, all of one dimension.
///
/// Words and sense ids share one namespace; the shipped id scheme
/// (`word/s1`, `word/c2`) keeps them apart.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
    pub source: String,
}

impl EmbeddingStore {
    pub fn new(dim: usize, source: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::data("embedding dimension must be positive"));
        }
        Ok(EmbeddingStore {
            dim,
            ids: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
            source: source.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Adds or replaces the vector for `id`.
    pub fn insert(&mut self, id: impl Into<String>, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite vector component".into()));
        }
        let id = id.into();
        match self.index.get(&id) {
            Some(&i) => self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector),
            None => {
                self.index.insert(id.clone(), self.ids.len());
                self.ids.push(id);
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        let i = *self.index.get(id)?;
        Some(&self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Vector for a vocabulary word. Multiword entries missing from the
    /// store are pooled from their parts.
    pub fn word_vector(&self, word: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.get(word) {
            return Ok(v.to_vec());
        }
        if word.contains(PHRASE_JOINER) {
            let parts: Vec<&[f64]> = word
                .split(PHRASE_JOINER)
                .filter_map(|p| self.get(p))
                .collect();
            if let Some(pooled) = pool_normalized(&parts, self.dim) {
                if norm(&pooled) >= ZERO_NORM {
                    return Ok(pooled);
                }
            }
        }
        Err(Error::MissingVector(word.to_string()))
    }

    /// Reads the `dim <d> count <n>` vector file format. Leading `#` lines
    /// are skipped.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (hn, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (dim, count) = match fields.as_slice() {
            ["dim", d, "count", n] => (
                d.parse::<usize>().map_err(|_| parse_err(hn + 1, "bad dim".into()))?,
                n.parse::<usize>().map_err(|_| parse_err(hn + 1, "bad count".into()))?,
            ),
            _ => return Err(parse_err(hn + 1, "expected `dim <d> count <n>`".into())),
        };
        let mut store = EmbeddingStore::new(dim, path.display().to_string())?;
        for (n, line) in lines {
            let (id, values) = line
                .split_once('\t')
                .ok_or_else(|| parse_err(n + 1, "expected `id<TAB>values`".into()))?;
            let vector: Vec<f64> = values
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(n + 1, format!("bad float: {e}")))?;
            if store.index.contains_key(id) {
                return Err(parse_err(n + 1, format!("duplicate id `{id}`")));
            }
            store
                .insert(id, &vector)
                .map_err(|e| parse_err(n + 1, e.to_string()))?;
        }
        if store.len() != count {
            return Err(parse_err(
                hn + 1,
                format!("header declares {count} rows, found {}", store.len()),
            ));
        }
        Ok(store)
    }

    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        let mut out = String::from(header);
        writeln!(out, "dim {} count {}", self.dim, self.len()).unwrap();
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            out.push('\t');
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{x}").unwrap();
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn pool_normalized(vectors: &[&[f64]], dim: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut used = 0usize;
    for v in vectors {
        let n = norm(v);
        if n < ZERO_NORM {
            continue;
        }
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += x / n;
        }
        used += 1;
    }
    if used == 0 {
        return None;
    }
    for s in &mut sum {
        *s /= used as f64;
    }
    Some(sum)
}

/// Mean of unit-normalized content-word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub vector: Vec<f64>,
    /// The pooled vector is (numerically) zero and has no direction.
    pub degenerate: bool,
}

/// Average-pools the normalized vectors of the definition's content words.
/// Words absent from the store are skipped.
pub fn sentence_embedding(
    definition: &str,
    store: &EmbeddingStore,
    stopwords: &WordSet,
) -> Result<SentenceVector> {
    let words = content_words(definition, stopwords);
    let found: Vec<&[f64]> = words.iter().filter_map(|w| store.get(w)).collect();
    let vector = pool_normalized(&found, store.dim())
        .ok_or_else(|| Error::Unembeddable(definition.to_string()))?;
    let degenerate = norm(&vector) < ZERO_NORM;
    Ok(SentenceVector { vector, degenerate })
}

/// Vector of a dictionary sense: the store's row for the sense id when
/// present, otherwise the pooled definition.
pub fn sense_vector(
    id: &str,
    definition: &str,
    store: &EmbeddingStore,
    stopwords: &WordSet,
) -> Result<SentenceVector> {
    match store.get(id) {
        Some(v) => Ok(SentenceVector {
            vector: v.to_vec(),
            degenerate: norm(v) < ZERO_NORM,
        }),
        None => sentence_embedding(definition, store, stopwords),
    }
}

/// Resolved, non-degenerate vectors of every sense in a lexicon. Senses
/// that cannot be embedded are listed in `excluded` with the reason.
#[derive(Debug, Clone)]
pub struct SenseTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    pub excluded: Vec<(String, String)>,
}

impl SenseTable {
    pub fn build(lex: &Lexicon, store: &EmbeddingStore, stopwords: &WordSet) -> Self {
        let mut vectors = HashMap::new();
        let mut excluded = Vec::new();
        for sense in lex.slang().iter().chain(lex.conventional_senses()) {
            match sense_vector(&sense.id, &sense.definition, store, stopwords) {
                Ok(sv) if sv.degenerate => {
                    excluded.push((sense.id.clone(), "degenerate sentence vector".to_string()))
                }
                Ok(sv) => {
                    vectors.insert(sense.id.clone(), sv.vector);
                }
                Err(e) => excluded.push((sense.id.clone(), e.to_string())),
            }
        }
        if !excluded.is_empty() {
            log::warn!("{} senses could not be embedded", excluded.len());
        }
        SenseTable {
            dim: store.dim(),
            vectors,
            excluded,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vectors.contains_key(id)
    }

    pub fn require(&self, id: &str) -> Result<&[f64]> {
        self.get(id).ok_or_else(|| Error::MissingVector(id.to_string()))
    }

    /// Applies `f` to every vector, e.g. to move the table into an encoded
    /// space.
    pub fn map<F>(&self, f: F) -> Result<SenseTable>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let mut vectors = HashMap::with_capacity(self.vectors.len());
        let mut dim = self.dim;
        for (id, v) in &self.vectors {
            let mapped = f(v)?;
            dim = mapped.len();
            vectors.insert(id.clone(), mapped);
        }
        Ok(SenseTable {
            dim,
            vectors,
            excluded: self.excluded.clone(),
        })
    }
}

/// Deterministic pseudo-random unit vector for `(token, seed)`.
pub fn toy_embedder(token: &str, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 1, "toy_embedder needs dim >= 1");
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(token.as_bytes());
    let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = norm(&v);
        if n > ZERO_NORM {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Unit-normalized word vectors aligned with a vocabulary.
#[derive(Debug, Clone)]
pub struct WordSpace {
    words: Vec<String>,
    unit: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl WordSpace {
    pub fn new(store: &EmbeddingStore, vocabulary: &[String]) -> Result<Self> {
        let mut unit = Vec::with_capacity(vocabulary.len());
        for w in vocabulary {
            let v = store.word_vector(w)?;
            let n = norm(&v);
            if n < ZERO_NORM {
                return Err(Error::MissingVector(w.clone()));
            }
            unit.push(v.into_iter().map(|x| x / n).collect());
        }
        Ok(WordSpace {
            words: vocabulary.to_vec(),
            unit,
            index: vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    /// Cosine distance between vocabulary words `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        (1.0 - dot(&self.unit[i], &self.unit[j])).clamp(0.0, 2.0)
    }

    /// All other words ordered by ascending distance to `i`, ties by
    /// vocabulary order.
    pub fn ordered_from(&self, i: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = (0..self.len())
            .filter(|&j| j != i)
            .map(|j| (j, self.distance(i, j)))
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    pub fn neighborhood(&self, k: usize) -> Result<Neighborhood> {
        if k >= self.len() {
            return Err(Error::config(
                "k",
                format!("neighborhood size {k} needs a larger vocabulary than {}", self.len()),
            ));
        }
        let lists = (0..self.len())
            .map(|i| {
                let mut ordered = self.ordered_from(i);
                ordered.truncate(k);
                ordered
            })
            .collect();
        Ok(Neighborhood {
            words: self.words.clone(),
            k,
            lists,
        })
    }

    /// 1-based rank of `j` among all other words by distance to `i`,
    /// divided by `|V| − 1`.
    pub fn rank_percentile(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::data("rank of a word relative to itself"));
        }
        let dij = self.distance(i, j);
        let closer = (0..self.len())
            .filter(|&x| x != i && x != j)
            .filter(|&x| {
                let d = self.distance(i, x);
                d < dij || (d == dij && x < j)
            })
            .count();
        Ok((closer + 1) as f64 / (self.len() - 1) as f64)
    }
}

/// The `k` nearest vocabulary words of each word.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    words: Vec<String>,
    k: usize,
    lists: Vec<Vec<(usize, f64)>>,
}

impl Neighborhood {
    /// A neighborhood in which every word's only neighbor is itself.
    pub fn self_only(vocabulary: &[String]) -> Self {
        Neighborhood {
            words: vocabulary.to_vec(),
            k: 0,
            lists: vec![Vec::new(); vocabulary.len()],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// `(vocabulary index, cosine distance)` of the neighbors of word `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.lists[i]
    }

    pub fn neighbor_words(&self, i: usize) -> impl Iterator<Item = (&str, f64)> {
        self.lists[i].iter().map(|&(j, d)| (self.words[j].as_str(), d))
    }
}

/// The `k` nearest other vocabulary words of every word by cosine distance.
pub fn build_neighborhoods(
    store: &EmbeddingStore,
    vocabulary: &[String],
    k: usize,
) -> Result<Neighborhood> {
    WordSpace::new(store, vocabulary)?.neighborhood(k)
}

pub fn neighbor_rank_percentile(
    store: &EmbeddingStore,
    vocabulary: &[String],
    w: &str,
    w2: &str,
) -> Result<f64> {
    let space = WordSpace::new(store, vocabulary)?;
    space.rank_percentile(space.index_of(w)?, space.index_of(w2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::default_stopwords;

    fn store(rows: &[(&str, &[f64])]) -> EmbeddingStore {
        let mut s = EmbeddingStore::new(rows[0].1.len(), "test").unwrap();
        for (id, v) in rows {
            s.insert(*id, v).unwrap();
        }
        s
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_distance(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
        assert!(cosine_distance(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn pooling_examples() {
        let stop = default_stopwords();
        let s = store(&[("kill", &[3.0, 4.0]), ("slay", &[3.0, 4.0]), ("live", &[-3.0, -4.0])]);
        let one = sentence_embedding("to kill", &s, &stop).unwrap();
        assert_eq!(one.vector, vec![0.6, 0.8]);
        assert!(!one.degenerate);
        let same = sentence_embedding("kill, slay", &s, &stop).unwrap();
        assert!((same.vector[0] - 0.6).abs() < 1e-15 && (same.vector[1] - 0.8).abs() < 1e-15);
        let opposite = sentence_embedding("kill or live", &s, &stop).unwrap();
        assert!(opposite.degenerate);
        assert!(opposite.vector.iter().all(|x| x.abs() < 1e-15));
        assert!(matches!(
            sentence_embedding("the unknown", &s, &stop),
            Err(Error::Unembeddable(_))
        ));
        let skip = sentence_embedding("kill zzz", &s, &stop).unwrap();
        assert_eq!(skip.vector, one.vector);
    }

    #[test]
    fn toy_embedder_is_deterministic_unit() {
        let a = toy_embedder("ice", 8, 42);
        assert_eq!(a, toy_embedder("ice", 8, 42));
        assert!((norm(&a) - 1.0).abs() < 1e-9);
        let mut same = 0;
        for i in 0..1000 {
            let t = format!("tok{i}");
            if toy_embedder(&t, 8, 42) == toy_embedder(&t, 8, 43) {
                same += 1;
            }
        }
        assert_eq!(same, 0);
    }

    #[test]
    fn phrases_pool_their_parts() {
        let s = store(&[("cold", &[1.0, 0.0]), ("feet", &[0.0, 2.0])]);
        assert_eq!(s.word_vector("cold_feet").unwrap(), vec![0.5, 0.5]);
        assert!(s.word_vector("warm_hands").is_err());
    }

    #[test]
    fn identical_pair_are_mutual_neighbors() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0]), ("c", &[0.0, 1.0])]);
        let vocab: Vec<String> = ["a", "b", "c"].iter().map(|w| w.to_string()).collect();
        let nbh = build_neighborhoods(&s, &vocab, 1).unwrap();
        assert_eq!(nbh.neighbors(0), &[(1, 0.0)]);
        assert_eq!(nbh.neighbors(1), &[(0, 0.0)]);
        assert!(build_neighborhoods(&s, &vocab, 3).is_err());
        let missing: Vec<String> = vec!["a".into(), "zz".into()];
        assert!(matches!(
            build_neighborhoods(&s, &missing, 1),
            Err(Error::MissingVector(w)) if w == "zz"
        ));
    }

    #[test]
    fn rank_percentile_bounds() {
        let mut s = EmbeddingStore::new(2, "t").unwrap();
        let mut vocab = Vec::new();
        for i in 0..101 {
            let angle = i as f64 * 0.03;
            s.insert(format!("w{i}"), &[angle.cos(), angle.sin()]).unwrap();
            vocab.push(format!("w{i}"));
        }
        assert_eq!(neighbor_rank_percentile(&s, &vocab, "w0", "w1").unwrap(), 0.01);
        assert_eq!(neighbor_rank_percentile(&s, &vocab, "w0", "w100").unwrap(), 1.0);
        assert!(neighbor_rank_percentile(&s, &vocab, "w0", "w0").is_err());
    }

    #[test]
    fn vector_file_round_trip() {
        let s = store(&[("ice", &[0.1, -2.5e-7]), ("ice/s1", &[1.0 / 3.0, 7.0])]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        s.write(&path, "# provenance\n").unwrap();
        let mut loaded = EmbeddingStore::read(&path).unwrap();
        loaded.source = "test".into();
        assert_eq!(loaded, s);

        std::fs::write(&path, "dim 2 count 2\nice\t1 2\n").unwrap();
        assert!(EmbeddingStore::read(&path).is_err());
        std::fs::write(&path, "dim 2 count 1\nice\t1 2 3\n").unwrap();
        assert!(EmbeddingStore::read(&path).is_err());
        std::fs::write(&path, "dim 2 count 1\nice\t1 NaN\n").unwrap();
        assert!(EmbeddingStore::read(&path).is_err());
    }

    proptest::proptest! {
        #[test]
        fn pooling_ignores_word_order(perm in proptest::sample::subsequence(vec!["alpha", "beta", "gamma", "delta"], 1..=4)) {
            let stop = WordSet::new();
            let mut s = EmbeddingStore::new(5, "t").unwrap();
            for w in ["alpha", "beta", "gamma", "delta"] {
                s.insert(w, &toy_embedder(w, 5, 1)).unwrap();
            }
            let forward = sentence_embedding(&perm.join(" "), &s, &stop).unwrap();
            let mut rev = perm.clone();
            rev.reverse();
            let backward = sentence_embedding(&rev.join(" "), &s, &stop).unwrap();
            proptest::prop_assert_eq!(forward, backward);
        }
    }
}
