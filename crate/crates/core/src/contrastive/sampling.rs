use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;

use crate::embedding::{Neighborhood, SenseTable, WordSpace};
use crate::error::{Error, Result};
use crate::lexicon::{content_words, overlap_fraction, Lexicon, WordSet};

/// Words within this rank percentile of the anchor word are too close to
/// supply negatives.
pub const NEAR_PERCENTILE: f64 = 0.2;
/// Negatives must share less than this fraction of content words with the
/// anchor and positive-side definitions.
pub const MAX_NEGATIVE_OVERLAP: f64 = 0.2;
pub const DEFAULT_MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PositivePair {
    pub anchor_id: String,
    pub positive_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub anchor_id: String,
    pub positive_id: String,
    pub negative_id: String,
}

fn check_alignment(lex: &Lexicon, nbh: &Neighborhood) -> Result<()> {
    if nbh.words() != lex.vocabulary() {
        return Err(Error::data("neighborhood is not aligned with the lexicon vocabulary"));
    }
    Ok(())
}

/// One pair per conventional sense of the anchor's word, plus, with
/// neighborhood sampling, one per conventional sense of each neighbor.
pub fn build_positive_pairs(
    train_ids: &[String],
    lex: &Lexicon,
    nbh: &Neighborhood,
    use_neighborhood: bool,
) -> Result<Vec<PositivePair>> {
    check_alignment(lex, nbh)?;
    let mut pairs = Vec::new();
    for id in train_ids {
        let anchor = lex.require_slang(id)?;
        let w = lex
            .word_index(&anchor.word)
            .ok_or_else(|| Error::UnknownWord(anchor.word.clone()))?;
        if lex.conventional_at(w).is_empty() {
            log::warn!("{id}: word `{}` has no conventional senses", anchor.word);
            continue;
        }
        let mut words = vec![w];
        if use_neighborhood {
            words.extend(nbh.neighbors(w).iter().map(|&(j, _)| j));
        }
        for wi in words {
            for sense in lex.conventional_at(wi) {
                pairs.push(PositivePair {
                    anchor_id: id.clone(),
                    positive_id: sense.id.clone(),
                });
            }
        }
    }
    Ok(pairs)
}

/// Rejection sampler for negatives that are semantically and lexically
/// distant from an anchor's word.
pub struct NegativeSampler<'a> {
    lex: &'a Lexicon,
    words: &'a WordSpace,
    nbh: &'a Neighborhood,
    use_neighborhood: bool,
    max_attempts: usize,
    content: HashMap<&'a str, WordSet>,
    /// Usable conventional sense ids per vocabulary word.
    candidates: Vec<Vec<&'a str>>,
    /// Last `(distance, index)` inside the near percentile, per anchor word.
    cutoffs: RefCell<HashMap<usize, Option<(f64, usize)>>>,
}

impl<'a> NegativeSampler<'a> {
    pub fn new(
        lex: &'a Lexicon,
        senses: &SenseTable,
        words: &'a WordSpace,
        nbh: &'a Neighborhood,
        stopwords: &WordSet,
        use_neighborhood: bool,
    ) -> Result<Self> {
        check_alignment(lex, nbh)?;
        if words.words() != lex.vocabulary() {
            return Err(Error::data("word space is not aligned with the lexicon vocabulary"));
        }
        let content = lex
            .slang()
            .iter()
            .chain(lex.conventional_senses())
            .map(|s| (s.id.as_str(), content_words(&s.definition, stopwords)))
            .collect();
        let candidates = (0..lex.vocabulary().len())
            .map(|w| {
                lex.conventional_at(w)
                    .iter()
                    .filter(|s| senses.contains(&s.id))
                    .map(|s| s.id.as_str())
                    .collect()
            })
            .collect();
        Ok(NegativeSampler {
            lex,
            words,
            nbh,
            use_neighborhood,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            content,
            candidates,
            cutoffs: RefCell::new(HashMap::new()),
        })
    }

    pub fn with_max_attempts(mut self, attempts: usize) -> Self {
        self.max_attempts = attempts;
        self
    }

    fn cutoff(&self, w: usize) -> Option<(f64, usize)> {
        *self.cutoffs.borrow_mut().entry(w).or_insert_with(|| {
            let n = self.words.len();
            if n < 2 {
                return None;
            }
            let ordered = self.words.ordered_from(w);
            let within = (1..=ordered.len())
                .take_while(|&r| r as f64 / (n - 1) as f64 <= NEAR_PERCENTILE)
                .count();
            within.checked_sub(1).map(|r| {
                let (j, d) = ordered[r];
                (d, j)
            })
        })
    }

    /// Whether `candidate` ranks within the near percentile of `w`.
    pub fn is_near(&self, w: usize, candidate: usize) -> bool {
        if w == candidate {
            return true;
        }
        match self.cutoff(w) {
            None => false,
            Some((d_cut, j_cut)) => {
                let d = self.words.distance(w, candidate);
                d < d_cut || (d == d_cut && candidate <= j_cut)
            }
        }
    }

    fn reference_sets(&self, anchor_id: &str, w: usize) -> Vec<&WordSet> {
        let mut words = vec![w];
        if self.use_neighborhood {
            words.extend(self.nbh.neighbors(w).iter().map(|&(j, _)| j));
        }
        let mut refs = vec![&self.content[anchor_id]];
        for wi in words {
            refs.extend(self.lex.conventional_at(wi).iter().map(|s| &self.content[s.id.as_str()]));
        }
        refs
    }

    fn anchor_word(&self, anchor_id: &str) -> Result<usize> {
        let anchor = self.lex.require_slang(anchor_id)?;
        self.lex
            .word_index(&anchor.word)
            .ok_or_else(|| Error::UnknownWord(anchor.word.clone()))
    }

    fn admissible(&self, refs: &[&WordSet], w: usize, candidate_word: usize, sense: &str) -> bool {
        if self.is_near(w, candidate_word) {
            return false;
        }
        let words = &self.content[sense];
        refs.iter().all(|r| overlap_fraction(words, r) < MAX_NEGATIVE_OVERLAP)
    }

    /// Draws a negative conventional sense for `pair`.
    pub fn sample<R: Rng>(&self, pair: &PositivePair, rng: &mut R) -> Result<String> {
        let w = self.anchor_word(&pair.anchor_id)?;
        let refs = self.reference_sets(&pair.anchor_id, w);
        let n = self.lex.vocabulary().len();
        for _ in 0..self.max_attempts {
            let candidate_word = rng.gen_range(0..n);
            let senses = &self.candidates[candidate_word];
            if candidate_word == w || senses.is_empty() {
                continue;
            }
            let sense = senses[rng.gen_range(0..senses.len())];
            if self.admissible(&refs, w, candidate_word, sense) {
                return Ok(sense.to_string());
            }
        }
        Err(Error::NoNegative {
            anchor: pair.anchor_id.clone(),
            positive: pair.positive_id.clone(),
            attempts: self.max_attempts,
        })
    }

    /// Re-checks both negative constraints for an emitted triplet.
    pub fn audit(&self, t: &Triplet) -> Result<bool> {
        let w = self.anchor_word(&t.anchor_id)?;
        let negative = self
            .lex
            .sense(&t.negative_id)
            .ok_or_else(|| Error::data(format!("unknown sense `{}`", t.negative_id)))?;
        let nw = self
            .lex
            .word_index(&negative.word)
            .ok_or_else(|| Error::UnknownWord(negative.word.clone()))?;
        let refs = self.reference_sets(&t.anchor_id, w);
        Ok(nw != w && self.admissible(&refs, w, nw, &t.negative_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingStore;
    use crate::lexicon::{SenseDefinition, SenseKind, TagSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sense(id: &str, word: &str, def: &str, kind: SenseKind) -> SenseDefinition {
        SenseDefinition {
            id: id.into(),
            word: word.into(),
            definition: def.into(),
            pos: "noun".into(),
            kind,
            flags: vec![],
            decade: None,
            example: None,
            votes: None,
        }
    }

    struct Fixture {
        lex: Lexicon,
        store: EmbeddingStore,
    }

    /// Ten words on a circle: word i at angle 0.15·i, except `far` opposite.
    fn fixture(conv_defs: &[(&str, &str)], slang: &[(&str, &str, &str)]) -> Fixture {
        let mut store = EmbeddingStore::new(2, "t").unwrap();
        let mut conv = Vec::new();
        for (i, (word, def)) in conv_defs.iter().enumerate() {
            let angle = if *word == "far" { std::f64::consts::PI } else { 0.15 * i as f64 };
            store.insert(*word, &[angle.cos(), angle.sin()]).unwrap();
            conv.push(sense(&format!("{word}/c1"), word, def, SenseKind::Conventional));
            store.insert(format!("{word}/c1"), &[angle.cos(), angle.sin()]).unwrap();
        }
        let slang = slang
            .iter()
            .map(|(id, w, d)| sense(id, w, d, SenseKind::Slang))
            .collect::<Vec<_>>();
        for s in &slang {
            store.insert(s.id.clone(), &[1.0, 1.0]).unwrap();
        }
        Fixture {
            lex: Lexicon::from_senses(slang, conv, TagSet::standard()).unwrap(),
            store,
        }
    }

    #[test]
    fn positive_pair_counts() {
        let mut store = EmbeddingStore::new(2, "t").unwrap();
        let mut conv = Vec::new();
        for (w, n, angle) in [("a", 3, 0.0), ("b", 2, 0.1), ("c", 2, 0.2), ("d", 1, 2.0)] {
            store.insert(w, &[f64::cos(angle), f64::sin(angle)]).unwrap();
            for k in 0..n {
                conv.push(sense(&format!("{w}/c{k}"), w, "thing", SenseKind::Conventional));
            }
        }
        let slang = vec![sense("a/s1", "a", "x", SenseKind::Slang)];
        let lex = Lexicon::from_senses(slang, conv, TagSet::standard()).unwrap();
        let words = WordSpace::new(&store, lex.vocabulary()).unwrap();
        let nbh = words.neighborhood(2).unwrap();
        let ids = vec!["a/s1".to_string()];
        assert_eq!(build_positive_pairs(&ids, &lex, &nbh, false).unwrap().len(), 3);
        assert_eq!(build_positive_pairs(&ids, &lex, &nbh, true).unwrap().len(), 7);
        assert!(build_positive_pairs(&[], &lex, &nbh, true).unwrap().is_empty());
    }

    #[test]
    fn unique_admissible_candidate_is_always_chosen() {
        let conv: Vec<(&str, &str)> = vec![
            ("ice", "frozen water"),
            ("snow", "frozen water flakes"),
            ("hail", "frozen water pellets"),
            ("sleet", "frozen water rain"),
            ("frost", "frozen water crystals"),
            ("rime", "frozen water fog"),
            ("glaze", "frozen water coating"),
            ("slush", "frozen water mush"),
            ("floe", "frozen water sheet"),
            ("far", "musical instrument"),
        ];
        let fx = fixture(&conv, &[("ice/s1", "ice", "to murder")]);
        let senses = SenseTable::build(&fx.lex, &fx.store, &WordSet::new());
        let words = WordSpace::new(&fx.store, fx.lex.vocabulary()).unwrap();
        let nbh = words.neighborhood(2).unwrap();
        let sampler =
            NegativeSampler::new(&fx.lex, &senses, &words, &nbh, &WordSet::new(), false).unwrap();
        let pair = PositivePair {
            anchor_id: "ice/s1".into(),
            positive_id: "ice/c1".into(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let neg = sampler.sample(&pair, &mut rng).unwrap();
            assert_eq!(neg, "far/c1");
            let t = Triplet {
                anchor_id: pair.anchor_id.clone(),
                positive_id: pair.positive_id.clone(),
                negative_id: neg,
            };
            assert!(sampler.audit(&t).unwrap());
        }
    }

    #[test]
    fn near_words_and_overlapping_definitions_are_rejected() {
        let conv: Vec<(&str, &str)> = vec![
            ("ice", "frozen water"),
            ("a", "alpha beta"),
            ("b", "gamma delta"),
            ("c", "epsilon zeta"),
            ("d", "eta theta"),
            ("e", "iota kappa"),
            ("f", "lambda mu"),
            ("g", "nu xi"),
            ("h", "omicron pi"),
            ("far", "murder one two three"),
        ];
        let fx = fixture(&conv, &[("ice/s1", "ice", "murder quickly quietly now")]);
        let stop = WordSet::new();
        let senses = SenseTable::build(&fx.lex, &fx.store, &stop);
        let words = WordSpace::new(&fx.store, fx.lex.vocabulary()).unwrap();
        let nbh = words.neighborhood(2).unwrap();
        let sampler = NegativeSampler::new(&fx.lex, &senses, &words, &nbh, &stop, false).unwrap();
        let ice = fx.lex.word_index("ice").unwrap();
        // 9 other words: ranks 1 (1/9) qualifies as near, rank 2 (2/9) does not
        let order = words.ordered_from(ice);
        assert!(sampler.is_near(ice, order[0].0));
        assert!(!sampler.is_near(ice, order[1].0));

        // "far" shares 1 of its 4 content words with the anchor: 0.25 >= 0.2
        let pair = PositivePair {
            anchor_id: "ice/s1".into(),
            positive_id: "ice/c1".into(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let neg = sampler.sample(&pair, &mut rng).unwrap();
            assert_ne!(neg, "far/c1");
            assert_ne!(neg, format!("{}/c1", fx.lex.vocabulary()[order[0].0]));
        }
    }

    #[test]
    fn exhausted_attempts_name_the_pair() {
        let conv: Vec<(&str, &str)> = vec![("ice", "frozen water"), ("snow", "frozen water")];
        let fx = fixture(&conv, &[("ice/s1", "ice", "frozen murder")]);
        let stop = WordSet::new();
        let senses = SenseTable::build(&fx.lex, &fx.store, &stop);
        let words = WordSpace::new(&fx.store, fx.lex.vocabulary()).unwrap();
        let nbh = words.neighborhood(1).unwrap();
        let sampler = NegativeSampler::new(&fx.lex, &senses, &words, &nbh, &stop, false)
            .unwrap()
            .with_max_attempts(10);
        let pair = PositivePair {
            anchor_id: "ice/s1".into(),
            positive_id: "ice/c1".into(),
        };
        let err = sampler.sample(&pair, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, Error::NoNegative { anchor, .. } if anchor == "ice/s1"));
    }
}
