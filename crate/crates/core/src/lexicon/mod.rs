//! Slang and conventional dictionary records: ingestion, filtering, splits
//! and part-of-speech profiles.

mod io;
mod pos;
mod split;
mod text;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    read_lexicon, read_raw_records, read_split, write_lexicon, write_raw_records, write_split,
};
pub use pos::{pos_distribution, PosCounts, PosDistribution};
pub use split::{
    historical_splits, split, DataSplit, HistoricalSplit, TEST_FRACTION, VALIDATION_FRACTION,
};
pub use text::{
    content_words, default_stopwords, overlap_fraction, set_edit_distance, WordSet, STOPWORDS,
};

/// Character used to join the parts of a multiword entry into one token.
pub const PHRASE_JOINER: char = '_';

/// Ordered set of POS categories. Always contains `other`, the bucket for
/// any source tag without a dedicated category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    tags: Vec<String>,
}

impl TagSet {
    pub fn new<I, S>(tags: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tags: Vec<String> = tags.into_iter().map(Into::into).collect();
        let unique: HashSet<&String> = tags.iter().collect();
        if unique.len() != tags.len() {
            return Err(Error::config("tag_set", "duplicate tag"));
        }
        if !tags.iter().any(|t| t == "other") {
            return Err(Error::config("tag_set", "must contain `other`"));
        }
        Ok(TagSet { tags })
    }

    /// The six categories used for dictionaries that carry interjections.
    pub fn standard() -> Self {
        TagSet::new(["verb", "other", "adv", "noun", "interj", "adj"]).unwrap()
    }

    /// The five-category variant for data without interjections.
    pub fn without_interjections() -> Self {
        TagSet::new(["verb", "other", "adv", "noun", "adj"]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    /// Maps a dictionary or corpus tag onto one of the categories.
    pub fn categorize(&self, source_tag: &str) -> &str {
        let tag = source_tag.trim().trim_end_matches('.').to_lowercase();
        let category = match tag.as_str() {
            "n" | "noun" | "nn" | "nns" | "nnp" | "nnps" | "proper noun" | "plural noun" => "noun",
            "v" | "verb" | "vb" | "vbd" | "vbg" | "vbn" | "vbp" | "vbz" | "vt" | "vi"
            | "phrasal verb" | "transitive verb" | "intransitive verb" => "verb",
            "a" | "adj" | "adjective" | "jj" | "jjr" | "jjs" => "adj",
            "r" | "adv" | "adverb" | "rb" | "rbr" | "rbs" => "adv",
            "int" | "interj" | "interjection" | "excl" | "exclamation" | "uh" => "interj",
            _ => "other",
        };
        match self.index_of(category) {
            Some(i) => &self.tags[i],
            None => "other",
        }
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tags.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseKind {
    Slang,
    Conventional,
}

/// One dictionary sense; the unit of training and evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseDefinition {
    pub id: String,
    pub word: String,
    pub definition: String,
    /// POS category, a member of the lexicon's tag set.
    pub pos: String,
    pub kind: SenseKind,
    pub flags: Vec<String>,
    pub decade: Option<i32>,
    pub example: Option<String>,
    /// Crowd-sourced `(up, down)` votes.
    pub votes: Option<(i64, i64)>,
}

/// A dictionary record as it appears on disk, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub word: Option<String>,
    #[serde(default)]
    pub definition: Option<String>,
    #[serde(default)]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SenseKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decade: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl From<&SenseDefinition> for RawRecord {
    fn from(s: &SenseDefinition) -> Self {
        RawRecord {
            id: Some(s.id.clone()),
            word: Some(s.word.clone()),
            definition: Some(s.definition.clone()),
            pos: Some(s.pos.clone()),
            kind: Some(s.kind),
            decade: s.decade.map(i64::from),
            example: s.example.clone(),
            up: s.votes.map(|v| v.0),
            down: s.votes.map(|v| v.1),
            flags: s.flags.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub dedup_overlap_threshold: f64,
    pub ud_min_vote_margin: i64,
    pub ud_cross_dict_overlap: f64,
    pub drop_acronyms: bool,
    pub drop_informal_conventional: bool,
    pub stopwords: WordSet,
    pub tag_set: TagSet,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            dedup_overlap_threshold: 0.5,
            ud_min_vote_margin: 10,
            ud_cross_dict_overlap: 0.2,
            drop_acronyms: true,
            drop_informal_conventional: true,
            stopwords: default_stopwords(),
            tag_set: TagSet::standard(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dedup_overlap_threshold", self.dedup_overlap_threshold),
            ("ud_cross_dict_overlap", self.ud_cross_dict_overlap),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(name, format!("{v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A record dropped during ingestion and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub lexicon: Lexicon,
    pub rejections: Vec<Rejection>,
}

/// Filtered slang senses plus the conventional senses of every candidate word.
#[derive(Debug, Clone)]
pub struct Lexicon {
    slang: Vec<SenseDefinition>,
    /// Conventional senses aligned with `vocabulary`.
    conventional: Vec<Vec<SenseDefinition>>,
    vocabulary: Vec<String>,
    tag_set: TagSet,
    word_index: HashMap<String, usize>,
    sense_index: HashMap<String, SenseSlot>,
}

#[derive(Debug, Clone, Copy)]
enum SenseSlot {
    Slang(usize),
    Conventional(usize, usize),
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.slang == other.slang
            && self.conventional == other.conventional
            && self.vocabulary == other.vocabulary
            && self.tag_set == other.tag_set
    }
}

impl Lexicon {
    /// Assembles a lexicon from already-validated senses. The vocabulary is
    /// the sorted set of words that have at least one conventional sense.
    pub fn from_senses(
        slang: Vec<SenseDefinition>,
        conventional: Vec<SenseDefinition>,
        tag_set: TagSet,
    ) -> Result<Self> {
        let mut by_word: BTreeMap<String, Vec<SenseDefinition>> = BTreeMap::new();
        for sense in conventional {
            if sense.kind != SenseKind::Conventional {
                return Err(Error::data(format!("`{}` is not a conventional sense", sense.id)));
            }
            by_word.entry(sense.word.clone()).or_default().push(sense);
        }
        let (vocabulary, by_word): (Vec<String>, Vec<Vec<SenseDefinition>>) =
            by_word.into_iter().unzip();
        let word_index: HashMap<String, usize> =
            vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

        let mut sense_index = HashMap::new();
        for (i, s) in slang.iter().enumerate() {
            if s.kind != SenseKind::Slang {
                return Err(Error::data(format!("`{}` is not a slang sense", s.id)));
            }
            if !word_index.contains_key(&s.word) {
                return Err(Error::data(format!(
                    "slang sense `{}` uses `{}`, which has no conventional sense",
                    s.id, s.word
                )));
            }
            if sense_index.insert(s.id.clone(), SenseSlot::Slang(i)).is_some() {
                return Err(Error::data(format!("duplicate sense id `{}`", s.id)));
            }
        }
        for (w, senses) in by_word.iter().enumerate() {
            for (i, s) in senses.iter().enumerate() {
                if sense_index.insert(s.id.clone(), SenseSlot::Conventional(w, i)).is_some() {
                    return Err(Error::data(format!("duplicate sense id `{}`", s.id)));
                }
            }
        }
        for s in slang.iter().chain(by_word.iter().flatten()) {
            if tag_set.index_of(&s.pos).is_none() {
                return Err(Error::UnknownTag(s.pos.clone()));
            }
        }

        Ok(Lexicon {
            slang,
            conventional: by_word,
            vocabulary,
            tag_set,
            word_index,
            sense_index,
        })
    }

    pub fn slang(&self) -> &[SenseDefinition] {
        &self.slang
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn tag_set(&self) -> &TagSet {
        &self.tag_set
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    /// Conventional senses of `word`; empty for words outside the vocabulary.
    pub fn conventional(&self, word: &str) -> &[SenseDefinition] {
        match self.word_index(word) {
            Some(i) => &self.conventional[i],
            None => &[],
        }
    }

    /// Conventional senses of the `i`-th vocabulary word.
    pub fn conventional_at(&self, i: usize) -> &[SenseDefinition] {
        &self.conventional[i]
    }

    pub fn conventional_senses(&self) -> impl Iterator<Item = &SenseDefinition> {
        self.conventional.iter().flatten()
    }

    pub fn sense(&self, id: &str) -> Option<&SenseDefinition> {
        match *self.sense_index.get(id)? {
            SenseSlot::Slang(i) => self.slang.get(i),
            SenseSlot::Conventional(w, i) => self.conventional[w].get(i),
        }
    }

    pub fn slang_sense(&self, id: &str) -> Option<&SenseDefinition> {
        match *self.sense_index.get(id)? {
            SenseSlot::Slang(i) => self.slang.get(i),
            SenseSlot::Conventional(..) => None,
        }
    }

    /// Looks up a slang sense, failing with a data error naming the id.
    pub fn require_slang(&self, id: &str) -> Result<&SenseDefinition> {
        self.slang_sense(id)
            .ok_or_else(|| Error::data(format!("unknown slang sense `{id}`")))
    }

    /// Keeps only the slang senses accepted by `keep`.
    pub fn retain_slang(&self, keep: impl Fn(&SenseDefinition) -> bool) -> Result<Lexicon> {
        Lexicon::from_senses(
            self.slang.iter().filter(|s| keep(s)).cloned().collect(),
            self.conventional_senses().cloned().collect(),
            self.tag_set.clone(),
        )
    }
}

/// Trims, collapses internal whitespace, and joins multiword entries.
fn normalize_word(word: &str) -> String {
    word.split_whitespace()
        .collect::<Vec<_>>()
        .join(&PHRASE_JOINER.to_string())
}

fn is_acronym(word: &str) -> bool {
    let mut letters = word.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(|c| c.is_uppercase())
}

struct Candidate {
    sense: SenseDefinition,
    words: WordSet,
}

fn validate_record(
    raw: &RawRecord,
    kind: SenseKind,
    counters: &mut HashMap<String, usize>,
    cfg: &FilterConfig,
) -> std::result::Result<Candidate, Rejection> {
    let word = raw.word.as_deref().map(normalize_word).unwrap_or_default();
    let mut fallback_id = || {
        let n = counters.entry(word.clone()).or_insert(0);
        *n += 1;
        let tag = if kind == SenseKind::Slang { 's' } else { 'c' };
        format!("{word}/{tag}{n}")
    };
    let id = match &raw.id {
        Some(id) => {
            fallback_id();
            id.clone()
        }
        None => fallback_id(),
    };
    let reject = |reason: &str| Rejection {
        id: id.clone(),
        reason: reason.to_string(),
    };

    if word.is_empty() {
        return Err(reject("missing word"));
    }
    if let Some(k) = raw.kind {
        if k != kind {
            return Err(reject("record kind does not match its source"));
        }
    }
    let definition = raw.definition.as_deref().map(str::trim).unwrap_or_default();
    if definition.is_empty() {
        return Err(reject("empty definition"));
    }
    let pos = match raw.pos.as_deref() {
        Some(p) if !p.trim().is_empty() => cfg.tag_set.categorize(p).to_string(),
        _ => return Err(reject("missing pos")),
    };
    let decade = match raw.decade {
        None => None,
        Some(d) if d > 0 && d % 10 == 0 && d <= i64::from(i32::MAX) => Some(d as i32),
        Some(_) => return Err(reject("decade is not a positive multiple of 10")),
    };
    let votes = match (raw.up, raw.down) {
        (None, None) => None,
        (Some(u), Some(d)) if u >= 0 && d >= 0 => Some((u, d)),
        _ => return Err(reject("votes need non-negative up and down counts")),
    };
    let words = content_words(definition, &cfg.stopwords);
    if words.is_empty() {
        log::warn!("{id}: definition has no content words");
        return Err(reject("definition has no content words"));
    }
    if cfg.drop_acronyms && is_acronym(&word) {
        return Err(reject("acronym"));
    }
    if kind == SenseKind::Conventional
        && cfg.drop_informal_conventional
        && raw.flags.iter().any(|f| f.eq_ignore_ascii_case("informal"))
    {
        return Err(reject("informal conventional sense"));
    }

    Ok(Candidate {
        sense: SenseDefinition {
            id,
            word,
            definition: definition.to_string(),
            pos,
            kind,
            flags: raw.flags.clone(),
            decade,
            example: raw.example.clone(),
            votes,
        },
        words,
    })
}

/// Validates and filters raw dictionary records into a [`Lexicon`].
///
/// Malformed or filtered records are reported in [`Ingested::rejections`];
/// only an empty surviving slang set is a hard error. Applying `ingest` to
/// the serialized output of a previous run reproduces that output.
pub fn ingest(
    slang_records: &[RawRecord],
    conventional_records: &[RawRecord],
    cfg: &FilterConfig,
) -> Result<Ingested> {
    cfg.validate()?;
    let mut rejections = Vec::new();
    let mut seen_ids = HashSet::new();

    let mut collect = |records: &[RawRecord], kind: SenseKind, rejections: &mut Vec<Rejection>| {
        let mut counters = HashMap::new();
        let mut out = Vec::new();
        for raw in records {
            match validate_record(raw, kind, &mut counters, cfg) {
                Ok(c) => {
                    if seen_ids.insert(c.sense.id.clone()) {
                        out.push(c);
                    } else {
                        rejections.push(Rejection {
                            id: c.sense.id,
                            reason: "duplicate id".into(),
                        });
                    }
                }
                Err(r) => rejections.push(r),
            }
        }
        out
    };
    let conventional = collect(conventional_records, SenseKind::Conventional, &mut rejections);
    let slang = collect(slang_records, SenseKind::Slang, &mut rejections);

    let mut conv_by_word: HashMap<&str, Vec<&WordSet>> = HashMap::new();
    for c in &conventional {
        conv_by_word.entry(&c.sense.word).or_default().push(&c.words);
    }

    let threshold = cfg.dedup_overlap_threshold;
    let mut kept: Vec<&Candidate> = Vec::new();
    for cand in &slang {
        let s = &cand.sense;
        let reason = match s.votes {
            Some((up, down)) if up - down < cfg.ud_min_vote_margin => {
                Some("vote margin below minimum")
            }
            _ => None,
        };
        let reason = reason.or_else(|| match conv_by_word.get(s.word.as_str()) {
            None => Some("no conventional sense for word"),
            Some(defs) if defs.iter().any(|d| overlap_fraction(&cand.words, d) > threshold) => {
                Some("overlaps a conventional sense")
            }
            Some(_) => None,
        });
        let reason = reason.or_else(|| {
            kept.iter()
                .any(|k| {
                    k.sense.word == s.word && overlap_fraction(&k.words, &cand.words) > threshold
                })
                .then_some("duplicates an earlier slang sense")
        });
        match reason {
            Some(r) => rejections.push(Rejection {
                id: s.id.clone(),
                reason: r.into(),
            }),
            None => kept.push(cand),
        }
    }

    // Vote-bearing entries must be corroborated by a surviving curated entry.
    let curated: Vec<&Candidate> = kept.iter().copied().filter(|c| c.sense.votes.is_none()).collect();
    let mut survivors = Vec::new();
    for cand in kept {
        if cand.sense.votes.is_some() {
            let corroborated = curated.iter().any(|c| {
                c.sense.word == cand.sense.word
                    && overlap_fraction(&c.words, &cand.words) >= cfg.ud_cross_dict_overlap
            });
            if !corroborated {
                rejections.push(Rejection {
                    id: cand.sense.id.clone(),
                    reason: "not corroborated by a curated dictionary".into(),
                });
                continue;
            }
        }
        survivors.push(cand.sense.clone());
    }

    if survivors.is_empty() {
        return Err(Error::data("no slang senses survive filtering"));
    }
    let words: HashSet<&str> = survivors.iter().map(|s| s.word.as_str()).collect();
    let conventional: Vec<SenseDefinition> = conventional
        .iter()
        .filter(|c| words.contains(c.sense.word.as_str()))
        .map(|c| c.sense.clone())
        .collect();

    let lexicon = Lexicon::from_senses(survivors, conventional, cfg.tag_set.clone())?;
    Ok(Ingested {
        lexicon,
        rejections,
    })
}
