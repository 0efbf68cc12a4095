//! Definition tokenization and content-word overlap.

use std::collections::BTreeSet;

/// Set of lowercased content words. Ordered so that iteration, and therefore
/// anything derived from it, is deterministic.
pub type WordSet = BTreeSet<String>;

/// English function words removed before comparing or pooling definitions.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "either",
    "else", "etc", "ever", "every", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however",
    "i", "if", "in", "into", "is", "it", "its", "itself", "just", "may", "me", "might", "more",
    "most", "much", "must", "my", "myself", "neither", "no", "nor", "not", "now", "of", "off",
    "often", "on", "once", "one", "only", "or", "other", "others", "ought", "our", "ours",
    "ourselves", "out", "over", "own", "per", "rather", "same", "shall", "she", "should", "so",
    "some", "someone", "something", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "thus", "to",
    "too", "under", "until", "up", "upon", "us", "usually", "very", "via", "was", "we", "were",
    "what", "when", "where", "whether", "which", "while", "who", "whom", "whose", "why", "will",
    "with", "within", "without", "would", "yet", "you", "your", "yours", "yourself",
    "yourselves",
];

/// The shipped stopword list as an owned set.
pub fn default_stopwords() -> WordSet {
    STOPWORDS.iter().map(|w| w.to_string()).collect()
}

/// Lowercased alphabetic tokens of `sentence` minus `stopwords`.
pub fn content_words(sentence: &str, stopwords: &WordSet) -> WordSet {
    sentence
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// `|a ∩ b| / min(|a|, |b|)`, or 0 when either set is empty.
pub fn overlap_fraction(a: &WordSet, b: &WordSet) -> f64 {
    let smaller = a.len().min(b.len());
    if smaller == 0 {
        return 0.0;
    }
    let shared = if a.len() <= b.len() {
        a.iter().filter(|w| b.contains(*w)).count()
    } else {
        b.iter().filter(|w| a.contains(*w)).count()
    };
    shared as f64 / smaller as f64
}

/// Set edit distance `|a ∪ b| − |a ∩ b|`.
pub fn set_edit_distance(a: &WordSet, b: &WordSet) -> usize {
    a.symmetric_difference(b).count()
}
