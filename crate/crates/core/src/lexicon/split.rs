use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Lexicon;
use crate::error::{Error, Result};

/// Disjoint train/validation/test partition of the slang sense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl DataSplit {
    /// Training plus validation ids, the data available at fitting time.
    pub fn training_ids(&self) -> impl Iterator<Item = &String> {
        self.train.iter().chain(&self.validation)
    }
}

pub const TEST_FRACTION: f64 = 0.10;
pub const VALIDATION_FRACTION: f64 = 0.05;

/// Seeded shuffle of the slang senses into 10% test, 5% of the remainder
/// for validation, and the rest for training. Counts are floored.
pub fn split(lex: &Lexicon, seed: u64) -> Result<DataSplit> {
    let mut ids: Vec<String> = lex.slang().iter().map(|s| s.id.clone()).collect();
    if ids.len() < 10 {
        return Err(Error::data(format!(
            "need at least 10 slang senses to split, have {}",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let n_test = (ids.len() as f64 * TEST_FRACTION).floor() as usize;
    let n_val = ((ids.len() - n_test) as f64 * VALIDATION_FRACTION).floor() as usize;
    let train = ids.split_off(n_test + n_val);
    let validation = ids.split_off(n_test);
    Ok(DataSplit {
        train,
        validation,
        test: ids,
        seed,
    })
}

/// Train on everything dated before `decade`, test on `decade` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoricalSplit {
    pub decade: i32,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

pub fn historical_splits(lex: &Lexicon, start: i32, end: i32) -> Result<Vec<HistoricalSplit>> {
    if start % 10 != 0 || end % 10 != 0 || end < start {
        return Err(Error::config(
            "historical",
            format!("bad decade range {start}-{end}"),
        ));
    }
    let untagged = lex.slang().iter().filter(|s| s.decade.is_none()).count();
    if untagged > 0 {
        log::warn!("{untagged} slang senses have no decade and are excluded");
    }
    let dated: Vec<(&str, i32)> = lex
        .slang()
        .iter()
        .filter_map(|s| s.decade.map(|d| (s.id.as_str(), d)))
        .collect();

    let mut out = Vec::new();
    let mut decade = start;
    while decade <= end {
        let train: Vec<String> = dated
            .iter()
            .filter(|(_, d)| *d < decade)
            .map(|(id, _)| id.to_string())
            .collect();
        if train.is_empty() {
            return Err(Error::data(format!("no dated slang before {decade}")));
        }
        let test = dated
            .iter()
            .filter(|(_, d)| *d == decade)
            .map(|(id, _)| id.to_string())
            .collect();
        out.push(HistoricalSplit {
            decade,
            train,
            test,
        });
        decade += 10;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{SenseDefinition, SenseKind, TagSet};

    fn sense(id: usize, word: &str, kind: SenseKind, decade: Option<i32>) -> SenseDefinition {
        SenseDefinition {
            id: format!("{word}/{id}"),
            word: word.into(),
            definition: "something".into(),
            pos: "noun".into(),
            kind,
            flags: vec![],
            decade,
            example: None,
            votes: None,
        }
    }

    fn lexicon(decades: &[Option<i32>]) -> Lexicon {
        let slang = decades
            .iter()
            .enumerate()
            .map(|(i, d)| sense(i, "w", SenseKind::Slang, *d))
            .collect();
        let conv = vec![sense(999, "w", SenseKind::Conventional, None)];
        Lexicon::from_senses(slang, conv, TagSet::standard()).unwrap()
    }

    #[test]
    fn split_sizes_follow_floor_rounding() {
        let lex = lexicon(&[None; 100]);
        let s = split(&lex, 1).unwrap();
        assert_eq!(s.test.len(), 10);
        assert_eq!(s.validation.len(), 4);
        assert_eq!(s.train.len(), 86);
        assert_eq!(s, split(&lex, 1).unwrap());
        assert_ne!(s, split(&lex, 2).unwrap());
    }

    #[test]
    fn split_needs_ten_entries() {
        assert!(split(&lexicon(&[None; 9]), 1).is_err());
        assert!(split(&lexicon(&[None; 10]), 1).is_ok());
    }

    #[test]
    fn historical_cutoffs() {
        let mut decades = vec![Some(1950); 3];
        decades.extend([Some(1960); 2]);
        decades.push(Some(1970));
        decades.push(None);
        let lex = lexicon(&decades);
        let hs = historical_splits(&lex, 1960, 1970).unwrap();
        let sizes: Vec<_> = hs.iter().map(|h| (h.decade, h.train.len(), h.test.len())).collect();
        assert_eq!(sizes, [(1960, 3, 2), (1970, 5, 1)]);
        assert!(hs[0].train.iter().all(|id| hs[1].train.contains(id)));
        assert!(historical_splits(&lex, 1950, 1970).is_err());
        assert_eq!(historical_splits(&lex, 1960, 2000).unwrap().len(), 5);
    }

    proptest::proptest! {
        #[test]
        fn split_is_a_partition(n in 10usize..200, seed in 0u64..1000) {
            let lex = lexicon(&vec![None; n]);
            let s = split(&lex, seed).unwrap();
            let mut all: Vec<_> = s.train.iter().chain(&s.validation).chain(&s.test).cloned().collect();
            all.sort();
            let mut expected: Vec<_> = lex.slang().iter().map(|x| x.id.clone()).collect();
            expected.sort();
            proptest::prop_assert_eq!(all, expected);
        }
    }
}
