//! Ranking metrics and the analyses built on them.

use std::collections::HashSet;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::choice::Posterior;
use crate::embedding::squared_distance;
use crate::error::{Error, Result};
use crate::lexicon::{set_edit_distance, DataSplit, Lexicon, WordSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub sense_id: String,
    pub true_word: String,
    pub rank: usize,
    pub topk: Vec<(String, f64)>,
}

/// 1-based rank of `target` in descending order of `scores`, ties going to
/// the earlier index.
pub fn rank_of(scores: &[f64], target: usize) -> usize {
    let t = scores[target];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(j, &s)| s > t || (s == t && j < target))
        .count()
}

/// Indices of `scores` sorted descending, ties by index.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

pub fn rank_candidates(
    post: &Posterior,
    vocabulary: &[String],
    sense_id: &str,
    true_word: &str,
    k: usize,
) -> Result<RankResult> {
    if post.probs.len() != vocabulary.len() {
        return Err(Error::Dimension {
            expected: vocabulary.len(),
            got: post.probs.len(),
        });
    }
    let target = vocabulary
        .iter()
        .position(|w| w == true_word)
        .ok_or_else(|| Error::UnknownWord(true_word.to_string()))?;
    let topk = ranking(&post.probs)
        .into_iter()
        .take(k)
        .map(|i| (vocabulary[i].clone(), post.probs[i]))
        .collect();
    Ok(RankResult {
        sense_id: sense_id.to_string(),
        true_word: true_word.to_string(),
        rank: rank_of(&post.probs, target),
        topk,
    })
}

fn check_ranks(ranks: &[usize], v: usize) -> Result<()> {
    if v < 2 {
        return Err(Error::data("AUC needs at least two candidates"));
    }
    if ranks.is_empty() {
        return Err(Error::data("AUC over no queries"));
    }
    if let Some(r) = ranks.iter().find(|&&r| r < 1 || r > v) {
        return Err(Error::data(format!("rank {r} outside [1, {v}]")));
    }
    Ok(())
}

/// Mean single-positive ROC area, as a percentage.
pub fn auc(ranks: &[usize], v: usize) -> Result<f64> {
    check_ranks(ranks, v)?;
    let denom = (v - 1) as f64;
    let total: f64 = ranks.iter().map(|&r| (v - r) as f64 / denom).sum();
    Ok(100.0 * total / ranks.len() as f64)
}

/// One ROC point per cutoff `k` in `0..=v`, pooled over queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub cutoff: usize,
    pub fpr: f64,
    pub tpr: f64,
    /// Mean fraction of the top `cutoff` that is the true word; zero at
    /// cutoff 0.
    pub precision: f64,
}

pub fn roc_curve(ranks: &[usize], v: usize) -> Result<Vec<RocPoint>> {
    check_ranks(ranks, v)?;
    let n = ranks.len() as f64;
    let mut hits_at = vec![0usize; v + 1];
    for &r in ranks {
        hits_at[r] += 1;
    }
    let mut points = Vec::with_capacity(v + 1);
    let mut hits = 0usize;
    for k in 0..=v {
        hits += hits_at[k];
        let tpr = hits as f64 / n;
        let fpr = (k as f64 * n - hits as f64) / (n * (v - 1) as f64);
        let precision = if k == 0 { 0.0 } else { tpr / k as f64 };
        points.push(RocPoint {
            cutoff: k,
            fpr,
            tpr,
            precision,
        });
    }
    Ok(points)
}

/// Trapezoid area under `(fpr, tpr)`, as a percentage.
pub fn trapezoid(points: &[RocPoint]) -> f64 {
    100.0
        * points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum::<f64>()
}

/// Test ids whose word has a training slang sense, then the rest.
pub fn partition_few_zero(split: &DataSplit, lex: &Lexicon) -> Result<(Vec<String>, Vec<String>)> {
    let mut seen = HashSet::new();
    for id in split.training_ids() {
        seen.insert(lex.require_slang(id)?.word.as_str());
    }
    let mut few = Vec::new();
    let mut zero = Vec::new();
    for id in &split.test {
        let s = lex.require_slang(id)?;
        if seen.contains(s.word.as_str()) {
            few.push(id.clone());
        } else {
            zero.push(id.clone());
        }
    }
    Ok((few, zero))
}

/// Smallest symmetric difference to any training content-word set; `None`
/// when there are no training sets.
pub fn synonymy_degree(test: &WordSet, train: &[WordSet]) -> Option<usize> {
    train.iter().map(|t| set_edit_distance(test, t)).min()
}

/// Bins from ascending lower edges; the last bin is open-ended and also
/// holds the undefined degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynonymyBins {
    edges: Vec<usize>,
}

impl Default for SynonymyBins {
    fn default() -> Self {
        SynonymyBins {
            edges: vec![0, 1, 2, 3, 4],
        }
    }
}

impl SynonymyBins {
    pub fn new(edges: Vec<usize>) -> Result<Self> {
        if edges.is_empty() || edges[0] != 0 || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "synonymy_bins",
                "edges must start at 0 and strictly increase",
            ));
        }
        Ok(SynonymyBins { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn bin(&self, degree: Option<usize>) -> usize {
        match degree {
            None => self.edges.len() - 1,
            Some(d) => self.edges.iter().rposition(|&e| e <= d).unwrap_or(0),
        }
    }

    pub fn label(&self, bin: usize) -> String {
        let lo = self.edges[bin];
        match self.edges.get(bin + 1) {
            None => format!("{lo}+"),
            Some(&hi) if hi == lo + 1 => lo.to_string(),
            Some(&hi) => format!("{lo}-{}", hi - 1),
        }
    }
}

/// Normalized position of `own` when `targets` are sorted by squared
/// distance from `query`: 0 nearest, 1 farthest.
pub fn normalized_distance_rank(query: &[f64], targets: &[Vec<f64>], own: usize) -> f64 {
    let d: Vec<f64> = targets.iter().map(|t| -squared_distance(query, t)).collect();
    (rank_of(&d, own) - 1) as f64 / (targets.len() - 1).max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            se: f64::NAN,
            n,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let se = if n < 2 {
        0.0
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    MeanSe { mean, se, n }
}

/// Mann–Whitney U test with the tie-corrected normal approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationTest {
    /// U statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value for the first sample lying below the second.
    pub p_less: f64,
    pub p_two_sided: f64,
}

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<LocationTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::data("location test needs two non-empty samples"));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut all: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += avg * all[i..=j].iter().filter(|x| x.1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    if var <= 0.0 {
        return Ok(LocationTest {
            u,
            z: 0.0,
            p_less: 1.0,
            p_two_sided: 1.0,
        });
    }
    let z = (u - mean) / var.sqrt();
    Ok(LocationTest {
        u,
        z,
        p_less: std_normal.cdf(z),
        p_two_sided: (2.0 * std_normal.cdf(-z.abs())).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vocab(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn rank_examples() {
        let v = vocab(3);
        let p = Posterior {
            probs: vec![0.2, 0.5, 0.3],
        };
        let r = rank_candidates(&p, &v, "s", "w0", 2).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.topk, vec![("w1".into(), 0.5), ("w2".into(), 0.3)]);
        assert_eq!(rank_candidates(&p, &v, "s", "w1", 5).unwrap().rank, 1);
        let u = Posterior {
            probs: vec![1.0 / 3.0; 3],
        };
        for i in 0..3 {
            assert_eq!(rank_candidates(&u, &v, "s", &v[i], 1).unwrap().rank, i + 1);
        }
        assert!(matches!(
            rank_candidates(&p, &v, "s", "zz", 1),
            Err(Error::UnknownWord(_))
        ));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[1, 1, 1], 10).unwrap(), 100.0);
        assert_eq!(auc(&[3], 5).unwrap(), 50.0);
        assert_eq!(trapezoid(&roc_curve(&[3], 5).unwrap()), 50.0);
        assert_eq!(auc(&[7, 7], 7).unwrap(), 0.0);
        assert!(auc(&[], 5).is_err());
        assert!(auc(&[1], 1).is_err());
        assert!(auc(&[6], 5).is_err());
    }

    #[test]
    fn roc_shape() {
        let pts = roc_curve(&[1, 4, 2, 9], 10).unwrap();
        assert_eq!((pts[0].fpr, pts[0].tpr), (0.0, 0.0));
        let last = pts.last().unwrap();
        assert!((last.fpr - 1.0).abs() < 1e-15 && last.tpr == 1.0);
        assert!(pts.windows(2).all(|w| w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr));
        assert_eq!(pts[1].precision, 0.25);
    }

    #[test]
    fn auc_is_antitone_in_each_rank() {
        let base = [3, 5, 2];
        let a = auc(&base, 10).unwrap();
        for i in 0..3 {
            let mut worse = base;
            worse[i] += 1;
            assert!(auc(&worse, 10).unwrap() < a);
        }
    }

    #[test]
    fn random_ranker_is_near_fifty() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ranks: Vec<usize> = (0..1000).map(|_| rng.gen_range(1..=100)).collect();
        let a = auc(&ranks, 100).unwrap();
        assert!((a - 50.0).abs() < 2.0, "{a}");
    }

    #[test]
    fn synonymy_examples() {
        let s = |w: &[&str]| -> WordSet { w.iter().map(|x| x.to_string()).collect() };
        assert_eq!(synonymy_degree(&s(&["kill"]), &[s(&["kill"]), s(&["x"])]), Some(0));
        assert_eq!(synonymy_degree(&s(&["kill", "murder"]), &[s(&["kill", "slay"])]), Some(2));
        assert_eq!(synonymy_degree(&s(&["kill"]), &[]), None);
        let bins = SynonymyBins::default();
        assert_eq!(bins.bin(None), 4);
        assert_eq!(bins.bin(Some(2)), 2);
        assert_eq!(bins.bin(Some(17)), 4);
        assert_eq!(bins.label(4), "4+");
        assert_eq!(bins.label(0), "0");
        let wide = SynonymyBins::new(vec![0, 2, 5]).unwrap();
        assert_eq!(wide.label(1), "2-4");
        assert_eq!(wide.bin(Some(3)), 1);
        assert!(SynonymyBins::new(vec![1, 2]).is_err());
        assert!(SynonymyBins::new(vec![0, 2, 2]).is_err());
    }

    #[test]
    fn distance_rank_examples() {
        let protos = vec![vec![0.0], vec![1.0], vec![3.0]];
        assert_eq!(normalized_distance_rank(&[0.1], &protos, 0), 0.0);
        assert_eq!(normalized_distance_rank(&[0.1], &protos, 2), 1.0);
        assert_eq!(normalized_distance_rank(&[0.1], &protos, 1), 0.5);
    }

    #[test]
    fn mean_se_examples() {
        let m = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_se(&[4.0]).se, 0.0);
    }

    #[test]
    fn location_test_examples() {
        let a: Vec<f64> = (0..30).map(|i| i as f64 / 100.0).collect();
        let b: Vec<f64> = (0..30).map(|i| 0.5 + i as f64 / 100.0).collect();
        let t = mann_whitney(&a, &b).unwrap();
        assert_eq!(t.u, 0.0);
        assert!(t.p_less < 1e-6);
        let same = mann_whitney(&a, &a).unwrap();
        assert!((same.p_two_sided - 1.0).abs() < 1e-12);
        let flat = mann_whitney(&[1.0, 1.0], &[1.0]).unwrap();
        assert_eq!(flat.p_less, 1.0);
    }

    #[test]
    fn few_zero_partition() {
        use crate::lexicon::{SenseDefinition, SenseKind, TagSet};
        let mk = |id: &str, w: &str, kind| SenseDefinition {
            id: id.into(),
            word: w.into(),
            definition: "something".into(),
            pos: "noun".into(),
            kind,
            flags: vec![],
            decade: None,
            example: None,
            votes: None,
        };
        let lex = Lexicon::from_senses(
            vec![
                mk("a1", "a", SenseKind::Slang),
                mk("a2", "a", SenseKind::Slang),
                mk("a3", "a", SenseKind::Slang),
                mk("b1", "b", SenseKind::Slang),
            ],
            vec![mk("ca", "a", SenseKind::Conventional), mk("cb", "b", SenseKind::Conventional)],
            TagSet::standard(),
        )
        .unwrap();
        let split = DataSplit {
            train: vec!["a1".into()],
            validation: vec!["a2".into()],
            test: vec!["a3".into(), "b1".into()],
            seed: 0,
        };
        let (few, zero) = partition_few_zero(&split, &lex).unwrap();
        assert_eq!(few, vec!["a3".to_string()]);
        assert_eq!(zero, vec!["b1".to_string()]);
    }

    proptest::proptest! {
        #[test]
        fn closed_form_matches_trapezoid(
            v in 2usize..60,
            raw in proptest::collection::vec(0usize..10_000, 1..40)
        ) {
            let ranks: Vec<usize> = raw.iter().map(|r| r % v + 1).collect();
            let a = auc(&ranks, v).unwrap();
            let t = trapezoid(&roc_curve(&ranks, v).unwrap());
            proptest::prop_assert!((a - t).abs() < 1e-9);
        }
    }
}
