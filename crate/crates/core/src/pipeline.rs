//! Model variants assembled from the scoring pieces, and the experiments
//! that run them over a lexicon.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::choice::{
    cf_posterior, fit_kernels, posterior, scoring_table, CandidateSenses, FitQuery, KernelParams,
    Likelihood, Posterior,
};
use crate::contrastive::{train, EncoderParams, TrainConfig, TrainingData};
use crate::embedding::{EmbeddingStore, Neighborhood, SenseTable, WordSpace};
use crate::error::{Error, Result};
use crate::eval::{auc, normalized_distance_rank, rank_candidates, RankResult};
use crate::lexicon::{
    historical_splits, DataSplit, Lexicon, PosCounts, PosDistribution, WordSet,
};
use crate::priors::{
    uniform_prior, LmScoreTable, PriorContext, PriorSpec, TransitionMatrix, DEFAULT_QUERY_EPSILON,
};

/// How a model scores candidates before the prior is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scorer {
    /// The prior alone.
    PriorOnly,
    Kernel {
        cse: bool,
        likelihood: Likelihood,
        cf: bool,
    },
}

/// A model variant, written `prior@<prior>` or
/// `[baseline:|cse:]<1nn|proto>[+cf][@<prior>]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub scorer: Scorer,
    pub prior: PriorSpec,
}

impl ModelSpec {
    pub fn uses_encoder(&self) -> bool {
        matches!(self.scorer, Scorer::Kernel { cse: true, .. })
    }

    /// File-name-safe form of the spec.
    pub fn stem(&self) -> String {
        self.to_string()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
            .collect()
    }

    /// Parses `s`, taking the prior from `default_prior` when it names none.
    pub fn parse_with(s: &str, default_prior: PriorSpec) -> Result<Self> {
        let bad = |m: String| Error::config("models", m);
        let (body, prior) = match s.trim().split_once('@') {
            Some((b, p)) => (b.trim(), p.parse()?),
            None => (s.trim(), default_prior),
        };
        let lower = body.to_lowercase();
        if lower == "prior" {
            return Ok(ModelSpec {
                scorer: Scorer::PriorOnly,
                prior,
            });
        }
        let (cse, rest) = if let Some(r) = lower.strip_prefix("cse:") {
            (true, r)
        } else if let Some(r) = lower.strip_prefix("baseline:") {
            (false, r)
        } else {
            (false, lower.as_str())
        };
        let (lik, cf) = match rest.split_once('+') {
            Some((l, "cf")) => (l, true),
            Some((_, other)) => return Err(bad(format!("unknown modifier `{other}` in `{s}`"))),
            None => (rest, false),
        };
        Ok(ModelSpec {
            scorer: Scorer::Kernel {
                cse,
                likelihood: lik.parse()?,
                cf,
            },
            prior,
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scorer {
            Scorer::PriorOnly => write!(f, "prior")?,
            Scorer::Kernel { cse, likelihood, cf } => {
                let lik = match likelihood {
                    Likelihood::OneNn => "1nn",
                    Likelihood::Prototype => "proto",
                };
                write!(f, "{}:{lik}", if cse { "cse" } else { "baseline" })?;
                if cf {
                    write!(f, "+cf")?;
                }
            }
        }
        write!(f, "@{}", self.prior)
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelSpec::parse_with(s, PriorSpec::UNIFORM)
    }
}

/// Everything about a lexicon that does not depend on the split.
pub struct Resources {
    pub lex: Lexicon,
    pub stopwords: WordSet,
    pub senses: SenseTable,
    pub words: WordSpace,
    pub nbh: Neighborhood,
    pub word_dists: Vec<PosDistribution>,
    pub lm: Option<LmScoreTable>,
    pub query_epsilon: f64,
}

impl Resources {
    pub fn new(
        lex: Lexicon,
        store: &EmbeddingStore,
        stopwords: WordSet,
        neighborhood_k: usize,
        pos_counts: Option<&PosCounts>,
        pos_fallback: Option<&PosCounts>,
        lm: Option<LmScoreTable>,
    ) -> Result<Self> {
        let senses = SenseTable::build(&lex, store, &stopwords);
        let words = WordSpace::new(store, lex.vocabulary())?;
        let nbh = words.neighborhood(neighborhood_k)?;
        let conventional = PosCounts::from_conventional(&lex);
        let word_dists = crate::priors::word_pos_distributions(
            &lex,
            pos_counts.unwrap_or(&conventional),
            pos_fallback.unwrap_or(&conventional),
        );
        if let Some(lm) = &lm {
            for w in lm.validate(&lex) {
                log::warn!("LM scores: {w}");
            }
        }
        Ok(Resources {
            lex,
            stopwords,
            senses,
            words,
            nbh,
            word_dists,
            lm,
            query_epsilon: DEFAULT_QUERY_EPSILON,
        })
    }

    pub fn training_data(&self) -> TrainingData<'_> {
        TrainingData {
            lex: &self.lex,
            senses: &self.senses,
            words: &self.words,
            nbh: &self.nbh,
            stopwords: &self.stopwords,
        }
    }

    /// Ids of `ids` that have a usable vector.
    pub fn embedded<'a>(&self, ids: &'a [String]) -> Vec<&'a String> {
        let kept: Vec<&String> = ids.iter().filter(|id| self.senses.contains(id)).collect();
        if kept.len() < ids.len() {
            log::warn!("{} senses skipped for lack of a vector", ids.len() - kept.len());
        }
        kept
    }
}

/// A model ready to produce posteriors.
pub struct FittedModel {
    pub spec: ModelSpec,
    pub kernels: KernelParams,
    pub priors: PriorContext,
    table: Option<SenseTable>,
    candidates: Option<CandidateSenses>,
}

impl FittedModel {
    /// Builds a model with given kernels. `transition` is needed for
    /// syntactic priors, `encoder` for contrastive models.
    pub fn assemble(
        res: &Resources,
        spec: ModelSpec,
        kernels: KernelParams,
        encoder: Option<&EncoderParams>,
        transition: Option<TransitionMatrix>,
    ) -> Result<Self> {
        kernels.validate()?;
        if spec.prior.ssp && transition.is_none() {
            return Err(Error::config("prior", format!("{spec} needs a transition matrix")));
        }
        if spec.prior.lcp && res.lm.is_none() {
            return Err(Error::config("lm_scores", format!("{spec} needs an LM score table")));
        }
        let priors = PriorContext {
            spec: spec.prior,
            transition,
            word_dists: res.word_dists.clone(),
            lm: res.lm.clone(),
            epsilon: res.query_epsilon,
        };
        let (table, candidates) = match spec.scorer {
            Scorer::PriorOnly => (None, None),
            Scorer::Kernel { cse, .. } => {
                let enc = if cse {
                    Some(encoder.ok_or_else(|| {
                        Error::config("encoder", format!("{spec} needs a trained encoder"))
                    })?)
                } else {
                    None
                };
                let table = scoring_table(&res.senses, enc)?;
                let candidates = CandidateSenses::build(&res.lex, &table)?;
                (Some(table), Some(candidates))
            }
        };
        Ok(FittedModel {
            spec,
            kernels,
            priors,
            table,
            candidates,
        })
    }

    /// Assembles the model, estimating the transition matrix and fitting the
    /// kernels on `train_ids`.
    pub fn fit(
        res: &Resources,
        spec: ModelSpec,
        train_ids: &[String],
        encoder: Option<&EncoderParams>,
    ) -> Result<Self> {
        let transition = if spec.prior.ssp {
            Some(TransitionMatrix::estimate(train_ids, &res.lex)?)
        } else {
            None
        };
        let mut model = Self::assemble(res, spec, KernelParams::default(), encoder, transition)?;
        if let Scorer::Kernel { likelihood, cf, .. } = spec.scorer {
            let ids = res.embedded(train_ids);
            // the linguistic prior is left out of fitting
            let fit_priors = PriorContext {
                spec: PriorSpec {
                    ssp: spec.prior.ssp,
                    lcp: false,
                },
                ..model.priors.clone()
            };
            let queries = ids
                .par_iter()
                .map(|id| {
                    let q = model.query(id)?;
                    let s = res.lex.require_slang(id)?;
                    let target = res
                        .lex
                        .word_index(&s.word)
                        .ok_or_else(|| Error::UnknownWord(s.word.clone()))?;
                    let prior = fit_priors.prior(id, &res.lex)?;
                    let d = model.candidates().sq_distances(q, likelihood);
                    Ok(FitQuery::new(d, &prior.probs, target))
                })
                .collect::<Result<Vec<_>>>()?;
            model.kernels = fit_kernels(&queries, cf.then_some(&res.nbh))?;
            log::info!(
                "{spec}: h_s {} h_cf {}",
                model.kernels.h_s,
                model.kernels.h_cf
            );
        }
        Ok(model)
    }

    fn candidates(&self) -> &CandidateSenses {
        self.candidates.as_ref().expect("kernel models carry candidates")
    }

    fn query(&self, sense_id: &str) -> Result<&[f64]> {
        self.table
            .as_ref()
            .expect("kernel models carry a sense table")
            .require(sense_id)
    }

    pub fn transition(&self) -> Option<&TransitionMatrix> {
        self.priors.transition.as_ref()
    }

    pub fn posterior(&self, res: &Resources, sense_id: &str) -> Result<Posterior> {
        let prior = self.priors.prior(sense_id, &res.lex)?;
        match self.spec.scorer {
            Scorer::PriorOnly => Ok(Posterior { probs: prior.probs }),
            Scorer::Kernel { likelihood, cf, .. } => {
                let q = self.query(sense_id)?;
                if cf {
                    cf_posterior(q, self.candidates(), &res.nbh, &prior.probs, likelihood, self.kernels)
                } else {
                    posterior(q, self.candidates(), &prior.probs, likelihood, self.kernels.h_s)
                }
            }
        }
    }

    /// Ranks the true word of every embedded id, in input order.
    pub fn evaluate(&self, res: &Resources, ids: &[String], k: usize) -> Result<Vec<RankResult>> {
        let kept = match self.spec.scorer {
            Scorer::PriorOnly => ids.iter().collect(),
            Scorer::Kernel { .. } => res.embedded(ids),
        };
        kept.par_iter()
            .map(|id| {
                let s = res.lex.require_slang(id)?;
                let post = self.posterior(res, id)?;
                rank_candidates(&post, res.lex.vocabulary(), id, &s.word, k)
            })
            .collect()
    }

    pub fn auc(&self, res: &Resources, ids: &[String]) -> Result<f64> {
        let ranks: Vec<usize> = self.evaluate(res, ids, 0)?.iter().map(|r| r.rank).collect();
        auc(&ranks, res.lex.vocabulary().len())
    }

    /// Key-value description of the model and its kernels.
    pub fn write_kernels(&self, path: &Path, header: &str) -> Result<()> {
        let (likelihood, cf, encoder) = match self.spec.scorer {
            Scorer::PriorOnly => ("none".to_string(), false, "none"),
            Scorer::Kernel { cse, likelihood, cf } => {
                (likelihood.to_string(), cf, if cse { "cse" } else { "none" })
            }
        };
        let text = format!(
            "{header}model = {}\nlikelihood = {likelihood}\nuse_cf = {cf}\nencoder = {encoder}\nprior = {}\nh_s = {}\nh_cf = {}\n",
            self.spec, self.spec.prior, self.kernels.h_s, self.kernels.h_cf
        );
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Reads the model and kernels written by [`FittedModel::write_kernels`].
pub fn read_kernels(path: &Path) -> Result<(ModelSpec, KernelParams)> {
    let ini = ini::Ini::load_from_file(path).map_err(|e| match e {
        ini::Error::Io(io) => Error::io(path, io),
        ini::Error::Parse(p) => Error::Parse {
            path: path.to_path_buf(),
            line: p.line,
            message: p.msg.to_string(),
        },
    })?;
    let section = ini.general_section();
    let get = |key: &str| {
        section.get(key).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("missing `{key}`"),
        })
    };
    let float = |key: &str| -> Result<f64> {
        get(key)?.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("bad `{key}`"),
        })
    };
    let spec: ModelSpec = get("model")?.parse()?;
    let kernels = KernelParams {
        h_s: float("h_s")?,
        h_cf: float("h_cf")?,
    };
    kernels.validate()?;
    Ok((spec, kernels))
}

/// Splits `ids` into training and validation parts for encoder training,
/// holding out a floored 5% (at least one) for validation.
pub fn holdout(ids: &[String], seed: u64) -> Result<DataSplit> {
    if ids.len() < 2 {
        return Err(Error::data("need at least two senses to hold out validation"));
    }
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = ((ids.len() as f64 * crate::lexicon::VALIDATION_FRACTION).floor() as usize).max(1);
    let validation = shuffled.split_off(shuffled.len() - n_val);
    Ok(DataSplit {
        train: shuffled,
        validation,
        test: Vec::new(),
        seed,
    })
}

/// Normalized rank of each sense's own word prototype among all prototypes,
/// in the raw space or the encoded one.
pub fn distance_ranks(res: &Resources, ids: &[String], encoder: Option<&EncoderParams>) -> Result<Vec<f64>> {
    let table = scoring_table(&res.senses, encoder)?;
    let candidates = CandidateSenses::build(&res.lex, &table)?;
    res.embedded(ids)
        .into_iter()
        .map(|id| {
            let s = res.lex.require_slang(id)?;
            let own = res
                .lex
                .word_index(&s.word)
                .ok_or_else(|| Error::UnknownWord(s.word.clone()))?;
            Ok(normalized_distance_rank(table.require(id)?, candidates.prototypes(), own))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalRow {
    pub decade: i32,
    pub model: String,
    pub n_train: usize,
    pub n_test: usize,
    /// AUC percentage, or the error that stopped this decade.
    pub auc: std::result::Result<f64, String>,
}

/// Retrains, refits and evaluates every model once per decade, using all
/// earlier decades for training. A failing decade is reported and the next
/// one still runs.
pub fn historical_eval(
    res: &Resources,
    start: i32,
    end: i32,
    models: &[ModelSpec],
    train_cfg: &TrainConfig,
) -> Result<Vec<HistoricalRow>> {
    let splits = historical_splits(&res.lex, start, end)?;
    let mut rows = Vec::new();
    for h in &splits {
        let run = || -> Result<Vec<(String, f64)>> {
            let encoder = if models.iter().any(ModelSpec::uses_encoder) {
                let split = holdout(&h.train, train_cfg.seed)?;
                Some(train(&res.training_data(), &split, train_cfg)?)
            } else {
                None
            };
            models
                .iter()
                .map(|spec| {
                    let m = FittedModel::fit(res, *spec, &h.train, encoder.as_ref())?;
                    Ok((spec.to_string(), m.auc(res, &h.test)?))
                })
                .collect()
        };
        match run() {
            Ok(results) => rows.extend(results.into_iter().map(|(model, a)| HistoricalRow {
                decade: h.decade,
                model,
                n_train: h.train.len(),
                n_test: h.test.len(),
                auc: Ok(a),
            })),
            Err(e) => {
                log::error!("decade {}: {e}", h.decade);
                rows.extend(models.iter().map(|spec| HistoricalRow {
                    decade: h.decade,
                    model: spec.to_string(),
                    n_train: h.train.len(),
                    n_test: h.test.len(),
                    auc: Err(e.to_string()),
                }));
            }
        }
    }
    Ok(rows)
}

/// AUC of the uniform prior on `ids`, the chance level of a lexicon.
pub fn uniform_auc(res: &Resources, ids: &[String]) -> Result<f64> {
    let probs = uniform_prior(res.lex.vocabulary())?.probs;
    let post = Posterior { probs };
    let ranks = ids
        .iter()
        .map(|id| {
            let s = res.lex.require_slang(id)?;
            Ok(rank_candidates(&post, res.lex.vocabulary(), id, &s.word, 0)?.rank)
        })
        .collect::<Result<Vec<usize>>>()?;
    auc(&ranks, res.lex.vocabulary().len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_grammar() {
        let s: ModelSpec = "cse:proto+cf@ssp".parse().unwrap();
        assert_eq!(
            s.scorer,
            Scorer::Kernel {
                cse: true,
                likelihood: Likelihood::Prototype,
                cf: true
            }
        );
        assert!(s.prior.ssp && !s.prior.lcp);
        assert_eq!(s.to_string(), "cse:proto+cf@ssp");
        assert_eq!(s.stem(), "cse-proto-cf-ssp");

        let b = ModelSpec::parse_with("1nn", "lcp".parse().unwrap()).unwrap();
        assert_eq!(b.to_string(), "baseline:1nn@lcp");
        assert!(!b.uses_encoder());
        let p: ModelSpec = "prior@ssp+lcp".parse().unwrap();
        assert_eq!(p.scorer, Scorer::PriorOnly);
        assert_eq!(p.to_string().parse::<ModelSpec>().unwrap(), p);
        assert!("cse:proto+xx".parse::<ModelSpec>().is_err());
        assert!("knn".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn holdout_is_a_partition() {
        let ids: Vec<String> = (0..41).map(|i| format!("s{i}")).collect();
        let h = holdout(&ids, 3).unwrap();
        assert_eq!(h.validation.len(), 2);
        assert_eq!(h.train.len(), 39);
        let tiny = holdout(&ids[..3], 3).unwrap();
        assert_eq!(tiny.validation.len(), 1);
        assert!(holdout(&ids[..1], 3).is_err());
    }
}
