use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encoder::{triplet_loss, Adam, EncoderParams, EpochLog};
use super::sampling::{build_positive_pairs, NegativeSampler, PositivePair, Triplet};
use crate::embedding::{Neighborhood, SenseTable, WordSpace};
use crate::error::{Error, Result};
use crate::lexicon::{DataSplit, Lexicon, WordSet};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub hidden: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub use_neighborhood_sampling: bool,
    pub max_negative_attempts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: 0.1,
            learning_rate: 1e-4,
            max_epochs: 20,
            hidden: 1000,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            use_neighborhood_sampling: false,
            max_negative_attempts: super::sampling::DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::config("margin", "must be finite and non-negative"));
        }
        if self.max_epochs < 1 {
            return Err(Error::config("max_epochs", "must be at least 1"));
        }
        if self.hidden < 1 {
            return Err(Error::config("hidden", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        Ok(())
    }
}

/// Vectors of one triplet, borrowed from the sense table.
struct TripletVectors<'a> {
    anchor: &'a [f64],
    positive: &'a [f64],
    negative: &'a [f64],
}

fn vectors<'a>(senses: &'a SenseTable, t: &Triplet) -> Result<TripletVectors<'a>> {
    Ok(TripletVectors {
        anchor: senses.require(&t.anchor_id)?,
        positive: senses.require(&t.positive_id)?,
        negative: senses.require(&t.negative_id)?,
    })
}

/// Mean triplet loss of the encoded triplets.
pub fn mean_loss(
    params: &EncoderParams,
    senses: &SenseTable,
    triplets: &[Triplet],
    margin: f64,
) -> Result<f64> {
    if triplets.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for t in triplets {
        let v = vectors(senses, t)?;
        total += triplet_loss(
            &params.encode(v.anchor)?,
            &params.encode(v.positive)?,
            &params.encode(v.negative)?,
            margin,
        );
    }
    Ok(total / triplets.len() as f64)
}

fn embedded_pairs(
    ids: &[String],
    lex: &Lexicon,
    nbh: &Neighborhood,
    senses: &SenseTable,
    use_ns: bool,
) -> Result<Vec<PositivePair>> {
    let usable: Vec<String> = ids.iter().filter(|id| senses.contains(id)).cloned().collect();
    if usable.len() < ids.len() {
        log::warn!("{} anchors without usable vectors skipped", ids.len() - usable.len());
    }
    Ok(build_positive_pairs(&usable, lex, nbh, use_ns)?
        .into_iter()
        .filter(|p| senses.contains(&p.positive_id))
        .collect())
}

fn sample_triplets(
    pairs: &[PositivePair],
    sampler: &NegativeSampler<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Triplet>> {
    pairs
        .iter()
        .map(|p| {
            Ok(Triplet {
                anchor_id: p.anchor_id.clone(),
                positive_id: p.positive_id.clone(),
                negative_id: sampler.sample(p, rng)?,
            })
        })
        .collect()
}

/// Everything training needs besides the split and the hyperparameters.
pub struct TrainingData<'a> {
    pub lex: &'a Lexicon,
    pub senses: &'a SenseTable,
    pub words: &'a WordSpace,
    pub nbh: &'a Neighborhood,
    pub stopwords: &'a WordSet,
}

/// Trains the sense encoder with single-example Adam updates, resampling
/// every negative each epoch, and returns the weights of the epoch with the
/// lowest validation loss (epoch 0 being the initialization).
pub fn train(data: &TrainingData<'_>, split: &DataSplit, cfg: &TrainConfig) -> Result<EncoderParams> {
    cfg.validate()?;
    let use_ns = cfg.use_neighborhood_sampling;
    let train_pairs = embedded_pairs(&split.train, data.lex, data.nbh, data.senses, use_ns)?;
    let val_pairs = embedded_pairs(&split.validation, data.lex, data.nbh, data.senses, use_ns)?;
    if train_pairs.is_empty() {
        return Err(Error::data("no training pairs"));
    }
    if val_pairs.is_empty() {
        return Err(Error::data("no validation pairs"));
    }
    let sampler = NegativeSampler::new(
        data.lex,
        data.senses,
        data.words,
        data.nbh,
        data.stopwords,
        use_ns,
    )?
    .with_max_attempts(cfg.max_negative_attempts);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut val_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut params = EncoderParams::init(data.senses.dim(), cfg.hidden, &mut rng);
    let val_triplets = sample_triplets(&val_pairs, &sampler, &mut val_rng)?;

    let initial_train = sample_triplets(&train_pairs, &sampler, &mut rng)?;
    let mut log = vec![EpochLog {
        epoch: 0,
        train_loss: mean_loss(&params, data.senses, &initial_train, cfg.margin)?,
        validation_loss: mean_loss(&params, data.senses, &val_triplets, cfg.margin)?,
    }];
    let mut best = (log[0].validation_loss, params.clone(), 0usize);
    let mut adam = Adam::new(&params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);

    for epoch in 1..=cfg.max_epochs {
        let mut triplets = sample_triplets(&train_pairs, &sampler, &mut rng)?;
        triplets.shuffle(&mut rng);
        let mut total = 0.0;
        for t in &triplets {
            let v = vectors(data.senses, t)?;
            let (loss, grad) = params.loss_gradient(v.anchor, v.positive, v.negative, cfg.margin)?;
            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite loss at epoch {epoch} on ({}, {}, {})",
                    t.anchor_id, t.positive_id, t.negative_id
                )));
            }
            total += loss;
            adam.step(&mut params, &grad);
        }
        if !params.is_finite() {
            return Err(Error::Numerical(format!("non-finite weights after epoch {epoch}")));
        }
        let entry = EpochLog {
            epoch,
            train_loss: total / triplets.len() as f64,
            validation_loss: mean_loss(&params, data.senses, &val_triplets, cfg.margin)?,
        };
        log::info!(
            "epoch {epoch}: train {:.6} validation {:.6}",
            entry.train_loss,
            entry.validation_loss
        );
        if entry.validation_loss < best.0 {
            best = (entry.validation_loss, params.clone(), epoch);
        }
        log.push(entry);
    }

    let (_, mut chosen, epoch) = best;
    chosen.train_log = log;
    chosen.selected_epoch = epoch;
    Ok(chosen)
}
