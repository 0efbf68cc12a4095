//! Word-choice posterior: kernel likelihoods over a word's conventional
//! senses, a contextual prior, optional collaborative filtering over word
//! neighborhoods, and kernel-width fitting by negative log likelihood.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::contrastive::EncoderParams;
use crate::embedding::{squared_distance, Neighborhood, SenseTable};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// Search range for both kernel widths.
pub const KERNEL_MIN: f64 = 1e-4;
pub const KERNEL_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub h_s: f64,
    pub h_cf: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { h_s: 1.0, h_cf: 1.0 }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, h) in [("h_s", self.h_s), ("h_cf", self.h_cf)] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::config(name, format!("{h} is not a positive finite width")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Likelihood {
    OneNn,
    Prototype,
}

impl fmt::Display for Likelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Likelihood::OneNn => "1nn",
            Likelihood::Prototype => "prototype",
        })
    }
}

impl FromStr for Likelihood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "1nn" | "onenn" => Ok(Likelihood::OneNn),
            "prototype" | "proto" => Ok(Likelihood::Prototype),
            other => Err(Error::config("likelihood", format!("unknown likelihood `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceModelConfig {
    pub likelihood: Likelihood,
    pub use_cf: bool,
    pub kernels: KernelParams,
    /// Absent for models scored on the raw input embeddings.
    pub encoder: Option<EncoderParams>,
}

/// Probability of each vocabulary word, in vocabulary order.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: Vec<f64>,
}

impl Posterior {
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// `exp(−‖a − b‖² / h)`.
pub fn sense_similarity(a: &[f64], b: &[f64], h_s: f64) -> f64 {
    (-squared_distance(a, b) / h_s).exp()
}

pub fn likelihood_1nn(query: &[f64], senses: &[Vec<f64>], h_s: f64) -> Result<f64> {
    if senses.is_empty() {
        return Err(Error::data("likelihood over an empty sense set"));
    }
    Ok(senses
        .iter()
        .map(|s| sense_similarity(query, s, h_s))
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn prototype(senses: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = senses
        .first()
        .ok_or_else(|| Error::data("prototype of an empty sense set"))?;
    let mut mean = vec![0.0; first.len()];
    for s in senses {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    let n = senses.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

pub fn likelihood_prototype(query: &[f64], senses: &[Vec<f64>], h_s: f64) -> Result<f64> {
    Ok(sense_similarity(query, &prototype(senses)?, h_s))
}

/// The conventional sense vectors of every vocabulary word, in the space the
/// model scores in.
#[derive(Debug, Clone)]
pub struct CandidateSenses {
    senses: Vec<Vec<Vec<f64>>>,
    prototypes: Vec<Vec<f64>>,
}

impl CandidateSenses {
    pub fn build(lex: &Lexicon, table: &SenseTable) -> Result<Self> {
        let mut senses = Vec::with_capacity(lex.vocabulary().len());
        for (i, word) in lex.vocabulary().iter().enumerate() {
            let vs: Vec<Vec<f64>> = lex
                .conventional_at(i)
                .iter()
                .filter_map(|s| table.get(&s.id).map(<[f64]>::to_vec))
                .collect();
            if vs.is_empty() {
                return Err(Error::data(format!(
                    "`{word}` has no embedded conventional sense"
                )));
            }
            senses.push(vs);
        }
        let prototypes = senses.iter().map(|s| prototype(s)).collect::<Result<_>>()?;
        Ok(CandidateSenses { senses, prototypes })
    }

    pub fn from_vectors(senses: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let prototypes = senses.iter().map(|s| prototype(s)).collect::<Result<_>>()?;
        Ok(CandidateSenses { senses, prototypes })
    }

    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    pub fn senses(&self, word: usize) -> &[Vec<f64>] {
        &self.senses[word]
    }

    pub fn prototypes(&self) -> &[Vec<f64>] {
        &self.prototypes
    }

    /// Squared distance from `query` to each word under `likelihood`: the
    /// nearest sense for 1NN, the prototype otherwise.
    pub fn sq_distances(&self, query: &[f64], likelihood: Likelihood) -> Vec<f64> {
        match likelihood {
            Likelihood::OneNn => self
                .senses
                .iter()
                .map(|ss| {
                    ss.iter()
                        .map(|s| squared_distance(query, s))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect(),
            Likelihood::Prototype => self
                .prototypes
                .iter()
                .map(|p| squared_distance(query, p))
                .collect(),
        }
    }
}

fn check_prior(prior: &[f64], n: usize) -> Result<()> {
    if prior.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: prior.len(),
        });
    }
    if prior.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::Numerical("prior has a negative or non-finite entry".into()));
    }
    Ok(())
}

/// Unnormalized posterior scaled so that its largest entry is 1.
fn base_scores(sq_dist: &[f64], prior: &[f64], h_s: f64) -> Result<Vec<f64>> {
    let logs: Vec<f64> = sq_dist
        .iter()
        .zip(prior)
        .map(|(d, p)| -d / h_s + p.ln())
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical("posterior has no mass to normalize".into()));
    }
    Ok(logs.iter().map(|l| (l - max).exp()).collect())
}

fn normalize(scores: Vec<f64>) -> Result<Posterior> {
    let total: f64 = scores.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical("posterior has no mass to normalize".into()));
    }
    Ok(Posterior {
        probs: scores.into_iter().map(|s| s / total).collect(),
    })
}

/// `P(w | query) ∝ likelihood(query, senses of w) · prior(w)`.
pub fn posterior(
    query: &[f64],
    candidates: &CandidateSenses,
    prior: &[f64],
    likelihood: Likelihood,
    h_s: f64,
) -> Result<Posterior> {
    check_prior(prior, candidates.len())?;
    let d = candidates.sq_distances(query, likelihood);
    normalize(base_scores(&d, prior, h_s)?)
}

/// Normalized weights `∝ exp(−d(w, w′) / h_cf)` over `w` and its neighbors,
/// as `(vocabulary index, weight)`, the word itself first.
pub fn cf_weights(word: usize, nbh: &Neighborhood, h_cf: f64) -> Vec<(usize, f64)> {
    let mut weights = vec![(word, 1.0)];
    weights.extend(nbh.neighbors(word).iter().map(|&(j, d)| (j, (-d / h_cf).exp())));
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    weights.iter_mut().for_each(|(_, w)| *w /= total);
    weights
}

fn smooth(base: &[f64], nbh: &Neighborhood, h_cf: f64) -> Vec<f64> {
    (0..base.len())
        .map(|w| {
            cf_weights(w, nbh, h_cf)
                .into_iter()
                .map(|(j, wt)| wt * base[j])
                .sum()
        })
        .collect()
}

/// Posterior smoothed over each candidate's word neighborhood.
pub fn cf_posterior(
    query: &[f64],
    candidates: &CandidateSenses,
    nbh: &Neighborhood,
    prior: &[f64],
    likelihood: Likelihood,
    kernels: KernelParams,
) -> Result<Posterior> {
    check_prior(prior, candidates.len())?;
    if nbh.words().len() != candidates.len() {
        return Err(Error::data("neighborhood is not aligned with the candidates"));
    }
    let d = candidates.sq_distances(query, likelihood);
    let base = base_scores(&d, prior, kernels.h_s)?;
    normalize(smooth(&base, nbh, kernels.h_cf))
}

/// Encodes `table` with `encoder` when given.
pub fn scoring_table(table: &SenseTable, encoder: Option<&EncoderParams>) -> Result<SenseTable> {
    match encoder {
        Some(enc) => table.map(|v| enc.encode(v)),
        None => Ok(table.clone()),
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// One training query reduced to what the objective needs.
#[derive(Debug, Clone)]
pub struct FitQuery {
    pub sq_dist: Vec<f64>,
    pub log_prior: Vec<f64>,
    pub target: usize,
}

impl FitQuery {
    pub fn new(sq_dist: Vec<f64>, prior: &[f64], target: usize) -> Self {
        FitQuery {
            sq_dist,
            log_prior: prior.iter().map(|p| p.ln()).collect(),
            target,
        }
    }

    fn neg_log_posterior(&self, h_s: f64, log_weights: Option<&[Vec<(usize, f64)>]>) -> f64 {
        let logs: Vec<f64> = self
            .sq_dist
            .iter()
            .zip(&self.log_prior)
            .map(|(d, lp)| -d / h_s + lp)
            .collect();
        match log_weights {
            None => log_sum_exp(logs.iter().copied()) - logs[self.target],
            Some(lw) => {
                let smoothed: Vec<f64> = lw
                    .iter()
                    .map(|ws| log_sum_exp(ws.iter().map(|&(j, lw)| lw + logs[j])))
                    .collect();
                log_sum_exp(smoothed.iter().copied()) - smoothed[self.target]
            }
        }
    }
}

/// Summed negative log posterior of the targets.
pub fn negative_log_likelihood(
    queries: &[FitQuery],
    kernels: KernelParams,
    nbh: Option<&Neighborhood>,
) -> f64 {
    let log_weights: Option<Vec<Vec<(usize, f64)>>> = nbh.map(|nbh| {
        (0..nbh.words().len())
            .map(|w| {
                cf_weights(w, nbh, kernels.h_cf)
                    .into_iter()
                    .map(|(j, wt)| (j, wt.ln()))
                    .collect()
            })
            .collect()
    });
    let terms: Vec<f64> = queries
        .par_iter()
        .map(|q| q.neg_log_posterior(kernels.h_s, log_weights.as_deref()))
        .collect();
    terms.iter().sum()
}

const SCAN_POINTS: usize = 41;
const LINE_TOLERANCE: f64 = 1e-6;
const MAX_SWEEPS: usize = 100;

/// Minimizes `f` over `[lo, hi]`: a uniform scan locates the best bracket,
/// then golden-section search refines it.
fn line_minimize(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..SCAN_POINTS {
        let x = lo + step * i as f64;
        let fx = f(x);
        if fx < best.1 || !best.1.is_finite() && fx.is_finite() {
            best = (x, fx);
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > LINE_TOLERANCE {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

const SEED_GRID: usize = 17;

fn coordinate_descent(
    objective: &dyn Fn([f64; 2]) -> f64,
    mut x: [f64; 2],
    coords: &[usize],
    lo: f64,
    hi: f64,
) -> ([f64; 2], f64) {
    let mut fx = objective(x);
    for sweep in 0..MAX_SWEEPS {
        let start = (x, fx);
        for &c in coords {
            let along = |t: f64| {
                let mut y = x;
                y[c] = t;
                objective(y)
            };
            let (t, ft) = line_minimize(&along, lo, hi);
            if ft < fx {
                x[c] = t;
                fx = ft;
            }
        }
        let moved = (x[0] - start.0[0]).abs().max((x[1] - start.0[1]).abs());
        log::debug!("kernel sweep {sweep}: nll {fx} at {x:?}");
        if moved <= LINE_TOLERANCE || start.1 - fx <= 1e-12 * fx.abs().max(1.0) {
            break;
        }
    }
    (x, fx)
}

/// Fits `(h_s, h_cf)` in log space over `[KERNEL_MIN, KERNEL_MAX]²`.
/// Coordinate descent runs from `(1, 1)` and from the best point of a
/// coarse grid; the better end point wins. `h_cf` is only searched when a
/// neighborhood is given.
pub fn fit_kernels(queries: &[FitQuery], nbh: Option<&Neighborhood>) -> Result<KernelParams> {
    if queries.is_empty() {
        return Err(Error::data("kernel fitting needs training queries"));
    }
    let (lo, hi) = (KERNEL_MIN.ln(), KERNEL_MAX.ln());
    let objective = |x: [f64; 2]| {
        let v = negative_log_likelihood(
            queries,
            KernelParams {
                h_s: x[0].exp(),
                h_cf: x[1].exp(),
            },
            nbh,
        );
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let coords: &[usize] = if nbh.is_some() { &[0, 1] } else { &[0] };
    let mut starts = vec![[0.0, 0.0]];
    if nbh.is_some() {
        let step = (hi - lo) / (SEED_GRID - 1) as f64;
        let mut seed = ([0.0, 0.0], objective([0.0, 0.0]));
        for i in 0..SEED_GRID {
            for j in 0..SEED_GRID {
                let y = [lo + step * i as f64, lo + step * j as f64];
                let fy = objective(y);
                if fy < seed.1 {
                    seed = (y, fy);
                }
            }
        }
        starts.push(seed.0);
    }
    let (mut x, mut fx) = ([0.0, 0.0], f64::INFINITY);
    for s in starts {
        let (y, fy) = coordinate_descent(&objective, s, coords, lo, hi);
        if fy < fx || !fx.is_finite() && fy.is_finite() {
            (x, fx) = (y, fy);
        }
    }
    if !fx.is_finite() {
        return Err(Error::Numerical("negative log likelihood is not finite anywhere probed".into()));
    }
    Ok(KernelParams {
        h_s: x[0].exp(),
        h_cf: x[1].exp(),
    })
}
