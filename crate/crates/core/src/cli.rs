//! Command-line front end. Every command reads its inputs from the config
//! and the output directory, writes one kind of artifact, and prints a
//! one-line summary.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::choice::KernelParams;
use crate::config::{require_path, ExperimentConfig};
use crate::contrastive::{train, EncoderParams};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::eval::{
    auc, mann_whitney, mean_se, partition_few_zero, ranking, roc_curve, synonymy_degree, RankResult,
};
use crate::lexicon::{
    content_words, ingest, read_lexicon, read_raw_records, read_split, split, write_lexicon,
    write_split, DataSplit, Lexicon, PosCounts, WordSet,
};
use crate::pipeline::{distance_ranks, historical_eval, read_kernels, FittedModel, ModelSpec, Resources};
use crate::priors::{spearman, syntactic_prior, linguistic_prior, LmScoreTable, TransitionMatrix};
use crate::synthetic;

/// Settings of the built-in synthetic experiment.
pub const SYNTHETIC_CONFIG: &str = include_str!("../configs/synthetic.ini");

#[derive(Debug, Parser)]
#[command(name = "slangchoice", version, about = "Probabilistic slang word choice")]
pub struct Cli {
    /// Experiment config file.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Generate the toy lexicon and use it for any data path the config
    /// leaves unset.
    #[arg(long, global = true)]
    pub synthetic: bool,
    /// Output directory, overriding the config.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter dictionary records into a lexicon.
    Ingest,
    /// Split slang senses into train, validation and test.
    Split,
    /// Train the contrastive sense encoder.
    Train,
    /// Fit kernel widths for every configured model.
    Fit,
    /// Write posteriors over the vocabulary for every test sense.
    Predict,
    /// Rank test senses and report AUC per model.
    Eval,
    /// Run one of the analyses.
    Analyze {
        #[command(subcommand)]
        analysis: Analysis,
    },
    /// Ingest, split, train, fit, predict and eval in one go.
    All,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Analysis {
    /// AUC on few-shot and zero-shot test senses.
    Fewshot,
    /// AUC by synonymy degree to the training senses.
    Synonymy,
    /// Rank of each sense's own word prototype, before and after encoding.
    Distance,
    /// Train and test decade by decade.
    Historical,
    /// Top predictions of every model for each test sense.
    Examples,
    /// Rank correlation between the syntactic and linguistic priors.
    Priors,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Ingest => "ingest".into(),
            Command::Split => "split".into(),
            Command::Train => "train".into(),
            Command::Fit => "fit".into(),
            Command::Predict => "predict".into(),
            Command::Eval => "eval".into(),
            Command::All => "all".into(),
            Command::Analyze { analysis } => format!("analyze {analysis:?}").to_lowercase(),
        }
    }
}

/// Resolves the effective config for `cli`.
pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, cli.synthetic) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, true) => ExperimentConfig::parse_str(SYNTHETIC_CONFIG, Path::new("."))?,
        (None, false) => {
            return Err(Error::config("config", "pass --config FILE or --synthetic"));
        }
    };
    if let Some(out) = &cli.output {
        cfg.paths.output = out.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = load_config(cli)?;
    let out = cfg.paths.output.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    if cli.synthetic {
        let data = synthetic::generate(&cfg.synthetic)?;
        let paths = synthetic::write(&data, &out.join("synthetic"), &cfg.provenance("synthetic"))?;
        let p = &mut cfg.paths;
        p.slang.get_or_insert(paths.slang);
        p.conventional.get_or_insert(paths.conventional);
        p.vectors.get_or_insert(paths.vectors);
        p.lm_scores.get_or_insert(paths.lm_scores);
    }
    let ctx = Context {
        header: cfg.provenance(&cli.command.name()),
        cfg,
    };
    match &cli.command {
        Command::Ingest => ctx.ingest(),
        Command::Split => ctx.split(),
        Command::Train => ctx.train(),
        Command::Fit => ctx.fit(),
        Command::Predict => ctx.predict(),
        Command::Eval => ctx.eval(),
        Command::All => {
            ctx.ingest()?;
            ctx.split()?;
            if ctx.cfg.models.iter().any(ModelSpec::uses_encoder) {
                ctx.train()?;
            }
            ctx.fit()?;
            ctx.predict()?;
            ctx.eval()
        }
        Command::Analyze { analysis } => match analysis {
            Analysis::Fewshot => ctx.fewshot(),
            Analysis::Synonymy => ctx.synonymy(),
            Analysis::Distance => ctx.distance(),
            Analysis::Historical => ctx.historical(),
            Analysis::Examples => ctx.examples(),
            Analysis::Priors => ctx.prior_correlation(),
        },
    }
}

/// Loads the resources and the fitted `spec` from the output of a finished
/// run. With `synthetic`, data paths default to the generated files.
pub fn open_model(
    mut cfg: ExperimentConfig,
    spec: ModelSpec,
    synthetic: bool,
) -> Result<(Resources, FittedModel)> {
    if synthetic {
        let paths = synthetic::SyntheticPaths::in_dir(&cfg.paths.output.join("synthetic"));
        let p = &mut cfg.paths;
        p.slang.get_or_insert(paths.slang);
        p.conventional.get_or_insert(paths.conventional);
        p.vectors.get_or_insert(paths.vectors);
        p.lm_scores.get_or_insert(paths.lm_scores);
    }
    cfg.models = vec![spec];
    let ctx = Context {
        header: String::new(),
        cfg,
    };
    let res = ctx.resources(ctx.lexicon()?)?;
    let model = ctx.fitted_models(&res)?.pop().expect("one model configured");
    Ok((res, model))
}

/// File names inside the output directory.
pub mod artifacts {
    pub const LEXICON: &str = "lexicon.jsonl";
    pub const REJECTIONS: &str = "rejections.tsv";
    pub const SPLIT: &str = "split.txt";
    pub const ENCODER: &str = "encoder.txt";
    pub const TRANSITION: &str = "transition.tsv";
    pub const KERNELS_DIR: &str = "kernels";
    pub const POSTERIORS_DIR: &str = "posteriors";
    pub const ROC_DIR: &str = "roc";
    pub const RESULTS: &str = "results.csv";
    pub const FEWSHOT: &str = "fewshot.csv";
    pub const SYNONYMY: &str = "synonymy.csv";
    pub const DISTANCE: &str = "distance.csv";
    pub const DISTANCE_TEST: &str = "distance_test.csv";
    pub const HISTORICAL: &str = "historical.csv";
    pub const EXAMPLES: &str = "examples.csv";
    pub const PRIOR_CORRELATION: &str = "prior_correlation.csv";
}

/// A CSV file opened after the provenance header.
fn csv_writer(path: &Path, header: &str) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(header.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(format!("{}: {other:?}", path.display())),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

struct Context {
    cfg: ExperimentConfig,
    header: String,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output(name)
    }

    fn lexicon(&self) -> Result<Lexicon> {
        read_lexicon(&self.path(artifacts::LEXICON))
    }

    fn data_split(&self) -> Result<DataSplit> {
        read_split(&self.path(artifacts::SPLIT))
    }

    fn resources(&self, lex: Lexicon) -> Result<Resources> {
        let p = &self.cfg.paths;
        let store = EmbeddingStore::read(require_path(&p.vectors, "paths.vectors")?)?;
        let counts = p.pos_counts.as_deref().map(PosCounts::read).transpose()?;
        let fallback = p.pos_fallback.as_deref().map(PosCounts::read).transpose()?;
        let lm = p.lm_scores.as_deref().map(LmScoreTable::read).transpose()?;
        let mut res = Resources::new(
            lex,
            &store,
            self.cfg.filter.stopwords.clone(),
            self.cfg.neighborhood_k,
            counts.as_ref(),
            fallback.as_ref(),
            lm,
        )?;
        res.query_epsilon = self.cfg.query_epsilon;
        Ok(res)
    }

    /// The trained encoder, read only when some model needs it.
    fn encoder_for(&self, models: &[ModelSpec]) -> Result<Option<EncoderParams>> {
        if models.iter().any(ModelSpec::uses_encoder) {
            EncoderParams::read(&self.path(artifacts::ENCODER)).map(Some)
        } else {
            Ok(None)
        }
    }

    fn kernels_path(&self, spec: &ModelSpec) -> PathBuf {
        self.path(artifacts::KERNELS_DIR).join(format!("{}.ini", spec.stem()))
    }

    /// Every configured model with the kernels written by `fit`.
    fn fitted_models(&self, res: &Resources) -> Result<Vec<FittedModel>> {
        let encoder = self.encoder_for(&self.cfg.models)?;
        let transition = if self.cfg.models.iter().any(|m| m.prior.ssp) {
            Some(TransitionMatrix::read(&self.path(artifacts::TRANSITION))?)
        } else {
            None
        };
        self.cfg
            .models
            .iter()
            .map(|spec| {
                let path = self.kernels_path(spec);
                let (stored, kernels) = read_kernels(&path)?;
                if stored != *spec {
                    return Err(Error::data(format!(
                        "{} holds `{stored}`, expected `{spec}`",
                        path.display()
                    )));
                }
                let t = if spec.prior.ssp { transition.clone() } else { None };
                FittedModel::assemble(res, *spec, kernels, encoder.as_ref(), t)
            })
            .collect()
    }

    fn ingest(&self) -> Result<()> {
        let p = &self.cfg.paths;
        let (slang, mut rejections) = read_raw_records(require_path(&p.slang, "paths.slang")?)?;
        let (conventional, conv_rejections) =
            read_raw_records(require_path(&p.conventional, "paths.conventional")?)?;
        rejections.extend(conv_rejections);
        let ingested = ingest(&slang, &conventional, &self.cfg.filter)?;
        rejections.extend(ingested.rejections);
        let lex = ingested.lexicon;
        write_lexicon(&self.path(artifacts::LEXICON), &lex, &self.header)?;
        let mut text = self.header.clone();
        for r in &rejections {
            text.push_str(&format!("{}\t{}\n", r.id, r.reason));
        }
        let path = self.path(artifacts::REJECTIONS);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        println!(
            "ingest: {} slang senses over {} words, {} records rejected",
            lex.slang().len(),
            lex.vocabulary().len(),
            rejections.len()
        );
        Ok(())
    }

    fn split(&self) -> Result<()> {
        let lex = self.lexicon()?;
        let s = split(&lex, self.cfg.seed)?;
        write_split(&self.path(artifacts::SPLIT), &s, &self.header)?;
        println!(
            "split: {} train, {} validation, {} test",
            s.train.len(),
            s.validation.len(),
            s.test.len()
        );
        Ok(())
    }

    fn train(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let enc = train(&res.training_data(), &s, &self.cfg.train)?;
        enc.write(&self.path(artifacts::ENCODER), &self.header)?;
        let best = &enc.train_log[enc.selected_epoch];
        println!(
            "train: kept epoch {} of {}, validation loss {:.6}",
            enc.selected_epoch,
            enc.train_log.len() - 1,
            best.validation_loss
        );
        Ok(())
    }

    fn fit(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let encoder = self.encoder_for(&self.cfg.models)?;
        let dir = self.path(artifacts::KERNELS_DIR);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut transition_written = false;
        for spec in &self.cfg.models {
            let model = FittedModel::fit(&res, *spec, &s.train, encoder.as_ref())?;
            model.write_kernels(&self.kernels_path(spec), &self.header)?;
            if let (Some(t), false) = (model.transition(), transition_written) {
                t.write(&self.path(artifacts::TRANSITION), &self.header)?;
                transition_written = true;
            }
        }
        println!("fit: {} models", self.cfg.models.len());
        Ok(())
    }

    fn predict(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let vocab = res.lex.vocabulary();
        let dir = self.path(artifacts::POSTERIORS_DIR);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let models = self.fitted_models(&res)?;
        for model in &models {
            let path = dir.join(format!("{}.tsv", model.spec.stem()));
            let mut text = self.header.clone();
            text.push_str("sense_id\tword\tprobability\trank\n");
            for id in &s.test {
                let post = match model.posterior(&res, id) {
                    Ok(p) => p,
                    Err(Error::MissingVector(_)) => continue,
                    Err(e) => return Err(e),
                };
                for (r, i) in ranking(&post.probs).into_iter().enumerate() {
                    text.push_str(&format!("{id}\t{}\t{}\t{}\n", vocab[i], post.probs[i], r + 1));
                }
            }
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        println!("predict: {} test senses, {} models", s.test.len(), models.len());
        Ok(())
    }

    fn eval(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let v = res.lex.vocabulary().len();
        let models = self.fitted_models(&res)?;
        let path = self.path(artifacts::RESULTS);
        let mut w = csv_writer(&path, &self.header)?;
        w.write_record(["model", "n", "auc", "h_s", "h_cf"]).map_err(csv_err(&path))?;
        let mut summary = Vec::new();
        for model in &models {
            let ranks: Vec<usize> = model.evaluate(&res, &s.test, 0)?.iter().map(|r| r.rank).collect();
            let a = auc(&ranks, v)?;
            let KernelParams { h_s, h_cf } = model.kernels;
            w.write_record([
                model.spec.to_string(),
                ranks.len().to_string(),
                format!("{a:.4}"),
                h_s.to_string(),
                h_cf.to_string(),
            ])
            .map_err(csv_err(&path))?;
            let roc_path = self
                .path(artifacts::ROC_DIR)
                .join(format!("{}.csv", model.spec.stem()));
            let mut rw = csv_writer(&roc_path, &self.header)?;
            rw.write_record(["cutoff", "fpr", "tpr", "precision"]).map_err(csv_err(&roc_path))?;
            for p in roc_curve(&ranks, v)? {
                rw.write_record([
                    p.cutoff.to_string(),
                    p.fpr.to_string(),
                    p.tpr.to_string(),
                    p.precision.to_string(),
                ])
                .map_err(csv_err(&roc_path))?;
            }
            rw.flush().map_err(|e| Error::io(&roc_path, e))?;
            summary.push(format!("{} {a:.1}", model.spec));
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        println!("eval: AUC {}", summary.join(", "));
        Ok(())
    }

    fn stratified(
        &self,
        res: &Resources,
        models: &[FittedModel],
        strata: &[(String, Vec<String>)],
        file: &str,
        label: &str,
    ) -> Result<()> {
        let v = res.lex.vocabulary().len();
        let path = self.path(file);
        let mut w = csv_writer(&path, &self.header)?;
        w.write_record(["model", label, "n", "auc"]).map_err(csv_err(&path))?;
        for model in models {
            for (name, ids) in strata {
                let ranks: Vec<usize> = model.evaluate(res, ids, 0)?.iter().map(|r| r.rank).collect();
                let a = (!ranks.is_empty()).then(|| auc(&ranks, v)).transpose()?;
                w.write_record([
                    model.spec.to_string(),
                    name.clone(),
                    ranks.len().to_string(),
                    fmt_opt(a.map(|x| (x * 1e4).round() / 1e4)),
                ])
                .map_err(csv_err(&path))?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    fn fewshot(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let (few, zero) = partition_few_zero(&s, &res.lex)?;
        println!("analyze fewshot: {} few-shot, {} zero-shot", few.len(), zero.len());
        let strata = vec![("few".to_string(), few), ("zero".to_string(), zero)];
        let models = self.fitted_models(&res)?;
        self.stratified(&res, &models, &strata, artifacts::FEWSHOT, "stratum")
    }

    fn synonymy(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let stop = &self.cfg.filter.stopwords;
        let words = |id: &String| -> Result<WordSet> {
            Ok(content_words(&res.lex.require_slang(id)?.definition, stop))
        };
        let train: Vec<WordSet> = s.training_ids().map(words).collect::<Result<_>>()?;
        let bins = &self.cfg.synonymy_bins;
        let mut strata: Vec<(String, Vec<String>)> =
            (0..bins.len()).map(|b| (bins.label(b), Vec::new())).collect();
        for id in &s.test {
            let b = bins.bin(synonymy_degree(&words(id)?, &train));
            strata[b].1.push(id.clone());
        }
        let counts: Vec<String> = strata.iter().map(|(l, ids)| format!("{l}:{}", ids.len())).collect();
        println!("analyze synonymy: {}", counts.join(" "));
        let models = self.fitted_models(&res)?;
        self.stratified(&res, &models, &strata, artifacts::SYNONYMY, "bin")
    }

    fn distance(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let enc = EncoderParams::read(&self.path(artifacts::ENCODER))?;
        let path = self.path(artifacts::DISTANCE);
        let test_path = self.path(artifacts::DISTANCE_TEST);
        let mut w = csv_writer(&path, &self.header)?;
        let mut tw = csv_writer(&test_path, &self.header)?;
        w.write_record(["space", "set", "n", "mean", "se"]).map_err(csv_err(&path))?;
        tw.write_record(["set", "u", "z", "p_less"]).map_err(csv_err(&test_path))?;
        let all: Vec<String> = s.training_ids().chain(&s.test).cloned().collect();
        let train_ids: Vec<String> = s.training_ids().cloned().collect();
        let mut summary = String::new();
        for (set, ids) in [("train", &train_ids), ("test", &s.test), ("all", &all)] {
            let before = distance_ranks(&res, ids, None)?;
            let after = distance_ranks(&res, ids, Some(&enc))?;
            for (space, xs) in [("baseline", &before), ("cse", &after)] {
                let m = mean_se(xs);
                w.write_record([space.into(), set.into(), m.n.to_string(), m.mean.to_string(), m.se.to_string()])
                    .map_err(csv_err(&path))?;
            }
            let t = mann_whitney(&after, &before)?;
            tw.write_record([set.to_string(), t.u.to_string(), t.z.to_string(), t.p_less.to_string()])
                .map_err(csv_err(&test_path))?;
            if set == "test" {
                summary = format!(
                    "analyze distance: test mean rank {:.3} -> {:.3} (p = {:.2e})",
                    mean_se(&before).mean,
                    mean_se(&after).mean,
                    t.p_less
                );
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        tw.flush().map_err(|e| Error::io(&test_path, e))?;
        println!("{summary}");
        Ok(())
    }

    fn historical(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let rows = historical_eval(
            &res,
            self.cfg.historical_start,
            self.cfg.historical_end,
            &self.cfg.models,
            &self.cfg.train,
        )?;
        let path = self.path(artifacts::HISTORICAL);
        let mut w = csv_writer(&path, &self.header)?;
        w.write_record(["decade", "model", "n_train", "n_test", "auc", "error"]).map_err(csv_err(&path))?;
        let mut failed = 0;
        for r in &rows {
            let (a, e) = match &r.auc {
                Ok(a) => (format!("{a:.4}"), String::new()),
                Err(e) => {
                    failed += 1;
                    (String::new(), e.clone())
                }
            };
            w.write_record([
                r.decade.to_string(),
                r.model.clone(),
                r.n_train.to_string(),
                r.n_test.to_string(),
                a,
                e,
            ])
            .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        println!("analyze historical: {} rows, {failed} failed", rows.len());
        Ok(())
    }

    fn examples(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let models = self.fitted_models(&res)?;
        let k = self.cfg.top_k;
        let path = self.path(artifacts::EXAMPLES);
        let mut w = csv_writer(&path, &self.header)?;
        w.write_record(["sense_id", "definition", "true_word", "model", "rank", "top_k"])
            .map_err(csv_err(&path))?;
        let results: Vec<Vec<RankResult>> = models
            .iter()
            .map(|m| m.evaluate(&res, &s.test, k))
            .collect::<Result<_>>()?;
        for id in &s.test {
            let sense = res.lex.require_slang(id)?;
            for (model, rs) in models.iter().zip(&results) {
                let Some(r) = rs.iter().find(|r| &r.sense_id == id) else {
                    continue;
                };
                let top: Vec<&str> = r.topk.iter().map(|(w, _)| w.as_str()).collect();
                w.write_record([
                    id.clone(),
                    sense.definition.clone(),
                    sense.word.clone(),
                    model.spec.to_string(),
                    r.rank.to_string(),
                    top.join(" "),
                ])
                .map_err(csv_err(&path))?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        println!("analyze examples: {} senses, top {k}", s.test.len());
        Ok(())
    }

    fn prior_correlation(&self) -> Result<()> {
        let res = self.resources(self.lexicon()?)?;
        let s = self.data_split()?;
        let lm = res
            .lm
            .as_ref()
            .ok_or_else(|| Error::config("paths.lm_scores", "prior correlation needs LM scores"))?;
        let t = TransitionMatrix::estimate(&s.train, &res.lex)?;
        let path = self.path(artifacts::PRIOR_CORRELATION);
        let mut w = csv_writer(&path, &self.header)?;
        w.write_record(["sense_id", "spearman"]).map_err(csv_err(&path))?;
        let mut rhos = Vec::new();
        for id in &s.test {
            let sense = res.lex.require_slang(id)?;
            let ssp = syntactic_prior(&sense.pos, &res.word_dists, &t, res.query_epsilon)?;
            let lcp = linguistic_prior(id, lm, res.lex.vocabulary())?;
            let rho = spearman(&ssp.probs, &lcp.probs);
            rhos.push(rho);
            w.write_record([id.clone(), rho.to_string()]).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        let m = mean_se(&rhos);
        println!("analyze priors: spearman {:.3} ± {:.3} over {} senses", m.mean, m.se, m.n);
        Ok(())
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
