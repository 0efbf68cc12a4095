//! Experiment configuration: a sectioned key-value file.
//!
//! ```text
//! seed = 7
//!
//! [paths]
//! slang = data/slang.jsonl
//! conventional = data/conventional.jsonl
//! vectors = data/vectors.txt
//! output = out
//!
//! [model]
//! models = prior@ssp, baseline:proto+cf, cse:proto+cf
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use sha2::{Digest, Sha256};

use crate::contrastive::TrainConfig;
use crate::error::{Error, Result};
use crate::eval::SynonymyBins;
use crate::lexicon::{FilterConfig, TagSet};
use crate::pipeline::ModelSpec;
use crate::priors::{PriorSpec, DEFAULT_QUERY_EPSILON};
use crate::synthetic::SyntheticConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Paths {
    pub slang: Option<PathBuf>,
    pub conventional: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub lm_scores: Option<PathBuf>,
    pub pos_counts: Option<PathBuf>,
    pub pos_fallback: Option<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub paths: Paths,
    pub filter: FilterConfig,
    pub train: TrainConfig,
    pub neighborhood_k: usize,
    pub query_epsilon: f64,
    pub prior: PriorSpec,
    pub models: Vec<ModelSpec>,
    pub top_k: usize,
    pub synonymy_bins: SynonymyBins,
    pub historical_start: i32,
    pub historical_end: i32,
    pub synthetic: SyntheticConfig,
    /// Canonical text the config hash is taken over.
    canonical: String,
}

fn field_err(field: &str, value: &str, e: impl std::fmt::Display) -> Error {
    Error::config(field, format!("`{value}`: {e}"))
}

/// Typed lookups into one section, remembering which keys were read.
struct Section<'a> {
    name: &'a str,
    props: Option<&'a ini::Properties>,
    used: Vec<String>,
}

impl<'a> Section<'a> {
    fn new(ini: &'a Ini, name: &'a str) -> Self {
        let props = if name.is_empty() {
            Some(ini.general_section())
        } else {
            ini.section(Some(name))
        };
        Section {
            name,
            props,
            used: Vec::new(),
        }
    }

    fn field(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.used.push(key.to_string());
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| field_err(&self.field(key), v, e)),
        }
    }

    fn path(&mut self, key: &str, base: &Path) -> Option<PathBuf> {
        self.raw(key).filter(|v| !v.is_empty()).map(|v| base.join(v))
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse().map_err(|e| field_err(&self.field(key), x, e)))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(props) = self.props {
            for (k, _) in props.iter() {
                if !self.used.iter().any(|u| u == k) {
                    return Err(Error::config(self.field(k), "unknown key"));
                }
            }
        }
        Ok(())
    }
}

const SECTIONS: &[&str] = &["paths", "filter", "train", "model", "eval", "synthetic"];

impl ExperimentConfig {
    /// Configuration with every default; `seed` is the only required value.
    pub fn with_seed(seed: u64) -> Self {
        Self::from_ini(&Ini::new(), Path::new("."), Some(seed)).expect("defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ini = Ini::load_from_file(path).map_err(|e| match e {
            ini::Error::Io(io) => Error::io(path, io),
            ini::Error::Parse(p) => Error::Parse {
                path: path.to_path_buf(),
                line: p.line,
                message: p.msg.to_string(),
            },
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_ini(&ini, base, None)
    }

    pub fn parse_str(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        Self::from_ini(&ini, base, None)
    }

    fn from_ini(ini: &Ini, base: &Path, seed_default: Option<u64>) -> Result<Self> {
        for (name, _) in ini.iter() {
            if let Some(name) = name {
                if !SECTIONS.contains(&name) {
                    return Err(Error::config(name, "unknown section"));
                }
            }
        }
        let mut top = Section::new(ini, "");
        let seed = match (top.raw("seed"), seed_default) {
            (Some(v), _) => v.parse().map_err(|e| field_err("seed", v, e))?,
            (None, Some(s)) => s,
            (None, None) => return Err(Error::config("seed", "a seed is required")),
        };
        top.finish()?;

        let mut p = Section::new(ini, "paths");
        let paths = Paths {
            slang: p.path("slang", base),
            conventional: p.path("conventional", base),
            vectors: p.path("vectors", base),
            lm_scores: p.path("lm_scores", base),
            pos_counts: p.path("pos_counts", base),
            pos_fallback: p.path("pos_fallback", base),
            output: p.path("output", base).unwrap_or_else(|| base.join("out")),
        };
        p.finish()?;

        let mut f = Section::new(ini, "filter");
        let d = FilterConfig::default();
        let tag_set = match f.raw("tag_set").unwrap_or("standard") {
            "standard" => TagSet::standard(),
            "no_interj" => TagSet::without_interjections(),
            other => return Err(field_err("filter.tag_set", other, "expected standard or no_interj")),
        };
        let filter = FilterConfig {
            dedup_overlap_threshold: f.parse("dedup_overlap_threshold", d.dedup_overlap_threshold)?,
            ud_min_vote_margin: f.parse("ud_min_vote_margin", d.ud_min_vote_margin)?,
            ud_cross_dict_overlap: f.parse("ud_cross_dict_overlap", d.ud_cross_dict_overlap)?,
            drop_acronyms: f.parse("drop_acronyms", d.drop_acronyms)?,
            drop_informal_conventional: f.parse("drop_informal_conventional", d.drop_informal_conventional)?,
            stopwords: d.stopwords,
            tag_set,
        };
        filter.validate()?;
        f.finish()?;

        let mut t = Section::new(ini, "train");
        let d = TrainConfig::default();
        let train = TrainConfig {
            margin: t.parse("margin", d.margin)?,
            learning_rate: t.parse("learning_rate", d.learning_rate)?,
            max_epochs: t.parse("max_epochs", d.max_epochs)?,
            hidden: t.parse("hidden", d.hidden)?,
            seed: t.parse("seed", seed)?,
            beta1: t.parse("beta1", d.beta1)?,
            beta2: t.parse("beta2", d.beta2)?,
            epsilon: t.parse("epsilon", d.epsilon)?,
            use_neighborhood_sampling: t.parse("neighborhood_sampling", d.use_neighborhood_sampling)?,
            max_negative_attempts: t.parse("max_negative_attempts", d.max_negative_attempts)?,
        };
        train.validate()?;
        t.finish()?;

        let mut m = Section::new(ini, "model");
        let neighborhood_k = m.parse("neighborhood_k", 10usize)?;
        let query_epsilon: f64 = m.parse("query_epsilon", DEFAULT_QUERY_EPSILON)?;
        if !(0.0..1.0).contains(&query_epsilon) {
            return Err(Error::config("model.query_epsilon", "must lie in [0, 1)"));
        }
        let prior: PriorSpec = m.parse("prior", PriorSpec::UNIFORM)?;
        let models = match m.raw("models") {
            None => vec![
                ModelSpec::parse_with("prior", prior)?,
                ModelSpec::parse_with("baseline:proto+cf", prior)?,
                ModelSpec::parse_with("cse:proto+cf", prior)?,
            ],
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| ModelSpec::parse_with(x, prior))
                .collect::<Result<Vec<_>>>()?,
        };
        if models.is_empty() {
            return Err(Error::config("model.models", "no models listed"));
        }
        m.finish()?;

        let mut e = Section::new(ini, "eval");
        let top_k = e.parse("top_k", 5usize)?;
        let synonymy_bins = match e.list::<usize>("synonymy_bins")? {
            None => SynonymyBins::default(),
            Some(edges) => SynonymyBins::new(edges)?,
        };
        let historical_start = e.parse("historical_start", 1960)?;
        let historical_end = e.parse("historical_end", 2000)?;
        if historical_start > historical_end {
            return Err(Error::config("eval.historical_start", "must not exceed historical_end"));
        }
        e.finish()?;

        let mut s = Section::new(ini, "synthetic");
        let d = SyntheticConfig::default();
        let synthetic = SyntheticConfig {
            words: s.parse("words", d.words)?,
            conventional_senses: s.parse("conventional_senses", d.conventional_senses)?,
            slang_senses: s.parse("slang_senses", d.slang_senses)?,
            dim: s.parse("dim", d.dim)?,
            rotated_dims: s.parse("rotated_dims", d.rotated_dims)?,
            angle: s.parse("angle", d.angle)?,
            noise: s.parse("noise", d.noise)?,
            tokens_per_definition: s.parse("tokens_per_definition", d.tokens_per_definition)?,
            pos_shift: s.parse("pos_shift", d.pos_shift)?,
            decades: s.list("decades")?.unwrap_or(d.decades),
            lm_distractors: s.parse("lm_distractors", d.lm_distractors)?,
            seed: s.parse("seed", seed)?,
        };
        synthetic.validate()?;
        s.finish()?;

        let mut cfg = ExperimentConfig {
            seed,
            paths,
            filter,
            train,
            neighborhood_k,
            query_epsilon,
            prior,
            models,
            top_k,
            synonymy_bins,
            historical_start,
            historical_end,
            synthetic,
            canonical: String::new(),
        };
        cfg.canonical = cfg.render();
        Ok(cfg)
    }

    /// Effective settings, one `key = value` per line, independent of how
    /// the file spelled them.
    fn render(&self) -> String {
        let p = &self.paths;
        let opt = |x: &Option<PathBuf>| x.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let f = &self.filter;
        let t = &self.train;
        let s = &self.synthetic;
        let models: Vec<String> = self.models.iter().map(ToString::to_string).collect();
        let decades: Vec<String> = s.decades.iter().map(ToString::to_string).collect();
        [
            format!("seed = {}", self.seed),
            format!("paths.slang = {}", opt(&p.slang)),
            format!("paths.conventional = {}", opt(&p.conventional)),
            format!("paths.vectors = {}", opt(&p.vectors)),
            format!("paths.lm_scores = {}", opt(&p.lm_scores)),
            format!("paths.pos_counts = {}", opt(&p.pos_counts)),
            format!("paths.pos_fallback = {}", opt(&p.pos_fallback)),
            format!("filter.dedup_overlap_threshold = {}", f.dedup_overlap_threshold),
            format!("filter.ud_min_vote_margin = {}", f.ud_min_vote_margin),
            format!("filter.ud_cross_dict_overlap = {}", f.ud_cross_dict_overlap),
            format!("filter.drop_acronyms = {}", f.drop_acronyms),
            format!("filter.drop_informal_conventional = {}", f.drop_informal_conventional),
            format!("filter.tag_set = {}", f.tag_set),
            format!("train.margin = {}", t.margin),
            format!("train.learning_rate = {}", t.learning_rate),
            format!("train.max_epochs = {}", t.max_epochs),
            format!("train.hidden = {}", t.hidden),
            format!("train.seed = {}", t.seed),
            format!("train.adam = {} {} {}", t.beta1, t.beta2, t.epsilon),
            format!("train.neighborhood_sampling = {}", t.use_neighborhood_sampling),
            format!("train.max_negative_attempts = {}", t.max_negative_attempts),
            format!("model.neighborhood_k = {}", self.neighborhood_k),
            format!("model.query_epsilon = {}", self.query_epsilon),
            format!("model.models = {}", models.join(", ")),
            format!("eval.top_k = {}", self.top_k),
            format!("eval.synonymy_bins = {:?}", self.synonymy_bins),
            format!("eval.historical = {} {}", self.historical_start, self.historical_end),
            format!(
                "synthetic = {} {} {} {} {} {} {} {} {} [{}] {} {}",
                s.words,
                s.conventional_senses,
                s.slang_senses,
                s.dim,
                s.rotated_dims,
                s.angle,
                s.noise,
                s.tokens_per_definition,
                s.pos_shift,
                decades.join(","),
                s.lm_distractors,
                s.seed
            ),
        ]
        .join("\n")
    }

    /// SHA-256 of the effective settings, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Comment lines that open every artifact.
    pub fn provenance(&self, command: &str) -> String {
        format!(
            "# slangchoice {}\n# command {command}\n# config sha256:{}\n# seed {}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            self.seed
        )
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.paths.output.join(name)
    }
}

/// Returns `path` or a config error naming `field`.
pub fn require_path<'a>(path: &'a Option<PathBuf>, field: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::config(field, "path not set"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let text = "seed = 3\n[paths]\nslang = s.jsonl\noutput = o\n[train]\nhidden = 32\n[model]\nprior = ssp\nmodels = prior, cse:1nn@lcp\n[eval]\nsynonymy_bins = 0, 2, 4\n[synthetic]\ndecades = 1950, 1960\n";
        let cfg = ExperimentConfig::parse_str(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.train.seed, 3);
        assert_eq!(cfg.train.hidden, 32);
        assert_eq!(cfg.train.margin, 0.1);
        assert_eq!(cfg.paths.slang, Some(PathBuf::from("/base/s.jsonl")));
        assert_eq!(cfg.paths.output, PathBuf::from("/base/o"));
        let names: Vec<String> = cfg.models.iter().map(ToString::to_string).collect();
        assert_eq!(names, vec!["prior@ssp", "cse:1nn@lcp"]);
        assert_eq!(cfg.synonymy_bins.len(), 3);
        assert_eq!(cfg.synthetic.decades, vec![1950, 1960]);
        assert_eq!(cfg.synthetic.seed, 3);
    }

    #[test]
    fn errors_name_the_field() {
        let err = |text: &str| match ExperimentConfig::parse_str(text, Path::new(".")) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(err("[paths]\nslang = x\n"), "seed");
        assert_eq!(err("seed = x\n"), "seed");
        assert_eq!(err("seed = 1\n[train]\nmargin = -1\n"), "margin");
        assert_eq!(err("seed = 1\n[train]\nhiden = 3\n"), "train.hiden");
        assert_eq!(err("seed = 1\n[model]\nmodels = knn\n"), "likelihood");
        assert_eq!(err("seed = 1\n[extra]\na = 1\n"), "extra");
    }

    #[test]
    fn hash_tracks_effective_settings() {
        let a = ExperimentConfig::parse_str("seed = 1\n", Path::new(".")).unwrap();
        let b = ExperimentConfig::parse_str("seed=1\n[train]\nmargin = 0.10\n", Path::new(".")).unwrap();
        let c = ExperimentConfig::parse_str("seed = 2\n", Path::new(".")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
        assert!(a.provenance("train").starts_with("# slangchoice "));
        assert_eq!(ExperimentConfig::with_seed(1).hash(), a.hash());
    }
}
