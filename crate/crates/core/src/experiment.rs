//! Config files, the single-step commands and the baseline-vs-modified
//! experiment.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::corpus::{
    normalize_bio, read_pos_chunk_file, split_indices, write_pos_chunk, write_pos_chunk_file, Corpus,
    Scheme,
};
use crate::error::{Error, Result};
use crate::eval::{compare_runs, evaluate, Column, DeltaReport, EvalReport};
use crate::hmm::{load_hmm, save_hmm, tag_corpus, train_hmm, HmmConfig, HmmModel};
use crate::maxent::{
    chunk_corpus, load_maxent, parse_template_set, save_maxent, train_maxent_with_trace, MaxEntConfig,
    MaxEntModel,
};
use crate::profile::{profile_report, ProfileConfig, ProfileReport, TargetSets};
use crate::screen::{
    apply_jj2nn_relabel, apply_jn_relabel, apply_review, default_jj2nn_mapping, read_candidates,
    screen_candidates, screening_stats, write_candidates, CandidateRef, ReviewList, ScreenConfig,
    TagHistogram,
};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    PosHmm,
    BioMaxent,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::PosHmm => "pos_hmm",
            Task::BioMaxent => "bio_maxent",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos_hmm" => Ok(Task::PosHmm),
            "bio_maxent" => Ok(Task::BioMaxent),
            _ => Err(Error::Config(format!("unknown task `{s}` (expected pos_hmm or bio_maxent)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transform {
    Jn,
    Jj2nn,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::Jn => "jn",
            Transform::Jj2nn => "jj2nn",
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jn" => Ok(Transform::Jn),
            "jj2nn" => Ok(Transform::Jj2nn),
            _ => Err(Error::Config(format!("unknown transform `{s}` (expected jn or jj2nn)"))),
        }
    }
}

/// Applies a relabel transform to the screened candidates.
pub fn relabel(
    corpus: &Corpus,
    candidates: &[CandidateRef],
    transform: Transform,
    mapping: &BTreeMap<String, String>,
) -> Result<Corpus> {
    match transform {
        Transform::Jn => apply_jn_relabel(corpus, candidates),
        Transform::Jj2nn => apply_jj2nn_relabel(corpus, candidates, mapping),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub input: Option<PathBuf>,
    /// Overrides scheme detection on the input.
    pub scheme: Option<Scheme>,
    pub seed: u64,
    pub train_fraction: f64,
    /// Share of the training part held out as a development set. The
    /// development set is recorded but not used for training decisions.
    pub dev_fraction: f64,
    pub review: Option<PathBuf>,
    pub tasks: BTreeSet<Task>,
    pub transform: Transform,
    pub jj2nn_mapping: BTreeMap<String, String>,
    pub output_dir: Option<PathBuf>,
    pub screen: ScreenConfig,
    pub hmm: HmmConfig,
    pub maxent: MaxEntConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            input: None,
            scheme: None,
            seed: 1,
            train_fraction: 0.9,
            dev_fraction: 0.0,
            review: None,
            tasks: [Task::PosHmm, Task::BioMaxent].into_iter().collect(),
            transform: Transform::Jn,
            jj2nn_mapping: default_jj2nn_mapping(),
            output_dir: None,
            screen: ScreenConfig::default(),
            hmm: HmmConfig::default(),
            maxent: MaxEntConfig::default(),
        }
    }
}

fn tag_list(v: &str) -> BTreeSet<String> {
    v.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}

fn join(tags: &BTreeSet<String>) -> String {
    tags.iter().cloned().collect::<Vec<_>>().join(",")
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got `{v}`"))),
    }
}

impl ExperimentConfig {
    /// Reads `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, strip_config(e))))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_config(e))))
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let opt_path = |v: &str| if v.is_empty() { None } else { Some(PathBuf::from(v)) };
        match key {
            "input" => self.input = opt_path(v),
            "scheme" => self.scheme = if v.is_empty() || v == "auto" { None } else { Some(v.parse()?) },
            "seed" => self.seed = num(key, v)?,
            "train_fraction" => self.train_fraction = num(key, v)?,
            "dev_fraction" => self.dev_fraction = num(key, v)?,
            "review" => self.review = opt_path(v),
            "tasks" => {
                self.tasks = v
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(Task::from_str)
                    .collect::<Result<_>>()?
            }
            "transform" => self.transform = v.parse()?,
            "jj2nn.mapping" => {
                let mut m = BTreeMap::new();
                for pair in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let (a, b) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::Config(format!("{key}: expected FROM:TO, got `{pair}`")))?;
                    m.insert(a.trim().to_string(), b.trim().to_string());
                }
                self.jj2nn_mapping = m;
            }
            "output_dir" => self.output_dir = opt_path(v),
            "screen.adjective_tags" => self.screen.adjective_tags = tag_list(v),
            "screen.include_jjr" => self.screen.include_jjr = boolean(key, v)?,
            "screen.determiner_tags" => self.screen.determiner_tags = tag_list(v),
            "screen.adverb_tags" => self.screen.adverb_tags = tag_list(v),
            "screen.max_adverbs" => self.screen.max_adverbs = num(key, v)?,
            "screen.require_np_final" => self.screen.require_np_final = boolean(key, v)?,
            "screen.forbidden_next_pos" => self.screen.forbidden_next_pos = tag_list(v),
            "hmm.transition_k" => self.hmm.transition_smoothing_k = num(key, v)?,
            "hmm.emission_k" => self.hmm.emission_smoothing_k = num(key, v)?,
            "hmm.unknown_words" => self.hmm.unknown_word_mode = v.parse()?,
            "hmm.suffix_max_len" => self.hmm.suffix_max_len = num(key, v)?,
            "hmm.rare_threshold" => self.hmm.rare_threshold = num(key, v)?,
            "maxent.l2_lambda" => self.maxent.l2_lambda = num(key, v)?,
            "maxent.max_iterations" => self.maxent.max_iterations = num(key, v)?,
            "maxent.convergence_tol" => self.maxent.convergence_tol = num(key, v)?,
            "maxent.templates" => self.maxent.templates = parse_template_set(v)?,
            _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Canonical `key=value` text. `output_dir` is left out so that runs
    /// writing to different directories share a snapshot.
    pub fn snapshot(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mapping: Vec<String> = self.jj2nn_mapping.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        let templates: Vec<&str> = self.maxent.templates.iter().map(|t| t.name()).collect();
        let tasks: Vec<&str> = self.tasks.iter().map(|t| t.as_str()).collect();
        let rows: Vec<(&str, String)> = vec![
            ("input", path(&self.input)),
            ("scheme", self.scheme.map(|s| s.as_str().to_string()).unwrap_or_else(|| "auto".into())),
            ("seed", self.seed.to_string()),
            ("train_fraction", self.train_fraction.to_string()),
            ("dev_fraction", self.dev_fraction.to_string()),
            ("review", path(&self.review)),
            ("tasks", tasks.join(",")),
            ("transform", self.transform.as_str().into()),
            ("jj2nn.mapping", mapping.join(",")),
            ("screen.adjective_tags", join(&self.screen.adjective_tags)),
            ("screen.include_jjr", self.screen.include_jjr.to_string()),
            ("screen.determiner_tags", join(&self.screen.determiner_tags)),
            ("screen.adverb_tags", join(&self.screen.adverb_tags)),
            ("screen.max_adverbs", self.screen.max_adverbs.to_string()),
            ("screen.require_np_final", self.screen.require_np_final.to_string()),
            ("screen.forbidden_next_pos", join(&self.screen.forbidden_next_pos)),
            ("hmm.transition_k", self.hmm.transition_smoothing_k.to_string()),
            ("hmm.emission_k", self.hmm.emission_smoothing_k.to_string()),
            ("hmm.unknown_words", self.hmm.unknown_word_mode.as_str().into()),
            ("hmm.suffix_max_len", self.hmm.suffix_max_len.to_string()),
            ("hmm.rare_threshold", self.hmm.rare_threshold.to_string()),
            ("maxent.l2_lambda", self.maxent.l2_lambda.to_string()),
            ("maxent.max_iterations", self.maxent.max_iterations.to_string()),
            ("maxent.convergence_tol", self.maxent.convergence_tol.to_string()),
            ("maxent.templates", templates.join(",")),
        ];
        rows.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_none() {
            return Err(Error::Config("no input corpus given".into()));
        }
        if self.output_dir.is_none() {
            return Err(Error::Config("no output directory given".into()));
        }
        if self.tasks.is_empty() {
            return Err(Error::Config("tasks must not be empty".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie strictly between 0 and 1".into()));
        }
        if !(0.0..1.0).contains(&self.dev_fraction) {
            return Err(Error::Config("dev_fraction must lie in [0, 1)".into()));
        }
        if self.transform == Transform::Jj2nn {
            for t in self.screen.effective_adjective_tags() {
                if !self.jj2nn_mapping.contains_key(&t) {
                    return Err(Error::Config(format!("jj2nn.mapping has no entry for {t}")));
                }
            }
        }
        self.screen.validate()?;
        self.hmm.validate()?;
        self.maxent.validate()
    }
}

fn strip_config(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Stage-local seed derived from the top-level seed.
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let d = Sha256::digest(format!("{seed}/{stage}").as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// Digest of the BIO column, one tag per line, blank line between sentences.
pub fn bio_column_digest(corpus: &Corpus) -> String {
    let mut h = Sha256::new();
    for s in &corpus.sentences {
        for t in &s.tokens {
            h.update(t.bio.as_bytes());
            h.update(b"\n");
        }
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_review(path: &Path) -> Result<ReviewList> {
    ReviewList::parse(&read_text(path)?).map_err(|e| e.with_file(path))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenOutput {
    pub candidates: Vec<CandidateRef>,
    pub stats: TagHistogram,
}

/// Screens `input`, applies an optional review list and writes
/// `candidates.tsv` and `screening_stats.tsv` to `out_dir`.
pub fn cmd_screen(
    input: &Path,
    scheme: Option<Scheme>,
    config: &ScreenConfig,
    review: Option<&Path>,
    out_dir: &Path,
) -> Result<ScreenOutput> {
    config.validate()?;
    let corpus = read_pos_chunk_file(input, scheme)?;
    let mut candidates = screen_candidates(&corpus, config)?;
    if let Some(r) = review {
        candidates = apply_review(&corpus, config, &candidates, &read_review(r)?)?;
    }
    let stats = screening_stats(&candidates);
    write_file(&out_dir.join("candidates.tsv"), &write_candidates(&corpus, &candidates)?)?;
    write_file(&out_dir.join("screening_stats.tsv"), &stats.to_tsv())?;
    Ok(ScreenOutput { candidates, stats })
}

/// Relabels the candidates listed in a candidate export and writes the corpus
/// in its input scheme.
pub fn cmd_relabel(
    input: &Path,
    scheme: Option<Scheme>,
    candidates: &Path,
    transform: Transform,
    mapping: &BTreeMap<String, String>,
    output: &Path,
) -> Result<Corpus> {
    let corpus = read_pos_chunk_file(input, scheme)?;
    let cands = read_candidates(&read_text(candidates)?, &corpus).map_err(|e| e.with_file(candidates))?;
    let out = relabel(&corpus, &cands, transform, mapping)?;
    write_pos_chunk_file(output, &out)?;
    Ok(out)
}

/// Writes `similarity.tsv` and `distributions.tsv` to `out_dir`.
pub fn cmd_profile(
    input: &Path,
    scheme: Option<Scheme>,
    sets: &TargetSets,
    config: &ProfileConfig,
    out_dir: &Path,
) -> Result<ProfileReport> {
    let corpus = read_pos_chunk_file(input, scheme)?;
    let report = profile_report(&corpus, sets, config)?;
    write_file(&out_dir.join("similarity.tsv"), &report.similarity_tsv())?;
    write_file(&out_dir.join("distributions.tsv"), &report.distributions_tsv())?;
    Ok(report)
}

pub fn cmd_train_hmm(input: &Path, scheme: Option<Scheme>, config: &HmmConfig, model_out: &Path) -> Result<HmmModel> {
    config.validate()?;
    let corpus = read_pos_chunk_file(input, scheme)?;
    let model = train_hmm(&corpus, config)?;
    write_file(model_out, &save_hmm(&model))?;
    Ok(model)
}

/// Tags `input` with a saved HMM, keeping words and BIO tags.
pub fn cmd_tag(model: &Path, input: &Path, scheme: Option<Scheme>, output: &Path) -> Result<Corpus> {
    let m = load_hmm(&read_text(model)?)?;
    let corpus = read_pos_chunk_file(input, scheme)?;
    let out = tag_corpus(&m, &corpus);
    write_pos_chunk_file(output, &out)?;
    Ok(out)
}

/// Trains on the IOB2 form of `input`.
pub fn cmd_train_chunker(
    input: &Path,
    scheme: Option<Scheme>,
    config: &MaxEntConfig,
    model_out: &Path,
) -> Result<MaxEntModel> {
    config.validate()?;
    let corpus = normalize_bio(&read_pos_chunk_file(input, scheme)?, Scheme::Iob2)?;
    let (model, _) = train_maxent_with_trace(&corpus, config)?;
    write_file(model_out, &save_maxent(&model))?;
    Ok(model)
}

/// Chunks `input` with a saved model. Output is IOB2.
pub fn cmd_chunk(model: &Path, input: &Path, scheme: Option<Scheme>, output: &Path) -> Result<Corpus> {
    let m = load_maxent(&read_text(model)?)?;
    let corpus = read_pos_chunk_file(input, scheme)?;
    let out = chunk_corpus(&m, &corpus);
    write_pos_chunk_file(output, &out)?;
    Ok(out)
}

/// Scores `pred` against `gold`. With a candidate export, per-tag scores are
/// also computed over the candidate positions. Writes `report.txt` and
/// `per_tag.tsv` when `out_dir` is given.
pub fn cmd_eval(
    gold: &Path,
    pred: &Path,
    scheme: Option<Scheme>,
    column: Column,
    candidates: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<EvalReport> {
    let g = read_pos_chunk_file(gold, scheme)?;
    let p = read_pos_chunk_file(pred, None)?;
    let positions = match candidates {
        Some(c) => Some(
            read_candidates(&read_text(c)?, &g)
                .map_err(|e| e.with_file(c))?
                .iter()
                .map(CandidateRef::position)
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    let report = evaluate(&g, &p, column, positions.as_deref())?;
    if let Some(dir) = out_dir {
        write_file(&dir.join("report.txt"), &report.to_key_values(""))?;
        write_file(&dir.join("per_tag.tsv"), &report.per_tag_tsv())?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskRun {
    pub baseline: EvalReport,
    pub modified: EvalReport,
    pub delta: DeltaReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub candidates: Vec<CandidateRef>,
    pub runs: BTreeMap<Task, TaskRun>,
    pub bio_digest_baseline: String,
    pub bio_digest_modified: String,
    pub manifest: String,
    /// Seconds per stage, in execution order.
    pub timings: Vec<(String, f64)>,
}

struct Recorder {
    out_dir: PathBuf,
    files: BTreeMap<String, String>,
    timings: Vec<(String, f64)>,
}

impl Recorder {
    fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        write_file(&self.out_dir.join(rel), contents)?;
        self.files.insert(rel.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let r = f(self).map_err(|e| e.in_stage(name));
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        r
    }
}

fn split_digest(corpus: &Corpus, indices: &[usize]) -> String {
    let mut h = Sha256::new();
    for &i in indices {
        h.update(i.to_string().as_bytes());
        h.update(b"\t");
        for t in &corpus.sentences[i].tokens {
            h.update(t.word.as_bytes());
            h.update(b" ");
        }
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Runs screening, relabeling, one shared split, training and evaluation of
/// both arms, and writes every artifact plus `manifest.txt` to the output
/// directory. Wall-clock timings go to `timings.tsv`, outside the manifest.
pub fn cmd_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let input = config.input.clone().expect("validated");
    let out_dir = config.output_dir.clone().expect("validated");
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut rec = Recorder {
        out_dir: out_dir.clone(),
        files: BTreeMap::new(),
        timings: Vec::new(),
    };

    let (raw, input_digest) = rec.stage("read", |_| {
        let bytes = fs::read(&input).map_err(|e| Error::io(&input, e))?;
        let corpus = read_pos_chunk_file(&input, config.scheme)?;
        Ok((corpus, sha256_hex(&bytes)))
    })?;
    let baseline = rec.stage("normalize", |_| normalize_bio(&raw, Scheme::Iob2))?;
    drop(raw);

    let candidates = rec.stage("screen", |rec| {
        let mut c = screen_candidates(&baseline, &config.screen)?;
        if let Some(r) = &config.review {
            c = apply_review(&baseline, &config.screen, &c, &read_review(r)?)?;
        }
        rec.write("candidates.tsv", &write_candidates(&baseline, &c)?)?;
        rec.write("screening_stats.tsv", &screening_stats(&c).to_tsv())?;
        Ok(c)
    })?;

    let modified = rec.stage("relabel", |rec| {
        let m = relabel(&baseline, &candidates, config.transform, &config.jj2nn_mapping)?;
        rec.write("baseline/corpus.txt", &write_pos_chunk(&baseline))?;
        rec.write("modified/corpus.txt", &write_pos_chunk(&m))?;
        Ok(m)
    })?;
    let bio_digest_baseline = bio_column_digest(&baseline);
    let bio_digest_modified = bio_column_digest(&modified);
    if bio_digest_baseline != bio_digest_modified {
        return Err(Error::Internal("relabeling changed the BIO column".into()).in_stage("relabel"));
    }

    let (train_idx, dev_idx, test_idx) = rec.stage("split", |rec| {
        let (train, test) = split_indices(baseline.len(), config.train_fraction, derive_seed(config.seed, "split"))?;
        let (train, dev) = if config.dev_fraction > 0.0 && train.len() > 1 {
            let (keep, held) = split_indices(train.len(), 1.0 - config.dev_fraction, derive_seed(config.seed, "dev"))?;
            (keep.iter().map(|&i| train[i]).collect(), held.iter().map(|&i| train[i]).collect())
        } else {
            (train, Vec::new())
        };
        let mut s = String::new();
        for (role, idx) in [("train", &train), ("dev", &dev), ("test", &test)] {
            for i in idx.iter() {
                let _ = writeln!(s, "{role}\t{i}");
            }
        }
        rec.write("split.tsv", &s)?;
        Ok((train, dev, test))
    })?;

    // Candidate positions re-indexed into the test part.
    let test_pos: HashMap<usize, usize> = test_idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let test_candidates: Vec<(usize, usize)> = candidates
        .iter()
        .filter_map(|c| test_pos.get(&c.sentence_index).map(|&k| (k, c.token_index)))
        .collect();

    let arms = [("baseline", &baseline), ("modified", &modified)];
    let mut runs = BTreeMap::new();
    for &task in &config.tasks {
        let mut reports = Vec::new();
        for (arm, corpus) in arms {
            let train = corpus.subset(&train_idx);
            let test = corpus.subset(&test_idx);
            let stage = format!("{task}:{arm}");
            let report = rec.stage(&stage, |rec| {
                let (pred, column) = match task {
                    Task::PosHmm => {
                        let model = train_hmm(&train, &config.hmm)?;
                        rec.write(&format!("{arm}/{task}.model"), &save_hmm(&model))?;
                        (tag_corpus(&model, &test), Column::Pos)
                    }
                    Task::BioMaxent => {
                        let (model, trace) = train_maxent_with_trace(&train, &config.maxent)?;
                        rec.write(&format!("{arm}/{task}.model"), &save_maxent(&model))?;
                        let mut t = String::from("iteration\tobjective\n");
                        for (i, o) in trace.objectives.iter().enumerate() {
                            let _ = writeln!(t, "{i}\t{o:.12e}");
                        }
                        let _ = writeln!(t, "# converged={} gradient_max={:.6e}", trace.converged, trace.final_gradient_max);
                        rec.write(&format!("{arm}/{task}.trace.tsv"), &t)?;
                        (chunk_corpus(&model, &test), Column::Bio)
                    }
                };
                rec.write(&format!("{arm}/{task}.pred.txt"), &write_pos_chunk(&pred))?;
                let report = evaluate(&test, &pred, column, Some(&test_candidates))?;
                rec.write(&format!("{arm}/{task}.report.txt"), &report.to_key_values(""))?;
                rec.write(&format!("{arm}/{task}.per_tag.tsv"), &report.per_tag_tsv())?;
                Ok(report)
            })?;
            reports.push(report);
        }
        let modified_report = reports.pop().expect("two arms");
        let baseline_report = reports.pop().expect("two arms");
        let delta = rec.stage(&format!("{task}:compare"), |rec| {
            let d = compare_runs(&baseline_report, &modified_report)?;
            rec.write(&format!("{task}.comparison.tsv"), &d.summary_tsv())?;
            rec.write(&format!("{task}.comparison.txt"), &d.summary_text())?;
            rec.write(&format!("{task}.delta.tsv"), &d.rows_tsv())?;
            rec.write(&format!("{task}.delta.txt"), &d.to_key_values(""))?;
            Ok(d)
        })?;
        runs.insert(
            task,
            TaskRun {
                baseline: baseline_report,
                modified: modified_report,
                delta,
            },
        );
    }

    let mut m = String::new();
    let _ = writeln!(m, "jntag-manifest 1");
    let _ = writeln!(m, "toolkit_version={TOOLKIT_VERSION}");
    let _ = writeln!(m, "input_sha256={input_digest}");
    m.push_str("[config]\n");
    m.push_str(&config.snapshot());
    m.push_str("[summary]\n");
    let _ = writeln!(m, "sentences={}", baseline.len());
    let _ = writeln!(m, "tokens={}", baseline.token_count());
    let _ = writeln!(m, "candidates={}", candidates.len());
    let _ = writeln!(m, "test_candidates={}", test_candidates.len());
    let _ = writeln!(m, "split.train={} split.dev={} split.test={}", train_idx.len(), dev_idx.len(), test_idx.len());
    for (arm, corpus) in arms {
        let _ = writeln!(m, "{arm}.split_train_sha256={}", split_digest(corpus, &train_idx));
        let _ = writeln!(m, "{arm}.split_test_sha256={}", split_digest(corpus, &test_idx));
    }
    let _ = writeln!(m, "baseline.bio_sha256={bio_digest_baseline}");
    let _ = writeln!(m, "modified.bio_sha256={bio_digest_modified}");
    for (task, run) in &runs {
        let _ = writeln!(m, "{task}.baseline.accuracy={:.6}", run.baseline.token_accuracy);
        let _ = writeln!(m, "{task}.modified.accuracy={:.6}", run.modified.token_accuracy);
    }
    m.push_str("[outputs]\n");
    for (f, d) in &rec.files {
        let _ = writeln!(m, "{f}\t{d}");
    }
    write_file(&out_dir.join("manifest.txt"), &m)?;

    let mut t = String::from("stage\tseconds\n");
    for (s, secs) in &rec.timings {
        let _ = writeln!(t, "{s}\t{secs:.3}");
    }
    write_file(&out_dir.join("timings.tsv"), &t)?;

    Ok(ExperimentOutcome {
        candidates,
        runs,
        bio_digest_baseline,
        bio_digest_modified,
        manifest: m,
        timings: rec.timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_snapshot() {
        let text = "# comment\nseed=7\ntasks=bio_maxent\nscreen.max_adverbs=2\nhmm.unknown_words=uniform\nmaxent.templates=bias,w0\ntransform=jj2nn\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tasks, [Task::BioMaxent].into_iter().collect());
        assert_eq!(cfg.screen.max_adverbs, 2);
        let again = ExperimentConfig::parse(&cfg.snapshot()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn config_errors_are_config_errors() {
        for bad in ["nokey\n", "bogus=1\n", "seed=x\n", "tasks=pos\n", "scheme=iob3\n", "screen.include_jjr=maybe\n"] {
            let e = ExperimentConfig::parse(bad).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{bad}: {e}");
        }
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_err());
        cfg.input = Some("x".into());
        cfg.output_dir = Some("y".into());
        cfg.validate().unwrap();
        cfg.tasks.clear();
        assert!(cfg.validate().is_err());
        cfg = ExperimentConfig { input: Some("x".into()), output_dir: Some("y".into()), ..Default::default() };
        cfg.train_fraction = 1.0;
        assert!(cfg.validate().is_err());
        cfg.train_fraction = 0.9;
        cfg.transform = Transform::Jj2nn;
        cfg.jj2nn_mapping.remove("JJS");
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ_by_stage() {
        assert_ne!(derive_seed(1, "split"), derive_seed(1, "dev"));
        assert_eq!(derive_seed(1, "split"), derive_seed(1, "split"));
    }
}
