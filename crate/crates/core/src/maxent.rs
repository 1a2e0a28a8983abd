//! Maximum-entropy (multinomial log-linear) BIO chunker.
//!
//! Each token is classified on its own from binary context predicates, one of
//! which is the label assigned to the previous token. Decoding is greedy left
//! to right. Weights are indexed by (predicate, label) and trained by
//! full-batch gradient ascent on the L2-penalized conditional log-likelihood.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Bio, Corpus, Sentence};
use crate::error::{Error, Result};

pub const BOS: &str = "⟨BOS⟩";
pub const EOS: &str = "⟨EOS⟩";

const FORMAT_HEADER: &str = "jntag-maxent";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    Bias,
    Word,
    LowerWord,
    Pos,
    PrevWord,
    NextWord,
    PrevPos2,
    PrevPos,
    NextPos,
    NextPos2,
    PosBigram,
    PrevLabel,
    PrevLabelPos,
    Shape,
}

impl Template {
    pub const ALL: [Template; 14] = [
        Template::Bias,
        Template::Word,
        Template::LowerWord,
        Template::Pos,
        Template::PrevWord,
        Template::NextWord,
        Template::PrevPos2,
        Template::PrevPos,
        Template::NextPos,
        Template::NextPos2,
        Template::PosBigram,
        Template::PrevLabel,
        Template::PrevLabelPos,
        Template::Shape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Bias => "bias",
            Template::Word => "w0",
            Template::LowerWord => "lw0",
            Template::Pos => "p0",
            Template::PrevWord => "w-1",
            Template::NextWord => "w+1",
            Template::PrevPos2 => "p-2",
            Template::PrevPos => "p-1",
            Template::NextPos => "p+1",
            Template::NextPos2 => "p+2",
            Template::PosBigram => "p-1p0",
            Template::PrevLabel => "y-1",
            Template::PrevLabelPos => "y-1p0",
            Template::Shape => "shape",
        }
    }

    /// Whether the predicate reads any POS tag.
    pub fn uses_pos(self) -> bool {
        matches!(
            self,
            Template::Pos
                | Template::PrevPos2
                | Template::PrevPos
                | Template::NextPos
                | Template::NextPos2
                | Template::PosBigram
                | Template::PrevLabelPos
        )
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature template `{s}`")))
    }
}

/// Resolves a template set: `default` or a comma-separated list of names.
pub fn parse_template_set(s: &str) -> Result<Vec<Template>> {
    if s.trim() == "default" {
        return Ok(Template::ALL.to_vec());
    }
    let templates = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Template::from_str)
        .collect::<Result<Vec<_>>>()?;
    if templates.is_empty() {
        return Err(Error::Config("empty feature template set".into()));
    }
    Ok(templates)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntConfig {
    pub l2_lambda: f64,
    pub max_iterations: usize,
    /// Relative objective change below which training may stop; the
    /// gradient max-norm must also be within ten times this value.
    pub convergence_tol: f64,
    pub templates: Vec<Template>,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        MaxEntConfig {
            l2_lambda: 0.1,
            max_iterations: 200,
            convergence_tol: 1e-6,
            templates: Template::ALL.to_vec(),
        }
    }
}

impl MaxEntConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return Err(Error::Config("maxent.l2_lambda must be finite and >= 0".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("maxent.max_iterations must be >= 1".into()));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::Config("maxent.convergence_tol must be > 0".into()));
        }
        if self.templates.is_empty() {
            return Err(Error::Config("maxent.templates must not be empty".into()));
        }
        Ok(())
    }
}

/// Capitalization/digit pattern with repeats collapsed, e.g. `Xx.` for "Mr.".
pub fn word_shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in word.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            c
        };
        if last != Some(class) {
            out.push(class);
            last = Some(class);
        }
    }
    out
}

/// Context predicates for one token, as readable strings.
pub fn feature_strings(
    sentence: &Sentence,
    position: usize,
    prev_label: &str,
    templates: &[Template],
) -> Vec<String> {
    let toks = &sentence.tokens;
    let pos_at = |offset: isize| -> &str {
        let i = position as isize + offset;
        if i < 0 {
            BOS
        } else {
            toks.get(i as usize).map(|t| t.pos.as_str()).unwrap_or(EOS)
        }
    };
    let word_at = |offset: isize| -> &str {
        let i = position as isize + offset;
        if i < 0 {
            BOS
        } else {
            toks.get(i as usize).map(|t| t.word.as_str()).unwrap_or(EOS)
        }
    };
    let word = toks[position].word.as_str();
    templates
        .iter()
        .map(|t| {
            let value = match t {
                Template::Bias => String::new(),
                Template::Word => word.to_string(),
                Template::LowerWord => word.to_lowercase(),
                Template::Pos => pos_at(0).to_string(),
                Template::PrevWord => word_at(-1).to_string(),
                Template::NextWord => word_at(1).to_string(),
                Template::PrevPos2 => pos_at(-2).to_string(),
                Template::PrevPos => pos_at(-1).to_string(),
                Template::NextPos => pos_at(1).to_string(),
                Template::NextPos2 => pos_at(2).to_string(),
                Template::PosBigram => format!("{}|{}", pos_at(-1), pos_at(0)),
                Template::PrevLabel => prev_label.to_string(),
                Template::PrevLabelPos => format!("{}|{}", prev_label, pos_at(0)),
                Template::Shape => word_shape(word),
            };
            format!("{}={}", t.name(), value)
        })
        .collect()
}

/// Predicate string <-> id mapping, frozen after training.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureIndex {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl FeatureIndex {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    fn intern(&mut self, name: String) -> u32 {
        if let Some(&id) = self.ids.get(&name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(name.clone(), id);
        self.names.push(name);
        id
    }
}

/// Sorted, de-duplicated active predicate ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureVector {
    pub ids: Vec<u32>,
}

impl FeatureVector {
    fn from_ids(mut ids: Vec<u32>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        FeatureVector { ids }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: FeatureVector,
    pub label: usize,
}

/// Feature-extracted training set.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingData {
    pub examples: Vec<Example>,
    pub num_features: usize,
    pub num_labels: usize,
}

impl TrainingData {
    pub fn num_weights(&self) -> usize {
        self.num_features * self.num_labels
    }
}

fn label_scores(weights: &[f64], features: &[u32], num_labels: usize, out: &mut [f64]) {
    out.fill(0.0);
    for &f in features {
        let row = &weights[f as usize * num_labels..(f as usize + 1) * num_labels];
        for (o, w) in out.iter_mut().zip(row) {
            *o += w;
        }
    }
}

/// In-place softmax; returns log of the normalizer.
fn softmax(scores: &mut [f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
    max + sum.ln()
}

/// Examples per parallel block. Fixed so results do not depend on the
/// number of threads.
const BLOCK: usize = 2048;

fn block_size(n: usize) -> usize {
    BLOCK.max(n.div_ceil(16))
}

/// Regularized conditional log-likelihood `sum log P(y|x) - lambda * |w|^2`.
pub fn objective(weights: &[f64], data: &TrainingData, l2_lambda: f64) -> f64 {
    let l = data.num_labels;
    let partials: Vec<f64> = data
        .examples
        .par_chunks(block_size(data.examples.len()))
        .map(|block| {
            let mut scores = vec![0.0; l];
            let mut acc = 0.0;
            for ex in block {
                label_scores(weights, &ex.features.ids, l, &mut scores);
                let gold = scores[ex.label];
                let log_z = softmax(&mut scores);
                acc += gold - log_z;
            }
            acc
        })
        .collect();
    let loglik: f64 = partials.iter().sum();
    let norm: f64 = weights.iter().map(|w| w * w).sum();
    loglik - l2_lambda * norm
}

/// Objective value and its gradient: observed minus expected predicate
/// counts, minus `2 * lambda * w`.
pub fn objective_and_gradient(weights: &[f64], data: &TrainingData, l2_lambda: f64) -> (f64, Vec<f64>) {
    let l = data.num_labels;
    let dim = data.num_weights();
    let partials: Vec<(f64, Vec<f64>)> = data
        .examples
        .par_chunks(block_size(data.examples.len()))
        .map(|block| {
            let mut grad = vec![0.0; dim];
            let mut scores = vec![0.0; l];
            let mut acc = 0.0;
            for ex in block {
                label_scores(weights, &ex.features.ids, l, &mut scores);
                let gold = scores[ex.label];
                let log_z = softmax(&mut scores);
                acc += gold - log_z;
                for &f in &ex.features.ids {
                    let row = &mut grad[f as usize * l..(f as usize + 1) * l];
                    for (y, g) in row.iter_mut().enumerate() {
                        *g -= scores[y];
                    }
                    row[ex.label] += 1.0;
                }
            }
            (acc, grad)
        })
        .collect();
    let mut loglik = 0.0;
    let mut grad = vec![0.0; dim];
    for (acc, g) in partials {
        loglik += acc;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    let mut norm = 0.0;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g -= 2.0 * l2_lambda * w;
        norm += w * w;
    }
    (loglik - l2_lambda * norm, grad)
}

/// Record of an optimization run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingTrace {
    /// Objective at the start and after every accepted step.
    pub objectives: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_gradient_max: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Full-batch gradient ascent with Armijo backtracking. The trial step
/// doubles after every accepted step and halves on every rejection.
pub fn optimize(data: &TrainingData, config: &MaxEntConfig) -> (Vec<f64>, TrainingTrace) {
    let lambda = config.l2_lambda;
    let mut weights = vec![0.0; data.num_weights()];
    let (mut value, mut grad) = objective_and_gradient(&weights, data, lambda);
    let mut trace = TrainingTrace {
        objectives: vec![value],
        ..TrainingTrace::default()
    };
    let mut step = 1.0;
    let mut trial = vec![0.0; weights.len()];
    while trace.iterations < config.max_iterations {
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        if grad_sq == 0.0 {
            trace.converged = true;
            break;
        }
        let mut accepted = None;
        while step > 1e-30 {
            for ((t, w), g) in trial.iter_mut().zip(&weights).zip(&grad) {
                *t = w + step * g;
            }
            let candidate = objective(&trial, data, lambda);
            if candidate >= value + 1e-4 * step * grad_sq {
                accepted = Some(candidate);
                break;
            }
            step *= 0.5;
        }
        let Some(_) = accepted else {
            break;
        };
        trace.iterations += 1;
        std::mem::swap(&mut weights, &mut trial);
        let previous = value;
        (value, grad) = objective_and_gradient(&weights, data, lambda);
        trace.objectives.push(value);
        let relative = (value - previous).abs() / previous.abs().max(1.0);
        if relative < config.convergence_tol && max_abs(&grad) <= 10.0 * config.convergence_tol {
            trace.converged = true;
            break;
        }
        step *= 2.0;
    }
    trace.final_gradient_max = max_abs(&grad);
    (weights, trace)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntModel {
    labels: Vec<String>,
    templates: Vec<Template>,
    features: FeatureIndex,
    /// `features.len() x labels.len()`, row-major by predicate.
    weights: Vec<f64>,
}

/// Builds the feature index and examples from gold-labeled sentences. The
/// previous-label predicate uses the gold label.
pub fn build_training_data(train: &Corpus, templates: &[Template]) -> Result<(TrainingData, FeatureIndex, Vec<String>)> {
    if train.token_count() == 0 {
        return Err(Error::Training("cannot train a chunker on an empty corpus".into()));
    }
    let mut labels: Vec<String> = train.tokens().map(|t| t.bio.clone()).collect();
    labels.sort();
    labels.dedup();
    let label_id: HashMap<&str, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut index = FeatureIndex::default();
    let mut examples = Vec::with_capacity(train.token_count());
    for s in &train.sentences {
        let mut prev = BOS;
        for (i, t) in s.tokens.iter().enumerate() {
            let ids = feature_strings(s, i, prev, templates)
                .into_iter()
                .map(|f| index.intern(f))
                .collect();
            examples.push(Example {
                features: FeatureVector::from_ids(ids),
                label: label_id[t.bio.as_str()],
            });
            prev = &t.bio;
        }
    }
    let data = TrainingData {
        examples,
        num_features: index.len(),
        num_labels: labels.len(),
    };
    Ok((data, index, labels))
}

pub fn train_maxent(train: &Corpus, config: &MaxEntConfig) -> Result<MaxEntModel> {
    train_maxent_with_trace(train, config).map(|(m, _)| m)
}

/// Trains and also returns the optimization trace. `max_iterations = 0`
/// yields all-zero weights.
pub fn train_maxent_with_trace(train: &Corpus, config: &MaxEntConfig) -> Result<(MaxEntModel, TrainingTrace)> {
    if config.templates.is_empty() {
        return Err(Error::Config("maxent.templates must not be empty".into()));
    }
    let (data, features, labels) = build_training_data(train, &config.templates)?;
    let (weights, trace) = optimize(&data, config);
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Training("optimization produced non-finite weights".into()));
    }
    Ok((
        MaxEntModel {
            labels,
            templates: config.templates.clone(),
            features,
            weights,
        },
        trace,
    ))
}

impl MaxEntModel {
    /// Assembles a model from parts; used by hand-built fixtures.
    pub fn from_parts(labels: Vec<String>, templates: Vec<Template>, feature_names: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let mut features = FeatureIndex::default();
        for name in feature_names {
            features.intern(name);
        }
        if weights.len() != features.len() * labels.len() {
            return Err(Error::Validation("weight vector does not match features x labels".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Validation("non-finite weight".into()));
        }
        Ok(MaxEntModel {
            labels,
            templates,
            features,
            weights,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn feature_index(&self) -> &FeatureIndex {
        &self.features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, feature: &str, label: &str) -> Option<f64> {
        let f = self.features.get(feature)? as usize;
        let y = self.labels.iter().position(|l| l == label)?;
        Some(self.weights[f * self.labels.len() + y])
    }

    /// Active known predicates; unseen predicates are dropped.
    pub fn extract_features(&self, sentence: &Sentence, position: usize, prev_label: &str) -> FeatureVector {
        let ids = feature_strings(sentence, position, prev_label, &self.templates)
            .iter()
            .filter_map(|f| self.features.get(f))
            .collect();
        FeatureVector::from_ids(ids)
    }

    pub fn label_probabilities(&self, sentence: &Sentence, position: usize, prev_label: &str) -> Vec<f64> {
        let fv = self.extract_features(sentence, position, prev_label);
        let mut scores = vec![0.0; self.labels.len()];
        label_scores(&self.weights, &fv.ids, self.labels.len(), &mut scores);
        softmax(&mut scores);
        scores
    }
}

/// Rewrites `I-X` that does not continue an `X` chunk as `B-X`.
pub fn repair_iob2(labels: &mut [String]) {
    let mut prev: Option<String> = None;
    for label in labels.iter_mut() {
        if let Some(Bio::Inside(ty)) = Bio::parse(label) {
            if prev.as_deref() != Some(ty) {
                *label = format!("B-{ty}");
            }
        }
        prev = Bio::parse(label).and_then(Bio::chunk_type).map(String::from);
    }
}

/// Greedy left-to-right BIO decoding, followed by [`repair_iob2`].
pub fn predict_bio(model: &MaxEntModel, sentence: &Sentence) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(sentence.len());
    for i in 0..sentence.len() {
        let prev = out.last().map(String::as_str).unwrap_or(BOS);
        let probs = model.label_probabilities(sentence, i, prev);
        let mut best = 0;
        for (y, p) in probs.iter().enumerate().skip(1) {
            if *p > probs[best] {
                best = y;
            }
        }
        out.push(model.labels[best].clone());
    }
    repair_iob2(&mut out);
    out
}

/// Replaces the BIO column of every sentence with predictions (IOB2).
pub fn chunk_corpus(model: &MaxEntModel, corpus: &Corpus) -> Corpus {
    let sentences = corpus
        .sentences
        .par_iter()
        .map(|s| {
            let labels = predict_bio(model, s);
            let mut out = s.clone();
            for (t, l) in out.tokens.iter_mut().zip(labels) {
                t.bio = l;
            }
            out
        })
        .collect();
    Corpus {
        sentences,
        scheme: crate::corpus::Scheme::Iob2,
    }
}

pub fn save_maxent(model: &MaxEntModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER} {FORMAT_VERSION}");
    out.push_str("[LABELS]\n");
    for l in &model.labels {
        let _ = writeln!(out, "{l}");
    }
    out.push_str("[TEMPLATES]\n");
    for t in &model.templates {
        let _ = writeln!(out, "{t}");
    }
    out.push_str("[FEATURES]\n");
    for (id, name) in model.features.names.iter().enumerate() {
        let _ = writeln!(out, "{id}\t{name}");
    }
    out.push_str("[WEIGHTS]\n");
    let l = model.labels.len();
    for (i, w) in model.weights.iter().enumerate() {
        if *w != 0.0 {
            let _ = writeln!(out, "{}\t{}\t{w:.16e}", i / l, i % l);
        }
    }
    out.push_str("[END]\n");
    out
}

pub fn load_maxent(text: &str) -> Result<MaxEntModel> {
    let err = |line: usize, msg: String| Error::ModelLoad(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::ModelLoad("empty model file".into()))?;
    let version = header
        .strip_prefix(FORMAT_HEADER)
        .map(str::trim)
        .ok_or_else(|| Error::ModelLoad("not a MaxEnt model file".into()))?;
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::ModelLoad(format!(
            "model format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let mut section = "";
    let mut labels = Vec::new();
    let mut templates = Vec::new();
    let mut names = Vec::new();
    let mut entries = Vec::new();
    let mut ended = false;
    for (lineno, line) in lines {
        if ended {
            if line.trim().is_empty() {
                continue;
            }
            return Err(err(lineno, "content after [END]".into()));
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line;
            ended = line == "[END]";
            continue;
        }
        match section {
            "[LABELS]" => labels.push(line.to_string()),
            "[TEMPLATES]" => templates.push(line.parse::<Template>().map_err(|e| err(lineno, e.to_string()))?),
            "[FEATURES]" => {
                let (id, name) = line
                    .split_once('\t')
                    .ok_or_else(|| err(lineno, "expected `id<TAB>feature`".into()))?;
                if id.parse::<usize>().ok() != Some(names.len()) {
                    return Err(err(lineno, format!("feature id {id} out of sequence")));
                }
                names.push(name.to_string());
            }
            "[WEIGHTS]" => {
                let f: Vec<&str> = line.split('\t').collect();
                let parsed = (f.len() == 3)
                    .then(|| Some((f[0].parse::<usize>().ok()?, f[1].parse::<usize>().ok()?, f[2].parse::<f64>().ok()?)))
                    .flatten();
                let (fid, y, w) = parsed.ok_or_else(|| err(lineno, "malformed weight line".into()))?;
                entries.push((lineno, fid, y, w));
            }
            other => return Err(err(lineno, format!("unexpected line in section `{other}`"))),
        }
    }
    if !ended {
        return Err(Error::ModelLoad("truncated model file (missing [END])".into()));
    }
    if labels.is_empty() || templates.is_empty() {
        return Err(Error::ModelLoad("model has no labels or templates".into()));
    }
    let l = labels.len();
    let mut weights = vec![0.0; names.len() * l];
    for (lineno, fid, y, w) in entries {
        if fid >= names.len() || y >= l || !w.is_finite() {
            return Err(err(lineno, "weight refers to an unknown feature or label".into()));
        }
        weights[fid * l + y] = w;
    }
    MaxEntModel::from_parts(labels, templates, names, weights).map_err(|e| Error::ModelLoad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_pos_chunk, Scheme, Token};

    fn sentence(tokens: &[(&str, &str, &str)]) -> Sentence {
        Sentence::new(tokens.iter().map(|(w, p, b)| Token::new(*w, *p, *b)).collect())
    }

    #[test]
    fn boundary_placeholders() {
        let s = sentence(&[("Hi", "UH", "O")]);
        let f = feature_strings(&s, 0, BOS, &Template::ALL);
        for expected in ["w-1=⟨BOS⟩", "w+1=⟨EOS⟩", "p-2=⟨BOS⟩", "p+2=⟨EOS⟩", "y-1=⟨BOS⟩", "shape=Xx", "p-1p0=⟨BOS⟩|UH"] {
            assert!(f.iter().any(|x| x == expected), "missing {expected} in {f:?}");
        }
        assert_eq!(f, feature_strings(&s, 0, BOS, &Template::ALL));
    }

    #[test]
    fn pos_change_touches_only_pos_features() {
        let a = sentence(&[("the", "DT", "B-NP"), ("poor", "JJ", "I-NP"), ("wait", "VBP", "B-VP")]);
        let mut b = a.clone();
        b.tokens[1].pos = "JN".into();
        let fa = feature_strings(&a, 1, "B-NP", &Template::ALL);
        let fb = feature_strings(&b, 1, "B-NP", &Template::ALL);
        for (t, (x, y)) in Template::ALL.iter().zip(fa.iter().zip(&fb)) {
            let reads_current_pos = matches!(t, Template::Pos | Template::PosBigram | Template::PrevLabelPos);
            assert_eq!(x != y, reads_current_pos, "template {t}: {x} vs {y}");
        }
        // At a neighbouring position only the windowed POS predicates move.
        let fa = feature_strings(&a, 2, "B-NP", &Template::ALL);
        let fb = feature_strings(&b, 2, "B-NP", &Template::ALL);
        for (t, (x, y)) in Template::ALL.iter().zip(fa.iter().zip(&fb)) {
            assert_eq!(x != y, matches!(t, Template::PrevPos | Template::PosBigram), "template {t}");
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(word_shape("Mr."), "Xx.");
        assert_eq!(word_shape("1,000"), "d,d");
        assert_eq!(word_shape("iPhone"), "xXx");
    }

    #[test]
    fn template_sets() {
        assert_eq!(parse_template_set("default").unwrap().len(), 14);
        assert_eq!(parse_template_set("w0, p0").unwrap(), vec![Template::Word, Template::Pos]);
        assert!(parse_template_set("w0,zz").is_err());
    }

    fn toy_data() -> TrainingData {
        TrainingData {
            examples: vec![
                Example { features: FeatureVector::from_ids(vec![0, 1]), label: 0 },
                Example { features: FeatureVector::from_ids(vec![1, 2]), label: 1 },
                Example { features: FeatureVector::from_ids(vec![0]), label: 2 },
            ],
            num_features: 3,
            num_labels: 3,
        }
    }

    #[test]
    fn objective_at_zero_is_n_log_one_over_k() {
        let data = toy_data();
        let w = vec![0.0; data.num_weights()];
        let expected = 3.0 * (1.0f64 / 3.0).ln();
        assert!((objective(&w, &data, 0.5) - expected).abs() < 1e-12);
        assert!((objective_and_gradient(&w, &data, 0.5).0 - expected).abs() < 1e-12);
    }

    #[test]
    fn single_feature_gradient() {
        let data = TrainingData {
            examples: vec![Example { features: FeatureVector::from_ids(vec![0]), label: 1 }],
            num_features: 1,
            num_labels: 2,
        };
        let w = vec![0.3, -0.2];
        let (_, g) = objective_and_gradient(&w, &data, 0.0);
        let z = 0.3f64.exp() + (-0.2f64).exp();
        let p_gold = (-0.2f64).exp() / z;
        assert!((g[1] - (1.0 - p_gold)).abs() < 1e-12);
        assert!((g[0] + (1.0 - p_gold)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = toy_data();
        let w: Vec<f64> = (0..data.num_weights()).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let (_, g) = objective_and_gradient(&w, &data, 0.1);
        let h = 1e-5;
        for i in 0..w.len() {
            let mut up = w.clone();
            up[i] += h;
            let mut down = w.clone();
            down[i] -= h;
            let fd = (objective(&up, &data, 0.1) - objective(&down, &data, 0.1)) / (2.0 * h);
            assert!((fd - g[i]).abs() / g[i].abs().max(fd.abs()).max(1e-6) < 1e-4);
        }
    }

    #[test]
    fn zero_iterations_gives_uniform_model() {
        let c = parse_pos_chunk("the\tDT\tB-NP\ncat\tNN\tI-NP\nran\tVBD\tB-VP\n\n", None).unwrap();
        let cfg = MaxEntConfig { max_iterations: 0, ..MaxEntConfig::default() };
        let (m, trace) = train_maxent_with_trace(&c, &cfg).unwrap();
        assert!(m.weights().iter().all(|w| *w == 0.0));
        assert_eq!(trace.iterations, 0);
        let p = m.label_probabilities(&c.sentences[0], 1, "B-NP");
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn empty_corpus_is_training_error() {
        assert!(matches!(
            train_maxent(&Corpus::empty(Scheme::Iob2), &MaxEntConfig::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn hand_built_weights_tag_determiner_as_begin() {
        let labels = vec!["B-NP".to_string(), "I-NP".to_string(), "O".to_string()];
        let names = vec!["y-1p0=O|DT".to_string(), "bias=".to_string()];
        // Predicate 0 strongly favours B-NP; the bias slightly favours O.
        let weights = vec![5.0, 0.0, 0.0, 0.0, 0.0, 0.5];
        let m = MaxEntModel::from_parts(labels, vec![Template::Bias, Template::PrevLabelPos], names, weights).unwrap();
        let s = sentence(&[("ran", "VBD", "O"), ("the", "DT", "B-NP")]);
        assert_eq!(predict_bio(&m, &s), vec!["O", "B-NP"]);
        let single = sentence(&[("the", "DT", "B-NP")]);
        // Single token: only the bias fires given ⟨BOS⟩.
        assert_eq!(predict_bio(&m, &single), vec!["O"]);
    }

    #[test]
    fn repair_rules() {
        let mut raw = vec!["O".to_string(), "I-NP".to_string()];
        repair_iob2(&mut raw);
        assert_eq!(raw, vec!["O", "B-NP"]);
        let mut raw: Vec<String> = ["I-NP", "I-NP", "I-VP", "B-PP", "I-PP"].iter().map(|s| s.to_string()).collect();
        repair_iob2(&mut raw);
        assert_eq!(raw, vec!["B-NP", "I-NP", "B-VP", "B-PP", "I-PP"]);
    }

    const TRAIN: &str = "The\tDT\tB-NP\npoor\tJJ\tI-NP\nare\tVBP\tB-VP\nhoused\tVBN\tI-VP\n.\t.\tO\n\n\
                         A\tDT\tB-NP\nrich\tJJ\tI-NP\nman\tNN\tI-NP\nleft\tVBD\tB-VP\n.\t.\tO\n\n";

    #[test]
    fn probabilities_sum_to_one_and_round_trip() {
        let c = parse_pos_chunk(TRAIN, None).unwrap();
        let m = train_maxent(&c, &MaxEntConfig { max_iterations: 30, ..Default::default() }).unwrap();
        for s in &c.sentences {
            for i in 0..s.len() {
                for prev in m.labels().iter().map(String::as_str).chain([BOS]) {
                    let p = m.label_probabilities(s, i, prev);
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
        }
        let text = save_maxent(&m);
        let loaded = load_maxent(&text).unwrap();
        assert_eq!(loaded, m);
        assert_eq!(chunk_corpus(&loaded, &c), chunk_corpus(&m, &c));
        assert!(load_maxent(&text[..text.len() / 2]).is_err());
        assert!(load_maxent(&text.replacen("jntag-maxent 1", "jntag-maxent 9", 1)).is_err());
    }
}
