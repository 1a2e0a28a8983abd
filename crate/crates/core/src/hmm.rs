//! Bigram hidden Markov model POS tagger.
//!
//! Transition and emission tables are add-k smoothed relative frequencies,
//! held in log space with `-inf` for impossible events.
//!
//! Emission rows cover the training vocabulary plus an unknown-word mass per
//! tag. That mass is `(r(t) + k) / D(t)` where `r(t)` counts tokens of rare
//! training words (count <= `rare_threshold`) tagged `t`, and
//! `D(t) = c(t) + r(t) + k * (|V| + 1)`; a known word gets `(c(t, w) + k) / D(t)`.
//! In suffix mode the unknown mass is further split over suffix classes
//! learned from the rare words, so an unknown word scores
//! `P(unk | t) * P(suffix class | t, unk)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const START: &str = "⟨START⟩";
pub const STOP: &str = "⟨STOP⟩";
const UNK: &str = "⟨UNK⟩";
const DEFAULT: &str = "⟨DEFAULT⟩";
const NO_SUFFIX: &str = "⟨NONE⟩";

const FORMAT_HEADER: &str = "jntag-hmm";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownWordMode {
    Uniform,
    Suffix,
}

impl UnknownWordMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UnknownWordMode::Uniform => "uniform",
            UnknownWordMode::Suffix => "suffix",
        }
    }
}

impl FromStr for UnknownWordMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(UnknownWordMode::Uniform),
            "suffix" => Ok(UnknownWordMode::Suffix),
            _ => Err(Error::Config(format!("unknown word mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmmConfig {
    pub transition_smoothing_k: f64,
    pub emission_smoothing_k: f64,
    pub unknown_word_mode: UnknownWordMode,
    pub suffix_max_len: usize,
    pub rare_threshold: usize,
}

impl Default for HmmConfig {
    fn default() -> Self {
        HmmConfig {
            transition_smoothing_k: 0.1,
            emission_smoothing_k: 0.001,
            unknown_word_mode: UnknownWordMode::Suffix,
            suffix_max_len: 3,
            rare_threshold: 1,
        }
    }
}

impl HmmConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(self.transition_smoothing_k) || !finite_nonneg(self.emission_smoothing_k) {
            return Err(Error::Config("smoothing constants must be finite and >= 0".into()));
        }
        if self.suffix_max_len < 1 {
            return Err(Error::Config("hmm.suffix_max_len must be >= 1".into()));
        }
        Ok(())
    }
}

/// A decoded tag path and its log-probability.
#[derive(Clone, Debug, PartialEq)]
pub struct TagSequence {
    pub tags: Vec<String>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmmModel {
    tags: Vec<String>,
    tag_index: HashMap<String, usize>,
    /// `(K + 1) x (K + 1)`; row `K` is START, column `K` is STOP.
    transitions: Vec<f64>,
    /// Per tag, log P(w | t) for a vocabulary word never seen with `t`.
    emission_default: Vec<f64>,
    /// Per tag, log of the unknown-word mass.
    unknown_logp: Vec<f64>,
    /// Vocabulary word -> observed (tag, log P(w | t)), ascending by tag.
    emissions: HashMap<String, Vec<(usize, f64)>>,
    unknown_mode: UnknownWordMode,
    suffix_max_len: usize,
    /// Suffix class -> per-tag log P(class | t, unknown). `""` is the
    /// class of words matching no known suffix.
    suffixes: BTreeMap<String, Vec<f64>>,
}

fn ln_ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 || den <= 0.0 {
        f64::NEG_INFINITY
    } else {
        (num / den).ln()
    }
}

fn lowercase_chars(word: &str) -> Vec<char> {
    word.chars().flat_map(char::to_lowercase).collect()
}

/// Trains a model from POS-tagged sentences.
pub fn train_hmm(train: &Corpus, config: &HmmConfig) -> Result<HmmModel> {
    config.validate()?;
    if train.token_count() == 0 {
        return Err(Error::Training("cannot train an HMM on an empty corpus".into()));
    }

    let tags: Vec<String> = train
        .tokens()
        .map(|t| t.pos.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let tag_index: HashMap<String, usize> =
        tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let k_tags = tags.len();
    let n = k_tags + 1;

    let mut trans_counts = vec![0u64; n * n];
    let mut word_tag_counts: BTreeMap<&str, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut tag_counts = vec![0u64; k_tags];
    for s in &train.sentences {
        let mut prev = k_tags;
        for t in &s.tokens {
            let ti = tag_index[&t.pos];
            trans_counts[prev * n + ti] += 1;
            tag_counts[ti] += 1;
            *word_tag_counts
                .entry(t.word.as_str())
                .or_default()
                .entry(ti)
                .or_insert(0) += 1;
            prev = ti;
        }
        trans_counts[prev * n + k_tags] += 1;
    }

    // Transitions: tag rows range over tags + STOP, the START row over tags.
    let kt = config.transition_smoothing_k;
    let mut transitions = vec![f64::NEG_INFINITY; n * n];
    for prev in 0..n {
        let successors = if prev == k_tags { k_tags } else { n };
        let row = &trans_counts[prev * n..prev * n + successors];
        let total = row.iter().sum::<u64>() as f64 + kt * successors as f64;
        for (next, &c) in row.iter().enumerate() {
            transitions[prev * n + next] = ln_ratio(c as f64 + kt, total);
        }
    }

    // Emissions.
    let ke = config.emission_smoothing_k;
    let vocab_size = word_tag_counts.len() as f64;
    let mut rare_counts = vec![0u64; k_tags];
    let mut suffix_counts: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (word, by_tag) in &word_tag_counts {
        if by_tag.values().sum::<u64>() as usize > config.rare_threshold {
            continue;
        }
        let chars = lowercase_chars(word);
        for (&ti, &c) in by_tag {
            rare_counts[ti] += c;
            if config.unknown_word_mode == UnknownWordMode::Suffix {
                for len in 1..=config.suffix_max_len.min(chars.len()) {
                    let suffix: String = chars[chars.len() - len..].iter().collect();
                    suffix_counts.entry(suffix).or_insert_with(|| vec![0; k_tags])[ti] += c;
                }
            }
        }
    }
    let denominators: Vec<f64> = (0..k_tags)
        .map(|t| tag_counts[t] as f64 + rare_counts[t] as f64 + ke * (vocab_size + 1.0))
        .collect();
    let emission_default: Vec<f64> = denominators.iter().map(|&d| ln_ratio(ke, d)).collect();
    let unknown_logp: Vec<f64> = (0..k_tags)
        .map(|t| ln_ratio(rare_counts[t] as f64 + ke, denominators[t]))
        .collect();
    let emissions: HashMap<String, Vec<(usize, f64)>> = word_tag_counts
        .iter()
        .map(|(word, by_tag)| {
            let entries = by_tag
                .iter()
                .map(|(&t, &c)| (t, ln_ratio(c as f64 + ke, denominators[t])))
                .collect();
            (word.to_string(), entries)
        })
        .collect();

    suffix_counts.insert(String::new(), vec![0; k_tags]);
    let classes = suffix_counts.len() as f64;
    let mut class_totals = vec![0u64; k_tags];
    for counts in suffix_counts.values() {
        for (t, &c) in counts.iter().enumerate() {
            class_totals[t] += c;
        }
    }
    let suffixes = suffix_counts
        .into_iter()
        .map(|(class, counts)| {
            let row = (0..k_tags)
                .map(|t| {
                    let den = class_totals[t] as f64 + ke * classes;
                    if den > 0.0 {
                        ln_ratio(counts[t] as f64 + ke, den)
                    } else {
                        -(classes.ln())
                    }
                })
                .collect();
            (class, row)
        })
        .collect();

    Ok(HmmModel {
        tags,
        tag_index,
        transitions,
        emission_default,
        unknown_logp,
        emissions,
        unknown_mode: config.unknown_word_mode,
        suffix_max_len: config.suffix_max_len,
        suffixes,
    })
}

impl HmmModel {
    /// Builds a model from explicit probability tables.
    ///
    /// `transition[p]` and `stop[p]` together form the successor distribution
    /// of tag `p`. `emissions` gives, per vocabulary word, its probability
    /// under each tag; whatever mass a tag leaves unassigned goes to unknown
    /// words. Tie-breaking follows the order of `tags`.
    pub fn from_tables(
        tags: Vec<String>,
        start: Vec<f64>,
        transition: Vec<Vec<f64>>,
        stop: Vec<f64>,
        emissions: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self> {
        let k = tags.len();
        if k == 0 {
            return Err(Error::Validation("empty tagset".into()));
        }
        let shape_ok = start.len() == k
            && stop.len() == k
            && transition.len() == k
            && transition.iter().all(|r| r.len() == k)
            && emissions.values().all(|r| r.len() == k);
        if !shape_ok {
            return Err(Error::Validation("probability tables do not match the tagset".into()));
        }
        let tag_index: HashMap<String, usize> =
            tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if tag_index.len() != k {
            return Err(Error::Validation("duplicate tags".into()));
        }
        let n = k + 1;
        let mut transitions = vec![f64::NEG_INFINITY; n * n];
        for p in 0..k {
            for t in 0..k {
                transitions[p * n + t] = ln_ratio(transition[p][t], 1.0);
            }
            transitions[p * n + k] = ln_ratio(stop[p], 1.0);
        }
        for t in 0..k {
            transitions[k * n + t] = ln_ratio(start[t], 1.0);
        }
        let mut mass = vec![0.0; k];
        let mut table = HashMap::new();
        for (word, probs) in emissions {
            let mut entries = Vec::new();
            for (t, &p) in probs.iter().enumerate() {
                mass[t] += p;
                entries.push((t, ln_ratio(p, 1.0)));
            }
            table.insert(word, entries);
        }
        let unknown_logp = mass.iter().map(|&m| ln_ratio(1.0 - m, 1.0)).collect();
        let model = HmmModel {
            tags,
            tag_index,
            transitions,
            emission_default: vec![f64::NEG_INFINITY; k],
            unknown_logp,
            emissions: table,
            unknown_mode: UnknownWordMode::Uniform,
            suffix_max_len: 1,
            suffixes: BTreeMap::from([(String::new(), vec![0.0; k])]),
        };
        model.check_stochastic(1e-9)?;
        Ok(model)
    }

    /// Real tags in tie-breaking order.
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    /// START, the real tags, then STOP.
    pub fn tagset(&self) -> Vec<String> {
        std::iter::once(START.to_string())
            .chain(self.tags.iter().cloned())
            .chain(std::iter::once(STOP.to_string()))
            .collect()
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn tag_id(&self, tag: &str) -> Option<usize> {
        self.tag_index.get(tag).copied()
    }

    pub fn in_vocabulary(&self, word: &str) -> bool {
        self.emissions.contains_key(word)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.emissions.len()
    }

    fn n(&self) -> usize {
        self.tags.len() + 1
    }

    pub fn start_logp(&self, tag: usize) -> f64 {
        self.transitions[self.tags.len() * self.n() + tag]
    }

    pub fn transition_logp(&self, prev: usize, next: usize) -> f64 {
        self.transitions[prev * self.n() + next]
    }

    pub fn stop_logp(&self, tag: usize) -> f64 {
        self.transitions[tag * self.n() + self.tags.len()]
    }

    /// Log transition probability by tag name, accepting START / STOP.
    pub fn transition_logp_by_name(&self, prev: &str, next: &str) -> Option<f64> {
        let k = self.tags.len();
        let from = if prev == START { Some(k) } else { self.tag_id(prev) }?;
        let to = if next == STOP { Some(k) } else { self.tag_id(next) }?;
        if from == k && to == k {
            return Some(f64::NEG_INFINITY);
        }
        Some(self.transitions[from * self.n() + to])
    }

    fn suffix_class(&self, word: &str) -> &[f64] {
        if self.unknown_mode == UnknownWordMode::Suffix {
            let chars = lowercase_chars(word);
            for len in (1..=self.suffix_max_len.min(chars.len())).rev() {
                let suffix: String = chars[chars.len() - len..].iter().collect();
                if let Some(row) = self.suffixes.get(&suffix) {
                    return row;
                }
            }
        }
        &self.suffixes[""]
    }

    /// Raw log P(word | tag) for every tag, before any fallback.
    pub fn emission_logps_raw(&self, word: &str) -> Vec<f64> {
        match self.emissions.get(word) {
            Some(entries) => {
                let mut out = self.emission_default.clone();
                for &(t, lp) in entries {
                    out[t] = lp;
                }
                out
            }
            None => {
                let class = self.suffix_class(word);
                self.unknown_logp
                    .iter()
                    .zip(class)
                    .map(|(u, c)| u + c)
                    .collect()
            }
        }
    }

    /// Emission scores used in decoding. A word impossible under every tag
    /// falls back to a flat zero row.
    pub fn emission_logps(&self, word: &str) -> Vec<f64> {
        let row = self.emission_logps_raw(word);
        if row.iter().all(|x| *x == f64::NEG_INFINITY) {
            vec![0.0; row.len()]
        } else {
            row
        }
    }

    /// Checks that every transition row and emission row sums to one.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        let k = self.tags.len();
        let n = self.n();
        for prev in 0..n {
            let successors = if prev == k { k } else { n };
            let sum: f64 = (0..successors)
                .map(|t| self.transitions[prev * n + t].exp())
                .sum();
            if (sum - 1.0).abs() > tol {
                let name = if prev == k { START } else { &self.tags[prev] };
                return Err(Error::Validation(format!(
                    "transition row {name} sums to {sum}"
                )));
            }
        }
        for t in 0..k {
            let mut sum = 0.0;
            for entries in self.emissions.values() {
                let lp = entries
                    .iter()
                    .find(|(tag, _)| *tag == t)
                    .map(|(_, lp)| *lp)
                    .unwrap_or(self.emission_default[t]);
                sum += lp.exp();
            }
            let class_mass: f64 = self.suffixes.values().map(|row| row[t].exp()).sum();
            sum += self.unknown_logp[t].exp() * class_mass;
            if (sum - 1.0).abs() > tol {
                return Err(Error::Validation(format!(
                    "emission row {} sums to {sum}",
                    self.tags[t]
                )));
            }
        }
        Ok(())
    }
}

/// Most probable tag path for `words`.
///
/// Among equally scored predecessors the one earliest in the tag order wins;
/// the same rule picks the final tag.
pub fn viterbi_decode(model: &HmmModel, words: &[&str]) -> TagSequence {
    let (path, score) = viterbi_indices(model, words);
    TagSequence {
        tags: path.into_iter().map(|t| model.tags[t].clone()).collect(),
        score,
    }
}

/// [`viterbi_decode`] returning tag ids.
#[allow(clippy::needless_range_loop)]
pub fn viterbi_indices(model: &HmmModel, words: &[&str]) -> (Vec<usize>, f64) {
    let k = model.tags.len();
    if words.is_empty() {
        return (Vec::new(), f64::NEG_INFINITY);
    }
    let mut backptr = vec![0usize; words.len() * k];
    let emit = model.emission_logps(words[0]);
    let mut delta: Vec<f64> = (0..k).map(|t| model.start_logp(t) + emit[t]).collect();
    let mut next = vec![0.0; k];
    for (i, word) in words.iter().enumerate().skip(1) {
        let emit = model.emission_logps(word);
        for t in 0..k {
            let mut best = delta[0] + model.transition_logp(0, t);
            let mut arg = 0;
            for p in 1..k {
                let cand = delta[p] + model.transition_logp(p, t);
                if cand > best {
                    best = cand;
                    arg = p;
                }
            }
            next[t] = best + emit[t];
            backptr[i * k + t] = arg;
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut best = delta[0] + model.stop_logp(0);
    let mut last = 0;
    for t in 1..k {
        let cand = delta[t] + model.stop_logp(t);
        if cand > best {
            best = cand;
            last = t;
        }
    }
    let mut path = vec![0; words.len()];
    path[words.len() - 1] = last;
    for i in (1..words.len()).rev() {
        path[i - 1] = backptr[i * k + path[i]];
    }
    (path, best)
}

/// Log-probability of one tag path, accumulated left to right.
pub fn sequence_log_prob(model: &HmmModel, words: &[&str], tags: &[&str]) -> Result<f64> {
    if words.len() != tags.len() {
        return Err(Error::Validation(format!(
            "{} words but {} tags",
            words.len(),
            tags.len()
        )));
    }
    let ids = tags
        .iter()
        .map(|t| {
            model
                .tag_id(t)
                .ok_or_else(|| Error::Validation(format!("tag {t} is not in the tagset")))
        })
        .collect::<Result<Vec<_>>>()?;
    let Some((&first, _)) = ids.split_first() else {
        return Ok(f64::NEG_INFINITY);
    };
    let mut score = model.start_logp(first) + model.emission_logps(words[0])[first];
    for i in 1..ids.len() {
        score = score + model.transition_logp(ids[i - 1], ids[i]) + model.emission_logps(words[i])[ids[i]];
    }
    Ok(score + model.stop_logp(ids[ids.len() - 1]))
}

/// Replaces the POS column of every sentence with Viterbi predictions.
pub fn tag_corpus(model: &HmmModel, corpus: &Corpus) -> Corpus {
    let sentences = corpus
        .sentences
        .par_iter()
        .map(|s| {
            let words = s.words();
            let (path, _) = viterbi_indices(model, &words);
            let mut out = s.clone();
            for (tok, t) in out.tokens.iter_mut().zip(path) {
                tok.pos = model.tags[t].clone();
            }
            out
        })
        .collect();
    Corpus {
        sentences,
        scheme: corpus.scheme,
    }
}

fn fmt_logp(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Serializes a model. Output is deterministic for a given model.
pub fn save_hmm(model: &HmmModel) -> String {
    let k = model.tags.len();
    let n = model.n();
    let name = |i: usize, reserved: &'static str| -> String {
        if i == k {
            reserved.to_string()
        } else {
            model.tags[i].clone()
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER} {FORMAT_VERSION}");
    let _ = writeln!(out, "unknown_mode={}", model.unknown_mode.as_str());
    let _ = writeln!(out, "suffix_max_len={}", model.suffix_max_len);
    out.push_str("[TAGS]\n");
    for t in model.tagset() {
        let _ = writeln!(out, "{t}");
    }
    out.push_str("[TRANSITIONS]\n");
    for prev in 0..n {
        for next in 0..n {
            if prev == k && next == k {
                continue;
            }
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                name(prev, START),
                name(next, STOP),
                fmt_logp(model.transitions[prev * n + next])
            );
        }
    }
    out.push_str("[EMISSIONS]\n");
    let mut words: Vec<&String> = model.emissions.keys().collect();
    words.sort();
    let mut by_tag: Vec<Vec<(&str, f64)>> = vec![Vec::new(); k];
    for w in words {
        for &(t, lp) in &model.emissions[w] {
            by_tag[t].push((w, lp));
        }
    }
    for (t, entries) in by_tag.iter().enumerate() {
        let tag = &model.tags[t];
        let _ = writeln!(out, "{tag}\t{DEFAULT}\t{}", fmt_logp(model.emission_default[t]));
        let _ = writeln!(out, "{tag}\t{UNK}\t{}", fmt_logp(model.unknown_logp[t]));
        for (w, lp) in entries {
            let _ = writeln!(out, "{tag}\t{w}\t{}", fmt_logp(*lp));
        }
    }
    out.push_str("[SUFFIXES]\n");
    for (class, row) in &model.suffixes {
        let class = if class.is_empty() { NO_SUFFIX } else { class };
        for (t, lp) in row.iter().enumerate() {
            let _ = writeln!(out, "{}\t{class}\t{}", model.tags[t], fmt_logp(*lp));
        }
    }
    out.push_str("[END]\n");
    out
}

fn load_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::ModelLoad(format!("line {line}: {msg}"))
}

/// Parses a model written by [`save_hmm`].
pub fn load_hmm(text: &str) -> Result<HmmModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::ModelLoad("empty model file".into()))?;
    let version = header
        .strip_prefix(FORMAT_HEADER)
        .map(str::trim)
        .ok_or_else(|| Error::ModelLoad("not an HMM model file".into()))?;
    let version: u32 = version
        .parse()
        .map_err(|_| Error::ModelLoad(format!("bad version `{version}`")))?;
    if version != FORMAT_VERSION {
        return Err(Error::ModelLoad(format!(
            "model format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }

    let mut unknown_mode = None;
    let mut suffix_max_len = None;
    let mut section = String::new();
    let mut tagset: Vec<String> = Vec::new();
    let mut trans_rows: Vec<(usize, String, String, f64)> = Vec::new();
    let mut emission_rows: Vec<(usize, String, String, f64)> = Vec::new();
    let mut suffix_rows: Vec<(usize, String, String, f64)> = Vec::new();
    let mut ended = false;

    for (lineno, line) in lines {
        if ended {
            if line.trim().is_empty() {
                continue;
            }
            return Err(load_err(lineno, "content after [END]"));
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line.to_string();
            if section == "[END]" {
                ended = true;
            }
            continue;
        }
        let triple = || -> Result<(usize, String, String, f64)> {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(load_err(lineno, "expected 3 tab-separated fields"));
            }
            let v: f64 = f[2]
                .parse()
                .map_err(|_| load_err(lineno, format!("bad number `{}`", f[2])))?;
            if v.is_nan() || v > 0.0 {
                return Err(load_err(lineno, format!("invalid log-probability {v}")));
            }
            Ok((lineno, f[0].to_string(), f[1].to_string(), v))
        };
        match section.as_str() {
            "" => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| load_err(lineno, "expected key=value"))?;
                match key {
                    "unknown_mode" => unknown_mode = Some(value.parse::<UnknownWordMode>()?),
                    "suffix_max_len" => {
                        suffix_max_len = Some(value.parse::<usize>().map_err(|_| {
                            load_err(lineno, format!("bad suffix_max_len `{value}`"))
                        })?)
                    }
                    _ => return Err(load_err(lineno, format!("unknown key `{key}`"))),
                }
            }
            "[TAGS]" => tagset.push(line.to_string()),
            "[TRANSITIONS]" => trans_rows.push(triple()?),
            "[EMISSIONS]" => emission_rows.push(triple()?),
            "[SUFFIXES]" => suffix_rows.push(triple()?),
            other => return Err(load_err(lineno, format!("unknown section {other}"))),
        }
    }
    if !ended {
        return Err(Error::ModelLoad("truncated model file (missing [END])".into()));
    }
    let unknown_mode = unknown_mode.ok_or_else(|| Error::ModelLoad("missing unknown_mode".into()))?;
    let suffix_max_len =
        suffix_max_len.ok_or_else(|| Error::ModelLoad("missing suffix_max_len".into()))?;

    if tagset.len() < 3 || tagset[0] != START || tagset[tagset.len() - 1] != STOP {
        return Err(Error::ModelLoad("malformed [TAGS] section".into()));
    }
    let tags: Vec<String> = tagset[1..tagset.len() - 1].to_vec();
    let tag_index: HashMap<String, usize> =
        tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let k = tags.len();
    let n = k + 1;
    let lookup = |lineno: usize, tag: &str| {
        tag_index
            .get(tag)
            .copied()
            .ok_or_else(|| load_err(lineno, format!("unknown tag `{tag}`")))
    };

    let mut transitions = vec![f64::NAN; n * n];
    transitions[k * n + k] = f64::NEG_INFINITY;
    for (lineno, from, to, v) in trans_rows {
        let p = if from == START { k } else { lookup(lineno, &from)? };
        let t = if to == STOP { k } else { lookup(lineno, &to)? };
        transitions[p * n + t] = v;
    }
    if transitions.iter().any(|x| x.is_nan()) {
        return Err(Error::ModelLoad("incomplete [TRANSITIONS] table".into()));
    }

    let mut emission_default = vec![f64::NAN; k];
    let mut unknown_logp = vec![f64::NAN; k];
    let mut emissions: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
    for (lineno, tag, word, v) in emission_rows {
        let t = lookup(lineno, &tag)?;
        match word.as_str() {
            DEFAULT => emission_default[t] = v,
            UNK => unknown_logp[t] = v,
            _ => emissions.entry(word).or_default().push((t, v)),
        }
    }
    if emission_default.iter().chain(&unknown_logp).any(|x| x.is_nan()) {
        return Err(Error::ModelLoad("incomplete [EMISSIONS] table".into()));
    }
    for entries in emissions.values_mut() {
        entries.sort_by_key(|(t, _)| *t);
    }

    let mut suffixes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (lineno, tag, class, v) in suffix_rows {
        let t = lookup(lineno, &tag)?;
        let class = if class == NO_SUFFIX { String::new() } else { class };
        suffixes.entry(class).or_insert_with(|| vec![f64::NAN; k])[t] = v;
    }
    if !suffixes.contains_key("") || suffixes.values().flatten().any(|x| x.is_nan()) {
        return Err(Error::ModelLoad("incomplete [SUFFIXES] table".into()));
    }

    let model = HmmModel {
        tags,
        tag_index,
        transitions,
        emission_default,
        unknown_logp,
        emissions,
        unknown_mode,
        suffix_max_len,
        suffixes,
    };
    model
        .check_stochastic(1e-6)
        .map_err(|e| Error::ModelLoad(format!("corrupt table: {e}")))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_pos_chunk, Scheme, Sentence, Token};
    use proptest::prelude::*;

    fn tagged(sentences: &[&[(&str, &str)]]) -> Corpus {
        let sentences = sentences
            .iter()
            .map(|s| Sentence::new(s.iter().map(|(w, p)| Token::new(*w, *p, "O")).collect()))
            .collect();
        Corpus::new(sentences, Scheme::Iob2).unwrap()
    }

    fn no_smoothing() -> HmmConfig {
        HmmConfig {
            transition_smoothing_k: 0.0,
            emission_smoothing_k: 0.0,
            ..HmmConfig::default()
        }
    }

    fn p(model: &HmmModel, a: &str, b: &str) -> f64 {
        model.transition_logp_by_name(a, b).unwrap().exp()
    }

    #[test]
    fn mle_single_sentence() {
        let m = train_hmm(&tagged(&[&[("a", "DT"), ("cat", "NN")]]), &no_smoothing()).unwrap();
        assert!((p(&m, "DT", "NN") - 1.0).abs() < 1e-15);
        assert!((p(&m, "NN", STOP) - 1.0).abs() < 1e-15);
        assert_eq!(p(&m, "DT", "DT"), 0.0);
    }

    #[test]
    fn mle_two_thirds() {
        let c = tagged(&[
            &[("the", "DT"), ("cat", "NN")],
            &[("the", "DT"), ("dog", "NN")],
            &[("the", "DT"), ("big", "JJ")],
        ]);
        let m = train_hmm(&c, &no_smoothing()).unwrap();
        assert!((p(&m, "DT", "NN") - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn add_k_over_three_successors() {
        let c = tagged(&[&[("the", "DT"), ("cat", "NN")], &[("a", "DT"), ("dog", "NN")]]);
        let cfg = HmmConfig {
            transition_smoothing_k: 1.0,
            ..HmmConfig::default()
        };
        let m = train_hmm(&c, &cfg).unwrap();
        assert!((p(&m, "DT", "NN") - 0.6).abs() < 1e-15);
        assert!((p(&m, "DT", "DT") - 0.2).abs() < 1e-15);
        assert!((p(&m, "DT", STOP) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_is_training_error() {
        let c = Corpus::empty(Scheme::Iob2);
        assert!(matches!(train_hmm(&c, &HmmConfig::default()), Err(Error::Training(_))));
        let bad = HmmConfig {
            suffix_max_len: 0,
            ..HmmConfig::default()
        };
        assert!(matches!(
            train_hmm(&tagged(&[&[("a", "DT")]]), &bad),
            Err(Error::Config(_))
        ));
    }

    fn two_tag_model(emit_a: f64) -> HmmModel {
        HmmModel::from_tables(
            vec!["A".into(), "B".into()],
            vec![0.5, 0.5],
            vec![vec![0.25, 0.25], vec![0.25, 0.25]],
            vec![0.5, 0.5],
            BTreeMap::from([("x".to_string(), vec![emit_a, 1.0 - emit_a])]),
        )
        .unwrap()
    }

    #[test]
    fn single_step_argmax() {
        assert_eq!(viterbi_decode(&two_tag_model(0.9), &["x"]).tags, vec!["A"]);
        assert_eq!(viterbi_decode(&two_tag_model(0.1), &["x"]).tags, vec!["B"]);
    }

    #[test]
    fn hand_computed_two_token_path() {
        let m = HmmModel::from_tables(
            vec!["A".into(), "B".into()],
            vec![0.6, 0.4],
            vec![vec![0.3, 0.5], vec![0.1, 0.7]],
            vec![0.2, 0.2],
            BTreeMap::from([
                ("x".to_string(), vec![0.5, 0.2]),
                ("y".to_string(), vec![0.5, 0.8]),
            ]),
        )
        .unwrap();
        // P = 0.6 * 0.5 * 0.5 * 0.8 * 0.2
        let expected = (0.6f64 * 0.5 * 0.5 * 0.8 * 0.2).ln();
        let got = sequence_log_prob(&m, &["x", "y"], &["A", "B"]).unwrap();
        assert!((got - expected).abs() < 1e-12);
        let best = viterbi_decode(&m, &["x", "y"]);
        let score = sequence_log_prob(&m, &["x", "y"], &best.tags.iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        assert_eq!(best.score, score);
    }

    #[test]
    fn impossible_path_is_neg_inf() {
        let c = tagged(&[&[("the", "DT"), ("cat", "NN")]]);
        let m = train_hmm(&c, &no_smoothing()).unwrap();
        let lp = sequence_log_prob(&m, &["the", "cat"], &["NN", "DT"]).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
        assert!(matches!(
            sequence_log_prob(&m, &["the"], &["VB"]),
            Err(Error::Validation(_))
        ));
        assert!(sequence_log_prob(&m, &["the"], &["DT", "NN"]).is_err());
    }

    #[test]
    fn unknown_word_falls_back_when_impossible() {
        let c = tagged(&[&[("the", "DT"), ("cat", "NN")]]);
        let m = train_hmm(&c, &no_smoothing()).unwrap();
        assert_eq!(m.emission_logps("zebra"), vec![0.0, 0.0]);
        let out = viterbi_decode(&m, &["the", "zebra"]);
        assert_eq!(out.tags, vec!["DT", "NN"]);
    }

    #[test]
    fn suffix_model_guides_unknown_words() {
        let c = tagged(&[
            &[("the", "DT"), ("nation", "NN"), ("walked", "VBD")],
            &[("the", "DT"), ("station", "NN"), ("jumped", "VBD")],
            &[("the", "DT"), ("motion", "NN"), ("talked", "VBD")],
            &[("the", "DT"), ("the", "DT")],
        ]);
        let m = train_hmm(&c, &HmmConfig::default()).unwrap();
        let e = m.emission_logps("ration");
        assert!(e[m.tag_id("NN").unwrap()] > e[m.tag_id("VBD").unwrap()]);
        let e = m.emission_logps("hopped");
        assert!(e[m.tag_id("VBD").unwrap()] > e[m.tag_id("NN").unwrap()]);
        m.check_stochastic(1e-9).unwrap();
    }

    /// Hand-built model for the "left" error: VBN has the highest emission,
    /// but after a determiner the NN transition outweighs it.
    #[test]
    fn transition_weighted_argmax_beats_emission_argmax() {
        let tags: Vec<String> = ["DT", "JJ", "NN", "VBN"].iter().map(|s| s.to_string()).collect();
        let start = vec![0.85, 0.05, 0.05, 0.05];
        let trans = vec![
            vec![0.01, 0.20, 0.70, 0.01], // DT
            vec![0.05, 0.10, 0.60, 0.05], // JJ
            vec![0.10, 0.05, 0.25, 0.20], // NN
            vec![0.30, 0.10, 0.20, 0.10], // VBN
        ];
        let stop = vec![0.08, 0.20, 0.40, 0.30];
        let emissions = BTreeMap::from([
            ("the".to_string(), vec![0.5, 0.0, 0.0, 0.0]),
            ("left".to_string(), vec![0.0, 0.001, 0.0005, 0.004]),
        ]);
        let m = HmmModel::from_tables(tags, start, trans.clone(), stop.clone(), emissions).unwrap();
        let out = viterbi_decode(&m, &["the", "left"]);
        // Hand scores for the second tag after DT: P(t|DT) P(left|t) P(STOP|t)
        //   JJ : 0.20 * 0.001  * 0.20 = 4.0e-5
        //   NN : 0.70 * 0.0005 * 0.40 = 1.4e-4
        //   VBN: 0.01 * 0.004  * 0.30 = 1.2e-5
        assert_eq!(out.tags, vec!["DT", "NN"]);
        let emit = m.emission_logps("left");
        let emission_argmax = (0..4).max_by(|&a, &b| emit[a].total_cmp(&emit[b])).unwrap();
        assert_eq!(m.tags()[emission_argmax], "VBN");
    }

    #[test]
    fn all_ties_pick_first_tag() {
        let m = HmmModel::from_tables(
            vec!["A".into(), "B".into(), "C".into()],
            vec![1.0 / 3.0; 3],
            vec![vec![0.25; 3]; 3],
            vec![0.25; 3],
            BTreeMap::from([("x".to_string(), vec![0.5; 3])]),
        )
        .unwrap();
        assert_eq!(viterbi_decode(&m, &["x", "x", "x"]).tags, vec!["A", "A", "A"]);
    }

    #[test]
    fn from_tables_rejects_non_stochastic() {
        let r = HmmModel::from_tables(
            vec!["A".into()],
            vec![0.5],
            vec![vec![0.5]],
            vec![0.5],
            BTreeMap::new(),
        );
        assert!(r.is_err());
    }

    const SMALL: &str = "The\tDT\tB-NP\npoor\tJJ\tI-NP\nare\tVBP\tB-VP\nhoused\tVBN\tI-VP\n.\t.\tO\n\n\
                         A\tDT\tB-NP\nrich\tJJ\tI-NP\nman\tNN\tI-NP\nleft\tVBD\tB-VP\n.\t.\tO\n\n\
                         The\tDT\tB-NP\nleft\tJJ\tI-NP\nhand\tNN\tI-NP\nwaved\tVBD\tB-VP\n.\t.\tO\n\n";

    #[test]
    fn save_load_round_trip() {
        let c = parse_pos_chunk(SMALL, None).unwrap();
        let m = train_hmm(&c, &HmmConfig::default()).unwrap();
        let text = save_hmm(&m);
        let loaded = load_hmm(&text).unwrap();
        assert_eq!(loaded, m);
        assert_eq!(save_hmm(&loaded), text);
        for words in [vec!["The", "left", "man"], vec!["unseen", "words", "."]] {
            assert_eq!(viterbi_decode(&m, &words), viterbi_decode(&loaded, &words));
        }
    }

    #[test]
    fn load_errors() {
        let c = parse_pos_chunk(SMALL, None).unwrap();
        let text = save_hmm(&train_hmm(&c, &HmmConfig::default()).unwrap());
        let truncated = &text[..text.len() / 2];
        assert!(matches!(load_hmm(truncated), Err(Error::ModelLoad(_))));
        let v2 = text.replacen("jntag-hmm 1", "jntag-hmm 2", 1);
        let err = load_hmm(&v2).unwrap_err();
        assert!(err.to_string().contains("version 2"), "{err}");
        // Overwrite one transition value so its row no longer sums to one.
        let corrupt: Vec<String> = text
            .lines()
            .scan(false, |in_trans, line| {
                let out = if *in_trans {
                    *in_trans = false;
                    let (head, _) = line.rsplit_once('\t').unwrap();
                    format!("{head}\t-0.0001")
                } else {
                    line.to_string()
                };
                if line == "[TRANSITIONS]" {
                    *in_trans = true;
                }
                Some(out)
            })
            .collect();
        let err = load_hmm(&corrupt.join("\n")).unwrap_err();
        assert!(err.to_string().contains("corrupt"), "{err}");
        assert!(load_hmm("").is_err());
    }

    #[test]
    fn deterministic_serialization() {
        let c = parse_pos_chunk(SMALL, None).unwrap();
        let a = save_hmm(&train_hmm(&c, &HmmConfig::default()).unwrap());
        let b = save_hmm(&train_hmm(&c, &HmmConfig::default()).unwrap());
        assert_eq!(a, b);
    }

    fn arb_corpus() -> impl Strategy<Value = Corpus> {
        let word = prop::sample::select(vec!["a", "b", "c", "dd", "ee", "fog", "gig"]);
        let tag = prop::sample::select(vec!["X", "Y", "Z", "W"]);
        prop::collection::vec(prop::collection::vec((word, tag), 1..6), 1..6).prop_map(|ss| {
            let sentences = ss
                .into_iter()
                .map(|s| Sentence::new(s.into_iter().map(|(w, t)| Token::new(w, t, "O")).collect()))
                .collect();
            Corpus::new(sentences, Scheme::Iob2).unwrap()
        })
    }

    fn arb_config() -> impl Strategy<Value = HmmConfig> {
        (0.0f64..2.0, 0.0f64..1.0, any::<bool>(), 1usize..4, 0usize..3).prop_map(
            |(kt, ke, suffix, max_len, rare)| HmmConfig {
                transition_smoothing_k: kt,
                emission_smoothing_k: ke,
                unknown_word_mode: if suffix { UnknownWordMode::Suffix } else { UnknownWordMode::Uniform },
                suffix_max_len: max_len,
                rare_threshold: rare,
            },
        )
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(c in arb_corpus(), cfg in arb_config()) {
            let m = train_hmm(&c, &cfg).unwrap();
            // With k = 0 and no rare words the unknown mass is legitimately zero.
            m.check_stochastic(1e-9).unwrap();
        }

        #[test]
        fn round_trip_preserves_model(c in arb_corpus(), cfg in arb_config()) {
            let m = train_hmm(&c, &cfg).unwrap();
            prop_assert_eq!(load_hmm(&save_hmm(&m)).unwrap(), m);
        }

        #[test]
        fn more_copies_never_lower_gold_score(c in arb_corpus(), pick in 0usize..6, copies in 1usize..4) {
            let cfg = HmmConfig::default();
            let s = c.sentences[pick % c.len()].clone();
            let words = s.words();
            let gold: Vec<&str> = s.tokens.iter().map(|t| t.pos.as_str()).collect();
            let mut prev = sequence_log_prob(&train_hmm(&c, &cfg).unwrap(), &words, &gold).unwrap();
            let mut grown = c.clone();
            for _ in 0..copies {
                grown.sentences.push(s.clone());
                let now = sequence_log_prob(&train_hmm(&grown, &cfg).unwrap(), &words, &gold).unwrap();
                prop_assert!(now >= prev - 1e-12, "{} < {}", now, prev);
                prev = now;
            }
        }
    }
}
