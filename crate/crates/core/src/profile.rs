//! Distributions of the POS tags next to a target tag class, and cosine
//! similarity between them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Context symbol used for the sentence edge.
pub const BOUNDARY: &str = "⟨BOUNDARY⟩";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Preceding,
    Following,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Preceding, Direction::Following];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Preceding => "preceding",
            Direction::Following => "following",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How sentence edges are treated when tallying contexts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Count the edge as [`BOUNDARY`].
    #[default]
    Symbol,
    /// Ignore occurrences whose context falls off the sentence.
    Skip,
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symbol" => Ok(BoundaryMode::Symbol),
            "skip" => Ok(BoundaryMode::Skip),
            _ => Err(Error::Config(format!("unknown boundary mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProfileConfig {
    pub boundary: BoundaryMode,
    /// Compare only the `k` most probable context tags of each distribution.
    pub top_k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TagDistribution {
    pub direction: Direction,
    pub target: String,
    pub counts: BTreeMap<String, u64>,
    pub probs: BTreeMap<String, f64>,
    pub support_count: u64,
}

impl TagDistribution {
    /// Normalizes raw context counts. Zero counts are dropped.
    pub fn from_counts(
        target: impl Into<String>,
        direction: Direction,
        counts: BTreeMap<String, u64>,
    ) -> Self {
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        let support_count: u64 = counts.values().sum();
        let probs = counts
            .iter()
            .map(|(k, &n)| (k.clone(), n as f64 / support_count as f64))
            .collect();
        TagDistribution {
            direction,
            target: target.into(),
            counts,
            probs,
            support_count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.support_count == 0
    }

    fn top_k_keys(&self, k: usize) -> BTreeSet<&str> {
        let mut ranked: Vec<(&String, &u64)> = self.counts.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        ranked.into_iter().take(k).map(|(t, _)| t.as_str()).collect()
    }
}

/// Label for a tag set: its members joined by `/`.
pub fn target_label(tags: &BTreeSet<String>) -> String {
    tags.iter().cloned().collect::<Vec<_>>().join("/")
}

pub fn context_distribution(
    corpus: &Corpus,
    target_tags: &BTreeSet<String>,
    direction: Direction,
    config: &ProfileConfig,
) -> TagDistribution {
    named_context_distribution(corpus, &target_label(target_tags), target_tags, direction, config)
}

fn named_context_distribution(
    corpus: &Corpus,
    name: &str,
    target_tags: &BTreeSet<String>,
    direction: Direction,
    config: &ProfileConfig,
) -> TagDistribution {
    let counts = corpus
        .sentences
        .par_iter()
        .fold(BTreeMap::<String, u64>::new, |mut acc, s| {
            let toks = &s.tokens;
            for (i, t) in toks.iter().enumerate() {
                if !target_tags.contains(&t.pos) {
                    continue;
                }
                let neighbour = match direction {
                    Direction::Preceding => i.checked_sub(1).map(|j| &toks[j]),
                    Direction::Following => toks.get(i + 1),
                };
                let key = match (neighbour, config.boundary) {
                    (Some(n), _) => n.pos.as_str(),
                    (None, BoundaryMode::Symbol) => BOUNDARY,
                    (None, BoundaryMode::Skip) => continue,
                };
                *acc.entry(key.to_string()).or_insert(0) += 1;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, n) in b {
                *a.entry(k).or_insert(0) += n;
            }
            a
        });
    TagDistribution::from_counts(name, direction, counts)
}

/// Cosine over the union of both supports, missing tags counting as zero.
pub fn cosine_similarity(a: &TagDistribution, b: &TagDistribution) -> Result<f64> {
    cosine_restricted(a, b, None)
}

/// Cosine restricted to the union of each side's `k` most frequent tags.
pub fn cosine_similarity_top_k(a: &TagDistribution, b: &TagDistribution, k: usize) -> Result<f64> {
    cosine_restricted(a, b, Some(k))
}

fn cosine_restricted(a: &TagDistribution, b: &TagDistribution, top_k: Option<usize>) -> Result<f64> {
    for d in [a, b] {
        if d.is_empty() {
            return Err(Error::UndefinedSimilarity(format!(
                "no {} contexts for target {}",
                d.direction, d.target
            )));
        }
    }
    let keys: BTreeSet<&str> = match top_k {
        Some(k) => a.top_k_keys(k).union(&b.top_k_keys(k)).copied().collect(),
        None => a.probs.keys().chain(b.probs.keys()).map(String::as_str).collect(),
    };
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for k in keys {
        let x = a.probs.get(k).copied().unwrap_or(0.0);
        let y = b.probs.get(k).copied().unwrap_or(0.0);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityPair {
    pub target_a: String,
    pub target_b: String,
    pub direction: Direction,
    pub cosine: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileReport {
    pub pairs: Vec<SimilarityPair>,
    pub distributions: Vec<TagDistribution>,
}

/// Named target tag sets.
pub type TargetSets = Vec<(String, BTreeSet<String>)>;

/// JN, NN/NNS, JJ and JJS.
pub fn default_target_sets() -> TargetSets {
    parse_target_sets("JN=JN;NN/NNS=NN,NNS;JJ=JJ;JJS=JJS").expect("static target sets")
}

/// Parses `name=TAG,TAG;name=TAG`. A bare `NN,NNS` entry is named `NN/NNS`.
pub fn parse_target_sets(s: &str) -> Result<TargetSets> {
    let mut out = Vec::new();
    for entry in s.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, tags) = match entry.split_once('=') {
            Some((n, t)) => (Some(n.trim()), t),
            None => (None, entry),
        };
        let tags: BTreeSet<String> = tags
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        if tags.is_empty() {
            return Err(Error::Config(format!("empty target set in `{entry}`")));
        }
        let name = name.map(String::from).unwrap_or_else(|| target_label(&tags));
        out.push((name, tags));
    }
    Ok(out)
}

/// Compares the first target set against every other one, in both directions.
pub fn profile_report(
    corpus: &Corpus,
    target_sets: &[(String, BTreeSet<String>)],
    config: &ProfileConfig,
) -> Result<ProfileReport> {
    if target_sets.len() < 2 {
        return Err(Error::Config("profiling needs at least two target sets".into()));
    }
    let mut distributions = Vec::new();
    for (name, tags) in target_sets {
        for dir in Direction::BOTH {
            distributions.push(named_context_distribution(corpus, name, tags, dir, config));
        }
    }
    let find = |name: &str, dir: Direction| {
        distributions
            .iter()
            .find(|d| d.target == name && d.direction == dir)
            .expect("distribution computed above")
    };
    let mut pairs = Vec::new();
    let first = &target_sets[0].0;
    for dir in Direction::BOTH {
        for (other, _) in &target_sets[1..] {
            let cosine = cosine_restricted(find(first, dir), find(other, dir), config.top_k)?;
            pairs.push(SimilarityPair {
                target_a: first.clone(),
                target_b: other.clone(),
                direction: dir,
                cosine,
            });
        }
    }
    Ok(ProfileReport {
        pairs,
        distributions,
    })
}

impl ProfileReport {
    /// `targetA<TAB>targetB<TAB>direction<TAB>cosine` with a header row.
    pub fn similarity_tsv(&self) -> String {
        let mut out = String::from("targetA\ttargetB\tdirection\tcosine\n");
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                p.target_a, p.target_b, p.direction, p.cosine
            );
        }
        out
    }

    /// One row per (target, direction, context tag).
    pub fn distributions_tsv(&self) -> String {
        let mut out = String::from("target\tdirection\ttag\tprobability\tcount\n");
        for d in &self.distributions {
            for (tag, p) in &d.probs {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{:.6}\t{}",
                    d.target, d.direction, tag, p, d.counts[tag]
                );
            }
        }
        out
    }
}
