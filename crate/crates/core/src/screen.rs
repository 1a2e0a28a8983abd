//! Nominal-adjective screening and the JN / JJ2NN relabeling transforms.
//!
//! A token is screened as a nominal-adjective candidate when it carries an
//! adjective tag, sits at the end of an NP chunk, and is introduced inside
//! that chunk by a single determiner optionally followed by a few adverbs
//! ("the poor", "the very rich").

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::{extract_chunks, Corpus, Sentence};
use crate::error::{Error, Result};

/// POS tag given to relabeled nominal adjectives.
pub const JN_TAG: &str = "JN";
const NP: &str = "NP";

fn tag_set(tags: &[&str]) -> BTreeSet<String> {
    tags.iter().map(|t| t.to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScreenConfig {
    pub adjective_tags: BTreeSet<String>,
    /// Adds JJR to the adjective tags.
    pub include_jjr: bool,
    pub determiner_tags: BTreeSet<String>,
    pub adverb_tags: BTreeSet<String>,
    pub max_adverbs: usize,
    /// Require the adjective to be the last token of its NP chunk.
    pub require_np_final: bool,
    /// POS tags that may not follow the adjective. Empty disables the check.
    pub forbidden_next_pos: BTreeSet<String>,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            adjective_tags: tag_set(&["JJ", "JJS"]),
            include_jjr: false,
            determiner_tags: tag_set(&["DT"]),
            adverb_tags: tag_set(&["RB", "RBR", "RBS"]),
            max_adverbs: 1,
            require_np_final: true,
            forbidden_next_pos: BTreeSet::new(),
        }
    }
}

impl ScreenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.adjective_tags.is_empty() && !self.include_jjr {
            return Err(Error::Config("screen.adjective_tags must not be empty".into()));
        }
        Ok(())
    }

    /// Adjective tags in effect, including JJR when enabled.
    pub fn effective_adjective_tags(&self) -> BTreeSet<String> {
        let mut tags = self.adjective_tags.clone();
        if self.include_jjr {
            tags.insert("JJR".to_string());
        }
        tags
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateRef {
    pub sentence_index: usize,
    pub token_index: usize,
    pub original_pos: String,
}

impl CandidateRef {
    pub fn new(sentence_index: usize, token_index: usize, original_pos: impl Into<String>) -> Self {
        CandidateRef {
            sentence_index,
            token_index,
            original_pos: original_pos.into(),
        }
    }

    pub fn position(&self) -> (usize, usize) {
        (self.sentence_index, self.token_index)
    }
}

/// Screens every sentence for nominal-adjective candidates.
///
/// Results are ordered by (sentence, token).
pub fn screen_candidates(corpus: &Corpus, config: &ScreenConfig) -> Result<Vec<CandidateRef>> {
    config.validate()?;
    let adjectives = config.effective_adjective_tags();
    let per_sentence: Vec<Result<Vec<CandidateRef>>> = corpus
        .sentences
        .par_iter()
        .enumerate()
        .map(|(si, s)| screen_sentence(s, si, corpus, config, &adjectives))
        .collect();
    let mut out = Vec::new();
    for part in per_sentence {
        out.extend(part?);
    }
    Ok(out)
}

fn screen_sentence(
    sentence: &Sentence,
    si: usize,
    corpus: &Corpus,
    config: &ScreenConfig,
    adjectives: &BTreeSet<String>,
) -> Result<Vec<CandidateRef>> {
    let tokens = &sentence.tokens;
    let mut out = Vec::new();
    for chunk in extract_chunks(sentence, si, corpus.scheme)? {
        if chunk.chunk_type != NP {
            continue;
        }
        for ti in chunk.start..=chunk.end {
            if !adjectives.contains(&tokens[ti].pos) {
                continue;
            }
            if config.require_np_final && ti != chunk.end {
                continue;
            }
            if let Some(next) = tokens.get(ti + 1) {
                if config.forbidden_next_pos.contains(&next.pos) {
                    continue;
                }
            }
            // Walk left over adverbs, then expect exactly one determiner.
            let mut j = ti;
            let mut adverbs = 0;
            while j > chunk.start && config.adverb_tags.contains(&tokens[j - 1].pos) {
                adverbs += 1;
                j -= 1;
            }
            if adverbs > config.max_adverbs || j == chunk.start {
                continue;
            }
            let det = j - 1;
            if !config.determiner_tags.contains(&tokens[det].pos) {
                continue;
            }
            if det > chunk.start && config.determiner_tags.contains(&tokens[det - 1].pos) {
                continue;
            }
            out.push(CandidateRef::new(si, ti, tokens[ti].pos.clone()));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// Manual review decisions. Position keys take precedence over word keys.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReviewList {
    pub positions: BTreeMap<(usize, usize), Decision>,
    pub words: BTreeMap<String, Decision>,
}

impl ReviewList {
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty() && self.words.is_empty()
    }

    /// Parses `accept|reject<TAB>key` lines where key is `s:<sent>:<tok>` or
    /// `w:<word>`. Blank lines and lines starting with `#` are skipped; a
    /// repeated key keeps its last decision.
    pub fn parse(text: &str) -> Result<Self> {
        let mut review = ReviewList::default();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (decision, key) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "expected `decision<TAB>key`"))?;
            let decision = match decision {
                "accept" => Decision::Accept,
                "reject" => Decision::Reject,
                other => return Err(Error::parse(lineno, format!("unknown decision `{other}`"))),
            };
            if let Some(word) = key.strip_prefix("w:") {
                if word.is_empty() {
                    return Err(Error::parse(lineno, "empty word key"));
                }
                review.words.insert(word.to_string(), decision);
            } else if let Some(pos) = key.strip_prefix("s:") {
                let parsed = pos
                    .split_once(':')
                    .and_then(|(s, t)| Some((s.parse().ok()?, t.parse().ok()?)));
                let pos = parsed
                    .ok_or_else(|| Error::parse(lineno, format!("bad position key `{key}`")))?;
                review.positions.insert(pos, decision);
            } else {
                return Err(Error::parse(lineno, format!("bad review key `{key}`")));
            }
        }
        Ok(review)
    }
}

/// Applies review decisions to a candidate list.
///
/// Rejections remove candidates. A position-keyed accept for a token that was
/// not screened adds it, provided the token carries one of the configured
/// adjective tags.
pub fn apply_review(
    corpus: &Corpus,
    config: &ScreenConfig,
    candidates: &[CandidateRef],
    review: &ReviewList,
) -> Result<Vec<CandidateRef>> {
    let adjectives = config.effective_adjective_tags();
    let mut kept: BTreeSet<CandidateRef> = BTreeSet::new();
    for c in candidates {
        let decision = review.positions.get(&c.position()).copied().or_else(|| {
            corpus
                .token(c.sentence_index, c.token_index)
                .and_then(|t| review.words.get(&t.word).copied())
        });
        if decision != Some(Decision::Reject) {
            kept.insert(c.clone());
        }
    }
    for (&(si, ti), &decision) in &review.positions {
        if decision != Decision::Accept {
            continue;
        }
        let token = corpus.token(si, ti).ok_or_else(|| {
            Error::Validation(format!("review accepts missing token s:{si}:{ti}"))
        })?;
        if !adjectives.contains(&token.pos) {
            return Err(Error::Validation(format!(
                "review accepts s:{si}:{ti} ({}/{}), which is not an adjective",
                token.word, token.pos
            )));
        }
        kept.insert(CandidateRef::new(si, ti, token.pos.clone()));
    }
    Ok(kept.into_iter().collect())
}

fn check_references(corpus: &Corpus, candidates: &[CandidateRef]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in candidates {
        let token = corpus.token(c.sentence_index, c.token_index).ok_or_else(|| {
            Error::Validation(format!(
                "dangling candidate s:{}:{}",
                c.sentence_index, c.token_index
            ))
        })?;
        if token.pos != c.original_pos {
            return Err(Error::Validation(format!(
                "candidate s:{}:{} expects POS {} but token is {}/{}",
                c.sentence_index, c.token_index, c.original_pos, token.word, token.pos
            )));
        }
        if !seen.insert(c.position()) {
            return Err(Error::Validation(format!(
                "duplicate candidate s:{}:{}",
                c.sentence_index, c.token_index
            )));
        }
    }
    Ok(())
}

fn relabel_with<F>(corpus: &Corpus, candidates: &[CandidateRef], new_pos: F) -> Result<Corpus>
where
    F: Fn(&CandidateRef) -> Result<String>,
{
    check_references(corpus, candidates)?;
    let mut out = corpus.clone();
    for c in candidates {
        out.sentences[c.sentence_index].tokens[c.token_index].pos = new_pos(c)?;
    }
    Ok(out)
}

/// Replaces the POS of every candidate token with `JN`.
pub fn apply_jn_relabel(corpus: &Corpus, candidates: &[CandidateRef]) -> Result<Corpus> {
    relabel_with(corpus, candidates, |_| Ok(JN_TAG.to_string()))
}

/// JJ -> NN, JJS -> NNS.
pub fn default_jj2nn_mapping() -> BTreeMap<String, String> {
    [("JJ", "NN"), ("JJS", "NNS")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Relabels candidate tokens as nouns according to `mapping`.
pub fn apply_jj2nn_relabel(
    corpus: &Corpus,
    candidates: &[CandidateRef],
    mapping: &BTreeMap<String, String>,
) -> Result<Corpus> {
    relabel_with(corpus, candidates, |c| {
        mapping.get(&c.original_pos).cloned().ok_or_else(|| {
            Error::Config(format!("no JJ2NN mapping for POS {}", c.original_pos))
        })
    })
}

/// Puts each candidate's `original_pos` back. Inverse of both relabels.
pub fn restore_original_pos(corpus: &Corpus, candidates: &[CandidateRef]) -> Result<Corpus> {
    let mut out = corpus.clone();
    for c in candidates {
        let token = out
            .sentences
            .get_mut(c.sentence_index)
            .and_then(|s| s.tokens.get_mut(c.token_index))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "dangling candidate s:{}:{}",
                    c.sentence_index, c.token_index
                ))
            })?;
        token.pos = c.original_pos.clone();
    }
    Ok(out)
}

/// Counts of candidates by original POS.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagHistogram {
    pub counts: BTreeMap<String, usize>,
}

impl TagHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn fraction(&self, tag: &str) -> f64 {
        self.fraction_of(&[tag])
    }

    /// Combined share of several tags, e.g. JJ together with JJS.
    pub fn fraction_of(&self, tags: &[&str]) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let n: usize = tags.iter().filter_map(|t| self.counts.get(*t)).sum();
        n as f64 / total as f64
    }

    pub fn fractions(&self) -> BTreeMap<String, f64> {
        self.counts
            .keys()
            .map(|k| (k.clone(), self.fraction(k)))
            .collect()
    }

    /// `pos<TAB>count<TAB>fraction` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("pos\tcount\tfraction\n");
        for (tag, n) in &self.counts {
            let _ = writeln!(out, "{tag}\t{n}\t{:.6}", self.fraction(tag));
        }
        out
    }
}

pub fn screening_stats(candidates: &[CandidateRef]) -> TagHistogram {
    let mut counts = BTreeMap::new();
    for c in candidates {
        *counts.entry(c.original_pos.clone()).or_insert(0) += 1;
    }
    TagHistogram { counts }
}

/// Candidate export: `sentence<TAB>token<TAB>word<TAB>original_pos` per line.
pub fn write_candidates(corpus: &Corpus, candidates: &[CandidateRef]) -> Result<String> {
    let mut out = String::new();
    for c in candidates {
        let token = corpus.token(c.sentence_index, c.token_index).ok_or_else(|| {
            Error::Validation(format!(
                "dangling candidate s:{}:{}",
                c.sentence_index, c.token_index
            ))
        })?;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            c.sentence_index, c.token_index, token.word, c.original_pos
        );
    }
    Ok(out)
}

/// Reads a candidate export and checks every row against `corpus`.
pub fn read_candidates(text: &str, corpus: &Corpus) -> Result<Vec<CandidateRef>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let si: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad sentence index `{}`", fields[0])))?;
        let ti: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad token index `{}`", fields[1])))?;
        match corpus.token(si, ti) {
            Some(t) if t.word == fields[2] => {}
            Some(t) => {
                return Err(Error::Validation(format!(
                    "candidate line {lineno}: s:{si}:{ti} is `{}`, not `{}`",
                    t.word, fields[2]
                )))
            }
            None => {
                return Err(Error::Validation(format!(
                    "candidate line {lineno}: dangling reference s:{si}:{ti}"
                )))
            }
        }
        out.push(CandidateRef::new(si, ti, fields[3]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_pos_chunk, write_pos_chunk};

    fn corpus(text: &str) -> Corpus {
        parse_pos_chunk(text, None).unwrap()
    }

    fn positions(c: &[CandidateRef]) -> Vec<(usize, usize)> {
        c.iter().map(|c| c.position()).collect()
    }

    const POOR: &str = "The\tDT\tB-NP\npoor\tJJ\tI-NP\nare\tVBP\tB-VP\nhoused\tVBN\tI-VP\n\n";
    const RICH: &str = "The\tDT\tB-NP\nvery\tRB\tI-NP\nrich\tJJ\tI-NP\nin\tIN\tB-PP\n\
                        this\tDT\tB-NP\ncountry\tNN\tI-NP\npay\tVBP\tB-VP\n\n";
    const PEOPLE: &str = "the\tDT\tB-NP\npoor\tJJ\tI-NP\npeople\tNNS\tI-NP\n\n";

    #[test]
    fn the_poor() {
        let c = screen_candidates(&corpus(POOR), &ScreenConfig::default()).unwrap();
        assert_eq!(c, vec![CandidateRef::new(0, 1, "JJ")]);
    }

    #[test]
    fn the_very_rich() {
        let c = screen_candidates(&corpus(RICH), &ScreenConfig::default()).unwrap();
        assert_eq!(positions(&c), vec![(0, 2)]);
    }

    #[test]
    fn adjective_before_noun_is_not_candidate() {
        let c = screen_candidates(&corpus(PEOPLE), &ScreenConfig::default()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn adverb_limit_and_double_determiner() {
        let two_adverbs = "the\tDT\tB-NP\nvery\tRB\tI-NP\nvery\tRB\tI-NP\nrich\tJJ\tI-NP\n\n";
        let cfg = ScreenConfig::default();
        assert!(screen_candidates(&corpus(two_adverbs), &cfg).unwrap().is_empty());
        let cfg2 = ScreenConfig {
            max_adverbs: 2,
            ..ScreenConfig::default()
        };
        assert_eq!(positions(&screen_candidates(&corpus(two_adverbs), &cfg2).unwrap()), vec![(0, 3)]);

        let double = "all\tDT\tB-NP\nthe\tDT\tI-NP\npoor\tJJ\tI-NP\n\n";
        assert!(screen_candidates(&corpus(double), &cfg).unwrap().is_empty());
        let predet = "all\tPDT\tB-NP\nthe\tDT\tI-NP\npoor\tJJ\tI-NP\n\n";
        assert_eq!(positions(&screen_candidates(&corpus(predet), &cfg).unwrap()), vec![(0, 2)]);
    }

    #[test]
    fn determiner_must_be_inside_the_chunk() {
        let text = "the\tDT\tB-NP\nbig\tJJ\tB-NP\n\n";
        assert!(screen_candidates(&corpus(text), &ScreenConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn jjr_only_when_enabled() {
        let text = "the\tDT\tB-NP\nricher\tJJR\tI-NP\n\n";
        assert!(screen_candidates(&corpus(text), &ScreenConfig::default()).unwrap().is_empty());
        let cfg = ScreenConfig {
            include_jjr: true,
            ..ScreenConfig::default()
        };
        assert_eq!(screen_candidates(&corpus(text), &cfg).unwrap()[0].original_pos, "JJR");
    }

    #[test]
    fn forbidden_next_mode() {
        let cfg = ScreenConfig {
            require_np_final: false,
            forbidden_next_pos: tag_set(&["NN", "NNS", "JJ"]),
            ..ScreenConfig::default()
        };
        assert!(screen_candidates(&corpus(PEOPLE), &cfg).unwrap().is_empty());
        assert_eq!(positions(&screen_candidates(&corpus(POOR), &cfg).unwrap()), vec![(0, 1)]);
    }

    #[test]
    fn empty_adjective_set_is_config_error() {
        let cfg = ScreenConfig {
            adjective_tags: BTreeSet::new(),
            ..ScreenConfig::default()
        };
        assert!(matches!(screen_candidates(&corpus(POOR), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn review_identity_and_reject() {
        let c = corpus(POOR);
        let cfg = ScreenConfig::default();
        let cands = screen_candidates(&c, &cfg).unwrap();
        assert_eq!(apply_review(&c, &cfg, &cands, &ReviewList::default()).unwrap(), cands);
        let review = ReviewList::parse("reject\ts:0:1\n").unwrap();
        assert!(apply_review(&c, &cfg, &cands, &review).unwrap().is_empty());
    }

    #[test]
    fn word_reject_and_position_override() {
        let text = "the\tDT\tB-NP\nchief\tJJ\tI-NP\nspoke\tVBD\tB-VP\n\n\
                    the\tDT\tB-NP\nchief\tJJ\tI-NP\nleft\tVBD\tB-VP\n\n\
                    the\tDT\tB-NP\npoor\tJJ\tI-NP\nwait\tVBP\tB-VP\n\n";
        let c = corpus(text);
        let cfg = ScreenConfig::default();
        let cands = screen_candidates(&c, &cfg).unwrap();
        assert_eq!(cands.len(), 3);
        let review = ReviewList::parse("reject\tw:chief\n").unwrap();
        assert_eq!(positions(&apply_review(&c, &cfg, &cands, &review).unwrap()), vec![(2, 1)]);
        let review = ReviewList::parse("reject\tw:chief\naccept\ts:1:1\n").unwrap();
        assert_eq!(
            positions(&apply_review(&c, &cfg, &cands, &review).unwrap()),
            vec![(1, 1), (2, 1)]
        );
    }

    #[test]
    fn position_accept_adds_or_fails() {
        let c = corpus(PEOPLE);
        let cfg = ScreenConfig::default();
        let review = ReviewList::parse("# manual\naccept\ts:0:1\n").unwrap();
        assert_eq!(
            apply_review(&c, &cfg, &[], &review).unwrap(),
            vec![CandidateRef::new(0, 1, "JJ")]
        );
        let review = ReviewList::parse("accept\ts:0:2\n").unwrap();
        assert!(matches!(apply_review(&c, &cfg, &[], &review), Err(Error::Validation(_))));
        let review = ReviewList::parse("accept\ts:4:0\n").unwrap();
        assert!(apply_review(&c, &cfg, &[], &review).is_err());
    }

    #[test]
    fn review_parse_errors() {
        assert!(ReviewList::parse("maybe\tw:x\n").is_err());
        assert!(ReviewList::parse("accept\tq:x\n").is_err());
        assert!(ReviewList::parse("accept\ts:1\n").is_err());
        assert!(ReviewList::parse("accept w:x\n").is_err());
    }

    #[test]
    fn jn_relabel() {
        let c = corpus(POOR);
        assert_eq!(apply_jn_relabel(&c, &[]).unwrap(), c);
        let cands = screen_candidates(&c, &ScreenConfig::default()).unwrap();
        let r = apply_jn_relabel(&c, &cands).unwrap();
        assert_eq!(r.sentences[0].tokens[1].pos, "JN");
        assert_eq!(r.sentences[0].tokens[1].word, "poor");
        assert_eq!(r.sentences[0].tokens[1].bio, "I-NP");
        assert!(screen_candidates(&r, &ScreenConfig::default()).unwrap().is_empty());
        assert_eq!(restore_original_pos(&r, &cands).unwrap(), c);
    }

    #[test]
    fn relabel_rejects_bad_references() {
        let c = corpus(POOR);
        let dangling = [CandidateRef::new(0, 9, "JJ")];
        assert!(matches!(apply_jn_relabel(&c, &dangling), Err(Error::Validation(_))));
        let stale = [CandidateRef::new(0, 0, "JJ")];
        assert!(apply_jn_relabel(&c, &stale).is_err());
        let dup = [CandidateRef::new(0, 1, "JJ"), CandidateRef::new(0, 1, "JJ")];
        assert!(apply_jn_relabel(&c, &dup).is_err());
    }

    #[test]
    fn jj2nn_relabel() {
        let text = "the\tDT\tB-NP\ngifted\tJJ\tI-NP\n\nthe\tDT\tB-NP\neldest\tJJS\tI-NP\n\n";
        let c = corpus(text);
        let map = default_jj2nn_mapping();
        assert_eq!(apply_jj2nn_relabel(&c, &[], &map).unwrap(), c);
        let cands = screen_candidates(&c, &ScreenConfig::default()).unwrap();
        let r = apply_jj2nn_relabel(&c, &cands, &map).unwrap();
        assert_eq!(r.sentences[0].tokens[1].pos, "NN");
        assert_eq!(r.sentences[1].tokens[1].pos, "NNS");
        let mut partial = BTreeMap::new();
        partial.insert("JJ".to_string(), "NN".to_string());
        assert!(matches!(apply_jj2nn_relabel(&c, &cands, &partial), Err(Error::Config(_))));
    }

    #[test]
    fn relabel_touches_only_candidate_lines() {
        let c = corpus(&format!("{POOR}{RICH}{PEOPLE}"));
        let cands = screen_candidates(&c, &ScreenConfig::default()).unwrap();
        let before = write_pos_chunk(&c);
        let after = write_pos_chunk(&apply_jn_relabel(&c, &cands).unwrap());
        let changed = before.lines().zip(after.lines()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, cands.len());
    }

    #[test]
    fn stats() {
        assert!(screening_stats(&[]).is_empty());
        let mut cands = Vec::new();
        for i in 0..500 {
            cands.push(CandidateRef::new(i, 0, "JJ"));
        }
        for i in 0..483 {
            cands.push(CandidateRef::new(i, 1, "JJS"));
        }
        for i in 0..17 {
            cands.push(CandidateRef::new(i, 2, "JJR"));
        }
        let h = screening_stats(&cands);
        assert!((h.fraction_of(&["JJ", "JJS"]) - 0.983).abs() < 1e-12);
        assert!((h.fraction("JJR") - 0.017).abs() < 1e-12);
        assert!((h.fractions().values().sum::<f64>() - 1.0).abs() < 1e-12);

        let h = screening_stats(&[
            CandidateRef::new(0, 0, "JJ"),
            CandidateRef::new(1, 0, "JJ"),
            CandidateRef::new(2, 0, "JJS"),
            CandidateRef::new(3, 0, "JJS"),
        ]);
        assert_eq!(h.fraction("JJ"), 0.5);
        assert_eq!(h.fraction("JJS"), 0.5);
    }

    #[test]
    fn candidate_export_round_trip() {
        let c = corpus(&format!("{POOR}{RICH}"));
        let cands = screen_candidates(&c, &ScreenConfig::default()).unwrap();
        let text = write_candidates(&c, &cands).unwrap();
        assert_eq!(text, "0\t1\tpoor\tJJ\n1\t2\trich\tJJ\n");
        assert_eq!(read_candidates(&text, &c).unwrap(), cands);
        assert!(read_candidates("0\t1\trich\tJJ\n", &c).is_err());
        assert!(read_candidates("7\t1\tpoor\tJJ\n", &c).is_err());
    }
}
