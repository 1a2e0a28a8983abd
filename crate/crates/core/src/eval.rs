//! Scoring predicted corpora against gold corpora.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::corpus::{ChunkSpan, Corpus, Token};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    Pos,
    Bio,
}

impl Column {
    fn get(self, t: &Token) -> &str {
        match self {
            Column::Pos => &t.pos,
            Column::Bio => &t.bio,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Column::Pos => "pos",
            Column::Bio => "bio",
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" => Ok(Column::Pos),
            "bio" => Ok(Column::Bio),
            _ => Err(Error::Config(format!("unknown column `{s}` (expected pos or bio)"))),
        }
    }
}

/// Harmonic mean, zero when both inputs are zero.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TagScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Precision or recall had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

impl TagScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { None } else { Some(num as f64 / den as f64) };
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fn_);
        let (precision, recall) = (p.unwrap_or(0.0), r.unwrap_or(0.0));
        TagScore {
            precision,
            recall,
            f1: f1(precision, recall),
            support: tp + fn_,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            degenerate: p.is_none() || r.is_none(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChunkScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

/// Fails unless both corpora have the same sentences, lengths and words.
pub fn check_alignment(gold: &Corpus, pred: &Corpus) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    for (si, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Alignment(format!(
                "sentence {si}: gold has {} tokens, prediction has {}",
                g.len(),
                p.len()
            )));
        }
        for (ti, (a, b)) in g.tokens.iter().zip(&p.tokens).enumerate() {
            if a.word != b.word {
                return Err(Error::Alignment(format!(
                    "sentence {si}, token {ti}: `{}` vs `{}`",
                    a.word, b.word
                )));
            }
        }
    }
    Ok(())
}

fn aligned_tokens<'a>(gold: &'a Corpus, pred: &'a Corpus) -> impl Iterator<Item = (&'a Token, &'a Token)> {
    gold.tokens().zip(pred.tokens())
}

pub fn token_accuracy(gold: &Corpus, pred: &Corpus, column: Column) -> Result<f64> {
    check_alignment(gold, pred)?;
    let total = gold.token_count();
    if total == 0 {
        return Ok(0.0);
    }
    let correct = aligned_tokens(gold, pred)
        .filter(|(g, p)| column.get(g) == column.get(p))
        .count();
    Ok(correct as f64 / total as f64)
}

fn confusion<'a, I>(pairs: I, tag: &str, column: Column) -> TagScore
where
    I: Iterator<Item = (&'a Token, &'a Token)>,
{
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in pairs {
        match (column.get(g) == tag, column.get(p) == tag) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    TagScore::from_counts(tp, fp, fn_)
}

/// Precision, recall and F1 for one tag over every token.
pub fn per_tag_prf(gold: &Corpus, pred: &Corpus, tag: &str, column: Column) -> Result<TagScore> {
    check_alignment(gold, pred)?;
    Ok(confusion(aligned_tokens(gold, pred), tag, column))
}

/// Like [`per_tag_prf`] but counting only the given (sentence, token) positions.
pub fn per_tag_prf_at(
    gold: &Corpus,
    pred: &Corpus,
    tag: &str,
    column: Column,
    positions: &[(usize, usize)],
) -> Result<TagScore> {
    check_alignment(gold, pred)?;
    let pairs = subset_pairs(gold, pred, positions)?;
    Ok(confusion(pairs.into_iter(), tag, column))
}

fn subset_pairs<'a>(
    gold: &'a Corpus,
    pred: &'a Corpus,
    positions: &[(usize, usize)],
) -> Result<Vec<(&'a Token, &'a Token)>> {
    let unique: BTreeSet<(usize, usize)> = positions.iter().copied().collect();
    unique
        .into_iter()
        .map(|(s, t)| match (gold.token(s, t), pred.token(s, t)) {
            (Some(g), Some(p)) => Ok((g, p)),
            _ => Err(Error::Alignment(format!("position s:{s}:{t} is outside the corpus"))),
        })
        .collect()
}

/// Span-exact chunk precision, recall and F1.
pub fn chunk_prf(gold: &Corpus, pred: &Corpus) -> Result<ChunkScores> {
    check_alignment(gold, pred)?;
    let gold_spans: HashSet<ChunkSpan> = gold.chunks()?.into_iter().collect();
    let pred_spans = pred.chunks()?;
    let correct = pred_spans.iter().filter(|s| gold_spans.contains(s)).count();
    let precision = if pred_spans.is_empty() { 0.0 } else { correct as f64 / pred_spans.len() as f64 };
    let recall = if gold_spans.is_empty() { 0.0 } else { correct as f64 / gold_spans.len() as f64 };
    Ok(ChunkScores {
        precision,
        recall,
        f1: f1(precision, recall),
        gold: gold_spans.len(),
        predicted: pred_spans.len(),
        correct,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub column: Column,
    pub tokens: usize,
    pub correct_tokens: usize,
    pub token_accuracy: f64,
    /// Every tag seen in gold or prediction.
    pub per_tag: BTreeMap<String, TagScore>,
    /// Chunk scores, for the BIO column.
    pub chunk: Option<ChunkScores>,
    /// Per-tag scores restricted to a set of positions (screened candidates).
    pub subset: BTreeMap<String, TagScore>,
}

/// Full report for one run. `subset` restricts the extra per-tag table to
/// the given positions.
pub fn evaluate(
    gold: &Corpus,
    pred: &Corpus,
    column: Column,
    subset: Option<&[(usize, usize)]>,
) -> Result<EvalReport> {
    check_alignment(gold, pred)?;
    let tokens = gold.token_count();
    let correct_tokens = aligned_tokens(gold, pred)
        .filter(|(g, p)| column.get(g) == column.get(p))
        .count();
    let tags: BTreeSet<&str> = aligned_tokens(gold, pred)
        .flat_map(|(g, p)| [column.get(g), column.get(p)])
        .collect();
    let per_tag = tags
        .iter()
        .map(|t| (t.to_string(), confusion(aligned_tokens(gold, pred), t, column)))
        .collect();
    let chunk = match column {
        Column::Bio => Some(chunk_prf(gold, pred)?),
        Column::Pos => None,
    };
    let mut subset_scores = BTreeMap::new();
    if let Some(positions) = subset {
        let pairs = subset_pairs(gold, pred, positions)?;
        let subset_tags: BTreeSet<&str> = pairs
            .iter()
            .flat_map(|(g, p)| [column.get(g), column.get(p)])
            .collect();
        for t in subset_tags {
            subset_scores.insert(t.to_string(), confusion(pairs.iter().copied(), t, column));
        }
    }
    Ok(EvalReport {
        column,
        tokens,
        correct_tokens,
        token_accuracy: if tokens == 0 { 0.0 } else { correct_tokens as f64 / tokens as f64 },
        per_tag,
        chunk,
        subset: subset_scores,
    })
}

impl EvalReport {
    /// Flat metric map used for comparisons and key:value export.
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("accuracy".to_string(), self.token_accuracy);
        if let Some(c) = &self.chunk {
            m.insert("chunk.precision".into(), c.precision);
            m.insert("chunk.recall".into(), c.recall);
            m.insert("chunk.f1".into(), c.f1);
        }
        for (prefix, table) in [("tag", &self.per_tag), ("subset", &self.subset)] {
            for (tag, s) in table {
                m.insert(format!("{prefix}.{tag}.precision"), s.precision);
                m.insert(format!("{prefix}.{tag}.recall"), s.recall);
                m.insert(format!("{prefix}.{tag}.f1"), s.f1);
                m.insert(format!("{prefix}.{tag}.support"), s.support as f64);
            }
        }
        m
    }

    /// `key: value` lines.
    pub fn to_key_values(&self, prefix: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{prefix}column: {}", self.column);
        let _ = writeln!(out, "{prefix}tokens: {}", self.tokens);
        let _ = writeln!(out, "{prefix}correct_tokens: {}", self.correct_tokens);
        for (k, v) in self.metrics() {
            let _ = writeln!(out, "{prefix}{k}: {v:.6}");
        }
        out
    }

    /// Per-tag table, tab separated.
    pub fn per_tag_tsv(&self) -> String {
        let mut out = String::from("scope\ttag\tprecision\trecall\tf1\tsupport\tdegenerate\n");
        for (scope, table) in [("all", &self.per_tag), ("subset", &self.subset)] {
            for (tag, s) in table {
                let _ = writeln!(
                    out,
                    "{scope}\t{tag}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}",
                    s.precision, s.recall, s.f1, s.support, s.degenerate
                );
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaValue {
    /// Present in both runs; `difference = modified - baseline`.
    Changed { baseline: f64, modified: f64, difference: f64 },
    /// Only in the modified run.
    Added { modified: f64 },
    /// Only in the baseline run.
    Removed { baseline: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaRow {
    pub metric: String,
    pub value: DeltaValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaReport {
    pub baseline: EvalReport,
    pub modified: EvalReport,
    pub rows: Vec<DeltaRow>,
}

pub fn compare_runs(baseline: &EvalReport, modified: &EvalReport) -> Result<DeltaReport> {
    if baseline.column != modified.column {
        return Err(Error::Comparison(format!(
            "cannot compare a {} run with a {} run",
            baseline.column, modified.column
        )));
    }
    if baseline.chunk.is_some() != modified.chunk.is_some() {
        return Err(Error::Comparison("only one run has chunk scores".into()));
    }
    if baseline.tokens != modified.tokens {
        return Err(Error::Comparison(format!(
            "runs were scored on {} and {} tokens",
            baseline.tokens, modified.tokens
        )));
    }
    let b = baseline.metrics();
    let m = modified.metrics();
    let keys: BTreeSet<&String> = b.keys().chain(m.keys()).collect();
    let rows = keys
        .into_iter()
        .map(|k| {
            let value = match (b.get(k), m.get(k)) {
                (Some(&x), Some(&y)) => DeltaValue::Changed {
                    baseline: x,
                    modified: y,
                    difference: y - x,
                },
                (None, Some(&y)) => DeltaValue::Added { modified: y },
                (Some(&x), None) => DeltaValue::Removed { baseline: x },
                (None, None) => unreachable!("key comes from one of the maps"),
            };
            DeltaRow {
                metric: k.clone(),
                value,
            }
        })
        .collect();
    Ok(DeltaReport {
        baseline: baseline.clone(),
        modified: modified.clone(),
        rows,
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn signed_pct(x: f64) -> String {
    format!("{:+.2}", 100.0 * x)
}

impl DeltaReport {
    pub fn row(&self, metric: &str) -> Option<&DeltaValue> {
        self.rows.iter().find(|r| r.metric == metric).map(|r| &r.value)
    }

    fn summary_cells(report: &EvalReport) -> [String; 4] {
        match &report.chunk {
            Some(c) => [pct(report.token_accuracy), pct(c.precision), pct(c.recall), pct(c.f1)],
            None => [pct(report.token_accuracy), "-".into(), "-".into(), "-".into()],
        }
    }

    fn table_rows(&self) -> Vec<[String; 5]> {
        let b = Self::summary_cells(&self.baseline);
        let m = Self::summary_cells(&self.modified);
        let mut diff = [signed_pct(self.modified.token_accuracy - self.baseline.token_accuracy), "-".into(), "-".into(), "-".into()];
        if let (Some(cb), Some(cm)) = (&self.baseline.chunk, &self.modified.chunk) {
            diff[1] = signed_pct(cm.precision - cb.precision);
            diff[2] = signed_pct(cm.recall - cb.recall);
            diff[3] = signed_pct(cm.f1 - cb.f1);
        }
        let mk = |name: &str, cells: [String; 4]| {
            let [a, p, r, f] = cells;
            [name.to_string(), a, p, r, f]
        };
        vec![
            ["Model".into(), "Accuracy (%)".into(), "Precision (%)".into(), "Recall (%)".into(), "F1 Score (%)".into()],
            mk("Baseline", b),
            mk("Modified", m),
            mk("Difference", diff),
        ]
    }

    /// Baseline / Modified / Difference summary, tab separated. Precision,
    /// recall and F1 are chunk scores and show `-` for POS runs.
    pub fn summary_tsv(&self) -> String {
        self.table_rows()
            .iter()
            .map(|r| r.join("\t") + "\n")
            .collect()
    }

    /// The same summary with aligned columns.
    pub fn summary_text(&self) -> String {
        let rows = self.table_rows();
        let widths: Vec<usize> = (0..5)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Every metric: `metric<TAB>baseline<TAB>modified<TAB>difference`.
    pub fn rows_tsv(&self) -> String {
        let mut out = String::from("metric\tbaseline\tmodified\tdifference\n");
        for r in &self.rows {
            let _ = match r.value {
                DeltaValue::Changed { baseline, modified, difference } => {
                    writeln!(out, "{}\t{baseline:.6}\t{modified:.6}\t{difference:+.6}", r.metric)
                }
                DeltaValue::Added { modified } => writeln!(out, "{}\t-\t{modified:.6}\tadded", r.metric),
                DeltaValue::Removed { baseline } => writeln!(out, "{}\t{baseline:.6}\t-\tremoved", r.metric),
            };
        }
        out
    }

    /// `key: value` export for scripted checks.
    pub fn to_key_values(&self, prefix: &str) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = match r.value {
                DeltaValue::Changed { baseline, modified, difference } => writeln!(
                    out,
                    "{prefix}{m}.baseline: {baseline:.6}\n{prefix}{m}.modified: {modified:.6}\n{prefix}{m}.difference: {difference:+.6}",
                    m = r.metric
                ),
                DeltaValue::Added { modified } => {
                    writeln!(out, "{prefix}{m}.modified: {modified:.6}\n{prefix}{m}.status: added", m = r.metric)
                }
                DeltaValue::Removed { baseline } => {
                    writeln!(out, "{prefix}{m}.baseline: {baseline:.6}\n{prefix}{m}.status: removed", m = r.metric)
                }
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_pos_chunk, Scheme, Sentence};

    fn corpus(tokens: &[(&str, &str, &str)]) -> Corpus {
        Corpus::new(
            vec![Sentence::new(tokens.iter().map(|(w, p, b)| Token::new(*w, *p, *b)).collect())],
            Scheme::Iob2,
        )
        .unwrap()
    }

    fn with_pos(tags: &[&str]) -> Corpus {
        let toks: Vec<(String, &str)> = tags.iter().enumerate().map(|(i, t)| (format!("w{i}"), *t)).collect();
        let refs: Vec<(&str, &str, &str)> = toks.iter().map(|(w, t)| (w.as_str(), *t, "O")).collect();
        corpus(&refs)
    }

    #[test]
    fn accuracy() {
        let g = with_pos(&["DT", "NN", "VB", "JJ"]);
        assert_eq!(token_accuracy(&g, &g, Column::Pos).unwrap(), 1.0);
        let p = with_pos(&["DT", "NN", "VB", "NN"]);
        assert_eq!(token_accuracy(&g, &p, Column::Pos).unwrap(), 0.75);
    }

    #[test]
    fn alignment_errors() {
        let g = with_pos(&["DT", "NN"]);
        let p = with_pos(&["DT"]);
        assert!(matches!(token_accuracy(&g, &p, Column::Pos), Err(Error::Alignment(_))));
        let mut q = g.clone();
        q.sentences[0].tokens[0].word = "other".into();
        assert!(matches!(per_tag_prf(&g, &q, "DT", Column::Pos), Err(Error::Alignment(_))));
    }

    #[test]
    fn absent_tag_is_degenerate_zero() {
        let g = with_pos(&["DT", "NN"]);
        let s = per_tag_prf(&g, &g, "JN", Column::Pos).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.support), (0.0, 0.0, 0.0, 0));
        assert!(s.degenerate);
    }

    #[test]
    fn hand_confusion_counts() {
        let g = with_pos(&["X", "X", "Y", "Y", "Z"]);
        let p = with_pos(&["X", "X", "X", "X", "Z"]);
        let s = per_tag_prf(&g, &p, "X", Column::Pos).unwrap();
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.support, 2);
        assert!(!s.degenerate);
    }

    #[test]
    fn f1_of_rounded_scores() {
        assert!((f1(0.94, 0.52) - 0.669_589).abs() < 1e-6);
        assert_eq!(format!("{:.2}", f1(0.94, 0.52)), "0.67");
    }

    #[test]
    fn subset_scores() {
        let g = with_pos(&["JJ", "JJ", "JJ", "NN"]);
        let p = with_pos(&["JJ", "NN", "JJ", "JJ"]);
        let s = per_tag_prf_at(&g, &p, "JJ", Column::Pos, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!((s.precision, s.recall), (1.0, 0.5));
        assert!(per_tag_prf_at(&g, &p, "JJ", Column::Pos, &[(3, 0)]).is_err());
    }

    const GOLD: &str = "the\tDT\tB-NP\ncat\tNN\tI-NP\nsaw\tVBD\tB-VP\na\tDT\tB-NP\ndog\tNN\tI-NP\n\n";

    #[test]
    fn chunk_scores() {
        let g = parse_pos_chunk(GOLD, None).unwrap();
        let c = chunk_prf(&g, &g).unwrap();
        assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        // First NP exact, second shifted to start at "saw".
        let shifted = GOLD.replace("saw\tVBD\tB-VP", "saw\tVBD\tB-NP").replace("a\tDT\tB-NP", "a\tDT\tI-NP");
        let p = parse_pos_chunk(&shifted, None).unwrap();
        let gold_np_only = GOLD.replace("saw\tVBD\tB-VP", "saw\tVBD\tO");
        let g2 = parse_pos_chunk(&gold_np_only, None).unwrap();
        let c = chunk_prf(&g2, &p).unwrap();
        assert_eq!((c.gold, c.predicted, c.correct), (2, 2, 1));
        assert_eq!((c.precision, c.recall, c.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn chunk_scores_ignore_encoding() {
        let g = parse_pos_chunk(GOLD, None).unwrap();
        let g1 = crate::corpus::normalize_bio(&g, Scheme::Iob1).unwrap();
        let c = chunk_prf(&g1, &g).unwrap();
        assert_eq!(c.f1, 1.0);
    }

    fn report(acc: f64) -> EvalReport {
        EvalReport {
            column: Column::Bio,
            tokens: 10,
            correct_tokens: 0,
            token_accuracy: acc,
            per_tag: BTreeMap::new(),
            chunk: Some(ChunkScores { precision: 0.9328, recall: 0.9384, f1: 0.9356, gold: 1, predicted: 1, correct: 1 }),
            subset: BTreeMap::new(),
        }
    }

    #[test]
    fn identical_reports_have_zero_delta() {
        let g = parse_pos_chunk(GOLD, None).unwrap();
        let r = evaluate(&g, &g, Column::Bio, None).unwrap();
        let d = compare_runs(&r, &r).unwrap();
        for row in &d.rows {
            match row.value {
                DeltaValue::Changed { difference, .. } => assert_eq!(difference, 0.0),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn table_difference() {
        let d = compare_runs(&report(0.9749), &report(0.9751)).unwrap();
        match d.row("accuracy").unwrap() {
            DeltaValue::Changed { difference, .. } => assert!((difference - 0.0002).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let tsv = d.summary_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "Model\tAccuracy (%)\tPrecision (%)\tRecall (%)\tF1 Score (%)");
        assert_eq!(lines[1], "Baseline\t97.49\t93.28\t93.84\t93.56");
        assert_eq!(lines[2], "Modified\t97.51\t93.28\t93.84\t93.56");
        assert_eq!(lines[3], "Difference\t+0.02\t+0.00\t+0.00\t+0.00");
        assert!(d.summary_text().starts_with("Model       Accuracy (%)"));
        assert!(d.to_key_values("").contains("accuracy.difference: +0.000200"));
    }

    #[test]
    fn tags_present_in_one_run_are_added_or_removed() {
        let g = with_pos(&["JJ", "NN"]);
        let gm = with_pos(&["JN", "NN"]);
        let base = evaluate(&g, &g, Column::Pos, None).unwrap();
        let modi = evaluate(&gm, &gm, Column::Pos, None).unwrap();
        let d = compare_runs(&base, &modi).unwrap();
        assert!(matches!(d.row("tag.JN.f1"), Some(DeltaValue::Added { .. })));
        assert!(matches!(d.row("tag.JJ.f1"), Some(DeltaValue::Removed { .. })));
        assert!(d.rows_tsv().contains("tag.JN.f1\t-\t1.000000\tadded"));
    }

    #[test]
    fn mismatched_reports_fail() {
        let g = with_pos(&["JJ", "NN"]);
        let pos = evaluate(&g, &g, Column::Pos, None).unwrap();
        let bio = evaluate(&g, &g, Column::Bio, None).unwrap();
        assert!(matches!(compare_runs(&pos, &bio), Err(Error::Comparison(_))));
        let small = evaluate(&with_pos(&["JJ"]), &with_pos(&["JJ"]), Column::Pos, None).unwrap();
        assert!(compare_runs(&pos, &small).is_err());
    }

    #[test]
    fn true_positives_sum_to_correct_tokens() {
        let g = with_pos(&["A", "B", "B", "C", "A"]);
        let p = with_pos(&["A", "B", "C", "C", "B"]);
        let r = evaluate(&g, &p, Column::Pos, None).unwrap();
        let tp: usize = r.per_tag.values().map(|s| s.true_positives).sum();
        assert_eq!(tp, r.correct_tokens);
        for s in r.per_tag.values() {
            assert!((s.f1 - f1(s.precision, s.recall)).abs() < 1e-12);
        }
    }
}
