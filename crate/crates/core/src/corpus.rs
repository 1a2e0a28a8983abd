//! Reading, writing and restructuring pos-chunk corpora.
//!
//! A pos-chunk file holds one token per line as `word<TAB>pos<TAB>bio`, with a
//! blank line after every sentence. Chunk tags are either `O` or a `B-`/`I-`
//! prefix followed by the chunk type. Two encodings are understood:
//!
//! * IOB1: a chunk normally starts with `I-`; `B-` only marks the first token
//!   of a chunk that directly follows another chunk of the same type.
//! * IOB2: every chunk starts with `B-`.
//!
//! Tags are stored verbatim together with the declared scheme. Use
//! [`normalize_bio`] to move between encodings; the extracted chunk spans are
//! unchanged by it.

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Iob1,
    Iob2,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Iob1 => "iob1",
            Scheme::Iob2 => "iob2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iob1" => Ok(Scheme::Iob1),
            "iob2" => Ok(Scheme::Iob2),
            _ => Err(Error::Config(format!("unknown BIO scheme `{s}`"))),
        }
    }
}

/// A decoded chunk tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bio<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

impl<'a> Bio<'a> {
    pub fn parse(tag: &'a str) -> Option<Self> {
        if tag == "O" {
            return Some(Bio::Outside);
        }
        let (prefix, chunk_type) = tag.split_once('-')?;
        if chunk_type.is_empty() {
            return None;
        }
        match prefix {
            "B" => Some(Bio::Begin(chunk_type)),
            "I" => Some(Bio::Inside(chunk_type)),
            _ => None,
        }
    }

    pub fn chunk_type(self) -> Option<&'a str> {
        match self {
            Bio::Outside => None,
            Bio::Begin(t) | Bio::Inside(t) => Some(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub word: String,
    pub pos: String,
    pub bio: String,
}

impl Token {
    pub fn new(word: impl Into<String>, pos: impl Into<String>, bio: impl Into<String>) -> Self {
        Token {
            word: word.into(),
            pos: pos.into(),
            bio: bio.into(),
        }
    }

    /// Checks the structural rules for a single token.
    pub fn validate(&self) -> std::result::Result<(), String> {
        fn field_ok(s: &str) -> bool {
            !s.is_empty() && !s.contains(['\t', '\r', '\n'])
        }
        if !field_ok(&self.word) {
            return Err(format!("invalid word {:?}", self.word));
        }
        if !field_ok(&self.pos) {
            return Err(format!("invalid POS tag {:?}", self.pos));
        }
        if Bio::parse(&self.bio).is_none() {
            return Err(format!("invalid BIO tag {:?}", self.bio));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.word.as_str()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub scheme: Scheme,
}

impl Corpus {
    /// Builds a corpus, checking every token and the chunk structure.
    pub fn new(sentences: Vec<Sentence>, scheme: Scheme) -> Result<Self> {
        for (si, s) in sentences.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Validation(format!("sentence {si} is empty")));
            }
            for (ti, t) in s.tokens.iter().enumerate() {
                t.validate()
                    .map_err(|m| Error::Validation(format!("sentence {si}, token {ti}: {m}")))?;
            }
            extract_chunks(s, si, scheme)?;
        }
        Ok(Corpus { sentences, scheme })
    }

    pub fn empty(scheme: Scheme) -> Self {
        Corpus {
            sentences: Vec::new(),
            scheme,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn token(&self, sentence: usize, token: usize) -> Option<&Token> {
        self.sentences.get(sentence)?.tokens.get(token)
    }

    /// All chunk spans, sentence by sentence.
    pub fn chunks(&self) -> Result<Vec<ChunkSpan>> {
        let mut out = Vec::new();
        for (si, s) in self.sentences.iter().enumerate() {
            out.extend(extract_chunks(s, si, self.scheme)?);
        }
        Ok(out)
    }

    /// The sentences at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            scheme: self.scheme,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkSpan {
    pub sentence_index: usize,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub chunk_type: String,
}

impl ChunkSpan {
    pub fn contains(&self, token: usize) -> bool {
        self.start <= token && token <= self.end
    }
}

/// Parses pos-chunk text. See [`read_pos_chunk`].
pub fn parse_pos_chunk(input: &str, scheme: Option<Scheme>) -> Result<Corpus> {
    read_pos_chunk(input.as_bytes(), scheme)
}

/// Reads a pos-chunk stream.
///
/// Without an explicit `scheme`, the encoding is detected: a `B-X` tag that
/// opens a chunk not directly preceded by an `X` chunk only occurs in IOB2,
/// so its presence selects IOB2; otherwise the file is read as IOB1.
pub fn read_pos_chunk<R: BufRead>(reader: R, scheme: Option<Scheme>) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut line_numbers: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    let mut current_lines = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(Sentence::new(std::mem::take(&mut current)));
                line_numbers.push(std::mem::take(&mut current_lines));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let token = Token::new(fields[0], fields[1], fields[2]);
        token.validate().map_err(|m| Error::parse(lineno, m))?;
        current.push(token);
        current_lines.push(lineno);
    }
    if !current.is_empty() {
        sentences.push(Sentence::new(current));
        line_numbers.push(current_lines);
    }

    let scheme = scheme.unwrap_or_else(|| detect_scheme(&sentences));
    for (si, s) in sentences.iter().enumerate() {
        if let Err(e) = extract_chunks(s, si, scheme) {
            let line = match &e {
                Error::Validation(_) => first_illegal_inside(s)
                    .map(|ti| line_numbers[si][ti])
                    .unwrap_or(line_numbers[si][0]),
                _ => line_numbers[si][0],
            };
            return Err(Error::parse(line, e.to_string()));
        }
    }
    Ok(Corpus { sentences, scheme })
}

/// Reads a pos-chunk file from disk.
pub fn read_pos_chunk_file(path: &Path, scheme: Option<Scheme>) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_pos_chunk(std::io::BufReader::new(file), scheme).map_err(|e| e.with_file(path))
}

fn detect_scheme(sentences: &[Sentence]) -> Scheme {
    for s in sentences {
        let mut prev: Option<&str> = None;
        for t in &s.tokens {
            let bio = Bio::parse(&t.bio).unwrap_or(Bio::Outside);
            if let Bio::Begin(ty) = bio {
                if prev != Some(ty) {
                    return Scheme::Iob2;
                }
            }
            prev = bio.chunk_type();
        }
    }
    Scheme::Iob1
}

fn first_illegal_inside(s: &Sentence) -> Option<usize> {
    let mut prev: Option<&str> = None;
    for (i, t) in s.tokens.iter().enumerate() {
        let bio = Bio::parse(&t.bio)?;
        if let Bio::Inside(ty) = bio {
            if prev != Some(ty) {
                return Some(i);
            }
        }
        prev = bio.chunk_type();
    }
    None
}

/// Serializes a corpus in pos-chunk format. Tags are written verbatim.
pub fn write_pos_chunk(corpus: &Corpus) -> String {
    let mut out = String::with_capacity(corpus.token_count() * 16);
    for s in &corpus.sentences {
        for t in &s.tokens {
            out.push_str(&t.word);
            out.push('\t');
            out.push_str(&t.pos);
            out.push('\t');
            out.push_str(&t.bio);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn write_pos_chunk_file(path: &Path, corpus: &Corpus) -> Result<()> {
    std::fs::write(path, write_pos_chunk(corpus)).map_err(|e| Error::io(path, e))
}

/// Maximal chunk spans of one sentence, ordered by start.
pub fn extract_chunks(
    sentence: &Sentence,
    sentence_index: usize,
    scheme: Scheme,
) -> Result<Vec<ChunkSpan>> {
    let mut spans = Vec::new();
    let mut open: Option<ChunkSpan> = None;
    for (i, t) in sentence.tokens.iter().enumerate() {
        let bio = Bio::parse(&t.bio).ok_or_else(|| {
            Error::Validation(format!(
                "sentence {sentence_index}, token {i}: invalid BIO tag {:?}",
                t.bio
            ))
        })?;
        let continues = match (&open, bio) {
            (Some(span), Bio::Inside(ty)) => span.chunk_type == ty,
            _ => false,
        };
        if continues {
            if let Some(span) = open.as_mut() {
                span.end = i;
            }
            continue;
        }
        if let Some(span) = open.take() {
            spans.push(span);
        }
        match bio {
            Bio::Outside => {}
            Bio::Inside(ty) if scheme == Scheme::Iob2 => {
                return Err(Error::Validation(format!(
                    "sentence {sentence_index}, token {i}: I-{ty} does not continue an {ty} chunk"
                )));
            }
            Bio::Begin(ty) | Bio::Inside(ty) => {
                open = Some(ChunkSpan {
                    sentence_index,
                    start: i,
                    end: i,
                    chunk_type: ty.to_string(),
                });
            }
        }
    }
    spans.extend(open);
    Ok(spans)
}

/// Encodes chunk spans of a `len`-token sentence as BIO tags.
pub fn encode_chunks(len: usize, spans: &[ChunkSpan], scheme: Scheme) -> Vec<String> {
    let mut tags = vec!["O".to_string(); len];
    let mut prev_end: Option<(usize, &str)> = None;
    for span in spans {
        let adjacent_same = matches!(prev_end, Some((e, ty)) if e + 1 == span.start && ty == span.chunk_type);
        let first = match scheme {
            Scheme::Iob2 => "B",
            Scheme::Iob1 if adjacent_same => "B",
            Scheme::Iob1 => "I",
        };
        tags[span.start] = format!("{first}-{}", span.chunk_type);
        for tag in &mut tags[span.start + 1..=span.end] {
            *tag = format!("I-{}", span.chunk_type);
        }
        prev_end = Some((span.end, span.chunk_type.as_str()));
    }
    tags
}

/// Re-encodes every sentence's chunk tags under `target`.
pub fn normalize_bio(corpus: &Corpus, target: Scheme) -> Result<Corpus> {
    let mut sentences = Vec::with_capacity(corpus.sentences.len());
    for (si, s) in corpus.sentences.iter().enumerate() {
        let spans = extract_chunks(s, si, corpus.scheme)?;
        let tags = encode_chunks(s.len(), &spans, target);
        let tokens = s
            .tokens
            .iter()
            .zip(tags)
            .map(|(t, bio)| Token {
                word: t.word.clone(),
                pos: t.pos.clone(),
                bio,
            })
            .collect();
        sentences.push(Sentence { tokens });
    }
    Ok(Corpus {
        sentences,
        scheme: target,
    })
}

/// Deterministic sentence partition used by [`split_corpus`].
///
/// The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64(seed)`.
/// Indices `0..n` are shuffled by Fisher-Yates running from the last slot
/// down, drawing slot `j = next_u64() % (i + 1)` for slot `i`. The first
/// `round(train_fraction * n)` shuffled indices (clamped to `1..=n-1`) form
/// the training part. Both parts are returned in ascending index order.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::Validation(format!(
            "cannot split a corpus of {n} sentence(s)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits sentences into (train, test) parts.
pub fn split_corpus(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let (train, test) = split_indices(corpus.len(), train_fraction, seed)?;
    Ok((corpus.subset(&train), corpus.subset(&test)))
}
