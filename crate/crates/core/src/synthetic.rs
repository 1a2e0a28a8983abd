//! Seeded toy grammar for desk-scale experiments.
//!
//! Sentences are built chunk by chunk (NP, VP, PP, ADJP) and encoded in the
//! requested BIO scheme. A small fraction of NPs are headed by an adjective
//! (`the poor`, `the very rich`, `the richest`); the rest are ordinary NPs,
//! some of which reuse the same adjectives as modifiers (`the poor people`).

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{encode_chunks, ChunkSpan, Corpus, Scheme, Sentence, Token};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    /// Generation stops at the first sentence boundary at or past this count.
    pub tokens: usize,
    /// Target share of tokens that head an adjective-headed NP.
    pub nominal_rate: f64,
    pub scheme: Scheme,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tokens: 50_000,
            nominal_rate: 0.001,
            scheme: Scheme::Iob1,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    /// Planted adjective heads, as (sentence, token).
    pub nominal_positions: Vec<(usize, usize)>,
}

// Roughly one NP slot per this many tokens in the grammar below.
const TOKENS_PER_NP: f64 = 3.2;

const DETERMINERS: &[&str] = &["the", "the", "the", "a", "this", "that", "every", "some"];
const PLURAL_DETERMINERS: &[&str] = &["the", "these", "those", "some", "the"];
const PRONOUNS: &[&str] = &["he", "she", "they", "it", "we"];
const PROPER: &[&str] = &["Smith", "Jones", "Acme", "Boston", "Chicago", "Garcia", "Lee", "Texas"];
const NOUNS: &[&str] = &[
    "man", "woman", "company", "market", "city", "report", "plan", "government", "child", "house",
    "bank", "school", "price", "group", "year", "week", "side", "law", "deal", "team",
];
const PLURALS: &[&str] = &[
    "people", "families", "workers", "prices", "shares", "children", "officials", "investors",
    "voters", "students", "homes", "taxes",
];
const ADJECTIVES: &[&str] = &[
    "big", "new", "old", "small", "local", "major", "strong", "public", "recent", "good", "left",
    "poor", "rich", "young", "high", "low", "early", "federal",
];
const SUPERLATIVES: &[&str] = &["largest", "best", "biggest", "latest"];
const COMPARATIVES: &[&str] = &["larger", "better", "higher"];
// Adjectives that can head an NP on their own.
const NOMINAL_JJ: &[&str] = &[
    "poor", "rich", "elderly", "young", "wealthy", "homeless", "unemployed", "sick", "injured",
    "innocent", "disabled",
];
const NOMINAL_JJS: &[&str] = &["richest", "poorest", "youngest", "weakest"];
const INTENSIFIERS: &[&str] = &["very", "extremely", "most", "truly"];
const ADVERBS: &[&str] = &["quickly", "also", "still", "recently", "never", "often"];
const PAST_VERBS: &[&str] = &["saw", "bought", "sold", "left", "helped", "found", "took", "made"];
const PRESENT_VERBS: &[&str] = &["sees", "buys", "sells", "helps", "finds", "takes", "makes", "needs"];
const BASE_VERBS: &[&str] = &["see", "buy", "sell", "help", "find", "take", "make", "need"];
const PARTICIPLES: &[&str] = &["seen", "bought", "sold", "left", "helped", "found", "taken", "made"];
const MODALS: &[&str] = &["will", "could", "may", "should"];
const COPULAS: &[(&str, &str)] = &[("is", "VBZ"), ("was", "VBD"), ("seems", "VBZ")];
const DITRANSITIVE: &[&str] = &["gave", "sent", "offered", "showed"];
const PREPOSITIONS: &[&str] = &["in", "on", "for", "with", "from", "of", "after"];
const SYLLABLES: &[&str] = &["ba", "ko", "ri", "ten", "mo", "la", "pre", "vi", "dar", "sul", "ne", "fo", "gra", "tis"];

struct Lexicon {
    nouns: Vec<String>,
    adjectives: Vec<String>,
    verbs: Vec<String>,
}

fn coin(rng: &mut ChaCha8Rng, suffixes: &[&str], n: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(n);
    while out.len() < n {
        let syl = rng.random_range(2..=3);
        let mut w: String = (0..syl).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        w.push_str(suffixes.choose(rng).unwrap());
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

impl Lexicon {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        Lexicon {
            nouns: coin(rng, &["tion", "ness", "ity", "ment", "ship"], 300),
            adjectives: coin(rng, &["ous", "ive", "al", "ful", "ic"], 150),
            verbs: coin(rng, &["ized", "ated", "ified"], 100),
        }
    }
}

/// Skewed pick: low indices are much more frequent.
fn zipf<'a>(rng: &mut ChaCha8Rng, items: &'a [String]) -> &'a str {
    let u: f64 = rng.random();
    &items[((u * u * u) * items.len() as f64) as usize]
}

type Chunk = (Option<&'static str>, Vec<(String, &'static str)>);

struct Builder<'a> {
    rng: ChaCha8Rng,
    lex: &'a Lexicon,
    nominal_np_prob: f64,
}

fn w(word: &str, pos: &'static str) -> (String, &'static str) {
    (word.to_string(), pos)
}

impl Builder<'_> {
    fn pick(&mut self, items: &[&str]) -> String {
        items.choose(&mut self.rng).unwrap().to_string()
    }

    fn noun(&mut self) -> (String, &'static str) {
        if self.rng.random_bool(0.25) {
            let lex = self.lex;
            (zipf(&mut self.rng, &lex.nouns).to_string(), "NN")
        } else {
            (self.pick(NOUNS), "NN")
        }
    }

    fn adjective(&mut self) -> (String, &'static str) {
        let r: f64 = self.rng.random();
        if r < 0.2 {
            let lex = self.lex;
            (zipf(&mut self.rng, &lex.adjectives).to_string(), "JJ")
        } else if r < 0.25 {
            (self.pick(SUPERLATIVES), "JJS")
        } else if r < 0.28 {
            (self.pick(COMPARATIVES), "JJR")
        } else {
            (self.pick(ADJECTIVES), "JJ")
        }
    }

    /// Returns the NP chunk and, for an adjective-headed NP, the head offset.
    fn np(&mut self, allow_pronoun: bool) -> (Chunk, Option<usize>) {
        if self.rng.random_bool(self.nominal_np_prob) {
            let mut toks = vec![w("the", "DT")];
            if self.rng.random_bool(0.2) {
                toks.push((self.pick(NOMINAL_JJS), "JJS"));
            } else {
                if self.rng.random_bool(0.3) {
                    let adv = self.pick(INTENSIFIERS);
                    let tag = if adv == "most" { "RBS" } else { "RB" };
                    toks.push((adv, tag));
                }
                toks.push((self.pick(NOMINAL_JJ), "JJ"));
            }
            let head = toks.len() - 1;
            return ((Some("NP"), toks), Some(head));
        }
        let r: f64 = self.rng.random();
        let toks = if allow_pronoun && r < 0.12 {
            vec![(self.pick(PRONOUNS), "PRP")]
        } else if r < 0.2 {
            vec![(self.pick(PROPER), "NNP")]
        } else if r < 0.27 {
            // Bare plural, sometimes with an ambiguous modifier: "poor people".
            let mut t = Vec::new();
            if self.rng.random_bool(0.6) {
                t.push((self.pick(NOMINAL_JJ), "JJ"));
            }
            t.push((self.pick(PLURALS), "NNS"));
            t
        } else if r < 0.37 {
            // "the poor people", "the very rich families"
            let mut t = vec![(self.pick(PLURAL_DETERMINERS), "DT")];
            if self.rng.random_bool(0.2) {
                t.push(w("very", "RB"));
            }
            t.push((self.pick(NOMINAL_JJ), "JJ"));
            t.push((self.pick(PLURALS), "NNS"));
            t
        } else if r < 0.42 {
            let mut t = vec![(self.pick(DETERMINERS), "DT")];
            t.push(self.noun());
            t.push(self.noun());
            t
        } else if r < 0.45 {
            vec![w("the", "DT"), w("left", "NN")]
        } else {
            let mut t = vec![(self.pick(DETERMINERS), "DT")];
            let n_adj = [0, 0, 1, 1, 1, 2].choose(&mut self.rng).copied().unwrap();
            if n_adj > 0 && self.rng.random_bool(0.1) {
                t.push((self.pick(INTENSIFIERS), "RB"));
            }
            for _ in 0..n_adj {
                t.push(self.adjective());
            }
            if self.rng.random_bool(0.3) {
                t.push((self.pick(PLURALS), "NNS"));
            } else {
                t.push(self.noun());
            }
            t
        };
        ((Some("NP"), toks), None)
    }

    fn clause(&mut self, chunks: &mut Vec<Chunk>, heads: &mut Vec<(usize, usize)>) {
        self.push_np(chunks, heads, true);
        let r: f64 = self.rng.random();
        if r < 0.12 {
            let (cop, tag) = *COPULAS.choose(&mut self.rng).unwrap();
            chunks.push((Some("VP"), vec![w(cop, tag)]));
            let mut adjp = Vec::new();
            if self.rng.random_bool(0.3) {
                adjp.push((self.pick(INTENSIFIERS), "RB"));
            }
            adjp.push(self.adjective());
            chunks.push((Some("ADJP"), adjp));
        } else if r < 0.18 {
            chunks.push((Some("VP"), vec![(self.pick(DITRANSITIVE), "VBD")]));
            self.push_np(chunks, heads, false);
            self.push_np(chunks, heads, false);
        } else {
            let vp = match self.rng.random_range(0..6) {
                0 => vec![(self.pick(MODALS), "MD"), (self.pick(BASE_VERBS), "VB")],
                1 => vec![w("has", "VBZ"), (self.pick(PARTICIPLES), "VBN")],
                2 => vec![(self.pick(PRESENT_VERBS), "VBZ")],
                3 => {
                    let lex = self.lex;
                    vec![(zipf(&mut self.rng, &lex.verbs).to_string(), "VBD")]
                }
                4 => vec![(self.pick(ADVERBS), "RB"), (self.pick(PAST_VERBS), "VBD")],
                _ => vec![(self.pick(PAST_VERBS), "VBD")],
            };
            chunks.push((Some("VP"), vp));
            if self.rng.random_bool(0.85) {
                self.push_np(chunks, heads, false);
            }
        }
        if self.rng.random_bool(0.45) {
            chunks.push((Some("PP"), vec![(self.pick(PREPOSITIONS), "IN")]));
            self.push_np(chunks, heads, false);
        }
    }

    fn push_np(&mut self, chunks: &mut Vec<Chunk>, heads: &mut Vec<(usize, usize)>, subject: bool) {
        let offset: usize = chunks.iter().map(|c| c.1.len()).sum();
        let (chunk, head) = self.np(subject);
        if let Some(h) = head {
            heads.push((0, offset + h));
        }
        chunks.push(chunk);
    }

    fn sentence(&mut self, scheme: Scheme) -> (Sentence, Vec<usize>) {
        let mut chunks: Vec<Chunk> = Vec::new();
        let mut heads = Vec::new();
        self.clause(&mut chunks, &mut heads);
        if self.rng.random_bool(0.2) {
            chunks.push((None, vec![w(",", ",")]));
            chunks.push((None, vec![w("and", "CC")]));
            self.clause(&mut chunks, &mut heads);
        }
        chunks.push((None, vec![w(".", ".")]));

        let mut spans = Vec::new();
        let mut flat: Vec<(String, &str)> = Vec::new();
        for (ctype, toks) in chunks {
            if let Some(t) = ctype {
                spans.push(ChunkSpan {
                    sentence_index: 0,
                    start: flat.len(),
                    end: flat.len() + toks.len() - 1,
                    chunk_type: t.to_string(),
                });
            }
            flat.extend(toks);
        }
        if let Some(first) = flat.first_mut() {
            let mut c = first.0.chars();
            if let Some(h) = c.next() {
                first.0 = h.to_uppercase().chain(c).collect();
            }
        }
        let bio = encode_chunks(flat.len(), &spans, scheme);
        let tokens = flat
            .into_iter()
            .zip(bio)
            .map(|((word, pos), b)| Token::new(word, pos, b))
            .collect();
        (Sentence::new(tokens), heads.into_iter().map(|(_, t)| t).collect())
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    if !(0.0..=0.25).contains(&config.nominal_rate) {
        return Err(Error::Config("synth nominal_rate must lie in [0, 0.25]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lex = Lexicon::new(&mut rng);
    let mut b = Builder {
        rng,
        lex: &lex,
        nominal_np_prob: (config.nominal_rate * TOKENS_PER_NP).min(1.0),
    };
    let mut sentences = Vec::new();
    let mut nominal_positions = Vec::new();
    let mut count = 0;
    while count < config.tokens {
        let (s, heads) = b.sentence(config.scheme);
        count += s.len();
        nominal_positions.extend(heads.into_iter().map(|t| (sentences.len(), t)));
        sentences.push(s);
    }
    Ok(SynthCorpus {
        corpus: Corpus::new(sentences, config.scheme)?,
        nominal_positions,
    })
}
