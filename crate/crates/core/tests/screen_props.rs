use std::collections::BTreeSet;

use jntag::corpus::{normalize_bio, Corpus, Scheme, Sentence, Token};
use jntag::screen::{apply_jn_relabel, screen_candidates, ScreenConfig};
use proptest::prelude::*;

const POS: &[&str] = &["DT", "RB", "RBR", "JJ", "JJS", "JJR", "NN", "NNS", "VBD", "IN"];
const BIO: &[&str] = &["B-NP", "I-NP", "I-NP", "O", "B-VP", "B-PP"];

fn corpus() -> impl Strategy<Value = Corpus> {
    let token = (0..POS.len(), 0..BIO.len()).prop_map(|(p, b)| Token::new("x", POS[p], BIO[b]));
    prop::collection::vec(prop::collection::vec(token, 1..12), 1..6).prop_map(|ss| {
        let sentences = ss
            .into_iter()
            .map(|mut toks| {
                for i in 0..toks.len() {
                    if toks[i].bio == "I-NP" && (i == 0 || !toks[i - 1].bio.ends_with("-NP")) {
                        toks[i].bio = "B-NP".into();
                    }
                }
                Sentence::new(toks)
            })
            .collect();
        Corpus::new(sentences, Scheme::Iob2).unwrap()
    })
}

fn config() -> impl Strategy<Value = ScreenConfig> {
    (0..3usize, any::<bool>(), any::<bool>(), prop::collection::btree_set(0..POS.len(), 0..3)).prop_map(
        |(max_adverbs, include_jjr, require_np_final, forbidden)| ScreenConfig {
            max_adverbs,
            include_jjr,
            require_np_final,
            forbidden_next_pos: forbidden.into_iter().map(|i| POS[i].to_string()).collect(),
            ..ScreenConfig::default()
        },
    )
}

// Direct reading of the rule on IOB2 tags, one clause at a time.
fn accepted(tokens: &[Token], i: usize, cfg: &ScreenConfig) -> bool {
    let pos = |j: usize| tokens[j].pos.as_str();
    let is = |set: &BTreeSet<String>, j: usize| set.contains(pos(j));
    let adjective = ["JJ", "JJS"].contains(&pos(i)) || (cfg.include_jjr && pos(i) == "JJR");
    if !adjective || !tokens[i].bio.ends_with("-NP") {
        return false;
    }
    let mut start = i;
    while tokens[start].bio == "I-NP" {
        start -= 1;
    }
    let last_in_chunk = i + 1 == tokens.len() || tokens[i + 1].bio != "I-NP";
    if cfg.require_np_final && !last_in_chunk {
        return false;
    }
    if i + 1 < tokens.len() && is(&cfg.forbidden_next_pos, i + 1) {
        return false;
    }
    let before: Vec<usize> = (start..i).rev().collect();
    let adverbs = before.iter().take_while(|&&j| is(&cfg.adverb_tags, j)).count();
    if adverbs > cfg.max_adverbs {
        return false;
    }
    match before.get(adverbs) {
        Some(&d) if is(&cfg.determiner_tags, d) => !(d > start && is(&cfg.determiner_tags, d - 1)),
        _ => false,
    }
}

proptest! {
    #[test]
    fn screener_matches_clause_by_clause_check(c in corpus(), cfg in config()) {
        let got: Vec<(usize, usize)> = screen_candidates(&c, &cfg)
            .unwrap()
            .iter()
            .map(|r| (r.sentence_index, r.token_index))
            .collect();
        let mut expected = Vec::new();
        for (si, s) in c.sentences.iter().enumerate() {
            for ti in 0..s.len() {
                if accepted(&s.tokens, ti, &cfg) {
                    expected.push((si, ti));
                }
            }
        }
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn screening_ignores_bio_encoding(c in corpus(), cfg in config()) {
        let one = normalize_bio(&c, Scheme::Iob1).unwrap();
        prop_assert_eq!(screen_candidates(&c, &cfg).unwrap(), screen_candidates(&one, &cfg).unwrap());
    }

    #[test]
    fn relabeled_corpus_screens_empty(c in corpus()) {
        let cfg = ScreenConfig::default();
        let cands = screen_candidates(&c, &cfg).unwrap();
        let jn = apply_jn_relabel(&c, &cands).unwrap();
        let again = screen_candidates(&jn, &cfg).unwrap();
        prop_assert!(again.is_empty(), "{:?}", again);
    }
}
