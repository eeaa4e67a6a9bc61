use proptest::prelude::*;

use trendlens_core::text::{filter_stopwords, tokenize, StopwordList, StopwordTier, TokenStream};

fn stream(tokens: &[&str]) -> TokenStream {
    TokenStream {
        doc_id: "d".into(),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
    }
}

proptest! {
    #[test]
    fn tokenize_is_idempotent(text in "\\PC{0,80}") {
        let once = tokenize(&text);
        prop_assert_eq!(tokenize(&once.join(" ")), once.clone());
        prop_assert!(once.iter().all(|t| !t.is_empty() && t.chars().all(char::is_alphanumeric)));
    }

    #[test]
    fn filtering_is_idempotent_and_keeps_order(
        tokens in prop::collection::vec("[a-e]{1,2}", 0..30),
        stops in prop::collection::btree_set("[a-e]{1,2}", 0..8),
    ) {
        let list = StopwordList::from_entries(StopwordTier::Generated, stops.iter()).unwrap();
        let s = TokenStream { doc_id: "d".into(), tokens: tokens.clone() };
        let once = filter_stopwords(&s, &[&list]);
        prop_assert_eq!(filter_stopwords(&once, &[&list]), once.clone());
        let expected: Vec<String> = tokens.into_iter().filter(|t| !stops.contains(t)).collect();
        prop_assert_eq!(once.tokens, expected);
    }
}

#[test]
fn tokenizer_examples() {
    assert_eq!(tokenize("Deep-Learning, (AI)!"), ["deep", "learning", "ai"]);
    assert!(tokenize("").is_empty());
    assert_eq!(tokenize("Word2Vec model v2.0"), ["word2vec", "model", "v2", "0"]);
}

#[test]
fn two_tier_filtering() {
    let base = StopwordList::from_entries(StopwordTier::Base, ["for", "the"]).unwrap();
    let generated = StopwordList::from_entries(StopwordTier::Generated, ["method"]).unwrap();
    let out = filter_stopwords(&stream(&["method", "for", "detecting", "threats"]), &[&base, &generated]);
    assert_eq!(out.tokens, ["detecting", "threats"]);
    let same = stream(&["the", "neural", "network"]);
    assert_eq!(filter_stopwords(&same, &[]), same);
}

#[test]
fn stopword_files() {
    let list = StopwordList::parse("a\nb\n# note\nb\n", StopwordTier::Curated).unwrap();
    assert_eq!(list.entries(), ["a", "b"]);
    assert!(StopwordList::parse("ok\nnot ok\n", StopwordTier::Curated).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curated.txt");
    list.save(&path).unwrap();
    assert_eq!(StopwordList::load(&path, StopwordTier::Curated).unwrap(), list);

    let bundled = StopwordList::bundled_english();
    assert_eq!(bundled.tier(), StopwordTier::Base);
    assert_eq!(bundled.len(), 318);
    assert!(bundled.contains("the") && !bundled.contains("patent"));
}
