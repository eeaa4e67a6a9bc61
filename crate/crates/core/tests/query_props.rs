use proptest::prelude::*;

use trendlens_core::corpus::{read_jsonl, PatentDocument};
use trendlens_core::query::{eval_query, parse_query, QueryError, QueryExpr};

const WORDS: [&str; 6] = ["deep", "learning", "neural", "network", "medical", "chain"];

fn phrase() -> impl Strategy<Value = QueryExpr> {
    (prop::collection::vec(prop::sample::select(&WORDS[..]), 1..4), any::<bool>(), 1usize..6).prop_map(
        |(mut words, wildcard, cut)| {
            let mut owned: Vec<String> = words.drain(..).map(str::to_string).collect();
            if wildcard {
                let last = owned.last_mut().unwrap();
                last.truncate(cut.min(last.len()));
            }
            QueryExpr::Phrase {
                text: owned.join(" "),
                wildcard,
            }
        },
    )
}

fn expr() -> impl Strategy<Value = QueryExpr> {
    phrase().prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| QueryExpr::and(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| QueryExpr::or(l, r)),
        ]
    })
}

fn oracle(expr: &QueryExpr, doc: &[&str]) -> bool {
    match expr {
        QueryExpr::Phrase { text, wildcard } => {
            let p: Vec<&str> = text.split(' ').collect();
            doc.len() >= p.len()
                && (0..=doc.len() - p.len()).any(|s| {
                    p.iter().enumerate().all(|(k, w)| {
                        if *wildcard && k + 1 == p.len() {
                            doc[s + k].starts_with(w)
                        } else {
                            doc[s + k] == *w
                        }
                    })
                })
        }
        QueryExpr::And(l, r) => oracle(l, doc) && oracle(r, doc),
        QueryExpr::Or(l, r) => oracle(l, doc) || oracle(r, doc),
    }
}

fn doc(text: &str) -> PatentDocument {
    PatentDocument {
        id: "x".into(),
        industry: "medical".into(),
        year: 2021,
        title: String::new(),
        abstract_text: text.into(),
    }
}

proptest! {
    #[test]
    fn canonical_form_round_trips(e in expr()) {
        let text = e.to_canonical();
        prop_assert_eq!(parse_query(&text).unwrap(), e);
    }

    #[test]
    fn eval_matches_oracle(e in expr(), tokens in prop::collection::vec(prop::sample::select(&WORDS[..]), 0..10)) {
        prop_assert_eq!(eval_query(&e, &doc(&tokens.join(" "))), oracle(&e, &tokens));
    }
}

#[test]
fn precedence_and_examples() {
    assert_eq!(
        parse_query("'medical' OR 'healthcare'").unwrap(),
        QueryExpr::or(QueryExpr::phrase("medical"), QueryExpr::phrase("healthcare"))
    );
    assert_eq!(
        parse_query("a OR b AND c").unwrap(),
        QueryExpr::or(QueryExpr::phrase("a"), QueryExpr::and(QueryExpr::phrase("b"), QueryExpr::phrase("c")))
    );
    let e = parse_query("Deep Learn*").unwrap();
    assert!(eval_query(&e, &doc("a deep learning method")));
    let e = parse_query("'cyber security'").unwrap();
    assert!(!eval_query(&e, &doc("cybersecurity tools")));
    let e = parse_query("('medical' OR 'healthcare') AND Neural Network").unwrap();
    assert!(eval_query(&e, &doc("neural network for healthcare")));
}

#[test]
fn errors_carry_offsets() {
    assert!(matches!(parse_query(""), Err(QueryError::EmptyQuery)));
    assert!(matches!(parse_query("(a OR b"), Err(QueryError::UnbalancedParen(_))));
    assert!(matches!(parse_query("'open"), Err(QueryError::UnterminatedQuote(_))));
    assert!(matches!(parse_query("a AND"), Err(QueryError::DanglingOperator { .. })));
}

#[test]
fn corpus_filter_equals_brute_force() {
    let text = [
        r#"{"id":"1","industry":"medical","year":2019,"title":"Deep learning triage","abstract":"neural network for healthcare"}"#,
        r#"{"id":"2","industry":"security","year":2020,"title":"Intrusion","abstract":"machine learning for cyber security"}"#,
        r#"{"id":"3","industry":"factory","year":2020,"title":"Scheduler","abstract":"rule based supply chain planning"}"#,
        r#"{"id":"4","industry":"transport","year":2021,"title":"Routing","abstract":"deep reinforcement learning for transport"}"#,
    ]
    .join("\n");
    let corpus = read_jsonl(text.as_bytes()).unwrap();
    let q = parse_query("(Deep Learn* OR Machine Learn*) AND ('healthcare' OR 'security', 'transport')").unwrap();
    let filtered = corpus.filter(&q);
    let kept: Vec<&str> = filtered.documents().iter().map(|d| d.id.as_str()).collect();
    let brute: Vec<&str> = corpus.documents().iter().filter(|d| eval_query(&q, d)).map(|d| d.id.as_str()).collect();
    assert_eq!(kept, brute);
    assert_eq!(kept, ["1", "2"]);
    assert!(corpus.filter(&parse_query("'blockchain'").unwrap()).is_empty());
}
