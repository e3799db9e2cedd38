use std::collections::BTreeSet;

use explainbot_core::corpus::{
    corpus_stats, filter_corpus, intent_flow, load_corpus, parse_log, taxonomy_table, Conversation, CorpusError,
    LogTurn, LogWriter, QueryType, Report, Taxonomy, TOTAL_LABEL,
};
use explainbot_core::nlu::EntitySet;
use proptest::prelude::*;
use QueryType::*;

fn turn(session: &str, ts: u64, text: &str, intent: &str) -> LogTurn {
    LogTurn {
        session_id: session.into(),
        timestamp: ts,
        user_text: text.into(),
        intent: intent.into(),
        entities: EntitySet::default(),
        reply_text: "ok".into(),
    }
}

fn conv(id: &str, texts: &[&str]) -> Conversation {
    Conversation {
        session_id: id.into(),
        turns: texts.iter().enumerate().map(|(i, t)| turn(id, i as u64, t, "fallback")).collect(),
    }
}

fn conv_of_len(id: usize, n: usize) -> Conversation {
    conv(&id.to_string(), &vec!["hi"; n])
}

const GOLDEN: &[(&str, QueryType)] = &[
    ("why?", Why),
    ("explain it to me", Why),
    ("how was this calculated?", Why),
    ("why is my chance so low?", Why),
    ("what if I'm older?", WhatIf),
    ("what if I travelled in the 1st class?", WhatIf),
    ("What if I'm older and travel in a different class?", WhatIf),
    ("what do you know about me", WhatDoYouKnow),
    ("feature distribution", Eda),
    ("maximum values", Eda),
    ("plot histogram for the variable v", Eda),
    ("describe the data", Eda),
    ("summarize the data", Eda),
    ("is dataset imbalanced", Eda),
    ("how many women survived", Eda),
    ("dataset size", Eda),
    ("Which are the most important variable(s)?", FeatureImportance),
    ("Does gender influence the survival chance?", FeatureImportance),
    ("How does age influence my survival", FeatureImportance),
    ("What makes me more likely to survive?", FeatureImportance),
    ("How does age influence survival across all passengers?", FeatureImportance),
    ("what should I do to survive", HowToImprove),
    ("how can I increase my chances", HowToImprove),
    ("which class has the highest survival chance", ClassComparison),
    ("are men more likely to die than women", ClassComparison),
    ("who survived", BestScore),
    ("who died", BestScore),
    ("who survived/died", BestScore),
    ("who is most likely to survive", BestScore),
    ("what algorithm is this", ModelRelated),
    ("show me the code", ModelRelated),
    ("what is the accuracy", ModelRelated),
    ("what is the AUC", ModelRelated),
    ("show the confusion matrix", ModelRelated),
    ("how confident are you", ModelRelated),
    ("why are the predictions for Jack and Rose different", Contrastive),
    ("what about other passengers", Contrastive),
    ("what about Jack", Contrastive),
    ("zoom in on the plot", PlotInteraction),
    ("what does this chart show", PlotInteraction),
    ("what about people similar to me", SimilarObservations),
];

#[test]
fn golden_phrases_get_exactly_their_type() {
    let tax = Taxonomy::bundled();
    let mut wrong = vec![];
    for &(text, t) in GOLDEN {
        let got = tax.tag_query(text);
        if got != BTreeSet::from([t]) {
            wrong.push(format!("{text:?}: {got:?}"));
        }
    }
    assert!(wrong.is_empty(), "{wrong:#?}");
    assert!(tax.tag_query("hello").is_empty());
    assert!(tax.tag_query("").is_empty());
    let covered: BTreeSet<QueryType> = GOLDEN.iter().map(|g| g.1).collect();
    assert_eq!(covered.len(), 12);
}

#[test]
fn table_counts_each_conversation_once() {
    let tax = Taxonomy::bundled();
    let table = taxonomy_table(&tax, &[conv("a", &["why?", "why is my chance so low", "explain it to me"])]);
    assert_eq!(table[0], (Why, 1));
    let table = taxonomy_table(&tax, &[conv("a", &["why", "what if I'm older"]), conv("b", &["why?"])]);
    assert_eq!(table[0], (Why, 2));
    assert_eq!(table[1], (WhatIf, 1));
    let empty = taxonomy_table(&tax, &[]);
    assert_eq!(empty.len(), 12);
    assert!(empty.iter().all(|r| r.1 == 0));
    assert_eq!(empty.iter().map(|r| r.0).collect::<Vec<_>>(), QueryType::ALL.to_vec());
}

#[test]
fn filter_and_stats_examples() {
    let cs: Vec<Conversation> = [2, 3, 5].iter().enumerate().map(|(i, &n)| conv_of_len(i, n)).collect();
    let kept: Vec<usize> = filter_corpus(&cs, 3, false).iter().map(Conversation::len).collect();
    assert_eq!(kept, vec![3, 5]);
    assert_eq!(filter_corpus(&cs, 0, false), cs);
    assert!(filter_corpus(&cs, 0, true).is_empty());
    let mut understood = conv("u", &["hi", "why"]);
    understood.turns[1].intent = "break_down".into();
    assert_eq!(filter_corpus(&[understood.clone()], 0, true), vec![understood]);

    let cs: Vec<Conversation> = [3, 7, 83].iter().enumerate().map(|(i, &n)| conv_of_len(i, n)).collect();
    let s = corpus_stats(&cs);
    assert_eq!((s.n_dialogues, s.n_queries, s.max_length), (3, 93, 83));
    assert_eq!((s.mean_length, s.median_length), (Some(31.0), Some(7.0)));
    assert_eq!(s.buckets[0].lo, 3);
    assert_eq!(s.buckets[0].hi, 7);
    assert_eq!(s.buckets[0].count, 2);
    assert_eq!(s.buckets.last().unwrap().hi, 87);
    assert_eq!(s.buckets.iter().map(|b| b.count).sum::<usize>(), 3);

    let s = corpus_stats(&[conv_of_len(0, 5)]);
    assert_eq!((s.mean_length, s.median_length, s.max_length), (Some(5.0), Some(5.0), 5));
    let s = corpus_stats(&[conv_of_len(0, 2), conv_of_len(1, 5)]);
    assert_eq!(s.median_length, Some(3.5));
    assert_eq!((s.buckets[0].lo, s.buckets[0].hi, s.buckets[0].count), (1, 2, 1));
    let s = corpus_stats(&[]);
    assert_eq!((s.mean_length, s.median_length), (None, None));
}

#[test]
fn flow_examples() {
    let mut c = conv("a", &["hi", "im 20", "chances?"]);
    for (t, i) in c.turns.iter_mut().zip(["greeting", "set_age", "predict"]) {
        t.intent = i.into();
    }
    let edges = intent_flow(std::slice::from_ref(&c), 2);
    let got: Vec<(Vec<&str>, usize)> = edges.iter().map(|e| (e.path.iter().map(String::as_str).collect(), e.count)).collect();
    assert_eq!(got, vec![(vec!["greeting", "set_age"], 1), (vec!["set_age", "predict"], 1)]);
    assert_eq!(intent_flow(&[c.clone()], 1).iter().map(|e| e.count).sum::<usize>(), 3);
    assert!(intent_flow(&[], 2).is_empty());
    assert!(intent_flow(&[c], 4).is_empty());
}

#[test]
fn load_examples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    let mut w = LogWriter::open(&path).unwrap();
    for (s, ts) in [("a", 5), ("b", 1), ("a", 2), ("a", 9), ("b", 3)] {
        w.append(&turn(s, ts, "hi", "greeting")).unwrap();
    }
    drop(w);
    let c = load_corpus(&path).unwrap();
    assert_eq!(c.conversations.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![3, 2]);
    assert_eq!(c.conversations[0].turns.iter().map(|t| t.timestamp).collect::<Vec<_>>(), vec![2, 5, 9]);
    assert_eq!(c.malformed, 0);

    let mut text = std::fs::read_to_string(&path).unwrap();
    text.insert_str(0, "garbage\n");
    let c = parse_log(&text);
    assert_eq!(c.malformed, 1);
    assert_eq!(c.conversations.len(), 2);

    std::fs::write(&path, "\n\nnot json\n").unwrap();
    assert!(matches!(load_corpus(&path), Err(CorpusError::NoData)));
}

#[test]
fn log_lines_use_declared_field_names() {
    let line = serde_json::to_value(turn("s", 7, "hi", "greeting")).unwrap();
    let keys: BTreeSet<&str> = line.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, BTreeSet::from(["session_id", "timestamp", "user_text", "intent", "entities", "reply_text"]));
}

#[test]
fn report_text_and_json() {
    let c = parse_log(
        &[
            turn("a", 1, "hello", "greeting"),
            turn("a", 2, "why?", "break_down"),
            turn("a", 3, "what if I'm older", "ceteris_paribus"),
            turn("b", 1, "hi", "greeting"),
        ]
        .iter()
        .map(|t| serde_json::to_string(t).unwrap() + "\n")
        .collect::<String>(),
    );
    let r = Report::build(&c, &Taxonomy::bundled(), 3, false, 2);
    assert_eq!(r.summary_line(), "1 dialogues, 3 queries, mean 3.00, median 3, max 3");
    let text = r.to_text();
    assert!(text.contains(&format!("{TOTAL_LABEL}  1")));
    assert!(text.contains("what-if"));
    assert!(text.contains("1  break_down -> ceteris_paribus"));
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["query_types"][1]["query_type"], "what-if");
    assert_eq!(json["query_types"][1]["dialogues_count"], 1);
    assert_eq!(json["number_of_all_analyzed_dialogues"], 1);
}

fn corpus_strategy() -> impl Strategy<Value = Vec<Conversation>> {
    let texts = prop::sample::select(
        GOLDEN.iter().map(|g| g.0).chain(["hello", "i am 20", "bye"]).collect::<Vec<_>>(),
    );
    prop::collection::vec(prop::collection::vec(texts, 1..12), 0..15).prop_map(|cs| {
        cs.into_iter().enumerate().map(|(i, ts)| conv(&i.to_string(), &ts)).collect()
    })
}

proptest! {
    #[test]
    fn corpus_properties(cs in corpus_strategy(), lo in 0usize..8, extra in 0usize..5) {
        let tax = Taxonomy::bundled();
        let table = taxonomy_table(&tax, &cs);
        prop_assert!(table.iter().all(|r| r.1 <= cs.len()));
        prop_assert!(filter_corpus(&cs, lo + extra, false).len() <= filter_corpus(&cs, lo, false).len());
        let s = corpus_stats(&cs);
        prop_assert_eq!(s.n_queries, s.histogram.iter().map(|b| b.length * b.count).sum::<usize>());
        prop_assert_eq!(s.n_dialogues, s.buckets.iter().map(|b| b.count).sum::<usize>());
        if let Some(m) = s.mean_length {
            prop_assert!((m * s.n_dialogues as f64 - s.n_queries as f64).abs() < 1e-9);
        }
        let total: usize = cs.iter().map(Conversation::len).sum();
        prop_assert_eq!(intent_flow(&cs, 1).iter().map(|e| e.count).sum::<usize>(), total);
        for c in &cs {
            for t in &c.turns {
                prop_assert_eq!(tax.tag_query(&t.user_text), tax.tag_query(&t.user_text));
            }
        }
    }
}
