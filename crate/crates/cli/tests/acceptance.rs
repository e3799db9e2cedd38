//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use explainbot_core::corpus::{
    corpus_stats, filter_corpus, load_corpus, taxonomy_table, LogTurn, LogWriter, QueryType, Taxonomy,
};
use explainbot_core::dialogue::{handle_turn, Assets, Deps, Persona, SessionState};
use explainbot_core::explain::{break_down, ceteris_paribus, grid_for, Background, Grid};
use explainbot_core::forest::{fit, ForestParams, SplitSpec};
use explainbot_core::nlu::{parse_labeled, ContextTag, Nlu, NluContext, BUNDLED_LABELED};
use explainbot_core::tabular::{bundled_titanic, split, Schema, VariableDef, VariableKind};
use explainbot_core::{bundled_forest, Dataset, Forest};
use explainbot_service::{load, router, AppState, LoadOptions, ServiceConfig};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

type Q = Ratio<i64>;
type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model_quality() -> Check {
    let start = Instant::now();
    let ds: Dataset = bundled_titanic();
    let params = ForestParams::defaults_for(ds.schema().len());
    let fitted = fit(&ds, SplitSpec { seed: 42, test_fraction: 0.25 }, params).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let m = fitted.forest.meta.metrics.unwrap();
    let auc = m.auc.ok_or("no AUC")?;
    ensure((0.80..=0.88).contains(&auc), || format!("AUC {auc:.4} outside [0.80, 0.88]"))?;
    ensure((0.67..=0.79).contains(&m.f1), || format!("F1 {:.4} outside [0.67, 0.79]", m.f1))?;
    ensure(secs < 60.0, || format!("training took {secs:.1} s"))?;
    Ok(format!("AUC {auc:.4}, F1 {:.4}, {secs:.1} s", m.f1))
}

/// Uniform random complete row within the schema bounds.
fn random_row(schema: &Schema, rng: &mut ChaCha8Rng) -> Vec<f64> {
    schema
        .variables()
        .iter()
        .map(|v| match &v.kind {
            VariableKind::Numeric { min, max } => rng.random_range(*min..=*max),
            VariableKind::Categorical { levels } => rng.random_range(0..levels.len()) as f64,
        })
        .collect()
}

fn forest_setup() -> (Forest, Dataset, Dataset) {
    let forest = bundled_forest();
    let data: Dataset = bundled_titanic();
    let (train, _) = split(&data, 0.25, 42).unwrap();
    (forest, data, train)
}

const ADDITIVITY_BACKGROUND: usize = 25;

fn break_down_additivity() -> Check {
    let (forest, _, train) = forest_setup();
    let imp = forest.meta.imputer.clone().unwrap();
    let bg = Background::sample(&train, &imp, ADDITIVITY_BACKGROUND, 42);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let row = random_row(forest.schema(), &mut rng);
        let bd = break_down(|r: &[f64]| forest.predict_row(r), &bg, &row).map_err(|e| e.to_string())?;
        let gap = (bd.reconstructed() - bd.prediction).abs();
        worst = worst.max(gap);
        ensure(gap < 1e-9, || format!("observation {i}: gap {gap:e}"))?;
        ensure(bd.prediction == forest.predict_row(&row), || format!("observation {i}: prediction differs"))?;
    }
    Ok(format!("1000 observations, {ADDITIVITY_BACKGROUND}-row background, max gap {worst:e}"))
}

fn toy_schema(n: usize) -> Arc<Schema> {
    let vars = (0..n).map(|i| VariableDef::numeric(&format!("x{}", i + 1), -100.0, 100.0, "")).collect();
    Arc::new(Schema::new(vars, "y").unwrap())
}

fn mean_with(predict: &dyn Fn(&[Q]) -> Q, rows: &[Vec<Q>], obs: &[Q], fixed: &[usize]) -> Q {
    let sum: Q = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            for &j in fixed {
                r[j] = obs[j];
            }
            predict(&r)
        })
        .fold(Q::from_integer(0), |a, b| a + b);
    sum / Q::from_integer(rows.len() as i64)
}

/// Tries every remaining variable at each step and keeps the largest
/// absolute change, lowest index on ties.
fn exhaustive_greedy(predict: &dyn Fn(&[Q]) -> Q, rows: &[Vec<Q>], obs: &[Q]) -> Vec<(usize, Q)> {
    let mut fixed = vec![];
    let mut current = mean_with(predict, rows, obs, &fixed);
    let mut out = vec![];
    while fixed.len() < obs.len() {
        let mut best: Option<(usize, Q, Q)> = None;
        for j in (0..obs.len()).filter(|j| !fixed.contains(j)) {
            let mut f = fixed.clone();
            f.push(j);
            let m = mean_with(predict, rows, obs, &f);
            let d = m - current;
            let abs = if d < Q::from_integer(0) { -d } else { d };
            if best.as_ref().is_none_or(|b| abs > b.2) {
                best = Some((j, m, abs));
            }
        }
        let (j, m, _) = best.unwrap();
        out.push((j, m - current));
        fixed.push(j);
        current = m;
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

fn small_q(rng: &mut ChaCha8Rng) -> Q {
    Q::new(rng.random_range(-12..=12), rng.random_range(1..=4))
}

fn break_down_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..200 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=8);
        // arbitrary function of values in {0, 1, 2}: a random lookup table
        let table: Vec<Q> = (0..27).map(|_| small_q(&mut rng)).collect();
        let predict = move |r: &[Q]| {
            let idx = r.iter().fold(0usize, |acc, x| acc * 3 + x.to_integer() as usize);
            table[idx]
        };
        let rows: Vec<Vec<Q>> = (0..m).map(|_| (0..n).map(|_| Q::from_integer(rng.random_range(0..3))).collect()).collect();
        let obs: Vec<Q> = (0..n).map(|_| Q::from_integer(rng.random_range(0..3))).collect();
        let bd = break_down(predict.clone(), &Background::new(toy_schema(n), rows.clone()), &obs).map_err(|e| e.to_string())?;
        let got: Vec<(usize, Q)> = bd.steps.iter().map(|s| (s.var, s.contribution)).collect();
        let want = exhaustive_greedy(&predict, &rows, &obs);
        ensure(got == want, || format!("trial {trial}: greedy {got:?} vs oracle {want:?}"))?;
    }
    for trial in 0..200 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=8);
        let beta: Vec<Q> = (0..n).map(|_| small_q(&mut rng)).collect();
        let b0 = small_q(&mut rng);
        let predict = move |r: &[Q]| r.iter().zip(&beta).fold(b0, |a, (x, b)| a + *x * *b);
        let rows: Vec<Vec<Q>> = (0..m).map(|_| (0..n).map(|_| small_q(&mut rng)).collect()).collect();
        let obs: Vec<Q> = (0..n).map(|_| small_q(&mut rng)).collect();
        let bd = break_down(predict.clone(), &Background::new(toy_schema(n), rows.clone()), &obs).map_err(|e| e.to_string())?;
        let got: BTreeMap<usize, Q> = bd.steps.iter().map(|s| (s.var, s.contribution)).collect();
        for order in permutations(n) {
            let mut fixed = vec![];
            let mut current = mean_with(&predict, &rows, &obs, &fixed);
            for &j in &order {
                fixed.push(j);
                let next = mean_with(&predict, &rows, &obs, &fixed);
                ensure(got[&j] == next - current, || format!("additive trial {trial}: order {order:?}, var {j}"))?;
                current = next;
            }
        }
    }
    Ok("200 random models match the exhaustive oracle, 200 additive models match every ordering".into())
}

fn ceteris_paribus_identity() -> Check {
    let (forest, _, train) = forest_setup();
    let imp = forest.meta.imputer.clone().unwrap();
    let schema = forest.schema_arc();
    let names: Vec<String> = schema.names().map(str::to_string).collect();
    let grids: Vec<Grid<f64>> = names.iter().map(|n| grid_for(&train, n).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..1000 {
        let obs = schema.decode_complete(&random_row(&schema, &mut rng));
        let (row, imputed) = imp.impute_row(&schema.encode(&obs).map_err(|e| e.to_string())?.row);
        ensure(imputed.is_empty(), || "random observation needed imputation".into())?;
        let var = rng.random_range(0..names.len());
        let cp = ceteris_paribus(|r: &[f64]| forest.predict_row(r), &schema, &row, grids[var].clone())
            .map_err(|e| e.to_string())?;
        let p = forest.predict_proba(&obs, &imp).map_err(|e| e.to_string())?;
        let at = cp.predictions[cp.observed_index()];
        ensure(at == p && cp.observed_prediction == p, || format!("pair {i} ({}): {at} vs {p}", names[var]))?;
    }
    for (var, name) in names.iter().enumerate() {
        let ignore = |r: &[f64]| {
            let mut r = r.to_vec();
            r[var] = 0.0;
            forest.predict_row(&r)
        };
        for _ in 0..10 {
            let row = random_row(&schema, &mut rng);
            let cp = ceteris_paribus(ignore, &schema, &row, grids[var].clone()).map_err(|e| e.to_string())?;
            let max = cp.predictions.iter().cloned().fold(f64::MIN, f64::max);
            let min = cp.predictions.iter().cloned().fold(f64::MAX, f64::min);
            ensure(max - min == 0.0, || format!("{name}: ignored variable moves the profile by {}", max - min))?;
        }
    }
    Ok("1000 pairs exact, flat profiles for ignored variables".into())
}

fn nlu_golden() -> Check {
    let nlu = Nlu::bundled(&Schema::titanic());
    let idle = NluContext::default();
    let m = nlu.classify("What If I had been older?", &idle);
    ensure(m.intent == "ceteris_paribus" && m.entities.variable.as_deref() == Some("age"), || format!("{m:?}"))?;
    let m = nlu.classify("I'm 20 year old woman", &idle);
    ensure(
        m.intent == "multi_slot_filling"
            && m.entities.gender.as_deref() == Some("female")
            && m.entities.numbers.first().map(|n| n.value) == Some(20.0),
        || format!("{m:?}"),
    )?;
    let m = nlu.classify("Which feature is the most important?", &idle);
    ensure(m.intent == "break_down", || format!("{m:?}"))?;
    for (slot, intent) in [("age", "set_age"), ("fare", "set_fare")] {
        let m = nlu.classify("20", &NluContext::prompt(ContextTag::Slot(slot.into())));
        ensure(m.intent == intent, || format!("bare 20 while asking {slot}: {}", m.intent))?;
    }
    let labeled = parse_labeled(BUNDLED_LABELED);
    let mut per_intent: HashMap<&str, usize> = HashMap::new();
    let mut correct = 0;
    for (want, text) in &labeled {
        *per_intent.entry(want).or_default() += 1;
        if nlu.classify(text, &idle).intent == *want {
            correct += 1;
        }
    }
    ensure(labeled.len() == 120, || format!("{} labeled utterances", labeled.len()))?;
    ensure(per_intent.values().all(|&n| n >= 5), || format!("{per_intent:?}"))?;
    let acc = correct as f64 / labeled.len() as f64;
    ensure(acc >= 0.9, || format!("accuracy {acc:.3}"))?;
    Ok(format!("headline and context examples exact, labeled accuracy {acc:.3} ({correct}/120)"))
}

fn replay_determinism() -> Check {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/replay_20.jsonl");
    let recorded = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let schema = Schema::titanic();
    let deps = Deps::for_forest(bundled_forest(), bundled_titanic(), Assets::bundled(&schema)).map_err(|e| e.to_string())?;
    let mut state = SessionState::default();
    let mut n = 0;
    for line in recorded.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let (next, r) = handle_turn(&state, v["user"].as_str().unwrap(), &deps);
        let fresh = serde_json::json!({ "user": v["user"], "response": r }).to_string();
        ensure(fresh == line, || format!("turn {n} differs"))?;
        state = next;
        n += 1;
    }
    ensure(n == 20, || format!("{n} turns recorded"))?;
    Ok("20 turns byte-identical".into())
}

fn persona_contrast() -> Check {
    let forest = bundled_forest();
    let imp = forest.meta.imputer.clone().unwrap();
    let p = |id: &str| {
        let persona = Persona::bundled().into_iter().find(|p| p.id == id).unwrap();
        forest.predict_proba(&persona.slots, &imp).unwrap()
    };
    let (rose, jack) = (p("rose"), p("jack"));
    ensure((rose - jack).abs() > 0.2, || format!("Rose {rose:.3}, Jack {jack:.3}"))?;
    Ok(format!("Rose {rose:.3}, Jack {jack:.3}"))
}

const EXAMPLE_PHRASES: &[(&str, QueryType)] = &[
    ("why is my chance so low?", QueryType::Why),
    ("which class has the highest survival chance", QueryType::ClassComparison),
    ("what should I do to survive", QueryType::HowToImprove),
    ("why?", QueryType::Why),
    ("explain it to me", QueryType::Why),
    ("how was this calculated?", QueryType::Why),
    ("what if I'm older?", QueryType::WhatIf),
    ("what if I travelled in the 1st class?", QueryType::WhatIf),
    ("What if I'm older and travel in a different class?", QueryType::WhatIf),
    ("what do you know about me", QueryType::WhatDoYouKnow),
    ("how many women survived", QueryType::Eda),
    ("dataset size", QueryType::Eda),
    ("is dataset imbalanced", QueryType::Eda),
    ("Which are the most important variable(s)?", QueryType::FeatureImportance),
    ("Does gender influence the survival chance?", QueryType::FeatureImportance),
    ("How does age influence my survival", QueryType::FeatureImportance),
    ("What makes me more likely to survive?", QueryType::FeatureImportance),
    ("How does age influence survival across all passengers?", QueryType::FeatureImportance),
    ("how can I increase my chances", QueryType::HowToImprove),
    ("are men more likely to die than women", QueryType::ClassComparison),
    ("who survived", QueryType::BestScore),
    ("who is most likely to survive", QueryType::BestScore),
    ("what about other passengers", QueryType::Contrastive),
    ("what about Jack", QueryType::Contrastive),
    ("what about people similar to me", QueryType::SimilarObservations),
];

fn analytics_oracle() -> Check {
    let sessions: &[(&str, &[&str])] = &[
        ("a", &["why?", "why is my chance so low?", "what if I'm older?", "hello"]),
        ("b", &["why", "what if I were older"]),
        ("c", &["what do you know about me", "dataset size", "hi"]),
        ("d", &["why?"]),
        (
            "e",
            &[
                "explain it to me",
                "how can I increase my chances",
                "who survived",
                "what should I do to survive",
                "bye",
                "which class has the highest survival chance",
            ],
        ),
        (
            "f",
            &[
                "what about Jack",
                "how many women survived",
                "what about people similar to me",
                "Does gender influence the survival chance?",
                "how was this calculated?",
            ],
        ),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("log.jsonl");
    let mut w = LogWriter::open(&path).map_err(|e| e.to_string())?;
    // interleave sessions and write timestamps out of order within each
    for step in 0..6 {
        for (id, texts) in sessions {
            if let Some(t) = texts.get(5 - step) {
                w.append(&LogTurn {
                    session_id: id.to_string(),
                    timestamp: 1000 + (5 - step) as u64,
                    user_text: t.to_string(),
                    intent: "fallback".into(),
                    entities: Default::default(),
                    reply_text: "ok".into(),
                })
                .map_err(|e| e.to_string())?;
            }
        }
    }
    let corpus = load_corpus(&path).map_err(|e| e.to_string())?;
    for (id, texts) in sessions {
        let c = corpus.conversations.iter().find(|c| c.session_id == *id).ok_or("missing session")?;
        let got: Vec<&str> = c.turns.iter().map(|t| t.user_text.as_str()).collect();
        ensure(got == *texts, || format!("session {id}: {got:?}"))?;
    }
    let kept = filter_corpus(&corpus.conversations, 3, false);
    let mut kept_ids: Vec<&str> = kept.iter().map(|c| c.session_id.as_str()).collect();
    kept_ids.sort();
    ensure(kept_ids == ["a", "c", "e", "f"], || format!("kept {kept_ids:?}"))?;
    let s = corpus_stats(&kept);
    ensure(
        s.mean_length == Some(4.5) && s.median_length == Some(4.5) && s.max_length == 6 && s.n_queries == 18,
        || format!("{s:?}"),
    )?;
    let tax = Taxonomy::bundled();
    let table: Vec<usize> = taxonomy_table(&tax, &kept).into_iter().map(|r| r.1).collect();
    let hand = [3, 1, 1, 2, 1, 1, 1, 1, 0, 1, 0, 1];
    ensure(table == hand, || format!("table {table:?}, hand {hand:?}"))?;
    for (text, t) in EXAMPLE_PHRASES {
        let got = tax.tag_query(text);
        ensure(got == BTreeSet::from([*t]), || format!("{text:?} tagged {got:?}"))?;
    }
    Ok(format!("filter, stats and table match; {} example phrases tagged", EXAMPLE_PHRASES.len()))
}

fn service_sessions() -> Check {
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
    runtime.block_on(async {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let log = dir.path().join("log.jsonl");
        let app = AppState::new(ServiceConfig {
            log_path: Some(log.clone()),
            ..ServiceConfig::default()
        })
        .map_err(|e| e.to_string())?;
        app.install(load(&LoadOptions::default()).map_err(|e| e.to_string())?);
        let mut tasks = vec![];
        for s in 0..50u32 {
            let app = app.clone();
            tasks.push(tokio::spawn(async move {
                let id = format!("s{s}");
                let age = 1 + s;
                let gender = if s % 2 == 0 { "woman" } else { "man" };
                let script = [
                    "hi".to_string(),
                    format!("I am {age} years old"),
                    format!("I am a {gender}"),
                    "what do you know about me".into(),
                    "I travelled in 2nd class".into(),
                    "what are my chances".into(),
                    "what do you know about me".into(),
                    format!("message {s}"),
                    "help".into(),
                    "what do you know about me".into(),
                ];
                let mut replies = vec![];
                for msg in &script {
                    let body = serde_json::json!({ "session_id": id, "message": msg }).to_string();
                    let req = Request::post("/chat").header("content-type", "application/json").body(Body::from(body)).unwrap();
                    let resp = router(app.clone()).oneshot(req).await.unwrap();
                    assert_eq!(resp.status(), StatusCode::OK);
                    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
                    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                    replies.push(v["reply"].as_str().unwrap().to_string());
                }
                (id, age, gender, replies)
            }));
        }
        let mut sessions = HashMap::new();
        for t in tasks {
            let (id, age, gender, replies) = t.await.map_err(|e| e.to_string())?;
            let level = if gender == "woman" { "female" } else { "male" };
            let want = format!("gender {level}, class 2, age {age}");
            ensure(replies[9].contains(&want), || format!("{id}: {:?}", replies[9]))?;
            sessions.insert(id, (age, replies));
        }
        let text = std::fs::read_to_string(&log).map_err(|e| e.to_string())?;
        ensure(text.lines().count() == 500, || format!("{} log lines", text.lines().count()))?;
        for line in text.lines() {
            serde_json::from_str::<LogTurn>(line).map_err(|e| format!("bad line {line}: {e}"))?;
        }
        let corpus = load_corpus(&log).map_err(|e| e.to_string())?;
        ensure(corpus.conversations.len() == 50 && corpus.malformed == 0, || "grouping".into())?;
        for c in &corpus.conversations {
            let (age, replies) = &sessions[&c.session_id];
            let logged: Vec<&str> = c.turns.iter().map(|t| t.reply_text.as_str()).collect();
            ensure(logged == *replies, || format!("{}: logged replies differ", c.session_id))?;
            ensure(c.turns[1].entities.numbers[0].value == *age as f64, || format!("{}: age leak", c.session_id))?;
        }
        Ok("50 sessions x 10 turns, 500 well-formed lines, no leakage".to_string())
    })
}

fn main() {
    let checks: [(&str, fn() -> Check); 9] = [
        ("model quality", model_quality),
        ("break down additivity", break_down_additivity),
        ("break down oracle", break_down_oracle),
        ("ceteris paribus identity", ceteris_paribus_identity),
        ("nlu golden set", nlu_golden),
        ("dialogue replay determinism", replay_determinism),
        ("persona contrast", persona_contrast),
        ("analytics oracle", analytics_oracle),
        ("service sessions", service_sessions),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
