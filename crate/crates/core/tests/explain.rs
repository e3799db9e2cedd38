use std::sync::Arc;

use explainbot_core::explain::{
    break_down, ceteris_paribus, grid_for, Background, BreakDownResult, Grid, PlotSpec,
};
use explainbot_core::forest::{fit, ForestParams, SplitSpec};
use explainbot_core::tabular::{bundled_titanic, Schema, VariableDef};
use num_rational::Ratio;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i64>;

fn schema(p: usize) -> Arc<Schema> {
    let vars = (0..p)
        .map(|j| VariableDef::numeric(&format!("x{j}"), 0.0, 10.0, ""))
        .collect();
    Arc::new(Schema::new(vars, "y").unwrap())
}

/// Naive mean over background rows with `fixed` variables overwritten.
fn naive_mean<F: Fn(&[Q]) -> Q>(f: &F, rows: &[Vec<Q>], obs: &[Q], fixed: &[bool]) -> Q {
    let sum = rows.iter().fold(Q::from_integer(0), |acc, r| {
        let m: Vec<Q> = (0..r.len()).map(|k| if fixed[k] { obs[k] } else { r[k] }).collect();
        acc + f(&m)
    });
    sum / Q::from_integer(rows.len() as i64)
}

/// Greedy oracle: at each step evaluate every unfixed variable by brute
/// force and keep the first with the largest absolute move.
fn oracle<F: Fn(&[Q]) -> Q>(f: &F, rows: &[Vec<Q>], obs: &[Q]) -> (Q, Vec<(usize, Q)>) {
    let p = obs.len();
    let mut fixed = vec![false; p];
    let base = naive_mean(f, rows, obs, &fixed);
    let mut cur = base;
    let mut out = vec![];
    for _ in 0..p {
        let mut best: Option<(usize, Q)> = None;
        for j in 0..p {
            if fixed[j] {
                continue;
            }
            let mut s = fixed.clone();
            s[j] = true;
            let m = naive_mean(f, rows, obs, &s);
            if best.is_none_or(|(_, bm)| (m - cur).abs() > (bm - cur).abs()) {
                best = Some((j, m));
            }
        }
        let (j, m) = best.unwrap();
        fixed[j] = true;
        out.push((j, m - cur));
        cur = m;
    }
    (base, out)
}

#[derive(Debug, Clone)]
struct Toy {
    linear: Vec<i64>,
    pairs: Vec<(usize, usize, i64)>,
    steps: Vec<(usize, i64, i64)>,
}

impl Toy {
    fn eval(&self, r: &[Q]) -> Q {
        let mut v = Q::from_integer(0);
        for (j, b) in self.linear.iter().enumerate() {
            v += r[j] * Q::from_integer(*b);
        }
        for &(a, b, g) in &self.pairs {
            v += r[a] * r[b] * Q::from_integer(g);
        }
        for &(j, c, h) in &self.steps {
            if r[j] > Q::from_integer(c) {
                v += Q::from_integer(h);
            }
        }
        v
    }
}

fn toy_case() -> impl Strategy<Value = (Toy, Vec<Vec<Q>>, Vec<Q>)> {
    (2usize..=5).prop_flat_map(|p| {
        let val = || (0i64..6).prop_map(Q::from_integer);
        (
            prop::collection::vec(-3i64..=3, p),
            prop::collection::vec((0..p, 0..p, -2i64..=2), 0..3),
            prop::collection::vec((0..p, 0i64..5, -3i64..=3), 0..3),
            prop::collection::vec(prop::collection::vec(val(), p), 1..8),
            prop::collection::vec(val(), p),
        )
            .prop_map(|(linear, pairs, steps, rows, obs)| (Toy { linear, pairs, steps }, rows, obs))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_order_matches_brute_force((toy, rows, obs) in toy_case()) {
        let bg = Background::new(schema(obs.len()), rows.clone());
        let f = |r: &[Q]| toy.eval(r);
        let bd = break_down(f, &bg, &obs).unwrap();
        let (base, steps) = oracle(&f, &rows, &obs);
        prop_assert_eq!(bd.intercept, base);
        let got: Vec<(usize, Q)> = bd.steps.iter().map(|s| (s.var, s.contribution)).collect();
        prop_assert_eq!(got, steps);
        prop_assert_eq!(bd.reconstructed(), toy.eval(&obs));
        prop_assert_eq!(bd.prediction, toy.eval(&obs));
    }

    #[test]
    fn additive_models_recover_centred_terms(
        betas in prop::collection::vec(-5i64..=5, 2..6),
        seed in any::<u64>(),
    ) {
        let p = betas.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<Q>> = (0..6)
            .map(|_| (0..p).map(|_| Q::from_integer(rng.random_range(0..10))).collect())
            .collect();
        let obs: Vec<Q> = (0..p).map(|_| Q::from_integer(rng.random_range(0..10))).collect();
        let f = |r: &[Q]| r.iter().zip(&betas).fold(Q::from_integer(1), |a, (x, b)| a + *x * Q::from_integer(*b));
        let bd = break_down(f, &Background::new(schema(p), rows.clone()), &obs).unwrap();
        for s in &bd.steps {
            let mean = rows.iter().fold(Q::from_integer(0), |a, r| a + r[s.var]) / Q::from_integer(rows.len() as i64);
            prop_assert_eq!(s.contribution, Q::from_integer(betas[s.var]) * (obs[s.var] - mean));
        }
    }

    #[test]
    fn profile_passes_through_observation((toy, rows, obs) in toy_case(), var_pick in any::<prop::sample::Index>()) {
        let s = schema(obs.len());
        let var = var_pick.index(obs.len());
        let values: Vec<Q> = {
            let mut v: Vec<Q> = rows.iter().map(|r| r[var]).collect();
            v.sort();
            v.dedup();
            v
        };
        let cp = ceteris_paribus(|r: &[Q]| toy.eval(r), &s, &obs, Grid { var, values }).unwrap();
        prop_assert_eq!(cp.predictions[cp.observed_index()], toy.eval(&obs));
        prop_assert!(cp.grid.windows(2).all(|w| w[0] < w[1]));
        for (g, p) in cp.grid.iter().zip(&cp.predictions) {
            let mut r = obs.clone();
            r[var] = *g;
            prop_assert_eq!(*p, toy.eval(&r));
        }
    }
}

#[test]
fn forest_explanations_are_consistent() {
    let ds = bundled_titanic::<f64>();
    let mut params = ForestParams::defaults_for(ds.schema().len());
    params.n_trees = 60;
    let spec = SplitSpec { seed: 42, test_fraction: 0.25 };
    let sp = fit(&ds, spec, params).unwrap();
    let forest = &sp.forest;
    let imp = forest.meta.imputer.clone().unwrap();
    let bg = Background::sample(&sp.train, &imp, 30, 7);
    assert_eq!(bg.len(), 30);
    let predict = |r: &[f64]| forest.predict_row(r);

    for i in (0..sp.test.len()).step_by(25) {
        let obs = imp.impute_row(sp.test.row(i)).0;
        let bd: BreakDownResult<f64> = break_down(predict, &bg, &obs).unwrap();
        assert_eq!(bd.prediction, forest.predict_row(&obs));
        assert!((bd.reconstructed() - bd.prediction).abs() < 1e-9);
        let spec = PlotSpec::break_down(ds.schema(), &bd);
        spec.validate().unwrap();

        for name in ["age", "class", "fare"] {
            let grid = grid_for(&sp.train, name).unwrap();
            let cp = ceteris_paribus(predict, ds.schema(), &obs, grid).unwrap();
            for (g, p) in cp.grid.iter().zip(&cp.predictions) {
                let mut r = obs.clone();
                r[cp.var] = *g;
                assert_eq!(p.to_bits(), forest.predict_row(&r).to_bits());
            }
            PlotSpec::ceteris_paribus(ds.schema(), &cp).validate().unwrap();
        }
    }
}
