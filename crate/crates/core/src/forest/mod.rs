//! Random forest survival classifier: bootstrap-aggregated CART trees grown
//! with Gini impurity, predicting the mean of per-tree leaf proportions.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded from
//! `ForestParams::seed`; tree `k` draws from stream `k` of that seed, so every
//! tree is reproducible on its own and results do not depend on platform.

mod format;
mod train;
mod tree;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use format::{load_forest, read_forest, save_forest, write_forest, FORMAT_VERSION};
pub use tree::{DecisionTree, Node, SplitRule};

use crate::metrics::{evaluate_scores, Metrics, MetricsError};
use crate::num::Scalar;
use crate::tabular::{Dataset, Imputer, Observation, Schema, TabularError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Variables sampled per split.
    pub mtry: usize,
    /// Minimum number of rows in a leaf.
    pub min_node: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl ForestParams {
    /// 500 trees, `floor(sqrt(p))` variables per split, leaves of size 1, no
    /// depth cap.
    pub fn defaults_for(n_features: usize) -> Self {
        Self {
            n_trees: 500,
            mtry: ((n_features as f64).sqrt().floor() as usize).max(1),
            min_node: 1,
            max_depth: None,
            seed: crate::tabular::DEFAULT_SEED,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::InvalidParams("n_trees must be at least 1".into()));
        }
        if self.mtry == 0 || self.mtry > n_features {
            return Err(ForestError::InvalidParams(format!(
                "mtry must be in 1..={n_features}"
            )));
        }
        if self.min_node == 0 {
            return Err(ForestError::InvalidParams("min_node must be at least 1".into()));
        }
        Ok(())
    }
}

/// How the training split was produced, so it can be recreated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub seed: u64,
    pub test_fraction: f64,
}

/// Training-time facts carried along in the model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestMeta<T> {
    pub train_rows: usize,
    pub imputer: Option<Imputer<T>>,
    pub split: Option<SplitSpec>,
    pub metrics: Option<Metrics<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest<T> {
    schema: Arc<Schema>,
    trees: Vec<DecisionTree<T>>,
    params: ForestParams,
    pub meta: ForestMeta<T>,
}

#[derive(Debug, thiserror::Error)]
pub enum ForestError {
    #[error("target is constant; nothing to learn")]
    DegenerateData,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("observation has variable `{0}` not in the schema")]
    SchemaMismatch(String),
    #[error("corrupt model file (line {line}): {reason}")]
    CorruptModel { line: usize, reason: String },
    #[error("model was trained on schema {found}, expected {expected}")]
    SchemaFingerprintMismatch { expected: String, found: String },
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl<T: Scalar> Forest<T> {
    pub fn from_trees(schema: Arc<Schema>, trees: Vec<DecisionTree<T>>, params: ForestParams) -> Self {
        Self {
            schema,
            trees,
            params,
            meta: ForestMeta {
                train_rows: 0,
                imputer: None,
                split: None,
                metrics: None,
            },
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn trees(&self) -> &[DecisionTree<T>] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    /// Mean of per-tree leaf proportions for a complete encoded row.
    #[inline]
    pub fn predict_row(&self, row: &[T]) -> T {
        let total = self
            .trees
            .iter()
            .fold(T::zero(), |acc, tree| acc + tree.predict(row));
        total / T::from_usize_lossy(self.trees.len())
    }

    pub fn tree_predictions(&self, row: &[T]) -> Vec<T> {
        self.trees.iter().map(|t| t.predict(row)).collect()
    }

    /// Survival probability of an observation; missing cells are imputed.
    pub fn predict_proba(&self, obs: &Observation<T>, imp: &Imputer<T>) -> Result<T, ForestError> {
        let encoded = self.schema.encode(obs).map_err(|e| match e {
            TabularError::SchemaMismatch(v) => ForestError::SchemaMismatch(v),
            other => ForestError::Tabular(other),
        })?;
        let (row, _) = imp.impute_row(&encoded.row);
        Ok(self.predict_row(&row))
    }
}

pub fn train_forest<T: Scalar>(
    train: &Dataset<T>,
    imp: &Imputer<T>,
    params: ForestParams,
) -> Result<Forest<T>, ForestError> {
    let schema = train.schema_arc();
    params.validate(schema.len())?;
    let labels = train.targets();
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(ForestError::DegenerateData);
    }
    let rows: Vec<Vec<T>> = train.rows().iter().map(|r| imp.impute_row(r).0).collect();
    let levels: Vec<Option<usize>> = schema
        .variables()
        .iter()
        .map(|v| v.is_categorical().then(|| v.levels().len()))
        .collect();
    let data = train::TrainingData {
        rows: &rows,
        labels,
        levels: &levels,
    };
    let grow = train::GrowParams {
        mtry: params.mtry,
        min_node: params.min_node,
        max_depth: params.max_depth,
    };
    let trees = (0..params.n_trees)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(k as u64);
            train::grow_tree(&data, grow, &mut rng)
        })
        .collect();
    let mut forest = Forest::from_trees(schema, trees, params);
    forest.meta.train_rows = train.len();
    forest.meta.imputer = Some(imp.clone());
    Ok(forest)
}

pub fn evaluate<T: Scalar>(
    f: &Forest<T>,
    test: &Dataset<T>,
    imp: &Imputer<T>,
) -> Result<Metrics<T>, ForestError> {
    let scores: Vec<T> = test
        .rows()
        .iter()
        .map(|r| f.predict_row(&imp.impute_row(r).0))
        .collect();
    Ok(evaluate_scores(&scores, test.targets())?)
}

/// Forest plus the two halves of the split it was trained and scored on.
#[derive(Debug, Clone)]
pub struct Fitted<T> {
    pub forest: Forest<T>,
    pub train: Dataset<T>,
    pub test: Dataset<T>,
}

/// Split, fit the imputer on the training half, train, and score on the test
/// half. Split settings and test metrics are recorded in the forest metadata.
pub fn fit<T: Scalar>(ds: &Dataset<T>, spec: SplitSpec, params: ForestParams) -> Result<Fitted<T>, ForestError> {
    let (train, test) = crate::tabular::split(ds, spec.test_fraction, spec.seed)?;
    let imp = crate::tabular::fit_imputer(&train)?;
    let mut forest = train_forest(&train, &imp, params)?;
    let metrics = evaluate(&forest, &test, &imp)?;
    forest.meta.split = Some(spec);
    forest.meta.metrics = Some(metrics);
    Ok(Fitted { forest, train, test })
}

/// Exposes the split finder for the exhaustive-search oracle tests.
#[doc(hidden)]
pub mod testing {
    use super::train::{best_split, grow_tree_on, GrowParams, TrainingData};
    use super::*;

    /// Best split on complete rows with every variable eligible.
    pub fn best_split_all<T: Scalar>(
        rows: &[Vec<T>],
        labels: &[bool],
        levels: &[Option<usize>],
    ) -> Option<(usize, SplitRule<T>)> {
        let data = TrainingData { rows, labels, levels };
        let idx: Vec<usize> = (0..rows.len()).collect();
        let vars: Vec<usize> = (0..levels.len()).collect();
        best_split(&data, &idx, &vars, 1).map(|c| (c.var, c.rule))
    }

    /// Fully grown tree on exactly these rows with all variables eligible.
    pub fn grow_full<T: Scalar>(
        rows: &[Vec<T>],
        labels: &[bool],
        levels: &[Option<usize>],
    ) -> DecisionTree<T> {
        let data = TrainingData { rows, labels, levels };
        let params = GrowParams {
            mtry: levels.len(),
            min_node: 1,
            max_depth: None,
        };
        grow_tree_on(&data, params, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{fit_imputer, Cell};

    fn small(body: &str) -> Dataset<f64> {
        let csv = format!("gender,class,age,sibsp,parch,fare,embarked,survived\n{body}");
        Dataset::from_csv(csv.as_bytes(), Arc::new(Schema::titanic()), "mem").unwrap()
    }

    #[test]
    fn stub_trees_average() {
        let forest = Forest::from_trees(
            Arc::new(Schema::titanic()),
            vec![DecisionTree::constant(1, 5), DecisionTree::constant(2, 5)],
            ForestParams::defaults_for(7),
        );
        let p: f64 = forest.predict_row(&[0.0; 7]);
        assert!((p - 0.3).abs() < 1e-15);
        assert_eq!(forest.tree_predictions(&[0.0; 7]), vec![0.2, 0.4]);
    }

    #[test]
    fn memorizes_separable_rows() {
        let d = small(
            "male,3,30,0,0,7,S,0\nfemale,1,20,0,0,80,C,1\nmale,2,50,1,0,20,S,0\nfemale,1,10,0,2,90,C,1\n",
        );
        let imp = fit_imputer(&d).unwrap();
        let params = ForestParams {
            n_trees: 1,
            mtry: 7,
            ..ForestParams::defaults_for(7)
        };
        let f = train_forest(&d, &imp, params).unwrap();
        let train_rows = f.meta.train_rows;
        assert_eq!(train_rows, 4);
        // a single bootstrap tree may miss rows; grow on all rows instead
        let rows: Vec<Vec<f64>> = d.rows().iter().map(|r| imp.impute_row(r).0).collect();
        let levels = [Some(2), Some(3), None, None, None, None, Some(3)];
        let tree = testing::grow_full(&rows, d.targets(), &levels);
        for (row, &y) in rows.iter().zip(d.targets()) {
            assert_eq!(tree.predict(row), if y { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn constant_target_rejected() {
        let d = small("male,3,30,0,0,7,S,0\nfemale,1,20,0,0,80,C,0\n");
        let imp = fit_imputer(&d).unwrap();
        assert!(matches!(
            train_forest(&d, &imp, ForestParams::defaults_for(7)),
            Err(ForestError::DegenerateData)
        ));
    }

    #[test]
    fn bad_params() {
        let p = ForestParams { mtry: 8, ..ForestParams::defaults_for(7) };
        assert!(p.validate(7).is_err());
        let p = ForestParams { n_trees: 0, ..ForestParams::defaults_for(7) };
        assert!(p.validate(7).is_err());
        assert_eq!(ForestParams::defaults_for(7).mtry, 2);
    }

    #[test]
    fn unknown_variable_is_schema_mismatch() {
        let forest = Forest::from_trees(
            Arc::new(Schema::titanic()),
            vec![DecisionTree::constant(1, 2)],
            ForestParams::defaults_for(7),
        );
        let imp = Imputer::from_fills(vec![0.0; 7]);
        let obs = Observation::new().with("height", Cell::Number(180.0));
        assert!(matches!(
            forest.predict_proba(&obs, &imp),
            Err(ForestError::SchemaMismatch(v)) if v == "height"
        ));
    }
}
