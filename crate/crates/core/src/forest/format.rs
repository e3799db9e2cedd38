//! Model file: a line-oriented text dump.
//!
//! ```text
//! explainbot-forest 1
//! schema <sha256 fingerprint>
//! params n_trees=500 mtry=2 min_node=1 max_depth=none seed=42
//! train_rows 981
//! split seed=42 test_fraction=0.25            (optional)
//! imputer <fill per variable, schema order>     (optional)
//! metrics auc=.. f1=.. accuracy=.. tp=.. fp=.. tn=.. fn=..   (optional)
//! trees <count>
//! tree <node count>
//! S <var> <threshold>     numeric split, x <= threshold goes left
//! C <var> <level code>    categorical split, that level goes left
//! L <positives> <n>       leaf
//! ...
//! end
//! ```
//!
//! Nodes of each tree are listed in pre-order (node, left subtree, right
//! subtree). Floats are written with Rust's shortest round-trip formatting so
//! a load reproduces predictions bit for bit.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use super::tree::{DecisionTree, Node, SplitRule};
use super::{Forest, ForestError, ForestMeta, ForestParams, SplitSpec};
use crate::metrics::{Confusion, Metrics};
use crate::num::Scalar;
use crate::tabular::{Imputer, Schema};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "explainbot-forest";

pub fn write_forest<T: Scalar, W: Write>(f: &Forest<T>, out: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    let p = &f.params;
    writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(w, "schema {}", f.schema.fingerprint())?;
    let depth = p.max_depth.map_or_else(|| "none".to_string(), |d| d.to_string());
    writeln!(
        w,
        "params n_trees={} mtry={} min_node={} max_depth={} seed={}",
        p.n_trees, p.mtry, p.min_node, depth, p.seed
    )?;
    writeln!(w, "train_rows {}", f.meta.train_rows)?;
    if let Some(s) = &f.meta.split {
        writeln!(w, "split seed={} test_fraction={}", s.seed, s.test_fraction)?;
    }
    if let Some(imp) = &f.meta.imputer {
        let fills: Vec<String> = imp.fills().iter().map(|x| x.to_string()).collect();
        writeln!(w, "imputer {}", fills.join(" "))?;
    }
    if let Some(m) = &f.meta.metrics {
        let auc = m.auc.map_or_else(|| "none".to_string(), |a| a.to_string());
        let c = m.confusion;
        writeln!(
            w,
            "metrics auc={auc} f1={} accuracy={} tp={} fp={} tn={} fn={}",
            m.f1, m.accuracy, c.tp, c.fp, c.tn, c.fn_
        )?;
    }
    writeln!(w, "trees {}", f.trees.len())?;
    for tree in &f.trees {
        writeln!(w, "tree {}", tree.nodes().len())?;
        for node in tree.nodes() {
            match node {
                Node::Split { var, rule: SplitRule::LessEq(t), .. } => writeln!(w, "S {var} {t}")?,
                Node::Split { var, rule: SplitRule::IsLevel(l), .. } => writeln!(w, "C {var} {l}")?,
                Node::Leaf { positives, n, .. } => writeln!(w, "L {positives} {n}")?,
            }
        }
    }
    writeln!(w, "end")?;
    w.flush()
}

pub fn save_forest<T: Scalar>(f: &Forest<T>, path: &Path) -> Result<(), ForestError> {
    // write to a sibling temp file, then rename, so readers never see half a model
    let tmp = path.with_extension("tmp");
    write_forest(f, std::fs::File::create(&tmp)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_forest<T: Scalar>(path: &Path, schema: Arc<Schema>) -> Result<Forest<T>, ForestError> {
    read_forest(BufReader::new(std::fs::File::open(path)?), schema)
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String, ForestError> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(ForestError::Io(e)),
            None => Err(self.corrupt("unexpected end of file")),
        }
    }

    fn corrupt(&self, reason: impl Into<String>) -> ForestError {
        ForestError::CorruptModel {
            line: self.line,
            reason: reason.into(),
        }
    }

    /// Next line, which must start with `keyword`; returns the remainder.
    fn expect(&mut self, keyword: &str) -> Result<String, ForestError> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, rest)) if k == keyword => Ok(rest.to_string()),
            _ => Err(self.corrupt(format!("expected `{keyword}`"))),
        }
    }

    fn parse<V: FromStr>(&self, s: &str) -> Result<V, ForestError> {
        s.parse().map_err(|_| self.corrupt(format!("cannot parse `{s}`")))
    }
}

fn key_values(s: &str) -> impl Iterator<Item = (&str, &str)> {
    s.split_whitespace().filter_map(|kv| kv.split_once('='))
}

pub fn read_forest<T: Scalar, R: BufRead>(input: R, schema: Arc<Schema>) -> Result<Forest<T>, ForestError> {
    let mut lines = Lines {
        inner: input.lines(),
        line: 0,
    };
    let version = lines.expect(MAGIC)?;
    if lines.parse::<u32>(&version)? != FORMAT_VERSION {
        return Err(lines.corrupt(format!("unsupported format version {version}")));
    }
    let found = lines.expect("schema")?;
    let expected = schema.fingerprint();
    if found != expected {
        return Err(ForestError::SchemaFingerprintMismatch { expected, found });
    }

    let params_line = lines.expect("params")?;
    let mut params = ForestParams::defaults_for(schema.len());
    let mut seen = 0;
    for (k, v) in key_values(&params_line) {
        seen += 1;
        match k {
            "n_trees" => params.n_trees = lines.parse(v)?,
            "mtry" => params.mtry = lines.parse(v)?,
            "min_node" => params.min_node = lines.parse(v)?,
            "max_depth" if v == "none" => params.max_depth = None,
            "max_depth" => params.max_depth = Some(lines.parse(v)?),
            "seed" => params.seed = lines.parse(v)?,
            _ => return Err(lines.corrupt(format!("unknown parameter `{k}`"))),
        }
    }
    if seen != 5 {
        return Err(lines.corrupt("incomplete params"));
    }
    let rows = lines.expect("train_rows")?;
    let mut meta = ForestMeta {
        train_rows: lines.parse(&rows)?,
        imputer: None,
        split: None,
        metrics: None,
    };

    let tree_count = loop {
        let l = lines.next()?;
        let (k, rest) = l.split_once(' ').unwrap_or((l.as_str(), ""));
        match k {
            "split" => {
                let mut spec = SplitSpec { seed: 0, test_fraction: 0.0 };
                for (k, v) in key_values(rest) {
                    match k {
                        "seed" => spec.seed = lines.parse(v)?,
                        "test_fraction" => spec.test_fraction = lines.parse(v)?,
                        _ => return Err(lines.corrupt(format!("unknown split field `{k}`"))),
                    }
                }
                meta.split = Some(spec);
            }
            "imputer" => {
                let fills = rest
                    .split_whitespace()
                    .map(|x| lines.parse::<T>(x))
                    .collect::<Result<Vec<_>, _>>()?;
                if fills.len() != schema.len() {
                    return Err(lines.corrupt("imputer width differs from schema"));
                }
                meta.imputer = Some(Imputer::from_fills(fills));
            }
            "metrics" => meta.metrics = Some(parse_metrics(&lines, rest)?),
            "trees" => break lines.parse::<usize>(rest)?,
            _ => return Err(lines.corrupt(format!("unexpected `{k}`"))),
        }
    };
    if tree_count != params.n_trees {
        return Err(lines.corrupt("tree count differs from params"));
    }

    let mut trees = Vec::with_capacity(tree_count);
    for _ in 0..tree_count {
        let count: usize = {
            let rest = lines.expect("tree")?;
            lines.parse(&rest)?
        };
        let mut raw = Vec::with_capacity(count);
        for _ in 0..count {
            let l = lines.next()?;
            let mut parts = l.split(' ');
            let (tag, a, b) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(a), Some(b), None) => (t, a, b),
                _ => return Err(lines.corrupt("malformed node")),
            };
            let node = match tag {
                "S" | "C" => {
                    let var: usize = lines.parse(a)?;
                    let def = schema
                        .variables()
                        .get(var)
                        .ok_or_else(|| lines.corrupt(format!("variable index {var} out of range")))?;
                    let rule = if tag == "S" {
                        if def.is_categorical() {
                            return Err(lines.corrupt("numeric split on categorical variable"));
                        }
                        SplitRule::LessEq(lines.parse::<T>(b)?)
                    } else {
                        let level: u32 = lines.parse(b)?;
                        if !def.is_categorical() || level as usize >= def.levels().len() {
                            return Err(lines.corrupt("invalid categorical split"));
                        }
                        SplitRule::IsLevel(level)
                    };
                    Node::Split { var, rule, right: usize::MAX }
                }
                "L" => {
                    let positives: u32 = lines.parse(a)?;
                    let n: u32 = lines.parse(b)?;
                    if n == 0 || positives > n {
                        return Err(lines.corrupt("leaf counts out of range"));
                    }
                    Node::leaf(positives, n)
                }
                _ => return Err(lines.corrupt(format!("unknown node tag `{tag}`"))),
            };
            raw.push(node);
        }
        let end = link(&mut raw, 0).ok_or_else(|| lines.corrupt("tree is not a complete pre-order listing"))?;
        if end != raw.len() {
            return Err(lines.corrupt("trailing nodes after tree"));
        }
        trees.push(DecisionTree::from_nodes(raw));
    }
    if lines.next()? != "end" {
        return Err(lines.corrupt("expected `end`"));
    }

    let mut forest = Forest::from_trees(schema, trees, params);
    forest.meta = meta;
    Ok(forest)
}

/// Fills in right-child indices; returns the index just past the subtree at `i`.
fn link<T>(nodes: &mut [Node<T>], i: usize) -> Option<usize> {
    match nodes.get(i)? {
        Node::Leaf { .. } => Some(i + 1),
        Node::Split { .. } => {
            let right_at = link(nodes, i + 1)?;
            let end = link(nodes, right_at)?;
            if let Node::Split { right, .. } = &mut nodes[i] {
                *right = right_at;
            }
            Some(end)
        }
    }
}

fn parse_metrics<T: Scalar, R: BufRead>(lines: &Lines<R>, rest: &str) -> Result<Metrics<T>, ForestError> {
    let mut m = Metrics {
        auc: None,
        f1: T::zero(),
        accuracy: T::zero(),
        confusion: Confusion::default(),
    };
    for (k, v) in key_values(rest) {
        match k {
            "auc" if v == "none" => m.auc = None,
            "auc" => m.auc = Some(lines.parse(v)?),
            "f1" => m.f1 = lines.parse(v)?,
            "accuracy" => m.accuracy = lines.parse(v)?,
            "tp" => m.confusion.tp = lines.parse(v)?,
            "fp" => m.confusion.fp = lines.parse(v)?,
            "tn" => m.confusion.tn = lines.parse(v)?,
            "fn" => m.confusion.fn_ = lines.parse(v)?,
            _ => return Err(lines.corrupt(format!("unknown metric `{k}`"))),
        }
    }
    Ok(m)
}
