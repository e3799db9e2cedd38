use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TabularError;
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableKind {
    Numeric { min: f64, max: f64 },
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDef {
    pub name: String,
    pub kind: VariableKind,
    pub unit: String,
}

impl VariableDef {
    pub fn numeric(name: &str, min: f64, max: f64, unit: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: VariableKind::Numeric { min, max },
            unit: unit.to_string(),
        }
    }

    pub fn categorical(name: &str, levels: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            kind: VariableKind::Categorical {
                levels: levels.iter().map(|l| l.to_string()).collect(),
            },
            unit: String::new(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, VariableKind::Categorical { .. })
    }

    pub fn levels(&self) -> &[String] {
        match &self.kind {
            VariableKind::Categorical { levels } => levels,
            VariableKind::Numeric { .. } => &[],
        }
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels().iter().position(|l| l == level)
    }
}

/// Ordered variable universe plus the name of the binary target column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    variables: Vec<VariableDef>,
    target: String,
}

impl Schema {
    pub fn new(variables: Vec<VariableDef>, target: &str) -> Result<Self, TabularError> {
        let mut seen = HashSet::new();
        for v in &variables {
            if !seen.insert(v.name.as_str()) || v.name == target {
                return Err(TabularError::InvalidSchema(format!(
                    "duplicate variable name `{}`",
                    v.name
                )));
            }
            match &v.kind {
                VariableKind::Numeric { min, max } => {
                    if !(min.is_finite() && max.is_finite() && min <= max) {
                        return Err(TabularError::InvalidSchema(format!(
                            "bounds of `{}` must satisfy min <= max",
                            v.name
                        )));
                    }
                }
                VariableKind::Categorical { levels } => {
                    let unique: HashSet<_> = levels.iter().collect();
                    if levels.len() < 2 || unique.len() != levels.len() {
                        return Err(TabularError::InvalidSchema(format!(
                            "`{}` needs at least two distinct levels",
                            v.name
                        )));
                    }
                }
            }
        }
        if variables.is_empty() {
            return Err(TabularError::InvalidSchema("no variables".into()));
        }
        Ok(Self {
            variables,
            target: target.to_string(),
        })
    }

    /// The bundled passenger schema.
    pub fn titanic() -> Self {
        Self::new(
            vec![
                VariableDef::categorical("gender", &["male", "female"]),
                VariableDef::categorical("class", &["1", "2", "3"]),
                VariableDef::numeric("age", 0.0, 100.0, "years"),
                VariableDef::numeric("fare", 0.0, 600.0, "pounds"),
                VariableDef::numeric("sibsp", 0.0, 8.0, "siblings or spouses"),
                VariableDef::numeric("parch", 0.0, 9.0, "parents or children"),
                VariableDef::categorical("embarked", &["C", "Q", "S"]),
            ],
            "survived",
        )
        .expect("bundled schema is valid")
    }

    pub fn variables(&self) -> &[VariableDef] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, name: &str) -> Result<(usize, &VariableDef), TabularError> {
        self.index_of(name)
            .map(|i| (i, &self.variables[i]))
            .ok_or_else(|| TabularError::UnknownVariable(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    /// Hex SHA-256 over a canonical description of the schema.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for v in &self.variables {
            match &v.kind {
                VariableKind::Numeric { min, max } => {
                    hasher.update(format!("n:{}:{}:{};", v.name, min, max));
                }
                VariableKind::Categorical { levels } => {
                    hasher.update(format!("c:{}:{};", v.name, levels.join(",")));
                }
            }
        }
        hasher.update(format!("t:{}", self.target));
        hex(&hasher.finalize())
    }

    /// Converts an observation to a dense row: numbers as-is (clamped to the
    /// variable bounds), categorical levels as their level index.
    pub fn encode<T: Real>(&self, obs: &Observation<T>) -> Result<Encoded<T>, TabularError> {
        let mut row = vec![None; self.variables.len()];
        let mut clamps = Vec::new();
        for (name, cell) in obs.iter() {
            let (idx, def) = self
                .variable(name)
                .map_err(|_| TabularError::SchemaMismatch(name.to_string()))?;
            row[idx] = match (cell, &def.kind) {
                (Cell::Missing, _) => None,
                (Cell::Number(x), VariableKind::Numeric { min, max }) => {
                    let (value, clamp) = clamp_to(*x, *min, *max);
                    if let Some(original) = clamp {
                        clamps.push(Clamp {
                            row: None,
                            variable: name.clone(),
                            original,
                            clamped: value.to_f64_lossy(),
                        });
                    }
                    Some(value)
                }
                (Cell::Level(level), VariableKind::Numeric { min, max }) => {
                    let parsed = level
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .and_then(T::from_f64)
                        .ok_or_else(|| TabularError::InvalidLevel {
                            variable: name.clone(),
                            value: level.clone(),
                        })?;
                    Some(clamp_to(parsed, *min, *max).0)
                }
                (Cell::Level(level), VariableKind::Categorical { .. }) => {
                    Some(level_code(def, level).ok_or_else(|| TabularError::InvalidLevel {
                        variable: name.clone(),
                        value: level.clone(),
                    })?)
                }
                (Cell::Number(x), VariableKind::Categorical { .. }) => {
                    let label = x.to_string();
                    Some(level_code(def, &label).ok_or(TabularError::InvalidLevel {
                        variable: name.clone(),
                        value: label,
                    })?)
                }
            };
        }
        Ok(Encoded { row, clamps })
    }

    /// Inverse of [`Schema::encode`]; every schema variable gets a cell.
    pub fn decode<T: Real>(&self, row: &[Option<T>]) -> Observation<T> {
        let mut obs = Observation::new();
        for (def, value) in self.variables.iter().zip(row) {
            let cell = match value {
                None => Cell::Missing,
                Some(v) => self.cell_for(def, *v),
            };
            obs.set(&def.name, cell);
        }
        obs
    }

    pub fn decode_complete<T: Real>(&self, row: &[T]) -> Observation<T> {
        let opt: Vec<Option<T>> = row.iter().copied().map(Some).collect();
        self.decode(&opt)
    }

    fn cell_for<T: Real>(&self, def: &VariableDef, value: T) -> Cell<T> {
        match &def.kind {
            VariableKind::Numeric { .. } => Cell::Number(value),
            VariableKind::Categorical { levels } => {
                let idx = value.to_usize().unwrap_or(0).min(levels.len() - 1);
                Cell::Level(levels[idx].clone())
            }
        }
    }

    /// Human-readable rendering of an encoded value.
    pub fn display_value<T: Real>(&self, var: usize, value: T) -> String {
        match self.cell_for(&self.variables[var], value) {
            Cell::Level(l) => l,
            Cell::Number(x) => format_number(x.to_f64_lossy()),
            Cell::Missing => "missing".into(),
        }
    }
}

pub(crate) fn level_code<T: Real>(def: &VariableDef, level: &str) -> Option<T> {
    def.level_index(level.trim()).map(T::from_usize_lossy)
}

pub(crate) fn clamp_to<T: Real>(x: T, min: f64, max: f64) -> (T, Option<f64>) {
    let lo = T::from_f64(min).expect("bound representable");
    let hi = T::from_f64(max).expect("bound representable");
    if x < lo {
        (lo, Some(x.to_f64_lossy()))
    } else if x > hi {
        (hi, Some(x.to_f64_lossy()))
    } else {
        (x, None)
    }
}

/// Shortest decimal rendering without trailing `.0` noise: 7.25, 20, 0.1667.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        let s = format!("{:.4}", x);
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of encoding an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded<T> {
    pub row: Vec<Option<T>>,
    pub clamps: Vec<Clamp>,
}

/// A numeric value that was pulled back inside its variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clamp {
    /// Data row (0-based) for dataset ingestion, `None` for chat input.
    pub row: Option<usize>,
    pub variable: String,
    pub original: f64,
    pub clamped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell<T> {
    Number(T),
    Level(String),
    Missing,
}

impl<T: fmt::Display> fmt::Display for Cell<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Number(x) => write!(f, "{x}"),
            Cell::Level(l) => f.write_str(l),
            Cell::Missing => f.write_str("missing"),
        }
    }
}

/// One passenger, keyed by variable name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation<T> {
    values: BTreeMap<String, Cell<T>>,
}

impl<T> Observation<T> {
    pub fn new() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, cell: Cell<T>) -> Self {
        self.set(name, cell);
        self
    }

    pub fn set(&mut self, name: &str, cell: Cell<T>) {
        self.values.insert(name.to_string(), cell);
    }

    pub fn get(&self, name: &str) -> Option<&Cell<T>> {
        self.values.get(name)
    }

    pub fn is_known(&self, name: &str) -> bool {
        matches!(self.values.get(name), Some(c) if !matches!(c, Cell::Missing))
    }

    pub fn remove(&mut self, name: &str) -> Option<Cell<T>> {
        self.values.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Cell<T>)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
