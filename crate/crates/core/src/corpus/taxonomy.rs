use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Conversation, CorpusError};
use crate::text::{tokens, NoSpans, Pattern, RuleFile};

pub const BUNDLED_TAXONOMY: &str = include_str!("../../data/corpus/taxonomy.txt");

/// Kinds of user query, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryType {
    Why,
    WhatIf,
    WhatDoYouKnow,
    Eda,
    FeatureImportance,
    HowToImprove,
    ClassComparison,
    BestScore,
    ModelRelated,
    Contrastive,
    PlotInteraction,
    SimilarObservations,
}

impl QueryType {
    pub const ALL: [QueryType; 12] = [
        QueryType::Why,
        QueryType::WhatIf,
        QueryType::WhatDoYouKnow,
        QueryType::Eda,
        QueryType::FeatureImportance,
        QueryType::HowToImprove,
        QueryType::ClassComparison,
        QueryType::BestScore,
        QueryType::ModelRelated,
        QueryType::Contrastive,
        QueryType::PlotInteraction,
        QueryType::SimilarObservations,
    ];

    /// Identifier used in rule files and JSON.
    pub fn name(self) -> &'static str {
        match self {
            QueryType::Why => "why",
            QueryType::WhatIf => "what_if",
            QueryType::WhatDoYouKnow => "what_do_you_know",
            QueryType::Eda => "eda",
            QueryType::FeatureImportance => "feature_importance",
            QueryType::HowToImprove => "how_to_improve",
            QueryType::ClassComparison => "class_comparison",
            QueryType::BestScore => "best_score",
            QueryType::ModelRelated => "model_related",
            QueryType::Contrastive => "contrastive",
            QueryType::PlotInteraction => "plot_interaction",
            QueryType::SimilarObservations => "similar_observations",
        }
    }

    /// Row label in the taxonomy table.
    pub fn label(self) -> &'static str {
        match self {
            QueryType::Why => "why",
            QueryType::WhatIf => "what-if",
            QueryType::WhatDoYouKnow => "what do you know about me",
            QueryType::Eda => "EDA",
            QueryType::FeatureImportance => "feature importance",
            QueryType::HowToImprove => "how to improve",
            QueryType::ClassComparison => "class comparison",
            QueryType::BestScore => "who has the best score",
            QueryType::ModelRelated => "model-related",
            QueryType::Contrastive => "contrastive",
            QueryType::PlotInteraction => "plot interaction",
            QueryType::SimilarObservations => "similar observations",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone)]
pub struct TaxonomyRule {
    pub query_type: QueryType,
    pub patterns: Vec<Pattern>,
    pub unless: Vec<Pattern>,
}

#[derive(Debug, Clone)]
pub struct Taxonomy {
    rules: Vec<TaxonomyRule>,
}

impl Taxonomy {
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let bad = |line: usize, reason: String| CorpusError::BadTaxonomy { line, reason };
        let file = RuleFile::parse(text).map_err(|e| bad(e.line, e.reason))?;
        let mut rules: Vec<TaxonomyRule> = Vec::new();
        for s in &file.sections {
            if s.kind != "type" {
                return Err(bad(s.line, format!("unknown section kind `{}`", s.kind)));
            }
            let query_type =
                QueryType::from_name(&s.name).ok_or_else(|| bad(s.line, format!("unknown query type `{}`", s.name)))?;
            if rules.iter().any(|r| r.query_type == query_type) {
                return Err(bad(s.line, format!("duplicate query type `{}`", s.name)));
            }
            let mut rule = TaxonomyRule {
                query_type,
                patterns: Vec::new(),
                unless: Vec::new(),
            };
            for e in &s.entries {
                let target = match e.key.as_deref() {
                    Some("pattern") => &mut rule.patterns,
                    Some("unless") => &mut rule.unless,
                    _ => return Err(bad(e.line, "expected `pattern:` or `unless:`".into())),
                };
                target.push(Pattern::parse(&e.value, &[]).map_err(|p| bad(e.line, p.0))?);
            }
            rules.push(rule);
        }
        rules.sort_by_key(|r| r.query_type);
        Ok(Self { rules })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TAXONOMY).expect("bundled taxonomy is valid")
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn rules(&self) -> &[TaxonomyRule] {
        &self.rules
    }

    pub fn tag_query(&self, text: &str) -> BTreeSet<QueryType> {
        let toks = tokens(text);
        self.rules
            .iter()
            .filter(|r| r.patterns.iter().any(|p| p.matches(&toks, &NoSpans)))
            .filter(|r| !r.unless.iter().any(|p| p.matches(&toks, &NoSpans)))
            .map(|r| r.query_type)
            .collect()
    }
}

/// Number of conversations with at least one query of each type, in table
/// order.
pub fn taxonomy_table(taxonomy: &Taxonomy, convs: &[Conversation]) -> Vec<(QueryType, usize)> {
    let mut counts = [0usize; 12];
    for c in convs {
        let seen: BTreeSet<QueryType> = c.turns.iter().flat_map(|t| taxonomy.tag_query(&t.user_text)).collect();
        for t in seen {
            counts[t as usize] += 1;
        }
    }
    QueryType::ALL.into_iter().zip(counts).collect()
}
