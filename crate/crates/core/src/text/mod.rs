//! Text plumbing shared by the NLU, the response templates and the query
//! taxonomy: normalisation, token patterns and the rule-file format.

mod normalize;
mod pattern;
mod rules;

pub use normalize::{is_number, normalize, tokens};
pub use pattern::{Elem, NoSpans, Pattern, PatternError, SpanSource};
pub use rules::{Entry, RuleError, RuleFile, Section};
