use serde::Serialize;

use super::Conversation;
use crate::nlu::FALLBACK;

pub const DEFAULT_MIN_QUERIES: usize = 3;
pub const BUCKET_START: usize = 3;
pub const BUCKET_WIDTH: usize = 5;

/// Keeps conversations with at least `min_queries` user turns; with
/// `drop_irrelevant` also drops those where every turn fell back.
pub fn filter_corpus(convs: &[Conversation], min_queries: usize, drop_irrelevant: bool) -> Vec<Conversation> {
    convs
        .iter()
        .filter(|c| c.len() >= min_queries)
        .filter(|c| !(drop_irrelevant && c.turns.iter().all(|t| t.intent == FALLBACK)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LengthBin {
    pub length: usize,
    pub count: usize,
}

/// Conversations with `lo..=hi` queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bucket {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_dialogues: usize,
    pub n_queries: usize,
    pub mean_length: Option<f64>,
    /// Mean of the two middle lengths when the count is even.
    pub median_length: Option<f64>,
    pub max_length: usize,
    /// Width-1 bins, only lengths that occur, ascending.
    pub histogram: Vec<LengthBin>,
    /// Width-5 buckets from 3 up to the maximum; shorter conversations
    /// get one leading `1..=2` bucket when present.
    pub buckets: Vec<Bucket>,
}

pub fn corpus_stats(convs: &[Conversation]) -> CorpusStats {
    let mut lengths: Vec<usize> = convs.iter().map(Conversation::len).collect();
    lengths.sort_unstable();
    let n = lengths.len();
    let total: usize = lengths.iter().sum();
    let max = lengths.last().copied().unwrap_or(0);
    let median = match n {
        0 => None,
        _ if n % 2 == 1 => Some(lengths[n / 2] as f64),
        _ => Some((lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0),
    };
    let mut histogram: Vec<LengthBin> = Vec::new();
    for &l in &lengths {
        match histogram.last_mut() {
            Some(b) if b.length == l => b.count += 1,
            _ => histogram.push(LengthBin { length: l, count: 1 }),
        }
    }
    let mut buckets = Vec::new();
    let short = lengths.iter().filter(|&&l| l < BUCKET_START).count();
    if short > 0 {
        buckets.push(Bucket {
            lo: 1,
            hi: BUCKET_START - 1,
            count: short,
        });
    }
    let mut lo = BUCKET_START;
    while lo <= max {
        let hi = lo + BUCKET_WIDTH - 1;
        let count = lengths.iter().filter(|&&l| (lo..=hi).contains(&l)).count();
        buckets.push(Bucket { lo, hi, count });
        lo += BUCKET_WIDTH;
    }
    CorpusStats {
        n_dialogues: n,
        n_queries: total,
        mean_length: (n > 0).then(|| total as f64 / n as f64),
        median_length: median,
        max_length: max,
        histogram,
        buckets,
    }
}
