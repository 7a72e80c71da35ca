//! Metric Unanimity: pointwise mutual information between one metric's
//! pairwise run preferences and the preferences shared by every metric in a
//! set.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::MetricId;
use crate::types::{RunId, TopicId};

/// Score table of one metric: `(topic, run) -> score`.
pub type ScoreGrid = BTreeMap<(TopicId, RunId), f64>;

/// Credit given to a tie in the per-metric preference count.
pub const TIE_CREDIT: f64 = 0.5;

/// Prior probability that a metric prefers one run over another.
const PRIOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MuMode {
    /// Pairs of runs within each topic, pooled over topics.
    #[default]
    PerTopic,
    /// Pairs of runs compared on their topic-averaged scores.
    Mean,
}

impl fmt::Display for MuMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuMode::PerTopic => "per-topic",
            MuMode::Mean => "mean",
        })
    }
}

impl FromStr for MuMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-topic" => Ok(MuMode::PerTopic),
            "mean" => Ok(MuMode::Mean),
            _ => Err(Error::InvalidParameter(format!("unknown MU mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuCounts {
    /// Unanimous pairs the metric also prefers (ties count half).
    pub joint: f64,
    /// Pairs on which every metric weakly agrees.
    pub marginal_unanimous: f64,
    pub pairs: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MUReport {
    pub mu: BTreeMap<MetricId, f64>,
    pub counts: BTreeMap<MetricId, MuCounts>,
    pub tie_credit: f64,
    pub mode: MuMode,
}

pub fn metric_unanimity(scores: &BTreeMap<MetricId, ScoreGrid>) -> Result<MUReport> {
    metric_unanimity_with_mode(scores, MuMode::PerTopic)
}

/// Collapses each metric's grid to per-run means under a single topic.
fn mean_grid(grid: &ScoreGrid) -> ScoreGrid {
    let mut acc: BTreeMap<&RunId, (f64, usize)> = BTreeMap::new();
    for ((_, run), &v) in grid {
        let e = acc.entry(run).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter().map(|(run, (s, n))| ((TopicId::new(), run.clone()), s / n as f64)).collect()
}

pub fn metric_unanimity_with_mode(scores: &BTreeMap<MetricId, ScoreGrid>, mode: MuMode) -> Result<MUReport> {
    let collapsed: BTreeMap<MetricId, ScoreGrid>;
    let scores = match mode {
        MuMode::PerTopic => scores,
        MuMode::Mean => {
            collapsed = scores.iter().map(|(m, g)| (m.clone(), mean_grid(g))).collect();
            &collapsed
        }
    };
    let metrics: Vec<&MetricId> = scores.keys().collect();
    let Some(first) = scores.values().next() else {
        return Err(Error::InvalidParameter("metric unanimity needs at least one metric".into()));
    };
    for (m, grid) in scores {
        if grid.len() != first.len() || grid.keys().zip(first.keys()).any(|(a, b)| a != b) {
            let missing =
                first.keys().find(|k| !grid.contains_key(*k)).or_else(|| grid.keys().find(|k| !first.contains_key(*k)));
            let (topic, run) = missing.cloned().unwrap_or_default();
            return Err(Error::IncompleteGrid { run: format!("{run} (metric {m})"), topic });
        }
        if let Some(((t, r), v)) = grid.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite score {v} for metric {m}, topic {t}, run {r}")));
        }
    }

    // topic -> run ids, and per topic a metric-major score matrix
    let mut topics: BTreeMap<&TopicId, Vec<&RunId>> = BTreeMap::new();
    for (topic, run) in first.keys() {
        topics.entry(topic).or_default().push(run);
    }
    let tables: Vec<Vec<Vec<f64>>> = topics
        .iter()
        .map(|(&t, runs)| {
            metrics.iter().map(|m| runs.iter().map(|&r| scores[*m][&(t.clone(), r.clone())]).collect()).collect()
        })
        .collect();

    // half-unit integer tallies merge exactly in any order
    let k = metrics.len();
    let zero = || (vec![0u64; k], 0u64, 0u64);
    let (joint2, unanimous, pairs) = tables
        .par_iter()
        .map(|table| {
            let mut acc = zero();
            let n = table[0].len();
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    acc.2 += 1;
                    if !table.iter().all(|row| row[i] >= row[j]) {
                        continue;
                    }
                    acc.1 += 1;
                    for (slot, row) in acc.0.iter_mut().zip(table) {
                        *slot += if row[i] > row[j] { 2 } else { 1 };
                    }
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            a.0.iter_mut().zip(b.0).for_each(|(x, y)| *x += y);
            (a.0, a.1 + b.1, a.2 + b.2)
        });

    if pairs == 0 {
        return Err(Error::InsufficientRuns);
    }
    if unanimous == 0 {
        return Err(Error::NoUnanimousPairs);
    }
    let mut mu = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for (m, j2) in metrics.into_iter().zip(joint2) {
        let joint = j2 as f64 / 2.0;
        let marginal = unanimous as f64;
        let p_joint = joint / pairs as f64;
        let p_unanimous = marginal / pairs as f64;
        mu.insert(m.clone(), (p_joint / (PRIOR * p_unanimous)).log2());
        counts.insert(m.clone(), MuCounts { joint, marginal_unanimous: marginal, pairs });
    }
    Ok(MUReport { mu, counts, tie_credit: TIE_CREDIT, mode })
}

/// Metrics by MU descending, ties by name ascending.
pub fn mu_ranking(report: &MUReport) -> Vec<MetricId> {
    let mut v: Vec<(&MetricId, f64)> = report.mu.iter().map(|(m, &x)| (m, x)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.to_string().cmp(&b.0.to_string())));
    v.into_iter().map(|(m, _)| m.clone()).collect()
}
