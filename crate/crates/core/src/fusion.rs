//! Unsupervised rank fusion: OIQ fusion, Borda count and the Borda-log
//! variant (average log rank).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oiq::oiq;
use crate::types::{signal_from_ranked_list, truncate, Collection, DocId, RankedList, RunId, Signal, SignalSet};

pub const DEFAULT_CUTOFF: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FusionKind {
    Oiq,
    Borda,
    BordaLog,
}

impl fmt::Display for FusionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionKind::Oiq => "oiq",
            FusionKind::Borda => "borda",
            FusionKind::BordaLog => "bordalog",
        })
    }
}

impl FromStr for FusionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oiq" => Ok(FusionKind::Oiq),
            "borda" => Ok(FusionKind::Borda),
            "bordalog" | "borda-log" => Ok(FusionKind::BordaLog),
            _ => Err(Error::InvalidParameter(format!("unknown fusion method {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FusionMethod {
    pub kind: FusionKind,
    pub cutoff: usize,
}

impl FusionMethod {
    pub fn new(kind: FusionKind, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParameter("fusion cutoff must be at least 1".into()));
        }
        Ok(FusionMethod { kind, cutoff })
    }

    pub fn fuse(&self, runs: &[(RunId, RankedList)], collection: &Collection) -> Result<FusionRun> {
        match self.kind {
            FusionKind::Oiq => fuse_oiq(runs, collection, self.cutoff),
            FusionKind::Borda => fuse_borda(runs, collection, self.cutoff),
            FusionKind::BordaLog => fuse_borda_log(runs, collection, self.cutoff),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionRun {
    pub fused: RankedList,
    pub method: FusionMethod,
    pub inputs: Vec<RunId>,
}

fn finish(
    scored: Vec<(DocId, f64)>,
    kind: FusionKind,
    cutoff: usize,
    runs: &[(RunId, RankedList)],
) -> Result<FusionRun> {
    let method = FusionMethod::new(kind, cutoff)?;
    // -0.0 from negated zero sums prints as "-0"
    let scored: Vec<(DocId, f64)> = scored.into_iter().map(|(d, s)| (d, s + 0.0)).collect();
    let fused = truncate(&RankedList::from_scored(scored)?, cutoff);
    Ok(FusionRun { fused, method, inputs: runs.iter().map(|(id, _)| id.clone()).collect() })
}

fn signals(runs: &[(RunId, RankedList)], collection: &Collection) -> Result<Vec<Signal>> {
    if runs.is_empty() {
        return Err(Error::EmptySignalSet);
    }
    runs.iter().map(|(_, r)| signal_from_ranked_list(r, collection)).collect()
}

/// Scores every retrieved document by its OIQ under the input runs.
/// Documents no run retrieves are left out.
pub fn fuse_oiq(runs: &[(RunId, RankedList)], collection: &Collection, cutoff: usize) -> Result<FusionRun> {
    let set = SignalSet::new(signals(runs, collection)?, collection.clone())?;
    let table = oiq(&set);
    let scored = table.values().iter().map(|(d, &v)| (d.clone(), v)).collect();
    finish(scored, FusionKind::Oiq, cutoff, runs)
}

/// Rank of every retrieved document in every run, `|D|` when unretrieved.
fn rank_profiles(runs: &[(RunId, RankedList)], collection: &Collection) -> Result<Vec<(DocId, Vec<u64>)>> {
    // validates membership and duplicates
    signals(runs, collection)?;
    let lookups: Vec<BTreeMap<&DocId, u64>> =
        runs.iter().map(|(_, r)| r.entries().iter().map(|e| (&e.doc, e.rank as u64)).collect()).collect();
    let docs: BTreeSet<&DocId> = lookups.iter().flat_map(|m| m.keys().copied()).collect();
    let size = collection.size();
    Ok(docs
        .into_iter()
        .map(|d| (d.clone(), lookups.iter().map(|m| m.get(d).copied().unwrap_or(size)).collect()))
        .collect())
}

/// Borda count: minus the average rank.
pub fn fuse_borda(runs: &[(RunId, RankedList)], collection: &Collection, cutoff: usize) -> Result<FusionRun> {
    let n = runs.len() as f64;
    let scored = rank_profiles(runs, collection)?
        .into_par_iter()
        .map(|(d, ranks)| {
            let total: u128 = ranks.iter().map(|&r| r as u128).sum();
            (d, -(total as f64) / n)
        })
        .collect();
    finish(scored, FusionKind::Borda, cutoff, runs)
}

/// Borda-log: minus the average base-2 log of the rank.
pub fn fuse_borda_log(runs: &[(RunId, RankedList)], collection: &Collection, cutoff: usize) -> Result<FusionRun> {
    let n = runs.len() as f64;
    let scored = rank_profiles(runs, collection)?
        .into_par_iter()
        .map(|(d, mut ranks)| {
            // fixed summation order keeps the result independent of run order
            ranks.sort_unstable();
            let total: f64 = ranks.iter().map(|&r| (r as f64).log2()).sum();
            (d, -total / n)
        })
        .collect();
    finish(scored, FusionKind::BordaLog, cutoff, runs)
}

fn score_key(x: Option<f64>) -> Option<u64> {
    x.map(|v| if v == 0.0 { 0 } else { v.to_bits() })
}

/// Greedy scan of the pivot run from the top, keeping a document only when
/// its OIQ and each of its per-run scores differ from those of every
/// document kept so far. Returned in pivot order.
pub fn fine_grained_subset(runs: &[(RunId, RankedList)], pivot: &str, collection: &Collection) -> Result<Vec<DocId>> {
    let pivot_run = runs
        .iter()
        .find(|(id, _)| id == pivot)
        .map(|(_, r)| r)
        .ok_or_else(|| Error::UnknownPivot(pivot.to_string()))?;
    let sigs = signals(runs, collection)?;
    let table = oiq(&SignalSet::new(sigs.clone(), collection.clone())?);
    let mut seen_info: HashSet<u64> = HashSet::new();
    let mut seen_scores: Vec<HashSet<Option<u64>>> = vec![HashSet::new(); sigs.len()];
    let mut kept = Vec::new();
    for d in pivot_run.docs() {
        let info = score_key(Some(table.get(d))).unwrap();
        let keys: Vec<Option<u64>> = sigs.iter().map(|s| score_key(s.score(d))).collect();
        if seen_info.contains(&info) || keys.iter().zip(&seen_scores).any(|(k, seen)| seen.contains(k)) {
            continue;
        }
        seen_info.insert(info);
        for (k, seen) in keys.into_iter().zip(&mut seen_scores) {
            seen.insert(k);
        }
        kept.push(d.clone());
    }
    Ok(kept)
}
