//! Unanimous outscoring, observational information quantity (OIQ) and
//! observational entropy.
//!
//! A document `d'` unanimously outscores `d` under a signal set when every
//! signal scores `d'` at least as high as `d`. The OIQ of `d` is the negative
//! log of the fraction of the collection that unanimously outscores it, and
//! the observational entropy is the mean OIQ over the whole collection.
//!
//! Virtual documents (never scored) and observed documents sitting at the
//! default of every signal are outscored by the entire collection, so their
//! OIQ is exactly 0. Conversely such documents can never outscore a document
//! holding an explicit score, which lets the count run over explicitly scored
//! documents only.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{score_geq, Collection, DocId, Signal, SignalSet};

/// Base of every logarithm in the toolkit (bits).
pub const LOG_BASE: f64 = 2.0;

/// `-log(p)` in [`LOG_BASE`].
#[inline]
pub fn neg_log(p: f64) -> f64 {
    -p.log2()
}

/// Information of a document outscored by `count` of `size` documents.
#[inline]
pub fn information(count: u64, size: u64) -> f64 {
    debug_assert!(count >= 1 && count <= size);
    neg_log(count as f64 / size as f64)
}

/// Per-document OIQ. Documents missing from `values` are virtual (or at the
/// default of every signal) and have OIQ 0.
#[derive(Clone, Debug, PartialEq)]
pub struct OiqTable {
    values: BTreeMap<DocId, f64>,
    collection_size: u64,
}

impl OiqTable {
    pub const VIRTUAL_VALUE: f64 = 0.0;

    pub fn get(&self, doc: &DocId) -> f64 {
        self.values.get(doc).copied().unwrap_or(Self::VIRTUAL_VALUE)
    }

    pub fn values(&self) -> &BTreeMap<DocId, f64> {
        &self.values
    }

    pub fn collection_size(&self) -> u64 {
        self.collection_size
    }

    /// `(1/|D|) * sum of values`; virtual documents add nothing.
    pub fn mean(&self) -> f64 {
        self.values.values().sum::<f64>() / self.collection_size as f64
    }
}

/// `true` iff every signal in `gamma` scores `a` at least as high as `b`.
pub fn outscores(a: &DocId, b: &DocId, gamma: &SignalSet) -> bool {
    gamma.signals().iter().all(|s| score_geq(s.score(a), s.score(b)))
}

/// One distinct score vector (an observation) and the documents sharing it.
#[derive(Debug)]
struct Observation {
    signature: Vec<Option<f64>>,
    docs: Vec<DocId>,
    outscored_by: u64,
}

fn cmp_score_desc(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    // None is the lowest score
    match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (Some(_), None) => std::cmp::Ordering::Less,
        (Some(x), Some(y)) => y.total_cmp(&x),
    }
}

fn key_bits(s: Option<f64>) -> Option<u64> {
    // -0.0 and 0.0 compare equal, so they must share a key
    s.map(|x| if x == 0.0 { 0 } else { x.to_bits() })
}

/// Groups the explicitly scored documents of `signals` by signature and
/// counts, for each group, how many documents unanimously outscore it.
fn observations(signals: &[Signal]) -> Vec<Observation> {
    let mut index: HashMap<Vec<Option<u64>>, usize> = HashMap::new();
    let mut groups: Vec<Observation> = Vec::new();
    let mut seen: std::collections::HashSet<&DocId> = std::collections::HashSet::new();
    for s in signals {
        for doc in s.scores().keys() {
            if !seen.insert(doc) {
                continue;
            }
            let signature: Vec<Option<f64>> = signals.iter().map(|t| t.score(doc)).collect();
            let key: Vec<Option<u64>> = signature.iter().map(|&x| key_bits(x)).collect();
            match index.get(&key) {
                Some(&i) => groups[i].docs.push(doc.clone()),
                None => {
                    index.insert(key, groups.len());
                    groups.push(Observation { signature, docs: vec![doc.clone()], outscored_by: 0 });
                }
            }
        }
    }
    // Lexicographic descending order on signatures: deterministic, and every
    // possible outscorer of a group shares or exceeds its first coordinate.
    groups.sort_by(|a, b| {
        a.signature
            .iter()
            .zip(&b.signature)
            .map(|(&x, &y)| cmp_score_desc(x, y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for g in &mut groups {
        g.docs.sort();
    }

    // end of the block of groups whose first coordinate is >= group i's
    let mut block_end = vec![0usize; groups.len()];
    let mut i = groups.len();
    while i > 0 {
        let first = groups[i - 1].signature[0];
        let mut j = i;
        while j > 0 && cmp_score_desc(groups[j - 1].signature[0], first).is_eq() {
            j -= 1;
        }
        for slot in &mut block_end[j..i] {
            *slot = i;
        }
        i = j;
    }

    let counts: Vec<u64> = (0..groups.len())
        .into_par_iter()
        .map(|u| {
            let target = &groups[u].signature;
            groups[..block_end[u]]
                .iter()
                .filter(|v| v.signature.iter().zip(target).all(|(&a, &b)| score_geq(a, b)))
                .map(|v| v.docs.len() as u64)
                .sum()
        })
        .collect();
    for (g, c) in groups.iter_mut().zip(counts) {
        g.outscored_by = c;
    }
    groups
}

/// OIQ of every explicitly scored document under `gamma`.
pub fn oiq(gamma: &SignalSet) -> OiqTable {
    let size = gamma.collection().size();
    let mut values = BTreeMap::new();
    for obs in observations(gamma.signals()) {
        let value = information(obs.outscored_by, size);
        for d in obs.docs {
            values.insert(d, value);
        }
    }
    OiqTable { values, collection_size: size }
}

/// Observational entropy: mean OIQ across the collection.
pub fn entropy(gamma: &SignalSet) -> f64 {
    entropy_of(gamma.signals(), gamma.collection().size())
}

fn entropy_of(signals: &[Signal], size: u64) -> f64 {
    // Summing per document in id order makes the result independent of how
    // documents group into observations, so adding a signal can never lower
    // the floating-point sum when no term decreases.
    let mut terms: Vec<(DocId, u64)> = observations(signals)
        .into_iter()
        .flat_map(|o| {
            let c = o.outscored_by;
            o.docs.into_iter().map(move |d| (d, c))
        })
        .collect();
    terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let total: f64 = terms.iter().map(|&(_, c)| information(c, size)).sum();
    total / size as f64
}

/// Entropy of the set formed by `signals` over `collection`.
pub fn joint_entropy(signals: &[Signal], collection: &Collection) -> Result<f64> {
    if signals.is_empty() {
        return Err(Error::EmptySignalSet);
    }
    let set = SignalSet::new(signals.to_vec(), collection.clone())?;
    Ok(entropy(&set))
}
