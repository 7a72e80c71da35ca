#![allow(dead_code)]

use std::collections::BTreeMap;

use obsinfo::{Collection, DocId, GoldStandard, RankedList, Signal, SignalSet};
use proptest::prelude::*;

#[derive(Clone, Debug)]
pub struct Instance {
    pub docs: Vec<DocId>,
    pub collection: Collection,
    pub signals: Vec<Signal>,
}

impl Instance {
    pub fn set(&self) -> SignalSet {
        SignalSet::new(self.signals.clone(), self.collection.clone()).unwrap()
    }
}

pub fn doc(i: usize) -> DocId {
    DocId::new(format!("d{i:02}")).unwrap()
}

/// Scores on a small grid so that ties and defaults are frequent.
pub fn signal_strategy(m: usize) -> impl Strategy<Value = Vec<Option<u8>>> {
    prop::collection::vec(prop::option::weighted(0.7, 0u8..6), m)
}

pub fn to_signal(scores: &[Option<u8>]) -> Signal {
    Signal::new(scores.iter().enumerate().filter_map(|(i, s)| s.map(|v| (doc(i), v as f64)))).unwrap()
}

/// Up to `max_docs` observed documents, up to `max_signals` signals and up
/// to 30 virtual documents.
pub fn instance_strategy(max_docs: usize, max_signals: usize) -> impl Strategy<Value = Instance> {
    (1..=max_docs, 1..=max_signals, 0u64..=30).prop_flat_map(|(m, k, extra)| {
        prop::collection::vec(signal_strategy(m), k).prop_map(move |raw| {
            let docs: Vec<DocId> = (0..m).map(doc).collect();
            let collection = Collection::new(m as u64 + extra, docs.clone()).unwrap();
            let signals = raw.iter().map(|s| to_signal(s)).collect();
            Instance { docs, collection, signals }
        })
    })
}

fn geq(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x >= y,
    }
}

/// OIQ of every document of the collection, virtual ones materialized,
/// by counting unanimous outscorers over all ordered pairs.
pub fn oracle_oiq(signals: &[Signal], collection: &Collection) -> BTreeMap<String, f64> {
    let mut universe: Vec<String> = collection.observed().iter().map(|d| d.to_string()).collect();
    for i in 0..collection.virtual_count() {
        universe.push(format!("~virtual{i}"));
    }
    let score = |s: &Signal, d: &str| DocId::new(d).ok().and_then(|id| s.score(&id));
    let n = universe.len() as f64;
    universe
        .iter()
        .map(|d| {
            let count =
                universe.iter().filter(|other| signals.iter().all(|s| geq(score(s, other), score(s, d)))).count();
            (d.clone(), -((count as f64) / n).log2())
        })
        .collect()
}

pub fn oracle_entropy(signals: &[Signal], collection: &Collection) -> f64 {
    let v = oracle_oiq(signals, collection);
    v.values().sum::<f64>() / v.len() as f64
}

/// OIE computed from oracle entropies.
pub fn oracle_oie(run: &RankedList, gold: &GoldStandard, collection: &Collection, a1: f64, a2: f64, beta: f64) -> f64 {
    let r = obsinfo::types::signal_from_ranked_list(run, collection).unwrap();
    let g = gold.to_signal();
    a1 * oracle_entropy(std::slice::from_ref(&r), collection)
        + a2 * oracle_entropy(std::slice::from_ref(&g), collection)
        - beta * oracle_entropy(&[r, g], collection)
}
