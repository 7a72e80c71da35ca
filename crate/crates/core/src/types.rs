//! Domain types shared by every other module: document ids, collections,
//! signals, ranked lists and gold standards.
//!
//! All types are immutable once built. Large payloads sit behind `Arc` so
//! clones are cheap and values can be shared across threads.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type TopicId = String;
pub type RunId = String;

/// Opaque document identifier. Ordering is lexicographic on bytes and is
/// only used for deterministic tie-breaking.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId(Arc<str>);

impl DocId {
    pub fn new(id: impl AsRef<str>) -> Result<Self> {
        let id = id.as_ref();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidDocId(id.to_string()));
        }
        Ok(DocId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for DocId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DocId::new(s)
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// The document universe: a nominal size plus the documents that were
/// actually observed. The remaining `size - observed.len()` documents are
/// virtual and never carry an explicit score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collection {
    size: u64,
    observed: Arc<BTreeSet<DocId>>,
}

impl Collection {
    pub fn new(size: u64, observed: impl IntoIterator<Item = DocId>) -> Result<Self> {
        let observed: BTreeSet<DocId> = observed.into_iter().collect();
        if size == 0 {
            return Err(Error::InvalidCollection("size must be at least 1".into()));
        }
        if (observed.len() as u64) > size {
            return Err(Error::InvalidCollection(format!(
                "size {size} is smaller than the {} observed documents",
                observed.len()
            )));
        }
        Ok(Collection { size, observed: Arc::new(observed) })
    }

    /// A collection whose size is exactly the number of observed documents
    /// (at least 1).
    pub fn from_observed(observed: impl IntoIterator<Item = DocId>) -> Self {
        let observed: BTreeSet<DocId> = observed.into_iter().collect();
        let size = (observed.len() as u64).max(1);
        Collection { size, observed: Arc::new(observed) }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn observed(&self) -> &BTreeSet<DocId> {
        &self.observed
    }

    pub fn contains(&self, doc: &DocId) -> bool {
        self.observed.contains(doc)
    }

    pub fn virtual_count(&self) -> u64 {
        self.size - self.observed.len() as u64
    }
}

/// A relevance signal: explicit finite scores for some documents, and an
/// implicit default for every other document that is strictly lower than
/// any explicit score.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Signal {
    scores: Arc<HashMap<DocId, f64>>,
}

impl Signal {
    pub fn new(scores: impl IntoIterator<Item = (DocId, f64)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (doc, score) in scores {
            if !score.is_finite() {
                return Err(Error::InvalidScore { doc: doc.to_string(), score });
            }
            if map.insert(doc.clone(), score).is_some() {
                return Err(Error::DuplicateDocument { topic: None, doc: doc.to_string() });
            }
        }
        Ok(Signal { scores: Arc::new(map) })
    }

    /// The signal with no explicit scores.
    pub fn empty() -> Self {
        Signal::default()
    }

    /// Explicit score of `doc`, `None` when the document sits at the
    /// implicit default.
    pub fn score(&self, doc: &DocId) -> Option<f64> {
        self.scores.get(doc).copied()
    }

    pub fn scores(&self) -> &HashMap<DocId, f64> {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Applies `f` to every explicit score. Intended for strictly monotone
    /// transforms; non-finite results are rejected.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Signal::new(self.scores.iter().map(|(d, &s)| (d.clone(), f(s))))
    }
}

/// Weak comparison `a >= b` where `None` is the implicit default.
#[inline]
pub fn score_geq(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x >= y,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedEntry {
    pub rank: usize,
    pub doc: DocId,
    pub score: f64,
}

/// An ordered ranking. Ranks run 1..n, scores never increase with rank and
/// each document appears once.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankedList {
    entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Builds a list from `(doc, score)` pairs already in rank order.
    pub fn new(entries: impl IntoIterator<Item = (DocId, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut out: Vec<RankedEntry> = Vec::new();
        for (i, (doc, score)) in entries.into_iter().enumerate() {
            if !score.is_finite() {
                return Err(Error::InvalidScore { doc: doc.to_string(), score });
            }
            if let Some(prev) = out.last() {
                if score > prev.score {
                    return Err(Error::InvalidRankedList(format!(
                        "score of {doc} at rank {} exceeds the score at rank {}",
                        i + 1,
                        i
                    )));
                }
            }
            if !seen.insert(doc.clone()) {
                return Err(Error::DuplicateDocument { topic: None, doc: doc.to_string() });
            }
            out.push(RankedEntry { rank: i + 1, doc, score });
        }
        Ok(RankedList { entries: out })
    }

    /// Builds a list from documents in rank order, assigning scores
    /// `n, n-1, ..., 1`.
    pub fn from_docs(docs: impl IntoIterator<Item = DocId>) -> Result<Self> {
        let docs: Vec<DocId> = docs.into_iter().collect();
        let n = docs.len();
        RankedList::new(docs.into_iter().enumerate().map(|(i, d)| (d, (n - i) as f64)))
    }

    /// Sorts by `(score desc, docid asc)` and ranks 1..n.
    pub fn from_scored(entries: impl IntoIterator<Item = (DocId, f64)>) -> Result<Self> {
        let mut v: Vec<(DocId, f64)> = entries.into_iter().collect();
        if let Some((doc, score)) = v.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::InvalidScore { doc: doc.to_string(), score: *score });
        }
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        RankedList::new(v)
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn docs(&self) -> impl Iterator<Item = &DocId> + '_ {
        self.entries.iter().map(|e| &e.doc)
    }

    /// 1-based rank of `doc`, if retrieved.
    pub fn rank_of(&self, doc: &DocId) -> Option<usize> {
        self.entries.iter().find(|e| &e.doc == doc).map(|e| e.rank)
    }
}

/// Keeps the first `min(k, n)` entries.
pub fn truncate(list: &RankedList, k: usize) -> RankedList {
    let entries = list.entries.iter().take(k).cloned().collect();
    RankedList { entries }
}

/// Converts a ranking into a signal whose explicit scores follow rank order
/// strictly: rank `i` of `n` gets score `n - i + 1`. Unlisted documents stay
/// at the implicit default.
pub fn signal_from_ranked_list(list: &RankedList, collection: &Collection) -> Result<Signal> {
    let n = list.len();
    let mut scores = HashMap::with_capacity(n);
    for e in &list.entries {
        if !collection.contains(&e.doc) {
            return Err(Error::UnknownDocument(e.doc.to_string()));
        }
        if scores.insert(e.doc.clone(), (n - e.rank + 1) as f64).is_some() {
            return Err(Error::DuplicateDocument { topic: None, doc: e.doc.to_string() });
        }
    }
    Ok(Signal { scores: Arc::new(scores) })
}

/// Binary relevance assessments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldStandard {
    relevant: Arc<BTreeSet<DocId>>,
}

impl GoldStandard {
    pub fn new(relevant: impl IntoIterator<Item = DocId>) -> Self {
        GoldStandard { relevant: Arc::new(relevant.into_iter().collect()) }
    }

    pub fn is_relevant(&self, doc: &DocId) -> bool {
        self.relevant.contains(doc)
    }

    pub fn relevant(&self) -> &BTreeSet<DocId> {
        &self.relevant
    }

    pub fn num_relevant(&self) -> usize {
        self.relevant.len()
    }

    /// 1 for relevant documents, 0 otherwise.
    pub fn grade(&self, doc: &DocId) -> u8 {
        u8::from(self.is_relevant(doc))
    }

    /// Score 1 on relevant documents, implicit default elsewhere.
    pub fn to_signal(&self) -> Signal {
        let scores = self.relevant.iter().map(|d| (d.clone(), 1.0)).collect();
        Signal { scores: Arc::new(scores) }
    }

    pub fn check_within(&self, collection: &Collection) -> Result<()> {
        match self.relevant.iter().find(|d| !collection.contains(d)) {
            Some(d) => Err(Error::UnknownDocument(d.to_string())),
            None => Ok(()),
        }
    }

    /// Relevant documents that also belong to `docs`.
    pub fn restrict_to(&self, docs: &BTreeSet<DocId>) -> GoldStandard {
        GoldStandard::new(self.relevant.intersection(docs).cloned())
    }
}

/// An ordered, non-empty set of signals over a shared collection.
#[derive(Clone, Debug)]
pub struct SignalSet {
    signals: Vec<Signal>,
    collection: Collection,
}

impl SignalSet {
    pub fn new(signals: Vec<Signal>, collection: Collection) -> Result<Self> {
        if signals.is_empty() {
            return Err(Error::EmptySignalSet);
        }
        for s in &signals {
            if let Some(d) = s.scores.keys().find(|d| !collection.contains(d)) {
                return Err(Error::UnknownDocument(d.to_string()));
            }
        }
        Ok(SignalSet { signals, collection })
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn collection(&self) -> &Collection {
        &self.collection
    }

    /// A new set with `signal` appended.
    pub fn with(&self, signal: Signal) -> Result<Self> {
        let mut signals = self.signals.clone();
        signals.push(signal);
        SignalSet::new(signals, self.collection.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<DocId> {
        names.iter().map(|n| DocId::new(n).unwrap()).collect()
    }

    #[test]
    fn doc_id_rejects_empty_and_whitespace() {
        assert!(DocId::new("").is_err());
        assert!(DocId::new("a b").is_err());
        assert!(DocId::new("a\tb").is_err());
        assert_eq!(DocId::new("GX000-00-0000000").unwrap().as_str(), "GX000-00-0000000");
    }

    #[test]
    fn collection_size_must_cover_observed() {
        assert!(Collection::new(0, []).is_err());
        assert!(Collection::new(1, ids(&["a", "b"])).is_err());
        let c = Collection::new(10, ids(&["a", "b"])).unwrap();
        assert_eq!(c.virtual_count(), 8);
        assert_eq!(Collection::from_observed([]).size(), 1);
    }

    #[test]
    fn worked_example_signal_preserves_order() {
        let c = Collection::new(1000, ids(&["d1", "d2", "d3", "d4"])).unwrap();
        let r1 = RankedList::from_docs(ids(&["d1", "d2", "d4"])).unwrap();
        let s = signal_from_ranked_list(&r1, &c).unwrap();
        let [d1, d2, d3, d4]: [DocId; 4] = ids(&["d1", "d2", "d3", "d4"]).try_into().unwrap();
        assert!(s.score(&d1) > s.score(&d2));
        assert!(s.score(&d2) > s.score(&d4));
        assert!(score_geq(s.score(&d4), s.score(&d3)) && !score_geq(s.score(&d3), s.score(&d4)));
    }

    #[test]
    fn empty_list_gives_empty_signal() {
        let c = Collection::new(5, []).unwrap();
        let s = signal_from_ranked_list(&RankedList::default(), &c).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn tied_scores_become_strict() {
        let docs = ids(&["a", "b", "c", "d"]);
        let list = RankedList::new(docs.iter().map(|d| (d.clone(), 0.5))).unwrap();
        let c = Collection::new(10, docs.clone()).unwrap();
        let s = signal_from_ranked_list(&list, &c).unwrap();
        for i in 0..docs.len() {
            for j in 0..docs.len() {
                let (si, sj) = (s.score(&docs[i]).unwrap(), s.score(&docs[j]).unwrap());
                assert_eq!(i < j, si > sj);
            }
        }
    }

    #[test]
    fn signal_from_list_errors() {
        let c = Collection::new(10, ids(&["a"])).unwrap();
        let list = RankedList::from_docs(ids(&["a", "z"])).unwrap();
        assert!(matches!(signal_from_ranked_list(&list, &c), Err(Error::UnknownDocument(_))));
        assert!(matches!(RankedList::from_docs(ids(&["a", "a"])), Err(Error::DuplicateDocument { .. })));
    }

    #[test]
    fn ranked_list_rejects_increasing_scores() {
        let d = ids(&["a", "b"]);
        assert!(RankedList::new([(d[0].clone(), 1.0), (d[1].clone(), 2.0)]).is_err());
        assert!(RankedList::new([(d[0].clone(), f64::NAN)]).is_err());
    }

    #[test]
    fn from_scored_breaks_ties_by_docid() {
        let d = ids(&["b", "a", "c"]);
        let l = RankedList::from_scored([(d[0].clone(), 1.0), (d[1].clone(), 1.0), (d[2].clone(), 2.0)]).unwrap();
        let order: Vec<&str> = l.docs().map(DocId::as_str).collect();
        assert_eq!(order, ["c", "a", "b"]);
        assert_eq!(l.entries()[2].rank, 3);
    }

    #[test]
    fn truncate_cases() {
        let l = RankedList::from_docs(ids(&["a", "b", "c", "d", "e"])).unwrap();
        let t = truncate(&l, 3);
        assert_eq!(t.len(), 3);
        assert_eq!(t.entries(), &l.entries()[..3]);
        let short = RankedList::from_docs(ids(&["a", "b"])).unwrap();
        assert_eq!(truncate(&short, 100), short);
        assert_eq!(truncate(&l, l.len()), l);
    }

    #[test]
    fn gold_signal_and_bounds() {
        let g = GoldStandard::new(ids(&["d1", "d4"]));
        let s = g.to_signal();
        assert_eq!(s.score(&DocId::new("d1").unwrap()), Some(1.0));
        assert_eq!(s.score(&DocId::new("d2").unwrap()), None);
        let c = Collection::new(10, ids(&["d1"])).unwrap();
        assert!(g.check_within(&c).is_err());
    }

    #[test]
    fn signal_set_requires_signals_in_collection() {
        let c = Collection::new(10, ids(&["a"])).unwrap();
        assert!(matches!(SignalSet::new(vec![], c.clone()), Err(Error::EmptySignalSet)));
        let s = Signal::new([(DocId::new("b").unwrap(), 1.0)]).unwrap();
        assert!(SignalSet::new(vec![s], c).is_err());
    }
}
