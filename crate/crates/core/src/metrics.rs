//! Effectiveness metrics behind one interface: the observational information
//! effectiveness (OIE) and the classical P@k, AP, RR, ERR, DCG and RBP.
//!
//! Every metric takes a ranked run, a binary gold standard and the topic's
//! collection. Classical metrics ignore the collection.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oiq::joint_entropy;
use crate::types::{signal_from_ranked_list, truncate, Collection, GoldStandard, RankedList, RunId, TopicId};

/// Weights of the OIE linear combination and the evaluation depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OieParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub cutoff: usize,
}

impl Default for OieParams {
    fn default() -> Self {
        OieParams { alpha1: 1.0, alpha2: 1.0, beta: 1.2, cutoff: 100 }
    }
}

impl OieParams {
    pub fn with_beta(beta: f64) -> Self {
        OieParams { beta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("OIE {name} must be positive, got {v}")));
            }
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidParameter("OIE cutoff must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether `1 < beta < (2n-1)/n`, the range in which OIE meets all five
    /// formal constraints for a closeness threshold of `n` documents.
    pub fn is_certified(&self, n: usize) -> bool {
        let n = n as f64;
        self.beta > 1.0 && self.beta < (2.0 * n - 1.0) / n
    }
}

/// Observational information effectiveness:
/// `alpha1*H({r}) + alpha2*H({g}) - beta*H({r,g})`, with `run` truncated to
/// `params.cutoff` first.
pub fn oie(run: &RankedList, gold: &GoldStandard, collection: &Collection, params: &OieParams) -> Result<f64> {
    params.validate()?;
    gold.check_within(collection)?;
    let run = truncate(run, params.cutoff);
    let r = signal_from_ranked_list(&run, collection)?;
    let g = gold.to_signal();
    let h_r = joint_entropy(std::slice::from_ref(&r), collection)?;
    let h_g = joint_entropy(std::slice::from_ref(&g), collection)?;
    let h_rg = joint_entropy(&[r, g], collection)?;
    Ok(params.alpha1 * h_r + params.alpha2 * h_g - params.beta * h_rg)
}

fn relevance_flags<'a>(
    run: &'a RankedList,
    gold: &'a GoldStandard,
    k: Option<usize>,
) -> impl Iterator<Item = bool> + 'a {
    run.docs().take(k.unwrap_or(usize::MAX)).map(move |d| gold.is_relevant(d))
}

/// Relevant documents in the top `k`, divided by `k`.
pub fn precision_at(run: &RankedList, gold: &GoldStandard, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = relevance_flags(run, gold, Some(k)).filter(|&r| r).count();
    hits as f64 / k as f64
}

/// Average precision with the total number of relevant documents as the
/// denominator.
pub fn average_precision(run: &RankedList, gold: &GoldStandard) -> Result<f64> {
    let total = gold.num_relevant();
    if total == 0 {
        return Err(Error::NoRelevantDocuments);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, rel) in relevance_flags(run, gold, None).enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

/// Reciprocal rank of the first relevant document within the cutoff.
pub fn reciprocal_rank(run: &RankedList, gold: &GoldStandard, k: Option<usize>) -> f64 {
    relevance_flags(run, gold, k).position(|r| r).map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Expected reciprocal rank with binary grades, so the stopping probability
/// of a relevant document is `(2^1 - 1) / 2^1 = 1/2`.
pub fn err(run: &RankedList, gold: &GoldStandard, k: Option<usize>) -> f64 {
    const MAX_GRADE: i32 = 1;
    let stop = |rel: bool| {
        let g = i32::from(rel);
        (2f64.powi(g) - 1.0) / 2f64.powi(MAX_GRADE)
    };
    let mut not_stopped = 1.0;
    let mut total = 0.0;
    for (i, rel) in relevance_flags(run, gold, k).enumerate() {
        let r = stop(rel);
        total += not_stopped * r / (i + 1) as f64;
        not_stopped *= 1.0 - r;
    }
    total
}

/// Discounted cumulative gain with binary gains and a `log2(i+1)` discount.
pub fn dcg(run: &RankedList, gold: &GoldStandard, k: Option<usize>) -> f64 {
    relevance_flags(run, gold, k).enumerate().filter(|(_, rel)| *rel).map(|(i, _)| 1.0 / ((i + 2) as f64).log2()).sum()
}

/// Rank-biased precision over the delivered run (no residual).
pub fn rbp(run: &RankedList, gold: &GoldStandard, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("RBP persistence must lie in (0,1), got {p}")));
    }
    let mut weight = 1.0;
    let mut sum = 0.0;
    for rel in relevance_flags(run, gold, None) {
        if rel {
            sum += weight;
        }
        weight *= p;
    }
    Ok((1.0 - p) * sum)
}

/// A metric together with its parameters.
///
/// The textual form is `NAME[:key=value]*`, e.g. `OIE:beta=1.2:cutoff=100`,
/// `P:cutoff=10`, `DCG`, `RBP:p=0.8`. `NAME@k` is accepted as shorthand for
/// `NAME:cutoff=k`. Equality, hashing and ordering follow the canonical text.
#[derive(Clone, Debug)]
pub enum MetricId {
    Oie(OieParams),
    Precision { cutoff: usize },
    AveragePrecision,
    ReciprocalRank { cutoff: Option<usize> },
    Err { cutoff: Option<usize> },
    Dcg { cutoff: Option<usize> },
    Rbp { p: f64 },
}

impl MetricId {
    pub fn name(&self) -> &'static str {
        match self {
            MetricId::Oie(_) => "OIE",
            MetricId::Precision { .. } => "P",
            MetricId::AveragePrecision => "AP",
            MetricId::ReciprocalRank { .. } => "RR",
            MetricId::Err { .. } => "ERR",
            MetricId::Dcg { .. } => "DCG",
            MetricId::Rbp { .. } => "RBP",
        }
    }

    pub fn cutoff(&self) -> Option<usize> {
        match self {
            MetricId::Oie(p) => Some(p.cutoff),
            MetricId::Precision { cutoff } => Some(*cutoff),
            MetricId::AveragePrecision | MetricId::Rbp { .. } => None,
            MetricId::ReciprocalRank { cutoff } | MetricId::Err { cutoff } | MetricId::Dcg { cutoff } => *cutoff,
        }
    }

    /// RBP's persistence or OIE's beta.
    pub fn param(&self) -> Option<f64> {
        match self {
            MetricId::Oie(p) => Some(p.beta),
            MetricId::Rbp { p } => Some(*p),
            _ => None,
        }
    }

    pub fn score(&self, run: &RankedList, gold: &GoldStandard, collection: &Collection) -> Result<f64> {
        match self {
            MetricId::Oie(params) => oie(run, gold, collection, params),
            MetricId::Precision { cutoff } => Ok(precision_at(run, gold, *cutoff)),
            MetricId::AveragePrecision => average_precision(run, gold),
            MetricId::ReciprocalRank { cutoff } => Ok(reciprocal_rank(run, gold, *cutoff)),
            MetricId::Err { cutoff } => Ok(err(run, gold, *cutoff)),
            MetricId::Dcg { cutoff } => Ok(dcg(run, gold, *cutoff)),
            MetricId::Rbp { p } => rbp(run, gold, *p),
        }
    }

    /// The fifteen metrics of the reference constraint and unanimity table.
    pub fn reference_set() -> Vec<MetricId> {
        use MetricId::*;
        vec![
            Oie(OieParams::with_beta(1.2)),
            Oie(OieParams::with_beta(1.0)),
            Rbp { p: 0.8 },
            Dcg { cutoff: None },
            AveragePrecision,
            Precision { cutoff: 100 },
            Dcg { cutoff: Some(50) },
            Err { cutoff: Some(50) },
            Err { cutoff: None },
            Precision { cutoff: 50 },
            Err { cutoff: Some(20) },
            Dcg { cutoff: Some(20) },
            Precision { cutoff: 20 },
            Precision { cutoff: 10 },
            ReciprocalRank { cutoff: Some(10) },
        ]
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            MetricId::Oie(p) => {
                write!(f, ":beta={}:cutoff={}", p.beta, p.cutoff)?;
                if p.alpha1 != 1.0 {
                    write!(f, ":alpha1={}", p.alpha1)?;
                }
                if p.alpha2 != 1.0 {
                    write!(f, ":alpha2={}", p.alpha2)?;
                }
                Ok(())
            }
            MetricId::Rbp { p } => write!(f, ":p={p}"),
            other => match other.cutoff() {
                Some(k) => write!(f, ":cutoff={k}"),
                None => Ok(()),
            },
        }
    }
}

impl PartialEq for MetricId {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl Eq for MetricId {}

impl Hash for MetricId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.to_string().hash(state);
    }
}

impl PartialOrd for MetricId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MetricId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: String| Error::InvalidMetricSpec { spec: spec.to_string(), reason };
        let mut parts = spec.trim().split(':');
        let head = parts.next().unwrap_or_default();
        let (name, at_cutoff) = match head.split_once('@') {
            Some((n, k)) => (n, Some(k.parse::<usize>().map_err(|e| bad(format!("cutoff {k:?}: {e}")))?)),
            None => (head, None),
        };
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            if kv.insert(k.trim().to_ascii_lowercase(), v.trim().to_string()).is_some() {
                return Err(bad(format!("key {k:?} given twice")));
            }
        }
        if let Some(k) = at_cutoff {
            if kv.insert("cutoff".into(), k.to_string()).is_some() {
                return Err(bad("cutoff given twice".into()));
            }
        }
        let metric = match name.to_ascii_uppercase().as_str() {
            "OIE" => {
                let d = OieParams::default();
                let cutoff = match kv.remove("cutoff") {
                    Some(v) => v.parse::<usize>().map_err(|e| bad(format!("cutoff={v}: {e}")))?,
                    None => d.cutoff,
                };
                let mut take_f64 = |key: &str| -> Result<Option<f64>> {
                    kv.remove(key).map(|v| v.parse::<f64>().map_err(|e| bad(format!("{key}={v}: {e}")))).transpose()
                };
                let params = OieParams {
                    alpha1: take_f64("alpha1")?.unwrap_or(d.alpha1),
                    alpha2: take_f64("alpha2")?.unwrap_or(d.alpha2),
                    beta: take_f64("beta")?.unwrap_or(d.beta),
                    cutoff,
                };
                params.validate().map_err(|e| bad(e.to_string()))?;
                MetricId::Oie(params)
            }
            "RBP" => {
                let p = kv.remove("p").ok_or_else(|| bad("RBP needs p=<value>".into()))?;
                let p: f64 = p.parse().map_err(|e| bad(format!("p={p}: {e}")))?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(bad(format!("p must lie in (0,1), got {p}")));
                }
                MetricId::Rbp { p }
            }
            other => {
                let cutoff = match kv.remove("cutoff") {
                    Some(v) => {
                        let k: usize = v.parse().map_err(|e| bad(format!("cutoff={v}: {e}")))?;
                        if k == 0 {
                            return Err(bad("cutoff must be at least 1".into()));
                        }
                        Some(k)
                    }
                    None => None,
                };
                match other {
                    "P" => MetricId::Precision { cutoff: cutoff.ok_or_else(|| bad("P needs a cutoff".into()))? },
                    "AP" if cutoff.is_none() => MetricId::AveragePrecision,
                    "AP" => return Err(bad("AP takes no cutoff".into())),
                    "RR" => MetricId::ReciprocalRank { cutoff },
                    "ERR" => MetricId::Err { cutoff },
                    "DCG" => MetricId::Dcg { cutoff },
                    _ => return Err(bad(format!("unknown metric {name:?}"))),
                }
            }
        };
        if let Some(k) = kv.keys().next() {
            return Err(bad(format!("unexpected key {k:?}")));
        }
        Ok(metric)
    }
}

/// Scores of one metric over a (topic, run) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub metric: MetricId,
    pub per_topic: BTreeMap<(TopicId, RunId), f64>,
    /// Macro-average over the topics of each run.
    pub means: BTreeMap<RunId, f64>,
}

/// Scores every run on every topic. All runs must cover the same topics and
/// every topic needs a gold standard and a collection.
pub fn evaluate_batch(
    runs: &BTreeMap<(TopicId, RunId), RankedList>,
    golds: &BTreeMap<TopicId, GoldStandard>,
    metric: &MetricId,
    collections: &BTreeMap<TopicId, Collection>,
) -> Result<MetricReport> {
    let topics: BTreeSet<&TopicId> = runs.keys().map(|(t, _)| t).collect();
    let run_ids: BTreeSet<&RunId> = runs.keys().map(|(_, r)| r).collect();
    for t in &topics {
        if !golds.contains_key(*t) {
            return Err(Error::MissingGold(t.to_string()));
        }
        if !collections.contains_key(*t) {
            return Err(Error::MissingCollection(t.to_string()));
        }
    }
    for t in &topics {
        for r in &run_ids {
            if !runs.contains_key(&(t.to_string(), r.to_string())) {
                return Err(Error::IncompleteGrid { run: r.to_string(), topic: t.to_string() });
            }
        }
    }

    let scored: Vec<((TopicId, RunId), f64)> = runs
        .par_iter()
        .map(|(key, list)| {
            let s = metric.score(list, &golds[&key.0], &collections[&key.0])?;
            Ok((key.clone(), s))
        })
        .collect::<Result<_>>()?;
    let per_topic: BTreeMap<(TopicId, RunId), f64> = scored.into_iter().collect();

    let mut sums: BTreeMap<RunId, (f64, usize)> = BTreeMap::new();
    for ((_, run), s) in &per_topic {
        let e = sums.entry(run.clone()).or_insert((0.0, 0));
        e.0 += s;
        e.1 += 1;
    }
    let means = sums.into_iter().map(|(r, (s, n))| (r, s / n as f64)).collect();
    Ok(MetricReport { metric: metric.clone(), per_topic, means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DocId;

    fn id(s: &str) -> DocId {
        DocId::new(s).unwrap()
    }

    fn run(docs: &[&str]) -> RankedList {
        RankedList::from_docs(docs.iter().map(|d| id(d))).unwrap()
    }

    fn gold(docs: &[&str]) -> GoldStandard {
        GoldStandard::new(docs.iter().map(|d| id(d)))
    }

    #[test]
    fn precision_cases() {
        let g = gold(&["a", "c"]);
        assert!((precision_at(&run(&["a", "b", "c"]), &g, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(precision_at(&RankedList::default(), &g, 10), 0.0);
        // run r1 of the worked example under g = {d1, d4}
        let t1 = gold(&["d1", "d4"]);
        assert!((precision_at(&run(&["d1", "d2", "d4"]), &t1, 3) - 2.0 / 3.0).abs() < 1e-15);
        // fixed denominator
        assert_eq!(precision_at(&run(&["a"]), &g, 10), 0.1);
    }

    #[test]
    fn average_precision_cases() {
        assert_eq!(average_precision(&run(&["a"]), &gold(&["a"])).unwrap(), 1.0);
        assert_eq!(average_precision(&run(&["b", "a"]), &gold(&["a"])).unwrap(), 0.5);
        let ap = average_precision(&run(&["d1", "d2", "d4"]), &gold(&["d1", "d4"])).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-15);
        assert!(matches!(average_precision(&run(&["a"]), &gold(&[])), Err(Error::NoRelevantDocuments)));
    }

    #[test]
    fn reciprocal_rank_cases() {
        let g = gold(&["d1", "d4"]);
        assert_eq!(reciprocal_rank(&run(&["d1", "x"]), &g, Some(10)), 1.0);
        assert_eq!(reciprocal_rank(&run(&["x", "y", "d1"]), &g, Some(2)), 0.0);
        assert_eq!(reciprocal_rank(&run(&["d3", "d1", "d2"]), &g, None), 0.5);
    }

    #[test]
    fn err_cases() {
        let g = gold(&["a", "b"]);
        assert_eq!(err(&run(&["a"]), &g, Some(5)), 0.5);
        assert_eq!(err(&run(&["x", "y"]), &g, None), 0.0);
        assert_eq!(err(&run(&["a", "b"]), &g, Some(2)), 0.625);
        assert_eq!(err(&run(&["a", "b"]), &g, Some(1)), 0.5);
    }

    #[test]
    fn dcg_cases() {
        let g = gold(&["a"]);
        assert_eq!(dcg(&run(&["a"]), &g, None), 1.0);
        assert!((dcg(&run(&["x", "a"]), &g, None) - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((dcg(&run(&["x", "a"]), &g, None) - 0.6309).abs() < 1e-4);
        assert_eq!(dcg(&RankedList::default(), &g, None), 0.0);
        assert_eq!(dcg(&run(&["x", "a"]), &g, Some(1)), 0.0);
    }

    #[test]
    fn rbp_cases() {
        let g = gold(&["a", "b", "c", "d", "e"]);
        assert!((rbp(&run(&["a"]), &g, 0.8).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(rbp(&RankedList::default(), &g, 0.8).unwrap(), 0.0);
        let all = run(&["a", "b", "c", "d", "e"]);
        for p in [0.5, 0.8, 0.95] {
            let v = rbp(&all, &g, p).unwrap();
            assert!(v >= 1.0 - p.powi(5) - 1e-12 && v <= 1.0);
        }
        for p in [0.0, 1.0, -0.1, 1.5] {
            assert!(rbp(&all, &g, p).is_err());
        }
    }

    #[test]
    fn oie_identical_runs_score_equal() {
        let docs: Vec<DocId> = ["a", "b", "c", "d"].map(id).to_vec();
        let c = Collection::new(100, docs).unwrap();
        let params = OieParams { beta: 1.0, ..Default::default() };
        let g = gold(&["a"]);
        let r = run(&["a", "b", "c"]);
        assert_eq!(oie(&r, &g, &c, &params).unwrap(), oie(&r.clone(), &g, &c, &params).unwrap());
    }

    #[test]
    fn oie_rejects_bad_params() {
        let c = Collection::new(10, [id("a")]).unwrap();
        let bad = OieParams { beta: 0.0, ..Default::default() };
        assert!(oie(&run(&["a"]), &gold(&["a"]), &c, &bad).is_err());
    }

    #[test]
    fn certification_range() {
        assert!(OieParams::with_beta(1.2).is_certified(5));
        assert!(!OieParams::with_beta(1.0).is_certified(5));
        assert!(!OieParams::with_beta(1.8).is_certified(5));
        assert!(OieParams::with_beta(1.79).is_certified(5));
    }

    #[test]
    fn metric_spec_parsing() {
        let m: MetricId = "OIE:beta=1.2:cutoff=100".parse().unwrap();
        assert!(matches!(m, MetricId::Oie(p) if p.beta == 1.2 && p.cutoff == 100));
        assert_eq!("DCG:cutoff=20".parse::<MetricId>().unwrap(), MetricId::Dcg { cutoff: Some(20) });
        assert_eq!("P@10".parse::<MetricId>().unwrap(), MetricId::Precision { cutoff: 10 });
        assert_eq!("rbp:p=0.99".parse::<MetricId>().unwrap(), MetricId::Rbp { p: 0.99 });
        for bad in [
            "P",
            "RBP",
            "RBP:p=1",
            "XYZ",
            "DCG:cutoff=0",
            "AP:cutoff=3",
            "ERR:k=3",
            "OIE:beta=-1",
            "P:cutoff=1:cutoff=2",
        ] {
            assert!(bad.parse::<MetricId>().is_err(), "{bad} should not parse");
        }
        for m in MetricId::reference_set() {
            assert_eq!(m.to_string().parse::<MetricId>().unwrap(), m);
        }
    }

    #[test]
    fn batch_means_and_errors() {
        let c = Collection::new(10, ["d1", "d2", "d3", "d4"].map(id)).unwrap();
        let mut runs = BTreeMap::new();
        runs.insert(("t1".to_string(), "r1".to_string()), run(&["d1", "d2", "d4"]));
        let mut golds = BTreeMap::new();
        golds.insert("t1".to_string(), gold(&["d1", "d4"]));
        let mut cols = BTreeMap::new();
        cols.insert("t1".to_string(), c.clone());
        let m = MetricId::Precision { cutoff: 3 };
        let rep = evaluate_batch(&runs, &golds, &m, &cols).unwrap();
        assert!((rep.means["r1"] - 2.0 / 3.0).abs() < 1e-15);

        runs.insert(("t2".to_string(), "r2".to_string()), run(&["d1"]));
        assert!(matches!(evaluate_batch(&runs, &golds, &m, &cols), Err(Error::MissingGold(_))));
        golds.insert("t2".to_string(), gold(&["d1"]));
        cols.insert("t2".to_string(), c);
        assert!(matches!(evaluate_batch(&runs, &golds, &m, &cols), Err(Error::IncompleteGrid { .. })));
    }
}
