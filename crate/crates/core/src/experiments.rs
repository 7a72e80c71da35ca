//! Synthetic test collections and the three desk-scale studies: cumulative
//! evidence, mergeability and fusion effectiveness.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fusion::{fine_grained_subset, fuse_borda, fuse_borda_log};
use crate::metrics::{oie, OieParams};
use crate::oiq::oiq;
use crate::types::{signal_from_ranked_list, Collection, DocId, GoldStandard, RankedList, RunId, SignalSet, TopicId};

/// Derives an independent stream seed for `(seed, id)` (splitmix64 finaliser).
pub fn derive_seed(seed: u64, id: u64) -> u64 {
    let mut z = seed ^ id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, id))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub topics: usize,
    pub runs_per_topic: usize,
    pub docs_per_run: usize,
    pub collection_size: u64,
    pub relevant_per_topic: usize,
    /// Mean weight of relevance in a system's score, in (0, 1].
    pub system_quality: f64,
    /// Half-width of the uniform spread of quality across systems.
    pub quality_spread: f64,
    /// Share of score noise common to all systems, in [0, 1].
    pub correlation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            topics: 10,
            runs_per_topic: 10,
            docs_per_run: 100,
            collection_size: 500,
            relevant_per_topic: 50,
            system_quality: 0.75,
            quality_spread: 0.01,
            correlation: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGeneratorParams(m.to_string()));
        if self.topics == 0 || self.runs_per_topic == 0 || self.docs_per_run == 0 {
            return bad("topics, runs_per_topic and docs_per_run must be positive");
        }
        if self.docs_per_run as u64 > self.collection_size {
            return bad("docs_per_run exceeds collection_size");
        }
        if self.relevant_per_topic == 0 || self.relevant_per_topic as u64 > self.collection_size {
            return bad("relevant_per_topic must be in 1..=collection_size");
        }
        if !(self.system_quality > 0.0 && self.system_quality <= 1.0) {
            return bad("system_quality must be in (0, 1]");
        }
        if !(self.quality_spread >= 0.0 && self.quality_spread.is_finite()) {
            return bad("quality_spread must be a finite value >= 0");
        }
        if !(0.0..=1.0).contains(&self.correlation) {
            return bad("correlation must be in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topic {
    pub runs: BTreeMap<RunId, RankedList>,
    pub gold: GoldStandard,
    pub collection: Collection,
}

impl Topic {
    fn run_pairs(&self) -> Vec<(RunId, RankedList)> {
        self.runs.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub topics: BTreeMap<TopicId, Topic>,
}

impl Dataset {
    /// Assembles a dataset from per-run topic rankings and per-topic golds.
    /// Every topic's collection covers the documents its runs and gold
    /// mention; its size is `collection_size` or that union's size.
    pub fn from_parts(
        runs: &BTreeMap<RunId, BTreeMap<TopicId, RankedList>>,
        golds: &BTreeMap<TopicId, GoldStandard>,
        collection_size: Option<u64>,
    ) -> Result<Self> {
        let mut topics = BTreeMap::new();
        let topic_ids: BTreeSet<&TopicId> = runs.values().flat_map(|m| m.keys()).collect();
        for t in topic_ids {
            let gold = golds.get(t).ok_or_else(|| Error::MissingGold(t.clone()))?.clone();
            let topic_runs: BTreeMap<RunId, RankedList> =
                runs.iter().filter_map(|(r, m)| m.get(t).map(|l| (r.clone(), l.clone()))).collect();
            let observed: BTreeSet<DocId> =
                topic_runs.values().flat_map(|l| l.docs().cloned()).chain(gold.relevant().iter().cloned()).collect();
            let collection = match collection_size {
                Some(n) => Collection::new(n, observed)?,
                None => Collection::from_observed(observed),
            };
            topics.insert(t.clone(), Topic { runs: topic_runs, gold, collection });
        }
        Ok(Dataset { topics })
    }

    /// Runs regrouped as `run -> topic -> ranking`.
    pub fn runs_by_system(&self) -> BTreeMap<RunId, BTreeMap<TopicId, RankedList>> {
        let mut out: BTreeMap<RunId, BTreeMap<TopicId, RankedList>> = BTreeMap::new();
        for (t, topic) in &self.topics {
            for (r, l) in &topic.runs {
                out.entry(r.clone()).or_default().insert(t.clone(), l.clone());
            }
        }
        out
    }
}

pub fn synth_topic_id(i: usize) -> TopicId {
    format!("{}", 401 + i)
}

pub fn synth_run_id(i: usize) -> RunId {
    format!("sys{:02}", i + 1)
}

fn synth_doc(i: u64) -> DocId {
    DocId::new(format!("D{i:07}")).expect("generated ids are valid")
}

fn generate_topic(config: &SynthConfig, index: usize) -> Result<Topic> {
    let mut rng = rng_for(config.seed, index as u64);
    let size = config.collection_size as usize;
    let mut relevant = vec![false; size];
    for i in sample(&mut rng, size, config.relevant_per_topic) {
        relevant[i] = true;
    }
    let common: Vec<f64> = (0..size).map(|_| rng.sample(StandardNormal)).collect();
    let (wc, wi) = (config.correlation.sqrt(), (1.0 - config.correlation).sqrt());
    let mut runs = BTreeMap::new();
    for s in 0..config.runs_per_topic {
        let jitter: f64 = rng.random_range(-1.0..=1.0);
        let q = (config.system_quality + config.quality_spread * jitter).clamp(0.0, 1.0);
        let mut scored: Vec<(usize, f64)> = (0..size)
            .map(|d| {
                let own: f64 = rng.sample(StandardNormal);
                let rel = if relevant[d] { 1.0 } else { 0.0 };
                (d, q * rel + (1.0 - q) * (wc * common[d] + wi * own))
            })
            .collect();
        // (score desc, docid asc); ids are zero-padded so index order is id order
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(config.docs_per_run);
        let list = RankedList::from_scored(scored.into_iter().map(|(d, v)| (synth_doc(d as u64), v)))?;
        runs.insert(synth_run_id(s), list);
    }
    let gold = GoldStandard::new((0..size).filter(|&d| relevant[d]).map(|d| synth_doc(d as u64)));
    let observed: BTreeSet<DocId> =
        runs.values().flat_map(|l: &RankedList| l.docs().cloned()).chain(gold.relevant().iter().cloned()).collect();
    let collection = Collection::new(config.collection_size, observed)?;
    Ok(Topic { runs, gold, collection })
}

/// Deterministic synthetic collection: each system scores every document by
/// `q * rel + (1 - q) * noise`, where the noise mixes a component shared by
/// all systems with a private one, and returns its top `docs_per_run`.
pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let topics: Vec<Topic> =
        (0..config.topics).into_par_iter().map(|i| generate_topic(config, i)).collect::<Result<_>>()?;
    Ok(Dataset { topics: topics.into_iter().enumerate().map(|(i, t)| (synth_topic_id(i), t)).collect() })
}

/// One point of an experiment. `x` or `y` is `None` when undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub meta: BTreeMap<String, String>,
}

impl TrialRecord {
    pub fn is_defined(&self) -> bool {
        matches!((self.x, self.y), (Some(x), Some(y)) if x.is_finite() && y.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSummary {
    pub total: usize,
    pub defined: usize,
    pub successes: usize,
}

impl TrialSummary {
    /// Share of defined trials that succeeded (0 when none are defined).
    pub fn rate(&self) -> f64 {
        if self.defined == 0 {
            0.0
        } else {
            self.successes as f64 / self.defined as f64
        }
    }
}

/// Counts defined trials and those whose `(x, y)` satisfy `success`.
pub fn summarize(records: &[TrialRecord], success: impl Fn(f64, f64) -> bool) -> TrialSummary {
    let defined: Vec<(f64, f64)> =
        records.iter().filter(|r| r.is_defined()).map(|r| (r.x.unwrap(), r.y.unwrap())).collect();
    TrialSummary {
        total: records.len(),
        defined: defined.len(),
        successes: defined.iter().filter(|&&(x, y)| success(x, y)).count(),
    }
}

/// Topics eligible for an experiment needing `min_runs` runs.
fn eligible(data: &Dataset, min_runs: usize) -> Result<Vec<(&TopicId, &Topic)>> {
    let v: Vec<_> = data.topics.iter().filter(|(_, t)| t.runs.len() >= min_runs).collect();
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("no topic has at least {min_runs} runs")));
    }
    Ok(v)
}

struct Draw<'a> {
    topic_id: &'a TopicId,
    topic: &'a Topic,
    chosen: Vec<(RunId, RankedList)>,
    pivot: usize,
}

fn draw<'a>(topics: &[(&'a TopicId, &'a Topic)], k: usize, seed: u64, trial: u64) -> Draw<'a> {
    let mut rng = rng_for(seed, trial);
    let (topic_id, topic) = topics[rng.random_range(0..topics.len())];
    let pairs = topic.run_pairs();
    let chosen: Vec<(RunId, RankedList)> =
        sample(&mut rng, pairs.len(), k).into_iter().map(|i| pairs[i].clone()).collect();
    let pivot = rng.random_range(0..k);
    Draw { topic_id, topic, chosen, pivot }
}

fn base_meta(d: &Draw) -> BTreeMap<String, String> {
    let ids: Vec<&str> = d.chosen.iter().map(|(r, _)| r.as_str()).collect();
    BTreeMap::from([
        ("topic".to_string(), d.topic_id.clone()),
        ("runs".to_string(), ids.join(";")),
        ("pivot".to_string(), d.chosen[d.pivot].0.clone()),
    ])
}

/// `P(g(d) >= g(d') | s(d) >= s(d'))` over ordered pairs of distinct pool
/// documents, where `rel[i]` tells whether document `i` is relevant.
/// `None` when the conditioning event is empty.
pub fn conditional_gold_agreement(scores: &[f64], rel: &[bool]) -> Option<f64> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rel_sorted: Vec<f64> = scores.iter().zip(rel).filter(|(_, &r)| r).map(|(&s, _)| s).collect();
    rel_sorted.sort_by(f64::total_cmp);
    let mut cond = 0u64;
    let mut bad = 0u64;
    for (&s, &r) in scores.iter().zip(rel) {
        // documents scored at most s, minus the document itself
        cond += (sorted.partition_point(|&v| v <= s) - 1) as u64;
        if !r {
            bad += rel_sorted.partition_point(|&v| v <= s) as u64;
        }
    }
    (cond > 0).then(|| (cond - bad) as f64 / cond as f64)
}

/// Number of top-ranked documents per run that enter the judged pool.
pub const POOL_DEPTH: usize = 100;

/// Each trial draws a topic, `signals_per_trial` of its runs and a pivot run
/// among them. Over the pooled documents of that topic, `x` is the chance
/// that the gold agrees with the pivot on a pair it orders, and `y` the same
/// chance for the OIQ of the chosen runs.
pub fn cumulative_evidence_experiment(
    data: &Dataset,
    trials: u64,
    signals_per_trial: usize,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if signals_per_trial == 0 {
        return Err(Error::InvalidParameter("signals_per_trial must be positive".into()));
    }
    let topics = eligible(data, signals_per_trial)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let d = draw(&topics, signals_per_trial, seed, trial);
            let pool: BTreeSet<&DocId> = d.topic.runs.values().flat_map(|l| l.docs().take(POOL_DEPTH)).collect();
            let signals = d
                .chosen
                .iter()
                .map(|(_, l)| signal_from_ranked_list(l, &d.topic.collection))
                .collect::<Result<Vec<_>>>()?;
            let table = oiq(&SignalSet::new(signals.clone(), d.topic.collection.clone())?);
            let pivot = &signals[d.pivot];
            let rel: Vec<bool> = pool.iter().map(|doc| d.topic.gold.is_relevant(doc)).collect();
            let gamma: Vec<f64> = pool.iter().map(|doc| pivot.score(doc).unwrap_or(f64::NEG_INFINITY)).collect();
            let info: Vec<f64> = pool.iter().map(|doc| table.get(doc)).collect();
            let mut meta = base_meta(&d);
            meta.insert("pool".into(), pool.len().to_string());
            Ok(TrialRecord {
                trial_id: trial,
                x: conditional_gold_agreement(&gamma, &rel),
                y: conditional_gold_agreement(&info, &rel),
                meta,
            })
        })
        .collect()
}

/// Runs drawn per mergeability trial.
pub const MERGE_SIGNALS: usize = 5;

/// Each trial draws a topic, five runs and a pivot among them, then keeps
/// the fine-grained subset of the pivot's documents. Restricted to that
/// subset (as the whole collection), `x` is the OIE of the pivot ranking and
/// `y` the OIE of the ranking by OIQ.
pub fn mergeability_experiment(data: &Dataset, trials: u64, beta: f64, seed: u64) -> Result<Vec<TrialRecord>> {
    let params = OieParams::with_beta(beta);
    params.validate()?;
    let topics = eligible(data, MERGE_SIGNALS)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let d = draw(&topics, MERGE_SIGNALS, seed, trial);
            let coll = &d.topic.collection;
            let subset = fine_grained_subset(&d.chosen, &d.chosen[d.pivot].0, coll)?;
            let mut meta = base_meta(&d);
            meta.insert("subset".into(), subset.len().to_string());
            if subset.len() < 2 {
                return Ok(TrialRecord { trial_id: trial, x: None, y: None, meta });
            }
            let signals = d.chosen.iter().map(|(_, l)| signal_from_ranked_list(l, coll)).collect::<Result<Vec<_>>>()?;
            let table = oiq(&SignalSet::new(signals, coll.clone())?);
            let keep: BTreeSet<DocId> = subset.iter().cloned().collect();
            let sub_coll = Collection::new(keep.len() as u64, keep.iter().cloned())?;
            let sub_gold = d.topic.gold.restrict_to(&keep);
            let params = OieParams { cutoff: keep.len().max(params.cutoff), ..params };
            let pivot_list = RankedList::from_docs(subset.iter().cloned())?;
            let fused = RankedList::from_scored(subset.iter().map(|doc| (doc.clone(), table.get(doc))))?;
            Ok(TrialRecord {
                trial_id: trial,
                x: Some(oie(&pivot_list, &sub_gold, &sub_coll, &params)?),
                y: Some(oie(&fused, &sub_gold, &sub_coll, &params)?),
                meta,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionEvalReport {
    pub per_system: BTreeMap<RunId, f64>,
    pub max_single: f64,
    pub borda: f64,
    pub borda_log: f64,
    pub topics: usize,
}

/// Mean OIE over topics of every system and of the Borda and Borda-log
/// fusions of all systems, each truncated at `cutoff`.
pub fn fusion_eval_experiment(data: &Dataset, beta: f64, cutoff: usize) -> Result<FusionEvalReport> {
    let params = OieParams { cutoff, ..OieParams::with_beta(beta) };
    params.validate()?;
    let topics = eligible(data, 1)?;
    let rows: Vec<(BTreeMap<RunId, f64>, f64, f64)> = topics
        .par_iter()
        .map(|(_, t)| {
            let pairs = t.run_pairs();
            let systems = pairs
                .iter()
                .map(|(r, l)| Ok((r.clone(), oie(l, &t.gold, &t.collection, &params)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let borda = fuse_borda(&pairs, &t.collection, cutoff)?.fused;
            let borda_log = fuse_borda_log(&pairs, &t.collection, cutoff)?.fused;
            Ok((
                systems,
                oie(&borda, &t.gold, &t.collection, &params)?,
                oie(&borda_log, &t.gold, &t.collection, &params)?,
            ))
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let mut sums: BTreeMap<RunId, (f64, usize)> = BTreeMap::new();
    for (systems, _, _) in &rows {
        for (r, &v) in systems {
            let e = sums.entry(r.clone()).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    let per_system: BTreeMap<RunId, f64> = sums.into_iter().map(|(r, (s, c))| (r, s / c as f64)).collect();
    let max_single = per_system.values().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FusionEvalReport {
        per_system,
        max_single,
        borda: rows.iter().map(|r| r.1).sum::<f64>() / n,
        borda_log: rows.iter().map(|r| r.2).sum::<f64>() / n,
        topics: rows.len(),
    })
}
