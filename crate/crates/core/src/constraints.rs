//! Executable versions of the five formal constraints on effectiveness
//! metrics: priority, deepness, deepness threshold, closeness threshold and
//! confidence.
//!
//! Each constraint is turned into a finite suite of generated run pairs over
//! a synthetic gold standard. A metric satisfies a constraint when it orders
//! every generated pair as expected, except for the closeness threshold,
//! which is existential over the tested `n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::MetricId;
use crate::types::{Collection, DocId, GoldStandard, RankedList};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Priority,
    Deepness,
    DeepnessThreshold,
    ClosenessThreshold,
    Confidence,
}

impl Constraint {
    pub const ALL: [Constraint; 5] = [
        Constraint::Priority,
        Constraint::Deepness,
        Constraint::DeepnessThreshold,
        Constraint::ClosenessThreshold,
        Constraint::Confidence,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Constraint::Priority => "Pri",
            Constraint::Deepness => "Deep",
            Constraint::DeepnessThreshold => "DeepTh",
            Constraint::ClosenessThreshold => "CloseTh",
            Constraint::Confidence => "Conf",
        }
    }

    /// Whether one satisfied case is enough.
    pub fn is_existential(self) -> bool {
        self == Constraint::ClosenessThreshold
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Constraint::ALL
            .into_iter()
            .find(|c| c.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown constraint {s:?}")))
    }
}

/// Two runs where `run_a` is expected to score strictly higher.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPair {
    pub run_a: RankedList,
    pub run_b: RankedList,
}

impl RunPair {
    fn gain(&self, metric: &MetricId, gold: &GoldStandard, collection: &Collection) -> Result<(f64, f64)> {
        Ok((metric.score(&self.run_a, gold, collection)?, metric.score(&self.run_b, gold, collection)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expectation {
    /// `score(run_a) > score(run_b)`.
    ABetter(RunPair),
    /// The swap gain of `shallow` exceeds the swap gain of `deep`.
    LargerShallowGain { shallow: RunPair, deep: RunPair },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintCase {
    pub constraint: Constraint,
    pub label: String,
    pub expectation: Expectation,
    pub gold: GoldStandard,
    pub collection: Collection,
}

/// Result of one case for one metric. `lhs > rhs` is the expectation.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub constraint: Constraint,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ConstraintCase {
    pub fn evaluate(&self, metric: &MetricId) -> Result<CaseOutcome> {
        let (lhs, rhs) = match &self.expectation {
            Expectation::ABetter(pair) => pair.gain(metric, &self.gold, &self.collection)?,
            Expectation::LargerShallowGain { shallow, deep } => {
                let (a, b) = shallow.gain(metric, &self.gold, &self.collection)?;
                let (c, d) = deep.gain(metric, &self.gold, &self.collection)?;
                (a - b, c - d)
            }
        };
        Ok(CaseOutcome { constraint: self.constraint, label: self.label.clone(), lhs, rhs, holds: lhs > rhs })
    }
}

fn doc(prefix: &str, i: usize) -> DocId {
    DocId::new(format!("{prefix}{i}")).expect("generated ids are valid")
}

fn nonrel(i: usize) -> DocId {
    doc("n", i)
}

fn rel(i: usize) -> DocId {
    doc("r", i)
}

/// Unretrieved relevant documents added to the swap and confidence golds.
const EXTRA_RELEVANT: usize = 4;

/// Swap fixture: a run of `len` non-relevant documents except for one
/// relevant document, plus a few relevant documents nobody retrieves.
struct SwapFixture {
    len: usize,
    gold: GoldStandard,
    collection: Collection,
}

impl SwapFixture {
    fn new(len: usize, collection_size: u64) -> Result<Self> {
        let relevant: Vec<DocId> = (1..=1 + EXTRA_RELEVANT).map(rel).collect();
        let observed = (1..len).map(nonrel).chain(relevant.iter().cloned());
        let collection =
            Collection::new(collection_size, observed).map_err(|e| Error::InvalidGeneratorParams(e.to_string()))?;
        Ok(SwapFixture { len, gold: GoldStandard::new(relevant), collection })
    }

    /// `run_b` has a non-relevant document at `depth` and the relevant one at
    /// `depth + 1`; `run_a` swaps them.
    fn pair(&self, depth: usize) -> Result<RunPair> {
        if depth == 0 || depth + 1 > self.len {
            return Err(Error::InvalidGeneratorParams(format!(
                "swap depth {depth} needs a run of length {} (have {})",
                depth + 1,
                self.len
            )));
        }
        let build = |rel_at: usize| {
            let mut next_nonrel = 1..;
            RankedList::from_docs((1..=self.len).map(|pos| {
                if pos == rel_at {
                    rel(1)
                } else {
                    nonrel(next_nonrel.next().unwrap())
                }
            }))
        };
        Ok(RunPair { run_a: build(depth)?, run_b: build(depth + 1)? })
    }
}

fn swap_len(depths: &[usize]) -> usize {
    depths.iter().max().map_or(2, |d| d + 1)
}

/// Priority cases: swapping a non-relevant document at depth `i` with the
/// relevant document right below it must increase the score.
pub fn gen_priority_cases(depths: &[usize], collection_size: u64) -> Result<Vec<ConstraintCase>> {
    let fx = SwapFixture::new(swap_len(depths), collection_size)?;
    depths
        .iter()
        .map(|&i| {
            Ok(ConstraintCase {
                constraint: Constraint::Priority,
                label: format!("depth={i}"),
                expectation: Expectation::ABetter(fx.pair(i)?),
                gold: fx.gold.clone(),
                collection: fx.collection.clone(),
            })
        })
        .collect()
}

/// Deepness cases: the gain of a swap at depth `i` must exceed the gain of
/// the same swap at a deeper `j`.
pub fn gen_deepness_cases(depth_pairs: &[(usize, usize)], collection_size: u64) -> Result<Vec<ConstraintCase>> {
    let max = depth_pairs.iter().map(|&(_, j)| j).max().unwrap_or(1);
    let fx = SwapFixture::new(max + 1, collection_size)?;
    depth_pairs
        .iter()
        .map(|&(i, j)| {
            if i >= j {
                return Err(Error::InvalidGeneratorParams(format!("deepness pair ({i},{j}) needs i < j")));
            }
            Ok(ConstraintCase {
                constraint: Constraint::Deepness,
                label: format!("i={i},j={j}"),
                expectation: Expectation::LargerShallowGain { shallow: fx.pair(i)?, deep: fx.pair(j)? },
                gold: fx.gold.clone(),
                collection: fx.collection.clone(),
            })
        })
        .collect()
}

/// Runs and gold shared by both threshold constraints: a single relevant
/// document on its own, versus `n` non-relevant documents followed by `n`
/// relevant ones. The gold holds exactly those `n` relevant documents.
fn threshold_fixture(n: usize, collection_size: u64) -> Result<(RankedList, RankedList, GoldStandard, Collection)> {
    if n == 0 {
        return Err(Error::InvalidGeneratorParams("threshold n must be at least 1".into()));
    }
    if (2 * n) as u64 >= collection_size {
        return Err(Error::InvalidGeneratorParams(format!(
            "threshold n={n} needs a collection larger than {} (have {collection_size})",
            2 * n
        )));
    }
    let single = RankedList::from_docs([rel(1)])?;
    let deep = RankedList::from_docs((1..=n).map(nonrel).chain((1..=n).map(rel)))?;
    let gold = GoldStandard::new((1..=n).map(rel));
    let collection = Collection::new(collection_size, deep.docs().cloned())?;
    Ok((single, deep, gold, collection))
}

/// Deepness threshold: one relevant document at the top beats `n` relevant
/// documents placed after `n` non-relevant ones, for a large `n`.
pub fn gen_deepness_threshold_case(n: usize, collection_size: u64) -> Result<ConstraintCase> {
    let (single, deep, gold, collection) = threshold_fixture(n, collection_size)?;
    Ok(ConstraintCase {
        constraint: Constraint::DeepnessThreshold,
        label: format!("n={n}"),
        expectation: Expectation::ABetter(RunPair { run_a: single, run_b: deep }),
        gold,
        collection,
    })
}

/// Closeness threshold: for a small `n`, `n` relevant documents after `n`
/// non-relevant ones beat a single relevant document.
pub fn gen_closeness_threshold_case(n: usize, collection_size: u64) -> Result<ConstraintCase> {
    let (single, deep, gold, collection) = threshold_fixture(n, collection_size)?;
    Ok(ConstraintCase {
        constraint: Constraint::ClosenessThreshold,
        label: format!("n={n}"),
        expectation: Expectation::ABetter(RunPair { run_a: deep, run_b: single }),
        gold,
        collection,
    })
}

/// Relevance pattern of the confidence base run (true = relevant).
const CONFIDENCE_BASE: [bool; 10] = [true, false, true, false, false, true, false, false, false, true];

/// Confidence: appending `t` non-relevant documents to a run must lower its
/// score.
pub fn gen_confidence_cases(tail_lengths: &[usize], collection_size: u64) -> Result<Vec<ConstraintCase>> {
    let (mut r, mut n) = (0, 0);
    let base: Vec<DocId> = CONFIDENCE_BASE
        .iter()
        .map(|&is_rel| {
            if is_rel {
                r += 1;
                rel(r)
            } else {
                n += 1;
                nonrel(n)
            }
        })
        .collect();
    let gold = GoldStandard::new((1..=r + EXTRA_RELEVANT).map(rel));
    let max_tail = tail_lengths.iter().copied().max().unwrap_or(0);
    let tail = |t: usize| (1..=t).map(|i| doc("t", i));
    let observed = base.iter().cloned().chain(tail(max_tail)).chain(gold.relevant().iter().cloned());
    let collection =
        Collection::new(collection_size, observed).map_err(|e| Error::InvalidGeneratorParams(e.to_string()))?;
    let run_a = RankedList::from_docs(base.iter().cloned())?;
    tail_lengths
        .iter()
        .map(|&t| {
            if t == 0 {
                return Err(Error::InvalidGeneratorParams("confidence tail must be at least 1".into()));
            }
            let run_b = RankedList::from_docs(base.iter().cloned().chain(tail(t)))?;
            Ok(ConstraintCase {
                constraint: Constraint::Confidence,
                label: format!("tail={t}"),
                expectation: Expectation::ABetter(RunPair { run_a: run_a.clone(), run_b }),
                gold: gold.clone(),
                collection: collection.clone(),
            })
        })
        .collect()
}

/// Parameters of the generated suites, recorded in every report.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteParams {
    /// Swap depths for priority; deepness uses every pair `i < j` of them.
    pub depths: Vec<usize>,
    pub swap_collection_size: u64,
    pub deepness_threshold_n: usize,
    pub deepness_threshold_collection_size: u64,
    pub closeness_threshold_ns: Vec<usize>,
    pub closeness_threshold_collection_size: u64,
    pub confidence_tails: Vec<usize>,
    pub confidence_collection_size: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            depths: vec![1, 2, 3, 5, 10, 25, 50, 75, 90],
            swap_collection_size: 10_000,
            deepness_threshold_n: 1000,
            deepness_threshold_collection_size: 1_000_000,
            closeness_threshold_ns: (2..=10).collect(),
            // The (2n-1)/n bound on beta is reached only when log|D| dominates
            // every other log term; at n=5 and beta=1.75 that needs |D| > 2^55.5.
            closeness_threshold_collection_size: 1_000_000_000_000_000_000,
            confidence_tails: vec![1, 5, 50],
            confidence_collection_size: 10_000,
        }
    }
}

impl fmt::Display for SuiteParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        write!(
            f,
            "depths={} swap_D={} deepth_n={} deepth_D={} closeth_n={} closeth_D={} conf_tails={} conf_D={}",
            join(&self.depths),
            self.swap_collection_size,
            self.deepness_threshold_n,
            self.deepness_threshold_collection_size,
            join(&self.closeness_threshold_ns),
            self.closeness_threshold_collection_size,
            join(&self.confidence_tails),
            self.confidence_collection_size
        )
    }
}

/// All generated cases for one parameter set.
#[derive(Clone, Debug)]
pub struct ConstraintSuite {
    pub params: SuiteParams,
    pub cases: Vec<ConstraintCase>,
}

impl ConstraintSuite {
    pub fn generate(params: SuiteParams) -> Result<Self> {
        let mut depths = params.depths.clone();
        depths.sort_unstable();
        depths.dedup();
        let pairs: Vec<(usize, usize)> =
            depths.iter().enumerate().flat_map(|(k, &i)| depths[k + 1..].iter().map(move |&j| (i, j))).collect();
        let mut cases = gen_priority_cases(&depths, params.swap_collection_size)?;
        cases.extend(gen_deepness_cases(&pairs, params.swap_collection_size)?);
        cases
            .push(gen_deepness_threshold_case(params.deepness_threshold_n, params.deepness_threshold_collection_size)?);
        for &n in &params.closeness_threshold_ns {
            cases.push(gen_closeness_threshold_case(n, params.closeness_threshold_collection_size)?);
        }
        cases.extend(gen_confidence_cases(&params.confidence_tails, params.confidence_collection_size)?);
        Ok(ConstraintSuite { params, cases })
    }

    pub fn check(&self, metric: &MetricId) -> Result<ConstraintReport> {
        let outcomes: Vec<CaseOutcome> = self.cases.par_iter().map(|c| c.evaluate(metric)).collect::<Result<_>>()?;
        let mut per_constraint: BTreeMap<Constraint, ConstraintTally> = BTreeMap::new();
        for c in Constraint::ALL {
            let (pass, fail) = outcomes.iter().filter(|o| o.constraint == c).fold((0, 0), |(p, f), o| {
                if o.holds {
                    (p + 1, f)
                } else {
                    (p, f + 1)
                }
            });
            let verdict = if c.is_existential() { pass > 0 } else { pass + fail > 0 && fail == 0 };
            per_constraint.insert(c, ConstraintTally { pass_count: pass, fail_count: fail, verdict });
        }
        Ok(ConstraintReport { metric: metric.clone(), per_constraint, outcomes, generator_params: self.params.clone() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintTally {
    pub pass_count: usize,
    pub fail_count: usize,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub metric: MetricId,
    pub per_constraint: BTreeMap<Constraint, ConstraintTally>,
    pub outcomes: Vec<CaseOutcome>,
    pub generator_params: SuiteParams,
}

impl ConstraintReport {
    pub fn verdict(&self, c: Constraint) -> bool {
        self.per_constraint.get(&c).is_some_and(|t| t.verdict)
    }

    pub fn satisfies_all(&self) -> bool {
        Constraint::ALL.into_iter().all(|c| self.verdict(c))
    }
}

/// Generates the suite for `params` and checks `metric` against it.
pub fn check_metric(metric: &MetricId, params: &SuiteParams) -> Result<ConstraintReport> {
    ConstraintSuite::generate(params.clone())?.check(metric)
}
