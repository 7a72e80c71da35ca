mod common;

use std::collections::{BTreeMap, HashMap};

use common::doc;
use obsinfo::fusion::{fine_grained_subset, fuse_borda, fuse_borda_log, fuse_oiq};
use obsinfo::meta::ScoreGrid;
use obsinfo::{metric_unanimity, mu_ranking, Collection, DocId, FusionKind, FusionMethod, MetricId, RankedList, RunId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KINDS: [FusionKind; 3] = [FusionKind::Oiq, FusionKind::Borda, FusionKind::BordaLog];

fn run_strategy(universe: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::sample::subsequence((0..universe).collect::<Vec<_>>(), 1..=universe).prop_shuffle()
}

fn named(runs: &[Vec<usize>]) -> Vec<(RunId, RankedList)> {
    runs.iter()
        .enumerate()
        .map(|(i, r)| (format!("run{i}"), RankedList::from_docs(r.iter().map(|&d| doc(d))).unwrap()))
        .collect()
}

fn order(list: &RankedList) -> Vec<DocId> {
    list.docs().cloned().collect()
}

/// Kendall tau-b between two score assignments over the same documents.
fn kendall_tau(a: &HashMap<DocId, f64>, b: &HashMap<DocId, f64>) -> f64 {
    let docs: Vec<&DocId> = a.keys().collect();
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..docs.len() {
        for j in i + 1..docs.len() {
            let da = a[docs[i]] - a[docs[j]];
            let db = b[docs[i]] - b[docs[j]];
            match (da == 0.0, db == 0.0) {
                (true, true) => {}
                (true, false) => ties_a += 1,
                (false, true) => ties_b += 1,
                (false, false) if (da > 0.0) == (db > 0.0) => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (concordant + discordant + ties_a) as f64;
    let n1 = (concordant + discordant + ties_b) as f64;
    (concordant - discordant) as f64 / (n0 * n1).sqrt()
}

fn scores(list: &RankedList) -> HashMap<DocId, f64> {
    list.entries().iter().map(|e| (e.doc.clone(), e.score)).collect()
}

/// `k` independent uniform permutations of `n` documents.
fn independent_runs(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..k)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn copies_of_one_run_fuse_to_that_run(run in run_strategy(30), copies in 1usize..4, cutoff in 1usize..40) {
        let c = Collection::new(60, (0..30).map(doc)).unwrap();
        let runs = named(&vec![run; copies]);
        let want: Vec<DocId> = runs[0].1.docs().take(cutoff).cloned().collect();
        for kind in KINDS {
            let fused = FusionMethod::new(kind, cutoff).unwrap().fuse(&runs, &c).unwrap();
            prop_assert_eq!(order(&fused.fused), want.clone(), "{}", kind);
        }
    }

    #[test]
    fn fusion_ignores_input_order(mut runs in prop::collection::vec(run_strategy(25), 1..5), seed in any::<u64>()) {
        let c = Collection::new(80, (0..25).map(doc)).unwrap();
        let forward = named(&runs);
        runs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = named(&runs);
        for kind in KINDS {
            let m = FusionMethod::new(kind, 100).unwrap();
            prop_assert_eq!(m.fuse(&forward, &c).unwrap().fused, m.fuse(&shuffled, &c).unwrap().fused, "{}", kind);
        }
    }

    #[test]
    fn oiq_fusion_respects_dominance(runs in prop::collection::vec(run_strategy(25), 1..5)) {
        let c = Collection::new(80, (0..25).map(doc)).unwrap();
        let input = named(&runs);
        let fused = fuse_oiq(&input, &c, 100).unwrap().fused;
        let ranks: Vec<HashMap<DocId, usize>> =
            input.iter().map(|(_, l)| l.entries().iter().map(|e| (e.doc.clone(), e.rank)).collect()).collect();
        let position = |d: &DocId| fused.rank_of(d);
        for a in fused.docs() {
            for b in fused.docs() {
                // a strictly better in every run: retrieved higher, or retrieved when b is not
                let dominates = a != b
                    && ranks.iter().all(|r| match (r.get(a), r.get(b)) {
                        (Some(x), Some(y)) => x < y,
                        (Some(_), None) => true,
                        _ => false,
                    });
                if dominates {
                    prop_assert!(position(a) < position(b), "{} before {}", a, b);
                }
            }
        }
    }

    #[test]
    fn fine_grained_subset_is_pairwise_distinct(runs in prop::collection::vec(run_strategy(50), 1..5)) {
        let c = Collection::new(200, (0..50).map(doc)).unwrap();
        let input = named(&runs);
        let kept = fine_grained_subset(&input, "run0", &c).unwrap();
        let sigs: Vec<_> = input.iter().map(|(_, l)| obsinfo::types::signal_from_ranked_list(l, &c).unwrap()).collect();
        let table = obsinfo::oiq(&obsinfo::SignalSet::new(sigs.clone(), c.clone()).unwrap());
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(table.get(a) != table.get(b));
                for s in &sigs {
                    prop_assert!(s.score(a) != s.score(b));
                }
            }
        }
        let pivot: Vec<&DocId> = input[0].1.docs().collect();
        let positions: Vec<usize> = kept.iter().map(|d| pivot.iter().position(|p| *p == d).unwrap()).collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn borda_log_tracks_oiq_fusion_better_than_borda() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 200;
    let c = Collection::new(n as u64, (0..n).map(doc)).unwrap();
    let mut wins = 0;
    for _ in 0..200 {
        let runs = named(&independent_runs(&mut rng, n, 3));
        let o = scores(&fuse_oiq(&runs, &c, n).unwrap().fused);
        let bl = scores(&fuse_borda_log(&runs, &c, n).unwrap().fused);
        let b = scores(&fuse_borda(&runs, &c, n).unwrap().fused);
        if kendall_tau(&o, &bl) > kendall_tau(&o, &b) {
            wins += 1;
        }
    }
    assert!(wins >= 160, "borda-log closer in {wins} of 200 trials");
}

#[test]
fn borda_log_correlates_with_oiq_fusion_on_large_independent_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 500;
    let c = Collection::new(n as u64, (0..n).map(doc)).unwrap();
    for _ in 0..5 {
        let runs = named(&independent_runs(&mut rng, n, 3));
        let o = scores(&fuse_oiq(&runs, &c, n).unwrap().fused);
        let bl = scores(&fuse_borda_log(&runs, &c, n).unwrap().fused);
        let tau = kendall_tau(&o, &bl);
        assert!(tau >= 0.8, "tau {tau}");
    }
}

fn metric(s: &str) -> MetricId {
    s.parse().unwrap()
}

fn grid_strategy() -> impl Strategy<Value = (usize, usize, Vec<Vec<f64>>)> {
    (1usize..4, 2usize..6).prop_flat_map(|(topics, runs)| {
        let cells = topics * runs;
        (
            Just(topics),
            Just(runs),
            prop::collection::vec(prop::collection::vec((1u8..12).prop_map(f64::from), cells), 1..5),
        )
    })
}

fn grids(topics: usize, runs: usize, values: &[Vec<f64>]) -> BTreeMap<MetricId, ScoreGrid> {
    let names = ["P@10", "AP", "DCG", "RR@10"];
    values
        .iter()
        .zip(names)
        .map(|(v, name)| {
            let grid = (0..topics)
                .flat_map(|t| (0..runs).map(move |r| (format!("t{t}"), format!("r{r}"))))
                .zip(v.iter().copied())
                .collect();
            (metric(name), grid)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mu_depends_on_order_only((topics, runs, values) in grid_strategy(), which in any::<prop::sample::Index>()) {
        let base = grids(topics, runs, &values);
        let Ok(reference) = metric_unanimity(&base) else { return Ok(()); };
        let target = metric(["P@10", "AP", "DCG", "RR@10"][which.index(values.len())]);
        for f in [|x: f64| x * x * x, |x: f64| (1.0 + x).ln()] {
            let mut changed = base.clone();
            for v in changed.get_mut(&target).unwrap().values_mut() {
                *v = f(*v);
            }
            let r = metric_unanimity(&changed).unwrap();
            prop_assert_eq!(&r.mu, &reference.mu);
            prop_assert_eq!(&r.counts, &reference.counts);
        }
    }

    #[test]
    fn mu_is_bounded_and_counts_are_nested((topics, runs, values) in grid_strategy()) {
        let Ok(report) = metric_unanimity(&grids(topics, runs, &values)) else { return Ok(()); };
        for (m, &mu) in &report.mu {
            let c = &report.counts[m];
            prop_assert!(c.joint <= c.marginal_unanimous && c.marginal_unanimous <= c.pairs as f64);
            prop_assert!(mu <= 1.0, "{} has MU {}", m, mu);
        }
        let ranked = mu_ranking(&report);
        prop_assert!(ranked.windows(2).all(|w| report.mu[&w[0]] >= report.mu[&w[1]]));
    }

    #[test]
    fn relabelling_runs_leaves_mu_unchanged((topics, runs, values) in grid_strategy(), seed in any::<u64>()) {
        let base = grids(topics, runs, &values);
        let Ok(reference) = metric_unanimity(&base) else { return Ok(()); };
        let mut labels: Vec<usize> = (0..runs).collect();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let relabelled: BTreeMap<MetricId, ScoreGrid> = base
            .iter()
            .map(|(m, g)| {
                let g = g
                    .iter()
                    .map(|((t, r), &v)| {
                        let i: usize = r[1..].parse().unwrap();
                        ((t.clone(), format!("r{}", labels[i])), v)
                    })
                    .collect();
                (m.clone(), g)
            })
            .collect();
        let r = metric_unanimity(&relabelled).unwrap();
        prop_assert_eq!(r.mu, reference.mu);
    }
}
