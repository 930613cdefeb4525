//! Algebraic invariants of the metrics, and replay of reported counterexamples.

use std::sync::Arc;

use proptest::prelude::*;

use rankfair::generators::{make_first, make_last, population_from_groups, sample_ranking};
use rankfair::properties::{satisfaction_table, SearchBudget, Status};
use rankfair::{CandidateSet, Group, Metric, MetricConfig, Population, Ranking};

/// A full-population ranking with both groups and relevance in (0, 1].
fn ranking() -> impl Strategy<Value = Ranking> {
    (2usize..=9)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0.01f64..=1.0, n),
                any::<u64>(),
            )
        })
        .prop_filter("both groups present", |(g, _, _)| {
            g.iter().any(|&x| x) && g.iter().any(|&x| !x)
        })
        .prop_map(|(groups, relevance, seed)| {
            let groups = groups.into_iter().map(|p| {
                if p {
                    Group::Protected
                } else {
                    Group::NonProtected
                }
            });
            let pop = population_from_groups(groups, relevance).unwrap();
            sample_ranking(&CandidateSet::full(pop), seed)
        })
}

/// The same ranking over a population with the group labels exchanged.
fn relabel(r: &Ranking) -> Ranking {
    let flipped = r
        .population()
        .candidates()
        .iter()
        .map(|c| rankfair::Candidate::new(c.id.clone(), c.group.other(), c.relevance))
        .collect();
    Ranking::from_indices(
        Population::new(flipped).unwrap().into_shared(),
        r.order().to_vec(),
    )
    .unwrap()
}

fn eval(m: Metric, r: &Ranking) -> Option<f64> {
    m.try_evaluate(r, &MetricConfig::default()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn invert_and_swap_are_involutions(r in ranking(), i in 1usize..9, j in 2usize..10) {
        prop_assert_eq!(r.invert().invert(), r.clone());
        if i < j && j <= r.len() {
            prop_assert_eq!(r.swap(i, j).unwrap().swap(i, j).unwrap(), r);
        }
    }

    #[test]
    fn psp_flips_under_inversion(r in ranking()) {
        let v = eval(Metric::PSP, &r).unwrap();
        prop_assert!(close(eval(Metric::PSP, &r.invert()).unwrap(), -v));
        prop_assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn relabeling_groups_mirrors_the_metrics(r in ranking()) {
        let s = relabel(&r);
        for m in [Metric::ED, Metric::DTD, Metric::DID, Metric::PSP] {
            prop_assert!(close(eval(m, &s).unwrap(), -eval(m, &r).unwrap()), "{}", m);
        }
        for m in [Metric::ER, Metric::DTR, Metric::DIR] {
            prop_assert!(close(eval(m, &s).unwrap(), 1.0 / eval(m, &r).unwrap()), "{}", m);
        }
        for m in [Metric::RND, Metric::RKL, Metric::AWRF] {
            prop_assert!(close(eval(m, &s).unwrap(), eval(m, &r).unwrap()), "{}", m);
        }
    }

    #[test]
    fn uniform_relevance_collapses_the_exposure_family(r in ranking(), y in 0.1f64..=5.0) {
        let constant = r.rebind(r.population().map_relevance(|_| y).unwrap().into_shared()).unwrap();
        let ed = eval(Metric::ED, &constant).unwrap();
        let er = eval(Metric::ER, &constant).unwrap();
        prop_assert!(close(eval(Metric::DTD, &constant).unwrap(), ed / y));
        prop_assert!(close(eval(Metric::DID, &constant).unwrap(), ed));
        prop_assert!(close(eval(Metric::DTR, &constant).unwrap(), er));
        prop_assert!(close(eval(Metric::DIR, &constant).unwrap(), er));
    }

    #[test]
    fn rescaling_law(r in ranking(), a in 0.1f64..=20.0) {
        let scaled = r.rebind(r.population().affine(a, 0.0).unwrap().into_shared()).unwrap();
        prop_assert!(close(a * eval(Metric::DTD, &scaled).unwrap(), eval(Metric::DTD, &r).unwrap()));
        for m in [Metric::DTR, Metric::DID, Metric::DIR] {
            prop_assert!(close(eval(m, &scaled).unwrap(), eval(m, &r).unwrap()), "{}", m);
        }
    }

    #[test]
    fn bounded_metrics_stay_in_range(r in ranking()) {
        for m in [Metric::RND, Metric::RRD, Metric::RKL, Metric::AWRF] {
            let v = eval(m, &r).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{} = {}", m, v);
        }
        let ed = eval(Metric::ED, &r).unwrap();
        prop_assert!(ed.abs() <= 1.0);
    }

    #[test]
    fn extremes_bracket_random_rankings_for_psp(r in ranking()) {
        let set = r.candidate_set();
        let v = eval(Metric::PSP, &r).unwrap();
        prop_assert!(eval(Metric::PSP, &make_last(&set)).unwrap() <= v);
        prop_assert!(v <= eval(Metric::PSP, &make_first(&set)).unwrap());
    }
}

#[test]
fn every_counterexample_replays_bit_identically() {
    let table = satisfaction_table(&SearchBudget::quick(), &MetricConfig::default());
    let mut replayed = 0;
    for cell in &table.cells {
        let verdict = cell.verdict.as_ref().expect("no checker errors");
        if verdict.status != Status::Violated {
            continue;
        }
        let Some(cx) = &verdict.counterexample else {
            continue;
        };
        assert!(
            cx.reproduces().unwrap(),
            "{} {}",
            cell.metric,
            cell.property
        );
        let json = serde_json::to_value(cx).unwrap();
        assert!(json.get("inequality").is_some() || json.get("requirement").is_some());
        replayed += 1;
    }
    assert!(replayed > 40, "only {replayed} counterexamples");
}

#[test]
fn verdicts_do_not_depend_on_seed() {
    let base = MetricConfig::default();
    let a = satisfaction_table(&SearchBudget::quick().with_seed(1), &base);
    let b = satisfaction_table(&SearchBudget::quick().with_seed(2), &base);
    let symbols = |t: &rankfair::properties::SatisfactionTable| {
        t.cells.iter().map(|c| c.symbol).collect::<Vec<_>>()
    };
    assert_eq!(symbols(&a), symbols(&b));
    assert!(a.mismatches().is_empty());
}

#[test]
fn population_arc_is_shared_not_copied() {
    let pop = population_from_groups([Group::Protected, Group::NonProtected], [1.0, 1.0]).unwrap();
    let r = CandidateSet::full(Arc::clone(&pop)).ranking();
    assert!(Arc::ptr_eq(r.population(), &pop));
}
