//! Cross-checks against independently computed reference values.

mod common;

use std::sync::Arc;

use approx::assert_relative_eq;

use rankfair::generators::{enumerate_rankings, uniform_population, RankingSampler};
use rankfair::metrics::{prefix_normalizer, prefix_raw_sum};
use rankfair::oracle::{brute_force_normalizer, exact_expectation, CompensatedSum};
use rankfair::{
    Candidate, CandidateSet, Cutoffs, Group, Metric, MetricConfig, Normalizer, Population, Ranking,
};

fn tour() -> Ranking {
    let pop = Population::new(vec![
        Candidate::new("alice", Group::Protected, 0.9),
        Candidate::new("bob", Group::NonProtected, 0.8),
        Candidate::new("carol", Group::NonProtected, 0.6),
        Candidate::new("dan", Group::Protected, 0.4),
        Candidate::new("erin", Group::NonProtected, 0.3),
    ])
    .unwrap()
    .into_shared();
    Ranking::from_ids(pop, &["bob", "alice", "carol", "erin", "dan"]).unwrap()
}

/// Values from a separate Python implementation (permutation-max normalizers,
/// base-2 logarithms, cutoffs at every rank).
#[test]
fn five_candidate_ranking_matches_reference() {
    let expected = [
        (Metric::RND, 0.5142443415749796),
        (Metric::RRD, 0.4182546629998356),
        (Metric::RKL, 0.6509638678354874),
        (Metric::ED, -0.13466757228813142),
        (Metric::ER, 0.7907455212137939),
        (Metric::DTD, -0.3527824308258879),
        (Metric::DTR, 0.6893678902889485),
        (Metric::DID, -0.16723141437321498),
        (Metric::DIR, 0.7687172810600122),
        (Metric::AWRF, 0.9976810298519821),
        (Metric::PSP, -1.0 / 3.0),
    ];
    let r = tour();
    for (m, v) in expected {
        let got = m.evaluate(&r, &MetricConfig::default()).unwrap();
        assert_relative_eq!(got, v, max_relative = 1e-12, epsilon = 1e-15);
    }
}

#[test]
fn normalizer_modes_agree_on_tour() {
    let r = tour();
    let set = r.candidate_set();
    for m in [Metric::RND, Metric::RRD, Metric::RKL] {
        let cfg = MetricConfig::default();
        let exact = prefix_normalizer(m, &set, &cfg).unwrap();
        let brute = prefix_normalizer(
            m,
            &set,
            &cfg.clone().with_normalizer(Normalizer::BruteForce),
        )
        .unwrap();
        assert_eq!(exact.to_bits(), brute.to_bits(), "{m}");
        assert_eq!(
            exact.to_bits(),
            brute_force_normalizer(m, &set, &cfg).unwrap().to_bits(),
            "{m}"
        );
    }
}

/// Companion to acceptance criterion 10: the exact normalizer matches brute
/// force bit for bit on the same instances the heuristic is checked on.
#[test]
fn lattice_normalizer_is_bit_exact() {
    for (set, cutoffs) in common::normalizer_instances(10).unwrap() {
        for m in [Metric::RND, Metric::RRD, Metric::RKL] {
            let cfg = MetricConfig::default().with_cutoffs(cutoffs.clone());
            let oracle = brute_force_normalizer(m, &set, &cfg).unwrap();
            match prefix_normalizer(m, &set, &cfg) {
                Ok(z) => assert_eq!(z.to_bits(), oracle.to_bits(), "{m} {cutoffs:?}"),
                Err(rankfair::Error::NormalizerZero { .. }) => assert_eq!(oracle, 0.0),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn lattice_normalizer_covers_every_small_pattern() {
    let pop = uniform_population(8, 8).unwrap();
    for n in 2..=8usize {
        for n1 in 1..n {
            let members = (0..n1).chain(8..8 + n - n1).collect();
            let set = CandidateSet::from_indices(Arc::clone(&pop), members).unwrap();
            for cutoffs in [
                Cutoffs::EveryRank,
                Cutoffs::Step(2),
                Cutoffs::Explicit(vec![1, n]),
            ] {
                for m in [Metric::RND, Metric::RRD, Metric::RKL] {
                    let cfg = MetricConfig::default().with_cutoffs(cutoffs.clone());
                    let oracle = brute_force_normalizer(m, &set, &cfg).unwrap();
                    match prefix_normalizer(m, &set, &cfg) {
                        Ok(z) => assert_eq!(
                            z.to_bits(),
                            oracle.to_bits(),
                            "{m} n={n} n1={n1} {cutoffs:?}"
                        ),
                        Err(rankfair::Error::NormalizerZero { .. }) => assert_eq!(oracle, 0.0),
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }
}

/// Z is a maximum over rankings, so every prefix metric lies in [0, 1].
#[test]
fn prefix_scores_stay_in_unit_interval() {
    let pop = uniform_population(3, 3).unwrap();
    let set = CandidateSet::full(pop);
    for m in [Metric::RND, Metric::RRD, Metric::RKL] {
        let cfg = MetricConfig::default();
        let prepared = m.prepare(&set, &cfg).unwrap();
        let z = prepared.normalizer().unwrap();
        let cutoffs = cfg.cutoffs.resolve(6).unwrap();
        let mut hit_zero = false;
        for r in enumerate_rankings(&set).unwrap() {
            let v = prepared.score(&r).unwrap();
            assert!((0.0..=1.0).contains(&v), "{m} {r}: {v}");
            hit_zero |= prefix_raw_sum(m, &r, &cutoffs, cfg.log_base) == z;
        }
        assert!(hit_zero, "{m}: the maximizing ranking scores 0");
    }
}

/// Exact expectations agree with a long Monte Carlo run to within 4 standard errors.
#[test]
fn expectation_matches_sampling() {
    let pop = uniform_population(4, 2).unwrap();
    let set = CandidateSet::full(pop);
    for m in [Metric::ER, Metric::RND, Metric::AWRF] {
        let cfg = MetricConfig::default();
        let exact = exact_expectation(m, &set, &cfg).unwrap();
        let prepared = m.prepare(&set, &cfg).unwrap();
        let samples = 40_000;
        let (mut sum, mut sq) = (CompensatedSum::default(), CompensatedSum::default());
        for r in RankingSampler::new(&set, 5).take(samples) {
            let v = prepared.score(&r).unwrap();
            sum.add(v);
            sq.add(v * v);
        }
        let mean = sum.value() / samples as f64;
        let var = sq.value() / samples as f64 - mean * mean;
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 4.0 * se,
            "{m}: exact {exact}, sampled {mean} ± {se}"
        );
    }
}
