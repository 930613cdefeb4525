//! Compare every prefix normalizer against brute force on all small group patterns.
//!
//!     cargo run --release --example oracle_crosscheck

use std::sync::Arc;

use rankfair::generators::uniform_population;
use rankfair::metrics::prefix_normalizer;
use rankfair::oracle::{brute_force_normalizer, exact_expectation};
use rankfair::{CandidateSet, Cutoffs, Metric, MetricConfig, Normalizer};

fn main() -> rankfair::Result<()> {
    let pop = uniform_population(8, 8)?;
    let modes = [
        Normalizer::LatticePath,
        Normalizer::BruteForce,
        Normalizer::ExtremeRanking,
    ];
    let mut agree = [0usize; 3];
    let mut total = 0;
    for n in 2..=8usize {
        for n1 in 1..n {
            // n1 protected ids (0..8) and n - n1 non-protected ids (8..16)
            let members = (0..n1).chain(8..8 + n - n1).collect();
            let set = CandidateSet::from_indices(Arc::clone(&pop), members)?;
            for cutoffs in [Cutoffs::EveryRank, Cutoffs::Explicit(vec![1, n / 2 + 1])] {
                for m in [Metric::RND, Metric::RRD, Metric::RKL] {
                    let cfg = MetricConfig::default().with_cutoffs(cutoffs.clone());
                    let oracle = brute_force_normalizer(m, &set, &cfg)?;
                    total += 1;
                    for (i, mode) in modes.iter().enumerate() {
                        let z = prefix_normalizer(m, &set, &cfg.clone().with_normalizer(*mode))?;
                        if z == oracle {
                            agree[i] += 1;
                        }
                    }
                }
            }
        }
    }
    for (mode, count) in modes.iter().zip(agree) {
        println!("{mode:?}: {count}/{total} bit-identical to brute force");
    }

    let set = CandidateSet::from_indices(Arc::clone(&pop), vec![0, 8])?;
    let er = exact_expectation(Metric::ER, &set, &MetricConfig::default())?;
    println!("\nE[ER] over both rankings of one candidate per group: {er:.6}");
    Ok(())
}
