//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankfair::generators::population_from_groups;
use rankfair::{CandidateSet, Cutoffs, Group, Result};

pub const SYNTHETIC_RUN: &str = "\
query_id,candidate_id,group,relevance
q1,d1,0,0.9
q1,d2,1,0.7
q1,d3,0,0.5
q1,d4,1,0.2
q2,e1,1,0.6
q2,e2,0,0.4
q2,e3,0,0
";

/// 30 random (group pattern, cutoff set) instances with n ≤ 8.
pub fn normalizer_instances(seed: u64) -> Result<Vec<(CandidateSet, Cutoffs)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < 30 {
        let n = rng.gen_range(2..=8);
        let groups: Vec<Group> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Group::Protected
                } else {
                    Group::NonProtected
                }
            })
            .collect();
        if groups.iter().all(|&g| g == groups[0]) {
            continue;
        }
        let size = rng.gen_range(1..=n);
        let mut cutoffs: Vec<usize> = sample(&mut rng, n, size)
            .into_iter()
            .map(|k| k + 1)
            .collect();
        cutoffs.sort_unstable();
        let pop = population_from_groups(groups, std::iter::repeat(1.0))?;
        out.push((CandidateSet::full(pop), Cutoffs::Explicit(cutoffs)));
    }
    Ok(out)
}
