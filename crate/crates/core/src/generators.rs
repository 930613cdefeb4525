//! Structured ranking families and synthetic populations.

use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ranking::{Candidate, CandidateSet, Group, Population, Ranking};

/// Largest candidate set [`enumerate_rankings`] accepts.
pub const ENUMERATION_MAX_N: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub enum RelevanceMode {
    /// y(d) = 1 for every candidate.
    Uniform,
    /// One relevance per candidate, protected candidates first.
    Explicit(Vec<f64>),
}

/// Recipe for a synthetic population of `n` candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub n: usize,
    pub p_protected: f64,
    pub relevance: RelevanceMode,
}

impl PopulationSpec {
    pub fn uniform(n: usize, p_protected: f64) -> Self {
        PopulationSpec {
            n,
            p_protected,
            relevance: RelevanceMode::Uniform,
        }
    }

    /// Protected count: p·n rounded half away from zero, clamped so both
    /// groups keep at least one member.
    pub fn protected_count(&self) -> usize {
        let raw = (self.p_protected * self.n as f64).round() as usize;
        raw.clamp(1, self.n.saturating_sub(1).max(1))
    }

    pub fn build(&self) -> Result<Arc<Population>> {
        if self.n < 2 {
            return Err(Error::InvalidPopulation(format!(
                "a population needs at least 2 candidates, got {}",
                self.n
            )));
        }
        if !(self.p_protected > 0.0 && self.p_protected < 1.0) {
            return Err(Error::InvalidPopulation(format!(
                "p_protected must lie in (0,1), got {}",
                self.p_protected
            )));
        }
        let n1 = self.protected_count();
        let groups = std::iter::repeat_n(Group::Protected, n1)
            .chain(std::iter::repeat_n(Group::NonProtected, self.n - n1));
        let relevance: Vec<f64> = match &self.relevance {
            RelevanceMode::Uniform => vec![1.0; self.n],
            RelevanceMode::Explicit(v) if v.len() == self.n => v.clone(),
            RelevanceMode::Explicit(v) => {
                return Err(Error::InvalidPopulation(format!(
                    "{} relevances given for {} candidates",
                    v.len(),
                    self.n
                )))
            }
        };
        population_from_groups(groups, relevance)
    }
}

/// Population with the given group sequence. Ids are `g1-007`, `g0-012`, …
/// numbered per group and zero-padded, so id order equals construction order
/// within each group.
pub fn population_from_groups(
    groups: impl IntoIterator<Item = Group>,
    relevance: impl IntoIterator<Item = f64>,
) -> Result<Arc<Population>> {
    let groups: Vec<Group> = groups.into_iter().collect();
    let width = groups.len().max(1).to_string().len();
    let mut next = [0usize; 2];
    let candidates = groups
        .iter()
        .zip(relevance)
        .map(|(&g, y)| {
            let i = next[g.index()];
            next[g.index()] += 1;
            Candidate::new(format!("g{}-{:0width$}", g.index(), i), g, y)
        })
        .collect::<Vec<_>>();
    if candidates.len() != groups.len() {
        return Err(Error::InvalidPopulation(
            "fewer relevances than candidates".into(),
        ));
    }
    Ok(Population::new(candidates)?.into_shared())
}

/// Uniform-relevance population with `n0` non-protected and `n1` protected candidates.
pub fn uniform_population(n0: usize, n1: usize) -> Result<Arc<Population>> {
    let groups = std::iter::repeat_n(Group::Protected, n1)
        .chain(std::iter::repeat_n(Group::NonProtected, n0));
    population_from_groups(groups, std::iter::repeat(1.0))
}

fn block_ranking(set: &CandidateSet, top: Group) -> Ranking {
    let pop = set.population();
    let (mut head, tail): (Vec<usize>, Vec<usize>) = set
        .sorted_by_id()
        .into_iter()
        .partition(|&m| pop.candidate(m).group == top);
    head.extend(tail);
    Ranking::from_indices(Arc::clone(pop), head).expect("a permutation of a valid set")
}

/// Representative of R_first(D): protected block first, ascending id within groups.
pub fn make_first(set: &CandidateSet) -> Ranking {
    block_ranking(set, Group::Protected)
}

/// Representative of R_last(D): non-protected block first.
pub fn make_last(set: &CandidateSet) -> Ranking {
    block_ranking(set, Group::NonProtected)
}

/// True when every candidate of `top` precedes every candidate of the other group.
pub fn is_block_ranking(r: &Ranking, top: Group) -> bool {
    let groups: Vec<Group> = r.groups().collect();
    groups.windows(2).all(|w| !(w[0] != top && w[1] == top))
}

fn lowest_ids(pop: &Population, g: Group, count: usize) -> Result<Vec<usize>> {
    let mut ids: Vec<usize> = (0..pop.len())
        .filter(|&i| pop.candidate(i).group == g)
        .collect();
    if ids.len() < count {
        return Err(Error::Capacity(format!(
            "need {count} candidates of {g}, population has {}",
            ids.len()
        )));
    }
    ids.sort_by(|&a, &b| pop.candidate(a).id.cmp(&pop.candidate(b).id));
    ids.truncate(count);
    Ok(ids)
}

/// (D_N, D_N′): 2N candidates each, with 1 and N protected members.
/// Candidates are taken in ascending id order.
pub fn make_dn_pair(pop: &Arc<Population>, n: usize) -> Result<(CandidateSet, CandidateSet)> {
    if n == 0 {
        return Err(Error::Capacity("N must be at least 1".into()));
    }
    let p = lowest_ids(pop, Group::Protected, n)?;
    let np = lowest_ids(pop, Group::NonProtected, 2 * n - 1)?;
    let dn = std::iter::once(p[0]).chain(np.iter().copied()).collect();
    let dn_prime = p.iter().chain(&np[..n]).copied().collect();
    Ok((
        CandidateSet::from_indices(Arc::clone(pop), dn)?,
        CandidateSet::from_indices(Arc::clone(pop), dn_prime)?,
    ))
}

/// Smallest multiple of 100 whose population at proportion `p` holds
/// [`make_dn_pair`] for every N up to `max_n`.
pub fn dn_population_size(p: f64, max_n: usize) -> usize {
    let mut n = 100;
    loop {
        let k = PopulationSpec::uniform(n, p).protected_count();
        if k >= max_n && n - k >= 2 * max_n - 1 {
            return n;
        }
        n += 100;
    }
}

/// All n! rankings of D, lexicographic in the candidate id sequence.
pub fn enumerate_rankings(set: &CandidateSet) -> Result<impl Iterator<Item = Ranking>> {
    if set.len() > ENUMERATION_MAX_N {
        return Err(Error::SizeGuard {
            n: set.len(),
            max: ENUMERATION_MAX_N,
        });
    }
    let pop = Arc::clone(set.population());
    let sorted = set.sorted_by_id();
    let n = sorted.len();
    Ok(sorted.into_iter().permutations(n).map(move |order| {
        Ranking::from_indices(Arc::clone(&pop), order).expect("a permutation of a valid set")
    }))
}

/// Uniformly random ranking of D by a seeded Fisher–Yates shuffle.
pub fn sample_ranking(set: &CandidateSet, seed: u64) -> Ranking {
    RankingSampler::new(set, seed).draw()
}

/// Stream of independent uniform rankings from a single seeded generator.
#[derive(Debug)]
pub struct RankingSampler {
    population: Arc<Population>,
    base: Vec<usize>,
    rng: ChaCha8Rng,
}

impl RankingSampler {
    pub fn new(set: &CandidateSet, seed: u64) -> Self {
        RankingSampler {
            population: Arc::clone(set.population()),
            base: set.sorted_by_id(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self) -> Ranking {
        let mut order = self.base.clone();
        order.shuffle(&mut self.rng);
        Ranking::from_indices(Arc::clone(&self.population), order)
            .expect("a permutation of a valid set")
    }
}

impl Iterator for RankingSampler {
    type Item = Ranking;

    fn next(&mut self) -> Option<Ranking> {
        Some(self.draw())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn mixed() -> CandidateSet {
        let pop = Population::new(vec![
            Candidate::protected("g1a"),
            Candidate::non_protected("g0a"),
            Candidate::protected("g1b"),
        ])
        .unwrap()
        .into_shared();
        CandidateSet::full(pop)
    }

    #[test]
    fn extreme_rankings() {
        let set = mixed();
        assert_eq!(make_first(&set).ids(), ["g1a", "g1b", "g0a"]);
        assert_eq!(make_last(&set).ids(), ["g0a", "g1a", "g1b"]);
        let inv: Vec<_> = make_first(&set).invert().groups().collect();
        let last: Vec<_> = make_last(&set).groups().collect();
        assert_eq!(inv, last);
        assert!(is_block_ranking(&make_first(&set), Group::Protected));
        assert!(!is_block_ranking(&make_last(&set), Group::Protected));
    }

    #[test]
    fn spec_rounding() {
        assert_eq!(PopulationSpec::uniform(100, 0.3).protected_count(), 30);
        assert_eq!(PopulationSpec::uniform(5, 0.5).protected_count(), 3);
        assert_eq!(PopulationSpec::uniform(10, 0.01).protected_count(), 1);
        assert_eq!(PopulationSpec::uniform(10, 0.99).protected_count(), 9);
        for i in (10..=90).step_by(2) {
            let p = i as f64 / 100.0;
            assert_eq!(PopulationSpec::uniform(100, p).protected_count(), i);
        }
        let pop = PopulationSpec::uniform(20, 0.3).build().unwrap();
        assert_eq!(pop.protected_count(), 6);
        assert_eq!(pop.candidate(0).id, "g1-00");
    }

    #[test]
    fn dn_pairs() {
        let pop = uniform_population(5, 3).unwrap();
        let (d1, d1p) = make_dn_pair(&pop, 1).unwrap();
        assert_eq!((d1.len(), d1.count(Group::Protected)), (2, 1));
        assert_eq!((d1p.len(), d1p.count(Group::Protected)), (2, 1));
        let (d3, d3p) = make_dn_pair(&pop, 3).unwrap();
        assert_eq!((d3.len(), d3.count(Group::Protected)), (6, 1));
        assert_eq!((d3p.len(), d3p.count(Group::Protected)), (6, 3));
        assert_eq!(make_first(&d3).at(1).unwrap().group, Group::Protected);
        assert!(matches!(make_dn_pair(&pop, 4), Err(Error::Capacity(_))));
    }

    #[test]
    fn enumeration() {
        let pop = uniform_population(6, 4).unwrap();
        let set =
            |k: usize| CandidateSet::from_indices(Arc::clone(&pop), (0..k).collect()).unwrap();
        assert_eq!(enumerate_rankings(&set(3)).unwrap().count(), 6);
        assert_eq!(enumerate_rankings(&set(1)).unwrap().count(), 1);
        assert!(matches!(
            enumerate_rankings(&set(10)),
            Err(Error::SizeGuard { .. })
        ));
        let all: Vec<Vec<String>> = enumerate_rankings(&set(4))
            .unwrap()
            .map(|r| r.ids())
            .collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sampling_is_seeded_and_uniform() {
        let set = mixed();
        assert_eq!(sample_ranking(&set, 7), sample_ranking(&set, 7));
        let mut freq: HashMap<Vec<String>, usize> = HashMap::new();
        let draws = 100_000;
        for r in RankingSampler::new(&set, 11).take(draws) {
            *freq.entry(r.ids()).or_default() += 1;
        }
        assert_eq!(freq.len(), 6);
        for count in freq.values() {
            assert!((*count as f64 / draws as f64 - 1.0 / 6.0).abs() < 0.01);
        }
        let pop = uniform_population(1, 1).unwrap();
        let single = CandidateSet::from_indices(pop, vec![0]).unwrap();
        assert_eq!(sample_ranking(&single, 3).len(), 1);
    }
}
