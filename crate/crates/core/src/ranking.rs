//! Populations, candidate sets and rankings.
//!
//! Every type here is an immutable value. Operations that "modify" a ranking
//! return a new one. Positions are 1-based on every public interface.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary group attribute. `Protected` is G1, `NonProtected` is G0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    NonProtected,
    Protected,
}

impl Group {
    /// 0 for G0, 1 for G1.
    pub fn index(self) -> usize {
        match self {
            Group::NonProtected => 0,
            Group::Protected => 1,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::NonProtected => Group::Protected,
            Group::Protected => Group::NonProtected,
        }
    }

    pub fn from_label(label: u8) -> Option<Group> {
        match label {
            0 => Some(Group::NonProtected),
            1 => Some(Group::Protected),
            _ => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::NonProtected => f.write_str("G0"),
            Group::Protected => f.write_str("G1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub group: Group,
    pub relevance: f64,
}

impl Candidate {
    pub fn new(id: impl Into<String>, group: Group, relevance: f64) -> Self {
        Candidate {
            id: id.into(),
            group,
            relevance,
        }
    }

    pub fn protected(id: impl Into<String>) -> Self {
        Candidate::new(id, Group::Protected, 1.0)
    }

    pub fn non_protected(id: impl Into<String>) -> Self {
        Candidate::new(id, Group::NonProtected, 1.0)
    }
}

/// The full candidate universe. Both groups must be nonempty.
#[derive(Debug, Clone)]
pub struct Population {
    candidates: Vec<Candidate>,
    index: HashMap<String, usize>,
    counts: [usize; 2],
    mean_relevance: [f64; 2],
}

impl Population {
    pub fn new(candidates: Vec<Candidate>) -> Result<Self> {
        let mut index = HashMap::with_capacity(candidates.len());
        let mut counts = [0usize; 2];
        let mut sums = [0.0f64; 2];
        for (i, c) in candidates.iter().enumerate() {
            if !c.relevance.is_finite() {
                return Err(Error::InvalidCandidate {
                    id: c.id.clone(),
                    reason: format!("relevance {} is not finite", c.relevance),
                });
            }
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::Duplicate(c.id.clone()));
            }
            counts[c.group.index()] += 1;
            sums[c.group.index()] += c.relevance;
        }
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::InvalidPopulation(format!(
                "both groups must be nonempty, got |G0| = {}, |G1| = {}",
                counts[0], counts[1]
            )));
        }
        let mean_relevance = [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64];
        Ok(Population {
            candidates,
            index,
            counts,
            mean_relevance,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate(&self, idx: usize) -> &Candidate {
        &self.candidates[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// |G| in the full population.
    pub fn group_size(&self, g: Group) -> usize {
        self.counts[g.index()]
    }

    pub fn protected_count(&self) -> usize {
        self.counts[1]
    }

    pub fn nonprotected_count(&self) -> usize {
        self.counts[0]
    }

    /// (|G0|/|D|, |G1|/|D|).
    pub fn p_groups(&self) -> [f64; 2] {
        let n = self.len() as f64;
        [self.counts[0] as f64 / n, self.counts[1] as f64 / n]
    }

    /// Y(G): mean relevance over the group's full-population members.
    pub fn mean_relevance(&self, g: Group) -> f64 {
        self.mean_relevance[g.index()]
    }

    /// Copy of the population with every relevance passed through `f`.
    /// Candidate order and ids are preserved, so rankings can be rebound.
    pub fn map_relevance(&self, f: impl Fn(f64) -> f64) -> Result<Population> {
        let candidates = self
            .candidates
            .iter()
            .map(|c| Candidate::new(c.id.clone(), c.group, f(c.relevance)))
            .collect();
        Population::new(candidates)
    }

    /// The affine transform y -> a*y + c.
    pub fn affine(&self, a: f64, c: f64) -> Result<Population> {
        self.map_relevance(|y| a * y + c)
    }

    pub fn with_uniform_relevance(&self) -> Population {
        self.map_relevance(|_| 1.0)
            .expect("constant relevance keeps a valid population valid")
    }

    pub fn into_shared(self) -> Arc<Population> {
        Arc::new(self)
    }
}

/// A subset D of the population to be ranked.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    population: Arc<Population>,
    members: Vec<usize>,
}

impl CandidateSet {
    /// The whole population (Setting 1).
    pub fn full(population: Arc<Population>) -> Self {
        let members = (0..population.len()).collect();
        CandidateSet {
            population,
            members,
        }
    }

    pub fn from_indices(population: Arc<Population>, members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidCandidateSet("candidate set is empty".into()));
        }
        let mut seen = vec![false; population.len()];
        for &m in &members {
            if m >= population.len() {
                return Err(Error::Membership(format!("#{m}")));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::Duplicate(population.candidate(m).id.clone()));
            }
        }
        Ok(CandidateSet {
            population,
            members,
        })
    }

    pub fn from_ids<S: AsRef<str>>(population: Arc<Population>, ids: &[S]) -> Result<Self> {
        let members = ids
            .iter()
            .map(|id| {
                population
                    .index_of(id.as_ref())
                    .ok_or_else(|| Error::Membership(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        CandidateSet::from_indices(population, members)
    }

    pub fn population(&self) -> &Arc<Population> {
        &self.population
    }

    /// Population indices of the members, in construction order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.contains(&idx)
    }

    /// |D ∩ G|.
    pub fn count(&self, g: Group) -> usize {
        self.members
            .iter()
            .filter(|&&m| self.population.candidate(m).group == g)
            .count()
    }

    /// True when D is the whole population.
    pub fn is_full(&self) -> bool {
        self.members.len() == self.population.len()
    }

    /// Members sorted by ascending candidate id.
    pub fn sorted_by_id(&self) -> Vec<usize> {
        let mut m = self.members.clone();
        m.sort_by(|&a, &b| {
            self.population
                .candidate(a)
                .id
                .cmp(&self.population.candidate(b).id)
        });
        m
    }

    /// Rank the members in construction order.
    pub fn ranking(&self) -> Ranking {
        Ranking {
            population: Arc::clone(&self.population),
            order: self.members.clone(),
        }
    }
}

/// A total order over a candidate set. `order[k - 1]` is the population index
/// of the candidate at position k.
#[derive(Clone)]
pub struct Ranking {
    population: Arc<Population>,
    order: Vec<usize>,
}

impl Ranking {
    pub fn from_indices(population: Arc<Population>, order: Vec<usize>) -> Result<Self> {
        let set = CandidateSet::from_indices(population, order)?;
        Ok(set.ranking())
    }

    pub fn from_ids<S: AsRef<str>>(population: Arc<Population>, ids: &[S]) -> Result<Self> {
        Ok(CandidateSet::from_ids(population, ids)?.ranking())
    }

    pub fn population(&self) -> &Arc<Population> {
        &self.population
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Population indices in rank order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn candidate_set(&self) -> CandidateSet {
        CandidateSet {
            population: Arc::clone(&self.population),
            members: self.order.clone(),
        }
    }

    fn check_position(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.order.len() {
            return Err(Error::Position {
                position: k,
                len: self.order.len(),
            });
        }
        Ok(())
    }

    /// r(k).
    pub fn at(&self, k: usize) -> Result<&Candidate> {
        self.check_position(k)?;
        Ok(self.population.candidate(self.order[k - 1]))
    }

    /// r⁻¹(d), or `None` when d is not ranked.
    pub fn position_of(&self, id: &str) -> Option<usize> {
        let idx = self.population.index_of(id)?;
        self.order.iter().position(|&m| m == idx).map(|p| p + 1)
    }

    pub fn candidates(&self) -> impl ExactSizeIterator<Item = &Candidate> + '_ {
        self.order
            .iter()
            .map(move |&m| self.population.candidate(m))
    }

    pub fn groups(&self) -> impl ExactSizeIterator<Item = Group> + '_ {
        self.candidates().map(|c| c.group)
    }

    pub fn ids(&self) -> Vec<String> {
        self.candidates().map(|c| c.id.clone()).collect()
    }

    /// |D ∩ G|.
    pub fn count(&self, g: Group) -> usize {
        self.groups().filter(|&x| x == g).count()
    }

    /// True when the ranked set is the whole population.
    pub fn is_full(&self) -> bool {
        self.order.len() == self.population.len()
    }

    /// r_{i↔j}: the ranking with positions i and j exchanged.
    pub fn swap(&self, i: usize, j: usize) -> Result<Ranking> {
        self.check_position(i)?;
        self.check_position(j)?;
        if i >= j {
            return Err(Error::Position {
                position: i,
                len: self.order.len(),
            });
        }
        let mut order = self.order.clone();
        order.swap(i - 1, j - 1);
        Ok(Ranking {
            population: Arc::clone(&self.population),
            order,
        })
    }

    /// ⟨r(1), …, r(n), d⟩.
    pub fn append(&self, id: &str) -> Result<Ranking> {
        let idx = self
            .population
            .index_of(id)
            .ok_or_else(|| Error::Membership(id.to_string()))?;
        if self.order.contains(&idx) {
            return Err(Error::Duplicate(id.to_string()));
        }
        let mut order = self.order.clone();
        order.push(idx);
        Ok(Ranking {
            population: Arc::clone(&self.population),
            order,
        })
    }

    /// Position k holds r(n + 1 − k).
    pub fn invert(&self) -> Ranking {
        let mut order = self.order.clone();
        order.reverse();
        Ranking {
            population: Arc::clone(&self.population),
            order,
        }
    }

    /// p_G^k(r): fraction of group-g candidates among the top k.
    pub fn prefix_proportion(&self, k: usize, g: Group) -> Result<f64> {
        self.check_position(k)?;
        let hits = self.groups().take(k).filter(|&x| x == g).count();
        Ok(hits as f64 / k as f64)
    }

    /// The same order over another population with identical ids and groups,
    /// typically one produced by [`Population::map_relevance`].
    pub fn rebind(&self, population: Arc<Population>) -> Result<Ranking> {
        if population.len() != self.population.len() {
            return Err(Error::InvalidPopulation(
                "rebinding requires a population of the same size".into(),
            ));
        }
        for (old, new) in self
            .population
            .candidates()
            .iter()
            .zip(population.candidates())
        {
            if old.id != new.id || old.group != new.group {
                return Err(Error::InvalidPopulation(format!(
                    "candidate `{}` differs between populations",
                    old.id
                )));
            }
        }
        Ok(Ranking {
            population,
            order: self.order.clone(),
        })
    }
}

impl PartialEq for Ranking {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && (Arc::ptr_eq(&self.population, &other.population)
                || self.candidates().eq(other.candidates()))
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, c) in self.candidates().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&c.id)?;
        }
        f.write_str("⟩")
    }
}
