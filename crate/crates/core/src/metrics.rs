//! Group-fairness metrics for rankings.
//!
//! Three families share the position bias `b(k) = 1/log2(k+1)`:
//!
//! * prefix metrics (rND, rRD, rKL) compare top-k group proportions with the
//!   population proportions at a set of cutoffs and normalize by the largest
//!   value the sum can take over the candidate set,
//! * exposure metrics (ED, ER, DTD, DTR, DID, DIR, AWRF) aggregate the
//!   position bias each group receives,
//! * PSP counts cross-group pairs ordered in favour of the protected group.
//!
//! Values are ill-defined when a divisor vanishes. Those cases return
//! [`Error::UndefinedMetric`] instead of an infinity or NaN.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, VanishingQuantity};
use crate::ranking::{CandidateSet, Group, Ranking};

/// Largest candidate set accepted by [`Normalizer::BruteForce`].
pub const BRUTE_FORCE_MAX_N: usize = 20;

#[inline]
pub(crate) fn bias(k: usize) -> f64 {
    1.0 / ((k + 1) as f64).log2()
}

/// b(k) = 1/log2(k+1).
pub fn position_bias(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Position {
            position: 0,
            len: 0,
        });
    }
    Ok(bias(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    #[default]
    Base2,
}

impl LogBase {
    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
        }
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "natural" | "ln" | "e" => Ok(LogBase::Natural),
            "base2" | "2" | "log2" => Ok(LogBase::Base2),
            other => Err(format!(
                "unknown log base `{other}` (expected natural or base2)"
            )),
        }
    }
}

const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Σ p_i log(p_i / q_i), with 0 log 0 = 0.
pub fn kl_divergence(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    if p.len() != q.len() || p.len() < 2 {
        return Err(Error::Normalization(format!(
            "vectors must share a length of at least 2, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if let Some(x) = v
            .iter()
            .find(|&&x| !(-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&x))
        {
            return Err(Error::Normalization(format!(
                "{name} has component {x} outside [0,1]"
            )));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Normalization(format!("{name} sums to {total}")));
        }
    }
    if let Some(index) = p.iter().zip(q).position(|(&pi, &qi)| pi > 0.0 && qi <= 0.0) {
        return Err(Error::DivergenceDomain { index });
    }
    Ok(kl_unchecked(p, q, base))
}

#[inline]
fn kl_unchecked(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    p.iter().zip(q).fold(0.0, |acc, (&pi, &qi)| {
        if pi > 0.0 {
            acc + pi * base.log(pi / qi)
        } else {
            acc
        }
    })
}

/// Exposure(G|r): position bias summed over G ∩ D, divided by |G| in the full population.
pub fn exposure(r: &Ranking, g: Group) -> f64 {
    let sum = r
        .groups()
        .enumerate()
        .filter(|&(_, x)| x == g)
        .fold(0.0, |acc, (i, _)| acc + bias(i + 1));
    sum / r.population().group_size(g) as f64
}

/// CTR(G|r): relevance-weighted exposure.
pub fn click_through_rate(r: &Ranking, g: Group) -> f64 {
    let sum = r
        .candidates()
        .enumerate()
        .filter(|(_, c)| c.group == g)
        .fold(0.0, |acc, (i, c)| acc + bias(i + 1) * c.relevance);
    sum / r.population().group_size(g) as f64
}

/// The cutoff set I for prefix metrics.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoffs {
    /// I = {1, …, n}.
    #[default]
    EveryRank,
    /// I = {s, 2s, 3s, …} ∩ {1, …, n}.
    Step(usize),
    /// An explicit strictly increasing list.
    Explicit(Vec<usize>),
}

impl Cutoffs {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        let ks: Vec<usize> = match self {
            Cutoffs::EveryRank => (1..=n).collect(),
            Cutoffs::Step(0) => return Err(Error::Cutoff("step must be positive".into())),
            Cutoffs::Step(s) => (*s..=n).step_by(*s).collect(),
            Cutoffs::Explicit(ks) => {
                if let Some(w) = ks.windows(2).find(|w| w[0] >= w[1]) {
                    return Err(Error::Cutoff(format!(
                        "cutoffs must be strictly increasing, found {} before {}",
                        w[0], w[1]
                    )));
                }
                if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
                    return Err(Error::Cutoff(format!("cutoff {k} outside 1..={n}")));
                }
                ks.clone()
            }
        };
        if ks.is_empty() {
            return Err(Error::Cutoff(format!("no cutoff falls within 1..={n}")));
        }
        Ok(ks)
    }
}

impl FromStr for Cutoffs {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("every") || s.eq_ignore_ascii_case("all") {
            return Ok(Cutoffs::EveryRank);
        }
        if let Some(step) = s.strip_prefix("step:") {
            return step
                .trim()
                .parse()
                .map(Cutoffs::Step)
                .map_err(|e| format!("bad step `{step}`: {e}"));
        }
        s.split(',')
            .map(|k| {
                k.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad cutoff `{k}`: {e}"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Cutoffs::Explicit)
    }
}

/// How the prefix-metric normalizer Z(D) is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// Maximum over every group pattern of D. Limited to [`BRUTE_FORCE_MAX_N`].
    BruteForce,
    /// Maximum over one R_first and one R_last representative. Cheap, but
    /// not always the true maximum.
    ExtremeRanking,
    /// Exact maximum by dynamic programming over prefix group counts.
    #[default]
    LatticePath,
}

impl FromStr for Normalizer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "brute" | "brute-force" | "bruteforce" => Ok(Normalizer::BruteForce),
            "extreme" | "extreme-ranking" => Ok(Normalizer::ExtremeRanking),
            "exact" | "lattice" | "lattice-path" => Ok(Normalizer::LatticePath),
            other => Err(format!(
                "unknown normalizer `{other}` (expected brute, extreme or exact)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricConfig {
    pub cutoffs: Cutoffs,
    pub log_base: LogBase,
    pub normalizer: Normalizer,
}

impl MetricConfig {
    pub fn with_cutoffs(mut self, cutoffs: Cutoffs) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    pub fn with_normalizer(mut self, normalizer: Normalizer) -> Self {
        self.normalizer = normalizer;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    /// Setting 1: the whole population is ranked.
    FullPopulation,
    /// Setting 2: a strict subset is ranked.
    SubsetOfPopulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "rND")]
    RND,
    #[serde(rename = "rRD")]
    RRD,
    #[serde(rename = "rKL")]
    RKL,
    ED,
    ER,
    DTD,
    DTR,
    DID,
    DIR,
    AWRF,
    PSP,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::RND,
        Metric::RRD,
        Metric::RKL,
        Metric::ED,
        Metric::ER,
        Metric::DTD,
        Metric::DTR,
        Metric::DID,
        Metric::DIR,
        Metric::AWRF,
        Metric::PSP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RND => "rND",
            Metric::RRD => "rRD",
            Metric::RKL => "rKL",
            Metric::ED => "ED",
            Metric::ER => "ER",
            Metric::DTD => "DTD",
            Metric::DTR => "DTR",
            Metric::DID => "DID",
            Metric::DIR => "DIR",
            Metric::AWRF => "AWRF",
            Metric::PSP => "PSP",
        }
    }

    /// Value on a perfectly fair ranking.
    pub fn v_opt(self) -> f64 {
        match self {
            Metric::ED | Metric::DTD | Metric::DID | Metric::PSP => 0.0,
            _ => 1.0,
        }
    }

    pub fn uses_relevance(self) -> bool {
        matches!(self, Metric::DTD | Metric::DTR | Metric::DID | Metric::DIR)
    }

    pub fn is_prefix(self) -> bool {
        matches!(self, Metric::RND | Metric::RRD | Metric::RKL)
    }

    pub fn settings(self) -> &'static [Setting] {
        match self {
            Metric::PSP => &[Setting::FullPopulation],
            _ => &[Setting::FullPopulation, Setting::SubsetOfPopulation],
        }
    }

    pub fn applies_to(self, setting: Setting) -> bool {
        self.settings().contains(&setting)
    }

    /// Evaluate on a single ranking. Prefix metrics compute Z(D) on the fly;
    /// use [`Metric::prepare`] to reuse it across rankings of one set.
    pub fn evaluate(self, r: &Ranking, cfg: &MetricConfig) -> Result<f64> {
        self.prepare(&r.candidate_set(), cfg)?.score(r)
    }

    /// Like [`Metric::evaluate`] but `Ok(None)` when the value is undefined:
    /// a vanishing divisor, or a zero prefix normalizer.
    pub fn try_evaluate(self, r: &Ranking, cfg: &MetricConfig) -> Result<Option<f64>> {
        match self.evaluate(r, cfg) {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.is_undefined_metric() || matches!(e, Error::NormalizerZero { .. }) => {
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    /// Resolve cutoffs and the normalizer once for a candidate set.
    pub fn prepare(self, set: &CandidateSet, cfg: &MetricConfig) -> Result<PreparedMetric> {
        let prefix = if self.is_prefix() {
            let cutoffs = cfg.cutoffs.resolve(set.len())?;
            let z = normalizer_for(self, set, &cutoffs, cfg)?;
            Some(PrefixParams { cutoffs, z })
        } else {
            None
        };
        Ok(PreparedMetric {
            metric: self,
            log_base: cfg.log_base,
            n: set.len(),
            protected: set.count(Group::Protected),
            prefix,
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone)]
struct PrefixParams {
    cutoffs: Vec<usize>,
    z: f64,
}

/// A metric bound to a candidate set's shape (size, protected count, cutoffs).
#[derive(Debug, Clone)]
pub struct PreparedMetric {
    metric: Metric,
    log_base: LogBase,
    n: usize,
    protected: usize,
    prefix: Option<PrefixParams>,
}

impl PreparedMetric {
    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Z(D) for prefix metrics.
    pub fn normalizer(&self) -> Option<f64> {
        self.prefix.as_ref().map(|p| p.z)
    }

    pub fn score(&self, r: &Ranking) -> Result<f64> {
        if r.len() != self.n || r.count(Group::Protected) != self.protected {
            return Err(Error::InvalidCandidateSet(format!(
                "ranking {r} does not match the prepared candidate set shape"
            )));
        }
        if let Some(p) = &self.prefix {
            let raw = prefix_raw_sum(self.metric, r, &p.cutoffs, self.log_base);
            return Ok(1.0 - raw / p.z);
        }
        match self.metric {
            Metric::AWRF => Ok(awrf(r, self.log_base)),
            Metric::PSP => psp(r),
            m => exposure_metric(m, r),
        }
    }
}

/// Deviation of one prefix from the population proportions.
/// `j` protected candidates among the top `k`; `p` is p_groups of the population.
#[inline]
pub(crate) fn prefix_term(metric: Metric, j: usize, k: usize, p: [f64; 2], base: LogBase) -> f64 {
    let x1 = j as f64 / k as f64;
    let x0 = (k - j) as f64 / k as f64;
    match metric {
        Metric::RND => (x1 - p[1]).abs(),
        Metric::RRD => {
            let ratio = if k == j { 0.0 } else { x1 / x0 };
            (ratio - p[1] / p[0]).abs()
        }
        Metric::RKL => kl_unchecked(&[x0, x1], &p, base),
        _ => unreachable!("{metric} is not a prefix metric"),
    }
}

/// Σ_{k∈I} b(k)·term(k), summed in ascending k.
fn raw_sum_of_counts(
    metric: Metric,
    prefix_protected: &[usize],
    cutoffs: &[usize],
    p: [f64; 2],
    base: LogBase,
) -> f64 {
    cutoffs.iter().fold(0.0, |acc, &k| {
        acc + bias(k) * prefix_term(metric, prefix_protected[k], k, p, base)
    })
}

fn prefix_counts(groups: impl Iterator<Item = Group>) -> Vec<usize> {
    let mut counts = vec![0];
    let mut c = 0;
    for g in groups {
        c += usize::from(g == Group::Protected);
        counts.push(c);
    }
    counts
}

/// The unnormalized discounted sum of a prefix metric.
pub fn prefix_raw_sum(metric: Metric, r: &Ranking, cutoffs: &[usize], base: LogBase) -> f64 {
    let counts = prefix_counts(r.groups());
    raw_sum_of_counts(metric, &counts, cutoffs, r.population().p_groups(), base)
}

/// Z(D): the largest value the unnormalized sum takes over all rankings of D.
pub fn prefix_normalizer(metric: Metric, set: &CandidateSet, cfg: &MetricConfig) -> Result<f64> {
    if !metric.is_prefix() {
        return Err(Error::NotApplicable {
            metric,
            reason: "only prefix metrics have a normalizer".into(),
        });
    }
    let cutoffs = cfg.cutoffs.resolve(set.len())?;
    normalizer_for(metric, set, &cutoffs, cfg)
}

fn normalizer_for(
    metric: Metric,
    set: &CandidateSet,
    cutoffs: &[usize],
    cfg: &MetricConfig,
) -> Result<f64> {
    let n = set.len();
    let n1 = set.count(Group::Protected);
    let p = set.population().p_groups();
    let base = cfg.log_base;
    let z = match cfg.normalizer {
        Normalizer::BruteForce => {
            if n > BRUTE_FORCE_MAX_N {
                return Err(Error::SizeGuard {
                    n,
                    max: BRUTE_FORCE_MAX_N,
                });
            }
            (0..n)
                .combinations(n1)
                .map(|slots| {
                    let mut pattern = vec![Group::NonProtected; n];
                    for s in slots {
                        pattern[s] = Group::Protected;
                    }
                    raw_sum_of_counts(
                        metric,
                        &prefix_counts(pattern.into_iter()),
                        cutoffs,
                        p,
                        base,
                    )
                })
                .fold(0.0, f64::max)
        }
        Normalizer::ExtremeRanking => {
            let first = block_pattern(n, n1, Group::Protected);
            let last = block_pattern(n, n1, Group::NonProtected);
            let a = raw_sum_of_counts(metric, &prefix_counts(first.into_iter()), cutoffs, p, base);
            let b = raw_sum_of_counts(metric, &prefix_counts(last.into_iter()), cutoffs, p, base);
            a.max(b)
        }
        Normalizer::LatticePath => lattice_max(metric, n, n1, cutoffs, p, base),
    };
    if z > 0.0 {
        Ok(z)
    } else {
        Err(Error::NormalizerZero { metric })
    }
}

fn block_pattern(n: usize, n1: usize, top: Group) -> Vec<Group> {
    let (first, count) = match top {
        Group::Protected => (Group::Protected, n1),
        Group::NonProtected => (Group::NonProtected, n - n1),
    };
    let mut v = vec![first; count];
    v.resize(n, first.other());
    v
}

/// Longest path through the (k, protected-so-far) lattice. Each cell keeps the
/// best partial sum; the sum is accumulated in ascending k exactly as
/// [`prefix_raw_sum`] does, so the optimum is bit-identical to enumeration.
fn lattice_max(
    metric: Metric,
    n: usize,
    n1: usize,
    cutoffs: &[usize],
    p: [f64; 2],
    base: LogBase,
) -> f64 {
    let mut in_cutoffs = vec![false; n + 1];
    for &k in cutoffs {
        in_cutoffs[k] = true;
    }
    let n0 = n - n1;
    // best[j] for j protected among the top k; None marks unreachable cells.
    let mut best: Vec<Option<f64>> = vec![None; n1 + 1];
    best[0] = Some(0.0);
    for (k, &is_cutoff) in in_cutoffs.iter().enumerate().skip(1) {
        let mut next: Vec<Option<f64>> = vec![None; n1 + 1];
        let lo = k.saturating_sub(n0);
        for j in lo..=k.min(n1) {
            let from_same = if k - j >= 1 { best[j] } else { None };
            let from_below = if j >= 1 { best[j - 1] } else { None };
            let prev = match (from_same, from_below) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            next[j] = prev.map(|v| {
                if is_cutoff {
                    v + bias(k) * prefix_term(metric, j, k, p, base)
                } else {
                    v
                }
            });
        }
        best = next;
    }
    best[n1].expect("the full path always reaches (n, n1)")
}

fn undefined(metric: Metric, quantity: VanishingQuantity) -> Error {
    Error::UndefinedMetric { metric, quantity }
}

fn exposure_metric(metric: Metric, r: &Ranking) -> Result<f64> {
    let pop = r.population();
    let e1 = exposure(r, Group::Protected);
    let e0 = exposure(r, Group::NonProtected);
    let y1 = pop.mean_relevance(Group::Protected);
    let y0 = pop.mean_relevance(Group::NonProtected);
    let need_y = || -> Result<()> {
        if y1 == 0.0 {
            return Err(undefined(metric, VanishingQuantity::ProtectedMeanRelevance));
        }
        if y0 == 0.0 {
            return Err(undefined(
                metric,
                VanishingQuantity::NonProtectedMeanRelevance,
            ));
        }
        Ok(())
    };
    match metric {
        Metric::ED => Ok(e1 - e0),
        Metric::ER => {
            if e0 == 0.0 {
                return Err(undefined(metric, VanishingQuantity::NonProtectedExposure));
            }
            Ok(e1 / e0)
        }
        Metric::DTD => {
            need_y()?;
            Ok(e1 / y1 - e0 / y0)
        }
        Metric::DTR => {
            need_y()?;
            if e0 == 0.0 {
                return Err(undefined(metric, VanishingQuantity::NonProtectedExposure));
            }
            Ok((e1 / y1) / (e0 / y0))
        }
        Metric::DID | Metric::DIR => {
            need_y()?;
            let c1 = click_through_rate(r, Group::Protected);
            let c0 = click_through_rate(r, Group::NonProtected);
            if metric == Metric::DID {
                return Ok(c1 / y1 - c0 / y0);
            }
            if c0 == 0.0 {
                return Err(undefined(
                    metric,
                    VanishingQuantity::NonProtectedClickThrough,
                ));
            }
            Ok((c1 / y1) / (c0 / y0))
        }
        _ => unreachable!("{metric} is not an exposure ratio or difference"),
    }
}

/// 1 − JS(p_exposure, p_groups), where p_exposure is each group's share of
/// the total position bias.
fn awrf(r: &Ranking, base: LogBase) -> f64 {
    let mut s = [0.0f64; 2];
    let mut total = 0.0;
    for (i, g) in r.groups().enumerate() {
        let b = bias(i + 1);
        s[g.index()] += b;
        total += b;
    }
    let pe = [s[0] / total, s[1] / total];
    let pg = r.population().p_groups();
    let ps = [(pe[0] + pg[0]) / 2.0, (pe[1] + pg[1]) / 2.0];
    1.0 - (0.5 * kl_unchecked(&pe, &ps, base) + 0.5 * kl_unchecked(&pg, &ps, base))
}

/// (favourable − unfavourable) / (|G0|·|G1|) over all cross-group pairs.
fn psp(r: &Ranking) -> Result<f64> {
    if !r.is_full() {
        return Err(Error::NotApplicable {
            metric: Metric::PSP,
            reason: "PSP is only defined when the full population is ranked".into(),
        });
    }
    let mut protected_seen: u64 = 0;
    let mut favourable: u64 = 0;
    for g in r.groups() {
        match g {
            Group::Protected => protected_seen += 1,
            Group::NonProtected => favourable += protected_seen,
        }
    }
    let pop = r.population();
    let pairs = (pop.protected_count() * pop.nonprotected_count()) as u64;
    let diff = 2 * favourable as i64 - pairs as i64;
    Ok(diff as f64 / pairs as f64)
}
