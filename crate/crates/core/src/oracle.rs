//! Brute-force reference values for small candidate sets.
//!
//! Nothing here shares evaluation code with the prefix-metric normalizer in
//! [`crate::metrics`]; the raw sums are recomputed from the rankings
//! themselves, in the same floating-point order, so results compare bit-exactly.

use crate::error::{Error, Result};
use crate::generators::enumerate_rankings;
use crate::metrics::{LogBase, Metric, MetricConfig};
use crate::ranking::{CandidateSet, Group, Ranking};

/// Largest candidate set the oracles accept.
pub const ORACLE_MAX_N: usize = 8;

fn guard(set: &CandidateSet) -> Result<()> {
    if set.len() > ORACLE_MAX_N {
        return Err(Error::SizeGuard {
            n: set.len(),
            max: ORACLE_MAX_N,
        });
    }
    Ok(())
}

fn log_of(base: LogBase, x: f64) -> f64 {
    match base {
        LogBase::Natural => x.ln(),
        LogBase::Base2 => x.log2(),
    }
}

/// Unnormalized discounted prefix sum, computed from scratch.
fn raw_sum(metric: Metric, r: &Ranking, cutoffs: &[usize], base: LogBase) -> f64 {
    let [q0, q1] = r.population().p_groups();
    let groups: Vec<Group> = r.groups().collect();
    let mut total = 0.0;
    for &k in cutoffs {
        let j = groups[..k]
            .iter()
            .filter(|&&g| g == Group::Protected)
            .count();
        let s1 = j as f64 / k as f64;
        let s0 = (k - j) as f64 / k as f64;
        let term = match metric {
            Metric::RND => (s1 - q1).abs(),
            Metric::RRD => {
                let ratio = if j == k { 0.0 } else { s1 / s0 };
                (ratio - q1 / q0).abs()
            }
            Metric::RKL => {
                let mut d = 0.0;
                if s0 > 0.0 {
                    d += s0 * log_of(base, s0 / q0);
                }
                if s1 > 0.0 {
                    d += s1 * log_of(base, s1 / q1);
                }
                d
            }
            other => unreachable!("{other} is not a prefix metric"),
        };
        total += (1.0 / ((k + 1) as f64).log2()) * term;
    }
    total
}

/// Exact max of the unnormalized prefix sum over all n! rankings of `set`.
/// Returns 0 for degenerate sets rather than an error.
pub fn brute_force_normalizer(
    metric: Metric,
    set: &CandidateSet,
    cfg: &MetricConfig,
) -> Result<f64> {
    guard(set)?;
    if !metric.is_prefix() {
        return Err(Error::NotApplicable {
            metric,
            reason: "only prefix metrics have a normalizer".into(),
        });
    }
    let cutoffs = cfg.cutoffs.resolve(set.len())?;
    Ok(enumerate_rankings(set)?
        .map(|r| raw_sum(metric, &r, &cutoffs, cfg.log_base))
        .fold(0.0, f64::max))
}

/// Neumaier's compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// v_E(m, D): the mean of m over all n! rankings of `set`.
///
/// The first ranking on which `m` is undefined aborts the computation and is
/// returned inside [`Error::UndefinedOnRanking`].
pub fn exact_expectation(metric: Metric, set: &CandidateSet, cfg: &MetricConfig) -> Result<f64> {
    guard(set)?;
    let prepared = metric.prepare(set, cfg)?;
    let mut acc = CompensatedSum::default();
    let mut count = 0u64;
    for r in enumerate_rankings(set)? {
        let v = prepared.score(&r).map_err(|e| match e {
            e if e.is_undefined_metric() => Error::UndefinedOnRanking {
                order: r.ids(),
                source: Box::new(e),
            },
            e => e,
        })?;
        acc.add(v);
        count += 1;
    }
    Ok(acc.value() / count as f64)
}
