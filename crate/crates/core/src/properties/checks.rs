//! The thirteen falsification searches.

use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    monte_carlo, Counterexample, PropertyId, PropertyVerdict, Requirement, SearchBudget, Status,
    Term, EPS, SYMMETRY_TOLERANCE, TRANSFORM_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::generators::{
    dn_population_size, enumerate_rankings, make_dn_pair, make_first, make_last,
    population_from_groups, uniform_population, PopulationSpec,
};
use crate::metrics::{Cutoffs, Metric, MetricConfig, PreparedMetric};
use crate::oracle::exact_expectation;
use crate::ranking::{CandidateSet, Group, Population, Ranking};

/// What a single search produced.
#[derive(Default)]
struct Outcome {
    counterexample: Option<Counterexample>,
    searched: Vec<String>,
    threshold: Option<usize>,
    notes: Vec<String>,
}

struct Ctx<'a> {
    metric: Metric,
    budget: &'a SearchBudget,
    base: &'a MetricConfig,
    undefined_skipped: usize,
}

impl Ctx<'_> {
    fn config(&self, cutoffs: Cutoffs) -> MetricConfig {
        self.base.clone().with_cutoffs(cutoffs)
    }

    fn score(&mut self, prepared: &PreparedMetric, r: &Ranking) -> Result<Option<f64>> {
        match prepared.score(r) {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.is_undefined_metric() => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Scores of all rankings, or `None` (counted as skipped) if any is undefined.
    fn scores(&mut self, prepared: &PreparedMetric, rs: &[&Ranking]) -> Result<Option<Vec<f64>>> {
        let mut out = Vec::with_capacity(rs.len());
        for r in rs {
            match self.score(prepared, r)? {
                Some(v) => out.push(v),
                None => {
                    self.undefined_skipped += 1;
                    return Ok(None);
                }
            }
        }
        Ok(Some(out))
    }

    fn counterexample(
        &self,
        cfg: &MetricConfig,
        description: String,
        requirement: Requirement,
        terms: Vec<(String, Term)>,
        values: Vec<Option<f64>>,
    ) -> Counterexample {
        let (labels, terms) = terms.into_iter().unzip();
        Counterexample {
            metric: self.metric,
            config: cfg.clone(),
            description,
            labels,
            terms,
            values,
            requirement,
        }
    }

    fn rng(&self, property: PropertyId) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(
            self.budget.seed ^ (property.number() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        )
    }
}

pub(super) fn run(
    property: PropertyId,
    metric: Metric,
    budget: &SearchBudget,
    base: &MetricConfig,
) -> Result<PropertyVerdict> {
    let mut ctx = Ctx {
        metric,
        budget,
        base,
        undefined_skipped: 0,
    };
    let outcome = match property {
        PropertyId::P1 => distinguishability(&mut ctx)?,
        PropertyId::P2 => boundedness(&mut ctx)?,
        PropertyId::P3 => swap_search(&mut ctx, SwapKind::Monotonicity)?,
        PropertyId::P4 => deepness(&mut ctx)?,
        PropertyId::P5 => swap_search(&mut ctx, SwapKind::IntraGroup)?,
        PropertyId::P6 => linear_invariance(&mut ctx)?,
        PropertyId::P7 => random_optimality(&mut ctx)?,
        PropertyId::P8 => extreme_invariance(&mut ctx, Axis::Length)?,
        PropertyId::P9 => extreme_invariance(&mut ctx, Axis::Proportion)?,
        PropertyId::P10 => symmetric_penalties(&mut ctx)?,
        PropertyId::P11 => closeness(&mut ctx)?,
        PropertyId::P12 => deepness_threshold(&mut ctx)?,
        PropertyId::P13 => sensitivity(&mut ctx)?,
    };
    let status = if outcome.counterexample.is_some() {
        Status::Violated
    } else {
        Status::Satisfied
    };
    let mut verdict = PropertyVerdict::new(property, metric, status, outcome.searched.join("; "));
    verdict.counterexample = outcome.counterexample;
    verdict.threshold = outcome.threshold;
    verdict.notes = outcome.notes;
    if ctx.undefined_skipped > 0 {
        verdict.notes.push(format!(
            "{} comparisons skipped because the metric was undefined (reported under P2)",
            ctx.undefined_skipped
        ));
    }
    Ok(verdict)
}

fn describe(set: &CandidateSet, relevance: &str) -> String {
    let pop = set.population();
    format!(
        "population of {} (|G0| = {}, |G1| = {}, {relevance} relevance), ranked set of {} with {} protected",
        pop.len(),
        pop.nonprotected_count(),
        pop.protected_count(),
        set.len(),
        set.count(Group::Protected)
    )
}

// ---------------------------------------------------------------------------
// Instance families

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relevance {
    Uniform,
    /// Distinct values in (0,1], interleaved across the groups.
    Ramp,
    ZeroProtected,
    ZeroNonProtected,
}

impl Relevance {
    fn name(self) -> &'static str {
        match self {
            Relevance::Uniform => "uniform",
            Relevance::Ramp => "distinct",
            Relevance::ZeroProtected => "zero-protected",
            Relevance::ZeroNonProtected => "zero-non-protected",
        }
    }

    fn constant_within_groups(self) -> bool {
        self != Relevance::Ramp
    }
}

fn pattern_population(n0: usize, n1: usize, relevance: Relevance) -> Result<Arc<Population>> {
    let groups: Vec<Group> = std::iter::repeat_n(Group::Protected, n1)
        .chain(std::iter::repeat_n(Group::NonProtected, n0))
        .collect();
    let n = groups.len();
    let ys: Vec<f64> = match relevance {
        Relevance::Uniform => vec![1.0; n],
        Relevance::ZeroProtected => groups
            .iter()
            .map(|&g| if g == Group::Protected { 0.0 } else { 1.0 })
            .collect(),
        Relevance::ZeroNonProtected => groups
            .iter()
            .map(|&g| if g == Group::Protected { 1.0 } else { 0.0 })
            .collect(),
        Relevance::Ramp => {
            // Alternate the groups, then hand out 1/n, 2/n, … in that order.
            let interleaved = (0..n1).interleave(n1..n);
            let mut ys = vec![0.0; n];
            for (t, idx) in interleaved.enumerate() {
                ys[idx] = (t + 1) as f64 / n as f64;
            }
            ys
        }
    };
    population_from_groups(groups, ys)
}

/// Rankings covering every group pattern of `set`, members in ascending id within groups.
fn pattern_rankings(set: &CandidateSet) -> Vec<Ranking> {
    let pop = set.population();
    let sorted = set.sorted_by_id();
    let (prot, nonprot): (Vec<usize>, Vec<usize>) = sorted
        .into_iter()
        .partition(|&m| pop.candidate(m).group == Group::Protected);
    let n = set.len();
    (0..n)
        .combinations(prot.len())
        .map(|slots| {
            let mut order = Vec::with_capacity(n);
            let (mut p, mut q) = (prot.iter(), nonprot.iter());
            let mut slot = slots.iter().peekable();
            for k in 0..n {
                if slot.peek() == Some(&&k) {
                    slot.next();
                    order.push(*p.next().expect("slot count matches"));
                } else {
                    order.push(*q.next().expect("slot count matches"));
                }
            }
            Ranking::from_indices(Arc::clone(pop), order).expect("a permutation of the set")
        })
        .collect()
}

struct Instance {
    set: CandidateSet,
    rankings: Vec<Ranking>,
    description: String,
}

fn lowest_of(pop: &Population, g: Group, count: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..pop.len())
        .filter(|&i| pop.candidate(i).group == g)
        .collect();
    ids.sort_by(|&a, &b| pop.candidate(a).id.cmp(&pop.candidate(b).id));
    ids.truncate(count);
    ids
}

fn instance(set: CandidateSet, relevance: Relevance) -> Result<Instance> {
    let rankings = if relevance.constant_within_groups() {
        pattern_rankings(&set)
    } else {
        enumerate_rankings(&set)?.collect()
    };
    let description = describe(&set, relevance.name());
    Ok(Instance {
        set,
        rankings,
        description,
    })
}

/// Setting 1 populations up to `exhaustive_max_n` and Setting 2 subsets up to
/// `subset_max_n`, under each relevance pattern. Sets that the metric cannot
/// score (PSP on a strict subset) are left out.
fn exhaustive_instances(ctx: &Ctx<'_>, patterns: &[Relevance]) -> Result<Vec<Instance>> {
    let b = ctx.budget;
    let mut out = Vec::new();
    for &rel in patterns {
        for n in 2..=b.exhaustive_max_n {
            for n1 in 1..n {
                let pop = pattern_population(n - n1, n1, rel)?;
                out.push(instance(CandidateSet::full(pop), rel)?);
            }
        }
        if ctx.metric == Metric::PSP {
            continue;
        }
        for n_pop in 3..=b.subset_max_n + 2 {
            for n1 in 1..n_pop {
                let n0 = n_pop - n1;
                let pop = pattern_population(n0, n1, rel)?;
                for (c0, c1) in (0..=n0).cartesian_product(0..=n1) {
                    let size = c0 + c1;
                    if size == 0 || size >= n_pop || size > b.subset_max_n {
                        continue;
                    }
                    let members = lowest_of(&pop, Group::Protected, c1)
                        .into_iter()
                        .chain(lowest_of(&pop, Group::NonProtected, c0))
                        .collect();
                    let set = CandidateSet::from_indices(Arc::clone(&pop), members)?;
                    out.push(instance(set, rel)?);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum RandomRelevance {
    /// Uniform on (0,1].
    Continuous,
    /// Uniform on {0.25, 0.5, 0.75, 1}, so equal relevances are common.
    Grid,
}

fn random_instances(
    ctx: &Ctx<'_>,
    property: PropertyId,
    count: usize,
    max_population: usize,
    relevance: RandomRelevance,
) -> Result<Vec<Instance>> {
    let b = ctx.budget;
    let mut rng = ctx.rng(property);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let full = ctx.metric == Metric::PSP;
        let n_pop = if full {
            rng.gen_range(2..=b.random_max_set.min(max_population))
        } else {
            rng.gen_range(2..=max_population)
        };
        let n1 = rng.gen_range(1..n_pop);
        let mut groups: Vec<Group> = std::iter::repeat_n(Group::Protected, n1)
            .chain(std::iter::repeat_n(Group::NonProtected, n_pop - n1))
            .collect();
        groups.shuffle(&mut rng);
        let ys: Vec<f64> = (0..n_pop)
            .map(|_| match relevance {
                RandomRelevance::Continuous => 1.0 - rng.gen::<f64>(),
                RandomRelevance::Grid => rng.gen_range(1..=4u8) as f64 / 4.0,
            })
            .collect();
        let pop = population_from_groups(groups, ys)?;
        let size = if full {
            n_pop
        } else {
            rng.gen_range(2.min(n_pop)..=n_pop.min(b.random_max_set))
        };
        let mut members: Vec<usize> = (0..n_pop).collect();
        members.shuffle(&mut rng);
        members.truncate(size);
        let set = CandidateSet::from_indices(pop, members)?;
        let mut order = set.members().to_vec();
        order.shuffle(&mut rng);
        let r = Ranking::from_indices(Arc::clone(set.population()), order)?;
        let rel = match relevance {
            RandomRelevance::Continuous => "random (0,1]",
            RandomRelevance::Grid => "random {0.25,0.5,0.75,1}",
        };
        let description = describe(&set, rel);
        out.push(Instance {
            set,
            rankings: vec![r],
            description,
        });
    }
    Ok(out)
}

fn every_rank_searched(ctx: &Ctx<'_>, random: usize) -> String {
    let b = ctx.budget;
    let mut s = format!(
        "all rankings of Setting-1 populations with n ≤ {} and Setting-2 sets with |D| ≤ {}",
        b.exhaustive_max_n, b.subset_max_n
    );
    if random > 0 {
        s.push_str(&format!(
            ", plus {random} seeded random instances (seed {})",
            b.seed
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// Universal properties

fn boundedness(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::EveryRank);
    let bound = ctx.budget.bound;
    let req = Requirement::Bounded { bound };
    let mut out = Outcome::default();
    let patterns = [
        Relevance::Uniform,
        Relevance::ZeroProtected,
        Relevance::ZeroNonProtected,
        Relevance::Ramp,
    ];
    out.searched.push(format!(
        "{} under uniform, zero-group and distinct relevance, cutoffs at every rank, envelope |m| ≤ {bound}",
        every_rank_searched(ctx, 0)
    ));
    for inst in exhaustive_instances(ctx, &patterns)? {
        let prepared = ctx.metric.prepare(&inst.set, &cfg)?;
        for r in &inst.rankings {
            let v = ctx.score(&prepared, r)?;
            if !req.holds(&[v]) {
                out.counterexample = Some(ctx.counterexample(
                    &cfg,
                    inst.description,
                    req,
                    vec![("m(r)".into(), Term::Score(r.clone()))],
                    vec![v],
                ));
                return Ok(out);
            }
        }
    }
    // One protected candidate on top of a single non-protected one, while |G0| grows.
    out.searched.push(format!(
        "growth family ⟨g1, g0⟩ with |G1| = 1 and |G0| = 1, 2, 4, …, {}",
        ctx.budget.growth_max
    ));
    let mut m = 1;
    while m <= ctx.budget.growth_max {
        let pop = uniform_population(m, 1)?;
        let members = vec![
            lowest_of(&pop, Group::Protected, 1)[0],
            lowest_of(&pop, Group::NonProtected, 1)[0],
        ];
        let set = CandidateSet::from_indices(Arc::clone(&pop), members)?;
        m *= 2;
        if !set.is_full() && ctx.metric == Metric::PSP {
            continue;
        }
        let r = set.ranking();
        let prepared = ctx.metric.prepare(&set, &cfg)?;
        let v = ctx.score(&prepared, &r)?;
        if !req.holds(&[v]) {
            out.counterexample = Some(ctx.counterexample(
                &cfg,
                describe(&set, "uniform"),
                req,
                vec![("m(r)".into(), Term::Score(r))],
                vec![v],
            ));
            return Ok(out);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SwapKind {
    /// r(i) ∈ G0, r(j) ∈ G1, y(r(i)) ≤ y(r(j)): the swap must increase m.
    Monotonicity,
    /// Same group, y(r(i)) < y(r(j)): increase for G1, decrease for G0.
    IntraGroup,
}

fn swap_search(ctx: &mut Ctx<'_>, kind: SwapKind) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::EveryRank);
    let property = match kind {
        SwapKind::Monotonicity => PropertyId::P3,
        SwapKind::IntraGroup => PropertyId::P5,
    };
    let patterns: &[Relevance] = match (kind, ctx.metric.uses_relevance()) {
        (SwapKind::Monotonicity, false) => &[Relevance::Uniform],
        (SwapKind::Monotonicity, true) => &[Relevance::Uniform, Relevance::Ramp],
        (SwapKind::IntraGroup, _) => &[Relevance::Ramp],
    };
    let b = ctx.budget;
    let mut instances = exhaustive_instances(ctx, patterns)?;
    instances.extend(random_instances(
        ctx,
        property,
        b.random_instances,
        b.random_max_population,
        RandomRelevance::Continuous,
    )?);
    let mut out = Outcome::default();
    out.searched.push(format!(
        "{}, cutoffs at every rank, every qualifying pair (i, j)",
        every_rank_searched(ctx, b.random_instances)
    ));
    if kind == SwapKind::IntraGroup {
        // With one group absent from D the ratio metrics are constant (0 or
        // undefined), so intra-group swaps are only meaningful with both present.
        instances.retain(|inst| {
            inst.set.count(Group::Protected) > 0 && inst.set.count(Group::NonProtected) > 0
        });
        out.searched
            .push("candidate sets containing both groups".into());
    }
    for inst in instances {
        let prepared = ctx.metric.prepare(&inst.set, &cfg)?;
        for r in &inst.rankings {
            let cands: Vec<_> = r.candidates().cloned().collect();
            let Some(base) = ctx.score(&prepared, r)? else {
                ctx.undefined_skipped += 1;
                continue;
            };
            for (i, j) in (0..cands.len()).tuple_combinations() {
                let (a, c) = (&cands[i], &cands[j]);
                let req = match kind {
                    SwapKind::Monotonicity
                        if a.group == Group::NonProtected
                            && c.group == Group::Protected
                            && a.relevance <= c.relevance =>
                    {
                        Requirement::Increases
                    }
                    SwapKind::IntraGroup if a.group == c.group && a.relevance < c.relevance => {
                        if a.group == Group::Protected {
                            Requirement::Increases
                        } else {
                            Requirement::Decreases
                        }
                    }
                    _ => continue,
                };
                let swapped = r.swap(i + 1, j + 1)?;
                let Some(after) = ctx.score(&prepared, &swapped)? else {
                    ctx.undefined_skipped += 1;
                    continue;
                };
                let values = [Some(base), Some(after)];
                if !req.holds(&values) {
                    out.counterexample = Some(ctx.counterexample(
                        &cfg,
                        format!("{}; r = {r}", inst.description),
                        req,
                        vec![
                            ("m(r)".into(), Term::Score(r.clone())),
                            (
                                format!("m(r_{{{}↔{}}})", i + 1, j + 1),
                                Term::Score(swapped),
                            ),
                        ],
                        values.to_vec(),
                    ));
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// The 25-candidate instance with p_groups = (0.56, 0.44) and the ranking
/// ⟨g0, g1, g0, g1, g0, g1⟩, compared at i = 3 and j = 5.
fn pinned_deepness_instance() -> Result<(Ranking, usize, usize)> {
    let pop = uniform_population(14, 11)?;
    let g0 = lowest_of(&pop, Group::NonProtected, 3);
    let g1 = lowest_of(&pop, Group::Protected, 3);
    let order = g0.into_iter().interleave(g1).collect();
    Ok((Ranking::from_indices(pop, order)?, 3, 5))
}

fn deepness(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::EveryRank);
    let b = ctx.budget;
    let mut out = Outcome::default();
    let req = Requirement::ShallowerSwapLarger;

    let mut instances = Vec::new();
    if ctx.metric != Metric::PSP {
        let (r, i, j) = pinned_deepness_instance()?;
        let set = r.candidate_set();
        instances.push((
            Instance {
                description: describe(&set, "uniform"),
                set,
                rankings: vec![r],
            },
            Some((i, j)),
        ));
    }
    for inst in exhaustive_instances(ctx, &[Relevance::Uniform])? {
        instances.push((inst, None));
    }
    for inst in random_instances(
        ctx,
        PropertyId::P4,
        b.random_instances,
        b.random_max_population,
        RandomRelevance::Grid,
    )? {
        instances.push((inst, None));
    }
    out.searched.push(format!(
        "pinned instance p_groups = (0.56, 0.44), i = 3, j = 5; {}, cutoffs at every rank",
        every_rank_searched(ctx, b.random_instances)
    ));

    for (inst, only) in instances {
        let prepared = ctx.metric.prepare(&inst.set, &cfg)?;
        for r in &inst.rankings {
            let cands: Vec<_> = r.candidates().cloned().collect();
            let n = cands.len();
            let Some(base) = ctx.score(&prepared, r)? else {
                ctx.undefined_skipped += 1;
                continue;
            };
            let mut swapped_at: Vec<Option<(Ranking, Option<f64>)>> = vec![None; n];
            for (i, j) in (0..n.saturating_sub(1)).tuple_combinations() {
                if let Some((pi, pj)) = only {
                    if (i + 1, j + 1) != (pi, pj) {
                        continue;
                    }
                }
                let qualifies = cands[i].relevance == cands[j].relevance
                    && cands[i + 1].relevance == cands[j + 1].relevance
                    && cands[i].group == cands[j].group
                    && cands[i + 1].group == cands[j + 1].group
                    && cands[i].group != cands[i + 1].group;
                if !qualifies {
                    continue;
                }
                for k in [i, j] {
                    if swapped_at[k].is_none() {
                        let s = r.swap(k + 1, k + 2)?;
                        let v = ctx.score(&prepared, &s)?;
                        swapped_at[k] = Some((s, v));
                    }
                }
                let (si, vi) = swapped_at[i].clone().expect("filled above");
                let (sj, vj) = swapped_at[j].clone().expect("filled above");
                if vi.is_none() || vj.is_none() {
                    ctx.undefined_skipped += 1;
                    continue;
                }
                let values = [Some(base), vi, vj];
                if !req.holds(&values) {
                    out.counterexample = Some(ctx.counterexample(
                        &cfg,
                        format!("{}; r = {r}", inst.description),
                        req,
                        vec![
                            ("m(r)".into(), Term::Score(r.clone())),
                            (format!("m(r_{{{}↔{}}})", i + 1, i + 2), Term::Score(si)),
                            (format!("m(r_{{{}↔{}}})", j + 1, j + 2), Term::Score(sj)),
                        ],
                        values.to_vec(),
                    ));
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

fn linear_invariance(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::EveryRank);
    let b = ctx.budget;
    let req = Requirement::Equal {
        tolerance: TRANSFORM_TOLERANCE,
        relative: true,
    };
    let mut out = Outcome::default();
    out.searched.push(format!(
        "{} seeded random instances (seed {}), a ∈ {:?}, c ∈ {:?}",
        b.transform_instances, b.seed, b.transform_scales, b.transform_shifts
    ));
    let instances = random_instances(
        ctx,
        PropertyId::P6,
        b.transform_instances,
        30,
        RandomRelevance::Continuous,
    )?;
    for inst in instances {
        let r = &inst.rankings[0];
        let Some(v) = ctx.scores(&ctx.metric.prepare(&inst.set, &cfg)?, &[r])? else {
            continue;
        };
        for (&a, &c) in b
            .transform_scales
            .iter()
            .cartesian_product(&b.transform_shifts)
        {
            let pop = r.population().affine(a, c)?.into_shared();
            let rf = r.rebind(pop)?;
            let prepared = ctx.metric.prepare(&rf.candidate_set(), &cfg)?;
            let Some(vf) = ctx.scores(&prepared, &[&rf])? else {
                continue;
            };
            let values = [Some(v[0]), Some(vf[0])];
            if !req.holds(&values) {
                out.counterexample = Some(ctx.counterexample(
                    &cfg,
                    format!("{}; r = {r}; f(y) = {a}·y + {c}", inst.description),
                    req,
                    vec![
                        ("m(r(D))".into(), Term::Score(r.clone())),
                        (format!("m(r(f_{{{a},{c}}}(D)))"), Term::Score(rf)),
                    ],
                    values.to_vec(),
                ));
                return Ok(out);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Setting 1

fn random_optimality(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::EveryRank);
    let b = ctx.budget;
    let v_opt = ctx.metric.v_opt();
    let mut out = Outcome::default();
    out.searched.push(format!(
        "exact expectation over all rankings for every population with 2 ≤ n ≤ {} and every group split",
        b.expectation_max_n
    ));
    for n in 2..=b.expectation_max_n {
        for n1 in 1..n {
            let set = CandidateSet::full(uniform_population(n - n1, n1)?);
            let v = match exact_expectation(ctx.metric, &set, &cfg) {
                Ok(v) => Some(v),
                Err(e) if e.is_undefined_metric() => None,
                Err(e) => return Err(e),
            };
            let req = Requirement::Near {
                target: v_opt,
                tolerance: EPS,
            };
            if !req.holds(&[v]) {
                out.counterexample = Some(ctx.counterexample(
                    &cfg,
                    describe(&set, "uniform"),
                    req,
                    vec![("v_E(m, D)".into(), Term::Expectation(set))],
                    vec![v],
                ));
                return Ok(out);
            }
        }
    }
    if b.monte_carlo_samples > 1 {
        let set =
            CandidateSet::full(PopulationSpec::uniform(b.monte_carlo_n, b.monte_carlo_p).build()?);
        out.searched.push(format!(
            "Monte Carlo at n = {}, p = {} with {} samples (seed {}), tolerance 3σ",
            b.monte_carlo_n, b.monte_carlo_p, b.monte_carlo_samples, b.seed
        ));
        let (mean, se) = monte_carlo(ctx.metric, &set, &cfg, b.monte_carlo_samples, b.seed)?;
        let req = Requirement::Near {
            target: v_opt,
            tolerance: 3.0 * se,
        };
        out.notes
            .push(format!("Monte Carlo mean {mean} ± {se:e} (1σ)"));
        if !req.holds(&[Some(mean)]) {
            out.counterexample = Some(ctx.counterexample(
                &cfg,
                describe(&set, "uniform"),
                req,
                vec![(
                    "mean of m over sampled rankings".into(),
                    Term::MonteCarlo {
                        set,
                        samples: b.monte_carlo_samples,
                        seed: b.seed,
                    },
                )],
                vec![Some(mean)],
            ));
        }
    }
    Ok(out)
}

struct Extremes {
    set: CandidateSet,
    first: Ranking,
    last: Ranking,
    v_first: Option<f64>,
    v_last: Option<f64>,
}

fn extremes(ctx: &mut Ctx<'_>, pop: Arc<Population>, cfg: &MetricConfig) -> Result<Extremes> {
    let set = CandidateSet::full(pop);
    let prepared = ctx.metric.prepare(&set, cfg)?;
    let first = make_first(&set);
    let last = make_last(&set);
    let v_first = ctx.score(&prepared, &first)?;
    let v_last = ctx.score(&prepared, &last)?;
    Ok(Extremes {
        set,
        first,
        last,
        v_first,
        v_last,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Length,
    Proportion,
}

fn length_populations(b: &SearchBudget) -> Result<Vec<Arc<Population>>> {
    b.length_grid
        .iter()
        .map(|&n| PopulationSpec::uniform(n, b.length_p).build())
        .collect()
}

fn proportion_populations(b: &SearchBudget) -> Result<Vec<Arc<Population>>> {
    b.proportion_grid
        .iter()
        .map(|&p| PopulationSpec::uniform(b.proportion_n, p).build())
        .collect()
}

fn grid_searched(b: &SearchBudget, axes: &[Axis]) -> String {
    axes.iter()
        .map(|a| match a {
            Axis::Length => format!(
                "n ∈ {{{}..{}}} at p = {}",
                b.length_grid.first().unwrap_or(&0),
                b.length_grid.last().unwrap_or(&0),
                b.length_p
            ),
            Axis::Proportion => format!(
                "p ∈ {{{}..{}}} at n = {}",
                b.proportion_grid.first().unwrap_or(&0.0),
                b.proportion_grid.last().unwrap_or(&0.0),
                b.proportion_n
            ),
        })
        .chain(std::iter::once(format!(
            "cutoffs I = {{{0}, {0}·2, …}}",
            b.grid_cutoff_step
        )))
        .join("; ")
}

fn extreme_invariance(ctx: &mut Ctx<'_>, axis: Axis) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::Step(ctx.budget.grid_cutoff_step));
    let pops = match axis {
        Axis::Length => length_populations(ctx.budget)?,
        Axis::Proportion => proportion_populations(ctx.budget)?,
    };
    let req = Requirement::Equal {
        tolerance: EPS,
        relative: false,
    };
    let mut out = Outcome::default();
    out.searched.push(grid_searched(ctx.budget, &[axis]));
    let mut iter = pops.into_iter();
    let Some(first_pop) = iter.next() else {
        return Ok(out);
    };
    let reference = extremes(ctx, first_pop, &cfg)?;
    for pop in iter {
        let other = extremes(ctx, pop, &cfg)?;
        for (label, a, b, va, vb) in [
            (
                "v_first",
                &reference.first,
                &other.first,
                reference.v_first,
                other.v_first,
            ),
            (
                "v_last",
                &reference.last,
                &other.last,
                reference.v_last,
                other.v_last,
            ),
        ] {
            if va.is_none() || vb.is_none() {
                ctx.undefined_skipped += 1;
                continue;
            }
            if !req.holds(&[va, vb]) {
                out.counterexample = Some(ctx.counterexample(
                    &cfg,
                    format!(
                        "{} versus {}",
                        describe(&reference.set, "uniform"),
                        describe(&other.set, "uniform")
                    ),
                    req,
                    vec![
                        (
                            format!(
                                "{label}(n = {}, |G1| = {})",
                                a.len(),
                                a.count(Group::Protected)
                            ),
                            Term::Score(a.clone()),
                        ),
                        (
                            format!(
                                "{label}(n = {}, |G1| = {})",
                                b.len(),
                                b.count(Group::Protected)
                            ),
                            Term::Score(b.clone()),
                        ),
                    ],
                    vec![va, vb],
                ));
                return Ok(out);
            }
        }
    }
    Ok(out)
}

fn grid_extremes(ctx: &mut Ctx<'_>, cfg: &MetricConfig) -> Result<Vec<Extremes>> {
    let mut pops = length_populations(ctx.budget)?;
    pops.extend(proportion_populations(ctx.budget)?);
    pops.into_iter().map(|p| extremes(ctx, p, cfg)).collect()
}

fn distinguishability(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::Step(ctx.budget.grid_cutoff_step));
    let req = Requirement::Distinguishes {
        v_opt: ctx.metric.v_opt(),
    };
    let mut out = Outcome::default();
    out.searched
        .push(grid_searched(ctx.budget, &[Axis::Length, Axis::Proportion]));
    for e in grid_extremes(ctx, &cfg)? {
        if !req.holds(&[e.v_last, e.v_first]) {
            out.counterexample = Some(ctx.counterexample(
                &cfg,
                describe(&e.set, "uniform"),
                req,
                vec![
                    ("v_last".into(), Term::Score(e.last)),
                    ("v_first".into(), Term::Score(e.first)),
                ],
                vec![e.v_last, e.v_first],
            ));
            return Ok(out);
        }
    }
    Ok(out)
}

fn symmetric_penalties(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.config(Cutoffs::Step(ctx.budget.grid_cutoff_step));
    let req = Requirement::Symmetric {
        v_opt: ctx.metric.v_opt(),
        tolerance: SYMMETRY_TOLERANCE,
    };
    let mut out = Outcome::default();
    out.searched
        .push(grid_searched(ctx.budget, &[Axis::Length, Axis::Proportion]));
    for e in grid_extremes(ctx, &cfg)? {
        if !req.holds(&[e.v_first, e.v_last]) {
            out.counterexample = Some(ctx.counterexample(
                &cfg,
                describe(&e.set, "uniform"),
                req,
                vec![
                    ("v_first".into(), Term::Score(e.first)),
                    ("v_last".into(), Term::Score(e.last)),
                ],
                vec![e.v_first, e.v_last],
            ));
            return Ok(out);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Setting 2

struct DnComparison {
    n: usize,
    cfg: MetricConfig,
    first: Ranking,
    last: Ranking,
    v_first: Option<f64>,
    v_last: Option<f64>,
}

fn dn_comparisons(ctx: &mut Ctx<'_>, p: f64) -> Result<(Arc<Population>, Vec<DnComparison>)> {
    let max_n = ctx.budget.threshold_max_n;
    let pop = PopulationSpec::uniform(dn_population_size(p, max_n), p).build()?;
    let mut out = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let cfg = ctx.config(Cutoffs::Explicit(vec![n]));
        let (dn, dn_prime) = make_dn_pair(&pop, n)?;
        let first = make_first(&dn);
        let last = make_last(&dn_prime);
        let v_first = ctx.score(&ctx.metric.prepare(&dn, &cfg)?, &first)?;
        let v_last = ctx.score(&ctx.metric.prepare(&dn_prime, &cfg)?, &last)?;
        out.push(DnComparison {
            n,
            cfg,
            first,
            last,
            v_first,
            v_last,
        });
    }
    Ok((pop, out))
}

fn dn_counterexample(
    ctx: &Ctx<'_>,
    pop: &Population,
    c: DnComparison,
    req: Requirement,
) -> Counterexample {
    ctx.counterexample(
        &c.cfg,
        format!(
            "population of {} (|G0| = {}, |G1| = {}, uniform relevance), N = {}, I = {{{}}}",
            pop.len(),
            pop.nonprotected_count(),
            pop.protected_count(),
            c.n,
            c.n
        ),
        req,
        vec![
            (format!("m(first(D_{}))", c.n), Term::Score(c.first)),
            (format!("m(last(D′_{}))", c.n), Term::Score(c.last)),
        ],
        vec![c.v_first, c.v_last],
    )
}

fn threshold_searched(b: &SearchBudget) -> String {
    format!(
        "N = 1..{} with I = {{N}} on uniform populations with p_G1 ∈ {:?}",
        b.threshold_max_n, b.threshold_populations
    )
}

fn closeness(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let req = Requirement::Decreases;
    let mut out = Outcome::default();
    out.searched.push(threshold_searched(ctx.budget));
    let mut holds_through = usize::MAX;
    for &p in &ctx.budget.threshold_populations.clone() {
        let (pop, comps) = dn_comparisons(ctx, p)?;
        let upto = comps
            .iter()
            .take_while(|c| req.holds(&[c.v_first, c.v_last]))
            .count();
        if upto == 0 {
            let c = comps.into_iter().next().expect("N = 1 is always compared");
            out.counterexample = Some(dn_counterexample(ctx, &pop, c, req));
            return Ok(out);
        }
        holds_through = holds_through.min(upto);
    }
    out.threshold = Some(1);
    out.notes.push(format!(
        "m(first(D_N)) > m(last(D′_N)) for every N ≤ {holds_through} on every population searched"
    ));
    Ok(out)
}

fn deepness_threshold(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let req = Requirement::Increases;
    let max_n = ctx.budget.threshold_max_n;
    let mut out = Outcome::default();
    out.searched.push(threshold_searched(ctx.budget));
    let mut threshold = 1;
    for &p in &ctx.budget.threshold_populations.clone() {
        let (pop, comps) = dn_comparisons(ctx, p)?;
        let from = comps
            .iter()
            .rposition(|c| !req.holds(&[c.v_first, c.v_last]))
            .map_or(1, |i| i + 2);
        if from > max_n {
            let c = comps.into_iter().last().expect("at least one N compared");
            out.counterexample = Some(dn_counterexample(ctx, &pop, c, req));
            out.notes
                .push(format!("no threshold N′ ≤ {max_n} at p_G1 = {p}"));
            return Ok(out);
        }
        threshold = threshold.max(from);
    }
    out.threshold = Some(threshold);
    out.notes.push(format!(
        "m(first(D_N)) < m(last(D′_N)) for every N in {threshold}..={max_n} on every population searched"
    ));
    Ok(out)
}

/// (cfg, r, id of the appended candidate, description)
fn pinned_sensitivity_instances(
    ctx: &Ctx<'_>,
) -> Result<Vec<(MetricConfig, Ranking, String, String)>> {
    let mut out = Vec::new();
    // p_groups = (0.75, 0.25): r = ⟨g0, g1⟩, then append a g0.
    let pop = uniform_population(3, 1)?;
    let g0 = lowest_of(&pop, Group::NonProtected, 2);
    let g1 = lowest_of(&pop, Group::Protected, 1);
    let r = Ranking::from_indices(Arc::clone(&pop), vec![g0[0], g1[0]])?;
    let d = pop.candidate(g0[1]).id.clone();
    out.push((
        ctx.config(Cutoffs::EveryRank),
        r,
        d,
        "population of 4 (|G0| = 3, |G1| = 1, uniform relevance)".to_string(),
    ));
    // p_G1 = 0.8, I = {2}: last(D′_2), then append the remaining g0.
    let pop = PopulationSpec::uniform(15, 0.8).build()?;
    let (_, dn_prime) = make_dn_pair(&pop, 2)?;
    let r = make_last(&dn_prime);
    let spare = (0..pop.len())
        .find(|&i| pop.candidate(i).group == Group::NonProtected && !dn_prime.contains(i))
        .ok_or_else(|| Error::Capacity("no spare non-protected candidate".into()))?;
    let d = pop.candidate(spare).id.clone();
    out.push((
        ctx.config(Cutoffs::Explicit(vec![2])),
        r,
        d,
        "population of 15 (|G0| = 3, |G1| = 12, uniform relevance), last(D′_2), I = {2}"
            .to_string(),
    ));
    Ok(out)
}

fn sensitivity(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let req = Requirement::Decreases;
    let b = ctx.budget;
    let mut out = Outcome::default();
    out.searched.push(format!(
        "pinned instances p_groups = (0.75, 0.25) and p_G1 = 0.8 with I = {{2}}; every group pattern of \
         candidate sets with both groups, |D| ≤ {} and a spare non-protected candidate, cutoffs at every rank",
        b.subset_max_n
    ));
    let mut cases = pinned_sensitivity_instances(ctx)?;
    let cfg = ctx.config(Cutoffs::EveryRank);
    for n_pop in 3..=b.subset_max_n + 2 {
        for n1 in 1..n_pop - 1 {
            let n0 = n_pop - n1;
            let pop = uniform_population(n0, n1)?;
            for (c0, c1) in (1..n0).cartesian_product(1..=n1) {
                if c0 + c1 > b.subset_max_n {
                    continue;
                }
                let g0 = lowest_of(&pop, Group::NonProtected, c0 + 1);
                let members = lowest_of(&pop, Group::Protected, c1)
                    .into_iter()
                    .chain(g0[..c0].iter().copied())
                    .collect();
                let set = CandidateSet::from_indices(Arc::clone(&pop), members)?;
                let d = pop.candidate(g0[c0]).id.clone();
                let description = describe(&set, "uniform");
                for r in pattern_rankings(&set) {
                    cases.push((cfg.clone(), r, d.clone(), description.clone()));
                }
            }
        }
    }
    for (cfg, r, d, description) in cases {
        let appended = r.append(&d)?;
        let before = ctx.metric.prepare(&r.candidate_set(), &cfg)?;
        let after = ctx.metric.prepare(&appended.candidate_set(), &cfg)?;
        let (Some(v), Some(va)) = (ctx.score(&before, &r)?, ctx.score(&after, &appended)?) else {
            ctx.undefined_skipped += 1;
            continue;
        };
        let values = [Some(v), Some(va)];
        if !req.holds(&values) {
            out.counterexample = Some(ctx.counterexample(
                &cfg,
                format!("{description}; r = {r}, appended {d}"),
                req,
                vec![
                    ("m(r)".into(), Term::Score(r)),
                    ("m(r′)".into(), Term::Score(appended)),
                ],
                values.to_vec(),
            ));
            return Ok(out);
        }
    }
    Ok(out)
}
