//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed even when
//! earlier criteria fail; the process exits nonzero if any criterion fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankfair::experiments::{
    run_closeness_sweep, run_length_sweep, run_proportion_sweep, run_rescaling_sweep,
    run_translation_sweep, to_csv_string, AffineSweep, ClosenessSweep, ExperimentRow, LengthSweep,
    ProportionSweep, RankingKind, RunFile,
};
use rankfair::generators::{
    make_dn_pair, make_first, make_last, population_from_groups, sample_ranking,
    uniform_population, PopulationSpec,
};
use rankfair::metrics::{position_bias, prefix_normalizer};
use rankfair::oracle::{brute_force_normalizer, exact_expectation};
use rankfair::properties::{check_property, satisfaction_table, PropertyId, SearchBudget, Status};
use rankfair::{
    CandidateSet, Cutoffs, Error, Group, Metric, MetricConfig, Normalizer, Ranking, Result,
};

// Tolerances, pinned.
const GOLDEN_RUNTIME_LIMIT: Duration = Duration::from_secs(300);
const ER_EXPECTATION_TARGET: f64 = 1.11;
const ER_EXPECTATION_TOL: f64 = 0.005;
const ZERO_MEAN_TOL: f64 = 1e-12;
const AWRF_THREE_DECIMALS: f64 = 0.0005;
const DEEPNESS_REL_TOL: f64 = 0.05;
const RESCALING_REL_TOL: f64 = 1e-9;
const LENGTH_SWEEP_MIN_SHARE: f64 = 0.95;
const AWRF_CROSSING_TOL: f64 = 1e-9;
const PROPORTION_GRID_STEP: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

/// `": a; b"`, or nothing when there is nothing to list.
fn listing(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!(": {}", items.join("; "))
    }
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs())
}

fn golden_table() -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool");
    let started = Instant::now();
    let table =
        pool.install(|| satisfaction_table(&SearchBudget::default(), &MetricConfig::default()));
    let elapsed = started.elapsed();
    let mismatches = table.mismatches();
    let mut detail = format!(
        "{}/{} cells match, {:.1?} single-threaded",
        table.cells.len() - mismatches.len(),
        table.cells.len(),
        elapsed
    );
    for m in &mismatches {
        detail += &format!(
            "; {} {} expected {} got {}",
            m.metric,
            m.property,
            m.expected.glyph(),
            m.got.glyph()
        );
    }
    outcome(
        mismatches.is_empty() && table.cells.len() == 143 && elapsed < GOLDEN_RUNTIME_LIMIT,
        detail,
    )
}

fn psp_extremes() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    for _ in 0..50 {
        let n = rng.gen_range(2..=200);
        let p = rng.gen_range(0.05..=0.95);
        let set = CandidateSet::full(PopulationSpec::uniform(n, p).build()?);
        let cfg = MetricConfig::default();
        let first = Metric::PSP.evaluate(&make_first(&set), &cfg)?;
        let last = Metric::PSP.evaluate(&make_last(&set), &cfg)?;
        if first != 1.0 || last != -1.0 {
            bad.push(format!("n={n} p={p:.3}: {first}, {last}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("50 populations, {} off{}", bad.len(), listing(&bad)),
    )
}

fn er_expectation() -> Result<Outcome> {
    let set = CandidateSet::full(uniform_population(1, 1)?);
    let v = exact_expectation(Metric::ER, &set, &MetricConfig::default())?;
    let b2 = position_bias(2)?;
    let closed = (b2 / 1.0 + 1.0 / b2) / 2.0;
    let pass =
        (v - ER_EXPECTATION_TARGET).abs() <= ER_EXPECTATION_TOL && (v - closed).abs() < 1e-15;
    outcome(pass, format!("E[ER] = {v:.6}, closed form {closed:.6}"))
}

fn zero_mean_oracles() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 2..=7 {
        for n1 in 1..n {
            let set = CandidateSet::full(uniform_population(n - n1, n1)?);
            for m in [Metric::ED, Metric::PSP] {
                worst = worst.max(exact_expectation(m, &set, &MetricConfig::default())?.abs());
                count += 1;
            }
        }
    }
    outcome(
        worst <= ZERO_MEAN_TOL,
        format!("{count} expectations, max |mean| = {worst:e}"),
    )
}

fn awrf_regressions() -> Result<Outcome> {
    let cfg = MetricConfig::default();
    // Sensitivity: |G0| = 3, |G1| = 1; r′ = ⟨g0, g1⟩, r″ appends a g0.
    let pop = uniform_population(3, 1)?;
    let r1 = Ranking::from_ids(Arc::clone(&pop), &["g0-0", "g1-0"])?;
    let r2 = r1.append("g0-1")?;
    let (v1, v2) = (
        Metric::AWRF.evaluate(&r1, &cfg)?,
        Metric::AWRF.evaluate(&r2, &cfg)?,
    );
    let sensitivity =
        (v2 - 0.998).abs() < AWRF_THREE_DECIMALS && (v1 - 0.984).abs() < AWRF_THREE_DECIMALS;

    // Deepness: |G0| = 14, |G1| = 11; r = ⟨g0, g1, g0, g1, g0, g1⟩, swaps at 3 and 5.
    let pop = uniform_population(14, 11)?;
    let ids = ["g0-00", "g1-00", "g0-01", "g1-01", "g0-02", "g1-02"];
    let r = Ranking::from_ids(pop, &ids)?;
    let prepared = Metric::AWRF.prepare(&r.candidate_set(), &cfg)?;
    let base = prepared.score(&r)?;
    let di = (prepared.score(&r.swap(3, 4)?)? - base).abs();
    let dj = (prepared.score(&r.swap(5, 6)?)? - base).abs();
    let deepness = di < dj
        && rel_close(di, 1.51e-5, DEEPNESS_REL_TOL)
        && rel_close(dj, 8.62e-5, DEEPNESS_REL_TOL);
    outcome(
        sensitivity && deepness,
        format!("AWRF(r″) = {v2:.5}, AWRF(r′) = {v1:.5}; |Δ_3| = {di:.4e}, |Δ_5| = {dj:.4e}"),
    )
}

fn rescaling_law() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = MetricConfig::default();
    let mut failures = Vec::new();
    let mut undefined = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=30);
        let n1 = rng.gen_range(1..n);
        let protected = sample(&mut rng, n, n1).into_vec();
        let groups = (0..n).map(|i| {
            if protected.contains(&i) {
                Group::Protected
            } else {
                Group::NonProtected
            }
        });
        // (0, 1]: 1 - [0, 1)
        let relevance: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let pop = population_from_groups(groups, relevance)?;
        let r = sample_ranking(&CandidateSet::full(Arc::clone(&pop)), rng.gen());
        for a in [0.5, 2.0, 10.0] {
            let scaled = r.rebind(pop.affine(a, 0.0)?.into_shared())?;
            for m in [Metric::DTD, Metric::DTR, Metric::DID, Metric::DIR] {
                let (Some(x), Some(y)) =
                    (m.try_evaluate(&r, &cfg)?, m.try_evaluate(&scaled, &cfg)?)
                else {
                    undefined += 1;
                    continue;
                };
                let y = if m == Metric::DTD { y * a } else { y };
                if !rel_close(x, y, RESCALING_REL_TOL) {
                    failures.push(format!("{m} n={n} a={a}: {x} vs {y}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty() && undefined == 0,
        format!(
            "100 instances × 3 scales × 4 metrics, {} failures, {undefined} undefined{}",
            failures.len(),
            listing(&failures)
        ),
    )
}

fn exposure_thresholds() -> Result<Outcome> {
    let budget = SearchBudget::default();
    let cfg = MetricConfig::default();
    let mut parts = Vec::new();
    let mut pass = budget.threshold_max_n >= 64;
    for m in [Metric::ED, Metric::ER] {
        let p11 = check_property(PropertyId::P11, m, &budget, &cfg)?;
        let p12 = check_property(PropertyId::P12, m, &budget, &cfg)?;
        pass &= p11.status == Status::Satisfied && p11.threshold == Some(1);
        pass &= p12.status == Status::Satisfied && p12.threshold.is_some_and(|t| t <= 3);
        parts.push(format!(
            "{m}: P11 N′ = {:?}, P12 N′ = {:?}",
            p11.threshold, p12.threshold
        ));
    }
    outcome(
        pass,
        format!("{} (N up to {})", parts.join(", "), budget.threshold_max_n),
    )
}

fn prefix_counterexamples() -> Result<Outcome> {
    let pop = PopulationSpec::uniform(100, 0.8).build()?;
    let mut failures = Vec::new();
    for m in [Metric::RND, Metric::RRD, Metric::RKL] {
        for big_n in 1..=10 {
            let cfg = MetricConfig::default().with_cutoffs(Cutoffs::Explicit(vec![big_n]));
            let (dn, dn_prime) = make_dn_pair(&pop, big_n)?;
            let first = m.evaluate(&make_first(&dn), &cfg)?;
            let last = make_last(&dn_prime);
            let v_last = m.evaluate(&last, &cfg)?;
            let spare = (0..pop.len())
                .find(|&i| pop.candidate(i).group == Group::NonProtected && !dn_prime.contains(i))
                .expect("population has a spare non-protected candidate");
            let appended = m.evaluate(&last.append(&pop.candidate(spare).id)?, &cfg)?;
            if !(v_last == 0.0 && first > 0.0 && appended == v_last) {
                failures.push(format!(
                    "{m} N={big_n}: first {first:.4}, last {v_last:.4}, appended {appended:.4}"
                ));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} of 30 (metric, N) cases fail{}",
            failures.len(),
            listing(&failures)
        ),
    )
}

fn value(
    rows: &[ExperimentRow],
    metric: Metric,
    kind: RankingKind,
    pick: impl Fn(&ExperimentRow) -> bool,
) -> f64 {
    rows.iter()
        .find(|r| r.metric == metric && r.ranking_kind == Some(kind) && pick(r))
        .and_then(|r| r.value)
        .expect("row present and defined")
}

fn figure_trends(length: &[ExperimentRow], proportion: &[ExperimentRow]) -> Result<Outcome> {
    let lengths = LengthSweep::default().lengths;
    let wins = lengths
        .iter()
        .filter(|&&n| {
            let at = |r: &ExperimentRow| r.n == Some(n);
            value(length, Metric::RND, RankingKind::Last, at)
                > value(length, Metric::RND, RankingKind::First, at)
        })
        .count();
    let share = wins as f64 / lengths.len() as f64;

    let grid = ProportionSweep::default().proportions;
    let diff: Vec<f64> = grid
        .iter()
        .map(|&p| {
            let at = |r: &ExperimentRow| r.p == Some(p);
            value(proportion, Metric::AWRF, RankingKind::First, at)
                - value(proportion, Metric::AWRF, RankingKind::Last, at)
        })
        .collect();
    // Every crossing (an exact tie or a sign change between neighbours) lies within one step of 0.5.
    let mut crossings = Vec::new();
    for (i, d) in diff.iter().enumerate() {
        if d.abs() <= AWRF_CROSSING_TOL {
            crossings.push(grid[i]);
        }
    }
    for i in 1..diff.len() {
        if diff[i - 1].abs() > AWRF_CROSSING_TOL
            && diff[i].abs() > AWRF_CROSSING_TOL
            && diff[i - 1].signum() != diff[i].signum()
        {
            crossings.push((grid[i - 1] + grid[i]) / 2.0);
        }
    }
    let crossing_ok = !crossings.is_empty()
        && crossings
            .iter()
            .all(|p| (p - 0.5).abs() <= PROPORTION_GRID_STEP + 1e-12);

    let ed = |n: usize, kind| value(length, Metric::ED, kind, |r| r.n == Some(n)).abs();
    let shrinks = ed(500, RankingKind::First) < ed(20, RankingKind::First)
        && ed(500, RankingKind::Last) < ed(20, RankingKind::Last);
    outcome(
        share >= LENGTH_SWEEP_MIN_SHARE && crossing_ok && shrinks,
        format!(
            "rND v_last > v_first at {wins}/{}; AWRF crossings at {crossings:?}; |ED| n=20 → 500: first {:.4} → {:.4}, last {:.4} → {:.4}",
            lengths.len(),
            ed(20, RankingKind::First),
            ed(500, RankingKind::First),
            ed(20, RankingKind::Last),
            ed(500, RankingKind::Last)
        ),
    )
}

fn normalizer_equivalence() -> Result<Outcome> {
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for (set, cutoffs) in common::normalizer_instances(10)? {
        for m in [Metric::RND, Metric::RRD, Metric::RKL] {
            let cfg = MetricConfig::default().with_cutoffs(cutoffs.clone());
            let oracle = brute_force_normalizer(m, &set, &cfg)?;
            let heuristic = match prefix_normalizer(
                m,
                &set,
                &cfg.with_normalizer(Normalizer::ExtremeRanking),
            ) {
                Ok(z) => z,
                Err(Error::NormalizerZero { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            compared += 1;
            if heuristic.to_bits() != oracle.to_bits() {
                mismatches.push(format!(
                    "{m} n={} |G1|={} I={cutoffs:?}: {heuristic} vs {oracle}",
                    set.len(),
                    set.count(Group::Protected)
                ));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "ExtremeRanking vs brute force: {} of {compared} differ{}",
            mismatches.len(),
            listing(&mismatches)
        ),
    )
}

fn all_sweeps_csv() -> Result<Vec<String>> {
    let run = RunFile::from_reader(common::SYNTHETIC_RUN.as_bytes())?;
    Ok(vec![
        to_csv_string(&run_length_sweep(&LengthSweep::default())?),
        to_csv_string(&run_proportion_sweep(&ProportionSweep::default())?),
        to_csv_string(&run_closeness_sweep(&ClosenessSweep::default())?),
        to_csv_string(&run_translation_sweep(&run, &AffineSweep::translation())?),
        to_csv_string(&run_rescaling_sweep(&run, &AffineSweep::rescaling())?),
    ])
}

fn determinism(first_sweeps: &[String]) -> Result<Outcome> {
    let second = all_sweeps_csv()?;
    let sweeps_same = first_sweeps == second.as_slice();
    let budget = SearchBudget::default();
    let cfg = MetricConfig::default();
    let a = satisfaction_table(&budget, &cfg);
    let b = satisfaction_table(&budget, &cfg);
    let table_same = a.render() == b.render() && a.to_json()? == b.to_json()?;
    outcome(
        sweeps_same && table_same,
        format!(
            "5 sweeps ({} bytes) identical: {sweeps_same}; golden table grid and JSON identical: {table_same}",
            second.iter().map(String::len).sum::<usize>()
        ),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;

fn main() {
    // Sweeps are shared by criteria 9 and 11.
    let sweeps = all_sweeps_csv().expect("sweeps run");
    let length = run_length_sweep(&LengthSweep::default()).expect("length sweep");
    let proportion = run_proportion_sweep(&ProportionSweep::default()).expect("proportion sweep");

    let criteria: Vec<(&str, Criterion)> = vec![
        ("golden satisfaction table", Box::new(golden_table)),
        ("PSP extremes", Box::new(psp_extremes)),
        ("ER expectation", Box::new(er_expectation)),
        ("zero-mean oracles", Box::new(zero_mean_oracles)),
        ("AWRF regression pair", Box::new(awrf_regressions)),
        ("rescaling law", Box::new(rescaling_law)),
        ("exposure thresholds", Box::new(exposure_thresholds)),
        (
            "prefix-metric counterexamples",
            Box::new(prefix_counterexamples),
        ),
        (
            "sweep trends",
            Box::new(|| figure_trends(&length, &proportion)),
        ),
        (
            "normalizer oracle equivalence",
            Box::new(normalizer_equivalence),
        ),
        ("determinism", Box::new(|| determinism(&sweeps))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
