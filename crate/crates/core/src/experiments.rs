//! Parameter sweeps emitted as plot-ready CSV, and run-file ingestion.
//!
//! Every sweep returns its rows sorted by grid coordinates, so output is
//! byte-identical across runs regardless of how grid points were scheduled.
//! The CSV header is
//!
//! ```text
//! experiment,metric,n,p,N,a,c,ranking_kind,query,value
//! ```
//!
//! with unused columns left empty and `value` either the shortest decimal
//! that round-trips or the literal `undefined`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::generators::{dn_population_size, make_dn_pair, make_first, make_last, PopulationSpec};
use crate::metrics::{Cutoffs, Metric, MetricConfig, Setting};
use crate::ranking::{Candidate, CandidateSet, Group, Population, Ranking};

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "metric",
    "n",
    "p",
    "N",
    "a",
    "c",
    "ranking_kind",
    "query",
    "value",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Length,
    Proportion,
    Closeness,
    Translation,
    Rescaling,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Length,
        Experiment::Proportion,
        Experiment::Closeness,
        Experiment::Translation,
        Experiment::Rescaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Length => "length",
            Experiment::Proportion => "proportion",
            Experiment::Closeness => "closeness",
            Experiment::Translation => "translation",
            Experiment::Rescaling => "rescaling",
        }
    }

    /// Whether the sweep reads a run file rather than synthesizing populations.
    pub fn needs_run(self) -> bool {
        matches!(self, Experiment::Translation | Experiment::Rescaling)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown sweep {s:?}; expected length, proportion, closeness, translation or rescaling")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingKind {
    First,
    Last,
}

impl fmt::Display for RankingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankingKind::First => "first",
            RankingKind::Last => "last",
        })
    }
}

/// One grid point × metric. `None` fields are empty CSV cells; a `None`
/// value is an undefined metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub experiment: Experiment,
    pub metric: Metric,
    pub n: Option<usize>,
    pub p: Option<f64>,
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub ranking_kind: Option<RankingKind>,
    pub query: Option<String>,
    #[serde(serialize_with = "serialize_value")]
    pub value: Option<f64>,
}

fn serialize_value<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("undefined"),
    }
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn cmp_opt_f64(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

impl ExperimentRow {
    fn new(experiment: Experiment, metric: Metric) -> Self {
        ExperimentRow {
            experiment,
            metric,
            n: None,
            p: None,
            big_n: None,
            a: None,
            c: None,
            ranking_kind: None,
            query: None,
            value: None,
        }
    }

    /// The row as CSV fields, in [`CSV_HEADER`] order.
    pub fn fields(&self) -> [String; 10] {
        [
            self.experiment.to_string(),
            self.metric.to_string(),
            cell(&self.n),
            cell(&self.p),
            cell(&self.big_n),
            cell(&self.a),
            cell(&self.c),
            cell(&self.ranking_kind),
            cell(&self.query),
            self.value
                .map_or_else(|| "undefined".to_string(), |v| v.to_string()),
        ]
    }

    /// Grid-coordinate order used for output.
    pub fn grid_cmp(&self, other: &Self) -> Ordering {
        self.experiment
            .cmp(&other.experiment)
            .then_with(|| self.query.cmp(&other.query))
            .then_with(|| cmp_opt_f64(self.a, other.a))
            .then_with(|| cmp_opt_f64(self.c, other.c))
            .then_with(|| self.n.cmp(&other.n))
            .then_with(|| cmp_opt_f64(self.p, other.p))
            .then_with(|| self.big_n.cmp(&other.big_n))
            .then_with(|| metric_rank(self.metric).cmp(&metric_rank(other.metric)))
            .then_with(|| self.ranking_kind.cmp(&other.ranking_kind))
    }
}

fn metric_rank(m: Metric) -> usize {
    Metric::ALL
        .iter()
        .position(|&x| x == m)
        .expect("listed metric")
}

fn sorted(mut rows: Vec<ExperimentRow>) -> Vec<ExperimentRow> {
    rows.sort_by(ExperimentRow::grid_cmp);
    rows
}

pub fn write_csv<W: io::Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ExperimentRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// JSON mirror of the CSV: an array of row objects.
pub fn write_json<W: io::Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Synthetic sweeps

/// v_first and v_last over a list of (n, p) populations with uniform relevance.
fn extremes_sweep(
    experiment: Experiment,
    points: Vec<(usize, f64)>,
    metrics: &[Metric],
    cfg: &MetricConfig,
) -> Result<Vec<ExperimentRow>> {
    let rows = points
        .into_par_iter()
        .map(|(n, p)| -> Result<Vec<ExperimentRow>> {
            let set = CandidateSet::full(PopulationSpec::uniform(n, p).build()?);
            let mut out = Vec::new();
            for (kind, r) in [
                (RankingKind::First, make_first(&set)),
                (RankingKind::Last, make_last(&set)),
            ] {
                for &m in metrics
                    .iter()
                    .filter(|m| m.applies_to(Setting::FullPopulation))
                {
                    out.push(ExperimentRow {
                        n: Some(n),
                        p: Some(p),
                        ranking_kind: Some(kind),
                        value: m.try_evaluate(&r, cfg)?,
                        ..ExperimentRow::new(experiment, m)
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sorted(rows.into_iter().flatten().collect()))
}

/// Extreme rankings of growing populations at a fixed protected share.
#[derive(Debug, Clone)]
pub struct LengthSweep {
    pub lengths: Vec<usize>,
    pub p: f64,
    pub metrics: Vec<Metric>,
    pub config: MetricConfig,
}

impl Default for LengthSweep {
    fn default() -> Self {
        LengthSweep {
            lengths: (20..=500).step_by(10).collect(),
            p: 0.3,
            metrics: Metric::ALL.to_vec(),
            config: MetricConfig::default().with_cutoffs(Cutoffs::Step(10)),
        }
    }
}

pub fn run_length_sweep(sweep: &LengthSweep) -> Result<Vec<ExperimentRow>> {
    let points = sweep.lengths.iter().map(|&n| (n, sweep.p)).collect();
    extremes_sweep(Experiment::Length, points, &sweep.metrics, &sweep.config)
}

/// Extreme rankings of a fixed-size population with a varying protected share.
#[derive(Debug, Clone)]
pub struct ProportionSweep {
    pub n: usize,
    pub proportions: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub config: MetricConfig,
}

impl Default for ProportionSweep {
    fn default() -> Self {
        ProportionSweep {
            n: 100,
            // 0.10, 0.12, …, 0.90 computed from integers so each prints exactly
            proportions: (10..=90).step_by(2).map(|i| i as f64 / 100.0).collect(),
            metrics: Metric::ALL.to_vec(),
            config: MetricConfig::default().with_cutoffs(Cutoffs::Step(10)),
        }
    }
}

pub fn run_proportion_sweep(sweep: &ProportionSweep) -> Result<Vec<ExperimentRow>> {
    let points = sweep.proportions.iter().map(|&p| (sweep.n, p)).collect();
    extremes_sweep(
        Experiment::Proportion,
        points,
        &sweep.metrics,
        &sweep.config,
    )
}

/// m(first(D_N)) against m(last(D_N′)) for growing N, with I = {N}.
///
/// PSP is skipped: D_N is a strict subset of the population.
#[derive(Debug, Clone)]
pub struct ClosenessSweep {
    pub sizes: Vec<usize>,
    /// Protected share for every metric except AWRF.
    pub p: f64,
    pub p_awrf: f64,
    pub metrics: Vec<Metric>,
    /// Supplies the log base and normalizer; cutoffs are always {N}.
    pub config: MetricConfig,
}

impl Default for ClosenessSweep {
    fn default() -> Self {
        ClosenessSweep {
            sizes: (1..=50).collect(),
            p: 0.3,
            p_awrf: 0.1,
            metrics: Metric::ALL.to_vec(),
            config: MetricConfig::default(),
        }
    }
}

pub fn run_closeness_sweep(sweep: &ClosenessSweep) -> Result<Vec<ExperimentRow>> {
    let max_n = sweep.sizes.iter().copied().max().unwrap_or(1);
    let build = |p: f64| PopulationSpec::uniform(dn_population_size(p, max_n), p).build();
    let pops = [
        (sweep.p, build(sweep.p)?),
        (sweep.p_awrf, build(sweep.p_awrf)?),
    ];
    let metrics: Vec<Metric> = sweep
        .metrics
        .iter()
        .copied()
        .filter(|m| m.applies_to(Setting::SubsetOfPopulation))
        .collect();
    let rows = sweep
        .sizes
        .par_iter()
        .map(|&big_n| -> Result<Vec<ExperimentRow>> {
            let cfg = sweep
                .config
                .clone()
                .with_cutoffs(Cutoffs::Explicit(vec![big_n]));
            let mut out = Vec::new();
            for &m in &metrics {
                let (p, pop) = if m == Metric::AWRF {
                    &pops[1]
                } else {
                    &pops[0]
                };
                let (dn, dn_prime) = make_dn_pair(pop, big_n)?;
                for (kind, r) in [
                    (RankingKind::First, make_first(&dn)),
                    (RankingKind::Last, make_last(&dn_prime)),
                ] {
                    out.push(ExperimentRow {
                        n: Some(2 * big_n),
                        p: Some(*p),
                        big_n: Some(big_n),
                        ranking_kind: Some(kind),
                        value: m.try_evaluate(&r, &cfg)?,
                        ..ExperimentRow::new(Experiment::Closeness, m)
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sorted(rows.into_iter().flatten().collect()))
}

// ---------------------------------------------------------------------------
// Run files and the affine-relevance sweeps

/// Relevance-aware metrics whose affine behaviour the run sweeps probe.
pub const AFFINE_METRICS: [Metric; 4] = [Metric::DTD, Metric::DTR, Metric::DID, Metric::DIR];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub query_id: String,
    pub candidate_id: String,
    pub group: Group,
    pub relevance: f64,
}

/// Relevance-scored candidates for one or more queries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub records: Vec<RunRecord>,
}

pub fn load_run_file(path: impl AsRef<Path>) -> Result<RunFile> {
    let file = std::fs::File::open(path)?;
    RunFile::from_reader(file)
}

impl RunFile {
    /// Parse `query_id,candidate_id,group,relevance` CSV with a header row.
    pub fn from_reader<R: io::Read>(input: R) -> Result<RunFile> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = rdr.headers().map_err(|e| parse_error(1, &e))?.clone();
        let expected = ["query_id", "candidate_id", "group", "relevance"];
        if header.iter().ne(expected) {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header {}, found {}",
                    expected.join(","),
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for result in rdr.records() {
            let rec = result.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_error(line, &e)
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let invalid = |reason: String| Error::Validation { line, reason };
            let group = match &rec[2] {
                "0" => Group::NonProtected,
                "1" => Group::Protected,
                other => return Err(invalid(format!("group must be 0 or 1, found {other:?}"))),
            };
            let relevance: f64 = rec[3].parse().map_err(|_| Error::Parse {
                line,
                message: format!("relevance {:?} is not a number", &rec[3]),
            })?;
            if !relevance.is_finite() {
                return Err(invalid(format!("relevance {:?} is not finite", &rec[3])));
            }
            if rec[0].is_empty() || rec[1].is_empty() {
                return Err(invalid("query_id and candidate_id must be nonempty".into()));
            }
            if !seen.insert((rec[0].to_string(), rec[1].to_string())) {
                return Err(invalid(format!(
                    "duplicate candidate {:?} for query {:?}",
                    &rec[1], &rec[0]
                )));
            }
            records.push(RunRecord {
                query_id: rec[0].to_string(),
                candidate_id: rec[1].to_string(),
                group,
                relevance,
            });
        }
        Ok(RunFile { records })
    }

    /// Distinct query ids in ascending order.
    pub fn queries(&self) -> Vec<String> {
        let ids: BTreeSet<&str> = self.records.iter().map(|r| r.query_id.as_str()).collect();
        ids.into_iter().map(str::to_string).collect()
    }

    /// The population of one query's candidates, in file order.
    pub fn population(&self, query: &str) -> Result<Arc<Population>> {
        let candidates: Vec<Candidate> = self
            .records
            .iter()
            .filter(|r| r.query_id == query)
            .map(|r| Candidate::new(r.candidate_id.clone(), r.group, r.relevance))
            .collect();
        if candidates.is_empty() {
            return Err(Error::InvalidPopulation(format!(
                "no candidates for query {query:?}"
            )));
        }
        Population::new(candidates)
            .map(Population::into_shared)
            .map_err(|e| Error::InvalidPopulation(format!("query {query:?}: {e}")))
    }

    /// The query's ranking by relevance, as [`ranking_by_relevance`].
    pub fn ranking(&self, query: &str) -> Result<Ranking> {
        Ok(ranking_by_relevance(&self.population(query)?))
    }
}

fn parse_error(line: u64, e: &csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// All candidates by descending relevance, ties broken by ascending id.
pub fn ranking_by_relevance(pop: &Arc<Population>) -> Ranking {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (pop.candidate(a), pop.candidate(b));
        y.relevance
            .total_cmp(&x.relevance)
            .then_with(|| x.id.cmp(&y.id))
    });
    Ranking::from_indices(Arc::clone(pop), order).expect("a permutation of the population")
}

/// Re-rank each query under y -> a·y + c and evaluate the relevance-aware metrics.
#[derive(Debug, Clone)]
pub struct AffineSweep {
    /// Queries to evaluate; empty means every query in the run.
    pub queries: Vec<String>,
    /// (a, c) grid points.
    pub transforms: Vec<(f64, f64)>,
    pub metrics: Vec<Metric>,
    pub config: MetricConfig,
}

impl AffineSweep {
    /// Shifts from −0.09 to 5: −0.09, 0, then steps of 0.25.
    pub fn translation() -> Self {
        let shifts = [-0.09, 0.0]
            .into_iter()
            .chain((1..=20).map(|i| i as f64 * 0.25));
        AffineSweep {
            queries: Vec::new(),
            transforms: shifts.map(|c| (1.0, c)).collect(),
            metrics: AFFINE_METRICS.to_vec(),
            config: MetricConfig::default(),
        }
    }

    pub fn rescaling() -> Self {
        AffineSweep {
            queries: Vec::new(),
            transforms: [0.5, 1.0, 2.0, 5.0, 10.0].map(|a| (a, 0.0)).to_vec(),
            metrics: AFFINE_METRICS.to_vec(),
            config: MetricConfig::default(),
        }
    }

    pub fn with_queries(mut self, queries: Vec<String>) -> Self {
        self.queries = queries;
        self
    }
}

fn run_affine(
    experiment: Experiment,
    run: &RunFile,
    sweep: &AffineSweep,
) -> Result<Vec<ExperimentRow>> {
    let queries = if sweep.queries.is_empty() {
        run.queries()
    } else {
        sweep.queries.clone()
    };
    let pops = queries
        .iter()
        .map(|q| Ok((q.clone(), run.population(q)?)))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<_> = pops
        .iter()
        .flat_map(|qp| sweep.transforms.iter().map(move |&t| (qp, t)))
        .collect();
    let rows = points
        .into_par_iter()
        .map(|((query, pop), (a, c))| -> Result<Vec<ExperimentRow>> {
            let shifted = pop.affine(a, c)?.into_shared();
            let r = ranking_by_relevance(&shifted);
            sweep
                .metrics
                .iter()
                .map(|&m| {
                    Ok(ExperimentRow {
                        n: Some(shifted.len()),
                        a: Some(a),
                        c: Some(c),
                        query: Some(query.clone()),
                        value: m.try_evaluate(&r, &sweep.config)?,
                        ..ExperimentRow::new(experiment, m)
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sorted(rows.into_iter().flatten().collect()))
}

pub fn run_translation_sweep(run: &RunFile, sweep: &AffineSweep) -> Result<Vec<ExperimentRow>> {
    run_affine(Experiment::Translation, run, sweep)
}

pub fn run_rescaling_sweep(run: &RunFile, sweep: &AffineSweep) -> Result<Vec<ExperimentRow>> {
    run_affine(Experiment::Rescaling, run, sweep)
}
