//! Axiomatic property checkers.
//!
//! Each property quantifies over an infinite family of populations and
//! rankings, so a checker can only falsify. It searches a finite family
//! described by a [`SearchBudget`] and reports `Violated` with a replayable
//! counterexample, or `Satisfied` when nothing within the budget breaks the
//! property.

mod checks;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::generators::RankingSampler;
use crate::metrics::{Metric, MetricConfig};
use crate::oracle::{exact_expectation, CompensatedSum};
use crate::ranking::{CandidateSet, Group, Ranking};

pub use table::{
    golden_symbol, satisfaction_table, table_for, Mismatch, SatisfactionTable, Symbol, TableCell,
};

/// Absolute tolerance for equalities; strict inequalities need a margin above it.
pub const EPS: f64 = 1e-12;
/// Tolerance of the additive and multiplicative symmetry criteria.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Relative tolerance for invariance under relevance transforms.
pub const TRANSFORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PropertyId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
    P11,
    P12,
    P13,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PropertyTag {
    Universal,
    Setting1,
    Setting2,
}

impl PropertyId {
    pub const ALL: [PropertyId; 13] = [
        PropertyId::P1,
        PropertyId::P2,
        PropertyId::P3,
        PropertyId::P4,
        PropertyId::P5,
        PropertyId::P6,
        PropertyId::P7,
        PropertyId::P8,
        PropertyId::P9,
        PropertyId::P10,
        PropertyId::P11,
        PropertyId::P12,
        PropertyId::P13,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::P1 => "DistinguishabilityOfGroups",
            PropertyId::P2 => "Boundedness",
            PropertyId::P3 => "Monotonicity",
            PropertyId::P4 => "Deepness",
            PropertyId::P5 => "IntraGroupFairness",
            PropertyId::P6 => "InvarianceToLinearTransform",
            PropertyId::P7 => "OptimalityOfRandomRankings",
            PropertyId::P8 => "InvarianceToRankingLength",
            PropertyId::P9 => "InvarianceToGroupProportions",
            PropertyId::P10 => "SymmetricPenalties",
            PropertyId::P11 => "ClosenessThreshold",
            PropertyId::P12 => "DeepnessThreshold",
            PropertyId::P13 => "Sensitivity",
        }
    }

    pub fn tag(self) -> PropertyTag {
        match self.number() {
            1..=6 => PropertyTag::Universal,
            7..=10 => PropertyTag::Setting1,
            _ => PropertyTag::Setting2,
        }
    }

    /// Whether the property has any meaning for `metric`.
    pub fn applies_to(self, metric: Metric) -> bool {
        match self {
            PropertyId::P5 | PropertyId::P6 => metric.uses_relevance(),
            PropertyId::P11 | PropertyId::P12 | PropertyId::P13 => metric != Metric::PSP,
            _ => true,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

impl FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        PropertyId::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(t) || p.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| format!("unknown property `{s}` (expected P1..P13)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Satisfied,
    Violated,
    Inapplicable,
}

/// The inequality a list of term values has to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Requirement {
    /// values = [v_last, v_first]; v_last < v_opt < v_first.
    Distinguishes { v_opt: f64 },
    /// values = [v]; v defined and |v| ≤ bound.
    Bounded { bound: f64 },
    /// values = [before, after]; after > before.
    Increases,
    /// values = [before, after]; after < before.
    Decreases,
    /// values = [m(r), m(r_{i↔i+1}), m(r_{j↔j+1})]; the shallower swap moves m more.
    ShallowerSwapLarger,
    /// values = [a, b]; |a − b| ≤ tolerance (relative to max(1, |a|) when `relative`).
    Equal { tolerance: f64, relative: bool },
    /// values = [v]; |v − target| ≤ tolerance.
    Near { target: f64, tolerance: f64 },
    /// values = [v_first, v_last]; equidistant from v_opt additively or multiplicatively.
    Symmetric { v_opt: f64, tolerance: f64 },
}

impl Requirement {
    /// Whether the values satisfy the requirement. Undefined values only
    /// satisfy nothing.
    pub fn holds(&self, values: &[Option<f64>]) -> bool {
        let Some(v) = values.iter().copied().collect::<Option<Vec<f64>>>() else {
            return false;
        };
        match *self {
            Requirement::Distinguishes { v_opt } => v_opt - v[0] > EPS && v[1] - v_opt > EPS,
            Requirement::Bounded { bound } => v[0].abs() <= bound,
            Requirement::Increases => v[1] - v[0] > EPS,
            Requirement::Decreases => v[0] - v[1] > EPS,
            Requirement::ShallowerSwapLarger => (v[0] - v[1]).abs() - (v[0] - v[2]).abs() > EPS,
            Requirement::Equal {
                tolerance,
                relative,
            } => {
                let scale = if relative { v[0].abs().max(1.0) } else { 1.0 };
                (v[0] - v[1]).abs() <= tolerance * scale
            }
            Requirement::Near { target, tolerance } => (v[0] - target).abs() <= tolerance,
            Requirement::Symmetric { v_opt, tolerance } => {
                let additive = ((v[0] - v_opt).abs() - (v_opt - v[1]).abs()).abs() <= tolerance;
                let multiplicative =
                    v_opt != 0.0 && v[1] != 0.0 && (v[0] / v_opt - v_opt / v[1]).abs() <= tolerance;
                additive || multiplicative
            }
        }
    }

    fn render(&self, labels: &[String], values: &[Option<f64>]) -> String {
        let t = |i: usize| {
            let v = values[i].map_or_else(|| "undefined".to_string(), |x| format!("{x}"));
            format!("{} = {v}", labels[i])
        };
        match *self {
            Requirement::Distinguishes { v_opt } => format!("{} < {v_opt} < {}", t(0), t(1)),
            Requirement::Bounded { bound } => {
                format!("{} must be defined with |·| ≤ {bound}", t(0))
            }
            Requirement::Increases => format!("{} > {}", t(1), t(0)),
            Requirement::Decreases => format!("{} < {}", t(1), t(0)),
            Requirement::ShallowerSwapLarger => format!(
                "|{l0} − {l1}| > |{l0} − {l2}| with {} , {} , {}",
                t(0),
                t(1),
                t(2),
                l0 = labels[0],
                l1 = labels[1],
                l2 = labels[2]
            ),
            Requirement::Equal { tolerance, .. } => format!("{} = {} (±{tolerance})", t(0), t(1)),
            Requirement::Near { target, tolerance } => {
                format!("{} = {target} (±{tolerance:e})", t(0))
            }
            Requirement::Symmetric { v_opt, .. } => format!(
                "|{} − {v_opt}| = |{v_opt} − {}| or {}/{v_opt} = {v_opt}/{}",
                t(0),
                t(1),
                labels[0],
                labels[1]
            ),
        }
    }
}

/// One quantity inside a counterexample.
#[derive(Debug, Clone)]
pub enum Term {
    /// m(r).
    Score(Ranking),
    /// v_E(m, D) by enumeration.
    Expectation(CandidateSet),
    /// Seeded Monte Carlo estimate of v_E(m, D).
    MonteCarlo {
        set: CandidateSet,
        samples: usize,
        seed: u64,
    },
}

impl Term {
    pub fn evaluate(&self, metric: Metric, cfg: &MetricConfig) -> Result<Option<f64>> {
        let value = match self {
            Term::Score(r) => metric.evaluate(r, cfg),
            Term::Expectation(set) => exact_expectation(metric, set, cfg),
            Term::MonteCarlo { set, samples, seed } => {
                monte_carlo(metric, set, cfg, *samples, *seed).map(|(mean, _)| mean)
            }
        };
        match value {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.is_undefined_metric() => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Mean and standard error of `metric` over `samples` seeded uniform rankings.
pub(crate) fn monte_carlo(
    metric: Metric,
    set: &CandidateSet,
    cfg: &MetricConfig,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let prepared = metric.prepare(set, cfg)?;
    let mut sum = CompensatedSum::default();
    let mut sq = CompensatedSum::default();
    for r in RankingSampler::new(set, seed).take(samples) {
        let v = prepared.score(&r)?;
        sum.add(v);
        sq.add(v * v);
    }
    let n = samples as f64;
    let mean = sum.value() / n;
    let var = ((sq.value() / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// A concrete instance on which the property fails.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub metric: Metric,
    pub config: MetricConfig,
    pub description: String,
    pub labels: Vec<String>,
    pub terms: Vec<Term>,
    pub values: Vec<Option<f64>>,
    pub requirement: Requirement,
}

impl Counterexample {
    /// The violated inequality with the observed values filled in.
    pub fn inequality(&self) -> String {
        self.requirement.render(&self.labels, &self.values)
    }

    /// Re-evaluate every term from scratch.
    pub fn replay(&self) -> Result<Vec<Option<f64>>> {
        self.terms
            .iter()
            .map(|t| t.evaluate(self.metric, &self.config))
            .collect()
    }

    /// True when replaying gives bit-identical values that still violate the requirement.
    pub fn reproduces(&self) -> Result<bool> {
        let again = self.replay()?;
        let same = again.len() == self.values.len()
            && again
                .iter()
                .zip(&self.values)
                .all(|(a, b)| a.map(f64::to_bits) == b.map(f64::to_bits));
        Ok(same && !self.requirement.holds(&again))
    }
}

fn groups_string(r: &Ranking) -> String {
    r.groups()
        .map(|g| if g == Group::Protected { '1' } else { '0' })
        .collect()
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, ids, groups, samples, seed) = match self {
            Term::Score(r) => ("score", r.ids(), groups_string(r), None, None),
            Term::Expectation(set) => (
                "expectation",
                set.ranking().ids(),
                groups_string(&set.ranking()),
                None,
                None,
            ),
            Term::MonteCarlo { set, samples, seed } => (
                "monte_carlo",
                set.ranking().ids(),
                groups_string(&set.ranking()),
                Some(*samples),
                Some(*seed),
            ),
        };
        let mut st = s.serialize_struct("Term", 5)?;
        st.serialize_field("kind", kind)?;
        st.serialize_field("candidates", &ids)?;
        st.serialize_field("groups", &groups)?;
        st.serialize_field("samples", &samples)?;
        st.serialize_field("seed", &seed)?;
        st.end()
    }
}

impl Serialize for Counterexample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Counterexample", 8)?;
        st.serialize_field("metric", &self.metric)?;
        st.serialize_field("config", &self.config)?;
        st.serialize_field("description", &self.description)?;
        st.serialize_field("labels", &self.labels)?;
        st.serialize_field("terms", &self.terms)?;
        st.serialize_field("values", &self.values)?;
        st.serialize_field("requirement", &self.requirement)?;
        st.serialize_field("inequality", &self.inequality())?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyVerdict {
    pub property: PropertyId,
    pub metric: Metric,
    pub status: Status,
    pub counterexample: Option<Counterexample>,
    /// Description of the family that was searched.
    pub search_budget: String,
    /// N′ for the threshold properties.
    pub threshold: Option<usize>,
    pub notes: Vec<String>,
}

impl PropertyVerdict {
    fn new(property: PropertyId, metric: Metric, status: Status, search_budget: String) -> Self {
        PropertyVerdict {
            property,
            metric,
            status,
            counterexample: None,
            search_budget,
            threshold: None,
            notes: Vec::new(),
        }
    }

    pub fn is_satisfied(&self) -> bool {
        self.status == Status::Satisfied
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }
}

impl fmt::Display for PropertyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ({}): ",
            self.metric,
            self.property,
            self.property.name()
        )?;
        match self.status {
            Status::Satisfied => {
                f.write_str("satisfied (no counterexample within budget)")?;
                if let Some(n) = self.threshold {
                    write!(f, ", N′ = {n}")?;
                }
            }
            Status::Violated => f.write_str("violated")?,
            Status::Inapplicable => f.write_str("not applicable")?,
        }
        if let Some(c) = &self.counterexample {
            write!(
                f,
                "\n  instance: {}\n  violated requirement: {}",
                c.description,
                c.inequality()
            )?;
        }
        if !self.search_budget.is_empty() {
            write!(f, "\n  searched: {}", self.search_budget)?;
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        Ok(())
    }
}

/// Finite families searched by the checkers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBudget {
    pub seed: u64,
    /// Population sizes for invariance to ranking length (and P1, P10).
    pub length_grid: Vec<usize>,
    pub length_p: f64,
    /// Protected shares for invariance to group proportions (and P1, P10).
    pub proportion_grid: Vec<f64>,
    pub proportion_n: usize,
    /// Prefix-metric cutoff step on the two grids above.
    pub grid_cutoff_step: usize,
    /// Largest population enumerated exhaustively in Setting 1.
    pub exhaustive_max_n: usize,
    /// Largest candidate set enumerated exhaustively in Setting 2.
    pub subset_max_n: usize,
    pub random_instances: usize,
    pub random_max_population: usize,
    pub random_max_set: usize,
    pub transform_scales: Vec<f64>,
    pub transform_shifts: Vec<f64>,
    pub transform_instances: usize,
    /// Largest population for exact expectations.
    pub expectation_max_n: usize,
    pub monte_carlo_n: usize,
    pub monte_carlo_p: f64,
    pub monte_carlo_samples: usize,
    pub threshold_max_n: usize,
    pub threshold_populations: Vec<f64>,
    /// Largest |G0| in the boundedness growth family.
    pub growth_max: usize,
    /// Envelope |m| ≤ bound checked for boundedness.
    pub bound: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            seed: 0,
            length_grid: (20..=500).step_by(10).collect(),
            length_p: 0.3,
            proportion_grid: (10..=90).step_by(2).map(|i| i as f64 / 100.0).collect(),
            proportion_n: 100,
            grid_cutoff_step: 10,
            exhaustive_max_n: 6,
            subset_max_n: 5,
            random_instances: 200,
            random_max_population: 60,
            random_max_set: 50,
            transform_scales: vec![0.5, 1.0, 2.0, 10.0],
            transform_shifts: vec![-0.09, 0.0, 0.5, 1.0, 5.0],
            transform_instances: 50,
            expectation_max_n: 7,
            monte_carlo_n: 20,
            monte_carlo_p: 0.3,
            monte_carlo_samples: 100_000,
            threshold_max_n: 64,
            threshold_populations: vec![0.1, 0.3, 0.5, 0.8, 0.9, 0.97],
            growth_max: 1024,
            bound: 1e3,
        }
    }
}

impl SearchBudget {
    /// A smaller budget for interactive use; the table still matches the golden one.
    pub fn quick() -> Self {
        SearchBudget {
            length_grid: (20..=200).step_by(30).collect(),
            proportion_grid: (10..=90).step_by(8).map(|i| i as f64 / 100.0).collect(),
            exhaustive_max_n: 5,
            subset_max_n: 4,
            random_instances: 30,
            random_max_population: 30,
            random_max_set: 20,
            transform_instances: 10,
            expectation_max_n: 6,
            monte_carlo_samples: 10_000,
            ..SearchBudget::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Run one checker. `base` supplies the log base and normalizer; cutoffs are
/// chosen per property family.
pub fn check_property(
    property: PropertyId,
    metric: Metric,
    budget: &SearchBudget,
    base: &MetricConfig,
) -> Result<PropertyVerdict> {
    if !property.applies_to(metric) {
        let reason = if metric == Metric::PSP {
            "PSP is only defined in Setting 1"
        } else {
            "the metric ignores relevance scores"
        };
        let mut v = PropertyVerdict::new(property, metric, Status::Inapplicable, String::new());
        v.notes.push(reason.into());
        return Ok(v);
    }
    checks::run(property, metric, budget, base)
}
