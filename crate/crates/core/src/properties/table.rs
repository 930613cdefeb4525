//! The metric × property satisfaction table and its golden reference.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_property, PropertyId, PropertyVerdict, SearchBudget, Status};
use crate::metrics::{Metric, MetricConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symbol {
    Check,
    Cross,
    NotApplicable,
    Error,
}

impl Symbol {
    pub fn glyph(self) -> &'static str {
        match self {
            Symbol::Check => "✓",
            Symbol::Cross => "✗",
            Symbol::NotApplicable => "N/A",
            Symbol::Error => "ERR",
        }
    }
}

/// Expected table, one row per metric: `Y` satisfied, `N` violated, `-` not applicable.
const GOLDEN: [(Metric, &str); 11] = [
    (Metric::RND, "NYNN--NNNNNNN"),
    (Metric::RRD, "NYNN--NNNNNNN"),
    (Metric::RKL, "NYNN--NNNNNNN"),
    (Metric::ED, "YYYY--YNNNYYY"),
    (Metric::ER, "YNYY--NNNNYYY"),
    (Metric::DTD, "YNYYNNYNNNYYY"),
    (Metric::DTR, "YNYYNNNNNNYYY"),
    (Metric::DID, "YNYYYNYNNNYYY"),
    (Metric::DIR, "YNYYYNNNNNYYY"),
    (Metric::AWRF, "NYNN--NNNNNNN"),
    (Metric::PSP, "YYYN--YYYY---"),
];

/// The published verdict for one cell.
pub fn golden_symbol(metric: Metric, property: PropertyId) -> Symbol {
    let row = GOLDEN
        .iter()
        .find(|(m, _)| *m == metric)
        .map(|(_, row)| row.as_bytes())
        .expect("every metric has a golden row");
    match row[property.number() - 1] {
        b'Y' => Symbol::Check,
        b'N' => Symbol::Cross,
        _ => Symbol::NotApplicable,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableCell {
    pub metric: Metric,
    pub property: PropertyId,
    pub symbol: Symbol,
    #[serde(flatten)]
    pub verdict: Option<PropertyVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub metric: Metric,
    pub property: PropertyId,
    pub expected: Symbol,
    pub got: Symbol,
}

#[derive(Debug, Clone, Serialize)]
pub struct SatisfactionTable {
    pub metrics: Vec<Metric>,
    pub properties: Vec<PropertyId>,
    pub cells: Vec<TableCell>,
}

/// Check every (metric, property) cell, in parallel across cells.
pub fn satisfaction_table(budget: &SearchBudget, base: &MetricConfig) -> SatisfactionTable {
    table_for(&Metric::ALL, &PropertyId::ALL, budget, base)
}

/// Like [`satisfaction_table`] restricted to some rows and columns.
pub fn table_for(
    metrics: &[Metric],
    properties: &[PropertyId],
    budget: &SearchBudget,
    base: &MetricConfig,
) -> SatisfactionTable {
    let pairs: Vec<(Metric, PropertyId)> = metrics
        .iter()
        .flat_map(|&m| properties.iter().map(move |&p| (m, p)))
        .collect();
    let cells = pairs
        .into_par_iter()
        .map(
            |(metric, property)| match check_property(property, metric, budget, base) {
                Ok(v) => TableCell {
                    metric,
                    property,
                    symbol: match v.status {
                        Status::Satisfied => Symbol::Check,
                        Status::Violated => Symbol::Cross,
                        Status::Inapplicable => Symbol::NotApplicable,
                    },
                    verdict: Some(v),
                    error: None,
                },
                Err(e) => TableCell {
                    metric,
                    property,
                    symbol: Symbol::Error,
                    verdict: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    SatisfactionTable {
        metrics: metrics.to_vec(),
        properties: properties.to_vec(),
        cells,
    }
}

impl SatisfactionTable {
    pub fn cell(&self, metric: Metric, property: PropertyId) -> Option<&TableCell> {
        self.cells
            .iter()
            .find(|c| c.metric == metric && c.property == property)
    }

    pub fn mismatches(&self) -> Vec<Mismatch> {
        self.cells
            .iter()
            .filter_map(|c| {
                let expected = golden_symbol(c.metric, c.property);
                (expected != c.symbol).then_some(Mismatch {
                    metric: c.metric,
                    property: c.property,
                    expected,
                    got: c.symbol,
                })
            })
            .collect()
    }

    /// Grid of ✓ / ✗ / N/A in the layout of the published overview table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<6}", "");
        for p in &self.properties {
            let _ = write!(s, "{:>5}", p.to_string());
        }
        s.push('\n');
        for &m in &self.metrics {
            let _ = write!(s, "{:<6}", m.name());
            for &p in &self.properties {
                let glyph = self.cell(m, p).map_or("?", |c| c.symbol.glyph());
                let _ = write!(s, "{glyph:>5}");
            }
            s.push('\n');
        }
        s
    }

    /// One paragraph per cell: verdict, counterexample and searched family.
    pub fn render_details(&self) -> String {
        let mut s = String::new();
        for c in &self.cells {
            match (&c.verdict, &c.error) {
                (Some(v), _) => {
                    let _ = writeln!(s, "{v}");
                }
                (None, Some(e)) => {
                    let _ = writeln!(s, "{} {}: error: {e}", c.metric, c.property);
                }
                (None, None) => {}
            }
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_rows_have_thirteen_cells() {
        for (_, row) in GOLDEN {
            assert_eq!(row.len(), 13);
        }
        assert_eq!(golden_symbol(Metric::PSP, PropertyId::P4), Symbol::Cross);
        assert_eq!(
            golden_symbol(Metric::RND, PropertyId::P5),
            Symbol::NotApplicable
        );
        assert_eq!(golden_symbol(Metric::DID, PropertyId::P5), Symbol::Check);
    }

    #[test]
    fn golden_na_matches_applicability() {
        for m in Metric::ALL {
            for p in PropertyId::ALL {
                let na = golden_symbol(m, p) == Symbol::NotApplicable;
                assert_eq!(na, !p.applies_to(m), "{m} {p}");
            }
        }
    }
}
