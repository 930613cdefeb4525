//! Run all 143 property checks and compare against the published table.
//!
//!     cargo run --release --example satisfaction_table [-- --quick]

use std::time::Instant;

use rankfair::properties::{satisfaction_table, SearchBudget};
use rankfair::MetricConfig;

fn main() {
    let quick = std::env::args().any(|a| a == "--quick");
    let budget = if quick {
        SearchBudget::quick()
    } else {
        SearchBudget::default()
    };
    let started = Instant::now();
    let table = satisfaction_table(&budget, &MetricConfig::default());
    println!("{}", table.render());
    if std::env::args().any(|a| a == "--details") {
        println!("{}", table.render_details());
    }
    let mismatches = table.mismatches();
    if mismatches.is_empty() {
        println!("all {} cells match the published table", table.cells.len());
    } else {
        for m in &mismatches {
            println!(
                "{} {}: expected {} got {}",
                m.metric,
                m.property,
                m.expected.glyph(),
                m.got.glyph()
            );
        }
    }
    println!("elapsed: {:.1?}", started.elapsed());
}
