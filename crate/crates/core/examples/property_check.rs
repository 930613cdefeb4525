//! Check one property for one metric and print the verdict with its counterexample.
//!
//!     cargo run --release --example property_check [-- METRIC PROPERTY]

use rankfair::properties::{check_property, golden_symbol, PropertyId, SearchBudget};
use rankfair::{Metric, MetricConfig};

fn main() -> rankfair::Result<()> {
    let mut args = std::env::args().skip(1);
    let metric: Metric = args
        .next()
        .as_deref()
        .unwrap_or("AWRF")
        .parse()
        .expect("a metric name");
    let property: PropertyId = args
        .next()
        .as_deref()
        .unwrap_or("P13")
        .parse()
        .expect("property is P1..P13");

    let verdict = check_property(
        property,
        metric,
        &SearchBudget::default(),
        &MetricConfig::default(),
    )?;
    println!("{verdict}");
    println!("published: {}", golden_symbol(metric, property).glyph());
    if let Some(cx) = &verdict.counterexample {
        println!("\nviolated requirement: {}", cx.inequality());
        println!("replays bit-identically: {}", cx.reproduces()?);
    }
    Ok(())
}
