//! Evaluate all eleven metrics on one small hand-built ranking.
//!
//!     cargo run --example metric_tour

use rankfair::metrics::{click_through_rate, exposure, position_bias};
use rankfair::{Candidate, Group, Metric, MetricConfig, Population, Ranking};

fn main() -> rankfair::Result<()> {
    let pop = Population::new(vec![
        Candidate::new("alice", Group::Protected, 0.9),
        Candidate::new("bob", Group::NonProtected, 0.8),
        Candidate::new("carol", Group::NonProtected, 0.6),
        Candidate::new("dan", Group::Protected, 0.4),
        Candidate::new("erin", Group::NonProtected, 0.3),
    ])?
    .into_shared();
    let r = Ranking::from_ids(pop, &["bob", "alice", "carol", "erin", "dan"])?;
    println!("ranking {r}");
    for k in 1..=r.len() {
        let c = r.at(k)?;
        println!(
            "  {k}. {:<6} {} y={:.1} b(k)={:.4}",
            c.id,
            c.group,
            c.relevance,
            position_bias(k)?
        );
    }
    for g in [Group::NonProtected, Group::Protected] {
        println!(
            "{g}: exposure {:.4}, click-through {:.4}",
            exposure(&r, g),
            click_through_rate(&r, g)
        );
    }

    let cfg = MetricConfig::default();
    println!("\n{:<6} {:>10} {:>6}", "metric", "value", "v_opt");
    for m in Metric::ALL {
        let value = match m.try_evaluate(&r, &cfg)? {
            Some(v) => format!("{v:.6}"),
            None => "undefined".into(),
        };
        println!("{:<6} {value:>10} {:>6}", m.name(), m.v_opt());
    }
    Ok(())
}
