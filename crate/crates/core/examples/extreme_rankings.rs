//! v_first and v_last for every metric on one population, plus a D_N pair.
//!
//!     cargo run --example extreme_rankings [-- N P]

use rankfair::generators::{make_dn_pair, make_first, make_last, PopulationSpec};
use rankfair::{CandidateSet, Cutoffs, Metric, MetricConfig, Setting};

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:+.5}"))
}

fn main() -> rankfair::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args
        .next()
        .map_or(40, |s| s.parse().expect("N is an integer"));
    let p: f64 = args
        .next()
        .map_or(0.3, |s| s.parse().expect("P is a number"));

    let pop = PopulationSpec::uniform(n, p).build()?;
    let set = CandidateSet::full(pop.clone());
    let (first, last) = (make_first(&set), make_last(&set));
    println!(
        "n = {n}, {} protected; first = {first}",
        pop.protected_count()
    );
    let cfg = MetricConfig::default().with_cutoffs(Cutoffs::Step(10));
    println!(
        "{:<6} {:>10} {:>10} {:>6}",
        "metric", "v_first", "v_last", "v_opt"
    );
    for m in Metric::ALL {
        let vf = m.try_evaluate(&first, &cfg)?;
        let vl = m.try_evaluate(&last, &cfg)?;
        println!(
            "{:<6} {:>10} {:>10} {:>6}",
            m.name(),
            show(vf),
            show(vl),
            m.v_opt()
        );
    }

    let big_n = 3;
    let (dn, dn_prime) = make_dn_pair(&pop, big_n)?;
    let (r, r_prime) = (make_first(&dn), make_last(&dn_prime));
    println!("\nN = {big_n}: first(D_N) = {r}\n       last(D_N') = {r_prime}");
    let cfg = MetricConfig::default().with_cutoffs(Cutoffs::Explicit(vec![big_n]));
    for m in Metric::ALL
        .into_iter()
        .filter(|m| m.applies_to(Setting::SubsetOfPopulation))
    {
        println!(
            "{:<6} {:>10} {:>10}",
            m.name(),
            show(m.try_evaluate(&r, &cfg)?),
            show(m.try_evaluate(&r_prime, &cfg)?)
        );
    }
    Ok(())
}
