//! Translation and rescaling sweeps on a small synthetic run file.
//!
//!     cargo run --example translation_run [-- RUN.csv]
//!
//! Without an argument a two-query run is generated in memory.

use rankfair::experiments::{
    load_run_file, run_rescaling_sweep, run_translation_sweep, AffineSweep, RunFile,
};
use rankfair::Metric;

const SYNTHETIC: &str = "\
query_id,candidate_id,group,relevance
q1,d1,0,0.9
q1,d2,1,0.7
q1,d3,0,0.5
q1,d4,1,0.2
q1,d5,0,0.1
q2,e1,1,0.6
q2,e2,0,0.4
";

fn main() -> rankfair::Result<()> {
    let run = match std::env::args().nth(1) {
        Some(path) => load_run_file(path)?,
        None => RunFile::from_reader(SYNTHETIC.as_bytes())?,
    };
    println!("queries: {}", run.queries().join(", "));

    let rows = run_translation_sweep(&run, &AffineSweep::translation())?;
    for q in run.queries() {
        println!("\n{q}: c       DTD        DTR");
        let of = |m: Metric, c: f64| {
            rows.iter()
                .find(|r| r.query.as_deref() == Some(q.as_str()) && r.metric == m && r.c == Some(c))
                .and_then(|r| r.value)
        };
        for c in [-0.09, 0.0, 1.0, 5.0] {
            let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:+.5}"));
            println!(
                "   {c:>6} {:>10} {:>10}",
                fmt(of(Metric::DTD, c)),
                fmt(of(Metric::DTR, c))
            );
        }
    }

    let rescaled = run_rescaling_sweep(&run, &AffineSweep::rescaling())?;
    println!("\nrescaling, q1: a · DTD(a·y) stays constant");
    for r in rescaled
        .iter()
        .filter(|r| r.query.as_deref() == Some("q1") && r.metric == Metric::DTD)
    {
        let a = r.a.unwrap();
        println!(
            "   a={a:<4} DTD={:+.6}  a·DTD={:+.6}",
            r.value.unwrap(),
            a * r.value.unwrap()
        );
    }
    Ok(())
}
