//! Run the three synthetic sweeps and summarize a few of their trends.
//!
//!     cargo run --release --example sweeps [-- OUT_DIR]
//!
//! With an output directory the full CSVs are written there as
//! `length.csv`, `proportion.csv` and `closeness.csv`.

use std::collections::HashMap;
use std::path::PathBuf;

use rankfair::experiments::{
    run_closeness_sweep, run_length_sweep, run_proportion_sweep, write_csv, ClosenessSweep,
    ExperimentRow, LengthSweep, ProportionSweep, RankingKind,
};
use rankfair::Metric;

/// (grid coordinate, kind) -> value for one metric.
fn series(
    rows: &[ExperimentRow],
    metric: Metric,
    coord: impl Fn(&ExperimentRow) -> String,
) -> HashMap<(String, RankingKind), Option<f64>> {
    rows.iter()
        .filter(|r| r.metric == metric)
        .map(|r| ((coord(r), r.ranking_kind.unwrap()), r.value))
        .collect()
}

fn main() -> rankfair::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);

    let length = run_length_sweep(&LengthSweep::default())?;
    let rnd = series(&length, Metric::RND, |r| r.n.unwrap().to_string());
    let lengths = LengthSweep::default().lengths;
    let wins = lengths
        .iter()
        .filter(|n| {
            rnd[&(n.to_string(), RankingKind::Last)] > rnd[&(n.to_string(), RankingKind::First)]
        })
        .count();
    println!(
        "length: {} rows; rND v_last > v_first at {wins}/{} lengths",
        length.len(),
        lengths.len()
    );
    let ed = series(&length, Metric::ED, |r| r.n.unwrap().to_string());
    for n in [20, 500] {
        println!(
            "  ED n={n}: first {:+.5} last {:+.5}",
            ed[&(n.to_string(), RankingKind::First)].unwrap(),
            ed[&(n.to_string(), RankingKind::Last)].unwrap()
        );
    }

    let proportion = run_proportion_sweep(&ProportionSweep::default())?;
    let awrf = series(&proportion, Metric::AWRF, |r| r.p.unwrap().to_string());
    println!("proportion: {} rows", proportion.len());
    for p in ["0.48", "0.5", "0.52"] {
        println!(
            "  AWRF p={p}: first {:.6} last {:.6}",
            awrf[&(p.to_string(), RankingKind::First)].unwrap(),
            awrf[&(p.to_string(), RankingKind::Last)].unwrap()
        );
    }

    let closeness = run_closeness_sweep(&ClosenessSweep::default())?;
    let er = series(&closeness, Metric::ER, |r| r.big_n.unwrap().to_string());
    println!("closeness: {} rows", closeness.len());
    for big_n in [1, 2, 3, 10, 50] {
        let first = er[&(big_n.to_string(), RankingKind::First)].unwrap();
        let last = er[&(big_n.to_string(), RankingKind::Last)].unwrap();
        println!("  ER N={big_n}: first(D_N) {first:.4}  last(D_N') {last:.4}");
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        for (name, rows) in [
            ("length", &length),
            ("proportion", &proportion),
            ("closeness", &closeness),
        ] {
            let path = dir.join(format!("{name}.csv"));
            write_csv(rows, std::fs::File::create(&path)?)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
