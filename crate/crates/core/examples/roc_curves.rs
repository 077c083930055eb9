// Ranking quality: averaged top-k FDR and sensitivity for each method,
// read off at a few FDR levels.
//
// ```bash
// cargo run --release --example roc_curves -- 1000000 10
// ```

use ebvariant::{run_roc, BenchmarkConfig, GridCell};

pub fn run_with(p: usize, replications: usize) -> Result<(), Box<dyn std::error::Error>> {
    let config = BenchmarkConfig::standard(p, replications, 1);
    let curves = run_roc(&config, GridCell { pi1: 0.001, a: 0.02 }, 5_000)?;
    println!("method\tFDR<=0.05\tFDR<=0.1\tFDR<=0.2   (mean true calls)");
    for (method, curve) in &curves {
        let at = |level| curve.at_fdr(level).map_or(0.0, |pt| pt.true_calls);
        println!("{method}\t{:.1}\t\t{:.1}\t\t{:.1}", at(0.05), at(0.1), at(0.2));
    }
    Ok(())
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200_000);
    let replications = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    run_with(p, replications)
}

fn main() {
    run().expect("roc_curves example");
}
