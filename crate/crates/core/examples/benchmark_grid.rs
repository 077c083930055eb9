// Monte-Carlo comparison table over the standard (pi1, a) grid.
//
// ```bash
// cargo run --release --example benchmark_grid -- 1000000 10
// ```
//
// Arguments: sites per dataset (default 100000) and replications
// (default 2).

use ebvariant::io::write_benchmark_table;
use ebvariant::{run_grid, standard_grid, BenchmarkConfig};

pub fn run_with(p: usize, replications: usize) -> Result<(), Box<dyn std::error::Error>> {
    let config = BenchmarkConfig::standard(p, replications, 1);
    let results = run_grid(&config, &standard_grid())?;
    println!("pi1\ta\tmethod\tER\tEV\tFDR");
    for cell in &results {
        for r in &cell.results {
            println!(
                "{}\t{}\t{}\t{:.1}\t{:.1}\t{:.4}",
                cell.cell.pi1, cell.cell.a, r.method, r.report.er, r.report.ev, r.report.fdr
            );
        }
    }
    let mut tsv = Vec::new();
    write_benchmark_table(&results, &mut tsv)?;
    println!("\n{} bytes of TSV", tsv.len());
    Ok(())
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    let replications = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    run_with(p, replications)
}

fn main() {
    run().expect("benchmark_grid example");
}
