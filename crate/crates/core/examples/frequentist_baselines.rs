// Per-pool binomial tests combined by Simes and by Fisher, then
// Benjamini–Hochberg.
//
// ```bash
// cargo run --release --example frequentist_baselines
// ```

use ebvariant::{
    fisher_meta, meta_call, pool_pvalue, score_callset, simes_partial_conjunction, simulate, snver_call, PoolDesign,
    SimulationSpec,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let design = PoolDesign::new(5, 20, 0.01)?;

    let depths = [30u32, 28, 35, 22, 31];
    let alts = [3u32, 0, 2, 0, 1];
    let ps: Vec<f64> = depths.iter().zip(&alts).map(|(&k, &x)| pool_pvalue(k, x, &design)).collect::<Result<_, _>>()?;
    println!("pool p-values: {:?}", ps.iter().map(|p| format!("{p:.3e}")).collect::<Vec<_>>());
    println!("Simes: {:.3e}  Fisher: {:.3e}", simes_partial_conjunction(&ps)?, fisher_meta(&ps)?);

    let (data, truth) = simulate(&SimulationSpec::new(200_000, design, 0.01, 0.02, 5))?;
    for (label, calls) in [("SNVer", snver_call(&data, &design, 0.05)?), ("META", meta_call(&data, &design, 0.05)?)] {
        let c = score_callset(&calls, &truth)?;
        println!("{label:>5}: {} calls, {} false, sensitivity {:.3}", c.r, c.v, c.sensitivity());
    }
    Ok(())
}

fn main() {
    run().expect("frequentist_baselines example");
}
