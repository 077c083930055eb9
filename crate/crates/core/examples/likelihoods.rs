// Per-pool likelihoods under both hypotheses and the local fdr of one site.
//
// ```bash
// cargo run --example likelihoods
// ```

use ebvariant::{
    alt_marginal_log_likelihood, null_log_likelihood, site_local_fdr, Hyperparameters, PoolDesign, SiteObservation,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let design = PoolDesign::new(5, 20, 0.01)?;
    let a = 0.02;

    println!("depth 30, alt reads 0..=4");
    println!("x\tnull\talternative");
    for x in 0..=4 {
        let l0 = null_log_likelihood(30, x, &design)?;
        let l1 = alt_marginal_log_likelihood(30, x, &design, a)?;
        println!("{x}\t{:.4e}\t{:.4e}", l0.exp(), l1.exp());
    }

    let hyper = Hyperparameters::new(0.01, a)?;
    for (label, alts) in [("clean", [0u32, 0, 0, 0, 0]), ("one pool", [3, 0, 0, 0, 0]), ("three pools", [2, 1, 0, 2, 0])] {
        let depths = [30u32, 25, 31, 40, 28];
        let fdr = site_local_fdr(SiteObservation::new(&depths, &alts), &design, &hyper)?;
        println!("{label:>12}: local fdr {fdr:.4}");
    }
    Ok(())
}

fn main() {
    run().expect("likelihoods example");
}
