// Moment estimates of the variant proportion and frequency bound on
// simulated data of growing size.
//
// ```bash
// cargo run --release --example estimate_hyperparameters
// ```

use ebvariant::{compute_moments, estimate_hyperparameters, simulate, PoolDesign, SimulationSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let design = PoolDesign::new(5, 20, 0.01)?;
    let (pi1, a) = (0.01, 0.02);
    println!("truth: pi1 = {pi1}, a = {a}");
    println!("sites\tm1\tm2\tpi1_hat\ta_hat\ttruncated");
    for p in [10_000, 100_000, 400_000] {
        let (data, _) = simulate(&SimulationSpec::new(p, design, pi1, a, 7))?;
        let moments = compute_moments(&data, &design)?;
        let est = estimate_hyperparameters(&moments, &design)?;
        println!(
            "{p}\t{:.3e}\t{:.3e}\t{:.5}\t{:.4}\t{}",
            moments.m1,
            moments.m2,
            est.hyper.pi1(),
            est.hyper.a(),
            est.truncated_a || est.truncated_pi1
        );
    }
    Ok(())
}

fn main() {
    run().expect("estimate_hyperparameters example");
}
