// End-to-end calling: estimated versus true hyperparameters, the step-up
// rule versus a fixed fdr threshold, scored against the simulated truth.
//
// ```bash
// cargo run --release --example call_variants
// ```

use ebvariant::{
    call_pipeline, score_callset, score_decisions, simulate, threshold_call, threshold_for_loss_weight, Mode,
    PoolDesign, SimulationSpec,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let design = PoolDesign::new(5, 20, 0.01)?;
    let spec = SimulationSpec::new(200_000, design, 0.01, 0.02, 42);
    let (data, truth) = simulate(&spec)?;
    println!("{} sites, {} variants", data.num_sites(), truth.num_variants());

    for (label, mode) in [("estimated", Mode::Empirical), ("oracle", Mode::Oracle(spec.hyperparameters()?))] {
        let result = call_pipeline(&data, &design, 0.05, mode)?;
        let counts = score_callset(&result.calls, &truth)?;
        println!(
            "{label:>9}: {} calls, {} false, attained BFDR {:.4}, FDP {:.4}",
            counts.r,
            counts.v,
            result.calls.attained_bfdr.unwrap_or(0.0),
            counts.fdp()
        );
    }

    // Weighing a false call 19 times a missed one gives t = 0.05.
    let scores = call_pipeline(&data, &design, 0.05, Mode::Empirical)?.scores;
    let t = threshold_for_loss_weight(19.0);
    let fixed = threshold_call(&scores, t)?;
    let counts = score_decisions(&fixed.decisions, &truth.mu)?;
    println!("fdr < {t:.2}: {} calls, {} false", counts.r, counts.v);
    Ok(())
}

fn main() {
    run().expect("call_variants example");
}
