// FDR against externally genotyped sites: calls whose site appears in the
// gold table count as true or false positives, the rest are set aside.
//
// ```bash
// cargo run --release --example gold_standard
// ```

use std::collections::HashMap;

use ebvariant::io::{read_calls, read_gold, write_calls};
use ebvariant::{call_pipeline, gold_standard_fdr, simulate, Mode, PoolDesign, SimulationSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let design = PoolDesign::new(5, 20, 0.01)?;
    let (data, truth) = simulate(&SimulationSpec::new(100_000, design, 0.01, 0.02, 3))?;
    let ids: Vec<String> = (0..data.num_sites()).map(|i| data.site_id(i).into_owned()).collect();

    // Pretend every tenth site was genotyped independently.
    let mut gold_tsv = String::from("#format=ebvariant.v1\nsite_id\tis_variant\n");
    for i in (0..data.num_sites()).step_by(10) {
        gold_tsv += &format!("{}\t{}\n", ids[i], truth.mu[i] as u8);
    }
    let gold: HashMap<String, bool> = read_gold(gold_tsv.as_bytes())?;

    let result = call_pipeline(&data, &design, 0.05, Mode::Empirical)?;
    let mut calls_tsv = Vec::new();
    write_calls(&result.calls, &result.scores, &ids, &mut calls_tsv)?;
    let calls = read_calls(calls_tsv.as_slice())?;

    let report = gold_standard_fdr(&calls.decisions, &calls.site_ids, &gold)?;
    println!(
        "{} calls: {} confirmed, {} refuted, {} not genotyped; gold-standard FDR {}",
        result.calls.num_rejected,
        report.tp,
        report.fp,
        report.other,
        report.fdr.map_or("n/a".to_string(), |f| format!("{f:.3}"))
    );
    Ok(())
}

fn main() {
    run().expect("gold_standard example");
}
