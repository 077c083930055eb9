// Writing and reading the tab-separated count, truth and calls files.
//
// ```bash
// cargo run --example count_table_io
// ```

use std::fs::File;
use std::io::{BufReader, BufWriter};

use ebvariant::io::{read_calls, read_counts, read_truth, write_calls, write_counts, write_truth};
use ebvariant::{call_pipeline, simulate, Mode, PoolDesign, SimulationSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("ebvariant-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let design = PoolDesign::new(3, 10, 0.01)?;
    let (data, truth) = simulate(&SimulationSpec::new(1_000, design, 0.05, 0.1, 11))?;

    let counts_path = dir.join("sim.counts.tsv");
    write_counts(&data, BufWriter::new(File::create(&counts_path)?))?;
    write_truth(&data, &truth, BufWriter::new(File::create(dir.join("sim.truth.tsv"))?))?;

    let reread = read_counts(BufReader::new(File::open(&counts_path)?), &design)?;
    assert_eq!(reread.depths(), data.depths());
    let (_, reread_truth) = read_truth(BufReader::new(File::open(dir.join("sim.truth.tsv"))?), 3)?;
    assert_eq!(reread_truth, truth);

    let result = call_pipeline(&reread, &design, 0.05, Mode::Empirical)?;
    let ids: Vec<String> = (0..reread.num_sites()).map(|i| reread.site_id(i).into_owned()).collect();
    let calls_path = dir.join("calls.tsv");
    write_calls(&result.calls, &result.scores, &ids, BufWriter::new(File::create(&calls_path)?))?;
    let calls = read_calls(BufReader::new(File::open(&calls_path)?))?;

    let head: Vec<String> = std::fs::read_to_string(&calls_path)?.lines().take(14).map(String::from).collect();
    println!("{}", head.join("\n"));
    println!("... {} sites, {} called", calls.site_ids.len(), calls.decisions.iter().filter(|&&d| d).count());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() {
    run().expect("count_table_io example");
}
