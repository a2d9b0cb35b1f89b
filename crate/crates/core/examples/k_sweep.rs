//! Varies the persona count at a fixed readout width and prints one mean
//! and std row per K, as the `sweep-k` subcommand does.
//!
//! ```text
//! cargo run --release --example k_sweep -- data/cora 1,4,7 [seeds] [epochs]
//! ```

use personasage::clustering::Clusterer;
use personasage::datasets::load_bundle;
use personasage::experiment::{run_sweep_on, write_rows, RunConfig};

fn main() -> personasage::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/cora".into());
    let ks: Vec<usize> = args
        .next()
        .unwrap_or_else(|| "1,7".into())
        .split(',')
        .map(|k| k.trim().parse().expect("K list like 1,4,7"))
        .collect();
    let seeds: u64 = args.next().map_or(2, |s| s.parse().expect("seed count"));
    let epochs: usize = args.next().map_or(100, |s| s.parse().expect("epoch count"));

    let bundle = load_bundle(&dir)?;
    let cfg = RunConfig {
        dataset: dir.into(),
        clusterer: Clusterer::KMeans,
        seeds: (0..seeds).collect(),
        epochs,
        ..RunConfig::default()
    };
    let results = run_sweep_on(&bundle, &cfg, &ks)?;
    let rows: Vec<_> = results.into_iter().flat_map(|(rows, _)| rows).collect();
    write_rows(std::io::stdout().lock(), &rows)
}
