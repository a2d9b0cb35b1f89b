//! Persona model against the GraphSAGE baseline on link prediction, same
//! split, same readout width.
//!
//! ```text
//! cargo run --release --example baseline_comparison -- data/cora [seeds] [epochs]
//! ```

use personasage::datasets::load_bundle;
use personasage::experiment::{run_train_on, RunConfig};
use personasage::model::ModelKind;

fn main() -> personasage::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/cora".into());
    let seeds: u64 = args.next().map_or(1, |s| s.parse().expect("seed count"));
    let epochs: usize = args.next().map_or(100, |s| s.parse().expect("epoch count"));
    let bundle = load_bundle(&dir)?;

    for model in [ModelKind::PersonaSage, ModelKind::PersonaSageK1, ModelKind::GraphSage] {
        let cfg = RunConfig {
            dataset: dir.clone().into(),
            model,
            seeds: (0..seeds).collect(),
            epochs,
            ..RunConfig::default()
        };
        let started = std::time::Instant::now();
        let o = run_train_on(&bundle, &cfg)?;
        println!(
            "{:<16} K={} D={:<3} test auc {:.4} ± {:.4}  ({:.1}s)",
            model.to_string(),
            o.key.k,
            o.key.d,
            o.aggregate.mean,
            o.aggregate.std,
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
