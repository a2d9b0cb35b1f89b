//! Node classification with the persona readout and a linear head.
//!
//! ```text
//! cargo run --release --example node_classification -- data/cora [seed] [epochs]
//! ```

use personasage::datasets::load_bundle;
use personasage::experiment::preset_total_dim;
use personasage::model::PersonaConfig;
use personasage::train::{train_node_classification, TrainConfig};

fn main() -> personasage::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/cora".into());
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let epochs: usize = args.next().map_or(100, |s| s.parse().expect("epochs must be an integer"));

    let bundle = load_bundle(&dir)?;
    let k = bundle.num_classes();
    let cfg = TrainConfig {
        persona: PersonaConfig {
            k,
            out_dim: preset_total_dim(&bundle.meta.name, k) / k,
            ..PersonaConfig::default()
        },
        epochs,
        ..TrainConfig::default()
    };
    let run = train_node_classification(&bundle, &cfg, seed)?;
    for r in run.trace.iter().step_by(10) {
        println!("epoch {:>3}  loss {:.4}  val acc {:.4}", r.epoch, r.train_loss, r.val_metric);
    }
    println!(
        "{}: best epoch {} val {:.4} test {:.4}",
        bundle.meta.name, run.best_epoch, run.val_metric, run.test_metric
    );
    Ok(())
}
