//! Trains the persona model for link prediction on one bundle and prints the
//! per-epoch validation curve.
//!
//! ```text
//! cargo run --release --example link_prediction -- data/cora [seed] [raw|random]
//! ```

use personasage::datasets::load_bundle;
use personasage::experiment::preset_total_dim;
use personasage::model::{ModelKind, PersonaConfig};
use personasage::train::{train_link_prediction, FeatureSource, TrainConfig};

fn main() -> personasage::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/cora".into());
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let features: FeatureSource = args.next().as_deref().unwrap_or("raw").parse()?;

    let bundle = load_bundle(&dir)?;
    let k = bundle.num_classes();
    let cfg = TrainConfig {
        model: ModelKind::PersonaSage,
        features,
        persona: PersonaConfig {
            k,
            out_dim: preset_total_dim(&bundle.meta.name, k) / k,
            ..PersonaConfig::default()
        },
        ..TrainConfig::default()
    };
    let started = std::time::Instant::now();
    let run = train_link_prediction(&bundle, &cfg, seed)?;
    for r in run.trace.iter().step_by(10) {
        println!("epoch {:>3}  loss {:.4}  val auc {:.4}", r.epoch, r.train_loss, r.val_metric);
    }
    println!(
        "{}: best epoch {} val {:.4} test {:.4} ({:.1}s)",
        bundle.meta.name,
        run.best_epoch,
        run.val_metric,
        run.test_metric,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
