//! Builds a two-layer persona link-prediction loss on the tape and compares
//! its reverse-mode gradient with central finite differences.

use std::sync::Arc;

use personasage::autodiff::{finite_difference_check, Tape};
use personasage::model::{init_layers, ForwardPlan, LayerParams, PersonaConfig};
use personasage::numeric::{rand_uniform, Matrix, RandomStream};
use personasage::{Aggregator, Graph};

fn main() -> personasage::Result<()> {
    let mut s = RandomStream::new(5);
    let g = Graph::new(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)])?;
    let x = rand_uniform(&mut s, 6, 3, 0.0, 1.0)?;
    let c0 = Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]])?;
    let pairs = (
        Arc::new(vec![0, 2, 3, 0]),
        Arc::new(vec![1, 3, 5, 3]),
        Arc::new(vec![1.0, 1.0, 0.0, 0.0]),
    );

    for agg in [Aggregator::Mean, Aggregator::Sum, Aggregator::Max] {
        let cfg = PersonaConfig {
            k: 2,
            hidden_dim: 4,
            out_dim: 3,
            aggregator: agg,
            ..PersonaConfig::default()
        };
        let plan = ForwardPlan::persona(Arc::new(g.clone()), Arc::new(x.clone()), &c0, &cfg)?;
        let params: Vec<Matrix> = init_layers(&cfg, 3, &mut s)?
            .into_iter()
            .flat_map(|p| [p.w, p.b.map(personasage::numeric::Elementwise::Scale(0.0))])
            .collect();

        let loss_of = |p: &[Matrix]| -> personasage::Result<(Tape, Vec<personasage::autodiff::Var>, personasage::autodiff::Var)> {
            let mut t = Tape::new();
            let layers: Vec<LayerParams> = p
                .chunks(2)
                .map(|c| LayerParams {
                    w: c[0].clone(),
                    b: c[1].clone(),
                })
                .collect();
            let vars = plan.parameter_params(&mut t, &layers);
            let emb = plan.embeddings(&mut t, &vars)?;
            let r = plan.readout(&mut t, &emb)?;
            let a = t.gather(r, Arc::clone(&pairs.0))?;
            let b = t.gather(r, Arc::clone(&pairs.1))?;
            let z = t.row_dot(a, b)?;
            let loss = t.bce_with_logits(z, Arc::clone(&pairs.2))?;
            Ok((t, vars.iter().flat_map(|&(w, b)| [w, b]).collect(), loss))
        };
        let (tape, vars, loss) = loss_of(&params)?;
        let grads = tape.backward(loss)?;
        let analytic: Vec<Matrix> = vars.iter().map(|&v| grads.get(v)).collect();
        let err = finite_difference_check(
            |p| loss_of(p).and_then(|(t, _, l)| t.value(l).item()).expect("loss"),
            &params,
            &analytic,
            1e-5,
        );
        println!(
            "{agg}: loss {:.6}, {} tape nodes, max relative gradient error {err:.2e}",
            tape.value(loss).item()?,
            tape.len()
        );
    }
    Ok(())
}
