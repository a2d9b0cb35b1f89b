//! Runs the persona forward pass on a small hand-made graph and prints the
//! membership matrix and every persona embedding after each layer.

use personasage::model::{persona_forward, persona_set, readout, LayerParams, PersonaConfig, ReadoutKind};
use personasage::numeric::Matrix;
use personasage::Graph;

fn print_matrix(title: &str, m: &Matrix) {
    println!("{title}");
    for (v, row) in m.iter_rows().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:8.4}")).collect();
        println!("  node {v}: {}", cells.join(" "));
    }
}

fn main() -> personasage::Result<()> {
    // A triangle 0-1-2 with a pendant node 3 hanging off node 2.
    let g = Graph::new(4, &[(0, 1), (0, 2), (1, 2), (2, 3)])?;
    let x = Matrix::from_rows(&[[1.0, 0.0], [0.8, 0.2], [0.5, 0.5], [0.0, 1.0]])?;
    let c0 = Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])?;

    let layer = |w: &[[f64; 2]], b: [f64; 2]| -> personasage::Result<LayerParams> {
        Ok(LayerParams {
            w: Matrix::from_rows(w)?,
            b: Matrix::row_vector(b.to_vec()),
        })
    };
    // Rows 0..2 act on the node itself, rows 2..4 on the aggregated message.
    let params = vec![
        layer(&[[1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.0, 0.5]], [0.0, 0.0])?,
        layer(&[[1.0, -1.0], [1.0, 1.0], [0.5, 0.5], [-0.5, 0.5]], [0.1, 0.0])?,
    ];

    for layers in 1..=2 {
        let cfg = PersonaConfig {
            k: 2,
            layers,
            hidden_dim: 2,
            out_dim: 2,
            ..PersonaConfig::default()
        };
        let state = persona_forward(&g, &x, &c0, &params[..layers], &cfg)?;
        println!("== after layer {layers}");
        print_matrix("memberships", &state.memberships);
        for (i, e) in state.embeddings.iter().enumerate() {
            print_matrix(&format!("persona {i} embeddings"), e);
        }
        if layers == 2 {
            print_matrix("conditioned readout", &readout(&state, ReadoutKind::Conditioned));
            for (v, set) in persona_set(&state).iter().enumerate() {
                let ids: Vec<usize> = set.iter().map(|p| p.index).collect();
                println!("node {v} personas {ids:?}");
            }
        }
    }
    Ok(())
}
