//! Shows that nodes end up with different numbers of persona embeddings:
//! a path of nine nodes, each starting in its own cluster, after one layer.

use personasage::model::{init_layers, persona_forward, persona_set, PersonaConfig};
use personasage::numeric::{Matrix, RandomStream};
use personasage::Graph;

fn main() -> personasage::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(9, |s| s.parse().expect("node count"));
    let layers: usize = std::env::args().nth(2).map_or(1, |s| s.parse().expect("layer count"));
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
    let g = Graph::new(n, &edges)?;
    let x = Matrix::filled(n, 2, 1.0);
    let c0 = Matrix::identity(n);
    let cfg = PersonaConfig {
        k: n,
        layers,
        hidden_dim: 4,
        out_dim: 2,
        ..PersonaConfig::default()
    };
    let params = init_layers(&cfg, 2, &mut RandomStream::new(0))?;
    let state = persona_forward(&g, &x, &c0, &params, &cfg)?;
    for (v, set) in persona_set(&state).iter().enumerate() {
        let parts: Vec<String> = set.iter().map(|p| format!("{}:{:.3}", p.index, p.membership)).collect();
        println!("node {v}: {} personas [{}]", set.len(), parts.join(", "));
    }
    Ok(())
}
