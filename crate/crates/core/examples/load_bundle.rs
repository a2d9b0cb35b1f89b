//! Loads a dataset bundle and prints its statistics, degree profile and
//! class balance.

use personasage::datasets::load_bundle;

fn main() -> personasage::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data/toy".into());
    let b = load_bundle(&dir)?;
    let g = &b.graph;
    println!("name      {}", b.meta.name);
    println!("nodes     {}", b.num_nodes());
    println!("edges     {} undirected", g.num_edges());
    if let Some(src) = b.meta.num_source_edges {
        println!("          {src} in the source distribution");
    }
    println!("features  {}", b.features.cols());
    println!("classes   {}", b.num_classes());

    let degrees: Vec<usize> = (0..b.num_nodes()).map(|v| g.degree(v)).collect();
    let isolated = degrees.iter().filter(|&&d| d == 0).count();
    let max = degrees.iter().max().copied().unwrap_or(0);
    let mean = 2.0 * g.num_edges() as f64 / b.num_nodes().max(1) as f64;
    println!("degree    mean {mean:.2}, max {max}, isolated {isolated}");

    let mut counts = vec![0usize; b.num_classes()];
    for &l in &b.labels {
        counts[l] += 1;
    }
    println!("classes   {counts:?}");
    let nnz = b.features.data().iter().filter(|&&x| x != 0.0).count();
    println!(
        "density   {:.4} of feature entries nonzero",
        nnz as f64 / b.features.data().len().max(1) as f64
    );
    Ok(())
}
