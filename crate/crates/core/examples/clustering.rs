//! Initial persona assignment: Ward and k-means on three noisy blobs, or on
//! the normalized features of a bundle when a directory is given.

use personasage::clustering::{labels_to_one_hot, Clusterer};
use personasage::datasets::{load_bundle, min_max_normalize};
use personasage::numeric::{Matrix, RandomStream};

fn blobs(stream: &mut RandomStream) -> Matrix {
    let centers = [[0.0, 0.0], [5.0, 0.0], [2.5, 4.0]];
    let mut m = Matrix::zeros(30, 2);
    for v in 0..30 {
        let c = centers[v % 3];
        m.set(v, 0, c[0] + stream.next_f64() - 0.5);
        m.set(v, 1, c[1] + stream.next_f64() - 0.5);
    }
    m
}

fn main() -> personasage::Result<()> {
    let mut stream = RandomStream::new(3);
    let (x, k) = match std::env::args().nth(1) {
        Some(dir) => {
            let b = load_bundle(dir)?;
            let k = b.num_classes();
            (min_max_normalize(&b.features), k)
        }
        None => (blobs(&mut stream), 3),
    };
    for clusterer in [Clusterer::Ward, Clusterer::KMeans] {
        let started = std::time::Instant::now();
        let labels = clusterer.cluster(&x, k, &mut stream)?;
        println!("{clusterer}: sizes {:?} ({:.2?})", labels.sizes(), started.elapsed());
        if labels.len() <= 30 {
            println!("  labels {:?}", labels.labels());
        }
        let one_hot = labels_to_one_hot(&labels);
        println!("  node 0 membership {:?}", one_hot.row(0));
    }
    Ok(())
}
