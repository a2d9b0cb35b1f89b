use super::Matrix;
use crate::error::{Error, Result};

/// Entry-wise maps available to models and the tape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementwise {
    Relu,
    Sigmoid,
    Identity,
    Scale(f64),
}

impl Elementwise {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Elementwise::Relu => x.max(0.0),
            Elementwise::Sigmoid => sigmoid(x),
            Elementwise::Identity => x,
            Elementwise::Scale(c) => c * x,
        }
    }

    /// Derivative expressed through the input `x` and output `y`.
    #[inline]
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Elementwise::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Elementwise::Sigmoid => y * (1.0 - y),
            Elementwise::Identity => 1.0,
            Elementwise::Scale(c) => c,
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn elementwise_map(m: &Matrix, f: Elementwise) -> Matrix {
    let data = m.data().iter().map(|&x| f.apply(x)).collect();
    Matrix::from_vec(m.rows(), m.cols(), data).expect("shape preserved")
}

/// Divides every row by its L1 norm.
pub fn row_l1_normalize(m: &Matrix) -> Result<Matrix> {
    let mut out = m.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let norm: f64 = row.iter().map(|v| v.abs()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroRow { row: r });
        }
        for v in row.iter_mut() {
            *v /= norm;
        }
    }
    Ok(out)
}

/// Below this fraction of nonzeros the row-wise kernel skips more work than
/// the blocked one saves. Both kernels produce identical bits.
const SPARSE_DENSITY: f64 = 0.25;

fn density(m: &Matrix) -> f64 {
    if m.data().is_empty() {
        return 0.0;
    }
    let nnz = m.data().iter().filter(|v| **v != 0.0).count();
    nnz as f64 / m.data().len() as f64
}

/// `a * b`, summing over the shared dimension in ascending order.
///
/// Terms with a zero left operand are skipped. Since partial sums start at
/// `+0.0` and can never become `-0.0`, skipping a `±0.0` product leaves the
/// result bit-identical for finite inputs.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = Matrix::zeros(a.rows(), b.cols());
    if b.cols() == 0 || a.rows() == 0 {
        return Ok(out);
    }
    if density(a) < SPARSE_DENSITY {
        matmul_rowwise(a, b, &mut out);
    } else {
        matmul_blocked(a, b, &mut out);
    }
    Ok(out)
}

fn matmul_rowwise(a: &Matrix, b: &Matrix, out: &mut Matrix) {
    for i in 0..a.rows() {
        let arow = a.row(i);
        let crow = out.row_mut(i);
        for (k, &x) in arow.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (c, &bv) in crow.iter_mut().zip(b.row(k)) {
                *c += x * bv;
            }
        }
    }
}

fn matmul_blocked(a: &Matrix, b: &Matrix, out: &mut Matrix) {
    let n = b.cols();
    let kdim = a.cols();
    let mut i = 0;
    while i + 4 <= a.rows() {
        let (a0, a1, a2, a3) = (a.row(i), a.row(i + 1), a.row(i + 2), a.row(i + 3));
        let block = &mut out.data_mut()[i * n..(i + 4) * n];
        let (c0, rest) = block.split_at_mut(n);
        let (c1, rest) = rest.split_at_mut(n);
        let (c2, c3) = rest.split_at_mut(n);
        for k in 0..kdim {
            let (x0, x1, x2, x3) = (a0[k], a1[k], a2[k], a3[k]);
            if x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0 {
                continue;
            }
            let brow = b.row(k);
            for j in 0..n {
                let bv = brow[j];
                c0[j] += x0 * bv;
                c1[j] += x1 * bv;
                c2[j] += x2 * bv;
                c3[j] += x3 * bv;
            }
        }
        i += 4;
    }
    for r in i..a.rows() {
        let arow = a.row(r);
        let crow = out.row_mut(r);
        for (k, &x) in arow.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (c, &bv) in crow.iter_mut().zip(b.row(k)) {
                *c += x * bv;
            }
        }
    }
}

/// `aᵀ * b` without materializing the transpose; sums over rows of `a` in
/// ascending order.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            op: "matmul_tn",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (m, kdim, n) = (a.rows(), a.cols(), b.cols());
    let mut out = Matrix::zeros(kdim, n);
    if n == 0 || kdim == 0 {
        return Ok(out);
    }
    // Output rows are processed in bands small enough to stay cache resident.
    const BAND: usize = 64;
    let mut start = 0;
    while start < kdim {
        let end = (start + BAND).min(kdim);
        let mut i = 0;
        while i + 4 <= m {
            let (b0, b1, b2, b3) = (b.row(i), b.row(i + 1), b.row(i + 2), b.row(i + 3));
            let (a0, a1, a2, a3) = (a.row(i), a.row(i + 1), a.row(i + 2), a.row(i + 3));
            for k in start..end {
                let (x0, x1, x2, x3) = (a0[k], a1[k], a2[k], a3[k]);
                if x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0 {
                    continue;
                }
                let orow = out.row_mut(k);
                for j in 0..n {
                    orow[j] = (((orow[j] + x0 * b0[j]) + x1 * b1[j]) + x2 * b2[j]) + x3 * b3[j];
                }
            }
            i += 4;
        }
        for r in i..m {
            let brow = b.row(r);
            let arow = a.row(r);
            for k in start..end {
                let x = arow[k];
                if x == 0.0 {
                    continue;
                }
                for (o, &bv) in out.row_mut(k).iter_mut().zip(brow) {
                    *o += x * bv;
                }
            }
        }
        start = end;
    }
    Ok(out)
}

/// `a * bᵀ`; each entry is a dot product over ascending column index.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(Error::ShapeMismatch {
            op: "matmul_nt",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        let arow = a.row(i);
        for k in 0..b.rows() {
            let mut acc = 0.0;
            for (x, y) in arow.iter().zip(b.row(k)) {
                acc += x * y;
            }
            out.set(i, k, acc);
        }
    }
    Ok(out)
}
