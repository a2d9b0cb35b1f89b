use crate::autodiff::{bce_term, log_sum_exp};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Mean binary cross-entropy of logits against 0/1 labels.
pub fn bce_with_logits(logits: &[f64], labels: &[f64]) -> Result<f64> {
    if logits.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "bce_with_logits",
            left: (logits.len(), 1),
            right: (labels.len(), 1),
        });
    }
    if logits.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = logits.iter().zip(labels).map(|(&z, &y)| bce_term(z, y)).sum();
    Ok(total / logits.len() as f64)
}

/// Mean negative log-softmax of the true class.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<f64> {
    if logits.rows() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "softmax_cross_entropy",
            left: logits.shape(),
            right: (labels.len(), 1),
        });
    }
    let mut total = 0.0;
    for (r, &c) in labels.iter().enumerate() {
        if c >= logits.cols() {
            return Err(Error::invalid(format!("class {c} outside 0..{}", logits.cols())));
        }
        let row = logits.row(r);
        total += log_sum_exp(row) - row[c];
    }
    Ok(if labels.is_empty() { 0.0 } else { total / labels.len() as f64 })
}

/// Area under the ROC curve from the Mann-Whitney rank statistic. Tied
/// scores share their average rank, so a tied positive/negative pair counts
/// one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "roc_auc",
            left: (scores.len(), 1),
            right: (labels.len(), 1),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("NaN score passed to roc_auc".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("roc_auc needs both positive and negative labels"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Fraction of positions where prediction and label agree.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "accuracy",
            left: (predictions.len(), 1),
            right: (labels.len(), 1),
        });
    }
    if labels.is_empty() {
        return Err(Error::invalid("accuracy of an empty set"));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Index of the largest entry of each row; ties go to the lowest index.
pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    m.iter_rows()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
