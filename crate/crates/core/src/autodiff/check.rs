use crate::numeric::Matrix;

/// Compares analytic gradients against central differences.
///
/// `f` evaluates the scalar objective at a full set of parameter values.
/// Returns the largest `|analytic - numeric| / max(1, |numeric|)` over every
/// coordinate of every parameter.
pub fn finite_difference_check<F>(mut f: F, params: &[Matrix], analytic: &[Matrix], eps: f64) -> f64
where
    F: FnMut(&[Matrix]) -> f64,
{
    assert_eq!(params.len(), analytic.len(), "one analytic gradient per parameter");
    let mut work: Vec<Matrix> = params.to_vec();
    let mut worst = 0.0f64;
    for p in 0..params.len() {
        assert_eq!(params[p].shape(), analytic[p].shape(), "gradient shape");
        for k in 0..params[p].data().len() {
            let orig = params[p].data()[k];
            work[p].data_mut()[k] = orig + eps;
            let plus = f(&work);
            work[p].data_mut()[k] = orig - eps;
            let minus = f(&work);
            work[p].data_mut()[k] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let err = (analytic[p].data()[k] - numeric).abs() / numeric.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    worst
}
