//! Informational convergence diagnostics.

use ndarray::ArrayView1;

use crate::scalar::Scalar;

/// Split-chain potential scale reduction factor of a single trace.
///
/// The trace is cut into two halves which are treated as separate chains.
/// Returns `None` for traces shorter than four draws or with zero
/// within-half variance.
pub fn split_rhat<T: Scalar>(trace: ArrayView1<'_, T>) -> Option<f64> {
    let n = trace.len() / 2;
    if n < 2 {
        return None;
    }
    let halves = [
        trace.iter().take(n).map(|v| v.as_f64()).collect::<Vec<_>>(),
        trace.iter().skip(trace.len() - n).map(|v| v.as_f64()).collect::<Vec<_>>(),
    ];
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / n as f64).collect();
    let vars: Vec<f64> = halves
        .iter()
        .zip(&means)
        .map(|(h, m)| h.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64)
        .collect();
    let w = (vars[0] + vars[1]) / 2.0;
    if w <= 0.0 {
        return None;
    }
    let grand = (means[0] + means[1]) / 2.0;
    let b = n as f64 * ((means[0] - grand).powi(2) + (means[1] - grand).powi(2));
    let var_plus = (n - 1) as f64 / n as f64 * w + b / n as f64;
    Some((var_plus / w).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    #[test]
    fn stationary_trace_is_near_one() {
        let mut rng = crate::rng::rng_from_seed(4);
        let t = Array1::from_shape_simple_fn(4000, || f64::standard_normal(&mut rng));
        let r = split_rhat(t.view()).unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
    }

    #[test]
    fn drifting_trace_is_flagged() {
        let t = Array1::from_shape_fn(1000, |i| i as f64 * 0.01);
        assert!(split_rhat(t.view()).unwrap() > 1.5);
        assert!(split_rhat(Array1::<f64>::zeros(3).view()).is_none());
    }
}
