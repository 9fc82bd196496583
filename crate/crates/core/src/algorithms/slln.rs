use super::AlgoError;

/// Sample-mean recursion `x_{k+1} = x_k + (y_k − x_k)/(k + 1)` from `x_0 = 0`.
///
/// Returns `n + 1` iterates; `out[k]` is the mean of the first `k` samples.
pub fn slln_estimator(ys: impl IntoIterator<Item = f64>, n: usize) -> Result<Vec<f64>, AlgoError> {
    if n == 0 {
        return Err(AlgoError::InvalidProblem("need at least one sample".into()));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut x = 0.0;
    out.push(x);
    let mut ys = ys.into_iter();
    for k in 0..n {
        let y = ys.next().ok_or_else(|| {
            AlgoError::InvalidProblem(format!("stream ended after {k} of {n} samples"))
        })?;
        let a = 1.0 / (k as f64 + 1.0);
        x += a * (y - x);
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        let out = slln_estimator(std::iter::repeat(2.5), 50).unwrap();
        assert_eq!(out[0], 0.0);
        assert!(out[1..].iter().all(|&x| x == 2.5));
    }

    #[test]
    fn alternating_signs_average_out() {
        let ys = (0..100).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 });
        assert!(slln_estimator(ys, 100).unwrap().last().unwrap().abs() < 1e-15);
    }

    #[test]
    fn empty_stream() {
        assert!(slln_estimator(std::iter::empty(), 1).is_err());
        assert!(slln_estimator([1.0], 0).is_err());
        assert!(slln_estimator([1.0], 2).is_err());
    }
}
