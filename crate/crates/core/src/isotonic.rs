//! Isotonic regression by pool-adjacent-violators, used to enforce
//! monotonicity of Monte-Carlo bias curves before numerical inversion.

/// Least-squares non-decreasing fit to `y` (unit weights).
pub fn isotonic_non_decreasing(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n <= 1 {
        return y.to_vec();
    }
    // Stack of pooled blocks: (block mean, block size).
    let mut mean: Vec<f64> = Vec::with_capacity(n);
    let mut size: Vec<usize> = Vec::with_capacity(n);
    for &v in y {
        mean.push(v);
        size.push(1);
        while mean.len() >= 2 && mean[mean.len() - 2] > mean[mean.len() - 1] {
            let (m2, s2) = (mean.pop().unwrap(), size.pop().unwrap());
            let top = mean.len() - 1;
            let s = size[top] + s2;
            mean[top] = (mean[top] * size[top] as f64 + m2 * s2 as f64) / s as f64;
            size[top] = s;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (m, s) in mean.iter().zip(size.iter()) {
        out.extend(std::iter::repeat(*m).take(*s));
    }
    out
}
