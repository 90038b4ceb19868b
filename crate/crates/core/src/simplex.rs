//! Probability-simplex helpers.

/// Euclidean projection of `v` onto the probability simplex
/// (sort-and-threshold algorithm).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projection onto `{x >= 0, sum x = mass}`.
pub fn project_scaled_simplex(v: &[f64], mass: f64) -> Vec<f64> {
    if mass <= 0.0 {
        return vec![0.0; v.len()];
    }
    let scaled: Vec<f64> = v.iter().map(|x| x / mass).collect();
    project_simplex(&scaled).into_iter().map(|x| x * mass).collect()
}

/// Numerically stable softmax.
pub fn softmax(s: &[f64]) -> Vec<f64> {
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = s.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Rescales non-negative values to sum to one. Returns `None` when the sum
/// is zero or not finite.
pub fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        Some(v.iter().map(|x| x / s).collect())
    } else {
        None
    }
}

pub fn on_simplex(v: &[f64], tol: f64) -> bool {
    v.iter().all(|x| *x >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol
}
