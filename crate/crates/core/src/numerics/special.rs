use statrs::function::gamma::gamma_ur;

/// `P{χ²_k ≥ r}`. For `k = 0` the distribution is the point mass at 0.
pub fn chi2_survival(k: usize, r: f64) -> f64 {
    assert!(r >= 0.0, "chi2_survival needs r >= 0");
    if k == 0 {
        return if r == 0.0 { 1.0 } else { 0.0 };
    }
    if r == 0.0 {
        return 1.0;
    }
    gamma_ur(k as f64 / 2.0, r / 2.0)
}

/// Binomial coefficient as f64.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
