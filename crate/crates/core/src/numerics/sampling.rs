use super::matrix::Matrix;
use super::rng::Rng;

/// Vector of `d` iid standard normal coordinates.
pub fn sample_gaussian(d: usize, rng: &mut Rng) -> Vec<f64> {
    (0..d).map(|_| rng.normal()).collect()
}

/// Haar-distributed orthogonal matrix.
///
/// QR of a Gaussian matrix by Householder reflections, then each column of Q
/// is multiplied by the sign of the matching diagonal entry of R. Without the
/// sign fix the result is not Haar distributed.
pub fn sample_haar_orthogonal(d: usize, rng: &mut Rng) -> Matrix<f64> {
    // columns of the Gaussian matrix, reduced in place to R
    let mut cols: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.normal()).collect()).collect();
    let mut q = Matrix::<f64>::identity(d);
    let mut signs = vec![1.0; d];
    for k in 0..d {
        let x: Vec<f64> = cols[k][k..].to_vec();
        let alpha = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let s = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        // R[k][k] = -s * alpha
        signs[k] = -s;
        let mut v = x.clone();
        v[0] += s * alpha;
        let vn2: f64 = v.iter().map(|t| t * t).sum();
        if vn2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let p: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum::<f64>() * 2.0 / vn2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= p * vi;
            }
        }
        // Q <- Q H_k (apply on the right)
        for i in 0..d {
            let p: f64 = (0..v.len()).map(|t| q[(i, k + t)] * v[t]).sum::<f64>() * 2.0 / vn2;
            for t in 0..v.len() {
                q[(i, k + t)] -= p * v[t];
            }
        }
    }
    for j in 0..d {
        if signs[j] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_reproducible() {
        let a = sample_gaussian(1, &mut Rng::new(42));
        let b = sample_gaussian(1, &mut Rng::new(42));
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(11);
        let n = 1_000_000;
        let mut mean = [0.0; 3];
        let mut cov = [[0.0; 2]; 2];
        for _ in 0..n {
            let g = sample_gaussian(3, &mut rng);
            for k in 0..3 {
                mean[k] += g[k];
            }
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += g[i] * g[j];
                }
            }
        }
        for m in mean {
            assert!((m / n as f64).abs() < 0.01);
        }
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov[i][j] / n as f64 - target).abs() < 0.01);
            }
        }
    }

    #[test]
    fn haar_is_orthogonal() {
        let mut rng = Rng::new(3);
        for d in 1..6 {
            for _ in 0..20 {
                let q = sample_haar_orthogonal(d, &mut rng);
                let qtq = q.transpose().mul(&q).unwrap();
                assert!(qtq.max_abs_diff(&Matrix::identity(d)) <= 1e-10);
            }
        }
    }

    #[test]
    fn haar_d1_signs_balanced() {
        let mut rng = Rng::new(5);
        let n = 100_000;
        let pos = (0..n).filter(|_| sample_haar_orthogonal(1, &mut rng)[(0, 0)] > 0.0).count();
        assert!((pos as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn haar_first_column_centered_and_rotation_invariant() {
        let mut rng = Rng::new(9);
        let n = 100_000;
        // fixed rotation R: a cyclic permutation with a sign flip
        let r = Matrix::from_vec(3, 3, vec![0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let mut m1 = [0.0; 3];
        let mut m2 = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let q = sample_haar_orthogonal(3, &mut rng);
            let rq = r.mul(&q).unwrap();
            for i in 0..3 {
                m1[i] += q[(i, 0)];
                m2[i] += rq[(i, 0)];
                sq[i] += q[(i, 0)] * q[(i, 0)];
            }
        }
        let nf = n as f64;
        for i in 0..3 {
            assert!((m1[i] / nf).abs() < 0.02);
            // coordinates of a uniform unit vector have variance 1/3
            assert!((sq[i] / nf - 1.0 / 3.0).abs() < 0.01);
            let sigma = (1.0f64 / 3.0 / nf).sqrt();
            assert!(((m1[i] - m2[i]) / nf).abs() <= 4.0 * sigma * 2f64.sqrt());
        }
    }
}
