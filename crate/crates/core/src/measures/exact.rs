//! Closed forms: cones isometric to `ℝ^b × ℝ^a_+`, lineality measures and the
//! right-hand side of the Steiner formula.

use num::ToPrimitive;

use crate::borel::ConicSet;
use crate::cone::dd::feas_tol;
use crate::cone::Cone;
use crate::numerics::matrix::dot;
use crate::numerics::{chi2_survival, Rational, Scalar};

/// Number of extreme rays `a` and lineality `b` when the extreme rays are
/// pairwise orthogonal, so that `C ≅ ℝ^b × ℝ^a_+ × {0}`.
fn orthant_like<S: Scalar>(c: &Cone<S>) -> Option<(usize, usize)> {
    let dual = c.dual();
    let tol = feas_tol::<S>();
    for (i, r) in dual.rays.iter().enumerate() {
        for s in &dual.rays[i + 1..] {
            if !dot(r, s).is_zero_tol(tol) {
                return None;
            }
        }
    }
    Some((dual.rays.len(), dual.lineality.len()))
}

fn binomial_exact(n: usize, k: usize) -> Rational {
    let v = (0..k).fold(num::BigInt::from(1), |acc, i| acc * (n - i) / (i + 1));
    Rational(num::BigRational::from_integer(v))
}

fn pow2_inv(k: usize) -> Rational {
    Rational(num::BigRational::new(1.into(), num::BigInt::from(1) << k))
}

/// Exact `v(C)` for subspaces, half-spaces and products of coordinate-like
/// rays with a subspace: `v = (1/2, 1/2)^{*a}` shifted by the lineality.
pub fn exact_v<S: Scalar>(c: &Cone<S>) -> Option<Vec<Rational>> {
    let (a, b) = orthant_like(c)?;
    let mut v = vec![Rational::integer(0); c.dim() + 1];
    for j in 0..=a {
        v[b + j] = binomial_exact(a, j) * pow2_inv(a);
    }
    Some(v)
}

/// Exact `u(C)` for the same class: `u_{b+j} = binom(a, j) 2^{−j}`.
pub fn exact_u<S: Scalar>(c: &Cone<S>) -> Option<Vec<Rational>> {
    let (a, b) = orthant_like(c)?;
    let mut u = vec![Rational::integer(0); c.dim() + 1];
    for j in 0..=a {
        u[b + j] = binomial_exact(a, j) * pow2_inv(j);
    }
    Some(u)
}

pub fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(|x| x.0.to_f64().unwrap_or(f64::NAN)).collect()
}

/// `Λ_k(C, M) = [lineality(C) = k]·[0 ∈ M]`.
pub fn lin_k<S: Scalar>(c: &Cone<S>, k: usize, m: &ConicSet) -> f64 {
    if c.lineality() == k && m.contains(&vec![0.0; c.dim()]) {
        1.0
    } else {
        0.0
    }
}

/// `Σ_k P{χ²_k ≥ r} v_k`.
pub fn steiner_rhs(v: &[f64], r: f64) -> f64 {
    v.iter().enumerate().map(|(k, vk)| chi2_survival(k, r) * vk).sum()
}
