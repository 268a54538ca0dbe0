use super::matrix::{dot_f64, norm, Matrix};
use super::scalar::{Scalar, FLOAT_RANK_TOL};
use crate::error::{Error, Result};

/// Absolute pivot threshold used for `m`: zero for exact scalars, otherwise
/// `rel_tol` times the largest column norm.
pub fn pivot_tol<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> f64 {
    if S::EXACT {
        return 0.0;
    }
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        let n: f64 = (0..m.nrows()).map(|i| m[(i, j)].to_f64().powi(2)).sum::<f64>().sqrt();
        best = best.max(n);
    }
    rel_tol * best
}

/// Reduced row echelon form. Returns the reduced matrix and its pivot columns.
pub fn rref<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> (Matrix<S>, Vec<usize>) {
    let tol = pivot_tol(m, rel_tol);
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // exact: first nonzero entry; float: largest magnitude
        let mut piv = None;
        let mut best = tol;
        for i in r..rows {
            let v = &a[(i, c)];
            if S::EXACT {
                if !v.is_zero_tol(0.0) {
                    piv = Some(i);
                    break;
                }
            } else if v.magnitude() > best {
                best = v.magnitude();
                piv = Some(i);
            }
        }
        let Some(p) = piv else {
            if !S::EXACT {
                for i in r..rows {
                    a[(i, c)] = S::zero();
                }
            }
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = S::one() / a[(r, c)].clone();
        for j in c..cols {
            let v = a[(r, j)].clone() * inv.clone();
            a[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero_tol(0.0) {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Rank, exact for rationals and with the default relative tolerance for floats.
pub fn rank<S: Scalar>(m: &Matrix<S>) -> usize {
    rank_tol(m, FLOAT_RANK_TOL)
}

pub fn rank_tol<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    rref(m, rel_tol).1.len()
}

/// Basis of `{x : m x = 0}` as the columns of the returned `cols × nullity` matrix.
pub fn null_space<S: Scalar>(m: &Matrix<S>) -> Matrix<S> {
    null_space_tol(m, FLOAT_RANK_TOL)
}

pub fn null_space_tol<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Matrix::identity(cols);
    }
    let (r, pivots) = rref(m, rel_tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Matrix::zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = S::one();
        for (row, &p) in pivots.iter().enumerate() {
            basis[(p, k)] = -r[(row, f)].clone();
        }
    }
    basis
}

/// Indices of a maximal independent subset of the columns (greedy, left to right).
pub fn independent_columns<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> Vec<usize> {
    if m.is_empty() {
        return Vec::new();
    }
    rref(m, rel_tol).1
}

/// Basis (as columns) of the column span of `m`.
pub fn column_basis<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    let idx = independent_columns(m, rel_tol);
    let cols: Vec<Vec<S>> = idx.iter().map(|&j| m.col(j)).collect();
    Matrix::from_cols(m.nrows(), &cols)
}

/// Basis of the orthogonal complement of the column span of `m`.
pub fn complement_basis<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    null_space_tol(&m.transpose(), rel_tol)
}

pub fn inverse<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let n = m.nrows();
    let mut aug = Matrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, n + i)] = S::one();
    }
    let tol = pivot_tol(m, FLOAT_RANK_TOL);
    // pivot search restricted to the left block
    let (r, pivots) = rref_left(&aug, n, tol);
    if pivots.len() < n {
        return Err(Error::Singular);
    }
    let mut inv = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = r[(i, n + j)].clone();
        }
    }
    Ok(inv)
}

fn rref_left<S: Scalar>(m: &Matrix<S>, left: usize, tol: f64) -> (Matrix<S>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..left {
        if r == rows {
            break;
        }
        let mut piv = None;
        let mut best = tol;
        for i in r..rows {
            let v = &a[(i, c)];
            if S::EXACT {
                if !v.is_zero_tol(0.0) {
                    piv = Some(i);
                    break;
                }
            } else if v.magnitude() > best {
                best = v.magnitude();
                piv = Some(i);
            }
        }
        let Some(p) = piv else { continue };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = S::one() / a[(r, c)].clone();
        for j in 0..cols {
            let v = a[(r, j)].clone() * inv.clone();
            a[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero_tol(0.0) {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..cols {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Solves the square system `m x = b`.
pub fn solve<S: Scalar>(m: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    let inv = inverse(m)?;
    Ok(inv.mul_vec(b))
}

/// Orthonormal basis (columns) of the column span of `v`, whose columns
/// must be linearly independent.
pub fn orthonormal_basis(v: &Matrix<f64>) -> Result<Matrix<f64>> {
    let d = v.nrows();
    let cols = v.col_vecs();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in &cols {
        let mut w = c.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for e in &q {
                let p = dot_f64(&w, e);
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= p * ei;
                }
            }
        }
        let n = norm(&w);
        if n <= FLOAT_RANK_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient);
        }
        w.iter_mut().for_each(|x| *x /= n);
        q.push(w);
    }
    Ok(Matrix::from_cols(d, &q))
}

/// Orthonormal basis of the span of the columns of `v`, which may be dependent.
pub fn orthonormal_span(v: &Matrix<f64>, rel_tol: f64) -> Matrix<f64> {
    let basis = column_basis(v, rel_tol);
    orthonormal_basis(&basis).unwrap_or_else(|_| Matrix::zeros(v.nrows(), 0))
}

/// Orthogonal projector `Q Qᵀ` for an orthonormal column basis `q`.
pub fn projector(q: &Matrix<f64>) -> Matrix<f64> {
    let d = q.nrows();
    let mut p = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            p[(i, j)] = (0..q.ncols()).map(|k| q[(i, k)] * q[(j, k)]).sum();
        }
    }
    p
}

/// Least-squares solution of `a x = b` with `a` of full column rank.
/// Returns the solution and the residual norm.
pub fn least_squares(a: &Matrix<f64>, b: &[f64], rel_tol: f64) -> Result<(Vec<f64>, f64)> {
    let at = a.transpose();
    let ata = at.mul(a)?;
    let atb = at.mul_vec(b);
    if rank_tol(&ata, rel_tol) < a.ncols() {
        return Err(Error::Singular);
    }
    let x = solve(&ata, &atb)?;
    let ax = a.mul_vec(&x);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    Ok((x, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::Rational;
    use proptest::prelude::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64_rows(rows[0].len(), rows)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::<Rational>::identity(3)), 3);
        assert_eq!(rank(&Matrix::<Rational>::zeros(2, 4)), 0);
        assert_eq!(rank(&q(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn null_space_examples() {
        let n = null_space(&q(&[&[1, 0]]));
        assert_eq!(n.ncols(), 1);
        assert_eq!(n.col(0), vec![Rational::integer(0), Rational::integer(1)]);
        assert_eq!(null_space(&Matrix::<Rational>::identity(4)).ncols(), 0);
        let m = q(&[&[1, 1, 1]]);
        let n = null_space(&m);
        assert_eq!(n.ncols(), 2);
        assert_eq!(rank(&n), 2);
        let prod = m.mul(&n).unwrap();
        assert!(prod.row(0).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn orthonormal_basis_examples() {
        let v = Matrix::from_cols(2, &[vec![3.0, 0.0]]);
        let q = orthonormal_basis(&v).unwrap();
        assert_eq!(q.col(0), vec![1.0, 0.0]);
        let id = Matrix::<f64>::identity(3);
        assert!(orthonormal_basis(&id).unwrap().max_abs_diff(&id) < 1e-15);
        let v = Matrix::from_cols(2, &[vec![1.0, 1.0], vec![1.0, 0.0]]);
        let q = orthonormal_basis(&v).unwrap();
        let qtq = q.transpose().mul(&q).unwrap();
        assert!(qtq.max_abs_diff(&Matrix::identity(2)) < 1e-12);
        // same span: projector of q applied to the original columns is the identity on them
        let p = projector(&q);
        let pv = p.mul(&v).unwrap();
        assert!(pv.max_abs_diff(&v) < 1e-12);
    }

    #[test]
    fn orthonormal_basis_rejects_dependent() {
        let v = Matrix::from_cols(2, &[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(orthonormal_basis(&v), Err(Error::RankDeficient));
    }

    #[test]
    fn inverse_and_singular() {
        let m = q(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(2));
        assert_eq!(inverse(&q(&[&[1, 2], &[2, 4]])), Err(Error::Singular));
    }

    #[test]
    fn least_squares_recovers_solution() {
        let a = Matrix::from_cols(3, &[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        let b = a.mul_vec(&[2.0, -1.0]);
        let (x, res) = least_squares(&a, &b, 1e-12).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    fn small_int_matrix() -> impl Strategy<Value = Matrix<Rational>> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..=3, r * c).prop_map(move |v| {
                Matrix::from_vec(r, c, v.into_iter().map(Rational::integer).collect())
            })
        })
    }

    proptest! {
        #[test]
        fn rank_of_transpose(m in small_int_matrix()) {
            prop_assert_eq!(rank(&m), rank(&m.transpose()));
        }

        #[test]
        fn null_space_is_exact(m in small_int_matrix()) {
            let n = null_space(&m);
            prop_assert_eq!(rank(&m) + n.ncols(), m.ncols());
            prop_assert_eq!(rank(&n), n.ncols());
            let prod = m.mul(&n).unwrap();
            for i in 0..prod.nrows() {
                prop_assert!(prod.row(i).iter().all(|x| x.is_zero()));
            }
        }
    }
}
