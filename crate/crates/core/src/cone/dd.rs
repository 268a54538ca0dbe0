//! Conversion between inequality and generator descriptions.
//!
//! Desk-scale method: the lineality space is the null space of the rows, and
//! every extreme ray is the one-dimensional solution of a row subset of size
//! `rank − 1` together with orthogonality to the lineality space.

use crate::numerics::linalg::{null_space_tol, rank_tol};
use crate::numerics::matrix::dot;
use crate::numerics::{Matrix, Scalar, FLOAT_RANK_TOL};

/// Feasibility tolerance for float cones (rows and rays are unit vectors).
pub const FEAS_TOL: f64 = 1e-9;

pub fn feas_tol<S: Scalar>() -> f64 {
    if S::EXACT {
        0.0
    } else {
        FEAS_TOL
    }
}

/// Extreme rays and a lineality basis of `{x : a·x ≤ 0 for a in rows}`.
pub fn generators_of<S: Scalar>(d: usize, rows: &[Vec<S>]) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
    let a = Matrix::from_rows(d, rows);
    let n = null_space_tol(&a, FLOAT_RANK_TOL);
    let mut lineality: Vec<Vec<S>> = n.col_vecs();
    for l in lineality.iter_mut() {
        S::normalize_dir(l);
    }
    let r = d - lineality.len();
    let mut rays: Vec<Vec<S>> = Vec::new();
    if r == 0 {
        return (rays, lineality);
    }
    let tol = feas_tol::<S>();
    let m = rows.len();
    let mut subset: Vec<usize> = Vec::with_capacity(r - 1);
    let check = |subset: &[usize], rays: &mut Vec<Vec<S>>| {
        let mut sys: Vec<Vec<S>> = subset.iter().map(|&i| rows[i].clone()).collect();
        sys.extend(lineality.iter().cloned());
        let mat = Matrix::from_rows(d, &sys);
        if rank_tol(&mat, FLOAT_RANK_TOL) != d - 1 {
            return;
        }
        let ns = null_space_tol(&mat, FLOAT_RANK_TOL);
        let mut x = ns.col(0);
        S::normalize_dir(&mut x);
        let vals: Vec<S> = rows.iter().map(|row| dot(row, &x)).collect();
        let nonpos = vals.iter().all(|v| v.sign(tol) != std::cmp::Ordering::Greater);
        let nonneg = vals.iter().all(|v| v.sign(tol) != std::cmp::Ordering::Less);
        let cand = if nonpos {
            x
        } else if nonneg {
            x.into_iter().map(|v| -v).collect()
        } else {
            return;
        };
        if !rays.iter().any(|q| same_dir(q, &cand)) {
            rays.push(cand);
        }
    };
    combinations(m, r - 1, &mut subset, 0, &mut |s| check(s, &mut rays));
    (rays, lineality)
}

fn same_dir<S: Scalar>(a: &[S], b: &[S]) -> bool {
    if S::EXACT {
        a == b
    } else {
        a.iter().zip(b).all(|(x, y)| (x.to_f64() - y.to_f64()).abs() <= 1e-9)
    }
}

fn combinations(
    m: usize,
    k: usize,
    cur: &mut Vec<usize>,
    start: usize,
    f: &mut dyn FnMut(&[usize]),
) {
    if cur.len() == k {
        f(cur);
        return;
    }
    let need = k - cur.len();
    for i in start..=(m.saturating_sub(need)) {
        if i >= m {
            break;
        }
        cur.push(i);
        combinations(m, k, cur, i + 1, f);
        cur.pop();
    }
}
