//! Polyhedral cones in inequality (`Ax ≤ 0`) and generator (`cone(B)`) form.

pub mod dd;
mod ops;
pub mod project;

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::faces::FaceLattice;
use crate::numerics::matrix::dot;
use crate::numerics::{Matrix, Rational, Scalar};

pub use ops::inv_adjoint;
pub use project::{Geometry, MoreauPair};

/// Largest number of input constraints or generators accepted.
pub const MAX_INPUTS: usize = 20;
/// Largest ambient dimension accepted.
pub const MAX_DIM: usize = 10;

/// Both descriptions of a cone in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct DualRep<S> {
    /// Extreme rays, orthogonal to the lineality space.
    pub rays: Vec<Vec<S>>,
    /// Basis of the lineality space `C ∩ (−C)`.
    pub lineality: Vec<Vec<S>>,
    /// Irredundant facet normals (extreme rays of the polar).
    pub facets: Vec<Vec<S>>,
    /// Basis of the orthogonal complement of the span of the cone.
    pub equalities: Vec<Vec<S>>,
}

impl<S: Scalar> DualRep<S> {
    /// Generators: rays, then lineality basis, then its negation.
    pub fn generators(&self) -> Vec<Vec<S>> {
        let mut g = self.rays.clone();
        g.extend(self.lineality.iter().cloned());
        g.extend(self.lineality.iter().map(|v| neg(v)));
        g
    }

    /// Inequality rows: facets, then equality basis, then its negation.
    pub fn rows(&self) -> Vec<Vec<S>> {
        let mut r = self.facets.clone();
        r.extend(self.equalities.iter().cloned());
        r.extend(self.equalities.iter().map(|v| neg(v)));
        r
    }

    fn polar(&self) -> DualRep<S> {
        DualRep {
            rays: self.facets.clone(),
            lineality: self.equalities.clone(),
            facets: self.rays.clone(),
            equalities: self.lineality.clone(),
        }
    }
}

pub(crate) fn neg<S: Scalar>(v: &[S]) -> Vec<S> {
    v.iter().map(|x| -x.clone()).collect()
}

/// A polyhedral cone in `ℝ^d`.
///
/// At least one of the two descriptions is present. The other one, the face
/// lattice and the float projection data are computed on first use and
/// cached.
#[derive(Clone)]
pub struct Cone<S: Scalar> {
    d: usize,
    h: Option<Matrix<S>>,
    v: Option<Matrix<S>>,
    dual: OnceLock<Arc<DualRep<S>>>,
    lattice: OnceLock<Arc<FaceLattice<S>>>,
    geometry: OnceLock<Arc<Geometry>>,
}

impl<S: Scalar> fmt::Debug for Cone<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cone").field("d", &self.d).field("h", &self.h).field("v", &self.v).finish()
    }
}

fn guard(d: usize, count: usize) -> Result<()> {
    if d > MAX_DIM {
        return Err(Error::SizeGuard(format!("dimension {d} exceeds {MAX_DIM}")));
    }
    if count > MAX_INPUTS {
        return Err(Error::SizeGuard(format!("{count} inputs exceed {MAX_INPUTS}")));
    }
    Ok(())
}

fn clean_rows<S: Scalar>(rows: Vec<Vec<S>>) -> Vec<Vec<S>> {
    let tol = dd::feas_tol::<S>();
    rows.into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero_tol(if S::EXACT { 0.0 } else { tol * 1e-3 })))
        .map(|mut r| {
            if !S::EXACT {
                S::normalize_dir(&mut r);
            }
            r
        })
        .collect()
}

impl<S: Scalar> Cone<S> {
    fn raw(d: usize, h: Option<Matrix<S>>, v: Option<Matrix<S>>) -> Cone<S> {
        Cone {
            d,
            h,
            v,
            dual: OnceLock::new(),
            lattice: OnceLock::new(),
            geometry: OnceLock::new(),
        }
    }

    /// `{x : A x ≤ 0}`; an empty `A` gives all of `ℝ^d`.
    pub fn from_halfspaces(d: usize, a: Matrix<S>) -> Result<Cone<S>> {
        if a.ncols() != d && a.nrows() > 0 {
            return Err(Error::DimensionMismatch { expected: d, found: a.ncols() });
        }
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        guard(d, a.nrows())?;
        let rows = clean_rows(a.row_vecs());
        Ok(Cone::raw(d, Some(Matrix::from_rows(d, &rows)), None))
    }

    /// `{B y : y ≥ 0}` for the columns of `B`; no columns gives `{0}`.
    pub fn from_generators(d: usize, b: Matrix<S>) -> Result<Cone<S>> {
        if b.nrows() != d && b.ncols() > 0 {
            return Err(Error::DimensionMismatch { expected: d, found: b.nrows() });
        }
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        guard(d, b.ncols())?;
        let cols = clean_rows(b.col_vecs());
        Ok(Cone::raw(d, None, Some(Matrix::from_cols(d, &cols))))
    }

    pub fn from_halfspace_rows(d: usize, rows: &[Vec<S>]) -> Result<Cone<S>> {
        check_lengths(d, rows)?;
        Cone::from_halfspaces(d, Matrix::from_rows(d, rows))
    }

    pub fn from_generator_list(d: usize, gens: &[Vec<S>]) -> Result<Cone<S>> {
        check_lengths(d, gens)?;
        Cone::from_generators(d, Matrix::from_cols(d, gens))
    }

    /// Cone with both descriptions given; they are trusted to agree.
    pub fn from_both(d: usize, a: Matrix<S>, b: Matrix<S>) -> Result<Cone<S>> {
        let c = Cone::from_halfspaces(d, a)?;
        let g = Cone::from_generators(d, b)?;
        Ok(Cone::raw(d, c.h, g.v))
    }

    pub(crate) fn from_dual(d: usize, dual: DualRep<S>) -> Cone<S> {
        let h = Matrix::from_rows(d, &dual.rows());
        let v = Matrix::from_cols(d, &dual.generators());
        let c = Cone::raw(d, Some(h), Some(v));
        let _ = c.dual.set(Arc::new(dual));
        c
    }

    pub fn full(d: usize) -> Cone<S> {
        Cone::from_dual(
            d,
            DualRep { rays: vec![], lineality: unit_vectors(d), facets: vec![], equalities: vec![] },
        )
    }

    pub fn zero(d: usize) -> Cone<S> {
        Cone::from_dual(
            d,
            DualRep { rays: vec![], lineality: vec![], facets: vec![], equalities: unit_vectors(d) },
        )
    }

    /// Nonnegative orthant `ℝ^d_+`.
    pub fn orthant(d: usize) -> Cone<S> {
        Cone::from_dual(
            d,
            DualRep {
                rays: unit_vectors(d),
                lineality: vec![],
                facets: unit_vectors(d).iter().map(|v| neg(v)).collect(),
                equalities: vec![],
            },
        )
    }

    /// Linear span of `basis` (given as vectors), stored with ± generator pairs.
    pub fn subspace(d: usize, basis: &[Vec<S>]) -> Result<Cone<S>> {
        let mut gens: Vec<Vec<S>> = basis.to_vec();
        gens.extend(basis.iter().map(|v| neg(v)));
        Cone::from_generator_list(d, &gens)
    }

    pub fn ray(d: usize, dir: Vec<S>) -> Result<Cone<S>> {
        Cone::from_generator_list(d, &[dir])
    }

    /// Half-space `{x : ⟨a, x⟩ ≤ 0}`.
    pub fn half_space(d: usize, a: Vec<S>) -> Result<Cone<S>> {
        Cone::from_halfspace_rows(d, &[a])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// The inequality description as given (if any).
    pub fn h(&self) -> Option<&Matrix<S>> {
        self.h.as_ref()
    }

    /// The generator description as given (if any), one generator per column.
    pub fn v(&self) -> Option<&Matrix<S>> {
        self.v.as_ref()
    }

    /// Canonical double description, computed on first use.
    pub fn dual(&self) -> &DualRep<S> {
        self.dual.get_or_init(|| Arc::new(self.compute_dual()))
    }

    fn compute_dual(&self) -> DualRep<S> {
        let d = self.d;
        let (rays, lineality) = match (&self.v, &self.h) {
            (Some(v), _) => {
                // generators given: facets first, then rays from the irredundant rows
                let (facets, equalities) = dd::generators_of(d, &v.col_vecs());
                let rows = {
                    let mut r = facets.clone();
                    r.extend(equalities.iter().cloned());
                    r.extend(equalities.iter().map(|x| neg(x)));
                    r
                };
                let (rays, lineality) = dd::generators_of(d, &rows);
                return DualRep { rays, lineality, facets, equalities };
            }
            (None, Some(h)) => dd::generators_of(d, &h.row_vecs()),
            (None, None) => unreachable!("cone without description"),
        };
        let mut gens = rays.clone();
        gens.extend(lineality.iter().cloned());
        gens.extend(lineality.iter().map(|x| neg(x)));
        let (facets, equalities) = dd::generators_of(d, &gens);
        DualRep { rays, lineality, facets, equalities }
    }

    /// Copy with both descriptions populated: generators are the extreme
    /// rays plus ± a lineality basis, rows are irredundant.
    pub fn ensure_dual_rep(&self) -> Cone<S> {
        Cone::from_dual(self.d, self.dual().clone())
    }

    /// Irredundant inequality rows.
    pub fn halfspace_matrix(&self) -> Matrix<S> {
        Matrix::from_rows(self.d, &self.dual().rows())
    }

    /// Generators (extreme rays plus ± lineality basis) as columns.
    pub fn generator_matrix(&self) -> Matrix<S> {
        Matrix::from_cols(self.d, &self.dual().generators())
    }

    pub fn lattice(&self) -> &FaceLattice<S> {
        self.lattice.get_or_init(|| Arc::new(FaceLattice::build(self.d, self.dual())))
    }

    pub fn geometry(&self) -> &Geometry {
        self.geometry.get_or_init(|| Arc::new(Geometry::build(self.d, self.dual(), self.lattice())))
    }

    /// Membership test. Exact for rationals; for floats `Ax ≤ tol·‖x‖`.
    pub fn contains(&self, x: &[S], tol: f64) -> bool {
        assert_eq!(x.len(), self.d, "point dimension");
        let scale = if S::EXACT { 0.0 } else { x.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt() };
        let t = tol * scale;
        let dual = self.dual();
        dual.facets.iter().all(|a| dot(a, x).sign(t) != std::cmp::Ordering::Greater)
            && dual.equalities.iter().all(|a| dot(a, x).is_zero_tol(t))
    }

    pub fn contains_f64(&self, x: &[f64], tol: f64) -> bool {
        self.geometry().contains(x, tol)
    }

    pub fn lineality(&self) -> usize {
        self.dual().lineality.len()
    }

    /// Dimension of the linear span of the cone.
    pub fn span_dim(&self) -> usize {
        self.d - self.dual().equalities.len()
    }

    pub fn is_subspace(&self) -> bool {
        self.dual().rays.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.span_dim() == 0
    }

    pub fn to_f64(&self) -> Cone<f64> {
        let conv = |vs: &Vec<Vec<S>>| -> Vec<Vec<f64>> {
            vs.iter()
                .map(|v| {
                    let mut w: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
                    f64::normalize_dir(&mut w);
                    w
                })
                .collect()
        };
        let dual = self.dual();
        Cone::from_dual(
            self.d,
            DualRep {
                rays: conv(&dual.rays),
                lineality: orthonormalize(conv(&dual.lineality)),
                facets: conv(&dual.facets),
                equalities: orthonormalize(conv(&dual.equalities)),
            },
        )
    }
}

impl Cone<Rational> {
    pub fn from_i64_rows(d: usize, rows: &[&[i64]]) -> Result<Cone<Rational>> {
        let rows: Vec<Vec<Rational>> =
            rows.iter().map(|r| r.iter().map(|&v| Rational::integer(v)).collect()).collect();
        Cone::from_halfspace_rows(d, &rows)
    }

    pub fn from_i64_generators(d: usize, gens: &[&[i64]]) -> Result<Cone<Rational>> {
        let gens: Vec<Vec<Rational>> =
            gens.iter().map(|r| r.iter().map(|&v| Rational::integer(v)).collect()).collect();
        Cone::from_generator_list(d, &gens)
    }
}

pub(crate) fn orthonormalize(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if vs.is_empty() {
        return vs;
    }
    let d = vs[0].len();
    let m = Matrix::from_cols(d, &vs);
    crate::numerics::linalg::orthonormal_span(&m, crate::numerics::FLOAT_RANK_TOL).col_vecs()
}

fn check_lengths<S: Scalar>(d: usize, vs: &[Vec<S>]) -> Result<()> {
    for v in vs {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
    }
    Ok(())
}

pub(crate) fn unit_vectors<S: Scalar>(d: usize) -> Vec<Vec<S>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::integer(x)).collect()
    }

    #[test]
    fn empty_h_is_full_space() {
        let c = Cone::<Rational>::from_halfspaces(2, Matrix::zeros(0, 2)).unwrap();
        assert_eq!(c.lineality(), 2);
        assert!(c.contains(&q(&[-5, 7]), 0.0));
        let cf = c.to_f64();
        assert!(cf.contains_f64(&[3.0, -1.0], 1e-9));
    }

    #[test]
    fn generators_give_quadrant() {
        let c = Cone::from_i64_generators(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert!(c.contains(&q(&[2, 3]), 0.0));
        assert!(!c.contains(&q(&[-1, 3]), 0.0));
        assert_eq!(c.dual().facets.len(), 2);
    }

    #[test]
    fn dual_rep_examples() {
        let c = Cone::from_i64_rows(2, &[&[-1, 0], &[0, -1]]).unwrap();
        let dual = c.dual();
        assert_eq!(dual.rays.len(), 2);
        assert!(dual.rays.contains(&q(&[1, 0])) && dual.rays.contains(&q(&[0, 1])));

        let line = Cone::from_i64_generators(2, &[&[1, 0], &[-1, 0]]).unwrap();
        let h = line.halfspace_matrix();
        assert_eq!(h.nrows(), 2);
        let rows = h.row_vecs();
        assert!(rows.contains(&q(&[0, 1])) && rows.contains(&q(&[0, -1])));

        let zero = Cone::<Rational>::zero(2);
        assert_eq!(zero.generator_matrix().ncols(), 0);
        assert_eq!(zero.halfspace_matrix().nrows(), 4);
    }

    #[test]
    fn octant_agrees_with_generators() {
        let h = Cone::from_i64_rows(3, &[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]]).unwrap().to_f64();
        let v = Cone::<Rational>::from_i64_generators(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])
            .unwrap()
            .to_f64();
        let mut rng = crate::numerics::Rng::new(1);
        for _ in 0..10_000 {
            let x = crate::numerics::sample_gaussian(3, &mut rng);
            assert_eq!(h.contains_f64(&x, 1e-9), v.contains_f64(&x, 1e-9));
        }
    }

    #[test]
    fn size_guard() {
        let rows: Vec<Vec<Rational>> = (0..21).map(|i| q(&[-1, i])).collect();
        assert!(matches!(Cone::from_halfspace_rows(2, &rows), Err(Error::SizeGuard(_))));
        assert!(matches!(Cone::<Rational>::from_halfspaces(11, Matrix::zeros(0, 11)), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            Cone::<Rational>::from_halfspace_rows(3, &[q(&[1, 0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
