use super::{Cone, DualRep};
use crate::error::{Error, Result};
use crate::numerics::linalg::inverse;
use crate::numerics::{Matrix, Scalar};

/// `T° = (T⁻¹)ᵀ`, the map that carries `C°` to `(TC)°`.
pub fn inv_adjoint<S: Scalar>(t: &Matrix<S>) -> Result<Matrix<S>> {
    Ok(inverse(t)?.transpose())
}

fn map_all<S: Scalar>(m: &Matrix<S>, vs: &[Vec<S>], normalize: bool) -> Vec<Vec<S>> {
    vs.iter()
        .map(|v| {
            let mut w = m.mul_vec(v);
            if normalize {
                S::normalize_dir(&mut w);
            }
            w
        })
        .collect()
}

fn pad<S: Scalar>(v: &[S], before: usize, after: usize) -> Vec<S> {
    let mut w = vec![S::zero(); before];
    w.extend(v.iter().cloned());
    w.extend(std::iter::repeat_n(S::zero(), after));
    w
}

impl<S: Scalar> Cone<S> {
    /// `C° = {z : ⟨x, z⟩ ≤ 0 for all x ∈ C}`.
    pub fn polar(&self) -> Cone<S> {
        Cone::from_dual(self.dim(), self.dual().polar())
    }

    /// `C × D ⊆ ℝ^{d_C + d_D}`.
    pub fn product(&self, other: &Cone<S>) -> Cone<S> {
        let (a, b) = (self.dim(), other.dim());
        let (p, q) = (self.dual(), other.dual());
        let join = |x: &[Vec<S>], y: &[Vec<S>]| -> Vec<Vec<S>> {
            x.iter().map(|v| pad(v, 0, b)).chain(y.iter().map(|v| pad(v, a, 0))).collect()
        };
        Cone::from_dual(
            a + b,
            DualRep {
                rays: join(&p.rays, &q.rays),
                lineality: join(&p.lineality, &q.lineality),
                facets: join(&p.facets, &q.facets),
                equalities: join(&p.equalities, &q.equalities),
            },
        )
    }

    /// `C ∩ D`, by stacking inequality rows.
    pub fn intersect(&self, other: &Cone<S>) -> Result<Cone<S>> {
        self.check_dim(other)?;
        let rows = self.halfspace_matrix().vstack(&other.halfspace_matrix())?;
        Cone::from_halfspaces(self.dim(), rows)
    }

    /// `C + D`, by concatenating generators.
    pub fn minkowski_sum(&self, other: &Cone<S>) -> Result<Cone<S>> {
        self.check_dim(other)?;
        let mut gens = self.dual().generators();
        gens.extend(other.dual().generators());
        Cone::from_generator_list(self.dim(), &gens)
    }

    /// `T C` for nonsingular `T`: generators map by `T`, rows by `T°`.
    pub fn linear_image(&self, t: &Matrix<S>) -> Result<Cone<S>> {
        if t.nrows() != self.dim() || t.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: t.nrows() });
        }
        let tadj = inv_adjoint(t)?;
        let dual = self.dual();
        let norm = !S::EXACT;
        let mut lineality = map_all(t, &dual.lineality, norm);
        let mut equalities = map_all(&tadj, &dual.equalities, norm);
        if norm {
            lineality = as_s(super::orthonormalize(as_f64(&lineality)));
            equalities = as_s(super::orthonormalize(as_f64(&equalities)));
        }
        // rays must stay orthogonal to the lineality space
        let rays = map_all(t, &dual.rays, norm)
            .into_iter()
            .map(|r| reject(&r, &lineality))
            .collect();
        let facets = map_all(&tadj, &dual.facets, norm)
            .into_iter()
            .map(|r| reject(&r, &equalities))
            .collect();
        Ok(Cone::from_dual(self.dim(), DualRep { rays, lineality, facets, equalities }))
    }

    /// `C ∩ (−C)` as a subspace cone.
    pub fn lineality_space(&self) -> Cone<S> {
        let lin = self.dual().lineality.clone();
        let eq = crate::numerics::linalg::complement_basis(
            &Matrix::from_cols(self.dim(), &lin),
            crate::numerics::FLOAT_RANK_TOL,
        )
        .col_vecs();
        let eq = if S::EXACT { eq } else { as_s(super::orthonormalize(as_f64(&eq))) };
        Cone::from_dual(
            self.dim(),
            DualRep { rays: vec![], lineality: lin, facets: vec![], equalities: eq },
        )
    }

    /// Setwise equality, by mutual containment of generators.
    pub fn same_set(&self, other: &Cone<S>, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.dual().generators().iter().all(|g| other.contains(g, tol))
            && other.dual().generators().iter().all(|g| self.contains(g, tol))
    }

    fn check_dim(&self, other: &Cone<S>) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

// Orthogonal rejection against an orthonormal (float) or any (exact) basis.
// Exact inputs keep rays orthogonal to the lineality already when T preserves
// orthogonality; for general T the exact Gram–Schmidt step below restores it.
fn reject<S: Scalar>(v: &[S], basis: &[Vec<S>]) -> Vec<S> {
    if basis.is_empty() {
        return v.to_vec();
    }
    let d = v.len();
    let b = Matrix::from_cols(d, basis);
    let bt = b.transpose();
    let gram = bt.mul(&b).expect("gram");
    let rhs = bt.mul_vec(v);
    let coef = crate::numerics::linalg::solve(&gram, &rhs).expect("independent basis");
    let proj = b.mul_vec(&coef);
    let mut out: Vec<S> = v.iter().zip(proj).map(|(a, p)| a.clone() - p).collect();
    S::normalize_dir(&mut out);
    out
}

fn as_f64<S: Scalar>(vs: &[Vec<S>]) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.iter().map(|x| x.to_f64()).collect()).collect()
}

fn as_s<S: Scalar>(vs: Vec<Vec<f64>>) -> Vec<Vec<S>> {
    vs.into_iter().map(|v| v.into_iter().map(S::from_f64).collect()).collect()
}
