//! Conic and biconic sets: positively homogeneous membership predicates plus
//! the structured forms (products, lifts) on which conjunction and
//! disjunction can be computed.

use std::fmt;
use std::sync::Arc;

use crate::cone::project::PROJ_TOL;
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::numerics::linalg::inverse;
use crate::numerics::matrix::{dot_f64, norm};
use crate::numerics::{Matrix, Rational, Rng, Scalar};

pub type ConicPredicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
pub type BiconicPredicate = Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>;

/// Relative tolerance of the orthogonality test in biconic lifts.
pub const LIFT_TOL: f64 = 1e-9;

#[derive(Clone)]
pub enum ConicKind {
    Full,
    ZeroOnly,
    /// `ℝ^d ∖ {0}`.
    Star,
    FromCone(Arc<Cone<f64>>),
    /// Nonzero `x` with `⟨x/‖x‖, axis⟩ ≥ cos` (axis stored with unit length).
    Cap { axis: Vec<f64>, cos: f64 },
    Complement(Box<ConicSet>),
    Union(Vec<ConicSet>),
    Intersection(Vec<ConicSet>),
    /// `T M`, stored through `T⁻¹`.
    Image { t_inv: Matrix<f64>, inner: Box<ConicSet> },
    /// `M × N` with `M ⊆ ℝ^a`, `N ⊆ ℝ^b`.
    Product(Box<ConicSet>, Box<ConicSet>),
    /// Pure, reentrant, positively homogeneous predicate.
    Predicate(ConicPredicate),
}

/// A conic subset of `ℝ^d`.
#[derive(Clone)]
pub struct ConicSet {
    pub d: usize,
    pub kind: ConicKind,
}

impl fmt::Debug for ConicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConicKind::Full => write!(f, "Full({})", self.d),
            ConicKind::ZeroOnly => write!(f, "ZeroOnly({})", self.d),
            ConicKind::Star => write!(f, "Star({})", self.d),
            ConicKind::FromCone(c) => write!(f, "FromCone({c:?})"),
            ConicKind::Cap { axis, cos } => write!(f, "Cap({axis:?}, {cos})"),
            ConicKind::Complement(m) => write!(f, "Complement({m:?})"),
            ConicKind::Union(ms) => write!(f, "Union({ms:?})"),
            ConicKind::Intersection(ms) => write!(f, "Intersection({ms:?})"),
            ConicKind::Image { inner, .. } => write!(f, "Image({inner:?})"),
            ConicKind::Product(a, b) => write!(f, "Product({a:?}, {b:?})"),
            ConicKind::Predicate(_) => write!(f, "Predicate({})", self.d),
        }
    }
}

impl ConicSet {
    pub fn full(d: usize) -> ConicSet {
        ConicSet { d, kind: ConicKind::Full }
    }

    pub fn zero_only(d: usize) -> ConicSet {
        ConicSet { d, kind: ConicKind::ZeroOnly }
    }

    pub fn star(d: usize) -> ConicSet {
        ConicSet { d, kind: ConicKind::Star }
    }

    pub fn from_cone<S: Scalar>(c: &Cone<S>) -> ConicSet {
        ConicSet { d: c.dim(), kind: ConicKind::FromCone(Arc::new(c.to_f64())) }
    }

    pub fn cap(axis: &[f64], cos: f64) -> ConicSet {
        let mut axis = axis.to_vec();
        f64::normalize_dir(&mut axis);
        ConicSet { d: axis.len(), kind: ConicKind::Cap { axis, cos } }
    }

    pub fn complement(self) -> ConicSet {
        ConicSet { d: self.d, kind: ConicKind::Complement(Box::new(self)) }
    }

    pub fn union(sets: Vec<ConicSet>) -> Result<ConicSet> {
        let d = common_dim(&sets)?;
        Ok(ConicSet { d, kind: ConicKind::Union(sets) })
    }

    pub fn intersection(sets: Vec<ConicSet>) -> Result<ConicSet> {
        let d = common_dim(&sets)?;
        Ok(ConicSet { d, kind: ConicKind::Intersection(sets) })
    }

    /// `M ∩ N`, simplified when both sides are cones or trivial.
    pub fn intersect(&self, other: &ConicSet) -> Result<ConicSet> {
        use ConicKind::*;
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        Ok(match (&self.kind, &other.kind) {
            (Full, _) => other.clone(),
            (_, Full) => self.clone(),
            (FromCone(a), FromCone(b)) => ConicSet { d: self.d, kind: FromCone(Arc::new(a.intersect(b)?)) },
            _ => ConicSet::intersection(vec![self.clone(), other.clone()])?,
        })
    }

    pub fn predicate(d: usize, f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> ConicSet {
        ConicSet { d, kind: ConicKind::Predicate(Arc::new(f)) }
    }

    /// `M × N`.
    pub fn product(&self, other: &ConicSet) -> ConicSet {
        ConicSet { d: self.d + other.d, kind: ConicKind::Product(Box::new(self.clone()), Box::new(other.clone())) }
    }

    /// `T M` for a nonsingular float `T`.
    pub fn image(&self, t: &Matrix<f64>) -> Result<ConicSet> {
        check_square(t, self.d)?;
        Ok(match &self.kind {
            ConicKind::Full | ConicKind::ZeroOnly | ConicKind::Star => {
                inverse(t)?;
                self.clone()
            }
            ConicKind::FromCone(c) => ConicSet { d: self.d, kind: ConicKind::FromCone(Arc::new(c.linear_image(t)?)) },
            _ => ConicSet { d: self.d, kind: ConicKind::Image { t_inv: inverse(t)?, inner: Box::new(self.clone()) } },
        })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.d);
        match &self.kind {
            ConicKind::Full => true,
            ConicKind::ZeroOnly => x.iter().all(|v| *v == 0.0),
            ConicKind::Star => x.iter().any(|v| *v != 0.0),
            ConicKind::FromCone(c) => c.contains_f64(x, PROJ_TOL),
            ConicKind::Cap { axis, cos } => {
                let n = norm(x);
                n > 0.0 && dot_f64(x, axis) >= cos * n
            }
            ConicKind::Complement(m) => !m.contains(x),
            ConicKind::Union(ms) => ms.iter().any(|m| m.contains(x)),
            ConicKind::Intersection(ms) => ms.iter().all(|m| m.contains(x)),
            ConicKind::Image { t_inv, inner } => inner.contains(&t_inv.mul_vec(x)),
            ConicKind::Product(a, b) => a.contains(&x[..a.d]) && b.contains(&x[a.d..]),
            ConicKind::Predicate(f) => f(x),
        }
    }

    /// `M ∪ {0}`.
    pub fn with_origin(self) -> ConicSet {
        let d = self.d;
        ConicSet { d, kind: ConicKind::Union(vec![self, ConicSet::zero_only(d)]) }
    }

    /// `M + N`, when it is computable from the structure.
    pub fn minkowski_sum(&self, other: &ConicSet) -> Result<ConicSet> {
        use ConicKind::*;
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        match (&self.kind, &other.kind) {
            (ZeroOnly, _) => Ok(other.clone()),
            (_, ZeroOnly) => Ok(self.clone()),
            (Full, Full | FromCone(_)) | (FromCone(_), Full) => Ok(ConicSet::full(self.d)),
            (FromCone(a), FromCone(b)) => Ok(ConicSet { d: self.d, kind: FromCone(Arc::new(a.minkowski_sum(b)?)) }),
            _ => Err(Error::UnsupportedKind("Minkowski sum of unstructured conic sets")),
        }
    }

    /// Checks `λM = M` on `trials` random points with `λ ∈ (0, 10]`.
    pub fn is_homogeneous_on(&self, rng: &mut Rng, trials: usize) -> bool {
        (0..trials).all(|_| {
            let x: Vec<f64> = (0..self.d).map(|_| rng.normal()).collect();
            let lambda = 10.0 * (1.0 - rng.uniform());
            let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            self.contains(&x) == self.contains(&y)
        })
    }
}

fn common_dim(sets: &[ConicSet]) -> Result<usize> {
    let Some(first) = sets.first() else {
        return Err(Error::InvalidConfig("empty list of conic sets".into()));
    };
    for s in sets {
        if s.d != first.d {
            return Err(Error::DimensionMismatch { expected: first.d, found: s.d });
        }
    }
    Ok(first.d)
}

fn check_square(t: &Matrix<f64>, d: usize) -> Result<()> {
    if t.nrows() != d || t.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: t.nrows() });
    }
    Ok(())
}

#[derive(Clone)]
pub enum BiconicKind {
    Full,
    Product(ConicSet, ConicSet),
    UnionOfProducts(Vec<(ConicSet, ConicSet)>),
    /// `BL(C) = {(x, x') ∈ C × C° : ⟨x, x'⟩ = 0}`.
    Lift(Arc<Cone<f64>>),
    /// `𝒮_k(C)`: `x` in the relative interior of a `k`-face `F`, `x'` in the
    /// relative interior of `C° ∩ span(F)^⊥`.
    LiftedSkeleton(Arc<Cone<f64>>, usize),
    Rev(Box<BiconicSet>),
    /// `T𝓜`, stored through `T⁻¹` and `Tᵀ = (T°)⁻¹`.
    GlImage { t: Matrix<f64>, t_inv: Matrix<f64>, t_adj_inv: Matrix<f64>, inner: Box<BiconicSet> },
    Intersection(Vec<BiconicSet>),
    /// `𝓜 ⊗̂ 𝓝`.
    BiconicProduct(Box<BiconicSet>, Box<BiconicSet>),
    Predicate(BiconicPredicate),
}

/// A biconic subset of `ℝ^d × ℝ^d`.
#[derive(Clone)]
pub struct BiconicSet {
    pub d: usize,
    pub kind: BiconicKind,
}

impl fmt::Debug for BiconicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            BiconicKind::Full => write!(f, "Full({})", self.d),
            BiconicKind::Product(a, b) => write!(f, "Product({a:?}, {b:?})"),
            BiconicKind::UnionOfProducts(ps) => write!(f, "UnionOfProducts({ps:?})"),
            BiconicKind::Lift(c) => write!(f, "Lift({c:?})"),
            BiconicKind::LiftedSkeleton(c, k) => write!(f, "LiftedSkeleton({c:?}, {k})"),
            BiconicKind::Rev(m) => write!(f, "Rev({m:?})"),
            BiconicKind::GlImage { inner, .. } => write!(f, "GlImage({inner:?})"),
            BiconicKind::Intersection(ms) => write!(f, "Intersection({ms:?})"),
            BiconicKind::BiconicProduct(a, b) => write!(f, "BiconicProduct({a:?}, {b:?})"),
            BiconicKind::Predicate(_) => write!(f, "Predicate({})", self.d),
        }
    }
}

impl BiconicSet {
    pub fn full(d: usize) -> BiconicSet {
        BiconicSet { d, kind: BiconicKind::Full }
    }

    pub fn product(first: ConicSet, second: ConicSet) -> Result<BiconicSet> {
        if first.d != second.d {
            return Err(Error::DimensionMismatch { expected: first.d, found: second.d });
        }
        Ok(BiconicSet { d: first.d, kind: BiconicKind::Product(first, second) })
    }

    pub fn union_of_products(parts: Vec<(ConicSet, ConicSet)>) -> Result<BiconicSet> {
        let Some((a, _)) = parts.first() else {
            return Err(Error::InvalidConfig("empty union of products".into()));
        };
        let d = a.d;
        for (m, mp) in &parts {
            if m.d != d || mp.d != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.d.max(mp.d) });
            }
        }
        Ok(BiconicSet { d, kind: BiconicKind::UnionOfProducts(parts) })
    }

    pub fn lift<S: Scalar>(c: &Cone<S>) -> BiconicSet {
        BiconicSet { d: c.dim(), kind: BiconicKind::Lift(Arc::new(c.to_f64())) }
    }

    pub fn lifted_skeleton<S: Scalar>(c: &Cone<S>, k: usize) -> BiconicSet {
        BiconicSet { d: c.dim(), kind: BiconicKind::LiftedSkeleton(Arc::new(c.to_f64()), k) }
    }

    pub fn predicate(d: usize, f: impl Fn(&[f64], &[f64]) -> bool + Send + Sync + 'static) -> BiconicSet {
        BiconicSet { d, kind: BiconicKind::Predicate(Arc::new(f)) }
    }

    pub fn intersection(sets: Vec<BiconicSet>) -> Result<BiconicSet> {
        let Some(first) = sets.first() else {
            return Err(Error::InvalidConfig("empty list of biconic sets".into()));
        };
        let d = first.d;
        if let Some(s) = sets.iter().find(|s| s.d != d) {
            return Err(Error::DimensionMismatch { expected: d, found: s.d });
        }
        Ok(BiconicSet { d, kind: BiconicKind::Intersection(sets) })
    }

    /// `𝓜 ∩ 𝓝`, componentwise on products.
    pub fn intersect(&self, other: &BiconicSet) -> Result<BiconicSet> {
        if let (BiconicKind::Product(m, mp), BiconicKind::Product(n, np)) = (&self.kind, &other.kind) {
            return BiconicSet::product(m.intersect(n)?, mp.intersect(np)?);
        }
        BiconicSet::intersection(vec![self.clone(), other.clone()])
    }

    pub fn contains(&self, x: &[f64], xp: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(xp.len(), self.d);
        match &self.kind {
            BiconicKind::Full => true,
            BiconicKind::Product(m, mp) => m.contains(x) && mp.contains(xp),
            BiconicKind::UnionOfProducts(ps) => ps.iter().any(|(m, mp)| m.contains(x) && mp.contains(xp)),
            BiconicKind::Lift(c) => {
                let g = c.geometry();
                g.contains(x, PROJ_TOL)
                    && g.polar_contains(xp, PROJ_TOL)
                    && dot_f64(x, xp).abs() <= LIFT_TOL * (1.0 + norm(x) * norm(xp))
            }
            BiconicKind::LiftedSkeleton(c, k) => {
                let g = c.geometry();
                match (g.locate(x), g.locate_polar(xp)) {
                    (Ok((dim, f)), Ok((_, f2))) => dim == *k && f == f2,
                    _ => false,
                }
            }
            BiconicKind::Rev(m) => m.contains(xp, x),
            BiconicKind::GlImage { t_inv, t_adj_inv, inner, .. } => {
                inner.contains(&t_inv.mul_vec(x), &t_adj_inv.mul_vec(xp))
            }
            BiconicKind::Intersection(ms) => ms.iter().all(|m| m.contains(x, xp)),
            BiconicKind::BiconicProduct(a, b) => {
                let k = a.d;
                a.contains(&x[..k], &xp[..k]) && b.contains(&x[k..], &xp[k..])
            }
            BiconicKind::Predicate(f) => f(x, xp),
        }
    }

    /// `rev(𝓜) = {(x', x) : (x, x') ∈ 𝓜}`, simplified on structured kinds.
    pub fn rev(&self) -> BiconicSet {
        let d = self.d;
        let kind = match &self.kind {
            BiconicKind::Full => BiconicKind::Full,
            BiconicKind::Product(m, mp) => BiconicKind::Product(mp.clone(), m.clone()),
            BiconicKind::UnionOfProducts(ps) => {
                BiconicKind::UnionOfProducts(ps.iter().map(|(m, mp)| (mp.clone(), m.clone())).collect())
            }
            BiconicKind::Lift(c) => BiconicKind::Lift(Arc::new(c.polar())),
            BiconicKind::LiftedSkeleton(c, k) => BiconicKind::LiftedSkeleton(Arc::new(c.polar()), d - k),
            BiconicKind::Rev(m) => return (**m).clone(),
            _ => BiconicKind::Rev(Box::new(self.clone())),
        };
        BiconicSet { d, kind }
    }

    /// `T𝓜 = {(Tx, T°x') : (x, x') ∈ 𝓜}` for a nonsingular rational `T`.
    pub fn gl_action(&self, t: &Matrix<Rational>) -> Result<BiconicSet> {
        inverse(t)?;
        self.gl_action_f64(&t.to_f64())
    }

    /// Float version of [`BiconicSet::gl_action`].
    pub fn gl_action_f64(&self, t: &Matrix<f64>) -> Result<BiconicSet> {
        check_square(t, self.d)?;
        let t_inv = inverse(t)?;
        let t_adj = t_inv.transpose();
        let d = self.d;
        let kind = match &self.kind {
            BiconicKind::Full => BiconicKind::Full,
            BiconicKind::Product(m, mp) => BiconicKind::Product(m.image(t)?, mp.image(&t_adj)?),
            BiconicKind::UnionOfProducts(ps) => BiconicKind::UnionOfProducts(
                ps.iter().map(|(m, mp)| Ok((m.image(t)?, mp.image(&t_adj)?))).collect::<Result<_>>()?,
            ),
            BiconicKind::Lift(c) => BiconicKind::Lift(Arc::new(c.linear_image(t)?)),
            BiconicKind::LiftedSkeleton(c, k) => BiconicKind::LiftedSkeleton(Arc::new(c.linear_image(t)?), *k),
            _ => BiconicKind::GlImage {
                t: t.clone(),
                t_adj_inv: t.transpose(),
                t_inv,
                inner: Box::new(self.clone()),
            },
        };
        Ok(BiconicSet { d, kind })
    }

    /// Pointwise-evaluated `T𝓜` without structural simplification.
    pub fn gl_wrap(&self, t: &Matrix<f64>) -> Result<BiconicSet> {
        check_square(t, self.d)?;
        Ok(BiconicSet {
            d: self.d,
            kind: BiconicKind::GlImage {
                t: t.clone(),
                t_inv: inverse(t)?,
                t_adj_inv: t.transpose(),
                inner: Box::new(self.clone()),
            },
        })
    }

    /// `𝓜 ⊗̂ 𝓝 ⊆ ℝ^{d+e} × ℝ^{d+e}`.
    pub fn biconic_product(&self, other: &BiconicSet) -> BiconicSet {
        let d = self.d + other.d;
        let kind = match (&self.kind, &other.kind) {
            (BiconicKind::Lift(c), BiconicKind::Lift(e)) => BiconicKind::Lift(Arc::new(c.product(e))),
            (BiconicKind::Product(m, mp), BiconicKind::Product(n, np)) => {
                BiconicKind::Product(m.product(n), mp.product(np))
            }
            _ => BiconicKind::BiconicProduct(Box::new(self.clone()), Box::new(other.clone())),
        };
        BiconicSet { d, kind }
    }

    /// Pushes reversal and linear images through products and lifts, and
    /// rewrites `Full` as a product.
    fn structured(&self) -> Result<BiconicSet> {
        let d = self.d;
        Ok(match &self.kind {
            BiconicKind::Full => BiconicSet::product(ConicSet::full(d), ConicSet::full(d))?,
            BiconicKind::Product(..) | BiconicKind::UnionOfProducts(_) | BiconicKind::Lift(_) => self.clone(),
            BiconicKind::Rev(m) => {
                let inner = m.structured()?;
                match inner.kind {
                    BiconicKind::Rev(_) => return Err(Error::UnsupportedKind("reversal of an unstructured set")),
                    _ => inner.rev(),
                }
            }
            BiconicKind::GlImage { t, inner, .. } => {
                let s = inner.structured()?;
                let img = s.gl_action_f64(t)?;
                if matches!(img.kind, BiconicKind::GlImage { .. }) {
                    return Err(Error::UnsupportedKind("linear image of an unstructured set"));
                }
                img
            }
            BiconicKind::LiftedSkeleton(..) => return Err(Error::UnsupportedKind("lifted skeleton")),
            BiconicKind::Intersection(_) => return Err(Error::UnsupportedKind("biconic intersection")),
            BiconicKind::BiconicProduct(..) => return Err(Error::UnsupportedKind("biconic product")),
            BiconicKind::Predicate(_) => return Err(Error::UnsupportedKind("predicate")),
        })
    }

    fn products(&self) -> Option<Vec<(ConicSet, ConicSet)>> {
        match &self.kind {
            BiconicKind::Product(m, mp) => Some(vec![(m.clone(), mp.clone())]),
            BiconicKind::UnionOfProducts(ps) => Some(ps.clone()),
            _ => None,
        }
    }

    /// `𝓜 ∧ 𝓝 = {(x, x' + y') : (x, x') ∈ 𝓜, (x, y') ∈ 𝓝}`.
    pub fn wedge(&self, other: &BiconicSet) -> Result<BiconicSet> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        let (a, b) = (self.structured()?, other.structured()?);
        if let (BiconicKind::Lift(c), BiconicKind::Lift(e)) = (&a.kind, &b.kind) {
            return Ok(BiconicSet { d: a.d, kind: BiconicKind::Lift(Arc::new(c.intersect(e)?)) });
        }
        let (Some(ps), Some(qs)) = (a.products(), b.products()) else {
            return Err(Error::UnsupportedKind("conjunction of a lift with a product"));
        };
        let mut out = Vec::new();
        for (m, mp) in &ps {
            for (n, np) in &qs {
                out.push((m.intersect(n)?, mp.minkowski_sum(np)?));
            }
        }
        simplify_union(out)
    }

    /// `𝓜 ∨ 𝓝 = rev(rev 𝓜 ∧ rev 𝓝)`.
    pub fn vee(&self, other: &BiconicSet) -> Result<BiconicSet> {
        let a = self.structured()?.rev();
        let b = other.structured()?.rev();
        Ok(a.wedge(&b)?.rev())
    }

    /// Checks `(λx, λ'x') ∈ 𝓜 ⟺ (x, x') ∈ 𝓜` on random points; the points
    /// are drawn from `sample` so that members are actually hit.
    pub fn is_homogeneous_on(
        &self,
        rng: &mut Rng,
        trials: usize,
        mut sample: impl FnMut(&mut Rng) -> (Vec<f64>, Vec<f64>),
    ) -> bool {
        (0..trials).all(|_| {
            let (x, xp) = sample(rng);
            let l1 = 10.0 * (1.0 - rng.uniform());
            let l2 = 10.0 * (1.0 - rng.uniform());
            let y: Vec<f64> = x.iter().map(|v| v * l1).collect();
            let yp: Vec<f64> = xp.iter().map(|v| v * l2).collect();
            self.contains(&x, &xp) == self.contains(&y, &yp)
        })
    }
}

fn simplify_union(mut parts: Vec<(ConicSet, ConicSet)>) -> Result<BiconicSet> {
    if parts.len() == 1 {
        let (m, mp) = parts.pop().expect("one part");
        BiconicSet::product(m, mp)
    } else {
        BiconicSet::union_of_products(parts)
    }
}
