//! Face lattices, skeleton location, the `f`/`ℓ` vectors and general position.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::cone::dd::feas_tol;
use crate::cone::{Cone, DualRep};
use crate::error::Result;
use crate::numerics::linalg::{column_basis, complement_basis, rank_tol};
use crate::numerics::matrix::dot;
use crate::numerics::{Matrix, Scalar, FLOAT_RANK_TOL};

/// Rank tolerance for general-position checks on rotated (float) cones.
pub const GP_RANK_TOL: f64 = 1e-8;

/// A face `F = C ∩ span(F)`.
#[derive(Clone, Debug)]
pub struct Face<S> {
    pub id: usize,
    /// Indices into the irredundant rows (facets, then ± equalities) that vanish on `F`.
    pub tight_set: Vec<usize>,
    /// Indices into the generators (rays, then ± lineality) lying on `F`.
    pub generators: Vec<usize>,
    pub dim: usize,
    /// Basis of `span(F)`, one vector per column.
    pub span_basis: Matrix<S>,
    /// Facets (indices into the facet list) containing `F`.
    pub facets: Vec<usize>,
    /// Extreme rays (indices into the ray list) lying on `F`.
    pub rays: Vec<usize>,
}

/// All faces of a cone, sorted by dimension.
#[derive(Clone, Debug)]
pub struct FaceLattice<S> {
    pub d: usize,
    pub faces: Vec<Face<S>>,
    by_facets: HashMap<Vec<usize>, usize>,
    by_rays: HashMap<Vec<usize>, usize>,
}

/// Length-`(d+1)` vector indexed by dimension (f, ℓ, u, v, ...).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeVector {
    pub values: Vec<f64>,
    pub integral: bool,
}

impl ConeVector {
    pub fn integral(values: Vec<usize>) -> ConeVector {
        ConeVector { values: values.into_iter().map(|v| v as f64).collect(), integral: true }
    }

    pub fn real(values: Vec<f64>) -> ConeVector {
        ConeVector { values, integral: false }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_usize(&self) -> Vec<usize> {
        self.values.iter().map(|v| v.round() as usize).collect()
    }

    /// Convolution, the rule for products of cones.
    pub fn convolve(&self, other: &ConeVector) -> ConeVector {
        ConeVector { values: convolve(&self.values, &other.values), integral: self.integral && other.integral }
    }

    pub fn alternating_sum(&self) -> f64 {
        self.values.iter().enumerate().map(|(k, v)| if k % 2 == 0 { *v } else { -*v }).sum()
    }

    pub fn reversed(&self) -> ConeVector {
        let mut values = self.values.clone();
        values.reverse();
        ConeVector { values, integral: self.integral }
    }
}

pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl<S: Scalar> FaceLattice<S> {
    /// Closure from the top face: adding one facet at a time to the tight set
    /// reaches every face; faces are identified by their set of extreme rays.
    pub fn build(d: usize, dual: &DualRep<S>) -> FaceLattice<S> {
        let tol = feas_tol::<S>();
        let nf = dual.facets.len();
        let nr = dual.rays.len();
        let nl = dual.lineality.len();
        let ne = dual.equalities.len();
        let tight: Vec<Vec<bool>> = dual
            .facets
            .iter()
            .map(|a| dual.rays.iter().map(|r| dot(a, r).is_zero_tol(tol)).collect())
            .collect();
        let closure = |rays: &BTreeSet<usize>| -> Vec<usize> {
            (0..nf).filter(|&i| rays.iter().all(|&j| tight[i][j])).collect()
        };

        let top: BTreeSet<usize> = (0..nr).collect();
        let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
        let mut found: Vec<(BTreeSet<usize>, Vec<usize>)> = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(top.iter().copied().collect(), ());
        queue.push_back((top.clone(), closure(&top)));
        while let Some((rays, facets)) = queue.pop_front() {
            for i in 0..nf {
                if facets.contains(&i) {
                    continue;
                }
                let sub: BTreeSet<usize> = rays.iter().copied().filter(|&j| tight[i][j]).collect();
                let key: Vec<usize> = sub.iter().copied().collect();
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, ());
                let cl = closure(&sub);
                queue.push_back((sub, cl));
            }
            found.push((rays, facets));
        }

        let mut faces: Vec<Face<S>> = found
            .into_iter()
            .map(|(rays, facets)| {
                let mut cols: Vec<Vec<S>> = rays.iter().map(|&j| dual.rays[j].clone()).collect();
                cols.extend(dual.lineality.iter().cloned());
                let span_basis = column_basis(&Matrix::from_cols(d, &cols), FLOAT_RANK_TOL);
                let dim = span_basis.ncols();
                let mut tight_set: Vec<usize> = facets.clone();
                tight_set.extend(nf..nf + 2 * ne);
                let mut generators: Vec<usize> = rays.iter().copied().collect();
                generators.extend(nr..nr + 2 * nl);
                Face { id: 0, tight_set, generators, dim, span_basis, facets, rays: rays.into_iter().collect() }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.rays.cmp(&b.rays)));
        let mut by_facets = HashMap::new();
        let mut by_rays = HashMap::new();
        for (i, f) in faces.iter_mut().enumerate() {
            f.id = i;
            by_facets.insert(f.facets.clone(), i);
            by_rays.insert(f.rays.clone(), i);
        }
        FaceLattice { d, faces, by_facets, by_rays }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Face whose set of containing facets is exactly `facets` (sorted).
    pub fn face_by_facets(&self, facets: &[usize]) -> Option<usize> {
        self.by_facets.get(facets).copied()
    }

    /// Face whose set of extreme rays is exactly `rays` (sorted).
    pub fn face_by_rays(&self, rays: &[usize]) -> Option<usize> {
        self.by_rays.get(rays).copied()
    }

    pub fn faces_of_dim(&self, k: usize) -> impl Iterator<Item = &Face<S>> {
        self.faces.iter().filter(move |f| f.dim == k)
    }

    pub fn f_vector(&self) -> ConeVector {
        let mut f = vec![0usize; self.d + 1];
        for face in &self.faces {
            f[face.dim] += 1;
        }
        ConeVector::integral(f)
    }
}

impl<S: Scalar> Cone<S> {
    pub fn enumerate_faces(&self) -> &FaceLattice<S> {
        self.lattice()
    }

    /// `𝓛_k(C)`: the spans of the `k`-dimensional faces, as subspace cones.
    pub fn spans_k(&self, k: usize) -> Vec<Cone<S>> {
        self.lattice()
            .faces_of_dim(k)
            .map(|f| {
                let basis = f.span_basis.col_vecs();
                Cone::subspace(self.dim(), &basis).expect("span of a face")
            })
            .collect()
    }

    pub fn f_vector(&self) -> ConeVector {
        self.lattice().f_vector()
    }

    /// Indicator of the lineality at its index.
    pub fn ell_vector(&self) -> ConeVector {
        let mut l = vec![0usize; self.dim() + 1];
        l[self.lineality()] = 1;
        ConeVector::integral(l)
    }

    /// Dimension and id of the face whose relative interior contains `y`.
    pub fn locate_skeleton(&self, y: &[f64]) -> Result<(usize, usize)> {
        self.geometry().locate(y)
    }
}

/// Exact (rational) or tolerance-based (float) general-position test of the
/// face spans of `cones`: every selection of spans, over every sub-family of
/// at least two cones, intersects in the generic dimension.
pub fn is_general_position<S: Scalar>(cones: &[&Cone<S>]) -> bool {
    let Some(first) = cones.first() else { return true };
    let d = first.dim();
    // complement bases of every face span
    let comps: Vec<Vec<(usize, Matrix<S>)>> = cones
        .iter()
        .map(|c| {
            c.lattice()
                .faces
                .iter()
                .map(|f| (f.dim, complement_basis(&f.span_basis, FLOAT_RANK_TOL).transpose()))
                .collect()
        })
        .collect();
    let n = cones.len();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut choice = vec![0usize; members.len()];
        loop {
            let mut dims = 0usize;
            let mut rows: Vec<Vec<S>> = Vec::new();
            let mut has_zero = false;
            for (slot, &i) in members.iter().enumerate() {
                let (k, comp) = &comps[i][choice[slot]];
                dims += k;
                has_zero |= *k == 0;
                rows.extend(comp.row_vecs());
            }
            if !has_zero {
                let s = members.len();
                let expected = dims.saturating_sub((s - 1) * d);
                let inter = d - rank_tol(&Matrix::from_rows(d, &rows), GP_RANK_TOL);
                if inter != expected {
                    return false;
                }
            }
            // next selection
            let mut pos = 0;
            loop {
                if pos == members.len() {
                    break;
                }
                choice[pos] += 1;
                if choice[pos] < comps[members[pos]].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == members.len() {
                break;
            }
        }
    }
    true
}

/// Checks `dims` against the general-position formula for one selection.
pub fn generic_intersection_dim(d: usize, dims: &[usize]) -> usize {
    let s = dims.len();
    if s == 0 {
        return d;
    }
    dims.iter().sum::<usize>().saturating_sub((s - 1) * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::numerics::{sample_gaussian, sample_haar_orthogonal, Rational, Rng};

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::integer(x)).collect()
    }

    #[test]
    fn subspace_has_one_face() {
        let l = Cone::subspace(3, &[q(&[1, 0, 0]), q(&[0, 1, 1])]).unwrap();
        assert_eq!(l.lattice().len(), 1);
        assert_eq!(l.f_vector().as_usize(), vec![0, 0, 1, 0]);
    }

    #[test]
    fn orthant_f_vector() {
        let c = Cone::<Rational>::orthant(3);
        assert_eq!(c.f_vector().as_usize(), vec![1, 3, 3, 1]);
        let h = Cone::half_space(2, q(&[0, -1])).unwrap();
        assert_eq!(h.f_vector().as_usize(), vec![0, 1, 1]);
    }

    #[test]
    fn spans_examples() {
        let full = Cone::<Rational>::full(3);
        assert_eq!(full.spans_k(3).len(), 1);
        let quad = Cone::<Rational>::orthant(2);
        let s1 = quad.spans_k(1);
        assert_eq!(s1.len(), 2);
        let e1 = Cone::subspace(2, &[q(&[1, 0])]).unwrap();
        let e2 = Cone::subspace(2, &[q(&[0, 1])]).unwrap();
        assert!(s1.iter().any(|s| s.same_set(&e1, 0.0)));
        assert!(s1.iter().any(|s| s.same_set(&e2, 0.0)));
    }

    fn zoo_like() -> Vec<Cone<Rational>> {
        vec![
            Cone::orthant(2),
            Cone::orthant(3),
            Cone::half_space(3, q(&[1, 0, 0])).unwrap(),
            Cone::ray(2, q(&[1, 1])).unwrap(),
            Cone::from_i64_generators(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]).unwrap(),
            Cone::from_i64_rows(3, &[&[-1, 0, 0], &[0, -1, 0]]).unwrap(),
        ]
    }

    #[test]
    fn polar_reverses_f_and_euler() {
        for c in zoo_like() {
            let f = c.f_vector();
            assert_eq!(c.polar().f_vector(), f.reversed());
            assert_eq!(f.alternating_sum(), 0.0);
            let d = c.dim();
            for k in 0..=d {
                assert_eq!(c.spans_k(k).len(), f.as_usize()[k]);
            }
        }
    }

    #[test]
    fn polar_span_bijection() {
        for c in zoo_like() {
            let d = c.dim();
            let p = c.polar();
            for k in 0..=d {
                let comps: Vec<Cone<Rational>> = c.spans_k(k).iter().map(|s| s.polar()).collect();
                let other = p.spans_k(d - k);
                assert_eq!(comps.len(), other.len());
                for s in &comps {
                    assert!(other.iter().any(|o| o.same_set(s, 0.0)));
                }
            }
        }
    }

    #[test]
    fn product_f_is_convolution() {
        let a = Cone::<Rational>::orthant(2);
        let b = Cone::<Rational>::orthant(1);
        let p = a.product(&b);
        assert_eq!(p.f_vector(), a.f_vector().convolve(&b.f_vector()));
        // spans of the product are products of spans
        for k in 0..=3 {
            let mut expect = 0;
            for i in 0..=k.min(2) {
                if k - i <= 1 {
                    expect += a.spans_k(i).len() * b.spans_k(k - i).len();
                }
            }
            assert_eq!(p.spans_k(k).len(), expect);
        }
    }

    #[test]
    fn ell_examples() {
        let h = Cone::half_space(3, q(&[1, 0, 0])).unwrap();
        assert_eq!(h.ell_vector().as_usize(), vec![0, 0, 1, 0]);
        let quad = Cone::<Rational>::orthant(2);
        assert_eq!(quad.ell_vector().values[0], quad.f_vector().values[0]);
    }

    #[test]
    fn locate_examples() {
        let quad = Cone::<Rational>::orthant(2);
        let (k, _) = quad.locate_skeleton(&[0.0, 0.0]).unwrap();
        assert_eq!(k, 0);
        let (k, id) = quad.locate_skeleton(&[1.0, 0.0]).unwrap();
        assert_eq!(k, 1);
        let span = &quad.lattice().faces[id].span_basis;
        assert_eq!(span.col(0), q(&[1, 0]));
        assert_eq!(quad.locate_skeleton(&[1.0, 2.0]).unwrap().0, 2);
        assert_eq!(quad.locate_skeleton(&[-1.0, 2.0]), Err(Error::NotInCone));
        let h = Cone::half_space(3, q(&[1, 0, 0])).unwrap();
        assert_eq!(h.locate_skeleton(&[0.0, 0.0, 0.0]).unwrap().0, 2);
    }

    #[test]
    fn general_position_examples() {
        let e1 = Cone::subspace(2, &[q(&[1, 0])]).unwrap();
        let e2 = Cone::subspace(2, &[q(&[0, 1])]).unwrap();
        let z = Cone::<Rational>::zero(2);
        assert!(!is_general_position(&[&e1, &e1]));
        assert!(is_general_position(&[&e1, &e2]));
        assert!(is_general_position(&[&e1, &e1, &z]) == is_general_position(&[&e1, &e1]));
        assert!(is_general_position(&[&z, &e2]));
    }

    #[test]
    fn rotated_cones_are_generic() {
        let mut rng = Rng::new(8);
        let pairs = [
            (Cone::<Rational>::orthant(3), Cone::half_space(3, q(&[1, 0, 0])).unwrap()),
            (Cone::orthant(3), Cone::orthant(3)),
        ];
        for (c, d) in &pairs {
            let (cf, df) = (c.to_f64(), d.to_f64());
            for _ in 0..100 {
                let qm = sample_haar_orthogonal(3, &mut rng);
                let qc = cf.linear_image(&qm).unwrap();
                assert!(is_general_position(&[&qc, &df]));
            }
        }
    }

    #[test]
    fn relative_interiors_partition() {
        let c = Cone::from_i64_generators(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]).unwrap();
        let g = c.geometry();
        let mut rng = Rng::new(12);
        let mut hits = vec![0usize; c.lattice().len()];
        for _ in 0..10_000 {
            let x = sample_gaussian(3, &mut rng);
            let p = g.project(&x).unwrap();
            let (k, id) = c.locate_skeleton(&p.primal).unwrap();
            assert_eq!(k, c.lattice().faces[id].dim);
            hits[id] += 1;
        }
        // every face but none is hit by some projection
        assert!(hits.iter().all(|&h| h > 0));
    }

    #[test]
    fn skeleton_of_generic_intersection() {
        let mut rng = Rng::new(21);
        let c0 = Cone::<Rational>::orthant(3).to_f64();
        let c1 = Cone::half_space(3, q(&[1, 1, 0])).unwrap().to_f64();
        for _ in 0..20 {
            let qm = sample_haar_orthogonal(3, &mut rng);
            let r1 = c1.linear_image(&qm).unwrap();
            assert!(is_general_position(&[&c0, &r1]));
            let k = c0.intersect(&r1).unwrap();
            for _ in 0..200 {
                let x = sample_gaussian(3, &mut rng);
                let p = k.geometry().project(&x).unwrap();
                let (kk, _) = k.locate_skeleton(&p.primal).unwrap();
                if kk == 0 {
                    continue;
                }
                let (k0, _) = c0.locate_skeleton(&p.primal).unwrap();
                let (k1, _) = r1.locate_skeleton(&p.primal).unwrap();
                assert_eq!(kk, k0 + k1 - 3);
            }
        }
    }
}
