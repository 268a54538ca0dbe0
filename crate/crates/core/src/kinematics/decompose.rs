//! Membership of a Moreau pair of `F(U_0 C_0, …)` in `F(U_0 𝓜_0, …)` by
//! normal-cone decomposition.
//!
//! At a conjunction the polar part splits as `y' = Σ y'_i` with `y'_i` in the
//! orthogonal complement of the span of the face of the `i`-th cone whose
//! relative interior contains `y`. At a disjunction the roles of primal and
//! polar parts are exchanged. For rotations in general position these systems
//! have a unique solution unless the point sits in the minimal face, where the
//! wedge is not pointwise decidable.

use crate::borel::{BiconicKind, BiconicSet};
use crate::cone::project::Geometry;
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::numerics::linalg::least_squares;
use crate::numerics::matrix::norm;
use crate::numerics::Matrix;

use super::formula::Formula;

/// Residual tolerance of the decomposition, relative to `max(1, ‖rhs‖)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Relative rank tolerance of the stacked bases.
const RANK_TOL: f64 = 1e-10;

enum Node {
    /// `None` when the set is trivial on the lift (all of it).
    Var(Option<BiconicSet>),
    Not(Box<Tree>),
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
}

/// Evaluated formula cone with the data needed to decompose at each node.
pub struct Tree {
    pub cone: Cone<f64>,
    node: Node,
    /// Every set below this node is trivial.
    trivial: bool,
}

/// Sets equal to the whole lift `BL(C)` need no test.
pub fn is_trivial_on<S: crate::numerics::Scalar>(set: &BiconicSet, c: &Cone<S>) -> bool {
    match &set.kind {
        BiconicKind::Full => true,
        BiconicKind::Lift(l) => l.same_set(&c.to_f64(), 1e-12),
        _ => false,
    }
}

impl Tree {
    /// `cones[i]` is the rotated cone `U_i C_i`, `sets[i]` the rotated set
    /// `U_i 𝓜_i` or `None` when trivial.
    pub fn build(f: &Formula, cones: &[Cone<f64>], sets: &[Option<BiconicSet>]) -> Result<Tree> {
        Ok(match f {
            Formula::Var(i) => Tree {
                cone: cones[*i].clone(),
                trivial: sets[*i].is_none(),
                node: Node::Var(sets[*i].clone()),
            },
            Formula::Not(a) => {
                let a = Tree::build(a, cones, sets)?;
                Tree { cone: a.cone.polar(), trivial: a.trivial, node: Node::Not(Box::new(a)) }
            }
            Formula::And(a, b) => {
                let (a, b) = (Tree::build(a, cones, sets)?, Tree::build(b, cones, sets)?);
                Tree { cone: a.cone.intersect(&b.cone)?, trivial: a.trivial && b.trivial, node: Node::And(Box::new(a), Box::new(b)) }
            }
            Formula::Or(a, b) => {
                let (a, b) = (Tree::build(a, cones, sets)?, Tree::build(b, cones, sets)?);
                Tree {
                    cone: a.cone.minkowski_sum(&b.cone)?,
                    trivial: a.trivial && b.trivial,
                    node: Node::Or(Box::new(a), Box::new(b)),
                }
            }
        })
    }

    pub fn geometry(&self) -> &Geometry {
        self.cone.geometry()
    }

    /// Whether `(y, y') ∈ BL(cone)` lies in the evaluated set.
    pub fn contains(&self, y: &[f64], yp: &[f64]) -> Result<bool> {
        if self.trivial {
            return Ok(true);
        }
        match &self.node {
            Node::Var(set) => Ok(set.as_ref().is_none_or(|s| s.contains(y, yp))),
            Node::Not(a) => a.contains(yp, y),
            Node::And(a, b) => {
                let (fa, fb) = (face_of(a.geometry(), y)?, face_of(b.geometry(), y)?);
                let parts = split(&a.geometry().faces[fa].complement, &b.geometry().faces[fb].complement, yp)?;
                Ok(a.contains(y, &parts.0)? && b.contains(y, &parts.1)?)
            }
            Node::Or(a, b) => {
                let (fa, fb) = (polar_face_of(a.geometry(), yp)?, polar_face_of(b.geometry(), yp)?);
                let parts = split(&a.geometry().faces[fa].basis, &b.geometry().faces[fb].basis, y)?;
                Ok(a.contains(&parts.0, yp)? && b.contains(&parts.1, yp)?)
            }
        }
    }
}

fn face_of(g: &Geometry, y: &[f64]) -> Result<usize> {
    g.locate(y).map(|(_, id)| id)
}

fn polar_face_of(g: &Geometry, yp: &[f64]) -> Result<usize> {
    g.locate_polar(yp).map(|(_, id)| id)
}

/// Writes `v = p + q` with `p ∈ span(a)`, `q ∈ span(b)`; the bases must be
/// jointly independent and `v` must lie in their sum.
fn split(a: &[Vec<f64>], b: &[Vec<f64>], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = v.len();
    if a.is_empty() {
        let q = project_onto(b, v);
        check(diff_norm(&q, v), v)?;
        return Ok((vec![0.0; d], q));
    }
    if b.is_empty() {
        let p = project_onto(a, v);
        check(diff_norm(&p, v), v)?;
        return Ok((p, vec![0.0; d]));
    }
    if a.len() + b.len() > d {
        return Err(Error::DecompositionSingular);
    }
    let cols: Vec<Vec<f64>> = a.iter().chain(b).cloned().collect();
    let m = Matrix::from_cols(d, &cols);
    let (c, res) = least_squares(&m, v, RANK_TOL).map_err(|_| Error::DecompositionSingular)?;
    check(res, v)?;
    let combine = |basis: &[Vec<f64>], coef: &[f64]| {
        let mut out = vec![0.0; d];
        for (bv, &w) in basis.iter().zip(coef) {
            out.iter_mut().zip(bv).for_each(|(o, x)| *o += w * x);
        }
        out
    };
    Ok((combine(a, &c[..a.len()]), combine(b, &c[a.len()..])))
}

fn project_onto(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for bv in basis {
        let w: f64 = bv.iter().zip(v).map(|(x, y)| x * y).sum();
        out.iter_mut().zip(bv).for_each(|(o, x)| *o += w * x);
    }
    out
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn check(res: f64, v: &[f64]) -> Result<()> {
    if res <= RESIDUAL_TOL * norm(v).max(1.0) {
        Ok(())
    } else {
        Err(Error::DecompositionSingular)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::borel::ConicSet;
    use crate::numerics::{sample_gaussian, sample_haar_orthogonal, Rational, Rng};

    fn rotated(c: &Cone<Rational>, rng: &mut Rng) -> Cone<f64> {
        let q = sample_haar_orthogonal(c.dim(), rng);
        c.to_f64().linear_image(&q).unwrap()
    }

    #[test]
    fn trivial_sets_short_circuit() {
        let c = Cone::<Rational>::orthant(2);
        assert!(is_trivial_on(&BiconicSet::full(2), &c));
        assert!(is_trivial_on(&BiconicSet::lift(&c), &c));
        assert!(!is_trivial_on(&BiconicSet::lift(&Cone::<Rational>::orthant(2).polar()), &c));
    }

    #[test]
    fn conjunction_parts_are_normals_of_the_components() {
        let mut rng = Rng::new(11);
        let c0 = rotated(&Cone::orthant(3), &mut rng);
        let c1 = rotated(&Cone::orthant(3), &mut rng);
        let any = Some(BiconicSet::predicate(3, |_, _| true));
        let tree = Tree::build(&Formula::and_chain(2), &[c0.clone(), c1.clone()], &[any.clone(), any]).unwrap();
        let g = tree.geometry();
        let mut checked = 0;
        for _ in 0..2000 {
            let x = sample_gaussian(3, &mut rng);
            let p = g.project(&x).unwrap();
            if norm(&p.primal) == 0.0 || g.skeleton_of(&p).is_none() {
                continue;
            }
            let (fa, fb) = (face_of(c0.geometry(), &p.primal).unwrap(), face_of(c1.geometry(), &p.primal).unwrap());
            let (ya, yb) =
                split(&c0.geometry().faces[fa].complement, &c1.geometry().faces[fb].complement, &p.polar).unwrap();
            let scale = 1e-8 * (1.0 + norm(&p.polar));
            assert!(c0.geometry().polar_contains(&ya, scale));
            assert!(c1.geometry().polar_contains(&yb, scale));
            assert!(ya.iter().zip(&p.primal).map(|(a, b)| a * b).sum::<f64>().abs() < scale);
            checked += 1;
        }
        assert!(checked > 500);
    }

    #[test]
    fn membership_matches_direct_test_for_single_variable() {
        let mut rng = Rng::new(12);
        let c = rotated(&Cone::orthant(3), &mut rng);
        let cap = ConicSet::cap(&[1.0, 0.0, 0.0], 0.3);
        let set = BiconicSet::product(cap.clone(), ConicSet::full(3)).unwrap();
        let tree = Tree::build(&Formula::var(0), std::slice::from_ref(&c), &[Some(set.clone())]).unwrap();
        for _ in 0..500 {
            let x = sample_gaussian(3, &mut rng);
            let p = c.project(&x).unwrap();
            assert_eq!(tree.contains(&p.primal, &p.polar).unwrap(), set.contains(&p.primal, &p.polar));
        }
        let neg = Tree::build(&Formula::not(Formula::var(0)), std::slice::from_ref(&c), &[Some(set.clone())]).unwrap();
        let pc = c.polar();
        for _ in 0..500 {
            let x = sample_gaussian(3, &mut rng);
            let p = pc.project(&x).unwrap();
            assert_eq!(neg.contains(&p.primal, &p.polar).unwrap(), set.contains(&p.polar, &p.primal));
        }
    }

    #[test]
    fn disjunction_is_dual_to_conjunction() {
        // (y, y') ∈ 𝓜_0 ∨ 𝓜_1  iff  (y', y) ∈ rev 𝓜_0 ∧ rev 𝓜_1 on the polar cones
        let mut rng = Rng::new(13);
        let cones = [rotated(&Cone::orthant(3), &mut rng), rotated(&Cone::orthant(3), &mut rng)];
        let polars: Vec<Cone<f64>> = cones.iter().map(Cone::polar).collect();
        let a = BiconicSet::product(ConicSet::cap(&[1.0, 1.0, 0.0], 0.2), ConicSet::full(3)).unwrap();
        let b = BiconicSet::product(ConicSet::full(3), ConicSet::cap(&[0.0, 1.0, 1.0], 0.1)).unwrap();
        let or = Tree::build(&Formula::or_chain(2), &cones, &[Some(a.clone()), Some(b.clone())]).unwrap();
        let and = Tree::build(&Formula::and_chain(2), &polars, &[Some(a.rev()), Some(b.rev())]).unwrap();
        let mut agree = 0;
        for _ in 0..2000 {
            let x = sample_gaussian(3, &mut rng);
            let p = or.geometry().project(&x).unwrap();
            match (or.contains(&p.primal, &p.polar), and.contains(&p.polar, &p.primal)) {
                (Ok(u), Ok(v)) => {
                    assert_eq!(u, v);
                    agree += 1;
                }
                (Err(_), Err(_)) => {}
                other => panic!("{other:?}"),
            }
        }
        assert!(agree > 1000);
    }

    #[test]
    fn dependent_bases_are_singular() {
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        assert_eq!(split(&[e(0), e(1)], &[e(1), e(2)], &[1.0, 1.0, 1.0]), Err(Error::DecompositionSingular));
        assert_eq!(split(&[e(0)], &[e(1)], &[1.0, 1.0, 1.0]), Err(Error::DecompositionSingular));
        let (p, q) = split(&[e(0)], &[e(1)], &[2.0, 3.0, 0.0]).unwrap();
        assert_eq!((p, q), (e(0).iter().map(|x| 2.0 * x).collect(), e(1).iter().map(|x| 3.0 * x).collect()));
        let (p, q) = split(&[], &[e(1)], &[0.0, 3.0, 0.0]).unwrap();
        assert_eq!(p, vec![0.0; 3]);
        assert_eq!(q, vec![0.0, 3.0, 0.0]);
    }
}
