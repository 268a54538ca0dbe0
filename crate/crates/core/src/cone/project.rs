//! Float projection data: per-face projectors, the Moreau decomposition and
//! skeleton location.

use std::collections::HashMap;

use serde::Serialize;

use super::DualRep;
use crate::error::{Error, Result};
use crate::faces::FaceLattice;
use crate::numerics::linalg::{complement_basis, orthonormal_span, projector};
use crate::numerics::matrix::{dot_f64, norm};
use crate::numerics::{Matrix, Rng, Scalar, FLOAT_RANK_TOL};

/// Relative tolerance of the projection acceptance tests.
pub const PROJ_TOL: f64 = 1e-9;

/// `(Π_C(x), Π_{C°}(x))` with the faces whose relative interiors contain them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoreauPair {
    pub primal: Vec<f64>,
    pub polar: Vec<f64>,
    /// Face of `C` whose relative interior contains the primal part.
    pub primal_face: usize,
    /// Face `F` of `C` whose normal cone `C° ∩ F^⊥` has the polar part in its
    /// relative interior, when that is well defined.
    pub polar_face: Option<usize>,
}

/// Per-face float data.
#[derive(Clone, Debug)]
pub struct FaceGeom {
    pub id: usize,
    pub dim: usize,
    pub facets: Vec<usize>,
    pub rays: Vec<usize>,
    projector: Vec<f64>,
    /// Orthonormal basis of the span.
    pub basis: Vec<Vec<f64>>,
    /// Orthonormal basis of the orthogonal complement of the span.
    pub complement: Vec<Vec<f64>>,
}

impl FaceGeom {
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot_f64(&self.projector[i * d..(i + 1) * d], x);
        }
    }

    /// Standard Gaussian vector of the span, expressed in ambient coordinates.
    pub fn sample_span(&self, rng: &mut Rng, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for b in &self.basis {
            let g = rng.normal();
            for (o, bi) in out.iter_mut().zip(b) {
                *o += g * bi;
            }
        }
    }

    /// Standard Gaussian vector of the orthogonal complement of the span.
    pub fn sample_complement(&self, rng: &mut Rng, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for b in &self.complement {
            let g = rng.normal();
            for (o, bi) in out.iter_mut().zip(b) {
                *o += g * bi;
            }
        }
    }
}

/// Float view of a cone used by all estimators.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub d: usize,
    pub facets: Vec<Vec<f64>>,
    pub equalities: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
    pub faces: Vec<FaceGeom>,
    by_facets: HashMap<Vec<usize>, usize>,
    by_rays: HashMap<Vec<usize>, usize>,
    minimal: usize,
    top: usize,
}

fn unit_rows<S: Scalar>(vs: &[Vec<S>]) -> Vec<Vec<f64>> {
    vs.iter()
        .map(|v| {
            let mut w: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
            f64::normalize_dir(&mut w);
            w
        })
        .collect()
}

impl Geometry {
    pub fn build<S: Scalar>(d: usize, dual: &DualRep<S>, lattice: &FaceLattice<S>) -> Geometry {
        let faces: Vec<FaceGeom> = lattice
            .faces
            .iter()
            .map(|f| {
                let span = f.span_basis.to_f64();
                let basis = if span.ncols() == 0 {
                    Matrix::zeros(d, 0)
                } else {
                    orthonormal_span(&span, FLOAT_RANK_TOL)
                };
                let comp = complement_basis(&basis, FLOAT_RANK_TOL);
                let comp = if comp.ncols() == 0 { comp } else { orthonormal_span(&comp, FLOAT_RANK_TOL) };
                let projector = projector(&basis).as_slice().to_vec();
                FaceGeom {
                    id: f.id,
                    dim: f.dim,
                    facets: f.facets.clone(),
                    rays: f.rays.clone(),
                    projector,
                    basis: basis.col_vecs(),
                    complement: comp.col_vecs(),
                }
            })
            .collect();
        let by_facets = faces.iter().map(|f| (f.facets.clone(), f.id)).collect();
        let by_rays = faces.iter().map(|f| (f.rays.clone(), f.id)).collect();
        let minimal = 0;
        let top = faces.len() - 1;
        Geometry {
            d,
            facets: unit_rows(&dual.facets),
            equalities: super::orthonormalize(unit_rows(&dual.equalities)),
            rays: unit_rows(&dual.rays),
            lineality: super::orthonormalize(unit_rows(&dual.lineality)),
            faces,
            by_facets,
            by_rays,
            minimal,
            top,
        }
    }

    pub fn face_by_facets(&self, facets: &[usize]) -> Option<usize> {
        self.by_facets.get(facets).copied()
    }

    pub fn face_by_rays(&self, rays: &[usize]) -> Option<usize> {
        self.by_rays.get(rays).copied()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let t = tol * norm(x);
        self.facets.iter().all(|a| dot_f64(a, x) <= t) && self.equalities.iter().all(|e| dot_f64(e, x).abs() <= t)
    }

    /// `x ∈ C°`.
    pub fn polar_contains(&self, x: &[f64], tol: f64) -> bool {
        let t = tol * norm(x);
        self.rays.iter().all(|r| dot_f64(r, x) <= t) && self.lineality.iter().all(|l| dot_f64(l, x).abs() <= t)
    }

    fn tight_facets(&self, y: &[f64], t: f64) -> Vec<usize> {
        (0..self.facets.len()).filter(|&i| dot_f64(&self.facets[i], y) >= -t).collect()
    }

    fn tight_rays(&self, y: &[f64], t: f64) -> Vec<usize> {
        (0..self.rays.len()).filter(|&j| dot_f64(&self.rays[j], y) >= -t).collect()
    }

    /// Moreau decomposition by face enumeration: the face `F` with
    /// `P_F x ∈ C` and `x − P_F x ∈ C°` gives `Π_C(x) = P_F x`.
    pub fn project(&self, x: &[f64]) -> Result<MoreauPair> {
        let d = self.d;
        let scale = norm(x);
        if scale == 0.0 {
            return Ok(MoreauPair {
                primal: vec![0.0; d],
                polar: vec![0.0; d],
                primal_face: self.minimal,
                polar_face: Some(self.top),
            });
        }
        let t = PROJ_TOL * scale;
        let mut y = vec![0.0; d];
        let mut cand = None;
        if self.contains(x, PROJ_TOL) {
            y.copy_from_slice(x);
            cand = self.face_by_facets(&self.tight_facets(&y, t));
        } else if self.polar_contains(x, PROJ_TOL) {
            cand = Some(self.minimal);
        } else {
            for f in &self.faces {
                f.project_into(x, &mut y);
                if self.accepts(x, &y, t) {
                    cand = Some(f.id);
                    break;
                }
            }
            let Some(c) = cand else { return Err(Error::AmbiguousProjection) };
            // the face is the one whose tight set matches that of y
            let f0 = self.face_by_facets(&self.tight_facets(&y, t)).ok_or(Error::AmbiguousProjection)?;
            if f0 != c {
                self.faces[f0].project_into(x, &mut y);
                if !self.accepts(x, &y, t) {
                    return Err(Error::AmbiguousProjection);
                }
            }
            cand = Some(f0);
        }
        let primal_face = cand.ok_or(Error::AmbiguousProjection)?;
        if primal_face == self.minimal && !self.contains(x, PROJ_TOL) {
            self.faces[self.minimal].project_into(x, &mut y);
        }
        let polar: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let polar_face = if norm(&polar) == 0.0 {
            Some(self.top)
        } else {
            self.face_by_rays(&self.tight_rays(&polar, t))
        };
        Ok(MoreauPair { primal: y, polar, primal_face, polar_face })
    }

    fn accepts(&self, x: &[f64], y: &[f64], t: f64) -> bool {
        if !self.facets.iter().all(|a| dot_f64(a, y) <= t) {
            return false;
        }
        self.rays.iter().all(|r| {
            let v: f64 = r.iter().zip(x.iter().zip(y)).map(|(ri, (xi, yi))| ri * (xi - yi)).sum();
            v <= t
        })
    }

    /// Skeleton index of a Moreau pair: `Some(k)` when the pair lies in the
    /// lifted `k`-skeleton (primal and polar parts in matching relative interiors).
    pub fn skeleton_of(&self, p: &MoreauPair) -> Option<usize> {
        match p.polar_face {
            Some(f) if f == p.primal_face => Some(self.faces[f].dim),
            _ => None,
        }
    }

    pub fn locate(&self, y: &[f64]) -> Result<(usize, usize)> {
        if !self.contains(y, PROJ_TOL) {
            return Err(Error::NotInCone);
        }
        let t = PROJ_TOL * norm(y);
        let id = self.face_by_facets(&self.tight_facets(y, t)).ok_or(Error::AmbiguousProjection)?;
        Ok((self.faces[id].dim, id))
    }

    /// Face `F` such that `y'` lies in the relative interior of `C° ∩ F^⊥`.
    pub fn locate_polar(&self, yp: &[f64]) -> Result<(usize, usize)> {
        if !self.polar_contains(yp, PROJ_TOL) {
            return Err(Error::NotInCone);
        }
        let t = PROJ_TOL * norm(yp);
        let id = self.face_by_rays(&self.tight_rays(yp, t)).ok_or(Error::AmbiguousProjection)?;
        Ok((self.faces[id].dim, id))
    }
}

impl<S: Scalar> super::Cone<S> {
    /// `(Π_C(x), Π_{C°}(x))`.
    pub fn project(&self, x: &[f64]) -> Result<MoreauPair> {
        self.geometry().project(x)
    }
}
