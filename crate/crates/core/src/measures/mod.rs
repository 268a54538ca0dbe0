//! Monte Carlo and exact evaluation of intrinsic volumes and their
//! localizations.

pub mod exact;

use rayon::prelude::*;
use serde::Serialize;

use crate::borel::{BiconicSet, ConicSet};
use crate::cone::project::{FaceGeom, Geometry, MoreauPair, PROJ_TOL};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::numerics::matrix::norm;
use crate::numerics::{Rng, Scalar};

pub use exact::{exact_u, exact_v, lin_k, steiner_rhs};

/// Samples per parallel chunk. Chunk `i` always uses `rng.child(i)`, so
/// results do not depend on the number of worker threads.
pub const CHUNK: u64 = 8192;

/// Allowed resampled degenerate draws per 10^6 samples.
pub const DEGENERATE_PER_MILLION: u64 = 10;

pub fn degenerate_allowance(n: u64) -> u64 {
    DEGENERATE_PER_MILLION * n.div_ceil(1_000_000).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub degenerate_drops: u64,
}

impl MCEstimate {
    /// Indicator mean with binomial standard error.
    pub fn from_hits(hits: u64, n: u64, seed: u64, degenerate_drops: u64) -> MCEstimate {
        let p = hits as f64 / n as f64;
        MCEstimate { mean: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n, seed, degenerate_drops }
    }
}

/// `d + 1` indicator estimates drawn from one sample stream.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeVectorEstimate {
    pub entries: Vec<MCEstimate>,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl ConeVectorEstimate {
    fn from_counts(counts: Vec<u64>, n: u64, seed: u64, drops: u64) -> ConeVectorEstimate {
        let entries = counts.iter().map(|&h| MCEstimate::from_hits(h, n, seed, drops)).collect();
        ConeVectorEstimate { entries, counts, n }
    }

    pub fn means(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean).collect()
    }

    pub fn stderrs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.stderr).collect()
    }

    pub fn degenerate_drops(&self) -> u64 {
        self.entries.first().map_or(0, |e| e.degenerate_drops)
    }

    /// `Σ w_k p̂_k` with its standard error; the entries are disjoint
    /// indicators of one sample, so the covariance is multinomial.
    pub fn linear(&self, w: &[f64]) -> (f64, f64) {
        let p = self.means();
        let m: f64 = w.iter().zip(&p).map(|(a, b)| a * b).sum();
        let m2: f64 = w.iter().zip(&p).map(|(a, b)| a * a * b).sum();
        (m, ((m2 - m * m).max(0.0) / self.n as f64).sqrt())
    }
}

/// Sample counts from one estimator pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Counts {
    pub counts: Vec<u64>,
    pub n: u64,
    pub drops: u64,
}

/// Draws `m` Gaussian points with a valid skeleton index and lets `f` pick
/// the slot to increment. Draws whose projection is ambiguous, whose primal
/// and polar faces do not match, or for which `f` reports a numerically
/// degenerate configuration, are redrawn and counted.
pub fn count_chunk<F>(g: &Geometry, m: u64, rng: &mut Rng, slots: usize, drop_limit: u64, f: &F) -> Result<Counts>
where
    F: Fn(&MoreauPair, usize) -> Result<Option<usize>> + ?Sized,
{
    let mut counts = vec![0u64; slots];
    let mut x = vec![0.0; g.d];
    let mut drops = 0;
    let mut done = 0;
    while done < m {
        rng.fill_normal(&mut x);
        let outcome = g.project(&x).and_then(|pair| match g.skeleton_of(&pair) {
            Some(k) => f(&pair, k),
            None => Err(Error::AmbiguousProjection),
        });
        match outcome {
            Ok(slot) => {
                if let Some(s) = slot {
                    counts[s] += 1;
                }
                done += 1;
            }
            Err(Error::AmbiguousProjection | Error::DecompositionSingular | Error::NotInCone) => {
                drops += 1;
                if drops > drop_limit {
                    return Err(Error::DegenerateBudget { count: drops as usize, trials: done as usize });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Counts { counts, n: m, drops })
}

/// Parallel [`count_chunk`] over fixed-size chunks with an ordered reduction.
pub fn count_projections<F>(g: &Geometry, n: u64, rng: &Rng, slots: usize, f: F) -> Result<Counts>
where
    F: Fn(&MoreauPair, usize) -> Option<usize> + Sync,
{
    count_projections_with(g, n, rng, slots, |p: &MoreauPair, k| Ok(f(p, k)))
}

/// [`count_projections`] with a fallible slot function.
pub fn count_projections_with<F>(g: &Geometry, n: u64, rng: &Rng, slots: usize, f: F) -> Result<Counts>
where
    F: Fn(&MoreauPair, usize) -> Result<Option<usize>> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let limit = degenerate_allowance(n);
    let parts: Vec<Counts> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut r = rng.child(c);
            count_chunk(g, CHUNK.min(n - c * CHUNK), &mut r, slots, limit, &f)
        })
        .collect::<Result<_>>()?;
    let mut total = Counts { counts: vec![0; slots], n, drops: 0 };
    for p in parts {
        for (t, c) in total.counts.iter_mut().zip(p.counts) {
            *t += c;
        }
        total.drops += p.drops;
    }
    if total.drops > limit {
        return Err(Error::DegenerateBudget { count: total.drops as usize, trials: n as usize });
    }
    Ok(total)
}

/// `v̂_k = #{g : Π_C(g) ∈ S_k(C)} / n`.
pub fn estimate_v<S: Scalar>(c: &Cone<S>, n: u64, rng: &Rng) -> Result<ConeVectorEstimate> {
    let d = c.dim();
    let counts = count_projections(c.geometry(), n, rng, d + 1, |_, k| Some(k))?;
    Ok(ConeVectorEstimate::from_counts(counts.counts, n, rng.seed(), counts.drops))
}

/// `Φ̂_k(C, M)` for all `k` from one stream.
pub fn phi<S: Scalar>(c: &Cone<S>, m: &ConicSet, n: u64, rng: &Rng) -> Result<ConeVectorEstimate> {
    let d = c.dim();
    let counts = count_projections(c.geometry(), n, rng, d + 1, |p, k| m.contains(&p.primal).then_some(k))?;
    Ok(ConeVectorEstimate::from_counts(counts.counts, n, rng.seed(), counts.drops))
}

pub fn phi_k<S: Scalar>(c: &Cone<S>, k: usize, m: &ConicSet, n: u64, rng: &Rng) -> Result<MCEstimate> {
    Ok(phi(c, m, n, rng)?.entries[k].clone())
}

/// `Θ̂_k(C, 𝓜)` for all `k` from one stream.
pub fn theta<S: Scalar>(c: &Cone<S>, mm: &BiconicSet, n: u64, rng: &Rng) -> Result<ConeVectorEstimate> {
    let d = c.dim();
    let counts =
        count_projections(c.geometry(), n, rng, d + 1, |p, k| mm.contains(&p.primal, &p.polar).then_some(k))?;
    Ok(ConeVectorEstimate::from_counts(counts.counts, n, rng.seed(), counts.drops))
}

pub fn theta_k<S: Scalar>(c: &Cone<S>, k: usize, mm: &BiconicSet, n: u64, rng: &Rng) -> Result<MCEstimate> {
    Ok(theta(c, mm, n, rng)?.entries[k].clone())
}

/// Per-face Gaussian volume `γ_L(C ∩ L ∩ M)` with `L` the span of `face`.
fn face_volume(g: &Geometry, face: &FaceGeom, m: Option<&ConicSet>, n: u64, rng: &Rng) -> (f64, f64) {
    if face.dim == 0 {
        let zero = vec![0.0; g.d];
        let p = f64::from(u8::from(m.is_none_or(|m| m.contains(&zero))));
        return (p, 0.0);
    }
    let hits: u64 = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut r = rng.child(c);
            let mut x = vec![0.0; g.d];
            let mut h = 0;
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                face.sample_span(&mut r, &mut x);
                if g.contains(&x, PROJ_TOL) && m.is_none_or(|m| m.contains(&x)) {
                    h += 1;
                }
            }
            h
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum();
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Per-face `γ_{L^⊥}(C° ∩ L^⊥ ∩ M')`.
fn normal_volume(g: &Geometry, face: &FaceGeom, m: Option<&ConicSet>, n: u64, rng: &Rng) -> (f64, f64) {
    if face.complement.is_empty() {
        let zero = vec![0.0; g.d];
        let p = f64::from(u8::from(m.is_none_or(|m| m.contains(&zero))));
        return (p, 0.0);
    }
    let hits: u64 = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut r = rng.child(c);
            let mut x = vec![0.0; g.d];
            let mut h = 0;
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                face.sample_complement(&mut r, &mut x);
                if g.polar_contains(&x, PROJ_TOL) && m.is_none_or(|m| m.contains(&x)) {
                    h += 1;
                }
            }
            h
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum();
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// `Ψ̂_k(C, M) = Σ_{L ∈ 𝓛_k(C)} γ̂_L(C ∩ L ∩ M)` for all `k`, with
/// `n_per_face` samples in each face span.
pub fn psi<S: Scalar>(c: &Cone<S>, m: Option<&ConicSet>, n_per_face: u64, rng: &Rng) -> Result<Vec<MCEstimate>> {
    if n_per_face == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let g = c.geometry();
    let mut mean = vec![0.0; c.dim() + 1];
    let mut var = vec![0.0; c.dim() + 1];
    for face in &g.faces {
        let (p, s) = face_volume(g, face, m, n_per_face, &rng.child(face.id as u64));
        mean[face.dim] += p;
        var[face.dim] += s * s;
    }
    Ok(mean
        .into_iter()
        .zip(var)
        .map(|(mean, v)| MCEstimate { mean, stderr: v.sqrt(), n: n_per_face, seed: rng.seed(), degenerate_drops: 0 })
        .collect())
}

/// `û(C)`: [`psi`] with `M = ℝ^d`.
pub fn estimate_u<S: Scalar>(c: &Cone<S>, n_per_face: u64, rng: &Rng) -> Result<Vec<MCEstimate>> {
    psi(c, None, n_per_face, rng)
}

pub fn psi_k<S: Scalar>(c: &Cone<S>, k: usize, m: &ConicSet, n_per_face: u64, rng: &Rng) -> Result<MCEstimate> {
    Ok(psi(c, Some(m), n_per_face, rng)?.swap_remove(k))
}

/// `Θ_k(C, M × M') = Σ_{L ∈ 𝓛_k} γ_L(C ∩ L ∩ M) γ_{L^⊥}(C° ∩ L^⊥ ∩ M')` by
/// sampling each face span and its complement separately. With `M = M' = ℝ^d`
/// this is an estimator of `v` that does not use the projection.
pub fn theta_product_per_face<S: Scalar>(
    c: &Cone<S>,
    m: Option<&ConicSet>,
    mp: Option<&ConicSet>,
    n_per_face: u64,
    rng: &Rng,
) -> Result<Vec<MCEstimate>> {
    if n_per_face == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let g = c.geometry();
    let mut mean = vec![0.0; c.dim() + 1];
    let mut var = vec![0.0; c.dim() + 1];
    for face in &g.faces {
        let r = rng.child(face.id as u64);
        let (p, s) = face_volume(g, face, m, n_per_face, &r.child(0));
        let (q, t) = normal_volume(g, face, mp, n_per_face, &r.child(1));
        mean[face.dim] += p * q;
        var[face.dim] += q * q * s * s + p * p * t * t;
    }
    Ok(mean
        .into_iter()
        .zip(var)
        .map(|(mean, v)| MCEstimate { mean, stderr: v.sqrt(), n: n_per_face, seed: rng.seed(), degenerate_drops: 0 })
        .collect())
}

/// Localization of the Steiner formula.
#[derive(Clone, Debug)]
pub enum SteinerSet<'a> {
    Full,
    Conic(&'a ConicSet),
    Biconic(&'a BiconicSet),
}

/// `P̂{Π̂_C(g) ∈ 𝓜 and ‖Π_C(g)‖² ≥ r}` together with the localized measures
/// of an independent stream, from which the right-hand side is formed.
pub fn steiner_lhs<S: Scalar>(c: &Cone<S>, r: f64, set: &SteinerSet<'_>, n: u64, rng: &Rng) -> Result<MCEstimate> {
    if r < 0.0 {
        return Err(Error::InvalidConfig("Steiner radius must be nonnegative".into()));
    }
    let counts = count_projections(c.geometry(), n, rng, 1, |p, _| {
        let inside = match set {
            SteinerSet::Full => true,
            SteinerSet::Conic(m) => m.contains(&p.primal),
            SteinerSet::Biconic(mm) => mm.contains(&p.primal, &p.polar),
        };
        (inside && norm(&p.primal).powi(2) >= r).then_some(0)
    })?;
    Ok(MCEstimate::from_hits(counts.counts[0], n, rng.seed(), counts.drops))
}

/// Estimated localized vector (`v`, `Φ` or `Θ`) matching `set`.
pub fn localized_vector<S: Scalar>(c: &Cone<S>, set: &SteinerSet<'_>, n: u64, rng: &Rng) -> Result<ConeVectorEstimate> {
    match set {
        SteinerSet::Full => estimate_v(c, n, rng),
        SteinerSet::Conic(m) => phi(c, m, n, rng),
        SteinerSet::Biconic(mm) => theta(c, mm, n, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{binomial, chi2_survival, sample_haar_orthogonal, Rational};

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::integer(x)).collect()
    }

    fn square_cone() -> Cone<Rational> {
        Cone::from_i64_generators(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]).unwrap()
    }

    fn test_cones() -> Vec<Cone<Rational>> {
        vec![
            Cone::orthant(2),
            Cone::orthant(3),
            Cone::ray(2, q(&[1, 0])).unwrap(),
            Cone::half_space(3, q(&[0, 0, -1])).unwrap(),
            Cone::from_i64_rows(3, &[&[-1, 0, 0], &[0, -1, 0]]).unwrap(),
            square_cone(),
        ]
    }

    fn within(a: f64, b: f64, sigma: f64) -> bool {
        (a - b).abs() <= 4.0 * sigma + 1e-12
    }

    #[test]
    fn v_of_subspace_is_indicator() {
        let l = Cone::subspace(3, &[q(&[1, 0, 0]), q(&[0, 1, 1])]).unwrap();
        let v = estimate_v(&l, 1000, &Rng::new(1)).unwrap();
        assert_eq!(v.means(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn v_of_orthant4() {
        let c = Cone::<Rational>::orthant(4);
        let v = estimate_v(&c, 1_000_000, &Rng::new(2)).unwrap();
        for (k, m) in v.means().iter().enumerate() {
            assert!((m - binomial(4, k) / 16.0).abs() <= 0.004, "k={k} {m}");
        }
        assert_eq!(v.counts.iter().sum::<u64>(), v.n);
    }

    #[test]
    fn v_of_ray() {
        let c = Cone::ray(2, q(&[1, 0])).unwrap();
        let v = estimate_v(&c, 1_000_000, &Rng::new(3)).unwrap().means();
        assert!((v[0] - 0.5).abs() <= 0.004 && (v[1] - 0.5).abs() <= 0.004 && v[2] == 0.0);
    }

    #[test]
    fn u_examples() {
        let l = Cone::subspace(3, &[q(&[1, 2, 0])]).unwrap();
        let u: Vec<f64> = estimate_u(&l, 100, &Rng::new(4)).unwrap().iter().map(|e| e.mean).collect();
        assert_eq!(u, vec![0.0, 1.0, 0.0, 0.0]);
        let c = Cone::<Rational>::orthant(2);
        let u = estimate_u(&c, 1_000_000, &Rng::new(5)).unwrap();
        assert_eq!(u[0].mean, 1.0);
        assert!((u[1].mean - 1.0).abs() <= 0.004);
        assert!((u[2].mean - 0.25).abs() <= 0.002);
    }

    #[test]
    fn shared_stream_normalization_and_phi_full() {
        let rng = Rng::new(6);
        for c in test_cones() {
            let v = estimate_v(&c, 20_000, &rng).unwrap();
            assert_eq!(v.counts.iter().sum::<u64>(), v.n);
            let p = phi(&c, &ConicSet::full(c.dim()), 20_000, &rng).unwrap();
            assert_eq!(p.counts, v.counts);
            let t = theta(&c, &BiconicSet::full(c.dim()), 20_000, &rng).unwrap();
            assert_eq!(t.counts, v.counts);
            let mt = theta(&c, &BiconicSet::product(ConicSet::cap(&vec![1.0; c.dim()], 0.5), ConicSet::full(c.dim())).unwrap(), 20_000, &rng).unwrap();
            let mp = phi(&c, &ConicSet::cap(&vec![1.0; c.dim()], 0.5), 20_000, &rng).unwrap();
            assert_eq!(mt.counts, mp.counts);
        }
    }

    #[test]
    fn polarity_and_euler() {
        for (i, c) in test_cones().into_iter().enumerate() {
            let d = c.dim();
            let v = estimate_v(&c, 200_000, &Rng::new(100 + i as u64)).unwrap();
            let vp = estimate_v(&c.polar(), 200_000, &Rng::new(200 + i as u64)).unwrap();
            for k in 0..=d {
                let s = (v.entries[k].stderr.powi(2) + vp.entries[d - k].stderr.powi(2)).sqrt();
                assert!(within(v.entries[k].mean, vp.entries[d - k].mean, s), "k={k}");
            }
            let w: Vec<f64> = (0..=d).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let (e, s) = v.linear(&w);
            assert!(within(e, 0.0, s), "euler {e} ± {s}");
        }
    }

    #[test]
    fn product_rules() {
        let c = square_cone();
        let d = Cone::ray(2, q(&[1, 1])).unwrap();
        let cd = c.product(&d);
        let n = 200_000;
        let vc = estimate_v(&c, n, &Rng::new(7)).unwrap();
        let vd = exact::to_f64(&exact_v(&d).unwrap());
        let vcd = estimate_v(&cd, n, &Rng::new(8)).unwrap();
        let conv = crate::faces::convolve(&vc.means(), &vd);
        for k in 0..conv.len() {
            // σ of the convolution: Σ_j vd_j v̂c_{k-j} is linear in v̂c
            let w: Vec<f64> = (0..vc.entries.len()).map(|i| if k >= i && k - i < vd.len() { vd[k - i] } else { 0.0 }).collect();
            let (_, s1) = vc.linear(&w);
            let s = (s1 * s1 + vcd.entries[k].stderr.powi(2)).sqrt();
            assert!(within(vcd.entries[k].mean, conv[k], s), "k={k}");
        }
        let uc = estimate_u(&c, n, &Rng::new(9)).unwrap();
        let ud = exact::to_f64(&exact_u(&d).unwrap());
        let ucd = estimate_u(&cd, n, &Rng::new(10)).unwrap();
        let ucm: Vec<f64> = uc.iter().map(|e| e.mean).collect();
        let conv = crate::faces::convolve(&ucm, &ud);
        for k in 0..conv.len() {
            let s1: f64 = (0..uc.len()).filter(|&i| k >= i && k - i < ud.len()).map(|i| (ud[k - i] * uc[i].stderr).powi(2)).sum();
            let s = (s1 + ucd[k].stderr.powi(2)).sqrt();
            assert!(within(ucd[k].mean, conv[k], s), "u k={k}");
        }
    }

    #[test]
    fn additivity_of_v() {
        // two half-planes whose union is the upper half-plane and intersection the quadrant
        let a = Cone::from_i64_generators(2, &[&[1, 0], &[-1, 1]]).unwrap();
        let b = Cone::from_i64_generators(2, &[&[1, 1], &[-1, 0]]).unwrap();
        let union = Cone::half_space(2, q(&[0, -1])).unwrap();
        let inter = a.intersect(&b).unwrap();
        let n = 200_000;
        let est = |c: &Cone<Rational>, s| estimate_v(c, n, &Rng::new(s)).unwrap();
        let (va, vb, vu, vi) = (est(&a, 11), est(&b, 12), est(&union, 13), est(&inter, 14));
        for k in 0..=2 {
            let lhs = vu.entries[k].mean + vi.entries[k].mean;
            let rhs = va.entries[k].mean + vb.entries[k].mean;
            let s = [&va, &vb, &vu, &vi].iter().map(|v| v.entries[k].stderr.powi(2)).sum::<f64>().sqrt();
            assert!(within(lhs, rhs, s), "k={k}");
        }
    }

    #[test]
    fn psi_examples() {
        let c = Cone::<Rational>::orthant(2);
        let rng = Rng::new(15);
        assert_eq!(psi_k(&c, 1, &ConicSet::zero_only(2), 1000, &rng).unwrap().mean, 0.0);
        let cap = ConicSet::cap(&[1.0, 0.0], std::f64::consts::FRAC_1_SQRT_2);
        let p1 = psi_k(&c, 1, &cap, 1_000_000, &rng).unwrap();
        assert!((p1.mean - 0.5).abs() <= 0.004);
        // concentration: Ψ(C, M) = Ψ(C, M ∩ C)
        let cap2 = ConicSet::cap(&[1.0, -0.2], 0.3);
        let restricted = cap2.intersect(&ConicSet::from_cone(&c)).unwrap();
        let a = psi(&c, Some(&cap2), 50_000, &rng).unwrap();
        let b = psi(&c, Some(&restricted), 50_000, &rng).unwrap();
        assert_eq!(a, b);
        // Ψ_0 = Λ_0
        for m in [ConicSet::full(2), ConicSet::star(2)] {
            assert_eq!(psi(&c, Some(&m), 100, &rng).unwrap()[0].mean, lin_k(&c, 0, &m));
        }
    }

    #[test]
    fn psi_d_equals_phi_d() {
        let c = square_cone();
        let cap = ConicSet::cap(&[0.3, 0.1, 1.0], 0.9);
        let a = psi_k(&c, 3, &cap, 400_000, &Rng::new(16)).unwrap();
        let b = phi_k(&c, 3, &cap, 400_000, &Rng::new(17)).unwrap();
        assert!(within(a.mean, b.mean, (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()));
    }

    #[test]
    fn phi_examples() {
        let c = Cone::<Rational>::orthant(2);
        let rng = Rng::new(18);
        assert_eq!(phi_k(&c, 0, &ConicSet::star(2), 10_000, &rng).unwrap().mean, 0.0);
        // half-plane {y ≥ 0} = {⟨(0,-1), x⟩ ≤ 0}: Φ_2 with a cap of half-angle
        // 60° around the inner normal is the Gaussian measure of the cap = 1/3
        let h = Cone::half_space(2, q(&[0, -1])).unwrap();
        let cap = ConicSet::cap(&[0.0, 1.0], 0.5);
        let est = phi_k(&h, 2, &cap, 400_000, &rng).unwrap();
        // polar-coordinate quadrature: the Gaussian measure of a cone in ℝ² is
        // the fraction of directions it contains
        let steps = 100_000;
        let quad = (0..steps)
            .filter(|i| {
                let t = 2.0 * std::f64::consts::PI * (*i as f64 + 0.5) / steps as f64;
                let x = [t.cos(), t.sin()];
                x[1] > 0.0 && cap.contains(&x)
            })
            .count() as f64
            / steps as f64;
        assert!((quad - 1.0 / 3.0).abs() < 1e-4);
        assert!(within(est.mean, quad, est.stderr));
    }

    #[test]
    fn theta_examples() {
        let c = Cone::<Rational>::orthant(2);
        let rng = Rng::new(19);
        let star_second = BiconicSet::product(ConicSet::full(2), ConicSet::star(2)).unwrap();
        assert_eq!(theta_k(&c, 2, &star_second, 20_000, &rng).unwrap().mean, 0.0);
        // polarity: Θ_k(C°, 𝓜) = Θ_{d−k}(C, rev 𝓜)
        let sq = square_cone();
        let mm = BiconicSet::product(ConicSet::cap(&[0.0, 0.0, 1.0], 0.8), ConicSet::cap(&[1.0, 0.0, -1.0], 0.5).with_origin()).unwrap();
        let a = theta(&sq.polar(), &mm, 200_000, &Rng::new(20)).unwrap();
        let b = theta(&sq, &mm.rev(), 200_000, &Rng::new(21)).unwrap();
        for k in 0..=3 {
            let s = (a.entries[k].stderr.powi(2) + b.entries[3 - k].stderr.powi(2)).sqrt();
            assert!(within(a.entries[k].mean, b.entries[3 - k].mean, s), "k={k}");
        }
        // on a shared stream the polar identity is exact: rev ∘ Π̂_C = Π̂_{C°}
        let a = theta(&sq.polar(), &mm, 20_000, &Rng::new(22)).unwrap();
        let b = theta(&sq, &mm.rev(), 20_000, &Rng::new(22)).unwrap();
        let rev_counts: Vec<u64> = b.counts.iter().rev().copied().collect();
        assert_eq!(a.counts, rev_counts);
    }

    #[test]
    fn theta_product_form_per_face() {
        let c = square_cone();
        let m = ConicSet::cap(&[0.2, 0.1, 1.0], 0.85);
        let mp = ConicSet::cap(&[1.0, 0.3, -1.0], 0.6).with_origin();
        let mm = BiconicSet::product(m.clone(), mp.clone()).unwrap();
        let direct = theta(&c, &mm, 400_000, &Rng::new(23)).unwrap();
        let faces = theta_product_per_face(&c, Some(&m), Some(&mp), 400_000, &Rng::new(24)).unwrap();
        for k in 0..=3 {
            let s = (direct.entries[k].stderr.powi(2) + faces[k].stderr.powi(2)).sqrt();
            assert!(within(direct.entries[k].mean, faces[k].mean, s), "k={k}");
        }
        let v = theta_product_per_face(&Cone::<Rational>::orthant(3), None, None, 200_000, &Rng::new(25)).unwrap();
        let exact = exact::to_f64(&exact_v(&Cone::<Rational>::orthant(3)).unwrap());
        for k in 0..=3 {
            assert!(within(v[k].mean, exact[k], v[k].stderr));
        }
    }

    #[test]
    fn orthogonal_invariance() {
        let c = square_cone();
        let m = ConicSet::cap(&[0.0, 0.3, 1.0], 0.9);
        let qm = sample_haar_orthogonal(3, &mut Rng::new(26));
        let qc = c.to_f64().linear_image(&qm).unwrap();
        let qmset = m.image(&qm).unwrap();
        let a = phi(&c, &m, 200_000, &Rng::new(27)).unwrap();
        let b = phi(&qc, &qmset, 200_000, &Rng::new(28)).unwrap();
        for k in 0..=3 {
            let s = (a.entries[k].stderr.powi(2) + b.entries[k].stderr.powi(2)).sqrt();
            assert!(within(a.entries[k].mean, b.entries[k].mean, s), "k={k}");
        }
    }

    #[test]
    fn steiner() {
        let rng = Rng::new(29);
        // r = 0
        let c = Cone::<Rational>::orthant(2);
        assert_eq!(steiner_lhs(&c, 0.0, &SteinerSet::Full, 1000, &rng).unwrap().mean, 1.0);
        // full space: a single chi-squared term
        let full = Cone::<Rational>::full(3);
        let rhs = steiner_rhs(&exact::to_f64(&exact_v(&full).unwrap()), 2.0);
        assert_eq!(rhs, chi2_survival(3, 2.0));
        for r in [0.5, 1.0, 2.0] {
            for cone in test_cones() {
                let lhs = steiner_lhs(&cone, r, &SteinerSet::Full, 100_000, &Rng::new(30)).unwrap();
                let v = estimate_v(&cone, 100_000, &Rng::new(31)).unwrap();
                let w: Vec<f64> = (0..=cone.dim()).map(|k| chi2_survival(k, r)).collect();
                let (rhs, s) = v.linear(&w);
                assert!(within(lhs.mean, rhs, (lhs.stderr.powi(2) + s * s).sqrt()), "r={r}");
            }
        }
        // localized with a cap
        let sq = square_cone();
        let cap = ConicSet::cap(&[0.1, 0.2, 1.0], 0.9);
        let set = SteinerSet::Conic(&cap);
        let lhs = steiner_lhs(&sq, 1.0, &set, 200_000, &Rng::new(32)).unwrap();
        let loc = localized_vector(&sq, &set, 200_000, &Rng::new(33)).unwrap();
        let w: Vec<f64> = (0..=3).map(|k| chi2_survival(k, 1.0)).collect();
        let (rhs, s) = loc.linear(&w);
        assert!(within(lhs.mean, rhs, (lhs.stderr.powi(2) + s * s).sqrt()));
    }

    #[test]
    fn determinism_across_thread_counts() {
        let c = square_cone();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_v(&c, 50_000, &Rng::new(34)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
