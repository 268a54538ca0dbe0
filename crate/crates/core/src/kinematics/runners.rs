//! One runner per identity. Each returns reports comparing the rotation
//! average (left-hand side) with values computed from the individual cones.

use crate::borel::{BiconicSet, ConicSet};
use crate::cone::project::Geometry;
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::measures::exact::to_f64;
use crate::measures::{
    count_projections, count_projections_with, estimate_v, exact_u, exact_v, localized_vector, phi, psi, steiner_lhs,
    theta, SteinerSet,
};
use crate::numerics::matrix::{dot_f64, norm};
use crate::numerics::{chi2_survival, Rational, Rng};

use super::combine::{convolution_entry, tuple_sum, Component};
use super::decompose::{is_trivial_on, Tree};
use super::formula::Formula;
use super::report::{Report, RunInfo, Side};
use super::trials::{outer_mean, run_trials, Experiment, TrialSet};

/// Switches that relax the preconditions of [`run_formula`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    /// Accept non-orthogonal transforms for formulas other than pure `∧`/`∨` chains.
    pub allow_gl: bool,
    /// Accept formulas that repeat a variable (the counterexample probe).
    pub allow_non_read_once: bool,
}

/// Measure compared by [`run_formula`].
#[derive(Clone, Debug)]
pub enum Measure {
    /// Intrinsic volumes `v`.
    V,
    /// Support measures `Θ` with one biconic set per cone.
    Theta(Vec<BiconicSet>),
}

/// The identity checked by each runner, written out.
pub fn anchor(identity: &str) -> &'static str {
    match identity {
        "kinematic-u" => "E[Psi_k(T0Q0C0 & ... & TnQnCn, T0Q0M0 & ... & TnQnMn)] = Psi_{nd+k}(C0 x ... x Cn, M0 x ... x Mn), k > 0",
        "kinematic-v" => "E[v_k(T0Q0C0 & ... & TnQnCn)] = v_{nd+k}(C0 x ... x Cn), k > 0",
        "polar" => "E[v_j(T0Q0C0 + ... + TnQnCn)] = v_j(C0 x ... x Cn), j < d",
        "boundary" => "E[v_0(T0Q0C0 & ... & TnQnCn)] = sum_{j<=nd} v_j(C0 x ... x Cn); E[v_d(sum TiQiCi)] = sum_{j>=d} v_j(C0 x ... x Cn)",
        "general" => "E[v_k(F(Q0C0, ..., QnCn))] = sum_{dim_F(k0..kn) = k} prod_i v_{ki}(Ci), F read-once",
        "theta" => "E[Theta_k(T0Q0C0 & ... & TnQnCn, T0Q0M0 wedge ... wedge TnQnMn)] = Theta_{nd+k}(C0 x ... x Cn, M0 x ... x Mn), k > 0",
        "polar-theta" => "E[Theta_j(T0Q0C0 + ... + TnQnCn, T0Q0M0 vee ... vee TnQnMn)] = Theta_j(C0 x ... x Cn, M0 x ... x Mn), j < d",
        "general-theta" => "E[Theta_k(F(Q0C0, ..), F(Q0M0, ..))] = sum_{dim_F(k0..kn) = k} prod_i Theta_{ki}(Ci, Mi)",
        "ell" => "l_k(T0Q0C0 & ... & TnQnCn) = l_{nd+k}(C0 x ... x Cn) (k > 0), l_0 = sum_{j<=nd} l_j, for every rotation",
        "projection" => "E[Phi_k(P_L C, P_L M)] = Phi_k(C, M) over random L of codimension m, k <= d-m-1",
        "steiner" => "P{Pi(g) in M, |Pi_C(g)|^2 >= r} = sum_k chi2_sf(k, r) Phi_k(C, M)",
        "crofton" => "P{C & QD != 0} = 2 sum_{j odd} v_{d+j}(C x D)",
        "probe" => "v_k(F(Q0C0, Q1C1)) against sum_{dim_F(k0,k1) = k} v_{k0}(C0) v_{k1}(C1), F = (X0 | X1) & !X0",
        _ => "",
    }
}

fn trial_rng(seed: u64) -> Rng {
    Rng::new(seed).child(0)
}

/// Independent stream for the `i`-th component estimate.
fn component_rng(seed: u64, i: usize) -> Rng {
    Rng::new(seed).child(1).child(i as u64)
}

fn info<T>(identity: &str, exp: &Experiment, trials: &TrialSet<T>, drops: u64) -> RunInfo {
    RunInfo {
        identity: identity.to_string(),
        n: exp.samples,
        rotations: exp.rotations as u64,
        seed: exp.seed,
        degenerate_trials: trials.degenerate,
        degenerate_samples: drops,
    }
}

/// `v(C)`: closed form when known, else estimated.
pub fn v_component(c: &Cone<Rational>, n: u64, rng: &Rng) -> Result<Component> {
    match exact_v(c) {
        Some(v) => Ok(Component::exact(to_f64(&v))),
        None => Ok(Component::from_shared_stream(&estimate_v(c, n, rng)?)),
    }
}

/// `Ψ(C, M)`, with `u(C)` in closed form when `M` is absent and the cone is known.
pub fn u_component(c: &Cone<Rational>, m: Option<&ConicSet>, n: u64, rng: &Rng) -> Result<Component> {
    if m.is_none() {
        if let Some(u) = exact_u(c) {
            return Ok(Component::exact(to_f64(&u)));
        }
    }
    Ok(Component::from_independent(&psi(c, m, n, rng)?))
}

/// `Θ(C, 𝓜)`; `None` stands for the whole lift, i.e. `v(C)`.
pub fn theta_component(c: &Cone<Rational>, set: Option<&BiconicSet>, n: u64, rng: &Rng) -> Result<Component> {
    match set {
        None => v_component(c, n, rng),
        Some(s) => Ok(Component::from_shared_stream(&theta(c, s, n, rng)?)),
    }
}

fn intersect_all(cones: &[Cone<f64>]) -> Result<Cone<f64>> {
    let mut k = cones[0].clone();
    for c in &cones[1..] {
        k = k.intersect(c)?;
    }
    Ok(k)
}

fn check_ks(ks: &[usize], lo: usize, hi: usize) -> Result<()> {
    match ks.iter().find(|&&k| k < lo || k > hi) {
        Some(k) => Err(Error::InvalidConfig(format!("index {k} outside {lo}..={hi}"))),
        None => Ok(()),
    }
}

/// Kinematic formula for the polyhedral measures `Ψ` (and `u` when `sets`
/// is `None`) of an intersection of rotated cones, `k > 0`.
pub fn run_kinematic_u(exp: &Experiment, ks: &[usize], sets: Option<&[ConicSet]>) -> Result<Vec<Report>> {
    exp.validate()?;
    let d = exp.dim();
    check_ks(ks, 1, d)?;
    if let Some(s) = sets {
        if s.len() != exp.cones.len() || s.iter().any(|m| m.d != d) {
            return Err(Error::InvalidConfig("one conic set of the ambient dimension per cone".into()));
        }
    }
    let trials = run_trials(exp, &trial_rng(exp.seed), true, |t| {
        let k = intersect_all(&t.cones)?;
        let m = match sets {
            Some(s) => {
                let imgs = s.iter().zip(&t.us).map(|(m, u)| m.image(u)).collect::<Result<Vec<_>>>()?;
                Some(ConicSet::intersection(imgs)?)
            }
            None => None,
        };
        let est = psi(&k, m.as_ref(), exp.samples, &t.rng)?;
        Ok(Some(est.iter().map(|e| e.mean).collect::<Vec<f64>>()))
    })?;
    let components = exp
        .cones
        .iter()
        .enumerate()
        .map(|(i, c)| u_component(c, sets.map(|s| &s[i]), exp.component_samples, &component_rng(exp.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let n = exp.cones.len() - 1;
    let info = info("kinematic-u", exp, &trials, 0);
    Ok(ks
        .iter()
        .map(|&k| {
            let values: Vec<f64> = trials.results.iter().map(|r| r[k]).collect();
            let (lhs, lse) = outer_mean(&values, exp.samples);
            let (rhs, rse) = convolution_entry(&components, n * d + k);
            let params = format!("d={d}, cones={}, k={k}, localized={}", exp.cones.len(), sets.is_some());
            Report::compare(&info, anchor("kinematic-u"), params, Side::new(lhs, lse), Side::new(rhs, rse))
        })
        .collect())
}

/// `E[μ_k(F(T_0Q_0C_0, …))]` against `Σ_{dim_F(k_0, …) = k} Π μ_{k_i}(C_i)` for
/// `μ = v` or `μ = Θ(·, 𝓜_i)`. Both sides are reported for every `k` in `ks`.
pub fn run_formula(
    identity: &str,
    exp: &Experiment,
    f: &Formula,
    measure: &Measure,
    ks: &[usize],
    opts: Options,
) -> Result<Vec<Report>> {
    exp.validate()?;
    let d = exp.dim();
    if !f.is_read_once() && !opts.allow_non_read_once {
        return Err(Error::NotReadOnce);
    }
    if f.num_vars() != exp.cones.len() {
        return Err(Error::InvalidConfig(format!("{} variables but {} cones", f.num_vars(), exp.cones.len())));
    }
    let chain = f.is_and_chain() || f.is_or_chain();
    if !chain && !opts.allow_gl {
        if let Some(i) = exp.non_orthogonal() {
            return Err(Error::NonOrthogonalTransform(i));
        }
    }
    check_ks(ks, 0, d)?;
    let sets: Vec<Option<BiconicSet>> = match measure {
        Measure::V => vec![None; exp.cones.len()],
        Measure::Theta(s) => {
            if s.len() != exp.cones.len() || s.iter().any(|m| m.d != d) {
                return Err(Error::InvalidConfig("one biconic set of the ambient dimension per cone".into()));
            }
            s.iter().zip(&exp.cones).map(|(m, c)| (!is_trivial_on(m, c)).then(|| m.clone())).collect()
        }
    };
    if sets.iter().any(Option::is_some) {
        // the wedge (vee) is not pointwise decidable at the apex (at full dimension)
        if f.is_and_chain() && exp.cones.len() > 1 && ks.contains(&0) {
            return Err(Error::InvalidConfig("localized conjunctions need k >= 1".into()));
        }
        if f.is_or_chain() && exp.cones.len() > 1 && ks.contains(&d) {
            return Err(Error::InvalidConfig("localized disjunctions need k <= d - 1".into()));
        }
    }
    let mut wanted = vec![false; d + 1];
    ks.iter().for_each(|&k| wanted[k] = true);
    let trials = run_trials(exp, &trial_rng(exp.seed), true, |t| {
        let rotated = sets
            .iter()
            .zip(&t.us)
            .map(|(s, u)| s.as_ref().map(|s| s.gl_action_f64(u)).transpose())
            .collect::<Result<Vec<_>>>()?;
        let tree = Tree::build(f, &t.cones, &rotated)?;
        let counts = count_projections_with(tree.geometry(), exp.samples, &t.rng, d + 1, |p, k| {
            if !wanted[k] {
                return Ok(None);
            }
            Ok(tree.contains(&p.primal, &p.polar)?.then_some(k))
        })?;
        let fractions: Vec<f64> = counts.counts.iter().map(|&c| c as f64 / exp.samples as f64).collect();
        Ok(Some((fractions, counts.drops)))
    })?;
    let components = exp
        .cones
        .iter()
        .zip(&sets)
        .enumerate()
        .map(|(i, (c, s))| theta_component(c, s.as_ref(), exp.component_samples, &component_rng(exp.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let drops = trials.results.iter().map(|r| r.1).sum();
    let info = info(identity, exp, &trials, drops);
    Ok(ks
        .iter()
        .map(|&k| {
            let values: Vec<f64> = trials.results.iter().map(|r| r.0[k]).collect();
            let (lhs, lse) = outer_mean(&values, exp.samples);
            let (rhs, rse) = tuple_sum(&components, |t| f.dim_recursion(d, t) == k);
            let params = format!("F={f}, d={d}, k={k}");
            Report::compare(&info, anchor(identity), params, Side::new(lhs, lse), Side::new(rhs, rse))
        })
        .collect())
}

fn require_two(exp: &Experiment) -> Result<()> {
    if exp.cones.len() < 2 {
        return Err(Error::InvalidConfig("at least two cones are required".into()));
    }
    Ok(())
}

/// `E[v_k(⋂ T_iQ_iC_i)] = v_{nd+k}(∏ C_i)` for `k > 0`.
pub fn run_kinematic_v(exp: &Experiment, ks: &[usize]) -> Result<Vec<Report>> {
    require_two(exp)?;
    check_ks(ks, 1, exp.dim())?;
    run_formula("kinematic-v", exp, &Formula::and_chain(exp.cones.len()), &Measure::V, ks, Options::default())
}

/// `E[v_j(Σ T_iQ_iC_i)] = v_j(∏ C_i)` for `j < d`.
pub fn run_polar_v(exp: &Experiment, js: &[usize]) -> Result<Vec<Report>> {
    require_two(exp)?;
    check_ks(js, 0, exp.dim().saturating_sub(1))?;
    run_formula("polar", exp, &Formula::or_chain(exp.cones.len()), &Measure::V, js, Options::default())
}

/// `k = 0` of the intersection and `k = d` of the sum.
pub fn run_boundary(exp: &Experiment) -> Result<Vec<Report>> {
    require_two(exp)?;
    let d = exp.dim();
    let mut out = run_formula("boundary", exp, &Formula::and_chain(exp.cones.len()), &Measure::V, &[0], Options::default())?;
    out.extend(run_formula("boundary", exp, &Formula::or_chain(exp.cones.len()), &Measure::V, &[d], Options::default())?);
    Ok(out)
}

/// Read-once formula `F`; transforms must be orthogonal unless `allow_gl`.
pub fn run_general(exp: &Experiment, f: &Formula, ks: &[usize], allow_gl: bool) -> Result<Vec<Report>> {
    run_formula("general", exp, f, &Measure::V, ks, Options { allow_gl, ..Options::default() })
}

/// Support measures of an intersection, `k > 0`.
pub fn run_kinematic_theta(exp: &Experiment, sets: Vec<BiconicSet>, ks: &[usize]) -> Result<Vec<Report>> {
    require_two(exp)?;
    check_ks(ks, 1, exp.dim())?;
    let f = Formula::and_chain(exp.cones.len());
    run_formula("theta", exp, &f, &Measure::Theta(sets), ks, Options::default())
}

/// Support measures of a sum, `j < d`.
pub fn run_polar_theta(exp: &Experiment, sets: Vec<BiconicSet>, js: &[usize]) -> Result<Vec<Report>> {
    require_two(exp)?;
    check_ks(js, 0, exp.dim().saturating_sub(1))?;
    let f = Formula::or_chain(exp.cones.len());
    run_formula("polar-theta", exp, &f, &Measure::Theta(sets), js, Options::default())
}

/// Support measures of a read-once formula. With `allow_gl` non-orthogonal
/// transforms are accepted, a case not covered by any known proof.
pub fn run_general_theta(
    exp: &Experiment,
    f: &Formula,
    sets: Vec<BiconicSet>,
    ks: &[usize],
    allow_gl: bool,
) -> Result<Vec<Report>> {
    run_formula("general-theta", exp, f, &Measure::Theta(sets), ks, Options { allow_gl, ..Options::default() })
}

/// Both sides of the general formula for a formula that repeats `X0`;
/// reports are informational.
pub fn counterexample_probe(exp: &Experiment, f: &Formula, ks: &[usize]) -> Result<Vec<Report>> {
    if exp.dim() < 1 {
        return Err(Error::InvalidConfig("probe needs d >= 1".into()));
    }
    let opts = Options { allow_non_read_once: true, ..Options::default() };
    Ok(run_formula("probe", exp, f, &Measure::V, ks, opts)?.into_iter().map(Report::informational).collect())
}

/// `(X0 | X1) & !X0`.
pub fn probe_formula() -> Formula {
    Formula::and(Formula::or(Formula::var(0), Formula::var(1)), Formula::not(Formula::var(0)))
}

/// Lineality vector of an intersection of rotated cones against the
/// product, checked for equality on every rotation.
pub fn run_ell_kinematic(exp: &Experiment) -> Result<Report> {
    exp.validate()?;
    let d = exp.dim();
    let n = exp.cones.len() - 1;
    let total: usize = exp.cones.iter().map(Cone::lineality).sum();
    let mut prod = vec![0usize; (n + 1) * d + 1];
    prod[total] = 1;
    let mut rhs = vec![0usize; d + 1];
    rhs[0] = prod[..=n * d].iter().sum();
    for k in 1..=d {
        rhs[k] = prod[n * d + k];
    }
    let trials = run_trials(exp, &trial_rng(exp.seed), true, |t| {
        let mut lhs = vec![0usize; d + 1];
        lhs[intersect_all(&t.cones)?.lineality()] = 1;
        Ok(Some(lhs == rhs))
    })?;
    let matches = trials.results.iter().filter(|&&m| m).count();
    let mut info = info("ell", exp, &trials, 0);
    info.n = 0;
    let params = format!("d={d}, lineality={:?}, agreeing={matches}", exp.cones.iter().map(Cone::lineality).collect::<Vec<_>>());
    Ok(Report::compare(
        &info,
        anchor("ell"),
        params,
        Side::exact(matches as f64 / exp.rotations as f64),
        Side::exact(1.0),
    ))
}

/// Localization for [`run_projection_formula`]: `M = C` or `M = (cap ∪ {0}) ∩ C`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionSet {
    Full,
    Cap { axis: Vec<f64>, cos: f64 },
}

/// Whether the line `{(z, t) : t ∈ ℝ}` meets `C ∩ cap` (`C` in `ℝ^{e+1}`).
fn line_meets_cap(z: &[f64], g: &Geometry, axis: &[f64], cos: f64) -> bool {
    let e = z.len();
    let tol = 1e-12 * norm(z).max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for h in &g.facets {
        let (a, b) = (dot_f64(&h[..e], z), h[e]);
        if b.abs() <= 1e-14 {
            if a > tol {
                return false;
            }
        } else if b > 0.0 {
            hi = hi.min(-a / b);
        } else {
            lo = lo.max(-a / b);
        }
    }
    for h in &g.equalities {
        let (a, b) = (dot_f64(&h[..e], z), h[e]);
        if b.abs() <= 1e-14 {
            if a.abs() > tol {
                return false;
            }
        } else {
            lo = lo.max(-a / b);
            hi = hi.min(-a / b);
        }
    }
    if lo > hi + tol {
        return false;
    }
    let (alpha, beta, r) = (dot_f64(&axis[..e], z), axis[e], norm(z));
    let f = |t: f64| alpha + beta * t - cos * (r * r + t * t).sqrt();
    if beta.abs() < cos {
        let t = beta * r / (cos * cos - beta * beta).sqrt();
        f(t.clamp(lo, hi.max(lo))) >= 0.0
    } else {
        // f is monotone; look at the end it increases towards
        let end = if beta > 0.0 { hi } else { lo };
        if end.is_finite() {
            f(end) >= 0.0
        } else {
            beta.abs() > cos || alpha >= 0.0
        }
    }
}

/// Projection formula for curvature measures under projection onto a random
/// subspace of codimension `m`. The experiment holds the single cone `C`.
pub fn run_projection_formula(exp: &Experiment, m: usize, set: &ProjectionSet, ks: &[usize]) -> Result<Vec<Report>> {
    exp.validate()?;
    if exp.cones.len() != 1 {
        return Err(Error::InvalidConfig("projection runs take exactly one cone".into()));
    }
    let d = exp.dim();
    if m >= d {
        return Err(Error::InvalidConfig("codimension must be below the dimension".into()));
    }
    let e = d - m;
    check_ks(ks, 0, e - 1)?;
    let unit_axis = match set {
        ProjectionSet::Full => None,
        ProjectionSet::Cap { axis, cos } => {
            if m > 1 {
                return Err(Error::UnsupportedKind("localized projection with codimension above 1"));
            }
            if !(*cos > 0.0 && *cos < 1.0) || axis.len() != d || norm(axis) == 0.0 {
                return Err(Error::InvalidConfig("cap needs an axis in R^d and 0 < cos < 1".into()));
            }
            Some(axis.iter().map(|a| a / norm(axis)).collect::<Vec<f64>>())
        }
    };
    let mut wanted = vec![false; e + 1];
    ks.iter().for_each(|&k| wanted[k] = true);
    let trials = run_trials(exp, &trial_rng(exp.seed), false, |t| {
        // project U C onto the first e coordinates, U = Q
        let uc = &t.cones[0];
        let dual = uc.dual();
        let rays: Vec<Vec<f64>> = dual.rays.iter().map(|r| r[..e].to_vec()).collect();
        for (i, (p, r)) in rays.iter().zip(&dual.rays).enumerate() {
            if norm(p) <= 1e-9 * norm(r) {
                return Err(Error::ImageDegenerate);
            }
            for q in &rays[..i] {
                if dot_f64(p, q) >= (1.0 - 1e-9) * norm(p) * norm(q) {
                    return Err(Error::ImageDegenerate);
                }
            }
        }
        let mut gens = rays;
        for l in &dual.lineality {
            gens.push(l[..e].to_vec());
            gens.push(l[..e].iter().map(|x| -x).collect());
        }
        let k = if gens.is_empty() { Cone::zero(e) } else { Cone::from_generator_list(e, &gens)? };
        let axis = unit_axis.as_ref().map(|a| t.us[0].mul_vec(a));
        let cos = match set {
            ProjectionSet::Cap { cos, .. } => *cos,
            ProjectionSet::Full => 0.0,
        };
        let g = uc.geometry();
        let counts = count_projections(k.geometry(), exp.samples, &t.rng, e + 1, |p, k| {
            if !wanted[k] {
                return None;
            }
            let inside = match &axis {
                None => true,
                Some(_) if p.primal.iter().all(|x| *x == 0.0) => true,
                Some(a) if m == 0 => {
                    let z = &p.primal;
                    dot_f64(z, a) >= cos * norm(z)
                }
                Some(a) => line_meets_cap(&p.primal, g, a, cos),
            };
            inside.then_some(k)
        })?;
        let fractions: Vec<f64> = counts.counts.iter().map(|&c| c as f64 / exp.samples as f64).collect();
        Ok(Some((fractions, counts.drops)))
    })?;
    let c = &exp.cones[0];
    let rng = component_rng(exp.seed, 0);
    let component = match &unit_axis {
        None => v_component(c, exp.component_samples, &rng)?,
        Some(a) => {
            let cap = ConicSet::cap(a, match set {
                ProjectionSet::Cap { cos, .. } => *cos,
                ProjectionSet::Full => unreachable!(),
            });
            let mset = ConicSet::intersection(vec![cap, ConicSet::from_cone(c)])?.with_origin();
            Component::from_shared_stream(&phi(c, &mset, exp.component_samples, &rng)?)
        }
    };
    let drops = trials.results.iter().map(|r| r.1).sum();
    let info = info("projection", exp, &trials, drops);
    Ok(ks
        .iter()
        .map(|&k| {
            let values: Vec<f64> = trials.results.iter().map(|r| r.0[k]).collect();
            let (lhs, lse) = outer_mean(&values, exp.samples);
            let params = format!("d={d}, m={m}, k={k}, localized={}", unit_axis.is_some());
            let rhs = Side::new(component.mean[k], component.cov[k][k].max(0.0).sqrt());
            Report::compare(&info, anchor("projection"), params, Side::new(lhs, lse), rhs)
        })
        .collect())
}

/// Probability that `C` and a randomly rotated `D` share a nonzero point,
/// against `2 Σ_{j odd} v_{d+j}(C × D)`. One rotation per trial.
pub fn crofton_probability(c: &Cone<Rational>, dc: &Cone<Rational>, rotations: usize, seed: u64) -> Result<Report> {
    if c.is_subspace() && dc.is_subspace() {
        return Err(Error::InvalidConfig("at least one cone must not be a subspace".into()));
    }
    let exp = Experiment::new(vec![c.clone(), dc.clone()], rotations, 1, seed);
    let d = exp.dim();
    let trials = run_trials(&exp, &trial_rng(seed), false, |t| Ok(Some(!t.cones[0].intersect(&t.cones[1])?.is_zero())))?;
    let hits = trials.results.iter().filter(|&&h| h).count() as f64;
    let p = hits / rotations as f64;
    let lse = (p * (1.0 - p) / rotations as f64).sqrt();
    let components = [
        v_component(c, exp.component_samples, &component_rng(seed, 0))?,
        v_component(dc, exp.component_samples, &component_rng(seed, 1))?,
    ];
    let (half, hse) = tuple_sum(&components, |t| {
        let s = t[0] + t[1];
        s > d && (s - d) % 2 == 1
    });
    let mut info = info("crofton", &exp, &trials, 0);
    info.n = 1;
    Ok(Report::compare(&info, anchor("crofton"), format!("d={d}"), Side::new(p, lse), Side::new(2.0 * half, 2.0 * hse)))
}

/// Steiner formula at each radius, localized by `set`.
pub fn run_steiner(c: &Cone<Rational>, rs: &[f64], set: &SteinerSet<'_>, n: u64, seed: u64) -> Result<Vec<Report>> {
    let root = Rng::new(seed);
    let d = c.dim();
    let component = match (set, exact_v(c)) {
        (SteinerSet::Full, Some(v)) => Component::exact(to_f64(&v)),
        _ => Component::from_shared_stream(&localized_vector(c, set, n, &root.child(1))?),
    };
    let localized = !matches!(set, SteinerSet::Full);
    rs.iter()
        .map(|&r| {
            let lhs = steiner_lhs(c, r, set, n, &root.child(0))?;
            let w: Vec<f64> = (0..=d).map(|k| chi2_survival(k, r)).collect();
            let value: f64 = w.iter().zip(&component.mean).map(|(a, b)| a * b).sum();
            let var: f64 = (0..=d).flat_map(|a| (0..=d).map(move |b| (a, b))).map(|(a, b)| w[a] * component.cov[a][b] * w[b]).sum();
            let info = RunInfo {
                identity: "steiner".into(),
                n,
                rotations: 0,
                seed,
                degenerate_trials: 0,
                degenerate_samples: lhs.degenerate_drops,
            };
            let params = format!("d={d}, r={r}, localized={localized}");
            Ok(Report::compare(&info, anchor("steiner"), params, Side::new(lhs.mean, lhs.stderr), Side::new(value, var.max(0.0).sqrt())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::borel::BiconicSet;
    use crate::numerics::Matrix;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::integer(x)).collect()
    }

    fn subspace(d: usize, basis: &[&[i64]]) -> Cone<Rational> {
        Cone::subspace(d, &basis.iter().map(|b| q(b)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn subspaces_give_exact_indicators() {
        let exp = Experiment::new(vec![subspace(3, &[&[1, 0, 0], &[0, 1, 0]]), subspace(3, &[&[0, 1, 0], &[0, 0, 1]])], 5, 200, 1);
        for r in run_kinematic_u(&exp, &[1, 2, 3], None).unwrap() {
            assert_eq!(r.pass, Some(true), "{r:?}");
            assert_eq!(r.stderr, 0.0);
        }
        let f = Formula::parse("!(X0 & X1)").unwrap();
        let reports = run_general(&exp, &f, &[0, 1, 2, 3], false).unwrap();
        let lhs: Vec<f64> = reports.iter().map(|r| r.lhs).collect();
        assert_eq!(lhs, vec![0.0, 0.0, 1.0, 0.0]);
        assert!(reports.iter().all(|r| r.pass == Some(true) && r.stderr == 0.0));
    }

    #[test]
    fn kinematic_v_small() {
        let exp = Experiment::new(vec![Cone::orthant(2), Cone::orthant(2)], 40, 5000, 2);
        for r in run_kinematic_v(&exp, &[1, 2]).unwrap() {
            assert!(r.z.abs() <= 4.0, "{r:?}");
        }
        for r in run_boundary(&exp).unwrap() {
            assert!(r.z.abs() <= 4.0, "{r:?}");
        }
        assert!(matches!(run_kinematic_v(&exp, &[0]), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn full_sets_reproduce_v_exactly() {
        let exp = Experiment::new(vec![Cone::orthant(2), Cone::orthant(2)], 10, 2000, 3);
        let v = run_kinematic_v(&exp, &[1, 2]).unwrap();
        let sets = vec![BiconicSet::full(2), BiconicSet::lift(&Cone::<Rational>::orthant(2))];
        let t = run_kinematic_theta(&exp, sets, &[1, 2]).unwrap();
        for (a, b) in v.iter().zip(&t) {
            assert_eq!((a.lhs, a.rhs, a.stderr), (b.lhs, b.rhs, b.stderr));
        }
    }

    #[test]
    fn general_formula_requires_orthogonal_transforms() {
        let t = Matrix::diagonal(&q(&[2, 1, 1]));
        let exp = Experiment::new(vec![Cone::orthant(3), Cone::orthant(3), Cone::orthant(3)], 2, 10, 4).with_transform(0, t);
        let f = Formula::parse("!(X0 & X1) | X2").unwrap();
        assert_eq!(run_general(&exp, &f, &[1], false), Err(Error::NonOrthogonalTransform(0)));
        let g = Formula::parse("X0 & X2 & X0").unwrap();
        assert_eq!(run_general(&exp, &g, &[1], false), Err(Error::NotReadOnce));
    }

    #[test]
    fn crofton_degenerate_cases() {
        let ray = Cone::ray(2, q(&[1, 0])).unwrap();
        let r = crofton_probability(&ray, &ray, 200, 5).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.0, Some(true)));
        let r = crofton_probability(&ray, &Cone::full(2), 50, 5).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        let plane = Cone::half_space(2, q(&[0, -1])).unwrap();
        let r = crofton_probability(&plane, &ray, 4000, 6).unwrap();
        assert_eq!(r.rhs, 0.5);
        assert!(r.z.abs() <= 4.0, "{r:?}");
    }

    #[test]
    fn ell_formula_holds_on_every_rotation() {
        let exp = Experiment::new(vec![subspace(3, &[&[1, 0, 0], &[0, 1, 0]]), subspace(3, &[&[1, 0, 0], &[0, 0, 1]])], 50, 1, 7);
        let r = run_ell_kinematic(&exp).unwrap();
        assert_eq!((r.lhs, r.pass), (1.0, Some(true)));
        let a = Cone::from_i64_rows(3, &[&[0, 0, -1], &[0, -1, 0]]).unwrap();
        let b = Cone::half_space(3, q(&[0, 0, -1])).unwrap();
        let exp = Experiment::new(vec![a, b], 50, 1, 8);
        assert_eq!(run_ell_kinematic(&exp).unwrap().pass, Some(true));
    }

    #[test]
    fn line_cap_test_matches_brute_force() {
        let c = Cone::<Rational>::orthant(3).to_f64();
        let g = c.geometry();
        let axis = [2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()];
        let mut rng = Rng::new(9);
        for _ in 0..300 {
            let z = [rng.normal().abs(), rng.normal()];
            let brute = (-4000..=4000).map(|i| i as f64 * 0.005).any(|t| {
                let x = [z[0], z[1], t];
                g.contains(&x, 1e-12) && dot_f64(&x, &axis) >= 0.6 * norm(&x)
            });
            let fast = line_meets_cap(&z, g, &axis, 0.6);
            if brute {
                assert!(fast, "{z:?}");
            }
        }
    }

    #[test]
    fn projection_with_zero_codimension_is_an_identity() {
        let exp = Experiment::new(vec![Cone::orthant(3)], 3, 20000, 10);
        for r in run_projection_formula(&exp, 0, &ProjectionSet::Full, &[0, 1, 2]).unwrap() {
            assert!(r.z.abs() <= 4.0, "{r:?}");
        }
    }

    #[test]
    fn steiner_orthant() {
        let c = Cone::<Rational>::orthant(2);
        for r in run_steiner(&c, &[0.5, 1.0], &SteinerSet::Full, 50_000, 11).unwrap() {
            assert!(r.z.abs() <= 4.0, "{r:?}");
            assert_eq!(r.rhs_stderr, 0.0);
        }
    }
}
