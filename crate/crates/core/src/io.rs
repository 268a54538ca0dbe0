//! JSON formats: cone files and experiment suites, and the dispatch from an
//! experiment description to its runner.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::borel::{BiconicSet, ConicSet};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::kinematics::{self, Experiment, Formula, ProjectionSet, Report};
use crate::measures::SteinerSet;
use crate::numerics::{Matrix, Rational};
use crate::zoo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rep {
    H,
    V,
    #[serde(rename = "both")]
    Both,
}

/// A cone with exact rational entries. `halfspaces` holds rows `a` of
/// `a·x ≤ 0`; `generators` holds the generating vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFile {
    pub name: String,
    pub d: usize,
    pub rep: Rep,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub halfspaces: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<Vec<Rational>>,
    /// Optional `T`; the file then describes `T C`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Vec<Vec<Rational>>>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Square rational matrix from rows.
pub fn matrix_from_rows(d: usize, rows: &[Vec<Rational>]) -> Result<Matrix<Rational>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidConfig(format!("transform must be {d} x {d}")));
    }
    Ok(Matrix::from_rows(d, rows))
}

impl ConeFile {
    pub fn parse(text: &str) -> Result<ConeFile> {
        parse_json(text)
    }

    pub fn load(path: &Path) -> Result<ConeFile> {
        ConeFile::parse(&read(path)?)
    }

    /// Generator description of a cone.
    pub fn from_cone(name: &str, c: &Cone<Rational>) -> ConeFile {
        ConeFile {
            name: name.to_string(),
            d: c.dim(),
            rep: Rep::V,
            halfspaces: vec![],
            generators: c.dual().generators(),
            transform: None,
        }
    }

    pub fn to_cone(&self) -> Result<Cone<Rational>> {
        let d = self.d;
        let c = match self.rep {
            Rep::H => Cone::from_halfspace_rows(d, &self.halfspaces)?,
            Rep::V => Cone::from_generator_list(d, &self.generators)?,
            Rep::Both => {
                let h = Cone::from_halfspace_rows(d, &self.halfspaces)?;
                let v = Cone::from_generator_list(d, &self.generators)?;
                if !h.same_set(&v, 0.0) {
                    return Err(Error::InvalidConfig(format!("{}: H and V descriptions differ", self.name)));
                }
                Cone::from_both(d, h.halfspace_matrix(), v.generator_matrix())?
            }
        };
        match &self.transform {
            Some(t) => c.linear_image(&matrix_from_rows(d, t)?),
            None => Ok(c),
        }
    }
}

/// A cone given by zoo name, by path to a cone file, or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConeRef {
    Name(String),
    Inline(ConeFile),
}

impl ConeRef {
    /// Names ending in `.json` are files relative to `base`; others are zoo cones.
    pub fn resolve(&self, base: &Path) -> Result<Cone<Rational>> {
        match self {
            ConeRef::Name(n) if n.ends_with(".json") => ConeFile::load(&base.join(n))?.to_cone(),
            ConeRef::Name(n) => zoo::get(n),
            ConeRef::Inline(f) => f.to_cone(),
        }
    }
}

/// Conic localization, relative to the cone it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConicSpec {
    Full,
    /// Nonzero points within angle `acos(cos)` of `axis`.
    Cap { axis: Vec<f64>, cos: f64 },
    /// The cone itself.
    Cone,
    /// `(cap ∩ C) ∪ {0}`.
    CapInCone { axis: Vec<f64>, cos: f64 },
}

impl ConicSpec {
    pub fn resolve(&self, c: &Cone<Rational>) -> Result<ConicSet> {
        let d = c.dim();
        let check = |axis: &[f64], cos: f64| {
            if axis.len() != d || axis.iter().all(|a| *a == 0.0) || !(-1.0..=1.0).contains(&cos) {
                return Err(Error::InvalidConfig("cap needs a nonzero axis of the cone dimension and cos in [-1, 1]".into()));
            }
            Ok(())
        };
        Ok(match self {
            ConicSpec::Full => ConicSet::full(d),
            ConicSpec::Cap { axis, cos } => {
                check(axis, *cos)?;
                ConicSet::cap(axis, *cos)
            }
            ConicSpec::Cone => ConicSet::from_cone(c),
            ConicSpec::CapInCone { axis, cos } => {
                check(axis, *cos)?;
                ConicSet::intersection(vec![ConicSet::cap(axis, *cos), ConicSet::from_cone(c)])?.with_origin()
            }
        })
    }
}

/// Biconic localization, relative to the cone it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BiconicSpec {
    Full,
    /// The lift `BL(C)`.
    Lift,
    Product { primal: ConicSpec, polar: ConicSpec },
}

impl BiconicSpec {
    pub fn resolve(&self, c: &Cone<Rational>) -> Result<BiconicSet> {
        match self {
            BiconicSpec::Full => Ok(BiconicSet::full(c.dim())),
            BiconicSpec::Lift => Ok(BiconicSet::lift(c)),
            BiconicSpec::Product { primal, polar } => BiconicSet::product(primal.resolve(c)?, polar.resolve(&c.polar())?),
        }
    }
}

fn default_rotations() -> usize {
    200
}

fn default_samples() -> u64 {
    50_000
}

fn default_component_samples() -> u64 {
    1_000_000
}

pub const IDENTITIES: &[&str] = &[
    "kinematic-u",
    "kinematic-v",
    "general",
    "theta",
    "polar-theta",
    "general-theta",
    "polar",
    "boundary",
    "ell",
    "projection",
    "steiner",
    "crofton",
    "probe",
];

/// One identity at one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub identity: String,
    pub cones: Vec<ConeRef>,
    /// `T_i` per cone; `null` or missing entries mean the identity.
    #[serde(default)]
    pub transforms: Vec<Option<Vec<Vec<Rational>>>>,
    /// Indices `k`; the identity's full valid range when empty.
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default = "default_rotations")]
    pub rotations: usize,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_component_samples")]
    pub component_samples: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub formula: Option<String>,
    /// Per-cone conic sets (`kinematic-u`); the first one localizes
    /// `steiner` and `projection`.
    #[serde(default)]
    pub conic_sets: Vec<ConicSpec>,
    /// Per-cone biconic sets (`theta`, `polar-theta`, `general-theta`); the
    /// first one may localize `steiner`.
    #[serde(default)]
    pub biconic_sets: Vec<BiconicSpec>,
    /// Codimension of the random subspace (`projection`).
    #[serde(default)]
    pub codim: Option<usize>,
    /// Radii (`steiner`).
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Accept non-orthogonal transforms for general formulas.
    #[serde(default)]
    pub allow_gl: bool,
}

/// A list of experiments sharing a default seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub seed: Option<u64>,
    pub experiments: Vec<ExperimentSpec>,
}

impl Suite {
    pub fn parse(text: &str) -> Result<Suite> {
        parse_json(text)
    }

    pub fn load(path: &Path) -> Result<Suite> {
        Suite::parse(&read(path)?)
    }
}

fn at(path: String) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidConfig(m) => Error::InvalidConfig(format!("{path}: {m}")),
        other => other,
    }
}

impl ExperimentSpec {
    fn experiment(&self, cones: Vec<Cone<Rational>>, seed: u64) -> Result<Experiment> {
        let mut exp = Experiment::new(cones, self.rotations, self.samples, seed).with_component_samples(self.component_samples);
        if self.transforms.len() > exp.cones.len() {
            return Err(Error::InvalidConfig("transforms: more entries than cones".into()));
        }
        for (i, t) in self.transforms.iter().enumerate() {
            if let Some(t) = t {
                let d = exp.cones[i].dim();
                exp = exp.with_transform(i, matrix_from_rows(d, t).map_err(at(format!("transforms[{i}]")))?);
            }
        }
        exp.validate()?;
        Ok(exp)
    }

    fn ks_or(&self, lo: usize, hi: usize) -> Vec<usize> {
        if self.ks.is_empty() {
            (lo..=hi).collect()
        } else {
            self.ks.clone()
        }
    }

    fn formula(&self) -> Result<Option<Formula>> {
        self.formula.as_deref().map(Formula::parse).transpose()
    }

    fn conic_sets(&self, cones: &[Cone<Rational>]) -> Result<Vec<ConicSet>> {
        if self.conic_sets.len() != cones.len() {
            return Err(Error::InvalidConfig("conic_sets: one set per cone is required".into()));
        }
        self.conic_sets.iter().zip(cones).enumerate().map(|(i, (s, c))| s.resolve(c).map_err(at(format!("conic_sets[{i}]")))).collect()
    }

    fn biconic_sets(&self, cones: &[Cone<Rational>]) -> Result<Vec<BiconicSet>> {
        if self.biconic_sets.is_empty() {
            return Ok(cones.iter().map(|c| BiconicSet::full(c.dim())).collect());
        }
        if self.biconic_sets.len() != cones.len() {
            return Err(Error::InvalidConfig("biconic_sets: one set per cone is required".into()));
        }
        self.biconic_sets
            .iter()
            .zip(cones)
            .enumerate()
            .map(|(i, (s, c))| s.resolve(c).map_err(at(format!("biconic_sets[{i}]"))))
            .collect()
    }

    /// Runs the experiment. Cone file paths are relative to `base`.
    pub fn run(&self, default_seed: u64, base: &Path) -> Result<Vec<Report>> {
        let seed = self.seed.unwrap_or(default_seed);
        let cones = self
            .cones
            .iter()
            .enumerate()
            .map(|(i, c)| c.resolve(base).map_err(at(format!("cones[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        let Some(first) = cones.first() else {
            return Err(Error::InvalidConfig("cones: at least one cone is required".into()));
        };
        let d = first.dim();
        match self.identity.as_str() {
            "kinematic-u" => {
                let sets = if self.conic_sets.is_empty() { None } else { Some(self.conic_sets(&cones)?) };
                let exp = self.experiment(cones, seed)?;
                kinematics::run_kinematic_u(&exp, &self.ks_or(1, d), sets.as_deref())
            }
            "kinematic-v" => kinematics::run_kinematic_v(&self.experiment(cones, seed)?, &self.ks_or(1, d)),
            "polar" => kinematics::run_polar_v(&self.experiment(cones, seed)?, &self.ks_or(0, d.saturating_sub(1))),
            "boundary" => kinematics::run_boundary(&self.experiment(cones, seed)?),
            "general" => {
                let f = self.formula()?.ok_or_else(|| Error::InvalidConfig("formula: required".into()))?;
                kinematics::run_general(&self.experiment(cones, seed)?, &f, &self.ks_or(0, d), self.allow_gl)
            }
            "theta" | "polar-theta" | "general-theta" => {
                let sets = self.biconic_sets(&cones)?;
                let exp = self.experiment(cones, seed)?;
                match self.identity.as_str() {
                    "theta" => kinematics::run_kinematic_theta(&exp, sets, &self.ks_or(1, d)),
                    "polar-theta" => kinematics::run_polar_theta(&exp, sets, &self.ks_or(0, d.saturating_sub(1))),
                    _ => {
                        let f = self.formula()?.ok_or_else(|| Error::InvalidConfig("formula: required".into()))?;
                        kinematics::run_general_theta(&exp, &f, sets, &self.ks_or(0, d), self.allow_gl)
                    }
                }
            }
            "ell" => Ok(vec![kinematics::run_ell_kinematic(&self.experiment(cones, seed)?)?]),
            "projection" => {
                let m = self.codim.ok_or_else(|| Error::InvalidConfig("codim: required".into()))?;
                let set = match self.conic_sets.first() {
                    None | Some(ConicSpec::Full) | Some(ConicSpec::Cone) => ProjectionSet::Full,
                    Some(ConicSpec::Cap { axis, cos }) | Some(ConicSpec::CapInCone { axis, cos }) => {
                        ProjectionSet::Cap { axis: axis.clone(), cos: *cos }
                    }
                };
                let exp = self.experiment(cones, seed)?;
                kinematics::run_projection_formula(&exp, m, &set, &self.ks_or(0, d.saturating_sub(m + 1)))
            }
            "steiner" => {
                let c = &cones[0];
                let conic = self.conic_sets.first().map(|s| s.resolve(c)).transpose()?;
                let biconic = self.biconic_sets.first().map(|s| s.resolve(c)).transpose()?;
                let set = match (&conic, &biconic) {
                    (Some(m), None) => SteinerSet::Conic(m),
                    (None, Some(mm)) => SteinerSet::Biconic(mm),
                    (None, None) => SteinerSet::Full,
                    _ => return Err(Error::InvalidConfig("steiner: give conic_sets or biconic_sets, not both".into())),
                };
                let radii = if self.radii.is_empty() { vec![0.5, 1.0, 2.0] } else { self.radii.clone() };
                kinematics::run_steiner(c, &radii, &set, self.samples, seed)
            }
            "crofton" => {
                if cones.len() != 2 {
                    return Err(Error::InvalidConfig("cones: crofton takes two cones".into()));
                }
                Ok(vec![kinematics::crofton_probability(&cones[0], &cones[1], self.rotations, seed)?])
            }
            "probe" => {
                let f = self.formula()?.unwrap_or_else(kinematics::probe_formula);
                kinematics::counterexample_probe(&self.experiment(cones, seed)?, &f, &self.ks_or(0, d))
            }
            other => Err(Error::InvalidConfig(format!("identity: unknown {other:?}"))),
        }
    }
}

/// Runs every experiment of a suite in order; errors carry the experiment index.
pub fn run_suite(suite: &Suite, default_seed: u64, base: &Path) -> Result<Vec<Report>> {
    let seed = suite.seed.unwrap_or(default_seed);
    let mut out = Vec::new();
    for (i, e) in suite.experiments.iter().enumerate() {
        out.extend(e.run(seed, base).map_err(at(format!("experiments[{i}]")))?);
    }
    Ok(out)
}

/// Directory of the bundled zoo files.
pub fn zoo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../zoo")
}
