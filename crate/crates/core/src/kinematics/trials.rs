//! Random rotations `T_i Q_i` and the per-trial loop.

use rayon::prelude::*;

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::faces::is_general_position;
use crate::numerics::linalg::inverse;
use crate::numerics::{sample_haar_orthogonal, Matrix, Rational, Rng};

/// Resampling attempts per trial before the run is declared degenerate.
pub const MAX_ATTEMPTS: usize = 20;

/// Tolerance for `TᵀT = I`.
pub const ORTHO_TOL: f64 = 1e-12;

/// Cones, transforms and sample sizes of one experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub cones: Vec<Cone<Rational>>,
    /// `T_i`, one per cone (identity by default).
    pub transforms: Vec<Matrix<Rational>>,
    /// Number of random rotations `R`.
    pub rotations: usize,
    /// Inner samples per rotation.
    pub samples: u64,
    /// Samples for each component estimate on the right-hand side.
    pub component_samples: u64,
    pub seed: u64,
}

impl Experiment {
    pub fn new(cones: Vec<Cone<Rational>>, rotations: usize, samples: u64, seed: u64) -> Experiment {
        let transforms = cones.iter().map(|c| Matrix::identity(c.dim())).collect();
        Experiment { cones, transforms, rotations, samples, component_samples: 1_000_000, seed }
    }

    pub fn with_transform(mut self, i: usize, t: Matrix<Rational>) -> Experiment {
        self.transforms[i] = t;
        self
    }

    pub fn with_component_samples(mut self, n: u64) -> Experiment {
        self.component_samples = n;
        self
    }

    pub fn dim(&self) -> usize {
        self.cones.first().map_or(0, Cone::dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cones.is_empty() {
            return Err(Error::InvalidConfig("no cones".into()));
        }
        if self.rotations == 0 || self.samples == 0 || self.component_samples == 0 {
            return Err(Error::InvalidConfig("rotations and sample counts must be positive".into()));
        }
        if self.transforms.len() != self.cones.len() {
            return Err(Error::InvalidConfig("one transform per cone is required".into()));
        }
        let d = self.dim();
        for (c, t) in self.cones.iter().zip(&self.transforms) {
            if c.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: c.dim() });
            }
            if t.nrows() != d || t.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: t.nrows() });
            }
            inverse(t)?;
        }
        Ok(())
    }

    /// Index of the first non-orthogonal transform, if any.
    pub fn non_orthogonal(&self) -> Option<usize> {
        self.transforms.iter().position(|t| {
            let t = t.to_f64();
            t.transpose().mul(&t).expect("square").max_abs_diff(&Matrix::identity(t.nrows())) > ORTHO_TOL
        })
    }

    /// Budget of degenerate (resampled) trials: 1% of the rotations.
    pub fn trial_allowance(&self) -> u64 {
        (self.rotations as u64).div_ceil(100)
    }
}

/// One draw of the rotated cones `T_i Q_i C_i`.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: usize,
    /// Number of earlier draws of this trial that were rejected.
    pub attempt: usize,
    pub us: Vec<Matrix<f64>>,
    pub u_inv: Vec<Matrix<f64>>,
    pub cones: Vec<Cone<f64>>,
    /// Stream for the inner samples of this trial.
    pub rng: Rng,
}

impl Trial {
    pub fn draw(exp: &Experiment, base: &[Cone<f64>], index: usize, attempt: usize, rng: &Rng) -> Result<Trial> {
        let mut rot = rng.child(0);
        let d = exp.dim();
        let mut us = Vec::with_capacity(base.len());
        let mut u_inv = Vec::with_capacity(base.len());
        let mut cones = Vec::with_capacity(base.len());
        for (c, t) in base.iter().zip(&exp.transforms) {
            let q = sample_haar_orthogonal(d, &mut rot);
            let u = t.to_f64().mul(&q)?;
            cones.push(c.linear_image(&u)?);
            u_inv.push(inverse(&u)?);
            us.push(u);
        }
        Ok(Trial { index, attempt, us, u_inv, cones, rng: rng.child(1) })
    }

    pub fn in_general_position(&self) -> bool {
        let refs: Vec<&Cone<f64>> = self.cones.iter().collect();
        is_general_position(&refs)
    }
}

/// Per-trial results in trial order plus the number of resampled trials.
#[derive(Clone, Debug)]
pub struct TrialSet<T> {
    pub results: Vec<T>,
    pub degenerate: u64,
}

/// Runs `f` on `R` independent trials. A trial whose rotated cones are not
/// in general position (when `check_gp`), or for which `f` returns `None`,
/// is redrawn from a fresh stream and counted as degenerate.
pub fn run_trials<T, F>(exp: &Experiment, rng: &Rng, check_gp: bool, f: F) -> Result<TrialSet<T>>
where
    T: Send,
    F: Fn(&Trial) -> Result<Option<T>> + Sync,
{
    exp.validate()?;
    let base: Vec<Cone<f64>> = exp.cones.iter().map(Cone::to_f64).collect();
    let out: Vec<(T, u64)> = (0..exp.rotations)
        .into_par_iter()
        .map(|t| {
            let trial_rng = rng.child(t as u64);
            let mut degenerate = 0;
            for attempt in 0..MAX_ATTEMPTS {
                let trial = Trial::draw(exp, &base, t, attempt, &trial_rng.child(attempt as u64))?;
                if check_gp && !trial.in_general_position() {
                    degenerate += 1;
                    continue;
                }
                match f(&trial) {
                    Ok(Some(v)) => return Ok((v, degenerate)),
                    Ok(None) | Err(Error::ImageDegenerate | Error::DecompositionSingular) => degenerate += 1,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::DegenerateBudget { count: degenerate as usize, trials: 1 })
        })
        .collect::<Result<_>>()?;
    let degenerate = out.iter().map(|(_, d)| d).sum();
    if degenerate > exp.trial_allowance() {
        return Err(Error::DegenerateBudget { count: degenerate as usize, trials: exp.rotations });
    }
    Ok(TrialSet { results: out.into_iter().map(|(v, _)| v).collect(), degenerate })
}

/// Mean of per-trial estimates and its standard error `sd / √R`. With a
/// single trial the binomial error of its `n` inner samples is used.
pub fn outer_mean(values: &[f64], n: u64) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, (mean * (1.0 - mean) / n as f64).max(0.0).sqrt());
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}
