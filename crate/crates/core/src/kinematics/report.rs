use serde::Serialize;

/// Statistical tolerance in combined standard errors.
pub const Z_MAX: f64 = 4.0;

/// Absolute tolerance when both sides are exact.
pub const EXACT_TOL: f64 = 1e-12;

/// Outcome of one identity at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub identity: String,
    /// The identity being checked, written out as a formula.
    pub anchor: String,
    pub params: String,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub stderr: f64,
    pub z: f64,
    /// `None` for informational reports.
    pub pass: Option<bool>,
    /// Inner samples per trial (or total samples for single-cone identities).
    pub n: u64,
    /// Number of random rotations.
    pub rotations: u64,
    pub seed: u64,
    pub degenerate_trials: u64,
    pub degenerate_samples: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Side {
    pub value: f64,
    pub stderr: f64,
}

impl Side {
    pub fn new(value: f64, stderr: f64) -> Side {
        Side { value, stderr }
    }

    pub fn exact(value: f64) -> Side {
        Side { value, stderr: 0.0 }
    }
}

/// Fields shared by every report of one run.
#[derive(Clone, Debug, Default)]
pub struct RunInfo {
    pub identity: String,
    pub n: u64,
    pub rotations: u64,
    pub seed: u64,
    pub degenerate_trials: u64,
    pub degenerate_samples: u64,
}

impl Report {
    pub fn compare(info: &RunInfo, anchor: impl Into<String>, params: impl Into<String>, lhs: Side, rhs: Side) -> Report {
        let stderr = (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt();
        let diff = lhs.value - rhs.value;
        let (z, pass) = if stderr > 0.0 {
            let z = diff / stderr;
            (z, z.abs() <= Z_MAX)
        } else {
            (0.0, diff.abs() <= EXACT_TOL)
        };
        Report {
            identity: info.identity.clone(),
            anchor: anchor.into(),
            params: params.into(),
            lhs: lhs.value,
            lhs_stderr: lhs.stderr,
            rhs: rhs.value,
            rhs_stderr: rhs.stderr,
            stderr,
            z,
            pass: Some(pass),
            n: info.n,
            rotations: info.rotations,
            seed: info.seed,
            degenerate_trials: info.degenerate_trials,
            degenerate_samples: info.degenerate_samples,
        }
    }

    pub fn informational(mut self) -> Report {
        self.pass = None;
        self
    }

    pub fn passed(&self) -> bool {
        self.pass != Some(false)
    }
}
