//! Unfairness functions over aggregated utility vectors.
//!
//! All supported functions are symmetric, non-negative, and vanish exactly on
//! constant vectors. `unfairness_lipschitz` reports a global Lipschitz
//! constant with respect to the sup-norm on the utility vector, which is what
//! the rounding-bound machinery in the relaxation module composes with the
//! distributional constants.

use std::fmt;

use crate::error::{FotError, Result};
use crate::num::Real;

/// Tolerance used when validating quadratic forms (symmetry, row sums, PSD).
const Q_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum UnfairnessSpec {
    /// `max_i y_i - min_i y_i`.
    Gap,
    /// `max_i |y_i - mean(y)|`.
    MaxDeviationFromMean,
    /// `y' Q y` for a symmetric PSD matrix with zero row sums.
    Quadratic(Vec<Vec<f64>>),
}

impl UnfairnessSpec {
    pub fn validate(&self) -> Result<()> {
        if let UnfairnessSpec::Quadratic(q) = self {
            let n = q.len();
            if n == 0 || q.iter().any(|row| row.len() != n) {
                return Err(FotError::DimensionMismatch(
                    "quadratic unfairness matrix must be square and non-empty".into(),
                ));
            }
            for i in 0..n {
                for j in 0..n {
                    if !q[i][j].is_finite() {
                        return Err(FotError::InvalidInstance("non-finite entry in Q".into()));
                    }
                    if (q[i][j] - q[j][i]).abs() > Q_TOL {
                        return Err(FotError::InvalidInstance("Q is not symmetric".into()));
                    }
                }
                let row_sum: f64 = q[i].iter().sum();
                if row_sum.abs() > Q_TOL {
                    return Err(FotError::InvalidInstance(
                        "Q rows must sum to zero so constant vectors are perfectly fair".into(),
                    ));
                }
            }
            let eigs = symmetric_eigenvalues(q);
            let scale = q
                .iter()
                .flatten()
                .fold(1.0f64, |a, v| a.max(v.abs()));
            if eigs.iter().any(|l| *l < -Q_TOL * scale * n as f64) {
                return Err(FotError::InvalidInstance("Q is not positive semidefinite".into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for UnfairnessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnfairnessSpec::Gap => write!(f, "gap"),
            UnfairnessSpec::MaxDeviationFromMean => write!(f, "maxdev"),
            UnfairnessSpec::Quadratic(_) => write!(f, "quad"),
        }
    }
}

/// Evaluate the unfairness of an aggregated utility vector.
pub fn unfairness<F: Real>(spec: &UnfairnessSpec, y: &[F]) -> Result<F> {
    if y.is_empty() {
        return Err(FotError::EmptySequence);
    }
    match spec {
        UnfairnessSpec::Gap => {
            let max = y.iter().copied().fold(F::neg_infinity(), F::max);
            let min = y.iter().copied().fold(F::infinity(), F::min);
            Ok(max - min)
        }
        UnfairnessSpec::MaxDeviationFromMean => {
            let sum: F = y.iter().copied().sum();
            let mean = sum / F::from_usize(y.len()).unwrap();
            Ok(y.iter().map(|v| (*v - mean).abs()).fold(F::zero(), F::max))
        }
        UnfairnessSpec::Quadratic(q) => {
            if q.len() != y.len() {
                return Err(FotError::DimensionMismatch(format!(
                    "Q is {}x{} but y has length {}",
                    q.len(),
                    q.len(),
                    y.len()
                )));
            }
            let mut acc = F::zero();
            for (i, row) in q.iter().enumerate() {
                for (j, qij) in row.iter().enumerate() {
                    acc = acc + F::of(*qij) * y[i] * y[j];
                }
            }
            // PSD plus zero row sums keeps the true value non-negative;
            // rounding can leave a tiny negative residue.
            Ok(acc.max(F::zero()))
        }
    }
}

/// Global Lipschitz constant of the unfairness function with respect to the
/// sup-norm on `y`. Quadratic forms are only Lipschitz on a bounded box, so a
/// box radius must be supplied for them.
pub fn unfairness_lipschitz(spec: &UnfairnessSpec, n: usize, box_radius: Option<f64>) -> Result<f64> {
    match spec {
        // |(max-min)(y) - (max-min)(y')| <= 2 ||y-y'||_inf
        UnfairnessSpec::Gap => Ok(2.0),
        UnfairnessSpec::MaxDeviationFromMean => Ok(2.0),
        UnfairnessSpec::Quadratic(q) => {
            let r = box_radius.ok_or_else(|| {
                FotError::Unsupported(
                    "quadratic unfairness needs a domain box radius for a Lipschitz constant".into(),
                )
            })?;
            let inf_norm = q
                .iter()
                .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0f64, f64::max);
            Ok(2.0 * n as f64 * inf_norm * r)
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    let mut a: Vec<Vec<f64>> = q.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                if a[p][r].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

pub fn parse_unfairness(text: &str) -> Result<UnfairnessSpec> {
    match text.trim() {
        "gap" => Ok(UnfairnessSpec::Gap),
        "maxdev" => Ok(UnfairnessSpec::MaxDeviationFromMean),
        other => {
            if let Some(path) = other.strip_prefix("quad:") {
                let raw = std::fs::read_to_string(path)?;
                let q: Vec<Vec<f64>> = serde_json::from_str(&raw)?;
                let spec = UnfairnessSpec::Quadratic(q);
                spec.validate()?;
                Ok(spec)
            } else {
                Err(FotError::Parse(format!("unknown unfairness function `{other}`")))
            }
        }
    }
}
