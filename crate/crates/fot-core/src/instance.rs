//! Problem instances: decisions, per-stakeholder utilities, an efficiency
//! metric, and the alpha-efficiency filter that defines the feasible set for
//! every period.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{FotError, Result};
use crate::Scalar;

/// A finite decision set with an `n x k` utility matrix and a length-`k`
/// efficiency vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    /// `utilities[i][j]` is the utility of decision `j` for stakeholder `i`.
    pub utilities: Vec<Vec<Scalar>>,
    /// `efficiency[j] = c(x_j)`.
    pub efficiency: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 {
            return Err(FotError::InvalidInstance("n and k must be at least 1".into()));
        }
        if self.utilities.len() != self.n {
            return Err(FotError::InvalidInstance(format!(
                "utilities has {} rows, expected n={}",
                self.utilities.len(),
                self.n
            )));
        }
        for (i, row) in self.utilities.iter().enumerate() {
            if row.len() != self.k {
                return Err(FotError::InvalidInstance(format!(
                    "utilities row {i} has length {}, expected k={}",
                    row.len(),
                    self.k
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(FotError::InvalidInstance(format!(
                    "non-finite utility {v} in row {i}"
                )));
            }
        }
        if self.efficiency.len() != self.k {
            return Err(FotError::InvalidInstance(format!(
                "efficiency has length {}, expected k={}",
                self.efficiency.len(),
                self.k
            )));
        }
        if self.efficiency.iter().any(|v| !v.is_finite()) {
            return Err(FotError::InvalidInstance("non-finite efficiency value".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(FotError::InvalidInstance(format!(
                "alpha {} outside (0, 1]",
                self.alpha
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.k {
                return Err(FotError::InvalidInstance(format!(
                    "labels has length {}, expected k={}",
                    labels.len(),
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// Utility column of decision `j`: one entry per stakeholder.
    pub fn utility_column(&self, j: usize) -> Vec<Scalar> {
        (0..self.n).map(|i| self.utilities[i][j]).collect()
    }
}

/// The surviving alpha-efficient decision subset.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredInstance {
    pub base: Instance,
    /// Surviving decision indices, in original order.
    pub kept: Vec<usize>,
    /// Maximum efficiency over all decisions.
    pub opt: Scalar,
}

impl FilteredInstance {
    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn k(&self) -> usize {
        self.kept.len()
    }

    /// Utility of surviving decision `idx` (position in `kept`) for
    /// stakeholder `i`.
    pub fn utility(&self, i: usize, idx: usize) -> Scalar {
        self.base.utilities[i][self.kept[idx]]
    }

    /// Per-stakeholder utility rows restricted to the surviving decisions.
    pub fn utility_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.n())
            .map(|i| self.kept.iter().map(|j| self.base.utilities[i][*j]).collect())
            .collect()
    }

    pub fn efficiency(&self, idx: usize) -> Scalar {
        self.base.efficiency[self.kept[idx]]
    }
}

/// Keep the decisions with `c_j >= alpha * max_j c_j`.
///
/// The rule is applied verbatim even when the maximum efficiency is negative;
/// see [`alpha_filter_offset`] for cost-type metrics.
pub fn alpha_filter(inst: &Instance) -> Result<FilteredInstance> {
    inst.validate()?;
    let opt = inst.efficiency.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // With opt < 0 the verbatim threshold alpha*opt exceeds opt, which would
    // empty the set; clamping at opt keeps the argmax alive in that regime.
    let threshold = (inst.alpha * opt).min(opt);
    let kept: Vec<usize> = (0..inst.k).filter(|j| inst.efficiency[*j] >= threshold).collect();
    debug_assert!(!kept.is_empty());
    Ok(FilteredInstance { base: inst.clone(), kept, opt })
}

/// Alpha filter after shifting efficiencies by `-min_j c_j`, so the threshold
/// behaves as a fraction of the best-vs-worst gap. Intended for negative
/// (cost-type) efficiency metrics.
pub fn alpha_filter_offset(inst: &Instance) -> Result<FilteredInstance> {
    inst.validate()?;
    let min = inst.efficiency.iter().copied().fold(f64::INFINITY, f64::min);
    let mut shifted = inst.clone();
    for c in &mut shifted.efficiency {
        *c -= min;
    }
    let filtered = alpha_filter(&shifted)?;
    Ok(FilteredInstance {
        base: inst.clone(),
        kept: filtered.kept,
        opt: filtered.opt + min,
    })
}

/// How the efficiency metric of a pickup-tour instance is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourEfficiency {
    /// `c = -(total tour length)`.
    NegTourLength,
    /// `c = sum of stakeholder utilities`.
    SocialWelfare,
}

/// One decision per pickup order of `n <= 9` stakeholders. The vehicle leaves
/// the hub, picks everyone up in order, and returns. A stakeholder's utility
/// is the negated time they spend in the vehicle (pickup to hub return,
/// unit speed).
pub fn gen_tsp_pickup(
    points: &[[f64; 2]],
    hub: [f64; 2],
    alpha: f64,
    mode: TourEfficiency,
) -> Result<Instance> {
    let n = points.len();
    if n == 0 {
        return Err(FotError::InvalidInstance("no pickup points".into()));
    }
    if n > 9 {
        return Err(FotError::SearchSpaceExceeded(format!(
            "{n}! pickup orders; at most 9 stakeholders supported"
        )));
    }
    let orders = permutations(n);
    let k = orders.len();
    let mut utilities = vec![vec![0.0; k]; n];
    let mut efficiency = vec![0.0; k];
    let mut labels = Vec::with_capacity(k);
    for (j, order) in orders.iter().enumerate() {
        let mut tour_len = dist2(hub, points[order[0]]);
        // remaining[m] = distance from the m-th pickup to the hub along the tour
        let mut legs = Vec::with_capacity(n);
        for w in order.windows(2) {
            legs.push(dist2(points[w[0]], points[w[1]]));
        }
        let last_leg = dist2(points[order[n - 1]], hub);
        tour_len += legs.iter().sum::<f64>() + last_leg;
        let mut to_hub = last_leg;
        for (m, &stakeholder) in order.iter().enumerate().rev() {
            utilities[stakeholder][j] = -to_hub;
            if m > 0 {
                to_hub += legs[m - 1];
            }
        }
        efficiency[j] = match mode {
            TourEfficiency::NegTourLength => -tour_len,
            TourEfficiency::SocialWelfare => (0..n).map(|i| utilities[i][j]).sum(),
        };
        labels.push(
            order
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("-"),
        );
    }
    let inst = Instance { n, k, alpha, utilities, efficiency, labels: Some(labels) };
    inst.validate()?;
    Ok(inst)
}

/// One decision per base; a street's utility is `max(0, cutoff - distance)`,
/// efficiency is the social welfare.
pub fn gen_ambulance(
    bases: &[[f64; 2]],
    streets: &[[f64; 2]],
    cutoff: f64,
    alpha: f64,
) -> Result<Instance> {
    if bases.is_empty() || streets.is_empty() {
        return Err(FotError::InvalidInstance("need at least one base and one street".into()));
    }
    if cutoff <= 0.0 {
        return Err(FotError::InvalidInstance("cutoff must be positive".into()));
    }
    let n = streets.len();
    let k = bases.len();
    let mut utilities = vec![vec![0.0; k]; n];
    for (j, base) in bases.iter().enumerate() {
        for (i, street) in streets.iter().enumerate() {
            utilities[i][j] = (cutoff - dist2(*base, *street)).max(0.0);
        }
    }
    let efficiency = (0..k).map(|j| (0..n).map(|i| utilities[i][j]).sum()).collect();
    let inst = Instance {
        n,
        k,
        alpha,
        utilities,
        efficiency,
        labels: Some((0..k).map(|j| format!("base-{j}")).collect()),
    };
    inst.validate()?;
    Ok(inst)
}

/// Reproducible random instance with utilities and efficiency in `[0,1]`.
pub fn gen_random(n: usize, k: usize, seed: u64, alpha: f64) -> Result<Instance> {
    if n < 1 || k < 1 {
        return Err(FotError::InvalidInstance("n and k must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let utilities = (0..n)
        .map(|_| (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect())
        .collect();
    let efficiency = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let inst = Instance { n, k, alpha, utilities, efficiency, labels: None };
    inst.validate()?;
    Ok(inst)
}

pub fn load_instance<P: AsRef<Path>>(path: P) -> Result<Instance> {
    let raw = std::fs::read_to_string(path)?;
    parse_instance(&raw)
}

pub fn parse_instance(raw: &str) -> Result<Instance> {
    let inst: Instance = serde_json::from_str(raw)?;
    inst.validate()?;
    Ok(inst)
}

pub fn save_instance<P: AsRef<Path>>(inst: &Instance, path: P) -> Result<()> {
    inst.validate()?;
    let text = serde_json::to_string_pretty(inst)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
