//! Mixed-integer constraint systems for the aggregation functions, in both
//! sequence space (one row block per period) and probability space (rows over
//! a simplex of decision weights).
//!
//! The systems are verified rather than solved here: `witness_check` tests a
//! specific assignment, and `brute_force_binaries` enumerates every binary
//! pattern and solves the remaining pure LP for the attainable values of the
//! distinguished variable `y`. The mean-absolute-deviation system in
//! probability space carries genuine bilinear `p·s` terms; those are stored
//! symbolically and only ever checked by substitution.

use crate::aggregation::AggregatorSpec;
use crate::error::{FotError, Result};
use crate::lp::{solve_lp, Bounds, LpProblem, LpStatus, Sense};

/// Default support threshold for probability-space systems.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Tolerance for witness feasibility checks.
pub const WITNESS_TOL: f64 = 1e-9;
const PCTL_INT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse linear part, indices into the full variable vector.
    pub coeffs: Vec<(usize, f64)>,
    /// Bilinear terms `w · x_a · x_b` (both continuous); empty except for the
    /// probability-space mean-absolute-deviation system.
    pub quad: Vec<(usize, usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub label: String,
}

/// Linear (plus declared bilinear) constraints over continuous variables
/// `0..num_continuous` followed by binary variables.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub num_continuous: usize,
    pub num_binary: usize,
    pub constraints: Vec<Constraint>,
    pub objective: Option<Vec<f64>>,
    pub var_names: Vec<String>,
    pub big_m: f64,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub continuous_values: Vec<f64>,
    pub binary_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessOutcome {
    Satisfied,
    Violated { index: usize, label: String, residual: f64 },
}

impl ConstraintSystem {
    fn new(num_continuous: usize, num_binary: usize, big_m: f64, eps: f64) -> Self {
        ConstraintSystem {
            num_continuous,
            num_binary,
            constraints: Vec::new(),
            objective: None,
            var_names: vec![String::new(); num_continuous + num_binary],
            big_m,
            eps,
        }
    }

    fn name(&mut self, idx: usize, name: impl Into<String>) {
        self.var_names[idx] = name.into();
    }

    fn add(
        &mut self,
        label: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.constraints.push(Constraint { coeffs, quad: Vec::new(), sense, rhs, label: label.into() });
    }

    fn total_vars(&self) -> usize {
        self.num_continuous + self.num_binary
    }

    /// Index of the distinguished aggregation-value variable.
    pub fn y_index(&self) -> Result<usize> {
        self.var_names
            .iter()
            .position(|n| n == "y")
            .ok_or_else(|| FotError::Unsupported("system has no variable named y".into()))
    }
}

fn range_of(vals: &[f64]) -> f64 {
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Encode one base aggregation function over a fixed utility sequence.
/// Every feasible assignment pins `y` to the functional value; the binaries
/// are generally not unique (ties admit several certificates).
pub fn encode_sequence_agg(spec: &AggregatorSpec, seq: &[f64]) -> Result<ConstraintSystem> {
    spec.validate()?;
    if seq.is_empty() {
        return Err(FotError::EmptySequence);
    }
    let t = seq.len();
    match spec {
        AggregatorSpec::Minimum | AggregatorSpec::Maximum => {
            let maximum = matches!(spec, AggregatorSpec::Maximum);
            let m = range_of(seq) + 1.0;
            let mut cs = ConstraintSystem::new(1, t, m, DEFAULT_EPS);
            cs.name(0, "y");
            for i in 0..t {
                cs.name(1 + i, format!("b_{}", i + 1));
            }
            for (i, u) in seq.iter().enumerate() {
                let b = 1 + i;
                if maximum {
                    // u + M b >= y >= u
                    cs.add(format!("ub_{}", i + 1), vec![(0, 1.0), (b, -m)], Sense::Le, *u);
                    cs.add(format!("lb_{}", i + 1), vec![(0, 1.0)], Sense::Ge, *u);
                } else {
                    // u - M b <= y <= u
                    cs.add(format!("lb_{}", i + 1), vec![(0, 1.0), (b, m)], Sense::Ge, *u);
                    cs.add(format!("ub_{}", i + 1), vec![(0, 1.0)], Sense::Le, *u);
                }
            }
            let sum: Vec<(usize, f64)> = (0..t).map(|i| (1 + i, 1.0)).collect();
            cs.add("pick_one", sum, Sense::Eq, (t - 1) as f64);
            Ok(cs)
        }
        AggregatorSpec::Percentile(rho) => {
            let m = range_of(seq) + 1.0;
            // continuous: y, w_1..w_T; binary: b_{t,s} row-major
            let mut cs = ConstraintSystem::new(1 + t, t * t, m, DEFAULT_EPS);
            cs.name(0, "y");
            for i in 0..t {
                cs.name(1 + i, format!("w_{}", i + 1));
            }
            let b = |ti: usize, si: usize| 1 + t + ti * t + si;
            for ti in 0..t {
                for si in 0..t {
                    cs.name(b(ti, si), format!("b_{}_{}", ti + 1, si + 1));
                }
            }
            for ti in 0..t - 1 {
                cs.add(
                    format!("sorted_{}", ti + 1),
                    vec![(1 + ti, 1.0), (1 + ti + 1, -1.0)],
                    Sense::Le,
                    0.0,
                );
            }
            for ti in 0..t {
                for si in 0..t {
                    // w_t <= u_s + M(1 - b_ts) and w_t >= u_s - M(1 - b_ts)
                    cs.add(
                        format!("match_ub_{}_{}", ti + 1, si + 1),
                        vec![(1 + ti, 1.0), (b(ti, si), m)],
                        Sense::Le,
                        seq[si] + m,
                    );
                    cs.add(
                        format!("match_lb_{}_{}", ti + 1, si + 1),
                        vec![(1 + ti, 1.0), (b(ti, si), -m)],
                        Sense::Ge,
                        seq[si] - m,
                    );
                }
            }
            for si in 0..t {
                let row: Vec<(usize, f64)> = (0..t).map(|ti| (b(ti, si), 1.0)).collect();
                cs.add(format!("assign_col_{}", si + 1), row, Sense::Eq, 1.0);
            }
            for ti in 0..t {
                let row: Vec<(usize, f64)> = (0..t).map(|si| (b(ti, si), 1.0)).collect();
                cs.add(format!("assign_row_{}", ti + 1), row, Sense::Eq, 1.0);
            }
            // tie y to the selected order statistic, mirroring the functional
            let pos = rho * t as f64;
            let rounded = pos.round();
            if (pos - rounded).abs() <= PCTL_INT_TOL {
                let r = rounded as usize;
                if r == 0 {
                    cs.add("pick", vec![(0, 1.0), (1, -1.0)], Sense::Eq, 0.0);
                } else if r >= t {
                    cs.add("pick", vec![(0, 1.0), (t, -1.0)], Sense::Eq, 0.0);
                } else {
                    cs.add(
                        "pick_mid",
                        vec![(0, 2.0), (r, -1.0), (1 + r, -1.0)],
                        Sense::Eq,
                        0.0,
                    );
                }
            } else {
                let r = pos.ceil() as usize;
                cs.add("pick", vec![(0, 1.0), (r, -1.0)], Sense::Eq, 0.0);
            }
            Ok(cs)
        }
        AggregatorSpec::ThresholdExceedance(h) => {
            let mut all = seq.to_vec();
            all.push(*h);
            let m = range_of(&all) + 1.0;
            let mut cs = ConstraintSystem::new(1, t, m, DEFAULT_EPS);
            cs.name(0, "y");
            for i in 0..t {
                cs.name(1 + i, format!("b_{}", i + 1));
            }
            for (i, u) in seq.iter().enumerate() {
                let b = 1 + i;
                // u <= h + M b and u >= h - (1 - b) M, with an eps margin on
                // the first row so a tie u = h forces b = 1 (ties count as
                // exceedances in the functional; the plain rows leave b free)
                cs.add(format!("on_{}", i + 1), vec![(b, m)], Sense::Ge, u - h + cs.eps);
                cs.add(format!("off_{}", i + 1), vec![(b, m)], Sense::Le, u - h + m);
            }
            let mut row: Vec<(usize, f64)> = vec![(0, 1.0)];
            row.extend((0..t).map(|i| (1 + i, -1.0 / t as f64)));
            cs.add("fraction", row, Sense::Eq, 0.0);
            Ok(cs)
        }
        AggregatorSpec::MeanAbsDev => {
            // deviations reach almost the full range, so the indicator rows
            // need headroom of two ranges, not one
            let m = 2.0 * range_of(seq) + 1.0;
            // continuous: y, mean, v_1..v_T; binary: b_1..b_T
            let mut cs = ConstraintSystem::new(2 + t, t, m, DEFAULT_EPS);
            cs.name(0, "y");
            cs.name(1, "mean");
            for i in 0..t {
                cs.name(2 + i, format!("v_{}", i + 1));
                cs.name(2 + t + i, format!("b_{}", i + 1));
            }
            let avg = 1.0 / t as f64;
            let total: f64 = seq.iter().sum();
            cs.add("mean", vec![(1, 1.0)], Sense::Eq, total * avg);
            for (i, u) in seq.iter().enumerate() {
                let v = 2 + i;
                let b = 2 + t + i;
                cs.add(format!("dev_lb_pos_{}", i + 1), vec![(v, 1.0), (1, 1.0)], Sense::Ge, *u);
                cs.add(format!("dev_lb_neg_{}", i + 1), vec![(v, 1.0), (1, -1.0)], Sense::Ge, -u);
                cs.add(
                    format!("dev_ub_pos_{}", i + 1),
                    vec![(v, 1.0), (1, 1.0), (b, -m)],
                    Sense::Le,
                    *u,
                );
                cs.add(
                    format!("dev_ub_neg_{}", i + 1),
                    vec![(v, 1.0), (1, -1.0), (b, m)],
                    Sense::Le,
                    m - u,
                );
            }
            let mut row: Vec<(usize, f64)> = vec![(0, 1.0)];
            row.extend((0..t).map(|i| (2 + i, -avg)));
            cs.add("aggregate", row, Sense::Eq, 0.0);
            Ok(cs)
        }
        other => Err(FotError::Unsupported(format!(
            "combinator {other:?} has no direct encoding; compose at evaluation level"
        ))),
    }
}

/// Probability-space encoding modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMode {
    Min,
    Threshold,
    Mad,
}

/// Encode a distributional aggregation over `k` candidate utilities with the
/// simplex variables `p_1..p_k` included. The `Min` system presumes
/// non-negative utility constants (its indicator relaxations degenerate to
/// `y >= 0` on inactive columns). The threshold variant needs its cutoff `h`
/// passed through `threshold`.
pub fn encode_prob_agg(
    utilities: &[f64],
    mode: ProbMode,
    threshold: Option<f64>,
    eps: f64,
) -> Result<ConstraintSystem> {
    let k = utilities.len();
    if k == 0 {
        return Err(FotError::EmptySequence);
    }
    if eps <= 0.0 {
        return Err(FotError::Unsupported("eps must be positive".into()));
    }
    match mode {
        ProbMode::Min => {
            // the inactive-column rows degenerate to y <= M and y + M b >= 0,
            // so M must cover the utility magnitudes, not just their range
            let hi = utilities.iter().cloned().fold(0.0f64, f64::max);
            let lo = utilities.iter().cloned().fold(0.0f64, f64::min);
            let m = hi - lo + 1.0;
            // continuous: p_1..p_k, y; binary: r_1..r_k, b_1..b_k
            let mut cs = ConstraintSystem::new(k + 1, 2 * k, m, eps);
            for j in 0..k {
                cs.name(j, format!("p_{}", j + 1));
                cs.name(k + 1 + j, format!("r_{}", j + 1));
                cs.name(2 * k + 1 + j, format!("b_{}", j + 1));
            }
            cs.name(k, "y");
            let r = |j: usize| k + 1 + j;
            let b = |j: usize| 2 * k + 1 + j;
            for j in 0..k {
                cs.add(format!("support_ub_{}", j + 1), vec![(r(j), 1.0), (j, -1.0)], Sense::Ge, 0.0);
                cs.add(format!("support_lb_{}", j + 1), vec![(j, 1.0), (r(j), -eps)], Sense::Ge, 0.0);
            }
            let mut row: Vec<(usize, f64)> = (0..k).map(|j| (b(j), 1.0)).collect();
            row.extend((0..k).map(|j| (r(j), -1.0)));
            cs.add("active_count", row, Sense::Eq, -1.0);
            for (j, u) in utilities.iter().enumerate() {
                // u r_j <= y + M b_j  and  y <= u r_j + M(1 - r_j)
                cs.add(
                    format!("min_lb_{}", j + 1),
                    vec![(k, 1.0), (b(j), m), (r(j), -u)],
                    Sense::Ge,
                    0.0,
                );
                cs.add(
                    format!("min_ub_{}", j + 1),
                    vec![(k, 1.0), (r(j), m - u)],
                    Sense::Le,
                    m,
                );
            }
            let simplex: Vec<(usize, f64)> = (0..k).map(|j| (j, 1.0)).collect();
            cs.add("simplex", simplex, Sense::Eq, 1.0);
            Ok(cs)
        }
        ProbMode::Threshold => {
            let h = threshold
                .ok_or_else(|| FotError::Unsupported("threshold mode needs a cutoff".into()))?;
            let mut cs = ConstraintSystem::new(k + 1, 0, 1.0, eps);
            for j in 0..k {
                cs.name(j, format!("p_{}", j + 1));
            }
            cs.name(k, "y");
            // b_j are parameters: 1 when u_j >= h
            let mut row: Vec<(usize, f64)> = vec![(k, 1.0)];
            for (j, u) in utilities.iter().enumerate() {
                if *u >= h {
                    row.push((j, -1.0));
                }
            }
            cs.add("exceedance", row, Sense::Eq, 0.0);
            for j in 0..k {
                cs.add(format!("nonneg_{}", j + 1), vec![(j, 1.0)], Sense::Ge, 0.0);
            }
            let simplex: Vec<(usize, f64)> = (0..k).map(|j| (j, 1.0)).collect();
            cs.add("simplex", simplex, Sense::Eq, 1.0);
            Ok(cs)
        }
        ProbMode::Mad => {
            let m = 2.0 * range_of(utilities) + 1.0;
            // continuous: p_1..p_k, mean, s_1..s_k, y; binary: b_1..b_k
            let mut cs = ConstraintSystem::new(2 * k + 2, k, m, eps);
            for j in 0..k {
                cs.name(j, format!("p_{}", j + 1));
                cs.name(k + 1 + j, format!("s_{}", j + 1));
                cs.name(2 * k + 2 + j, format!("b_{}", j + 1));
            }
            cs.name(k, "mean");
            cs.name(2 * k + 1, "y");
            let s = |j: usize| k + 1 + j;
            let b = |j: usize| 2 * k + 2 + j;
            let y = 2 * k + 1;
            let mut row: Vec<(usize, f64)> = vec![(k, 1.0)];
            row.extend(utilities.iter().enumerate().map(|(j, u)| (j, -u)));
            cs.add("mean", row, Sense::Eq, 0.0);
            for (j, u) in utilities.iter().enumerate() {
                cs.add(format!("dev_lb_pos_{}", j + 1), vec![(s(j), 1.0), (k, 1.0)], Sense::Ge, *u);
                cs.add(format!("dev_lb_neg_{}", j + 1), vec![(s(j), 1.0), (k, -1.0)], Sense::Ge, -u);
                cs.add(
                    format!("dev_ub_pos_{}", j + 1),
                    vec![(s(j), 1.0), (k, 1.0), (b(j), -m)],
                    Sense::Le,
                    *u,
                );
                cs.add(
                    format!("dev_ub_neg_{}", j + 1),
                    vec![(s(j), 1.0), (k, -1.0), (b(j), m)],
                    Sense::Le,
                    m - u,
                );
            }
            let quad: Vec<(usize, usize, f64)> = (0..k).map(|j| (j, s(j), -1.0)).collect();
            cs.constraints.push(Constraint {
                coeffs: vec![(y, 1.0)],
                quad,
                sense: Sense::Eq,
                rhs: 0.0,
                label: "aggregate".into(),
            });
            for j in 0..k {
                cs.add(format!("nonneg_{}", j + 1), vec![(j, 1.0)], Sense::Ge, 0.0);
            }
            let simplex: Vec<(usize, f64)> = (0..k).map(|j| (j, 1.0)).collect();
            cs.add("simplex", simplex, Sense::Eq, 1.0);
            Ok(cs)
        }
    }
}

/// Evaluate a witness against every constraint with tolerance `WITNESS_TOL`;
/// the first violation is reported with its label.
pub fn witness_check(cs: &ConstraintSystem, w: &Witness) -> Result<WitnessOutcome> {
    if w.continuous_values.len() != cs.num_continuous || w.binary_values.len() != cs.num_binary {
        return Err(FotError::DimensionMismatch(format!(
            "witness has {}+{} values for a {}+{} system",
            w.continuous_values.len(),
            w.binary_values.len(),
            cs.num_continuous,
            cs.num_binary
        )));
    }
    for (i, v) in w.binary_values.iter().enumerate() {
        if *v != 0.0 && *v != 1.0 {
            return Err(FotError::Witness(format!(
                "variable {} has non-binary value {v}",
                cs.var_names[cs.num_continuous + i]
            )));
        }
    }
    let value = |idx: usize| -> f64 {
        if idx < cs.num_continuous {
            w.continuous_values[idx]
        } else {
            w.binary_values[idx - cs.num_continuous]
        }
    };
    for (i, c) in cs.constraints.iter().enumerate() {
        let mut lhs: f64 = c.coeffs.iter().map(|(j, a)| a * value(*j)).sum();
        lhs += c
            .quad
            .iter()
            .map(|(a, b, wq)| wq * value(*a) * value(*b))
            .sum::<f64>();
        let residual = match c.sense {
            Sense::Le => c.rhs - lhs,
            Sense::Ge => lhs - c.rhs,
            Sense::Eq => -(lhs - c.rhs).abs(),
        };
        if residual < -WITNESS_TOL {
            return Ok(WitnessOutcome::Violated { index: i, label: c.label.clone(), residual });
        }
    }
    Ok(WitnessOutcome::Satisfied)
}

/// Enumerate every binary pattern, solve the residual LP for min and max of
/// `y` under each, and return the attainable values (merged within 1e-9).
/// Bilinear terms are admitted only when one factor is pinned by
/// `fixed_continuous`.
pub fn brute_force_binaries(
    cs: &ConstraintSystem,
    fixed_continuous: &[(usize, f64)],
) -> Result<Vec<f64>> {
    if cs.num_binary > 20 {
        return Err(FotError::SearchSpaceExceeded(format!(
            "{} binary variables exceed the brute-force cap of 20",
            cs.num_binary
        )));
    }
    let y = cs.y_index()?;
    let mut fixed = vec![None; cs.num_continuous];
    for (idx, v) in fixed_continuous {
        if *idx >= cs.num_continuous {
            return Err(FotError::DimensionMismatch(format!(
                "fixed index {idx} out of range"
            )));
        }
        fixed[*idx] = Some(*v);
    }
    let mut values: Vec<f64> = Vec::new();
    for pattern in 0u32..(1u32 << cs.num_binary) {
        let bit = |j: usize| ((pattern >> j) & 1) as f64;
        let mut minimize = vec![0.0; cs.num_continuous];
        minimize[y] = 1.0;
        let mut lp = LpProblem::new(minimize);
        lp.bounds = (0..cs.num_continuous)
            .map(|j| match fixed[j] {
                Some(v) => Bounds { lower: v, upper: v },
                None => Bounds::free(),
            })
            .collect();
        let mut pattern_ok = true;
        for c in &cs.constraints {
            let mut coeffs = vec![0.0; cs.num_continuous];
            let mut rhs = c.rhs;
            let mut any_cont = false;
            for (j, a) in &c.coeffs {
                if *j < cs.num_continuous {
                    coeffs[*j] += a;
                    any_cont = true;
                } else {
                    rhs -= a * bit(*j - cs.num_continuous);
                }
            }
            for (a, b, wq) in &c.quad {
                match (fixed[*a], fixed[*b]) {
                    (Some(v), _) => {
                        coeffs[*b] += wq * v;
                        any_cont = true;
                    }
                    (None, Some(v)) => {
                        coeffs[*a] += wq * v;
                        any_cont = true;
                    }
                    (None, None) => {
                        return Err(FotError::Unsupported(
                            "bilinear term with no fixed factor cannot be brute-forced".into(),
                        ))
                    }
                }
            }
            if !any_cont {
                let ok = match c.sense {
                    Sense::Le => 0.0 <= rhs + WITNESS_TOL,
                    Sense::Ge => 0.0 >= rhs - WITNESS_TOL,
                    Sense::Eq => rhs.abs() <= WITNESS_TOL,
                };
                if !ok {
                    pattern_ok = false;
                    break;
                }
                continue;
            }
            lp.push_row(coeffs, c.sense, rhs);
        }
        if !pattern_ok {
            continue;
        }
        let low = solve_lp(&lp)?;
        match low.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(FotError::Lp(format!(
                    "y unbounded below under binary pattern {pattern:b}"
                )))
            }
            LpStatus::Optimal => values.push(low.primal[y]),
        }
        let mut high_lp = lp.clone();
        high_lp.minimize[y] = -1.0;
        let high = solve_lp(&high_lp)?;
        match high.status {
            LpStatus::Infeasible => unreachable!("same feasible region"),
            LpStatus::Unbounded => {
                return Err(FotError::Lp(format!(
                    "y unbounded above under binary pattern {pattern:b}"
                )))
            }
            LpStatus::Optimal => values.push(high.primal[y]),
        }
    }
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    Ok(values)
}

/// Natural witness for a sequence-space system, read off the functional
/// evaluation itself.
pub fn sequence_witness(spec: &AggregatorSpec, seq: &[f64]) -> Result<Witness> {
    let t = seq.len();
    let value = crate::aggregation::aggregate(spec, seq)?;
    match spec {
        AggregatorSpec::Minimum | AggregatorSpec::Maximum => {
            let pick = if matches!(spec, AggregatorSpec::Maximum) {
                seq.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                    .unwrap()
                    .0
            } else {
                seq.iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                    .unwrap()
                    .0
            };
            let bins = (0..t).map(|i| if i == pick { 0.0 } else { 1.0 }).collect();
            Ok(Witness { continuous_values: vec![value], binary_values: bins })
        }
        AggregatorSpec::Percentile(_) => {
            let mut order: Vec<usize> = (0..t).collect();
            order.sort_by(|a, b| seq[*a].total_cmp(&seq[*b]).then(a.cmp(b)));
            let mut cont = vec![value];
            cont.extend(order.iter().map(|i| seq[*i]));
            let mut bins = vec![0.0; t * t];
            for (ti, si) in order.iter().enumerate() {
                bins[ti * t + si] = 1.0;
            }
            Ok(Witness { continuous_values: cont, binary_values: bins })
        }
        AggregatorSpec::ThresholdExceedance(h) => {
            let bins = seq.iter().map(|u| if *u >= *h { 1.0 } else { 0.0 }).collect();
            Ok(Witness { continuous_values: vec![value], binary_values: bins })
        }
        AggregatorSpec::MeanAbsDev => {
            let mean: f64 = seq.iter().sum::<f64>() / t as f64;
            let mut cont = vec![value, mean];
            cont.extend(seq.iter().map(|u| (u - mean).abs()));
            let bins = seq.iter().map(|u| if *u >= mean { 0.0 } else { 1.0 }).collect();
            Ok(Witness { continuous_values: cont, binary_values: bins })
        }
        other => Err(FotError::Unsupported(format!("no sequence witness for {other:?}"))),
    }
}

/// Render a system in LP-format text. Bilinear terms appear as
/// `w x_a * x_b` inside square brackets, which `lp::parse_lp_text` rejects;
/// they are meant for external inspection only.
pub fn to_lp_text(cs: &ConstraintSystem) -> String {
    let mut out = String::new();
    out.push_str("\\ constraint system export\n");
    out.push_str("Minimize\n obj:");
    let obj_coeff = |j: usize| cs.objective.as_ref().map_or(0.0, |o| o[j]);
    for j in 0..cs.total_vars() {
        out.push_str(&format!(" + {} {}", obj_coeff(j), cs.var_names[j]));
    }
    out.push_str("\nSubject To\n");
    for c in &cs.constraints {
        out.push_str(&format!(" {}:", c.label));
        for (j, a) in &c.coeffs {
            out.push_str(&format!(" + {} {}", a, cs.var_names[*j]));
        }
        if !c.quad.is_empty() {
            out.push_str(" + [");
            for (a, b, w) in &c.quad {
                out.push_str(&format!(" + {} {} * {}", w, cs.var_names[*a], cs.var_names[*b]));
            }
            out.push_str(" ]");
        }
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        out.push_str(&format!(" {} {}\n", sense, c.rhs));
    }
    out.push_str("Bounds\n");
    for j in 0..cs.num_continuous {
        out.push_str(&format!(" {} free\n", cs.var_names[j]));
    }
    if cs.num_binary > 0 {
        out.push_str("Binaries\n");
        for j in cs.num_continuous..cs.total_vars() {
            out.push_str(&format!(" {}", cs.var_names[j]));
        }
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::aggregate;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn minimum_brute_force_singleton() {
        let seq = [3.0, 1.0, 2.0];
        let cs = encode_sequence_agg(&AggregatorSpec::Minimum, &seq).unwrap();
        let vals = brute_force_binaries(&cs, &[]).unwrap();
        assert_eq!(vals.len(), 1, "{vals:?}");
        assert!((vals[0] - 1.0).abs() < 1e-9);
        let w = sequence_witness(&AggregatorSpec::Minimum, &seq).unwrap();
        assert_eq!(witness_check(&cs, &w).unwrap(), WitnessOutcome::Satisfied);
    }

    #[test]
    fn threshold_forced_value() {
        let cs = encode_sequence_agg(&AggregatorSpec::ThresholdExceedance(2.0), &[3.0, 1.0, 2.0])
            .unwrap();
        let vals = brute_force_binaries(&cs, &[]).unwrap();
        assert_eq!(vals.len(), 1);
        assert!((vals[0] - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn mad_of_constant_sequence_is_zero() {
        let cs = encode_sequence_agg(&AggregatorSpec::MeanAbsDev, &[5.0, 5.0]).unwrap();
        let vals = brute_force_binaries(&cs, &[]).unwrap();
        assert_eq!(vals.len(), 1);
        assert!(vals[0].abs() < 1e-9);
    }

    #[test]
    fn percentile_midpoint_branch() {
        let cs = encode_sequence_agg(&AggregatorSpec::Percentile(0.5), &[1.0, 2.0]).unwrap();
        let vals = brute_force_binaries(&cs, &[]).unwrap();
        assert_eq!(vals.len(), 1);
        assert!((vals[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn combinators_rejected() {
        let spec = AggregatorSpec::min_avg_combo(0.5, 0.5);
        assert!(matches!(
            encode_sequence_agg(&spec, &[1.0]),
            Err(FotError::Unsupported(_))
        ));
    }

    #[test]
    fn witness_violation_is_named() {
        let seq = [3.0, 1.0, 2.0];
        let cs = encode_sequence_agg(&AggregatorSpec::Minimum, &seq).unwrap();
        let mut w = sequence_witness(&AggregatorSpec::Minimum, &seq).unwrap();
        w.continuous_values[0] += 1.0; // y off by one
        match witness_check(&cs, &w).unwrap() {
            WitnessOutcome::Violated { label, .. } => assert!(label.starts_with("ub_")),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn fractional_binary_rejected() {
        let cs = encode_sequence_agg(&AggregatorSpec::Minimum, &[1.0, 2.0]).unwrap();
        let w = Witness { continuous_values: vec![1.0], binary_values: vec![0.5, 1.0] };
        assert!(matches!(witness_check(&cs, &w), Err(FotError::Witness(_))));
    }

    #[test]
    fn sequence_encodings_sound_on_random_inputs() {
        let mut rng = StdRng::seed_from_u64(7);
        let specs = [
            AggregatorSpec::Minimum,
            AggregatorSpec::Maximum,
            AggregatorSpec::Percentile(0.4),
            AggregatorSpec::ThresholdExceedance(0.5),
            AggregatorSpec::MeanAbsDev,
        ];
        for spec in &specs {
            for _ in 0..12 {
                let t = rng.gen_range(1..=4);
                let seq: Vec<f64> =
                    (0..t).map(|_| (rng.gen_range(-20..=20) as f64) / 4.0).collect();
                let cs = encode_sequence_agg(spec, &seq).unwrap();
                let vals = brute_force_binaries(&cs, &[]).unwrap();
                let want = aggregate(spec, &seq).unwrap();
                assert_eq!(vals.len(), 1, "{spec:?} on {seq:?} gave {vals:?}");
                assert!((vals[0] - want).abs() < 1e-9, "{spec:?} on {seq:?}");
                let w = sequence_witness(spec, &seq).unwrap();
                assert_eq!(witness_check(&cs, &w).unwrap(), WitnessOutcome::Satisfied);
            }
        }
    }

    #[test]
    fn small_big_m_is_detectable() {
        // shrink M below range: the natural witness for Minimum stops fitting
        let seq = [0.0, 10.0, 4.0];
        let mut cs = encode_sequence_agg(&AggregatorSpec::Minimum, &seq).unwrap();
        let m = 2.0; // range is 10
        for c in cs.constraints.iter_mut() {
            for (j, a) in c.coeffs.iter_mut() {
                if *j >= cs.num_continuous && a.abs() > 1.0 {
                    *a = a.signum() * m;
                }
            }
        }
        let vals = brute_force_binaries(&cs, &[]).unwrap();
        assert!(vals.is_empty() || (vals[0] - 0.0).abs() > 1e-9);
    }

    #[test]
    fn prob_min_matches_support_minimum() {
        let utilities = [3.0, 1.0, 2.0];
        let cs = encode_prob_agg(&utilities, ProbMode::Min, None, DEFAULT_EPS).unwrap();
        // one atom on the middle value
        let fixed = [(0usize, 0.0), (1, 1.0), (2, 0.0)];
        let vals = brute_force_binaries(&cs, &fixed).unwrap();
        assert_eq!(vals.len(), 1);
        assert!((vals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn prob_min_random_supports() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..25 {
            let k = rng.gen_range(1..=3);
            let utilities: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..5.0)).collect();
            let mut p = vec![0.0; k];
            let live: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.6)).collect();
            let live = if live.is_empty() { vec![0] } else { live };
            for j in &live {
                p[*j] = 1.0 / live.len() as f64;
            }
            let cs = encode_prob_agg(&utilities, ProbMode::Min, None, DEFAULT_EPS).unwrap();
            let fixed: Vec<(usize, f64)> = p.iter().cloned().enumerate().collect();
            let vals = brute_force_binaries(&cs, &fixed).unwrap();
            let want = live
                .iter()
                .map(|j| utilities[*j])
                .fold(f64::INFINITY, f64::min);
            assert_eq!(vals.len(), 1, "u={utilities:?} p={p:?} -> {vals:?}");
            assert!((vals[0] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn prob_threshold_linear_evaluation() {
        let utilities = [3.0, 1.0, 2.0];
        let cs = encode_prob_agg(&utilities, ProbMode::Threshold, Some(2.0), DEFAULT_EPS).unwrap();
        assert_eq!(cs.num_binary, 0);
        let fixed = [(0usize, 0.5), (1, 0.25), (2, 0.25)];
        let vals = brute_force_binaries(&cs, &fixed).unwrap();
        assert_eq!(vals.len(), 1);
        assert!((vals[0] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn prob_mad_single_atom_is_zero() {
        let utilities = [4.0, 7.0];
        let cs = encode_prob_agg(&utilities, ProbMode::Mad, None, DEFAULT_EPS).unwrap();
        let fixed = [(0usize, 1.0), (1, 0.0)];
        let vals = brute_force_binaries(&cs, &fixed).unwrap();
        assert_eq!(vals.len(), 1);
        assert!(vals[0].abs() < 1e-9);
    }

    #[test]
    fn prob_mad_matches_closed_form() {
        let utilities = [0.0, 4.0];
        let cs = encode_prob_agg(&utilities, ProbMode::Mad, None, DEFAULT_EPS).unwrap();
        let fixed = [(0usize, 0.25), (1, 0.75)];
        let vals = brute_force_binaries(&cs, &fixed).unwrap();
        // mean 3, deviations (3,1): 0.25*3 + 0.75*1 = 1.5
        assert_eq!(vals.len(), 1);
        assert!((vals[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn mad_without_fixed_p_is_unsupported() {
        let cs = encode_prob_agg(&[1.0, 2.0], ProbMode::Mad, None, DEFAULT_EPS).unwrap();
        assert!(matches!(
            brute_force_binaries(&cs, &[]),
            Err(FotError::Unsupported(_))
        ));
    }

    #[test]
    fn contradictory_system_yields_empty_set() {
        let mut cs = ConstraintSystem::new(1, 0, 1.0, DEFAULT_EPS);
        cs.name(0, "y");
        cs.add("lo", vec![(0, 1.0)], Sense::Ge, 1.0);
        cs.add("hi", vec![(0, 1.0)], Sense::Le, 0.0);
        assert!(brute_force_binaries(&cs, &[]).unwrap().is_empty());
    }

    #[test]
    fn lp_text_round_trips_through_parser() {
        let utilities = [3.0, 1.0, 2.0];
        let cs = encode_prob_agg(&utilities, ProbMode::Threshold, Some(2.0), DEFAULT_EPS).unwrap();
        let text = to_lp_text(&cs);
        let (lp, names) = crate::lp::parse_lp_text(&text).unwrap();
        assert_eq!(names.len(), cs.total_vars());
        assert_eq!(lp.rows.len(), cs.constraints.len());
    }
}
