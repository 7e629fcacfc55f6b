//! The probabilistic relaxation: drop the `T p_j` integrality and optimize
//! over the simplex, then turn a relaxed optimum back into a finite schedule
//! three ways — exactly via the LCM of denominators, approximately via floor
//! rounding with the `ceil(L/eps)` horizon, or by certifying perfect
//! fairness.

use crate::aggregation::AggregatorSpec;
use crate::distributional::{
    dist_aggregate_closed, lipschitz_ball, DiscreteDistribution, MERGE_TOL,
};
use crate::error::{FotError, Result};
use crate::exact::{evaluate_counts, schedule_from_counts, CountVector, Schedule};
use crate::instance::FilteredInstance;
use crate::lp::{solve_lp, Bounds, LpProblem, LpStatus, Sense};
use crate::unfairness::{unfairness, unfairness_lipschitz, UnfairnessSpec};
use crate::Scalar;

/// Support threshold for the enumeration path's inner LPs.
pub const SUPPORT_EPS: f64 = 1e-6;
/// Default denominator cap for rationalization.
pub const DEFAULT_DENOMINATOR_CAP: u64 = 1_000_000;
const GRID_STEPS: u64 = 200;
const REFINE_FACTOR: u64 = 10;

#[derive(Debug, Clone)]
pub struct ProbVector {
    pub probs: Vec<Scalar>,
    /// Reduced fractions `a_j / b_j`, present after successful
    /// rationalization; matches `probs` within 1e-9 when present.
    pub rational: Option<Vec<(u64, u64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lp,
    SupportEnum,
    Grid,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Lp => write!(f, "lp"),
            Method::SupportEnum => write!(f, "support_enum"),
            Method::Grid => write!(f, "grid"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxationResult {
    pub p: ProbVector,
    pub objective: Scalar,
    pub method: Method,
    /// Grid-resolution bound: the true relaxation value is at least
    /// `objective - certificate`.
    pub certificate: Option<Scalar>,
    /// Composite Lipschitz constant `L_phi · max_i L_i` at the optimum.
    pub lipschitz: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FairnessVerdict {
    AchievableWithFiniteT { t: u64 },
    ZeroButIrrational,
    NotPerfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingRule {
    /// The +1 corrections go to the lowest indices, as in the proof.
    LowestIndex,
    LargestRemainder,
}

/// EDD of the utility values under a float probability vector; zero-mass
/// coordinates are dropped, duplicates merged, the total renormalized.
fn edd_of_probs(values: &[Scalar], probs: &[Scalar]) -> Result<DiscreteDistribution<Scalar>> {
    let mut pairs: Vec<(Scalar, Scalar)> = values
        .iter()
        .zip(probs)
        .filter(|(_, p)| **p > 1e-12)
        .map(|(v, p)| (*v, *p))
        .collect();
    if pairs.is_empty() {
        return Err(FotError::EmptySequence);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut support = Vec::new();
    let mut mass: Vec<Scalar> = Vec::new();
    for (v, p) in pairs {
        match support.last() {
            Some(last) if v - *last <= MERGE_TOL => *mass.last_mut().unwrap() += p,
            _ => {
                support.push(v);
                mass.push(p);
            }
        }
    }
    let total: Scalar = mass.iter().sum();
    for m in mass.iter_mut() {
        *m /= total;
    }
    DiscreteDistribution::from_parts(support, mass)
}

/// Unfairness of the per-stakeholder distributional aggregates at `p`.
pub fn evaluate_probs(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    probs: &[Scalar],
) -> Result<(Scalar, Vec<Scalar>)> {
    let mut aggregated = Vec::with_capacity(fi.n());
    for i in 0..fi.n() {
        let values: Vec<Scalar> = (0..fi.k()).map(|j| fi.utility(i, j)).collect();
        let edd = edd_of_probs(&values, probs)?;
        aggregated.push(dist_aggregate_closed(agg, &edd)?);
    }
    let phi = unfairness(unf, &aggregated)?;
    Ok((phi, aggregated))
}

fn composite_lipschitz(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    probs: &[Scalar],
) -> Result<Scalar> {
    let l_phi = unfairness_lipschitz(unf, fi.n(), None)?;
    let mut l_agg: Scalar = 0.0;
    for i in 0..fi.n() {
        let values: Vec<Scalar> = (0..fi.k()).map(|j| fi.utility(i, j)).collect();
        let edd = edd_of_probs(&values, probs)?;
        let ball = lipschitz_ball(agg, &edd)?;
        l_agg = l_agg.max(ball.constant);
    }
    Ok(l_phi * l_agg)
}

/// Base-aggregator atoms with their linear-combination weights, or `None`
/// when a `MaxOf`/`MinOf` combinator blocks flattening.
fn flatten_atoms(spec: &AggregatorSpec) -> Option<Vec<(f64, &AggregatorSpec)>> {
    match spec {
        AggregatorSpec::LinearCombo(parts) => {
            let mut out = Vec::new();
            for (w, sub) in parts {
                for (wi, atom) in flatten_atoms(sub)? {
                    out.push((w * wi, atom));
                }
            }
            Some(out)
        }
        AggregatorSpec::MaxOf(_) | AggregatorSpec::MinOf(_) => None,
        base => Some(vec![(1.0, base)]),
    }
}

fn leaf_atoms(spec: &AggregatorSpec) -> Vec<&AggregatorSpec> {
    match spec {
        AggregatorSpec::LinearCombo(parts) => {
            parts.iter().flat_map(|(_, s)| leaf_atoms(s)).collect()
        }
        AggregatorSpec::MaxOf(parts) | AggregatorSpec::MinOf(parts) => {
            parts.iter().flat_map(leaf_atoms).collect()
        }
        base => vec![base],
    }
}

fn pick_method(agg: &AggregatorSpec, unf: &UnfairnessSpec, k: usize) -> Result<Method> {
    let gap = matches!(unf, UnfairnessSpec::Gap);
    let grid_unf = matches!(unf, UnfairnessSpec::Gap | UnfairnessSpec::MaxDeviationFromMean);
    let leaves = leaf_atoms(agg);
    let all_smooth = leaves
        .iter()
        .all(|a| matches!(a, AggregatorSpec::Average | AggregatorSpec::MeanAbsDev));
    if let Some(atoms) = flatten_atoms(agg) {
        let all_avg = atoms.iter().all(|(_, a)| matches!(a, AggregatorSpec::Average));
        let enumerable = atoms.iter().all(|(_, a)| {
            matches!(
                a,
                AggregatorSpec::Average
                    | AggregatorSpec::Minimum
                    | AggregatorSpec::Maximum
                    | AggregatorSpec::ThresholdExceedance(_)
            )
        });
        if all_avg && gap {
            return Ok(Method::Lp);
        }
        if enumerable && gap {
            if k > 12 {
                return Err(FotError::SearchSpaceExceeded(format!(
                    "support enumeration needs k <= 12, got {k}"
                )));
            }
            return Ok(Method::SupportEnum);
        }
    }
    if all_smooth && grid_unf {
        if k > 4 {
            return Err(FotError::SearchSpaceExceeded(format!(
                "grid search needs k <= 4, got {k}"
            )));
        }
        return Ok(Method::Grid);
    }
    Err(FotError::Unsupported(
        "no relaxation path: supported are average composites with gap (LP), \
         min/max/threshold/average combinations with gap (support enumeration), \
         and mean-absolute-deviation/average composites with gap or max-deviation (grid)"
            .into(),
    ))
}

/// Solve the probabilistic relaxation with an auto-selected strategy.
pub fn solve_relaxation(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
) -> Result<RelaxationResult> {
    agg.validate()?;
    unf.validate()?;
    let k = fi.k();
    let method = pick_method(agg, unf, k)?;
    if k == 1 {
        let probs = vec![1.0];
        let (objective, _) = evaluate_probs(fi, agg, unf, &probs)?;
        let lipschitz = composite_lipschitz(fi, agg, unf, &probs)?;
        return Ok(RelaxationResult {
            p: ProbVector { probs, rational: None },
            objective,
            method,
            certificate: None,
            lipschitz,
        });
    }
    let (probs, certificate) = match method {
        Method::Lp => (solve_lp_path(fi, agg)?, None),
        Method::SupportEnum => (solve_support_enum(fi, agg)?, None),
        Method::Grid => {
            let probs = solve_grid(fi, agg, unf)?;
            let l = composite_lipschitz(fi, agg, unf, &vec![1.0 / k as f64; k])?;
            (probs, Some(l / GRID_STEPS as f64))
        }
    };
    let (objective, _) = evaluate_probs(fi, agg, unf, &probs)?;
    let lipschitz = composite_lipschitz(fi, agg, unf, &probs)?;
    Ok(RelaxationResult {
        p: ProbVector { probs, rational: None },
        objective,
        method,
        certificate,
        lipschitz,
    })
}

/// Per-stakeholder affine form `y_i(p) = const + sum coeff_j p_j` of a
/// flattened aggregator on a fixed support.
fn affine_on_support(
    fi: &FilteredInstance,
    atoms: &[(f64, &AggregatorSpec)],
    support: &[usize],
    i: usize,
) -> (f64, Vec<f64>) {
    let mut constant = 0.0;
    let mut coeff = vec![0.0; support.len()];
    for (w, atom) in atoms {
        match atom {
            AggregatorSpec::Average => {
                for (s, j) in support.iter().enumerate() {
                    coeff[s] += w * fi.utility(i, *j);
                }
            }
            AggregatorSpec::Minimum => {
                constant += w * support
                    .iter()
                    .map(|j| fi.utility(i, *j))
                    .fold(f64::INFINITY, f64::min);
            }
            AggregatorSpec::Maximum => {
                constant += w * support
                    .iter()
                    .map(|j| fi.utility(i, *j))
                    .fold(f64::NEG_INFINITY, f64::max);
            }
            AggregatorSpec::ThresholdExceedance(h) => {
                for (s, j) in support.iter().enumerate() {
                    if fi.utility(i, *j) >= *h {
                        coeff[s] += w;
                    }
                }
            }
            other => unreachable!("non-enumerable atom {other:?} after method selection"),
        }
    }
    (constant, coeff)
}

fn solve_lp_path(fi: &FilteredInstance, agg: &AggregatorSpec) -> Result<Vec<f64>> {
    let k = fi.k();
    let n = fi.n();
    let atoms = flatten_atoms(agg).expect("lp path implies flattenable");
    let support: Vec<usize> = (0..k).collect();
    // variables p_1..p_k, f, g
    let mut minimize = vec![0.0; k + 2];
    minimize[k] = 1.0;
    minimize[k + 1] = -1.0;
    let mut lp = LpProblem::new(minimize);
    lp.bounds[k] = Bounds::free();
    lp.bounds[k + 1] = Bounds::free();
    for i in 0..n {
        let (constant, coeff) = affine_on_support(fi, &atoms, &support, i);
        let mut row_g = coeff.clone();
        row_g.extend([0.0, -1.0]);
        lp.push_row(row_g, Sense::Ge, -constant);
        let mut row_f = coeff;
        row_f.extend([-1.0, 0.0]);
        lp.push_row(row_f, Sense::Le, -constant);
    }
    let mut simplex = vec![1.0; k];
    simplex.extend([0.0, 0.0]);
    lp.push_row(simplex, Sense::Eq, 1.0);
    let r = solve_lp(&lp)?;
    if r.status != LpStatus::Optimal {
        return Err(FotError::Lp(format!("relaxation master not optimal: {:?}", r.status)));
    }
    Ok(r.primal[..k].to_vec())
}

fn solve_support_enum(fi: &FilteredInstance, agg: &AggregatorSpec) -> Result<Vec<f64>> {
    let k = fi.k();
    let n = fi.n();
    let atoms = flatten_atoms(agg).expect("support-enum path implies flattenable");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let s = support.len();
        // variables p_s for s in support, then f, g
        let mut minimize = vec![0.0; s + 2];
        minimize[s] = 1.0;
        minimize[s + 1] = -1.0;
        let mut lp = LpProblem::new(minimize);
        for b in lp.bounds.iter_mut().take(s) {
            b.lower = SUPPORT_EPS;
        }
        lp.bounds[s] = Bounds::free();
        lp.bounds[s + 1] = Bounds::free();
        for i in 0..n {
            let (constant, coeff) = affine_on_support(fi, &atoms, &support, i);
            let mut row_g = coeff.clone();
            row_g.extend([0.0, -1.0]);
            lp.push_row(row_g, Sense::Ge, -constant);
            let mut row_f = coeff;
            row_f.extend([-1.0, 0.0]);
            lp.push_row(row_f, Sense::Le, -constant);
        }
        let mut simplex = vec![1.0; s];
        simplex.extend([0.0, 0.0]);
        lp.push_row(simplex, Sense::Eq, 1.0);
        let r = solve_lp(&lp)?;
        if r.status != LpStatus::Optimal {
            continue;
        }
        if best.as_ref().map_or(true, |(b, _)| r.objective < *b - 1e-12) {
            let mut probs = vec![0.0; k];
            for (si, j) in support.iter().enumerate() {
                probs[*j] = r.primal[si];
            }
            best = Some((r.objective, probs));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| FotError::Lp("every support subproblem was infeasible".into()))
}

/// Allocation-free evaluation of the smooth composites (Average and
/// MeanAbsDev atoms, any combinators) the grid path admits; agrees with the
/// distributional closed forms since neither atom needs sorted or merged
/// support.
fn eval_smooth(spec: &AggregatorSpec, values: &[Scalar], probs: &[Scalar]) -> Scalar {
    match spec {
        AggregatorSpec::Average => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
        AggregatorSpec::MeanAbsDev => {
            let mean: Scalar = values.iter().zip(probs).map(|(v, p)| v * p).sum();
            values.iter().zip(probs).map(|(v, p)| p * (v - mean).abs()).sum()
        }
        AggregatorSpec::LinearCombo(parts) => parts
            .iter()
            .map(|(w, s)| w * eval_smooth(s, values, probs))
            .sum(),
        AggregatorSpec::MaxOf(parts) => parts
            .iter()
            .map(|s| eval_smooth(s, values, probs))
            .fold(f64::NEG_INFINITY, f64::max),
        AggregatorSpec::MinOf(parts) => parts
            .iter()
            .map(|s| eval_smooth(s, values, probs))
            .fold(f64::INFINITY, f64::min),
        other => unreachable!("non-smooth atom {other:?} on the grid path"),
    }
}

fn solve_grid(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
) -> Result<Vec<f64>> {
    let k = fi.k();
    let n = fi.n();
    let rows = fi.utility_rows();
    let mut agg_buf = vec![0.0; n];
    let mut probs = vec![0.0; k];
    let mut best: Option<(f64, Vec<u64>)> = None;
    let visit = |q: &[u64],
                     steps: u64,
                     best: &mut Option<(f64, Vec<u64>)>,
                     probs: &mut [f64],
                     agg_buf: &mut [f64]|
     -> Result<()> {
        for (p, c) in probs.iter_mut().zip(q) {
            *p = *c as f64 / steps as f64;
        }
        for (buf, row) in agg_buf.iter_mut().zip(&rows) {
            *buf = eval_smooth(agg, row, probs);
        }
        let phi = unfairness(unf, agg_buf)?;
        if best.as_ref().map_or(true, |(b, _)| phi < *b) {
            *best = Some((phi, q.to_vec()));
        }
        Ok(())
    };
    let mut q = vec![0u64; k];
    compositions(&mut q, 0, GRID_STEPS, &mut |q| {
        visit(q, GRID_STEPS, &mut best, &mut probs, &mut agg_buf)
    })?;
    let (_, coarse) = best.clone().expect("grid visited at least one point");
    // refine around the coarse winner at step 1/(200·10); the certificate
    // stays at the coarse resolution, refinement only improves the value
    let fine_steps = GRID_STEPS * REFINE_FACTOR;
    let mut fine_best: Option<(f64, Vec<u64>)> = None;
    let lo: Vec<u64> = coarse.iter().map(|c| (c * REFINE_FACTOR).saturating_sub(REFINE_FACTOR)).collect();
    let hi: Vec<u64> = coarse
        .iter()
        .map(|c| (c * REFINE_FACTOR + REFINE_FACTOR).min(fine_steps))
        .collect();
    boxed_compositions(&mut vec![0u64; k], 0, fine_steps, &lo, &hi, &mut |q| {
        visit(q, fine_steps, &mut fine_best, &mut probs, &mut agg_buf)
    })?;
    let (_, fine) = fine_best.expect("refinement box contains the coarse point");
    Ok(fine.iter().map(|c| *c as f64 / fine_steps as f64).collect())
}

fn compositions(
    q: &mut Vec<u64>,
    depth: usize,
    remaining: u64,
    f: &mut dyn FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    if depth == q.len() - 1 {
        q[depth] = remaining;
        return f(q);
    }
    for v in 0..=remaining {
        q[depth] = v;
        compositions(q, depth + 1, remaining - v, f)?;
    }
    Ok(())
}

fn boxed_compositions(
    q: &mut Vec<u64>,
    depth: usize,
    remaining: u64,
    lo: &[u64],
    hi: &[u64],
    f: &mut dyn FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    if depth == q.len() - 1 {
        if remaining >= lo[depth] && remaining <= hi[depth] {
            q[depth] = remaining;
            return f(q);
        }
        return Ok(());
    }
    let upper = hi[depth].min(remaining);
    for v in lo[depth]..=upper {
        q[depth] = v;
        boxed_compositions(q, depth + 1, remaining - v, lo, hi, f)?;
    }
    Ok(())
}

/// Best rational approximation of `x` in `[0, 1]` with denominator at most
/// `cap`, by continued fractions with a semiconvergent refinement.
fn best_rational(x: f64, cap: u64) -> (u64, u64) {
    debug_assert!((0.0..=1.0).contains(&x));
    let (mut p0, mut q0, mut p1, mut q1): (i128, i128, i128, i128) = (0, 1, 1, 0);
    let mut frac = x;
    loop {
        let a = frac.floor() as i128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > cap as i128 {
            // largest semiconvergent that still fits
            let t = (cap as i128 - q0) / q1.max(1);
            let (ps, qs) = (t * p1 + p0, t * q1 + q0);
            let err = |p: i128, q: i128| (x - p as f64 / q as f64).abs();
            return if qs > 0 && err(ps, qs) < err(p1, q1) {
                (ps.max(0) as u64, qs as u64)
            } else {
                (p1.max(0) as u64, q1 as u64)
            };
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let rem = frac - a as f64;
        if rem < 1e-15 || q1 >= cap as i128 {
            return (p1.max(0) as u64, q1 as u64);
        }
        frac = 1.0 / rem;
    }
}

fn reduce(a: u64, b: u64) -> (u64, u64) {
    let g = num_integer::gcd(a, b).max(1);
    (a / g, b / g)
}

/// Simultaneous rational approximation of a probability vector; the largest
/// coordinate absorbs the closing correction so the fractions sum to one
/// exactly. Failure (residual above 1e-9 or denominator above the cap) is a
/// value, not an error.
pub fn rationalize(p: &ProbVector, max_denominator: u64) -> Option<ProbVector> {
    let k = p.probs.len();
    let mut fracs: Vec<(u64, u64)> = p
        .probs
        .iter()
        .map(|x| reduce_pair(best_rational(x.clamp(0.0, 1.0), max_denominator)))
        .collect();
    // close the sum through the largest coordinate
    let anchor = p
        .probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?
        .0;
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for (j, (a, b)) in fracs.iter().enumerate() {
        if j == anchor {
            continue;
        }
        // num/den -= a/b
        num = num * *b as i128 - *a as i128 * den;
        den *= *b as i128;
        let g = num_integer::gcd(num.abs(), den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        if den > (max_denominator as i128).pow(2) * k as i128 {
            return None;
        }
    }
    if num < 0 || den <= 0 || den > max_denominator as i128 {
        return None;
    }
    fracs[anchor] = reduce(num as u64, den as u64);
    for (x, (a, b)) in p.probs.iter().zip(&fracs) {
        let err = (*x - *a as f64 / *b as f64).abs();
        // Flat residual alone cannot tell a genuine fraction from a lucky
        // convergent of an irrational (every x has convergents with error
        // ~1/(2b²), below 1e-9 once b is large); require the error to sit
        // far below that best-approximation floor as well.
        if err > 1e-9 || err * (*b as f64) * (*b as f64) > 1e-6 {
            return None;
        }
    }
    Some(ProbVector { probs: p.probs.clone(), rational: Some(fracs) })
}

fn reduce_pair((a, b): (u64, u64)) -> (u64, u64) {
    reduce(a, b)
}

/// Exact finite realization of a rational probability vector:
/// `T = LCM(b_1..b_k)` with counts `T a_j / b_j`.
pub fn lcm_schedule(p: &ProbVector) -> Result<(Schedule, u64)> {
    let fracs = p.rational.as_ref().ok_or_else(|| {
        FotError::Unsupported("lcm_schedule needs a rationalized probability vector".into())
    })?;
    let mut t: u128 = 1;
    for (_, b) in fracs {
        t = num_integer::lcm(t, *b as u128);
        if t > 1u128 << 62 {
            return Err(FotError::LcmOverflow);
        }
    }
    let t = t as u64;
    if t > crate::exact::ENUM_CAP {
        return Err(FotError::SearchSpaceExceeded(format!(
            "LCM horizon {t} too long to expand into a schedule"
        )));
    }
    let counts: Vec<u64> = fracs.iter().map(|(a, b)| t / b * a).collect();
    let cv = CountVector { t: t as usize, counts };
    Ok((schedule_from_counts(&cv), t))
}

/// Floor rounding with +1 corrections; returns the counts and the proven
/// bound `dist(q/T, p) <= 1/T`.
pub fn round_schedule(p: &ProbVector, t: usize) -> (CountVector, Scalar) {
    round_schedule_with(p, t, RoundingRule::LowestIndex)
}

pub fn round_schedule_with(p: &ProbVector, t: usize, rule: RoundingRule) -> (CountVector, Scalar) {
    assert!(t >= 1, "horizon must be at least 1");
    let tf = t as f64;
    let mut counts: Vec<u64> = p.probs.iter().map(|x| (tf * x).floor().max(0.0) as u64).collect();
    let deficit = t as u64 - counts.iter().sum::<u64>();
    match rule {
        RoundingRule::LowestIndex => {
            // Corrections must stay on the support of p: placing a count on a
            // zero-probability decision would leave the ball the Lipschitz
            // certificate covers. Coordinates with positive fractional mass
            // always suffice (their fractional parts sum to the deficit);
            // spill to the remaining support only under float drift.
            let frac_pos: Vec<usize> = (0..p.probs.len())
                .filter(|j| tf * p.probs[*j] - (tf * p.probs[*j]).floor() > 0.0)
                .collect();
            let support: Vec<usize> =
                (0..p.probs.len()).filter(|j| p.probs[*j] > 0.0).collect();
            let mut left = deficit as usize;
            for j in frac_pos.iter().chain(support.iter().filter(|j| !frac_pos.contains(j))) {
                if left == 0 {
                    break;
                }
                counts[*j] += 1;
                left -= 1;
            }
            for c in counts.iter_mut() {
                if left == 0 {
                    break;
                }
                *c += 1;
                left -= 1;
            }
        }
        RoundingRule::LargestRemainder => {
            let mut order: Vec<usize> = (0..p.probs.len()).collect();
            order.sort_by(|a, b| {
                let ra = tf * p.probs[*a] - (tf * p.probs[*a]).floor();
                let rb = tf * p.probs[*b] - (tf * p.probs[*b]).floor();
                rb.total_cmp(&ra).then(a.cmp(b))
            });
            for j in order.into_iter().take(deficit as usize) {
                counts[j] += 1;
            }
        }
    }
    debug_assert_eq!(counts.iter().sum::<u64>(), t as u64);
    let achieved = counts
        .iter()
        .zip(&p.probs)
        .map(|(q, x)| (*q as f64 / tf - x).abs())
        .fold(0.0f64, f64::max);
    assert!(achieved <= 1.0 / tf + 1e-12, "rounding bound violated: {achieved}");
    (CountVector { t, counts }, 1.0 / tf)
}

/// Smallest horizon honoring both the `ceil(L/eps)` rule and the locality
/// gate `1/T < radius` of every stakeholder's Lipschitz ball.
pub fn epsilon_schedule(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    r: &RelaxationResult,
    eps: f64,
) -> Result<(Schedule, usize, Scalar)> {
    if eps <= 0.0 {
        return Err(FotError::Unsupported("eps must be positive".into()));
    }
    let l = r.lipschitz;
    let mut t = if l == 0.0 { 1 } else { (l / eps).ceil() as usize };
    let mut min_radius = f64::INFINITY;
    for i in 0..fi.n() {
        let values: Vec<Scalar> = (0..fi.k()).map(|j| fi.utility(i, j)).collect();
        let edd = edd_of_probs(&values, &r.p.probs)?;
        let ball = lipschitz_ball(agg, &edd)?;
        min_radius = min_radius.min(ball.constant.is_finite().then_some(ball.radius).unwrap_or(ball.radius));
    }
    if min_radius <= 0.0 {
        return Err(FotError::BallRadius(
            "a stakeholder's Lipschitz ball has radius 0; no horizon satisfies the locality \
             gate — choose a different aggregator or percentile level"
                .into(),
        ));
    }
    if min_radius.is_finite() {
        let gate = (1.0 / min_radius).floor() as usize + 1;
        t = t.max(gate);
    }
    let (cv, _) = round_schedule(&r.p, t);
    let (phi_t, _) = evaluate_counts(fi, agg, unf, &cv.counts)?;
    assert!(
        phi_t <= r.objective + eps + 1e-9,
        "rounding guarantee violated: phi_T = {phi_t}, phi_hat = {}, eps = {eps}",
        r.objective
    );
    Ok((schedule_from_counts(&cv), t, phi_t))
}

/// Classify a relaxation optimum per the perfect-fairness characterization.
pub fn check_perfect_fairness(r: &RelaxationResult, tol: f64) -> FairnessVerdict {
    if r.objective > tol {
        return FairnessVerdict::NotPerfect;
    }
    match rationalize(&r.p, DEFAULT_DENOMINATOR_CAP) {
        Some(pv) => {
            let mut t: u128 = 1;
            for (_, b) in pv.rational.as_ref().unwrap() {
                t = num_integer::lcm(t, *b as u128);
            }
            FairnessVerdict::AchievableWithFiniteT { t: t as u64 }
        }
        None => FairnessVerdict::ZeroButIrrational,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_pe;
    use crate::instance::{alpha_filter, gen_random, Instance};

    fn toy() -> FilteredInstance {
        let inst = Instance {
            n: 2,
            k: 2,
            alpha: 0.5,
            utilities: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            efficiency: vec![1.0, 1.0],
            labels: None,
        };
        alpha_filter(&inst).unwrap()
    }

    #[test]
    fn lp_path_finds_the_midpoint() {
        let fi = toy();
        let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
        assert_eq!(r.method, Method::Lp);
        assert!(r.objective.abs() < 1e-9);
        assert!((r.p.probs[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn support_enum_handles_min_avg_combo() {
        let fi = toy();
        let spec = AggregatorSpec::min_avg_combo(0.5, 0.5);
        let r = solve_relaxation(&fi, &spec, &UnfairnessSpec::Gap).unwrap();
        assert_eq!(r.method, Method::SupportEnum);
        assert!(r.objective.abs() < 1e-9);
    }

    #[test]
    fn single_decision_is_trivial() {
        let inst = gen_random(2, 1, 3, 0.1).unwrap();
        let fi = alpha_filter(&inst).unwrap();
        let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
        assert_eq!(r.p.probs, vec![1.0]);
        let gap = (fi.utility(0, 0) - fi.utility(1, 0)).abs();
        assert!((r.objective - gap).abs() < 1e-12);
    }

    #[test]
    fn relaxation_lower_bounds_every_horizon() {
        for seed in 0..20 {
            let inst = gen_random(2, 3, 400 + seed, 0.1).unwrap();
            let fi = alpha_filter(&inst).unwrap();
            let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
            for t in 1..=5 {
                let pe = solve_pe(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap, t).unwrap();
                assert!(
                    r.objective <= pe.objective + 1e-9,
                    "seed {seed} t {t}: {} > {}",
                    r.objective,
                    pe.objective
                );
            }
        }
    }

    #[test]
    fn grid_path_certifies_mad() {
        let fi = toy();
        let r = solve_relaxation(&fi, &AggregatorSpec::MeanAbsDev, &UnfairnessSpec::Gap).unwrap();
        assert_eq!(r.method, Method::Grid);
        assert!(r.certificate.unwrap() > 0.0);
        // symmetric instance: equal-split MAD aggregates match, gap 0
        assert!(r.objective < 1e-9);
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        let p = ProbVector { probs: vec![0.5, 0.5], rational: None };
        let r = rationalize(&p, 10).unwrap();
        assert_eq!(r.rational.unwrap(), vec![(1, 2), (1, 2)]);

        let thirds = ProbVector { probs: vec![1.0 / 3.0, 2.0 / 3.0], rational: None };
        let r = rationalize(&thirds, 10).unwrap();
        assert_eq!(r.rational.unwrap(), vec![(1, 3), (2, 3)]);
    }

    #[test]
    fn rationalize_rejects_irrational_masses() {
        let x = 1.0 / std::f64::consts::SQRT_2;
        let p = ProbVector { probs: vec![x, 1.0 - x], rational: None };
        assert!(rationalize(&p, 100).is_none());
    }

    #[test]
    fn lcm_schedule_forced_arithmetic() {
        let p = ProbVector {
            probs: vec![0.5, 1.0 / 3.0, 1.0 / 6.0],
            rational: Some(vec![(1, 2), (1, 3), (1, 6)]),
        };
        let (s, t) = lcm_schedule(&p).unwrap();
        assert_eq!(t, 6);
        assert_eq!(s.picks, vec![0, 0, 0, 1, 1, 2]);
        let degenerate = ProbVector { probs: vec![1.0], rational: Some(vec![(1, 1)]) };
        assert_eq!(lcm_schedule(&degenerate).unwrap().1, 1);
    }

    #[test]
    fn rounding_matches_the_proof_construction() {
        let p = ProbVector { probs: vec![0.4, 0.6], rational: None };
        let (cv, bound) = round_schedule(&p, 7);
        assert_eq!(cv.counts, vec![3, 4]);
        assert!((bound - 1.0 / 7.0).abs() < 1e-12);

        let p = ProbVector { probs: vec![1.0 / 3.0, 2.0 / 3.0], rational: None };
        let (cv, _) = round_schedule(&p, 3);
        assert_eq!(cv.counts, vec![1, 2]);

        let p = ProbVector { probs: vec![0.5, 0.5], rational: None };
        let (cv, bound) = round_schedule(&p, 1);
        assert_eq!(cv.counts, vec![1, 0]);
        assert!(0.5 <= bound);
    }

    #[test]
    fn epsilon_schedule_average_gap() {
        let fi = toy();
        let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
        assert!((r.lipschitz - 2.0).abs() < 1e-9);
        let (_, t, phi_t) =
            epsilon_schedule(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap, &r, 0.1)
                .unwrap();
        assert_eq!(t, 20);
        assert!(phi_t.abs() < 1e-12);
    }

    #[test]
    fn epsilon_schedule_locally_constant_minimum() {
        let fi = toy();
        let spec = AggregatorSpec::Minimum;
        let r = solve_relaxation(&fi, &spec, &UnfairnessSpec::Gap).unwrap();
        assert_eq!(r.lipschitz, 0.0);
        let (_, t, phi_t) = epsilon_schedule(&fi, &spec, &UnfairnessSpec::Gap, &r, 0.5).unwrap();
        assert!(1.0 / t as f64 <= 1.0, "gate produced t = {t}");
        assert!((phi_t - r.objective).abs() < 1e-9);
    }

    #[test]
    fn perfect_fairness_verdicts() {
        let fi = toy();
        let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
        match check_perfect_fairness(&r, 1e-9) {
            FairnessVerdict::AchievableWithFiniteT { t } => assert_eq!(t, 2),
            other => panic!("expected achievable, got {other:?}"),
        }

        let inst = gen_random(2, 1, 3, 0.1).unwrap();
        let fi1 = alpha_filter(&inst).unwrap();
        let r1 = solve_relaxation(&fi1, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
        assert_eq!(check_perfect_fairness(&r1, 1e-9), FairnessVerdict::NotPerfect);

        let x = 1.0 / std::f64::consts::SQRT_2;
        let synthetic = RelaxationResult {
            p: ProbVector { probs: vec![x, 1.0 - x], rational: None },
            objective: 0.0,
            method: Method::Lp,
            certificate: None,
            lipschitz: 1.0,
        };
        assert_eq!(
            check_perfect_fairness(&synthetic, 1e-9),
            FairnessVerdict::ZeroButIrrational
        );
    }

    #[test]
    fn lcm_schedule_objective_matches_relaxation() {
        for seed in 0..10 {
            let inst = gen_random(2, 3, 900 + seed, 0.1).unwrap();
            let fi = alpha_filter(&inst).unwrap();
            let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
            let Some(pv) = rationalize(&r.p, 1000) else { continue };
            let Ok((s, _)) = lcm_schedule(&pv) else { continue };
            let cv = crate::exact::counts_from_schedule(&s, fi.k());
            let (phi, _) =
                evaluate_counts(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap, &cv.counts)
                    .unwrap();
            assert!((phi - r.objective).abs() < 1e-10, "seed {seed}");
        }
    }
}
