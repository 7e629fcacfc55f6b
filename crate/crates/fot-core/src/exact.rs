//! Desk-scale exact solvers: descriptive enumeration over decision sequences
//! and symmetry-free enumeration over count vectors, plus the conversions
//! between the two solution shapes.

use crate::aggregation::{aggregate, AggregatorSpec};
use crate::distributional::{dist_aggregate, edd_of_counts};
use crate::error::{FotError, Result};
use crate::instance::FilteredInstance;
use crate::unfairness::{unfairness, UnfairnessSpec};
use crate::Scalar;

/// Guard on the number of enumerated candidates.
pub const ENUM_CAP: u64 = 10_000_000;

/// A concrete T-period plan: `picks[t]` indexes a surviving decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub t: usize,
    pub picks: Vec<usize>,
}

/// Multiplicity profile of a schedule; `counts[j]` periods use decision `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    pub t: usize,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct FotSolution {
    pub objective: Scalar,
    pub count_vector: CountVector,
    pub aggregated: Vec<Scalar>,
}

/// Number of length-`t` sequences over `k` decisions, guarded by `ENUM_CAP`.
pub fn count_sequences(k: usize, t: usize) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..t {
        acc = acc
            .checked_mul(k as u64)
            .filter(|v| *v <= ENUM_CAP)
            .ok_or_else(|| {
                FotError::SearchSpaceExceeded(format!("{k}^{t} sequences exceed {ENUM_CAP}"))
            })?;
    }
    Ok(acc)
}

/// Number of count vectors, `C(t + k - 1, k - 1)`, guarded by `ENUM_CAP`.
pub fn count_multisets(k: usize, t: usize) -> Result<u64> {
    let mut acc: u128 = 1;
    for i in 0..(k - 1) as u128 {
        acc = acc * (t as u128 + i + 1) / (i + 1);
        if acc > ENUM_CAP as u128 {
            return Err(FotError::SearchSpaceExceeded(format!(
                "C({}, {}) count vectors exceed {ENUM_CAP}",
                t + k - 1,
                k - 1
            )));
        }
    }
    Ok(acc as u64)
}

/// Canonical expansion: decision `j` repeated `counts[j]` times, ascending.
pub fn schedule_from_counts(cv: &CountVector) -> Schedule {
    let mut picks = Vec::with_capacity(cv.t);
    for (j, c) in cv.counts.iter().enumerate() {
        for _ in 0..*c {
            picks.push(j);
        }
    }
    Schedule { t: cv.t, picks }
}

/// Multiplicity profile of a schedule over `k` decisions.
pub fn counts_from_schedule(s: &Schedule, k: usize) -> CountVector {
    let mut counts = vec![0u64; k];
    for p in &s.picks {
        counts[*p] += 1;
    }
    CountVector { t: s.t, counts }
}

fn evaluate_schedule(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    picks: &[usize],
) -> Result<(Scalar, Vec<Scalar>)> {
    let mut aggregated = Vec::with_capacity(fi.n());
    for i in 0..fi.n() {
        let seq: Vec<Scalar> = picks.iter().map(|j| fi.utility(i, *j)).collect();
        aggregated.push(aggregate(agg, &seq)?);
    }
    let phi = unfairness(unf, &aggregated)?;
    Ok((phi, aggregated))
}

/// Evaluate the PE objective of a count vector via the EDD path.
pub fn evaluate_counts(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    counts: &[u64],
) -> Result<(Scalar, Vec<Scalar>)> {
    let mut aggregated = Vec::with_capacity(fi.n());
    for i in 0..fi.n() {
        let values: Vec<Scalar> = (0..fi.k()).map(|j| fi.utility(i, j)).collect();
        let edd = edd_of_counts(&values, counts)?;
        aggregated.push(dist_aggregate(agg, &edd)?);
    }
    let phi = unfairness(unf, &aggregated)?;
    Ok((phi, aggregated))
}

/// Global optimum by exhausting all `k^T` sequences in lexicographic order;
/// ties keep the lexicographically smallest sequence.
pub fn solve_descriptive(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    t: usize,
) -> Result<FotSolution> {
    if t == 0 {
        return Err(FotError::InvalidInstance("horizon T must be at least 1".into()));
    }
    let k = fi.k();
    let expected = count_sequences(k, t)?;
    let mut picks = vec![0usize; t];
    let mut best: Option<(Scalar, Vec<usize>, Vec<Scalar>)> = None;
    let mut enumerated: u64 = 0;
    let mut done = false;
    while !done {
        enumerated += 1;
        let (phi, aggregated) = evaluate_schedule(fi, agg, unf, &picks)?;
        if best.as_ref().map_or(true, |(b, _, _)| phi < *b) {
            best = Some((phi, picks.clone(), aggregated));
        }
        // advance the mixed-radix counter, last digit fastest
        let mut pos = t;
        loop {
            if pos == 0 {
                done = true;
                break;
            }
            pos -= 1;
            picks[pos] += 1;
            if picks[pos] < k {
                break;
            }
            picks[pos] = 0;
        }
    }
    assert_eq!(enumerated, expected, "descriptive enumeration count drifted");
    let (objective, picks, aggregated) = best.expect("at least one sequence");
    let schedule = Schedule { t, picks };
    Ok(FotSolution {
        objective,
        count_vector: counts_from_schedule(&schedule, k),
        aggregated,
    })
}

/// Global optimum over count vectors, evaluated through the EDD path; ties
/// keep the lexicographically smallest count vector.
pub fn solve_pe(
    fi: &FilteredInstance,
    agg: &AggregatorSpec,
    unf: &UnfairnessSpec,
    t: usize,
) -> Result<FotSolution> {
    if t == 0 {
        return Err(FotError::InvalidInstance("horizon T must be at least 1".into()));
    }
    let k = fi.k();
    let expected = count_multisets(k, t)?;
    let mut enumerated: u64 = 0;
    let mut best: Option<(Scalar, Vec<u64>, Vec<Scalar>)> = None;
    // lexicographically ascending compositions of t into k parts
    let mut current = vec![0u64; k];
    fn visit(
        current: &mut Vec<u64>,
        depth: usize,
        remaining: u64,
        f: &mut dyn FnMut(&[u64]) -> Result<()>,
    ) -> Result<()> {
        if depth == current.len() - 1 {
            current[depth] = remaining;
            f(current)?;
            return Ok(());
        }
        for q in 0..=remaining {
            current[depth] = q;
            visit(current, depth + 1, remaining - q, f)?;
        }
        Ok(())
    }
    visit(&mut current, 0, t as u64, &mut |q: &[u64]| {
        enumerated += 1;
        let (phi, aggregated) = evaluate_counts(fi, agg, unf, q)?;
        if best.as_ref().map_or(true, |(b, _, _)| phi < *b) {
            best = Some((phi, q.to_vec(), aggregated));
        }
        Ok(())
    })?;
    assert_eq!(enumerated, expected, "count-vector enumeration count drifted");
    let (objective, counts, aggregated) = best.expect("at least one count vector");
    Ok(FotSolution {
        objective,
        count_vector: CountVector { t, counts },
        aggregated,
    })
}
