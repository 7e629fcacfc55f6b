//! Probability-side machinery: empirical distributions of utility sequences,
//! the `dist` metric, distributional aggregation, and Lipschitz-ball
//! certificates.
//!
//! A utility sequence collapses to its empirical discrete distribution (EDD)
//! over the sorted unique values (EVS). A rational distribution expands back
//! to a canonical sorted sequence (EES). Aggregation lifted to distributions
//! is what makes the count-vector formulation symmetry-free: permuting a
//! sequence never changes its EDD.

use crate::aggregation::{aggregate, AggregatorSpec};
use crate::error::{FotError, Result};
use crate::num::Real;

/// Default merging tolerance when collapsing float sequences to an EDD.
pub const MERGE_TOL: f64 = 1e-12;

/// Tolerance for the percentile midpoint trigger on distributions (the
/// cumulative probability "hits rho exactly" branch).
const CUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    /// Multiplicity of each support value; all positive.
    pub counts: Vec<u64>,
    /// Common denominator, `sum(counts)`.
    pub total: u64,
}

/// A finite-support probability distribution with strictly increasing support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<F> {
    support: Vec<F>,
    probs: Vec<F>,
    rational: Option<RationalForm>,
}

impl<F: Real> DiscreteDistribution<F> {
    pub fn from_parts(support: Vec<F>, probs: Vec<F>) -> Result<Self> {
        let d = DiscreteDistribution { support, probs, rational: None };
        d.check()?;
        Ok(d)
    }

    /// Exact construction from multiplicities; probabilities are `count/total`.
    pub fn from_counts(support: Vec<F>, counts: Vec<u64>) -> Result<Self> {
        if support.len() != counts.len() {
            return Err(FotError::DimensionMismatch(
                "support and counts lengths differ".into(),
            ));
        }
        if counts.iter().any(|c| *c == 0) {
            return Err(FotError::InvalidInstance("zero multiplicity in counts".into()));
        }
        let total: u64 = counts.iter().sum();
        let tf = F::from_u64(total).unwrap();
        let probs = counts.iter().map(|c| F::from_u64(*c).unwrap() / tf).collect();
        let d = DiscreteDistribution {
            support,
            probs,
            rational: Some(RationalForm { counts, total }),
        };
        d.check()?;
        Ok(d)
    }

    fn check(&self) -> Result<()> {
        if self.support.is_empty() {
            return Err(FotError::InvalidInstance("empty distribution support".into()));
        }
        if self.support.len() != self.probs.len() {
            return Err(FotError::DimensionMismatch(
                "support and probability lengths differ".into(),
            ));
        }
        for w in self.support.windows(2) {
            if !(w[0] < w[1]) {
                return Err(FotError::InvalidInstance(
                    "distribution support must be strictly increasing".into(),
                ));
            }
        }
        let mut sum = F::zero();
        for p in &self.probs {
            if !(*p > F::zero()) {
                return Err(FotError::InvalidInstance(
                    "distribution probabilities must be positive".into(),
                ));
            }
            sum = sum + *p;
        }
        if (sum - F::one()).abs() > F::of(1e-12) {
            return Err(FotError::InvalidInstance(format!(
                "distribution probabilities sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    pub fn support(&self) -> &[F] {
        &self.support
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn rational_form(&self) -> Option<&RationalForm> {
        self.rational.as_ref()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Empirical discrete distribution of a non-empty sequence.
pub fn edd_of_sequence<F: Real>(seq: &[F]) -> Result<DiscreteDistribution<F>> {
    edd_of_sequence_with_tol(seq, MERGE_TOL)
}

/// As [`edd_of_sequence`], merging support values closer than `tol`.
pub fn edd_of_sequence_with_tol<F: Real>(seq: &[F], tol: f64) -> Result<DiscreteDistribution<F>> {
    if seq.is_empty() {
        return Err(FotError::EmptySequence);
    }
    let mut sorted = seq.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite utilities"));
    let tol = F::of(tol);
    let mut support: Vec<F> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for v in sorted {
        match support.last() {
            Some(last) if (v - *last).abs() <= tol => *counts.last_mut().unwrap() += 1,
            _ => {
                support.push(v);
                counts.push(1);
            }
        }
    }
    DiscreteDistribution::from_counts(support, counts)
}

/// Canonical sorted sequence regenerating a rational distribution.
pub fn ees_of_distribution<F: Real>(d: &DiscreteDistribution<F>) -> Result<Vec<F>> {
    let rational = d.rational.as_ref().ok_or_else(|| {
        FotError::Unsupported("enumeration sequence needs a rational-form distribution".into())
    })?;
    let mut seq = Vec::with_capacity(rational.total as usize);
    for (v, c) in d.support.iter().zip(&rational.counts) {
        for _ in 0..*c {
            seq.push(*v);
        }
    }
    Ok(seq)
}

/// EDD from parallel (value, multiplicity) vectors: zero counts are dropped,
/// near-equal values merged, and the counts reduced by their gcd so the
/// rational form stays small even for large horizons.
pub fn edd_of_counts<F: Real>(values: &[F], counts: &[u64]) -> Result<DiscreteDistribution<F>> {
    if values.len() != counts.len() {
        return Err(FotError::DimensionMismatch(
            "values and counts lengths differ".into(),
        ));
    }
    let mut pairs: Vec<(F, u64)> = values
        .iter()
        .zip(counts)
        .filter(|(_, c)| **c > 0)
        .map(|(v, c)| (*v, *c))
        .collect();
    if pairs.is_empty() {
        return Err(FotError::EmptySequence);
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite utilities"));
    let tol = F::of(MERGE_TOL);
    let mut support: Vec<F> = Vec::new();
    let mut merged: Vec<u64> = Vec::new();
    for (v, c) in pairs {
        match support.last() {
            Some(last) if (v - *last).abs() <= tol => *merged.last_mut().unwrap() += c,
            _ => {
                support.push(v);
                merged.push(c);
            }
        }
    }
    let g = merged.iter().fold(0u64, |acc, c| num_integer::gcd(acc, *c));
    for c in merged.iter_mut() {
        *c /= g;
    }
    DiscreteDistribution::from_counts(support, merged)
}

/// Max coordinate gap between same-support distributions; infinity otherwise.
pub fn dist<F: Real>(p1: &DiscreteDistribution<F>, p2: &DiscreteDistribution<F>) -> F {
    if p1.support != p2.support {
        return F::infinity();
    }
    p1.probs
        .iter()
        .zip(&p2.probs)
        .map(|(a, b)| (*a - *b).abs())
        .fold(F::zero(), F::max)
}

/// Evaluate the distributional aggregation function.
///
/// Rational-form inputs are routed through the enumeration sequence so the
/// value agrees exactly with the sequence-level aggregator. Other inputs use
/// the closed forms, which extend each family to arbitrary finite-support
/// distributions.
pub fn dist_aggregate<F: Real>(spec: &AggregatorSpec, d: &DiscreteDistribution<F>) -> Result<F> {
    // huge LCM horizons would make the enumeration sequence impractically
    // long; past this cap the closed forms (equal in exact arithmetic) serve
    const EES_EVAL_CAP: u64 = 100_000;
    if let Some(r) = &d.rational {
        if r.total <= EES_EVAL_CAP {
            let seq = ees_of_distribution(d)?;
            return aggregate(spec, &seq);
        }
    }
    dist_aggregate_closed(spec, d)
}

/// Closed-form evaluation, valid for all finite-support distributions.
pub fn dist_aggregate_closed<F: Real>(
    spec: &AggregatorSpec,
    d: &DiscreteDistribution<F>,
) -> Result<F> {
    let v = d.support();
    let p = d.probs();
    let m = v.len();
    let value = match spec {
        AggregatorSpec::Average => dot(p, v),
        AggregatorSpec::Minimum => v[0],
        AggregatorSpec::Maximum => v[m - 1],
        AggregatorSpec::ThresholdExceedance(h) => {
            let hf = F::of(*h);
            v.iter()
                .zip(p)
                .filter(|(vj, _)| **vj >= hf)
                .map(|(_, pj)| *pj)
                .sum()
        }
        AggregatorSpec::MeanAbsDev => {
            let mean = dot(p, v);
            v.iter().zip(p).map(|(vj, pj)| *pj * (*vj - mean).abs()).sum()
        }
        AggregatorSpec::Percentile(rho) => {
            let rho_f = F::of(*rho);
            let tol = F::of(CUM_TOL);
            let mut cum = F::zero();
            let mut result = v[m - 1];
            for j in 0..m {
                cum = cum + p[j];
                if cum >= rho_f - tol {
                    result = if (cum - rho_f).abs() <= tol && j + 1 < m {
                        (v[j] + v[j + 1]) / F::of(2.0)
                    } else {
                        v[j]
                    };
                    break;
                }
            }
            result
        }
        AggregatorSpec::LinearCombo(parts) => {
            let mut acc = F::zero();
            for (w, sub) in parts {
                acc = acc + F::of(*w) * dist_aggregate_closed(sub, d)?;
            }
            acc
        }
        AggregatorSpec::MaxOf(parts) => {
            let mut acc = F::neg_infinity();
            for sub in parts {
                acc = acc.max(dist_aggregate_closed(sub, d)?);
            }
            acc
        }
        AggregatorSpec::MinOf(parts) => {
            let mut acc = F::infinity();
            for sub in parts {
                acc = acc.min(dist_aggregate_closed(sub, d)?);
            }
            acc
        }
    };
    Ok(value)
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Ball around a distribution on which the real extension of an aggregator is
/// Lipschitz, together with the constant valid inside the ball.
#[derive(Debug, Clone)]
pub struct LipschitzBall<F> {
    pub radius: F,
    pub constant: F,
}

/// Lipschitz-ball certificate for an aggregator at a distribution.
///
/// Minimum/maximum/percentile are locally constant; the reported radius is
/// the largest perturbation that provably cannot move the selected support
/// value. Mean absolute deviation, average and threshold exceedance are
/// globally Lipschitz on the fixed-support slice, so the radius is infinite.
pub fn lipschitz_ball<F: Real>(
    spec: &AggregatorSpec,
    d: &DiscreteDistribution<F>,
) -> Result<LipschitzBall<F>> {
    let v = d.support();
    let p = d.probs();
    let m = v.len();
    let ball = match spec {
        AggregatorSpec::Minimum => LipschitzBall { radius: p[0], constant: F::zero() },
        AggregatorSpec::Maximum => LipschitzBall { radius: p[m - 1], constant: F::zero() },
        AggregatorSpec::Percentile(rho) => LipschitzBall {
            radius: percentile_delta(d, *rho) / F::from_usize(m).unwrap(),
            constant: F::zero(),
        },
        AggregatorSpec::MeanAbsDev => {
            let l1: F = v.iter().map(|x| x.abs()).sum();
            let vmax = v.iter().map(|x| x.abs()).fold(F::zero(), F::max);
            LipschitzBall {
                radius: F::infinity(),
                constant: F::of(2.0) * l1 + F::from_usize(m).unwrap() * vmax,
            }
        }
        AggregatorSpec::Average => {
            // |sum (p-p')_j v_j| = |sum (p-p')_j (v_j - c)| <= dist * sum_j |v_j - c|
            // for any c since the deltas sum to zero; c = median minimizes.
            let c = median(v);
            let constant = v.iter().map(|x| (*x - c).abs()).sum();
            LipschitzBall { radius: F::infinity(), constant }
        }
        AggregatorSpec::ThresholdExceedance(h) => {
            let hf = F::of(*h);
            let ge = v.iter().filter(|x| **x >= hf).count();
            let constant = F::from_usize(ge.min(m - ge)).unwrap();
            LipschitzBall { radius: F::infinity(), constant }
        }
        AggregatorSpec::LinearCombo(parts) => {
            let mut radius = F::infinity();
            let mut constant = F::zero();
            for (w, sub) in parts {
                let b = lipschitz_ball(sub, d)?;
                radius = radius.min(b.radius);
                constant = constant + F::of(w.abs()) * b.constant;
            }
            LipschitzBall { radius, constant }
        }
        AggregatorSpec::MaxOf(parts) | AggregatorSpec::MinOf(parts) => {
            let mut radius = F::infinity();
            let mut constant = F::zero();
            for sub in parts {
                let b = lipschitz_ball(sub, d)?;
                radius = radius.min(b.radius);
                constant = constant.max(b.constant);
            }
            LipschitzBall { radius, constant }
        }
    };
    Ok(ball)
}

/// The percentile safety margin: distance from `rho` to the nearest cumulative
/// boundary of the bracketing support value, floored at zero, capped by the
/// smallest mass.
fn percentile_delta<F: Real>(d: &DiscreteDistribution<F>, rho: f64) -> F {
    let p = d.probs();
    let rho = F::of(rho);
    let pmin = p.iter().copied().fold(F::infinity(), F::min);
    let mut prev = F::zero();
    let mut cum = F::zero();
    for pj in p {
        cum = cum + *pj;
        if cum >= rho - F::of(CUM_TOL) {
            let delta = (rho - prev).min(cum - rho).min(pmin);
            return delta.max(F::zero());
        }
        prev = cum;
    }
    F::zero()
}

fn median<F: Real>(v: &[F]) -> F {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite support"));
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        (s[m / 2 - 1] + s[m / 2]) / F::of(2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn d(support: &[f64], counts: &[u64]) -> DiscreteDistribution<f64> {
        DiscreteDistribution::from_counts(support.to_vec(), counts.to_vec()).unwrap()
    }

    #[test]
    fn edd_of_constant_and_example_sequences() {
        let c = edd_of_sequence(&[5.0; 7]).unwrap();
        assert_eq!(c.support(), &[5.0]);
        assert_eq!(c.rational_form().unwrap().counts, vec![7]);

        let e: DiscreteDistribution<f64> = edd_of_sequence(&[14.0, 14.0, 14.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.support(), &[0.0, 14.0]);
        assert_eq!(e.rational_form().unwrap().counts, vec![4, 3]);
        assert!((e.probs()[0] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn edd_permutation_invariant() {
        let a = edd_of_sequence(&[1.0, 2.0, 1.0, 3.0]).unwrap();
        let b = edd_of_sequence(&[3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ees_round_trip() {
        let dd = d(&[0.0, 14.0], &[4, 3]);
        assert_eq!(
            ees_of_distribution(&dd).unwrap(),
            vec![0.0, 0.0, 0.0, 0.0, 14.0, 14.0, 14.0]
        );
        assert_eq!(edd_of_sequence(&ees_of_distribution(&dd).unwrap()).unwrap(), dd);
        let single = d(&[2.5], &[3]);
        assert_eq!(ees_of_distribution(&single).unwrap(), vec![2.5, 2.5, 2.5]);
        let uneven = d(&[1.0, 2.0], &[1, 2]);
        assert_eq!(ees_of_distribution(&uneven).unwrap(), vec![1.0, 2.0, 2.0]);
        // float-form distributions have no enumeration sequence
        let float_d = DiscreteDistribution::from_parts(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        assert!(ees_of_distribution(&float_d).is_err());
    }

    #[test]
    fn dist_metric_cases() {
        let a = DiscreteDistribution::from_parts(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let b = DiscreteDistribution::from_parts(vec![0.0, 1.0], vec![0.4, 0.6]).unwrap();
        assert!((dist(&a, &b) - 0.1f64).abs() < 1e-15);
        assert_eq!(dist(&a, &a), 0.0);
        let c = DiscreteDistribution::from_parts(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(dist(&a, &c), f64::INFINITY);
    }

    #[test]
    fn dist_is_a_metric_on_fixed_support() {
        let mut rng = StdRng::seed_from_u64(3);
        let support = vec![0.0, 1.0, 2.0];
        let sample = |rng: &mut StdRng| {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            DiscreteDistribution::from_parts(support.clone(), raw.iter().map(|x| x / s).collect())
                .unwrap()
        };
        for _ in 0..200 {
            let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
            assert!((dist(&a, &b) - dist(&b, &a)).abs() < 1e-15);
            assert!(dist(&a, &a) == 0.0);
            assert!(dist(&a, &c) <= dist(&a, &b) + dist(&b, &c) + 1e-15);
        }
    }

    #[test]
    fn dist_aggregate_examples() {
        let dd = d(&[0.0, 14.0], &[4, 3]);
        assert!((dist_aggregate(&AggregatorSpec::Average, &dd).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(dist_aggregate(&AggregatorSpec::Minimum, &dd).unwrap(), 0.0);
        assert_eq!(dist_aggregate(&AggregatorSpec::Maximum, &dd).unwrap(), 14.0);
        let atom = d(&[3.0], &[2]);
        assert_eq!(dist_aggregate(&AggregatorSpec::MeanAbsDev, &atom).unwrap(), 0.0);
        let quart = d(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1]);
        assert_eq!(dist_aggregate(&AggregatorSpec::Percentile(0.5), &quart).unwrap(), 2.5);
    }

    #[test]
    fn closed_form_percentile_matches_sequence_rule() {
        let quart = DiscreteDistribution::from_parts(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        assert_eq!(
            dist_aggregate_closed(&AggregatorSpec::Percentile(0.5), &quart).unwrap(),
            2.5
        );
        assert_eq!(
            dist_aggregate_closed(&AggregatorSpec::Percentile(0.25), &quart).unwrap(),
            1.5
        );
        assert_eq!(
            dist_aggregate_closed(&AggregatorSpec::Percentile(0.0), &quart).unwrap(),
            1.0
        );
        assert_eq!(
            dist_aggregate_closed(&AggregatorSpec::Percentile(1.0), &quart).unwrap(),
            4.0
        );
        assert_eq!(
            dist_aggregate_closed(&AggregatorSpec::Percentile(0.4), &quart).unwrap(),
            2.0
        );
    }

    #[test]
    fn consistency_random_pairs() {
        let mut rng = StdRng::seed_from_u64(99);
        let specs = [
            AggregatorSpec::Average,
            AggregatorSpec::Minimum,
            AggregatorSpec::Maximum,
            AggregatorSpec::Percentile(0.5),
            AggregatorSpec::Percentile(0.31),
            AggregatorSpec::ThresholdExceedance(0.5),
            AggregatorSpec::MeanAbsDev,
            AggregatorSpec::min_avg_combo(0.5, 0.5),
        ];
        for _ in 0..500 {
            let spec = &specs[rng.gen_range(0..specs.len())];
            let len = rng.gen_range(1..8);
            // small integer grid so duplicates actually occur
            let seq: Vec<f64> = (0..len).map(|_| rng.gen_range(0..4) as f64).collect();
            let via_dist = dist_aggregate(spec, &edd_of_sequence(&seq).unwrap()).unwrap();
            let direct = aggregate(spec, &seq).unwrap();
            assert!((via_dist - direct).abs() < 1e-10, "{spec} on {seq:?}");
            // closed form agrees too
            let closed = dist_aggregate_closed(spec, &edd_of_sequence(&seq).unwrap()).unwrap();
            assert!((closed - direct).abs() < 1e-10, "closed {spec} on {seq:?}");
        }
    }

    #[test]
    fn lipschitz_ball_examples() {
        let dd = d(&[0.0, 14.0], &[4, 3]);
        let b = lipschitz_ball(&AggregatorSpec::Minimum, &dd).unwrap();
        assert!((b.radius - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(b.constant, 0.0);

        // rho exactly on a cumulative boundary: zero radius
        let half = d(&[1.0, 2.0], &[1, 1]);
        let b = lipschitz_ball(&AggregatorSpec::Percentile(0.5), &half).unwrap();
        assert!(b.radius.abs() < 1e-12);

        let mad = lipschitz_ball(&AggregatorSpec::MeanAbsDev, &d(&[1.0, 3.0], &[1, 1])).unwrap();
        assert_eq!(mad.constant, 2.0 * 4.0 + 2.0 * 3.0);
        assert_eq!(mad.radius, f64::INFINITY);
    }

    #[test]
    fn ball_soundness_sampled() {
        let mut rng = StdRng::seed_from_u64(17);
        let dd = d(&[0.0, 1.0, 3.0], &[2, 1, 3]);
        let specs = [
            AggregatorSpec::Minimum,
            AggregatorSpec::Maximum,
            AggregatorSpec::Percentile(0.4),
            AggregatorSpec::MeanAbsDev,
            AggregatorSpec::Average,
            AggregatorSpec::ThresholdExceedance(0.5),
        ];
        for spec in &specs {
            let ball = lipschitz_ball(spec, &dd).unwrap();
            let center = dist_aggregate_closed(spec, &dd).unwrap();
            let r = if ball.radius.is_finite() { ball.radius } else { 0.2 };
            if r <= 0.0 {
                continue;
            }
            for _ in 0..10_000 {
                let p2 = perturb_within(&dd, r, &mut rng);
                let dd2 =
                    DiscreteDistribution::from_parts(dd.support().to_vec(), p2).unwrap();
                let gap = (dist_aggregate_closed(spec, &dd2).unwrap() - center).abs();
                assert!(gap <= ball.constant * dist(&dd, &dd2) + 1e-9, "{spec}");
            }
        }
    }

    fn perturb_within(d: &DiscreteDistribution<f64>, r: f64, rng: &mut StdRng) -> Vec<f64> {
        // random zero-sum perturbation with max coordinate below r, keeping
        // probabilities positive
        loop {
            let m = d.len();
            let mut delta: Vec<f64> = (0..m).map(|_| rng.gen_range(-r..r) * 0.9).collect();
            let shift: f64 = delta.iter().sum::<f64>() / m as f64;
            for x in &mut delta {
                *x -= shift;
            }
            let maxd = delta.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if maxd >= r {
                continue;
            }
            let p: Vec<f64> = d.probs().iter().zip(&delta).map(|(p, dl)| p + dl).collect();
            if p.iter().all(|x| *x > 1e-9) {
                return p;
            }
        }
    }
}
