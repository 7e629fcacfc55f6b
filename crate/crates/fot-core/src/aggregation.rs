//! Aggregation functions over finite utility sequences.
//!
//! An aggregation function maps a non-empty utility sequence to a single
//! representative value. All evaluators here are symmetric (order of the
//! sequence does not matter) and extension-agnostic (repeating the whole
//! sequence leaves the value unchanged). Linear combinations, pointwise max
//! and pointwise min of aggregators are again aggregators and are evaluated
//! recursively.

use std::fmt;

use crate::error::{FotError, Result};
use crate::num::Real;

/// Tolerance for deciding whether `rho * T` is an integer in the percentile
/// midpoint rule.
const PCTL_INT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum AggregatorSpec {
    Average,
    Minimum,
    Maximum,
    /// `rho` in [0,1]. `rho = 0` yields the smallest value; `rho = 1` the
    /// largest (the midpoint rule is clamped at the boundary).
    Percentile(f64),
    /// Fraction of entries `>= h`; ties count as exceedance.
    ThresholdExceedance(f64),
    MeanAbsDev,
    LinearCombo(Vec<(f64, AggregatorSpec)>),
    MaxOf(Vec<AggregatorSpec>),
    MinOf(Vec<AggregatorSpec>),
}

impl AggregatorSpec {
    /// Convenience constructor for the worked `w1*min + w2*avg` family.
    pub fn min_avg_combo(w_min: f64, w_avg: f64) -> Self {
        AggregatorSpec::LinearCombo(vec![
            (w_min, AggregatorSpec::Minimum),
            (w_avg, AggregatorSpec::Average),
        ])
    }

    pub fn is_combinator(&self) -> bool {
        matches!(
            self,
            AggregatorSpec::LinearCombo(_) | AggregatorSpec::MaxOf(_) | AggregatorSpec::MinOf(_)
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AggregatorSpec::Percentile(rho) => {
                if !(0.0..=1.0).contains(rho) {
                    return Err(FotError::Unsupported(format!(
                        "percentile rho {rho} outside [0,1]"
                    )));
                }
            }
            AggregatorSpec::LinearCombo(parts) => {
                if parts.is_empty() {
                    return Err(FotError::Unsupported("empty linear combination".into()));
                }
                for (_, s) in parts {
                    s.validate()?;
                }
            }
            AggregatorSpec::MaxOf(parts) | AggregatorSpec::MinOf(parts) => {
                if parts.is_empty() {
                    return Err(FotError::Unsupported("empty max/min combinator".into()));
                }
                for s in parts {
                    s.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Evaluate `spec` on a non-empty sequence.
pub fn aggregate<F: Real>(spec: &AggregatorSpec, seq: &[F]) -> Result<F> {
    if seq.is_empty() {
        return Err(FotError::EmptySequence);
    }
    let t = seq.len();
    let value = match spec {
        AggregatorSpec::Average => mean(seq),
        AggregatorSpec::Minimum => fold_min(seq),
        AggregatorSpec::Maximum => fold_max(seq),
        AggregatorSpec::Percentile(rho) => {
            let mut w = seq.to_vec();
            w.sort_by(|a, b| a.partial_cmp(b).expect("finite utilities"));
            percentile_of_sorted(&w, *rho)
        }
        AggregatorSpec::ThresholdExceedance(h) => {
            let hf = F::of(*h);
            let count = seq.iter().filter(|u| **u >= hf).count();
            F::from_usize(count).unwrap() / F::from_usize(t).unwrap()
        }
        AggregatorSpec::MeanAbsDev => {
            let m = mean(seq);
            let s: F = seq.iter().map(|u| (*u - m).abs()).sum();
            s / F::from_usize(t).unwrap()
        }
        AggregatorSpec::LinearCombo(parts) => {
            let mut acc = F::zero();
            for (w, sub) in parts {
                acc = acc + F::of(*w) * aggregate(sub, seq)?;
            }
            acc
        }
        AggregatorSpec::MaxOf(parts) => {
            let vals = parts
                .iter()
                .map(|s| aggregate(s, seq))
                .collect::<Result<Vec<_>>>()?;
            fold_max(&vals)
        }
        AggregatorSpec::MinOf(parts) => {
            let vals = parts
                .iter()
                .map(|s| aggregate(s, seq))
                .collect::<Result<Vec<_>>>()?;
            fold_min(&vals)
        }
    };
    Ok(value)
}

/// Percentile of an already ascending-sorted slice, 1-based midpoint rule.
pub(crate) fn percentile_of_sorted<F: Real>(w: &[F], rho: f64) -> F {
    let t = w.len();
    let pos = rho * t as f64;
    let rounded = pos.round();
    if (pos - rounded).abs() <= PCTL_INT_TOL {
        // rho*T integral: midpoint of w_{rT} and w_{rT+1}, clamped at the ends.
        let r = rounded as usize;
        if r == 0 {
            w[0]
        } else if r >= t {
            w[t - 1]
        } else {
            (w[r - 1] + w[r]) / F::of(2.0)
        }
    } else {
        let idx = pos.ceil() as usize;
        w[idx.clamp(1, t) - 1]
    }
}

fn mean<F: Real>(seq: &[F]) -> F {
    let s: F = seq.iter().copied().sum();
    s / F::from_usize(seq.len()).unwrap()
}

fn fold_min<F: Real>(seq: &[F]) -> F {
    seq.iter().copied().fold(F::infinity(), F::min)
}

fn fold_max<F: Real>(seq: &[F]) -> F {
    seq.iter().copied().fold(F::neg_infinity(), F::max)
}

// --- CLI text form ----------------------------------------------------------
//
// Grammar (one level of combinator nesting, atoms inside combinators):
//   spec   := atom | combo | maxof | minof
//   atom   := "avg" | "min" | "max" | "mad" | "pctl:"FLOAT | "thresh:"FLOAT
//   combo  := "combo:" FLOAT "*" atom ("+" FLOAT "*" atom)*
//   maxof  := "maxof:" atom ("|" atom)*
//   minof  := "minof:" atom ("|" atom)*

pub fn parse_aggregator(text: &str) -> Result<AggregatorSpec> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("combo:") {
        let mut parts = Vec::new();
        for term in rest.split('+') {
            let (w, atom) = term.split_once('*').ok_or_else(|| {
                FotError::Parse(format!("combo term `{term}` is not of the form W*ATOM"))
            })?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| FotError::Parse(format!("bad combo weight `{w}`")))?;
            parts.push((w, parse_atom(atom.trim())?));
        }
        let spec = AggregatorSpec::LinearCombo(parts);
        spec.validate()?;
        return Ok(spec);
    }
    if let Some(rest) = text.strip_prefix("maxof:") {
        let parts = rest
            .split('|')
            .map(|a| parse_atom(a.trim()))
            .collect::<Result<Vec<_>>>()?;
        let spec = AggregatorSpec::MaxOf(parts);
        spec.validate()?;
        return Ok(spec);
    }
    if let Some(rest) = text.strip_prefix("minof:") {
        let parts = rest
            .split('|')
            .map(|a| parse_atom(a.trim()))
            .collect::<Result<Vec<_>>>()?;
        let spec = AggregatorSpec::MinOf(parts);
        spec.validate()?;
        return Ok(spec);
    }
    let spec = parse_atom(text)?;
    spec.validate()?;
    Ok(spec)
}

fn parse_atom(text: &str) -> Result<AggregatorSpec> {
    match text {
        "avg" => return Ok(AggregatorSpec::Average),
        "min" => return Ok(AggregatorSpec::Minimum),
        "max" => return Ok(AggregatorSpec::Maximum),
        "mad" => return Ok(AggregatorSpec::MeanAbsDev),
        _ => {}
    }
    if let Some(rho) = text.strip_prefix("pctl:") {
        let rho: f64 = rho
            .parse()
            .map_err(|_| FotError::Parse(format!("bad percentile `{rho}`")))?;
        return Ok(AggregatorSpec::Percentile(rho));
    }
    if let Some(h) = text.strip_prefix("thresh:") {
        let h: f64 = h
            .parse()
            .map_err(|_| FotError::Parse(format!("bad threshold `{h}`")))?;
        return Ok(AggregatorSpec::ThresholdExceedance(h));
    }
    Err(FotError::Parse(format!("unknown aggregator `{text}`")))
}

impl fmt::Display for AggregatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregatorSpec::Average => write!(f, "avg"),
            AggregatorSpec::Minimum => write!(f, "min"),
            AggregatorSpec::Maximum => write!(f, "max"),
            AggregatorSpec::MeanAbsDev => write!(f, "mad"),
            AggregatorSpec::Percentile(rho) => write!(f, "pctl:{rho}"),
            AggregatorSpec::ThresholdExceedance(h) => write!(f, "thresh:{h}"),
            AggregatorSpec::LinearCombo(parts) => {
                write!(f, "combo:")?;
                for (i, (w, s)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*{s}")?;
                }
                Ok(())
            }
            AggregatorSpec::MaxOf(parts) => {
                write!(f, "maxof:")?;
                for (i, s) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            AggregatorSpec::MinOf(parts) => {
                write!(f, "minof:")?;
                for (i, s) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agg(spec: &AggregatorSpec, seq: &[f64]) -> f64 {
        aggregate(spec, seq).unwrap()
    }

    #[test]
    fn average_matches_worked_examples() {
        assert_eq!(agg(&AggregatorSpec::Average, &[5.0; 7]), 5.0);
        assert_eq!(
            agg(&AggregatorSpec::Average, &[14.0, 14.0, 14.0, 0.0, 0.0, 0.0, 0.0]),
            6.0
        );
    }

    #[test]
    fn minimum_of_mixed_sequence() {
        assert_eq!(
            agg(&AggregatorSpec::Minimum, &[14.0, 14.0, 14.0, 0.0, 0.0, 0.0, 0.0]),
            0.0
        );
    }

    #[test]
    fn percentile_midpoint_rule() {
        assert_eq!(agg(&AggregatorSpec::Percentile(0.5), &[1.0, 2.0, 3.0, 4.0]), 2.5);
        // rho*T not an integer: ceil rule.
        assert_eq!(agg(&AggregatorSpec::Percentile(0.5), &[1.0, 2.0, 3.0]), 2.0);
        // boundary clamps
        assert_eq!(agg(&AggregatorSpec::Percentile(0.0), &[3.0, 1.0, 2.0]), 1.0);
        assert_eq!(agg(&AggregatorSpec::Percentile(1.0), &[3.0, 1.0, 2.0]), 3.0);
    }

    #[test]
    fn threshold_is_a_fraction_with_tie_as_exceedance() {
        let seq = [14.0, 14.0, 14.0, 0.0, 0.0, 0.0, 0.0];
        let v = agg(&AggregatorSpec::ThresholdExceedance(1.0), &seq);
        assert!((v - 3.0 / 7.0).abs() < 1e-15);
        assert_eq!(agg(&AggregatorSpec::ThresholdExceedance(2.0), &[2.0, 1.0]), 0.5);
    }

    #[test]
    fn mad_simple() {
        assert_eq!(agg(&AggregatorSpec::MeanAbsDev, &[1.0, 3.0]), 1.0);
        assert_eq!(agg(&AggregatorSpec::MeanAbsDev, &[4.0, 4.0]), 0.0);
    }

    #[test]
    fn combo_half_min_half_avg() {
        let spec = AggregatorSpec::min_avg_combo(0.5, 0.5);
        assert_eq!(agg(&spec, &[0.0, 4.0]), 1.0);
    }

    #[test]
    fn max_min_combinators_recompute() {
        let spec = AggregatorSpec::MaxOf(vec![AggregatorSpec::Minimum, AggregatorSpec::Average]);
        let seq = [1.0, 5.0];
        assert_eq!(agg(&spec, &seq), 3.0);
        let spec = AggregatorSpec::MinOf(vec![AggregatorSpec::Maximum, AggregatorSpec::Average]);
        assert_eq!(agg(&spec, &seq), 3.0);
    }

    #[test]
    fn empty_sequence_is_an_error() {
        assert!(aggregate::<f64>(&AggregatorSpec::Average, &[]).is_err());
    }

    #[test]
    fn works_in_f32() {
        let v: f32 = aggregate(&AggregatorSpec::Average, &[1.0f32, 2.0]).unwrap();
        assert!((v - 1.5).abs() < 1e-6);
    }

    #[test]
    fn parser_round_trips() {
        for text in ["avg", "min", "max", "mad", "pctl:0.5", "thresh:1", "combo:0.5*min+0.5*avg",
                     "maxof:min|avg", "minof:max|mad"] {
            let spec = parse_aggregator(text).unwrap();
            let printed = spec.to_string();
            assert_eq!(parse_aggregator(&printed).unwrap(), spec);
        }
        assert!(parse_aggregator("median").is_err());
        assert!(parse_aggregator("pctl:1.5").is_err());
        assert!(parse_aggregator("combo:").is_err());
    }

    #[test]
    fn extension_agnostic_spot_checks() {
        let specs = [
            AggregatorSpec::Average,
            AggregatorSpec::Minimum,
            AggregatorSpec::Maximum,
            AggregatorSpec::Percentile(0.3),
            AggregatorSpec::ThresholdExceedance(2.0),
            AggregatorSpec::MeanAbsDev,
        ];
        let seq = [3.0, 1.0, 4.0, 1.5];
        for spec in &specs {
            let base = agg(spec, &seq);
            for m in [2, 3, 5] {
                let rep: Vec<f64> = seq.iter().copied().cycle().take(seq.len() * m).collect();
                assert!((agg(spec, &rep) - base).abs() < 1e-12, "{spec} repeat {m}");
            }
        }
    }
}
