//! Moment-sequence specs and their periodicity classification.
//!
//! A balanced shift is summarized by its generation-norm sequence
//! `c_0, c_1, ...`.  Three ways to present such a sequence:
//!
//! * closed forms `c_n = sqrt((n+q)/(n+1))` (Dirichlet-type) and
//!   `c_n = sqrt((n+1)/(n+q))` (Bergman-type), `q >= 1`,
//! * an eventually periodic list (preperiod then repeating block),
//! * a bare prefix measured off a truncated operator.
//!
//! The classifier decides whether the sequence is periodic, eventually
//! periodic, or non-periodic.  Closed forms with `q > 1` are strictly
//! monotone, hence non-periodic, exactly; prefixes only support
//! prefix-certified hypotheses.  Cross-spec equality (`c_n = c~_n` for all
//! `n`) is decided exactly for closed forms via rational arithmetic —
//! both squared forms are Moebius functions of `n`, so agreement at three
//! points forces agreement everywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cert::{Certification, Certified};
use crate::error::SeqError;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Dirichlet,
    Bergman,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Dirichlet => write!(f, "dirichlet"),
            Family::Bergman => write!(f, "bergman"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentSequenceSpec {
    ClosedForm {
        family: Family,
        q: f64,
    },
    EventuallyPeriodic {
        #[serde(default)]
        preperiod: Vec<f64>,
        period: Vec<f64>,
    },
    PrefixOnly {
        prefix: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum PeriodicityKind {
    Periodic { period: usize },
    EventuallyPeriodic { preperiod: usize, period: usize },
    NonPeriodic,
    /// A prefix too short to support any periodicity hypothesis.
    UnknownPrefix { len: usize },
}

impl std::fmt::Display for PeriodicityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PeriodicityKind::Periodic { period } => write!(f, "periodic (period {period})"),
            PeriodicityKind::EventuallyPeriodic { preperiod, period } => {
                write!(f, "eventually periodic (preperiod {preperiod}, period {period})")
            }
            PeriodicityKind::NonPeriodic => write!(f, "non-periodic"),
            PeriodicityKind::UnknownPrefix { len } => {
                write!(f, "unknown (prefix of {len} terms)")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityVerdict {
    pub kind: PeriodicityKind,
    pub cert: Certification,
}

/// First index at which two moment sequences differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeqMismatch {
    pub index: usize,
    pub left: f64,
    pub right: f64,
    pub rel_gap: f64,
}

/// Length of the repeating block once borders are folded away (exact
/// element equality; the input is a literal list, not a measurement).
fn minimal_period(xs: &[f64]) -> usize {
    let n = xs.len();
    let mut fail = vec![0usize; n];
    for i in 1..n {
        let mut j = fail[i - 1];
        while j > 0 && xs[i] != xs[j] {
            j = fail[j - 1];
        }
        if xs[i] == xs[j] {
            j += 1;
        }
        fail[i] = j;
    }
    let k = n - fail[n - 1];
    if n.is_multiple_of(k) {
        k
    } else {
        n
    }
}

/// Canonical (preperiod, period) pair: the period is minimal and the
/// preperiod is as short as possible (trailing preperiod entries that
/// match the cycle are folded into it by rotating the period).
fn canonicalize_ep(preperiod: &[f64], period: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = minimal_period(period);
    let mut per = period[..k].to_vec();
    let mut pre = preperiod.to_vec();
    while let Some(&x) = pre.last() {
        if x == *per.last().expect("period is non-empty") {
            pre.pop();
            per.rotate_right(1);
        } else {
            break;
        }
    }
    (pre, per)
}

impl MomentSequenceSpec {
    pub fn dirichlet(q: f64) -> MomentSequenceSpec {
        MomentSequenceSpec::ClosedForm {
            family: Family::Dirichlet,
            q,
        }
    }

    pub fn bergman(q: f64) -> MomentSequenceSpec {
        MomentSequenceSpec::ClosedForm {
            family: Family::Bergman,
            q,
        }
    }

    pub fn validate(&self) -> Result<(), SeqError> {
        match self {
            MomentSequenceSpec::ClosedForm { q, .. } => {
                if !(q.is_finite() && *q >= 1.0) {
                    return Err(SeqError::QTooSmall { q: *q });
                }
            }
            MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => {
                if period.is_empty() {
                    return Err(SeqError::EmptySpec);
                }
                for (i, &x) in preperiod.iter().chain(period).enumerate() {
                    if !(x.is_finite() && x > 0.0) {
                        return Err(SeqError::NonPositiveTerm { index: i, value: x });
                    }
                }
            }
            MomentSequenceSpec::PrefixOnly { prefix } => {
                if prefix.is_empty() {
                    return Err(SeqError::EmptySpec);
                }
                for (i, &x) in prefix.iter().enumerate() {
                    if !(x.is_finite() && x > 0.0) {
                        return Err(SeqError::NonPositiveTerm { index: i, value: x });
                    }
                }
            }
        }
        Ok(())
    }

    /// `c_n`; errors only for a prefix spec queried past its end.
    pub fn c(&self, n: usize) -> Result<f64, SeqError> {
        match self {
            MomentSequenceSpec::ClosedForm { family, q } => {
                let x = n as f64;
                Ok(match family {
                    Family::Dirichlet => ((x + q) / (x + 1.0)).sqrt(),
                    Family::Bergman => ((x + 1.0) / (x + q)).sqrt(),
                })
            }
            MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => {
                if n < preperiod.len() {
                    Ok(preperiod[n])
                } else {
                    Ok(period[(n - preperiod.len()) % period.len()])
                }
            }
            MomentSequenceSpec::PrefixOnly { prefix } => {
                prefix.get(n).copied().ok_or(SeqError::IndexOutOfRange {
                    index: n,
                    len: prefix.len(),
                })
            }
        }
    }

    /// `c_n^2` as an exact rational, available for closed forms (every
    /// finite `q` is itself a dyadic rational).
    pub fn c_squared_exact(&self, n: usize) -> Option<BigRational> {
        match self {
            MomentSequenceSpec::ClosedForm { family, q } => {
                let qr = BigRational::from_float(*q)?;
                let nr = BigRational::from_integer(BigInt::from(n));
                let one = BigRational::from_integer(BigInt::from(1));
                Some(match family {
                    Family::Dirichlet => (&nr + &qr) / (&nr + &one),
                    Family::Bergman => (&nr + &one) / (&nr + &qr),
                })
            }
            _ => None,
        }
    }

    /// Number of terms the sequence spec can produce, `None` when unbounded.
    pub fn known_len(&self) -> Option<usize> {
        match self {
            MomentSequenceSpec::PrefixOnly { prefix } => Some(prefix.len()),
            _ => None,
        }
    }

    /// Supremum of the sequence.  Closed forms are monotone: the
    /// Dirichlet-type decreases from `sqrt(q)`, the Bergman-type increases
    /// towards `1`.
    pub fn sup(&self) -> Certified<f64> {
        match self {
            MomentSequenceSpec::ClosedForm { family, q } => Certified::exact(match family {
                Family::Dirichlet => q.sqrt(),
                Family::Bergman => 1.0,
            }),
            MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => Certified::exact(
                preperiod
                    .iter()
                    .chain(period)
                    .fold(f64::NEG_INFINITY, |m, &x| m.max(x)),
            ),
            MomentSequenceSpec::PrefixOnly { prefix } => Certified::prefix(
                prefix.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)),
                prefix.len().saturating_sub(1),
            ),
        }
    }

    /// Periodicity class.  Exact for closed forms and explicit eventually
    /// periodic data; a bare prefix yields at best a prefix-certified
    /// hypothesis (matches at relative tolerance, since prefixes usually
    /// come from numerics).
    pub fn classify(&self) -> PeriodicityVerdict {
        match self {
            MomentSequenceSpec::ClosedForm { q, .. } => {
                let kind = if *q == 1.0 {
                    PeriodicityKind::Periodic { period: 1 }
                } else {
                    // q > 1 makes c_n strictly monotone in n, so no two
                    // indices can share a value, let alone repeat.
                    PeriodicityKind::NonPeriodic
                };
                PeriodicityVerdict {
                    kind,
                    cert: Certification::Exact,
                }
            }
            MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => {
                let (pre, per) = canonicalize_ep(preperiod, period);
                let kind = if pre.is_empty() {
                    PeriodicityKind::Periodic { period: per.len() }
                } else {
                    PeriodicityKind::EventuallyPeriodic {
                        preperiod: pre.len(),
                        period: per.len(),
                    }
                };
                PeriodicityVerdict {
                    kind,
                    cert: Certification::Exact,
                }
            }
            MomentSequenceSpec::PrefixOnly { prefix } => {
                let len = prefix.len();
                let cert = Certification::PrefixCertified {
                    depth: len.saturating_sub(1),
                };
                for k in 1..=len / 2 {
                    // Last index where the k-shift disagrees decides the
                    // preperiod; require two full periods of evidence.
                    let mut n0 = 0;
                    for m in (0..len - k).rev() {
                        if !tol::rel_close(prefix[m], prefix[m + k], tol::BALANCE_REL) {
                            n0 = m + 1;
                            break;
                        }
                    }
                    if n0 + 2 * k <= len {
                        let kind = if n0 == 0 {
                            PeriodicityKind::Periodic { period: k }
                        } else {
                            PeriodicityKind::EventuallyPeriodic {
                                preperiod: n0,
                                period: k,
                            }
                        };
                        return PeriodicityVerdict { kind, cert };
                    }
                }
                PeriodicityVerdict {
                    kind: PeriodicityKind::UnknownPrefix { len },
                    cert,
                }
            }
        }
    }

    /// Whether the classification is non-periodic with an exact certificate.
    pub fn is_certified_nonperiodic(&self) -> bool {
        let v = self.classify();
        v.kind == PeriodicityKind::NonPeriodic && v.cert.is_exact()
    }

    /// Do the tails `(c_{m1+j})_j` and `(c_{m2+j})_j` agree for every `j`?
    pub fn tails_equal(&self, m1: usize, m2: usize) -> Certified<bool> {
        if m1 == m2 {
            return Certified::exact(true);
        }
        match self {
            MomentSequenceSpec::ClosedForm { q, .. } => {
                // q = 1 is the constant sequence; q > 1 is strictly
                // monotone, so distinct offsets already differ at j = 0.
                Certified::exact(*q == 1.0)
            }
            MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => {
                let (pre, per) = canonicalize_ep(preperiod, period);
                let start = pre.len().saturating_sub(m1.min(m2));
                let window = start + per.len();
                let equal = (0..window).all(|j| {
                    self.c(m1 + j).expect("unbounded spec") == self.c(m2 + j).expect("unbounded spec")
                });
                Certified::exact(equal)
            }
            MomentSequenceSpec::PrefixOnly { prefix } => {
                let len = prefix.len();
                let hi = m1.max(m2);
                if hi >= len {
                    return Certified::prefix(true, 0);
                }
                let window = len - hi;
                let equal = (0..window)
                    .all(|j| tol::rel_close(prefix[m1 + j], prefix[m2 + j], tol::BALANCE_REL));
                Certified::prefix(equal, window.saturating_sub(1))
            }
        }
    }

    /// First index where two sequences differ, or `None` when they agree
    /// for every index the comparison can certify.
    ///
    /// Closed form against closed form is exact (rational arithmetic plus
    /// the three-point Moebius argument).  Closed form or explicit lists
    /// against each other compare at full `f64` resolution over a window
    /// that provably decides equality.  Prefixes compare at relative
    /// tolerance and certify only their overlap.
    pub fn first_mismatch(
        a: &MomentSequenceSpec,
        b: &MomentSequenceSpec,
    ) -> Certified<Option<SeqMismatch>> {
        use MomentSequenceSpec::*;

        let mismatch_at = |n: usize| -> SeqMismatch {
            let (l, r) = (a.c(n).unwrap_or(f64::NAN), b.c(n).unwrap_or(f64::NAN));
            SeqMismatch {
                index: n,
                left: l,
                right: r,
                rel_gap: tol::rel_gap(l, r),
            }
        };

        match (a, b) {
            (ClosedForm { .. }, ClosedForm { .. }) => {
                for n in 0..3 {
                    if a.c_squared_exact(n) != b.c_squared_exact(n) {
                        return Certified::exact(Some(mismatch_at(n)));
                    }
                }
                Certified::exact(None)
            }
            (PrefixOnly { prefix }, _) | (_, PrefixOnly { prefix }) => {
                let other_len = if matches!(a, PrefixOnly { .. }) {
                    b.known_len()
                } else {
                    a.known_len()
                };
                let window = other_len.unwrap_or(usize::MAX).min(prefix.len());
                for n in 0..window {
                    let (l, r) = (a.c(n).unwrap(), b.c(n).unwrap());
                    if !tol::rel_close(l, r, tol::BALANCE_REL) {
                        return Certified::prefix(Some(mismatch_at(n)), window.saturating_sub(1));
                    }
                }
                Certified::prefix(None, window.saturating_sub(1))
            }
            (EventuallyPeriodic { .. }, EventuallyPeriodic { .. }) => {
                let ((pa, ka), (pb, kb)) = (ep_shape(a), ep_shape(b));
                let window = pa.max(pb) + num_integer::lcm(ka, kb);
                for n in 0..window {
                    if a.c(n).unwrap() != b.c(n).unwrap() {
                        return Certified::exact(Some(mismatch_at(n)));
                    }
                }
                Certified::exact(None)
            }
            (ClosedForm { q, .. }, EventuallyPeriodic { .. })
            | (EventuallyPeriodic { .. }, ClosedForm { q, .. }) => {
                let (p, k) = if matches!(a, EventuallyPeriodic { .. }) {
                    ep_shape(a)
                } else {
                    ep_shape(b)
                };
                // A strictly monotone closed form (q > 1) cannot match a
                // periodic tail beyond one full cycle; the constant q = 1
                // form matches iff every explicit value is 1.
                let window = p + k + 1;
                for n in 0..window {
                    if a.c(n).unwrap() != b.c(n).unwrap() {
                        return Certified::exact(Some(mismatch_at(n)));
                    }
                }
                if *q == 1.0 {
                    Certified::exact(None)
                } else {
                    // Equality on the window plus strict monotonicity is
                    // contradictory at f64 resolution only if the closed
                    // form has flattened; certify the window in that case.
                    Certified::prefix(None, window.saturating_sub(1))
                }
            }
        }
    }
}

/// Canonical (preperiod length, period length) of an eventually periodic spec.
fn ep_shape(spec: &MomentSequenceSpec) -> (usize, usize) {
    match spec {
        MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => {
            let (pre, per) = canonicalize_ep(preperiod, period);
            (pre.len(), per.len())
        }
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(pre: &[f64], per: &[f64]) -> MomentSequenceSpec {
        MomentSequenceSpec::EventuallyPeriodic {
            preperiod: pre.to_vec(),
            period: per.to_vec(),
        }
    }

    #[test]
    fn closed_forms_evaluate_and_classify() {
        let d2 = MomentSequenceSpec::dirichlet(2.0);
        assert_eq!(d2.c(0).unwrap(), 2.0_f64.sqrt());
        assert_eq!(d2.c(1).unwrap(), (3.0_f64 / 2.0).sqrt());
        assert_eq!(
            d2.classify(),
            PeriodicityVerdict {
                kind: PeriodicityKind::NonPeriodic,
                cert: Certification::Exact
            }
        );
        let b1 = MomentSequenceSpec::bergman(1.0);
        assert_eq!(b1.c(5).unwrap(), 1.0);
        assert_eq!(
            b1.classify().kind,
            PeriodicityKind::Periodic { period: 1 }
        );
    }

    #[test]
    fn eventually_periodic_normalizes_to_minimal_form() {
        assert_eq!(
            ep(&[], &[5.0, 5.0]).classify().kind,
            PeriodicityKind::Periodic { period: 1 }
        );
        assert_eq!(
            ep(&[1.0, 2.0], &[1.0, 2.0]).classify().kind,
            PeriodicityKind::Periodic { period: 2 }
        );
        assert_eq!(
            ep(&[3.0], &[1.0, 3.0]).classify().kind,
            PeriodicityKind::Periodic { period: 2 }
        );
        assert_eq!(
            ep(&[2.0, 1.0], &[1.0]).classify().kind,
            PeriodicityKind::EventuallyPeriodic {
                preperiod: 1,
                period: 1
            }
        );
        assert_eq!(
            ep(&[], &[1.0, 2.0, 1.0, 2.0]).classify().kind,
            PeriodicityKind::Periodic { period: 2 }
        );
    }

    #[test]
    fn prefix_hypotheses_need_two_periods_of_evidence() {
        let hyp = MomentSequenceSpec::PrefixOnly {
            prefix: vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0],
        };
        let v = hyp.classify();
        assert_eq!(v.kind, PeriodicityKind::Periodic { period: 2 });
        assert_eq!(v.cert, Certification::PrefixCertified { depth: 6 });

        let v = MomentSequenceSpec::PrefixOnly {
            prefix: vec![3.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0],
        }
        .classify();
        assert_eq!(
            v.kind,
            PeriodicityKind::EventuallyPeriodic {
                preperiod: 1,
                period: 2
            }
        );

        let v = MomentSequenceSpec::PrefixOnly {
            prefix: vec![1.0, 2.0, 3.0, 4.0, 5.0],
        }
        .classify();
        assert_eq!(v.kind, PeriodicityKind::UnknownPrefix { len: 5 });
    }

    #[test]
    fn closed_form_equality_is_exact() {
        let d2 = MomentSequenceSpec::dirichlet(2.0);
        let d2b = MomentSequenceSpec::dirichlet(2.0);
        let cmp = MomentSequenceSpec::first_mismatch(&d2, &d2b);
        assert!(cmp.cert.is_exact());
        assert_eq!(cmp.value, None);

        let d3 = MomentSequenceSpec::dirichlet(3.0);
        let m = MomentSequenceSpec::first_mismatch(&d2, &d3).value.unwrap();
        assert_eq!(m.index, 0);

        // The two isometric members coincide as sequences.
        let cmp = MomentSequenceSpec::first_mismatch(
            &MomentSequenceSpec::dirichlet(1.0),
            &MomentSequenceSpec::bergman(1.0),
        );
        assert!(cmp.cert.is_exact());
        assert_eq!(cmp.value, None);

        let m = MomentSequenceSpec::first_mismatch(
            &MomentSequenceSpec::dirichlet(2.0),
            &MomentSequenceSpec::bergman(2.0),
        )
        .value
        .unwrap();
        assert_eq!(m.index, 0);
        assert_eq!(m.left, 2.0_f64.sqrt());
        assert_eq!(m.right, 0.5_f64.sqrt());
    }

    #[test]
    fn shifted_presentations_of_one_sequence_agree() {
        // 2, 1, 1, 1, ... presented two ways.
        let a = ep(&[2.0, 1.0], &[1.0]);
        let b = ep(&[2.0], &[1.0]);
        let cmp = MomentSequenceSpec::first_mismatch(&a, &b);
        assert!(cmp.cert.is_exact());
        assert_eq!(cmp.value, None);

        // 1, 2, 1, 2, ... with different phases and paddings.
        let a = ep(&[], &[1.0, 2.0]);
        let b = ep(&[1.0], &[2.0, 1.0]);
        assert_eq!(MomentSequenceSpec::first_mismatch(&a, &b).value, None);

        // Same shape, different value.
        let a = ep(&[], &[1.0, 2.0]);
        let b = ep(&[], &[1.0, 3.0]);
        let m = MomentSequenceSpec::first_mismatch(&a, &b).value.unwrap();
        assert_eq!(m.index, 1);
    }

    #[test]
    fn constant_closed_form_matches_constant_lists() {
        let one = MomentSequenceSpec::dirichlet(1.0);
        let list = ep(&[1.0], &[1.0, 1.0]);
        let cmp = MomentSequenceSpec::first_mismatch(&one, &list);
        assert!(cmp.cert.is_exact());
        assert_eq!(cmp.value, None);

        let d2 = MomentSequenceSpec::dirichlet(2.0);
        let m = MomentSequenceSpec::first_mismatch(&d2, &ep(&[2.0_f64.sqrt()], &[1.0]))
            .value
            .unwrap();
        assert_eq!(m.index, 1);
    }

    #[test]
    fn tails_of_strictly_monotone_forms_never_realign() {
        let d2 = MomentSequenceSpec::dirichlet(2.0);
        for m1 in 0..32 {
            for m2 in 0..32 {
                let eq = d2.tails_equal(m1, m2);
                assert!(eq.cert.is_exact());
                assert_eq!(eq.value, m1 == m2, "offsets {m1}, {m2}");
            }
        }
        let spec = ep(&[2.0], &[1.0]);
        assert!(spec.tails_equal(1, 3).value);
        assert!(!spec.tails_equal(0, 1).value);
    }

    #[test]
    fn validation_rejects_bad_terms() {
        assert!(matches!(
            MomentSequenceSpec::dirichlet(0.3).validate(),
            Err(SeqError::QTooSmall { .. })
        ));
        assert!(matches!(
            ep(&[], &[]).validate(),
            Err(SeqError::EmptySpec)
        ));
        assert!(matches!(
            ep(&[1.0], &[0.0]).validate(),
            Err(SeqError::NonPositiveTerm { index: 1, .. })
        ));
        assert!(MomentSequenceSpec::PrefixOnly { prefix: vec![] }
            .validate()
            .is_err());
    }

    #[test]
    fn prefix_comparisons_certify_only_the_overlap() {
        let d2 = MomentSequenceSpec::dirichlet(2.0);
        let measured = MomentSequenceSpec::PrefixOnly {
            prefix: (0..5).map(|n| d2.c(n).unwrap()).collect(),
        };
        let cmp = MomentSequenceSpec::first_mismatch(&d2, &measured);
        assert_eq!(cmp.cert, Certification::PrefixCertified { depth: 4 });
        assert_eq!(cmp.value, None);
    }
}
