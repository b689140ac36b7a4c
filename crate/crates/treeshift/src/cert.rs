//! Certification tags for answers computed on truncated data.
//!
//! A truncated tree only determines its invariants up to the truncation
//! depth unless a tail rule extends it.  Every decision produced from such
//! data carries a tag saying whether the answer is exact for the full
//! infinite object or only certified on the inspected prefix.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certification {
    /// The answer holds for the full (possibly infinite) object.
    Exact,
    /// The answer was verified on indices `0..=depth` only.
    PrefixCertified { depth: usize },
}

impl Certification {
    /// Combine two certifications: exact only if both are exact, otherwise
    /// certified up to the smaller prefix.
    pub fn meet(self, other: Certification) -> Certification {
        use Certification::*;
        match (self, other) {
            (Exact, Exact) => Exact,
            (Exact, PrefixCertified { depth }) | (PrefixCertified { depth }, Exact) => {
                PrefixCertified { depth }
            }
            (PrefixCertified { depth: a }, PrefixCertified { depth: b }) => {
                PrefixCertified { depth: a.min(b) }
            }
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Certification::Exact)
    }
}

impl std::fmt::Display for Certification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Certification::Exact => write!(f, "exact"),
            Certification::PrefixCertified { depth } => {
                write!(f, "prefix-certified to depth {depth}")
            }
        }
    }
}

/// A value together with the certification of the computation that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certified<T> {
    pub value: T,
    pub cert: Certification,
}

impl<T> Certified<T> {
    pub fn exact(value: T) -> Self {
        Certified {
            value,
            cert: Certification::Exact,
        }
    }

    pub fn prefix(value: T, depth: usize) -> Self {
        Certified {
            value,
            cert: Certification::PrefixCertified { depth },
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Certified<U> {
        Certified {
            value: f(self.value),
            cert: self.cert,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meet_takes_the_weaker_certificate() {
        let e = Certification::Exact;
        let p3 = Certification::PrefixCertified { depth: 3 };
        let p7 = Certification::PrefixCertified { depth: 7 };
        assert_eq!(e.meet(e), e);
        assert_eq!(e.meet(p3), p3);
        assert_eq!(p7.meet(e), p7);
        assert_eq!(p3.meet(p7), p3);
        assert_eq!(p7.meet(p3), p3);
    }
}
