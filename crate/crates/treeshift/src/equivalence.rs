//! Unitary-equivalence decisions for balanced shifts.
//!
//! For balanced shifts whose generation-norm sequence is *non-periodic*,
//! two invariants decide unitary equivalence completely: the norm sequence
//! `c_n` itself and the generation cardinalities `Card(G_n)`.  The
//! decider [`decide_nonperiodic`] gates on the periodicity classification
//! and then compares both invariants, exactly where the presentations
//! allow it.
//!
//! Three independent cross-checks keep the decider honest:
//!
//! * [`joint_multiplicity_oracle`] diagonalizes `S*^n S^n` restricted to
//!   the adjoint kernel (it is scalar on each wandering block, with the
//!   moment product as eigenvalue) and compares the joint
//!   eigenvalue/multiplicity data of the two sides — no periodicity
//!   assumption, numerically clustered, truncation-certified.
//! * [`wold_isometry_oracle`] handles isometric weights, where equivalence
//!   is decided by the single multiplicity `dim ker S*`.  Periodic
//!   sequences sit outside the decider's scope, and this oracle shows why
//!   the two-invariant test is only sufficient there.
//! * [`build_block_unitary`] constructs the intertwining unitary promised
//!   when both invariants agree (identity between the deterministic kernel
//!   bases, block by block) and verifies the intertwining residually.

use serde::{Deserialize, Serialize};

use crate::cert::{Certification, Certified};
use crate::error::EquivalenceError;
use crate::seqclass::{MomentSequenceSpec, PeriodicityKind};
use crate::shift::ShiftOperator;
use crate::tol;
use crate::tree::{GenerationProfile, RootedTree};
use crate::wandering::WanderingDecomposition;

/// A balanced shift presented by its two invariants: the moment sequence
/// and the generation-cardinality profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPresentation {
    pub seq: MomentSequenceSpec,
    pub profile: GenerationProfile,
}

impl ShiftPresentation {
    pub fn new(seq: MomentSequenceSpec, profile: GenerationProfile) -> ShiftPresentation {
        ShiftPresentation { seq, profile }
    }

    /// Read both invariants off a concrete operator: the measured moment
    /// table (prefix only) and the tree's profile.
    pub fn from_operator(s: &ShiftOperator) -> Result<ShiftPresentation, crate::error::ShiftError> {
        let table = s.moment_table()?;
        Ok(ShiftPresentation {
            seq: MomentSequenceSpec::PrefixOnly {
                prefix: table.values().to_vec(),
            },
            profile: s.tree().generation_profile(),
        })
    }

    /// A closed-form or listed sequence attached to a concrete tree.
    pub fn with_tree(seq: MomentSequenceSpec, tree: &RootedTree) -> ShiftPresentation {
        ShiftPresentation {
            seq,
            profile: tree.generation_profile(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquivWitness {
    /// Generation norms differ at this index.
    Moment {
        index: usize,
        left: f64,
        right: f64,
        rel_gap: f64,
    },
    /// Generation cardinalities differ at this index.
    Generation {
        index: usize,
        left: String,
        right: String,
    },
    /// The joint spectrum of the restricted moment operators differs: at
    /// this power, the eigenvalue cluster anchored at `block` carries
    /// different total multiplicity on the two sides.
    JointSpectrum {
        power: usize,
        block: usize,
        value: f64,
        left_mult: usize,
        right_mult: usize,
    },
    /// Isometries with different shift multiplicities.
    WoldMultiplicity { left: String, right: String },
}

impl EquivWitness {
    /// The index the witness pins down, comparable across deciders.
    pub fn index(&self) -> Option<usize> {
        match self {
            EquivWitness::Moment { index, .. } => Some(*index),
            EquivWitness::Generation { index, .. } => Some(*index),
            EquivWitness::JointSpectrum { block, .. } => Some(*block),
            EquivWitness::WoldMultiplicity { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    pub cert: Certification,
    pub witness: Option<EquivWitness>,
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }
}

/// Raw two-invariant comparison, no periodicity gate: first moment
/// mismatch, else first cardinality mismatch, else agreement.  Exposed
/// separately because outside the non-periodic regime agreement of the
/// invariants is necessary for equivalence but a mismatch proves nothing —
/// the isometric counterexample below exercises exactly that gap.
pub fn compare_invariants(
    left: &ShiftPresentation,
    right: &ShiftPresentation,
) -> Certified<Option<EquivWitness>> {
    let moments = MomentSequenceSpec::first_mismatch(&left.seq, &right.seq);
    if let Some(m) = moments.value {
        return Certified {
            value: Some(EquivWitness::Moment {
                index: m.index,
                left: m.left,
                right: m.right,
                rel_gap: m.rel_gap,
            }),
            cert: moments.cert,
        };
    }
    let cards = GenerationProfile::compare(&left.profile, &right.profile);
    if let Some(m) = cards.value {
        return Certified {
            value: Some(EquivWitness::Generation {
                index: m.index,
                left: m.left.to_string(),
                right: m.right.to_string(),
            }),
            cert: cards.cert,
        };
    }
    Certified {
        value: None,
        cert: moments.cert.meet(cards.cert),
    }
}

/// Decide unitary equivalence of two balanced shifts with certified
/// non-periodic moment sequences.  Errors with `NotNonPeriodic` when a
/// side fails the gate (periodic, eventually periodic, or an unclassified
/// prefix) — outside that scope the invariants are not a complete set.
pub fn decide_nonperiodic(
    left: &ShiftPresentation,
    right: &ShiftPresentation,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    for (side, p) in [("left", left), ("right", right)] {
        p.seq
            .validate()
            .map_err(|e| EquivalenceError::IncompatibleSpecs {
                reason: format!("{side} sequence: {e}"),
            })?;
        let v = p.seq.classify();
        let exact_nonperiodic = v.kind == PeriodicityKind::NonPeriodic && v.cert.is_exact();
        if !exact_nonperiodic {
            return Err(EquivalenceError::NotNonPeriodic {
                side: side.to_string(),
                kind: v.kind.to_string(),
            });
        }
    }
    let cmp = compare_invariants(left, right);
    Ok(EquivalenceVerdict {
        verdict: if cmp.value.is_none() {
            Verdict::Equivalent
        } else {
            Verdict::NotEquivalent
        },
        cert: cmp.cert,
        witness: cmp.value,
    })
}

/// Eigenvalue/multiplicity data of `S*^n S^n` restricted to the adjoint
/// kernel, compared across the two sides for every power `1..=window`.
///
/// On wandering block `k` the operator acts as the scalar
/// `prod_{j<n} c_{k+j}^2`; distinct blocks may share a scalar, so the
/// comparison clusters eigenvalues (relative tolerance) and compares total
/// multiplicities per cluster.  Blocks are considered while `k + n` stays
/// inside both truncations, hence the verdict is always prefix-certified.
pub fn joint_multiplicity_oracle(
    left: &ShiftOperator,
    right: &ShiftOperator,
    window: usize,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    let table = |side: &str, s: &ShiftOperator| {
        s.moment_table()
            .map_err(|e| EquivalenceError::NotBalanced {
                side: side.to_string(),
                witness: e.to_string(),
            })
    };
    let (tl, tr) = (table("left", left)?, table("right", right)?);
    let dims_l = WanderingDecomposition::kernel_basis(left).dims();
    let dims_r = WanderingDecomposition::kernel_basis(right).dims();
    let k_limit = left
        .tree()
        .truncation_depth()
        .min(right.tree().truncation_depth());

    if k_limit < 1 {
        return Err(EquivalenceError::TruncationOverflow { window });
    }

    let mut checked_power = 0usize;
    for n in 1..=window {
        if k_limit < n {
            break;
        }
        checked_power = n;
        // Pool (eigenvalue, multiplicity, block) for blocks 0..=k_limit-n
        // from both sides and cluster by eigenvalue.
        #[derive(Clone, Copy)]
        struct Entry {
            value: f64,
            dim: usize,
            block: usize,
            left_side: bool,
        }
        let mut entries: Vec<Entry> = Vec::new();
        for (left_side, dims, t) in [(true, &dims_l, &tl), (false, &dims_r, &tr)] {
            for k in 0..=(k_limit - n) {
                let dim = dims.get(k).copied().unwrap_or(0);
                if dim == 0 {
                    continue;
                }
                let p = t
                    .moment_product(k, n)
                    .expect("k + n within both truncations");
                entries.push(Entry {
                    value: p * p,
                    dim,
                    block: k,
                    left_side,
                });
            }
        }
        entries.sort_by(|a, b| a.value.total_cmp(&b.value));

        // Greedy clustering along the sorted axis.
        let mut clusters: Vec<Vec<Entry>> = Vec::new();
        for e in entries {
            match clusters.last_mut() {
                Some(c) if tol::rel_close(c[0].value, e.value, tol::ORACLE_TUPLE_REL) => {
                    c.push(e)
                }
                _ => clusters.push(vec![e]),
            }
        }

        let mut mismatched: Vec<(usize, f64, usize, usize)> = Vec::new();
        for c in &clusters {
            let lm: usize = c.iter().filter(|e| e.left_side).map(|e| e.dim).sum();
            let rm: usize = c.iter().filter(|e| !e.left_side).map(|e| e.dim).sum();
            if lm != rm {
                let block = c.iter().map(|e| e.block).min().expect("non-empty cluster");
                mismatched.push((block, c[0].value, lm, rm));
            }
        }
        if let Some(&(block, value, lm, rm)) = mismatched
            .iter()
            .min_by_key(|&&(block, _, _, _)| block)
        {
            return Ok(EquivalenceVerdict {
                verdict: Verdict::NotEquivalent,
                cert: Certification::Exact,
                witness: Some(EquivWitness::JointSpectrum {
                    power: n,
                    block,
                    value,
                    left_mult: lm,
                    right_mult: rm,
                }),
            });
        }
    }

    if checked_power == 0 {
        return Err(EquivalenceError::TruncationOverflow { window });
    }
    Ok(EquivalenceVerdict {
        verdict: Verdict::Equivalent,
        cert: Certification::PrefixCertified {
            depth: checked_power,
        },
        witness: None,
    })
}

/// Wold-type comparison for isometric shifts: both operators must have
/// all local norms equal to one, and then unitary equivalence is decided
/// by the multiplicity `dim ker S*`, i.e. the supremum of the generation
/// cardinalities.
pub fn wold_isometry_oracle(
    left: &ShiftOperator,
    right: &ShiftOperator,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    for (side, s) in [("left", left), ("right", right)] {
        if let Some((v, norm)) = s.isometry_witness(tol::BALANCE_REL) {
            return Err(EquivalenceError::NotIsometric {
                side: side.to_string(),
                vertex: v.0,
                norm,
            });
        }
    }

    // dim ker S* = 1 + sum over branching vertices of (children - 1),
    // which telescopes to the supremum of Card(G_n).
    let multiplicity = |s: &ShiftOperator| -> Certified<Option<u64>> {
        let profile = s.tree().generation_profile();
        let sup = profile.prefix().iter().copied().max().unwrap_or(1);
        match (s.tree().tail(), profile.tail()) {
            (None, _) => Certified::prefix(Some(sup), s.tree().truncation_depth()),
            (_, Some(t)) if t.ratio > 1 => Certified::exact(None), // infinite
            _ => Certified::exact(Some(sup)),
        }
    };
    let (ml, mr) = (multiplicity(left), multiplicity(right));
    let cert = ml.cert.meet(mr.cert);
    let show = |m: Option<u64>| m.map_or("infinite".to_string(), |x| x.to_string());
    if ml.value == mr.value {
        Ok(EquivalenceVerdict {
            verdict: Verdict::Equivalent,
            cert,
            witness: None,
        })
    } else {
        Ok(EquivalenceVerdict {
            verdict: Verdict::NotEquivalent,
            cert,
            witness: Some(EquivWitness::WoldMultiplicity {
                left: show(ml.value),
                right: show(mr.value),
            }),
        })
    }
}

/// The unitary between the two adjoint kernels promised by agreeing
/// invariants, realized as the identity between the deterministic kernel
/// bases, block by block — plus a residual check that it intertwines the
/// restricted moment operators up to the feasible power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockUnitaryReport {
    pub dims: Vec<usize>,
    pub powers_checked: usize,
    pub max_residual: f64,
    pub pass: bool,
}

pub fn build_block_unitary(
    left: &ShiftOperator,
    right: &ShiftOperator,
    window: usize,
) -> Result<BlockUnitaryReport, EquivalenceError> {
    let table = |side: &str, s: &ShiftOperator| {
        s.moment_table()
            .map_err(|e| EquivalenceError::NotBalanced {
                side: side.to_string(),
                witness: e.to_string(),
            })
    };
    let (tl, tr) = (table("left", left)?, table("right", right)?);
    let k_limit = left
        .tree()
        .truncation_depth()
        .min(right.tree().truncation_depth());

    for n in 0..k_limit.min(tl.len()).min(tr.len()) {
        let (l, r) = (tl.c(n).unwrap(), tr.c(n).unwrap());
        if !tol::rel_close(l, r, tol::BALANCE_REL) {
            return Err(EquivalenceError::MomentMismatch {
                index: n,
                left: l,
                right: r,
                gap: tol::rel_gap(l, r),
            });
        }
    }

    let dl = WanderingDecomposition::kernel_basis(left);
    let dr = WanderingDecomposition::kernel_basis(right);
    let (dims_l, dims_r) = (dl.dims(), dr.dims());
    for k in 0..=k_limit {
        let (a, b) = (
            dims_l.get(k).copied().unwrap_or(0),
            dims_r.get(k).copied().unwrap_or(0),
        );
        if a != b {
            return Err(EquivalenceError::DimensionMismatch {
                index: k,
                left: a,
                right: b,
            });
        }
    }

    // With U the identity in the block bases, the intertwining condition
    // per power reduces to equality of the two gram restrictions.
    let mut max_residual = 0.0_f64;
    let mut powers_checked = 0usize;
    for n in 1..=window.min(k_limit) {
        let gl = crate::wandering::gram_restriction(left, &dl, n);
        let gr = crate::wandering::gram_restriction(right, &dr, n);
        let (gl, gr) = match (gl, gr) {
            (Ok(a), Ok(b)) => (a, b),
            _ => break,
        };
        // Compare over the blocks feasible on both sides.
        let common: Vec<usize> = gl
            .blocks_included
            .iter()
            .copied()
            .filter(|k| gr.blocks_included.contains(k))
            .collect();
        let sub = |g: &crate::wandering::GramRestriction| -> Vec<(usize, usize, f64)> {
            let mut out = Vec::new();
            for (i, li) in g.labels.iter().enumerate() {
                for (j, lj) in g.labels.iter().enumerate() {
                    if common.contains(&li.block) && common.contains(&lj.block) {
                        out.push((li.block * 1000 + li.column, lj.block * 1000 + lj.column, g.matrix[(i, j)]));
                    }
                }
            }
            out.sort_by_key(|&(i, j, _)| (i, j));
            out
        };
        let (a, b) = (sub(&gl), sub(&gr));
        if a.len() != b.len() {
            break;
        }
        powers_checked = n;
        for (x, y) in a.iter().zip(&b) {
            max_residual = max_residual.max((x.2 - y.2).abs());
        }
    }

    Ok(BlockUnitaryReport {
        dims: dims_l.iter().take(k_limit + 1).copied().collect(),
        powers_checked,
        max_residual,
        pass: powers_checked >= 1 && max_residual <= tol::INTERTWINE_ABS,
    })
}
