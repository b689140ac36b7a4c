//! On-disk JSON formats for trees, weighted shifts, and moment sequences.
//!
//! Tree spec:
//!
//! ```json
//! {
//!   "depth": 3,
//!   "children": { "0": ["1", "2"], "1": ["3"], "2": ["4"], ... },
//!   "tail": "all_rays"            // or {"self_similar": 2}, or absent
//! }
//! ```
//!
//! Shift spec: a tree plus either a weight family or explicit weights,
//! optionally with a claimed moment sequence for the part past the
//! truncation:
//!
//! ```json
//! { "tree": {...}, "family": "dirichlet", "q": 2.0 }
//! { "tree": {...}, "weights": {"1": 0.7, "2": 0.7}, "sequence": {"period": [1.0]} }
//! ```
//!
//! Sequence spec (standalone): `{"family": ..., "q": ...}`,
//! `{"preperiod": [...], "period": [...]}`, or `{"prefix": [...]}`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ShiftError, SpecError};
use crate::seqclass::{Family, MomentSequenceSpec};
use crate::shift::{ShiftOperator, WeightSystem};
use crate::tol;
use crate::tree::{RootedTree, TailRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub depth: usize,
    #[serde(default)]
    pub children: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailSpec {
    Named(NamedTail),
    SelfSimilar { self_similar: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NamedTail {
    #[serde(rename = "all_rays")]
    AllRays,
}

impl TailSpec {
    pub fn to_rule(self) -> TailRule {
        match self {
            TailSpec::Named(NamedTail::AllRays) => TailRule::AllRays,
            TailSpec::SelfSimilar { self_similar } => TailRule::SelfSimilar {
                period: self_similar,
            },
        }
    }

    pub fn from_rule(rule: TailRule) -> TailSpec {
        match rule {
            TailRule::AllRays => TailSpec::Named(NamedTail::AllRays),
            TailRule::SelfSimilar { period } => TailSpec::SelfSimilar {
                self_similar: period,
            },
        }
    }
}

impl TreeSpec {
    pub fn build(&self) -> Result<RootedTree, crate::error::TreeError> {
        RootedTree::from_adjacency(&self.children, self.depth, self.tail.map(TailSpec::to_rule))
    }

    /// Spec describing an already-built tree (labels preserved).
    pub fn describe(tree: &RootedTree) -> TreeSpec {
        let mut children = BTreeMap::new();
        for i in 0..tree.vertex_count() {
            let v = crate::tree::VertexId(i);
            if !tree.children(v).is_empty() {
                children.insert(
                    tree.label(v).to_string(),
                    tree.children(v).iter().map(|&c| tree.label(c).to_string()).collect(),
                );
            }
        }
        TreeSpec {
            depth: tree.truncation_depth(),
            children,
            tail: tree.tail().map(TailSpec::from_rule),
        }
    }
}

/// Either a named weight family or explicit per-vertex weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Family { family: Family, q: f64 },
    Explicit { weights: BTreeMap<String, f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub tree: TreeSpec,
    #[serde(flatten)]
    pub weights: WeightSpec,
    /// Optional claim about the full moment sequence (checked against the
    /// measured prefix when the shift is balanced).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<MomentSequenceSpec>,
}

/// A shift built from a spec file, keeping the sequence information the
/// spec carried.
#[derive(Debug, Clone)]
pub struct LoadedShift {
    pub shift: ShiftOperator,
    pub tree: Arc<RootedTree>,
    pub spec: ShiftSpec,
}

impl LoadedShift {
    /// Best available moment-sequence spec: the family closed form, the
    /// claimed sequence, or the measured prefix of a balanced shift.
    pub fn seq_spec(&self) -> Result<MomentSequenceSpec, ShiftError> {
        match (&self.spec.weights, &self.spec.sequence) {
            (WeightSpec::Family { family, q }, _) => Ok(MomentSequenceSpec::ClosedForm {
                family: *family,
                q: *q,
            }),
            (_, Some(seq)) => Ok(seq.clone()),
            _ => {
                let table = self.shift.moment_table()?;
                Ok(MomentSequenceSpec::PrefixOnly {
                    prefix: table.values().to_vec(),
                })
            }
        }
    }
}

impl ShiftSpec {
    pub fn build(&self) -> Result<LoadedShift, SpecError> {
        let tree = Arc::new(self.tree.build()?);
        let shift = match &self.weights {
            WeightSpec::Family { family, q } => match family {
                Family::Dirichlet => ShiftOperator::dirichlet(Arc::clone(&tree), *q)?,
                Family::Bergman => ShiftOperator::bergman(Arc::clone(&tree), *q)?,
            },
            WeightSpec::Explicit { weights } => {
                let ws = WeightSystem::from_labeled(&tree, weights)?;
                ShiftOperator::new(Arc::clone(&tree), ws)?
            }
        };
        // A claimed sequence must agree with whatever the truncation
        // actually measures, and must itself be well-formed.
        if let Some(seq) = &self.sequence {
            seq.validate()?;
            if let Ok(table) = shift.moment_table() {
                for (n, &measured) in table.values().iter().enumerate() {
                    let claimed = seq.c(n).map_err(SpecError::Seq)?;
                    if !tol::rel_close(claimed, measured, tol::BALANCE_REL) {
                        return Err(SpecError::SpecParseError {
                            path: "(sequence)".to_string(),
                            reason: format!(
                                "claimed moment c_{n} = {claimed} disagrees with the measured {measured}"
                            ),
                        });
                    }
                }
            }
        }
        Ok(LoadedShift {
            shift,
            tree,
            spec: self.clone(),
        })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| SpecError::SpecParseError {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn load_tree(path: &Path) -> Result<RootedTree, SpecError> {
    let spec: TreeSpec = read_json(path)?;
    Ok(spec.build()?)
}

pub fn load_shift(path: &Path) -> Result<LoadedShift, SpecError> {
    let spec: ShiftSpec = read_json(path)?;
    spec.build()
}

pub fn load_sequence(path: &Path) -> Result<MomentSequenceSpec, SpecError> {
    let spec: MomentSequenceSpec = read_json(path)?;
    spec.validate()?;
    Ok(spec)
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("spec types serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_spec_round_trips_through_json() {
        let json = r#"{
            "depth": 2,
            "children": { "0": ["1", "2"], "1": ["3"], "2": ["4", "5"] },
            "tail": "all_rays"
        }"#;
        let spec: TreeSpec = serde_json::from_str(json).unwrap();
        let tree = spec.build().unwrap();
        assert_eq!(tree.prefix_cards(), vec![1, 2, 3]);
        assert_eq!(tree.tail(), Some(TailRule::AllRays));

        let redescribed = TreeSpec::describe(&tree);
        let tree2 = redescribed.build().unwrap();
        assert_eq!(tree.prefix_cards(), tree2.prefix_cards());

        let json = r#"{ "depth": 1, "children": { "0": ["1"] }, "tail": {"self_similar": 1} }"#;
        let spec: TreeSpec = serde_json::from_str(json).unwrap();
        assert_eq!(
            spec.build().unwrap().tail(),
            Some(TailRule::SelfSimilar { period: 1 })
        );
    }

    #[test]
    fn family_and_explicit_weights_both_parse() {
        let json = r#"{
            "tree": { "depth": 2, "children": { "0": ["1", "2"], "1": ["3"], "2": ["4"] } },
            "family": "dirichlet",
            "q": 2.0
        }"#;
        let spec: ShiftSpec = serde_json::from_str(json).unwrap();
        let loaded = spec.build().unwrap();
        assert!(matches!(
            loaded.seq_spec().unwrap(),
            MomentSequenceSpec::ClosedForm { .. }
        ));

        let json = r#"{
            "tree": { "depth": 1, "children": { "0": ["1", "2"] } },
            "weights": { "1": 1.0, "2": 1.0 }
        }"#;
        let spec: ShiftSpec = serde_json::from_str(json).unwrap();
        let loaded = spec.build().unwrap();
        let seq = loaded.seq_spec().unwrap();
        assert_eq!(seq.c(0).unwrap(), 2.0_f64.sqrt());
    }

    #[test]
    fn inconsistent_sequence_claim_is_rejected() {
        let json = r#"{
            "tree": { "depth": 2, "children": { "0": ["1"], "1": ["2"] } },
            "weights": { "1": 2.0, "2": 3.0 },
            "sequence": { "period": [1.0] }
        }"#;
        let spec: ShiftSpec = serde_json::from_str(json).unwrap();
        assert!(matches!(
            spec.build(),
            Err(SpecError::SpecParseError { .. })
        ));

        let json = r#"{
            "tree": { "depth": 2, "children": { "0": ["1"], "1": ["2"] } },
            "weights": { "1": 2.0, "2": 3.0 },
            "sequence": { "preperiod": [2.0, 3.0], "period": [1.0] }
        }"#;
        let spec: ShiftSpec = serde_json::from_str(json).unwrap();
        assert!(spec.build().is_ok());
    }

    #[test]
    fn sequence_specs_parse_all_three_shapes() {
        let cf: MomentSequenceSpec =
            serde_json::from_str(r#"{ "family": "bergman", "q": 1.5 }"#).unwrap();
        assert!(matches!(cf, MomentSequenceSpec::ClosedForm { .. }));
        let ep: MomentSequenceSpec =
            serde_json::from_str(r#"{ "period": [2.0, 0.5] }"#).unwrap();
        assert!(matches!(ep, MomentSequenceSpec::EventuallyPeriodic { .. }));
        let pf: MomentSequenceSpec =
            serde_json::from_str(r#"{ "prefix": [1.0, 1.1] }"#).unwrap();
        assert!(matches!(pf, MomentSequenceSpec::PrefixOnly { .. }));
    }
}
