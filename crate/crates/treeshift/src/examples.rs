//! Built-in example trees and shift specs.
//!
//! The isometric counterexample pair deserves a note: it is the standard
//! picture of two rooted trees that are both isometric shifts of Wold
//! multiplicity two yet have different generation cardinalities — the
//! root splitting into two rays immediately, versus after one stem edge.
//! The adjacency used here is a reconstruction of that picture from its
//! defining properties (cardinalities 1,2,2,... against 1,1,2,2,... and
//! equal adjoint-kernel dimension), since only those properties matter to
//! every check in this crate.

use std::collections::BTreeMap;

use crate::seqclass::{Family, MomentSequenceSpec};
use crate::specfile::{ShiftSpec, TreeSpec, WeightSpec};
use crate::tree::{RootedTree, TailRule};

/// Root splits into two infinite rays: cardinalities 1, 2, 2, 2, ...
pub fn two_rays_tree(depth: usize) -> RootedTree {
    assert!(depth >= 1, "need at least the first split");
    let mut counts = vec![vec![2usize]];
    for _ in 1..depth {
        counts.push(vec![1, 1]);
    }
    RootedTree::from_child_counts(&counts, Some(TailRule::AllRays))
        .expect("two-ray tree is valid")
}

/// One stem edge, then a split into two infinite rays:
/// cardinalities 1, 1, 2, 2, ...
pub fn stem_then_two_rays_tree(depth: usize) -> RootedTree {
    assert!(depth >= 2, "need the stem and the split");
    let mut counts = vec![vec![1usize], vec![2usize]];
    for _ in 2..depth {
        counts.push(vec![1, 1]);
    }
    RootedTree::from_child_counts(&counts, Some(TailRule::AllRays))
        .expect("stem tree is valid")
}

/// Cardinalities 1, 2, 4 via a (3, 1) split at depth one.
pub fn lopsided_tree_a() -> RootedTree {
    RootedTree::from_child_counts(&[vec![2], vec![3, 1]], Some(TailRule::AllRays))
        .expect("lopsided tree is valid")
}

/// Cardinalities 1, 2, 4 via a (2, 2) split at depth one.
pub fn lopsided_tree_b() -> RootedTree {
    RootedTree::from_child_counts(&[vec![2], vec![2, 2]], Some(TailRule::AllRays))
        .expect("lopsided tree is valid")
}

/// A named bundle of one or more shift spec files.
#[derive(Debug, Clone)]
pub struct ExampleEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// (file name, spec) pairs; `equiv` examples carry two files.
    pub files: Vec<(String, ShiftSpec)>,
}

fn family_spec(tree: &RootedTree, family: Family, q: f64) -> ShiftSpec {
    ShiftSpec {
        tree: TreeSpec::describe(tree),
        weights: WeightSpec::Family { family, q },
        sequence: None,
    }
}

pub fn catalog() -> Vec<ExampleEntry> {
    let binary = RootedTree::uniform(6, 2, Some(TailRule::SelfSimilar { period: 1 }))
        .expect("binary tree is valid");
    let ternary = RootedTree::uniform(5, 3, Some(TailRule::SelfSimilar { period: 1 }))
        .expect("ternary tree is valid");
    let path = RootedTree::path(4, Some(TailRule::AllRays));

    let mut explicit = BTreeMap::new();
    for (label, w) in [("1", 2.0), ("2", 1.0), ("3", 3.0), ("4", 1.0)] {
        explicit.insert(label.to_string(), w);
    }
    let explicit_path = ShiftSpec {
        tree: TreeSpec::describe(&path),
        weights: WeightSpec::Explicit { weights: explicit },
        sequence: Some(MomentSequenceSpec::EventuallyPeriodic {
            preperiod: vec![2.0, 1.0, 3.0],
            period: vec![1.0],
        }),
    };

    vec![
        ExampleEntry {
            name: "dirichlet-q2-binary",
            description: "Dirichlet-type weights (q = 2) on the binary tree, truncated at depth 6",
            files: vec![(
                "dirichlet-q2-binary.json".into(),
                family_spec(&binary, Family::Dirichlet, 2.0),
            )],
        },
        ExampleEntry {
            name: "bergman-q2-binary",
            description: "Bergman-type weights (q = 2) on the binary tree, truncated at depth 6",
            files: vec![(
                "bergman-q2-binary.json".into(),
                family_spec(&binary, Family::Bergman, 2.0),
            )],
        },
        ExampleEntry {
            name: "dirichlet-q3-ternary",
            description: "Dirichlet-type weights (q = 3) on the ternary tree, truncated at depth 5",
            files: vec![(
                "dirichlet-q3-ternary.json".into(),
                family_spec(&ternary, Family::Dirichlet, 3.0),
            )],
        },
        ExampleEntry {
            name: "isometric-pair",
            description: "two isometries (q = 1) with equal Wold multiplicity but different \
                          generation cardinalities; shows the invariants are not necessary \
                          outside the non-periodic class",
            files: vec![
                (
                    "isometric-two-rays.json".into(),
                    family_spec(&two_rays_tree(6), Family::Dirichlet, 1.0),
                ),
                (
                    "isometric-stem.json".into(),
                    family_spec(&stem_then_two_rays_tree(6), Family::Dirichlet, 1.0),
                ),
            ],
        },
        ExampleEntry {
            name: "lopsided-pair",
            description: "equivalent shifts on trees with equal cardinalities but different \
                          branching layout; exercises the block-unitary construction",
            files: vec![
                (
                    "lopsided-a.json".into(),
                    family_spec(&lopsided_tree_a(), Family::Dirichlet, 2.0),
                ),
                (
                    "lopsided-b.json".into(),
                    family_spec(&lopsided_tree_b(), Family::Dirichlet, 2.0),
                ),
            ],
        },
        ExampleEntry {
            name: "explicit-path",
            description: "explicit weights on a path with a claimed eventually periodic \
                          moment sequence",
            files: vec![("explicit-path.json".into(), explicit_path)],
        },
    ]
}

pub fn find(name: &str) -> Option<ExampleEntry> {
    catalog().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_entry_builds() {
        for entry in catalog() {
            for (file, spec) in &entry.files {
                let loaded = spec.build().unwrap_or_else(|e| {
                    panic!("example {}/{file} failed to build: {e}", entry.name)
                });
                loaded.seq_spec().expect("sequence spec is available");
            }
        }
    }

    #[test]
    fn catalog_names_are_unique_and_findable() {
        let cat = catalog();
        for entry in &cat {
            assert_eq!(find(entry.name).unwrap().files.len(), entry.files.len());
        }
        let mut names: Vec<_> = cat.iter().map(|e| e.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), cat.len());
    }

    #[test]
    fn counterexample_pair_has_the_advertised_cardinalities() {
        let a = two_rays_tree(4).generation_profile();
        let b = stem_then_two_rays_tree(4).generation_profile();
        assert_eq!(a.prefix(), &[1, 2, 2, 2, 2]);
        assert_eq!(b.prefix(), &[1, 1, 2, 2, 2]);
    }

    #[test]
    fn lopsided_pair_shares_cardinalities() {
        assert_eq!(
            lopsided_tree_a().generation_profile().prefix(),
            lopsided_tree_b().generation_profile().prefix()
        );
    }
}
