//! Shared generators for the integration suites: seeded random leafless
//! trees and balanced weight systems over them.

// Each suite links its own copy; not every suite uses every generator.
#![allow(dead_code)]

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use treeshift::shift::{ShiftOperator, WeightSystem};
use treeshift::tree::{RootedTree, TailRule, VertexId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-generation child counts for a random leafless tree.  Counts are
/// drawn from 1..=4 biased toward single children, the root always
/// branches (several checks need an asymmetric sibling pair near the
/// top), and generations are capped at 96 vertices to stay at desk scale.
pub fn random_counts(rng: &mut ChaCha8Rng, depth: usize) -> Vec<Vec<usize>> {
    let mut counts = Vec::with_capacity(depth);
    let mut card = 1usize;
    for n in 0..depth {
        let mut row = Vec::with_capacity(card);
        let mut next = 0usize;
        for i in 0..card {
            let k = if card >= 96 {
                1
            } else if n == 0 && i == 0 {
                rng.random_range(2..=4)
            } else {
                match rng.random_range(0..10_u32) {
                    0..=6 => 1,
                    7..=8 => 2,
                    _ => rng.random_range(3..=4),
                }
            };
            next += k;
            row.push(k);
        }
        counts.push(row);
        card = next;
    }
    counts
}

pub fn random_tree(rng: &mut ChaCha8Rng, min_depth: usize, max_depth: usize) -> Arc<RootedTree> {
    let depth = rng.random_range(min_depth..=max_depth);
    let counts = random_counts(rng, depth);
    Arc::new(
        RootedTree::from_child_counts(&counts, Some(TailRule::AllRays))
            .expect("generated tree is valid"),
    )
}

/// Balanced weights: one generation constant per level drawn from
/// [0.2, 3], split over siblings with asymmetric shares bounded away from
/// zero.  Returns the shift together with the generation constants.
pub fn random_balanced(rng: &mut ChaCha8Rng, tree: Arc<RootedTree>) -> (ShiftOperator, Vec<f64>) {
    let depth = tree.truncation_depth();
    let c: Vec<f64> = (0..depth).map(|_| rng.random_range(0.2..=3.0)).collect();
    let mut lambda = vec![0.0_f64; tree.vertex_count()];
    for i in 0..tree.vertex_count() {
        let v = VertexId(i);
        let kids = tree.children(v);
        if kids.is_empty() {
            continue;
        }
        let shares: Vec<f64> = kids.iter().map(|_| rng.random_range(0.2..=1.0)).collect();
        let total: f64 = shares.iter().sum();
        let cn = c[tree.vertex_depth(v)];
        for (u, s) in kids.iter().zip(&shares) {
            lambda[u.0] = cn * (s / total).sqrt();
        }
    }
    let ws = WeightSystem::from_fn(&tree, |v| Ok(lambda[v.0])).expect("weights are positive");
    let s = ShiftOperator::new(tree, ws).expect("weights cover the tree");
    (s, c)
}

/// Break balance: scale one grandchild weight by at least 5%.  The root
/// branches, so the root child above the scaled weight ends up with a
/// local norm different from its sibling's.
pub fn perturbed(rng: &mut ChaCha8Rng, s: &ShiftOperator) -> ShiftOperator {
    let tree = s.tree_arc();
    let root_kids = tree.children(VertexId(0));
    assert!(
        root_kids.len() >= 2 && tree.truncation_depth() >= 2,
        "perturbation needs a branching root and a grandchild"
    );
    let u = tree.children(root_kids[0])[0];
    let factor = 1.05 + rng.random_range(0.0..0.25);
    let ws = WeightSystem::from_fn(&tree, |v| {
        Ok(if v == u {
            s.weight(v) * factor
        } else {
            s.weight(v)
        })
    })
    .expect("weights are positive");
    ShiftOperator::new(tree, ws).expect("weights cover the tree")
}
