//! Truncated rooted directed trees with optional tail rules.
//!
//! A tree is stored to a finite truncation depth `D`.  Every vertex of
//! depth `< D` must have at least one child (truncation cuts an infinite
//! leafless tree, it does not create interior leaves).  Vertices are
//! re-indexed breadth-first at build time, so generation `n` is always a
//! contiguous id range — code downstream leans on that invariant.
//!
//! A [`TailRule`] describes how the tree continues past the truncation:
//! either every depth-`D` vertex continues as a single infinite ray, or
//! the generation cardinalities repeat self-similarly with a fixed period.
//! Queries that depend on the tail report [`Certification::Exact`] when a
//! rule is attached and `PrefixCertified` otherwise.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cert::Certified;
use crate::error::TreeError;

/// Index of a vertex after breadth-first re-indexing; the root is `VertexId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Continuation rule for the tree past its truncation depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Every vertex at the truncation depth continues as one infinite ray.
    AllRays,
    /// Generation cardinalities continue by `card(n) = card(n - period) * ratio`,
    /// with the ratio read off from the stored prefix.
    SelfSimilar { period: usize },
}

/// Number of branching vertices, if finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingIndex {
    Finite(usize),
    Infinite,
}

impl std::fmt::Display for BranchingIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BranchingIndex::Finite(k) => write!(f, "{k}"),
            BranchingIndex::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    depth: usize,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    vdepth: Vec<usize>,
    gen_offsets: Vec<usize>,
    labels: Vec<String>,
    label_index: BTreeMap<String, VertexId>,
    tail: Option<TailRule>,
}

pub const ROOT_LABEL: &str = "0";

impl RootedTree {
    /// Build from an adjacency map keyed by vertex label, `"0"` being the root.
    ///
    /// `depth` is the truncation depth and must equal the depth of every
    /// leaf.  Labels are arbitrary strings; vertices are re-indexed
    /// breadth-first (children in the listed order).
    pub fn from_adjacency(
        children_map: &BTreeMap<String, Vec<String>>,
        depth: usize,
        tail: Option<TailRule>,
    ) -> Result<RootedTree, TreeError> {
        if children_map.is_empty() && depth > 0 {
            return Err(TreeError::EmptySpec);
        }

        // Breadth-first walk from the root, assigning contiguous ids per
        // generation and validating the tree axioms as we go.
        let mut labels: Vec<String> = vec![ROOT_LABEL.to_string()];
        let mut label_index: BTreeMap<String, VertexId> = BTreeMap::new();
        label_index.insert(ROOT_LABEL.to_string(), VertexId(0));
        let mut parent: Vec<Option<VertexId>> = vec![None];
        let mut vdepth: Vec<usize> = vec![0];
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new()];
        let mut gen_offsets: Vec<usize> = vec![0, 1];

        let mut frontier: Vec<VertexId> = vec![VertexId(0)];
        for level in 0..depth {
            let mut next = Vec::new();
            for &v in &frontier {
                let v_label = labels[v.0].clone();
                let kids = children_map.get(&v_label).map(Vec::as_slice).unwrap_or(&[]);
                if kids.is_empty() {
                    return Err(TreeError::LeafBeforeTruncation {
                        vertex: v_label,
                        depth: level,
                        truncation: depth,
                    });
                }
                for kid in kids {
                    if let Some(&existing) = label_index.get(kid) {
                        // A label seen before is either an ancestor (a cycle
                        // through it) or a vertex with two parents.
                        let mut anc = Some(v);
                        let mut on_path = false;
                        while let Some(a) = anc {
                            if a == existing {
                                on_path = true;
                                break;
                            }
                            anc = parent[a.0];
                        }
                        if on_path {
                            return Err(TreeError::CycleDetected { vertex: kid.clone() });
                        }
                        let first = parent[existing.0]
                            .map(|p| labels[p.0].clone())
                            .unwrap_or_else(|| "(root has no parent)".to_string());
                        return Err(TreeError::MultipleParents {
                            vertex: kid.clone(),
                            first,
                            second: v_label.clone(),
                        });
                    }
                    let id = VertexId(labels.len());
                    label_index.insert(kid.clone(), id);
                    labels.push(kid.clone());
                    parent.push(Some(v));
                    vdepth.push(level + 1);
                    children.push(Vec::new());
                    children[v.0].push(id);
                    next.push(id);
                }
            }
            gen_offsets.push(labels.len());
            frontier = next;
        }

        // Leaves sit exactly at the truncation depth, so no vertex at that
        // depth may list children, and every adjacency key must have been
        // reached from the root.
        for &v in &frontier {
            if children_map
                .get(&labels[v.0])
                .is_some_and(|kids| !kids.is_empty())
            {
                return Err(TreeError::DepthOutOfRange {
                    requested: depth + 1,
                    truncation: depth,
                });
            }
        }
        for key in children_map.keys() {
            if !label_index.contains_key(key) && !children_map[key].is_empty() {
                return Err(TreeError::UnreachableVertex { vertex: key.clone() });
            }
        }

        let tree = RootedTree {
            depth,
            parent,
            children,
            vdepth,
            gen_offsets,
            labels,
            label_index,
            tail,
        };
        tree.validate_tail()?;
        Ok(tree)
    }

    /// Build from per-generation child counts: `counts[n][i]` is the number
    /// of children of the `i`-th vertex of generation `n` (breadth-first
    /// order).  The truncation depth is `counts.len()`.
    pub fn from_child_counts(
        counts: &[Vec<usize>],
        tail: Option<TailRule>,
    ) -> Result<RootedTree, TreeError> {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut gen: Vec<usize> = vec![0];
        let mut next_id = 1usize;
        for (level, row) in counts.iter().enumerate() {
            if row.len() != gen.len() {
                return Err(TreeError::InvalidTailSpec {
                    reason: format!(
                        "child-count row {level} has {} entries for {} vertices",
                        row.len(),
                        gen.len()
                    ),
                });
            }
            let mut next = Vec::new();
            for (&v, &k) in gen.iter().zip(row) {
                let kids: Vec<String> = (0..k)
                    .map(|_| {
                        let id = next_id.to_string();
                        next_id += 1;
                        id
                    })
                    .collect();
                next.extend(kids.iter().map(|s| s.parse::<usize>().unwrap()));
                map.insert(v.to_string(), kids);
            }
            gen = next;
        }
        RootedTree::from_adjacency(&map, counts.len(), tail)
    }

    /// A path (single ray) truncated at `depth`.
    pub fn path(depth: usize, tail: Option<TailRule>) -> RootedTree {
        RootedTree::from_child_counts(&vec![vec![1]; depth], tail)
            .expect("a path is always a valid tree")
    }

    /// The uniform `b`-ary tree truncated at `depth`.
    pub fn uniform(depth: usize, b: usize, tail: Option<TailRule>) -> Result<RootedTree, TreeError> {
        let mut counts = Vec::with_capacity(depth);
        let mut width = 1usize;
        for _ in 0..depth {
            counts.push(vec![b; width]);
            width *= b;
        }
        RootedTree::from_child_counts(&counts, tail)
    }

    fn validate_tail(&self) -> Result<(), TreeError> {
        match self.tail {
            None | Some(TailRule::AllRays) => Ok(()),
            Some(TailRule::SelfSimilar { period }) => {
                if period == 0 {
                    return Err(TreeError::InvalidTailSpec {
                        reason: "self-similar period must be at least 1".to_string(),
                    });
                }
                if period > self.depth {
                    return Err(TreeError::InvalidTailSpec {
                        reason: format!(
                            "self-similar period {period} exceeds truncation depth {}",
                            self.depth
                        ),
                    });
                }
                let cards = self.prefix_cards();
                let (last, base) = (cards[self.depth], cards[self.depth - period]);
                if last % base != 0 {
                    return Err(TreeError::InvalidTailSpec {
                        reason: format!(
                            "cardinality {last} at the truncation is not an integer multiple of {base} one period earlier"
                        ),
                    });
                }
                let ratio = last / base;
                for n in (self.depth - period + 1)..=self.depth {
                    if cards[n] != cards[n - period].saturating_mul(ratio) {
                        return Err(TreeError::InvalidTailSpec {
                            reason: format!(
                                "cardinalities {} and {} at depths {} and {} do not share the ratio {ratio}",
                                cards[n],
                                cards[n - period],
                                n,
                                n - period
                            ),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn truncation_depth(&self) -> usize {
        self.depth
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn tail(&self) -> Option<TailRule> {
        self.tail
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.0]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.0]
    }

    pub fn vertex_depth(&self, v: VertexId) -> usize {
        self.vdepth[v.0]
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.vdepth[v.0] == self.depth
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn resolve_label(&self, label: &str) -> Result<VertexId, TreeError> {
        self.label_index
            .get(label)
            .copied()
            .ok_or_else(|| TreeError::UnknownVertex {
                vertex: label.to_string(),
            })
    }

    /// Vertex ids of generation `n` as a contiguous range (the breadth-first
    /// re-indexing invariant).
    pub fn generation(&self, n: usize) -> Result<std::ops::Range<usize>, TreeError> {
        if n > self.depth {
            return Err(TreeError::DepthOutOfRange {
                requested: n,
                truncation: self.depth,
            });
        }
        Ok(self.gen_offsets[n]..self.gen_offsets[n + 1])
    }

    pub fn gen_vertices(&self, n: usize) -> impl ExactSizeIterator<Item = VertexId> {
        let range = self
            .generation(n)
            .unwrap_or(self.gen_offsets[self.depth + 1]..self.gen_offsets[self.depth + 1]);
        range.map(VertexId)
    }

    /// Cardinalities of generations `0..=D` (prefix only, no tail applied).
    pub fn prefix_cards(&self) -> Vec<u64> {
        (0..=self.depth)
            .map(|n| (self.gen_offsets[n + 1] - self.gen_offsets[n]) as u64)
            .collect()
    }

    /// Vertices with at least two children; their depths are `<= D - 1`.
    pub fn branching_vertices(&self) -> Vec<VertexId> {
        (0..self.vertex_count())
            .map(VertexId)
            .filter(|&v| self.children(v).len() >= 2)
            .collect()
    }

    /// Number of vertices with two or more children, taking the tail rule
    /// into account: a self-similar tail with growing cardinalities keeps
    /// branching forever.
    pub fn branching_index(&self) -> Certified<BranchingIndex> {
        let finite = BranchingIndex::Finite(self.branching_vertices().len());
        match self.tail {
            None => Certified::prefix(finite, self.depth),
            Some(TailRule::AllRays) => Certified::exact(finite),
            Some(TailRule::SelfSimilar { period }) => {
                let cards = self.prefix_cards();
                let ratio = cards[self.depth] / cards[self.depth - period];
                if ratio > 1 {
                    Certified::exact(BranchingIndex::Infinite)
                } else {
                    Certified::exact(finite)
                }
            }
        }
    }

    /// Generation cardinalities as a queryable sequence (prefix plus tail
    /// recurrence when a rule is attached).
    pub fn generation_profile(&self) -> GenerationProfile {
        let prefix = self.prefix_cards();
        let tail = self.tail.map(|rule| match rule {
            TailRule::AllRays => ProfileTail { period: 1, ratio: 1 },
            TailRule::SelfSimilar { period } => ProfileTail {
                period,
                ratio: prefix[self.depth] / prefix[self.depth - period],
            },
        });
        GenerationProfile { prefix, tail }
    }
}

/// The sequence `n -> Card(G_n)`: explicit up to the truncation depth,
/// extended by `card(n) = card(n - period) * ratio` when a tail is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationProfile {
    prefix: Vec<u64>,
    tail: Option<ProfileTail>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileTail {
    pub period: usize,
    pub ratio: u64,
}

/// First index at which two cardinality sequences differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardMismatch {
    pub index: usize,
    pub left: BigUint,
    pub right: BigUint,
}

impl GenerationProfile {
    pub fn new(prefix: Vec<u64>, tail: Option<ProfileTail>) -> Result<Self, TreeError> {
        if prefix.is_empty() {
            return Err(TreeError::EmptySpec);
        }
        if let Some(t) = tail {
            if t.period == 0 || t.period > prefix.len() - 1 || t.ratio == 0 {
                return Err(TreeError::InvalidTailSpec {
                    reason: "profile tail needs 1 <= period <= depth and ratio >= 1".to_string(),
                });
            }
        }
        Ok(GenerationProfile { prefix, tail })
    }

    pub fn truncation_depth(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn tail(&self) -> Option<ProfileTail> {
        self.tail
    }

    /// `Card(G_n)`, or `None` when `n` is past the prefix and no tail rule
    /// is attached.
    pub fn card(&self, n: usize) -> Option<BigUint> {
        let d = self.truncation_depth();
        if n <= d {
            return Some(BigUint::from(self.prefix[n]));
        }
        let tail = self.tail?;
        // Pull n back into the prefix window (d - period, d] by whole periods.
        let steps = (n - d).div_ceil(tail.period);
        let base = self.prefix[n - steps * tail.period];
        Some(BigUint::from(base) * BigUint::from(tail.ratio).pow(steps as u32))
    }

    /// Decide whether two cardinality sequences agree for every `n`.
    ///
    /// With tail rules on both sides this is exact: agreement on a window
    /// of one common period past both prefixes, together with equal
    /// per-window growth factors, propagates to all `n`.  Without a tail
    /// the verdict is certified only up to the shorter prefix.
    pub fn compare(a: &GenerationProfile, b: &GenerationProfile) -> Certified<Option<CardMismatch>> {
        let first_mismatch_upto = |upto: usize| -> Option<CardMismatch> {
            (0..=upto).find_map(|n| {
                let (l, r) = (a.card(n).unwrap(), b.card(n).unwrap());
                (l != r).then_some(CardMismatch {
                    index: n,
                    left: l,
                    right: r,
                })
            })
        };

        match (a.tail, b.tail) {
            (Some(ta), Some(tb)) => {
                let lcm = num_integer::lcm(ta.period, tb.period);
                let horizon = a.truncation_depth().max(b.truncation_depth()) + lcm;
                if let Some(m) = first_mismatch_upto(horizon) {
                    return Certified::exact(Some(m));
                }
                let growth_a = BigUint::from(ta.ratio).pow((lcm / ta.period) as u32);
                let growth_b = BigUint::from(tb.ratio).pow((lcm / tb.period) as u32);
                if growth_a == growth_b {
                    return Certified::exact(None);
                }
                // Same values through the window but different growth per
                // window: the first divergence sits within the next window.
                let m = first_mismatch_upto(horizon + lcm)
                    .expect("unequal growth factors must split within one more window");
                Certified::exact(Some(m))
            }
            _ => {
                let known_a = if a.tail.is_some() { usize::MAX } else { a.truncation_depth() };
                let known_b = if b.tail.is_some() { usize::MAX } else { b.truncation_depth() };
                let upto = known_a.min(known_b);
                match first_mismatch_upto(upto) {
                    // A mismatch between explicitly stored cardinalities is
                    // conclusive no matter what the tails do.
                    Some(m) => Certified::exact(Some(m)),
                    None => Certified::prefix(None, upto),
                }
            }
        }
    }
}
