//! Weighted shift operators on `l^2` of a truncated tree.
//!
//! Given one positive weight per non-root vertex, the shift acts on
//! coordinates by `(S x)(u) = weight(u) * x(parent(u))` and its adjoint by
//! `(S* x)(v) = sum over children u of weight(u) * x(u)`.  At the
//! truncation depth the children are missing, so `S` annihilates the top
//! generation; callers that need `S^n e_v` must keep `depth(v) + n` inside
//! the truncation and get an error otherwise.
//!
//! The central property here is *balance*: the local norm
//! `|S e_v| = sqrt(sum of squared child weights)` is constant along each
//! generation.  For balanced shifts the norms `|S^n e_v|` telescope into
//! products of per-generation constants `c_k`, collected in a
//! [`MomentTable`].

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ShiftError;
use crate::tol;
use crate::tree::{RootedTree, VertexId};

/// Compensated (Kahan) summation; keeps generation-wide sums reproducible
/// and accurate well below the crate tolerances.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// A vector in `l^2` of the truncated tree, indexed by `VertexId`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Vector {
    pub coeffs: Vec<Complex64>,
}

impl L2Vector {
    pub fn zeros(len: usize) -> L2Vector {
        L2Vector {
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn basis(len: usize, v: VertexId) -> L2Vector {
        let mut x = L2Vector::zeros(len);
        x.coeffs[v.0] = Complex64::new(1.0, 0.0);
        x
    }

    pub fn from_real(coeffs: Vec<f64>) -> L2Vector {
        L2Vector {
            coeffs: coeffs.into_iter().map(|c| Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Inner product, linear in `self` and conjugate-linear in `other`.
    pub fn inner(&self, other: &L2Vector) -> Complex64 {
        let re = kahan_sum(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.re * b.re + a.im * b.im),
        );
        let im = kahan_sum(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.im * b.re - a.re * b.im),
        );
        Complex64::new(re, im)
    }

    pub fn norm_sq(&self) -> f64 {
        kahan_sum(self.coeffs.iter().map(|a| a.norm_sqr()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &L2Vector) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }
}

/// One positive weight per non-root vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    lambda: Vec<f64>,
}

impl WeightSystem {
    /// Weights keyed by vertex label; every non-root vertex needs one.
    pub fn from_labeled(
        tree: &RootedTree,
        by_label: &BTreeMap<String, f64>,
    ) -> Result<WeightSystem, ShiftError> {
        for label in by_label.keys() {
            let known = tree.resolve_label(label).is_ok_and(|v| v.0 != 0);
            if !known {
                return Err(ShiftError::ExtraneousWeight {
                    vertex: label.clone(),
                });
            }
        }
        let mut lambda = vec![0.0; tree.vertex_count()];
        for (i, slot) in lambda.iter_mut().enumerate().skip(1) {
            let w = *by_label
                .get(tree.label(VertexId(i)))
                .ok_or(ShiftError::MissingWeight { vertex: i })?;
            if !(w.is_finite() && w > 0.0) {
                return Err(ShiftError::NonPositiveWeight {
                    vertex: i,
                    value: w,
                });
            }
            *slot = w;
        }
        Ok(WeightSystem { lambda })
    }

    /// Weights from a function of the vertex; `Err(())` marks a missing weight.
    pub fn from_fn(
        tree: &RootedTree,
        mut f: impl FnMut(VertexId) -> Result<f64, ()>,
    ) -> Result<WeightSystem, ShiftError> {
        let mut lambda = vec![0.0; tree.vertex_count()];
        for (i, slot) in lambda.iter_mut().enumerate().skip(1) {
            let w = f(VertexId(i)).unwrap_or(f64::NAN);
            if !(w.is_finite() && w > 0.0) {
                return Err(ShiftError::NonPositiveWeight {
                    vertex: i,
                    value: w,
                });
            }
            *slot = w;
        }
        Ok(WeightSystem { lambda })
    }

    pub fn weight(&self, v: VertexId) -> f64 {
        self.lambda[v.0]
    }
}

/// First failure of the balance property: two vertices of one generation
/// whose outgoing local norms disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceWitness {
    pub generation: usize,
    pub u: VertexId,
    pub v: VertexId,
    pub norm_u: f64,
    pub norm_v: f64,
    pub rel_gap: f64,
}

/// First pair of siblings whose shifted power norms disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBalanceWitness {
    pub left: VertexId,
    pub right: VertexId,
    pub order: usize,
    pub norm_left: f64,
    pub norm_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BalanceOutcome {
    Balanced(MomentTable),
    Unbalanced(BalanceWitness),
}

impl BalanceOutcome {
    pub fn is_balanced(&self) -> bool {
        matches!(self, BalanceOutcome::Balanced(_))
    }
}

/// Per-generation norms `c_n = |S e_v|` (any `v` of generation `n`) of a
/// balanced shift, for `n` up to `truncation - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    c: Vec<f64>,
}

impl MomentTable {
    pub fn new(c: Vec<f64>) -> MomentTable {
        MomentTable { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn c(&self, n: usize) -> Option<f64> {
        self.c.get(n).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    /// `prod_{j < order} c_{depth + j}`, i.e. the predicted `|S^order e_v|`
    /// for `v` of the given depth; `None` when the table is too short.
    pub fn moment_product(&self, depth: usize, order: usize) -> Option<f64> {
        if depth + order > self.c.len() {
            return None;
        }
        Some(self.c[depth..depth + order].iter().product())
    }
}

/// A weighted shift bound to its tree.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    tree: Arc<RootedTree>,
    weights: WeightSystem,
    local: Vec<f64>,
}

impl ShiftOperator {
    pub fn new(tree: Arc<RootedTree>, weights: WeightSystem) -> Result<ShiftOperator, ShiftError> {
        if weights.lambda.len() != tree.vertex_count() {
            return Err(ShiftError::MissingWeight {
                vertex: weights.lambda.len(),
            });
        }
        let local = (0..tree.vertex_count())
            .map(|i| {
                let v = VertexId(i);
                kahan_sum(
                    tree.children(v)
                        .iter()
                        .map(|&u| weights.weight(u) * weights.weight(u)),
                )
                .sqrt()
            })
            .collect();
        Ok(ShiftOperator {
            tree,
            weights,
            local,
        })
    }

    /// Dirichlet-type family: generation norms `c_n = sqrt((n + q) / (n + 1))`,
    /// split evenly over siblings.  Needs `q >= 1`; `q = 1` is the isometric
    /// member.
    pub fn dirichlet(tree: Arc<RootedTree>, q: f64) -> Result<ShiftOperator, ShiftError> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(ShiftError::QTooSmall { q });
        }
        let norms: Vec<f64> = (0..tree.truncation_depth())
            .map(|n| ((n as f64 + q) / (n as f64 + 1.0)).sqrt())
            .collect();
        ShiftOperator::balanced_with_norms(tree, &norms)
    }

    /// Bergman-type family: generation norms `c_n = sqrt((n + 1) / (n + q))`,
    /// split evenly over siblings.  Needs `q >= 1`; `q = 1` is isometric.
    pub fn bergman(tree: Arc<RootedTree>, q: f64) -> Result<ShiftOperator, ShiftError> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(ShiftError::QTooSmall { q });
        }
        let norms: Vec<f64> = (0..tree.truncation_depth())
            .map(|n| ((n as f64 + 1.0) / (n as f64 + q)).sqrt())
            .collect();
        ShiftOperator::balanced_with_norms(tree, &norms)
    }

    /// Balanced shift with prescribed generation norms: vertex `u` below `v`
    /// gets `norms[depth(v)] / sqrt(#children(v))`, making the local norm at
    /// `v` exactly `norms[depth(v)]`.
    pub fn balanced_with_norms(
        tree: Arc<RootedTree>,
        norms: &[f64],
    ) -> Result<ShiftOperator, ShiftError> {
        if norms.len() < tree.truncation_depth() {
            return Err(ShiftError::IndexOutOfRange {
                order: norms.len(),
                depth: 0,
                truncation: tree.truncation_depth(),
            });
        }
        let weights = WeightSystem::from_fn(&tree, |v| {
            let p = tree.parent(v).ok_or(())?;
            let k = tree.children(p).len() as f64;
            Ok(norms[tree.vertex_depth(p)] / k.sqrt())
        })?;
        ShiftOperator::new(tree, weights)
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn tree_arc(&self) -> Arc<RootedTree> {
        Arc::clone(&self.tree)
    }

    pub fn weight(&self, v: VertexId) -> f64 {
        self.weights.weight(v)
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.tree.vertex_count()
    }

    /// `|S e_v|` for the truncated operator (zero at the top generation).
    pub fn local_norm(&self, v: VertexId) -> f64 {
        self.local[v.0]
    }

    pub fn apply(&self, x: &L2Vector) -> L2Vector {
        let mut y = L2Vector::zeros(self.dim());
        for i in 1..self.dim() {
            let v = VertexId(i);
            let p = self.tree.parent(v).expect("non-root has a parent");
            y.coeffs[i] = self.weights.weight(v) * x.coeffs[p.0];
        }
        y
    }

    pub fn apply_adjoint(&self, x: &L2Vector) -> L2Vector {
        let mut y = L2Vector::zeros(self.dim());
        for i in 0..self.dim() {
            let v = VertexId(i);
            let mut re = 0.0;
            let mut im = 0.0;
            for &u in self.tree.children(v) {
                let w = self.weights.weight(u);
                re += w * x.coeffs[u.0].re;
                im += w * x.coeffs[u.0].im;
            }
            y.coeffs[i] = Complex64::new(re, im);
        }
        y
    }

    pub fn apply_power(&self, x: &L2Vector, n: usize) -> L2Vector {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply(&y);
        }
        y
    }

    /// `|S^n e_v|`, summing squared path products over all descendants at
    /// distance `n`.  Errors when the power would fall off the truncation.
    pub fn moment(&self, v: VertexId, n: usize) -> Result<f64, ShiftError> {
        let d = self.tree.vertex_depth(v);
        if d + n > self.tree.truncation_depth() {
            return Err(ShiftError::IndexOutOfRange {
                order: n,
                depth: d,
                truncation: self.tree.truncation_depth(),
            });
        }
        let mut frontier: Vec<(VertexId, f64)> = vec![(v, 1.0)];
        for _ in 0..n {
            let mut next = Vec::new();
            for &(u, w) in &frontier {
                for &child in self.tree.children(u) {
                    next.push((child, w * self.weights.weight(child)));
                }
            }
            frontier = next;
        }
        Ok(kahan_sum(frontier.iter().map(|&(_, w)| w * w)).sqrt())
    }

    /// Check that local norms are constant along every generation
    /// `0..truncation-1`; on success return the table of constants
    /// (read off the first vertex of each generation).
    pub fn balance(&self, rel_tol: f64) -> BalanceOutcome {
        let mut c = Vec::with_capacity(self.tree.truncation_depth());
        for n in 0..self.tree.truncation_depth() {
            let range = self.tree.generation(n).expect("n < truncation");
            let first = VertexId(range.start);
            let reference = self.local[first.0];
            for i in range.clone() {
                let norm = self.local[i];
                if !tol::rel_close(reference, norm, rel_tol) {
                    return BalanceOutcome::Unbalanced(BalanceWitness {
                        generation: n,
                        u: first,
                        v: VertexId(i),
                        norm_u: reference,
                        norm_v: norm,
                        rel_gap: tol::rel_gap(reference, norm),
                    });
                }
            }
            c.push(reference);
        }
        BalanceOutcome::Balanced(MomentTable::new(c))
    }

    /// Moment table of a balanced shift; error with the witness otherwise.
    pub fn moment_table(&self) -> Result<MomentTable, ShiftError> {
        match self.balance(tol::BALANCE_REL) {
            BalanceOutcome::Balanced(t) => Ok(t),
            BalanceOutcome::Unbalanced(w) => Err(ShiftError::NotBalanced {
                witness: format!(
                    "generation {} has local norms {} (vertex {}) and {} (vertex {})",
                    w.generation, w.norm_u, w.u, w.norm_v, w.v
                ),
            }),
        }
    }

    /// Siblings must have identical `|S^n e|` for every feasible power.
    /// Returns the first violation, if any.
    pub fn local_power_balance_witness(
        &self,
        rel_tol: f64,
    ) -> Result<Option<PowerBalanceWitness>, ShiftError> {
        let d_max = self.tree.truncation_depth();
        for i in 0..self.dim() {
            let v = VertexId(i);
            let kids = self.tree.children(v);
            for pair in kids.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let feasible = d_max - self.tree.vertex_depth(a);
                for n in 1..=feasible {
                    let (ma, mb) = (self.moment(a, n)?, self.moment(b, n)?);
                    if !tol::rel_close(ma, mb, rel_tol) {
                        return Ok(Some(PowerBalanceWitness {
                            left: a,
                            right: b,
                            order: n,
                            norm_left: ma,
                            norm_right: mb,
                        }));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Largest local norm over the truncated prefix; an operator-norm
    /// certificate for the truncation (the tail can only be bounded when a
    /// moment-sequence spec pins it down).
    pub fn norm_bound(&self) -> f64 {
        self.local
            .iter()
            .take(self.tree.generation(self.tree.truncation_depth()).map(|r| r.start).unwrap_or(0))
            .fold(0.0_f64, |m, &x| m.max(x))
    }

    /// All local norms equal to one (within `tol`), i.e. the truncated
    /// operator is isometric below the top generation.
    pub fn isometry_witness(&self, abs_tol: f64) -> Option<(VertexId, f64)> {
        for n in 0..self.tree.truncation_depth() {
            for i in self.tree.generation(n).expect("n < truncation") {
                if (self.local[i] - 1.0).abs() > abs_tol {
                    return Some((VertexId(i), self.local[i]));
                }
            }
        }
        None
    }
}
