//! Wandering subspace of the adjoint kernel.
//!
//! For a weighted shift on a rooted tree, the kernel of the adjoint
//! decomposes by generation: the root vector spans block `0`, and every
//! branching vertex `v` (two or more children) contributes the orthogonal
//! complement of its child-weight vector inside the span of its children —
//! a block of dimension `#children(v) - 1` sitting in generation
//! `depth(v) + 1`.  Summing, block `n >= 1` has dimension
//! `Card(G_n) - Card(G_{n-1})`.
//!
//! Shifting these blocks sweeps out the whole space; for balanced shifts
//! the images `S^m E` are mutually orthogonal across powers and the
//! restriction of `S*^n S^n` to the kernel is diagonal with the moment
//! products on the diagonal.  Both facts are checked numerically here, and
//! their failure on unbalanced weights is witnessed explicitly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::WanderingError;
use crate::shift::{kahan_sum, L2Vector, MomentTable, ShiftOperator};
use crate::tol;
use crate::tree::VertexId;

/// Where a kernel basis vector comes from: block index, the anchoring
/// vertex (root for block 0, otherwise the branching vertex), and the
/// column within that anchor's complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLabel {
    pub block: usize,
    pub anchor: VertexId,
    pub column: usize,
}

/// Orthonormal basis of the adjoint kernel, graded by generation.
#[derive(Debug, Clone)]
pub struct WanderingDecomposition {
    ambient: usize,
    blocks: Vec<Vec<L2Vector>>,
    labels: Vec<Vec<BasisLabel>>,
}

/// Orthonormal basis of the hyperplane orthogonal to `weights` in `R^k`,
/// via the Householder reflector sending the normalized weight vector to
/// `-e_0`: columns `1..k` of the reflector are an exact complement basis.
/// Deterministic and numerically stable because the weights are positive.
pub fn complement_basis(weights: &[f64]) -> Result<Vec<Vec<f64>>, WanderingError> {
    let k = weights.len();
    if k == 0 {
        return Err(WanderingError::EmptyChildList { vertex: 0 });
    }
    let norm = kahan_sum(weights.iter().map(|w| w * w)).sqrt();
    let a: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    // u = a + e_0; with a_0 > 0 there is no cancellation.
    let mut u = a.clone();
    u[0] += 1.0;
    let usq = kahan_sum(u.iter().map(|x| x * x));
    Ok((1..k)
        .map(|j| {
            let scale = 2.0 * u[j] / usq;
            let mut col: Vec<f64> = u.iter().map(|ui| -scale * ui).collect();
            col[j] += 1.0;
            col
        })
        .collect())
}

impl WanderingDecomposition {
    /// Kernel basis of the adjoint: the root vector plus one complement
    /// block per branching vertex, graded by generation.
    pub fn kernel_basis(s: &ShiftOperator) -> WanderingDecomposition {
        let tree = s.tree();
        let d = tree.truncation_depth();
        let ambient = tree.vertex_count();
        let mut blocks: Vec<Vec<L2Vector>> = vec![Vec::new(); d + 1];
        let mut labels: Vec<Vec<BasisLabel>> = vec![Vec::new(); d + 1];

        blocks[0].push(L2Vector::basis(ambient, VertexId(0)));
        labels[0].push(BasisLabel {
            block: 0,
            anchor: VertexId(0),
            column: 0,
        });

        for i in 0..ambient {
            let v = VertexId(i);
            let kids = tree.children(v);
            if kids.len() < 2 {
                continue;
            }
            let weights: Vec<f64> = kids.iter().map(|&u| s.weight(u)).collect();
            let block = tree.vertex_depth(v) + 1;
            let cols = complement_basis(&weights)
                .expect("branching vertex has at least two children");
            for (c, col) in cols.into_iter().enumerate() {
                let mut vec = L2Vector::zeros(ambient);
                for (&u, &x) in kids.iter().zip(&col) {
                    vec.coeffs[u.0] = num_complex::Complex64::new(x, 0.0);
                }
                blocks[block].push(vec);
                labels[block].push(BasisLabel {
                    block,
                    anchor: v,
                    column: c,
                });
            }
        }

        WanderingDecomposition {
            ambient,
            blocks,
            labels,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, n: usize) -> &[L2Vector] {
        &self.blocks[n]
    }

    pub fn label(&self, n: usize, i: usize) -> BasisLabel {
        self.labels[n][i]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Largest `|S* b|` over the basis — how far the construction is from
    /// the exact adjoint kernel.
    pub fn adjoint_kernel_residual(&self, s: &ShiftOperator) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|b| s.apply_adjoint(b).norm())
            .fold(0.0, f64::max)
    }
}

/// Worst inner product seen in the mutual-orthogonality sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityWitness {
    pub power_left: usize,
    pub power_right: usize,
    pub left: BasisLabel,
    pub right: BasisLabel,
    pub inner: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub max_abs: f64,
    pub pairs_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<OrthogonalityWitness>,
}

/// Sweep `<S^m x, S^n y>` over basis vectors `x` of block `j`, `y` of
/// block `k`, and distinct powers `m, n <= window` that stay inside the
/// truncation.  Images of different generations (`j + m != k + n`) are
/// orthogonal by disjoint support, so only aligned pairs are evaluated.
pub fn check_mutual_orthogonality(
    s: &ShiftOperator,
    decomp: &WanderingDecomposition,
    window: usize,
    tolerance: f64,
) -> Result<OrthogonalityReport, WanderingError> {
    let d = s.tree().truncation_depth();

    // S^m applied to every feasible basis vector, indexed [m][block].
    let mut powered: Vec<Vec<Vec<L2Vector>>> = Vec::with_capacity(window + 1);
    powered.push(decomp.blocks.clone());
    for m in 1..=window {
        let prev = &powered[m - 1];
        let mut level: Vec<Vec<L2Vector>> = Vec::with_capacity(prev.len());
        for (j, block) in prev.iter().enumerate() {
            if j + m > d {
                level.push(Vec::new());
                continue;
            }
            level.push(block.iter().map(|b| s.apply(b)).collect());
        }
        powered.push(level);
    }

    let mut max_abs = 0.0_f64;
    let mut witness = None;
    let mut pairs = 0usize;
    for m in 0..=window {
        for n in 0..m {
            // Aligned generations: j + m = k + n, i.e. k = j + (m - n).
            for j in 0..decomp.block_count() {
                let k = j + (m - n);
                if j + m > d || k >= decomp.block_count() {
                    continue;
                }
                for (xi, x) in powered[m][j].iter().enumerate() {
                    for (yi, y) in powered[n][k].iter().enumerate() {
                        let val = x.inner(y).norm();
                        pairs += 1;
                        if val > max_abs {
                            max_abs = val;
                            witness = Some(OrthogonalityWitness {
                                power_left: m,
                                power_right: n,
                                left: decomp.label(j, xi),
                                right: decomp.label(k, yi),
                                inner: val,
                            });
                        }
                    }
                }
            }
        }
    }

    // No aligned pairs at all is an error only when the window overshoots
    // the truncation; a branchless tree has nothing to compare and passes
    // vacuously (visible as pairs_checked = 0).
    if pairs == 0 && window > d {
        return Err(WanderingError::TruncationOverflow {
            window,
            truncation: d,
        });
    }
    let pass = max_abs <= tolerance;
    Ok(OrthogonalityReport {
        max_abs,
        pairs_checked: pairs,
        tolerance,
        pass,
        witness: if pass { None } else { witness },
    })
}

/// Gram matrix of `S^n` restricted to the kernel blocks that survive `n`
/// more shifts, with bookkeeping for which blocks were included.
#[derive(Debug, Clone)]
pub struct GramRestriction {
    pub order: usize,
    pub blocks_included: Vec<usize>,
    pub labels: Vec<BasisLabel>,
    pub matrix: DMatrix<f64>,
}

pub fn gram_restriction(
    s: &ShiftOperator,
    decomp: &WanderingDecomposition,
    order: usize,
) -> Result<GramRestriction, WanderingError> {
    let d = s.tree().truncation_depth();
    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    let mut blocks_included = Vec::new();
    for (k, block) in decomp.blocks.iter().enumerate() {
        if k + order > d || block.is_empty() {
            continue;
        }
        blocks_included.push(k);
        for (i, b) in block.iter().enumerate() {
            labels.push(decomp.label(k, i));
            vectors.push(s.apply_power(b, order));
        }
    }
    if vectors.is_empty() {
        return Err(WanderingError::TruncationOverflow {
            window: order,
            truncation: d,
        });
    }
    let dim = vectors.len();
    let matrix = DMatrix::from_fn(dim, dim, |i, j| vectors[j].inner(&vectors[i]).re);
    Ok(GramRestriction {
        order,
        blocks_included,
        labels,
        matrix,
    })
}

impl GramRestriction {
    /// Largest off-diagonal magnitude, relative to `max(1, largest diagonal)`.
    pub fn max_offdiag_rel(&self) -> f64 {
        let n = self.matrix.nrows();
        let scale = (0..n)
            .map(|i| self.matrix[(i, i)])
            .fold(1.0_f64, f64::max);
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].abs());
                }
            }
        }
        worst / scale
    }

    /// Largest relative error of the diagonal against the moment products
    /// `(prod_{j<order} c_{block+j})^2` predicted by the table.
    pub fn max_diag_rel_error(&self, table: &MomentTable) -> Option<f64> {
        let mut worst = 0.0_f64;
        for (i, label) in self.labels.iter().enumerate() {
            let p = table.moment_product(label.block, self.order)?;
            worst = worst.max(tol::rel_gap(self.matrix[(i, i)], p * p));
        }
        Some(worst)
    }

    /// Smallest eigenvalue (symmetrized before decomposition).
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        sym.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x))
    }
}

/// Rank check per generation: the vectors `S^(m-k) b`, over blocks
/// `k <= m`, must span the whole generation-`m` coordinate space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub upto: usize,
    pub ranks: Vec<(usize, usize, usize)>,
    pub pass: bool,
}

pub fn completeness_check(
    s: &ShiftOperator,
    decomp: &WanderingDecomposition,
    upto: usize,
) -> Result<CompletenessReport, WanderingError> {
    let tree = s.tree();
    let d = tree.truncation_depth();
    if upto > d {
        return Err(WanderingError::TruncationOverflow {
            window: upto,
            truncation: d,
        });
    }
    let mut ranks = Vec::new();
    let mut pass = true;
    for m in 0..=upto {
        let gen = tree.generation(m).expect("m <= truncation");
        let card = gen.len();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for k in 0..=m {
            for b in decomp.block(k) {
                let shifted = s.apply_power(b, m - k);
                cols.push(gen.clone().map(|i| shifted.coeffs[i].re).collect());
            }
        }
        let mat = DMatrix::from_fn(card, cols.len(), |r, c| cols[c][r]);
        let svd = mat.svd(false, false);
        let top = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&x| x > tol::RANK_REL * top.max(1.0))
            .count();
        pass &= rank == card;
        ranks.push((m, rank, card));
    }
    Ok(CompletenessReport { upto, ranks, pass })
}
