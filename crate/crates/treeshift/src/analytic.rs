//! Analytic model of a balanced shift: reproducing kernel, Cauchy dual,
//! and the radius of bounded point evaluations.
//!
//! A balanced shift is a weighted composition of one scalar weighted
//! shift per wandering block: block `k` contributes the diagonal series
//! `f_k(z, w) = sum_n (z conj(w))^n / D_n(k)` with
//! `D_n(k) = prod_{j<n} c_{k+j}^2`.  The full kernel is the direct sum of
//! `f_k` times the projection onto block `k`; everything numeric here
//! works with the per-block scalars.
//!
//! The Cauchy dual `S' = S (S*S)^{-1}` swaps the weight `lambda_u` for
//! `lambda_u / |S e_{parent(u)}|^2`; on balanced shifts it inverts the
//! moment sequence.  Powers of the dual grow like
//! `sup_m prod_{j<n} 1/c_{m+j}`, whose Gelfand limit gives the radius of
//! bounded point evaluations as its reciprocal.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::cert::{Certification, Certified};
use crate::error::AnalyticError;
use crate::seqclass::MomentSequenceSpec;
use crate::shift::{L2Vector, ShiftOperator, WeightSystem};
use crate::tol;
use crate::tree::RootedTree;
use crate::wandering::WanderingDecomposition;

/// One diagonal component of the model space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBlock {
    /// Generation index of the wandering block.
    pub block: usize,
    /// Root label for block 0, otherwise the branching vertex's label.
    pub anchor: String,
    pub dim: usize,
}

/// Block structure plus a moment sequence: everything the kernel needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub seq: MomentSequenceSpec,
    pub blocks: Vec<ModelBlock>,
}

fn blocks_of_tree(tree: &RootedTree) -> Vec<ModelBlock> {
    let mut blocks = vec![ModelBlock {
        block: 0,
        anchor: tree.label(crate::tree::VertexId(0)).to_string(),
        dim: 1,
    }];
    for v in tree.branching_vertices() {
        blocks.push(ModelBlock {
            block: tree.vertex_depth(v) + 1,
            anchor: tree.label(v).to_string(),
            dim: tree.children(v).len() - 1,
        });
    }
    blocks
}

impl ModelSpace {
    /// Model of a concrete balanced operator, with the moment sequence
    /// measured off the truncation (prefix only).
    pub fn from_operator(s: &ShiftOperator) -> Result<ModelSpace, crate::error::ShiftError> {
        let table = s.moment_table()?;
        Ok(ModelSpace {
            seq: MomentSequenceSpec::PrefixOnly {
                prefix: table.values().to_vec(),
            },
            blocks: blocks_of_tree(s.tree()),
        })
    }

    /// Model from a sequence spec attached to a tree's block structure.
    pub fn from_spec(
        seq: MomentSequenceSpec,
        tree: &RootedTree,
    ) -> Result<ModelSpace, crate::error::SeqError> {
        seq.validate()?;
        Ok(ModelSpace {
            seq,
            blocks: blocks_of_tree(tree),
        })
    }

    /// Radius of the model disc: the limiting geometric mean of `c`.
    /// Exactly 1 for the closed forms (both tend to 1), the period's
    /// geometric mean for eventually periodic sequences, and a
    /// prefix-certified estimate for measured prefixes.  The kernel
    /// series in `z * conj(w)` converges up to the square of this value.
    pub fn radius(&self) -> Certified<f64> {
        series_radius(&self.seq)
    }

    /// Evaluate the per-block kernel scalars at `(z, w)`, summing the
    /// series to `order` and bounding the dropped tail by a geometric
    /// estimate.  Both arguments must stay inside the model disc; the
    /// series variable is `z * conj(w)`, whose modulus is then below the
    /// squared radius where the series converges.
    pub fn kernel_eval(
        &self,
        z: Complex64,
        w: Complex64,
        order: usize,
    ) -> Result<KernelValue, AnalyticError> {
        let radius = self.radius();
        let modulus = z.norm().max(w.norm());
        if modulus >= radius.value * (1.0 - tol::RADIUS_MARGIN_REL) {
            return Err(AnalyticError::RadiusExceeded {
                modulus,
                radius: radius.value,
            });
        }
        let t = z * w.conj();
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut tail_bound = 0.0_f64;
        for b in &self.blocks {
            let (value, tail) = block_series(&self.seq, b.block, t, order)?;
            tail_bound = tail_bound.max(tail);
            blocks.push(BlockScalar {
                block: b.block,
                anchor: b.anchor.clone(),
                dim: b.dim,
                value,
            });
        }
        Ok(KernelValue {
            order,
            z,
            w,
            blocks,
            tail_bound,
        })
    }
}

/// Scalar value of one block's kernel component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScalar {
    pub block: usize,
    pub anchor: String,
    pub dim: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub order: usize,
    pub z: Complex64,
    pub w: Complex64,
    pub blocks: Vec<BlockScalar>,
    pub tail_bound: f64,
}

/// Radius of the model disc: the limiting geometric mean of the moment
/// quotients.  Point evaluation is bounded exactly for `|z|` below this
/// value (the series in `z * conj(w)` has radius equal to its square).
fn series_radius(seq: &MomentSequenceSpec) -> Certified<f64> {
    match seq {
        MomentSequenceSpec::ClosedForm { .. } => Certified::exact(1.0),
        MomentSequenceSpec::EventuallyPeriodic { period, .. } => {
            let gm = period
                .iter()
                .product::<f64>()
                .abs()
                .powf(1.0 / period.len() as f64);
            Certified::exact(gm)
        }
        MomentSequenceSpec::PrefixOnly { prefix } => {
            let gm = prefix
                .iter()
                .product::<f64>()
                .abs()
                .powf(1.0 / prefix.len() as f64);
            Certified::prefix(gm, prefix.len().saturating_sub(1))
        }
    }
}

/// Sum `sum_{n<=order} t^n / prod_{j<n} c_{block+j}^2` and estimate the
/// dropped tail by the next term over a geometric ratio bound.
fn block_series(
    seq: &MomentSequenceSpec,
    block: usize,
    t: Complex64,
    order: usize,
) -> Result<(Complex64, f64), AnalyticError> {
    let c_at = |idx: usize| -> Result<f64, AnalyticError> {
        seq.c(idx).map_err(|_| AnalyticError::IndexOutOfRange {
            order,
            index: idx,
        })
    };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for n in 0..=order {
        sum += term;
        if n < order {
            let c = c_at(block + n)?;
            term = term * t / (c * c);
        }
    }
    // One more ratio for the tail estimate; fall back to the last known
    // moment if the sequence is a prefix that just ran out.
    let next_c = seq
        .c(block + order)
        .or_else(|_| seq.c(block + order.saturating_sub(1)))
        .unwrap_or(1.0);
    let rho = t.norm() / (next_c * next_c);
    let tail = if rho < 1.0 {
        term.norm() * rho / (1.0 - rho)
    } else {
        f64::INFINITY
    };
    Ok((sum, tail))
}

/// Smallest eigenvalue over all blocks of the kernel matrices
/// `[f_k(z_i, z_j)]_{ij}` on a grid of points — positive semidefiniteness
/// is the reproducing-property smoke test.
pub fn kernel_psd_min_eig(
    model: &ModelSpace,
    points: &[Complex64],
    order: usize,
) -> Result<f64, AnalyticError> {
    let m = points.len();
    let radius = series_radius(&model.seq).value;
    for p in points {
        if p.norm() >= radius {
            return Err(AnalyticError::RadiusExceeded {
                modulus: p.norm(),
                radius,
            });
        }
    }
    let mut min_eig = f64::INFINITY;
    for b in &model.blocks {
        let mut mat = nalgebra::DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let t = points[i] * points[j].conj();
                let (value, _) = block_series(&model.seq, b.block, t, order)?;
                mat[(i, j)] = value;
            }
        }
        // Hermitian by construction; symmetrize against rounding and read
        // the spectrum off the self-adjoint eigendecomposition.
        let sym = (mat.clone() + mat.adjoint()) * Complex64::new(0.5, 0.0);
        for ev in sym.symmetric_eigen().eigenvalues.iter() {
            min_eig = min_eig.min(*ev);
        }
    }
    Ok(min_eig)
}

/// Moment-splitting residual: for `x, y` in the adjoint kernel,
/// `<S^n x, S^m y> = delta_{nm} sum_k D_n(k) <x_k, y_k>`.  Randomized
/// check over seeded trials; the residual is relative to `|x| |y|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MzReport {
    pub window: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn mz_gram_check(
    s: &ShiftOperator,
    decomp: &WanderingDecomposition,
    window: usize,
    trials: usize,
    seed: u64,
) -> Result<MzReport, AnalyticError> {
    let table = s
        .moment_table()
        .map_err(|e| AnalyticError::NotBalanced {
            witness: e.to_string(),
        })?;
    let d = s.tree().truncation_depth();
    let feasible: Vec<usize> = (0..decomp.block_count())
        .filter(|&k| k + window <= d && !decomp.block(k).is_empty())
        .collect();
    if feasible.is_empty() || window < 1 {
        return Err(AnalyticError::TruncationOverflow {
            window,
            truncation: d,
        });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut max_residual = 0.0_f64;
    for _ in 0..trials {
        // Random real coefficients over the feasible block bases.
        let mut draw = |k: usize| -> (L2Vector, Vec<f64>) {
            let mut v = L2Vector::zeros(decomp.ambient_dim());
            let coeffs: Vec<f64> = decomp
                .block(k)
                .iter()
                .map(|b| {
                    let c: f64 = rng.random_range(-1.0..1.0);
                    v.axpy(Complex64::new(c, 0.0), b);
                    c
                })
                .collect();
            (v, coeffs)
        };
        type BlockDraw = (L2Vector, Vec<f64>);
        let per_block: Vec<(usize, BlockDraw, BlockDraw)> = feasible
            .iter()
            .map(|&k| (k, draw(k), draw(k)))
            .collect();

        let mut x = L2Vector::zeros(decomp.ambient_dim());
        let mut y = L2Vector::zeros(decomp.ambient_dim());
        for (_, (xk, _), (yk, _)) in &per_block {
            x.axpy(Complex64::new(1.0, 0.0), xk);
            y.axpy(Complex64::new(1.0, 0.0), yk);
        }
        let scale = x.norm() * y.norm();

        for n in 0..=window {
            for m in 0..=window {
                let lhs = s.apply_power(&x, n).inner(&s.apply_power(&y, m));
                let rhs = if n == m {
                    let mut acc = 0.0;
                    for (k, (_, xc), (_, yc)) in &per_block {
                        let p = table.moment_product(*k, n).expect("feasible block");
                        let dot: f64 = xc.iter().zip(yc).map(|(a, b)| a * b).sum();
                        acc += p * p * dot;
                    }
                    Complex64::new(acc, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let residual = (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE);
                max_residual = max_residual.max(residual);
            }
        }
    }
    Ok(MzReport {
        window,
        trials,
        max_residual,
        tolerance: tol::MZ_REL,
        pass: max_residual <= tol::MZ_REL,
    })
}

/// The Cauchy dual `S' = S (S*S)^{-1}`: weight `lambda_u` becomes
/// `lambda_u / |S e_{parent(u)}|^2`.  Fails when some local norm sits at
/// the numerical zero floor (not left-invertible).
pub fn cauchy_dual(s: &ShiftOperator) -> Result<ShiftOperator, AnalyticError> {
    let tree = s.tree();
    for n in 0..tree.truncation_depth() {
        for i in tree.generation(n).expect("inside truncation") {
            let v = crate::tree::VertexId(i);
            if s.local_norm(v) <= tol::LEFT_INVERTIBLE_FLOOR {
                return Err(AnalyticError::NotLeftInvertible {
                    index: n,
                    value: s.local_norm(v),
                });
            }
        }
    }
    let weights = WeightSystem::from_fn(tree, |v| {
        let p = tree.parent(v).ok_or(())?;
        let ln = s.local_norm(p);
        Ok(s.weight(v) / (ln * ln))
    })
    .expect("dual weights inherit positivity");
    Ok(ShiftOperator::new(s.tree_arc(), weights).expect("same tree"))
}

/// Growth data of the Cauchy dual's powers and the radius of bounded
/// point evaluations (reciprocal of the Gelfand limit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpeReport {
    /// `sup_m prod_{j<n} 1/c_{m+j}` for `n = 1..=order`.
    pub dual_norms: Vec<f64>,
    /// `dual_norms[n-1]^(1/n)`.
    pub gelfand: Vec<f64>,
    pub radius: Certified<f64>,
}

/// `sup_m prod_{j<n} 1/c_{m+j}` over all offsets `m`, exact for closed
/// forms (monotone: the supremum is `max(value at m = 0, limit 1)`) and
/// eventually periodic sequences (finitely many windows), prefix-bounded
/// otherwise.
fn dual_power_norm(seq: &MomentSequenceSpec, n: usize) -> Result<Certified<f64>, AnalyticError> {
    let window_product = |m: usize| -> Result<f64, AnalyticError> {
        let mut p = 1.0;
        for j in 0..n {
            let c = seq.c(m + j).map_err(AnalyticError::Seq)?;
            p *= 1.0 / c;
        }
        Ok(p)
    };
    match seq {
        MomentSequenceSpec::ClosedForm { .. } => {
            // Both families tend to 1, so the tail contributes exactly 1;
            // monotonicity puts the supremum at m = 0 or in the limit.
            Ok(Certified::exact(window_product(0)?.max(1.0)))
        }
        MomentSequenceSpec::EventuallyPeriodic { preperiod, period } => {
            let horizon = preperiod.len() + period.len();
            let mut sup = 0.0_f64;
            for m in 0..horizon {
                sup = sup.max(window_product(m)?);
            }
            Ok(Certified::exact(sup))
        }
        MomentSequenceSpec::PrefixOnly { prefix } => {
            if prefix.len() < n {
                return Err(AnalyticError::IndexOutOfRange {
                    order: n,
                    index: prefix.len(),
                });
            }
            let mut sup = 0.0_f64;
            for m in 0..=(prefix.len() - n) {
                sup = sup.max(window_product(m)?);
            }
            Ok(Certified::prefix(sup, prefix.len().saturating_sub(1)))
        }
    }
}

pub fn bpe_radius(seq: &MomentSequenceSpec, order: usize) -> Result<BpeReport, AnalyticError> {
    seq.validate().map_err(AnalyticError::Seq)?;
    let order = order.max(1);
    let capped = match seq.known_len() {
        Some(len) => order.min(len),
        None => order,
    };
    let mut dual_norms = Vec::with_capacity(capped);
    let mut gelfand = Vec::with_capacity(capped);
    let mut cert = Certification::Exact;
    for n in 1..=capped {
        let v = dual_power_norm(seq, n)?;
        cert = cert.meet(v.cert);
        dual_norms.push(v.value);
        gelfand.push(v.value.powf(1.0 / n as f64));
    }
    // Gelfand limit of the dual powers.  The closed forms tend to 1, so
    // their limit is exactly 1; an eventually periodic sequence averages
    // its period geometrically; prefixes report the last sample.
    let spectral = match seq {
        MomentSequenceSpec::ClosedForm { .. } => Certified::exact(1.0),
        MomentSequenceSpec::EventuallyPeriodic { period, .. } => {
            let gm_inv = period
                .iter()
                .map(|c| 1.0 / c)
                .product::<f64>()
                .powf(1.0 / period.len() as f64);
            Certified::exact(gm_inv)
        }
        MomentSequenceSpec::PrefixOnly { prefix } => Certified::prefix(
            *gelfand.last().expect("order >= 1"),
            prefix.len().saturating_sub(1),
        ),
    };
    Ok(BpeReport {
        dual_norms,
        gelfand,
        radius: Certified {
            value: 1.0 / spectral.value,
            cert: cert.meet(spectral.cert),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TailRule;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn binary(depth: usize) -> Arc<RootedTree> {
        Arc::new(RootedTree::uniform(depth, 2, Some(TailRule::SelfSimilar { period: 1 })).unwrap())
    }

    #[test]
    fn telescoping_products_of_the_dirichlet_form() {
        // prod_{j<n} c_j^2 = n + 1 for q = 2, brute-forced.
        let d2 = MomentSequenceSpec::dirichlet(2.0);
        let mut prod = 1.0;
        for n in 0..=64usize {
            assert!(
                tol::rel_close(prod, (n + 1) as f64, 1e-12),
                "n = {n}: {prod}"
            );
            let c = d2.c(n).unwrap();
            prod *= c * c;
        }
    }

    #[test]
    fn root_block_series_matches_the_logarithm() {
        // sum (1/4)^n / (n+1) = 4 ln(4/3).
        let model = ModelSpace::from_spec(
            MomentSequenceSpec::dirichlet(2.0),
            &RootedTree::path(2, Some(TailRule::AllRays)),
        )
        .unwrap();
        let z = Complex64::new(0.5, 0.0);
        let value = model.kernel_eval(z, z, 96).unwrap();
        let expect = 4.0 * (4.0_f64 / 3.0).ln();
        assert_relative_eq!(value.blocks[0].value.re, expect, max_relative = 1e-12);
        assert!(value.tail_bound < 1e-12);
    }

    #[test]
    fn kernel_is_hermitian_bitwise() {
        let tree = RootedTree::uniform(3, 2, Some(TailRule::SelfSimilar { period: 1 })).unwrap();
        let model = ModelSpace::from_spec(MomentSequenceSpec::dirichlet(3.0), &tree).unwrap();
        let z = Complex64::new(0.31, -0.4);
        let w = Complex64::new(-0.2, 0.55);
        let zw = model.kernel_eval(z, w, 48).unwrap();
        let wz = model.kernel_eval(w, z, 48).unwrap();
        for (a, b) in zw.blocks.iter().zip(&wz.blocks) {
            assert_eq!(a.value, b.value.conj(), "block {}", a.block);
        }
    }

    #[test]
    fn kernel_matrices_are_positive_semidefinite() {
        let tree = RootedTree::uniform(3, 3, Some(TailRule::SelfSimilar { period: 1 })).unwrap();
        let model = ModelSpace::from_spec(MomentSequenceSpec::bergman(2.0), &tree).unwrap();
        let points: Vec<Complex64> = vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.1),
            Complex64::new(0.0, -0.45),
            Complex64::new(0.25, 0.25),
            Complex64::new(-0.1, -0.1),
        ];
        let min_eig = kernel_psd_min_eig(&model, &points, 64).unwrap();
        assert!(min_eig >= tol::PSD_MIN_EIG, "min eigenvalue {min_eig}");
    }

    #[test]
    fn evaluation_outside_the_radius_is_refused() {
        let model = ModelSpace::from_spec(
            MomentSequenceSpec::dirichlet(2.0),
            &RootedTree::path(2, Some(TailRule::AllRays)),
        )
        .unwrap();
        let z = Complex64::new(1.01, 0.0);
        assert!(matches!(
            model.kernel_eval(z, z, 32),
            Err(AnalyticError::RadiusExceeded { .. })
        ));
    }

    #[test]
    fn moment_splitting_holds_on_random_kernel_vectors() {
        let s = ShiftOperator::dirichlet(binary(6), 2.0).unwrap();
        let decomp = WanderingDecomposition::kernel_basis(&s);
        let report = mz_gram_check(&s, &decomp, 3, 20, 42).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
    }

    #[test]
    fn cauchy_dual_swaps_the_families() {
        let tree = binary(5);
        let s = ShiftOperator::dirichlet(Arc::clone(&tree), 2.0).unwrap();
        let dual = cauchy_dual(&s).unwrap();
        let bergman = ShiftOperator::bergman(Arc::clone(&tree), 2.0).unwrap();
        for i in 1..tree.vertex_count() {
            let v = crate::tree::VertexId(i);
            assert_relative_eq!(dual.weight(v), bergman.weight(v), max_relative = 1e-14);
        }
        // Double dual returns to the original.
        let back = cauchy_dual(&dual).unwrap();
        for i in 1..tree.vertex_count() {
            let v = crate::tree::VertexId(i);
            assert_relative_eq!(back.weight(v), s.weight(v), max_relative = 1e-14);
        }
    }

    #[test]
    fn isometry_has_unit_bpe_radius_exactly() {
        let report = bpe_radius(&MomentSequenceSpec::dirichlet(1.0), 64).unwrap();
        assert_eq!(report.radius.value, 1.0);
        assert!(report.radius.cert.is_exact());
        assert!(report.dual_norms.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn bergman_dual_norms_grow_like_sqrt_n() {
        // Dual of the Bergman form is the Dirichlet form: the supremum
        // sits at offset zero and telescopes to sqrt(n + 1) for q = 2.
        let report = bpe_radius(&MomentSequenceSpec::bergman(2.0), 64).unwrap();
        for (i, &v) in report.dual_norms.iter().enumerate() {
            let n = i + 1;
            assert!(
                tol::rel_close(v, ((n + 1) as f64).sqrt(), 1e-12),
                "n = {n}: {v}"
            );
        }
        // Gelfand values decrease towards 1 and are within 5% by order 64.
        let g = &report.gelfand;
        assert!(g.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!((g[63] - 1.0).abs() <= 0.05, "g(64) = {}", g[63]);
        assert_eq!(report.radius.value, 1.0);
    }

    #[test]
    fn oscillating_period_has_the_advertised_dual_norms() {
        let seq = MomentSequenceSpec::EventuallyPeriodic {
            preperiod: vec![],
            period: vec![2.0, 0.5],
        };
        let report = bpe_radius(&seq, 3).unwrap();
        assert_relative_eq!(report.dual_norms[0], 2.0);
        assert_relative_eq!(report.dual_norms[1], 1.0);
        assert_relative_eq!(report.dual_norms[2], 2.0);
        assert_relative_eq!(report.gelfand[2], 2.0_f64.powf(1.0 / 3.0));
        assert_relative_eq!(report.radius.value, 1.0);
    }

    #[test]
    fn degenerate_weights_are_not_left_invertible() {
        let tree = binary(3);
        let w = WeightSystem::from_fn(&tree, |v| Ok(if v.0 == 1 { 1e-15 } else { 1.0 }));
        // A weight at the floor still builds, but the dual refuses.
        let s = ShiftOperator::new(Arc::clone(&tree), w.unwrap()).unwrap();
        // Vertex 1's sibling keeps the local norm of the root healthy, so
        // shrink both children of the root.
        let w = WeightSystem::from_fn(&tree, |v| {
            Ok(if v.0 == 1 || v.0 == 2 { 1e-15 } else { 1.0 })
        })
        .unwrap();
        let s2 = ShiftOperator::new(Arc::clone(&tree), w).unwrap();
        assert!(cauchy_dual(&s).is_ok());
        assert!(matches!(
            cauchy_dual(&s2),
            Err(AnalyticError::NotLeftInvertible { index: 0, .. })
        ));
    }
}
