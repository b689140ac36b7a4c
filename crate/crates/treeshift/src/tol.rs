//! Numerical tolerances, pinned in one place.
//!
//! Every floating-point comparison in the crate routes through one of
//! these constants so that accuracy claims are auditable.  Relative
//! tolerances are applied as `|a - b| <= tol * max(1, |a|, |b|)` unless a
//! function documents otherwise.

/// Local norms `sqrt(sum of squared child weights)`: absolute error of the
/// accumulation versus a compensated reference.
pub const LOCAL_NORM_ABS: f64 = 1e-13;

/// Adjoint pairing `<S x, y> = <x, S* y>`, relative to `|x| |y|`.
pub const ADJOINT_PAIRING_REL: f64 = 1e-13;

/// Balance across a generation and moment-factorization identities,
/// relative comparison.
pub const BALANCE_REL: f64 = 1e-12;

/// Default tolerance for mutual-orthogonality sweeps over shifted
/// wandering vectors (an argument in the API; this is the default).
pub const ORTHOGONALITY_ABS: f64 = 1e-10;

/// Gram restriction: off-diagonal magnitude and diagonal-product error,
/// relative to `max(1, largest diagonal entry)`.
pub const GRAM_REL: f64 = 1e-12;

/// Reproducing-kernel evaluation: residual of the evaluated series
/// against an independently summed reference, and positivity grids.
pub const KERNEL_ABS: f64 = 1e-12;

/// Smallest eigenvalue allowed when asserting positive semidefiniteness.
pub const PSD_MIN_EIG: f64 = -1e-10;

/// Intertwining residual `|U G - G~ U|` for the constructed block unitary.
pub const INTERTWINE_ABS: f64 = 1e-11;

/// Moment-splitting residual for `<S^n x, S^m y>`, relative to `|x| |y|`.
pub const MZ_REL: f64 = 1e-11;

/// Generation norms below this floor mark the shift as numerically not
/// left-invertible.
pub const LEFT_INVERTIBLE_FLOOR: f64 = 1e-14;

/// Joint-spectrum oracle: relative tolerance when clustering moment-power
/// tuples across the two sides.
pub const ORACLE_TUPLE_REL: f64 = 1e-10;

/// Rank decisions (completeness of shifted wandering vectors): singular
/// values below this, relative to the largest, count as zero.
pub const RANK_REL: f64 = 1e-10;

/// Default series order for kernel evaluation and radius estimates.
pub const DEFAULT_SERIES_ORDER: usize = 64;

/// Convergence-radius guard band: `|z w|` must stay below the estimated
/// radius by this relative margin.
pub const RADIUS_MARGIN_REL: f64 = 1e-9;

/// Relative comparison helper used throughout: `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}

/// Relative gap `|a - b| / max(1, |a|, |b|)`.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0_f64.max(a.abs()).max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_close_uses_absolute_scale_near_zero() {
        assert!(rel_close(0.0, 5e-13, 1e-12));
        assert!(!rel_close(0.0, 5e-12, 1e-12));
    }

    #[test]
    fn rel_close_scales_with_magnitude() {
        assert!(rel_close(1e6, 1e6 + 0.5e-6, 1e-12));
        assert!(!rel_close(1e6, 1e6 + 5e-6, 1e-12));
    }
}
