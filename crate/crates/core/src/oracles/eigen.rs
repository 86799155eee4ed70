//! Finite-difference Neumann eigensolve on an interval.
//!
//! The first nonzero eigenvalue of −u″ on (0, a) with u′(0) = u′(a) = 0 is
//! found from the cell-centered difference matrix by Sturm-sequence bisection:
//! the inertia count of T − λI is monotone in λ, so the k-th eigenvalue is
//! bracketed exactly. The analytic value π²/a² is reproduced to O(1/n²) and
//! serves as a cross-check on the oracle itself, not as its source.

/// Number of eigenvalues of the cell-centered Neumann matrix below `lambda`.
///
/// The matrix has diagonal 2/δ² (1/δ² at the ends) and off-diagonal −1/δ².
fn count_below(n: usize, inv_d2: f64, lambda: f64) -> usize {
    let mut count = 0usize;
    let mut q = 0.0f64;
    for row in 0..n {
        let diag = if row == 0 || row == n - 1 { inv_d2 } else { 2.0 * inv_d2 };
        let off2 = if row == 0 { 0.0 } else { inv_d2 * inv_d2 };
        q = diag - lambda - if row == 0 { 0.0 } else { off2 / q };
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// First nonzero Neumann eigenvalue of −d²/dx² on an interval of length `a`,
/// discretized with `n` cells.
pub fn neumann_lambda1_interval(a: f64, n: usize) -> f64 {
    assert!(a > 0.0 && n >= 8, "need a positive interval and n >= 8");
    let delta = a / n as f64;
    let inv_d2 = 1.0 / (delta * delta);
    // all eigenvalues lie in [0, 4/δ²]; the smallest is 0 (constants)
    let mut lo = 0.0f64;
    let mut hi = 4.0 * inv_d2;
    for _ in 0..128 {
        let mid = 0.5 * (lo + hi);
        if count_below(n, inv_d2, mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
