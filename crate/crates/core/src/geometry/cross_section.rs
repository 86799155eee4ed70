//! The generator ω of the cylindrical container.
//!
//! A cross-section is a bounded domain in ℝ^{N-1}: an interval of length `a`
//! for N = 2, or an axis-aligned box for N = 3. It carries its measure and,
//! on demand, the first nonzero Neumann eigenvalue of −Δ on ω, which drives
//! the stability classification of flat cylinders.

use crate::error::{Error, Result};
use crate::oracles::eigen;

/// Default node count for the 1-D Neumann eigensolve behind [`CrossSection::lambda1`].
pub const DEFAULT_EIGEN_NODES: usize = 2048;

/// The transverse section ω spanning the container ω × ℝ.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossSection {
    /// Interval (0, a); the container is a 2-D strip of width `a`.
    Interval { a: f64 },
    /// Axis-aligned box (0, w0) × (0, w1); the container is a 3-D cylinder.
    Box { widths: [f64; 2] },
}

impl CrossSection {
    pub fn interval(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cross-section width must be positive, got {a}"
            )));
        }
        Ok(CrossSection::Interval { a })
    }

    pub fn rect_box(w0: f64, w1: f64) -> Result<Self> {
        if !(w0 > 0.0 && w1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box widths must be positive, got {w0} x {w1}"
            )));
        }
        Ok(CrossSection::Box { widths: [w0, w1] })
    }

    /// Spatial dimension N of the ambient cylinder ω × ℝ.
    pub fn ambient_dim(&self) -> usize {
        match self {
            CrossSection::Interval { .. } => 2,
            CrossSection::Box { .. } => 3,
        }
    }

    /// H^{N-1} measure of ω (length for an interval, area for a box).
    pub fn measure(&self) -> f64 {
        match self {
            CrossSection::Interval { a } => *a,
            CrossSection::Box { widths } => widths[0] * widths[1],
        }
    }

    /// First nonzero Neumann eigenvalue of −Δ on ω.
    ///
    /// Computed by a finite-difference eigensolve rather than by evaluating
    /// π²/a², so the value can be cross-checked against that identity. For a
    /// box the eigenvalue separates per axis and the minimum over widths wins.
    pub fn lambda1(&self) -> f64 {
        self.lambda1_with_nodes(DEFAULT_EIGEN_NODES)
    }

    /// Same as [`CrossSection::lambda1`] with an explicit discretization size.
    pub fn lambda1_with_nodes(&self, nodes: usize) -> f64 {
        match self {
            CrossSection::Interval { a } => eigen::neumann_lambda1_interval(*a, nodes),
            CrossSection::Box { widths } => widths
                .iter()
                .map(|&w| eigen::neumann_lambda1_interval(w, nodes))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_measure_and_dim() {
        let cs = CrossSection::interval(2.5).unwrap();
        assert_eq!(cs.measure(), 2.5);
        assert_eq!(cs.ambient_dim(), 2);
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(CrossSection::interval(0.0).is_err());
        assert!(CrossSection::interval(-1.0).is_err());
        assert!(CrossSection::rect_box(1.0, 0.0).is_err());
    }

    #[test]
    fn lambda1_times_a_squared_is_pi_squared() {
        for &a in &[0.5, 1.0, 2.0] {
            let cs = CrossSection::interval(a).unwrap();
            let lam = cs.lambda1();
            let rel = (lam * a * a - PI * PI).abs() / (PI * PI);
            assert!(rel < 1e-5, "a={a}: lambda1*a^2={} off pi^2", lam * a * a);
        }
    }

    #[test]
    fn box_lambda1_dominated_by_largest_width() {
        let cs = CrossSection::rect_box(1.0, 2.0).unwrap();
        let lam = cs.lambda1();
        let expected = PI * PI / 4.0;
        assert!((lam - expected).abs() / expected < 1e-5);
        assert_eq!(cs.measure(), 2.0);
        assert_eq!(cs.ambient_dim(), 3);
    }
}
