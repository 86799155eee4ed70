//! Uniform cell grid on the truncated container.
//!
//! The infinite cylinder ω × ℝ is truncated to ω × (−L, L) (full mode) or to
//! the half-cylinder ω × (0, L). Cells are squares of side `h` and all set
//! and field operations are cell-centered. In full mode the axial count is
//! even so the symmetry plane x_N = 0 is a cell face.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::CrossSection;

/// Axial truncation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// ω × (−L, L), symmetric about x_N = 0.
    Full,
    /// ω × (0, L) with a zero-flux symmetry plane at x_N = 0.
    Half,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Half => "half",
        }
    }
}

/// Cell grid on the truncated container.
///
/// `a` and `L` are snapped to whole cells of side `h = 1/resolution`, so the
/// grid volume is exactly `cell count · h^N` and axis-aligned shapes have
/// exact cell-count measures.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderGrid {
    cross_section: CrossSection,
    /// Cell side length (equal along every axis).
    h: f64,
    /// Transverse cell count.
    nx: usize,
    /// Axial cell count (even in full mode).
    nz: usize,
    /// Axial half-length; the axial extent is (−L, L) or (0, L).
    length: f64,
    mode: Mode,
}

/// Build a grid over the truncated container.
///
/// `resolution` is in cells per unit length; it must give at least 8 cells
/// across every axis. In full mode the axial count is rounded up to even.
pub fn build_grid(
    cross_section: CrossSection,
    length: f64,
    resolution: usize,
    mode: Mode,
) -> Result<Arc<CylinderGrid>> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "axial half-length must be positive, got {length}"
        )));
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let a = match cross_section {
        CrossSection::Interval { a } => a,
        CrossSection::Box { .. } => {
            return Err(Error::Unsupported(
                "box cross-sections are grid-level unsupported; only N = 2 grids are built".into(),
            ))
        }
    };
    let h = 1.0 / resolution as f64;
    let nx = (a * resolution as f64).round() as usize;
    let mut nz = match mode {
        Mode::Full => (2.0 * length * resolution as f64).round() as usize,
        Mode::Half => (length * resolution as f64).round() as usize,
    };
    if mode == Mode::Full && nz % 2 == 1 {
        nz += 1;
    }
    if nx < 8 || nz < 8 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} gives {nx} x {nz} cells; need at least 8 per axis"
        )));
    }
    let snapped_a = nx as f64 * h;
    let snapped_len = match mode {
        Mode::Full => nz as f64 * h / 2.0,
        Mode::Half => nz as f64 * h,
    };
    Ok(Arc::new(CylinderGrid {
        cross_section: CrossSection::Interval { a: snapped_a },
        h,
        nx,
        nz,
        length: snapped_len,
        mode,
    }))
}

/// Build a grid directly from cell counts, without [`build_grid`]'s minimum
/// resolution requirement. Used for the tiny instances of the enumeration
/// oracle, where every cell is solved exhaustively anyway.
pub fn grid_with_cells(spacing: f64, nx: usize, nz: usize, mode: Mode) -> Result<Arc<CylinderGrid>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cell size must be positive, got {spacing}"
        )));
    }
    let min_nz = match mode {
        Mode::Full => 4,
        Mode::Half => 2,
    };
    if nx < 1 || nz < min_nz || (mode == Mode::Full && nz % 2 == 1) {
        return Err(Error::InvalidParameter(format!(
            "cell counts {nx} x {nz} invalid for {} mode",
            mode.as_str()
        )));
    }
    let length = match mode {
        Mode::Full => nz as f64 * spacing / 2.0,
        Mode::Half => nz as f64 * spacing,
    };
    Ok(Arc::new(CylinderGrid {
        cross_section: CrossSection::Interval { a: nx as f64 * spacing },
        h: spacing,
        nx,
        nz,
        length,
        mode,
    }))
}

impl CylinderGrid {
    pub fn cross_section(&self) -> &CrossSection {
        &self.cross_section
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_full(&self) -> bool {
        self.mode == Mode::Full
    }

    /// Axial half-length L of the truncation.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.nz
    }

    /// Cell volume h^N (an area in 2-D).
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h
    }

    /// Total grid volume, exactly cell count times cell volume.
    pub fn volume(&self) -> f64 {
        self.cell_count() as f64 * self.cell_volume()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.nz);
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    /// Transverse coordinate of the center of cell column `i`.
    pub fn x1_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    /// Axial coordinate of the center of cell row `j`.
    pub fn axial_center(&self, j: usize) -> f64 {
        match self.mode {
            Mode::Full => -self.length + (j as f64 + 0.5) * self.h,
            Mode::Half => (j as f64 + 0.5) * self.h,
        }
    }

    /// Signed axial cell index: cell `k` covers (k·h, (k+1)·h).
    ///
    /// Zero is the first cell above the symmetry plane. In half mode the
    /// signed index equals the row index.
    pub fn signed_axial(&self, j: usize) -> i64 {
        match self.mode {
            Mode::Full => j as i64 - (self.nz / 2) as i64,
            Mode::Half => j as i64,
        }
    }

    /// Row index of signed axial cell `k`, if it lies in the grid.
    pub fn row_of_signed(&self, k: i64) -> Option<usize> {
        let j = match self.mode {
            Mode::Full => k + (self.nz / 2) as i64,
            Mode::Half => k,
        };
        (0..self.nz as i64).contains(&j).then_some(j as usize)
    }

    /// Rows whose cells may belong to a mask: one clearance layer is kept
    /// empty below each cap so truncation artifacts are never silent.
    pub fn admissible_rows(&self) -> std::ops::Range<usize> {
        match self.mode {
            Mode::Full => 1..self.nz - 1,
            Mode::Half => 0..self.nz - 1,
        }
    }

    /// Whether row `j` touches a cap x_N = ±L.
    pub fn touches_cap(&self, j: usize) -> bool {
        match self.mode {
            Mode::Full => j == 0 || j == self.nz - 1,
            Mode::Half => j == self.nz - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(a: f64) -> CrossSection {
        CrossSection::interval(a).unwrap()
    }

    #[test]
    fn full_grid_dimensions() {
        let g = build_grid(interval(1.0), 2.0, 64, Mode::Full).unwrap();
        assert_eq!(g.nx(), 64);
        assert_eq!(g.nz(), 256);
        assert_eq!(g.spacing(), 1.0 / 64.0);
        assert_eq!(g.volume(), 1.0 * 4.0);
    }

    #[test]
    fn half_grid_dimensions() {
        let g = build_grid(interval(1.0), 2.0, 64, Mode::Half).unwrap();
        assert_eq!(g.nz(), 128);
        assert_eq!(g.volume(), 1.0 * 2.0);
        assert_eq!(g.axial_center(0), 0.5 / 64.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(build_grid(interval(1.0), 0.0, 64, Mode::Full).is_err());
        assert!(build_grid(interval(1.0), 2.0, 0, Mode::Full).is_err());
        assert!(build_grid(interval(1.0), 2.0, 3, Mode::Full).is_err());
    }

    #[test]
    fn axial_count_rounded_to_even() {
        let g = build_grid(interval(1.0), 1.05, 10, Mode::Full).unwrap();
        assert_eq!(g.nz() % 2, 0);
        assert!((g.length() - g.nz() as f64 * g.spacing() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn signed_axial_roundtrip() {
        let g = build_grid(interval(1.0), 1.0, 16, Mode::Full).unwrap();
        for j in 0..g.nz() {
            let k = g.signed_axial(j);
            assert_eq!(g.row_of_signed(k), Some(j));
        }
        assert_eq!(g.signed_axial(g.nz() / 2), 0);
    }
}
