//! Facet classification of a mask boundary.
//!
//! Boundary facets split into the free boundary Γ (faces between an inside
//! and an outside cell, interior to the container) and the lateral part Γ₁
//! (faces of inside cells lying on the container wall; in half mode this
//! includes the symmetry plane x_N = 0). Staircase measures are exact facet
//! counts times the facet area.

use crate::geometry::{DomainMask, Mode, WallSide};

/// Face direction of a facet relative to its inside cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    XLow,
    XHigh,
    ZLow,
    ZHigh,
}

/// What a boundary facet touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    /// Free boundary interior to the container (Dirichlet side).
    Free,
    /// Lateral container wall x₁ ∈ {0, a} (Neumann side).
    Wall,
    /// The symmetry plane x_N = 0 of the half-cylinder (Neumann side).
    SymmetryPlane,
}

#[derive(Debug, Clone, Copy)]
pub struct Facet {
    pub cell: (usize, usize),
    pub side: Side,
    pub kind: FacetKind,
}

/// The decomposed boundary of a mask.
#[derive(Debug, Clone)]
pub struct BoundarySegments {
    facets: Vec<Facet>,
    facet_area: f64,
    free_count: usize,
    wall_count: usize,
    symmetry_count: usize,
    touches_low_wall: bool,
    touches_high_wall: bool,
}

impl BoundarySegments {
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Staircase measure of the free boundary Γ.
    pub fn gamma_measure(&self) -> f64 {
        self.free_count as f64 * self.facet_area
    }

    /// Staircase measure of Γ₁ (walls plus, in half mode, the symmetry plane).
    pub fn gamma1_measure(&self) -> f64 {
        (self.wall_count + self.symmetry_count) as f64 * self.facet_area
    }

    /// Staircase measure of the lateral walls only.
    pub fn wall_measure(&self) -> f64 {
        self.wall_count as f64 * self.facet_area
    }

    pub fn touches_wall(&self, side: WallSide) -> bool {
        match side {
            WallSide::Low => self.touches_low_wall,
            WallSide::High => self.touches_high_wall,
        }
    }

    pub fn touches_both_walls(&self) -> bool {
        self.touches_low_wall && self.touches_high_wall
    }
}

/// Classify every boundary facet of the mask.
pub fn boundary_decompose(mask: &DomainMask) -> BoundarySegments {
    let grid = mask.grid();
    let (nx, nz) = (grid.nx(), grid.nz());
    let mut facets = Vec::new();
    let mut free = 0usize;
    let mut wall = 0usize;
    let mut sym = 0usize;
    let mut low = false;
    let mut high = false;
    for idx in mask.inside_cells() {
        let (i, j) = grid.coords(idx);
        let mut push = |side: Side, kind: FacetKind| {
            match kind {
                FacetKind::Free => free += 1,
                FacetKind::Wall => wall += 1,
                FacetKind::SymmetryPlane => sym += 1,
            }
            facets.push(Facet { cell: (i, j), side, kind });
        };
        if i == 0 {
            low = true;
            push(Side::XLow, FacetKind::Wall);
        } else if !mask.is_inside(i - 1, j) {
            push(Side::XLow, FacetKind::Free);
        }
        if i + 1 == nx {
            high = true;
            push(Side::XHigh, FacetKind::Wall);
        } else if !mask.is_inside(i + 1, j) {
            push(Side::XHigh, FacetKind::Free);
        }
        if j == 0 {
            // unreachable in full mode: the clearance layer is empty
            debug_assert_eq!(grid.mode(), Mode::Half);
            push(Side::ZLow, FacetKind::SymmetryPlane);
        } else if !mask.is_inside(i, j - 1) {
            push(Side::ZLow, FacetKind::Free);
        }
        if j + 1 == nz {
            debug_assert!(false, "mask occupies the cap clearance layer");
        } else if !mask.is_inside(i, j + 1) {
            push(Side::ZHigh, FacetKind::Free);
        }
    }
    BoundarySegments {
        facets,
        facet_area: grid.spacing(),
        free_count: free,
        wall_count: wall,
        symmetry_count: sym,
        touches_low_wall: low,
        touches_high_wall: high,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, mask_from_shape, CrossSection, DomainMask, Shape};

    #[test]
    fn bounded_cylinder_staircase_measures() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 2.0, 64, Mode::Full).unwrap();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        let b = boundary_decompose(&m);
        // two flat caps of length a each, and lateral contact of height h
        assert!((b.gamma_measure() - 2.0).abs() < 1e-12);
        assert!((b.gamma1_measure() - 2.0).abs() < 1e-12);
        assert!(b.touches_both_walls());
    }

    #[test]
    fn single_interior_cell() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 2.0, 64, Mode::Full).unwrap();
        let idx = g.index(30, g.nz() / 2);
        let m = DomainMask::from_cells(g.clone(), &[idx]).unwrap();
        let b = boundary_decompose(&m);
        assert!((b.gamma_measure() - 4.0 * g.spacing()).abs() < 1e-15);
        assert_eq!(b.gamma1_measure(), 0.0);
    }

    #[test]
    fn half_disk_wall_contact_length() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 2.0, 64, Mode::Full).unwrap();
        let r = 0.3;
        let m = mask_from_shape(&g, &Shape::HalfDisk { radius: r, wall: WallSide::Low }).unwrap();
        let b = boundary_decompose(&m);
        let diameter = 2.0 * r;
        assert!(
            (b.gamma1_measure() - diameter).abs() <= 2.0 * g.spacing(),
            "wall contact {} vs diameter {diameter}",
            b.gamma1_measure()
        );
        assert!(b.touches_wall(WallSide::Low));
        assert!(!b.touches_wall(WallSide::High));
    }

    #[test]
    fn facet_sets_partition_boundary() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 1.0, 16, Mode::Full).unwrap();
        let mut r = crate::rng::seeded(7);
        let m = crate::geometry::random_mask(&g, 40, &mut r).unwrap();
        let b = boundary_decompose(&m);
        let total = b.facets().len();
        let free = b.facets().iter().filter(|f| f.kind == FacetKind::Free).count();
        let rest = b.facets().iter().filter(|f| f.kind != FacetKind::Free).count();
        assert_eq!(free + rest, total);
        assert!((b.gamma_measure() - free as f64 * g.spacing()).abs() < 1e-15);
    }
}
