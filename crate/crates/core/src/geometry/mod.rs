//! Containers, discrete domains, boundaries and set-level transforms.

mod boundary;
mod contour;
mod cross_section;
mod grid;
mod mask;

pub use boundary::{boundary_decompose, BoundarySegments, Facet, FacetKind, Side};
pub use contour::{contour_length, contour_segments, wall_contact_angles, Segment};
pub use cross_section::{CrossSection, DEFAULT_EIGEN_NODES};
pub use grid::{build_grid, grid_with_cells, CylinderGrid, Mode};
pub use mask::{
    mask_from_shape, random_block_mask, random_mask, scale_axial, steiner_symmetrize_mask, volume,
    DomainMask, Shape, WallSide,
};
