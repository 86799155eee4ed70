//! Marching-squares iso-contours of cell-centered fields.
//!
//! Staircase facet counts overestimate the length of curved boundaries by up
//! to √2, so curved minimizers are measured with a sub-cell estimator: the
//! iso-line of the cell-centered field is extracted by linear interpolation
//! on the dual grid of cell centers and its polyline length is summed. The
//! dual grid stops half a cell short of the container walls, which clips the
//! contour there.

use crate::error::{Error, Result};
use crate::geometry::CylinderGrid;

/// One polyline segment of the contour, endpoints in (x₁, x_N) coordinates.
pub type Segment = ((f64, f64), (f64, f64));

fn crossing(pa: (f64, f64), va: f64, pb: (f64, f64), vb: f64) -> (f64, f64) {
    let t = va / (va - vb);
    (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
}

/// Extract the iso-contour segments of a cell-centered field.
pub fn contour_segments(grid: &CylinderGrid, values: &[f64], iso: f64) -> Result<Vec<Segment>> {
    assert_eq!(values.len(), grid.cell_count());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if !v.is_finite() {
            return Err(Error::DegenerateField("field contains non-finite values".into()));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        return Err(Error::DegenerateField(
            "constant field has no iso-contour".into(),
        ));
    }
    let (nx, nz) = (grid.nx(), grid.nz());
    let mut segments = Vec::new();
    for j in 0..nz - 1 {
        for i in 0..nx - 1 {
            // corners counterclockwise from the lower-left cell center
            let p = [
                (grid.x1_center(i), grid.axial_center(j)),
                (grid.x1_center(i + 1), grid.axial_center(j)),
                (grid.x1_center(i + 1), grid.axial_center(j + 1)),
                (grid.x1_center(i), grid.axial_center(j + 1)),
            ];
            let v = [
                values[grid.index(i, j)] - iso,
                values[grid.index(i + 1, j)] - iso,
                values[grid.index(i + 1, j + 1)] - iso,
                values[grid.index(i, j + 1)] - iso,
            ];
            let code = (v[0] > 0.0) as usize
                | ((v[1] > 0.0) as usize) << 1
                | ((v[2] > 0.0) as usize) << 2
                | ((v[3] > 0.0) as usize) << 3;
            // edge k joins corner k and corner (k+1) % 4
            let edge = |k: usize| crossing(p[k], v[k], p[(k + 1) % 4], v[(k + 1) % 4]);
            let mut emit = |a: usize, b: usize| segments.push((edge(a), edge(b)));
            match code {
                0 | 15 => {}
                1 | 14 => emit(0, 3),
                2 | 13 => emit(0, 1),
                3 | 12 => emit(3, 1),
                4 | 11 => emit(1, 2),
                6 | 9 => emit(0, 2),
                7 | 8 => emit(3, 2),
                5 => {
                    // saddle: corners 0 and 2 above iso
                    if v.iter().sum::<f64>() > 0.0 {
                        emit(0, 1);
                        emit(2, 3);
                    } else {
                        emit(0, 3);
                        emit(1, 2);
                    }
                }
                10 => {
                    // saddle: corners 1 and 3 above iso
                    if v.iter().sum::<f64>() > 0.0 {
                        emit(0, 3);
                        emit(1, 2);
                    } else {
                        emit(0, 1);
                        emit(2, 3);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(segments)
}

fn segment_length(s: &Segment) -> f64 {
    let dx = s.1 .0 - s.0 .0;
    let dz = s.1 .1 - s.0 .1;
    (dx * dx + dz * dz).sqrt()
}

/// Total polyline length of the iso-contour, clipped at the container walls.
pub fn contour_length(grid: &CylinderGrid, values: &[f64], iso: f64) -> Result<f64> {
    Ok(contour_segments(grid, values, iso)?
        .iter()
        .map(segment_length)
        .sum())
}

/// Angles (degrees) between the contour and the axial direction where it
/// meets a lateral wall; an orthogonal contact reads 90°.
pub fn wall_contact_angles(grid: &CylinderGrid, segments: &[Segment]) -> Vec<f64> {
    let h = grid.spacing();
    let a = grid.cross_section().measure();
    let near_wall = |x: f64| x <= 0.5 * h + 1e-9 * h || x >= a - 0.5 * h - 1e-9 * h;
    let mut angles = Vec::new();
    for s in segments {
        let hit = near_wall(s.0 .0) || near_wall(s.1 .0);
        if !hit {
            continue;
        }
        let len = segment_length(s);
        if len < 1e-14 {
            continue;
        }
        let tz = (s.1 .1 - s.0 .1) / len;
        let angle = tz.abs().clamp(0.0, 1.0).acos().to_degrees();
        angles.push(angle);
    }
    angles
}
