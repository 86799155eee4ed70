//! Symmetric decreasing rearrangement of fields about the plane x_N = 0.
//!
//! Each transverse column's value multiset is kept exactly and re-placed with
//! the largest values nearest the plane, alternating sides, extra value to
//! the positive side. The placement of the t-th largest value is signed cell
//! t/2 for even t and −(t+1)/2 for odd t, which makes the rearrangement of an
//! indicator field commute with the mask symmetrization.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::Mode;

/// Steiner symmetrization of a nonnegative field (full-cylinder mode).
pub fn steiner_symmetrize_field(field: &ScalarField) -> Result<ScalarField> {
    let grid = field.grid().clone();
    if grid.mode() != Mode::Full {
        return Err(Error::Unsupported(
            "field symmetrization needs the full cylinder".into(),
        ));
    }
    for &v in field.values() {
        if !v.is_finite() {
            return Err(Error::DegenerateField("non-finite field value".into()));
        }
        if v < 0.0 {
            return Err(Error::InvalidParameter(
                "field symmetrization needs nonnegative values".into(),
            ));
        }
    }
    let mut out = ScalarField::zeros(grid.clone());
    let mut column = Vec::with_capacity(grid.nz());
    for i in 0..grid.nx() {
        column.clear();
        column.extend((0..grid.nz()).map(|j| field.get(i, j)));
        column.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite values"));
        for (t, &v) in column.iter().enumerate() {
            let k = if t % 2 == 0 { (t / 2) as i64 } else { -((t as i64 + 1) / 2) };
            let j = grid.row_of_signed(k).expect("column index in range");
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Discrete axial Dirichlet energy of one column with zero extension past the
/// grid: Σ (u_{j+1} − u_j)² including the two boundary jumps.
pub fn column_axial_dirichlet(field: &ScalarField, i: usize) -> f64 {
    let grid = field.grid();
    let nz = grid.nz();
    let mut acc = field.get(i, 0) * field.get(i, 0);
    for j in 0..nz - 1 {
        let d = field.get(i, j + 1) - field.get(i, j);
        acc += d * d;
    }
    acc += field.get(i, nz - 1) * field.get(i, nz - 1);
    acc
}
