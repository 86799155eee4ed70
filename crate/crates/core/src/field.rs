//! Cell-centered scalar fields on a cylinder grid.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{self, CylinderGrid, Segment};
use crate::io::fmt17;

/// One value per grid cell (length² units for torsion functions).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<CylinderGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Arc<CylinderGrid>) -> Self {
        let n = grid.cell_count();
        ScalarField { grid, values: vec![0.0; n] }
    }

    pub fn from_values(grid: Arc<CylinderGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.cell_count());
        ScalarField { grid, values }
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(grid: Arc<CylinderGrid>, mut f: F) -> Self {
        let mut field = ScalarField::zeros(grid.clone());
        for j in 0..grid.nz() {
            let z = grid.axial_center(j);
            for i in 0..grid.nx() {
                field.values[grid.index(i, j)] = f(grid.x1_center(i), z);
            }
        }
        field
    }

    pub fn grid(&self) -> &Arc<CylinderGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.index(i, j);
        self.values[idx] = v;
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Polyline length of the iso-contour (marching squares, wall-clipped).
    pub fn contour_length(&self, iso: f64) -> Result<f64> {
        geometry::contour_length(&self.grid, &self.values, iso)
    }

    pub fn contour_segments(&self, iso: f64) -> Result<Vec<Segment>> {
        geometry::contour_segments(&self.grid, &self.values, iso)
    }

    /// CSV dump with columns x1, xN, value.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "x1,xN,value")?;
        for j in 0..self.grid.nz() {
            for i in 0..self.grid.nx() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt17(self.grid.x1_center(i)),
                    fmt17(self.grid.axial_center(j)),
                    fmt17(self.get(i, j))
                )?;
            }
        }
        Ok(())
    }

    /// Legacy ASCII VTK structured-points dump with the field as point data
    /// at cell centers.
    pub fn write_vtk<W: Write>(&self, w: &mut W, name: &str) -> Result<()> {
        let g = &self.grid;
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{name}")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET STRUCTURED_POINTS")?;
        writeln!(w, "DIMENSIONS {} {} 1", g.nx(), g.nz())?;
        writeln!(
            w,
            "ORIGIN {} {} 0",
            fmt17(g.x1_center(0)),
            fmt17(g.axial_center(0))
        )?;
        writeln!(w, "SPACING {} {} 1", fmt17(g.spacing()), fmt17(g.spacing()))?;
        writeln!(w, "POINT_DATA {}", g.cell_count())?;
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for j in 0..g.nz() {
            for i in 0..g.nx() {
                writeln!(w, "{}", fmt17(self.get(i, j)))?;
            }
        }
        Ok(())
    }

    pub(crate) fn assert_same_grid(&self, other: &CylinderGrid) -> Result<()> {
        if self.grid.as_ref() != other {
            return Err(Error::InvalidParameter(
                "field and argument live on different grids".into(),
            ));
        }
        Ok(())
    }
}
