//! Discrete domains: a candidate shape Ω is a finite union of grid cells.
//!
//! Working with cell masks keeps volume arithmetic exact (volume is cell
//! count times cell volume) and makes the discrete torsion operator symmetric
//! positive definite. Masks never occupy the clearance layer next to the caps
//! x_N = ±L, so a shape that grows into the truncation fails loudly instead
//! of silently feeling the artificial boundary.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{CylinderGrid, Mode};
use crate::rng::ChaCha8Rng;

/// Indicator of a discrete domain Ω inside the truncated container.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Arc<CylinderGrid>,
    inside: Vec<bool>,
    cell_count: usize,
}

/// Which lateral wall of the 2-D container a shape is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallSide {
    /// x₁ = 0
    Low,
    /// x₁ = a
    High,
}

/// Named shapes rasterized by [`mask_from_shape`].
#[derive(Debug, Clone)]
pub enum Shape {
    /// ω × (−h/2, h/2) in full mode, ω × (0, h) in half mode.
    BoundedCylinder { height: f64 },
    /// Half-disk of the given radius centered on a lateral wall at the
    /// symmetry plane x_N = 0.
    HalfDisk { radius: f64, wall: WallSide },
    /// Disk of the given radius centered at `(x1, x_n)`.
    Disk { center: (f64, f64), radius: f64 },
    /// Half-ellipse blob centered on a lateral wall at x_N = 0, with the
    /// given transverse and axial semi-axes (volume π·s₁·s₂/2).
    HalfEllipse { semi_transverse: f64, semi_axial: f64, wall: WallSide },
}

impl DomainMask {
    /// Empty mask on a grid.
    pub fn empty(grid: Arc<CylinderGrid>) -> Self {
        let n = grid.cell_count();
        DomainMask {
            grid,
            inside: vec![false; n],
            cell_count: 0,
        }
    }

    /// Mask from a cell-center predicate; cells in the cap clearance layer
    /// are never included.
    pub fn from_predicate<F>(grid: Arc<CylinderGrid>, pred: F) -> Self
    where
        F: Fn(f64, f64) -> bool,
    {
        let mut mask = DomainMask::empty(grid.clone());
        for j in grid.admissible_rows() {
            let z = grid.axial_center(j);
            for i in 0..grid.nx() {
                if pred(grid.x1_center(i), z) {
                    mask.set(i, j, true);
                }
            }
        }
        mask
    }

    /// Mask from an explicit inside-cell list (used by the discrete optimizers).
    pub fn from_cells(grid: Arc<CylinderGrid>, cells: &[usize]) -> Result<Self> {
        let mut mask = DomainMask::empty(grid.clone());
        for &idx in cells {
            let (i, j) = grid.coords(idx);
            if grid.touches_cap(j) {
                return Err(Error::InfeasibleGeometry(format!(
                    "cell ({i}, {j}) lies in the cap clearance layer"
                )));
            }
            mask.set(i, j, true);
        }
        Ok(mask)
    }

    pub fn grid(&self) -> &Arc<CylinderGrid> {
        &self.grid
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.grid.index(i, j)]
    }

    pub fn is_inside_idx(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let idx = self.grid.index(i, j);
        if self.inside[idx] != value {
            self.inside[idx] = value;
            if value {
                self.cell_count += 1;
            } else {
                self.cell_count -= 1;
            }
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn is_empty(&self) -> bool {
        self.cell_count == 0
    }

    /// Exact volume: cell count times cell volume.
    pub fn volume(&self) -> f64 {
        self.cell_count as f64 * self.grid.cell_volume()
    }

    /// Linear indices of the inside cells, ascending.
    pub fn inside_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside
            .iter()
            .enumerate()
            .filter_map(|(idx, &b)| b.then_some(idx))
    }

    /// Union with a disjoint mask on the same grid.
    pub fn union(&self, other: &DomainMask) -> Result<DomainMask> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("masks live on different grids".into()));
        }
        let mut out = self.clone();
        for idx in other.inside_cells() {
            if !out.inside[idx] {
                out.inside[idx] = true;
                out.cell_count += 1;
            }
        }
        Ok(out)
    }

    /// True when no inside cell of `self` shares a face with (or equals) an
    /// inside cell of `other`; disjoint solves then decouple exactly.
    pub fn separated_from(&self, other: &DomainMask) -> bool {
        let (nx, nz) = (self.grid.nx(), self.grid.nz());
        for idx in self.inside_cells() {
            let (i, j) = self.grid.coords(idx);
            if other.inside[idx] {
                return false;
            }
            let mut adjacent = false;
            if i > 0 {
                adjacent |= other.is_inside(i - 1, j);
            }
            if i + 1 < nx {
                adjacent |= other.is_inside(i + 1, j);
            }
            if j > 0 {
                adjacent |= other.is_inside(i, j - 1);
            }
            if j + 1 < nz {
                adjacent |= other.is_inside(i, j + 1);
            }
            if adjacent {
                return false;
            }
        }
        true
    }

    /// Flood fill over face-adjacent inside cells.
    ///
    /// Returns whether the mask is a single component, and the component
    /// count (zero for an empty mask).
    pub fn connectedness(&self) -> (bool, usize) {
        let n = self.grid.cell_count();
        let (nx, nz) = (self.grid.nx(), self.grid.nz());
        let mut seen = vec![false; n];
        let mut components = 0usize;
        let mut stack = Vec::new();
        for start in 0..n {
            if !self.inside[start] || seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (i, j) = self.grid.coords(idx);
                let mut push = |ii: usize, jj: usize, stack: &mut Vec<usize>| {
                    let nidx = jj * nx + ii;
                    if self.inside[nidx] && !seen[nidx] {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                };
                if i > 0 {
                    push(i - 1, j, &mut stack);
                }
                if i + 1 < nx {
                    push(i + 1, j, &mut stack);
                }
                if j > 0 {
                    push(i, j - 1, &mut stack);
                }
                if j + 1 < nz {
                    push(i, j + 1, &mut stack);
                }
            }
        }
        (components == 1, components)
    }

    /// Serialize in the plain-text mask format:
    /// a header `grid <nx> <nz> <h> <a> <L> <mode>`, then one 0/1 row per
    /// transverse index.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        let g = &self.grid;
        writeln!(
            w,
            "grid {} {} {} {} {} {}",
            g.nx(),
            g.nz(),
            crate::io::fmt17(g.spacing()),
            crate::io::fmt17(g.cross_section().measure()),
            crate::io::fmt17(g.length()),
            g.mode().as_str()
        )?;
        let mut line = String::with_capacity(g.nz());
        for i in 0..g.nx() {
            line.clear();
            for j in 0..g.nz() {
                line.push(if self.is_inside(i, j) { '1' } else { '0' });
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Exact volume of a mask (cell count times cell volume).
pub fn volume(mask: &DomainMask) -> f64 {
    mask.volume()
}

/// Rasterize a named shape onto the grid.
///
/// The shape must fit inside the truncated container with one empty cell
/// layer below the caps; a shape exceeding the truncation or the
/// cross-section is rejected rather than clipped.
pub fn mask_from_shape(grid: &Arc<CylinderGrid>, shape: &Shape) -> Result<DomainMask> {
    let a = grid.cross_section().measure();
    let h = grid.spacing();
    let len = grid.length();
    let axial_clearance = len - h;
    match *shape {
        Shape::BoundedCylinder { height } => {
            if !(height > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "cylinder height must be positive, got {height}"
                )));
            }
            let reach = match grid.mode() {
                Mode::Full => height / 2.0,
                Mode::Half => height,
            };
            if reach > axial_clearance + 1e-12 {
                return Err(Error::InfeasibleGeometry(format!(
                    "cylinder of height {height} reaches the axial truncation (L = {len})"
                )));
            }
            Ok(match grid.mode() {
                Mode::Full => DomainMask::from_predicate(grid.clone(), |_, z| z.abs() < height / 2.0),
                Mode::Half => DomainMask::from_predicate(grid.clone(), |_, z| z < height),
            })
        }
        Shape::HalfDisk { radius, wall } => {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "half-disk radius must be positive, got {radius}"
                )));
            }
            if radius > a + 1e-12 {
                return Err(Error::InfeasibleGeometry(format!(
                    "half-disk radius {radius} exceeds the cross-section width {a}"
                )));
            }
            if radius > axial_clearance + 1e-12 {
                return Err(Error::InfeasibleGeometry(format!(
                    "half-disk radius {radius} reaches the axial truncation (L = {len})"
                )));
            }
            let cx = match wall {
                WallSide::Low => 0.0,
                WallSide::High => a,
            };
            Ok(DomainMask::from_predicate(grid.clone(), |x, z| {
                let dx = x - cx;
                dx * dx + z * z < radius * radius
            }))
        }
        Shape::HalfEllipse { semi_transverse, semi_axial, wall } => {
            if !(semi_transverse > 0.0 && semi_axial > 0.0) {
                return Err(Error::InvalidParameter(
                    "half-ellipse semi-axes must be positive".into(),
                ));
            }
            if semi_transverse > a + 1e-12 || semi_axial > axial_clearance + 1e-12 {
                return Err(Error::InfeasibleGeometry(format!(
                    "half-ellipse {semi_transverse} x {semi_axial} does not fit the container"
                )));
            }
            let cx = match wall {
                WallSide::Low => 0.0,
                WallSide::High => a,
            };
            Ok(DomainMask::from_predicate(grid.clone(), move |x, z| {
                let dx = (x - cx) / semi_transverse;
                let dz = z / semi_axial;
                dx * dx + dz * dz < 1.0
            }))
        }
        Shape::Disk { center, radius } => {
            let (cx, cz) = center;
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "disk radius must be positive, got {radius}"
                )));
            }
            let axial_ok = match grid.mode() {
                Mode::Full => cz - radius >= -axial_clearance - 1e-12 && cz + radius <= axial_clearance + 1e-12,
                Mode::Half => cz - radius >= -1e-12 && cz + radius <= axial_clearance + 1e-12,
            };
            if cx - radius < -1e-12 || cx + radius > a + 1e-12 || !axial_ok {
                return Err(Error::InfeasibleGeometry(format!(
                    "disk of radius {radius} at ({cx}, {cz}) does not fit the container"
                )));
            }
            Ok(DomainMask::from_predicate(grid.clone(), |x, z| {
                let dx = x - cx;
                let dz = z - cz;
                dx * dx + dz * dz < radius * radius
            }))
        }
    }
}

/// Steiner symmetrization of a mask about the plane x_N = 0.
///
/// Each transverse column keeps its cell count m and is moved to the signed
/// axial indices −⌊m/2⌋ … ⌈m/2⌉−1, so the volume is preserved exactly and
/// every column of the output is axially convex. Odd counts put the extra
/// cell on the positive side; the lattice cannot center them.
pub fn steiner_symmetrize_mask(mask: &DomainMask) -> Result<DomainMask> {
    let grid = mask.grid().clone();
    if grid.mode() != Mode::Full {
        return Err(Error::Unsupported(
            "Steiner symmetrization needs the full cylinder (it is taken about x_N = 0)".into(),
        ));
    }
    let mut out = DomainMask::empty(grid.clone());
    for i in 0..grid.nx() {
        let m = (0..grid.nz()).filter(|&j| mask.is_inside(i, j)).count() as i64;
        if m == 0 {
            continue;
        }
        let lo = -(m / 2);
        let hi = (m + 1) / 2; // exclusive
        for k in lo..hi {
            let j = grid
                .row_of_signed(k)
                .expect("symmetrized column exceeds grid; clearance invariant violated");
            out.set(i, j, true);
        }
    }
    debug_assert_eq!(out.cell_count(), mask.cell_count());
    Ok(out)
}

/// Axial stretch F_t: every inside cell is replaced by `t` stacked cells
/// about x_N = 0, so the volume is multiplied by exactly `t`.
pub fn scale_axial(mask: &DomainMask, t: usize) -> Result<DomainMask> {
    if t == 0 {
        return Err(Error::InvalidParameter("scale factor must be at least 1".into()));
    }
    if t == 1 {
        return Ok(mask.clone());
    }
    let grid = mask.grid().clone();
    let mut out = DomainMask::empty(grid.clone());
    for idx in mask.inside_cells() {
        let (i, j) = grid.coords(idx);
        let k = grid.signed_axial(j);
        for r in 0..t as i64 {
            let kk = t as i64 * k + r;
            let jj = grid.row_of_signed(kk).ok_or_else(|| {
                Error::InfeasibleGeometry(format!(
                    "axial stretch by {t} leaves the truncated container"
                ))
            })?;
            if grid.touches_cap(jj) {
                return Err(Error::InfeasibleGeometry(format!(
                    "axial stretch by {t} reaches the cap clearance layer"
                )));
            }
            out.set(i, jj, true);
        }
    }
    debug_assert_eq!(out.cell_count(), mask.cell_count() * t);
    Ok(out)
}

/// Random mask with exactly `k` cells drawn without replacement from the
/// admissible region.
pub fn random_mask(grid: &Arc<CylinderGrid>, k: usize, rng: &mut ChaCha8Rng) -> Result<DomainMask> {
    let rows = grid.admissible_rows();
    let admissible: Vec<usize> = rows
        .flat_map(|j| (0..grid.nx()).map(move |i| (i, j)))
        .map(|(i, j)| grid.index(i, j))
        .collect();
    if k > admissible.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot place {k} cells in {} admissible ones",
            admissible.len()
        )));
    }
    let mut chosen = admissible;
    // partial Fisher-Yates
    for t in 0..k {
        let swap = t + rng.gen_range(0..chosen.len() - t);
        chosen.swap(t, swap);
    }
    chosen.truncate(k);
    DomainMask::from_cells(grid.clone(), &chosen)
}

/// Random union of a few axis-aligned blocks, for property tests that want
/// plausible chunky shapes rather than cell dust.
pub fn random_block_mask(grid: &Arc<CylinderGrid>, blocks: usize, rng: &mut ChaCha8Rng) -> DomainMask {
    let mut mask = DomainMask::empty(grid.clone());
    let rows = grid.admissible_rows();
    for _ in 0..blocks {
        let wi = rng.gen_range(1..=(grid.nx() / 2).max(2));
        let wj = rng.gen_range(1..=((rows.end - rows.start) / 2).max(2));
        let i0 = rng.gen_range(0..grid.nx().saturating_sub(wi).max(1));
        let j0 = rng.gen_range(rows.start..(rows.end.saturating_sub(wj)).max(rows.start + 1));
        for j in j0..(j0 + wj).min(rows.end) {
            for i in i0..(i0 + wi).min(grid.nx()) {
                mask.set(i, j, true);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, CrossSection};
    use crate::rng;
    use proptest::prelude::*;

    fn grid64() -> Arc<CylinderGrid> {
        build_grid(CrossSection::interval(1.0).unwrap(), 2.0, 64, Mode::Full).unwrap()
    }

    #[test]
    fn bounded_cylinder_volume_is_exact() {
        let g = grid64();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        assert_eq!(m.cell_count(), 64 * 64);
        assert_eq!(m.volume(), 1.0);
    }

    #[test]
    fn half_disk_volume_close_to_analytic() {
        let g = grid64();
        let r = 0.3;
        let m = mask_from_shape(&g, &Shape::HalfDisk { radius: r, wall: WallSide::Low }).unwrap();
        let exact = std::f64::consts::PI * r * r / 2.0;
        let perimeter = std::f64::consts::PI * r + 2.0 * r;
        let err = (m.volume() - exact).abs();
        assert!(
            err <= 2.0 * perimeter * g.spacing(),
            "cell-count volume {} vs {exact}",
            m.volume()
        );
    }

    #[test]
    fn half_ellipse_blob_volume() {
        let g = grid64();
        let m = mask_from_shape(
            &g,
            &Shape::HalfEllipse { semi_transverse: 1.0, semi_axial: 0.6, wall: WallSide::Low },
        )
        .unwrap();
        let exact = std::f64::consts::PI * 1.0 * 0.6 / 2.0;
        assert!((m.volume() - exact).abs() < 0.05 * exact, "volume {}", m.volume());
        assert!(mask_from_shape(
            &g,
            &Shape::HalfEllipse { semi_transverse: 1.2, semi_axial: 0.5, wall: WallSide::Low }
        )
        .is_err());
    }

    #[test]
    fn oversized_half_disk_is_infeasible() {
        let g = grid64();
        let r = 1.5;
        let err = mask_from_shape(&g, &Shape::HalfDisk { radius: r, wall: WallSide::Low });
        assert!(matches!(err, Err(Error::InfeasibleGeometry(_))));
    }

    #[test]
    fn tall_cylinder_is_infeasible() {
        let g = grid64();
        let err = mask_from_shape(&g, &Shape::BoundedCylinder { height: 4.0 });
        assert!(matches!(err, Err(Error::InfeasibleGeometry(_))));
    }

    #[test]
    fn empty_mask_volume_and_union_additivity() {
        let g = grid64();
        let empty = DomainMask::empty(g.clone());
        assert_eq!(empty.volume(), 0.0);
        let a = mask_from_shape(&g, &Shape::Disk { center: (0.3, -1.0), radius: 0.2 }).unwrap();
        let b = mask_from_shape(&g, &Shape::Disk { center: (0.7, 1.0), radius: 0.2 }).unwrap();
        assert!(a.separated_from(&b));
        let u = a.union(&b).unwrap();
        assert_eq!(u.volume(), a.volume() + b.volume());
    }

    #[test]
    fn steiner_column_convention() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 1.0, 16, Mode::Full).unwrap();
        // column 0 with signed axial indices {2, 3, 7}
        let cells: Vec<usize> = [2i64, 3, 7]
            .iter()
            .map(|&k| g.index(0, g.row_of_signed(k).unwrap()))
            .collect();
        let m = DomainMask::from_cells(g.clone(), &cells).unwrap();
        let s = steiner_symmetrize_mask(&m).unwrap();
        let got: Vec<i64> = (0..g.nz())
            .filter(|&j| s.is_inside(0, j))
            .map(|j| g.signed_axial(j))
            .collect();
        assert_eq!(got, vec![-1, 0, 1]);
    }

    #[test]
    fn steiner_even_column_is_symmetric() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 1.0, 16, Mode::Full).unwrap();
        let cells: Vec<usize> = [5i64, 6, 7, 8]
            .iter()
            .filter_map(|&k| g.row_of_signed(k).map(|j| g.index(3, j)))
            .collect();
        let m = DomainMask::from_cells(g.clone(), &cells).unwrap();
        let s = steiner_symmetrize_mask(&m).unwrap();
        let got: Vec<i64> = (0..g.nz())
            .filter(|&j| s.is_inside(3, j))
            .map(|j| g.signed_axial(j))
            .collect();
        assert_eq!(got, vec![-2, -1, 0, 1]);
    }

    #[test]
    fn steiner_rejected_in_half_mode() {
        let g = build_grid(CrossSection::interval(1.0).unwrap(), 2.0, 16, Mode::Half).unwrap();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 0.5 }).unwrap();
        assert!(steiner_symmetrize_mask(&m).is_err());
    }

    #[test]
    fn scale_axial_examples() {
        let g = grid64();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 0.5 }).unwrap();
        assert_eq!(scale_axial(&m, 1).unwrap(), m);
        let doubled = scale_axial(&m, 2).unwrap();
        let target = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        assert_eq!(doubled, target);
        assert_eq!(doubled.volume(), 2.0 * m.volume());
        let tripled = scale_axial(&m, 3).unwrap();
        assert_eq!(tripled.cell_count(), 3 * m.cell_count());
    }

    #[test]
    fn scale_axial_can_hit_the_caps() {
        let g = grid64();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.5 }).unwrap();
        assert!(matches!(
            scale_axial(&m, 3),
            Err(Error::InfeasibleGeometry(_))
        ));
    }

    #[test]
    fn connectedness_examples() {
        let g = grid64();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        assert_eq!(m.connectedness(), (true, 1));
        let a = mask_from_shape(&g, &Shape::Disk { center: (0.3, -1.0), radius: 0.15 }).unwrap();
        let b = mask_from_shape(&g, &Shape::Disk { center: (0.7, 1.0), radius: 0.15 }).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.connectedness(), (false, 2));
        assert_eq!(DomainMask::empty(g).connectedness(), (false, 0));
    }

    #[test]
    fn mask_text_header() {
        let g = grid64();
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("grid 64 256 "));
        assert!(header.ends_with("full"));
        assert_eq!(lines.count(), 64);
    }

    proptest! {
        #[test]
        fn steiner_preserves_cell_count(seed in 0u64..200) {
            let g = build_grid(CrossSection::interval(1.0).unwrap(), 1.0, 16, Mode::Full).unwrap();
            let mut r = rng::seeded(seed);
            let k = (seed as usize % 120) + 1;
            let m = random_mask(&g, k, &mut r).unwrap();
            let s = steiner_symmetrize_mask(&m).unwrap();
            prop_assert_eq!(s.cell_count(), m.cell_count());
            // idempotent on its own output
            let s2 = steiner_symmetrize_mask(&s).unwrap();
            prop_assert_eq!(&s2, &s);
        }

        #[test]
        fn scale_axial_multiplies_count(seed in 0u64..100, t in 1usize..4) {
            let g = build_grid(CrossSection::interval(1.0).unwrap(), 2.0, 16, Mode::Full).unwrap();
            // keep shapes close to the plane so the stretch stays feasible
            let m = DomainMask::from_predicate(g.clone(), |x, z| {
                z.abs() < 0.4 && (x * 13.0 + z * 7.0 + seed as f64).sin() > 0.0
            });
            if let Ok(scaled) = scale_axial(&m, t) {
                prop_assert_eq!(scaled.cell_count(), m.cell_count() * t);
            }
        }
    }
}
