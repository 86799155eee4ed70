//! The discrete mixed-boundary torsion problem −Δu = 1 on a mask, with u = 0
//! on the free boundary and zero normal derivative on the container wall,
//! plus the torsional energy, field symmetrization, and boundary-gradient
//! sampling.

mod rearrange;
mod solver;

pub use rearrange::{column_axial_dirichlet, steiner_symmetrize_field};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{CylinderGrid, DomainMask, Mode};
use crate::levelset;

/// Default relative residual for the linear solve.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A solved torsion problem.
///
/// `energy` is the mass form −½∫u; `energy_dirichlet` is the Dirichlet form
/// −½∫|∇u|². The two agree to solver tolerance at convergence.
#[derive(Debug, Clone)]
pub struct TorsionSolution {
    u: ScalarField,
    mask: DomainMask,
    energy: f64,
    energy_dirichlet: f64,
    iterations: usize,
    residual: f64,
}

impl TorsionSolution {
    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn energy_dirichlet(&self) -> f64 {
        self.energy_dirichlet
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn max_u(&self) -> f64 {
        self.u.max_value()
    }

    /// Scale-aware bound on |energy − energy_dirichlet| implied by the
    /// stopped residual: ½|uᵀr| ≤ ½‖u‖‖r‖ ≤ ½ tol‖u‖‖b‖.
    pub fn energy_gap_bound(&self) -> f64 {
        let grid = self.u.grid();
        let n = self.mask.cell_count() as f64;
        let u_norm = self
            .u
            .values()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let b_norm = grid.cell_volume() * n.sqrt();
        0.5 * self.residual.max(1e-16) * u_norm * b_norm + 1e-300
    }
}

/// Solve the torsion problem on a mask to the given relative residual.
pub fn solve_torsion(grid: &Arc<CylinderGrid>, mask: &DomainMask, tol: f64) -> Result<TorsionSolution> {
    solve_torsion_warm(grid, mask, tol, None)
}

/// Same as [`solve_torsion`] with an optional warm start (values are read at
/// the new mask's cells; missing cells start at zero).
pub fn solve_torsion_warm(
    grid: &Arc<CylinderGrid>,
    mask: &DomainMask,
    tol: f64,
    warm: Option<&ScalarField>,
) -> Result<TorsionSolution> {
    if mask.grid().as_ref() != grid.as_ref() {
        return Err(Error::InvalidParameter("mask grid mismatch".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let sys = solver::assemble(mask)?;
    let x0 = warm.map(|field| sys.cells.iter().map(|&c| field.values()[c].max(0.0)).collect());
    let out = solver::pcg(&sys, tol, x0)?;
    let mut u = ScalarField::zeros(grid.clone());
    for (unknown, &cell) in sys.cells.iter().enumerate() {
        u.values_mut()[cell] = out.x[unknown];
    }
    let vol = grid.cell_volume();
    let mass: f64 = out.x.iter().sum::<f64>() * vol;
    let dirichlet = sys.quadratic_form(&out.x);
    Ok(TorsionSolution {
        u,
        mask: mask.clone(),
        energy: -0.5 * mass,
        energy_dirichlet: -0.5 * dirichlet,
        iterations: out.iterations,
        residual: out.rel_residual,
    })
}

/// Torsional energy of a solution (the mass form of (−½∫u)).
pub fn energy_of(solution: &TorsionSolution) -> f64 {
    solution.energy()
}

/// −½ ∫ u for an arbitrary cell-centered field (midpoint quadrature).
pub fn energy_mass_of_field(field: &ScalarField) -> f64 {
    -0.5 * field.values().iter().sum::<f64>() * field.grid().cell_volume()
}

/// The closed-form flat-cylinder torsion function evaluated at cell centers:
/// ½(h²/4 − x_N²) inside ω × (−h/2, h/2), zero outside. In half mode the
/// height is measured from the symmetry plane and the profile is ½(h² − x_N²).
pub fn analytic_rect_field(grid: &Arc<CylinderGrid>, height: f64) -> Result<ScalarField> {
    if !(height > 0.0) {
        return Err(Error::InvalidParameter(format!("height must be positive, got {height}")));
    }
    let clearance = grid.length() - grid.spacing();
    let (reach, f): (f64, Box<dyn Fn(f64) -> f64>) = match grid.mode() {
        Mode::Full => (
            height / 2.0,
            Box::new(move |z: f64| {
                if z.abs() < height / 2.0 {
                    0.5 * (height * height / 4.0 - z * z)
                } else {
                    0.0
                }
            }),
        ),
        Mode::Half => (
            height,
            Box::new(move |z: f64| {
                if z < height {
                    0.5 * (height * height - z * z)
                } else {
                    0.0
                }
            }),
        ),
    };
    if reach > clearance + 1e-12 {
        return Err(Error::InfeasibleGeometry(format!(
            "flat cylinder of height {height} reaches the axial truncation"
        )));
    }
    Ok(ScalarField::from_fn(grid.clone(), |_, z| f(z)))
}

/// Where the distance to the free boundary comes from.
pub enum DistanceSource<'a> {
    /// A maintained signed-distance level set (negative inside).
    LevelSet(&'a ScalarField),
    /// Rebuild the distance from the mask staircase by fast sweeping.
    Mask(&'a DomainMask),
}

/// Boundary-gradient band statistics.
///
/// Near the free boundary the torsion function vanishes linearly with slope
/// |∇u| = √C₀, so u/d sampled at distance d estimates the boundary gradient
/// without one-sided differences across the staircase.
#[derive(Debug, Clone, Copy)]
pub struct BandStats {
    pub samples: usize,
    /// Mean boundary-gradient sample g.
    pub mean: f64,
    pub stddev: f64,
    /// stddev / mean.
    pub rel_stddev: f64,
    /// mean(g)².
    pub c0_estimate: f64,
}

/// Per-cell boundary-gradient samples (cell index, u/d) for inside cells with
/// free-boundary distance within `band` (in multiples of the cell size).
pub fn band_gradient_samples(
    solution: &TorsionSolution,
    distance: &ScalarField,
    band: (f64, f64),
) -> Result<Vec<(usize, f64)>> {
    let grid = solution.u().grid();
    distance.assert_same_grid(grid)?;
    if !(band.0 > 0.0 && band.1 > band.0) {
        return Err(Error::InvalidParameter(format!(
            "band must satisfy 0 < d_min < d_max, got [{}, {}]",
            band.0, band.1
        )));
    }
    let h = grid.spacing();
    let (lo, hi) = (band.0 * h, band.1 * h);
    let mut out = Vec::new();
    for cell in solution.mask().inside_cells() {
        let d = -distance.values()[cell];
        if d >= lo && d <= hi {
            out.push((cell, solution.u().values()[cell] / d));
        }
    }
    Ok(out)
}

/// Sample g = u/d in a band of distances to the free boundary and estimate
/// the overdetermined constant as C₀ ≈ mean(g)².
pub fn boundary_gradient_stats(
    solution: &TorsionSolution,
    distance: DistanceSource,
    band: (f64, f64),
) -> Result<BandStats> {
    let owned;
    let dist_field = match distance {
        DistanceSource::LevelSet(phi) => phi,
        DistanceSource::Mask(mask) => {
            owned = levelset::signed_distance_from_mask(mask);
            &owned
        }
    };
    let samples = band_gradient_samples(solution, dist_field, band)?;
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no cells fall in the gradient band".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&(_, g)| g).sum::<f64>() / n;
    let var = samples.iter().map(|&(_, g)| (g - mean) * (g - mean)).sum::<f64>() / n;
    let stddev = var.sqrt();
    Ok(BandStats {
        samples: samples.len(),
        mean,
        stddev,
        rel_stddev: stddev / mean.abs().max(1e-300),
        c0_estimate: mean * mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_grid, mask_from_shape, random_block_mask, CrossSection, Shape, WallSide,
    };
    use approx::assert_relative_eq;

    fn grid(res: usize, mode: Mode) -> Arc<CylinderGrid> {
        build_grid(CrossSection::interval(1.0).unwrap(), 2.0, res, mode).unwrap()
    }

    #[test]
    fn flat_cylinder_matches_closed_form() {
        let g = grid(128, Mode::Full);
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
        assert!((sol.max_u() - 0.125).abs() / 0.125 < 0.01, "max u = {}", sol.max_u());
        let exact = -1.0 / 24.0;
        assert!(
            (sol.energy() - exact).abs() / exact.abs() < 0.01,
            "energy = {}",
            sol.energy()
        );
        assert!((sol.energy() - sol.energy_dirichlet()).abs() <= 10.0 * sol.energy_gap_bound());
    }

    #[test]
    fn solution_is_nonnegative_and_zero_outside() {
        let g = grid(64, Mode::Full);
        let m = mask_from_shape(&g, &Shape::HalfDisk { radius: 0.4, wall: WallSide::Low }).unwrap();
        let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
        for (cell, &v) in sol.u().values().iter().enumerate() {
            if m.is_inside_idx(cell) {
                assert!(v >= 0.0, "negative torsion value {v}");
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn empty_mask_is_an_error() {
        let g = grid(64, Mode::Full);
        let m = crate::geometry::DomainMask::empty(g.clone());
        assert!(matches!(solve_torsion(&g, &m, DEFAULT_TOL), Err(Error::EmptyMask)));
    }

    #[test]
    fn disjoint_union_energy_is_additive() {
        let g = grid(64, Mode::Full);
        let a = mask_from_shape(&g, &Shape::Disk { center: (0.4, -1.0), radius: 0.25 }).unwrap();
        let b = mask_from_shape(&g, &Shape::Disk { center: (0.6, 1.0), radius: 0.2 }).unwrap();
        assert!(a.separated_from(&b));
        let u = a.union(&b).unwrap();
        let ea = solve_torsion(&g, &a, DEFAULT_TOL).unwrap().energy();
        let eb = solve_torsion(&g, &b, DEFAULT_TOL).unwrap().energy();
        let eu = solve_torsion(&g, &u, DEFAULT_TOL).unwrap().energy();
        assert_relative_eq!(eu, ea + eb, max_relative = 1e-7);
    }

    #[test]
    fn smaller_cylinder_energy() {
        let g = grid(128, Mode::Full);
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 0.5 }).unwrap();
        let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
        let exact = -0.5f64.powi(3) / 24.0;
        assert!((sol.energy() - exact).abs() / exact.abs() < 0.01);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = grid(64, Mode::Full);
        assert_eq!(energy_mass_of_field(&crate::ScalarField::zeros(g)), 0.0);
    }

    #[test]
    fn injected_analytic_field_energy() {
        let g = grid(128, Mode::Full);
        let h = 1.0;
        let f = analytic_rect_field(&g, h).unwrap();
        let e = energy_mass_of_field(&f);
        let exact = -h * h * h / 24.0;
        let hg = g.spacing();
        // midpoint quadrature of the parabola is off by a·h·h_g²/48
        assert!((e - exact).abs() <= 1.5 * h * hg * hg / 48.0, "e = {e}");
    }

    #[test]
    fn analytic_field_values() {
        let g = grid(128, Mode::Full);
        let h = 0.5;
        let f = analytic_rect_field(&g, h).unwrap();
        let at = |z: f64| {
            let j = (0..g.nz()).min_by_key(|&j| ((g.axial_center(j) - z).abs() * 1e9) as i64).unwrap();
            f.get(g.nx() / 2, j)
        };
        let zc = g.axial_center(g.nz() / 2); // first center above the plane
        assert_relative_eq!(at(0.0), 0.5 * (h * h / 4.0 - zc * zc), epsilon = 1e-12);
        assert_eq!(at(h / 2.0 + 0.05), 0.0);
        let zq = at(h / 4.0);
        assert!((zq - 3.0 * h * h / 32.0).abs() < h * g.spacing());
        assert!(analytic_rect_field(&g, 10.0).is_err());
    }

    #[test]
    fn grid_convergence_on_flat_cylinder() {
        let exact = -1.0 / 24.0;
        let err = |res: usize| {
            let g = grid(res, Mode::Full);
            let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
            (solve_torsion(&g, &m, DEFAULT_TOL).unwrap().energy() - exact).abs()
        };
        let coarse = err(32);
        let fine = err(64);
        assert!(fine <= coarse / 1.8, "coarse {coarse:.3e} fine {fine:.3e}");
    }

    #[test]
    fn energy_forms_agree_on_random_masks() {
        let g = grid(24, Mode::Full);
        let mut rng = crate::rng::seeded(21);
        for _ in 0..20 {
            let m = random_block_mask(&g, 2, &mut rng);
            if m.is_empty() {
                continue;
            }
            let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
            let gap = (sol.energy() - sol.energy_dirichlet()).abs();
            assert!(gap <= 10.0 * sol.energy_gap_bound(), "gap {gap:.3e}");
            for (cell, &v) in sol.u().values().iter().enumerate() {
                if m.is_inside_idx(cell) {
                    assert!(v >= 0.0);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn domain_monotonicity_on_random_nested_pairs() {
        let g = grid(24, Mode::Full);
        let mut rng = crate::rng::seeded(11);
        for _ in 0..10 {
            let small = random_block_mask(&g, 2, &mut rng);
            if small.is_empty() {
                continue;
            }
            let mut large = random_block_mask(&g, 2, &mut rng).union(&small).unwrap();
            if large.cell_count() == small.cell_count() {
                // force strict growth
                let extra = (0..g.cell_count())
                    .find(|&c| {
                        let (_, j) = g.coords(c);
                        !large.is_inside_idx(c) && !g.touches_cap(j) && j > 0
                    })
                    .unwrap();
                let (i, j) = g.coords(extra);
                large.set(i, j, true);
            }
            let su = solve_torsion(&g, &small, DEFAULT_TOL).unwrap();
            let lu = solve_torsion(&g, &large, DEFAULT_TOL).unwrap();
            for cell in 0..g.cell_count() {
                assert!(
                    lu.u().values()[cell] >= su.u().values()[cell] - 1e-9,
                    "pointwise monotonicity violated"
                );
            }
            assert!(lu.energy() <= su.energy() + 1e-12);
        }
    }

    #[test]
    fn half_mode_solve_matches_mirrored_full_solve() {
        let gf = grid(32, Mode::Full);
        let gh = grid(32, Mode::Half);
        let mf = mask_from_shape(&gf, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        let mh = mask_from_shape(&gh, &Shape::BoundedCylinder { height: 0.5 }).unwrap();
        let sf = solve_torsion(&gf, &mf, DEFAULT_TOL).unwrap();
        let sh = solve_torsion(&gh, &mh, DEFAULT_TOL).unwrap();
        // upper half of the full solution equals the half-cylinder solution
        for j in 0..gh.nz() {
            let jf = gf.nz() / 2 + j;
            for i in 0..gf.nx() {
                let a = sf.u().get(i, jf);
                let b = sh.u().get(i, j);
                assert!((a - b).abs() <= 1e-8, "mismatch at ({i}, {j}): {a} vs {b}");
            }
        }
        assert_relative_eq!(sh.energy(), 0.5 * sf.energy(), max_relative = 1e-7);
    }

    #[test]
    fn band_stats_on_flat_cylinder() {
        let g = grid(128, Mode::Full);
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 1.0 }).unwrap();
        let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
        let stats = boundary_gradient_stats(&sol, DistanceSource::Mask(&m), (1.0, 3.0)).unwrap();
        assert!((stats.mean - 0.5).abs() / 0.5 < 0.10, "g = {}", stats.mean);
        assert!((stats.c0_estimate - 0.25).abs() / 0.25 < 0.2);
        assert!(stats.rel_stddev < 0.15);
    }

    #[test]
    fn band_stats_on_half_disk() {
        let g = grid(128, Mode::Full);
        let c: f64 = 0.3;
        let r = (2.0 * c / std::f64::consts::PI).sqrt();
        let m = mask_from_shape(&g, &Shape::HalfDisk { radius: r, wall: WallSide::Low }).unwrap();
        let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
        // exact signed distance to the arc
        let sdf = ScalarField::from_fn(g.clone(), |x, z| (x * x + z * z).sqrt() - r);
        let stats = boundary_gradient_stats(&sol, DistanceSource::LevelSet(&sdf), (1.0, 3.0)).unwrap();
        let c0 = c / (2.0 * std::f64::consts::PI);
        assert!(
            (stats.c0_estimate - c0).abs() / c0 < 0.15,
            "C0 estimate {} vs {c0}",
            stats.c0_estimate
        );
    }

    #[test]
    fn empty_band_is_an_error() {
        let g = grid(64, Mode::Full);
        let m = mask_from_shape(&g, &Shape::BoundedCylinder { height: 0.25 }).unwrap();
        let sol = solve_torsion(&g, &m, DEFAULT_TOL).unwrap();
        let res = boundary_gradient_stats(&sol, DistanceSource::Mask(&m), (50.0, 60.0));
        assert!(res.is_err());
    }
}
