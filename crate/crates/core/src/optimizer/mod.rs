//! Volume-constrained minimization of the torsional energy.
//!
//! Three interchangeable strategies sit behind the [`ShapeOptimizer`] trait
//! and are selected by name at runtime: `levelset` (gradient flow driven by
//! the shape derivative), `cellswap` (discrete steepest-descent local search
//! with exact volume), and `brute` (exhaustive enumeration for tiny
//! instances, the testing oracle for the other two).

mod brute_force;
mod cell_swap;
mod levelset_flow;

pub use brute_force::{binomial, brute_force_min, BruteForce, BruteForceOutcome};
pub use cell_swap::{cell_swap_local_search, CellSwap, CellSwapOutcome};
pub use levelset_flow::{evolve_step, init_levelset, LevelSetFlow, LevelSetState, StepRecord};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{
    boundary_decompose, wall_contact_angles, CylinderGrid, DomainMask, WallSide,
};
use crate::levelset;
use crate::oracles;
use crate::torsion::{self, TorsionSolution};

/// Parameters shared by every optimization strategy.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// CFL fraction of the advection step, in (0, 0.5].
    pub cfl: f64,
    pub max_iters: usize,
    /// Allowed relative volume error per iterate.
    pub volume_tol: f64,
    /// Steiner-symmetrize the mask every k iterations (0 disables).
    pub symmetrize_every: usize,
    /// Re-distance the level set every k iterations (0 disables).
    pub reinit_every: usize,
    /// Convergence window length (iterations).
    pub convergence_window: usize,
    /// Relative energy change over the window that counts as converged.
    pub energy_tol: f64,
    /// Relative residual for the inner torsion solves.
    pub solver_tol: f64,
    /// Seed for randomized initializations.
    pub seed: u64,
    /// Amplitude of the seeded initial level-set perturbation, in cells.
    /// Needed to leave unstable critical shapes such as the flat cylinder,
    /// whose descent speed vanishes identically.
    pub perturb_amplitude: f64,
    /// Boundary-gradient sampling band in multiples of the cell size.
    pub band: (f64, f64),
    /// Enumeration cap for the brute-force strategy.
    pub enum_cap: u128,
    /// Abort when the evolving mask drops below this many cells.
    pub min_cells: usize,
    /// Keep a torsion-field snapshot every k iterations (0 disables).
    pub snapshot_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            cfl: 0.5,
            max_iters: 400,
            volume_tol: 1e-3,
            symmetrize_every: 25,
            reinit_every: 5,
            convergence_window: 40,
            energy_tol: 1e-3,
            solver_tol: 1e-8,
            seed: 0,
            perturb_amplitude: 4.0,
            band: (1.0, 3.0),
            enum_cap: 5_000_000,
            min_cells: 8,
            snapshot_every: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "CFL fraction must lie in (0, 0.5], got {}",
                self.cfl
            )));
        }
        if !(self.volume_tol > 0.0 && self.energy_tol > 0.0 && self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.band.0 > 0.0 && self.band.1 > self.band.0) {
            return Err(Error::InvalidParameter("gradient band must be ordered and positive".into()));
        }
        Ok(())
    }
}

/// Everything a finished optimization reports.
#[derive(Debug, Clone)]
pub struct OptimizerReport {
    pub method: &'static str,
    /// Energy per recorded iterate (the final entry is the final mask's).
    pub energy_history: Vec<f64>,
    pub volume_history: Vec<f64>,
    pub c0_history: Vec<f64>,
    pub gamma_history: Vec<f64>,
    pub final_mask: DomainMask,
    pub final_energy: f64,
    pub final_energy_dirichlet: f64,
    pub final_volume: f64,
    pub final_residual: f64,
    pub solver_iterations: usize,
    /// Marching-squares length of the free boundary.
    pub gamma_length: f64,
    /// Staircase measure of the container-wall contact.
    pub gamma1_staircase: f64,
    pub band_mean: f64,
    pub band_rel_stddev: f64,
    pub c0_estimate: f64,
    /// (c/Γ)².
    pub c0_identity: f64,
    /// 2|E|/c.
    pub c0_lower: f64,
    pub c0_consistent: bool,
    pub connected: bool,
    pub components: usize,
    pub wall_contact: bool,
    pub touches_low_wall: bool,
    pub touches_high_wall: bool,
    pub contact_angles_deg: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub monotonicity_violations: usize,
    /// (iteration, torsion field) pairs kept on the snapshot cadence.
    pub snapshots: Vec<(usize, crate::field::ScalarField)>,
}

/// A named, runtime-selectable optimization strategy.
pub trait ShapeOptimizer: Sync {
    fn name(&self) -> &'static str;

    /// Minimize the torsional energy over shapes of volume `target_volume`
    /// starting from `init`.
    fn optimize(
        &self,
        grid: &Arc<CylinderGrid>,
        init: &DomainMask,
        target_volume: f64,
        config: &OptimizerConfig,
    ) -> Result<OptimizerReport>;
}

static REGISTRY: [&dyn ShapeOptimizer; 3] = [&LevelSetFlow, &CellSwap, &BruteForce];

/// All registered strategies.
pub fn registry() -> &'static [&'static dyn ShapeOptimizer] {
    &REGISTRY
}

/// Look a strategy up by name.
pub fn lookup(name: &str) -> Result<&'static dyn ShapeOptimizer> {
    REGISTRY
        .iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            let names: Vec<_> = REGISTRY.iter().map(|s| s.name()).collect();
            Error::InvalidParameter(format!(
                "unknown optimizer '{name}'; registered: {}",
                names.join(", ")
            ))
        })
}

/// Diagnostics common to all strategies, evaluated on a final mask.
#[allow(clippy::too_many_arguments)]
pub(crate) fn finalize_report(
    method: &'static str,
    grid: &Arc<CylinderGrid>,
    mask: &DomainMask,
    solution: &TorsionSolution,
    phi: Option<&ScalarField>,
    target_volume: f64,
    config: &OptimizerConfig,
    histories: Histories,
    converged: bool,
    iterations: usize,
    monotonicity_violations: usize,
    solver_iterations: usize,
) -> Result<OptimizerReport> {
    let sdf = match phi {
        Some(p) => levelset::reinitialize(p),
        None => levelset::signed_distance_from_mask(mask),
    };
    let gamma_length = sdf.contour_length(0.0)?;
    let segments = sdf.contour_segments(0.0)?;
    let contact_angles_deg = wall_contact_angles(grid, &segments);
    let stats = torsion::boundary_gradient_stats(
        solution,
        torsion::DistanceSource::LevelSet(&sdf),
        config.band,
    )?;
    let relations = oracles::c0_relations(target_volume, solution.energy(), gamma_length, 0.10)?;
    let bounds = boundary_decompose(mask);
    let (connected, components) = mask.connectedness();
    let mut histories = histories;
    histories.c0.push(stats.c0_estimate);
    histories.gamma.push(gamma_length);
    let rows = histories.energy.len();
    for series in [&mut histories.volume, &mut histories.c0, &mut histories.gamma] {
        series.resize(rows, f64::NAN);
    }
    Ok(OptimizerReport {
        method,
        energy_history: histories.energy,
        volume_history: histories.volume,
        c0_history: histories.c0,
        gamma_history: histories.gamma,
        final_mask: mask.clone(),
        final_energy: solution.energy(),
        final_energy_dirichlet: solution.energy_dirichlet(),
        final_volume: mask.volume(),
        final_residual: solution.residual(),
        solver_iterations,
        gamma_length,
        gamma1_staircase: bounds.gamma1_measure(),
        band_mean: stats.mean,
        band_rel_stddev: stats.rel_stddev,
        c0_estimate: stats.c0_estimate,
        c0_identity: relations.identity,
        c0_lower: relations.lower,
        c0_consistent: relations.consistent,
        connected,
        components,
        wall_contact: bounds.wall_measure() > 0.0,
        touches_low_wall: bounds.touches_wall(WallSide::Low),
        touches_high_wall: bounds.touches_wall(WallSide::High),
        contact_angles_deg,
        converged,
        iterations,
        monotonicity_violations,
        snapshots: Vec::new(),
    })
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Histories {
    pub energy: Vec<f64>,
    pub volume: Vec<f64>,
    pub c0: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_the_three_strategies() {
        let names: Vec<_> = registry().iter().map(|s| s.name()).collect();
        assert_eq!(names, vec!["levelset", "cellswap", "brute"]);
        assert!(lookup("levelset").is_ok());
        assert!(lookup("none").is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = OptimizerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.cfl = 0.6;
        assert!(cfg.validate().is_err());
        cfg.cfl = 0.5;
        cfg.band = (3.0, 1.0);
        assert!(cfg.validate().is_err());
    }
}
