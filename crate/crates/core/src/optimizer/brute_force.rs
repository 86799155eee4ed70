//! Exhaustive enumeration of k-cell masks on tiny grids.
//!
//! The global discrete minimizer is the oracle against which the other
//! strategies are checked. Enumeration counts are computed up front and
//! refused when they exceed the cap.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{CylinderGrid, DomainMask};
use crate::optimizer::{finalize_report, Histories, OptimizerConfig, OptimizerReport, ShapeOptimizer};
use crate::torsion;

/// C(n, k) in u128, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc.saturating_mul((n - t) as u128) / (t as u128 + 1);
    }
    acc
}

/// The global discrete minimizer over all k-cell masks.
#[derive(Debug, Clone)]
pub struct BruteForceOutcome {
    pub mask: DomainMask,
    pub energy: f64,
    /// Every mask whose energy ties the minimum within 1e-9 relative.
    pub minimizers: Vec<DomainMask>,
    pub enumerated: u128,
}

/// Enumerate all k-cell masks (admissible cells only) and return the global
/// minimizer. Refuses when C(n, k) exceeds `cap`.
pub fn brute_force_min(grid: &Arc<CylinderGrid>, k: usize, cap: u128) -> Result<BruteForceOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let admissible: Vec<usize> = grid
        .admissible_rows()
        .flat_map(|j| (0..grid.nx()).map(move |i| grid.index(i, j)))
        .collect();
    let n = admissible.len();
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {n} admissible cells"
        )));
    }
    let combinations = binomial(n as u64, k as u64);
    if combinations > cap {
        return Err(Error::EnumerationCap { combinations, cap });
    }
    let tol = 1e-10;
    let mut best_energy = f64::INFINITY;
    let mut best_mask: Option<DomainMask> = None;
    let mut ties: Vec<(DomainMask, f64)> = Vec::new();
    let mut choice: Vec<usize> = (0..k).collect();
    let mut cells = vec![0usize; k];
    let mut enumerated: u128 = 0;
    let mut done = false;
    while !done {
        enumerated += 1;
        for (slot, &pos) in choice.iter().enumerate() {
            cells[slot] = admissible[pos];
        }
        let mask = DomainMask::from_cells(grid.clone(), &cells)?;
        let energy = torsion::solve_torsion(grid, &mask, tol)?.energy();
        if energy < best_energy {
            best_energy = energy;
            best_mask = Some(mask.clone());
            ties.retain(|&(_, e)| e <= best_energy + best_energy.abs() * 1e-9);
        }
        if energy <= best_energy + best_energy.abs() * 1e-9 {
            ties.push((mask, energy));
        }
        done = !next_combination(&mut choice, n);
    }
    debug_assert_eq!(enumerated, combinations);
    let minimizers = ties
        .into_iter()
        .filter(|&(_, e)| e <= best_energy + best_energy.abs() * 1e-9)
        .map(|(m, _)| m)
        .collect();
    Ok(BruteForceOutcome {
        mask: best_mask.expect("at least one combination"),
        energy: best_energy,
        minimizers,
        enumerated,
    })
}

/// Advance to the next k-subset of {0, …, n−1} in lexicographic order.
fn next_combination(choice: &mut [usize], n: usize) -> bool {
    let k = choice.len();
    let mut slot = k;
    while slot > 0 {
        slot -= 1;
        if choice[slot] != slot + n - k {
            choice[slot] += 1;
            for t in slot + 1..k {
                choice[t] = choice[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The exhaustive strategy; the target volume fixes k.
pub struct BruteForce;

impl ShapeOptimizer for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn optimize(
        &self,
        grid: &Arc<CylinderGrid>,
        _init: &DomainMask,
        target_volume: f64,
        config: &OptimizerConfig,
    ) -> Result<OptimizerReport> {
        let k = (target_volume / grid.cell_volume()).round() as usize;
        let outcome = brute_force_min(grid, k, config.enum_cap)?;
        let solution = torsion::solve_torsion(grid, &outcome.mask, config.solver_tol)?;
        let histories = Histories {
            energy: vec![outcome.energy],
            volume: vec![outcome.mask.volume()],
            ..Histories::default()
        };
        finalize_report(
            "brute",
            grid,
            &outcome.mask,
            &solution,
            None,
            outcome.mask.volume(),
            config,
            histories,
            true,
            0,
            0,
            solution.iterations(),
        )
    }
}
