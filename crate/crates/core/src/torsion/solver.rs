//! Cell-centered finite-volume discretization of the mixed torsion problem
//! and a preconditioned conjugate-gradient solve.
//!
//! Unknowns live only on inside cells. Fluxes are two-point across
//! inside/inside faces, half-cell Dirichlet (face value 0, transmissibility
//! 2/h per unit face area) across free-boundary faces, and zero across
//! lateral walls and, in half mode, the symmetry plane x_N = 0. With the
//! unit source this yields an SPD system with off-diagonal entries equal to
//! −1 after scaling, so only the diagonal and the adjacency are stored.

use crate::error::{Error, Result};
use crate::geometry::{DomainMask, Mode};

pub(crate) struct System {
    /// Linear cell index per unknown, ascending.
    pub cells: Vec<usize>,
    pub diag: Vec<f64>,
    /// Up to four inside neighbors per unknown (-1 = none).
    pub nbrs: Vec<[i32; 4]>,
    /// Constant right-hand side entry (the cell volume).
    pub rhs: f64,
}

pub(crate) fn assemble(mask: &DomainMask) -> Result<System> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid();
    let nx = grid.nx();
    let cells: Vec<usize> = mask.inside_cells().collect();
    let mut unknown_of = vec![-1i32; grid.cell_count()];
    for (u, &c) in cells.iter().enumerate() {
        unknown_of[c] = u as i32;
    }
    let n = cells.len();
    let mut diag = vec![0.0f64; n];
    let mut nbrs = vec![[-1i32; 4]; n];
    for (u, &c) in cells.iter().enumerate() {
        let (i, j) = grid.coords(c);
        debug_assert!(!grid.touches_cap(j), "mask occupies the cap clearance layer");
        let mut slot = 0usize;
        let mut visit = |inside_nbr: Option<usize>, neumann: bool| {
            if neumann {
                return;
            }
            match inside_nbr {
                Some(nc) => {
                    let un = unknown_of[nc];
                    if un >= 0 {
                        diag[u] += 1.0;
                        nbrs[u][slot] = un;
                        slot += 1;
                    } else {
                        diag[u] += 2.0; // half-cell Dirichlet
                    }
                }
                None => diag[u] += 2.0,
            }
        };
        // x-low face: wall when i == 0
        if i == 0 {
            visit(None, true);
        } else {
            visit(Some(c - 1), false);
        }
        // x-high face: wall when i == nx-1
        if i + 1 == nx {
            visit(None, true);
        } else {
            visit(Some(c + 1), false);
        }
        // z-low face: symmetry plane in half mode when j == 0
        if j == 0 {
            debug_assert_eq!(grid.mode(), Mode::Half);
            visit(None, true);
        } else {
            visit(Some(c - nx), false);
        }
        // z-high face: the clearance layer guarantees j+1 < nz
        visit(Some(c + nx), false);
    }
    Ok(System {
        cells,
        diag,
        nbrs,
        rhs: grid.cell_volume(),
    })
}

impl System {
    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for u in 0..self.n() {
            let mut acc = self.diag[u] * x[u];
            for &nb in &self.nbrs[u] {
                if nb >= 0 {
                    acc -= x[nb as usize];
                }
            }
            y[u] = acc;
        }
    }

    /// Quadratic form xᵀAx, the discrete Dirichlet energy of `x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n()];
        self.matvec(x, &mut y);
        dot(x, &y)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for the assembled system.
///
/// The iteration cap is 50·√n with a floor of 200 and a hard ceiling.
pub(crate) fn pcg(sys: &System, tol: f64, x0: Option<Vec<f64>>) -> Result<PcgOutcome> {
    let n = sys.n();
    let cap = ((50.0 * (n as f64).sqrt()) as usize).clamp(200, 100_000);
    let b_norm = sys.rhs * (n as f64).sqrt();
    let mut x = x0.unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    sys.matvec(&x, &mut r);
    for v in r.iter_mut() {
        *v = sys.rhs - *v;
    }
    let mut z: Vec<f64> = r.iter().zip(&sys.diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    let mut iterations = 0usize;
    while rel > tol && iterations < cap {
        sys.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / sys.diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        iterations += 1;
    }
    if rel > tol {
        return Err(Error::NonConvergence { residual: rel, iterations });
    }
    Ok(PcgOutcome { x, iterations, rel_residual: rel })
}
