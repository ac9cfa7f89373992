//! Basin-of-attraction maps: classify the attractor reached from a grid of
//! initial conditions.
//!
//! Cells are sampled at their centers and integrated independently, so the
//! grid parallelizes over cells with bit-identical results regardless of
//! execution order.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{classify_attractor, integrate, AttractorId, AttractorKey, IntegratorConfig};
use crate::equilibria::{all_equilibria, Label};
use crate::model::{ModelParams, State};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasinError {
    #[error("grid specification invalid: {0}")]
    InvalidGrid(String),
}

/// Rectangular grid of initial conditions with one attractor per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinGrid {
    pub n_range: (f64, f64),
    pub p_range: (f64, f64),
    /// `(cells along N, cells along P)`.
    pub resolution: (usize, usize),
    /// Row-major over N: `cells[i * nP + j]` holds the cell at `(n_i, p_j)`.
    pub cells: Vec<AttractorId>,
    pub params: ModelParams,
}

impl BasinGrid {
    pub fn cell(&self, i: usize, j: usize) -> &AttractorId {
        &self.cells[i * self.resolution.1 + j]
    }

    /// Center coordinate of cell `(i, j)`.
    pub fn center(&self, i: usize, j: usize) -> State {
        State {
            n: cell_center(self.n_range, self.resolution.0, i),
            p: cell_center(self.p_range, self.resolution.1, j),
        }
    }

    /// Fraction of cells whose attractor matches `key`.
    pub fn share(&self, key: AttractorKey) -> f64 {
        let hits = self.cells.iter().filter(|c| c.key() == key).count();
        hits as f64 / self.cells.len() as f64
    }

    /// CSV export with header `N0,P0,attractor_label`, one row per cell in
    /// row-major N-then-P order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "N0,P0,attractor_label")?;
        for i in 0..self.resolution.0 {
            for j in 0..self.resolution.1 {
                let c = self.center(i, j);
                writeln!(out, "{},{},{}", c.n, c.p, self.cell(i, j).key())?;
            }
        }
        Ok(())
    }
}

fn cell_center(range: (f64, f64), cells: usize, index: usize) -> f64 {
    range.0 + (index as f64 + 0.5) * (range.1 - range.0) / cells as f64
}

/// Integrate and classify every cell center of the grid.
///
/// Cells starting exactly on the predator axis (`N = 0`) collapse to the
/// origin analytically (`dN/dt = 0` and `dP/dt = -delta P` there) and are
/// classified without integration. Integrator failures mark the cell
/// `Undetermined`.
pub fn compute_basin(
    p: &ModelParams,
    n_range: (f64, f64),
    p_range: (f64, f64),
    resolution: (usize, usize),
    cfg: &IntegratorConfig,
) -> Result<BasinGrid, BasinError> {
    for (name, (lo, hi)) in [("N", n_range), ("P", p_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
            return Err(BasinError::InvalidGrid(format!(
                "{name} range must satisfy 0 <= lo <= hi (got [{lo}, {hi}])"
            )));
        }
    }
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(BasinError::InvalidGrid(format!(
            "resolution must be at least 2x2 (got {}x{})",
            resolution.0, resolution.1
        )));
    }
    cfg.validate().map_err(|e| BasinError::InvalidGrid(e.to_string()))?;

    let eqs = all_equilibria(p);
    let origin = *eqs.find(Label::E0).expect("origin always present");
    let (n_cells, p_cells) = resolution;

    let cells: Vec<AttractorId> = (0..n_cells * p_cells)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / p_cells, idx % p_cells);
            let s0 = State {
                n: cell_center(n_range, n_cells, i),
                p: cell_center(p_range, p_cells, j),
            };
            if s0.n == 0.0 {
                return AttractorId::FixedPoint { label: origin.label, state: origin.state };
            }
            match integrate(p, s0, cfg) {
                Ok(traj) => classify_attractor(p, &traj, &eqs),
                Err(_) => AttractorId::Undetermined,
            }
        })
        .collect();

    Ok(BasinGrid { n_range, p_range, resolution, cells, params: *p })
}

/// Share of cells per distinct attractor, plus the basin-boundary cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinReport {
    pub total_cells: usize,
    /// `(attractor, cell count, share)` sorted by descending share, ties by key.
    pub attractors: Vec<(AttractorKey, usize, f64)>,
    /// Cells with at least one differently-classified 4-neighbor.
    pub boundary_cells: Vec<(usize, usize)>,
}

pub fn bistability_report(grid: &BasinGrid) -> BasinReport {
    let (n_cells, p_cells) = grid.resolution;
    let total = n_cells * p_cells;

    let mut counts: std::collections::BTreeMap<AttractorKey, usize> =
        std::collections::BTreeMap::new();
    for cell in &grid.cells {
        *counts.entry(cell.key()).or_insert(0) += 1;
    }
    let mut attractors: Vec<(AttractorKey, usize, f64)> = counts
        .into_iter()
        .map(|(k, c)| (k, c, c as f64 / total as f64))
        .collect();
    attractors.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut boundary_cells = Vec::new();
    for i in 0..n_cells {
        for j in 0..p_cells {
            let here = grid.cell(i, j).key();
            let mut neighbors = Vec::with_capacity(4);
            if i > 0 {
                neighbors.push((i - 1, j));
            }
            if i + 1 < n_cells {
                neighbors.push((i + 1, j));
            }
            if j > 0 {
                neighbors.push((i, j - 1));
            }
            if j + 1 < p_cells {
                neighbors.push((i, j + 1));
            }
            if neighbors.iter().any(|&(a, b)| grid.cell(a, b).key() != here) {
                boundary_cells.push((i, j));
            }
        }
    }

    BasinReport { total_cells: total, attractors, boundary_cells }
}
