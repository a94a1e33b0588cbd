//! Heat equation `u_t = lap(u)` on `[-delta, delta]^3` with zero Dirichlet
//! data, discretized by the 7-point stencil on interior nodes. The semi-
//! discrete solution is `exp(t / dx^2 * L) u0` with `L` the unit stencil
//! (`-6` on the diagonal, `1` per interior neighbour).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlmc::{mlmc_driver, MlmcConfig, MlmcResult, Problem};
use crate::spmat::{ChainDecomposition, SparseMatrix};

/// Uniform grid with `n_x` intervals per axis; nodes `1..n_x` on each axis
/// are interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    n_x: usize,
    delta: f64,
}

impl Grid3D {
    pub fn new(n_x: usize, delta: f64) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::Config(format!("n_x must be >= 2, got {n_x}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!("delta must be > 0, got {delta}")));
        }
        Ok(Self { n_x, delta })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.delta / self.n_x as f64
    }

    /// Interior nodes per axis.
    pub fn interior(&self) -> usize {
        self.n_x - 1
    }

    pub fn len(&self) -> usize {
        self.interior().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `n_x^2 / (4 delta^2) = 1 / dx^2`, the factor multiplying `t`.
    pub fn time_scale(&self) -> f64 {
        (self.n_x * self.n_x) as f64 / (4.0 * self.delta * self.delta)
    }

    /// Lexicographic index of interior node `(ix, iy, iz)`, each in
    /// `0..n_x - 1`, x fastest.
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let m = self.interior();
        ix + m * (iy + m * iz)
    }

    pub fn coords(&self, index: usize) -> [f64; 3] {
        let m = self.interior();
        let h = self.spacing();
        let axis = |k: usize| -self.delta + (k + 1) as f64 * h;
        [axis(index % m), axis((index / m) % m), axis(index / (m * m))]
    }

    /// Interior node nearest to `point`.
    pub fn nearest(&self, point: [f64; 3]) -> Result<usize> {
        let h = self.spacing();
        let mut k = [0usize; 3];
        for (axis, &x) in point.iter().enumerate() {
            if !(x.abs() <= self.delta) {
                return Err(Error::InvalidValue(format!(
                    "point {point:?} lies outside [-{d}, {d}]^3",
                    d = self.delta
                )));
            }
            let grid = ((x + self.delta) / h).round() as usize;
            k[axis] = grid.clamp(1, self.n_x - 1) - 1;
        }
        Ok(self.index(k[0], k[1], k[2]))
    }
}

/// Unit-stencil Laplacian, initial vector, and the time scale `1 / dx^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    pub a: SparseMatrix,
    pub u0: Vec<f64>,
    pub scale: f64,
}

pub fn build_heat3d(grid: &Grid3D, f: impl Fn([f64; 3]) -> f64) -> HeatProblem {
    let m = grid.interior();
    let mut entries = Vec::with_capacity(7 * grid.len());
    for iz in 0..m {
        for iy in 0..m {
            for ix in 0..m {
                let row = grid.index(ix, iy, iz);
                entries.push((row, row, -6.0));
                let mut link = |jx: usize, jy: usize, jz: usize| {
                    entries.push((row, grid.index(jx, jy, jz), 1.0));
                };
                if ix > 0 {
                    link(ix - 1, iy, iz);
                }
                if ix + 1 < m {
                    link(ix + 1, iy, iz);
                }
                if iy > 0 {
                    link(ix, iy - 1, iz);
                }
                if iy + 1 < m {
                    link(ix, iy + 1, iz);
                }
                if iz > 0 {
                    link(ix, iy, iz - 1);
                }
                if iz + 1 < m {
                    link(ix, iy, iz + 1);
                }
            }
        }
    }
    let n = grid.len();
    let a = SparseMatrix::from_triplets(n, n, entries).expect("stencil indices are interior");
    let u0 = (0..n).map(|k| f(grid.coords(k))).collect();
    HeatProblem {
        a,
        u0,
        scale: grid.time_scale(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSolution {
    pub node: usize,
    pub coords: [f64; 3],
    pub beta: f64,
    pub result: MlmcResult,
}

/// Solution at the interior node nearest `point` at time `t`.
pub fn solve_heat_point(
    grid: &Grid3D,
    f: impl Fn([f64; 3]) -> f64,
    point: [f64; 3],
    t: f64,
    config: &MlmcConfig,
) -> Result<HeatSolution> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("t must be > 0, got {t}")));
    }
    let node = grid.nearest(point)?;
    let heat = build_heat3d(grid, f);
    let dec = ChainDecomposition::decompose(&heat.a)?;
    let beta = t * heat.scale;
    let result = mlmc_driver(
        &Problem::Entry {
            dec: &dec,
            u: &heat.u0,
            i: node,
            beta,
        },
        config,
    )?;
    Ok(HeatSolution {
        node,
        coords: grid.coords(node),
        beta,
        result,
    })
}
