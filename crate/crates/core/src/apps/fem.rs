//! Lumped-mass FEM systems `M u' = -K u + F`, solved pointwise as
//! `u(t) = e^{tA} u0 + int_0^t e^{sA} M^{-1} F ds` with `A = -M^{-1} K` and
//! Simpson's rule in time on the same paths.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_matrix_market, read_vector};
use crate::mlmc::{mlmc_driver, LevelStats, MlmcConfig, MlmcResult, Problem};
use crate::spmat::{ChainDecomposition, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct FemSystem {
    pub mass_diag: Vec<f64>,
    pub stiffness: SparseMatrix,
    pub load: Vec<f64>,
    pub u0: Vec<f64>,
}

impl FemSystem {
    pub fn new(mass_diag: Vec<f64>, stiffness: SparseMatrix, load: Vec<f64>, u0: Vec<f64>) -> Result<Self> {
        let n = mass_diag.len();
        if !stiffness.is_square() || stiffness.n() != n || load.len() != n || u0.len() != n {
            return Err(Error::Dimension(format!(
                "mass {n}, stiffness {}x{}, load {}, u0 {}",
                stiffness.nrows(),
                stiffness.ncols(),
                load.len(),
                u0.len()
            )));
        }
        if let Some(k) = mass_diag.iter().position(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "lumped mass must be positive; m[{k}] = {}",
                mass_diag[k]
            )));
        }
        Ok(Self {
            mass_diag,
            stiffness,
            load,
            u0,
        })
    }

    pub fn n(&self) -> usize {
        self.mass_diag.len()
    }

    /// `-M^{-1} K`, by row scaling.
    pub fn generator(&self) -> SparseMatrix {
        let scale: Vec<f64> = self.mass_diag.iter().map(|m| -1.0 / m).collect();
        self.stiffness.scale_rows(&scale).expect("dimensions validated")
    }

    /// `M^{-1} F`.
    pub fn scaled_load(&self) -> Vec<f64> {
        self.load.iter().zip(&self.mass_diag).map(|(f, m)| f / m).collect()
    }
}

/// Reads a lumped system. The mass file must be diagonal.
pub fn load_fem_system(
    mass_path: impl AsRef<Path>,
    stiffness_path: impl AsRef<Path>,
    load_path: impl AsRef<Path>,
    u0_path: impl AsRef<Path>,
) -> Result<FemSystem> {
    let mass = read_matrix_market(mass_path)?;
    if !mass.is_square() {
        return Err(Error::Dimension("mass matrix must be square".into()));
    }
    if let Some((i, j, _)) = mass.triplets().find(|&(i, j, _)| i != j) {
        return Err(Error::Unsupported(format!(
            "mass matrix is not lumped (entry ({}, {}) off the diagonal)",
            i + 1,
            j + 1
        )));
    }
    let mass_diag = (0..mass.n()).map(|i| mass.get(i, i)).collect();
    FemSystem::new(
        mass_diag,
        read_matrix_market(stiffness_path)?,
        read_vector(load_path)?,
        read_vector(u0_path)?,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvDiffResult {
    pub result: MlmcResult,
    /// Remaining time-discretization error of the forcing integral, from the
    /// decay of its level corrections.
    pub quadrature_error: f64,
}

/// Solution at `node` and time `t`.
pub fn solve_convdiff_point(sys: &FemSystem, node: usize, t: f64, config: &MlmcConfig) -> Result<ConvDiffResult> {
    if node >= sys.n() {
        return Err(Error::IndexOutOfRange {
            index: node,
            dim: sys.n(),
        });
    }
    if !(t > 0.0) {
        return Err(Error::Config(format!("t must be > 0, got {t}")));
    }
    let dec = ChainDecomposition::decompose(&sys.generator())?;
    let forcing = sys.scaled_load();
    let result = mlmc_driver(
        &Problem::Fem {
            dec: &dec,
            u0: &sys.u0,
            forcing: &forcing,
            i: node,
            t,
        },
        config,
    )?;
    let corrections: Vec<f64> = result.levels[1..].iter().map(LevelStats::forcing_mean).collect();
    let quadrature_error = match corrections.as_slice() {
        [.., prev, last] => last.abs().max(prev.abs() / 4.0) / 3.0,
        _ => 0.0,
    };
    Ok(ConvDiffResult {
        result,
        quadrature_error,
    })
}
