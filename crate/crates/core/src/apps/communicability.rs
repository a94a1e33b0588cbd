use crate::error::Result;
use crate::mlmc::{mlmc_driver, MlmcConfig, MlmcResult, Problem};
use crate::paths::ForwardSource;
use crate::spmat::{ChainDecomposition, SparseMatrix};

/// Total communicability `(1, e^{beta A} 1)`, by forward sampling on `A^T`.
/// `beta` defaults to `1 / d_max`.
pub fn total_communicability(a: &SparseMatrix, beta: Option<f64>, config: &MlmcConfig) -> Result<MlmcResult> {
    let dec = ChainDecomposition::decompose(a)?;
    let beta = match beta {
        Some(b) => b,
        None => dec.spectral_scale()?,
    };
    let dec_t = if a.is_symmetric() {
        dec
    } else {
        ChainDecomposition::decompose(&a.transpose())?
    };
    let source = ForwardSource::new(&vec![1.0; a.n()])?;
    mlmc_driver(
        &Problem::Forward {
            dec_t: &dec_t,
            source: &source,
            beta,
        },
        config,
    )
}

/// Communicability of one node, `(e^{beta A} 1)_i`.
pub fn node_communicability(
    a: &SparseMatrix,
    i: usize,
    beta: Option<f64>,
    config: &MlmcConfig,
) -> Result<MlmcResult> {
    let dec = ChainDecomposition::decompose(a)?;
    let beta = match beta {
        Some(b) => b,
        None => dec.spectral_scale()?,
    };
    let ones = vec![1.0; a.n()];
    mlmc_driver(
        &Problem::Entry {
            dec: &dec,
            u: &ones,
            i,
            beta,
        },
        config,
    )
}
