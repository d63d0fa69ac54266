//! Kernel-level facade: constrained DPPs with validation, counting and
//! sampling.

use nalgebra::DMatrix;

use crate::counting::{family_count, CountConfig, Family, Mass};
use crate::error::{Error, Result};
use crate::genpoly::{self, dpp_oracle, dpp_oracle_from_kernel, FeatureMatrix, GenPolyOracle, Kernel};
pub use crate::genpoly::PsdReport;
use crate::sampling::{SampleOutcome, Sampler};

/// Checks symmetry and positive semidefiniteness within `τ_psd·‖L‖_max`.
pub fn validate_psd(l: &DMatrix<f64>) -> Result<PsdReport> {
    genpoly::check_psd(l)
}

/// `μ(S) = det(L_{S,S})` restricted to a family.
#[derive(Clone, Debug)]
pub struct ConstrainedDpp {
    kernel: Option<Kernel>,
    factor: Option<FeatureMatrix>,
    family: Family,
    oracle: GenPolyOracle,
}

impl ConstrainedDpp {
    /// Factors `L` internally; exact evaluation uses the kernel entries.
    pub fn from_kernel(kernel: Kernel, family: Family) -> Result<Self> {
        check_arity(kernel.m(), &family)?;
        let oracle = dpp_oracle_from_kernel(&kernel)?;
        let factor = genpoly::cholesky_factor(&kernel)?;
        Ok(ConstrainedDpp {
            kernel: Some(kernel),
            factor: Some(factor),
            family,
            oracle,
        })
    }

    /// Uses `V` directly, which is cheaper when `n ≪ m`.
    pub fn from_factor(factor: FeatureMatrix, family: Family) -> Result<Self> {
        check_arity(factor.m(), &family)?;
        Ok(ConstrainedDpp {
            kernel: None,
            oracle: dpp_oracle(&factor),
            factor: Some(factor),
            family,
        })
    }

    pub fn m(&self) -> usize {
        self.oracle.arity()
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_ref()
    }

    pub fn factor(&self) -> Option<&FeatureMatrix> {
        self.factor.as_ref()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn oracle(&self) -> &GenPolyOracle {
        &self.oracle
    }

    pub fn sampler(&self, cfg: &CountConfig) -> Result<Sampler> {
        Sampler::new(self.oracle.clone(), &self.family, *cfg)
    }
}

fn check_arity(m: usize, family: &Family) -> Result<()> {
    if family.m() != m {
        return Err(Error::DimensionMismatch(format!(
            "family over {} elements, kernel over {m}",
            family.m()
        )));
    }
    Ok(())
}

/// `Σ_{T∈𝒞} det(L_{T,T})`.
pub fn dpp_count(dpp: &ConstrainedDpp, cfg: &CountConfig) -> Result<Mass> {
    family_count(&dpp.oracle, &dpp.family, cfg)
}

/// `n` independent draws with seeds derived from `seed`. Every draw is
/// checked against the family.
pub fn dpp_sample(dpp: &ConstrainedDpp, seed: u64, n: usize, cfg: &CountConfig) -> Result<Vec<SampleOutcome>> {
    let outcomes = dpp.sampler(cfg)?.sample_many(seed, n)?;
    for out in &outcomes {
        assert!(
            dpp.family.contains(&out.subset),
            "sampled set {:?} violates the family",
            out.subset
        );
    }
    Ok(outcomes)
}
