//! Exact counting and sampling for constrained determinantal point processes
//! and regular-matroid bases.
//!
//! Every measure `μ` on subsets of a ground set `[m]` is accessed only through
//! an evaluation oracle for its generating polynomial
//! `g(x) = Σ_S μ(S) ∏_{i∈S} x_i`. Constrained counts are read off as
//! coefficients of substituted versions of `g`, recovered by interpolation;
//! exact sampling follows by sequential conditioning on those counts.
//!
//! Module map:
//!
//! * [`genpoly`]: measures, oracles and coordinate transformations.
//! * [`interp`]: coefficient recovery from evaluations (DFT or exact Lagrange).
//! * [`counting`]: budget, equality, set, linear-family and partition counting.
//! * [`sampling`]: exact sampler and the sampler-driven mass estimator.
//! * [`dpp`]: kernel-level facade with PSD validation.
//! * [`matroid`]: regular-matroid bases, graphic matroids and the
//!   perfect-matching to spanning-tree reduction.
//! * [`mixed`]: mixed discriminants and mixed characteristic polynomials.
//! * [`bruteforce`]: exhaustive enumeration oracles, independent of the engine.

pub mod bruteforce;
pub mod counting;
pub mod dpp;
pub mod error;
pub mod field;
pub mod genpoly;
pub mod interp;
pub mod linalg;
pub mod matroid;
pub mod mixed;
pub mod sampling;

pub use counting::{
    Allowed, BudgetConstraint, CountConfig, Family, LinearConstraint, LinearFamily, Mass,
    MassValue, PartitionFamily,
};
pub use error::{Error, Result};
pub use field::{Backend, Field, C64, Q};
pub use genpoly::{
    ExplicitSetFunction, FeatureMatrix, GenPoly, GenPolyOracle, Kernel, TransformProgram,
};
pub use matroid::{Graph, TUMatrix};
pub use mixed::{MatrixTuple, MixedCharCoeffs};
pub use sampling::{Probability, SampleOutcome, Sampler};
