//! Probabilities that `n` random nonzero ideals of a number ring are
//! `k`-wise relatively `r`-prime.
//!
//! The closed form is an Euler product over prime ideals ([`product`]). The
//! rest of the crate exists to check it: exact enumeration of ideals of
//! bounded norm ([`ideals`]), the characteristic function and its Möbius
//! transform ([`classify`]), exact and sampled counts ([`experiment`]), and
//! the combinatorial identities linking them ([`combinatorics`]).

pub mod classify;
pub mod combinatorics;
pub mod error;
pub mod experiment;
pub mod field;
pub mod ideals;
pub mod params;
pub mod polymod;
pub mod product;
pub mod splitting;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldSpec, NumberField};
pub use ideals::{IdealFactorization, IdealUniverse, PrimeIdealId};
pub use params::Params;
pub use product::{probability, Precision, ProbabilityQuery, ProbabilityResult};
pub use splitting::{split_prime, PrimeClass, PrimeSplitting};
