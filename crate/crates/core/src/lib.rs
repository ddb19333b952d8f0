//! Archimedean copulas whose generators are learned as layered mixtures of
//! negative exponentials.
//!
//! The generator network ([`network::GeneratorNetwork`]) is completely
//! monotone by construction, so the copula it defines is valid in every
//! dimension. On top of it the crate provides exact derivative stacks
//! ([`series`]), generator inversion ([`inversion`]), the probabilistic
//! query surface ([`copula::CopulaModel`]), likelihood training
//! ([`training`]), exact sampling ([`sampling`]) and closed-form reference
//! families ([`families`]).
//!
//! ```
//! use acnet::{CopulaModel, GeneratorNetwork};
//!
//! let net = GeneratorNetwork::init(&[10, 10], 7).unwrap();
//! let model = CopulaModel::new(2, net).unwrap();
//! let c = model.cdf(&[0.3, 0.8]).unwrap();
//! assert!(c <= 0.3 && c >= 0.1);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod copula;
pub mod data;
pub mod error;
pub mod families;
pub mod inversion;
pub mod io;
pub mod network;
pub mod rng;
pub mod sampling;
pub mod series;
pub mod training;

pub use copula::{ConditioningQuery, CopulaModel, EvalSettings, Generator, Rectangle};
pub use data::{CensoredDataset, Dataset};
pub use error::{Error, Result};
pub use families::{FamilyKind, ParametricFamily};
pub use inversion::{invert, InverseResult, InversionSettings};
pub use io::ModelFile;
pub use network::{GeneratorNetwork, MixtureRepresentation};
pub use sampling::{sample_m, sample_u, MixingSample};
pub use series::{SeriesValue, WeightGradient};
pub use training::{fit, loss_censored, loss_pointwise, TrainConfig, TrainData, TrainReport};
