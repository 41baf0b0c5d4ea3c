pub mod amalgam;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod forms;
pub mod invariants;
pub mod isometries;
pub mod liecone;
pub mod matrix;
pub mod normalform;
pub mod spectral;
pub mod par;
pub mod poly;
pub mod rational;
pub mod salem;

pub use config::Config;
pub use error::{Error, Result};
pub use matrix::{QMatrix, QVector, Subspace};
pub use par::Execution;
pub use poly::Poly;
pub use rational::Q;
pub use forms::{QForm, Signature};
pub use isometries::{LatticeIsometry, LinearIsometry, TorusIsometry};
pub use spectral::{IsoType, JordanChevalley};
pub use dynamics::{StableData, TorusPoint};
pub use invariants::{AverageResult, SplitResult};
pub use liecone::LieAlgebraPresentation;
pub use amalgam::PointFrame;
pub use salem::{FactorTag, PolyClassification};
