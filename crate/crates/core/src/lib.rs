//! Eigenvalue tracking for parametrized Hermitian families, Riesz spectral
//! projectors by contour quadrature, and Hölder regularity certificates for
//! continuous eigenvalue selections.

pub mod cli;
pub mod error;
pub mod family;
pub mod hermitian;
pub mod projector;
pub mod regularity;
pub mod rng;
pub mod tracking;

pub use error::{Result, SpectraError};
pub use family::{ParamFamily, SmoothCurve};
pub use hermitian::{eig_ordered, op_norm, weyl_check, EigenDecomposition, HermitianMatrix, WeylReport};
pub use projector::{Contour, SpectralProjector};
pub use regularity::{HolderCertificate, PairPolicy};
pub use tracking::{Branch, CrossingEvent, EigenSample, Strategy};
