//! Offspring-law algebra, spectral analysis, scaling constants and tilting.

pub mod config;
pub mod constants;
pub mod family;
pub mod law;
pub mod spectral;
pub mod tilt;

pub use config::{load_family, parse_family, preset, preset_names, FamilyDoc};
pub use constants::{
    flattened_moments, projection, q_matrices, scaling_constant, sigma2, FamilyConstants,
    FlattenedMoments, ProjectedLaw, ScalingMode,
};
pub use family::OffspringFamily;
pub use law::{OffspringLaw, TypedWord};
pub use spectral::{
    classify, classify_family, mean_matrix, perron_vectors, spectral_radius, Criticality,
    PerronVectors, SpectralProfile,
};
pub use tilt::{
    solve_tilt, tilt, tilted_mean_formula, TiltParams, TiltSolution, TiltSolverOptions,
};
