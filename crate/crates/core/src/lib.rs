//! Jacobi stability spectra of minimal hypersurfaces in the round sphere.
//!
//! The crate computes, for closed hypersurfaces `M^n ⊂ S^{n+1}` given by
//! parametrization charts:
//!
//! * first and second fundamental forms ([`geometry`]),
//! * discrete Laplace–Beltrami and Jacobi operators `L = Δ + |A|² + n`
//!   ([`operators`]),
//! * the first stability eigenvalue `λ₁` (with the convention `Lu = −λu`),
//!   Rayleigh quotients and pointwise Simons identity checks ([`spectrum`]),
//! * ball covers of synthetic singular sets and the cutoff functions built
//!   on them, with their gradient/Laplacian integral estimates ([`cutoff`]),
//! * local `L²` curvature bounds, the Schoen–Simon–Yau absorption constants
//!   and the minimal-cone stability table ([`estimates`]).
//!
//! Equators (`λ₁ = −n`) and Clifford hypersurfaces
//! `S^k(√(k/n)) × S^l(√(l/n))` (`λ₁ = −2n`) come with exact closed forms and
//! serve as the reference cases throughout.
//!
//! ```
//! use sphere_jacobi::geometry::{clifford_hypersurface, CliffordSpec};
//! use sphere_jacobi::operators::assemble_jacobi;
//! use sphere_jacobi::spectrum::{first_stability_eigenvalue, EigenSource};
//!
//! let torus = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
//! let op = assemble_jacobi(&torus, 16).unwrap();
//! let eig = first_stability_eigenvalue(EigenSource::Numeric(&op)).unwrap();
//! assert!((eig.lambda1 + 4.0).abs() < 1e-9);
//! ```

pub mod cli;
pub mod cutoff;
pub mod estimates;
pub mod fields;
pub mod geometry;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod spectrum;

pub use geometry::{
    clifford_hypersurface, equator, AmbientPoint, CliffordSpec, Family, GeometryError,
    ParametrizedHypersurface, ShapeData,
};
pub use operators::{assemble_jacobi, AnalyticSpectrum, DiscreteOperator, OperatorError};
pub use spectrum::{first_stability_eigenvalue, EigenResult, EigenSource, SpectrumError};
