//! Numerical laboratory for local and global smoothing estimates of
//! dispersive equations `i∂_t u + Φ(D)u = 0`.
//!
//! The floating-point modules are generic over [`scalar::Real`] (`f32` or
//! `f64`); the sparse-decomposition geometry uses exact integers. The `*64`
//! aliases below fix the scalar to `f64`, which every experiment uses.

pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod kslf;
pub mod norms;
pub mod opnorm;
pub mod propagator;
pub mod recipes;
pub mod scalar;
pub mod sparse;
pub mod symbols;
pub mod wavepackets;

pub use error::{Error, Result};
pub use field::{Field, SpacetimeField, Spectrum};
pub use grid::Grid;
pub use propagator::SectorBump;
pub use recipes::{FieldRecipe, Region};
pub use scalar::Real;
pub use symbols::SymbolSpec;

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Spacetime64 = SpacetimeField<f64>;
pub type Symbol64 = SymbolSpec<f64>;
pub type Bump64 = SectorBump<f64>;
pub type Complex64 = num_complex::Complex<f64>;
