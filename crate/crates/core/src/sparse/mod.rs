//! Sparse decompositions of cube sets, the surface measure of a patch of the
//! characteristic hypersurface and the restriction/decoupling estimates.

pub mod cubes;
pub mod decoupling;
pub mod family;
pub mod surface;

pub use cubes::{columns_by_height, dyadic_floor, random_cube_set, Column, CubeSet};
pub use family::{
    audit, epsilon_removal_delta, gamma, is_sparse, sparse_decompose, surface_decay_rate, Audit, Exponent, Level,
    SparseDecomposition, SparseFamily, COVER_CONSTANT, MAX_SCALE_BITS,
};
pub use surface::{
    extension, normal_decay_slope, restriction, spacetime_inner, surface_inner, Restriction, SurfacePatch,
};
pub use decoupling::{
    decoupling_check, fubini_constant, random_ball_data, random_sparse_family, BallData, DecouplingReport,
    SINGLE_BALL_CONSTANT,
};
