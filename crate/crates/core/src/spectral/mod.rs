//! Periodic-lattice spectral engine: fields on `[0, L)^n`, free propagation, multipliers,
//! angular projections and mixed space-time norms.

mod angular;
mod decay;
mod field;
mod io;
mod multiplier;

pub use angular::{angular_project, angular_weight, real_spherical_harmonic, HARMONIC_RADIAL_DEGREE};
pub use decay::{decay_data, dispersive_decay_slope, max_group_velocity, DecayGrid, DecayResult};
pub use field::{propagate, propagate_series, spacetime_norm, GridField, SpaceTimeField};
pub use io::{read_field, write_field, FieldFile};
pub use multiplier::{
    apply_multiplier, apply_spacetime, cap_centres, dyadic_family, hann_window, windowed, MultiplierSpec,
};
