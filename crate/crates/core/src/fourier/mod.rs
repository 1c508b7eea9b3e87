//! Torus Fourier inversion for first-homology laws, holonomy determinants for
//! finite groups, and mod-`p` nilpotent representations for second homology.

pub mod holonomy;
pub mod nilpotent;
pub mod torus;

pub use holonomy::{holonomy_class_intensities, holonomy_log_det, FiniteGroup, GroupConnection, UnitaryConnection};
pub use nilpotent::{homology2_field_law, homology2_intensities, homology2_intensity, HeisenbergElement, NilpotentRep};
pub use torus::{
    homology1_field_law, homology1_intensity, jacobian_volume_check, twisted_mass, twisted_matrix, TorusGrid,
};
