pub mod assemble;
pub mod solve;
pub mod sparse;

pub use assemble::{
    assemble_coeff_stiffness, assemble_edge_weighted_free_boundary_mass,
    assemble_free_boundary_load, assemble_free_boundary_mass, assemble_mass, assemble_stiffness,
    assemble_weighted_free_boundary_mass, p1_gradient, vector_field_jacobians,
    weighted_mass_energy,
};
pub use solve::{
    eliminate_dirichlet, solve_complex_system, solve_spd, solve_spd_multi, ComplexFactor,
    ComplexNodalField, DirichletBc, RESIDUAL_REL,
};
pub use sparse::CsrMatrix;
