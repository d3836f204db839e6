//! Forward and adjoint Robin problems of the complex boundary coupling.
//!
//! Forward: -lap u = 0, u = 1 on the fixed boundary, du/dn + iu = lambda on
//! the free boundary. The imaginary part u2 measures how far the free
//! boundary is from satisfying both Bernoulli conditions; the cost is its
//! squared L2 mass over the domain.
//!
//! Adjoint: -lap p = u2, p = 0 on the fixed boundary, dp/dn - ip = 0 on the
//! free boundary.

use crate::error::SolveError;
use crate::fem::{
    assemble_free_boundary_load, assemble_free_boundary_mass, assemble_mass, assemble_stiffness,
    solve_complex_system, ComplexFactor, ComplexNodalField, CsrMatrix,
};
use crate::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct StateSolution {
    pub field: ComplexNodalField,
}

#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub field: ComplexNodalField,
}

/// Restrict a nodal field to the free loop, in loop order.
pub fn free_loop_values(mesh: &Mesh, nodal: &[f64]) -> Vec<f64> {
    mesh.free_loop.iter().map(|&v| nodal[v]).collect()
}

pub fn solve_state(mesh: &Mesh, lambda: f64) -> Result<StateSolution, SolveError> {
    let k = assemble_stiffness(mesh);
    let b = assemble_free_boundary_mass(mesh);
    solve_state_with(mesh, &k, &b, lambda)
}

/// Same as `solve_state` with caller-assembled operators, so one assembly can
/// feed several solves.
pub fn solve_state_with(
    mesh: &Mesh,
    k: &CsrMatrix,
    b: &CsrMatrix,
    lambda: f64,
) -> Result<StateSolution, SolveError> {
    let ones = vec![1.0; mesh.free_loop.len()];
    let rhs_re: Vec<f64> =
        assemble_free_boundary_load(mesh, &ones).into_iter().map(|v| lambda * v).collect();
    let rhs_im = vec![0.0; mesh.n_vertices()];
    let field = solve_complex_system(k, b, &rhs_re, &rhs_im, &mesh.fixed_loop, (1.0, 0.0), 1.0)?;
    Ok(StateSolution { field })
}

/// State and adjoint through one factorization: the adjoint operator is the
/// complex conjugate of the forward one, so both solves share the block LU.
pub fn solve_state_adjoint_with(
    mesh: &Mesh,
    k: &CsrMatrix,
    b: &CsrMatrix,
    m: &CsrMatrix,
    lambda: f64,
) -> Result<(StateSolution, AdjointSolution), SolveError> {
    let shared = ComplexFactor::new(k, b, &mesh.fixed_loop)?;
    let ones = vec![1.0; mesh.free_loop.len()];
    let rhs_re: Vec<f64> =
        assemble_free_boundary_load(mesh, &ones).into_iter().map(|v| lambda * v).collect();
    let zero = vec![0.0; mesh.n_vertices()];
    let state = StateSolution { field: shared.solve(&rhs_re, &zero, (1.0, 0.0), 1.0)? };
    let adj_rhs = m.matvec(&state.field.im);
    let adjoint = AdjointSolution { field: shared.solve(&adj_rhs, &zero, (0.0, 0.0), -1.0)? };
    Ok((state, adjoint))
}

pub fn solve_adjoint(mesh: &Mesh, state: &StateSolution) -> Result<AdjointSolution, SolveError> {
    let k = assemble_stiffness(mesh);
    let b = assemble_free_boundary_mass(mesh);
    let m = assemble_mass(mesh);
    solve_adjoint_with(mesh, &k, &b, &m, state)
}

pub fn solve_adjoint_with(
    mesh: &Mesh,
    k: &CsrMatrix,
    b: &CsrMatrix,
    m: &CsrMatrix,
    state: &StateSolution,
) -> Result<AdjointSolution, SolveError> {
    let rhs_re = m.matvec(&state.field.im);
    let rhs_im = vec![0.0; mesh.n_vertices()];
    let field = solve_complex_system(k, b, &rhs_re, &rhs_im, &mesh.fixed_loop, (0.0, 0.0), -1.0)?;
    Ok(AdjointSolution { field })
}

/// J = 1/2 integral of u2^2 over the domain.
pub fn cost(mesh: &Mesh, state: &StateSolution) -> f64 {
    let m = assemble_mass(mesh);
    cost_with(&m, state)
}

pub fn cost_with(m: &CsrMatrix, state: &StateSolution) -> f64 {
    0.5 * m.bilinear(&state.field.im, &state.field.im)
}
