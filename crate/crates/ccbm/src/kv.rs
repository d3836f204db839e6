//! Kohn-Vogelius reference: two real potentials that agree only when the
//! free boundary is correct, and the energy gap between them.

use crate::error::SolveError;
use crate::fem::{
    assemble_free_boundary_load, assemble_stiffness, solve_spd, CsrMatrix, DirichletBc,
};
use crate::mesh::Mesh;

/// Mixed and pure-Dirichlet potentials on the same mesh.
#[derive(Debug, Clone)]
pub struct KvPair {
    /// u = 1 on the fixed boundary, du/dn = lambda on the free boundary.
    pub u_neumann: Vec<f64>,
    /// u = 1 on the fixed boundary, u = 0 on the free boundary.
    pub u_dirichlet: Vec<f64>,
}

pub fn solve_kv_pair(mesh: &Mesh, lambda: f64) -> Result<KvPair, SolveError> {
    let k = assemble_stiffness(mesh);
    solve_kv_pair_with(mesh, &k, lambda)
}

pub fn solve_kv_pair_with(mesh: &Mesh, k: &CsrMatrix, lambda: f64) -> Result<KvPair, SolveError> {
    let ones = vec![1.0; mesh.free_loop.len()];
    let rhs_n: Vec<f64> =
        assemble_free_boundary_load(mesh, &ones).into_iter().map(|v| lambda * v).collect();
    let bc_fixed: Vec<DirichletBc> =
        mesh.fixed_loop.iter().map(|&v| DirichletBc { node: v, value: 1.0 }).collect();
    let u_neumann = solve_spd(k, &rhs_n, &bc_fixed)?;

    let mut bc_both = bc_fixed;
    bc_both.extend(mesh.free_loop.iter().map(|&v| DirichletBc { node: v, value: 0.0 }));
    let u_dirichlet = solve_spd(k, &vec![0.0; mesh.n_vertices()], &bc_both)?;

    Ok(KvPair { u_neumann, u_dirichlet })
}

/// J_KV = 1/2 integral of |grad (uN - uD)|^2.
pub fn kv_cost(mesh: &Mesh, pair: &KvPair) -> f64 {
    let k = assemble_stiffness(mesh);
    kv_cost_with(&k, pair)
}

pub fn kv_cost_with(k: &CsrMatrix, pair: &KvPair) -> f64 {
    let d: Vec<f64> = pair.u_neumann.iter().zip(&pair.u_dirichlet).map(|(a, b)| a - b).collect();
    0.5 * k.bilinear(&d, &d)
}

/// Convenience: assemble, solve, and evaluate in one call.
pub fn kv_cost_on(mesh: &Mesh, lambda: f64) -> Result<f64, SolveError> {
    let k = assemble_stiffness(mesh);
    let pair = solve_kv_pair_with(mesh, &k, lambda)?;
    Ok(kv_cost_with(&k, &pair))
}
