//! Shape derivative of the cost in two interchangeable forms.
//!
//! Boundary form: dJ[V] = integral over the free boundary of G (V . n),
//! with G built from traces of the state and adjoint. This is the cheap form
//! the descent uses.
//!
//! Volume form: dJ[V] = 1/2 integral of (div V) u2^2 + integral of u2 udot2,
//! where udot solves the material-derivative system. Extended over P1
//! fields with fixed connectivity this reproduces the derivative of the
//! discrete cost under vertex motion exactly, so it anchors the finite
//! difference and boundary forms in tests.

use crate::error::SolveError;
use crate::fem::{
    assemble_coeff_stiffness, assemble_edge_weighted_free_boundary_mass, solve_complex_system,
    vector_field_jacobians, weighted_mass_energy, ComplexNodalField, CsrMatrix,
};
use crate::mesh::geometry::FreeBoundaryGeometry;
use crate::mesh::Mesh;
use crate::state::{free_loop_values, StateSolution};
use crate::vec2::Vec2;

/// Shape gradient density at free-loop vertices, so that
/// dJ[V] = integral of G (V . n) over the free boundary.
#[derive(Debug, Clone)]
pub struct GradientDensity {
    pub values: Vec<f64>,
}

pub fn gradient_density(
    mesh: &Mesh,
    geom: &FreeBoundaryGeometry,
    state: &StateSolution,
    adjoint: &crate::state::AdjointSolution,
    lambda: f64,
) -> GradientDensity {
    let u1 = free_loop_values(mesh, &state.field.re);
    let u2 = free_loop_values(mesh, &state.field.im);
    let p1 = free_loop_values(mesh, &adjoint.field.re);
    let p2 = free_loop_values(mesh, &adjoint.field.im);
    let du1 = geom.tangential_derivative(&u1);
    let du2 = geom.tangential_derivative(&u2);
    let dp1 = geom.tangential_derivative(&p1);
    let dp2 = geom.tangential_derivative(&p2);

    let k = u1.len();
    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        let kap = geom.curvature[j];
        // Robin data substitutes the normal derivatives:
        // du1/dn = lambda + u2, du2/dn = -u1 on the free boundary.
        let bracket = dp1[j] * du2[j] - dp2[j] * du1[j]
            + p1[j] * (lambda + u2[j] + kap * u1[j])
            + p2[j] * (-u1[j] + kap * u2[j])
            + lambda * kap * p2[j];
        values.push(0.5 * u2[j] * u2[j] - bracket);
    }
    GradientDensity { values }
}

/// Exact integral over the free loop of the product of two piecewise-linear
/// vertex fields.
pub fn boundary_pairing(geom: &FreeBoundaryGeometry, f: &[f64], g: &[f64]) -> f64 {
    let k = geom.edge_len.len();
    assert_eq!(f.len(), k);
    assert_eq!(g.len(), k);
    let mut acc = 0.0;
    for j in 0..k {
        let jn = (j + 1) % k;
        acc += geom.edge_len[j] / 6.0
            * (2.0 * f[j] * g[j] + f[j] * g[jn] + f[jn] * g[j] + 2.0 * f[jn] * g[jn]);
    }
    acc
}

/// dJ[V] via the boundary form, for a velocity given at free-loop vertices.
pub fn boundary_form_derivative(
    geom: &FreeBoundaryGeometry,
    density: &GradientDensity,
    v_loop: &[Vec2],
) -> f64 {
    let vn: Vec<f64> = v_loop.iter().zip(&geom.normal).map(|(v, n)| v.dot(*n)).collect();
    boundary_pairing(geom, &density.values, &vn)
}

/// Material derivative of the state under velocity (vx, vy): solves the
/// forward operator with the geometric variation of every discrete term on
/// the right side. Zero on the fixed boundary.
pub fn solve_material_derivative(
    mesh: &Mesh,
    k: &CsrMatrix,
    b: &CsrMatrix,
    state: &StateSolution,
    lambda: f64,
    vx: &[f64],
    vy: &[f64],
) -> Result<ComplexNodalField, SolveError> {
    let n = mesh.n_vertices();
    let jacs = vector_field_jacobians(mesh, vx, vy);
    // A = (div V) I - DV - DV'.
    let coeffs: Vec<[[f64; 2]; 2]> = jacs
        .iter()
        .map(|dv| {
            let div = dv[0][0] + dv[1][1];
            [
                [div - 2.0 * dv[0][0], -dv[0][1] - dv[1][0]],
                [-dv[0][1] - dv[1][0], div - 2.0 * dv[1][1]],
            ]
        })
        .collect();
    let s_a = assemble_coeff_stiffness(mesh, &coeffs);

    // Tangential stretch rate of each free edge; equals div_Sigma V for P1
    // transport with fixed connectivity.
    let loops = &mesh.free_loop;
    let kk = loops.len();
    let mut w_edge = Vec::with_capacity(kk);
    for j in 0..kk {
        let (a, bb) = (loops[j], loops[(j + 1) % kk]);
        let e = mesh.vertices[bb] - mesh.vertices[a];
        let dv = Vec2::new(vx[bb] - vx[a], vy[bb] - vy[a]);
        w_edge.push(e.dot(dv) / e.norm_sq());
    }
    let w = assemble_edge_weighted_free_boundary_mass(mesh, &w_edge);

    let sa_u1 = s_a.matvec(&state.field.re);
    let sa_u2 = s_a.matvec(&state.field.im);
    let w_u1 = w.matvec(&state.field.re);
    let w_u2 = w.matvec(&state.field.im);
    let w_one = w.matvec(&vec![1.0; n]);

    let rhs_re: Vec<f64> = (0..n).map(|i| -sa_u1[i] + w_u2[i] + lambda * w_one[i]).collect();
    let rhs_im: Vec<f64> = (0..n).map(|i| -sa_u2[i] - w_u1[i]).collect();
    solve_complex_system(k, b, &rhs_re, &rhs_im, &mesh.fixed_loop, (0.0, 0.0), 1.0)
}

/// dJ[V] via the volume form, consuming a solved material derivative.
pub fn volume_form_derivative(
    mesh: &Mesh,
    mass: &CsrMatrix,
    state: &StateSolution,
    udot: &ComplexNodalField,
    vx: &[f64],
    vy: &[f64],
) -> f64 {
    let jacs = vector_field_jacobians(mesh, vx, vy);
    let divs: Vec<f64> = jacs.iter().map(|dv| dv[0][0] + dv[1][1]).collect();
    0.5 * weighted_mass_energy(mesh, &divs, &state.field.im)
        + mass.bilinear(&state.field.im, &udot.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_free_boundary_mass, assemble_mass, assemble_stiffness};
    use crate::mesh::generate::{generate_annulus, InnerBoundary};
    use crate::mesh::geometry::free_boundary_geometry;
    use crate::scenario::lambda_annulus_2d;
    use crate::state::{cost, solve_adjoint, solve_state};

    /// Smooth test velocity, zero on the fixed ring by a radial cutoff.
    fn test_velocity(mesh: &Mesh, r_fix: f64, r_free: f64, mode: usize) -> (Vec<f64>, Vec<f64>) {
        let mut vx = vec![0.0; mesh.n_vertices()];
        let mut vy = vec![0.0; mesh.n_vertices()];
        for (i, p) in mesh.vertices.iter().enumerate() {
            let rho = p.norm();
            let cut = ((rho - r_fix) / (r_free - r_fix)).clamp(0.0, 1.0);
            let ang = p.y.atan2(p.x);
            let amp = cut * cut * (1.0 + 0.3 * (mode as f64 * ang).cos());
            vx[i] = amp * p.x / rho;
            vy[i] = amp * p.y / rho;
        }
        let fixed = mesh.fixed_mask();
        for i in 0..mesh.n_vertices() {
            if fixed[i] {
                vx[i] = 0.0;
                vy[i] = 0.0;
            }
        }
        (vx, vy)
    }

    #[test]
    fn volume_form_matches_finite_difference_tightly() {
        let (r, big_r) = (0.5, 1.0);
        let lambda = -3.0;
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: r }, big_r, 0.1, 0).unwrap();
        let k = assemble_stiffness(&mesh);
        let b = assemble_free_boundary_mass(&mesh);
        let m = assemble_mass(&mesh);
        let state = solve_state(&mesh, lambda).unwrap();
        let (vx, vy) = test_velocity(&mesh, r, big_r, 3);

        let udot = solve_material_derivative(&mesh, &k, &b, &state, lambda, &vx, &vy).unwrap();
        let dj = volume_form_derivative(&mesh, &m, &state, &udot, &vx, &vy);

        let v: Vec<crate::vec2::Vec2> =
            vx.iter().zip(&vy).map(|(&x, &y)| crate::vec2::Vec2::new(x, y)).collect();
        let t = 1e-5;
        let jp = cost(
            &mesh.moved_by(&v, t).unwrap(),
            &solve_state(&mesh.moved_by(&v, t).unwrap(), lambda).unwrap(),
        );
        let jm = cost(
            &mesh.moved_by(&v, -t).unwrap(),
            &solve_state(&mesh.moved_by(&v, -t).unwrap(), lambda).unwrap(),
        );
        let fd = (jp - jm) / (2.0 * t);

        // P1 transport is exact, so only the O(t^2) FD truncation and solver
        // residuals separate the two numbers.
        let scale = dj.abs().max(fd.abs()).max(1e-12);
        assert!(((dj - fd) / scale).abs() < 1e-5, "volume {dj} vs central difference {fd}");
    }

    #[test]
    fn boundary_form_tracks_volume_form() {
        let (r, big_r) = (0.5, 1.0);
        let lambda = -3.0;
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: r }, big_r, 0.05, 0).unwrap();
        let k = assemble_stiffness(&mesh);
        let b = assemble_free_boundary_mass(&mesh);
        let m = assemble_mass(&mesh);
        let geom = free_boundary_geometry(&mesh).unwrap();
        let state = solve_state(&mesh, lambda).unwrap();
        let adjoint = solve_adjoint(&mesh, &state).unwrap();
        let density = gradient_density(&mesh, &geom, &state, &adjoint, lambda);
        let (vx, vy) = test_velocity(&mesh, r, big_r, 2);

        let v_loop: Vec<crate::vec2::Vec2> =
            mesh.free_loop.iter().map(|&i| crate::vec2::Vec2::new(vx[i], vy[i])).collect();
        let dj_boundary = boundary_form_derivative(&geom, &density, &v_loop);

        let udot = solve_material_derivative(&mesh, &k, &b, &state, lambda, &vx, &vy).unwrap();
        let dj_volume = volume_form_derivative(&mesh, &m, &state, &udot, &vx, &vy);

        let scale = dj_volume.abs().max(1e-12);
        assert!(
            ((dj_boundary - dj_volume) / scale).abs() < 0.05,
            "boundary {dj_boundary} vs volume {dj_volume}"
        );
    }

    #[test]
    fn density_vanishes_at_the_stationary_radius() {
        // At the exact annulus the true G is identically zero; the discrete
        // one must shrink under refinement.
        let (r, big_r) = (0.5, 0.7);
        let lambda = lambda_annulus_2d(r, big_r).unwrap();
        let sup_g = |h: f64| {
            let mesh = generate_annulus(&InnerBoundary::Circle { radius: r }, big_r, h, 0).unwrap();
            let geom = free_boundary_geometry(&mesh).unwrap();
            let state = solve_state(&mesh, lambda).unwrap();
            let adjoint = solve_adjoint(&mesh, &state).unwrap();
            let g = gradient_density(&mesh, &geom, &state, &adjoint, lambda);
            g.values.iter().map(|v| v.abs()).fold(0.0f64, f64::max)
        };
        let (g1, g2) = (sup_g(0.1), sup_g(0.05));
        assert!(g2 < g1, "sup|G| should fall with h: {g1} -> {g2}");
    }
}
