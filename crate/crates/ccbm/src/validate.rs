//! Fast self-checks behind the `validate` subcommand: each check prints one
//! line and the whole set runs in seconds on a laptop core.

use crate::descent::{run_descent, DescentConfig};
use crate::fem::{assemble_free_boundary_mass, assemble_mass, assemble_stiffness};
use crate::gradient::{
    boundary_form_derivative, gradient_density, solve_material_derivative, volume_form_derivative,
};
use crate::mesh::generate::{generate_annulus, InnerBoundary};
use crate::mesh::geometry::free_boundary_geometry;
use crate::scenario::{lambda_annulus_2d, lambda_annulus_3d, radial_exact_solution};
use crate::state::{solve_adjoint, solve_state};
use crate::vec2::Vec2;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

pub fn run_all() -> Vec<CheckResult> {
    let mut out = Vec::new();

    // Closed-form flux constants.
    let l2 = lambda_annulus_2d(0.5, 0.7).unwrap();
    out.push(check(
        "lambda_annulus_2d(0.5, 0.7)",
        (l2 - -4.24573).abs() < 5e-6,
        format!("{l2:.6}"),
    ));
    let l3 = lambda_annulus_3d(0.3, 0.5).unwrap();
    out.push(check("lambda_annulus_3d(0.3, 0.5)", (l3 + 3.0).abs() < 1e-12, format!("{l3:.6}")));

    // Radial oracle hits the inner Dirichlet value exactly.
    let (ur, ui) = radial_exact_solution(0.5, 1.0, -3.0, 0.5);
    out.push(check(
        "radial solution inner value",
        (ur - 1.0).abs() < 1e-14 && ui.abs() < 1e-14,
        format!("u(r) = {ur:.3e} + {ui:.3e} i"),
    ));

    // Meshing: validity over the three preset inner shapes.
    let mut mesh_ok = true;
    let mut detail = String::new();
    for (name, inner) in [
        ("circle", InnerBoundary::Circle { radius: 0.5 }),
        ("lshape", InnerBoundary::LShape),
        ("ribbon", InnerBoundary::Ribbon),
    ] {
        match generate_annulus(&inner, 1.25, 0.1, 4) {
            Ok(m) => {
                detail.push_str(&format!("{name}:{}v ", m.n_vertices()));
            }
            Err(e) => {
                mesh_ok = false;
                detail.push_str(&format!("{name}:{e} "));
            }
        }
    }
    out.push(check("annulus generation", mesh_ok, detail.trim().to_string()));

    // State solve against the radial oracle.
    let mesh = generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.0, 0.08, 0).unwrap();
    let state = solve_state(&mesh, -3.0).unwrap();
    let mut worst = 0.0f64;
    for (i, p) in mesh.vertices.iter().enumerate() {
        let (er, ei) = radial_exact_solution(0.5, 1.0, -3.0, p.norm());
        worst = worst.max((state.field.re[i] - er).abs()).max((state.field.im[i] - ei).abs());
    }
    out.push(check(
        "complex state vs radial solution",
        worst < 2e-2,
        format!("max err {worst:.2e}"),
    ));

    // Derivative cross-check: boundary vs volume vs the structure of both.
    let k = assemble_stiffness(&mesh);
    let b = assemble_free_boundary_mass(&mesh);
    let m = assemble_mass(&mesh);
    let geom = free_boundary_geometry(&mesh).unwrap();
    let adjoint = solve_adjoint(&mesh, &state).unwrap();
    let density = gradient_density(&mesh, &geom, &state, &adjoint, -3.0);
    let (mut vx, mut vy) = (vec![0.0; mesh.n_vertices()], vec![0.0; mesh.n_vertices()]);
    for (i, p) in mesh.vertices.iter().enumerate() {
        let rho = p.norm();
        let cut = ((rho - 0.5) / 0.5).clamp(0.0, 1.0);
        vx[i] = cut * cut * p.x / rho;
        vy[i] = cut * cut * p.y / rho;
    }
    for &i in &mesh.fixed_loop {
        vx[i] = 0.0;
        vy[i] = 0.0;
    }
    let v_loop: Vec<Vec2> = mesh.free_loop.iter().map(|&i| Vec2::new(vx[i], vy[i])).collect();
    let dj_b = boundary_form_derivative(&geom, &density, &v_loop);
    let udot = solve_material_derivative(&mesh, &k, &b, &state, -3.0, &vx, &vy).unwrap();
    let dj_v = volume_form_derivative(&mesh, &m, &state, &udot, &vx, &vy);
    let rel = ((dj_b - dj_v) / dj_v.abs().max(1e-12)).abs();
    out.push(check(
        "shape derivative boundary vs volume",
        rel < 0.08,
        format!("{dj_b:.5e} vs {dj_v:.5e} (rel {rel:.2e})"),
    ));

    // Determinism: two identical short descents must agree bit for bit.
    let lam = lambda_annulus_2d(0.5, 0.7).unwrap();
    let cfg = DescentConfig { max_iters: 3, tol: 1e-14, plateau_tol: 0.0, ..Default::default() };
    let run = || {
        let m0 = generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.0, 0.15, 0).unwrap();
        let out = run_descent(&m0, lam, &cfg, None, |_, _| {}).unwrap();
        crate::descent::history_csv_deterministic(&out.records)
    };
    let (h1, h2) = (run(), run());
    out.push(check("repeat run bytes", h1 == h2, format!("{} rows", h1.lines().count() - 1)));

    out
}
