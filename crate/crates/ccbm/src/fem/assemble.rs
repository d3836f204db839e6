//! P1 finite element assembly on triangle meshes. All element integrals are
//! exact for piecewise-linear data, no quadrature error anywhere.

use super::sparse::CsrMatrix;
use crate::mesh::{BoundaryTag, Mesh};
use crate::vec2::Vec2;

/// Constant gradient of the P1 interpolant on one triangle.
pub fn p1_gradient(pts: [Vec2; 3], vals: [f64; 3]) -> Vec2 {
    let twice_area = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
    let mut g = Vec2::ZERO;
    for k in 0..3 {
        // grad of barycentric k: perpendicular of the opposite edge / 2A.
        let (a, b) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        let grad_k = Vec2::new(a.y - b.y, b.x - a.x) / twice_area;
        g += grad_k * vals[k];
    }
    g
}

fn basis_gradients(pts: [Vec2; 3]) -> ([Vec2; 3], f64) {
    let twice_area = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
    let mut g = [Vec2::ZERO; 3];
    for k in 0..3 {
        let (a, b) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        g[k] = Vec2::new(a.y - b.y, b.x - a.x) / twice_area;
    }
    (g, 0.5 * twice_area)
}

/// Stiffness: integral of grad u . grad v.
pub fn assemble_stiffness(mesh: &Mesh) -> CsrMatrix {
    let mut trips = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (g, area) = basis_gradients(mesh.triangle_points(t));
        for i in 0..3 {
            for j in 0..3 {
                trips.push((tri[i], tri[j], area * g[i].dot(g[j])));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), &trips, true)
}

/// Stiffness with a per-triangle symmetric 2x2 coefficient:
/// integral of (A grad u) . grad v.
pub fn assemble_coeff_stiffness(mesh: &Mesh, coeff: &[[[f64; 2]; 2]]) -> CsrMatrix {
    assert_eq!(coeff.len(), mesh.triangles.len());
    let mut trips = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (g, area) = basis_gradients(mesh.triangle_points(t));
        let a = coeff[t];
        for j in 0..3 {
            let ag =
                Vec2::new(a[0][0] * g[j].x + a[0][1] * g[j].y, a[1][0] * g[j].x + a[1][1] * g[j].y);
            for i in 0..3 {
                trips.push((tri[i], tri[j], area * ag.dot(g[i])));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), &trips, false)
}

/// Mass: integral of u v.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let mut trips = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.signed_area(t);
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { area / 6.0 } else { area / 12.0 };
                trips.push((tri[i], tri[j], w));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), &trips, true)
}

/// Line mass on the free boundary: integral over Sigma of u v. Entries only
/// couple free-boundary nodes; dimension stays n x n.
pub fn assemble_free_boundary_mass(mesh: &Mesh) -> CsrMatrix {
    assemble_weighted_free_boundary_mass_impl(mesh, None)
}

/// Line mass with a piecewise-linear weight given at free-loop vertices:
/// integral over Sigma of w u v.
pub fn assemble_weighted_free_boundary_mass(mesh: &Mesh, w_loop: &[f64]) -> CsrMatrix {
    assert_eq!(w_loop.len(), mesh.free_loop.len());
    assemble_weighted_free_boundary_mass_impl(mesh, Some(w_loop))
}

fn assemble_weighted_free_boundary_mass_impl(mesh: &Mesh, w_loop: Option<&[f64]>) -> CsrMatrix {
    let k = mesh.free_loop.len();
    let mut trips = Vec::with_capacity(4 * k);
    for j in 0..k {
        let (a, b) = (mesh.free_loop[j], mesh.free_loop[(j + 1) % k]);
        let len = (mesh.vertices[b] - mesh.vertices[a]).norm();
        let (wa, wb) = match w_loop {
            Some(w) => (w[j], w[(j + 1) % k]),
            None => (1.0, 1.0),
        };
        // Exact moments of linear weight against P1 x P1 on a segment.
        trips.push((a, a, len * (wa / 4.0 + wb / 12.0)));
        trips.push((a, b, len * (wa + wb) / 12.0));
        trips.push((b, a, len * (wa + wb) / 12.0));
        trips.push((b, b, len * (wa / 12.0 + wb / 4.0)));
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), &trips, true)
}

/// Line mass with a constant weight per free edge (edge j runs from loop
/// vertex j to j+1): integral over Sigma of w u v.
pub fn assemble_edge_weighted_free_boundary_mass(mesh: &Mesh, w_edge: &[f64]) -> CsrMatrix {
    let k = mesh.free_loop.len();
    assert_eq!(w_edge.len(), k);
    let mut trips = Vec::with_capacity(4 * k);
    for j in 0..k {
        let (a, b) = (mesh.free_loop[j], mesh.free_loop[(j + 1) % k]);
        let len = (mesh.vertices[b] - mesh.vertices[a]).norm();
        let w = w_edge[j] * len / 6.0;
        trips.push((a, a, 2.0 * w));
        trips.push((a, b, w));
        trips.push((b, a, w));
        trips.push((b, b, 2.0 * w));
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), &trips, true)
}

/// Sum over triangles of w_t times the exact integral of the squared P1
/// field.
pub fn weighted_mass_energy(mesh: &Mesh, w_tri: &[f64], field: &[f64]) -> f64 {
    assert_eq!(w_tri.len(), mesh.triangles.len());
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.signed_area(t);
        let (a, b, c) = (field[tri[0]], field[tri[1]], field[tri[2]]);
        // v' M_T v with M_T = area/12 [[2,1,1],[1,2,1],[1,1,2]].
        let q = area / 6.0 * (a * a + b * b + c * c + a * b + b * c + a * c);
        acc += w_tri[t] * q;
    }
    acc
}

/// Load vector: integral over Sigma of g v, with g piecewise linear given at
/// free-loop vertices.
pub fn assemble_free_boundary_load(mesh: &Mesh, g_loop: &[f64]) -> Vec<f64> {
    let k = mesh.free_loop.len();
    assert_eq!(g_loop.len(), k);
    let mut out = vec![0.0; mesh.n_vertices()];
    for j in 0..k {
        let (a, b) = (mesh.free_loop[j], mesh.free_loop[(j + 1) % k]);
        let len = (mesh.vertices[b] - mesh.vertices[a]).norm();
        let (ga, gb) = (g_loop[j], g_loop[(j + 1) % k]);
        out[a] += len * (ga / 3.0 + gb / 6.0);
        out[b] += len * (ga / 6.0 + gb / 3.0);
    }
    out
}

/// Per-triangle averaged displacement gradient DV of a P1 vector field.
/// Row c of the result is grad of component c.
pub fn vector_field_jacobians(mesh: &Mesh, vx: &[f64], vy: &[f64]) -> Vec<[[f64; 2]; 2]> {
    let mut out = Vec::with_capacity(mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let pts = mesh.triangle_points(t);
        let gx = p1_gradient(pts, [vx[tri[0]], vx[tri[1]], vx[tri[2]]]);
        let gy = p1_gradient(pts, [vy[tri[0]], vy[tri[1]], vy[tri[2]]]);
        out.push([[gx.x, gx.y], [gy.x, gy.y]]);
    }
    out
}

/// For debugging: count of boundary edges per tag.
pub fn boundary_edge_count(mesh: &Mesh, tag: BoundaryTag) -> usize {
    mesh.boundary.iter().filter(|e| e.tag == tag).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::sparse::norm2;
    use crate::mesh::generate::{generate_annulus, InnerBoundary};
    use std::f64::consts::PI;

    fn test_mesh() -> Mesh {
        generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.25, 0.12, 0).unwrap()
    }

    #[test]
    fn stiffness_kernel_is_constants() {
        let mesh = test_mesh();
        let k = assemble_stiffness(&mesh);
        let ones = vec![1.0; mesh.n_vertices()];
        assert!(norm2(&k.matvec(&ones)) < 1e-12, "K 1 != 0");
        assert!(k.asymmetry() < 1e-14);
    }

    #[test]
    fn mass_total_is_domain_area() {
        let mesh = test_mesh();
        let m = assemble_mass(&mesh);
        let ones = vec![1.0; mesh.n_vertices()];
        let area = m.bilinear(&ones, &ones);
        let exact: f64 = (0..mesh.triangles.len()).map(|t| mesh.signed_area(t)).sum();
        assert!((area - exact).abs() < 1e-12 * exact);
        assert!(m.asymmetry() < 1e-15);
    }

    #[test]
    fn boundary_mass_total_is_perimeter() {
        let mesh = test_mesh();
        let b = assemble_free_boundary_mass(&mesh);
        let ones = vec![1.0; mesh.n_vertices()];
        let perim = b.bilinear(&ones, &ones);
        // Polygon perimeter, slightly under 2 pi 1.25.
        let poly = mesh.free_polyline();
        let exact: f64 =
            (0..poly.len()).map(|j| (poly[(j + 1) % poly.len()] - poly[j]).norm()).sum();
        assert!((perim - exact).abs() < 1e-12 * exact);
        assert!(exact < 2.0 * PI * 1.25);
    }

    #[test]
    fn boundary_load_matches_mass_action() {
        let mesh = test_mesh();
        let k = mesh.free_loop.len();
        let g_loop: Vec<f64> = (0..k).map(|j| (j as f64 * 0.37).sin()).collect();
        let load = assemble_free_boundary_load(&mesh, &g_loop);
        let b = assemble_free_boundary_mass(&mesh);
        let mut g_full = vec![0.0; mesh.n_vertices()];
        for (j, &v) in mesh.free_loop.iter().enumerate() {
            g_full[v] = g_loop[j];
        }
        let via_mass = b.matvec(&g_full);
        for i in 0..load.len() {
            assert!((load[i] - via_mass[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn p1_gradient_exact_on_affine() {
        let pts = [Vec2::new(0.2, 0.1), Vec2::new(1.1, 0.3), Vec2::new(0.4, 0.9)];
        let f = |p: Vec2| 3.0 - 2.0 * p.x + 5.0 * p.y;
        let g = p1_gradient(pts, [f(pts[0]), f(pts[1]), f(pts[2])]);
        assert!((g - Vec2::new(-2.0, 5.0)).norm() < 1e-13);
    }

    #[test]
    fn coeff_stiffness_identity_matches_plain() {
        let mesh = test_mesh();
        let id = vec![[[1.0, 0.0], [0.0, 1.0]]; mesh.triangles.len()];
        let k1 = assemble_stiffness(&mesh);
        let k2 = assemble_coeff_stiffness(&mesh, &id);
        let x: Vec<f64> = (0..mesh.n_vertices()).map(|i| ((i * 7919) % 13) as f64).collect();
        let (y1, y2) = (k1.matvec(&x), k2.matvec(&x));
        for i in 0..y1.len() {
            assert!((y1[i] - y2[i]).abs() < 1e-11);
        }
    }
}
