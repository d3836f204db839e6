//! Randomized invariants over the mesh, sparse, and distance layers.

use ccbm::fem::CsrMatrix;
use ccbm::mesh::generate::{generate_annulus, InnerBoundary};
use ccbm::mesh::geometry::free_boundary_geometry;
use ccbm::mesh::hausdorff::hausdorff_distance;
use ccbm::Vec2;
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

fn polyline(pts: Vec<(f64, f64)>) -> Vec<Vec2> {
    pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect()
}

proptest! {
    #![proptest_config(cases(64))]

    /// Duplicate-merging CSR assembly agrees with dense accumulation.
    #[test]
    fn csr_matches_dense(
        n in 1usize..10,
        raw in prop::collection::vec((0usize..64, 0usize..64, -5.0f64..5.0), 0..60),
        xs in prop::collection::vec(-2.0f64..2.0, 10),
    ) {
        let trips: Vec<(usize, usize, f64)> =
            raw.into_iter().map(|(r, c, v)| (r % n, c % n, v)).collect();
        let a = CsrMatrix::from_triplets(n, &trips, false);
        let x = &xs[..n];
        let mut dense = vec![0.0f64; n * n];
        for &(r, c, v) in &trips {
            dense[r * n + c] += v;
        }
        let y = a.matvec(x);
        for r in 0..n {
            let want: f64 = (0..n).map(|c| dense[r * n + c] * x[c]).sum();
            prop_assert!((y[r] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn hausdorff_symmetric_and_zero_on_self(
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..12),
        b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..12),
    ) {
        let (a, b) = (polyline(a), polyline(b));
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn hausdorff_translation_invariant(
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..10),
        b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..10),
        (tx, ty) in (-3.0f64..3.0, -3.0f64..3.0),
    ) {
        let (a, b) = (polyline(a), polyline(b));
        let shift = |p: &[Vec2]| -> Vec<Vec2> {
            p.iter().map(|q| *q + Vec2::new(tx, ty)).collect()
        };
        let d0 = hausdorff_distance(&a, &b).unwrap();
        let d1 = hausdorff_distance(&shift(&a), &shift(&b)).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-9, "{d0} vs {d1}");
    }
}

proptest! {
    #![proptest_config(cases(16))]

    /// Moving a mesh out and back restores every vertex; fixed-boundary
    /// vertices never move at all.
    #[test]
    fn mesh_move_round_trip(
        coefs in prop::collection::vec(-0.25f64..0.25, 4),
        t in 0.001f64..0.04,
    ) {
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.0, 0.25, 0).unwrap();
        let v: Vec<Vec2> = mesh
            .vertices
            .iter()
            .map(|p| {
                let rho = p.norm();
                let cut = ((rho - 0.5) / 0.5).clamp(0.0, 1.0);
                let th = p.y.atan2(p.x);
                let amp = coefs[0]
                    + coefs[1] * th.cos()
                    + coefs[2] * (2.0 * th).sin()
                    + coefs[3] * (3.0 * th).cos();
                Vec2::new(p.x / rho, p.y / rho) * (amp * cut)
            })
            .collect();

        // Inverted candidates are legitimately rejected; skip those draws.
        let moved = match mesh.moved_by(&v, t) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        for &f in &mesh.fixed_loop {
            prop_assert_eq!(moved.vertices[f].x.to_bits(), mesh.vertices[f].x.to_bits());
            prop_assert_eq!(moved.vertices[f].y.to_bits(), mesh.vertices[f].y.to_bits());
        }
        let back = match moved.moved_by(&v, -t) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        for i in 0..mesh.n_vertices() {
            prop_assert!((back.vertices[i] - mesh.vertices[i]).norm() < 1e-12);
        }
    }

    /// Random star-shaped polygons mesh cleanly and keep their corners on
    /// the fixed loop.
    #[test]
    fn random_star_polygons_mesh(
        amps in prop::collection::vec(-0.06f64..0.06, 6),
        n_corners in 12usize..24,
    ) {
        let corners: Vec<Vec2> = (0..n_corners)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n_corners as f64;
                let r = 0.35
                    + amps[0] * th.cos()
                    + amps[1] * th.sin()
                    + amps[2] * (2.0 * th).cos()
                    + amps[3] * (2.0 * th).sin()
                    + amps[4] * (3.0 * th).cos()
                    + amps[5] * (3.0 * th).sin();
                Vec2::new(r * th.cos(), r * th.sin())
            })
            .collect();
        let inner = InnerBoundary::Custom { points: corners.clone(), star_center: Vec2::ZERO };
        let mesh = generate_annulus(&inner, 1.25, 0.15, 2).unwrap();
        mesh.validate().unwrap();
        let fixed = mesh.fixed_polyline();
        for c in &corners {
            prop_assert!(
                fixed.iter().any(|p| (*p - *c).norm() < 1e-12),
                "corner {c:?} lost"
            );
        }
    }

    /// The polyline derivative of a constant field vanishes.
    #[test]
    fn tangential_derivative_of_constants(c in -3.0f64..3.0) {
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.0, 0.2, 0).unwrap();
        let geom = free_boundary_geometry(&mesh).unwrap();
        let vals = vec![c; mesh.free_loop.len()];
        for d in geom.tangential_derivative(&vals) {
            prop_assert!(d.abs() < 1e-12);
        }
    }
}
