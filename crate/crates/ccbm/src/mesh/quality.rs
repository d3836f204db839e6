use super::Mesh;

/// Shape statistics over all triangles.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_area: f64,
    pub total_area: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    /// Longest edge over shortest altitude, worst triangle; 1.15 for
    /// equilateral, grows without bound as triangles flatten.
    pub worst_aspect: f64,
}

pub fn mesh_quality(mesh: &Mesh) -> QualityReport {
    let mut min_angle = f64::INFINITY;
    let mut max_angle: f64 = 0.0;
    let mut min_area = f64::INFINITY;
    let mut total_area = 0.0;
    let mut min_edge = f64::INFINITY;
    let mut max_edge: f64 = 0.0;
    let mut worst_aspect: f64 = 0.0;

    for t in 0..mesh.triangles.len() {
        let p = mesh.triangle_points(t);
        let area = mesh.signed_area(t);
        min_area = min_area.min(area);
        total_area += area;

        let mut longest: f64 = 0.0;
        for k in 0..3 {
            let e = (p[(k + 1) % 3] - p[k]).norm();
            min_edge = min_edge.min(e);
            max_edge = max_edge.max(e);
            longest = longest.max(e);

            let u = p[(k + 1) % 3] - p[k];
            let v = p[(k + 2) % 3] - p[k];
            let ang = u.cross(v).abs().atan2(u.dot(v)).to_degrees();
            min_angle = min_angle.min(ang);
            max_angle = max_angle.max(ang);
        }
        // altitude = 2 area / base; the shortest altitude uses the longest base.
        let alt = 2.0 * area / longest;
        worst_aspect = worst_aspect.max(longest / alt);
    }

    QualityReport {
        n_vertices: mesh.n_vertices(),
        n_triangles: mesh.triangles.len(),
        min_angle_deg: min_angle,
        max_angle_deg: max_angle,
        min_area,
        total_area,
        min_edge,
        max_edge,
        worst_aspect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{generate_annulus, InnerBoundary};

    #[test]
    fn structured_circle_mesh_quality() {
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.25, 0.1, 0).unwrap();
        let q = mesh_quality(&mesh);
        assert!(q.min_angle_deg > 20.0, "min angle {}", q.min_angle_deg);
        assert!(q.max_angle_deg < 130.0, "max angle {}", q.max_angle_deg);
        // Annulus area pi (1.25^2 - 0.5^2), short of the exact value by the
        // polygonal rim cut.
        let exact = std::f64::consts::PI * (1.25f64.powi(2) - 0.5f64.powi(2));
        assert!((q.total_area - exact).abs() / exact < 0.01);
    }
}
