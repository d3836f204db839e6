//! Discrete differential geometry of the free boundary loop.

use super::Mesh;
use crate::error::MeshError;
use crate::vec2::Vec2;

/// Per-vertex geometry of the free loop, in loop order.
#[derive(Debug, Clone)]
pub struct FreeBoundaryGeometry {
    /// Unit outward normals (angle bisector of the adjacent edge normals).
    pub normal: Vec<Vec2>,
    /// Signed curvature: turning angle over mean adjacent edge length.
    /// Positive on a convex CCW loop, 1/R on a circle of radius R.
    pub curvature: Vec<f64>,
    /// Lumped arc measure, half the two adjacent edge lengths; sums to the
    /// perimeter.
    pub arc_weight: Vec<f64>,
    /// Length of edge j, from loop vertex j to j+1.
    pub edge_len: Vec<f64>,
    /// Arc-length coordinate of each loop vertex, starting at 0.
    pub arc_coord: Vec<f64>,
    pub perimeter: f64,
}

pub fn free_boundary_geometry(mesh: &Mesh) -> Result<FreeBoundaryGeometry, MeshError> {
    let pts = mesh.free_polyline();
    let k = pts.len();
    if k < 3 {
        return Err(MeshError::EmptyPolyline { got: k });
    }

    let mut edge_len = Vec::with_capacity(k);
    let mut tangent = Vec::with_capacity(k);
    for j in 0..k {
        let e = pts[(j + 1) % k] - pts[j];
        edge_len.push(e.norm());
        tangent.push(e);
    }
    let perimeter: f64 = edge_len.iter().sum();
    for (j, &l) in edge_len.iter().enumerate() {
        if l < 1e-12 * perimeter {
            return Err(MeshError::DegenerateEdge { edge: j, min_len: 1e-12 * perimeter });
        }
    }

    let mut normal = Vec::with_capacity(k);
    let mut curvature = Vec::with_capacity(k);
    let mut arc_weight = Vec::with_capacity(k);
    for j in 0..k {
        let prev = (j + k - 1) % k;
        let t0 = tangent[prev].normalized();
        let t1 = tangent[j].normalized();
        let n = (t0.perp_cw() + t1.perp_cw()).normalized();
        let turn = t0.cross(t1).atan2(t0.dot(t1));
        let w = 0.5 * (edge_len[prev] + edge_len[j]);
        normal.push(n);
        curvature.push(turn / w);
        arc_weight.push(w);
    }

    let mut arc_coord = Vec::with_capacity(k);
    let mut s = 0.0;
    for j in 0..k {
        arc_coord.push(s);
        s += edge_len[j];
    }

    Ok(FreeBoundaryGeometry { normal, curvature, arc_weight, edge_len, arc_coord, perimeter })
}

impl FreeBoundaryGeometry {
    /// Arc-length derivative of a nodal field given by values at loop
    /// vertices: per-edge slopes averaged into vertices with length weights.
    /// Second order on smoothly graded loops.
    pub fn tangential_derivative(&self, values: &[f64]) -> Vec<f64> {
        let k = self.edge_len.len();
        assert_eq!(values.len(), k);
        let slope: Vec<f64> =
            (0..k).map(|j| (values[(j + 1) % k] - values[j]) / self.edge_len[j]).collect();
        (0..k)
            .map(|j| {
                let prev = (j + k - 1) % k;
                (self.edge_len[prev] * slope[prev] + self.edge_len[j] * slope[j])
                    / (self.edge_len[prev] + self.edge_len[j])
            })
            .collect()
    }
}
