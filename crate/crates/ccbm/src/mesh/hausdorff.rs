//! Symmetric Hausdorff distance between closed polylines, measured from the
//! vertices of each curve to the segments of the other.

use crate::error::MeshError;
use crate::vec2::Vec2;

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to a closed polyline.
pub fn point_polyline_distance(p: Vec2, poly: &[Vec2]) -> f64 {
    let k = poly.len();
    let mut best = f64::INFINITY;
    for j in 0..k {
        best = best.min(point_segment_distance(p, poly[j], poly[(j + 1) % k]));
    }
    best
}

fn directed(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().map(|&p| point_polyline_distance(p, b)).fold(0.0f64, f64::max)
}

/// max over both directions of vertex-to-curve distance.
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> Result<f64, MeshError> {
    if a.len() < 3 {
        return Err(MeshError::EmptyPolyline { got: a.len() });
    }
    if b.len() < 3 {
        return Err(MeshError::EmptyPolyline { got: b.len() });
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// Circle about the origin as a closed polyline, for reference boundaries.
pub fn circle_polyline(radius: f64, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vec2::new(radius * a.cos(), radius * a.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_polylines_at_zero() {
        let c = circle_polyline(1.0, 128);
        assert_eq!(hausdorff_distance(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn concentric_circles() {
        let a = circle_polyline(1.0, 512);
        let b = circle_polyline(0.8, 512);
        let d = hausdorff_distance(&a, &b).unwrap();
        assert!((d - 0.2).abs() < 1e-3, "d = {d}");
    }

    #[test]
    fn symmetric_by_construction() {
        let a = circle_polyline(1.0, 64);
        let b: Vec<Vec2> =
            circle_polyline(0.7, 97).into_iter().map(|p| p + Vec2::new(0.05, -0.02)).collect();
        let d1 = hausdorff_distance(&a, &b).unwrap();
        let d2 = hausdorff_distance(&b, &a).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn empty_polyline_rejected() {
        let a = circle_polyline(1.0, 64);
        assert!(matches!(
            hausdorff_distance(&a, &[Vec2::ZERO]),
            Err(MeshError::EmptyPolyline { got: 1 })
        ));
    }
}
