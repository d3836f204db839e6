//! Structured annular meshing between a star-shaped inner curve and an outer
//! circle. Rays from the declared star center carry the radial grid lines, so
//! the mesh exists iff every ray meets the inner curve exactly once.

use super::{BoundaryEdge, BoundaryTag, Mesh};
use crate::error::MeshError;
use crate::vec2::Vec2;
use std::f64::consts::PI;

/// Inner (fixed) boundary shapes known to the generator.
#[derive(Debug, Clone)]
pub enum InnerBoundary {
    /// Circle about the origin.
    Circle { radius: f64 },
    /// L-shaped hexagon: the square (-0.25, 0.25)^2 minus its upper-right
    /// quadrant. Star center picked inside the L, off the reflex corner.
    LShape,
    /// Pinched oval (0.45 cos t, 0.3 sin t (1.25 + cos 2t)).
    Ribbon,
    /// Arbitrary star-shaped polygon with a caller-declared star center.
    Custom { points: Vec<Vec2>, star_center: Vec2 },
}

const LSHAPE_STAR_CENTER: Vec2 = Vec2 { x: -0.05, y: -0.05 };

fn lshape_corners() -> [Vec2; 6] {
    [
        Vec2::new(-0.25, -0.25),
        Vec2::new(0.25, -0.25),
        Vec2::new(0.25, 0.0),
        Vec2::new(0.0, 0.0),
        Vec2::new(0.0, 0.25),
        Vec2::new(-0.25, 0.25),
    ]
}

fn ribbon_point(t: f64) -> Vec2 {
    Vec2::new(0.45 * t.cos(), 0.3 * t.sin() * (1.25 + (2.0 * t).cos()))
}

impl InnerBoundary {
    pub fn star_center(&self) -> Vec2 {
        match self {
            InnerBoundary::Circle { .. } => Vec2::ZERO,
            InnerBoundary::LShape => LSHAPE_STAR_CENTER,
            InnerBoundary::Ribbon => Vec2::ZERO,
            InnerBoundary::Custom { star_center, .. } => *star_center,
        }
    }

    /// CCW sample at spacing about `h`; polygon corners are always kept.
    pub fn sample(&self, h: f64) -> Result<Vec<Vec2>, MeshError> {
        assert!(h > 0.0, "mesh size must be positive");
        match self {
            InnerBoundary::Circle { radius } => {
                let n = ((2.0 * PI * radius / h).ceil() as usize).max(16);
                Ok((0..n)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / n as f64;
                        Vec2::new(radius * a.cos(), radius * a.sin())
                    })
                    .collect())
            }
            InnerBoundary::LShape => Ok(sample_polygon(&lshape_corners(), h)),
            InnerBoundary::Ribbon => Ok(sample_parametric(ribbon_point, h)),
            InnerBoundary::Custom { points, .. } => {
                if points.len() < 3 {
                    return Err(MeshError::EmptyPolyline { got: points.len() });
                }
                let mut pts = points.clone();
                // Accept either orientation; meshing wants CCW.
                let twice_area: f64 =
                    (0..pts.len()).map(|k| pts[k].cross(pts[(k + 1) % pts.len()])).sum();
                if twice_area < 0.0 {
                    pts.reverse();
                }
                Ok(sample_polygon(&pts, h))
            }
        }
    }
}

fn sample_polygon(corners: &[Vec2], h: f64) -> Vec<Vec2> {
    let n = corners.len();
    let mut out = Vec::new();
    for k in 0..n {
        let (p, q) = (corners[k], corners[(k + 1) % n]);
        let pieces = (((q - p).norm() / h).round() as usize).max(1);
        for s in 0..pieces {
            out.push(p + (q - p) * (s as f64 / pieces as f64));
        }
    }
    out
}

/// Arc-length uniform sampling of a closed parametric curve; every sample
/// lies exactly on the curve.
fn sample_parametric(f: impl Fn(f64) -> Vec2, h: f64) -> Vec<Vec2> {
    const FINE: usize = 8192;
    let mut cum = Vec::with_capacity(FINE + 1);
    cum.push(0.0);
    let mut prev = f(0.0);
    for k in 1..=FINE {
        let p = f(2.0 * PI * k as f64 / FINE as f64);
        cum.push(cum[k - 1] + (p - prev).norm());
        prev = p;
    }
    let total = *cum.last().unwrap();
    let m = ((total / h).ceil() as usize).max(16);
    let mut out = Vec::with_capacity(m);
    let mut hi = 0usize;
    for j in 0..m {
        let target = total * j as f64 / m as f64;
        while hi < FINE && cum[hi + 1] < target {
            hi += 1;
        }
        let seg = cum[hi + 1] - cum[hi];
        let frac = if seg > 0.0 { (target - cum[hi]) / seg } else { 0.0 };
        let t = 2.0 * PI * (hi as f64 + frac) / FINE as f64;
        out.push(f(t));
    }
    out
}

/// Lift angles about `center` to a strictly increasing sequence starting at
/// the first sample; fails when the curve is not star shaped there.
fn lifted_angles(samples: &[Vec2], center: Vec2) -> Result<Vec<f64>, MeshError> {
    let n = samples.len();
    let mut out = Vec::with_capacity(n);
    let mut prev_raw = (samples[0] - center).angle();
    let mut lifted = prev_raw;
    out.push(lifted);
    let mut total = 0.0;
    for k in 1..=n {
        let raw = (samples[k % n] - center).angle();
        let mut d = raw - prev_raw;
        while d <= -PI {
            d += 2.0 * PI;
        }
        while d > PI {
            d -= 2.0 * PI;
        }
        if d <= 1e-12 {
            return Err(MeshError::StarShapeViolation {
                cx: center.x,
                cy: center.y,
                vertex: k % n,
            });
        }
        total += d;
        if k < n {
            lifted += d;
            out.push(lifted);
            prev_raw = raw;
        }
    }
    if (total - 2.0 * PI).abs() > 1e-8 {
        return Err(MeshError::StarShapeViolation { cx: center.x, cy: center.y, vertex: 0 });
    }
    Ok(out)
}

/// Ray from `c` with direction `d` (unit) against segment `p`-`q`.
fn ray_segment_point(c: Vec2, d: Vec2, p: Vec2, q: Vec2) -> Vec2 {
    let denom = d.cross(q - p);
    if denom.abs() < 1e-300 {
        return (p + q) * 0.5;
    }
    let t = (p - c).cross(q - p) / denom;
    c + d * t
}

fn split_quad(verts: &[Vec2], q: [usize; 4]) -> ([usize; 3], [usize; 3]) {
    let area = |a: usize, b: usize, c: usize| (verts[b] - verts[a]).cross(verts[c] - verts[a]);
    // Diagonal q0-q2 versus q1-q3: keep the split with the fatter worst triangle.
    let m1 = area(q[0], q[1], q[2]).min(area(q[0], q[2], q[3]));
    let m2 = area(q[0], q[1], q[3]).min(area(q[1], q[2], q[3]));
    if m1 >= m2 {
        ([q[0], q[1], q[2]], [q[0], q[2], q[3]])
    } else {
        ([q[0], q[1], q[3]], [q[1], q[2], q[3]])
    }
}

/// Mesh the region between `inner` and the circle of radius `outer_radius`
/// about the origin, targeting edge length `h`.
pub fn generate_annulus(
    inner: &InnerBoundary,
    outer_radius: f64,
    h: f64,
    smoothing_passes: usize,
) -> Result<Mesh, MeshError> {
    let c = inner.star_center();
    let samples = inner.sample(h)?;
    let angles = lifted_angles(&samples, c)?;

    // Angular resolution set by the outer circle, so free-boundary edges come
    // out at length about h even when the inner curve is much shorter.
    let m_grid = ((2.0 * PI * outer_radius / h).ceil() as usize).max(16);
    let grid_step = 2.0 * PI / m_grid as f64;

    // Rays: every inner sample, plus equispaced extras inside each angular
    // gap so consecutive rays sit at most grid_step apart.
    let n_samp = samples.len();
    let mut dirs: Vec<Vec2> = Vec::new();
    let mut inner_pts: Vec<Vec2> = Vec::new();
    for k in 0..n_samp {
        let a0 = angles[k];
        let a1 = if k + 1 == n_samp { angles[0] + 2.0 * PI } else { angles[k + 1] };
        dirs.push((samples[k] - c).normalized());
        inner_pts.push(samples[k]);
        let pieces = (((a1 - a0) / grid_step).ceil() as usize).max(1);
        for s in 1..pieces {
            let a = a0 + (a1 - a0) * s as f64 / pieces as f64;
            let d = Vec2::new(a.cos(), a.sin());
            let ip = match inner {
                // Exact for circles; for sampled curves the bracketing chord
                // is the discrete boundary, so the chord point is exact too.
                InnerBoundary::Circle { radius } => d * *radius,
                _ => ray_segment_point(c, d, samples[k], samples[(k + 1) % n_samp]),
            };
            dirs.push(d);
            inner_pts.push(ip);
        }
    }
    let n_ang = dirs.len();

    let mut outer_pts = Vec::with_capacity(n_ang);
    let mut t_in = Vec::with_capacity(n_ang);
    let mut t_out = Vec::with_capacity(n_ang);
    let mut max_log: f64 = 0.0;
    for ray in 0..n_ang {
        let d = dirs[ray];
        let cd = c.dot(d);
        let disc = cd * cd + outer_radius * outer_radius - c.norm_sq();
        if disc <= 0.0 {
            return Err(MeshError::GeometryOverlap { clearance: disc, ray });
        }
        let to = -cd + disc.sqrt();
        let ti = (inner_pts[ray] - c).dot(d);
        if ti <= 1e-12 {
            return Err(MeshError::StarShapeViolation { cx: c.x, cy: c.y, vertex: ray });
        }
        let clearance = to - ti;
        if clearance <= 1e-12 {
            return Err(MeshError::GeometryOverlap { clearance, ray });
        }
        max_log = max_log.max((to / ti).ln());
        outer_pts.push(c + d * to);
        t_in.push(ti);
        t_out.push(to);
    }

    // Geometric layering: radial spacing grows linearly with the distance
    // from the star center, matching how the rays spread, so cells stay near
    // square from the inner curve out to the rim.
    let n_r = ((max_log / grid_step).ceil() as usize).max(2);

    let idx = |i: usize, j: usize| i * n_ang + (j % n_ang);
    let mut vertices = Vec::with_capacity((n_r + 1) * n_ang);
    vertices.extend_from_slice(&inner_pts);
    for i in 1..n_r {
        let s = i as f64 / n_r as f64;
        for j in 0..n_ang {
            let t = t_in[j].powf(1.0 - s) * t_out[j].powf(s);
            vertices.push(c + dirs[j] * t);
        }
    }
    vertices.extend_from_slice(&outer_pts);

    let mut triangles = Vec::with_capacity(2 * n_r * n_ang);
    for i in 0..n_r {
        for j in 0..n_ang {
            let quad = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let (t1, t2) = split_quad(&vertices, quad);
            triangles.push(t1);
            triangles.push(t2);
        }
    }

    let fixed_loop: Vec<usize> = (0..n_ang).map(|j| idx(0, j)).collect();
    let free_loop: Vec<usize> = (0..n_ang).map(|j| idx(n_r, j)).collect();
    let mut boundary = Vec::with_capacity(2 * n_ang);
    for j in 0..n_ang {
        boundary.push(BoundaryEdge {
            a: fixed_loop[j],
            b: fixed_loop[(j + 1) % n_ang],
            tag: BoundaryTag::Fixed,
        });
    }
    for j in 0..n_ang {
        boundary.push(BoundaryEdge {
            a: free_loop[j],
            b: free_loop[(j + 1) % n_ang],
            tag: BoundaryTag::Free,
        });
    }

    let mut mesh = Mesh { vertices, triangles, boundary, fixed_loop, free_loop };
    let perim: f64 = (0..n_ang)
        .map(|j| {
            (mesh.vertices[mesh.free_loop[(j + 1) % n_ang]] - mesh.vertices[mesh.free_loop[j]])
                .norm()
        })
        .sum();
    for (e, edge) in mesh.boundary.iter().enumerate() {
        let len = (mesh.vertices[edge.b] - mesh.vertices[edge.a]).norm();
        if len < 1e-12 * perim {
            return Err(MeshError::DegenerateEdge { edge: e, min_len: 1e-12 * perim });
        }
    }

    if smoothing_passes > 0 {
        smooth_interior(&mut mesh, smoothing_passes);
    }
    mesh.validate()?;
    Ok(mesh)
}

/// Damped Jacobi averaging of interior vertices; boundary vertices pinned.
/// Reverts wholesale if any triangle would flip.
fn smooth_interior(mesh: &mut Mesh, passes: usize) {
    let n = mesh.n_vertices();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    let mut pinned = mesh.fixed_mask();
    for (i, f) in mesh.free_mask().into_iter().enumerate() {
        pinned[i] = pinned[i] || f;
    }

    let saved = mesh.vertices.clone();
    for _ in 0..passes {
        let old = mesh.vertices.clone();
        for i in 0..n {
            if pinned[i] || neighbors[i].is_empty() {
                continue;
            }
            let mut acc = Vec2::ZERO;
            for &j in &neighbors[i] {
                acc += old[j];
            }
            let mean = acc / neighbors[i].len() as f64;
            mesh.vertices[i] = old[i] + (mean - old[i]) * 0.5;
        }
    }
    let ok = (0..mesh.triangles.len()).all(|t| mesh.signed_area(t) > 0.0);
    if !ok {
        mesh.vertices = saved;
    }
}
