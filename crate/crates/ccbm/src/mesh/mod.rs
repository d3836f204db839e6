pub mod generate;
pub mod geometry;
pub mod hausdorff;
pub mod io;
pub mod quality;

use crate::error::MeshError;
use crate::vec2::Vec2;
use std::collections::BTreeMap;

/// Which boundary a tagged edge or vertex lies on.
///
/// `Fixed` is the inner data boundary where the potential is prescribed;
/// `Free` is the outer boundary the descent moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Fixed,
    Free,
}

impl BoundaryTag {
    pub fn letter(self) -> char {
        match self {
            BoundaryTag::Fixed => 'G',
            BoundaryTag::Free => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'G' => Some(BoundaryTag::Fixed),
            'S' => Some(BoundaryTag::Free),
            _ => None,
        }
    }
}

/// Oriented boundary edge `a -> b`, CCW along its loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// Conforming P1 triangulation of an annular domain.
///
/// Invariants (checked by `validate`):
/// - triangles are CCW with strictly positive area;
/// - every boundary edge belongs to exactly one triangle;
/// - `fixed_loop` and `free_loop` are closed, disjoint, and together cover
///   the boundary edge set, both stored CCW as plane curves.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    pub fixed_loop: Vec<usize>,
    pub free_loop: Vec<usize>,
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_points(t);
        0.5 * (q - p).cross(r - p)
    }

    /// True for vertices on the fixed boundary.
    pub fn fixed_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_vertices()];
        for &v in &self.fixed_loop {
            m[v] = true;
        }
        m
    }

    /// True for vertices on the free boundary.
    pub fn free_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_vertices()];
        for &v in &self.free_loop {
            m[v] = true;
        }
        m
    }

    /// Free-boundary vertex positions, CCW, not closed.
    pub fn free_polyline(&self) -> Vec<Vec2> {
        self.free_loop.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn fixed_polyline(&self) -> Vec<Vec2> {
        self.fixed_loop.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Longest edge over the whole mesh; a proxy for the resolution h.
    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let e = self.vertices[t[(k + 1) % 3]] - self.vertices[t[k]];
                h = h.max(e.norm());
            }
        }
        h
    }

    /// Displace every vertex by `t * v` except fixed-boundary vertices, which
    /// keep their positions bit for bit. Connectivity is shared unchanged.
    pub fn moved_by(&self, v: &[Vec2], t: f64) -> Result<Mesh, MeshError> {
        assert_eq!(v.len(), self.n_vertices());
        let fixed = self.fixed_mask();
        let mut out = self.clone();
        for (i, p) in out.vertices.iter_mut().enumerate() {
            if !fixed[i] {
                *p = *p + v[i] * t;
            }
        }
        for tri in 0..out.triangles.len() {
            let a = out.signed_area(tri);
            if a <= 0.0 {
                return Err(MeshError::MeshInversion { tri, area: a });
            }
        }
        Ok(out)
    }

    /// Full structural check; cheap enough to run after generation and IO.
    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.n_vertices();
        if self.fixed_loop.len() < 3 || self.free_loop.len() < 3 {
            return Err(MeshError::EmptyPolyline {
                got: self.fixed_loop.len().min(self.free_loop.len()),
            });
        }
        for (t, _) in self.triangles.iter().enumerate() {
            let a = self.signed_area(t);
            if !(a > 0.0) {
                return Err(MeshError::DegenerateTriangle { tri: t, area: a });
            }
        }

        // Count how many triangles use each undirected edge.
        let mut edge_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_use.entry(key).or_insert(0) += 1;
            }
        }

        let mut tagged: BTreeMap<(usize, usize), BoundaryTag> = BTreeMap::new();
        for (i, e) in self.boundary.iter().enumerate() {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(MeshError::BadFile(format!("boundary edge {i} out of range")));
            }
            let key = (e.a.min(e.b), e.a.max(e.b));
            match edge_use.get(&key) {
                Some(1) => {}
                _ => {
                    return Err(MeshError::BadFile(format!(
                        "boundary edge {}-{} not on exactly one triangle",
                        e.a, e.b
                    )))
                }
            }
            if tagged.insert(key, e.tag).is_some() {
                return Err(MeshError::BadFile(format!("duplicate boundary edge {}-{}", e.a, e.b)));
            }
        }
        // Every once-used edge must be tagged, and vice versa.
        for (&key, &uses) in &edge_use {
            if uses == 1 && !tagged.contains_key(&key) {
                return Err(MeshError::BadFile(format!(
                    "hull edge {}-{} missing from boundary list",
                    key.0, key.1
                )));
            }
            if uses > 2 {
                return Err(MeshError::BadFile(format!(
                    "edge {}-{} shared by {} triangles",
                    key.0, key.1, uses
                )));
            }
        }

        self.check_loop(&self.fixed_loop, BoundaryTag::Fixed, &tagged)?;
        self.check_loop(&self.free_loop, BoundaryTag::Free, &tagged)?;
        for v in &self.fixed_loop {
            if self.free_loop.contains(v) {
                return Err(MeshError::BadFile(format!("vertex {v} on both boundary loops")));
            }
        }
        Ok(())
    }

    fn check_loop(
        &self,
        loop_: &[usize],
        tag: BoundaryTag,
        tagged: &BTreeMap<(usize, usize), BoundaryTag>,
    ) -> Result<(), MeshError> {
        let k = loop_.len();
        let count = self.boundary.iter().filter(|e| e.tag == tag).count();
        if count != k {
            return Err(MeshError::BadFile(format!(
                "loop length {k} does not match {count} edges tagged {}",
                tag.letter()
            )));
        }
        for j in 0..k {
            let (a, b) = (loop_[j], loop_[(j + 1) % k]);
            let key = (a.min(b), a.max(b));
            if tagged.get(&key) != Some(&tag) {
                return Err(MeshError::BadFile(format!(
                    "loop edge {a}-{b} missing or tagged differently"
                )));
            }
        }
        // CCW as a plane curve.
        let mut twice_area = 0.0;
        for j in 0..k {
            let (p, q) = (self.vertices[loop_[j]], self.vertices[loop_[(j + 1) % k]]);
            twice_area += p.cross(q);
        }
        if twice_area <= 0.0 {
            return Err(MeshError::BadFile(format!("loop tagged {} is not CCW", tag.letter())));
        }
        Ok(())
    }
}
