//! Plain-text mesh snapshots.
//!
//! Format, whitespace separated:
//! ```text
//! vertices N triangles M boundary K
//! x y            one line per vertex
//! i j k          one line per triangle, CCW indices
//! i j T          one line per boundary edge, T in {G, S}
//! ```

use super::{BoundaryEdge, BoundaryTag, Mesh};
use crate::error::MeshError;
use crate::vec2::Vec2;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

pub fn write_snapshot(mesh: &Mesh, mut w: impl Write) -> std::io::Result<()> {
    writeln!(
        w,
        "vertices {} triangles {} boundary {}",
        mesh.n_vertices(),
        mesh.triangles.len(),
        mesh.boundary.len()
    )?;
    for v in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e}", v.x, v.y)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    for e in &mesh.boundary {
        writeln!(w, "{} {} {}", e.a, e.b, e.tag.letter())?;
    }
    Ok(())
}

pub fn read_snapshot(r: impl BufRead) -> Result<Mesh, MeshError> {
    let bad = |msg: &str| MeshError::BadFile(msg.to_string());
    let mut lines = r.lines().map_while(Result::ok).filter(|l| !l.trim().is_empty());

    let header = lines.next().ok_or_else(|| bad("missing header"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 || tok[0] != "vertices" || tok[2] != "triangles" || tok[4] != "boundary" {
        return Err(bad("header must read `vertices N triangles M boundary K`"));
    }
    let n: usize = tok[1].parse().map_err(|_| bad("bad vertex count"))?;
    let m: usize = tok[3].parse().map_err(|_| bad("bad triangle count"))?;
    let k: usize = tok[5].parse().map_err(|_| bad("bad boundary count"))?;

    let mut vertices = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated vertex block"))?;
        let mut it = line.split_whitespace();
        let x: f64 =
            it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad vertex line"))?;
        let y: f64 =
            it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad vertex line"))?;
        vertices.push(Vec2::new(x, y));
    }

    let mut triangles = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines.next().ok_or_else(|| bad("truncated triangle block"))?;
        let idx: Vec<usize> = line.split_whitespace().filter_map(|s| s.parse().ok()).collect();
        if idx.len() != 3 {
            return Err(bad("bad triangle line"));
        }
        triangles.push([idx[0], idx[1], idx[2]]);
    }

    let mut boundary = Vec::with_capacity(k);
    for _ in 0..k {
        let line = lines.next().ok_or_else(|| bad("truncated boundary block"))?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(bad("bad boundary line"));
        }
        let a: usize = tok[0].parse().map_err(|_| bad("bad boundary index"))?;
        let b: usize = tok[1].parse().map_err(|_| bad("bad boundary index"))?;
        let tag = tok[2]
            .chars()
            .next()
            .and_then(BoundaryTag::from_letter)
            .ok_or_else(|| bad("boundary tag must be G or S"))?;
        boundary.push(BoundaryEdge { a, b, tag });
    }

    let fixed_loop = walk_loop(&boundary, BoundaryTag::Fixed)?;
    let free_loop = walk_loop(&boundary, BoundaryTag::Free)?;
    let mesh = Mesh { vertices, triangles, boundary, fixed_loop, free_loop };
    mesh.validate()?;
    Ok(mesh)
}

/// Chain tagged edges a->b into a single closed loop.
fn walk_loop(boundary: &[BoundaryEdge], tag: BoundaryTag) -> Result<Vec<usize>, MeshError> {
    let mut succ: BTreeMap<usize, usize> = BTreeMap::new();
    for e in boundary.iter().filter(|e| e.tag == tag) {
        if succ.insert(e.a, e.b).is_some() {
            return Err(MeshError::BadFile(format!("vertex {} has two outgoing edges", e.a)));
        }
    }
    let count = succ.len();
    if count < 3 {
        return Err(MeshError::EmptyPolyline { got: count });
    }
    let start = *succ.keys().next().unwrap();
    let mut out = vec![start];
    let mut at = start;
    loop {
        at = *succ
            .get(&at)
            .ok_or_else(|| MeshError::BadFile(format!("loop breaks at vertex {at}")))?;
        if at == start {
            break;
        }
        out.push(at);
        if out.len() > count {
            return Err(MeshError::BadFile("boundary edges form more than one loop".into()));
        }
    }
    if out.len() != count {
        return Err(MeshError::BadFile("boundary edges form more than one loop".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{generate_annulus, InnerBoundary};

    #[test]
    fn snapshot_roundtrip_exact() {
        let mesh = generate_annulus(&InnerBoundary::LShape, 1.25, 0.15, 2).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mesh, &mut buf).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(mesh.triangles, back.triangles);
        assert_eq!(mesh.free_loop.len(), back.free_loop.len());
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            // 17 significant digits reproduce f64 exactly.
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
        let mut buf2 = Vec::new();
        write_snapshot(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_snapshot("vertices 1 boundary 2\n".as_bytes()).is_err());
        assert!(read_snapshot(
            "vertices 3 triangles 1 boundary 0\n0 0\n1 0\n0 1\n0 1 2\n".as_bytes()
        )
        .is_err());
    }
}
