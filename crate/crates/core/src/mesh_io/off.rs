//! OFF (Object File Format) reader and writer.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh_io::TriangleMesh;

/// Iterator over non-empty, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i as u64 + 1, line))
        }
    })
}

pub fn load_off(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content_lines(&text);

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse_line(path, 1, "empty file"))?;
    // Counts may share the header line ("OFF 8 12 0") or follow it.
    let mut rest = match header.strip_prefix("OFF") {
        Some(rest) => rest.trim().to_string(),
        None => return Err(Error::parse_line(path, line_no, "missing OFF header")),
    };
    let mut counts_line = line_no;
    if rest.is_empty() {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse_line(path, line_no, "missing count line"))?;
        rest = line.to_string();
        counts_line = n;
    }
    let counts: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse_line(path, counts_line, format!("bad counts: {e}")))?;
    if counts.len() < 2 {
        return Err(Error::parse_line(
            path,
            counts_line,
            "count line needs at least vertex and face counts",
        ));
    }
    let (n_vertices, n_faces) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse_line(path, counts_line, "truncated vertex list"))?;
        let coords: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse_line(path, n, format!("bad vertex: {e}")))?;
        if coords.len() != 3 {
            return Err(Error::parse_line(path, n, "vertex needs 3 coordinates"));
        }
        vertices.push(Point3::new(coords[0], coords[1], coords[2]));
    }

    let mut faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse_line(path, counts_line, "truncated face list"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let arity: usize = tokens[0]
            .parse()
            .map_err(|e| Error::parse_line(path, n, format!("bad face arity: {e}")))?;
        if arity != 3 {
            return Err(Error::parse_line(
                path,
                n,
                format!("only triangles supported, face has {arity} vertices"),
            ));
        }
        if tokens.len() < 4 {
            return Err(Error::parse_line(path, n, "truncated face record"));
        }
        let mut face = [0usize; 3];
        for (k, t) in tokens[1..4].iter().enumerate() {
            face[k] = t
                .parse()
                .map_err(|e| Error::parse_line(path, n, format!("bad face index: {e}")))?;
        }
        faces.push(face);
    }

    TriangleMesh::new(vertices, faces)
}

pub fn save_off(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.n_vertices(), mesh.n_faces());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::Builder::new().suffix(".off").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn regular_tetrahedron_off_loads() {
        let f = write_temp(
            "OFF\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n",
        );
        let mesh = load_off(f.path()).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_faces(), 4);
    }

    #[test]
    fn out_of_range_index_is_an_index_error() {
        let f = write_temp(
            "OFF\n5 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 0\n3 0 1 10\n",
        );
        let err = load_off(f.path()).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 10, .. }));
    }

    #[test]
    fn round_trip_is_exact() {
        let mesh = crate::mesh_io::tests::tetrahedron();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.off");
        save_off(&mesh, &path).unwrap();
        let re = load_off(&path).unwrap();
        assert_eq!(mesh, re);
    }

    #[test]
    fn truncated_files_error_instead_of_panicking() {
        let full =
            "OFF\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
        for cut in 0..full.len() {
            let f = write_temp(&full[..cut]);
            let _ = load_off(f.path()); // must not panic; Err expected for most cuts
        }
        let f = write_temp(&full[..full.len() - 20]);
        assert!(load_off(f.path()).is_err());
    }
}
