//! Minimal Wavefront OBJ reader: `v` and `f` records, triangles only.

use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh_io::TriangleMesh;

pub fn load_obj(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .by_ref()
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse_line(path, line_no, format!("bad vertex: {e}")))?;
                if coords.len() != 3 {
                    return Err(Error::parse_line(path, line_no, "vertex needs 3 coordinates"));
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let indices: Vec<usize> = tokens
                    .map(|t| {
                        // "i", "i/t", "i/t/n" and "i//n" all start with the
                        // vertex index.
                        let first = t.split('/').next().unwrap_or("");
                        first.parse::<usize>().map_err(|e| {
                            Error::parse_line(path, line_no, format!("bad face index: {e}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if indices.len() != 3 {
                    return Err(Error::parse_line(
                        path,
                        line_no,
                        format!("only triangles supported, face has {} vertices", indices.len()),
                    ));
                }
                if indices.iter().any(|&i| i == 0) {
                    return Err(Error::parse_line(path, line_no, "OBJ indices are 1-based"));
                }
                faces.push([indices[0] - 1, indices[1] - 1, indices[2] - 1]);
            }
            // vt/vn/usemtl/o/g/s and friends are irrelevant here.
            _ => continue,
        }
    }

    TriangleMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_with_attribute_slashes_parses() {
        use std::io::Write;
        let mut f = tempfile::Builder::new().suffix(".obj").tempfile().unwrap();
        write!(
            f,
            "# cube corner\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1/1/1 2/2/2 3/3/3\nf 1//1 4//4 2//2\nf 1 3 4\nf 2 4 3\n"
        )
        .unwrap();
        let mesh = load_obj(f.path()).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_faces(), 4);
        assert_eq!(mesh.faces()[0], [0, 1, 2]);
    }
}
