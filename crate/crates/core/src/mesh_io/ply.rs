//! ASCII PLY reader for triangle meshes.

use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh_io::TriangleMesh;

struct ElementDecl {
    name: String,
    count: usize,
    /// Scalar property names, in declaration order; a list property is
    /// recorded as "list:<name>".
    properties: Vec<String>,
}

pub fn load_ply_ascii(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l.trim()));

    let (n, magic) = lines
        .next()
        .ok_or_else(|| Error::parse_line(path, 1, "empty file"))?;
    if magic != "ply" {
        return Err(Error::parse_line(path, n, "missing ply magic"));
    }

    let mut elements: Vec<ElementDecl> = Vec::new();
    let mut header_done = false;
    for (n, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with("comment") {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                let kind = tokens.next().unwrap_or("");
                if kind != "ascii" {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        message: format!("only ascii PLY supported, got '{kind}'"),
                    });
                }
            }
            Some("element") => {
                let name = tokens.next().unwrap_or("").to_string();
                let count: usize = tokens
                    .next()
                    .unwrap_or("")
                    .parse()
                    .map_err(|e| Error::parse_line(path, n, format!("bad element count: {e}")))?;
                elements.push(ElementDecl {
                    name,
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let decl = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse_line(path, n, "property before element"))?;
                let rest: Vec<&str> = tokens.collect();
                if rest.first() == Some(&"list") {
                    let name = rest.last().unwrap_or(&"").to_string();
                    decl.properties.push(format!("list:{name}"));
                } else {
                    decl.properties.push(rest.last().unwrap_or(&"").to_string());
                }
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(Error::parse_line(path, 0, "header without end_header"));
    }

    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for decl in &elements {
        match decl.name.as_str() {
            "vertex" => {
                let ix = decl.properties.iter().position(|p| p == "x");
                let iy = decl.properties.iter().position(|p| p == "y");
                let iz = decl.properties.iter().position(|p| p == "z");
                let (Some(ix), Some(iy), Some(iz)) = (ix, iy, iz) else {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        message: "vertex element lacks x/y/z properties".into(),
                    });
                };
                for _ in 0..decl.count {
                    let (n, line) = lines
                        .next()
                        .ok_or_else(|| Error::parse_line(path, 0, "truncated vertex data"))?;
                    let vals: Vec<f64> = line
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::parse_line(path, n, format!("bad vertex: {e}")))?;
                    if vals.len() < decl.properties.len() {
                        return Err(Error::parse_line(path, n, "short vertex record"));
                    }
                    vertices.push(Point3::new(vals[ix], vals[iy], vals[iz]));
                }
            }
            "face" => {
                for _ in 0..decl.count {
                    let (n, line) = lines
                        .next()
                        .ok_or_else(|| Error::parse_line(path, 0, "truncated face data"))?;
                    let vals: Vec<usize> = line
                        .split_whitespace()
                        .map(|t| t.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::parse_line(path, n, format!("bad face: {e}")))?;
                    if vals.first() != Some(&3) {
                        return Err(Error::parse_line(path, n, "only triangles supported"));
                    }
                    if vals.len() < 4 {
                        return Err(Error::parse_line(path, n, "short face record"));
                    }
                    faces.push([vals[1], vals[2], vals[3]]);
                }
            }
            // Skip unknown elements line by line.
            _ => {
                for _ in 0..decl.count {
                    lines
                        .next()
                        .ok_or_else(|| Error::parse_line(path, 0, "truncated element data"))?;
                }
            }
        }
    }

    TriangleMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ascii_ply_parses() {
        use std::io::Write;
        let mut f = tempfile::Builder::new().suffix(".ply").tempfile().unwrap();
        write!(
            f,
            "ply\nformat ascii 1.0\ncomment tetra\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nelement face 4\nproperty list uchar int vertex_indices\nend_header\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n"
        )
        .unwrap();
        let mesh = load_ply_ascii(f.path()).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_faces(), 4);
    }

    #[test]
    fn binary_ply_is_rejected() {
        use std::io::Write;
        let mut f = tempfile::Builder::new().suffix(".ply").tempfile().unwrap();
        write!(f, "ply\nformat binary_little_endian 1.0\nend_header\n").unwrap();
        assert!(matches!(
            load_ply_ascii(f.path()),
            Err(Error::UnsupportedFormat { .. })
        ));
    }
}
