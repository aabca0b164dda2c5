//! FreeSurfer binary formats: triangle surface files and per-vertex curv
//! files. Both are big-endian.
//!
//! Surface layout: 3-byte magic 0xFF 0xFF 0xFE, an info string terminated by
//! "\n\n", int32 vertex and face counts, then vertex coordinates as float32
//! triples and faces as int32 triples.
//!
//! Curv layout: 3-byte magic 0xFF 0xFF 0xFF, int32 vertex count, int32 face
//! count, int32 values-per-vertex (always 1 here), then float32 values.

use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh_io::{TriangleMesh, VertexField};

pub const SURFACE_MAGIC: [u8; 3] = [0xFF, 0xFF, 0xFE];
pub const CURV_MAGIC: [u8; 3] = [0xFF, 0xFF, 0xFF];

/// The info string must terminate within this many bytes; a missing
/// terminator would otherwise swallow the whole file.
const MAX_INFO_LEN: usize = 4096;

/// Big-endian cursor with byte-offset error reporting.
struct BeReader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> BeReader<'a> {
    fn new(buf: &'a [u8], path: &'a Path) -> Self {
        BeReader { buf, pos: 0, path }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::parse_byte(
                self.path,
                self.pos as u64,
                format!("unexpected end of file reading {what}"),
            ));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        let b = self.take(4, what)?;
        Ok(i32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        let b = self.take(4, what)?;
        Ok(f32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn load_surface(path: impl AsRef<Path>) -> Result<(TriangleMesh, String)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = BeReader::new(&bytes, path);

    let magic = r.take(3, "magic")?;
    if magic != SURFACE_MAGIC {
        return Err(Error::parse_byte(
            path,
            0,
            format!("bad magic {magic:02x?}, expected ff ff fe"),
        ));
    }

    // Info string: bytes up to and including the "\n\n" terminator.
    let mut info = Vec::new();
    loop {
        let b = r.u8("info string")?;
        info.push(b);
        if info.ends_with(b"\n\n") {
            break;
        }
        if info.len() > MAX_INFO_LEN {
            return Err(Error::parse_byte(
                path,
                r.pos as u64,
                "info string lacks \\n\\n terminator",
            ));
        }
    }
    let info = String::from_utf8_lossy(&info).into_owned();

    let n_vertices = r.i32("vertex count")?;
    let n_faces = r.i32("face count")?;
    if n_vertices < 0 || n_faces < 0 {
        return Err(Error::parse_byte(
            path,
            (r.pos - 8) as u64,
            format!("negative counts: {n_vertices} vertices, {n_faces} faces"),
        ));
    }

    let mut vertices = Vec::with_capacity(n_vertices as usize);
    for _ in 0..n_vertices {
        let x = r.f32("vertex x")? as f64;
        let y = r.f32("vertex y")? as f64;
        let z = r.f32("vertex z")? as f64;
        vertices.push(Point3::new(x, y, z));
    }

    let mut faces = Vec::with_capacity(n_faces as usize);
    for f in 0..n_faces {
        let mut face = [0usize; 3];
        for slot in &mut face {
            let i = r.i32("face index")?;
            if i < 0 {
                return Err(Error::parse_byte(
                    path,
                    (r.pos - 4) as u64,
                    format!("negative vertex index {i} in face {f}"),
                ));
            }
            *slot = i as usize;
        }
        faces.push(face);
    }

    Ok((TriangleMesh::new(vertices, faces)?, info))
}

pub fn load_curv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = BeReader::new(&bytes, path);

    let magic = r.take(3, "magic")?;
    if magic != CURV_MAGIC {
        return Err(Error::parse_byte(
            path,
            0,
            format!("bad magic {magic:02x?}, expected ff ff ff"),
        ));
    }
    let n_vertices = r.i32("vertex count")?;
    let _n_faces = r.i32("face count")?;
    let vals_per_vertex = r.i32("values per vertex")?;
    if n_vertices < 0 || vals_per_vertex != 1 {
        return Err(Error::parse_byte(
            path,
            3,
            format!("unsupported curv header: {n_vertices} vertices, {vals_per_vertex} values per vertex"),
        ));
    }
    let mut values = Vec::with_capacity(n_vertices as usize);
    for _ in 0..n_vertices {
        values.push(r.f32("value")? as f64);
    }
    Ok(values)
}

/// Values are stored as float32, so round trips are exact only to float32
/// precision.
pub fn save_curv(values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(15 + 4 * values.len());
    out.extend_from_slice(&CURV_MAGIC);
    out.extend_from_slice(&(values.len() as i32).to_be_bytes());
    out.extend_from_slice(&0i32.to_be_bytes());
    out.extend_from_slice(&1i32.to_be_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_be_bytes());
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn save_field_curv(field: &VertexField, path: impl AsRef<Path>) -> Result<()> {
    match field {
        VertexField::Scalar(values) => save_curv(values, path),
        VertexField::Vector(_) => Err(Error::Invalid(
            "curv format stores scalar fields only".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent fixture: bytes assembled directly from the format
    /// description, not via any writer in this crate.
    fn tetra_surface_bytes() -> Vec<u8> {
        let mut b: Vec<u8> = vec![0xFF, 0xFF, 0xFE];
        b.extend_from_slice(b"created by hand\n\n");
        b.extend_from_slice(&4i32.to_be_bytes());
        b.extend_from_slice(&4i32.to_be_bytes());
        let coords: [f32; 12] = [
            1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0,
        ];
        for c in coords {
            b.extend_from_slice(&c.to_be_bytes());
        }
        let faces: [i32; 12] = [0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2];
        for i in faces {
            b.extend_from_slice(&i.to_be_bytes());
        }
        b
    }

    #[test]
    fn hand_built_surface_file_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lh.white");
        std::fs::write(&path, tetra_surface_bytes()).unwrap();
        let (mesh, info) = load_surface(&path).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_faces(), 4);
        assert!(info.starts_with("created by hand"));
        assert_eq!(mesh.vertices()[0], Point3::new(1.0, 1.0, 1.0));
        assert_eq!(mesh.faces()[3], [1, 3, 2]);
    }

    #[test]
    fn truncated_surface_files_error_at_every_cut() {
        let bytes = tetra_surface_bytes();
        let dir = tempfile::tempdir().unwrap();
        for cut in 0..bytes.len() {
            let path = dir.path().join(format!("cut{cut}"));
            std::fs::write(&path, &bytes[..cut]).unwrap();
            assert!(load_surface(&path).is_err(), "cut at {cut} must fail");
        }
    }

    #[test]
    fn wrong_magic_is_reported_with_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        std::fs::write(&path, [0x00, 0x01, 0x02, 0x03]).unwrap();
        match load_surface(&path).unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn curv_round_trip_is_float32_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lh.curv");
        let values: Vec<f64> = (0..257).map(|i| (i as f64 * 0.731).sin() * 3.7).collect();
        save_curv(&values, &path).unwrap();
        let back = load_curv(&path).unwrap();
        assert_eq!(back.len(), values.len());
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(*a as f32, *b as f32);
            assert!((a - b).abs() <= (*a as f32).abs() as f64 * f32::EPSILON as f64);
        }
    }
}
