//! Mesh, parameterization and per-vertex field I/O.
//!
//! Supported mesh formats: OFF, ASCII PLY, Wavefront OBJ and the FreeSurfer
//! binary triangle surface. Per-vertex data travels as CSV, JSON or the
//! FreeSurfer binary curv format. All loaded objects are immutable after
//! construction and safe to share across threads.

mod freesurfer;
mod obj;
mod off;
mod ply;
mod text;

pub use freesurfer::{load_curv, save_curv};
pub use text::{
    load_field, load_param_csv, save_field, save_param_csv, FieldFormat,
};

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Relative tolerance below which a face counts as degenerate. The reference
/// scale is the squared mean edge length of the mesh.
pub const DEGENERATE_AREA_TOL: f64 = 1e-12;

/// Colatitude threshold under which the azimuth is considered undefined and
/// pinned to zero.
pub const POLE_SIN_THETA: f64 = 1e-12;

/// An immutable triangle mesh: vertex positions plus counter-clockwise
/// oriented faces. Index bounds and face non-degeneracy are enforced at
/// construction; topological properties are reported separately by
/// [`validate_spherical_topology`].
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (f, face) in faces.iter().enumerate() {
            for &i in face {
                if i >= vertices.len() {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index: i,
                        vertex_count: vertices.len(),
                    });
                }
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }
        let mesh = TriangleMesh { vertices, faces };
        let scale = mesh.mean_edge_length();
        let degenerate: Vec<usize> = (0..mesh.n_faces())
            .filter(|&f| mesh.face_area(f) < DEGENERATE_AREA_TOL * scale * scale)
            .collect();
        if !degenerate.is_empty() {
            return Err(Error::DegenerateFaces(degenerate));
        }
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_points(&self, f: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Half the cross product of two edges; its norm is the face area and its
    /// direction the face normal for counter-clockwise orientation.
    pub fn face_area_vector(&self, f: usize) -> Vector3<f64> {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a)) * 0.5
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_area_vector(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Vector3<f64> {
        self.face_area_vector(f).normalize()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.faces.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for f in 0..self.n_faces() {
            let [a, b, c] = self.face_points(f);
            sum += (b - a).norm() + (c - b).norm() + (a - c).norm();
        }
        sum / (3 * self.n_faces()) as f64
    }

    /// Faces incident to each vertex, in face order.
    pub fn vertex_face_incidence(&self) -> Vec<Vec<usize>> {
        let mut incidence = vec![Vec::new(); self.n_vertices()];
        for (f, face) in self.faces.iter().enumerate() {
            for &v in face {
                incidence[v].push(f);
            }
        }
        incidence
    }

    /// Undirected edge -> incident face list. Keys are ordered vertex pairs.
    pub fn edge_face_incidence(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (f, &[a, b, c]) in self.faces.iter().enumerate() {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                let key = if i < j { (i, j) } else { (j, i) };
                map.entry(key).or_default().push(f);
            }
        }
        map
    }

    /// New mesh with transformed vertex positions and identical connectivity.
    pub fn with_positions(&self, vertices: Vec<Point3<f64>>) -> Result<Self> {
        if vertices.len() != self.n_vertices() {
            return Err(Error::LengthMismatch {
                expected: self.n_vertices(),
                actual: vertices.len(),
            });
        }
        TriangleMesh::new(vertices, self.faces.clone())
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.with_positions(self.vertices.iter().map(|p| (p.coords * s).into()).collect())
    }
}

/// Per-vertex spherical coordinates: colatitude `theta` in [0, pi] and
/// azimuth `phi` in (-pi, pi]. The azimuth at poles is pinned to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalParam {
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl SphericalParam {
    pub fn new(theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if theta.len() != phi.len() {
            return Err(Error::LengthMismatch {
                expected: theta.len(),
                actual: phi.len(),
            });
        }
        for i in 0..theta.len() {
            if !theta[i].is_finite() || !phi[i].is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if !(0.0..=std::f64::consts::PI).contains(&theta[i]) {
                return Err(Error::OutOfRange {
                    what: "theta",
                    index: i,
                    value: theta[i],
                });
            }
            if phi[i] <= -std::f64::consts::PI || phi[i] > std::f64::consts::PI {
                return Err(Error::OutOfRange {
                    what: "phi",
                    index: i,
                    value: phi[i],
                });
            }
        }
        Ok(SphericalParam { theta, phi })
    }

    /// Spherical coordinates of unit directions. Directions need not be
    /// normalized; only their direction is used.
    pub fn from_unit_points(points: &[Vector3<f64>]) -> Self {
        let mut theta = Vec::with_capacity(points.len());
        let mut phi = Vec::with_capacity(points.len());
        for p in points {
            let (t, f) = unit_to_spherical(&p.normalize());
            theta.push(t);
            phi.push(f);
        }
        SphericalParam { theta, phi }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn unit_point(&self, i: usize) -> Vector3<f64> {
        spherical_to_unit(self.theta[i], self.phi[i])
    }

    pub fn unit_points(&self) -> Vec<Vector3<f64>> {
        (0..self.len()).map(|i| self.unit_point(i)).collect()
    }

    /// Indices of faces whose spherical image has non-positive signed area
    /// (flipped under the parameterization).
    pub fn flipped_faces(&self, mesh: &TriangleMesh) -> Vec<usize> {
        mesh.faces()
            .iter()
            .enumerate()
            .filter(|(_, &[a, b, c])| {
                let (ua, ub, uc) = (self.unit_point(a), self.unit_point(b), self.unit_point(c));
                ua.dot(&ub.cross(&uc)) <= 0.0
            })
            .map(|(f, _)| f)
            .collect()
    }
}

pub fn unit_to_spherical(u: &Vector3<f64>) -> (f64, f64) {
    let theta = u.z.clamp(-1.0, 1.0).acos();
    let phi = if theta.sin() < POLE_SIN_THETA {
        0.0
    } else {
        let mut phi = u.y.atan2(u.x);
        // atan2 returns [-pi, pi]; fold -pi onto +pi to stay in (-pi, pi].
        if phi <= -std::f64::consts::PI {
            phi = std::f64::consts::PI;
        }
        phi
    };
    (theta, phi)
}

pub fn spherical_to_unit(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    )
}

/// Per-vertex scalar or 3-vector data.
#[derive(Debug, Clone, PartialEq)]
pub enum VertexField {
    Scalar(Vec<f64>),
    Vector(Vec<Vector3<f64>>),
}

impl VertexField {
    pub fn len(&self) -> usize {
        match self {
            VertexField::Scalar(v) => v.len(),
            VertexField::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate_finite(&self) -> Result<()> {
        match self {
            VertexField::Scalar(v) => {
                if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::NonFinite { index: i });
                }
            }
            VertexField::Vector(v) => {
                if let Some(i) = v
                    .iter()
                    .position(|x| !(x.x.is_finite() && x.y.is_finite() && x.z.is_finite()))
                {
                    return Err(Error::NonFinite { index: i });
                }
            }
        }
        Ok(())
    }
}

/// Findings of [`validate_spherical_topology`]. `manifold` uses the closed
/// mesh rule: boundary edges count against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyReport {
    pub euler_characteristic: i64,
    pub manifold: bool,
    pub oriented: bool,
    pub boundary_edge_count: usize,
    pub non_manifold_edge_count: usize,
    pub non_manifold_vertex_count: usize,
}

impl TopologyReport {
    /// True when the mesh is a closed, consistently oriented topological
    /// sphere — the precondition of the transport pipeline.
    pub fn is_closed_sphere(&self) -> bool {
        self.euler_characteristic == 2 && self.manifold && self.oriented
    }
}

/// Compute the Euler characteristic and the closed-manifold / orientation
/// flags. Report-only: never fails.
pub fn validate_spherical_topology(mesh: &TriangleMesh) -> TopologyReport {
    let edge_faces = mesh.edge_face_incidence();
    let e = edge_faces.len() as i64;
    let v = mesh.n_vertices() as i64;
    let f = mesh.n_faces() as i64;

    let boundary_edge_count = edge_faces.values().filter(|fs| fs.len() == 1).count();
    let non_manifold_edge_count = edge_faces.values().filter(|fs| fs.len() > 2).count();

    // Orientation: every undirected edge must be traversed once in each
    // direction. A repeated directed edge means two faces agree on the
    // traversal direction, i.e. inconsistent orientation.
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for &[a, b, c] in mesh.faces() {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            *directed.entry((i, j)).or_insert(0) += 1;
        }
    }
    let oriented = directed.values().all(|&n| n == 1);

    let non_manifold_vertex_count = (0..mesh.n_vertices())
        .filter(|&v| !vertex_link_is_single_cycle(mesh, v))
        .count();

    let manifold = boundary_edge_count == 0
        && non_manifold_edge_count == 0
        && non_manifold_vertex_count == 0;

    TopologyReport {
        euler_characteristic: v - e + f,
        manifold,
        oriented,
        boundary_edge_count,
        non_manifold_edge_count,
        non_manifold_vertex_count,
    }
}

/// A vertex of a closed manifold mesh has incident faces forming exactly one
/// cycle around it. Wedges (ordered neighbor pairs around `v`) must chain
/// into a single closed loop.
fn vertex_link_is_single_cycle(mesh: &TriangleMesh, v: usize) -> bool {
    let mut successor: HashMap<usize, usize> = HashMap::new();
    let mut wedges = 0usize;
    for face in mesh.faces() {
        let Some(pos) = face.iter().position(|&i| i == v) else {
            continue;
        };
        let a = face[(pos + 1) % 3];
        let b = face[(pos + 2) % 3];
        if successor.insert(a, b).is_some() {
            return false; // two faces leave the same link vertex: non-manifold fan
        }
        wedges += 1;
    }
    if wedges == 0 {
        return false; // isolated vertex
    }
    let start = *successor.keys().min().unwrap();
    let mut cur = start;
    for _ in 0..wedges {
        match successor.get(&cur) {
            Some(&next) => cur = next,
            None => return false, // open fan (boundary vertex)
        }
    }
    cur == start && {
        // The walk above visits `wedges` edges; it is a single cycle exactly
        // when it returns to the start without the map having extra keys.
        let mut visited = 1usize;
        let mut cur = *successor.get(&start).unwrap();
        while cur != start {
            match successor.get(&cur) {
                Some(&next) => {
                    cur = next;
                    visited += 1;
                    if visited > wedges {
                        return false;
                    }
                }
                None => return false,
            }
        }
        visited == wedges
    }
}

/// Mesh container formats understood by [`load_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    PlyAscii,
    Obj,
    FreeSurferBinary,
}

/// Load a triangle mesh, auto-detecting the format from the extension and,
/// failing that, the file magic.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let format = match format {
        Some(f) => f,
        None => detect_mesh_format(path)?,
    };
    match format {
        MeshFormat::Off => off::load_off(path),
        MeshFormat::PlyAscii => ply::load_ply_ascii(path),
        MeshFormat::Obj => obj::load_obj(path),
        MeshFormat::FreeSurferBinary => freesurfer::load_surface(path).map(|(mesh, _)| mesh),
    }
}

fn detect_mesh_format(path: &Path) -> Result<MeshFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("off") => return Ok(MeshFormat::Off),
        Some("ply") => return Ok(MeshFormat::PlyAscii),
        Some("obj") => return Ok(MeshFormat::Obj),
        _ => {}
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0xFF, 0xFF, 0xFE]) {
        Ok(MeshFormat::FreeSurferBinary)
    } else if bytes.starts_with(b"OFF") {
        Ok(MeshFormat::Off)
    } else if bytes.starts_with(b"ply") {
        Ok(MeshFormat::PlyAscii)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            message: "unknown extension and no recognized magic".into(),
        })
    }
}

/// Write a mesh in OFF format. Coordinates use the shortest exact decimal
/// representation, so an OFF round trip reproduces positions bit-exactly.
pub fn save_mesh_off(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    off::save_off(mesh, path.as_ref())
}

/// Parameterization file formats understood by [`load_param`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamFormat {
    CsvThetaPhi,
    FreeSurferSphereSurface,
}

/// Non-fatal observations made while loading a parameterization.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// Vertex radii of a sphere-surface file deviated from constant by more
    /// than 1% before normalization.
    RadiusDeviation { max_relative: f64 },
}

/// Load a spherical parameterization. `expected_vertices`, when given, is
/// checked against the record count.
pub fn load_param(
    path: impl AsRef<Path>,
    format: ParamFormat,
    expected_vertices: Option<usize>,
) -> Result<(SphericalParam, Vec<ParamWarning>)> {
    let path = path.as_ref();
    let (param, warnings) = match format {
        ParamFormat::CsvThetaPhi => (load_param_csv(path)?, Vec::new()),
        ParamFormat::FreeSurferSphereSurface => {
            let (mesh, _) = freesurfer::load_surface(path)?;
            let mut warnings = Vec::new();
            let radii: Vec<f64> = mesh.vertices().iter().map(|p| p.coords.norm()).collect();
            let mean: f64 = radii.iter().sum::<f64>() / radii.len() as f64;
            let max_rel = radii
                .iter()
                .map(|r| (r - mean).abs() / mean)
                .fold(0.0, f64::max);
            if max_rel > 0.01 {
                warnings.push(ParamWarning::RadiusDeviation {
                    max_relative: max_rel,
                });
            }
            let dirs: Vec<Vector3<f64>> = mesh.vertices().iter().map(|p| p.coords).collect();
            (SphericalParam::from_unit_points(&dirs), warnings)
        }
    };
    if let Some(expected) = expected_vertices {
        if param.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: param.len(),
            });
        }
    }
    Ok((param, warnings))
}
