//! Common icosphere domain and nearest-neighbor resampling of tangent
//! fields between unit spheres.
//!
//! Nearest-neighbor lookup is deliberate: interpolation would smooth the
//! fields being compared. The lookup is exact — a uniform grid over the
//! embedding cube is expanded ring by ring until no unexamined cell can hold
//! a closer point — with ties broken toward the smallest source index, so it
//! agrees bit-for-bit with a brute-force scan.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::diffgeo::{project_tangent, TangentVectorField};
use crate::error::{Error, Result};
use crate::mesh_io::{self, TriangleMesh};

/// Memory guard: level 8 already has 655,362 vertices.
pub const MAX_ICOSPHERE_LEVEL: u32 = 8;

/// Unit-sphere tessellation obtained by subdividing an icosahedron `level`
/// times; has 10 * 4^level + 2 vertices.
#[derive(Debug, Clone)]
pub struct IcosphereDomain {
    mesh: TriangleMesh,
    level: u32,
}

impl IcosphereDomain {
    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_vertices(&self) -> usize {
        self.mesh.n_vertices()
    }

    /// The outward normal of the unit sphere is the vertex position itself.
    pub fn normal(&self, v: usize) -> Vector3<f64> {
        self.mesh.vertices()[v].coords
    }

    pub fn normals(&self) -> Vec<Vector3<f64>> {
        self.mesh.vertices().iter().map(|p| p.coords).collect()
    }

    pub fn unit_points(&self) -> Vec<Vector3<f64>> {
        self.normals()
    }
}

pub fn expected_icosphere_vertices(level: u32) -> usize {
    10 * 4usize.pow(level) + 2
}

/// Build the icosphere. Vertex ordering is deterministic: the 12 icosahedron
/// vertices first, then edge midpoints in face-traversal order per level.
pub fn build_icosphere(level: u32) -> Result<IcosphereDomain> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(Error::LevelTooLarge(level));
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|v| v.normalize())
    .collect();

    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |i: usize, j: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
                let key = if i < j { (i, j) } else { (j, i) };
                *midpoint.entry(key).or_insert_with(|| {
                    let m = ((verts[i] + verts[j]) * 0.5).normalize();
                    verts.push(m);
                    verts.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next_faces.push([a, ab, ca]);
            next_faces.push([b, bc, ab]);
            next_faces.push([c, ca, bc]);
            next_faces.push([ab, bc, ca]);
        }
        faces = next_faces;
    }

    let mesh = TriangleMesh::new(vertices.into_iter().map(Point3::from).collect(), faces)?;
    Ok(IcosphereDomain { mesh, level })
}

/// Load the cached icosphere OFF for `level` from `cache_dir`, building and
/// caching it on a miss.
pub fn icosphere_cached(level: u32, cache_dir: &Path) -> Result<IcosphereDomain> {
    let path = cache_dir.join(format!("icosphere_level{level}.off"));
    if path.is_file() {
        let mesh = mesh_io::load_mesh(&path, Some(mesh_io::MeshFormat::Off))?;
        if mesh.n_vertices() == expected_icosphere_vertices(level) {
            return Ok(IcosphereDomain { mesh, level });
        }
    }
    let domain = build_icosphere(level)?;
    std::fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;
    mesh_io::save_mesh_off(domain.mesh(), &path)?;
    Ok(domain)
}

/// For each target vertex: index of the nearest source point and the
/// geodesic distance in radians. Carries a copy of the source points so a
/// correspondence is self-contained.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub nearest: Vec<usize>,
    pub distance: Vec<f64>,
    pub source_points: Vec<Vector3<f64>>,
}

/// Exact nearest-neighbor index over unit vectors. Chordal and geodesic
/// orderings coincide on the sphere, so the search runs in chordal distance.
pub struct SpherePointIndex {
    points: Vec<Vector3<f64>>,
    cells: HashMap<(i32, i32, i32), Vec<u32>>,
    cell_size: f64,
}

impl SpherePointIndex {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySource);
        }
        // Roughly one point per cell for uniform samplings of the sphere.
        let spacing = (4.0 * std::f64::consts::PI / points.len() as f64).sqrt();
        let cell_size = spacing.clamp(1e-3, 0.7);
        let mut cells: HashMap<(i32, i32, i32), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell_of(p, cell_size)).or_default().push(i as u32);
        }
        Ok(SpherePointIndex {
            points,
            cells,
            cell_size,
        })
    }

    fn cell_of(p: &Vector3<f64>, cell_size: f64) -> (i32, i32, i32) {
        (
            (p.x / cell_size).floor() as i32,
            (p.y / cell_size).floor() as i32,
            (p.z / cell_size).floor() as i32,
        )
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    /// Index and squared chordal distance of the exact nearest point, ties
    /// toward the smallest index.
    pub fn nearest(&self, q: &Vector3<f64>) -> (usize, f64) {
        let (cx, cy, cz) = Self::cell_of(q, self.cell_size);
        let mut best: Option<(f64, u32)> = None;

        // Unit vectors are at most 2 apart, so every point lives within this
        // many Chebyshev rings of the query cell.
        let max_ring = (2.2 / self.cell_size).ceil() as i32 + 1;
        let mut ring = 0i32;
        while ring <= max_ring {
            // Any point in a cell at Chebyshev ring k is at least
            // (k-1) * cell_size away from q. The bound is strict so that
            // equal-distance candidates in farther rings are still examined
            // and index ties resolve exactly as brute force.
            if let Some((best_d2, _)) = best {
                let lower = (ring - 1).max(0) as f64 * self.cell_size;
                if lower * lower > best_d2 {
                    break;
                }
            }
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        let Some(bucket) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &i in bucket {
                            let d2 = (self.points[i as usize] - q).norm_squared();
                            let better = match best {
                                None => true,
                                Some((bd, bi)) => d2 < bd || (d2 == bd && i < bi),
                            };
                            if better {
                                best = Some((d2, i));
                            }
                        }
                    }
                }
            }
            ring += 1;
        }

        let (d2, i) = best.expect("non-empty index always yields a neighbor");
        (i as usize, d2)
    }
}

fn chord2_to_angle(d2: f64) -> f64 {
    // |p - q|^2 = 2 - 2 cos(angle) for unit vectors.
    (1.0 - d2 / 2.0).clamp(-1.0, 1.0).acos()
}

/// Exact nearest source point for every vertex of the target icosphere.
pub fn nearest_on_sphere(
    source_points: &[Vector3<f64>],
    targets: &IcosphereDomain,
) -> Result<Correspondence> {
    let index = SpherePointIndex::new(source_points.to_vec())?;
    let results: Vec<(usize, f64)> = targets
        .unit_points()
        .par_iter()
        .map(|q| index.nearest(q))
        .collect();
    let mut nearest = Vec::with_capacity(results.len());
    let mut distance = Vec::with_capacity(results.len());
    for (i, d2) in results {
        nearest.push(i);
        distance.push(chord2_to_angle(d2));
    }
    Ok(Correspondence {
        nearest,
        distance,
        source_points: source_points.to_vec(),
    })
}

/// Rotate `v` by the minimal rotation carrying unit vector `from` onto unit
/// vector `to`. Undefined for antipodal pairs (guarded by callers).
pub fn rotate_along_great_circle(
    v: &Vector3<f64>,
    from: &Vector3<f64>,
    to: &Vector3<f64>,
) -> Vector3<f64> {
    let c = from.dot(to);
    let w = from.cross(to);
    if 1.0 + c < 1e-12 {
        return *v; // antipodal; callers reject these correspondences
    }
    v + w.cross(v) + w.cross(&w.cross(v)) / (1.0 + c)
}

/// Pull the nearest source vector to each target vertex, transporting it by
/// the minimal great-circle rotation and re-projecting to the target tangent
/// plane. Masks propagate.
pub fn resample_field(
    field: &TangentVectorField,
    corr: &Correspondence,
    targets: &IcosphereDomain,
) -> Result<TangentVectorField> {
    if field.len() != corr.source_points.len() {
        return Err(Error::DomainMismatch {
            context: "field vs correspondence source points",
            left: field.len(),
            right: corr.source_points.len(),
        });
    }
    if corr.nearest.len() != targets.n_vertices() {
        return Err(Error::DomainMismatch {
            context: "correspondence vs target domain",
            left: corr.nearest.len(),
            right: targets.n_vertices(),
        });
    }
    for (t, &d) in corr.distance.iter().enumerate() {
        if d >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::AntipodalCorrespondence {
                target: t,
                distance: d,
            });
        }
    }

    let mut vectors = Vec::with_capacity(targets.n_vertices());
    let mut masked = Vec::with_capacity(targets.n_vertices());
    for t in 0..targets.n_vertices() {
        let s = corr.nearest[t];
        let from = corr.source_points[s].normalize();
        let to = targets.normal(t);
        let moved = rotate_along_great_circle(&field.vectors[s], &from, &to);
        vectors.push(project_tangent(&moved, &to));
        masked.push(field.masked[s]);
    }
    Ok(TangentVectorField::with_mask(vectors, masked))
}
