//! Discrete differential operators on triangle meshes.
//!
//! Piecewise-linear (P1) elements: a scalar field has a constant gradient on
//! each face, and per-vertex gradients are area-weighted averages of the
//! incident face gradients projected to the vertex tangent plane. All
//! reductions run in fixed (face/vertex) order, so results are deterministic.

use nalgebra::{Matrix2, Vector3};

use crate::error::{Error, Result};
use crate::mesh_io::TriangleMesh;

/// Gram matrices with a condition number above this are treated as
/// numerically singular and masked.
pub const GRAM_CONDITION_LIMIT: f64 = 1e8;

/// Per-vertex unit normal and lumped area (one third of the incident face
/// areas).
#[derive(Debug, Clone)]
pub struct VertexFrame {
    normals: Vec<Vector3<f64>>,
    areas: Vec<f64>,
}

impl VertexFrame {
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normal(&self, v: usize) -> Vector3<f64> {
        self.normals[v]
    }

    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn area(&self, v: usize) -> f64 {
        self.areas[v]
    }

    /// Deterministic orthonormal tangent basis (u, v) with u x v = n.
    pub fn tangent_basis(&self, v: usize) -> (Vector3<f64>, Vector3<f64>) {
        tangent_basis(&self.normals[v])
    }
}

/// Orthonormal (u, v) spanning the plane orthogonal to unit `n`, chosen from
/// the coordinate axis least aligned with `n`.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let ax = n.x.abs();
    let ay = n.y.abs();
    let az = n.z.abs();
    let seed = if ax <= ay && ax <= az {
        Vector3::x()
    } else if ay <= az {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = (seed - n * seed.dot(n)).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Remove the component of `v` along unit normal `n`.
pub fn project_tangent(v: &Vector3<f64>, n: &Vector3<f64>) -> Vector3<f64> {
    v - n * v.dot(n)
}

/// Area-weighted vertex normals and lumped vertex areas. Normals point
/// outward on counter-clockwise closed meshes.
pub fn vertex_frames(mesh: &TriangleMesh) -> Result<VertexFrame> {
    let mut normals = vec![Vector3::zeros(); mesh.n_vertices()];
    let mut areas = vec![0.0; mesh.n_vertices()];
    for f in 0..mesh.n_faces() {
        let av = mesh.face_area_vector(f);
        let third = av.norm() / 3.0;
        for &v in &mesh.faces()[f] {
            normals[v] += av;
            areas[v] += third;
        }
    }
    for (v, n) in normals.iter_mut().enumerate() {
        let norm = n.norm();
        if norm <= f64::MIN_POSITIVE.sqrt() {
            return Err(Error::ZeroNormal { vertex: v });
        }
        *n /= norm;
    }
    Ok(VertexFrame { normals, areas })
}

/// Per-vertex tangent 3-vectors with an exclusion mask (`true` = masked).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVectorField {
    pub vectors: Vec<Vector3<f64>>,
    pub masked: Vec<bool>,
}

impl TangentVectorField {
    pub fn new(vectors: Vec<Vector3<f64>>) -> Self {
        let masked = vec![false; vectors.len()];
        TangentVectorField { vectors, masked }
    }

    pub fn with_mask(vectors: Vec<Vector3<f64>>, masked: Vec<bool>) -> Self {
        assert_eq!(vectors.len(), masked.len());
        TangentVectorField { vectors, masked }
    }

    pub fn zeros(len: usize) -> Self {
        TangentVectorField::new(vec![Vector3::zeros(); len])
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest tangency violation |v . n| / |v| over unmasked vertices.
    pub fn max_tangency_error(&self, frame: &VertexFrame) -> f64 {
        self.vectors
            .iter()
            .zip(&self.masked)
            .enumerate()
            .filter(|(_, (_, &m))| !m)
            .map(|(i, (v, _))| {
                let norm = v.norm();
                if norm == 0.0 {
                    0.0
                } else {
                    v.dot(&frame.normal(i)).abs() / norm
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Gradient of the linear interpolant of `corner_values` over face `f`. Lies
/// in the face plane; exact for restrictions of ambient affine functions.
pub fn face_gradient_from_values(
    mesh: &TriangleMesh,
    f: usize,
    corner_values: [f64; 3],
) -> Vector3<f64> {
    let [pa, pb, pc] = mesh.face_points(f);
    let area_vec = (pb - pa).cross(&(pc - pa)) * 0.5;
    let area = area_vec.norm();
    let n = area_vec / area;
    // Hat-function gradient of corner i is (n x e_i) / (2A) with e_i the
    // opposite edge in counter-clockwise order.
    let e = [pc - pb, pa - pc, pb - pa];
    let mut grad = Vector3::zeros();
    for i in 0..3 {
        grad += n.cross(&e[i]) * corner_values[i];
    }
    grad / (2.0 * area)
}

/// Per-face gradients of a per-vertex scalar field.
pub fn face_gradient(mesh: &TriangleMesh, f: &[f64]) -> Result<Vec<Vector3<f64>>> {
    if f.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_vertices(),
            actual: f.len(),
        });
    }
    if let Some(i) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    Ok((0..mesh.n_faces())
        .map(|face| {
            let [a, b, c] = mesh.faces()[face];
            face_gradient_from_values(mesh, face, [f[a], f[b], f[c]])
        })
        .collect())
}

/// Area-weighted average of incident face gradients, projected to the vertex
/// tangent plane.
pub fn vertex_gradient_from_face_values(
    mesh: &TriangleMesh,
    corner_values: &[[f64; 3]],
    frame: &VertexFrame,
) -> TangentVectorField {
    let mut acc = vec![Vector3::zeros(); mesh.n_vertices()];
    let mut weights = vec![0.0; mesh.n_vertices()];
    for f in 0..mesh.n_faces() {
        let grad = face_gradient_from_values(mesh, f, corner_values[f]);
        let area = mesh.face_area(f);
        for &v in &mesh.faces()[f] {
            acc[v] += grad * area;
            weights[v] += area;
        }
    }
    let vectors = acc
        .iter()
        .enumerate()
        .map(|(v, g)| project_tangent(&(g / weights[v]), &frame.normal(v)))
        .collect();
    TangentVectorField::new(vectors)
}

/// Per-vertex tangential gradient of a scalar field.
pub fn vertex_gradient(
    mesh: &TriangleMesh,
    f: &[f64],
    frame: &VertexFrame,
) -> Result<TangentVectorField> {
    if f.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_vertices(),
            actual: f.len(),
        });
    }
    if let Some(i) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let corner_values: Vec<[f64; 3]> = mesh
        .faces()
        .iter()
        .map(|&[a, b, c]| [f[a], f[b], f[c]])
        .collect();
    Ok(vertex_gradient_from_face_values(mesh, &corner_values, frame))
}

/// Per-vertex Gram matrices [g1.g1, g1.g2; g2.g1, g2.g2].
pub fn gram_matrix(g1: &TangentVectorField, g2: &TangentVectorField) -> Vec<Matrix2<f64>> {
    assert_eq!(g1.len(), g2.len());
    g1.vectors
        .iter()
        .zip(&g2.vectors)
        .map(|(a, b)| {
            let aa = a.dot(a);
            let ab = a.dot(b);
            let bb = b.dot(b);
            Matrix2::new(aa, ab, ab, bb)
        })
        .collect()
}

/// Condition number of a symmetric positive semi-definite 2x2 matrix;
/// infinite when singular.
pub fn gram_condition(q: &Matrix2<f64>) -> f64 {
    let half_trace = (q[(0, 0)] + q[(1, 1)]) / 2.0;
    let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
    let disc = (half_trace * half_trace - det).max(0.0).sqrt();
    let lam_max = half_trace + disc;
    let lam_min = half_trace - disc;
    if lam_min <= 0.0 {
        f64::INFINITY
    } else {
        lam_max / lam_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_io::{unit_to_spherical, TriangleMesh};
    use crate::resample::build_icosphere;
    use approx::assert_relative_eq;
    use nalgebra::Point3;

    /// Regular grid on the unit square in z = 0, two triangles per cell.
    pub(crate) fn planar_grid(n: usize) -> TriangleMesh {
        let mut vertices = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point3::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
            }
        }
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut faces = Vec::new();
        for j in 0..n {
            for i in 0..n {
                faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        TriangleMesh::new(vertices, faces).unwrap()
    }

    #[test]
    fn planar_affine_gradient_is_exact() {
        let mesh = planar_grid(8);
        let f: Vec<f64> = mesh.vertices().iter().map(|p| p.x).collect();
        for g in face_gradient(&mesh, &f).unwrap() {
            assert_relative_eq!((g - Vector3::x()).norm(), 0.0, epsilon = 1e-12);
        }
        let frame = vertex_frames(&mesh).unwrap();
        let vg = vertex_gradient(&mesh, &f, &frame).unwrap();
        for v in &vg.vectors {
            assert_relative_eq!((v - Vector3::x()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let mesh = planar_grid(4);
        let f = vec![3.25; mesh.n_vertices()];
        for g in face_gradient(&mesh, &f).unwrap() {
            assert!(g.norm() < 1e-14);
        }
    }

    #[test]
    fn hat_gradients_sum_to_zero_per_face() {
        let domain = build_icosphere(2).unwrap();
        let mesh = domain.mesh();
        for f in 0..mesh.n_faces() {
            let s = face_gradient_from_values(mesh, f, [1.0, 0.0, 0.0])
                + face_gradient_from_values(mesh, f, [0.0, 1.0, 0.0])
                + face_gradient_from_values(mesh, f, [0.0, 0.0, 1.0]);
            assert!(s.norm() < 1e-12, "partition of unity violated: {s:?}");
        }
    }

    #[test]
    fn face_gradient_lies_in_face_plane() {
        let domain = build_icosphere(2).unwrap();
        let mesh = domain.mesh();
        let f: Vec<f64> = mesh.vertices().iter().map(|p| p.z * p.x + p.y).collect();
        let grads = face_gradient(mesh, &f).unwrap();
        for (face, g) in grads.iter().enumerate() {
            let n = mesh.face_normal(face);
            assert!(g.dot(&n).abs() <= 1e-9 * g.norm().max(1e-30));
        }
    }

    #[test]
    fn flat_square_normals_point_up() {
        let mesh = planar_grid(3);
        let frame = vertex_frames(&mesh).unwrap();
        for v in 0..mesh.n_vertices() {
            assert_relative_eq!((frame.normal(v) - Vector3::z()).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn icosphere_normals_are_radial() {
        let domain = build_icosphere(3).unwrap();
        let mesh = domain.mesh();
        let frame = vertex_frames(mesh).unwrap();
        let one_degree = 1f64.to_radians();
        for (v, p) in mesh.vertices().iter().enumerate() {
            let radial = p.coords.normalize();
            let angle = frame.normal(v).dot(&radial).clamp(-1.0, 1.0).acos();
            assert!(angle < one_degree, "vertex {v}: normal off by {angle} rad");
        }
    }

    #[test]
    fn vertex_areas_partition_the_surface() {
        let domain = build_icosphere(3).unwrap();
        let mesh = domain.mesh();
        let frame = vertex_frames(mesh).unwrap();
        let vertex_sum: f64 = (0..mesh.n_vertices()).map(|v| frame.area(v)).sum();
        assert_relative_eq!(vertex_sum, mesh.total_area(), max_relative = 1e-12);
    }

    /// Analytic check: grad of cos(theta) = z on the unit sphere is
    /// -sin(theta) e_theta.
    #[test]
    fn sphere_gradient_of_cos_theta_matches_analytic() {
        let domain = build_icosphere(5).unwrap();
        let mesh = domain.mesh();
        let frame = vertex_frames(mesh).unwrap();
        let f: Vec<f64> = mesh.vertices().iter().map(|p| p.z).collect();
        let grad = vertex_gradient(mesh, &f, &frame).unwrap();

        let mut rels = Vec::new();
        for (v, p) in mesh.vertices().iter().enumerate() {
            let (theta, phi) = unit_to_spherical(&p.coords);
            if theta.sin() < 0.2 {
                continue; // analytic direction degenerates at the poles
            }
            let e_theta = Vector3::new(
                theta.cos() * phi.cos(),
                theta.cos() * phi.sin(),
                -theta.sin(),
            );
            let analytic = e_theta * (-theta.sin());
            rels.push((grad.vectors[v] - analytic).norm() / analytic.norm());
        }
        rels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = rels[rels.len() / 2];
        assert!(median < 0.02, "median relative error {median}");
    }

    #[test]
    fn gradient_error_is_nonincreasing_with_refinement() {
        let mut medians = Vec::new();
        for level in 3..=5 {
            let domain = build_icosphere(level).unwrap();
            let mesh = domain.mesh();
            let frame = vertex_frames(mesh).unwrap();
            let f: Vec<f64> = mesh.vertices().iter().map(|p| p.z).collect();
            let grad = vertex_gradient(mesh, &f, &frame).unwrap();
            let mut rels = Vec::new();
            for (v, p) in mesh.vertices().iter().enumerate() {
                let (theta, phi) = unit_to_spherical(&p.coords);
                if theta.sin() < 0.2 {
                    continue;
                }
                let e_theta = Vector3::new(
                    theta.cos() * phi.cos(),
                    theta.cos() * phi.sin(),
                    -theta.sin(),
                );
                let analytic = e_theta * (-theta.sin());
                rels.push((grad.vectors[v] - analytic).norm() / analytic.norm());
            }
            rels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push(rels[rels.len() / 2]);
        }
        assert!(
            medians.windows(2).all(|w| w[1] <= w[0]),
            "medians not nonincreasing: {medians:?}"
        );
    }

    #[test]
    fn projection_examples_and_idempotency() {
        let z = Vector3::z();
        assert_eq!(project_tangent(&Vector3::new(0.0, 0.0, 1.0), &z), Vector3::zeros());
        assert_eq!(
            project_tangent(&Vector3::new(1.0, 0.0, 1.0), &z),
            Vector3::new(1.0, 0.0, 0.0)
        );
        let v = Vector3::new(0.3, -1.2, 0.7);
        let n = Vector3::new(2.0, -1.0, 0.5).normalize();
        let once = project_tangent(&v, &n);
        let twice = project_tangent(&once, &n);
        assert_relative_eq!((once - twice).norm(), 0.0, epsilon = 1e-15);
        assert!(once.dot(&n).abs() < 1e-15);
    }

    #[test]
    fn gram_of_identical_fields_is_singular() {
        let vecs = vec![Vector3::new(1.0, 2.0, 0.0); 4];
        let g = TangentVectorField::new(vecs);
        for q in gram_matrix(&g, &g) {
            assert_relative_eq!(q.determinant(), 0.0, epsilon = 1e-12);
            assert_eq!(gram_condition(&q), f64::INFINITY);
        }
    }

    #[test]
    fn gram_matches_analytic_chart_metric_at_sample_latitudes() {
        // At colatitude theta the gradients of (theta, phi) on the unit
        // sphere have Gram diag(1, 1/sin^2 theta).
        for &(theta, expected22) in &[(std::f64::consts::FRAC_PI_2, 1.0), (std::f64::consts::FRAC_PI_4, 2.0)] {
            let e_theta = Vector3::new(theta.cos(), 0.0, -theta.sin());
            let e_phi = Vector3::new(0.0, 1.0, 0.0);
            let g1 = TangentVectorField::new(vec![e_theta]);
            let g2 = TangentVectorField::new(vec![e_phi / theta.sin()]);
            let q = gram_matrix(&g1, &g2)[0];
            assert_relative_eq!(q[(0, 0)], 1.0, epsilon = 1e-12);
            assert_relative_eq!(q[(1, 1)], expected22, epsilon = 1e-12);
            assert_relative_eq!(q[(0, 1)], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_normal_umbrella_is_reported() {
        // Two coincident faces with opposite orientation cancel exactly.
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let mesh = TriangleMesh::new(vertices, vec![[0, 1, 2], [0, 2, 1]]).unwrap();
        assert!(matches!(
            vertex_frames(&mesh),
            Err(Error::ZeroNormal { .. })
        ));
    }
}
