//! Principal curvature estimation from per-vertex normal differences.
//!
//! Per face, the 2x2 second fundamental form II is the least-squares
//! solution of II [e.u; e.v] = [dn.u; dn.v] over the three edges, where dn
//! is the difference of the endpoint normals and (u, v) a face tangent
//! basis. Face tensors are rotated into each vertex tangent basis and
//! accumulated with one-third face-area weights; the eigen-decomposition of
//! the per-vertex tensor gives principal curvatures and directions.
//!
//! With this convention the unit sphere with outward normals has curvature
//! +1. Principal directions are axial: each is defined only up to sign.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::diffgeo::{project_tangent, tangent_basis, TangentVectorField, VertexFrame};
use crate::error::{Error, Result};
use crate::mesh_io::TriangleMesh;

/// Default relative gap under which a vertex counts as umbilic and its
/// directions are masked from comparisons.
pub const DEFAULT_UMBILIC_GAP: f64 = 0.1;

/// Per-vertex principal curvatures and unit principal directions.
/// `dir_max` belongs to `kappa_max`; the two directions are orthogonal and
/// tangent. `umbilic` marks vertices whose curvature gap is below the
/// requested threshold.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub kappa_max: Vec<f64>,
    pub kappa_min: Vec<f64>,
    pub dir_max: Vec<Vector3<f64>>,
    pub dir_min: Vec<Vector3<f64>>,
    pub umbilic: Vec<bool>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.kappa_max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa_max.is_empty()
    }

    pub fn mean_curvature(&self, v: usize) -> f64 {
        (self.kappa_max[v] + self.kappa_min[v]) / 2.0
    }

    pub fn gaussian_curvature(&self, v: usize) -> f64 {
        self.kappa_max[v] * self.kappa_min[v]
    }
}

/// Which principal direction to extract as a vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrincipalDirection {
    Max,
    Min,
}

/// A per-face curvature tensor in an orthonormal face tangent basis.
#[derive(Debug, Clone)]
pub struct FaceTensor {
    pub basis_u: Vector3<f64>,
    pub basis_v: Vector3<f64>,
    pub tensor: Matrix2<f64>,
}

/// Least-squares second fundamental form per face from endpoint normal
/// differences.
pub fn face_curvature_tensor(mesh: &TriangleMesh, frame: &VertexFrame) -> Result<Vec<FaceTensor>> {
    if frame.len() != mesh.n_vertices() {
        return Err(Error::DomainMismatch {
            context: "frame vs mesh",
            left: frame.len(),
            right: mesh.n_vertices(),
        });
    }
    let mut tensors = Vec::with_capacity(mesh.n_faces());
    for f in 0..mesh.n_faces() {
        let [a, b, c] = mesh.faces()[f];
        let [pa, pb, pc] = mesh.face_points(f);
        let n = mesh.face_normal(f);
        let u = (pb - pa).normalize();
        let u = (u - n * u.dot(&n)).normalize();
        let v = n.cross(&u);

        // Edge vectors and normal differences, both in (u, v) components.
        let edges = [(pc - pb, c, b), (pa - pc, a, c), (pb - pa, b, a)];
        let mut ata = Matrix3::<f64>::zeros();
        let mut atb = Vector3::<f64>::zeros();
        for (e, head, tail) in edges {
            let dn = frame.normal(head) - frame.normal(tail);
            let eu = e.dot(&u);
            let ev = e.dot(&v);
            let du = dn.dot(&u);
            let dv = dn.dot(&v);
            // Unknowns (a, b, c) of II = [a b; b c]; rows
            // [eu ev 0] . x = du and [0 eu ev] . x = dv.
            let rows = [(Vector3::new(eu, ev, 0.0), du), (Vector3::new(0.0, eu, ev), dv)];
            for (row, rhs) in rows {
                ata += row * row.transpose();
                atb += row * rhs;
            }
        }
        let coeffs = ata.try_inverse().map(|inv| inv * atb).ok_or_else(|| {
            Error::Invalid(format!("face {f}: rank-deficient curvature system"))
        })?;
        tensors.push(FaceTensor {
            basis_u: u,
            basis_v: v,
            tensor: Matrix2::new(coeffs.x, coeffs.y, coeffs.y, coeffs.z),
        });
    }
    Ok(tensors)
}

/// Minimal rotation carrying unit vector `from` onto unit vector `to`
/// applied to `v`; identity when the vectors are (anti)parallel.
fn rotate_between(v: &Vector3<f64>, from: &Vector3<f64>, to: &Vector3<f64>) -> Vector3<f64> {
    let c = from.dot(to);
    if 1.0 + c < 1e-12 {
        return *v;
    }
    let w = from.cross(to);
    v + w.cross(v) + w.cross(&w.cross(v)) / (1.0 + c)
}

/// Eigen-decomposition of a symmetric 2x2 matrix; returns
/// (lambda_max, lambda_min, unit eigenvector of lambda_max). Equal
/// eigenvalues tie-break to the first basis direction.
fn symmetric_eigen_2x2(m: &Matrix2<f64>) -> (f64, f64, Vector2<f64>) {
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mean = (a + c) / 2.0;
    let disc = ((a - c) / 2.0).hypot(b);
    let lam_max = mean + disc;
    let lam_min = mean - disc;
    if disc <= f64::EPSILON * mean.abs().max(1.0) {
        return (lam_max, lam_min, Vector2::new(1.0, 0.0));
    }
    // Pick the better conditioned eigenvector formula.
    let v1 = Vector2::new(b, lam_max - a);
    let v2 = Vector2::new(lam_max - c, b);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    (lam_max, lam_min, v.normalize())
}

/// Per-vertex principal curvatures and directions. `umbilic_gap` is the
/// relative eigenvalue gap below which directions are flagged meaningless.
pub fn vertex_curvature(
    mesh: &TriangleMesh,
    frame: &VertexFrame,
    umbilic_gap: f64,
) -> Result<CurvatureField> {
    let face_tensors = face_curvature_tensor(mesh, frame)?;
    let n = mesh.n_vertices();
    let mut acc = vec![Matrix2::<f64>::zeros(); n];
    let mut weights = vec![0.0_f64; n];

    for f in 0..mesh.n_faces() {
        let ft = &face_tensors[f];
        let face_n = mesh.face_normal(f);
        let w = mesh.face_area(f) / 3.0;
        for &v in &mesh.faces()[f] {
            let n_v = frame.normal(v);
            let (u_v, v_v) = tangent_basis(&n_v);
            // Rotate the vertex basis into the face plane and evaluate the
            // face quadratic form on it.
            let up = rotate_between(&u_v, &n_v, &face_n);
            let vp = rotate_between(&v_v, &n_v, &face_n);
            let up2 = Vector2::new(up.dot(&ft.basis_u), up.dot(&ft.basis_v));
            let vp2 = Vector2::new(vp.dot(&ft.basis_u), vp.dot(&ft.basis_v));
            let m = Matrix2::new(
                (up2.transpose() * ft.tensor * up2)[(0, 0)],
                (up2.transpose() * ft.tensor * vp2)[(0, 0)],
                (up2.transpose() * ft.tensor * vp2)[(0, 0)],
                (vp2.transpose() * ft.tensor * vp2)[(0, 0)],
            );
            acc[v] += m * w;
            weights[v] += w;
        }
    }

    let mut kappa_max = Vec::with_capacity(n);
    let mut kappa_min = Vec::with_capacity(n);
    let mut dir_max = Vec::with_capacity(n);
    let mut dir_min = Vec::with_capacity(n);
    let mut umbilic = Vec::with_capacity(n);
    for v in 0..n {
        let tensor = acc[v] / weights[v].max(f64::MIN_POSITIVE);
        let (lam_max, lam_min, ev) = symmetric_eigen_2x2(&tensor);
        let n_v = frame.normal(v);
        let (u_v, v_v) = tangent_basis(&n_v);
        let d_max = (u_v * ev.x + v_v * ev.y).normalize();
        let d_min = n_v.cross(&d_max);
        let scale = lam_max.abs().max(lam_min.abs());
        let gap_rel = if scale > 0.0 {
            (lam_max - lam_min) / scale
        } else {
            0.0
        };
        kappa_max.push(lam_max);
        kappa_min.push(lam_min);
        dir_max.push(d_max);
        dir_min.push(d_min);
        umbilic.push(gap_rel < umbilic_gap);
    }

    Ok(CurvatureField {
        kappa_max,
        kappa_min,
        dir_max,
        dir_min,
        umbilic,
    })
}

/// Extract one principal direction family as a tangent field; umbilic
/// vertices arrive masked.
pub fn principal_direction_field(
    curvature: &CurvatureField,
    which: PrincipalDirection,
) -> TangentVectorField {
    let vectors = match which {
        PrincipalDirection::Max => curvature.dir_max.clone(),
        PrincipalDirection::Min => curvature.dir_min.clone(),
    };
    TangentVectorField::with_mask(vectors, curvature.umbilic.clone())
}
