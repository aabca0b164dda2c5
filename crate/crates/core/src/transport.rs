//! Transport of tangent vector fields from a genus-0 surface onto its
//! parameterizing sphere.
//!
//! A field is decomposed against the gradients of the spherical coordinate
//! functions on the source surface and reassembled from the corresponding
//! gradients on the target. Writing Q for the 2x2 Gram matrix of the
//! coordinate gradients at a vertex, the coefficients c_i = <X, grad x_i>
//! reconstruct the field on the target as sum_j (Q_target^-1 c)_j grad y_j.
//! On a single surface this map is the identity on tangent vectors, and
//! across the parameterization it realizes the pushforward without ever
//! forming the differential explicitly.
//!
//! Spherical coordinates are singular at their poles and cut along the
//! azimuth seam, so each vertex is assigned one of two charts whose pole
//! axes are orthogonal (z and x). The assigned chart keeps the vertex at
//! colatitude in [pi/4, 3pi/4], where both coordinate gradients are well
//! conditioned. Azimuth values are unwrapped per face, so the seam never
//! enters a gradient.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::diffgeo::{
    self, gram_condition, gram_matrix, vertex_gradient_from_face_values, TangentVectorField,
    VertexFrame, GRAM_CONDITION_LIMIT,
};
use crate::error::{Error, Result};
use crate::mesh_io::{validate_spherical_topology, SphericalParam, TriangleMesh};

/// Which coordinate chart a vertex uses: poles on the z axis or, after the
/// fixed rotation taking x to z, poles on the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartId {
    PoleZ,
    PoleX,
}

/// The fixed rotation behind [`ChartId::PoleX`]: (x, y, z) -> (-z, y, x).
fn rotate_x_to_z(u: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(-u.z, u.y, u.x)
}

/// Per-vertex coordinates in both charts plus the chart assignment.
#[derive(Debug, Clone)]
pub struct ChartAtlas {
    theta: [Vec<f64>; 2],
    phi: [Vec<f64>; 2],
    chart_id: Vec<ChartId>,
}

impl ChartAtlas {
    pub fn len(&self) -> usize {
        self.chart_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chart_id.is_empty()
    }

    pub fn chart_id(&self, v: usize) -> ChartId {
        self.chart_id[v]
    }

    pub fn chart_ids(&self) -> &[ChartId] {
        &self.chart_id
    }

    pub fn theta(&self, chart: ChartId, v: usize) -> f64 {
        self.theta[chart_index(chart)][v]
    }

    pub fn phi(&self, chart: ChartId, v: usize) -> f64 {
        self.phi[chart_index(chart)][v]
    }

    /// Colatitude of the vertex in its assigned chart; guaranteed to lie in
    /// [pi/4, 3pi/4] by the orthogonal-axes construction.
    pub fn assigned_theta(&self, v: usize) -> f64 {
        self.theta(self.chart_id[v], v)
    }
}

fn chart_index(chart: ChartId) -> usize {
    match chart {
        ChartId::PoleZ => 0,
        ChartId::PoleX => 1,
    }
}

/// Assign each vertex the chart whose poles are farthest from its spherical
/// image. Ties break toward the z-pole chart.
pub fn build_atlas(param: &SphericalParam) -> ChartAtlas {
    let n = param.len();
    let mut theta = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut phi = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut chart_id = Vec::with_capacity(n);
    for v in 0..n {
        let u = param.unit_point(v);
        let (tz, fz) = crate::mesh_io::unit_to_spherical(&u);
        let (tx, fx) = crate::mesh_io::unit_to_spherical(&rotate_x_to_z(&u));
        theta[0].push(tz);
        phi[0].push(fz);
        theta[1].push(tx);
        phi[1].push(fx);
        // Distance to the nearest pole is min(theta, pi - theta); picking the
        // larger one minimizes |cos theta|, i.e. |u.z| vs |u.x|.
        let chart = if u.z.abs() <= u.x.abs() {
            ChartId::PoleZ
        } else {
            ChartId::PoleX
        };
        chart_id.push(chart);
    }
    ChartAtlas {
        theta,
        phi,
        chart_id,
    }
}

/// Coordinate gradients of the assigned chart at every vertex, with their
/// Gram matrices. `masked` flags vertices whose Gram matrix is numerically
/// singular (condition above [`GRAM_CONDITION_LIMIT`]).
#[derive(Debug, Clone)]
pub struct ChartGradients {
    pub grad_theta: TangentVectorField,
    pub grad_phi: TangentVectorField,
    pub gram: Vec<Matrix2<f64>>,
    pub chart_id: Vec<ChartId>,
    pub masked: Vec<bool>,
}

impl ChartGradients {
    pub fn len(&self) -> usize {
        self.chart_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chart_id.is_empty()
    }
}

/// Smallest representative of `d` modulo 2*pi, in (-pi, pi].
fn wrap_angle(d: f64) -> f64 {
    let w = (d + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Per-face corner values of an azimuth function, unwrapped relative to the
/// first corner so differences stay local.
fn unwrapped_phi_corners(mesh: &TriangleMesh, phi: &[f64]) -> Vec<[f64; 3]> {
    mesh.faces()
        .iter()
        .map(|&[a, b, c]| {
            let pa = phi[a];
            [pa, pa + wrap_angle(phi[b] - pa), pa + wrap_angle(phi[c] - pa)]
        })
        .collect()
}

/// Tangential gradients of both chart coordinate functions at every vertex,
/// evaluated in each vertex's assigned chart.
pub fn chart_gradients(mesh: &TriangleMesh, atlas: &ChartAtlas) -> Result<ChartGradients> {
    if mesh.n_vertices() != atlas.len() {
        return Err(Error::DomainMismatch {
            context: "mesh vs atlas",
            left: mesh.n_vertices(),
            right: atlas.len(),
        });
    }
    let frame = diffgeo::vertex_frames(mesh)?;
    chart_gradients_with_frame(mesh, atlas, &frame)
}

pub fn chart_gradients_with_frame(
    mesh: &TriangleMesh,
    atlas: &ChartAtlas,
    frame: &VertexFrame,
) -> Result<ChartGradients> {
    let n = mesh.n_vertices();
    let mut grad_theta = vec![Vector3::zeros(); n];
    let mut grad_phi = vec![Vector3::zeros(); n];

    for chart in [ChartId::PoleZ, ChartId::PoleX] {
        let ci = chart_index(chart);
        let theta_field = &atlas.theta[ci];
        let phi_field = &atlas.phi[ci];

        let theta_corners: Vec<[f64; 3]> = mesh
            .faces()
            .iter()
            .map(|&[a, b, c]| [theta_field[a], theta_field[b], theta_field[c]])
            .collect();
        let phi_corners = unwrapped_phi_corners(mesh, phi_field);

        let gt = vertex_gradient_from_face_values(mesh, &theta_corners, frame);
        let gp = vertex_gradient_from_face_values(mesh, &phi_corners, frame);
        for v in 0..n {
            if atlas.chart_id[v] == chart {
                grad_theta[v] = gt.vectors[v];
                grad_phi[v] = gp.vectors[v];
            }
        }
    }

    let grad_theta = TangentVectorField::new(grad_theta);
    let grad_phi = TangentVectorField::new(grad_phi);
    let gram = gram_matrix(&grad_theta, &grad_phi);
    let masked: Vec<bool> = gram
        .iter()
        .map(|q| gram_condition(q) > GRAM_CONDITION_LIMIT)
        .collect();

    Ok(ChartGradients {
        grad_theta,
        grad_phi,
        gram,
        chart_id: atlas.chart_ids().to_vec(),
        masked,
    })
}

/// A tangent field expressed in coordinate-basis coefficients: per vertex
/// the pair c_i = <X, grad x_i> plus the Gram matrix it was measured
/// against.
#[derive(Debug, Clone)]
pub struct ChartCoefficients {
    pub coeffs: Vec<Vector2<f64>>,
    pub gram: Vec<Matrix2<f64>>,
    pub chart_id: Vec<ChartId>,
    pub masked: Vec<bool>,
}

impl ChartCoefficients {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Project a tangent field onto coordinate-basis coefficients.
pub fn decompose(field: &TangentVectorField, grads: &ChartGradients) -> Result<ChartCoefficients> {
    if field.len() != grads.len() {
        return Err(Error::DomainMismatch {
            context: "field vs chart gradients",
            left: field.len(),
            right: grads.len(),
        });
    }
    let coeffs = (0..field.len())
        .map(|v| {
            Vector2::new(
                field.vectors[v].dot(&grads.grad_theta.vectors[v]),
                field.vectors[v].dot(&grads.grad_phi.vectors[v]),
            )
        })
        .collect();
    let masked = field
        .masked
        .iter()
        .zip(&grads.masked)
        .map(|(&a, &b)| a || b)
        .collect();
    Ok(ChartCoefficients {
        coeffs,
        gram: grads.gram.clone(),
        chart_id: grads.chart_id.clone(),
        masked,
    })
}

/// Rebuild the tangent field encoded by `coeffs` using the coordinate
/// gradients of the target surface. Requires matching per-vertex charts.
pub fn reconstruct(
    coeffs: &ChartCoefficients,
    target: &ChartGradients,
) -> Result<TangentVectorField> {
    if coeffs.len() != target.len() {
        return Err(Error::DomainMismatch {
            context: "coefficients vs target gradients",
            left: coeffs.len(),
            right: target.len(),
        });
    }
    let n = coeffs.len();
    let mut vectors = Vec::with_capacity(n);
    let mut masked = Vec::with_capacity(n);
    for v in 0..n {
        if coeffs.chart_id[v] != target.chart_id[v] {
            return Err(Error::Invalid(format!(
                "chart mismatch at vertex {v}: source and target atlases disagree"
            )));
        }
        let is_masked = coeffs.masked[v] || target.masked[v];
        masked.push(is_masked);
        if is_masked {
            vectors.push(Vector3::zeros());
            continue;
        }
        let Some(g_tilde) = target.gram[v].try_inverse() else {
            return Err(Error::SingularGram { vertex: v });
        };
        let y = g_tilde * coeffs.coeffs[v];
        vectors.push(target.grad_theta.vectors[v] * y.x + target.grad_phi.vectors[v] * y.y);
    }
    Ok(TangentVectorField::with_mask(vectors, masked))
}

/// The unit-sphere mesh a parameterization maps onto: source connectivity
/// with vertices moved to their spherical images.
pub fn unit_sphere_mesh(mesh: &TriangleMesh, param: &SphericalParam) -> Result<TriangleMesh> {
    if mesh.n_vertices() != param.len() {
        return Err(Error::DomainMismatch {
            context: "mesh vs parameterization",
            left: mesh.n_vertices(),
            right: param.len(),
        });
    }
    mesh.with_positions(param.unit_points().into_iter().map(Into::into).collect())
}

/// Transport a tangent field from `mesh` onto its parameterizing sphere.
/// The mesh must be a closed oriented topological sphere.
pub fn pushforward_to_sphere(
    mesh: &TriangleMesh,
    param: &SphericalParam,
    field: &TangentVectorField,
) -> Result<TangentVectorField> {
    let report = validate_spherical_topology(mesh);
    if !report.is_closed_sphere() {
        return Err(Error::NotSpherical {
            euler: report.euler_characteristic,
            manifold: report.manifold,
            oriented: report.oriented,
        });
    }
    let atlas = build_atlas(param);
    let source = chart_gradients(mesh, &atlas)?;
    let sphere = unit_sphere_mesh(mesh, param)?;
    let target = chart_gradients(&sphere, &atlas)?;
    let coeffs = decompose(field, &source)?;
    reconstruct(&coeffs, &target)
}
