//! Transport of tangent vector fields from genus-0 triangulated surfaces
//! onto a common spherical domain, with reproducibility statistics between
//! fields.
//!
//! The pipeline, end to end:
//!
//! 1. [`mesh_io`] loads a surface and its spherical parameterization.
//! 2. [`curvature`] (or any other source) produces a tangent field on it.
//! 3. [`transport`] decomposes the field against the gradients of the
//!    spherical coordinate functions and rebuilds it on the unit sphere.
//! 4. [`resample`] moves fields from each subject's sphere onto a shared
//!    icosphere by exact nearest neighbor.
//! 5. [`stats`] compares fields on the common domain: angular-error maps,
//!    group averages and histograms.
//!
//! [`synth`] generates deterministic test surfaces with analytic reference
//! fields, and [`diffgeo`] holds the discrete operators everything above is
//! built from.

pub mod curvature;
pub mod diffgeo;
pub mod error;
pub mod mesh_io;
pub mod resample;
pub mod stats;
pub mod synth;
pub mod transport;

pub use curvature::{
    principal_direction_field, vertex_curvature, CurvatureField, PrincipalDirection,
    DEFAULT_UMBILIC_GAP,
};
pub use diffgeo::{
    face_gradient, gram_matrix, project_tangent, vertex_frames, vertex_gradient,
    TangentVectorField, VertexFrame, GRAM_CONDITION_LIMIT,
};
pub use error::{Error, Result};
pub use mesh_io::{
    load_mesh, load_param, save_field, save_mesh_off, validate_spherical_topology, FieldFormat,
    MeshFormat, ParamFormat, SphericalParam, TopologyReport, TriangleMesh, VertexField,
};
pub use resample::{
    build_icosphere, icosphere_cached, nearest_on_sphere, resample_field, Correspondence,
    IcosphereDomain,
};
pub use stats::{
    angular_error, average_fields, histogram, naive_angular_error, AngleMode, AngularErrorMap,
    Histogram, SummaryStats,
};
pub use synth::{make_ellipsoid, make_folded_sphere, perturb_scan, FoldedSphereSpec, RadialTerm};
pub use transport::{
    build_atlas, chart_gradients, decompose, pushforward_to_sphere, reconstruct, unit_sphere_mesh,
    ChartAtlas, ChartCoefficients, ChartGradients, ChartId,
};
