//! Deterministic synthetic genus-0 surfaces with exact parameterizations
//! and analytic reference fields, plus a simulated rescan perturbation.
//!
//! All generators are bit-deterministic given their spec and seed; random
//! draws go through ChaCha8, which is stable across platforms.

use nalgebra::{Matrix3, Point3, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureField, DEFAULT_UMBILIC_GAP};
use crate::diffgeo::vertex_frames;
use crate::error::{Error, Result};
use crate::mesh_io::{unit_to_spherical, SphericalParam, TriangleMesh};
use crate::resample::build_icosphere;

/// One additive term of the radial displacement field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialTerm {
    /// Real spherical harmonic Y_l^m.
    Harmonic { l: u32, m: i32, coeff: f64 },
    /// Axisymmetric cos(k * theta); keeps the surface a surface of
    /// revolution, for which closed-form curvature references exist.
    CosTheta { k: u32, coeff: f64 },
}

/// Radius r(theta, phi) = 1 + amplitude * sum(terms) over icosphere
/// directions at `base_level`. Must stay positive everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedSphereSpec {
    pub base_level: u32,
    pub amplitude: f64,
    pub terms: Vec<RadialTerm>,
    pub seed: u64,
}

impl FoldedSphereSpec {
    /// Random mix of `n_terms` harmonics with degrees in [2, max_l],
    /// coefficients normalized to unit total weight.
    pub fn random_harmonics(seed: u64, n_terms: usize, max_l: u32, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::with_capacity(n_terms);
        let mut total = 0.0;
        for _ in 0..n_terms {
            let l = rng.random_range(2..=max_l);
            let m = rng.random_range(-(l as i32)..=l as i32);
            let coeff = rng.random::<f64>() * 2.0 - 1.0;
            total += coeff.abs();
            terms.push(RadialTerm::Harmonic { l, m, coeff });
        }
        if total > 0.0 {
            for term in &mut terms {
                if let RadialTerm::Harmonic { coeff, .. } = term {
                    *coeff /= total;
                }
            }
        }
        FoldedSphereSpec {
            base_level: 4,
            amplitude,
            terms,
            seed,
        }
    }

    pub fn radius(&self, theta: f64, phi: f64) -> f64 {
        let mut sum = 0.0;
        for term in &self.terms {
            sum += match *term {
                RadialTerm::Harmonic { l, m, coeff } => {
                    coeff * real_spherical_harmonic(l, m, theta, phi)
                }
                RadialTerm::CosTheta { k, coeff } => coeff * (k as f64 * theta).cos(),
            };
        }
        1.0 + self.amplitude * sum
    }

    fn check_positive_radius(&self) -> Result<()> {
        let n_theta = 181;
        let n_phi = 360;
        let mut min = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n_theta {
            let theta = std::f64::consts::PI * i as f64 / n_theta as f64;
            for j in 0..n_phi {
                let phi = -std::f64::consts::PI + std::f64::consts::TAU * j as f64 / n_phi as f64;
                let r = self.radius(theta, phi);
                if r < min.0 {
                    min = (r, theta, phi);
                }
            }
        }
        if min.0 <= 0.0 {
            return Err(Error::NonPositiveRadius {
                min_radius: min.0,
                theta: min.1,
                phi: min.2,
            });
        }
        Ok(())
    }
}

/// Associated Legendre P_l^m(x) for m >= 0, geodesy convention (no
/// Condon-Shortley phase).
fn associated_legendre(l: u32, m: u32, x: f64) -> f64 {
    debug_assert!(m <= l);
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        let mf = m as f64;
        pll = ((2.0 * llf - 1.0) * x * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

fn factorial_ratio(l: u32, m: u32) -> f64 {
    // (l - m)! / (l + m)! computed as a product to stay in range.
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    ratio
}

/// Orthonormal real spherical harmonics on the unit sphere.
pub fn real_spherical_harmonic(l: u32, m: i32, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs();
    assert!(am <= l, "harmonic order |m| = {am} exceeds degree l = {l}");
    let k = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * factorial_ratio(l, am)).sqrt();
    let p = associated_legendre(l, am, theta.cos());
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => k * p,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * k * (m as f64 * phi).cos() * p,
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * k * (am as f64 * phi).sin() * p,
    }
}

/// Build the folded sphere and its exact parameterization: vertex at
/// direction u sits at r(u) * u and maps to the spherical coordinates of u.
pub fn make_folded_sphere(spec: &FoldedSphereSpec) -> Result<(TriangleMesh, SphericalParam)> {
    spec.check_positive_radius()?;
    let base = build_icosphere(spec.base_level)?;
    let mut theta = Vec::with_capacity(base.n_vertices());
    let mut phi = Vec::with_capacity(base.n_vertices());
    let mut positions = Vec::with_capacity(base.n_vertices());
    for p in base.mesh().vertices() {
        let u = p.coords;
        let (t, f) = unit_to_spherical(&u);
        let r = spec.radius(t, f);
        if r <= 0.0 {
            return Err(Error::NonPositiveRadius {
                min_radius: r,
                theta: t,
                phi: f,
            });
        }
        theta.push(t);
        phi.push(f);
        positions.push(Point3::from(u * r));
    }
    let mesh = base.mesh().with_positions(positions)?;
    let param = SphericalParam::new(theta, phi)?;
    Ok((mesh, param))
}

/// Faces whose orientation flipped under a perturbation, for the caller to
/// warn about.
#[derive(Debug, Clone, Default)]
pub struct PerturbReport {
    pub flipped_faces: Vec<usize>,
}

/// Simulated rescan: independent Gaussian displacement along each vertex
/// normal with standard deviation `sigma` times the mean edge length.
/// Connectivity (and therefore any parameterization) is unchanged.
pub fn perturb_scan(
    mesh: &TriangleMesh,
    sigma: f64,
    seed: u64,
) -> Result<(TriangleMesh, PerturbReport)> {
    if sigma < 0.0 {
        return Err(Error::Invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok((mesh.clone(), PerturbReport::default()));
    }
    let frame = vertex_frames(mesh)?;
    let scale = sigma * mesh.mean_edge_length();
    let normal = Normal::new(0.0, scale).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Point3<f64>> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| p + frame.normal(v) * rng.sample(normal))
        .collect();
    let perturbed = mesh.with_positions(positions)?;
    let flipped_faces = (0..mesh.n_faces())
        .filter(|&f| mesh.face_normal(f).dot(&perturbed.face_normal(f)) < 0.0)
        .collect();
    Ok((perturbed, PerturbReport { flipped_faces }))
}

/// Ellipsoid (a u_x, b u_y, c u_z) over icosphere directions, with its exact
/// parameterization and the analytic curvature field.
///
/// The analytic reference comes from the implicit surface F = x^2/a^2 +
/// y^2/b^2 + z^2/c^2 - 1: with unit normal n = grad F / |grad F| and P = I -
/// n n^T, the tangential eigenpairs of P Hess(F) P / |grad F| are the
/// principal curvatures and directions. This path shares nothing with the
/// normal-difference estimator it serves as an oracle for.
pub fn make_ellipsoid(
    a: f64,
    b: f64,
    c: f64,
    level: u32,
) -> Result<(TriangleMesh, SphericalParam, CurvatureField)> {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return Err(Error::Invalid(format!(
            "semi-axes must be positive, got ({a}, {b}, {c})"
        )));
    }
    let base = build_icosphere(level)?;
    let dirs: Vec<Vector3<f64>> = base.unit_points();
    let param = SphericalParam::from_unit_points(&dirs);
    let positions: Vec<Point3<f64>> = dirs
        .iter()
        .map(|u| Point3::new(a * u.x, b * u.y, c * u.z))
        .collect();

    let n = positions.len();
    let mut kappa_max = Vec::with_capacity(n);
    let mut kappa_min = Vec::with_capacity(n);
    let mut dir_max = Vec::with_capacity(n);
    let mut dir_min = Vec::with_capacity(n);
    let mut umbilic = Vec::with_capacity(n);
    let hess = Matrix3::from_diagonal(&Vector3::new(2.0 / (a * a), 2.0 / (b * b), 2.0 / (c * c)));
    for p in &positions {
        let grad = Vector3::new(
            2.0 * p.x / (a * a),
            2.0 * p.y / (b * b),
            2.0 * p.z / (c * c),
        );
        let inv_len = 1.0 / grad.norm();
        let normal = grad * inv_len;
        let proj = Matrix3::identity() - normal * normal.transpose();
        let shape = proj * hess * proj * inv_len;
        let eig = nalgebra::SymmetricEigen::new(shape);
        // One eigenvector is (numerically) the normal with eigenvalue ~0;
        // the two most tangent eigenpairs are the principal ones.
        let mut pairs: Vec<(f64, Vector3<f64>)> = (0..3)
            .map(|i| (eig.eigenvalues[i], Vector3::from(eig.eigenvectors.column(i))))
            .collect();
        pairs.sort_by(|x, y| {
            x.1.dot(&normal)
                .abs()
                .partial_cmp(&y.1.dot(&normal).abs())
                .unwrap()
        });
        let (mut first, mut second) = (pairs[0].clone(), pairs[1].clone());
        if first.0 < second.0 {
            std::mem::swap(&mut first, &mut second);
        }
        let d_max = (first.1 - normal * first.1.dot(&normal)).normalize();
        kappa_max.push(first.0);
        kappa_min.push(second.0);
        dir_min.push(normal.cross(&d_max));
        dir_max.push(d_max);
        let scale = first.0.abs().max(second.0.abs());
        umbilic.push(if scale > 0.0 {
            (first.0 - second.0) / scale < DEFAULT_UMBILIC_GAP
        } else {
            true
        });
    }

    let mesh = base.mesh().with_positions(positions)?;
    Ok((
        mesh,
        param,
        CurvatureField {
            kappa_max,
            kappa_min,
            dir_max,
            dir_min,
            umbilic,
        },
    ))
}

/// Closed-form references for surfaces of revolution r(theta) about the z
/// axis: principal curvatures along meridians and parallels, surface
/// direction fields and what those directions become on the parameterizing
/// sphere. Pure trigonometry, independent of every mesh-based estimator and
/// of the transport implementation.
pub mod revolution {
    use nalgebra::Vector3;

    use super::{FoldedSphereSpec, RadialTerm};

    /// Axisymmetric radius profile r(theta) = 1 + amplitude * sum c_k cos(k
    /// theta).
    #[derive(Debug, Clone, PartialEq)]
    pub struct Profile {
        pub amplitude: f64,
        pub terms: Vec<(u32, f64)>,
    }

    impl Profile {
        /// Available only when every term of the spec is axisymmetric.
        pub fn from_spec(spec: &FoldedSphereSpec) -> Option<Profile> {
            let mut terms = Vec::with_capacity(spec.terms.len());
            for term in &spec.terms {
                match *term {
                    RadialTerm::CosTheta { k, coeff } => terms.push((k, coeff)),
                    RadialTerm::Harmonic { .. } => return None,
                }
            }
            Some(Profile {
                amplitude: spec.amplitude,
                terms,
            })
        }

        pub fn radius(&self, theta: f64) -> f64 {
            1.0 + self.amplitude
                * self
                    .terms
                    .iter()
                    .map(|&(k, c)| c * (k as f64 * theta).cos())
                    .sum::<f64>()
        }

        pub fn radius_d1(&self, theta: f64) -> f64 {
            -self.amplitude
                * self
                    .terms
                    .iter()
                    .map(|&(k, c)| c * k as f64 * (k as f64 * theta).sin())
                    .sum::<f64>()
        }

        pub fn radius_d2(&self, theta: f64) -> f64 {
            -self.amplitude
                * self
                    .terms
                    .iter()
                    .map(|&(k, c)| c * (k as f64).powi(2) * (k as f64 * theta).cos())
                    .sum::<f64>()
        }

        /// (meridian, parallel) principal curvatures at colatitude `theta`,
        /// positive for the unit sphere with outward normals. Derived from
        /// the profile curve (s, z) = (r sin, r cos)(theta) of the surface
        /// of revolution.
        pub fn principal_curvatures(&self, theta: f64) -> (f64, f64) {
            let r = self.radius(theta);
            let r1 = self.radius_d1(theta);
            let r2 = self.radius_d2(theta);
            let (sin, cos) = theta.sin_cos();
            let s = r * sin;
            let s1 = r1 * sin + r * cos;
            let z1 = r1 * cos - r * sin;
            let s2 = r2 * sin + 2.0 * r1 * cos - r * sin;
            let z2 = r2 * cos - 2.0 * r1 * sin - r * cos;
            let w = s1 * s1 + z1 * z1;
            let kappa_meridian = -(s1 * z2 - z1 * s2) / w.powf(1.5);
            let kappa_parallel = -z1 / (s * w.sqrt());
            (kappa_meridian, kappa_parallel)
        }

        /// Unit meridian direction on the surface at (theta, phi): the
        /// normalized theta-derivative of r(theta) u(theta, phi).
        pub fn meridian_direction(&self, theta: f64, phi: f64) -> Vector3<f64> {
            let r = self.radius(theta);
            let r1 = self.radius_d1(theta);
            let u = super::unit_from(theta, phi);
            let e_theta = Vector3::new(theta.cos() * phi.cos(), theta.cos() * phi.sin(), -theta.sin());
            (u * r1 + e_theta * r).normalize()
        }

        /// Unit parallel direction, identical on the surface and the sphere.
        pub fn parallel_direction(&self, phi: f64) -> Vector3<f64> {
            Vector3::new(-phi.sin(), phi.cos(), 0.0)
        }

        /// Direction of the larger principal curvature on the surface.
        /// `None` within `gap` relative of an umbilic (critical latitude) or
        /// at the poles where the parallel direction degenerates.
        pub fn surface_direction_max(&self, theta: f64, phi: f64, gap: f64) -> Option<Vector3<f64>> {
            let (km, kp) = self.principal_curvatures(theta);
            if theta.sin() < 1e-6 || (km - kp).abs() < gap * km.abs().max(kp.abs()) {
                return None;
            }
            Some(if km > kp {
                self.meridian_direction(theta, phi)
            } else {
                self.parallel_direction(phi)
            })
        }

        /// What [`Self::surface_direction_max`] becomes on the unit sphere:
        /// meridians map to e_theta, parallels to e_phi, because the
        /// transport preserves coordinate-basis coefficients.
        pub fn sphere_direction_max(&self, theta: f64, phi: f64, gap: f64) -> Option<Vector3<f64>> {
            let (km, kp) = self.principal_curvatures(theta);
            if theta.sin() < 1e-6 || (km - kp).abs() < gap * km.abs().max(kp.abs()) {
                return None;
            }
            let e_theta =
                Vector3::new(theta.cos() * phi.cos(), theta.cos() * phi.sin(), -theta.sin());
            Some(if km > kp {
                e_theta
            } else {
                self.parallel_direction(phi)
            })
        }
    }
}

pub(crate) fn unit_from(theta: f64, phi: f64) -> Vector3<f64> {
    crate::mesh_io::spherical_to_unit(theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_amplitude_gives_the_unit_icosphere() {
        let spec = FoldedSphereSpec {
            base_level: 2,
            amplitude: 0.0,
            terms: vec![RadialTerm::CosTheta { k: 3, coeff: 1.0 }],
            seed: 0,
        };
        let (mesh, param) = make_folded_sphere(&spec).unwrap();
        let reference = build_icosphere(2).unwrap();
        for (p, q) in mesh.vertices().iter().zip(reference.mesh().vertices()) {
            assert_relative_eq!((p - q).norm(), 0.0, epsilon = 1e-15);
        }
        for v in 0..param.len() {
            let (t, f) = unit_to_spherical(&reference.mesh().vertices()[v].coords);
            assert_eq!(param.theta()[v], t);
            assert_eq!(param.phi()[v], f);
        }
    }

    #[test]
    fn generation_is_bit_deterministic() {
        let spec = FoldedSphereSpec::random_harmonics(99, 3, 5, 0.2);
        let (m1, p1) = make_folded_sphere(&spec).unwrap();
        let (m2, p2) = make_folded_sphere(&spec).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn generated_parameterizations_have_no_flipped_faces() {
        let spec = FoldedSphereSpec::random_harmonics(7, 3, 5, 0.25);
        let (mesh, param) = make_folded_sphere(&spec).unwrap();
        assert!(param.flipped_faces(&mesh).is_empty());
    }

    #[test]
    fn non_positive_radius_is_rejected() {
        let spec = FoldedSphereSpec {
            base_level: 1,
            amplitude: 2.0,
            terms: vec![RadialTerm::CosTheta { k: 1, coeff: 1.0 }],
            seed: 0,
        };
        assert!(matches!(
            make_folded_sphere(&spec),
            Err(Error::NonPositiveRadius { .. })
        ));
    }

    #[test]
    fn perturb_zero_sigma_is_identity_and_seeds_differ() {
        let spec = FoldedSphereSpec::random_harmonics(3, 2, 4, 0.2);
        let (mesh, _) = make_folded_sphere(&spec).unwrap();
        let (same, report) = perturb_scan(&mesh, 0.0, 1).unwrap();
        assert_eq!(mesh, same);
        assert!(report.flipped_faces.is_empty());

        let (scan_a, _) = perturb_scan(&mesh, 0.05, 1).unwrap();
        let (scan_b, _) = perturb_scan(&mesh, 0.05, 2).unwrap();
        assert_ne!(scan_a, scan_b);
        assert_eq!(scan_a.faces(), mesh.faces());
    }

    #[test]
    fn perturbation_variance_matches_sigma() {
        let domain = build_icosphere(5).unwrap(); // 10242 vertices
        let mesh = domain.mesh();
        let sigma = 0.05;
        let (perturbed, _) = perturb_scan(mesh, sigma, 42).unwrap();
        let h = mesh.mean_edge_length();
        let displacements: Vec<f64> = mesh
            .vertices()
            .iter()
            .zip(perturbed.vertices())
            .map(|(a, b)| (b - a).norm() / h)
            .collect();
        let var = displacements.iter().map(|d| d * d).sum::<f64>() / displacements.len() as f64;
        assert_relative_eq!(var, sigma * sigma, max_relative = 0.05);
    }

    #[test]
    fn unit_sphere_ellipsoid_is_umbilic_with_unit_curvature() {
        let (_, _, analytic) = make_ellipsoid(1.0, 1.0, 1.0, 2).unwrap();
        for v in 0..analytic.len() {
            assert_relative_eq!(analytic.kappa_max[v], 1.0, epsilon = 1e-9);
            assert_relative_eq!(analytic.kappa_min[v], 1.0, epsilon = 1e-9);
            assert!(analytic.umbilic[v]);
        }
    }

    #[test]
    fn spheroid_analytic_directions_are_meridians_or_parallels() {
        let (mesh, param, analytic) = make_ellipsoid(1.0, 1.0, 0.6, 3).unwrap();
        assert_eq!(mesh.n_vertices(), analytic.len());
        for v in 0..analytic.len() {
            if analytic.umbilic[v] {
                continue;
            }
            let theta = param.theta()[v];
            let phi = param.phi()[v];
            let e_phi = Vector3::new(-phi.sin(), phi.cos(), 0.0);
            let meridian = Vector3::new(phi.cos() * theta.cos(), phi.sin() * theta.cos(), 0.0)
                - Vector3::new(0.0, 0.0, 0.6 * theta.sin());
            let meridian = meridian.normalize();
            let d = analytic.dir_max[v];
            let to_parallel = d.dot(&e_phi).abs();
            let to_meridian = d.dot(&meridian).abs();
            assert!(
                to_parallel > 0.999 || to_meridian > 0.999,
                "vertex {v}: direction aligns with neither line of curvature"
            );
        }
    }

    #[test]
    fn ellipsoid_scale_law_holds_analytically() {
        let (_, _, base) = make_ellipsoid(1.0, 1.0, 0.6, 2).unwrap();
        let (_, _, scaled) = make_ellipsoid(2.0, 2.0, 1.2, 2).unwrap();
        for v in 0..base.len() {
            assert_relative_eq!(scaled.kappa_max[v], base.kappa_max[v] / 2.0, max_relative = 1e-9);
            assert_relative_eq!(scaled.kappa_min[v], base.kappa_min[v] / 2.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn spherical_harmonics_match_closed_forms() {
        // Y_0^0 and Y_1^m have simple closed forms.
        let y00 = 0.5 * (1.0 / PI).sqrt();
        assert_relative_eq!(real_spherical_harmonic(0, 0, 0.7, 1.3), y00, epsilon = 1e-14);
        let (theta, phi) = (1.1, -0.4);
        let y10 = (3.0 / (4.0 * PI)).sqrt() * theta.cos();
        assert_relative_eq!(real_spherical_harmonic(1, 0, theta, phi), y10, epsilon = 1e-14);
        let y11 = 2.0_f64.sqrt() * (3.0 / (8.0 * PI)).sqrt() * theta.sin() * phi.cos();
        assert_relative_eq!(real_spherical_harmonic(1, 1, theta, phi), y11, epsilon = 1e-14);
        let y1m1 = 2.0_f64.sqrt() * (3.0 / (8.0 * PI)).sqrt() * theta.sin() * phi.sin();
        assert_relative_eq!(real_spherical_harmonic(1, -1, theta, phi), y1m1, epsilon = 1e-14);
    }

    #[test]
    fn revolution_profile_matches_the_sphere() {
        let profile = revolution::Profile {
            amplitude: 0.0,
            terms: vec![],
        };
        for theta in [0.3, 1.0, PI / 2.0, 2.4] {
            let (km, kp) = profile.principal_curvatures(theta);
            assert_relative_eq!(km, 1.0, epsilon = 1e-12);
            assert_relative_eq!(kp, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn revolution_curvatures_agree_with_the_implicit_ellipsoid_oracle() {
        // A sphere of radius 2 as a trivial profile: r = 2 is not
        // representable (offset fixed at 1), so compare the folded profile
        // against finite differences of the normal instead: at a critical
        // latitude the meridian and parallel curvatures cross.
        let profile = revolution::Profile {
            amplitude: 0.1,
            terms: vec![(3, 1.0)],
        };
        // Finite-difference check of kappa_meridian via the profile curve
        // turning rate.
        let theta = 1.1;
        let eps = 1e-5;
        let pos = |t: f64| {
            let r = profile.radius(t);
            Vector3::new(r * t.sin(), 0.0, r * t.cos())
        };
        let d1 = (pos(theta + eps) - pos(theta - eps)) / (2.0 * eps);
        let d2 = (pos(theta + eps) - pos(theta) * 2.0 + pos(theta - eps)) / (eps * eps);
        let cross = d1.x * d2.z - d1.z * d2.x; // signed curvature numerator in the xz plane
        let km_fd = -cross / d1.norm().powi(3);
        let (km, _) = profile.principal_curvatures(theta);
        assert_relative_eq!(km, km_fd, max_relative = 1e-5);
    }
}
