//! Angular-error maps, the no-transport baseline, group averaging of vector
//! fields and histogram emission.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use crate::diffgeo::{project_tangent, TangentVectorField};
use crate::error::{Error, Result};
use crate::mesh_io::SphericalParam;
use crate::resample::{nearest_on_sphere, IcosphereDomain};

/// Vector angles live in [0, 180] degrees; axial angles identify v with -v
/// and live in [0, 90].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMode {
    Vector,
    Axial,
}

impl AngleMode {
    pub fn max_degrees(self) -> f64 {
        match self {
            AngleMode::Vector => 180.0,
            AngleMode::Axial => 90.0,
        }
    }
}

/// Per-vertex angular errors in degrees with an exclusion mask.
#[derive(Debug, Clone)]
pub struct AngularErrorMap {
    pub angles_deg: Vec<f64>,
    pub mode: AngleMode,
    pub masked: Vec<bool>,
}

impl AngularErrorMap {
    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    pub fn unmasked(&self) -> impl Iterator<Item = f64> + '_ {
        self.angles_deg
            .iter()
            .zip(&self.masked)
            .filter(|(_, &m)| !m)
            .map(|(&a, _)| a)
    }

    pub fn summary(&self) -> SummaryStats {
        SummaryStats::from_values(self.unmasked().collect())
    }
}

/// Median, mean and 90th percentile of the unmasked angles.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SummaryStats {
    pub median: f64,
    pub mean: f64,
    pub p90: f64,
    pub count: usize,
}

impl SummaryStats {
    pub fn from_values(mut values: Vec<f64>) -> SummaryStats {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let count = values.len();
        if count == 0 {
            return SummaryStats {
                median: f64::NAN,
                mean: f64::NAN,
                p90: f64::NAN,
                count: 0,
            };
        }
        let median = if count % 2 == 1 {
            values[count / 2]
        } else {
            (values[count / 2 - 1] + values[count / 2]) / 2.0
        };
        let mean = values.iter().sum::<f64>() / count as f64;
        // Nearest-rank percentile.
        let rank = ((0.9 * count as f64).ceil() as usize).clamp(1, count);
        let p90 = values[rank - 1];
        SummaryStats {
            median,
            mean,
            p90,
            count,
        }
    }
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>, mode: AngleMode) -> f64 {
    let cos = a.dot(b) / (a.norm() * b.norm());
    let cos = match mode {
        AngleMode::Vector => cos.clamp(-1.0, 1.0),
        AngleMode::Axial => cos.abs().clamp(0.0, 1.0),
    };
    cos.acos().to_degrees()
}

const ZERO_VECTOR_NORM: f64 = 1e-15;

/// Per-vertex angle between two fields on a shared domain. Zero vectors and
/// masked inputs are masked, never errors.
pub fn angular_error(
    a: &TangentVectorField,
    b: &TangentVectorField,
    mode: AngleMode,
) -> Result<AngularErrorMap> {
    if a.len() != b.len() {
        return Err(Error::DomainMismatch {
            context: "angular error operands",
            left: a.len(),
            right: b.len(),
        });
    }
    let mut angles = Vec::with_capacity(a.len());
    let mut masked = Vec::with_capacity(a.len());
    for v in 0..a.len() {
        let va = &a.vectors[v];
        let vb = &b.vectors[v];
        let m = a.masked[v]
            || b.masked[v]
            || va.norm() < ZERO_VECTOR_NORM
            || vb.norm() < ZERO_VECTOR_NORM;
        masked.push(m);
        angles.push(if m { 0.0 } else { angle_between(va, vb, mode) });
    }
    Ok(AngularErrorMap {
        angles_deg: angles,
        mode,
        masked,
    })
}

/// The deliberately inappropriate baseline: correspond both subjects to the
/// icosphere by spherical nearest neighbor, then compare the raw ambient
/// 3-vectors without any transport or tangent-plane alignment.
pub fn naive_angular_error(
    field1: &TangentVectorField,
    param1: &SphericalParam,
    field2: &TangentVectorField,
    param2: &SphericalParam,
    domain: &IcosphereDomain,
    mode: AngleMode,
) -> Result<AngularErrorMap> {
    if field1.len() != param1.len() {
        return Err(Error::DomainMismatch {
            context: "field1 vs param1",
            left: field1.len(),
            right: param1.len(),
        });
    }
    if field2.len() != param2.len() {
        return Err(Error::DomainMismatch {
            context: "field2 vs param2",
            left: field2.len(),
            right: param2.len(),
        });
    }
    let corr1 = nearest_on_sphere(&param1.unit_points(), domain)?;
    let corr2 = nearest_on_sphere(&param2.unit_points(), domain)?;
    let mut angles = Vec::with_capacity(domain.n_vertices());
    let mut masked = Vec::with_capacity(domain.n_vertices());
    for t in 0..domain.n_vertices() {
        let (s1, s2) = (corr1.nearest[t], corr2.nearest[t]);
        let (v1, v2) = (&field1.vectors[s1], &field2.vectors[s2]);
        let m = field1.masked[s1]
            || field2.masked[s2]
            || v1.norm() < ZERO_VECTOR_NORM
            || v2.norm() < ZERO_VECTOR_NORM;
        masked.push(m);
        angles.push(if m { 0.0 } else { angle_between(v1, v2, mode) });
    }
    Ok(AngularErrorMap {
        angles_deg: angles,
        mode,
        masked,
    })
}

/// Per-vertex average of several fields on a shared domain with the given
/// outward normals.
///
/// Vector mode is the arithmetic mean re-projected to the tangent plane.
/// Axial mode takes the leading eigenvector of the averaged outer products
/// sum(v v^T) / k, which maximizes sum(cos^2) to the inputs; vertices with a
/// degenerate leading eigenvalue are masked.
pub fn average_fields(
    fields: &[&TangentVectorField],
    normals: &[Vector3<f64>],
    mode: AngleMode,
) -> Result<TangentVectorField> {
    let Some(first) = fields.first() else {
        return Err(Error::Invalid("average of zero fields".into()));
    };
    let n = first.len();
    if normals.len() != n {
        return Err(Error::DomainMismatch {
            context: "fields vs normals",
            left: n,
            right: normals.len(),
        });
    }
    for f in fields {
        if f.len() != n {
            return Err(Error::DomainMismatch {
                context: "field domains",
                left: n,
                right: f.len(),
            });
        }
    }

    let mut vectors = Vec::with_capacity(n);
    let mut masked = Vec::with_capacity(n);
    for v in 0..n {
        let contributing: Vec<&Vector3<f64>> = fields
            .iter()
            .filter(|f| !f.masked[v] && f.vectors[v].norm() >= ZERO_VECTOR_NORM)
            .map(|f| &f.vectors[v])
            .collect();
        if contributing.is_empty() {
            vectors.push(Vector3::zeros());
            masked.push(true);
            continue;
        }
        match mode {
            AngleMode::Vector => {
                let mean = contributing.iter().fold(Vector3::zeros(), |acc, &x| acc + x)
                    / contributing.len() as f64;
                vectors.push(project_tangent(&mean, &normals[v]));
                masked.push(false);
            }
            AngleMode::Axial => {
                let mut outer = Matrix3::<f64>::zeros();
                for x in &contributing {
                    outer += *x * x.transpose();
                }
                outer /= contributing.len() as f64;
                let eig = nalgebra::SymmetricEigen::new(outer);
                // Sort the 3 eigenpairs descending.
                let mut order = [0usize, 1, 2];
                order.sort_by(|&i, &j| {
                    eig.eigenvalues[j]
                        .partial_cmp(&eig.eigenvalues[i])
                        .unwrap()
                });
                let gap = eig.eigenvalues[order[0]] - eig.eigenvalues[order[1]];
                if gap < 1e-9 {
                    vectors.push(Vector3::zeros());
                    masked.push(true);
                    continue;
                }
                let lead: Vector3<f64> = eig.eigenvectors.column(order[0]).into();
                let projected = project_tangent(&lead, &normals[v]);
                if projected.norm() < ZERO_VECTOR_NORM {
                    vectors.push(Vector3::zeros());
                    masked.push(true);
                } else {
                    vectors.push(projected.normalize());
                    masked.push(false);
                }
            }
        }
    }
    Ok(TangentVectorField::with_mask(vectors, masked))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Count,
    Density,
}

/// Fixed-width histogram over the mode's angular range, with summary stats
/// of the unmasked values attached.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalization: Normalization,
    pub summary: SummaryStats,
}

pub fn histogram(map: &AngularErrorMap, bin_width_deg: f64) -> Result<Histogram> {
    if !(bin_width_deg > 0.0) {
        return Err(Error::Invalid(format!(
            "bin width must be positive, got {bin_width_deg}"
        )));
    }
    let range = map.mode.max_degrees();
    let n_bins = (range / bin_width_deg).ceil() as usize;
    let mut edges = Vec::with_capacity(n_bins + 1);
    for i in 0..=n_bins {
        edges.push((i as f64 * bin_width_deg).min(range));
    }
    let mut counts = vec![0u64; n_bins];
    for angle in map.unmasked() {
        let mut bin = (angle / bin_width_deg).floor() as usize;
        if bin >= n_bins {
            bin = n_bins - 1; // the top edge is inclusive
        }
        counts[bin] += 1;
    }
    Ok(Histogram {
        bin_edges: edges,
        counts,
        normalization: Normalization::Count,
        summary: map.summary(),
    })
}

/// CSV rows `vertex,angle,masked`.
pub fn save_error_map_csv(map: &AngularErrorMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("vertex,angle,masked\n");
    for v in 0..map.len() {
        let _ = writeln!(
            out,
            "{v},{},{}",
            map.angles_deg[v],
            if map.masked[v] { 1 } else { 0 }
        );
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// CSV rows `bin_lo,bin_hi,count`.
pub fn save_histogram_csv(hist: &Histogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, count) in hist.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{count}", hist.bin_edges[i], hist.bin_edges[i + 1]);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// JSON object with bins, counts and summary statistics.
pub fn save_histogram_json(hist: &Histogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let value = serde_json::json!({
        "bin_edges": hist.bin_edges,
        "counts": hist.counts,
        "normalization": match hist.normalization {
            Normalization::Count => "count",
            Normalization::Density => "density",
        },
        "summary": hist.summary,
    });
    let text = serde_json::to_string_pretty(&value).expect("histogram serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn field(vectors: Vec<Vector3<f64>>) -> TangentVectorField {
        TangentVectorField::new(vectors)
    }

    #[test]
    fn identical_opposite_and_orthogonal_pairs() {
        let a = field(vec![
            Vector3::x(),
            Vector3::x(),
            Vector3::x(),
        ]);
        let b = field(vec![
            Vector3::x(),
            -Vector3::x(),
            Vector3::y(),
        ]);
        let vec_map = angular_error(&a, &b, AngleMode::Vector).unwrap();
        assert_relative_eq!(vec_map.angles_deg[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(vec_map.angles_deg[1], 180.0, epsilon = 1e-12);
        assert_relative_eq!(vec_map.angles_deg[2], 90.0, epsilon = 1e-12);
        let ax_map = angular_error(&a, &b, AngleMode::Axial).unwrap();
        assert_relative_eq!(ax_map.angles_deg[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(ax_map.angles_deg[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(ax_map.angles_deg[2], 90.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_vectors_are_masked_not_errors() {
        let a = field(vec![Vector3::x(), Vector3::zeros()]);
        let b = field(vec![Vector3::x(), Vector3::y()]);
        let map = angular_error(&a, &b, AngleMode::Axial).unwrap();
        assert!(!map.masked[0]);
        assert!(map.masked[1]);
        assert_eq!(map.summary().count, 1);
    }

    #[test]
    fn angular_error_is_symmetric_and_within_range() {
        let a = field(vec![Vector3::new(0.3, 1.0, -0.2); 5]);
        let b = field(vec![Vector3::new(-0.7, 0.1, 0.9); 5]);
        let ab = angular_error(&a, &b, AngleMode::Axial).unwrap();
        let ba = angular_error(&b, &a, AngleMode::Axial).unwrap();
        for v in 0..5 {
            assert_eq!(ab.angles_deg[v], ba.angles_deg[v]);
            assert!((0.0..=90.0).contains(&ab.angles_deg[v]));
        }
    }

    #[test]
    fn single_field_average_is_itself() {
        let normals = vec![Vector3::z(); 2];
        let f = field(vec![Vector3::x(), Vector3::new(0.6, 0.8, 0.0)]);
        let vec_avg = average_fields(&[&f], &normals, AngleMode::Vector).unwrap();
        for v in 0..2 {
            assert_relative_eq!((vec_avg.vectors[v] - f.vectors[v]).norm(), 0.0, epsilon = 1e-12);
        }
        let ax_avg = average_fields(&[&f], &normals, AngleMode::Axial).unwrap();
        for v in 0..2 {
            let cos = ax_avg.vectors[v].dot(&f.vectors[v].normalize()).abs();
            assert_relative_eq!(cos, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn axial_average_ignores_signs() {
        let normals = vec![Vector3::z()];
        let v = Vector3::new(0.8, 0.6, 0.0);
        let f1 = field(vec![v]);
        let f2 = field(vec![-v]);
        let f3 = field(vec![v]);
        let avg = average_fields(&[&f1, &f2, &f3], &normals, AngleMode::Axial).unwrap();
        assert!(avg.vectors[0].dot(&v.normalize()).abs() > 1.0 - 1e-9);
    }

    #[test]
    fn axial_average_of_two_vectors_is_their_bisector() {
        // Two unit tangent vectors 40 degrees apart; oracle: brute-force
        // grid search over tangent angles maximizing sum(cos^2).
        let normals = vec![Vector3::z()];
        let a = Vector3::new(1.0, 0.0, 0.0);
        let half = 20.0_f64.to_radians();
        let b = Vector3::new((2.0 * half).cos(), (2.0 * half).sin(), 0.0);
        let avg =
            average_fields(&[&field(vec![a]), &field(vec![b])], &normals, AngleMode::Axial)
                .unwrap();

        let mut best = (f64::MIN, 0.0);
        let mut angle = 0.0;
        while angle < 180.0 {
            let rad = (angle as f64).to_radians();
            let cand = Vector3::new(rad.cos(), rad.sin(), 0.0);
            let score = cand.dot(&a).powi(2) + cand.dot(&b).powi(2);
            if score > best.0 {
                best = (score, angle);
            }
            angle += 0.1;
        }
        let got = avg.vectors[0].y.atan2(avg.vectors[0].x).to_degrees();
        let got = if got < 0.0 { got + 180.0 } else { got };
        let diff = (got - best.1).abs().min((got - best.1 + 180.0).abs());
        assert!(diff < 0.2, "eigen mean {got} vs grid {b:?}", b = best.1);
        // And the bisector is at 20 degrees.
        assert!((got - 20.0).abs() < 0.2);
    }

    #[test]
    fn degenerate_axial_mean_is_masked() {
        let normals = vec![Vector3::z()];
        let f1 = field(vec![Vector3::x()]);
        let f2 = field(vec![Vector3::y()]);
        let avg = average_fields(&[&f1, &f2], &normals, AngleMode::Axial).unwrap();
        assert!(avg.masked[0]);
    }

    #[test]
    fn histogram_of_constant_zero_map() {
        let a = field(vec![Vector3::x(); 12]);
        let map = angular_error(&a, &a, AngleMode::Axial).unwrap();
        let hist = histogram(&map, 1.0).unwrap();
        assert_eq!(hist.counts[0], 12);
        assert_eq!(hist.counts.iter().sum::<u64>(), 12);
    }

    #[test]
    fn uniform_synthetic_angles_fill_equal_bins() {
        let angles: Vec<f64> = (0..90).map(|i| i as f64).collect();
        let map = AngularErrorMap {
            masked: vec![false; angles.len()],
            angles_deg: angles,
            mode: AngleMode::Axial,
        };
        let hist = histogram(&map, 10.0).unwrap();
        assert_eq!(hist.counts.len(), 9);
        assert!(hist.counts.iter().all(|&c| c == 10));
    }

    #[test]
    fn top_edge_is_inclusive_and_counts_match_unmasked() {
        let map = AngularErrorMap {
            angles_deg: vec![0.0, 45.0, 90.0, 33.0],
            mode: AngleMode::Axial,
            masked: vec![false, false, false, true],
        };
        let hist = histogram(&map, 30.0).unwrap();
        assert_eq!(hist.counts.iter().sum::<u64>(), 3);
        assert_eq!(*hist.counts.last().unwrap(), 2); // 90 falls into the last bin
    }

    #[test]
    fn summary_stats_basics() {
        let s = SummaryStats::from_values(vec![1.0, 3.0, 2.0, 4.0]);
        assert_relative_eq!(s.median, 2.5);
        assert_relative_eq!(s.mean, 2.5);
        assert_eq!(s.count, 4);
        let s = SummaryStats::from_values((1..=100).map(|i| i as f64).collect());
        assert_relative_eq!(s.p90, 90.0);
    }

    #[test]
    fn histogram_is_permutation_invariant() {
        let angles = vec![10.0, 20.0, 30.0, 40.0, 50.0];
        let forward = AngularErrorMap {
            angles_deg: angles.clone(),
            mode: AngleMode::Axial,
            masked: vec![false; 5],
        };
        let reversed = AngularErrorMap {
            angles_deg: angles.into_iter().rev().collect(),
            mode: AngleMode::Axial,
            masked: vec![false; 5],
        };
        let h1 = histogram(&forward, 15.0).unwrap();
        let h2 = histogram(&reversed, 15.0).unwrap();
        assert_eq!(h1.counts, h2.counts);
    }
}
