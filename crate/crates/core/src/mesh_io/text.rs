//! CSV and JSON per-vertex data files.
//!
//! CSV headers are `index,value` for scalars, `index,x,y,z` for vectors and
//! `index,theta,phi` for parameterizations. Floats are written in the
//! shortest exact decimal form, so text round trips are bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh_io::{freesurfer, SphericalParam, VertexField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFormat {
    Csv,
    FreeSurferCurv,
    Json,
}

pub fn save_field(field: &VertexField, path: impl AsRef<Path>, format: FieldFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        FieldFormat::Csv => {
            let mut out = String::new();
            match field {
                VertexField::Scalar(values) => {
                    out.push_str("index,value\n");
                    for (i, v) in values.iter().enumerate() {
                        let _ = writeln!(out, "{i},{v}");
                    }
                }
                VertexField::Vector(values) => {
                    out.push_str("index,x,y,z\n");
                    for (i, v) in values.iter().enumerate() {
                        let _ = writeln!(out, "{i},{},{},{}", v.x, v.y, v.z);
                    }
                }
            }
            std::fs::write(path, out).map_err(|e| Error::io(path, e))
        }
        FieldFormat::FreeSurferCurv => freesurfer::save_field_curv(field, path),
        FieldFormat::Json => {
            let value = match field {
                VertexField::Scalar(values) => serde_json::json!(values),
                VertexField::Vector(values) => serde_json::json!(values
                    .iter()
                    .map(|v| [v.x, v.y, v.z])
                    .collect::<Vec<_>>()),
            };
            let text = serde_json::to_string(&value).expect("plain arrays always serialize");
            std::fs::write(path, text).map_err(|e| Error::io(path, e))
        }
    }
}

pub fn load_field(path: impl AsRef<Path>, format: FieldFormat) -> Result<VertexField> {
    let path = path.as_ref();
    let field = match format {
        FieldFormat::Csv => load_field_csv(path)?,
        FieldFormat::FreeSurferCurv => VertexField::Scalar(freesurfer::load_curv(path)?),
        FieldFormat::Json => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::parse_line(path, e.line() as u64, e.to_string()))?;
            json_to_field(path, &value)?
        }
    };
    field.validate_finite()?;
    Ok(field)
}

fn json_to_field(path: &Path, value: &serde_json::Value) -> Result<VertexField> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::parse_line(path, 1, "expected a JSON array"))?;
    if arr.iter().all(|e| e.is_number()) {
        let values = arr.iter().map(|e| e.as_f64().unwrap_or(f64::NAN)).collect();
        return Ok(VertexField::Scalar(values));
    }
    let mut vectors = Vec::with_capacity(arr.len());
    for (i, e) in arr.iter().enumerate() {
        let triple = e
            .as_array()
            .filter(|t| t.len() == 3)
            .ok_or_else(|| Error::parse_line(path, 1, format!("entry {i} is not an [x,y,z] triple")))?;
        vectors.push(Vector3::new(
            triple[0].as_f64().unwrap_or(f64::NAN),
            triple[1].as_f64().unwrap_or(f64::NAN),
            triple[2].as_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(VertexField::Vector(vectors))
}

fn load_field_csv(path: &Path) -> Result<VertexField> {
    let rows = read_csv_rows(path)?;
    let Some((header, data)) = rows.split_first() else {
        return Err(Error::parse_line(path, 1, "empty CSV"));
    };
    match header.1.len() {
        2 => {
            let mut values = Vec::with_capacity(data.len());
            for (line, row) in data {
                values.push(parse_f64(path, *line, &row[1])?);
            }
            Ok(VertexField::Scalar(values))
        }
        4 => {
            let mut values = Vec::with_capacity(data.len());
            for (line, row) in data {
                values.push(Vector3::new(
                    parse_f64(path, *line, &row[1])?,
                    parse_f64(path, *line, &row[2])?,
                    parse_f64(path, *line, &row[3])?,
                ));
            }
            Ok(VertexField::Vector(values))
        }
        n => Err(Error::parse_line(
            path,
            header.0,
            format!("expected 2 or 4 columns, found {n}"),
        )),
    }
}

pub fn save_param_csv(param: &SphericalParam, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("index,theta,phi\n");
    for i in 0..param.len() {
        let _ = writeln!(out, "{i},{},{}", param.theta()[i], param.phi()[i]);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_param_csv(path: impl AsRef<Path>) -> Result<SphericalParam> {
    let path = path.as_ref();
    let rows = read_csv_rows(path)?;
    let Some((header, data)) = rows.split_first() else {
        return Err(Error::parse_line(path, 1, "empty CSV"));
    };
    if header.1.len() != 3 {
        return Err(Error::parse_line(
            path,
            header.0,
            format!("expected 3 columns (index,theta,phi), found {}", header.1.len()),
        ));
    }
    let mut theta = Vec::with_capacity(data.len());
    let mut phi = Vec::with_capacity(data.len());
    for (line, row) in data {
        theta.push(parse_f64(path, *line, &row[1])?);
        phi.push(parse_f64(path, *line, &row[2])?);
    }
    SphericalParam::new(theta, phi)
}

fn parse_f64(path: &Path, line: u64, token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse_line(path, line, format!("bad number '{token}': {e}")))
}

/// Rows as (1-based line, fields). All rows must have the header's width.
fn read_csv_rows(path: &Path) -> Result<Vec<(u64, Vec<String>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::parse_line(
                    path,
                    line_no,
                    format!("expected {w} fields, found {}", fields.len()),
                ));
            }
            _ => {}
        }
        rows.push((line_no, fields));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let values: Vec<f64> = (0..12).map(|i| (i as f64).exp() * 1e-3).collect();
        save_field(&VertexField::Scalar(values.clone()), &path, FieldFormat::Csv).unwrap();
        match load_field(&path, FieldFormat::Csv).unwrap() {
            VertexField::Scalar(back) => assert_eq!(back, values),
            _ => panic!("wrong field kind"),
        }
    }

    #[test]
    fn constant_scalar_csv_has_one_row_per_vertex() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        save_field(&VertexField::Scalar(vec![1.0; 12]), &path, FieldFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.ends_with(",1")));
    }

    #[test]
    fn vector_json_is_an_array_of_triples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        let values = vec![Vector3::new(1.0, 2.0, 3.0), Vector3::new(-0.5, 0.25, 0.0)];
        save_field(&VertexField::Vector(values.clone()), &path, FieldFormat::Json).unwrap();
        let parsed: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 2);
        assert_eq!(parsed[0][2], serde_json::json!(3.0));
        match load_field(&path, FieldFormat::Json).unwrap() {
            VertexField::Vector(back) => assert_eq!(back, values),
            _ => panic!("wrong field kind"),
        }
    }

    #[test]
    fn param_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let param = SphericalParam::new(vec![0.1, 1.2, 3.0], vec![0.4, -2.9, 3.1]).unwrap();
        save_param_csv(&param, &path).unwrap();
        assert_eq!(load_param_csv(&path).unwrap(), param);
    }

    #[test]
    fn param_length_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let param = SphericalParam::new(vec![0.5; 99], vec![0.0; 99]).unwrap();
        save_param_csv(&param, &path).unwrap();
        let err = crate::mesh_io::load_param(&path, crate::mesh_io::ParamFormat::CsvThetaPhi, Some(100))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 100,
                actual: 99
            }
        ));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "index,value\n0,1.0\n1,NaN\n").unwrap();
        assert!(matches!(
            load_field(&path, FieldFormat::Csv),
            Err(Error::NonFinite { index: 1 })
        ));
    }
}
