//! Text tables: one row per point or pair, `#` comments, whitespace or
//! comma separated.

use std::path::Path;

use far3_core::{Mat3, PointPairSet, Vec3};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Numeric rows with their 1-based line numbers. Every row must have the
/// same column count, which must be one of `allowed`.
pub fn parse_rows(text: &str, path: &str, allowed: &[usize]) -> Result<Vec<(usize, Vec<f64>)>> {
    let err = |line: usize, message: String| CliError::Parse { path: path.to_string(), line, message };
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut values = Vec::new();
        for field in content.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()) {
            let v: f64 = field.parse().map_err(|_| err(line, format!("'{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(err(line, format!("'{field}' is not finite")));
            }
            values.push(v);
        }
        if let Some((_, first)) = rows.first() {
            if values.len() != first.len() {
                return Err(err(line, format!("expected {} columns, found {}", first.len(), values.len())));
            }
        } else if !allowed.contains(&values.len()) {
            let want: Vec<String> = allowed.iter().map(ToString::to_string).collect();
            return Err(err(line, format!("expected {} columns, found {}", want.join(" or "), values.len())));
        }
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{path}: no data rows")));
    }
    Ok(rows)
}

/// `rx ry rz bx by bz [weight]`.
pub fn parse_point_pairs(text: &str, path: &str) -> Result<PointPairSet> {
    let rows = parse_rows(text, path, &[6, 7])?;
    let mut reference = Vec::with_capacity(rows.len());
    let mut body = Vec::with_capacity(rows.len());
    let mut weights = Vec::new();
    for (line, v) in &rows {
        reference.push(Vec3::new(v[0], v[1], v[2]));
        body.push(Vec3::new(v[3], v[4], v[5]));
        if let Some(&w) = v.get(6) {
            if w <= 0.0 {
                return Err(CliError::Parse {
                    path: path.to_string(),
                    line: *line,
                    message: format!("weight {w} must be > 0"),
                });
            }
            weights.push(w);
        }
    }
    let set = if weights.is_empty() {
        PointPairSet::new(reference, body)
    } else {
        PointPairSet::with_weights(reference, body, weights)
    };
    Ok(set?)
}

/// `x y z`, one point per row.
pub fn parse_cloud(text: &str, path: &str) -> Result<Vec<Vec3>> {
    Ok(parse_rows(text, path, &[3])?.into_iter().map(|(_, v)| Vec3::new(v[0], v[1], v[2])).collect())
}

/// Nine reals, row-major.
pub fn parse_d_matrix(s: &str) -> Result<Mat3> {
    let values: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| f.parse::<f64>().map_err(|_| CliError::Input(format!("--d-matrix: '{f}' is not a number"))))
        .collect::<Result<_>>()?;
    let arr: [f64; 9] = values
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Input(format!("--d-matrix needs 9 values, got {}", values.len())))?;
    if arr.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Input("--d-matrix values must be finite".into()));
    }
    Ok(Mat3::from_row_slice(&arr))
}

pub fn format_point_pairs(pairs: &PointPairSet) -> String {
    let mut out = String::from("# rx ry rz bx by bz\n");
    for (r, b) in pairs.pairs() {
        out.push_str(&format!("{:?} {:?} {:?} {:?} {:?} {:?}\n", r.x, r.y, r.z, b.x, b.y, b.z));
    }
    out
}

pub fn format_cloud(points: &[Vec3]) -> String {
    points.iter().map(|p| format!("{:?} {:?} {:?}\n", p.x, p.y, p.z)).collect()
}
