//! Artifact formats: far-field tensors as CSV with a JSON sidecar,
//! indicator fields as CSV or legacy ASCII VTK, peak lists as JSON and
//! singular spectra as CSV. Floating-point values are written with 12
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::NoiseMode;
use crate::imaging::{IndicatorField, Peak, PeakSet};
use crate::model::{FarFieldTensor, FrequencyGrid, ImagingGrid};
use crate::spectral::Svd;

/// `x` in scientific notation with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Write through a temporary sibling and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Tensor CSV with header `j,n,k,re,im`; `j` and `n` are 1-based.
pub fn tensor_to_csv(tensor: &FarFieldTensor, grid: &FrequencyGrid) -> String {
    let mut out = String::from("j,n,k,re,im\n");
    for j in 0..tensor.directions() {
        for n in 0..tensor.frequencies() {
            let v = tensor.values[(j, n)];
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                j + 1,
                n + 1,
                fmt12(grid.wavenumber(n + 1)),
                fmt12(v.re),
                fmt12(v.im)
            );
        }
    }
    out
}

pub fn write_tensor_csv(
    path: impl AsRef<Path>,
    tensor: &FarFieldTensor,
    grid: &FrequencyGrid,
) -> Result<()> {
    write_atomic(path, &tensor_to_csv(tensor, grid))
}

/// Read a tensor CSV. Every `(j, n)` pair in `1..=J × 1..=2N` must appear
/// exactly once; the fingerprint is left empty.
pub fn read_tensor_csv(path: impl AsRef<Path>) -> Result<FarFieldTensor> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "j,n,k,re,im" => {}
        _ => return Err(parse_err(path, "expected header j,n,k,re,im")),
    }
    let mut entries = Vec::new();
    for (no, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(parse_err(
                path,
                format!("line {}: expected 5 fields", no + 2),
            ));
        }
        let bad = |_| parse_err(path, format!("line {}: malformed number", no + 2));
        let j: usize = f[0]
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad j", no + 2)))?;
        let n: usize = f[1]
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad n", no + 2)))?;
        let re: f64 = f[3].parse().map_err(bad)?;
        let im: f64 = f[4].parse().map_err(bad)?;
        if j == 0 || n == 0 {
            return Err(parse_err(
                path,
                format!("line {}: indices are 1-based", no + 2),
            ));
        }
        entries.push((j - 1, n - 1, Complex64::new(re, im)));
    }
    let rows = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let cols = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    let mut seen = vec![false; rows * cols];
    let mut values = DMatrix::zeros(rows, cols);
    for (j, n, v) in entries {
        if std::mem::replace(&mut seen[j * cols + n], true) {
            return Err(parse_err(
                path,
                format!("duplicate entry j={} n={}", j + 1, n + 1),
            ));
        }
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(parse_err(path, "non-finite value"));
        }
        values[(j, n)] = v;
    }
    if seen.iter().any(|s| !s) {
        return Err(parse_err(path, "missing (j, n) entries"));
    }
    Ok(FarFieldTensor {
        values,
        fingerprint: String::new(),
    })
}

/// Sidecar describing how a tensor was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorMetadata {
    pub model: String,
    pub quad_order: Option<usize>,
    pub born_error_estimate: Option<f64>,
    pub noise_level: f64,
    pub noise_mode: NoiseMode,
    pub seed: u64,
    pub rng_algorithm: String,
    pub geometry_fingerprint: String,
    pub directions: usize,
    pub frequencies: usize,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    write_atomic(path, &(text + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    serde_json::from_str(&read(path)?).map_err(|e| parse_err(path, e.to_string()))
}

const AXES: [&str; 3] = ["x", "y", "z"];

/// Field CSV with header `x,y[,z],value`, first axis fastest.
pub fn field_to_csv(field: &IndicatorField) -> String {
    let d = field.grid.dimension();
    let mut out = AXES[..d].join(",") + ",value\n";
    for (i, v) in field.values.iter().enumerate() {
        for c in field.grid.node(i) {
            out.push_str(&fmt12(c));
            out.push(',');
        }
        out.push_str(&fmt12(*v));
        out.push('\n');
    }
    out
}

pub fn write_field_csv(path: impl AsRef<Path>, field: &IndicatorField) -> Result<()> {
    write_atomic(path, &field_to_csv(field))
}

/// Values column of a field CSV, in file order.
pub fn read_field_csv_values(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = read(path)?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.rsplit(',')
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| parse_err(path, format!("malformed line {l:?}")))
        })
        .collect()
}

/// Legacy ASCII VTK `STRUCTURED_POINTS` with one `SCALARS` array. Two
/// dimensional fields get a single node along z.
pub fn field_to_vtk(field: &IndicatorField) -> String {
    let g = &field.grid;
    let d = g.dimension();
    let dims: Vec<usize> = (0..3)
        .map(|a| if a < d { g.points[a] } else { 1 })
        .collect();
    let origin: Vec<f64> = (0..3)
        .map(|a| if a < d { g.coordinate(a, 0) } else { 0.0 })
        .collect();
    let spacing: Vec<f64> = (0..3)
        .map(|a| {
            if a < d && g.points[a] > 1 {
                g.spacing(a)
            } else {
                1.0
            }
        })
        .collect();
    let name = match field.functional {
        crate::imaging::Functional::I1 => "I1",
        crate::imaging::Functional::I2 => "I2",
    };
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{name} indicator, mtilde={}", field.mtilde);
    out.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let _ = writeln!(
        out,
        "ORIGIN {} {} {}",
        fmt12(origin[0]),
        fmt12(origin[1]),
        fmt12(origin[2])
    );
    let _ = writeln!(
        out,
        "SPACING {} {} {}",
        fmt12(spacing[0]),
        fmt12(spacing[1]),
        fmt12(spacing[2])
    );
    let _ = writeln!(out, "POINT_DATA {}", field.values.len());
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for v in &field.values {
        out.push_str(&fmt12(*v));
        out.push('\n');
    }
    out
}

pub fn write_field_vtk(path: impl AsRef<Path>, field: &IndicatorField) -> Result<()> {
    write_atomic(path, &field_to_vtk(field))
}

/// Grid dimensions and scalar values of a legacy `STRUCTURED_POINTS` file.
pub fn read_vtk_scalars(path: impl AsRef<Path>) -> Result<([usize; 3], Vec<f64>)> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut dims = None;
    let mut lines = text.lines();
    for line in lines.by_ref() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("DIMENSIONS") => {
                let v: Vec<usize> = tok.filter_map(|t| t.parse().ok()).collect();
                if v.len() != 3 {
                    return Err(parse_err(path, "malformed DIMENSIONS"));
                }
                dims = Some([v[0], v[1], v[2]]);
            }
            Some("LOOKUP_TABLE") => break,
            _ => {}
        }
    }
    let dims = dims.ok_or_else(|| parse_err(path, "missing DIMENSIONS"))?;
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(path, format!("bad scalar {t:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != dims.iter().product::<usize>() {
        return Err(parse_err(path, "scalar count does not match DIMENSIONS"));
    }
    Ok((dims, values))
}

#[derive(Serialize)]
struct PeakRecord<'a> {
    position: &'a [f64],
    value: f64,
}

/// JSON array of `{position, value}`.
pub fn peaks_to_json(peaks: &PeakSet) -> String {
    let records: Vec<PeakRecord> = peaks
        .peaks
        .iter()
        .map(|p| PeakRecord {
            position: &p.position,
            value: p.value,
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("peaks serialize") + "\n"
}

pub fn write_peaks_json(path: impl AsRef<Path>, peaks: &PeakSet) -> Result<()> {
    write_atomic(path, &peaks_to_json(peaks))
}

pub fn read_peaks_json(path: impl AsRef<Path>) -> Result<Vec<Peak>> {
    read_json(path)
}

/// `j,l,sigma` for every direction `j` and singular index `l` (1-based).
pub fn singular_values_to_csv(svds: &[Svd]) -> String {
    let mut out = String::from("j,l,sigma\n");
    for (j, s) in svds.iter().enumerate() {
        for (l, sigma) in s.singular_values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", j + 1, l + 1, fmt12(*sigma));
        }
    }
    out
}

pub fn write_sv_dump(path: impl AsRef<Path>, svds: &[Svd]) -> Result<()> {
    write_atomic(path, &singular_values_to_csv(svds))
}

/// Imaging grid with a per-axis node count replaced.
pub fn with_points(grid: &ImagingGrid, points: &[usize]) -> ImagingGrid {
    let d = grid.dimension();
    let points = if points.len() == 1 {
        vec![points[0]; d]
    } else {
        points.to_vec()
    };
    ImagingGrid {
        points,
        ..grid.clone()
    }
}
