//! Text formats: wavefunction CSV/JSON and trajectory CSV.
//!
//! CSV files start with `#`-prefixed metadata lines. Floats are written with
//! 17 significant digits so that a read-back is bit-exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamilton_ehrenfest::TrajectorySample;
use crate::wavefunction::{Grid, WaveFunction};

pub const WAVEFUNCTION_HEADER: &str = "# hartree-exact wavefunction v1";
pub const TRAJECTORY_HEADER: &str = "# hartree-exact trajectory v1";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn metadata_lines(out: &mut String, metadata: &[(String, String)]) {
    for (k, v) in metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
}

pub fn wavefunction_to_csv(psi: &WaveFunction, metadata: &[(String, String)]) -> String {
    let mut out = String::with_capacity(64 * psi.values.len());
    out.push_str(WAVEFUNCTION_HEADER);
    out.push('\n');
    metadata_lines(&mut out, metadata);
    out.push_str(&format!(
        "# grid: {},{},{}\n",
        fmt_f64(psi.grid.x_min),
        fmt_f64(psi.grid.x_max),
        psi.grid.n_points
    ));
    out.push_str("x,re,im\n");
    for (i, v) in psi.values.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(psi.grid.point(i)),
            fmt_f64(v.re),
            fmt_f64(v.im)
        ));
    }
    out
}

fn parse_num(s: &str, line: usize, key: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        key: key.into(),
        message: e.to_string(),
    })
}

pub fn wavefunction_from_csv(text: &str) -> Result<WaveFunction> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == WAVEFUNCTION_HEADER => {}
        _ => {
            return Err(Error::Format(format!(
                "missing `{WAVEFUNCTION_HEADER}` header"
            )))
        }
    }
    let mut grid_meta: Option<Grid> = None;
    let mut seen_columns = false;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some(spec) = meta.trim().strip_prefix("grid:") {
                let parts: Vec<&str> = spec.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        key: "grid".into(),
                        message: "expected x_min,x_max,n".into(),
                    });
                }
                let n = parts[2].trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: line_no,
                    key: "grid".into(),
                    message: e.to_string(),
                })?;
                grid_meta = Some(Grid::new(
                    parse_num(parts[0], line_no, "grid")?,
                    parse_num(parts[1], line_no, "grid")?,
                    n,
                )?);
            }
            continue;
        }
        if !seen_columns {
            if line.replace(' ', "") != "x,re,im" {
                return Err(Error::Format(format!(
                    "line {line_no}: expected column header `x,re,im`"
                )));
            }
            seen_columns = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                key: "row".into(),
                message: "expected 3 columns".into(),
            });
        }
        xs.push(parse_num(cols[0], line_no, "x")?);
        values.push(Complex64::new(
            parse_num(cols[1], line_no, "re")?,
            parse_num(cols[2], line_no, "im")?,
        ));
    }
    let grid = match grid_meta {
        Some(g) => g,
        None => infer_grid(&xs)?,
    };
    if xs.len() != grid.n_points {
        return Err(Error::Format(format!(
            "{} rows for a grid of {} points",
            xs.len(),
            grid.n_points
        )));
    }
    let h = grid.spacing();
    for (i, x) in xs.iter().enumerate() {
        if (x - grid.point(i)).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Format(format!(
                "row {i}: x = {x} is off the uniform grid"
            )));
        }
    }
    WaveFunction::new(grid, values)
}

fn infer_grid(xs: &[f64]) -> Result<Grid> {
    if xs.len() < 2 {
        return Err(Error::Format("need at least two rows".into()));
    }
    let h = xs[1] - xs[0];
    Grid::new(xs[0], xs[0] + h * xs.len() as f64, xs.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunctionJson {
    pub format: String,
    pub metadata: Vec<(String, String)>,
    pub grid: Grid,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

pub fn wavefunction_to_json(psi: &WaveFunction, metadata: &[(String, String)]) -> Result<String> {
    let doc = WaveFunctionJson {
        format: "hartree-exact wavefunction v1".into(),
        metadata: metadata.to_vec(),
        grid: psi.grid,
        re: psi.values.iter().map(|v| v.re).collect(),
        im: psi.values.iter().map(|v| v.im).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn wavefunction_from_json(text: &str) -> Result<WaveFunction> {
    let doc: WaveFunctionJson = serde_json::from_str(text)?;
    if doc.re.len() != doc.im.len() {
        return Err(Error::Format("re and im lengths differ".into()));
    }
    let grid = Grid::new(doc.grid.x_min, doc.grid.x_max, doc.grid.n_points)?;
    let values = doc
        .re
        .iter()
        .zip(&doc.im)
        .map(|(r, i)| Complex64::new(*r, *i))
        .collect();
    WaveFunction::new(grid, values)
}

/// Read either format, chosen by content.
pub fn read_wavefunction(text: &str) -> Result<WaveFunction> {
    if text.trim_start().starts_with('{') {
        wavefunction_from_json(text)
    } else {
        wavefunction_from_csv(text)
    }
}

pub fn trajectory_to_csv(samples: &[TrajectorySample], metadata: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    metadata_lines(&mut out, metadata);
    let keys: Vec<(usize, usize)> = samples
        .first()
        .map(|s| s.higher.values.keys().copied().collect())
        .unwrap_or_default();
    let mut header = String::from("t,X,P,sigma_xx,sigma_px,sigma_pp");
    for (j, l) in &keys {
        header.push_str(&format!(",alpha_{j}_{l}"));
    }
    out.push_str(&header);
    out.push('\n');
    for s in samples {
        let g = &s.state;
        let mut row = [g.t, g.x, g.p, g.sigma_xx, g.sigma_px, g.sigma_pp]
            .map(fmt_f64)
            .join(",");
        for key in &keys {
            row.push(',');
            row.push_str(&fmt_f64(s.higher.values.get(key).copied().unwrap_or(0.0)));
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}
