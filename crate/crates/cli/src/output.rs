use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ksurf::embed::KSurface;
use serde::Serialize;

use crate::CliError;

/// 17 significant digits, '.' decimal, round-trips exactly.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Quad mesh as "v x y z" lines and 1-based "f a b c d" faces.
pub fn write_obj(path: &Path, surface: &KSurface) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut body = String::with_capacity(64 * (surface.positions.len() + surface.faces.len()));
    for p in &surface.positions {
        body.push_str(&format!("v {} {} {}\n", num(p[0]), num(p[1]), num(p[2])));
    }
    for f in &surface.faces {
        body.push_str(&format!("f {} {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1));
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Header plus rows of preformatted fields.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let file = create(path)?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Per-vertex scalars keyed by 1-based OBJ vertex index.
pub fn write_scalars(path: &Path, surface: &KSurface) -> Result<(), CliError> {
    let rows = (0..surface.positions.len()).map(|v| {
        vec![
            (v + 1).to_string(),
            opt_num(surface.phi[v]),
            opt_num(surface.kappa_max[v]),
            surface.sector[v].to_string(),
            surface.generation[v].to_string(),
        ]
    });
    write_csv(path, &["vertex", "phi", "kappa_max", "sector", "generation"], rows)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into() })?;
    w.write_all(text.as_bytes()).and_then(|_| w.write_all(b"\n")).and_then(|_| w.flush()).map_err(io_err(path))
}

/// `report` when given, otherwise `out/default_name`.
pub fn report_path(out: &Path, report: Option<&PathBuf>, default_name: &str) -> PathBuf {
    report.cloned().unwrap_or_else(|| out.join(default_name))
}
