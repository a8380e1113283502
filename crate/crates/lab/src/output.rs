use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fcp_core::ShapeEstimate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, ExperimentConfig};
use crate::error::{LabError, LabResult};

pub const MANIFEST: &str = "manifest.json";

/// Config hash, artifact version, per-output checksums and wall time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_secs: f64,
}

/// Collects output files and their checksums.
pub struct OutputDir {
    root: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> LabResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(OutputDir { root: root.to_path_buf(), checksums: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> LabResult<()> {
        let path = self.root.join(name);
        std::fs::write(&path, data).map_err(|e| LabError::io(&path, e))?;
        self.checksums.insert(name.to_string(), hex(&Sha256::digest(data)));
        Ok(())
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> LabResult<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let data = w.into_inner().map_err(|e| LabError::io(name, e.into_error()))?;
        self.bytes(name, &data)
    }

    /// Header plus rows of pre-formatted fields.
    pub fn csv_raw(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> LabResult<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let data = w.into_inner().map_err(|e| LabError::io(name, e.into_error()))?;
        self.bytes(name, &data)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> LabResult<()> {
        let mut data = serde_json::to_vec_pretty(value).expect("report serializes");
        data.push(b'\n');
        self.bytes(name, &data)
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, items: impl IntoIterator<Item = T>) -> LabResult<()> {
        let mut data = Vec::new();
        for it in items {
            serde_json::to_writer(&mut data, &it).expect("record serializes");
            data.push(b'\n');
        }
        self.bytes(name, &data)
    }

    pub fn finish(self, config: &ExperimentConfig, wall_time_secs: f64) -> LabResult<RunManifest> {
        let manifest = RunManifest {
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.checksums,
            wall_time_secs,
        };
        let path = self.root.join(MANIFEST);
        let mut data = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        data.push(b'\n');
        std::fs::write(&path, data).map_err(|e| LabError::io(&path, e))?;
        Ok(manifest)
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Closed boundary polygons of several shapes on common axes (SVG 1.1).
pub fn shapes_svg(shapes: &[ShapeEstimate]) -> String {
    let size = 480.0;
    let reach = shapes
        .iter()
        .flat_map(|s| s.radii.iter().copied())
        .filter(|r| r.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let scale = 0.45 * size / reach;
    let c = size / 2.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<path d="M0 {c} H{size} M{c} 0 V{size}" stroke="#bbbbbb" stroke-width="0.5" fill="none"/>"##
    );
    for (k, s) in shapes.iter().enumerate() {
        let mut d = String::new();
        for (i, (a, r)) in s.boundary().into_iter().enumerate() {
            let x = c + scale * r * a.cos();
            let y = c - scale * r * a.sin();
            let _ = write!(d, "{}{:.3} {:.3} ", if i == 0 { "M" } else { "L" }, x, y);
        }
        d.push('Z');
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(svg, r#"<path d="{d}" stroke="{color}" stroke-width="1.2" fill="none"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="10" y="{}" font-family="sans-serif" font-size="12" fill="{color}">t = {}</text>"#,
            18 + 16 * k,
            s.t
        );
    }
    svg.push_str("</svg>\n");
    svg
}
