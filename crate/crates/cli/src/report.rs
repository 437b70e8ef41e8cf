//! Experiment reports: per-check records with provenance, emitted as JSON,
//! CSV and simple SVG line plots. Field order is stable so reruns are
//! byte-identical.

use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    /// Which estimate the check gauges ("plumbing" for infrastructure).
    pub anchor: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub constants: Vec<(String, f64)>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub pipeline: String,
    pub config_hash: String,
    pub code_version: String,
    pub records: Vec<CheckRecord>,
    /// Ladder tables for plotting: name -> (x, y) rows.
    pub tables: Vec<(String, Vec<(f64, f64)>)>,
}

impl Report {
    pub fn new(pipeline: &str, config_hash: u64) -> Self {
        Report {
            pipeline: pipeline.into(),
            config_hash: format!("{config_hash:016x}"),
            code_version: env!("CARGO_PKG_VERSION").into(),
            records: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        id: &str,
        anchor: &str,
        pass: bool,
        value: f64,
        tolerance: f64,
        constants: Vec<(String, f64)>,
        runtime_ms: u64,
    ) {
        self.records.push(CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            pass,
            value,
            tolerance,
            constants,
            runtime_ms,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report json")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,anchor,pass,value,tolerance,runtime_ms\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.id, r.anchor, r.pass, r.value, r.tolerance, r.runtime_ms
            );
        }
        out
    }

    pub fn constants_csv(&self) -> String {
        let mut out = String::from("id,name,value\n");
        for r in &self.records {
            for (k, v) in &r.constants {
                let _ = writeln!(out, "{},{},{}", r.id, k, v);
            }
        }
        out
    }

    /// Minimal scatter/line renders of the ladder tables.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 200.0 * self.tables.len().max(1) as f64);
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
        );
        for (ti, (name, rows)) in self.tables.iter().enumerate() {
            let oy = 200.0 * ti as f64;
            let _ = writeln!(
                svg,
                "<text x=\"10\" y=\"{}\" font-size=\"12\">{}</text>",
                oy + 16.0,
                name
            );
            if rows.is_empty() {
                continue;
            }
            let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
            for &(x, y) in rows {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
            let sx = |x: f64| 40.0 + 560.0 * (x - x0) / (x1 - x0).max(1e-12);
            let sy = |y: f64| oy + 180.0 - 150.0 * (y - y0) / (y1 - y0).max(1e-12);
            let mut path = String::new();
            for (i, &(x, y)) in rows.iter().enumerate() {
                let _ = write!(
                    path,
                    "{}{:.2},{:.2}",
                    if i == 0 { "M" } else { " L" },
                    sx(x),
                    sy(y)
                );
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#336\"/>",
                    sx(x),
                    sy(y)
                );
            }
            let _ = writeln!(
                svg,
                "<path d=\"{path}\" stroke=\"#336\" fill=\"none\" stroke-width=\"1\"/>"
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    /// Write the selected formats into a directory.
    pub fn emit(
        &self,
        dir: &std::path::Path,
        formats: &[&str],
    ) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for &f in formats {
            let (name, body) = match f {
                "json" => ("report.json".to_string(), self.to_json()),
                "csv" => ("checks.csv".to_string(), self.to_csv()),
                "svg" => ("ladders.svg".to_string(), self.to_svg()),
                other => {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidInput,
                        format!("unknown format {other}"),
                    ))
                }
            };
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
            if f == "csv" {
                let path = dir.join("constants.csv");
                std::fs::write(&path, self.constants_csv())?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// FNV-1a over the canonical config text.
pub fn config_hash(text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}
