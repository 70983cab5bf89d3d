use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use gpground::ShootConfig64;

/// Shortest round-trip decimal, with an exponent for very large or small values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Comma-separated table with a fixed header.
pub struct Csv {
    header: &'static [&'static str],
    rows: Vec<Vec<f64>>,
}

impl Csv {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Run record written next to every output file.
#[derive(Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub command: String,
    pub params: Value,
    pub tolerances: Value,
    pub wall_ms: u64,
    pub anomalies: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, params: Value, cfg: &ShootConfig64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params,
            tolerances: tolerances(cfg),
            wall_ms: 0,
            anomalies: Vec::new(),
        }
    }
}

pub fn tolerances(cfg: &ShootConfig64) -> Value {
    json!({
        "r0": cfg.r0,
        "s0": cfg.s0,
        "singular_r0": cfg.singular_r0,
        "r_margin": cfg.r_margin,
        "value_floor": cfg.value_floor,
        "translate_above": cfg.translate_above,
        "lambda_tol": cfg.lambda_tol,
        "profile_subdiv": cfg.profile_subdiv,
        "rel_tol": cfg.control.rel_tol,
        "abs_tol": cfg.control.abs_tol,
        "h_init": cfg.control.h_init,
        "h_min": cfg.control.h_min,
        "h_max": cfg.control.h_max,
        "max_steps": cfg.control.max_steps,
    })
}

/// `curve.csv` -> `curve.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Writes the table and its manifest.
pub fn write_pair(out: &Path, csv: &Csv, manifest: &Manifest) -> Result<()> {
    fs::write(out, csv.render()).with_context(|| format!("writing {}", out.display()))?;
    let mpath = manifest_path(out);
    let mut f = fs::File::create(&mpath).with_context(|| format!("writing {}", mpath.display()))?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n")?;
    Ok(())
}
