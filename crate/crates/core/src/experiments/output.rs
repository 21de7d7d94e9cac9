use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// Floats with 17 significant digits, enough to round-trip every double.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// A header plus rows of floats, rendered as comma-separated text.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.push_cells(row.iter().map(|v| fmt_float(*v)).collect());
    }

    /// Raw cells, for integer or text columns.
    pub fn push_cells(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "CSV row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// One emitted file and its SHA-256 digest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects files written into one experiment directory.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileRecord {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
            bytes: contents.len(),
        });
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, table: &CsvTable) -> Result<PathBuf> {
        self.write(name, &table.render())
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    /// Writes `manifest.json` listing every file emitted so far.
    pub fn finish<C: Serialize>(
        self,
        experiment: &str,
        seed: u64,
        config: &C,
        notes: ManifestNotes,
        started: std::time::Instant,
    ) -> Result<Manifest> {
        let manifest = Manifest {
            experiment: experiment.to_string(),
            seed,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            config: serde_json::to_value(config).map_err(|e| crate::Error::Parse(e.to_string()))?,
            files: self.files,
            metrics: notes.metrics,
            assumptions: notes.assumptions,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| crate::Error::Parse(e.to_string()))?;
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

/// Scalar results and the modelling choices a run depended on.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ManifestNotes {
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub assumptions: BTreeMap<String, String>,
}

impl ManifestNotes {
    pub fn metric<V: Serialize>(&mut self, key: &str, value: V) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metrics.insert(key.to_string(), v);
    }

    pub fn assume(&mut self, key: &str, value: impl Into<String>) {
        self.assumptions.insert(key.to_string(), value.into());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub library_version: String,
    pub wall_clock_seconds: f64,
    pub config: serde_json::Value,
    pub files: Vec<FileRecord>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub assumptions: BTreeMap<String, String>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Line chart with one polyline per series.
pub fn svg_lines(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(&str, &[f64], &[f64])],
) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let (x0, x1) = extent(series.iter().flat_map(|s| s.1.iter().copied()));
    let (y0, y1) = extent(series.iter().flat_map(|s| s.2.iter().copied()));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        w / 2.0,
        h - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (v, anchor, x, y) in [
        (x0, "start", m, h - m + 16.0),
        (x1, "end", w - m, h - m + 16.0),
        (y0, "end", m - 4.0, h - m),
        (y1, "end", m - 4.0, m + 10.0),
    ] {
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\">{v:.3e}</text>"
        );
    }
    for (i, (name, xs, ys)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = xs
            .iter()
            .zip(ys.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let ly = m + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{colour}\" stroke-width=\"2\"/>", w - m - 110.0, w - m - 90.0);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            w - m - 85.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heat map of `values[i][j]` with `i` along x and `j` along y; NaN cells are grey.
pub fn svg_heatmap(
    title: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    log_scale: bool,
) -> String {
    let (w, h, m) = (560.0, 500.0, 60.0);
    let tr = |v: f64| {
        if log_scale {
            v.abs().max(1e-300).log10()
        } else {
            v
        }
    };
    let (lo, hi) = extent(values.iter().flatten().map(|v| tr(*v)));
    let (cw, ch) = (
        (w - 2.0 * m) / xs.len().max(1) as f64,
        (h - 2.0 * m) / ys.len().max(1) as f64,
    );
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        w / 2.0,
        escape(title)
    );
    for (i, col) in values.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            let fill = if v.is_finite() {
                let t = ((tr(*v) - lo) / (hi - lo)).clamp(0.0, 1.0);
                let (r, g, b) = (
                    255.0 * t,
                    64.0 + 96.0 * (1.0 - (2.0 * t - 1.0).abs()),
                    255.0 * (1.0 - t),
                );
                format!("rgb({},{},{})", r as u8, g as u8, b as u8)
            } else {
                "#bbbbbb".to_string()
            };
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                m + i as f64 * cw,
                h - m - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let scale = if log_scale { "log10 " } else { "" };
    let _ = writeln!(
        s,
        "<text x=\"{m}\" y=\"{}\">{scale}range [{lo:.3e}, {hi:.3e}]</text>",
        h - 18.0
    );
    if let (Some(a), Some(b)) = (xs.first(), xs.last()) {
        let _ = writeln!(
            s,
            "<text x=\"{m}\" y=\"{}\">w: {a:.3e} .. {b:.3e}</text>",
            h - 36.0
        );
    }
    if let (Some(a), Some(b)) = (ys.first(), ys.last()) {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">b: {a:.3e} .. {b:.3e}</text>",
            w - m,
            h - 36.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
