//! File formats: numeric CSV series with `# key = value` metadata lines,
//! JSON reports, TOML configs and a small log–log SVG plot. Every float is
//! written in a shortest round-trip form, so re-parsing is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::semigroup_kernel::KernelProfile;
use crate::traveling_wave::{TWProfile, TWSpec};

/// A table of floats with named columns and free-form metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Series {
            name: name.into(),
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    fn parse_meta<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get_meta(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| FracError::Config(format!("series `{}`: missing or bad metadata `{key}`", self.name)))
    }
}

/// Shortest representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn series_to_csv(series: &Series) -> Result<String> {
    let mut out = String::new();
    for (k, v) in &series.metadata {
        if k.contains('\n') || v.contains('\n') || k.contains(" =") {
            return Err(FracError::Config(format!("metadata `{k}` cannot be written on one line")));
        }
        let _ = writeln!(out, "# {k} = {v}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&series.columns)?;
    for row in &series.rows {
        if row.len() != series.columns.len() {
            return Err(FracError::Config(format!(
                "series `{}`: row of {} values for {} columns",
                series.name,
                row.len(),
                series.columns.len()
            )));
        }
        w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    let body = w.into_inner().map_err(|e| FracError::Config(e.to_string()))?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn series_from_csv(name: &str, text: &str) -> Result<Series> {
    let mut metadata = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        body_start += line.len();
        let rest = rest.trim_start().trim_end_matches(['\n', '\r']);
        let (k, v) = rest
            .split_once(" =")
            .ok_or_else(|| FracError::Config(format!("malformed metadata line `{rest}`")))?;
        metadata.push((k.trim().to_string(), v.trim().to_string()));
    }
    let mut r = csv::Reader::from_reader(&text.as_bytes()[body_start..]);
    let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|_| FracError::Config(format!("not a number: `{f}`"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Series { name: name.to_string(), metadata, columns, rows })
}

pub fn write_series(path: impl AsRef<Path>, series: &Series) -> Result<()> {
    write_text(path, &series_to_csv(series)?)
}

pub fn read_series(path: impl AsRef<Path>) -> Result<Series> {
    let path = path.as_ref();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    series_from_csv(name, &read_text(path)?)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| FracError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| FracError::io(path, e))
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| FracError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| FracError::Config(e.to_string()))
}

pub fn read_toml<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    parse_toml(&read_text(path)?).map_err(|e| FracError::Config(format!("{}: {e}", path.display())))
}

/// Traveling-wave profile as `xi, phi, left_tail_log, right_tail_log`, the
/// logs being `ln(φ_- - φ)` and `ln(φ - φ_+)` (NaN where not positive).
pub fn profile_series(p: &TWProfile) -> Result<Series> {
    let s = &p.spec;
    let mut out = Series::new("tw_profile", &["xi", "phi", "left_tail_log", "right_tail_log"])
        .meta("schema_version", 1)
        .meta("spec", serde_json::to_string(s)?)
        .meta("residual_norm", fmt_f64(p.residual_norm))
        .meta("closure_defect", fmt_f64(p.closure_defect))
        .meta("phase_anchor", fmt_f64(p.phase_anchor))
        .meta("iterations", p.iterations);
    let ln = |d: f64| if d > 0.0 { d.ln() } else { f64::NAN };
    for (i, &v) in p.values.iter().enumerate() {
        out.push(vec![s.grid.x(i), v, ln(s.phi_minus - v), ln(v - s.phi_plus)]);
    }
    Ok(out)
}

pub fn profile_from_series(series: &Series) -> Result<TWProfile> {
    let spec: TWSpec = serde_json::from_str(
        series
            .get_meta("spec")
            .ok_or_else(|| FracError::Config("profile csv lacks `spec` metadata".into()))?,
    )?;
    let values = series
        .column("phi")
        .ok_or_else(|| FracError::Config("profile csv lacks a `phi` column".into()))?;
    if values.len() != spec.grid.n {
        return Err(FracError::GridMismatch { expected: spec.grid.n, found: values.len() });
    }
    Ok(TWProfile {
        spec,
        values,
        residual_norm: series.parse_meta("residual_norm")?,
        closure_defect: series.parse_meta("closure_defect")?,
        phase_anchor: series.parse_meta("phase_anchor")?,
        iterations: series.parse_meta("iterations")?,
    })
}

/// `K(1, y)` as `y, k`.
pub fn kernel_series(p: &KernelProfile) -> Result<Series> {
    let mut out = Series::new(format!("kernel_alpha{}", p.alpha), &["y", "k"])
        .meta("schema_version", 1)
        .meta("alpha", fmt_f64(p.alpha))
        .meta("y_grid", serde_json::to_string(&p.y_grid)?)
        .meta("quad_tol", fmt_f64(p.quad_tol))
        .meta("xi_max", fmt_f64(p.xi_max))
        .meta("imag_residue", fmt_f64(p.imag_residue));
    for (i, &k) in p.values.iter().enumerate() {
        out.push(vec![p.y_grid.x(i), k]);
    }
    Ok(out)
}

pub fn kernel_from_series(series: &Series) -> Result<KernelProfile> {
    let y_grid = serde_json::from_str(
        series
            .get_meta("y_grid")
            .ok_or_else(|| FracError::Config("kernel csv lacks `y_grid` metadata".into()))?,
    )?;
    Ok(KernelProfile {
        alpha: series.parse_meta("alpha")?,
        y_grid,
        values: series
            .column("k")
            .ok_or_else(|| FracError::Config("kernel csv lacks a `k` column".into()))?,
        quad_tol: series.parse_meta("quad_tol")?,
        xi_max: series.parse_meta("xi_max")?,
        imag_residue: series.parse_meta("imag_residue")?,
    })
}

/// Log–log scatter of `(x, y)` with the fitted line `y = e^b x^slope`.
pub fn loglog_svg(title: &str, xs: &[f64], ys: &[f64], slope: f64, intercept: f64) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const M: f64 = 50.0;
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let range = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let pad = 0.1 * (hi - lo).max(1e-3);
        (lo - pad, hi + pad)
    };
    let ((x0, x1), (y0, y1)) = (range(&lx), range(&ly));
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let esc = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{esc}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    // Fitted line: log10 y = slope log10 x + intercept / ln 10.
    let b = intercept / std::f64::consts::LN_10;
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="1.5"/>"#,
        px(x0),
        py(slope * x0 + b),
        px(x1),
        py(slope * x1 + b)
    );
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#, px(*x), py(*y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">log10 x  (slope {:.4})</text>"#,
        W / 2.0,
        H - 15.0,
        slope
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 5e-324, -2.5e17, 123456.789, f64::MAX, f64::INFINITY] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn csv_with_metadata() {
        let mut s = Series::new("t", &["a", "b"]).meta("alpha", 0.5).meta("note", "x = y, z");
        s.push(vec![1.0, 2.0]);
        s.push(vec![-3.5e-9, f64::NAN]);
        let text = series_to_csv(&s).unwrap();
        assert!(text.starts_with("# alpha = 0.5\n# note = x = y, z\na,b\n"));
        let back = series_from_csv("t", &text).unwrap();
        assert_eq!(back.metadata, s.metadata);
        assert_eq!(back.rows[0], s.rows[0]);
        assert!(back.rows[1][1].is_nan());
        let mut bad = s.clone();
        bad.rows.push(vec![1.0]);
        assert!(series_to_csv(&bad).is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = loglog_svg("rate <fit>", &[0.2, 0.1, 0.05], &[0.3, 0.18, 0.1], 0.8, -0.2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("&lt;fit&gt;"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
