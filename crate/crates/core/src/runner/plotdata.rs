//! Plot-ready series from result files: whitespace-separated `.dat`
//! blocks (two blank lines between series) and optional minimal SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct PlotOptions {
    pub svg: bool,
}

struct Series {
    name: String,
    columns: [&'static str; 2],
    points: Vec<(f64, f64)>,
}

struct Figure {
    kind: &'static str,
    meta: Vec<(String, String)>,
    series: Vec<Series>,
}

/// Convert each input into `<out_dir>/<stem>.dat` (and `.svg`); returns the
/// written paths. Inputs without data produce a `# no data` file.
pub fn emit_plotdata(inputs: &[PathBuf], out_dir: &Path, opts: PlotOptions) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for input in inputs {
        let text = fs::read_to_string(input)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse { path: input.clone(), line: e.line(), msg: e.to_string() })?;
        let figures = figures_of(&value).ok_or_else(|| Error::Parse {
            path: input.clone(),
            line: 1,
            msg: "not a scaling fit or density limit report".into(),
        })?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
        let dat = out_dir.join(format!("{stem}.dat"));
        fs::write(&dat, render_dat(&figures))?;
        written.push(dat);
        if opts.svg {
            let svg = out_dir.join(format!("{stem}.svg"));
            fs::write(&svg, render_svg(&figures))?;
            written.push(svg);
        }
    }
    Ok(written)
}

fn floats(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(|x| x.as_f64().or(if x.is_null() { Some(f64::NAN) } else { None })).collect()
}

fn figures_of(v: &Value) -> Option<Vec<Figure>> {
    if let Some(items) = v.as_array() {
        // limits.json: per replication, per point
        let mut out = Vec::new();
        for item in items.iter().flat_map(|x| x.as_array().cloned().unwrap_or_else(|| vec![x.clone()])) {
            out.push(limit_figure(&item)?);
        }
        return Some(out);
    }
    let obj = v.as_object()?;
    if obj.contains_key("radii") && obj.contains_key("statistics") {
        return Some(vec![fit_figure(v)?]);
    }
    if let Some(inner) = obj.get("fit") {
        return Some(vec![fit_figure(inner)?]);
    }
    if obj.contains_key("parameter_grid") {
        return Some(vec![limit_figure(v)?]);
    }
    None
}

fn fit_figure(v: &Value) -> Option<Figure> {
    let radii = floats(&v["radii"])?;
    let stats = floats(&v["statistics"])?;
    let used: Vec<bool> = v["used"].as_array().map_or(vec![true; radii.len()], |a| a.iter().map(|b| b.as_bool().unwrap_or(true)).collect());
    let slope = v["slope_uncorrected"].as_f64().unwrap_or(f64::NAN);
    let points: Vec<(f64, f64)> = radii
        .iter()
        .zip(&stats)
        .filter(|(_, s)| **s > 0.0 && s.is_finite())
        .map(|(r, s)| (r.ln(), s.ln()))
        .collect();
    let fitted: Vec<(f64, f64)> = points
        .iter()
        .zip(radii.iter().zip(&stats).filter(|(_, s)| **s > 0.0 && s.is_finite()).map(|(r, _)| r))
        .filter(|(_, r)| used[radii.iter().position(|x| x == *r).unwrap_or(0)])
        .map(|(p, _)| *p)
        .collect();
    let mut series = vec![Series { name: "points".into(), columns: ["log_r", "log_statistic"], points: points.clone() }];
    if fitted.len() >= 2 && slope.is_finite() {
        let n = fitted.len() as f64;
        let (mx, my) = (fitted.iter().map(|p| p.0).sum::<f64>() / n, fitted.iter().map(|p| p.1).sum::<f64>() / n);
        let line = [fitted[0].0, fitted[fitted.len() - 1].0].map(|x| (x, my + slope * (x - mx)));
        series.push(Series { name: "fit".into(), columns: ["log_r", "log_statistic"], points: line.to_vec() });
    }
    let mut meta = Vec::new();
    for key in ["slope", "slope_uncorrected", "expected", "aggregate"] {
        if let Some(x) = v.get(key) {
            meta.push((key.to_string(), x.to_string()));
        }
    }
    Some(Figure { kind: "scaling_fit", meta, series })
}

fn limit_figure(v: &Value) -> Option<Figure> {
    let grid = floats(&v["parameter_grid"])?;
    let values = floats(&v["values"])?;
    let points = grid.into_iter().zip(values).filter(|(_, y)| y.is_finite()).collect();
    let mut meta = Vec::new();
    for key in ["kind", "x", "limit", "stability", "reference"] {
        if let Some(x) = v.get(key) {
            meta.push((key.to_string(), x.to_string()));
        }
    }
    Some(Figure { kind: "density_limit", meta, series: vec![Series { name: "sequence".into(), columns: ["parameter", "value"], points }] })
}

fn render_dat(figures: &[Figure]) -> String {
    if figures.iter().all(|f| f.series.iter().all(|s| s.points.is_empty())) {
        return "# no data\n".into();
    }
    let mut out = String::new();
    for (i, fig) in figures.iter().enumerate() {
        let _ = writeln!(out, "# figure {i}: {}", fig.kind);
        for (k, v) in &fig.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for s in &fig.series {
            let _ = writeln!(out, "# series: {}\n# {} {}", s.name, s.columns[0], s.columns[1]);
            for (x, y) in &s.points {
                let _ = writeln!(out, "{x:?} {y:?}");
            }
            out.push_str("\n\n");
        }
    }
    out
}

fn render_svg(figures: &[Figure]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 40.0;
    let pts: Vec<(f64, f64)> = figures.iter().flat_map(|f| f.series.iter().flat_map(|s| s.points.iter().copied())).collect();
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\">\n");
    if pts.is_empty() {
        out.push_str("<text x=\"20\" y=\"40\">no data</text>\n</svg>\n");
        return out;
    }
    let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-300) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-300) * (H - 2.0 * PAD);
    let _ = writeln!(out, "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>", W - 2.0 * PAD, H - 2.0 * PAD);
    for fig in figures {
        for s in &fig.series {
            if s.name == "fit" {
                let d: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
                let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"#c33\"/>", d.join(" "));
            } else {
                for p in &s.points {
                    let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#236\"/>", sx(p.0), sy(p.1));
                }
            }
        }
    }
    let _ = writeln!(out, "<text x=\"{PAD}\" y=\"{}\" font-size=\"11\">{} .. {}</text>", H - 10.0, fmt3(x0), fmt3(x1));
    out.push_str("</svg>\n");
    out
}

fn fmt3(x: f64) -> String {
    format!("{x:.3}")
}
