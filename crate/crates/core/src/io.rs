//! Trajectory CSV, results JSON and SVG rendering.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{from_polar, to_geographic, CartesianState, PolarState, Tack};
use crate::engine::{Event, Record, Trajectory};
use crate::{Error, Result};

const BASE_COLUMNS: [&str; 8] = ["t", "r", "theta", "x", "y", "tack", "wind_angle", "event"];

/// Writes the trajectory with rotating-frame `x, y`; `geographic` appends
/// `xi1, xi2`. Floats use the shortest representation that reads back exactly.
pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory, geographic: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
    if geographic {
        header.extend(["xi1", "xi2"]);
    }
    out.write_record(&header)?;
    for rec in &traj.records {
        let p = from_polar(PolarState::new(rec.r, rec.theta));
        let mut row = vec![
            rec.t.to_string(),
            rec.r.to_string(),
            rec.theta.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            rec.tack.as_i8().to_string(),
            rec.wind_angle.to_string(),
            rec.event.as_str().to_string(),
        ];
        if geographic {
            let g = to_geographic(p, rec.wind_angle);
            row.push(g.x.to_string());
            row.push(g.y.to_string());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a trajectory CSV written by [`write_trajectory_csv`]. Derived
/// columns (`x`, `y`, `xi1`, `xi2`) are ignored.
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Trajectory> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("trajectory CSV lacks column `{name}`")))
    };
    let (ct, cr, cth, ctack, cw, ce) = (
        col("t")?,
        col("r")?,
        col("theta")?,
        col("tack")?,
        col("wind_angle")?,
        col("event")?,
    );
    let mut records = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let num = |c: usize| -> Result<f64> {
            let s = row.get(c).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| Error::Malformed(format!("row {}: bad number `{s}`", line + 1)))
        };
        let tack_raw = row.get(ctack).unwrap_or("");
        let tack = tack_raw
            .parse::<i8>()
            .ok()
            .and_then(|v| Tack::try_from(v).ok())
            .ok_or_else(|| Error::Malformed(format!("row {}: bad tack `{tack_raw}`", line + 1)))?;
        let ev_raw = row.get(ce).unwrap_or("");
        let event = Event::parse(ev_raw)
            .ok_or_else(|| Error::Malformed(format!("row {}: bad event `{ev_raw}`", line + 1)))?;
        records.push(Record {
            t: num(ct)?,
            r: num(cr)?,
            theta: num(cth)?,
            tack,
            wind_angle: num(cw)?,
            event,
        });
    }
    Ok(Trajectory { records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Rotating,
    Geographic,
}

/// Optional overlays for [`render_svg`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    pub frame: Frame,
    pub eta: f64,
    pub size: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            frame: Frame::Rotating,
            eta: 0.1,
            size: 640.0,
        }
    }
}

fn point(rec: &Record, frame: Frame) -> CartesianState {
    let p = from_polar(PolarState::new(rec.r, rec.theta));
    match frame {
        Frame::Rotating => p,
        Frame::Geographic => to_geographic(p, rec.wind_angle),
    }
}

/// SVG 1.1 drawing of the path with the target circle, the laylines (for the
/// initial wind in the geographic frame) and tack markers.
pub fn render_svg(traj: &Trajectory, opts: &PlotOptions) -> String {
    let pts: Vec<CartesianState> = traj.records.iter().map(|r| point(r, opts.frame)).collect();
    let mut extent = opts.eta.max(1e-9) * 1.5;
    for p in &pts {
        extent = extent.max(p.x.abs()).max(p.y.abs());
    }
    extent *= 1.1;
    let size = opts.size;
    let half = size / 2.0;
    let scale = half / extent;
    let sx = |x: f64| half + x * scale;
    let sy = |y: f64| half - y * scale;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#);

    // laylines through the target
    let beta0 = traj.records.first().map_or(0.0, |r| r.wind_angle);
    for dir in [CartesianState::new(1.0, 0.0), CartesianState::new(0.0, 1.0)] {
        let d = match opts.frame {
            Frame::Rotating => dir,
            Frame::Geographic => to_geographic(dir, beta0),
        };
        let (a, b) = (-2.0 * extent, 2.0 * extent);
        let _ = writeln!(
            s,
            r##"<line class="layline" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#999999" stroke-dasharray="6,4" stroke-width="1"/>"##,
            sx(a * d.x),
            sy(a * d.y),
            sx(b * d.x),
            sy(b * d.y)
        );
    }
    let _ = writeln!(
        s,
        r##"<circle class="target" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#cc0000" stroke-width="1.5"/>"##,
        sx(0.0),
        sy(0.0),
        opts.eta * scale
    );

    if !pts.is_empty() {
        let mut poly = String::new();
        for p in &pts {
            let _ = write!(poly, "{:.3},{:.3} ", sx(p.x), sy(p.y));
        }
        let _ = writeln!(
            s,
            r##"<polyline class="path" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.2"/>"##,
            poly.trim_end()
        );
        for (rec, p) in traj.records.iter().zip(&pts) {
            if rec.event.is_tack() {
                let _ = writeln!(
                    s,
                    r##"<circle class="tack" cx="{:.3}" cy="{:.3}" r="3" fill="#e08000"/>"##,
                    sx(p.x),
                    sy(p.y)
                );
            }
        }
    }
    let label = match opts.frame {
        Frame::Rotating => "rotating frame (x right, y up)",
        Frame::Geographic => "geographic frame (xi1 right, xi2 up)",
    };
    let _ = writeln!(
        s,
        r#"<text x="8" y="18" font-family="sans-serif" font-size="13">{label}</text>"#
    );
    s.push_str("</svg>\n");
    s
}

/// One named pass/fail check in a results document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Results JSON: deterministic for a given resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDoc {
    pub params: serde_json::Value,
    pub strategy: String,
    pub estimate: serde_json::Value,
    pub bounds: serde_json::Value,
    pub checks: Vec<Check>,
    pub resolved_config: serde_json::Value,
}

impl ResultsDoc {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
