//! File formats: shape files (JSON or CSV), distance tables, geodesic
//! records and SVG snapshot strips.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_space::StepDiagnostics;
use crate::curve::{uniform_grid, DiscreteCurve, Topology};
use crate::error::{ElasticError, Result};
use crate::shapes::arclength_reparam;
use crate::V2;

/// A curve on disk: `{"name", "topology", "points": [[x, y], ...]}` with an
/// optional parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFile {
    pub name: String,
    pub topology: Topology,
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

impl ShapeFile {
    /// Omits the grid when it is the uniform one.
    pub fn from_curve(name: &str, c: &DiscreteCurve) -> Self {
        let uniform = uniform_grid(c.len(), c.topology());
        Self {
            name: name.to_string(),
            topology: c.topology(),
            points: c.points().iter().map(|p| [p.x, p.y]).collect(),
            grid: (c.grid() != uniform.as_slice()).then(|| c.grid().to_vec()),
        }
    }

    /// Checks the point count and coordinates and drops a duplicated
    /// closing point of a closed shape.
    pub fn normalized(mut self) -> Result<Self> {
        if let Some((i, _)) = self
            .points
            .iter()
            .enumerate()
            .find(|(_, p)| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(ElasticError::Parse {
                location: format!("{}: points[{i}]", self.name),
                message: "non-finite coordinate".into(),
            });
        }
        if self.topology.is_closed() && self.points.len() > 1 && self.grid.is_none() {
            let first = self.points[0];
            let last = self.points[self.points.len() - 1];
            let scale = self
                .points
                .iter()
                .map(|p| p[0].abs().max(p[1].abs()))
                .fold(0.0, f64::max);
            if (first[0] - last[0]).abs() <= 1e-12 * scale && (first[1] - last[1]).abs() <= 1e-12 * scale {
                log::info!("{}: dropping duplicated closing point", self.name);
                self.points.pop();
            }
        }
        if self.points.len() < 4 {
            return Err(ElasticError::TooFewNodes(self.points.len()));
        }
        if let Some(g) = &self.grid {
            if g.len() != self.points.len() {
                return Err(ElasticError::Parse {
                    location: format!("{}: grid", self.name),
                    message: format!("{} grid values for {} points", g.len(), self.points.len()),
                });
            }
        }
        Ok(self)
    }

    pub fn to_curve(&self) -> Result<DiscreteCurve> {
        let pts = self.points.iter().map(|p| V2::new(p[0], p[1])).collect();
        match &self.grid {
            Some(g) => DiscreteCurve::new(pts, g.clone(), self.topology),
            None => DiscreteCurve::uniform(pts, self.topology),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("shape files serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Parses a JSON shape file; errors carry line and column.
pub fn parse_shape_json(text: &str, origin: &str) -> Result<ShapeFile> {
    let shape: ShapeFile = serde_json::from_str(text).map_err(|e| ElasticError::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    shape.normalized()
}

/// Parses two-column `x,y` text. Blank lines, `#` comments and a
/// non-numeric header line are skipped.
pub fn parse_shape_csv(text: &str, name: &str, topology: Topology) -> Result<ShapeFile> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split([',', ';', '\t']).map(str::trim).collect();
        let parsed: Vec<std::result::Result<f64, _>> = fields.iter().map(|f| f.parse::<f64>()).collect();
        if points.is_empty() && parsed.iter().all(|p| p.is_err()) {
            continue;
        }
        if fields.len() != 2 {
            return Err(ElasticError::Parse {
                location: format!("{name}:{}", i + 1),
                message: format!("expected two columns, found {}", fields.len()),
            });
        }
        let mut xy = [0.0; 2];
        for (k, p) in parsed.into_iter().enumerate() {
            xy[k] = p.map_err(|_| ElasticError::Parse {
                location: format!("{name}:{} column {}", i + 1, k + 1),
                message: format!("`{}` is not a number", fields[k]),
            })?;
        }
        points.push(xy);
    }
    ShapeFile {
        name: name.to_string(),
        topology,
        points,
        grid: None,
    }
    .normalized()
}

/// Reads a shape from `path` (`.csv` or JSON).
///
/// CSV files carry no topology, so `csv_topology` decides it.
pub fn read_shape_file(path: &Path, csv_topology: Topology) -> Result<ShapeFile> {
    let text = fs::read_to_string(path)?;
    let origin = path.display().to_string();
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("shape");
        parse_shape_csv(&text, name, csv_topology)
    } else {
        parse_shape_json(&text, &origin)
    }
}

/// Loads a curve, optionally resampled proportionally to arc length.
pub fn load_shape(path: &Path, csv_topology: Topology, arclen: bool) -> Result<(String, DiscreteCurve)> {
    let shape = read_shape_file(path, csv_topology)?;
    let c = shape.to_curve()?;
    let c = if arclen { arclength_reparam(&c)? } else { c };
    Ok((shape.name, c))
}

/// Outcome of one table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairStatus {
    Diagonal,
    Converged,
    /// The boundary value solver stopped at its iteration cap.
    NotConverged { residual: f64 },
    /// Matching stopped at its iteration cap.
    StoppedEarly,
    /// Matching hit the refinement cap.
    Incomplete,
    Failed { message: String },
    /// Copied from the transposed entry (no symmetry audit).
    Mirrored,
}

/// Pairwise distances. Entry `[i][j]` is computed from shape `i` to shape
/// `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub names: Vec<String>,
    pub method: String,
    pub audited: bool,
    pub distances: Vec<Vec<Option<f64>>>,
    pub seconds: Vec<Vec<f64>>,
    pub status: Vec<Vec<PairStatus>>,
}

impl DistanceTable {
    pub fn new(names: Vec<String>, method: &str, audited: bool) -> Self {
        let n = names.len();
        let mut status = vec![vec![PairStatus::Mirrored; n]; n];
        let mut distances = vec![vec![None; n]; n];
        for i in 0..n {
            status[i][i] = PairStatus::Diagonal;
            distances[i][i] = Some(0.0);
        }
        Self {
            names,
            method: method.to_string(),
            audited,
            distances,
            seconds: vec![vec![0.0; n]; n],
            status,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Largest `|d(i→j) − d(j→i)| / max(d(i→j), d(j→i))` over computed pairs.
    pub fn max_asymmetry(&self) -> Option<f64> {
        let n = self.len();
        let mut worst: Option<f64> = None;
        for i in 0..n {
            for j in i + 1..n {
                if let (Some(a), Some(b)) = (self.distances[i][j], self.distances[j][i]) {
                    let m = a.max(b);
                    let r = if m > 0.0 { (a - b).abs() / m } else { 0.0 };
                    worst = Some(worst.map_or(r, |w| w.max(r)));
                }
            }
        }
        worst
    }

    /// Number of off-diagonal entries that failed outright.
    pub fn failures(&self) -> usize {
        self.status
            .iter()
            .flatten()
            .filter(|s| matches!(s, PairStatus::Failed { .. }))
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("shape");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (name, row) in self.names.iter().zip(&self.distances) {
            s.push_str(name);
            for d in row {
                s.push(',');
                if let Some(d) = d {
                    let _ = write!(s, "{d}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
        s.push('\n');
        s
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        fs::write(dir.join(format!("{stem}.json")), self.to_json())?;
        Ok(())
    }
}

/// A geodesic as written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicRecord {
    /// `flat` (open curves, closed form), `rattle` (closed curves,
    /// shooting) or `match` (closed curves after reparameterization).
    pub method: String,
    pub config: serde_json::Value,
    pub distance: f64,
    pub times: Vec<f64>,
    pub curves: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<StepDiagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl GeodesicRecord {
    pub fn curves_from(curves: &[DiscreteCurve]) -> Vec<Vec<[f64; 2]>> {
        curves
            .iter()
            .map(|c| c.points().iter().map(|p| [p.x, p.y]).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }
}

const PANEL: f64 = 160.0;
const MARGIN: f64 = 10.0;

/// Lays out curves side by side on a common scale, each centred on its mean
/// point. The output depends only on the inputs.
pub fn snapshot_svg(curves: &[(String, &DiscreteCurve)]) -> String {
    let centred: Vec<(Vec<V2>, bool)> = curves
        .iter()
        .map(|(_, c)| {
            let m = c.points().iter().sum::<V2>() / c.len() as f64;
            (c.points().iter().map(|p| p - m).collect(), c.topology().is_closed())
        })
        .collect();
    let extent = centred
        .iter()
        .flat_map(|(p, _)| p.iter())
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0, f64::max)
        .max(1e-12);
    let scale = (PANEL / 2.0 - MARGIN) / extent;
    let width = PANEL * curves.len().max(1) as f64;
    let height = PANEL + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, ((label, _), (pts, closed))) in curves.iter().zip(&centred).enumerate() {
        let cx = PANEL * (k as f64 + 0.5);
        let cy = PANEL / 2.0;
        let coords: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.3},{:.3}", cx + scale * p.x, cy - scale * p.y))
            .collect();
        let tag = if *closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            s,
            r#"<{tag} points="{}" fill="none" stroke="black" stroke-width="1.2"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            PANEL + 12.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn json_round_trip_is_byte_identical() {
        let c = shapes::ellipse_fold(64, 0.8).unwrap();
        let text = ShapeFile::from_curve("fold", &c).to_json();
        let back = parse_shape_json(&text, "mem").unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.to_curve().unwrap().points(), c.points());
    }

    #[test]
    fn closing_duplicate_is_dropped() {
        let mut pts: Vec<[f64; 2]> = (0..8)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 8.0;
                [t.cos(), t.sin()]
            })
            .collect();
        pts.push(pts[0]);
        let shape = ShapeFile {
            name: "octagon".into(),
            topology: Topology::Closed,
            points: pts,
            grid: None,
        }
        .normalized()
        .unwrap();
        assert_eq!(shape.points.len(), 8);
    }

    #[test]
    fn csv_parsing() {
        let text = "x,y\n0,0\n1,0\n# comment\n1,1\n\n0,1\n";
        let s = parse_shape_csv(text, "square", Topology::Closed).unwrap();
        assert_eq!(s.points.len(), 4);
        let err = parse_shape_csv("0,0\n1,zero\n", "bad", Topology::Open).unwrap_err();
        assert!(err.to_string().contains("bad:2 column 2"), "{err}");
        let three = parse_shape_csv("0,0\n1,0\n1,1\n", "tri", Topology::Open);
        assert!(matches!(three, Err(ElasticError::TooFewNodes(3))));
    }

    #[test]
    fn json_errors_have_positions() {
        let err = parse_shape_json("{\"name\": \"x\",\n \"topology\": \"loop\"}", "f.json").unwrap_err();
        assert!(err.to_string().contains("f.json:2:"), "{err}");
    }

    #[test]
    fn table_csv_and_asymmetry() {
        let mut t = DistanceTable::new(vec!["a".into(), "b".into()], "rattle", true);
        t.distances[0][1] = Some(1.0);
        t.distances[1][0] = Some(1.001);
        assert!((t.max_asymmetry().unwrap() - 0.001 / 1.001).abs() < 1e-12);
        assert_eq!(t.to_csv(), "shape,a,b\na,0,1\nb,1.001,0\n");
    }

    #[test]
    fn svg_is_deterministic() {
        let c = shapes::circle(32, 1.0).unwrap();
        let s = shapes::segment(16).unwrap();
        let a = snapshot_svg(&[("t=0".into(), &c), ("t=1".into(), &s)]);
        let b = snapshot_svg(&[("t=0".into(), &c), ("t=1".into(), &s)]);
        assert_eq!(a, b);
        assert!(a.contains("<polygon") && a.contains("<polyline"));
    }
}
