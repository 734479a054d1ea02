//! Minimal self-contained SVG output: line plots, outline panels and meshes.

use std::fmt::Write;

use crate::mesh::{BoundaryTag, Mesh2D};

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<[f64; 2]>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Self { name: name.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Extra line printed under the title.
    pub stamp: Option<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

impl LinePlot {
    pub fn to_svg(&self, width: f64, height: f64) -> String {
        let (ml, mr, mt, mb) = (70.0, 20.0, 50.0, 50.0);
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        if !(x1 > x0) {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if !(y1 > y0) {
            let pad = 0.05 * y0.abs().max(1e-3);
            y0 -= pad;
            y1 += pad;
        } else {
            let pad = 0.05 * (y1 - y0);
            y0 -= pad;
            y1 += pad;
        }
        let w = width - ml - mr;
        let h = height - mt - mb;
        let sx = |x: f64| ml + (x - x0) / (x1 - x0) * w;
        let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * h;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(&self.title));
        if let Some(st) = &self.stamp {
            let _ = writeln!(s, r##"<text x="{}" y="38" text-anchor="middle" fill="#555">{}</text>"##, width / 2.0, escape(st));
        }
        let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, mt + h, mt + h + 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, mt + h + 18.0, fmt_tick(t));
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{ml}" y2="{y:.2}" stroke="black"/>"#, ml - 5.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 8.0, y + 4.0, fmt_tick(t));
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, ml + w / 2.0, height - 10.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
            mt + h / 2.0,
            mt + h / 2.0,
            escape(&self.y_label)
        );
        for (i, ser) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = ser.points.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
            let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" "));
            if !ser.dashed {
                for p in &ser.points {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(p[0]), sy(p[1]));
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                ml + 10.0,
                mt + 16.0 + 14.0 * i as f64,
                escape(&ser.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Closed outlines drawn in a grid of equal-scale panels.
pub fn outline_panels(panels: &[(String, Vec<[f64; 2]>)], cols: usize, cell: f64) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols);
    let extent = panels
        .iter()
        .flat_map(|(_, p)| p.iter())
        .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(1e-12);
    let scale = 0.42 * cell / extent;
    let (w, h) = (cols as f64 * cell, rows as f64 * (cell + 16.0));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, (title, pts)) in panels.iter().enumerate() {
        let cx = (k % cols) as f64 * cell + cell / 2.0;
        let top = (k / cols) as f64 * (cell + 16.0);
        let cy = top + 16.0 + cell / 2.0;
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, top + 12.0, escape(title));
        let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", cx + scale * p[0], cy - scale * p[1])).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#dde8f5" stroke="#1f77b4"/>"##, path.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// Triangles in grey, Dirichlet edges in red, Neumann edges in blue.
pub fn mesh_svg(mesh: &Mesh2D, size: f64) -> String {
    let scale = 0.45 * size;
    let c = size / 2.0;
    let p = |v: [f64; 2]| format!("{:.3},{:.3}", c + scale * v[0], c - scale * v[1]);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let v = mesh.vertices();
    for t in mesh.triangles() {
        let _ = writeln!(
            s,
            r##"<polygon points="{} {} {}" fill="none" stroke="#999" stroke-width="0.5"/>"##,
            p(v[t[0]]),
            p(v[t[1]]),
            p(v[t[2]])
        );
    }
    for e in mesh.boundary_edges() {
        let color = match e.tag {
            BoundaryTag::Dirichlet => "#d62728",
            BoundaryTag::Neumann => "#1f77b4",
        };
        let (a, b) = (v[e.vertices[0]], v[e.vertices[1]]);
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="2"/>"#,
            c + scale * a[0],
            c - scale * a[1],
            c + scale * b[0],
            c - scale * b[1]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disk_mesh;

    #[test]
    fn ticks_are_round_and_cover_the_range() {
        let t = ticks(-0.2, 0.2);
        assert_eq!(t.first(), Some(&-0.2));
        assert!(t.contains(&0.0));
        assert!(ticks(3.6, 3.75).len() >= 3);
    }

    #[test]
    fn plots_are_well_formed() {
        let p = LinePlot {
            title: "a < b".into(),
            series: vec![Series::new("s", vec![[0.0, 1.0], [1.0, 2.0]]), Series::new("flat", vec![[0.0, 1.0], [1.0, 1.0]]).dashed()],
            ..Default::default()
        };
        let svg = p.to_svg(400.0, 300.0);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        let m = mesh_svg(&generate_disk_mesh(1).unwrap(), 200.0);
        assert_eq!(m.matches("<polygon").count(), 24);
        let o = outline_panels(&[("t".into(), vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])], 6, 100.0);
        assert!(o.contains("<polygon"));
    }
}
