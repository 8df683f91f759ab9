use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inventory::Inventory;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 60.0;
const KHACHIYAN_TOLERANCE: f64 = 1e-7;
const KHACHIYAN_MAX_ITERATIONS: usize = 10_000;
const PALETTE: [&str; 5] = ["#d62728", "#e6b800", "#1f77b4", "#2ca02c", "#9467bd"];

/// Phoneme classes that can be outlined on an embedding plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overlay {
    Voiced,
    Nasal,
    Strident,
    /// Laterals, rhotics, glides and the glottal.
    Approximant,
}

impl Overlay {
    pub const ALL: [Overlay; 4] = [Overlay::Voiced, Overlay::Nasal, Overlay::Strident, Overlay::Approximant];

    pub fn as_str(self) -> &'static str {
        match self {
            Overlay::Voiced => "voiced",
            Overlay::Nasal => "nasal",
            Overlay::Strident => "strident",
            Overlay::Approximant => "approximant",
        }
    }

    /// Labels of `candidates` in the class, read from the articulatory and phonological tables.
    pub fn members<S: AsRef<str>>(
        self,
        candidates: &[S],
        articulatory: &Inventory,
        phonological: &Inventory,
    ) -> Result<Vec<String>> {
        let (table, features): (&Inventory, &[&str]) = match self {
            Overlay::Voiced => (articulatory, &["vc"]),
            Overlay::Nasal => (articulatory, &["ns"]),
            Overlay::Strident => (phonological, &["st"]),
            Overlay::Approximant => (articulatory, &["lt", "rt", "gd", "gl"]),
        };
        let columns = features
            .iter()
            .map(|f| table.theory().index_of(f).ok_or_else(|| Error::UnknownFeature(f.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        for label in candidates {
            let label = label.as_ref();
            if let Some(i) = table.index_of(label) {
                if columns.iter().any(|&k| table.feature(i).get(k)) {
                    out.push(label.to_string());
                }
            }
        }
        Ok(out)
    }
}

impl std::fmt::Display for Overlay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Overlay {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Overlay::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown overlay '{s}' (expected voiced, nasal, strident or approximant)"))
    }
}

/// `{x : (x−c)ᵀ A (x−c) ≤ 1}` with `A = R diag(1/rx², 1/ry²) Rᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
    /// Rotation of the `rx` axis, radians.
    pub angle: f64,
}

impl Ellipse {
    /// `(x−c)ᵀ A (x−c)`; at most 1 inside.
    pub fn level(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let (s, c) = self.angle.sin_cos();
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.rx).powi(2) + (v / self.ry).powi(2)
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.rx * self.ry
    }
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *cell = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

/// Minimum-volume enclosing ellipse by Khachiyan's algorithm.
///
/// Points must not all lie on one line; returns `None` otherwise.
pub fn min_enclosing_ellipse(points: &[(f64, f64)]) -> Option<Ellipse> {
    let m = points.len();
    if m < 3 {
        return None;
    }
    let d = 2.0;
    let mut u = vec![1.0 / m as f64; m];
    for _ in 0..KHACHIYAN_MAX_ITERATIONS {
        let mut x = [[0.0; 3]; 3];
        for (&(px, py), &w) in points.iter().zip(&u) {
            let q = [px, py, 1.0];
            for a in 0..3 {
                for b in 0..3 {
                    x[a][b] += w * q[a] * q[b];
                }
            }
        }
        let xi = invert3(&x)?;
        let (mut j, mut best) = (0, f64::NEG_INFINITY);
        for (i, &(px, py)) in points.iter().enumerate() {
            let q = [px, py, 1.0];
            let mut v = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    v += q[a] * xi[a][b] * q[b];
                }
            }
            if v > best {
                best = v;
                j = i;
            }
        }
        let step = (best - d - 1.0) / ((d + 1.0) * (best - 1.0));
        let mut change = 0.0;
        for (i, w) in u.iter_mut().enumerate() {
            let new = (1.0 - step) * *w + if i == j { step } else { 0.0 };
            change += (new - *w) * (new - *w);
            *w = new;
        }
        if change.sqrt() < KHACHIYAN_TOLERANCE {
            break;
        }
    }

    let (mut cx, mut cy) = (0.0, 0.0);
    for (&(px, py), &w) in points.iter().zip(&u) {
        cx += w * px;
        cy += w * py;
    }
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&(px, py), &w) in points.iter().zip(&u) {
        sxx += w * px * px;
        sxy += w * px * py;
        syy += w * py * py;
    }
    sxx -= cx * cx;
    sxy -= cx * cy;
    syy -= cy * cy;
    let det = sxx * syy - sxy * sxy;
    if det <= 0.0 {
        return None;
    }
    // A = (S⁻¹)/d; its eigenpairs give the axes.
    let (a, b, c) = (syy / det / d, -sxy / det / d, sxx / det / d);
    let mean = 0.5 * (a + c);
    let spread = (0.25 * (a - c).powi(2) + b * b).sqrt();
    let (l1, l2) = (mean - spread, mean + spread);
    if l1 <= 0.0 {
        return None;
    }
    let angle = match (b.abs() < 1e-300, a <= c) {
        (false, _) => (l1 - a).atan2(b),
        (true, true) => 0.0,
        (true, false) => std::f64::consts::FRAC_PI_2,
    };
    let mut e = Ellipse { cx, cy, rx: 1.0 / l1.sqrt(), ry: 1.0 / l2.sqrt(), angle };
    // Inflate to enclose every point exactly.
    let worst = points.iter().fold(0.0f64, |w, &(px, py)| w.max(e.level(px, py)));
    if worst > 1.0 {
        e.rx *= worst.sqrt();
        e.ry *= worst.sqrt();
    }
    Some(e)
}

/// Enclosing ellipse of squares of half-side `pad` around each point, so
/// single points and collinear sets still get a proper outline.
pub fn padded_enclosing_ellipse(points: &[(f64, f64)], pad: f64) -> Option<Ellipse> {
    let padded: Vec<(f64, f64)> = points
        .iter()
        .flat_map(|&(x, y)| [(x - pad, y - pad), (x + pad, y - pad), (x - pad, y + pad), (x + pad, y + pad)])
        .collect();
    min_enclosing_ellipse(&padded)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outline {
    pub name: String,
    pub ellipse: Ellipse,
}

/// Labelled scatter plot in data coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScatterPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(String, f64, f64)>,
    pub outlines: Vec<Outline>,
    /// Draw the `y = x` line.
    pub diagonal: bool,
    /// Same scale on both axes.
    pub equal_aspect: bool,
}

impl ScatterPlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Self::default() }
    }

    pub fn point(&mut self, label: impl Into<String>, x: f64, y: f64) -> &mut Self {
        self.points.push((label.into(), x, y));
        self
    }

    /// Outlines the named points; labels not on the plot are skipped.
    pub fn outline<S: AsRef<str>>(&mut self, name: impl Into<String>, labels: &[S]) -> &mut Self {
        let members: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(l, ..)| labels.iter().any(|m| m.as_ref() == l))
            .map(|&(_, x, y)| (x, y))
            .collect();
        if members.is_empty() {
            return self;
        }
        let pad = 0.03 * self.span().max(f64::MIN_POSITIVE);
        if let Some(ellipse) = padded_enclosing_ellipse(&members, pad) {
            self.outlines.push(Outline { name: name.into(), ellipse });
        }
        self
    }

    fn span(&self) -> f64 {
        let (x0, x1, y0, y1) = self.raw_bounds();
        (x1 - x0).max(y1 - y0)
    }

    fn raw_bounds(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(_, x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        )
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut x1, mut y0, mut y1) = self.raw_bounds();
        if self.points.is_empty() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        for o in &self.outlines {
            let r = o.ellipse.rx.max(o.ellipse.ry);
            x0 = x0.min(o.ellipse.cx - r);
            x1 = x1.max(o.ellipse.cx + r);
            y0 = y0.min(o.ellipse.cy - r);
            y1 = y1.max(o.ellipse.cy + r);
        }
        if self.diagonal || self.equal_aspect {
            let (lo, hi) = (x0.min(y0), x1.max(y1));
            if self.diagonal {
                (x0, x1, y0, y1) = (lo, hi, lo, hi);
            } else {
                let half = 0.5 * (x1 - x0).max(y1 - y0);
                let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
                (x0, x1, y0, y1) = (mx - half, mx + half, my - half, my + half);
            }
        }
        let pad = |lo: f64, hi: f64| {
            let w = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
            (lo - w, hi + w)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let plot_w = WIDTH - 2.0 * MARGIN;
        let plot_h = HEIGHT - 2.0 * MARGIN;
        let sx = plot_w / (x1 - x0);
        let sy = plot_h / (y1 - y0);
        let px = |x: f64| MARGIN + (x - x0) * sx;
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) * sy;

        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(&self.title))
            .unwrap();
        writeln!(
            out,
            r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="20" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        if self.diagonal {
            let (lo, hi) = (x0.max(y0), x1.min(y1));
            writeln!(
                out,
                r##"<line class="diagonal" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#888" stroke-dasharray="6 4"/>"##,
                px(lo),
                py(lo),
                px(hi),
                py(hi)
            )
            .unwrap();
        }
        for (k, o) in self.outlines.iter().enumerate() {
            let e = &o.ellipse;
            let deg = -e.angle.to_degrees();
            writeln!(
                out,
                r#"<ellipse class="overlay" data-class="{}" cx="{:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}" transform="rotate({:.3} {:.3} {:.3})" fill="none" stroke="{}" stroke-width="2"/>"#,
                escape(&o.name),
                px(e.cx),
                py(e.cy),
                e.rx * sx,
                e.ry * sy,
                deg,
                px(e.cx),
                py(e.cy),
                PALETTE[k % PALETTE.len()]
            )
            .unwrap();
        }
        for (label, x, y) in &self.points {
            writeln!(out, r#"<circle class="point" cx="{:.3}" cy="{:.3}" r="3" fill="black"/>"#, px(*x), py(*y)).unwrap();
            writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="13">{}</text>"#, px(*x) + 5.0, py(*y) - 5.0, escape(label))
                .unwrap();
        }
        for (k, o) in self.outlines.iter().enumerate() {
            let y = MARGIN + 16.0 + 16.0 * k as f64;
            writeln!(
                out,
                r#"<text x="{:.1}" y="{y:.1}" font-size="12" text-anchor="end" fill="{}">{}</text>"#,
                WIDTH - MARGIN - 6.0,
                PALETTE[k % PALETTE.len()],
                escape(&o.name)
            )
            .unwrap();
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
