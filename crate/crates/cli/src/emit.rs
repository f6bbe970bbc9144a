//! Deterministic artifact emission: a JSON writer with sorted keys and
//! fixed 17-significant-digit float formatting, plus SVG rendering of
//! contours with orientation arrows.

use quadgreen::quasimomentum::Contour;
use quadgreen::Complex64;
use std::collections::BTreeMap;

/// JSON value with deterministic serialization: object keys are sorted and
/// every float prints with 17 significant digits, so identical runs emit
/// byte-identical documents.
#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(BTreeMap<String, Json>),
}

impl Json {
    pub fn object(pairs: Vec<(&str, Json)>) -> Json {
        Json::Object(
            pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }

    pub fn complex(z: Complex64) -> Json {
        Json::Array(vec![Json::Float(z.re), Json::Float(z.im)])
    }

    pub fn floats(v: &[f64]) -> Json {
        Json::Array(v.iter().map(|&x| Json::Float(x)).collect())
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Float(x) => {
                if x.is_finite() {
                    out.push_str(&format!("{x:.16e}"));
                } else {
                    // JSON has no infinities; stringify out-of-band values.
                    out.push_str(&format!("\"{x}\""));
                }
            }
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Object(map) => {
                if map.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    Json::Str(k.clone()).write(out, indent + 1);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }

    pub fn to_string_pretty(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }
}

/// Render the contour as a standalone SVG document: one polyline per
/// component with small orientation arrowheads along the way.
pub fn contour_svg(contour: &Contour, title: &str) -> String {
    let scale = 120.0;
    let extent = 1.6 * contour.chart_radius * scale;
    let map = |z: Complex64| (z.re * scale, -z.im * scale);
    let mut body = String::new();
    for comp in &contour.components {
        let mut path = String::new();
        for (i, p) in comp.iter().enumerate() {
            let z = p.z();
            // Clamp far-chart excursions to the viewport edge.
            let r = z.norm();
            let zc = if r * scale > 2.0 * extent {
                z * (2.0 * extent / (r * scale))
            } else {
                z
            };
            let (x, y) = map(zc);
            path.push_str(if i == 0 { "M " } else { "L " });
            path.push_str(&format!("{x:.2} {y:.2} "));
        }
        path.push('Z');
        body.push_str(&format!(
            "  <path d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n"
        ));
        // Orientation arrows at a few segment midpoints.
        let n = comp.len();
        let step = (n / 8).max(1);
        for i in (0..n).step_by(step) {
            let a = comp[i].z();
            let b = comp[(i + 1) % n].z();
            if a.norm() * scale > extent || b.norm() * scale > extent {
                continue;
            }
            let mid = 0.5 * (a + b);
            let dir = b - a;
            if dir.norm() == 0.0 {
                continue;
            }
            let u = dir / dir.norm() * (6.0 / scale);
            let left = mid - u + u * Complex64::new(0.0, 0.5);
            let right = mid - u - u * Complex64::new(0.0, 0.5);
            let (mx, my) = map(mid);
            let (lx, ly) = map(left);
            let (rx, ry) = map(right);
            body.push_str(&format!(
                "  <path d=\"M {lx:.2} {ly:.2} L {mx:.2} {my:.2} L {rx:.2} {ry:.2}\" \
                 fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.2\"/>\n"
            ));
        }
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.1} {:.1} {:.1} {:.1}\">\n\
         <title>{title}</title>\n\
         <circle cx=\"0\" cy=\"0\" r=\"2\" fill=\"#333\"/>\n{body}</svg>\n",
        -extent,
        -extent,
        2.0 * extent,
        2.0 * extent
    )
}
