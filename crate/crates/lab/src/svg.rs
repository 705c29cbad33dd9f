//! Minimal SVG plots: a heat map with iso-lines for grid slices, a
//! log-scale series plot and a chain projection.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const PAD: f64 = 40.0;

fn header(out: &mut String, title: &str) {
    let full = SIZE + 2.0 * PAD;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{PAD}" y="24">{}</text>"#, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn colour(t: f64) -> String {
    // blue → white → red
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let k = t / 0.5;
        (k, k, 1.0)
    } else {
        let k = (1.0 - t) / 0.5;
        (1.0, k, k)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8)
}

/// Heat map of `values[j][i]` on a regular `nx × ny` lattice (NaN cells are
/// left blank) with `levels` iso-lines from marching squares.
pub fn slice(title: &str, values: &[Vec<f64>], levels: usize) -> String {
    let ny = values.len();
    let nx = values.first().map_or(0, Vec::len);
    let mut out = String::new();
    header(&mut out, title);
    if nx < 2 || ny < 2 {
        out.push_str("</svg>\n");
        return out;
    }
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (cw, ch) = (SIZE / (nx - 1) as f64, SIZE / (ny - 1) as f64);
    let px = |i: f64| PAD + i * cw;
    let py = |j: f64| PAD + SIZE - j * ch;
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j][i];
            if !v.is_finite() {
                continue;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}"/>"#,
                px(i as f64 - 0.5),
                py(j as f64 + 0.5),
                colour((v - lo) / span)
            );
        }
    }
    for l in 1..=levels {
        let level = lo + span * l as f64 / (levels + 1) as f64;
        let mut path = String::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let c = [values[j][i], values[j][i + 1], values[j + 1][i + 1], values[j + 1][i]];
                if c.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
                let mut hits = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (c[e], c[(e + 1) % 4]);
                    if (a < level) != (b < level) {
                        let t = (level - a) / (b - a);
                        let (p, q) = (corners[e], corners[(e + 1) % 4]);
                        hits.push((i as f64 + p.0 + t * (q.0 - p.0), j as f64 + p.1 + t * (q.1 - p.1)));
                    }
                }
                for pair in hits.chunks(2).filter(|p| p.len() == 2) {
                    let _ = write!(
                        path,
                        "M{:.2} {:.2}L{:.2} {:.2}",
                        px(pair[0].0),
                        py(pair[0].1),
                        px(pair[1].0),
                        py(pair[1].1)
                    );
                }
            }
        }
        if !path.is_empty() {
            let _ = writeln!(out, r#"<path d="{path}" stroke="black" stroke-width="0.6" fill="none"/>"#);
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}">min {lo:.4e}  max {hi:.4e}</text>"#,
        SIZE + 1.6 * PAD
    );
    out.push_str("</svg>\n");
    out
}

/// Log-scale plot of named positive series against a shared abscissa.
pub fn log_series(title: &str, x: &[f64], series: &[(&str, &[f64])]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|v| *v > 0.0 && v.is_finite())
        .map(f64::log10)
        .collect();
    if x.len() < 2 || ys.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (xlo, xhi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (ylo, yhi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (ylo, yhi) = (ylo.floor(), yhi.ceil().max(ylo.floor() + 1.0));
    let px = |v: f64| PAD + SIZE * (v - xlo) / (xhi - xlo).max(1e-300);
    let py = |v: f64| PAD + SIZE - SIZE * (v.log10() - ylo) / (yhi - ylo);
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="gray"/>"#
    );
    let mut decade = ylo;
    while decade <= yhi {
        let y = py(10f64.powf(decade));
        let _ = writeln!(out, r#"<text x="2" y="{y:.2}">1e{decade}</text>"#);
        decade += 1.0;
    }
    let palette = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98"];
    for (k, (name, s)) in series.iter().enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(s.iter())
            .filter(|(_, v)| **v > 0.0 && v.is_finite())
            .map(|(a, v)| format!("{:.2},{:.2}", px(*a), py(*v)))
            .collect();
        let c = palette[k % palette.len()];
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{c}" fill="none" stroke-width="1.5"/>"#, pts.join(" "));
        for p in &pts {
            let (a, b) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(out, r#"<circle cx="{a}" cy="{b}" r="3" fill="{c}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
            PAD + 8.0,
            PAD + 16.0 * (k + 1) as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Projection of balls `(center, radius)` onto the `(x₁, x₃)` plane, with
/// edges between linked centres.
pub fn chain_projection(title: &str, balls: &[([f64; 3], f64)], edges: &[(usize, usize)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let reach = balls
        .iter()
        .map(|(c, r)| c[0].abs().max(c[2].abs()) + r)
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let scale = SIZE / (2.0 * reach);
    let px = |v: f64| PAD + SIZE / 2.0 + v * scale;
    let py = |v: f64| PAD + SIZE / 2.0 - v * scale;
    for (k, (c, r)) in balls.iter().enumerate() {
        let fill = if k == 0 { "#c0392b" } else { "none" };
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" stroke="#2471a3" stroke-width="0.4" fill="{fill}" fill-opacity="0.3"/>"##,
            px(c[0]),
            py(c[2]),
            r * scale
        );
    }
    for &(i, j) in edges {
        if let (Some(a), Some(b)) = (balls.get(i), balls.get(j)) {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-width="0.3"/>"#,
                px(a.0[0]),
                py(a.0[2]),
                px(b.0[0]),
                py(b.0[2])
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
