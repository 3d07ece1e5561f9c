//! Minimal SVG output: log-log residual curves and box-density heatmaps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// One polyline per series on log10 axes; non-positive values are skipped.
pub fn log_log(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, pts)| {
            pts.iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect()
        })
        .collect();
    let (x0, x1) = bounds(logs.iter().flatten().map(|p| p.0));
    let (y0, y1) = bounds(logs.iter().flatten().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = open(title);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let d = d as f64;
        if d >= x0 && d <= x1 {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">1e{d}</text>"#,
                sx(d),
                H - PAD + 16.0
            );
        }
    }
    for d in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let d = d as f64;
        if d >= y0 && d <= y1 {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#,
                PAD - 4.0,
                sy(d) + 4.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (k, ((name, _), pts)) in series.iter().zip(&logs).enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for (x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                sx(*x),
                sy(*y)
            );
        }
        let ly = PAD + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{colour}">{}</text>"#,
            PAD + 8.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Cell colours on a diverging blue-white-red scale symmetric about zero. `values` is row-major
/// with `rows` rows; row 0 is drawn at the bottom.
pub fn heatmap(title: &str, rows: usize, cols: usize, values: &[f64]) -> String {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let (cw, ch) = ((W - 2.0 * PAD) / cols as f64, (H - 2.0 * PAD) / rows as f64);
    let mut s = open(title);
    for i in 0..rows {
        for j in 0..cols {
            let t = (values[i * cols + j] / scale).clamp(-1.0, 1.0);
            let fade = |c: f64| (255.0 * (1.0 - t.abs()) + c * t.abs()).round() as u8;
            let (r, g, b) = if t >= 0.0 {
                (fade(214.0), fade(39.0), fade(40.0))
            } else {
                (fade(31.0), fade(119.0), fade(180.0))
            };
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                PAD + j as f64 * cw,
                H - PAD - (i + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">max |value| = {scale:.4e}</text>"#,
        W / 2.0,
        H - 20.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_closed_svg_documents() {
        let s = log_log(
            "t<1>",
            "h",
            "e",
            &[("a".into(), vec![(0.1, 1e-2), (0.05, 2.5e-3), (0.0, 1.0)])],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("t&lt;1&gt;"));
        assert_eq!(s.matches("<circle").count(), 2);
        let h = heatmap("m", 2, 3, &[1.0, -1.0, 0.0, 0.5, 0.0, 0.0]);
        assert_eq!(h.matches("<rect").count(), 7);
        assert!(h.contains("#d62728") && h.contains("#1f77b4") && h.contains("#ffffff"));
    }
}
