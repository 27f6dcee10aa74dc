//! Minimal SVG line plots.

use crate::scalar::Scalar;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 40.0;

/// One polyline per series on shared axes, 800×500.
pub fn polyline_svg<T: Scalar>(title: &str, series: &[(&[T], &[T])]) -> String {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, v) in series {
        for (&a, &b) in t.iter().zip(v.iter()) {
            let (a, b) = (a.as_f64(), b.as_f64());
            if a.is_finite() && b.is_finite() {
                xs = (xs.0.min(a), xs.1.max(a));
                ys = (ys.0.min(b), ys.1.max(b));
            }
        }
    }
    if !(xs.0 <= xs.1) {
        xs = (0.0, 1.0);
        ys = (0.0, 1.0);
    }
    if xs.1 == xs.0 {
        xs.1 = xs.0 + 1.0;
    }
    if ys.1 == ys.0 {
        ys = (ys.0 - 0.5, ys.0 + 0.5);
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (xs.1 - xs.0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (ys.1 - ys.0);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    out.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    ));
    for (k, (t, v)) in series.iter().enumerate() {
        let pts: Vec<String> = t
            .iter()
            .zip(v.iter())
            .filter(|(a, b)| a.as_f64().is_finite() && b.as_f64().is_finite())
            .map(|(a, b)| {
                let px = MARGIN + (a.as_f64() - xs.0) * sx;
                let py = HEIGHT - MARGIN - (b.as_f64() - ys.0) * sy;
                format!("{px:.2},{py:.2}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            colors[k % colors.len()],
            pts.join(" ")
        ));
    }
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">t: {:.3} .. {:.3}, y: {:.3e} .. {:.3e}</text>\n",
        HEIGHT - 12.0,
        xs.0,
        xs.1,
        ys.0,
        ys.1
    ));
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn has_one_polyline_per_series() {
        let t = [0.0, 1.0, 2.0];
        let a = [1.0, 0.5, 0.25];
        let b = [0.0, 0.1, f64::NAN];
        let svg = polyline_svg("x & y", &[(&t[..], &a[..]), (&t[..], &b[..])]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("width=\"800\" height=\"500\""));
        assert!(svg.contains("x &amp; y"));
    }
}
