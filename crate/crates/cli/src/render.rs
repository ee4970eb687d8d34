use std::fmt::Write;

use qcap_core::experiments::RegionPoint;

const SIDE: f64 = 512.0;

/// `%.{digits}g`: shortest of fixed and scientific at `digits` significant
/// digits, trailing zeros removed.
pub fn format_g(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn region_csv(points: &[RegionPoint]) -> String {
    let mut out = String::from("q,p,delta\n");
    for r in points {
        writeln!(
            out,
            "{},{},{}",
            format_g(r.q, 12),
            format_g(r.p, 12),
            format_g(r.delta, 12)
        )
        .unwrap();
    }
    out
}

/// Linear blue-white-red over `[-scale, scale]`.
fn color(v: f64, scale: f64) -> String {
    let t = (v / scale).clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
    let (r, g, b) = if t < 0.0 {
        (fade(t), fade(t), 255)
    } else {
        (255, fade(t), fade(t))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap with `q` along x and `p` along y (upwards), plus the zero contour
/// traced by marching squares through the cell centres.
pub fn region_svg(points: &[RegionPoint], grid: usize) -> String {
    assert_eq!(points.len(), grid * grid, "row-major grid expected");
    let at = |qi: usize, pj: usize| points[qi * grid + pj].delta;
    let scale = points.iter().fold(0.0f64, |m, r| m.max(r.delta.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let cell = SIDE / grid as f64;
    let cx = |qi: f64| (qi + 0.5) * cell;
    let cy = |pj: f64| SIDE - (pj + 0.5) * cell;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="512" height="512" viewBox="0 0 512 512">"#
    )
    .unwrap();
    writeln!(out, "<title>delta(q, p), range ±{}</title>", format_g(scale, 6)).unwrap();
    for qi in 0..grid {
        for pj in 0..grid {
            writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                qi as f64 * cell,
                SIDE - (pj + 1) as f64 * cell,
                cell,
                cell,
                color(at(qi, pj), scale)
            )
            .unwrap();
        }
    }

    let mut path = String::new();
    for qi in 0..grid - 1 {
        for pj in 0..grid - 1 {
            // corners counter-clockwise from (qi, pj)
            let corners = [(qi, pj), (qi + 1, pj), (qi + 1, pj + 1), (qi, pj + 1)];
            let mut hits = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let (va, vb) = (at(a.0, a.1), at(b.0, b.1));
                if (va > 0.0) != (vb > 0.0) {
                    let t = va / (va - vb);
                    let x = a.0 as f64 + t * (b.0 as f64 - a.0 as f64);
                    let y = a.1 as f64 + t * (b.1 as f64 - a.1 as f64);
                    hits.push((cx(x), cy(y)));
                }
            }
            for seg in hits.chunks_exact(2) {
                write!(path, "M{:.3} {:.3}L{:.3} {:.3}", seg[0].0, seg[0].1, seg[1].0, seg[1].1).unwrap();
            }
        }
    }
    if !path.is_empty() {
        writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="black" stroke-width="1.5"/>"#
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(format_g(0.125, 12), "0.125");
        assert_eq!(format_g(-0.5, 12), "-0.5");
        assert_eq!(format_g(1.0, 12), "1");
        assert_eq!(format_g(-0.0, 12), "0");
        assert_eq!(format_g(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_g(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(format_g(1.5e-5, 12), "1.5e-05");
        assert_eq!(format_g(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_g(0.0001, 12), "0.0001");
        assert_eq!(format_g(0.1 + 0.2, 12), "0.3");
    }

    #[test]
    fn colors_span_blue_white_red() {
        assert_eq!(color(-1.0, 1.0), "#0000ff");
        assert_eq!(color(0.0, 1.0), "#ffffff");
        assert_eq!(color(1.0, 1.0), "#ff0000");
    }

    #[test]
    fn svg_has_contour_for_sign_change() {
        let pts: Vec<RegionPoint> = (0..4)
            .map(|k| RegionPoint {
                q: (k / 2) as f64,
                p: (k % 2) as f64,
                delta: if k == 3 { 1.0 } else { -1.0 },
            })
            .collect();
        let svg = region_svg(&pts, 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<path"));
        assert_eq!(svg.matches("<rect").count(), 4);
    }
}
