//! Deterministic renderers: binary PGM (P5) rasters and a small SVG subset
//! (`rect`, `circle`, `line` elements only). Identical inputs produce
//! identical bytes; SVG points are emitted in sorted chart order.

use crate::error::Result;
use crate::sets::SetApprox;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug)]
pub struct Viewport {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(min: [f64; 2], max: [f64; 2], width: u32, height: u32) -> Viewport {
        Viewport {
            min,
            max,
            width,
            height,
        }
    }

    fn to_pixel(self, x: f64, y: f64) -> Option<(u32, u32)> {
        let ux = (x - self.min[0]) / (self.max[0] - self.min[0]);
        let uy = (y - self.min[1]) / (self.max[1] - self.min[1]);
        if !(0.0..=1.0).contains(&ux) || !(0.0..=1.0).contains(&uy) {
            return None;
        }
        let col = ((ux * self.width as f64) as u32).min(self.width - 1);
        let row_up = ((uy * self.height as f64) as u32).min(self.height - 1);
        Some((col, self.height - 1 - row_up))
    }
}

fn chart_points(set: &SetApprox) -> Vec<[f64; 2]> {
    let space = set.space();
    let mut pts: Vec<[f64; 2]> = set.points().iter().map(|p| space.chart(p)).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts
}

/// Render the set into a PGM (P5) raster: white marks on black. 1-D charts
/// draw tick marks across a centered band; plane charts set single pixels.
/// Returns the bytes and the number of points that landed in the viewport.
pub fn render_pgm(set: &SetApprox, vp: &Viewport) -> Result<(Vec<u8>, usize)> {
    let w = vp.width as usize;
    let h = vp.height as usize;
    let mut data = vec![0u8; w * h];
    let two_d = set.space().dim() == 2;
    let band = (vp.height / 4)..(3 * vp.height / 4).max(vp.height / 4 + 1);
    let mut drawn = 0usize;
    for c in chart_points(set) {
        if two_d {
            if let Some((col, row)) = vp.to_pixel(c[0], c[1]) {
                data[row as usize * w + col as usize] = 255;
                drawn += 1;
            }
        } else {
            let ux = (c[0] - vp.min[0]) / (vp.max[0] - vp.min[0]);
            if !(0.0..=1.0).contains(&ux) {
                continue;
            }
            let col = ((ux * vp.width as f64) as u32).min(vp.width - 1);
            for row in band.clone() {
                data[row as usize * w + col as usize] = 255;
            }
            drawn += 1;
        }
    }
    let mut out = Vec::with_capacity(w * h + 32);
    out.extend_from_slice(format!("P5\n{} {}\n255\n", vp.width, vp.height).as_bytes());
    out.extend_from_slice(&data);
    Ok((out, drawn))
}

/// Render the set as SVG 1.1 using only `rect`, `circle` and `line`
/// elements, points in sorted order for byte determinism.
pub fn render_svg(set: &SetApprox, vp: &Viewport) -> Result<(String, usize)> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        vp.width, vp.height, vp.width, vp.height
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"black\"/>",
        vp.width, vp.height
    );
    let two_d = set.space().dim() == 2;
    let mut drawn = 0usize;
    if !two_d {
        let y = vp.height / 2;
        let _ = writeln!(
            s,
            "<line x1=\"0\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"gray\" stroke-width=\"1\"/>",
            vp.width
        );
    }
    for c in chart_points(set) {
        if two_d {
            if let Some((col, row)) = vp.to_pixel(c[0], c[1]) {
                let _ = writeln!(
                    s,
                    "<rect x=\"{col}\" y=\"{row}\" width=\"1\" height=\"1\" fill=\"white\"/>"
                );
                drawn += 1;
            }
        } else {
            let ux = (c[0] - vp.min[0]) / (vp.max[0] - vp.min[0]);
            if !(0.0..=1.0).contains(&ux) {
                continue;
            }
            let col = ((ux * vp.width as f64) as u32).min(vp.width - 1);
            let y0 = vp.height / 4;
            let y1 = 3 * vp.height / 4;
            let _ = writeln!(
                s,
                "<line x1=\"{col}\" y1=\"{y0}\" x2=\"{col}\" y2=\"{y1}\" stroke=\"white\" stroke-width=\"1\"/>"
            );
            drawn += 1;
        }
    }
    s.push_str("</svg>\n");
    Ok((s, drawn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Point, Space};

    fn tick_set() -> SetApprox {
        SetApprox::new(
            Space::real_line(),
            vec![Point::Line(0.0), Point::Line(0.5), Point::Line(1.0)],
            1e-6,
        )
        .unwrap()
    }

    #[test]
    fn pgm_header_and_determinism() {
        let vp = Viewport::new([0.0, 0.0], [1.0, 1.0], 64, 16);
        let set = tick_set();
        let (a, drawn) = render_pgm(&set, &vp).unwrap();
        let (b, _) = render_pgm(&set, &vp).unwrap();
        assert_eq!(a, b);
        assert_eq!(drawn, 3);
        assert!(a.starts_with(b"P5\n64 16\n255\n"));
        assert_eq!(a.len(), 13 + 64 * 16);
    }

    #[test]
    fn empty_viewport_overlap_is_blank() {
        let vp = Viewport::new([10.0, 0.0], [11.0, 1.0], 32, 8);
        let (bytes, drawn) = render_pgm(&tick_set(), &vp).unwrap();
        assert_eq!(drawn, 0);
        assert!(bytes[12..].iter().all(|b| *b == 0), "image must be blank");
    }

    #[test]
    fn svg_uses_the_allowed_subset() {
        let vp = Viewport::new([0.0, 0.0], [1.0, 1.0], 32, 32);
        let sp = Space::plane_region([0.0, 0.0], [1.0, 1.0]);
        let set = SetApprox::new(
            sp,
            vec![Point::Plane(0.25, 0.25), Point::Plane(0.75, 0.5)],
            1e-6,
        )
        .unwrap();
        let (svg, drawn) = render_svg(&set, &vp).unwrap();
        assert_eq!(drawn, 2);
        for tag in ["<svg", "<rect", "</svg>"] {
            assert!(svg.contains(tag));
        }
        for forbidden in ["<path", "<polygon", "<text", "<g "] {
            assert!(!svg.contains(forbidden), "found {forbidden}");
        }
    }
}
