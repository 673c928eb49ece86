use nalgebra::Vector2;

use super::raster::{coverage_spans, fill_box};
use super::{Class, LabelImage};
use crate::geometry::{shoelace_area, ImageBox};

/// Paints every forecast box with [`Class::ForecastBox`], beneath pedestrians.
pub fn overlay_box_forecast(img: &mut LabelImage, boxes: &[ImageBox<f64>]) {
    for b in boxes {
        fill_box(img, b, Class::ForecastBox);
    }
}

/// Augmented-path vertices: bottom-left and bottom-right of the current box,
/// then bottom-right and bottom-left of the final forecast box.
pub fn ap_quad(bt: &ImageBox<f64>, btk: &ImageBox<f64>) -> [Vector2<f64>; 4] {
    [
        bt.bottom_left(),
        bt.bottom_right(),
        btk.bottom_right(),
        btk.bottom_left(),
    ]
}

/// Fills the augmented path between `bt` and `btk` with [`Class::ForecastPath`].
/// Rows are filled area-preservingly; a zero-area quad is drawn as the
/// segment it collapses to.
pub fn overlay_ap(img: &mut LabelImage, bt: &ImageBox<f64>, btk: &ImageBox<f64>) {
    let quad = ap_quad(bt, btk);
    if shoelace_area(&quad) > 1e-9 {
        for s in coverage_spans(&quad, img.width(), img.height()) {
            for c in s.c0..s.c1 {
                img.paint(c, s.row, Class::ForecastPath);
            }
        }
        return;
    }
    let (w, h) = (img.width() as f64, img.height() as f64);
    let (lo, hi) = quad.iter().fold(
        (
            Vector2::repeat(f64::INFINITY),
            Vector2::repeat(f64::NEG_INFINITY),
        ),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    if hi.y - lo.y <= 1e-9 {
        let row = lo.y.floor();
        if row < 0.0 || row >= h {
            return;
        }
        let c0 = lo.x.floor();
        let c1 = hi.x.floor().max(c0 + 1.0);
        for c in c0.max(0.0) as i64..c1.min(w) as i64 {
            img.paint(c as usize, row as usize, Class::ForecastPath);
        }
        return;
    }
    let (a, b) = if (quad[0] - quad[2]).norm() >= (quad[1] - quad[3]).norm() {
        (quad[0], quad[2])
    } else {
        (quad[1], quad[3])
    };
    let n = ((b - a).norm() * 4.0).ceil().max(1.0) as usize;
    for i in 0..=n {
        let p = a + (b - a) * (i as f64 / n as f64);
        if p.x >= 0.0 && p.y >= 0.0 && p.x < w && p.y < h {
            img.paint(p.x as usize, p.y as usize, Class::ForecastPath);
        }
    }
}
