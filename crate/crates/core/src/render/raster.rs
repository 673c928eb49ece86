use nalgebra::Vector2;

use super::{Class, LabelImage};
use crate::geometry::ImageBox;

/// Horizontal run of pixels `[c0, c1)` on `row`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub row: usize,
    pub c0: usize,
    pub c1: usize,
}

/// Paints the half-open pixel range `[floor(x), floor(x+w)) x [floor(y), floor(y+h))`,
/// clipped to the image. Returns the number of pixels covered.
pub fn fill_box(img: &mut LabelImage, b: &ImageBox<f64>, class: Class) -> usize {
    let clip = |v: f64, hi: usize| v.floor().clamp(0.0, hi as f64) as usize;
    let (c0, c1) = (clip(b.x, img.width()), clip(b.x + b.w, img.width()));
    let (r0, r1) = (clip(b.y, img.height()), clip(b.y + b.h, img.height()));
    for r in r0..r1 {
        for c in c0..c1 {
            img.paint(c, r, class);
        }
    }
    (r1.saturating_sub(r0)) * (c1.saturating_sub(c0))
}

/// Even-odd scanline spans of `poly`: pixel `(c, r)` is inside when its centre
/// `(c + 0.5, r + 0.5)` is, with edges half-open in y. Clipped to `width x height`.
pub fn polygon_spans(poly: &[Vector2<f64>], width: usize, height: usize) -> Vec<Span> {
    let n = poly.len();
    let mut spans = Vec::new();
    if n < 3 {
        return spans;
    }
    let (ymin, ymax) = poly
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    let r0 = (ymin - 0.5).ceil().max(0.0) as usize;
    let r1 = ((ymax - 0.5).ceil().max(0.0) as usize).min(height);
    let mut xs = Vec::with_capacity(n);
    for row in r0..r1 {
        let y = row as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let (a, b) = (&poly[i], &poly[(i + 1) % n]);
            if (a.y <= y) != (b.y <= y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
        for pair in xs.chunks_exact(2) {
            let c0 = (pair[0] - 0.5).ceil().clamp(0.0, width as f64) as usize;
            let c1 = (pair[1] - 0.5).ceil().clamp(0.0, width as f64) as usize;
            if c1 > c0 {
                spans.push(Span { row, c0, c1 });
            }
        }
    }
    spans
}

fn clip_half_plane(
    poly: &[Vector2<f64>],
    keep: impl Fn(&Vector2<f64>) -> f64,
) -> Vec<Vector2<f64>> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (da, db) = (keep(&a), keep(&b));
        if da >= 0.0 {
            out.push(a);
        }
        if (da >= 0.0) != (db >= 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

/// Area-preserving scanline spans for a convex polygon. Each row gets one run
/// centred on the polygon's extent at the middle of its covered band, with
/// length equal to the polygon area inside the row rounded to whole pixels
/// (at least one). Clipped to `width x height`.
pub fn coverage_spans(poly: &[Vector2<f64>], width: usize, height: usize) -> Vec<Span> {
    let mut spans = Vec::new();
    if poly.len() < 3 {
        return spans;
    }
    let (ymin, ymax) = poly
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    let r0 = ymin.floor().max(0.0) as i64;
    let r1 = (ymax.ceil() as i64).min(height as i64);
    for row in r0..r1 {
        let (top, bottom) = (row as f64, row as f64 + 1.0);
        let slab = clip_half_plane(&clip_half_plane(poly, |p| p.y - top), |p| bottom - p.y);
        let area = crate::geometry::shoelace_area(&slab);
        if slab.len() < 3 || area <= 0.0 {
            continue;
        }
        let ym = 0.5 * (ymin.max(top) + ymax.min(bottom));
        let (mut xl, mut xr) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..slab.len() {
            let (a, b) = (slab[i], slab[(i + 1) % slab.len()]);
            if (a.y <= ym) != (b.y <= ym) || a.y == ym {
                let x = if a.y == b.y {
                    a.x
                } else {
                    a.x + (ym - a.y) * (b.x - a.x) / (b.y - a.y)
                };
                xl = xl.min(x);
                xr = xr.max(x);
            }
        }
        if !xl.is_finite() {
            continue;
        }
        let len = area.round().max(1.0);
        let c0 = (0.5 * (xl + xr) - 0.5 * len).round();
        let (c0, c1) = (
            c0.clamp(0.0, width as f64),
            (c0 + len).clamp(0.0, width as f64),
        );
        if c1 > c0 {
            spans.push(Span {
                row: row as usize,
                c0: c0 as usize,
                c1: c1 as usize,
            });
        }
    }
    spans
}

/// Scanline fill; returns the number of pixels covered.
pub fn fill_polygon(img: &mut LabelImage, poly: &[Vector2<f64>], class: Class) -> usize {
    let spans = polygon_spans(poly, img.width(), img.height());
    for s in &spans {
        for c in s.c0..s.c1 {
            img.paint(c, s.row, class);
        }
    }
    spans.iter().map(|s| s.c1 - s.c0).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shoelace_area;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn box_is_half_open() {
        let mut img = LabelImage::default();
        fill_box(
            &mut img,
            &ImageBox::new(10.0, 20.0, 4.0, 6.0),
            Class::ForecastBox,
        );
        for (c, r, k) in img.pixels() {
            let inside = (10..14).contains(&c) && (20..26).contains(&r);
            assert_eq!(k == Class::ForecastBox, inside, "({c},{r})");
        }
    }

    #[test]
    fn box_clips_to_image() {
        let mut img = LabelImage::default();
        assert_eq!(
            fill_box(&mut img, &ImageBox::new(-5.0, -5.0, 8.0, 7.0), Class::Road),
            6
        );
        assert_eq!(
            fill_box(&mut img, &ImageBox::new(300.0, 10.0, 4.0, 4.0), Class::Road),
            0
        );
        assert_eq!(img.count(Class::Road), 6);
    }

    #[test]
    fn axis_aligned_square() {
        let poly = [v(2.0, 3.0), v(7.0, 3.0), v(7.0, 9.0), v(2.0, 9.0)];
        let mut img = LabelImage::default();
        assert_eq!(fill_polygon(&mut img, &poly, Class::Road), 30);
        assert_eq!(img.get(2, 3), Class::Road);
        assert_eq!(img.get(7, 3), Class::Background);
    }

    #[test]
    fn trapezoid_rows_match_slice_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (y0, y1) = (
                rng.gen_range(0.0..40.0f64).floor(),
                rng.gen_range(41.0..84.0f64).floor(),
            );
            let xs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..180.0)).collect();
            let poly = [
                v(xs[0].min(xs[1]), y0),
                v(xs[0].max(xs[1]), y0),
                v(xs[2].max(xs[3]), y1),
                v(xs[2].min(xs[3]), y1),
            ];
            let spans = polygon_spans(&poly, 180, 84);
            let count: usize = spans.iter().map(|s| s.c1 - s.c0).sum();
            let rows = y1 - y0;
            assert!(
                (count as f64 - shoelace_area(&poly)).abs() <= rows,
                "{count} vs {}",
                shoelace_area(&poly)
            );
        }
    }
}
