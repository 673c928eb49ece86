use nalgebra::Vector2;

use super::raster::polygon_spans;
use super::Class;
use crate::sim::ScenarioConfig;

/// Road and boundary classes rasterised on a world-space grid.
#[derive(Clone, Debug)]
pub struct GroundGrid {
    origin: Vector2<f64>,
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<u8>,
}

impl GroundGrid {
    pub const DEFAULT_CELL: f64 = 0.05;

    pub fn build(cfg: &ScenarioConfig, cell: f64) -> Self {
        let pts = cfg.road.iter().chain(&cfg.boundary).flatten();
        let (mut lo, mut hi) = (
            Vector2::repeat(f64::INFINITY),
            Vector2::repeat(f64::NEG_INFINITY),
        );
        for p in pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if !lo.x.is_finite() {
            lo = Vector2::zeros();
            hi = Vector2::zeros();
        }
        let cols = ((hi.x - lo.x) / cell).ceil() as usize + 1;
        let rows = ((hi.y - lo.y) / cell).ceil() as usize + 1;
        let mut grid = Self {
            origin: lo,
            cell,
            cols,
            rows,
            cells: vec![Class::Background as u8; cols * rows],
        };
        for (polys, class) in [(&cfg.road, Class::Road), (&cfg.boundary, Class::Boundary)] {
            for poly in polys {
                let local: Vec<_> = poly.iter().map(|p| (p - lo) / cell).collect();
                for s in polygon_spans(&local, cols, rows) {
                    let row = &mut grid.cells[s.row * cols..(s.row + 1) * cols];
                    for c in &mut row[s.c0..s.c1] {
                        if class.rank() >= Class::from_u8(*c).expect("valid").rank() {
                            *c = class as u8;
                        }
                    }
                }
            }
        }
        grid
    }

    pub fn class_at(&self, p: &Vector2<f64>) -> Class {
        let q = (p - self.origin) / self.cell;
        if q.x < 0.0 || q.y < 0.0 {
            return Class::Background;
        }
        let (c, r) = (q.x as usize, q.y as usize);
        if c >= self.cols || r >= self.rows {
            return Class::Background;
        }
        Class::from_u8(self.cells[r * self.cols + c]).expect("valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::presets;

    #[test]
    fn grid_agrees_with_polygon_tests_away_from_edges() {
        let cfg = presets::s_turn(0);
        let grid = GroundGrid::build(&cfg, GroundGrid::DEFAULT_CELL);
        for i in 0..60 {
            for j in 0..40 {
                let p = Vector2::new(i as f64 * 1.5 + 0.37, j as f64 * 0.75 - 15.0 + 0.11);
                let near_edge = cfg.road.iter().chain(&cfg.boundary).any(|poly| {
                    (0..poly.len()).any(|k| {
                        crate::geometry::point_on_segment(
                            &p,
                            &poly[k],
                            &poly[(k + 1) % poly.len()],
                            0.1,
                        )
                    })
                });
                if near_edge {
                    continue;
                }
                let expect = if cfg
                    .boundary
                    .iter()
                    .any(|b| crate::geometry::point_in_polygon(&p, b))
                {
                    Class::Boundary
                } else if cfg
                    .road
                    .iter()
                    .any(|r| crate::geometry::point_in_polygon(&p, r))
                {
                    Class::Road
                } else {
                    Class::Background
                };
                assert_eq!(grid.class_at(&p), expect, "{p:?}");
            }
        }
    }
}
