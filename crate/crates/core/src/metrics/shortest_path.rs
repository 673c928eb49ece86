use nalgebra::Vector2;

use crate::geometry::{point_in_polygon, point_on_segment, segment_intersection};
use crate::Real;

/// Drivable region: union of `road` polygons minus the interiors of `holes`.
#[derive(Clone, Debug)]
pub struct Region<'a, T: Real> {
    pub road: &'a [Vec<Vector2<T>>],
    pub holes: &'a [Vec<Vector2<T>>],
}

fn edges<T: Real>(poly: &[Vector2<T>]) -> impl Iterator<Item = (Vector2<T>, Vector2<T>)> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

impl<T: Real> Region<'_, T> {
    fn eps() -> T {
        T::lit(1e-7)
    }

    fn all_edges(&self) -> Vec<(Vector2<T>, Vector2<T>)> {
        self.road
            .iter()
            .chain(self.holes)
            .flat_map(|p| edges(p))
            .collect()
    }

    /// Inside some road polygon (edges included) and not strictly inside a hole.
    pub fn contains(&self, p: &Vector2<T>) -> bool {
        self.road.iter().any(|r| point_in_polygon(p, r))
            && !self.holes.iter().any(|h| {
                point_in_polygon(p, h)
                    && !edges(h).any(|(a, b)| point_on_segment(p, &a, &b, Self::eps()))
            })
    }

    fn visible(
        &self,
        a: &Vector2<T>,
        b: &Vector2<T>,
        all_edges: &[(Vector2<T>, Vector2<T>)],
    ) -> bool {
        let d = b - a;
        let len2 = d.norm_squared();
        if len2 <= T::lit(1e-18) {
            return true;
        }
        let mut cuts = vec![T::zero(), T::one()];
        for (c, e) in all_edges {
            if let Some((t, _)) = segment_intersection(a, b, c, e) {
                cuts.push(t);
            }
            for v in [c, e] {
                if point_on_segment(v, a, b, Self::eps()) {
                    cuts.push((v - a).dot(&d) / len2);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        cuts.windows(2)
            .filter(|w| w[1] - w[0] > T::lit(1e-12))
            .all(|w| self.contains(&(a + d * ((w[0] + w[1]) * T::lit(0.5)))))
    }
}

/// Euclidean shortest path from `start` to `goal` inside `region`.
///
/// Dijkstra over the visibility graph whose nodes are the endpoints, every
/// polygon vertex and every crossing between polygon edges. `None` if either
/// endpoint lies outside the region or no path exists.
pub fn shortest_path<T: Real>(
    region: &Region<'_, T>,
    start: Vector2<T>,
    goal: Vector2<T>,
) -> Option<T> {
    if !region.contains(&start) || !region.contains(&goal) {
        return None;
    }
    let all_edges = region.all_edges();
    let mut nodes = vec![start, goal];
    let add = |p: Vector2<T>, nodes: &mut Vec<Vector2<T>>| {
        if region.contains(&p) && !nodes.iter().any(|q| (q - p).norm() < T::lit(1e-6)) {
            nodes.push(p);
        }
    };
    for (a, _) in &all_edges {
        add(*a, &mut nodes);
    }
    for i in 0..all_edges.len() {
        for j in i + 1..all_edges.len() {
            let (a, b) = all_edges[i];
            let (c, d) = all_edges[j];
            if let Some((t, _)) = segment_intersection(&a, &b, &c, &d) {
                add(a + (b - a) * t, &mut nodes);
            }
        }
    }

    let n = nodes.len();
    let inf = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
    let mut dist = vec![inf; n];
    let mut done = vec![false; n];
    dist[0] = T::zero();
    loop {
        let u = (0..n)
            .filter(|&i| !done[i] && dist[i] < inf)
            .min_by(|&i, &j| dist[i].partial_cmp(&dist[j]).expect("finite"))?;
        if u == 1 {
            return Some(dist[1]);
        }
        done[u] = true;
        for v in 0..n {
            if done[v] {
                continue;
            }
            let cand = dist[u] + (nodes[v] - nodes[u]).norm();
            if cand < dist[v] && region.visible(&nodes[u], &nodes[v], &all_edges) {
                dist[v] = cand;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Vector2<f64>> {
        vec![v(x0, y0), v(x1, y0), v(x1, y1), v(x0, y1)]
    }

    #[test]
    fn open_rectangle_is_straight_line() {
        let road = [rect(0.0, 0.0, 10.0, 10.0)];
        let r = Region {
            road: &road,
            holes: &[],
        };
        let d = shortest_path(&r, v(1.0, 1.0), v(9.0, 7.0)).unwrap();
        assert!((d - 10.0).abs() < 1e-12);
    }

    #[test]
    fn detours_around_square_hole() {
        let road = [rect(0.0, 0.0, 10.0, 10.0)];
        let holes = [rect(4.0, 2.0, 6.0, 8.0)];
        let r = Region {
            road: &road,
            holes: &holes,
        };
        let d = shortest_path(&r, v(1.0, 5.0), v(9.0, 5.0)).unwrap();
        let leg = (3.0f64 * 3.0 + 3.0 * 3.0).sqrt();
        assert!((d - (2.0 * leg + 2.0)).abs() < 1e-9, "{d}");
    }

    #[test]
    fn l_shaped_union() {
        let road = [rect(0.0, 0.0, 10.0, 2.0), rect(8.0, 0.0, 10.0, 10.0)];
        let r = Region {
            road: &road,
            holes: &[],
        };
        let d = shortest_path(&r, v(1.0, 1.0), v(9.0, 9.0)).unwrap();
        let oracle = (v(8.0, 2.0) - v(1.0, 1.0)).norm() + (v(9.0, 9.0) - v(8.0, 2.0)).norm();
        assert!((d - oracle).abs() < 1e-9, "{d} vs {oracle}");
    }

    #[test]
    fn unreachable_or_outside() {
        let road = [rect(0.0, 0.0, 2.0, 2.0), rect(5.0, 0.0, 7.0, 2.0)];
        let r = Region {
            road: &road,
            holes: &[],
        };
        assert!(shortest_path(&r, v(1.0, 1.0), v(6.0, 1.0)).is_none());
        assert!(shortest_path(&r, v(3.0, 1.0), v(6.0, 1.0)).is_none());
    }

    #[test]
    fn never_shorter_than_straight_line() {
        let road = [rect(0.0, 0.0, 20.0, 20.0)];
        let holes = [rect(5.0, 5.0, 7.0, 15.0), rect(12.0, 0.0, 14.0, 12.0)];
        let r = Region {
            road: &road,
            holes: &holes,
        };
        let (s, g) = (v(1.0, 10.0), v(19.0, 3.0));
        let d = shortest_path(&r, s, g).unwrap();
        assert!(d >= (g - s).norm());
    }
}
