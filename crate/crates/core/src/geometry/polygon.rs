use nalgebra::Vector2;

use crate::Real;

/// Simple polygon as an ordered vertex ring (closing edge implied).
pub type Polygon<T> = Vec<Vector2<T>>;

fn cross<T: Real>(a: &Vector2<T>, b: &Vector2<T>) -> T {
    a.x * b.y - a.y * b.x
}

pub fn point_on_segment<T: Real>(p: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>, eps: T) -> bool {
    let ab = b - a;
    let ap = p - a;
    let len2 = ab.norm_squared();
    if len2 <= eps * eps {
        return ap.norm() <= eps;
    }
    let t = (ap.dot(&ab) / len2).max(T::zero()).min(T::one());
    (ap - ab * t).norm() <= eps
}

/// Even-odd containment test; points on the boundary count as inside.
pub fn point_in_polygon<T: Real>(p: &Vector2<T>, poly: &[Vector2<T>]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let eps = T::lit(1e-9);
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[j]);
        if point_on_segment(p, a, b, eps) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Intersection parameters `(t, u)` of segments `a + t(b-a)` and `c + u(d-c)`,
/// both in `[0, 1]`. Parallel segments yield `None`.
pub fn segment_intersection<T: Real>(
    a: &Vector2<T>,
    b: &Vector2<T>,
    c: &Vector2<T>,
    d: &Vector2<T>,
) -> Option<(T, T)> {
    let r = b - a;
    let s = d - c;
    let denom = cross(&r, &s);
    if denom.abs() <= T::lit(1e-12) * (r.norm() * s.norm()).max(T::lit(1e-300)) {
        return None;
    }
    let ac = c - a;
    let t = cross(&ac, &s) / denom;
    let u = cross(&ac, &r) / denom;
    let unit = T::zero()..=T::one();
    (unit.contains(&t) && unit.contains(&u)).then_some((t, u))
}

/// True when the open segments cross at a single interior point.
pub fn segments_cross<T: Real>(
    a: &Vector2<T>,
    b: &Vector2<T>,
    c: &Vector2<T>,
    d: &Vector2<T>,
) -> bool {
    let eps = T::lit(1e-9);
    match segment_intersection(a, b, c, d) {
        Some((t, u)) => t > eps && t < T::one() - eps && u > eps && u < T::one() - eps,
        None => false,
    }
}

/// Unsigned polygon area.
pub fn shoelace_area<T: Real>(poly: &[Vector2<T>]) -> T {
    let n = poly.len();
    if n < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..n {
        acc += cross(&poly[i], &poly[(i + 1) % n]);
    }
    (acc * T::lit(0.5)).abs()
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull<T: Real>(points: &[Vector2<T>]) -> Vec<Vector2<T>> {
    let mut pts: Vec<Vector2<T>> = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>| cross(&(a - o), &(b - o));
    let mut hull: Vec<Vector2<T>> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter() {
        while hull.len() >= 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= T::zero()
        {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower
            && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= T::zero()
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn containment_with_boundary() {
        let sq = vec![v(0.0, 0.0), v(2.0, 0.0), v(2.0, 2.0), v(0.0, 2.0)];
        assert!(point_in_polygon(&v(1.0, 1.0), &sq));
        assert!(point_in_polygon(&v(2.0, 1.0), &sq));
        assert!(point_in_polygon(&v(0.0, 0.0), &sq));
        assert!(!point_in_polygon(&v(2.1, 1.0), &sq));
        let l_shape = vec![
            v(0.0, 0.0),
            v(4.0, 0.0),
            v(4.0, 1.0),
            v(1.0, 1.0),
            v(1.0, 4.0),
            v(0.0, 4.0),
        ];
        assert!(!point_in_polygon(&v(2.0, 2.0), &l_shape));
        assert!(point_in_polygon(&v(0.5, 3.0), &l_shape));
    }

    #[test]
    fn crossing_segments() {
        assert!(segments_cross(
            &v(0.0, 0.0),
            &v(2.0, 2.0),
            &v(0.0, 2.0),
            &v(2.0, 0.0)
        ));
        assert!(!segments_cross(
            &v(0.0, 0.0),
            &v(1.0, 1.0),
            &v(1.0, 1.0),
            &v(2.0, 0.0)
        ));
        assert!(!segments_cross(
            &v(0.0, 0.0),
            &v(1.0, 0.0),
            &v(0.0, 1.0),
            &v(1.0, 1.0)
        ));
    }

    #[test]
    fn hull_and_area() {
        let pts = vec![
            v(0.0, 0.0),
            v(1.0, 0.5),
            v(2.0, 0.0),
            v(2.0, 2.0),
            v(1.0, 1.0),
            v(0.0, 2.0),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!((shoelace_area(&hull) - 4.0).abs() < 1e-12);
    }
}
