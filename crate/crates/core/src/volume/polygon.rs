//! Planar polygon geometry for the Klein-chart polygon family.
//!
//! The key quantity is the angular measure `F(r)` of the circle of radius `r`
//! inside the polygon. Between breakpoints each circle-edge crossing sits at
//! angle `phi + tau * acos(p / r)`, so `F` is a constant plus a signed sum of
//! `acos(p / r)` terms and continues analytically to complex `r`.

use std::f64::consts::TAU;

use crate::Complex64;

pub(crate) type P2 = [f64; 2];

pub(crate) fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: P2) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn signed_area(v: &[P2]) -> f64 {
    let m = v.len();
    0.5 * (0..m).map(|i| cross(v[i], v[(i + 1) % m])).sum::<f64>()
}

/// Counter-clockwise copy of the vertex list.
pub(crate) fn ccw(v: &[P2]) -> Vec<P2> {
    let mut out = v.to_vec();
    if signed_area(v) < 0.0 {
        out.reverse();
    }
    out
}

pub(crate) fn edges(v: &[P2]) -> impl Iterator<Item = (P2, P2)> + '_ {
    let m = v.len();
    (0..m).map(move |i| (v[i], v[(i + 1) % m]))
}

/// Even-odd point test. Points on the boundary may go either way.
pub(crate) fn contains(v: &[P2], p: P2) -> bool {
    let mut inside = false;
    for (a, b) in edges(v) {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments_touch(a: P2, b: P2, c: P2, d: P2) -> bool {
    let o = |p: P2, q: P2, r: P2| cross(sub(q, p), sub(r, p));
    let on = |p: P2, q: P2, r: P2| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// No two non-adjacent edges meet.
pub(crate) fn is_simple(v: &[P2]) -> bool {
    let m = v.len();
    for i in 0..m {
        for j in i + 1..m {
            let adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if adjacent {
                continue;
            }
            if segments_touch(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]) {
                return false;
            }
        }
    }
    true
}

/// Distance from the origin to the line through `a`, `b`, and whether the
/// foot of the perpendicular lies strictly inside the segment.
pub(crate) fn foot(a: P2, b: P2) -> (f64, bool) {
    let d = sub(b, a);
    let t = -dot(a, d) / dot(d, d);
    let f = [a[0] + t * d[0], a[1] + t * d[1]];
    (norm(f), t > 0.0 && t < 1.0)
}

/// Radii where the crossing pattern of circles with the boundary changes.
pub(crate) fn breakpoints(v: &[P2]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().map(|&p| norm(p)).collect();
    for (a, b) in edges(v) {
        let (p, inside) = foot(a, b);
        if inside {
            out.push(p);
        }
    }
    out.retain(|&r| r > 0.0);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1.0));
    out
}

#[derive(Debug, Clone, Copy)]
struct Crossing {
    angle: f64,
    exiting: bool,
    p: f64,
    tau: f64,
}

fn crossings(v: &[P2], r: f64) -> Vec<Crossing> {
    let mut out = Vec::new();
    for (a, b) in edges(v) {
        let d = sub(b, a);
        let dd = dot(d, d);
        let ad = dot(a, d);
        let disc = ad * ad - dd * (dot(a, a) - r * r);
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        for t in [(-ad - sq) / dd, (-ad + sq) / dd] {
            if !(0.0..1.0).contains(&t) {
                continue;
            }
            let pt = [a[0] + t * d[0], a[1] + t * d[1]];
            let tangent = [-pt[1], pt[0]];
            let outward = [d[1], -d[0]];
            let fv = [a[0] - (ad / dd) * d[0], a[1] - (ad / dd) * d[1]];
            let p = norm(fv);
            let normal = if p > 1e-300 { [fv[0] / p, fv[1] / p] } else { outward };
            out.push(Crossing {
                angle: pt[1].atan2(pt[0]),
                exiting: dot(tangent, outward) > 0.0,
                p,
                tau: if cross(normal, pt) >= 0.0 { 1.0 } else { -1.0 },
            });
        }
    }
    out
}

/// Angular measure of `{theta : r e^{i theta} in P}` for real `r > 0`.
pub(crate) fn angular_measure(v: &[P2], r: f64) -> f64 {
    let mut cs = crossings(v, r);
    if cs.is_empty() {
        return if contains(v, [r, 0.0]) { TAU } else { 0.0 };
    }
    cs.sort_by(|x, y| x.angle.total_cmp(&y.angle));
    let m = cs.len();
    let mut total = 0.0;
    for i in 0..m {
        if !cs[i].exiting {
            let mut span = cs[(i + 1) % m].angle - cs[i].angle;
            if span <= 0.0 {
                span += TAU;
            }
            total += span;
        }
    }
    total
}

/// Analytic form of the angular measure on the breakpoint piece containing a
/// reference radius.
#[derive(Debug, Clone)]
pub(crate) struct AnalyticMeasure {
    r_ref: f64,
    value_ref: f64,
    terms: Vec<(f64, f64)>,
}

impl AnalyticMeasure {
    pub(crate) fn new(v: &[P2], r_ref: f64) -> Self {
        let terms = crossings(v, r_ref)
            .into_iter()
            .map(|c| (if c.exiting { c.tau } else { -c.tau }, c.p))
            .filter(|&(_, p)| p > 0.0)
            .collect();
        Self {
            r_ref,
            value_ref: angular_measure(v, r_ref),
            terms,
        }
    }

    pub(crate) fn eval(&self, z: Complex64) -> Complex64 {
        let mut f = Complex64::new(self.value_ref, 0.0);
        for &(coef, p) in &self.terms {
            let now = (Complex64::new(p, 0.0) / z).acos();
            let then = (p / self.r_ref).acos();
            f += coef * (now - then);
        }
        f
    }
}

/// Parameter intervals `[t0, t1]` of the ray `t u` (t >= 0) inside the polygon.
pub(crate) fn ray_intervals(v: &[P2], u: P2) -> Vec<(f64, f64)> {
    let scale = v.iter().map(|&p| norm(p)).fold(0.0, f64::max);
    let mut ts = vec![0.0];
    for (a, b) in edges(v) {
        let d = sub(b, a);
        let den = cross(u, d);
        if den.abs() <= 1e-15 * norm(d) {
            continue;
        }
        let t = cross(a, d) / den;
        let s = cross(a, u) / den;
        if t > 1e-14 * scale && (0.0..=1.0).contains(&s) {
            ts.push(t);
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * scale);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in ts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if contains(v, [mid * u[0], mid * u[1]]) {
            match out.last_mut() {
                Some(last) if last.1 == w[0] => last.1 = w[1],
                _ => out.push((w[0], w[1])),
            }
        }
    }
    out
}

/// Clip to the half-plane `n . x <= c` (Sutherland-Hodgman, one plane).
pub(crate) fn clip_half_plane(v: &[P2], n: P2, c: f64) -> Vec<P2> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let side = |p: P2| dot(n, p) - c;
    for (a, b) in edges(v) {
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const TRI: [P2; 3] = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];

    #[test]
    fn right_corner_measure() {
        assert!((angular_measure(&TRI, 0.1) - FRAC_PI_2).abs() < 1e-14);
        assert!((angular_measure(&TRI, 1.0) - FRAC_PI_2).abs() < 1e-14);
        // beyond the hypotenuse distance sqrt 2 the arc shrinks
        let r: f64 = 1.8;
        let expect = FRAC_PI_2 - 2.0 * (2f64.sqrt() / r).acos();
        assert!((angular_measure(&TRI, r) - expect).abs() < 1e-13);
        assert_eq!(angular_measure(&TRI, 2.5), 0.0);
    }

    #[test]
    fn centered_square() {
        let sq = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        assert!((angular_measure(&sq, 0.5) - TAU).abs() < 1e-14);
        let r: f64 = 1.2;
        let expect = TAU - 8.0 * (1.0 / r).acos();
        assert!((angular_measure(&sq, r) - expect).abs() < 1e-13);
        let m = AnalyticMeasure::new(&sq, 1.2);
        for r in [1.05, 1.1, 1.3] {
            let z = m.eval(Complex64::new(r, 0.0));
            assert!((z.re - angular_measure(&sq, r)).abs() < 1e-13 && z.im.abs() < 1e-13);
        }
    }

    #[test]
    fn analytic_measure_matches_on_piece() {
        let tri = [[-0.3, -0.2], [1.5, 0.1], [0.2, 1.4]];
        let m = AnalyticMeasure::new(&tri, 1.0);
        let bps = breakpoints(&tri);
        let lo = bps.iter().copied().filter(|&b| b < 1.0).fold(0.0, f64::max);
        let hi = bps.iter().copied().find(|&b| b > 1.0).unwrap();
        for k in 1..10 {
            let r = lo + (hi - lo) * k as f64 / 10.0;
            let z = m.eval(Complex64::new(r, 0.0));
            assert!((z.re - angular_measure(&tri, r)).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn ray_intervals_of_triangle() {
        let u = [0.6f64.cos(), 0.6f64.sin()];
        let iv = ray_intervals(&TRI, u);
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].0, 0.0);
        let t = iv[0].1;
        assert!((t * u[0] + t * u[1] - 2.0).abs() < 1e-13);
        assert!(ray_intervals(&TRI, [-1.0, 0.0]).is_empty());
        // origin outside: a single interior interval
        let off = [[1.0, -0.5], [2.0, -0.5], [2.0, 0.5], [1.0, 0.5]];
        assert_eq!(ray_intervals(&off, [1.0, 0.0]), vec![(1.0, 2.0)]);
    }

    #[test]
    fn clipping_preserves_area() {
        let a = signed_area(&TRI);
        let left = clip_half_plane(&TRI, [1.0, -1.0], 0.0);
        let right = clip_half_plane(&TRI, [-1.0, 1.0], 0.0);
        assert!((signed_area(&left) + signed_area(&right) - a).abs() < 1e-14);
        assert!((signed_area(&left) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&TRI));
        assert!(!is_simple(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]));
    }
}
