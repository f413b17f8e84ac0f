//! Arc-length parameterized 3D polyline shared by the cost, formation and
//! trajectory modules.

use crate::scenario::{Point2, Point3};

/// A polyline with cached cumulative arc lengths and smoothed node headings.
///
/// The heading at a node is the circular mean of its two incident segment
/// headings and is linearly interpolated along each segment, so heading is
/// continuous in arc length even at waypoint corners.
#[derive(Debug, Clone)]
pub struct Polyline3 {
    points: Vec<Point3>,
    cumulative: Vec<f64>,
    node_headings: Vec<f64>,
}

impl Polyline3 {
    /// Builds a polyline from at least two points.
    pub fn new(points: Vec<Point3>) -> Polyline3 {
        assert!(points.len() >= 2, "polyline needs at least 2 points");
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for seg in points.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + seg[0].distance(seg[1]));
        }
        let node_headings = compute_node_headings(&points);
        Polyline3 { points, cumulative, node_headings }
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Segment index and within-segment fraction for arc position `s`.
    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, self.total_length());
        // first segment whose end arc is >= s
        let idx = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => (i - 1).min(self.points.len() - 2),
        };
        let seg_len = self.cumulative[idx + 1] - self.cumulative[idx];
        let frac = if seg_len > 0.0 { (s - self.cumulative[idx]) / seg_len } else { 0.0 };
        (idx, frac.clamp(0.0, 1.0))
    }

    /// Point at arc length `s`, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Point3 {
        let (idx, frac) = self.locate(s);
        let a = self.points[idx];
        let b = self.points[idx + 1];
        a + (b - a) * frac
    }

    /// Horizontal heading (radians) at arc length `s`.
    pub fn heading_at(&self, s: f64) -> f64 {
        let (idx, frac) = self.locate(s);
        let h0 = self.node_headings[idx];
        let h1 = self.node_headings[idx + 1];
        h0 + wrap_angle(h1 - h0) * frac
    }

    /// Arc length of the point closest (horizontally) to `p`.
    pub fn closest_arc_to_xy(&self, p: Point2) -> f64 {
        let mut best_dist = f64::INFINITY;
        let mut best_s = 0.0;
        for i in 0..self.points.len() - 1 {
            let a = self.points[i].xy();
            let b = self.points[i + 1].xy();
            let ab = b - a;
            let len_sq = ab.dot(ab);
            let t = if len_sq > 0.0 { ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
            let d = p.distance(a + ab * t);
            if d < best_dist {
                best_dist = d;
                best_s = self.cumulative[i] + t * (self.cumulative[i + 1] - self.cumulative[i]);
            }
        }
        best_s
    }

    /// Resamples into `segments` straight pieces of equal arc length.
    pub fn resample(&self, segments: usize) -> Vec<Point3> {
        assert!(segments >= 1);
        let total = self.total_length();
        (0..=segments)
            .map(|i| self.point_at(total * (i as f64) / (segments as f64)))
            .collect()
    }
}

fn compute_node_headings(points: &[Point3]) -> Vec<f64> {
    let n_seg = points.len() - 1;
    let mut seg_headings: Vec<Option<f64>> = Vec::with_capacity(n_seg);
    for seg in points.windows(2) {
        let d = seg[1] - seg[0];
        let horiz = (d.x * d.x + d.y * d.y).sqrt();
        seg_headings.push(if horiz > 1e-12 { Some(d.y.atan2(d.x)) } else { None });
    }
    // fill purely-vertical segments from the nearest directed neighbor
    let mut filled: Vec<f64> = Vec::with_capacity(n_seg);
    let mut last = seg_headings.iter().flatten().copied().next().unwrap_or(0.0);
    for h in &seg_headings {
        if let Some(h) = h {
            last = *h;
        }
        filled.push(last);
    }

    let mut node_headings = Vec::with_capacity(points.len());
    node_headings.push(filled[0]);
    for i in 1..n_seg {
        let a = filled[i - 1];
        let b = filled[i];
        node_headings.push(a + wrap_angle(b - a) * 0.5);
    }
    node_headings.push(filled[n_seg - 1]);
    node_headings
}

/// Wraps an angle difference into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = a % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}
