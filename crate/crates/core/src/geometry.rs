//! Convex hulls, polygon rasterization and the Dice coefficient.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::SliceMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

impl<T: Scalar> From<(T, T)> for Point2<T> {
    fn from((x, y): (T, T)) -> Self {
        Self { x, y }
    }
}

/// Twice the signed area of triangle `(o, a, b)`; positive for a
/// counter-clockwise turn.
#[inline]
pub fn cross<T: Scalar>(o: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon<T> {
    pub vertices: Vec<Point2<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Point2<T>>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace signed area, positive for counter-clockwise order.
    pub fn signed_area(&self) -> T {
        let twice: T = self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum();
        twice * T::of(0.5)
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> T {
        self.edges()
            .map(|(a, b)| (b.x - a.x).hypot(b.y - a.y))
            .sum()
    }

    /// Area centroid; falls back to the vertex mean for zero-area input.
    pub fn centroid(&self) -> Option<Point2<T>> {
        if self.vertices.is_empty() {
            return None;
        }
        let area = self.signed_area();
        if area.abs() <= T::epsilon() {
            let n = T::of_usize(self.vertices.len());
            let sx: T = self.vertices.iter().map(|p| p.x).sum();
            let sy: T = self.vertices.iter().map(|p| p.y).sum();
            return Some(Point2::new(sx / n, sy / n));
        }
        let (mut cx, mut cy) = (T::zero(), T::zero());
        for (a, b) in self.edges() {
            let f = a.x * b.y - b.x * a.y;
            cx = cx + (a.x + b.x) * f;
            cy = cy + (a.y + b.y) * f;
        }
        let k = T::of(6.0) * area;
        Some(Point2::new(cx / k, cy / k))
    }

    /// Whether `p` lies inside or on the boundary of this polygon, assuming
    /// it is convex and counter-clockwise.
    pub fn convex_contains(&self, p: Point2<T>) -> bool {
        self.edges().all(|(a, b)| cross(a, b, p) >= T::zero())
    }
}

fn lexicographic<T: Scalar>(a: &Point2<T>, b: &Point2<T>) -> Ordering {
    a.x.partial_cmp(&b.x)
        .unwrap_or(Ordering::Equal)
        .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
}

/// Andrew's monotone chain. Returns the hull counter-clockwise, starting at
/// the lexicographically smallest point, with collinear boundary points
/// removed.
pub fn convex_hull<T: Scalar>(points: &[Point2<T>]) -> Result<Polygon<T>> {
    if points.len() < 3 {
        return Err(Error::DegenerateHull(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::DegenerateHull("non-finite coordinate".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(lexicographic);
    pts.dedup();

    let mut hull: Vec<Point2<T>> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero()
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(Error::DegenerateHull("all points are collinear".into()));
    }
    Ok(Polygon::new(hull))
}

/// Marks every pixel whose center lies inside or on the boundary of `poly`.
///
/// Works row by row: even-odd crossings of the row's center line give the
/// interior spans and every edge touching the line adds its own span, so
/// boundary pixels are always included. Convex and simple concave polygons
/// are both handled.
pub fn rasterize<T: Scalar>(poly: &Polygon<T>, width: usize, height: usize) -> SliceMask {
    let mut mask = SliceMask::empty(width, height);
    if poly.len() < 3 || width == 0 || height == 0 {
        return mask;
    }
    let half = T::of(0.5);
    let (min_y, max_y) = poly
        .vertices
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    let first_row = (min_y - half).ceil().max(T::zero());
    let last_row = (max_y - half).floor().min(T::of_usize(height - 1));
    if first_row > last_row {
        return mask;
    }
    let first_row = first_row.to_usize().unwrap_or(0);
    let last_row = last_row.to_usize().unwrap_or(0);

    let mut crossings: Vec<T> = Vec::new();
    let mut spans: Vec<(T, T)> = Vec::new();
    for row in first_row..=last_row {
        let yc = T::of_usize(row) + half;
        crossings.clear();
        spans.clear();
        for (a, b) in poly.edges() {
            if a.y == b.y {
                if a.y == yc {
                    spans.push((a.x.min(b.x), a.x.max(b.x)));
                }
                continue;
            }
            let (lo, hi) = if a.y < b.y { (a.y, b.y) } else { (b.y, a.y) };
            if yc < lo || yc > hi {
                continue;
            }
            let x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
            spans.push((x, x));
            if yc < hi {
                crossings.push(x);
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        for pair in crossings.chunks_exact(2) {
            spans.push((pair[0], pair[1]));
        }
        for &(xa, xb) in &spans {
            fill_span(&mut mask, row, xa, xb);
        }
    }
    mask
}

fn fill_span<T: Scalar>(mask: &mut SliceMask, row: usize, xa: T, xb: T) {
    let half = T::of(0.5);
    let lo = (xa - half).ceil().max(T::zero());
    let hi = (xb - half).floor().min(T::of_usize(mask.width() - 1));
    if lo > hi {
        return;
    }
    let (lo, hi) = (lo.to_usize().unwrap_or(0), hi.to_usize().unwrap_or(0));
    for x in lo..=hi {
        mask.set(x, row, true);
    }
}

/// Dice coefficient `2|a ∩ b| / (|a| + |b|)`. Two empty masks agree
/// perfectly (1.0); one empty mask against a nonempty one scores 0.0.
pub fn dsc(a: &SliceMask, b: &SliceMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Validation(format!(
            "mask sizes differ: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let (mut na, mut nb, mut both) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        na += x as usize;
        nb += y as usize;
        both += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}
