//! Centreline paths for wire guides: straight runs, circular arcs and
//! tilted lines (tapers), with nearest-point projection.

use crate::error::{MagnonError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Self) -> T {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment<T> {
    Line {
        from: Point<T>,
        to: Point<T>,
    },
    /// Arc around `center` starting at polar angle `start_angle`; `sweep` is
    /// signed (positive = counter-clockwise).
    Arc {
        center: Point<T>,
        radius: T,
        start_angle: T,
        sweep: T,
    },
}

impl<T: Real> Segment<T> {
    pub fn start(&self) -> Point<T> {
        match *self {
            Segment::Line { from, .. } => from,
            Segment::Arc {
                center,
                radius,
                start_angle,
                ..
            } => polar(center, radius, start_angle),
        }
    }

    pub fn end(&self) -> Point<T> {
        match *self {
            Segment::Line { to, .. } => to,
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => polar(center, radius, start_angle + sweep),
        }
    }

    pub fn length(&self) -> T {
        match *self {
            Segment::Line { from, to } => from.dist(to),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Unit tangent at fractional position `u ∈ [0, 1]`.
    fn tangent(&self, u: T) -> (T, T) {
        match *self {
            Segment::Line { from, to } => {
                let l = from.dist(to);
                ((to.x - from.x) / l, (to.y - from.y) / l)
            }
            Segment::Arc {
                start_angle, sweep, ..
            } => {
                let a = start_angle + sweep * u;
                let s = sweep.signum();
                (-a.sin() * s, a.cos() * s)
            }
        }
    }

    pub fn start_heading(&self) -> T {
        let (tx, ty) = self.tangent(T::zero());
        ty.atan2(tx)
    }

    pub fn end_heading(&self) -> T {
        let (tx, ty) = self.tangent(T::one());
        ty.atan2(tx)
    }

    /// Nearest point on the segment, as `(distance, signed offset, arc length from segment start)`.
    fn project(&self, p: Point<T>) -> Projection<T> {
        match *self {
            Segment::Line { from, to } => project_line(from, to, p, false, false),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let phi = (p.y - center.y).atan2(p.x - center.x);
                let dir = sweep.signum();
                let two_pi = T::PI() + T::PI();
                // angle travelled from the start, mapped into [-π, π) around the arc midpoint
                let mid = sweep.abs() / (T::one() + T::one());
                let mut u = (phi - start_angle) * dir - mid;
                u = u - two_pi * ((u + T::PI()) / two_pi).floor();
                u = u + mid;
                let r = p.dist(center);
                if u >= T::zero() && u <= sweep.abs() {
                    // left of travel: toward the centre for a CCW arc
                    let offset = if dir > T::zero() { radius - r } else { r - radius };
                    Projection {
                        distance: (r - radius).abs(),
                        offset,
                        along: radius * u,
                    }
                } else {
                    let (end, along, frac) = if u < T::zero() {
                        (self.start(), T::zero(), T::zero())
                    } else {
                        (self.end(), self.length(), T::one())
                    };
                    let (tx, ty) = self.tangent(frac);
                    Projection {
                        distance: p.dist(end),
                        offset: tx * (p.y - end.y) - ty * (p.x - end.x),
                        along,
                    }
                }
            }
        }
    }
}

fn polar<T: Real>(c: Point<T>, r: T, a: T) -> Point<T> {
    Point::new(c.x + r * a.cos(), c.y + r * a.sin())
}

fn project_line<T: Real>(a: Point<T>, b: Point<T>, p: Point<T>, open_start: bool, open_end: bool) -> Projection<T> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len = dx.hypot(dy);
    let (tx, ty) = (dx / len, dy / len);
    let mut s = (p.x - a.x) * tx + (p.y - a.y) * ty;
    if !open_start {
        s = s.max(T::zero());
    }
    if !open_end {
        s = s.min(len);
    }
    let q = Point::new(a.x + tx * s, a.y + ty * s);
    Projection {
        distance: p.dist(q),
        offset: tx * (p.y - a.y) - ty * (p.x - a.x),
        along: s,
    }
}

/// Result of projecting a point onto a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    /// Euclidean distance to the nearest path point.
    pub distance: T,
    /// Signed perpendicular offset, positive to the left of travel.
    pub offset: T,
    /// Arc length of the nearest point measured from the path start;
    /// negative before the start, beyond `length()` after the end.
    pub along: T,
}

/// Continuous guide centreline. Beyond its ends the path continues as
/// straight rays along the terminal tangents, i.e. the wires run off the sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidePath<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Real> GuidePath<T> {
    /// Builds a path from explicit segments, checking continuity.
    pub fn from_segments(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(MagnonError::config("guide.path", "path has no segments"));
        }
        let tol = T::lit(1e-6);
        for (k, s) in segments.iter().enumerate() {
            match *s {
                Segment::Line { from, to } => {
                    if from.dist(to) <= tol {
                        return Err(MagnonError::config("guide.path", format!("segment {k} has zero length")));
                    }
                }
                Segment::Arc { radius, sweep, .. } => {
                    if !(radius > T::zero() && radius.is_finite()) {
                        return Err(MagnonError::config("guide.path", format!("arc {k} radius must be > 0")));
                    }
                    if sweep == T::zero() || !sweep.is_finite() {
                        return Err(MagnonError::config("guide.path", format!("arc {k} has zero sweep")));
                    }
                }
            }
        }
        for (k, w) in segments.windows(2).enumerate() {
            let gap = w[0].end().dist(w[1].start());
            if gap > tol * (T::one() + w[0].length()) {
                return Err(MagnonError::config(
                    "guide.path",
                    format!("segments {k} and {} are not continuous (gap {gap})", k + 1),
                ));
            }
        }
        Ok(Self { segments })
    }

    /// Polyline through `points`; each consecutive pair becomes a line segment.
    pub fn polyline(points: &[Point<T>]) -> Result<Self> {
        if points.len() < 2 {
            return Err(MagnonError::config("guide.path", "polyline needs at least two points"));
        }
        Self::from_segments(
            points
                .windows(2)
                .map(|w| Segment::Line { from: w[0], to: w[1] })
                .collect(),
        )
    }

    /// Straight line of length `len` from `start` along `heading` (radians).
    pub fn straight(start: Point<T>, heading: T, len: T) -> Result<Self> {
        PathBuilder::new(start, heading).straight(len).build()
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn start(&self) -> Point<T> {
        self.segments[0].start()
    }

    pub fn end(&self) -> Point<T> {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn length(&self) -> T {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn project(&self, p: Point<T>) -> Projection<T> {
        let first = &self.segments[0];
        let last = &self.segments[self.segments.len() - 1];
        let h0 = first.start_heading();
        let s0 = first.start();
        let back = Point::new(s0.x - h0.cos(), s0.y - h0.sin());
        let mut best = project_line(back, s0, p, true, false);
        best.along = best.along - T::one();

        let mut offset = T::zero();
        for seg in &self.segments {
            let mut pr = seg.project(p);
            pr.along = pr.along + offset;
            if pr.distance < best.distance {
                best = pr;
            }
            offset = offset + seg.length();
        }
        let h1 = last.end_heading();
        let e = last.end();
        let ahead = Point::new(e.x + h1.cos(), e.y + h1.sin());
        let mut pr = project_line(e, ahead, p, false, true);
        pr.along = pr.along + offset;
        if pr.distance < best.distance {
            best = pr;
        }
        best
    }

    /// Points spaced roughly `step` apart along the path.
    pub fn sample(&self, step: T) -> Vec<Point<T>> {
        let mut pts = Vec::new();
        for seg in &self.segments {
            let n = (seg.length() / step).ceil().to_usize().unwrap_or(1).max(1);
            for k in 0..=n {
                let u = T::from_usize_lossy(k) / T::from_usize_lossy(n);
                pts.push(match *seg {
                    Segment::Line { from, to } => {
                        Point::new(from.x + (to.x - from.x) * u, from.y + (to.y - from.y) * u)
                    }
                    Segment::Arc {
                        center,
                        radius,
                        start_angle,
                        sweep,
                    } => polar(center, radius, start_angle + sweep * u),
                });
            }
        }
        pts
    }
}

/// Turtle-style path construction.
#[derive(Debug, Clone)]
pub struct PathBuilder<T> {
    pos: Point<T>,
    heading: T,
    segments: Vec<Segment<T>>,
    error: Option<MagnonError>,
}

impl<T: Real> PathBuilder<T> {
    pub fn new(start: Point<T>, heading: T) -> Self {
        Self {
            pos: start,
            heading,
            segments: Vec::new(),
            error: None,
        }
    }

    pub fn straight(mut self, len: T) -> Self {
        if !(len > T::zero()) {
            self.error.get_or_insert(MagnonError::config("guide.path", "straight length must be > 0"));
            return self;
        }
        let to = Point::new(self.pos.x + len * self.heading.cos(), self.pos.y + len * self.heading.sin());
        self.segments.push(Segment::Line { from: self.pos, to });
        self.pos = to;
        self
    }

    /// Circular arc of `radius` turning by `sweep` radians (positive = left).
    pub fn arc(mut self, radius: T, sweep: T) -> Self {
        if !(radius > T::zero()) {
            self.error.get_or_insert(MagnonError::config("bend.radius", "radius of curvature must be > 0"));
            return self;
        }
        let half_pi = T::FRAC_PI_2();
        let (center, start_angle) = if sweep > T::zero() {
            let a = self.heading + half_pi;
            (polar(self.pos, radius, a), self.heading - half_pi)
        } else {
            let a = self.heading - half_pi;
            (polar(self.pos, radius, a), self.heading + half_pi)
        };
        let seg = Segment::Arc {
            center,
            radius,
            start_angle,
            sweep,
        };
        self.pos = seg.end();
        self.heading = self.heading + sweep;
        self.segments.push(seg);
        self
    }

    /// Straight line to an absolute point; the heading follows the line.
    pub fn line_to(mut self, to: Point<T>) -> Self {
        if to.dist(self.pos) <= T::lit(1e-9) {
            return self;
        }
        self.heading = (to.y - self.pos.y).atan2(to.x - self.pos.x);
        self.segments.push(Segment::Line { from: self.pos, to });
        self.pos = to;
        self
    }

    pub fn position(&self) -> Point<T> {
        self.pos
    }

    pub fn heading(&self) -> T {
        self.heading
    }

    pub fn build(self) -> Result<GuidePath<T>> {
        if let Some(e) = self.error {
            return Err(e);
        }
        GuidePath::from_segments(self.segments)
    }
}
