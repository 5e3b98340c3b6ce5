//! Tolerance-aware planar primitives.
//!
//! Every equality and on-boundary test in the crate goes through the single
//! absolute tolerance [`TOL`]. Open sets are enforced with a `TOL` margin: a
//! point within `TOL` of a boundary counts as on the boundary and is
//! therefore outside every open set.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Global geometric tolerance. Coordinates are assumed O(1)..O(1e3).
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    InvalidInput,
    Degenerate,
    Unbounded,
    EmptyRegion,
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometryError::InvalidInput => write!(f, "invalid input"),
            GeometryError::Degenerate => write!(f, "degenerate input"),
            GeometryError::Unbounded => write!(f, "no finite largest circle"),
            GeometryError::EmptyRegion => write!(f, "region has no usable interior"),
        }
    }
}

/// A point in the plane, also used as a 2d vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub const ZERO: Point = Point::new(0.0, 0.0);

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self x o`.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point) -> f64 {
        (self - o).norm2()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    /// Unit vector in the same direction. Zero-length input is the caller's
    /// bug; returns the input unchanged to stay total.
    pub fn unit(self) -> Point {
        let n = self.norm();
        if n <= TOL {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn close_to(self, o: Point, tol: f64) -> bool {
        self.dist(o) <= tol
    }

    pub fn mid(self, o: Point) -> Point {
        Point::new((self.x + o.x) * 0.5, (self.y + o.y) * 0.5)
    }
}

impl core::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl core::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl core::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl core::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A circle; `radius = 0` is the degenerate point-circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Circle { center, radius }
    }

    /// Closed-disk membership with tolerance.
    pub fn contains_closed(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius + TOL
    }

    /// Open-disk membership with tolerance margin.
    pub fn contains_open(&self, p: Point) -> bool {
        p.dist(self.center) < self.radius - TOL
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        libm::fabs(p.dist(self.center) - self.radius) <= TOL
    }

    pub fn approx_eq(&self, o: &Circle, tol: f64) -> bool {
        self.center.close_to(o.center, tol) && libm::fabs(self.radius - o.radius) <= tol
    }
}

/// A directed line through `origin` along unit `dir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub origin: Point,
    pub dir: Point,
}

impl Line {
    pub fn through(a: Point, b: Point) -> Line {
        Line { origin: a, dir: (b - a).unit() }
    }

    /// Signed distance: positive on the left of `dir`.
    pub fn signed_dist(&self, p: Point) -> f64 {
        self.dir.cross(p - self.origin)
    }

    pub fn dist(&self, p: Point) -> f64 {
        libm::fabs(self.signed_dist(p))
    }

    pub fn project(&self, p: Point) -> Point {
        self.origin + self.dir * (p - self.origin).dot(self.dir)
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 <= TOL * TOL {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

// ---------------------------------------------------------------------------
// Minimum enclosing circle
// ---------------------------------------------------------------------------

/// Circle with `[a, b]` as a diameter.
pub fn diametral_circle(a: Point, b: Point) -> Circle {
    let c = a.mid(b);
    Circle::new(c, c.dist(a).max(c.dist(b)))
}

/// Circumcircle of two (diameter) or three (equidistance) points.
pub fn circumcircle(points: &[Point]) -> Result<Circle, GeometryError> {
    match points {
        [a, b] => {
            if a.dist(*b) <= TOL {
                Err(GeometryError::Degenerate)
            } else {
                Ok(diametral_circle(*a, *b))
            }
        }
        [a, b, c] => circumcircle3(*a, *b, *c).ok_or(GeometryError::Degenerate),
        _ => Err(GeometryError::InvalidInput),
    }
}

fn circumcircle3(a: Point, b: Point, c: Point) -> Option<Circle> {
    // Shift to the local midpoint for numerical stability.
    let ox = (a.x.min(b.x).min(c.x) + a.x.max(b.x).max(c.x)) * 0.5;
    let oy = (a.y.min(b.y).min(c.y) + a.y.max(b.y).max(c.y)) * 0.5;
    let (ax, ay) = (a.x - ox, a.y - oy);
    let (bx, by) = (b.x - ox, b.y - oy);
    let (cx, cy) = (c.x - ox, c.y - oy);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    if libm::fabs(d) <= TOL * scale * scale {
        return None;
    }
    let x = ((ax * ax + ay * ay) * (by - cy)
        + (bx * bx + by * by) * (cy - ay)
        + (cx * cx + cy * cy) * (ay - by))
        / d;
    let y = ((ax * ax + ay * ay) * (cx - bx)
        + (bx * bx + by * by) * (ax - cx)
        + (cx * cx + cy * cy) * (bx - ax))
        / d;
    let p = Point::new(ox + x, oy + y);
    let r = p.dist(a).max(p.dist(b)).max(p.dist(c));
    Some(Circle::new(p, r))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Minimum enclosing circle. Randomized incremental with a fixed
/// deterministic permutation derived from the input order, so identical
/// inputs always produce identical work.
pub fn mec(points: &[Point]) -> Result<Circle, GeometryError> {
    if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::InvalidInput);
    }
    let mut pts: Vec<Point> = points.to_vec();
    let mut state = 0x9E3779B97F4A7C15u64 ^ (pts.len() as u64);
    for i in (1..pts.len()).rev() {
        let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
        pts.swap(i, j);
    }

    let mut c = Circle::new(pts[0], 0.0);
    for i in 1..pts.len() {
        if !c.contains_closed(pts[i]) {
            c = mec_with_one(&pts[..=i], pts[i]);
        }
    }
    Ok(c)
}

fn mec_with_one(pts: &[Point], p: Point) -> Circle {
    let mut c = Circle::new(p, 0.0);
    for (i, &q) in pts.iter().enumerate() {
        if !c.contains_closed(q) {
            c = if c.radius <= TOL && c.center.close_to(p, TOL) {
                diametral_circle(p, q)
            } else {
                mec_with_two(&pts[..=i], p, q)
            };
        }
    }
    c
}

fn mec_with_two(pts: &[Point], p: Point, q: Point) -> Circle {
    let circ = diametral_circle(p, q);
    let mut left: Option<Circle> = None;
    let mut right: Option<Circle> = None;
    let pq = q - p;
    for &r in pts {
        if circ.contains_closed(r) {
            continue;
        }
        let cross = pq.cross(r - p);
        let Some(c) = circumcircle3(p, q, r) else { continue };
        let side = pq.cross(c.center - p);
        if cross > 0.0 && left.is_none_or(|l| side > pq.cross(l.center - p)) {
            left = Some(c);
        } else if cross < 0.0 && right.is_none_or(|rr| side < pq.cross(rr.center - p)) {
            right = Some(c);
        }
    }
    match (left, right) {
        (None, None) => circ,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.radius <= r.radius {
                l
            } else {
                r
            }
        }
    }
}

/// Whether removing `points[index]` changes the minimum enclosing circle.
pub fn is_critical(points: &[Point], index: usize) -> Result<bool, GeometryError> {
    if index >= points.len() {
        return Err(GeometryError::InvalidInput);
    }
    if points.len() == 1 {
        return Ok(true);
    }
    let full = mec(points)?;
    // Only boundary points can be critical.
    if !full.on_boundary(points[index]) {
        return Ok(false);
    }
    let mut rest: Vec<Point> = points.to_vec();
    rest.remove(index);
    let reduced = mec(&rest)?;
    Ok(!full.approx_eq(&reduced, TOL))
}

/// One class of the concentric decomposition around the MEC center.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentricClass {
    pub radius: f64,
    pub members: Vec<usize>,
}

/// Concentric circles centered at the MEC center, innermost first. A point
/// within `TOL` of the center yields a zero-radius class.
pub fn concentric_classes(points: &[Point]) -> Result<Vec<ConcentricClass>, GeometryError> {
    let c = mec(points)?.center;
    let mut order: Vec<usize> = (0..points.len()).collect();
    let radius = |i: usize| {
        let d = points[i].dist(c);
        if d <= TOL {
            0.0
        } else {
            d
        }
    };
    order.sort_by(|&a, &b| radius(a).partial_cmp(&radius(b)).unwrap());
    let mut classes: Vec<ConcentricClass> = Vec::new();
    for i in order {
        let r = radius(i);
        match classes.last_mut() {
            Some(last) if r - last.radius <= TOL => last.members.push(i),
            _ => classes.push(ConcentricClass { radius: r, members: alloc::vec![i] }),
        }
    }
    Ok(classes)
}

// ---------------------------------------------------------------------------
// Cones
// ---------------------------------------------------------------------------

/// The open region bounded by the disk `target` and the two tangent segments
/// from `apex`; the apex itself is not part of the region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub apex: Point,
    pub target: Circle,
}

impl Cone {
    pub fn try_new(apex: Point, target: Circle) -> Result<Cone, GeometryError> {
        if target.radius <= 0.0 || apex.dist(target.center) <= target.radius {
            return Err(GeometryError::InvalidInput);
        }
        Ok(Cone { apex, target })
    }

    /// Half-aperture `asin(r/d)`; the full cone angle is twice this.
    pub fn half_angle(&self) -> f64 {
        let d = self.apex.dist(self.target.center);
        libm::asin((self.target.radius / d).clamp(-1.0, 1.0))
    }

    pub fn angle(&self) -> f64 {
        2.0 * self.half_angle()
    }

    /// Open-region membership: `p` is in the cone iff the ray from the apex
    /// through `p`, restricted to parameters `>= 1`, meets the open disk.
    pub fn contains(&self, p: Point) -> bool {
        let u = p - self.apex;
        let n2 = u.norm2();
        if n2 <= TOL * TOL {
            return false;
        }
        let s = (self.target.center - self.apex).dot(u) / n2;
        let d = if s >= 1.0 {
            Line { origin: self.apex, dir: u.unit() }.dist(self.target.center)
        } else {
            p.dist(self.target.center)
        };
        d < self.target.radius - TOL
    }

    /// Closed-hull membership (the convex hull of apex and closed disk).
    pub fn hull_contains(&self, p: Point) -> bool {
        if p.close_to(self.apex, TOL) {
            return true;
        }
        let u = p - self.apex;
        let s = (self.target.center - self.apex).dot(u) / u.norm2();
        let d = if s >= 1.0 {
            Line { origin: self.apex, dir: u.unit() }.dist(self.target.center)
        } else {
            p.dist(self.target.center)
        };
        d <= self.target.radius + TOL
    }

    fn tangent_points(&self) -> (Point, Point) {
        let d = self.apex.dist(self.target.center);
        let l = libm::sqrt((d * d - self.target.radius * self.target.radius).max(0.0));
        let alpha = self.half_angle();
        let axis = (self.target.center - self.apex).unit();
        (self.apex + axis.rotate(alpha) * l, self.apex + axis.rotate(-alpha) * l)
    }

    /// Distance from `q` to the closed hull (0 when inside).
    pub fn hull_dist(&self, q: Point) -> f64 {
        if self.hull_contains(q) {
            return 0.0;
        }
        let (a, b) = self.tangent_points();
        let seg_a = segment_dist(q, self.apex, a);
        let seg_b = segment_dist(q, self.apex, b);
        let disk = q.dist(self.target.center) - self.target.radius;
        seg_a.min(seg_b).min(disk)
    }

    /// Largest distance from `q` to any hull point.
    pub fn hull_max_dist(&self, q: Point) -> f64 {
        q.dist(self.apex).max(q.dist(self.target.center) + self.target.radius)
    }
}

// ---------------------------------------------------------------------------
// Circle families through two anchor points
// ---------------------------------------------------------------------------

/// Slice of the family of circles through two anchors, parametrized by the
/// signed center offset along the perpendicular bisector of the anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFamilyArc {
    pub anchor_a: Point,
    pub anchor_b: Point,
    /// Unit normal of line(a, b); offsets are measured along it.
    pub normal: Point,
    pub offset_lo: f64,
    pub offset_hi: f64,
}

impl CircleFamilyArc {
    pub fn new(a: Point, b: Point, lo: f64, hi: f64) -> Result<Self, GeometryError> {
        if a.dist(b) <= TOL {
            return Err(GeometryError::InvalidInput);
        }
        Ok(CircleFamilyArc {
            anchor_a: a,
            anchor_b: b,
            normal: (b - a).unit().perp(),
            offset_lo: lo,
            offset_hi: hi,
        })
    }

    pub fn circle_at(&self, offset: f64) -> Circle {
        family_circle(self.anchor_a, self.anchor_b, self.normal, offset)
    }
}

/// Circle through `a` and `b` whose center sits at `mid + normal*offset`.
pub fn family_circle(a: Point, b: Point, normal: Point, offset: f64) -> Circle {
    let mid = a.mid(b);
    let h = a.dist(b) * 0.5;
    let center = mid + normal * offset;
    Circle::new(center, libm::hypot(h, offset))
}

/// Signed center offset of the circle through `a`, `b` and `p`, measured
/// along `normal` (unit normal of line(a,b)). `p` must be off the line.
pub fn family_offset_through(a: Point, b: Point, normal: Point, p: Point) -> Option<f64> {
    let mid = a.mid(b);
    let h = a.dist(b) * 0.5;
    let sigma = (p - mid).dot(normal);
    if libm::fabs(sigma) <= TOL {
        return None;
    }
    Some(((p - mid).norm2() - h * h) / (2.0 * sigma))
}

/// Largest circle through `a` and `b` whose center lies in the closed
/// half-plane of line(a,b) containing `center_side`, with all `points` in
/// its closed enclosure. Enclosure of a point is a linear inequality in the
/// center offset, so the feasible offsets form an exact interval.
pub fn largest_enclosing_family_circle(
    a: Point,
    b: Point,
    points: &[Point],
    center_side: Point,
) -> Result<Circle, GeometryError> {
    let h = a.dist(b) * 0.5;
    if h <= TOL {
        return Err(GeometryError::InvalidInput);
    }
    let mid = a.mid(b);
    let mut n = (b - a).unit().perp();
    let side = (center_side - mid).dot(n);
    if libm::fabs(side) <= TOL {
        return Err(GeometryError::InvalidInput);
    }
    if side < 0.0 {
        n = -n;
    }

    let mut lo = 0.0f64; // center restricted to the closed half-plane
    let mut hi = f64::INFINITY;
    for &p in points {
        let v = p - mid;
        let sigma = v.dot(n);
        let q = v.norm2() - h * h;
        if libm::fabs(sigma) <= TOL {
            if q > TOL {
                // On the line beyond the chord: enclosed by no family circle.
                return Err(GeometryError::InvalidInput);
            }
        } else if sigma > 0.0 {
            lo = lo.max(q / (2.0 * sigma));
        } else {
            hi = hi.min(q / (2.0 * sigma));
        }
    }
    if hi.is_infinite() {
        return Err(GeometryError::Unbounded);
    }
    if hi < lo - TOL {
        return Err(GeometryError::InvalidInput);
    }
    Ok(family_circle(a, b, n, hi))
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// One primitive membership constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Constraint {
    InsideCircle { circle: Circle, closed: bool },
    OutsideCircle { circle: Circle, closed: bool },
    /// dot(p - origin, normal) > 0 (or >= 0 when closed); `normal` is unit.
    HalfPlane { origin: Point, normal: Point, closed: bool },
    /// Open region strictly between the line through `origin` with unit
    /// normal `normal` and its parallel at offset `width` (> 0).
    Strip { origin: Point, normal: Point, width: f64 },
    /// Complement of the line through `origin` along unit `dir`.
    AvoidLine { origin: Point, dir: Point },
    /// Complement of the circle curve (inside or outside both allowed).
    AvoidCircle { circle: Circle },
    /// Complement of a single point.
    AvoidPoint { point: Point },
}

impl Constraint {
    fn anchor(&self) -> Point {
        match self {
            Constraint::InsideCircle { circle, .. }
            | Constraint::OutsideCircle { circle, .. }
            | Constraint::AvoidCircle { circle } => circle.center,
            Constraint::HalfPlane { origin, .. }
            | Constraint::Strip { origin, .. }
            | Constraint::AvoidLine { origin, .. } => *origin,
            Constraint::AvoidPoint { point } => *point,
        }
    }

    /// Signed clearance: positive inside, negative outside (avoid-style
    /// constraints are never negative; zero means "on the forbidden set").
    pub fn clearance(&self, p: Point) -> f64 {
        match *self {
            Constraint::InsideCircle { circle, .. } => circle.radius - p.dist(circle.center),
            Constraint::OutsideCircle { circle, .. } => p.dist(circle.center) - circle.radius,
            Constraint::HalfPlane { origin, normal, .. } => (p - origin).dot(normal),
            Constraint::Strip { origin, normal, width } => {
                let s = (p - origin).dot(normal);
                s.min(width - s)
            }
            Constraint::AvoidLine { origin, dir } => Line { origin, dir }.dist(p),
            Constraint::AvoidCircle { circle } => {
                libm::fabs(p.dist(circle.center) - circle.radius)
            }
            Constraint::AvoidPoint { point } => p.dist(point),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Constraint::InsideCircle { circle, closed } => {
                if closed {
                    circle.contains_closed(p)
                } else {
                    circle.contains_open(p)
                }
            }
            Constraint::OutsideCircle { circle, closed } => {
                let d = p.dist(circle.center);
                if closed {
                    d >= circle.radius - TOL
                } else {
                    d > circle.radius + TOL
                }
            }
            Constraint::HalfPlane { origin, normal, closed } => {
                let s = (p - origin).dot(normal);
                if closed {
                    s >= -TOL
                } else {
                    s > TOL
                }
            }
            Constraint::Strip { origin, normal, width } => {
                let s = (p - origin).dot(normal);
                s > TOL && s < width - TOL
            }
            Constraint::AvoidLine { origin, dir } => Line { origin, dir }.dist(p) > TOL,
            Constraint::AvoidCircle { circle } => !circle.on_boundary(p),
            Constraint::AvoidPoint { point } => p.dist(point) > TOL,
        }
    }

    /// Whether the whole disk `B(c, rho)` satisfies the constraint.
    pub fn contains_disk(&self, c: Point, rho: f64) -> bool {
        match *self {
            Constraint::InsideCircle { circle, closed } => {
                let d = c.dist(circle.center) + rho;
                if closed {
                    d <= circle.radius + TOL
                } else {
                    d <= circle.radius - TOL
                }
            }
            Constraint::OutsideCircle { circle, closed } => {
                let d = c.dist(circle.center) - rho;
                if closed {
                    d >= circle.radius - TOL
                } else {
                    d >= circle.radius + TOL
                }
            }
            Constraint::HalfPlane { origin, normal, closed } => {
                let s = (c - origin).dot(normal) - rho;
                if closed {
                    s >= -TOL
                } else {
                    s >= TOL
                }
            }
            Constraint::Strip { origin, normal, width } => {
                let s = (c - origin).dot(normal);
                s - rho >= TOL && s + rho <= width - TOL
            }
            Constraint::AvoidLine { origin, dir } => {
                Line { origin, dir }.dist(c) - rho >= TOL
            }
            Constraint::AvoidCircle { circle } => {
                let d = c.dist(circle.center);
                d + rho <= circle.radius - TOL || d - rho >= circle.radius + TOL
            }
            Constraint::AvoidPoint { point } => c.dist(point) >= rho + TOL,
        }
    }

    /// Whether the open cone region satisfies the constraint. The apex is
    /// allowed to sit on a boundary; the open region excludes it.
    pub fn contains_cone(&self, cone: &Cone) -> bool {
        let apex = cone.apex;
        let c = cone.target.center;
        let rho = cone.target.radius;
        match *self {
            Constraint::InsideCircle { circle, closed } => {
                let da = apex.dist(circle.center);
                let disk_ok = if closed {
                    c.dist(circle.center) + rho <= circle.radius + TOL
                } else {
                    c.dist(circle.center) + rho <= circle.radius - TOL
                };
                da <= circle.radius + TOL && disk_ok
            }
            Constraint::OutsideCircle { circle, .. } => cone_outside_circle(cone, &circle),
            Constraint::HalfPlane { origin, normal, .. } => {
                (apex - origin).dot(normal) >= -TOL && (c - origin).dot(normal) - rho >= TOL
            }
            Constraint::Strip { origin, normal, width } => {
                let sa = (apex - origin).dot(normal);
                let sc = (c - origin).dot(normal);
                sa >= -TOL && sc - rho >= TOL && sa <= width + TOL && sc + rho <= width - TOL
            }
            Constraint::AvoidLine { origin, dir } => {
                let line = Line { origin, dir };
                let sa = line.signed_dist(apex);
                let sc = line.signed_dist(c);
                libm::fabs(sc) - rho >= TOL && sa * (if sc >= 0.0 { 1.0 } else { -1.0 }) >= -TOL
            }
            Constraint::AvoidCircle { circle } => {
                let inside = Constraint::InsideCircle { circle, closed: false };
                inside.contains_cone(cone) || cone_outside_circle(cone, &circle)
            }
            Constraint::AvoidPoint { point } => {
                point.close_to(apex, TOL) || cone.hull_dist(point) > TOL
            }
        }
    }
}

/// Open cone entirely outside the closed disk of `circle`. Supports an apex
/// exactly on the circle: then the reach disk must lie strictly beyond the
/// tangent half-plane at the apex.
fn cone_outside_circle(cone: &Cone, circle: &Circle) -> bool {
    let da = cone.apex.dist(circle.center);
    let r = circle.radius;
    if da >= r + TOL {
        cone.hull_dist(circle.center) >= r + TOL
    } else if da >= r - TOL {
        let n = (cone.apex - circle.center).unit();
        let beyond = (cone.target.center - cone.apex).dot(n) >= cone.target.radius + TOL;
        beyond && cone.target.center.dist(circle.center) - cone.target.radius >= r + TOL
    } else {
        false
    }
}

/// Conjunction of primitive constraints; an empty list is the whole plane.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Region {
    pub constraints: Vec<Constraint>,
}

impl Region {
    pub fn plane() -> Region {
        Region::default()
    }

    pub fn with(mut self, c: Constraint) -> Region {
        self.constraints.push(c);
        self
    }

    pub fn inside_circle(self, circle: Circle, closed: bool) -> Region {
        self.with(Constraint::InsideCircle { circle, closed })
    }

    pub fn outside_circle(self, circle: Circle, closed: bool) -> Region {
        self.with(Constraint::OutsideCircle { circle, closed })
    }

    /// Open (or closed) half-plane containing `side`, delimited by the line
    /// through `a` and `b`.
    pub fn halfplane_through(self, a: Point, b: Point, side: Point, closed: bool) -> Region {
        let dir = (b - a).unit();
        let mut normal = dir.perp();
        if (side - a).dot(normal) < 0.0 {
            normal = -normal;
        }
        self.with(Constraint::HalfPlane { origin: a, normal, closed })
    }

    /// Open strip between the parallels of `dir` through `p1` and `p2`.
    pub fn strip(self, p1: Point, p2: Point, dir: Point) -> Region {
        let mut normal = dir.unit().perp();
        let mut width = (p2 - p1).dot(normal);
        if width < 0.0 {
            normal = -normal;
            width = -width;
        }
        self.with(Constraint::Strip { origin: p1, normal, width })
    }

    pub fn avoid_line(self, origin: Point, dir: Point) -> Region {
        self.with(Constraint::AvoidLine { origin, dir: dir.unit() })
    }

    pub fn avoid_circle(self, circle: Circle) -> Region {
        self.with(Constraint::AvoidCircle { circle })
    }

    pub fn avoid_point(self, point: Point) -> Region {
        self.with(Constraint::AvoidPoint { point })
    }

    pub fn contains(&self, p: Point) -> bool {
        self.constraints.iter().all(|c| c.contains(p))
    }

    pub fn contains_disk(&self, center: Point, rho: f64) -> bool {
        self.constraints.iter().all(|c| c.contains_disk(center, rho))
    }

    pub fn contains_cone(&self, cone: &Cone) -> bool {
        self.constraints.iter().all(|c| c.contains_cone(cone))
    }

    /// Min signed clearance over all constraints (infinite for the plane).
    pub fn clearance(&self, p: Point) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.clearance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Deterministic, frame-covariant grid axes: the first constraint anchor
    /// distinct from `hint` fixes the direction, so the search commutes with
    /// rigid motions of the inputs.
    fn grid_axes(&self, hint: Point) -> (Point, Point) {
        for c in &self.constraints {
            let a = c.anchor();
            if a.dist(hint) > TOL {
                let u = (a - hint).unit();
                return (u, u.perp());
            }
        }
        (Point::new(1.0, 0.0), Point::new(0.0, 1.0))
    }

    /// Bounding box (in grid coordinates around `hint`) from the inside-circle
    /// constraints; falls back to a unit box when unbounded.
    fn grid_box(&self, hint: Point, u: Point, v: Point) -> Option<(f64, f64, f64, f64)> {
        let mut lo_u = f64::NEG_INFINITY;
        let mut hi_u = f64::INFINITY;
        let mut lo_v = f64::NEG_INFINITY;
        let mut hi_v = f64::INFINITY;
        for c in &self.constraints {
            if let Constraint::InsideCircle { circle, .. } = c {
                let cu = (circle.center - hint).dot(u);
                let cv = (circle.center - hint).dot(v);
                lo_u = lo_u.max(cu - circle.radius);
                hi_u = hi_u.min(cu + circle.radius);
                lo_v = lo_v.max(cv - circle.radius);
                hi_v = hi_v.min(cv + circle.radius);
            }
        }
        if lo_u.is_infinite() {
            return Some((-1.0, 1.0, -1.0, 1.0));
        }
        if hi_u - lo_u <= 0.0 || hi_v - lo_v <= 0.0 {
            return None;
        }
        Some((lo_u, hi_u, lo_v, hi_v))
    }
}

const GRID_N: usize = 33;
const GRID_LEVELS: usize = 3;

/// Deterministic inscribed disk: multi-resolution grid search seeded at
/// `hint`, maximizing clearance to all constraint boundaries; the radius is
/// half the best clearance. Pure function of `(region, hint)`.
pub fn inscribed_disk(region: &Region, hint: Point) -> Result<(Point, f64), GeometryError> {
    let (u, v) = region.grid_axes(hint);
    let Some((mut lo_u, mut hi_u, mut lo_v, mut hi_v)) = region.grid_box(hint, u, v) else {
        return Err(GeometryError::EmptyRegion);
    };
    let mut best_p = hint;
    let mut best_c = region.clearance(hint);
    for _level in 0..GRID_LEVELS {
        let du = (hi_u - lo_u) / (GRID_N as f64 - 1.0);
        let dv = (hi_v - lo_v) / (GRID_N as f64 - 1.0);
        for i in 0..GRID_N {
            for j in 0..GRID_N {
                let p = hint + u * (lo_u + du * i as f64) + v * (lo_v + dv * j as f64);
                let c = region.clearance(p);
                if c > best_c {
                    best_c = c;
                    best_p = p;
                }
            }
        }
        let bu = (best_p - hint).dot(u);
        let bv = (best_p - hint).dot(v);
        lo_u = bu - 2.0 * du;
        hi_u = bu + 2.0 * du;
        lo_v = bv - 2.0 * dv;
        hi_v = bv + 2.0 * dv;
    }
    if best_c <= 4.0 * TOL {
        return Err(GeometryError::EmptyRegion);
    }
    Ok((best_p, best_c * 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn mec_diameter_pair() {
        let c = mec(&[p(0.0, 0.0), p(2.0, 0.0)]).unwrap();
        assert!(c.center.close_to(p(1.0, 0.0), TOL));
        assert!((c.radius - 1.0).abs() <= TOL);
    }

    #[test]
    fn mec_right_triangle_uses_hypotenuse() {
        let c = mec(&[p(0.0, 0.0), p(2.0, 0.0), p(1.0, 1.0)]).unwrap();
        assert!(c.center.close_to(p(1.0, 0.0), TOL));
        assert!((c.radius - 1.0).abs() <= TOL);
        assert!(c.on_boundary(p(1.0, 1.0)));
    }

    #[test]
    fn mec_acute_triangle_is_circumcircle() {
        let c = mec(&[p(0.0, 0.0), p(4.0, 0.0), p(2.0, 3.0)]).unwrap();
        assert!(c.center.close_to(p(2.0, 5.0 / 6.0), 1e-9));
        assert!((c.radius - 13.0 / 6.0).abs() <= 1e-9);
    }

    #[test]
    fn mec_empty_is_invalid() {
        assert_eq!(mec(&[]), Err(GeometryError::InvalidInput));
    }

    #[test]
    fn circumcircle_cases() {
        let c = circumcircle(&[p(0.0, 0.0), p(2.0, 0.0)]).unwrap();
        assert!(c.center.close_to(p(1.0, 0.0), TOL) && (c.radius - 1.0).abs() <= TOL);
        let c = circumcircle(&[p(0.0, 0.0), p(2.0, 0.0), p(1.0, 1.0)]).unwrap();
        assert!(c.center.close_to(p(1.0, 0.0), TOL) && (c.radius - 1.0).abs() <= TOL);
        let c = circumcircle(&[p(0.0, 0.0), p(4.0, 0.0), p(2.0, 3.0)]).unwrap();
        assert!(c.center.close_to(p(2.0, 5.0 / 6.0), 1e-9));
        assert!((c.radius - 13.0 / 6.0).abs() <= 1e-9);
        assert_eq!(
            circumcircle(&[p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]),
            Err(GeometryError::Degenerate)
        );
        assert_eq!(circumcircle(&[p(0.0, 0.0), p(0.0, 0.0)]), Err(GeometryError::Degenerate));
    }

    #[test]
    fn criticality_square_corners() {
        let square = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        for i in 0..4 {
            assert!(!is_critical(&square, i).unwrap());
        }
    }

    #[test]
    fn criticality_right_triangle() {
        let pts = [p(0.0, 0.0), p(2.0, 0.0), p(1.0, 1.0)];
        assert!(!is_critical(&pts, 2).unwrap());
        assert!(is_critical(&pts, 0).unwrap());
        assert!(is_critical(&pts, 1).unwrap());
    }

    #[test]
    fn criticality_acute_triangle_all_critical() {
        let pts = [p(0.0, 0.0), p(4.0, 0.0), p(2.0, 3.0)];
        for i in 0..3 {
            assert!(is_critical(&pts, i).unwrap());
        }
    }

    #[test]
    fn concentric_two_rings() {
        let classes = concentric_classes(&[p(0.0, 0.0), p(4.0, 0.0), p(1.0, 1.0)]).unwrap();
        assert_eq!(classes.len(), 2);
        assert!((classes[0].radius - libm::sqrt(2.0)).abs() <= 1e-9);
        assert_eq!(classes[0].members, alloc::vec![2]);
        assert!((classes[1].radius - 2.0).abs() <= 1e-9);
        assert_eq!(classes[1].members.len(), 2);
    }

    #[test]
    fn concentric_single_point_and_square() {
        let classes = concentric_classes(&[p(3.0, 4.0)]).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].radius, 0.0);
        let square = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert_eq!(concentric_classes(&square).unwrap().len(), 1);
    }

    #[test]
    fn cone_membership_and_angle() {
        let cone = Cone::try_new(p(0.0, 0.0), Circle::new(p(10.0, 0.0), 1.0)).unwrap();
        assert!(cone.contains(p(5.0, 0.3)));
        assert!(!cone.contains(p(-1.0, 0.0)));
        assert!((cone.angle() - 2.0 * libm::asin(0.1)).abs() <= 1e-12);
        // Apex excluded, disk included.
        assert!(!cone.contains(p(0.0, 0.0)));
        assert!(cone.contains(p(10.0, 0.0)));
        // Just beyond the far side of the disk: outside.
        assert!(!cone.contains(p(11.1, 0.0)));
    }

    #[test]
    fn largest_family_circle_through_constraining_point() {
        // Single bounding point above the line, center constrained below.
        let c = largest_enclosing_family_circle(
            p(0.0, 0.0),
            p(4.0, 0.0),
            &[p(2.0, 1.0)],
            p(2.0, -1.0),
        )
        .unwrap();
        assert!(c.center.close_to(p(2.0, -1.5), 1e-9));
        assert!((c.radius - 2.5).abs() <= 1e-9);
        assert!(c.on_boundary(p(2.0, 1.0)));
    }

    #[test]
    fn largest_family_circle_unbounded_without_opposite_points() {
        let r = largest_enclosing_family_circle(
            p(0.0, 0.0),
            p(4.0, 0.0),
            &[p(2.0, -1.0)],
            p(2.0, -1.0),
        );
        assert_eq!(r, Err(GeometryError::Unbounded));
        // No points at all: unbounded as well.
        let r = largest_enclosing_family_circle(p(0.0, 0.0), p(4.0, 0.0), &[], p(2.0, 1.0));
        assert_eq!(r, Err(GeometryError::Unbounded));
    }

    #[test]
    fn region_plane_and_open_disk_boundary() {
        assert!(Region::plane().contains(p(123.0, -7.0)));
        let r = Region::plane().inside_circle(Circle::new(p(0.0, 0.0), 1.0), false);
        assert!(!r.contains(p(1.0, 0.0)));
        assert!(r.contains(p(0.5, 0.0)));
    }

    #[test]
    fn inscribed_disk_centered() {
        let r = Region::plane().inside_circle(Circle::new(p(0.0, 0.0), 2.0), false);
        let (c, rad) = inscribed_disk(&r, p(0.0, 0.0)).unwrap();
        assert!(c.close_to(p(0.0, 0.0), TOL));
        assert!((rad - 1.0).abs() <= TOL);
    }

    #[test]
    fn inscribed_disk_half_disk() {
        let r = Region::plane()
            .inside_circle(Circle::new(p(0.0, 0.0), 2.0), false)
            .halfplane_through(p(-1.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), false);
        let (c, rad) = inscribed_disk(&r, p(0.0, 1.0)).unwrap();
        assert!(rad > 0.0);
        assert!(r.contains_disk(c, rad));
    }

    #[test]
    fn inscribed_disk_empty() {
        let r = Region::plane()
            .inside_circle(Circle::new(p(0.0, 0.0), 1.0), false)
            .halfplane_through(p(0.0, 5.0), p(1.0, 5.0), p(0.0, 6.0), false);
        assert_eq!(inscribed_disk(&r, p(0.0, 0.0)), Err(GeometryError::EmptyRegion));
    }

    #[test]
    fn inscribed_disk_is_frame_covariant() {
        let build = |rot: f64, shift: Point| {
            let t = move |q: Point| q.rotate(rot) + shift;
            let r = Region::plane()
                .inside_circle(Circle::new(t(p(0.3, 0.1)), 2.0), false)
                .halfplane_through(t(p(-1.0, -0.4)), t(p(1.0, -0.4)), t(p(0.0, 1.0)), false)
                .avoid_point(t(p(0.5, 0.5)));
            let (c, rad) = inscribed_disk(&r, t(p(0.1, 0.6))).unwrap();
            (c, rad, t)
        };
        let (c0, r0, _) = build(0.0, Point::ZERO);
        let (c1, r1, t) = build(0.7, p(3.0, -2.0));
        assert!((r0 - r1).abs() <= 1e-9);
        assert!(t(c0).close_to(c1, 1e-9));
    }

    #[test]
    fn disk_and_cone_region_checks() {
        let region = Region::plane()
            .inside_circle(Circle::new(p(0.0, 0.0), 5.0), false)
            .avoid_point(p(0.0, 0.0));
        assert!(region.contains_disk(p(2.0, 0.0), 1.0));
        assert!(!region.contains_disk(p(2.0, 0.0), 2.5)); // covers the origin
        assert!(!region.contains_disk(p(4.5, 0.0), 1.0)); // pokes out

        // Cone whose apex sits on the outer circle, opening inward.
        let cone = Cone::try_new(p(5.0, 0.0), Circle::new(p(3.0, 0.5), 0.2)).unwrap();
        assert!(region.contains_cone(&cone));
        // Apex on the circle opening outward fails the inside constraint.
        let cone_out = Cone::try_new(p(5.0, 0.0), Circle::new(p(7.0, 0.0), 0.2)).unwrap();
        assert!(!region.contains_cone(&cone_out));
        let ext = Region::plane().outside_circle(Circle::new(p(0.0, 0.0), 5.0), false);
        assert!(ext.contains_cone(&cone_out));
        assert!(!ext.contains_cone(&cone));
    }
}
