//! Configuration analysis: view strings, symmetry classification, symmetry
//! safety, the phase predicates and the bounding structure of a pattern.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    self, circumcircle, concentric_classes, is_critical, mec, Line, Point, TOL,
};

/// Quantization step for view radii and angles, coarser than [`TOL`] to
/// absorb accumulated floating-point error in polar coordinates.
pub const VIEW_QUANTUM: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisError {
    AmbiguousView,
    InvalidInput,
}

impl core::fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnalysisError::AmbiguousView => write!(f, "tied views among candidates"),
            AnalysisError::InvalidInput => write!(f, "invalid input"),
        }
    }
}

/// Externally visible light color of the two-color asynchronous wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Light {
    Busy,
    Idle,
}

/// Positions (and optional lights) of the robots. Indices identify robots
/// only on the simulator side; the protocol never uses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<Point>,
    pub lights: Option<Vec<Light>>,
}

impl Configuration {
    pub fn new(positions: Vec<Point>) -> Self {
        Configuration { positions, lights: None }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// All positions pairwise distinct (more than [`TOL`] apart).
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.positions.is_empty() || self.positions.iter().any(|p| !p.is_finite()) {
            return Err(AnalysisError::InvalidInput);
        }
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                if self.positions[i].dist(self.positions[j]) <= TOL {
                    return Err(AnalysisError::InvalidInput);
                }
            }
        }
        if let Some(l) = &self.lights {
            if l.len() != self.positions.len() {
                return Err(AnalysisError::InvalidInput);
            }
        }
        Ok(())
    }
}

/// The input pattern together with the closeness parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub points: Vec<Point>,
    pub epsilon: f64,
}

impl Pattern {
    /// Diameter of the pattern's minimum enclosing circle.
    pub fn diameter(&self) -> f64 {
        mec(&self.points).map(|c| 2.0 * c.radius).unwrap_or(0.0)
    }

    /// n >= 2, epsilon in (0,1), and the disks `B(f_i, eps*D)` disjoint
    /// (pairwise distances at least `2*eps*D`).
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.points.len() < 2
            || !self.epsilon.is_finite()
            || self.epsilon <= 0.0
            || self.epsilon >= 1.0
            || self.points.iter().any(|p| !p.is_finite())
        {
            return Err(AnalysisError::InvalidInput);
        }
        let d = self.diameter();
        if d <= TOL {
            return Err(AnalysisError::InvalidInput);
        }
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if self.points[i].dist(self.points[j]) < 2.0 * self.epsilon * d - TOL {
                    return Err(AnalysisError::InvalidInput);
                }
            }
        }
        Ok(())
    }
}

/// Quantized (radius, angle) string of `n + 1` elements; lexicographic order
/// compares radius before angle, elements left to right.
pub type View = Vec<(i64, i64)>;

fn quantize(x: f64) -> i64 {
    libm::round(x / VIEW_QUANTUM) as i64
}

fn quantize_angle(a: f64) -> i64 {
    let full = quantize(2.0 * core::f64::consts::PI);
    let q = quantize(a);
    if q >= full {
        q - full
    } else {
        q
    }
}

/// Normalize to [0, 2*pi).
fn norm_angle(a: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut r = a % two_pi;
    if r < 0.0 {
        r += two_pi;
    }
    r
}

/// Clockwise and counterclockwise views of one robot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotViews {
    pub cw: View,
    pub ccw: View,
}

impl RobotViews {
    pub fn min(&self) -> &View {
        if self.cw <= self.ccw {
            &self.cw
        } else {
            &self.ccw
        }
    }
}

/// Per-robot views in the polar system with origin at the MEC center and
/// reference axis toward the robot. A robot at the center gets the all-zero
/// string.
pub fn views(config: &Configuration) -> Vec<RobotViews> {
    views_of_points(&config.positions)
}

pub fn views_of_points(points: &[Point]) -> Vec<RobotViews> {
    let c = match mec(points) {
        Ok(circle) => circle.center,
        Err(_) => return Vec::new(),
    };
    let n = points.len();
    points
        .iter()
        .map(|&r| {
            if r.dist(c) <= TOL {
                let zero: View = alloc::vec![(0, 0); n + 1];
                return RobotViews { cw: zero.clone(), ccw: zero };
            }
            let axis = (r - c).unit();
            let own = quantize(r.dist(c));
            let mut cw: View = Vec::with_capacity(n + 1);
            let mut ccw: View = Vec::with_capacity(n + 1);
            cw.push((own, 0));
            ccw.push((own, 0));
            let mut cw_rest: Vec<(i64, i64)> = Vec::with_capacity(n);
            let mut ccw_rest: Vec<(i64, i64)> = Vec::with_capacity(n);
            for &q in points {
                let d = q.dist(c);
                if d <= TOL {
                    cw_rest.push((0, 0));
                    ccw_rest.push((0, 0));
                    continue;
                }
                let v = q - c;
                let ccw_angle = norm_angle(libm::atan2(axis.cross(v), axis.dot(v)));
                let cw_angle = norm_angle(-libm::atan2(axis.cross(v), axis.dot(v)));
                cw_rest.push((quantize(d), quantize_angle(cw_angle)));
                ccw_rest.push((quantize(d), quantize_angle(ccw_angle)));
            }
            cw_rest.sort_unstable();
            ccw_rest.sort_unstable();
            cw.extend(cw_rest);
            ccw.extend(ccw_rest);
            RobotViews { cw, ccw }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryType {
    Asymmetric,
    Reflection,
    Rotation,
    Both,
}

/// View-based symmetry detection: a reflection exists iff some clockwise
/// view equals some counterclockwise view (robots off the center); a
/// rotation exists iff two distinct robots share a clockwise view.
pub fn symmetry_type(config: &Configuration) -> SymmetryType {
    let vs = views(config);
    let c = match mec(&config.positions) {
        Ok(circle) => circle.center,
        Err(_) => return SymmetryType::Asymmetric,
    };
    let off_center: Vec<usize> = (0..config.len())
        .filter(|&i| config.positions[i].dist(c) > TOL)
        .collect();
    let mut reflection = false;
    let mut rotation = false;
    for &i in &off_center {
        for &j in &off_center {
            if vs[i].cw == vs[j].ccw {
                reflection = true;
            }
            if i != j && vs[i].cw == vs[j].cw {
                rotation = true;
            }
        }
    }
    match (reflection, rotation) {
        (true, true) => SymmetryType::Both,
        (true, false) => SymmetryType::Reflection,
        (false, true) => SymmetryType::Rotation,
        (false, false) => SymmetryType::Asymmetric,
    }
}

/// Rotational symmetry with an empty center, or reflectional symmetry whose
/// (unique) axis carries no robot.
pub fn has_unbreakable_symmetry(config: &Configuration) -> bool {
    let Ok(circle) = mec(&config.positions) else { return false };
    let center_occupied = config.positions.iter().any(|p| p.dist(circle.center) <= TOL);
    match symmetry_type(config) {
        SymmetryType::Rotation | SymmetryType::Both => !center_occupied,
        SymmetryType::Reflection => {
            if center_occupied {
                return false;
            }
            // A robot lies on the unique axis iff its own cw and ccw views
            // coincide.
            let vs = views(config);
            !(0..config.len()).any(|i| {
                config.positions[i].dist(circle.center) > TOL && vs[i].cw == vs[i].ccw
            })
        }
        SymmetryType::Asymmetric => false,
    }
}

/// Canonical chirality of a configuration: compares the sorted multiset of
/// clockwise views against the counterclockwise ones. Nonzero for every
/// asymmetric configuration, 0 exactly when a reflection exists.
pub fn view_chirality(config: &Configuration) -> i8 {
    let vs = views(config);
    let mut cw: Vec<&View> = vs.iter().map(|v| &v.cw).collect();
    let mut ccw: Vec<&View> = vs.iter().map(|v| &v.ccw).collect();
    cw.sort();
    ccw.sort();
    match cw.cmp(&ccw) {
        core::cmp::Ordering::Less => 1,
        core::cmp::Ordering::Greater => -1,
        core::cmp::Ordering::Equal => 0,
    }
}

/// Indices of robots on the boundary of the minimum enclosing circle.
pub fn boundary_robots(points: &[Point]) -> Vec<usize> {
    let Ok(circle) = mec(points) else { return Vec::new() };
    (0..points.len()).filter(|&i| circle.on_boundary(points[i])).collect()
}

/// The three-branch structural condition that keeps a configuration
/// asymmetric under the protocol's moves.
pub fn is_symmetry_safe(config: &Configuration) -> bool {
    let points = &config.positions;
    let Ok(circle) = mec(points) else { return false };
    let boundary = boundary_robots(points);
    let critical: Vec<bool> = boundary
        .iter()
        .map(|&i| is_critical(points, i).unwrap_or(false))
        .collect();
    let classes = match concentric_classes(points) {
        Ok(c) => c,
        Err(_) => return false,
    };
    let center_occupied = classes.first().is_some_and(|c| c.radius <= TOL);

    // Branch 1: a non-critical boundary robot exists, the center is empty,
    // the two innermost classes are singletons and not collinear with the
    // center.
    let has_noncritical = critical.iter().any(|&c| !c);
    if has_noncritical
        && !center_occupied
        && classes.len() >= 2
        && classes[0].members.len() == 1
        && classes[1].members.len() == 1
    {
        let r1 = points[classes[0].members[0]];
        let r2 = points[classes[1].members[0]];
        if Line::through(circle.center, r1).dist(r2) > TOL {
            return true;
        }
    }

    // Branch 2: exactly three all-critical boundary robots forming a
    // scalene triangle.
    if boundary.len() == 3 && critical.iter().all(|&c| c) {
        let (a, b, c3) = (points[boundary[0]], points[boundary[1]], points[boundary[2]]);
        let (s1, s2, s3) = (a.dist(b), a.dist(c3), b.dist(c3));
        if libm::fabs(s1 - s2) > TOL && libm::fabs(s1 - s3) > TOL && libm::fabs(s2 - s3) > TOL {
            return true;
        }
    }

    // Branch 3: exactly two all-critical boundary robots, a singleton
    // innermost class off both the diameter line and its perpendicular
    // through the center.
    if boundary.len() == 2 && critical.iter().all(|&c| c) && classes[0].members.len() == 1 {
        let r = points[classes[0].members[0]];
        let r1 = points[boundary[0]];
        let r2 = points[boundary[1]];
        let diameter = Line::through(r1, r2);
        let perp = Line { origin: circle.center, dir: diameter.dir.perp() };
        if diameter.dist(r) > TOL && perp.dist(r) > TOL {
            return true;
        }
    }
    false
}

/// Index with the lexicographically smallest min-view among `candidates`.
pub fn min_view_robot(config: &Configuration, candidates: &[usize]) -> Result<usize, AnalysisError> {
    if candidates.is_empty() {
        return Err(AnalysisError::InvalidInput);
    }
    let vs = views(config);
    let mut best = candidates[0];
    for &i in &candidates[1..] {
        if vs[i].min() < vs[best].min() {
            best = i;
        }
    }
    if candidates.iter().any(|&i| i != best && vs[i].min() == vs[best].min()) {
        return Err(AnalysisError::AmbiguousView);
    }
    Ok(best)
}

/// Reflection axes of a point set (all pass through the MEC center).
pub fn reflection_axes(points: &[Point]) -> Vec<Line> {
    if points.len() < 2 {
        return Vec::new();
    }
    let Ok(circle) = mec(points) else { return Vec::new() };
    let c = circle.center;
    let mut candidates: Vec<Point> = Vec::new();
    for &p in points {
        if p.dist(c) > TOL {
            candidates.push((p - c).unit());
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (a, b) = (points[i], points[j]);
            if libm::fabs(a.dist(c) - b.dist(c)) <= TOL {
                let m = a.mid(b);
                let dir = if m.dist(c) > TOL { (m - c).unit() } else { (b - a).unit().perp() };
                candidates.push(dir);
            }
        }
    }
    let mut axes: Vec<Line> = Vec::new();
    'cand: for dir in candidates {
        let axis = Line { origin: c, dir };
        for ax in &axes {
            // Same axis up to direction sign.
            if libm::fabs(ax.dir.cross(dir)) <= TOL {
                continue 'cand;
            }
        }
        if is_reflection_axis(points, &axis) {
            axes.push(axis);
        }
    }
    axes
}

fn is_reflection_axis(points: &[Point], axis: &Line) -> bool {
    points.iter().all(|&p| {
        let refl = reflect_across(p, axis);
        points.iter().any(|&q| q.close_to(refl, 4.0 * TOL))
    })
}

pub fn reflect_across(p: Point, axis: &Line) -> Point {
    let proj = axis.project(p);
    proj + (proj - p)
}

/// Minimal subset of the pattern's MEC boundary points whose circumcircle is
/// the pattern's MEC: scans boundary points in input order, deleting
/// non-critical ones from both the working copy and the result.
pub fn bounding_structure(pattern: &Pattern) -> Vec<usize> {
    let mut work: Vec<(usize, Point)> = pattern.points.iter().copied().enumerate().collect();
    let boundary: Vec<usize> = boundary_robots(&pattern.points);
    let mut bf: Vec<usize> = boundary.clone();
    for j in boundary {
        let pts: Vec<Point> = work.iter().map(|&(_, p)| p).collect();
        let pos = work.iter().position(|&(idx, _)| idx == j).unwrap();
        if !is_critical(&pts, pos).unwrap_or(true) {
            work.remove(pos);
            bf.retain(|&k| k != j);
        }
    }
    bf
}

/// The five predicates of the phase table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSet {
    /// Asymmetric configuration.
    pub a: bool,
    /// Unbreakable symmetry.
    pub u: bool,
    /// All boundary robots critical.
    pub c: bool,
    /// Symmetry safe.
    pub s: bool,
    /// Bounding structure formed.
    pub b: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    One,
    Two,
    Three,
}

impl PredicateSet {
    /// Total and exclusive on all non-`u` configurations.
    pub fn phase(&self) -> Option<Phase> {
        if self.u {
            None
        } else if self.b {
            Some(Phase::Three)
        } else if self.a && self.c {
            Some(Phase::Two)
        } else {
            Some(Phase::One)
        }
    }
}

/// Anchored similarity map used for pattern embeddings: maps `from_a` to
/// `to_a` and `from_b` to `to_b`, optionally mirrored about the anchor axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    from_a: Point,
    to_a: Point,
    /// Rotation+scale as a complex number.
    rot: Point,
    mirror_dir: Option<Point>,
}

impl Similarity {
    pub fn anchored(from_a: Point, from_b: Point, to_a: Point, to_b: Point, mirror: bool) -> Self {
        let u = from_b - from_a;
        let v = to_b - to_a;
        let n2 = u.norm2();
        let rot = Point::new((v.x * u.x + v.y * u.y) / n2, (v.y * u.x - v.x * u.y) / n2);
        Similarity {
            from_a,
            to_a,
            rot,
            mirror_dir: if mirror { Some(u.unit()) } else { None },
        }
    }

    pub fn apply(&self, z: Point) -> Point {
        let mut w = z - self.from_a;
        if let Some(dir) = self.mirror_dir {
            let axis = Line { origin: Point::ZERO, dir };
            w = reflect_across(w, &axis);
        }
        let m = Point::new(
            self.rot.x * w.x - self.rot.y * w.y,
            self.rot.x * w.y + self.rot.y * w.x,
        );
        self.to_a + m
    }

    pub fn scale(&self) -> f64 {
        self.rot.norm()
    }
}

/// Pattern embedded onto a scalene boundary triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleEmbedding {
    /// Embedded pattern points, index-aligned with the pattern.
    pub targets: Vec<Point>,
    /// Diameter of the MEC of the embedded pattern.
    pub diameter: f64,
}

/// Labels of a scalene boundary triangle: `(r1, r2, r3)` with seg(r1, r2)
/// the strictly largest side and `d(r1, r3) < d(r2, r3)`.
pub fn scalene_boundary_labels(points: &[Point]) -> Option<(usize, usize, usize)> {
    let boundary = boundary_robots(points);
    if boundary.len() != 3 {
        return None;
    }
    let (i, j, k) = (boundary[0], boundary[1], boundary[2]);
    let sides = [
        (points[i].dist(points[j]), i, j, k),
        (points[i].dist(points[k]), i, k, j),
        (points[j].dist(points[k]), j, k, i),
    ];
    let mut best = sides[0];
    for s in &sides[1..] {
        if s.0 > best.0 {
            best = *s;
        }
    }
    // Strict largest side and strictly different remaining sides.
    let others: Vec<f64> = sides
        .iter()
        .filter(|s| (s.1, s.2) != (best.1, best.2))
        .map(|s| s.0)
        .collect();
    if others.iter().any(|&l| l > best.0 - TOL) || libm::fabs(others[0] - others[1]) <= TOL {
        return None;
    }
    let (_, mut a, mut b, c) = best;
    if points[a].dist(points[c]) > points[b].dist(points[c]) {
        core::mem::swap(&mut a, &mut b);
    }
    Some((a, b, c))
}

/// Embeds the full pattern by identifying the largest bounding-structure
/// side (ties broken by input index order) with seg(r1, r2); the up-to-four
/// endpoint/mirror choices are tried in a fixed order. Returns the first
/// embedding with r3 inside `B(P_bf3, eps*D)` and every disk `B(P_i, eps*D)`
/// meeting the open enclosure of the robot triangle's circumcircle.
pub fn embed_pattern_on_triangle(
    pattern: &Pattern,
    bf: &[usize],
    r1: Point,
    r2: Point,
    r3: Point,
) -> Option<TriangleEmbedding> {
    if bf.len() != 3 {
        return None;
    }
    let f = &pattern.points;
    let pairs = [(bf[0], bf[1], bf[2]), (bf[0], bf[2], bf[1]), (bf[1], bf[2], bf[0])];
    let mut best_len = f64::NEG_INFINITY;
    let mut chosen = pairs[0];
    for &(a, b, c) in &pairs {
        let l = f[a].dist(f[b]);
        if l > best_len + TOL {
            best_len = l;
            chosen = (a, b, c);
        }
    }
    let (fa, fb, fc) = chosen;
    let cc = circumcircle(&[r1, r2, r3]).ok()?;

    for (ta, tb) in [(r1, r2), (r2, r1)] {
        for mirror in [false, true] {
            let sim = Similarity::anchored(f[fa], f[fb], ta, tb, mirror);
            let targets: Vec<Point> = f.iter().map(|&z| sim.apply(z)).collect();
            let diameter = match mec(&targets) {
                Ok(c) => 2.0 * c.radius,
                Err(_) => continue,
            };
            let eps_d = pattern.epsilon * diameter;
            if r3.dist(targets[fc]) >= eps_d - TOL {
                continue;
            }
            let all_meet = targets.iter().all(|&t| t.dist(cc.center) < cc.radius + eps_d - TOL);
            if all_meet {
                return Some(TriangleEmbedding { targets, diameter });
            }
        }
    }
    None
}

/// Whether the bounding structure of the pattern is formed by the robots.
pub fn bounding_structure_formed(config: &Configuration, pattern: &Pattern) -> bool {
    let bf = bounding_structure(pattern);
    let boundary = boundary_robots(&config.positions);
    match bf.len() {
        2 => boundary.len() == 2 && is_symmetry_safe(config),
        3 => {
            if boundary.len() != 3 || !is_symmetry_safe(config) {
                return false;
            }
            let Some((i1, i2, i3)) = scalene_boundary_labels(&config.positions) else {
                return false;
            };
            embed_pattern_on_triangle(
                pattern,
                &bf,
                config.positions[i1],
                config.positions[i2],
                config.positions[i3],
            )
            .is_some()
        }
        _ => false,
    }
}

/// Evaluates all predicates of the phase table for a configuration.
pub fn predicates(config: &Configuration, pattern: &Pattern) -> PredicateSet {
    let sym = symmetry_type(config);
    let a = sym == SymmetryType::Asymmetric;
    let u = has_unbreakable_symmetry(config);
    let boundary = boundary_robots(&config.positions);
    let c = boundary
        .iter()
        .all(|&i| is_critical(&config.positions, i).unwrap_or(false));
    let s = is_symmetry_safe(config);
    let b = bounding_structure_formed(config, pattern);
    PredicateSet { a, u, c, s, b }
}

/// Circle family center offset of `p` relative to the chord (r1, r2),
/// measured along the normal oriented toward `side`.
pub fn oriented_family_offset(r1: Point, r2: Point, side: Point, p: Point) -> Option<f64> {
    let mid = r1.mid(r2);
    let mut n = (r2 - r1).unit().perp();
    if (side - mid).dot(n) < 0.0 {
        n = -n;
    }
    geometry::family_offset_through(r1, r2, n, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pts: &[(f64, f64)]) -> Configuration {
        Configuration::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    fn square_pattern(eps: f64) -> Pattern {
        Pattern {
            points: alloc::vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            epsilon: eps,
        }
    }

    #[test]
    fn two_robot_views_match() {
        let c = cfg(&[(-1.0, 0.0), (1.0, 0.0)]);
        let vs = views(&c);
        assert_eq!(vs[0].min(), vs[1].min());
    }

    #[test]
    fn scalene_views_distinct() {
        let c = cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 2.0)]);
        let vs = views(&c);
        assert_ne!(vs[0].min(), vs[1].min());
        assert_ne!(vs[0].min(), vs[2].min());
        assert_ne!(vs[1].min(), vs[2].min());
    }

    #[test]
    fn center_robot_gets_zero_view() {
        // (1,0) is the MEC center of the outer pair; put a robot there.
        let c = cfg(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0)]);
        let vs = views(&c);
        assert!(vs[2].cw.iter().all(|&e| e == (0, 0)));
        assert_eq!(vs[2].cw.len(), 4);
    }

    #[test]
    fn symmetry_classification() {
        let eq = cfg(&[(0.0, 0.0), (2.0, 0.0), (1.0, 1.7320508075688772)]);
        assert_eq!(symmetry_type(&eq), SymmetryType::Both);
        let iso = cfg(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)]);
        assert_eq!(symmetry_type(&iso), SymmetryType::Reflection);
        let sc = cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 2.0)]);
        assert_eq!(symmetry_type(&sc), SymmetryType::Asymmetric);
    }

    #[test]
    fn unbreakable_cases() {
        let square = cfg(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!(has_unbreakable_symmetry(&square));
        let e5 = cfg(&[(0.0, -2.0), (0.0, 2.0), (1.0, 0.5), (-1.0, 0.5)]);
        assert!(!has_unbreakable_symmetry(&e5));
        let sc = cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 2.0)]);
        assert!(!has_unbreakable_symmetry(&sc));
    }

    #[test]
    fn symmetry_safe_branches() {
        // Branch 3: two critical boundary robots, unique innermost off both
        // lines.
        assert!(is_symmetry_safe(&cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 1.0)])));
        // Isosceles boundary triangle is not branch 2.
        assert!(!is_symmetry_safe(&cfg(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)])));
        // Innermost class has two robots.
        assert!(!is_symmetry_safe(&cfg(&[(0.0, -2.0), (0.0, 2.0), (1.0, 0.5), (-1.0, 0.5)])));
        // Branch 2: scalene acute all-critical triangle.
        assert!(is_symmetry_safe(&cfg(&[(0.0, 0.0), (4.0, 0.0), (1.5, 3.2)])));
    }

    #[test]
    fn min_view_selection() {
        let c = cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 2.0)]);
        assert_eq!(min_view_robot(&c, &[1]).unwrap(), 1);
        assert!(min_view_robot(&c, &[0, 1, 2]).is_ok());
        let sym = cfg(&[(-1.0, 0.0), (1.0, 0.0), (0.0, 3.0), (0.0, -3.0)]);
        assert_eq!(min_view_robot(&sym, &[0, 1]), Err(AnalysisError::AmbiguousView));
    }

    #[test]
    fn bounding_structure_square() {
        let p = square_pattern(0.1);
        assert_eq!(bounding_structure(&p), alloc::vec![1, 3]);
    }

    #[test]
    fn bounding_structure_two_points_and_triangle() {
        let two = Pattern {
            points: alloc::vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            epsilon: 0.1,
        };
        assert_eq!(bounding_structure(&two), alloc::vec![0, 1]);
        let tri = Pattern {
            points: alloc::vec![
                Point::new(0.0, 0.0),
                Point::new(4.0, 0.0),
                Point::new(1.5, 3.2),
                Point::new(2.0, 1.0),
            ],
            epsilon: 0.05,
        };
        assert_eq!(bounding_structure(&tri), alloc::vec![0, 1, 2]);
    }

    #[test]
    fn predicates_and_phases() {
        let pat = square_pattern(0.1);
        // Branch-3 symmetry safe with 2-point bounding structure: phase 3.
        let p3 = predicates(&cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 1.0)]), &pat);
        assert!(p3.b && !p3.u);
        assert_eq!(p3.phase(), Some(Phase::Three));
        // Isosceles: symmetric, phase 1.
        let p1 = predicates(&cfg(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)]), &pat);
        assert!(!p1.a);
        assert_eq!(p1.phase(), Some(Phase::One));
        // Square corners: unbreakable, no phase.
        let pu = predicates(&cfg(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]), &pat);
        assert!(pu.u);
        assert_eq!(pu.phase(), None);
    }

    #[test]
    fn chirality_zero_iff_reflective() {
        assert_eq!(view_chirality(&cfg(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)])), 0);
        let chi = view_chirality(&cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, 2.0)]));
        assert!(chi == 1 || chi == -1);
        // Mirroring the configuration flips the sign.
        let mirrored = cfg(&[(0.0, 0.0), (4.0, 0.0), (1.0, -2.0)]);
        assert_eq!(view_chirality(&mirrored), -chi);
    }

    #[test]
    fn reflection_axes_found() {
        let e5 = cfg(&[(0.0, -2.0), (0.0, 2.0), (1.0, 0.5), (-1.0, 0.5)]);
        let axes = reflection_axes(&e5.positions);
        assert_eq!(axes.len(), 1);
        assert!(libm::fabs(axes[0].dir.x) <= 1e-9); // vertical axis x = 0
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(reflection_axes(&square).len(), 4);
        let sc = [Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(1.0, 2.0)];
        assert!(reflection_axes(&sc).is_empty());
    }

    #[test]
    fn pattern_validation() {
        assert!(square_pattern(0.1).validate().is_ok());
        // Side 1 < 2*eps*D = 2*0.4*sqrt(2): disks overlap.
        assert!(square_pattern(0.4).validate().is_err());
        let bad = Pattern { points: alloc::vec![Point::new(0.0, 0.0)], epsilon: 0.1 };
        assert!(bad.validate().is_err());
    }
}
