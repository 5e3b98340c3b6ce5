//! Independent oracles, deliberately implemented by brute force and kept
//! apart from the code paths they certify.

use alloc::vec::Vec;

use crate::analysis::{Configuration, Pattern, Similarity};
use crate::geometry::{circumcircle, diametral_circle, mec, Circle, Point, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyError {
    InvalidInput,
}

impl core::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid input")
    }
}

/// Minimum enclosing circle by exhaustion over all diameter pairs and all
/// circumscribed triples.
pub fn mec_brute(points: &[Point]) -> Result<Circle, VerifyError> {
    if points.is_empty() {
        return Err(VerifyError::InvalidInput);
    }
    if points.len() == 1 {
        return Ok(Circle::new(points[0], 0.0));
    }
    let mut best: Option<Circle> = None;
    let mut consider = |c: Circle| {
        if points.iter().all(|&p| c.contains_closed(p))
            && best.is_none_or(|b| c.radius < b.radius)
        {
            best = Some(c);
        }
    };
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            consider(diametral_circle(points[i], points[j]));
            for k in j + 1..points.len() {
                if let Ok(c) = circumcircle(&[points[i], points[j], points[k]]) {
                    consider(c);
                }
            }
        }
    }
    best.ok_or(VerifyError::InvalidInput)
}

/// Non-identity isometries of a configuration: rotation angles about the MEC
/// center and reflection axis directions through it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymmetryGroup {
    pub rotations: Vec<f64>,
    pub axis_dirs: Vec<Point>,
}

impl SymmetryGroup {
    pub fn is_trivial(&self) -> bool {
        self.rotations.is_empty() && self.axis_dirs.is_empty()
    }
}

/// Brute-force symmetry detection: every candidate rotation (angle between a
/// pair of robots equidistant from the center) and every candidate axis
/// (through the center and a robot, or a same-radius pair midpoint) is
/// verified by mapping the point set onto itself within tolerance.
pub fn brute_symmetry(config: &Configuration) -> SymmetryGroup {
    let points = &config.positions;
    let mut group = SymmetryGroup::default();
    let Ok(circle) = mec(points) else { return group };
    let c = circle.center;
    let maps_onto = |f: &dyn Fn(Point) -> Point| {
        points.iter().all(|&p| points.iter().any(|&q| q.close_to(f(p), 16.0 * TOL)))
    };

    let mut angles: Vec<f64> = Vec::new();
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i == j {
                continue;
            }
            let (u, v) = (points[i] - c, points[j] - c);
            if u.norm() <= TOL || libm::fabs(u.norm() - v.norm()) > TOL {
                continue;
            }
            let mut a = libm::atan2(u.cross(v), u.dot(v));
            if a < 0.0 {
                a += 2.0 * core::f64::consts::PI;
            }
            if a > 1e-7 && !angles.iter().any(|&b| libm::fabs(b - a) <= 1e-9) {
                angles.push(a);
            }
        }
    }
    for a in angles {
        let rot = move |p: Point| c + (p - c).rotate(a);
        if maps_onto(&rot) {
            group.rotations.push(a);
        }
    }
    group.rotations.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut dirs: Vec<Point> = Vec::new();
    let mut push_dir = |d: Point| {
        if d.norm() > TOL && !dirs.iter().any(|&e| libm::fabs(e.cross(d.unit())) <= 1e-9) {
            dirs.push(d.unit());
        }
    };
    for &p in points.iter() {
        push_dir(p - c);
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if libm::fabs(points[i].dist(c) - points[j].dist(c)) <= TOL {
                let m = points[i].mid(points[j]);
                if m.dist(c) > TOL {
                    push_dir(m - c);
                } else {
                    push_dir((points[j] - points[i]).perp());
                }
            }
        }
    }
    for d in dirs {
        let refl = move |p: Point| {
            let w = p - c;
            let along = d * w.dot(d);
            c + along + (along - w)
        };
        if maps_onto(&refl) {
            group.axis_dirs.push(d);
        }
    }
    group
}

/// Certified epsilon-closeness: searches anchored similarity embeddings of
/// the pattern over all ordered pattern/robot point pairs and both
/// orientations. Disjointness of the embedded disks forces the matching, so
/// an embedding is accepted iff every disk holds exactly one robot. A
/// least-squares similarity refit of the matched correspondence is also
/// tried. Any returned embedding is re-verified before being returned.
pub fn epsilon_close(config: &Configuration, pattern: &Pattern) -> Option<Vec<Point>> {
    if config.len() != pattern.points.len() {
        return None;
    }
    let robots = &config.positions;
    let f = &pattern.points;
    let n = f.len();
    for i in 0..n {
        for j in 0..n {
            if i == j || f[i].dist(f[j]) <= TOL {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    if k == l {
                        continue;
                    }
                    for mirror in [false, true] {
                        let sim = Similarity::anchored(f[i], f[j], robots[k], robots[l], mirror);
                        if sim.scale() <= TOL {
                            continue;
                        }
                        let embedding: Vec<Point> = f.iter().map(|&z| sim.apply(z)).collect();
                        if let Some(matched) = check_embedding(robots, &embedding, pattern.epsilon)
                        {
                            if let Some(refined) =
                                refit_embedding(robots, f, &embedding, &matched, pattern.epsilon)
                            {
                                return Some(refined);
                            }
                            return Some(embedding);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Whether every disk `B(p_m, eps*diam)` holds exactly one robot; returns
/// the robot index matched to each embedded point.
fn check_embedding(robots: &[Point], embedding: &[Point], eps: f64) -> Option<Vec<usize>> {
    let diam = 2.0 * mec(embedding).ok()?.radius;
    if diam <= TOL {
        return None;
    }
    let limit = eps * diam + TOL;
    let mut used = alloc::vec![false; robots.len()];
    let mut matched = Vec::with_capacity(embedding.len());
    for &p in embedding {
        let mut found: Option<usize> = None;
        for (r, &pos) in robots.iter().enumerate() {
            if pos.dist(p) <= limit {
                if found.is_some() || used[r] {
                    return None;
                }
                found = Some(r);
            }
        }
        let r = found?;
        used[r] = true;
        matched.push(r);
    }
    Some(matched)
}

/// Least-squares similarity (with reflection fixed by the seed embedding)
/// over the matched correspondence; returns the refit embedding only if it
/// still satisfies every disk constraint.
fn refit_embedding(
    robots: &[Point],
    f: &[Point],
    seed: &[Point],
    matched: &[usize],
    eps: f64,
) -> Option<Vec<Point>> {
    // Orientation of the seed embedding relative to the pattern.
    let orient = {
        let (a, b, c) = (f[0], f[1], f[f.len() - 1]);
        let s = (b - a).cross(c - a);
        let t = (seed[1] - seed[0]).cross(seed[f.len() - 1] - seed[0]);
        if s * t < 0.0 {
            -1.0
        } else {
            1.0
        }
    };
    let src: Vec<Point> = f
        .iter()
        .map(|&p| if orient < 0.0 { Point::new(p.x, -p.y) } else { p })
        .collect();
    let dst: Vec<Point> = matched.iter().map(|&r| robots[r]).collect();
    let n = src.len() as f64;
    let mut sc = Point::ZERO;
    let mut dc = Point::ZERO;
    for (&s, &d) in src.iter().zip(&dst) {
        sc = sc + s;
        dc = dc + d;
    }
    sc = sc * (1.0 / n);
    dc = dc * (1.0 / n);
    // Complex least squares: m = sum(d * conj(s)) / sum(|s|^2).
    let mut num = Point::ZERO;
    let mut den = 0.0;
    for (&s, &d) in src.iter().zip(&dst) {
        let sv = s - sc;
        let dv = d - dc;
        num = num + Point::new(dv.x * sv.x + dv.y * sv.y, dv.y * sv.x - dv.x * sv.y);
        den += sv.norm2();
    }
    if den <= TOL {
        return None;
    }
    let m = num * (1.0 / den);
    let refined: Vec<Point> = src
        .iter()
        .map(|&s| {
            let v = s - sc;
            dc + Point::new(m.x * v.x - m.y * v.y, m.x * v.y + m.y * v.x)
        })
        .collect();
    let check = check_embedding(robots, &refined, eps)?;
    // The refit must preserve the original matching for soundness.
    if check == matched { Some(refined) } else { None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{symmetry_type, SymmetryType};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn brute_mec_matches_examples() {
        let c = mec_brute(&[p(0.0, 0.0), p(2.0, 0.0)]).unwrap();
        assert!(c.center.close_to(p(1.0, 0.0), TOL) && (c.radius - 1.0).abs() <= TOL);
        let c = mec_brute(&[p(0.0, 0.0), p(2.0, 0.0), p(1.0, 1.0)]).unwrap();
        assert!(c.center.close_to(p(1.0, 0.0), TOL) && (c.radius - 1.0).abs() <= TOL);
        let c = mec_brute(&[p(0.0, 0.0), p(4.0, 0.0), p(2.0, 3.0)]).unwrap();
        assert!(c.center.close_to(p(2.0, 5.0 / 6.0), 1e-9));
        assert!((c.radius - 13.0 / 6.0).abs() <= 1e-9);
    }

    #[test]
    fn square_symmetries() {
        let sq = Configuration::new(alloc::vec![
            p(0.0, 0.0),
            p(1.0, 0.0),
            p(1.0, 1.0),
            p(0.0, 1.0)
        ]);
        let g = brute_symmetry(&sq);
        assert_eq!(g.rotations.len(), 3); // 90, 180, 270 degrees
        assert_eq!(g.axis_dirs.len(), 4);
        assert_eq!(symmetry_type(&sq), SymmetryType::Both);
    }

    #[test]
    fn scalene_is_trivial() {
        let sc = Configuration::new(alloc::vec![p(0.0, 0.0), p(4.0, 0.0), p(1.0, 2.0)]);
        assert!(brute_symmetry(&sc).is_trivial());
    }

    #[test]
    fn e5_has_exactly_one_axis() {
        let e5 = Configuration::new(alloc::vec![
            p(0.0, -2.0),
            p(0.0, 2.0),
            p(1.0, 0.5),
            p(-1.0, 0.5)
        ]);
        let g = brute_symmetry(&e5);
        assert!(g.rotations.is_empty());
        assert_eq!(g.axis_dirs.len(), 1);
        assert!(libm::fabs(g.axis_dirs[0].x) <= 1e-9);
    }

    fn square_pattern() -> Pattern {
        Pattern {
            points: alloc::vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
            epsilon: 0.1,
        }
    }

    #[test]
    fn exact_copy_is_close() {
        let pat = square_pattern();
        let sim = Similarity::anchored(p(0.0, 0.0), p(1.0, 0.0), p(5.0, 5.0), p(6.4, 6.4), false);
        let cfg = Configuration::new(pat.points.iter().map(|&z| sim.apply(z)).collect());
        assert!(epsilon_close(&cfg, &pat).is_some());
    }

    #[test]
    fn perturbed_copy_is_close() {
        let pat = square_pattern();
        let diam = pat.diameter();
        let bump = 0.4 * pat.epsilon * diam;
        let offsets = [p(bump, 0.0), p(0.0, -bump), p(-bump, 0.0), p(0.0, bump)];
        let cfg = Configuration::new(
            pat.points.iter().zip(offsets).map(|(&z, o)| z + o).collect(),
        );
        let emb = epsilon_close(&cfg, &pat).unwrap();
        let d = 2.0 * mec(&emb).unwrap().radius;
        for (r, e) in cfg.positions.iter().zip(&emb) {
            assert!(r.dist(*e) <= pat.epsilon * d + TOL);
        }
    }

    #[test]
    fn displaced_robot_is_not_close() {
        let pat = square_pattern();
        let diam = pat.diameter();
        let mut pts = pat.points.clone();
        pts[2] = pts[2] + p(3.0 * pat.epsilon * diam, 0.0);
        let cfg = Configuration::new(pts);
        assert!(epsilon_close(&cfg, &pat).is_none());
    }
}
