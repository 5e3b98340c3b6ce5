//! Phase 2 (`a && c && !b`): reshape the critical robots on the minimum
//! enclosing circle until the bounding structure of the pattern is formed.

use alloc::vec::Vec;

use super::{clear_of_robots, others, phase1, Ctx, Move, ProtocolError};
use crate::analysis::{
    boundary_robots, bounding_structure, min_view_robot, scalene_boundary_labels, Similarity,
};
use crate::geometry::{
    circumcircle, inscribed_disk, largest_enclosing_family_circle, mec, Circle, GeometryError,
    Line, Point, Region, TOL,
};
use crate::motion::{plan_move, Obstacle};

pub(super) fn phase2(ctx: &Ctx) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let boundary = boundary_robots(points);
    let bf = bounding_structure(ctx.pattern);
    match (boundary.len(), bf.len()) {
        (3, 3) => case1(ctx, &boundary, &bf),
        (3, 2) => case2(ctx, &boundary),
        (2, 3) => case3(ctx, &boundary),
        (2, 2) => case4(ctx, &boundary),
        _ => Err(ProtocolError::Internal("phase 2 with unexpected boundary/structure sizes")),
    }
}

/// Mover for the scalene-making step: the apex between the two equal sides
/// of an isosceles boundary triangle, or the minimum-view boundary robot of
/// an equilateral one.
fn make_scalene(ctx: &Ctx, boundary: &[usize], label: &'static str) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let (i, j, k) = (boundary[0], boundary[1], boundary[2]);
    let apex_of = |v: usize, a: usize, b: usize| {
        libm::fabs(points[v].dist(points[a]) - points[v].dist(points[b])) <= TOL
    };
    let apexes: Vec<usize> = [(i, j, k), (j, i, k), (k, i, j)]
        .iter()
        .filter(|&&(v, a, b)| apex_of(v, a, b))
        .map(|&(v, _, _)| v)
        .collect();
    let mover = if apexes.len() == 1 {
        apexes[0]
    } else {
        min_view_robot(ctx.config, boundary)?
    };
    let (a, b): (usize, usize) = {
        let rest: Vec<usize> = boundary.iter().copied().filter(|&v| v != mover).collect();
        (rest[0], rest[1])
    };
    let plan = if mover == ctx.self_index {
        phase1::scalene_outward_plan(ctx, mover, a, b)?
    } else {
        None
    };
    Ok(Move { mover, label, plan, goal: None, corridor: None })
}

/// Geometry shared by cases 1 and 2: the labeled scalene triangle with its
/// half-planes and circles.
struct TriangleFrame {
    i1: usize,
    i2: usize,
    i3: usize,
    r1: Point,
    r2: Point,
    r3: Point,
    d12: f64,
    mid: Point,
    /// Unit normal of line(r1, r2) towards r3.
    n_up: Point,
    c1: Circle,
    c2: Circle,
    /// Diametral circle of (r1, r2).
    c3: Circle,
}

impl TriangleFrame {
    fn build(points: &[Point]) -> Option<TriangleFrame> {
        let (i1, i2, i3) = scalene_boundary_labels(points)?;
        let (r1, r2, r3) = (points[i1], points[i2], points[i3]);
        let d12 = r1.dist(r2);
        let mid = r1.mid(r2);
        let mut n_up = (r2 - r1).unit().perp();
        if (r3 - mid).dot(n_up) < 0.0 {
            n_up = -n_up;
        }
        Some(TriangleFrame {
            i1,
            i2,
            i3,
            r1,
            r2,
            r3,
            d12,
            mid,
            n_up,
            c1: Circle::new(r1, d12),
            c2: Circle::new(r2, d12),
            c3: Circle::new(mid, d12 * 0.5),
        })
    }

    /// The open corridor the transformer is confined to.
    fn u_blue(&self) -> Region {
        let bis_dir = self.n_up; // the bisector of seg(r1, r2) runs along n_up
        let l1_origin = self.r1;
        Region::plane()
            // H: bisector side containing r3 (and r1).
            .halfplane_through(self.mid, self.mid + bis_dir, self.r1, false)
            // H': beyond the parallel of the bisector through r1, towards mid.
            .halfplane_through(l1_origin, l1_origin + bis_dir, self.mid, false)
            // H'': above line(r1, r2), where r3 lives.
            .halfplane_through(self.r1, self.r2, self.r3, false)
            .inside_circle(self.c1, false)
            .inside_circle(self.c2, false)
            .outside_circle(self.c3, false)
    }

    /// Intersection point of C1 and C2 on r3's side.
    fn peak(&self) -> Point {
        self.mid + self.n_up * (libm::sqrt(3.0) * 0.5 * self.d12)
    }
}

/// Case 1: three boundary robots, three bounding-structure points. Herd the
/// interior robots into the red kernel, then drive the transformer into the
/// epsilon-disk of the embedded third point through the blue corridor.
fn case1(ctx: &Ctx, boundary: &[usize], bf: &[usize]) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let Some(tf) = TriangleFrame::build(points) else {
        return make_scalene(ctx, boundary, "2/case1/scalene");
    };

    let p_target = embed_third_point(ctx, &tf, bf)?;
    let peak = tf.peak();
    let c4 = circumcircle(&[tf.r1, tf.r2, peak])?;
    let u_red = Region::plane().inside_circle(tf.c3, false).inside_circle(c4, false);

    let interior: Vec<usize> =
        (0..points.len()).filter(|i| !boundary.contains(i)).collect();
    let outsiders: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|&i| !u_red.contains(points[i]))
        .collect();

    if !outsiders.is_empty() {
        let hint = tf.mid.mid(peak);
        let (p, _l) = inscribed_disk(&u_red, hint).map_err(ProtocolError::from)?;
        let mover = closest_robot(ctx, &outsiders, p)?;
        let plan = if mover == ctx.self_index {
            let obstacles: Vec<Obstacle> =
                others(points, mover).into_iter().map(Obstacle::Point).collect();
            let target = clear_of_robots(u_red.clone(), points, mover);
            Some(plan_move(ctx.model, points[mover], &target, None, hint, &obstacles)?)
        } else {
            None
        };
        return Ok(Move { mover, label: "2/case1/herd", plan, goal: Some(p), corridor: None });
    }

    // Transformer move towards the embedded third point. Landing anywhere
    // in the epsilon-disk intersected with the corridor satisfies the
    // structure's first condition; if the circumcircle perturbation still
    // fails the disk-meeting condition, the landing disk tightens towards
    // the exact embedding, where it holds with strict margin.
    let mover = tf.i3;
    let eps_d = ctx.pattern.epsilon * embedded_diameter(ctx, &tf, bf)?;
    let u_blue = tf.u_blue();
    let mut radius = eps_d * 0.5;
    let mut target = None;
    for _ in 0..5 {
        let region = u_blue.clone().inside_circle(Circle::new(p_target, radius), false);
        if !region.contains(tf.r3) {
            target = Some(region);
            break;
        }
        radius *= 0.25;
    }
    let Some(target) = target else {
        return Err(ProtocolError::Internal("transformer converged without forming structure"));
    };
    let plan = if mover == ctx.self_index {
        let obstacles: Vec<Obstacle> =
            others(points, mover).into_iter().map(Obstacle::Point).collect();
        let target = clear_of_robots(target, points, mover);
        Some(plan_move(ctx.model, tf.r3, &target, Some(&u_blue), p_target, &obstacles)?)
    } else {
        None
    };
    Ok(Move {
        mover,
        label: "2/case1/transform",
        plan,
        goal: Some(p_target),
        corridor: Some(u_blue),
    })
}

/// Embedding of the third bounding-structure point: the largest structure
/// side (ties by pattern index order) is identified with seg(r1, r2) so the
/// third point lands in the closed bisector half of r3 and strictly on r3's
/// side of line(r1, r2).
fn embed_third_point(ctx: &Ctx, tf: &TriangleFrame, bf: &[usize]) -> Result<Point, ProtocolError> {
    let f = &ctx.pattern.points;
    let (fa, fb, fc) = largest_bf_side(f, bf);
    let bis = Line { origin: tf.mid, dir: tf.n_up };
    let side_of_bis = |p: Point| bis.signed_dist(p) * bis.signed_dist(tf.r3);
    let side_of_line = |p: Point| (p - tf.mid).dot(tf.n_up);
    for (ta, tb) in [(tf.r1, tf.r2), (tf.r2, tf.r1)] {
        for mirror in [false, true] {
            let sim = Similarity::anchored(f[fa], f[fb], ta, tb, mirror);
            let p = sim.apply(f[fc]);
            if side_of_bis(p) >= -TOL && side_of_line(p) > TOL {
                return Ok(p);
            }
        }
    }
    Err(ProtocolError::Internal("no admissible third-point embedding"))
}

fn largest_bf_side(f: &[Point], bf: &[usize]) -> (usize, usize, usize) {
    let pairs = [(bf[0], bf[1], bf[2]), (bf[0], bf[2], bf[1]), (bf[1], bf[2], bf[0])];
    let mut best = pairs[0];
    let mut best_len = f64::NEG_INFINITY;
    for &(a, b, c) in &pairs {
        let l = f[a].dist(f[b]);
        if l > best_len + TOL {
            best_len = l;
            best = (a, b, c);
        }
    }
    best
}

/// Diameter the embedded pattern would have on this triangle.
fn embedded_diameter(ctx: &Ctx, tf: &TriangleFrame, bf: &[usize]) -> Result<f64, ProtocolError> {
    let f = &ctx.pattern.points;
    let (fa, fb, _) = largest_bf_side(f, bf);
    let scale = tf.d12 / f[fa].dist(f[fb]);
    Ok(ctx.pattern.diameter() * scale)
}

/// Case 2: three boundary robots, two structure points. Interior robots are
/// herded into the diametral circle of the base, the sub-configuration
/// without the transformer is made branch-3 safe, then the transformer
/// drops inside, staying outside the innermost circle.
fn case2(ctx: &Ctx, boundary: &[usize]) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let Some(tf) = TriangleFrame::build(points) else {
        return make_scalene(ctx, boundary, "2/case2/scalene");
    };
    let interior: Vec<usize> = (0..points.len()).filter(|i| !boundary.contains(i)).collect();
    if interior.is_empty() {
        return Err(ProtocolError::Internal("case 2 without interior robots"));
    }

    // Step A: herd interior robots into the diametral circle.
    let inside_c3 = Region::plane().inside_circle(tf.c3, false);
    let outsiders: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|&i| !inside_c3.contains(points[i]))
        .collect();
    if !outsiders.is_empty() {
        let mover = closest_robot(ctx, &outsiders, tf.mid)?;
        let plan = if mover == ctx.self_index {
            let obstacles: Vec<Obstacle> =
                others(points, mover).into_iter().map(Obstacle::Point).collect();
            let target = clear_of_robots(inside_c3.clone(), points, mover);
            Some(plan_move(ctx.model, points[mover], &target, None, tf.mid, &obstacles)?)
        } else {
            None
        };
        return Ok(Move { mover, label: "2/case2/herd", plan, goal: Some(tf.mid), corridor: None });
    }

    // Step B: make R minus the transformer branch-3 symmetry safe.
    if let Some(mv) = phase1::branch3_safety_move(ctx, Some(tf.i3), tf.i1, tf.i2, "2/case2/safe")? {
        return Ok(mv);
    }

    // Step C: the transformer drops inside the diametral circle, staying
    // strictly outside the innermost circle of the remaining robots.
    let inner_r = interior
        .iter()
        .map(|&i| points[i].dist(tf.mid))
        .fold(f64::INFINITY, f64::min);
    let inner_circle = Circle::new(tf.mid, inner_r);
    let corridor = tf.u_blue_without_c3().outside_circle(inner_circle, false);
    let target = corridor.clone().inside_circle(tf.c3, false);
    let mover = tf.i3;
    let hint = tf.mid + (tf.r3 - tf.mid).unit() * (0.5 * (inner_r + tf.d12 * 0.5));
    let plan = if mover == ctx.self_index {
        let obstacles: Vec<Obstacle> =
            others(points, mover).into_iter().map(Obstacle::Point).collect();
        let target = clear_of_robots(target, points, mover);
        Some(plan_move(ctx.model, tf.r3, &target, Some(&corridor), hint, &obstacles)?)
    } else {
        None
    };
    Ok(Move {
        mover,
        label: "2/case2/transform",
        plan,
        goal: Some(hint),
        corridor: Some(corridor),
    })
}

impl TriangleFrame {
    /// The blue corridor with the diametral-circle exclusion lifted (case 2
    /// lets the transformer enter it).
    fn u_blue_without_c3(&self) -> Region {
        let bis_dir = self.n_up;
        Region::plane()
            .halfplane_through(self.mid, self.mid + bis_dir, self.r1, false)
            .halfplane_through(self.r1, self.r1 + bis_dir, self.mid, false)
            .halfplane_through(self.r1, self.r2, self.r3, false)
            .inside_circle(self.c1, false)
            .inside_circle(self.c2, false)
    }
}

/// Case 3: two boundary robots, three structure points. The farthest
/// interior robot climbs out of the enclosing circle into the blue sliver
/// between the old circle and the largest enclosing family circle.
fn case3(ctx: &Ctx, boundary: &[usize]) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let circle = mec(points)?;
    let c = circle.center;
    let interior: Vec<usize> = (0..points.len()).filter(|i| !boundary.contains(i)).collect();
    if interior.is_empty() {
        return Err(ProtocolError::Internal("case 3 without interior robots"));
    }
    let far = interior.iter().map(|&i| points[i].dist(c)).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> =
        interior.iter().copied().filter(|&i| far - points[i].dist(c) <= TOL).collect();
    let mover = if tied.len() == 1 { tied[0] } else { min_view_robot(ctx.config, &tied)? };
    let x = points[mover];

    // Label the boundary pair so the mover sits in r1's half strip.
    let (mut b1, mut b2) = (boundary[0], boundary[1]);
    let d1 = x.dist(points[b1]);
    let d2 = x.dist(points[b2]);
    if libm::fabs(d1 - d2) <= TOL {
        // On the bisector: lower min-view endpoint becomes r1.
        let mv = min_view_robot(ctx.config, &[b1, b2])?;
        if mv != b1 {
            core::mem::swap(&mut b1, &mut b2);
        }
    } else if d1 > d2 {
        core::mem::swap(&mut b1, &mut b2);
    }
    let (r1, r2) = (points[b1], points[b2]);
    let d12 = r1.dist(r2);
    let mid = r1.mid(r2);

    // Half-plane side: the mover's side of line(r1, r2); if it sits on the
    // line, the side of the minimum-view off-line robot.
    let line12 = Line::through(r1, r2);
    let side_ref = if line12.dist(x) > TOL {
        x
    } else {
        let off_line: Vec<usize> = (0..points.len())
            .filter(|&i| line12.dist(points[i]) > TOL)
            .collect();
        let w = min_view_robot(ctx.config, &off_line)?;
        points[w]
    };
    let mut n_up = (r2 - r1).unit().perp();
    if (side_ref - mid).dot(n_up) < 0.0 {
        n_up = -n_up;
    }

    let c1 = Circle::new(r1, d12);
    let c2 = Circle::new(r2, d12);
    let c3 = circle; // CC(r1, r2) is the enclosing circle here
    let c4 = match largest_enclosing_family_circle(r1, r2, points, mid + n_up) {
        Ok(c) => Some(c),
        Err(GeometryError::Unbounded) => None,
        Err(e) => return Err(e.into()),
    };

    let mut target = Region::plane()
        .inside_circle(c1, false)
        .inside_circle(c2, false)
        .outside_circle(c3, false)
        .halfplane_through(r1, r2, mid + n_up, false)
        .strip(r1, mid, n_up);
    if let Some(c4) = c4 {
        target = target.inside_circle(c4, false);
    }

    // Hint on the family circle midway between the old circle and the cap.
    let h = d12 * 0.5;
    let t_star = h / libm::sqrt(3.0);
    let t4 = c4.map(|c| (c.center - mid).dot(n_up));
    let t_mid = 0.5 * t4.map_or(t_star, |t| t.min(t_star));
    let rad_mid = libm::hypot(h, t_mid);
    let along = (r1 - mid).dot((r2 - r1).unit()) * 0.5; // -h/2 towards r1
    let dir12 = (r2 - r1).unit();
    let hint0 = mid + dir12 * along + n_up * (t_mid + libm::sqrt((rad_mid * rad_mid - along * along).max(0.0)));
    let hint = if target.contains(hint0) {
        hint0
    } else {
        // Fall back over a small deterministic candidate ladder.
        let mut found = hint0;
        'out: for k in 1..6 {
            let t = t_mid / (1 << k) as f64;
            let r = libm::hypot(h, t);
            for frac in [-0.5, -0.25, -0.75] {
                let a = h * frac;
                let cand = mid + dir12 * a + n_up * (t + libm::sqrt((r * r - a * a).max(0.0)));
                if target.contains(cand) {
                    found = cand;
                    break 'out;
                }
            }
        }
        found
    };

    let mut corridor = Region::plane()
        .inside_circle(c1, false)
        .inside_circle(c2, false)
        .halfplane_through(r1, r2, mid + n_up, false)
        .strip(r1, mid, n_up);
    if let Some(c4) = c4 {
        corridor = corridor.inside_circle(c4, true);
    }

    let plan = if mover == ctx.self_index {
        let obstacles: Vec<Obstacle> =
            others(points, mover).into_iter().map(Obstacle::Point).collect();
        let target = clear_of_robots(target, points, mover);
        Some(plan_move(ctx.model, x, &target, Some(&corridor), hint, &obstacles)?)
    } else {
        None
    };
    Ok(Move {
        mover,
        label: "2/case3/transform",
        plan,
        goal: Some(hint),
        corridor: Some(corridor),
    })
}

/// Case 4: two boundary robots, two structure points: just make the
/// configuration branch-3 symmetry safe.
fn case4(ctx: &Ctx, boundary: &[usize]) -> Result<Move, ProtocolError> {
    match phase1::branch3_safety_move(ctx, None, boundary[0], boundary[1], "2/case4/safe")? {
        Some(mv) => Ok(mv),
        None => Err(ProtocolError::Internal("case 4 entered while already safe")),
    }
}

/// Robot among `candidates` closest to `p`; ties by minimum view.
fn closest_robot(ctx: &Ctx, candidates: &[usize], p: Point) -> Result<usize, ProtocolError> {
    let points = ctx.points();
    let best = candidates
        .iter()
        .map(|&i| points[i].dist(p))
        .fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| points[i].dist(p) - best <= TOL)
        .collect();
    if tied.len() == 1 {
        Ok(tied[0])
    } else {
        Ok(min_view_robot(ctx.config, &tied)?)
    }
}
