//! Phase 3 (`b`): the bounding structure fixes a common coordinate system;
//! the remaining robots sequentially realize the embedded target points.

use alloc::vec::Vec;

use super::{clear_of_robots, one_step, others, rotation_fan, Ctx, Move, ProtocolError};
use crate::analysis::{
    boundary_robots, bounding_structure, embed_pattern_on_triangle, scalene_boundary_labels,
};
use crate::geometry::{
    concentric_classes, inscribed_disk, mec, segment_dist, Circle, Point, Region, TOL,
};
use crate::motion::{plan_move, Obstacle, StepPlan};

/// Quantization used for lexicographic tie-breaks in the global frame.
const LEX_QUANTUM: f64 = 1e-7;

/// The common coordinate system and target assignment the robots agree on
/// whenever the bounding structure is formed.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetEmbedding {
    /// Origin of the global frame (the enclosing-circle center).
    pub origin: Point,
    /// Global frame axes (unit, orthogonal).
    pub ex: Point,
    pub ey: Point,
    /// Embedded target points, index-aligned with the pattern.
    pub targets: Vec<Point>,
    /// Diameter of the enclosing circle of the targets.
    pub diameter: f64,
    /// Two-point case only: the leader target, its guard circle and the
    /// leader robot (the unique innermost one).
    pub t_l: Option<usize>,
    pub c_l: Option<Circle>,
    pub r_l: Option<usize>,
    /// Per-target realization state and the realizing robot.
    pub realized: Vec<bool>,
    pub realizer: Vec<Option<usize>>,
    /// The current traveler (robot, target), if any target is unrealized.
    pub traveler: Option<(usize, usize)>,
}

impl TargetEmbedding {
    pub fn global(&self, p: Point) -> Point {
        Point::new((p - self.origin).dot(self.ex), (p - self.origin).dot(self.ey))
    }

    fn lex_key(&self, p: Point) -> (i64, i64) {
        let g = self.global(p);
        (libm::round(g.x / LEX_QUANTUM) as i64, libm::round(g.y / LEX_QUANTUM) as i64)
    }

    pub fn eps_d(&self, epsilon: f64) -> f64 {
        epsilon * self.diameter
    }

    pub fn all_realized(&self) -> bool {
        self.realized.iter().all(|&r| r)
    }
}

/// Builds the embedding, realization state and traveler assignment for a
/// configuration in which the bounding structure is formed.
pub fn target_embedding(
    config: &crate::analysis::Configuration,
    pattern: &crate::analysis::Pattern,
) -> Result<TargetEmbedding, ProtocolError> {
    let points = &config.positions;
    let bf = bounding_structure(pattern);
    let boundary = boundary_robots(points);
    let mut emb = match bf.len() {
        2 => two_point_embedding(config, pattern, &bf, &boundary)?,
        3 => three_point_embedding(config, pattern, &bf, &boundary)?,
        _ => return Err(ProtocolError::Internal("bounding structure of unexpected size")),
    };
    realize(&mut emb, points, pattern.epsilon, &bf, &boundary);
    assign_traveler(&mut emb, points);
    Ok(emb)
}

fn two_point_embedding(
    config: &crate::analysis::Configuration,
    pattern: &crate::analysis::Pattern,
    bf: &[usize],
    boundary: &[usize],
) -> Result<TargetEmbedding, ProtocolError> {
    let points = &config.positions;
    if boundary.len() != 2 {
        return Err(ProtocolError::Internal("two-point structure needs two boundary robots"));
    }
    let circle = mec(points)?;
    let c = circle.center;
    let classes = concentric_classes(points)?;
    if classes[0].members.len() != 1 {
        return Err(ProtocolError::Internal("no unique innermost robot"));
    }
    let r_l = classes[0].members[0];
    let rl_pos = points[r_l];
    let rb = points[boundary[0]];

    // Global frame: X along the boundary diameter, signs so the leader
    // robot sits in the open positive quadrant.
    let mut ex = (rb - c).unit();
    if (rl_pos - c).dot(ex) < 0.0 {
        ex = -ex;
    }
    let mut ey = ex.perp();
    if (rl_pos - c).dot(ey) < 0.0 {
        ey = -ey;
    }

    // Canonical pattern coordinates: structure along X, the first pattern
    // point at positive X, reflections chosen so some innermost non-structure
    // point lands in the closed positive quadrant.
    let f = &pattern.points;
    let fc = mec(f)?;
    let d_f = 2.0 * fc.radius;
    let px = (f[bf[0]] - fc.center).unit();
    let py = px.perp();
    let local: Vec<Point> =
        f.iter().map(|&p| Point::new((p - fc.center).dot(px), (p - fc.center).dot(py))).collect();

    let inner_radius = local
        .iter()
        .enumerate()
        .filter(|(i, _)| !bf.contains(i))
        .map(|(_, p)| p.norm())
        .fold(f64::INFINITY, f64::min);
    let inner_set: Vec<usize> = (0..f.len())
        .filter(|i| !bf.contains(i) && local[*i].norm() - inner_radius <= TOL)
        .collect();

    let mut chosen: Option<(f64, f64, usize)> = None;
    'refl: for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        for &i in &inner_set {
            if sx * local[i].x >= -TOL && sy * local[i].y >= -TOL {
                chosen = Some((sx, sy, i));
                break 'refl;
            }
        }
    }
    let (sx, sy, f_l) =
        chosen.ok_or(ProtocolError::Internal("no positive-quadrant innermost point"))?;

    let scale = points[boundary[0]].dist(points[boundary[1]]) / d_f;
    let targets: Vec<Point> = local
        .iter()
        .map(|p| c + ex * (sx * p.x * scale) + ey * (sy * p.y * scale))
        .collect();
    let diameter = 2.0 * circle.radius;

    // Guard circle around the center for the leader robot.
    let t_inner = targets
        .iter()
        .map(|t| t.dist(c))
        .fold(f64::INFINITY, f64::min);
    let eps = pattern.epsilon;
    let c_l = if t_inner <= TOL {
        Circle::new(c, eps * diameter)
    } else if t_inner >= diameter * 0.5 - TOL {
        Circle::new(c, (1.0 - eps) * diameter * 0.5)
    } else {
        Circle::new(c, t_inner)
    };

    Ok(TargetEmbedding {
        origin: c,
        ex,
        ey,
        targets,
        diameter,
        t_l: Some(f_l),
        c_l: Some(c_l),
        r_l: Some(r_l),
        realized: Vec::new(),
        realizer: Vec::new(),
        traveler: None,
    })
}

fn three_point_embedding(
    config: &crate::analysis::Configuration,
    pattern: &crate::analysis::Pattern,
    bf: &[usize],
    boundary: &[usize],
) -> Result<TargetEmbedding, ProtocolError> {
    let points = &config.positions;
    if boundary.len() != 3 {
        return Err(ProtocolError::Internal("three-point structure needs three boundary robots"));
    }
    let (i1, i2, i3) = scalene_boundary_labels(points)
        .ok_or(ProtocolError::Internal("boundary triangle not scalene"))?;
    let emb = embed_pattern_on_triangle(pattern, bf, points[i1], points[i2], points[i3])
        .ok_or(ProtocolError::Internal("structure formed but embedding missing"))?;
    let circle = mec(points)?;
    let c = circle.center;
    let ex = (points[i1] - c).unit();
    let mut ey = ex.perp();
    if (points[i2] - c).dot(ey) < 0.0 {
        ey = -ey;
    }
    Ok(TargetEmbedding {
        origin: c,
        ex,
        ey,
        targets: emb.targets,
        diameter: emb.diameter,
        t_l: None,
        c_l: None,
        r_l: None,
        realized: Vec::new(),
        realizer: Vec::new(),
        traveler: None,
    })
}

/// Marks realized targets: a target is realized by the unique closest robot
/// sitting inside its epsilon-disk, outside the guard circle and inside the
/// enclosing circle. In the three-point case the structure targets are
/// anchored by the boundary robots themselves.
fn realize(emb: &mut TargetEmbedding, points: &[Point], epsilon: f64, bf: &[usize], boundary: &[usize]) {
    let n = emb.targets.len();
    let eps_d = emb.eps_d(epsilon);
    let circle_r = emb.diameter * 0.5;
    emb.realized = alloc::vec![false; n];
    emb.realizer = alloc::vec![None; n];
    for (k, &t) in emb.targets.iter().enumerate() {
        if emb.t_l == Some(k) {
            continue;
        }
        if emb.t_l.is_none() && bf.contains(&k) {
            // Anchored by the boundary robots of the scalene triangle.
            emb.realized[k] = true;
            let anchor = boundary
                .iter()
                .copied()
                .min_by(|&a, &b| points[a].dist(t).partial_cmp(&points[b].dist(t)).unwrap());
            emb.realizer[k] = anchor;
            continue;
        }
        let mut best = f64::INFINITY;
        let mut second = f64::INFINITY;
        let mut who = usize::MAX;
        for (i, &p) in points.iter().enumerate() {
            let d = p.dist(t);
            if d < best {
                second = best;
                best = d;
                who = i;
            } else if d < second {
                second = d;
            }
        }
        if who == usize::MAX || second - best <= TOL {
            continue;
        }
        if emb.r_l == Some(who) {
            continue;
        }
        let p = points[who];
        let in_disk = best < eps_d - TOL;
        let in_mec = p.dist(emb.origin) <= circle_r + TOL;
        let out_guard = emb.c_l.map_or(true, |g| p.dist(g.center) >= g.radius - TOL);
        if in_disk && in_mec && out_guard {
            emb.realized[k] = true;
            emb.realizer[k] = Some(who);
        }
    }
    if let (Some(tl), Some(rl)) = (emb.t_l, emb.r_l) {
        let rest_done = (0..n).filter(|&k| k != tl).all(|k| emb.realized[k]);
        if rest_done {
            let t = emb.targets[tl];
            let p = points[rl];
            let closest = points
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.dist(t).partial_cmp(&b.1.dist(t)).unwrap())
                .map(|(i, _)| i);
            let inside_guard = emb.c_l.map_or(true, |g| p.dist(g.center) < g.radius - TOL);
            if closest == Some(rl) && p.dist(t) < emb.eps_d(epsilon) - TOL && inside_guard {
                emb.realized[tl] = true;
                emb.realizer[tl] = Some(rl);
            }
        }
    }
}

/// Picks the closest (robot, target) pair among the unassigned ones, with
/// the paper's tie-breaks: lexicographically smaller target coordinates in
/// the global frame, then lexicographically smaller robot coordinates.
fn assign_traveler(emb: &mut TargetEmbedding, points: &[Point]) {
    let taken: Vec<usize> = emb.realizer.iter().flatten().copied().collect();
    let free_robots: Vec<usize> = (0..points.len())
        .filter(|i| !taken.contains(i) && emb.r_l != Some(*i))
        .collect();
    let open_targets: Vec<usize> = (0..emb.targets.len())
        .filter(|&k| !emb.realized[k] && emb.t_l != Some(k))
        .collect();
    let mut best: Option<(i64, (i64, i64), (i64, i64), usize, usize)> = None;
    for &r in &free_robots {
        for &t in &open_targets {
            let d = libm::round(points[r].dist(emb.targets[t]) / LEX_QUANTUM) as i64;
            let key = (d, emb.lex_key(emb.targets[t]), emb.lex_key(points[r]), r, t);
            if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some(key);
            }
        }
    }
    emb.traveler = best.map(|(_, _, _, r, t)| (r, t));
}

/// Obstacle disks guarding realized targets and the leader's distance to
/// the center: entering one would unseat a realizer.
fn keep_out_disks(emb: &TargetEmbedding, points: &[Point]) -> Vec<(usize, Circle)> {
    let mut disks = Vec::new();
    for (k, &t) in emb.targets.iter().enumerate() {
        if emb.realized[k] && emb.t_l != Some(k) {
            if let Some(r) = emb.realizer[k] {
                disks.push((k, Circle::new(t, t.dist(points[r]))));
            }
        }
    }
    if let (Some(rl), Some(_)) = (emb.r_l, emb.c_l) {
        disks.push((usize::MAX, Circle::new(emb.origin, emb.origin.dist(points[rl]))));
    }
    disks
}

/// Phase-3 decision; `None` means the configuration is terminal.
pub(super) fn phase3(ctx: &Ctx) -> Result<Option<Move>, ProtocolError> {
    let points = ctx.points();
    let config = ctx.config;
    let emb = target_embedding(config, ctx.pattern)?;
    let eps_d = emb.eps_d(ctx.pattern.epsilon);
    let mec_circle = Circle::new(emb.origin, emb.diameter * 0.5);

    match (emb.t_l, emb.r_l, emb.c_l) {
        (Some(tl), Some(rl), Some(c_l)) => {
            if emb.realized[tl] {
                return Ok(None);
            }
            let rl_pos = points[rl];
            let in_guard = rl_pos.dist(c_l.center) < c_l.radius - TOL;
            if !in_guard {
                // Step 1: the leader robot enters the guard circle.
                let mv = leader_step(ctx, &emb, rl, &c_l, None, "3/case1/step1")?;
                return Ok(Some(mv));
            }
            if emb.traveler.is_some() {
                let mv = traveler_step(ctx, &emb, eps_d, mec_circle, Some(c_l), "3/case1")?;
                return Ok(Some(mv));
            }
            // Step 3: the leader realizes its own target.
            let target_disk = Circle::new(emb.targets[tl], eps_d);
            let mv = leader_step(ctx, &emb, rl, &c_l, Some(target_disk), "3/case1/step3")?;
            Ok(Some(mv))
        }
        _ => {
            if emb.traveler.is_none() {
                return Ok(None);
            }
            let mv = traveler_step(ctx, &emb, eps_d, mec_circle, None, "3/case2")?;
            Ok(Some(mv))
        }
    }
}

/// Leader moves: into the guard circle (step 1) or into its own target disk
/// inside it (step 3), always within the open positive quadrant and closer
/// to the center than every other robot.
fn leader_step(
    ctx: &Ctx,
    emb: &TargetEmbedding,
    rl: usize,
    c_l: &Circle,
    target_disk: Option<Circle>,
    label: &'static str,
) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let plan = if rl == ctx.self_index {
        let x = points[rl];
        let classes = concentric_classes(points)?;
        let second_r = classes
            .iter()
            .map(|c| c.radius)
            .find(|&r| r > x.dist(emb.origin) + TOL)
            .unwrap_or(emb.diameter * 0.5);
        let quadrant = Region::plane()
            .halfplane_through(emb.origin, emb.origin + emb.ex, emb.origin + emb.ex + emb.ey, false)
            .halfplane_through(emb.origin, emb.origin + emb.ey, emb.origin + emb.ex + emb.ey, false);
        let mut corridor = quadrant.clone();
        let mut target = quadrant;
        match target_disk {
            Some(disk) => {
                // Step 3: stay inside the guard circle; land in the disk.
                corridor = corridor.inside_circle(*c_l, false);
                target = target.inside_circle(*c_l, false).inside_circle(disk, false);
            }
            None => {
                // Step 1: stay the unique closest; land in the guard circle.
                corridor = corridor.inside_circle(Circle::new(emb.origin, second_r), false);
                target = target
                    .inside_circle(Circle::new(emb.origin, second_r), false)
                    .inside_circle(*c_l, false);
            }
        }
        let hint = match target_disk {
            Some(disk) => disk.center,
            None => {
                let m = c_l.radius.min(second_r) * 0.5;
                emb.origin + (emb.ex + emb.ey).unit() * m
            }
        };
        let mut obstacles: Vec<Obstacle> =
            others(points, rl).into_iter().map(Obstacle::Point).collect();
        for (_, d) in keep_out_disks(emb, points) {
            if d.radius > TOL && d.center.dist(emb.origin) > TOL {
                obstacles.push(Obstacle::Disk(d));
            }
        }
        let target = clear_of_robots(target, points, rl);
        Some(plan_move(ctx.model, x, &target, Some(&corridor), hint, &obstacles)?)
    } else {
        None
    };
    Ok(Move {
        mover: rl,
        label,
        plan,
        goal: target_disk.map(|d| d.center),
        corridor: None,
    })
}

/// Traveler machinery of step 2: approach an owned target, contract an
/// obstructing realizer, or walk the traveler through the obstacle field.
fn traveler_step(
    ctx: &Ctx,
    emb: &TargetEmbedding,
    eps_d: f64,
    mec_circle: Circle,
    c_l: Option<Circle>,
    label_base: &'static str,
) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let (r, t) = emb.traveler.ok_or(ProtocolError::Internal("traveler missing"))?;
    let x = points[r];
    let t_pos = emb.targets[t];

    let mut region = Region::plane()
        .inside_circle(Circle::new(t_pos, eps_d), false)
        .inside_circle(mec_circle, true);
    if let Some(g) = c_l {
        region = region.outside_circle(g, true);
    }

    // Already in the region but not the unique closest: creep towards the
    // target.
    if region.contains(x) {
        let d_rt = x.dist(t_pos);
        let plan = if r == ctx.self_index {
            let z_region = region.clone().inside_circle(Circle::new(t_pos, d_rt), false);
            let dirs = rotation_fan((t_pos - x).unit(), core::f64::consts::PI / 24.0, 6, ctx.chi, true);
            one_step(ctx.model, x, &dirs, d_rt * 0.5, &z_region, &Region::plane(), &others(points, r))
        } else {
            None
        };
        let label = match label_base {
            "3/case1" => "3/case1/approach",
            _ => "3/case2/approach",
        };
        return Ok(Move { mover: r, label, plan, goal: Some(t_pos), corridor: None });
    }

    // Modified destination: the inscribed disk of the target region.
    let (t_tilde, _l) = inscribed_disk(&region, t_pos).map_err(ProtocolError::from)?;
    let disks = keep_out_disks(emb, points);
    let blocking: Vec<&(usize, Circle)> = disks
        .iter()
        .filter(|(_, d)| d.radius > TOL && segment_dist(d.center, x, t_tilde) <= d.radius + TOL)
        .collect();
    let collinear = blocking
        .iter()
        .any(|(_, d)| segment_dist(d.center, x, t_tilde) <= TOL);

    if !collinear && !blocking.is_empty() {
        {
            // An off-axis realizer disk obstructs: that realizer contracts
            // towards its target. Order by target coordinates.
            let mut order: Vec<&(usize, Circle)> = blocking.clone();
            order.sort_by_key(|(k, _)| {
                if *k == usize::MAX {
                    (i64::MIN, i64::MIN)
                } else {
                    emb.lex_key(emb.targets[*k])
                }
            });
            let &(k, guard) = order[0];
            if k == usize::MAX {
                // The center guard disk blocks: the leader contracts toward
                // the center.
                let rl = emb.r_l.ok_or(ProtocolError::Internal("center disk without leader"))?;
                let mv = contract_step(ctx, emb, rl, emb.origin, guard.radius, c_l, "3/case1/contract")?;
                return Ok(mv);
            }
            let realizer =
                emb.realizer[k].ok_or(ProtocolError::Internal("blocking disk without realizer"))?;
            let label = match label_base {
                "3/case1" => "3/case1/contract",
                _ => "3/case2/contract",
            };
            let mv = contract_step(ctx, emb, realizer, emb.targets[k], guard.radius, c_l, label)?;
            let _ = guard;
            return Ok(mv);
        }
    }

    // Plain (or collinearity-breaking) traveler step.
    let plan = if r == ctx.self_index {
        let corridor = Region::plane().inside_circle(mec_circle, true);
        let mut obstacles: Vec<Obstacle> =
            others(points, r).into_iter().map(Obstacle::Point).collect();
        for (_, d) in &disks {
            if d.radius > TOL {
                obstacles.push(Obstacle::Disk(*d));
            }
        }
        let target = clear_of_robots(region.clone(), points, r);
        Some(plan_move(ctx.model, x, &target, Some(&corridor), t_pos, &obstacles)?)
    } else {
        None
    };
    let label = match label_base {
        "3/case1" => "3/case1/travel",
        _ => "3/case2/travel",
    };
    Ok(Move { mover: r, label, plan, goal: Some(t_pos), corridor: None })
}

/// A realizer (or the leader) steps towards its anchor point, strictly
/// shrinking its guard disk while staying realized.
fn contract_step(
    ctx: &Ctx,
    emb: &TargetEmbedding,
    mover: usize,
    anchor: Point,
    current_r: f64,
    c_l: Option<Circle>,
    label: &'static str,
) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let plan: Option<StepPlan> = if mover == ctx.self_index {
        let x = points[mover];
        let mec_circle = Circle::new(emb.origin, emb.diameter * 0.5);
        let mut z_region = Region::plane()
            .inside_circle(Circle::new(anchor, current_r), false)
            .inside_circle(mec_circle, true);
        if emb.r_l == Some(mover) {
            // The leader stays in its quadrant.
            z_region = z_region
                .halfplane_through(emb.origin, emb.origin + emb.ex, emb.origin + emb.ex + emb.ey, false)
                .halfplane_through(emb.origin, emb.origin + emb.ey, emb.origin + emb.ex + emb.ey, false);
        } else if let Some(g) = c_l {
            z_region = z_region.outside_circle(g, true);
        }
        let dirs = rotation_fan((anchor - x).unit(), core::f64::consts::PI / 24.0, 6, ctx.chi, true);
        one_step(ctx.model, x, &dirs, current_r * 0.5, &z_region, &Region::plane(), &others(points, mover))
    } else {
        None
    };
    Ok(Move { mover, label, plan, goal: Some(anchor), corridor: None })
}
