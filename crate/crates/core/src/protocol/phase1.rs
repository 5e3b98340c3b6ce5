//! Phase 1: break the symmetry (1.1), make the configuration symmetry safe
//! (1.2), then pull non-critical robots off the minimum enclosing circle
//! until only critical ones remain (1.3).

use alloc::vec::Vec;

use super::{largest_gap_bisector, one_step, others, rotation_fan, Ctx, Move, ProtocolError};
use crate::analysis::{
    boundary_robots, min_view_robot, reflection_axes, Configuration,
};
use crate::geometry::{
    concentric_classes, is_critical, largest_enclosing_family_circle, mec, Circle, Line, Point,
    Region, TOL,
};
use crate::motion::StepPlan;

const FAN_STEP: f64 = core::f64::consts::PI / 32.0;
const FAN_COUNT: usize = 15;

/// Subphase 1.1 (`!u && !a`): one designated robot moves once to make the
/// configuration asymmetric.
pub(super) fn subphase_1_1(ctx: &Ctx) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let circle = mec(points)?;

    // Case 1: a robot sits at the center.
    if let Some(mover) = points.iter().position(|p| p.dist(circle.center) <= TOL) {
        let plan = if mover == ctx.self_index {
            center_escape_plan(ctx, mover)?
        } else {
            None
        };
        return Ok(Move { mover, label: "1.1/case1", plan, goal: None, corridor: None });
    }

    // No center robot and not asymmetric: a unique reflection axis with
    // robots on it.
    let axes = reflection_axes(points);
    let axis = *axes.first().ok_or(ProtocolError::Internal("symmetric but no axis"))?;
    let on_axis: Vec<usize> = (0..points.len()).filter(|&i| axis.dist(points[i]) <= TOL).collect();
    if on_axis.is_empty() {
        return Err(ProtocolError::UnbreakableSymmetry);
    }
    let non_critical: Vec<usize> = on_axis
        .iter()
        .copied()
        .filter(|&i| !is_critical(points, i).unwrap_or(true))
        .collect();

    if !non_critical.is_empty() {
        // Case 2: minimum-view non-critical robot on the axis moves inward
        // within its own annulus, off all residual axes.
        let mover = min_view_robot(ctx.config, &non_critical)?;
        let plan = if mover == ctx.self_index {
            annulus_inward_plan(ctx, mover, &axis)?
        } else {
            None
        };
        return Ok(Move { mover, label: "1.1/case2", plan, goal: None, corridor: None });
    }

    let boundary = boundary_robots(points);
    if boundary.len() >= 3 {
        // Case 3: the unique axis robot (on the circle) moves outward,
        // stretching the enclosing circle into a scalene-triangle one.
        if on_axis.len() != 1 {
            return Err(ProtocolError::Internal("case 3 expects one axis robot"));
        }
        let mover = on_axis[0];
        let x = points[mover];
        // The specular pair realizing the maximum angle at the center.
        let mut best_angle = f64::NEG_INFINITY;
        for &i in &boundary {
            if i == mover {
                continue;
            }
            let a = angle_at(circle.center, x, points[i]);
            if a > best_angle {
                best_angle = a;
            }
        }
        let pair: Vec<usize> = boundary
            .iter()
            .copied()
            .filter(|&i| i != mover && angle_at(circle.center, x, points[i]) >= best_angle - 1e-7)
            .collect();
        if pair.len() != 2 {
            return Err(ProtocolError::Internal("case 3 expects a specular pair"));
        }
        let plan = if mover == ctx.self_index {
            scalene_outward_plan(ctx, mover, pair[0], pair[1])?
        } else {
            None
        };
        return Ok(Move { mover, label: "1.1/case3", plan, goal: None, corridor: None });
    }

    // Case 4: exactly two (antipodal) robots on the circle, both on the
    // axis; the minimum-view one escapes outward inside a strip around the
    // axis.
    if on_axis.len() != 2 {
        return Err(ProtocolError::Internal("case 4 expects two axis robots"));
    }
    let mover = min_view_robot(ctx.config, &on_axis)?;
    let other = if on_axis[0] == mover { on_axis[1] } else { on_axis[0] };
    let plan = if mover == ctx.self_index {
        antipodal_escape_plan(ctx, mover, other, &axis)?
    } else {
        None
    };
    Ok(Move { mover, label: "1.1/case4", plan, goal: None, corridor: None })
}

fn angle_at(c: Point, a: Point, b: Point) -> f64 {
    let u = (a - c).unit();
    let v = (b - c).unit();
    libm::acos(u.dot(v).clamp(-1.0, 1.0))
}

/// Case 1 destination: out of the center along the largest empty angular
/// gap, with the whole reach disk inside the smallest nonzero concentric
/// circle, excluding the center and all residual axes.
fn center_escape_plan(ctx: &Ctx, mover: usize) -> Result<Option<StepPlan>, ProtocolError> {
    let points = ctx.points();
    let x = points[mover];
    let classes = concentric_classes(points)?;
    // With the mover at the center, the first nonzero class bounds the move.
    let inner = classes
        .iter()
        .find(|c| c.radius > TOL)
        .ok_or(ProtocolError::Internal("no nonzero class"))?;
    let rest: Vec<Point> = others(points, mover);
    let mut z_region = Region::plane()
        .inside_circle(Circle::new(x, inner.radius), false)
        .avoid_point(x);
    for axis in reflection_axes(&rest) {
        z_region = z_region.avoid_line(axis.origin, axis.dir);
    }
    let (bisector, gap) = largest_gap_bisector(x, &rest);
    let dirs = rotation_fan(bisector, gap / 16.0, 7, ctx.chi, true);
    Ok(one_step(ctx.model, x, &dirs, inner.radius * 0.5, &z_region, &Region::plane(), &rest))
}

/// Case 2 destination: strictly inward within the mover's own annulus, the
/// reach disk clear of every residual axis and the swept cone clear of all
/// robots.
fn annulus_inward_plan(ctx: &Ctx, mover: usize, _axis: &Line) -> Result<Option<StepPlan>, ProtocolError> {
    let points = ctx.points();
    let x = points[mover];
    let circle = mec(points)?;
    let c = circle.center;
    let classes = concentric_classes(points)?;
    let ci = classes
        .iter()
        .position(|cl| cl.members.contains(&mover))
        .ok_or(ProtocolError::Internal("mover not in a class"))?;
    let outer = classes[ci].radius;
    let mut cone_region = Region::plane().inside_circle(Circle::new(c, outer), false);
    let inner = if ci == 0 {
        cone_region = cone_region.avoid_point(c);
        0.0
    } else {
        let r = classes[ci - 1].radius;
        cone_region = cone_region.outside_circle(Circle::new(c, r), false);
        r
    };
    let rest: Vec<Point> = others(points, mover);
    let mut z_region = Region::plane();
    for axis in reflection_axes(&rest) {
        z_region = z_region.avoid_line(axis.origin, axis.dir);
    }
    let inward = (c - x).unit();
    let dirs = rotation_fan(inward, core::f64::consts::PI / 16.0, 7, ctx.chi, true);
    let t0 = ((outer - inner) * 0.25).max(outer * 0.05);
    Ok(one_step(ctx.model, x, &dirs, t0, &z_region, &cone_region, &rest))
}

/// Shared by subphase 1.1 case 3 and the phase-2 scalene maker: the robot at
/// `mover` (equidistant from r1 and r2) moves outward so the new enclosing
/// circle passes through exactly the three of them as a scalene triangle.
pub(super) fn scalene_outward_plan(
    ctx: &Ctx,
    mover: usize,
    i1: usize,
    i2: usize,
) -> Result<Option<StepPlan>, ProtocolError> {
    let points = ctx.points();
    let x = points[mover];
    let r1 = points[i1];
    let r2 = points[i2];
    let circle = mec(points)?;
    let d12 = r1.dist(r2);
    let mid = r1.mid(r2);
    let bisector = Line { origin: mid, dir: (r2 - r1).unit().perp() };

    let mut cone_region = Region::plane()
        .outside_circle(circle, false)
        .halfplane_through(r1, r2, x, false);
    match largest_enclosing_family_circle(r1, r2, points, x) {
        Ok(c_prime) => {
            cone_region = cone_region.inside_circle(c_prime, false);
        }
        Err(crate::geometry::GeometryError::Unbounded) => {}
        Err(e) => return Err(e.into()),
    }
    let z_region = Region::plane()
        .avoid_line(bisector.origin, bisector.dir)
        .strip(r1, r2, bisector.dir)
        .avoid_circle(Circle::new(r1, d12))
        .avoid_circle(Circle::new(r2, d12));

    let rest: Vec<Point> = others(points, mover);
    let outward = (x - circle.center).unit();
    let dirs = rotation_fan(outward, FAN_STEP, FAN_COUNT, ctx.chi, false);
    Ok(one_step(ctx.model, x, &dirs, circle.radius * 0.25, &z_region, &cone_region, &rest))
}

/// Case 4 destination: the minimum-view antipodal robot escapes outward off
/// the axis, within the strip of the nearest perpendicular feet, avoiding
/// the circle around the residual center through the other axis robot.
fn antipodal_escape_plan(
    ctx: &Ctx,
    mover: usize,
    other: usize,
    axis: &Line,
) -> Result<Option<StepPlan>, ProtocolError> {
    let points = ctx.points();
    let a = points[mover];
    let b = points[other];
    let circle = mec(points)?;
    let rest: Vec<Point> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != mover && i != other)
        .map(|(_, &p)| p)
        .collect();
    if rest.is_empty() {
        return Err(ProtocolError::Internal("case 4 needs interior robots"));
    }
    // Feet on the perpendicular of the axis through the mover: for each
    // remaining robot, the line through it perpendicular to its segment
    // towards the other axis robot.
    let n = axis.dir.perp();
    let mut h_min = f64::INFINITY;
    for &r in &rest {
        let w = b - r;
        let denom = n.dot(w);
        if libm::fabs(denom) <= TOL {
            continue;
        }
        let s = (r - a).dot(w) / denom;
        if libm::fabs(s) < h_min {
            h_min = libm::fabs(s);
        }
    }
    if !h_min.is_finite() {
        return Err(ProtocolError::Internal("case 4 found no strip"));
    }
    let p1 = a + n * h_min;
    let p2 = a + n * (-h_min);
    let c_rest = mec(&rest)?.center;

    let cone_region = Region::plane().outside_circle(circle, false);
    let z_region = Region::plane()
        .avoid_line(axis.origin, axis.dir)
        .strip(p1, p2, axis.dir)
        .avoid_circle(Circle::new(c_rest, c_rest.dist(b)));

    let all_others: Vec<Point> = others(points, mover);
    let outward = (a - circle.center).unit();
    let dirs = rotation_fan(outward, FAN_STEP, FAN_COUNT, ctx.chi, false);
    Ok(one_step(
        ctx.model,
        a,
        &dirs,
        (circle.radius * 0.25).min(h_min),
        &z_region,
        &cone_region,
        &all_others,
    ))
}

/// Subphase 1.2 (`a && !s && !c`): make the configuration symmetry safe by
/// singling out unique closest and second-closest robots off a common line.
pub(super) fn subphase_1_2(ctx: &Ctx) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let circle = mec(points)?;

    if let Some(mover) = points.iter().position(|p| p.dist(circle.center) <= TOL) {
        let plan = if mover == ctx.self_index { center_escape_plan(ctx, mover)? } else { None };
        return Ok(Move { mover, label: "1.2/center", plan, goal: None, corridor: None });
    }

    let classes = concentric_classes(points)?;
    if classes[0].members.len() > 1 {
        // No unique closest robot: a non-critical robot of the innermost
        // class moves strictly inside it.
        let candidates: Vec<usize> = classes[0]
            .members
            .iter()
            .copied()
            .filter(|&i| !is_critical(points, i).unwrap_or(true))
            .collect();
        if candidates.is_empty() {
            return Err(ProtocolError::Internal("inner class all critical"));
        }
        let mover = min_view_robot(ctx.config, &candidates)?;
        let plan = if mover == ctx.self_index {
            let x = points[mover];
            let rest: Vec<Point> = others(points, mover);
            let mut z_region = Region::plane()
                .inside_circle(Circle::new(circle.center, classes[0].radius), false)
                .avoid_point(circle.center);
            for axis in reflection_axes(&rest) {
                z_region = z_region.avoid_line(axis.origin, axis.dir);
            }
            let inward = (circle.center - x).unit();
            let dirs = rotation_fan(inward, core::f64::consts::PI / 16.0, 7, ctx.chi, true);
            one_step(ctx.model, x, &dirs, classes[0].radius * 0.5, &z_region, &Region::plane(), &rest)
        } else {
            None
        };
        return Ok(Move { mover, label: "1.2/inner", plan, goal: None, corridor: None });
    }

    // Unique closest robot exists; fix the second class.
    let r_prime = points[classes[0].members[0]];
    if classes.len() < 2 {
        return Err(ProtocolError::Internal("1.2 with a single class"));
    }
    let candidates: Vec<usize> = classes[1]
        .members
        .iter()
        .copied()
        .filter(|&i| !is_critical(points, i).unwrap_or(true))
        .collect();
    if candidates.is_empty() {
        return Err(ProtocolError::Internal("second class all critical"));
    }
    let mover = min_view_robot(ctx.config, &candidates)?;
    let plan = if mover == ctx.self_index {
        let x = points[mover];
        let rest: Vec<Point> = others(points, mover);
        let cone_region = Region::plane()
            .inside_circle(Circle::new(circle.center, classes[1].radius), false)
            .outside_circle(Circle::new(circle.center, classes[0].radius), false);
        let z_region = Region::plane().avoid_line(circle.center, (r_prime - circle.center).unit());
        let inward = (circle.center - x).unit();
        let dirs = rotation_fan(inward, core::f64::consts::PI / 16.0, 7, ctx.chi, true);
        let t0 = (classes[1].radius - classes[0].radius) * 0.25;
        one_step(ctx.model, x, &dirs, t0, &z_region, &cone_region, &rest)
    } else {
        None
    };
    Ok(Move { mover, label: "1.2/second", plan, goal: None, corridor: None })
}

/// Subphase 1.3 (`s && !c`): the minimum-view non-critical boundary robot
/// steps inward into the annulus between the second concentric circle and
/// the enclosing circle, its cone clear of every robot.
pub(super) fn subphase_1_3(ctx: &Ctx) -> Result<Move, ProtocolError> {
    let points = ctx.points();
    let circle = mec(points)?;
    let boundary = boundary_robots(points);
    let candidates: Vec<usize> = boundary
        .iter()
        .copied()
        .filter(|&i| !is_critical(points, i).unwrap_or(true))
        .collect();
    if candidates.is_empty() {
        return Err(ProtocolError::Internal("1.3 without non-critical boundary"));
    }
    let mover = min_view_robot(ctx.config, &candidates)?;
    let plan = if mover == ctx.self_index {
        let classes = concentric_classes(points)?;
        if classes.len() < 2 {
            return Err(ProtocolError::Internal("1.3 with a single class"));
        }
        let x = points[mover];
        let rest: Vec<Point> = others(points, mover);
        let cone_region = Region::plane()
            .inside_circle(circle, false)
            .outside_circle(Circle::new(circle.center, classes[1].radius), false);
        let inward = (circle.center - x).unit();
        let dirs = rotation_fan(inward, core::f64::consts::PI / 16.0, 7, ctx.chi, true);
        let t0 = (circle.radius - classes[1].radius) * 0.25;
        one_step(ctx.model, x, &dirs, t0, &Region::plane(), &cone_region, &rest)
    } else {
        None
    };
    Ok(Move { mover, label: "1.3", plan, goal: None, corridor: None })
}

/// Shared fixer used by phase 2 (cases 2 and 4): make the sub-configuration
/// with boundary pair (r1, r2) and center `o` branch-3 symmetry safe by
/// moving interior robots. Returns `None` when it already is.
pub(super) fn branch3_safety_move(
    ctx: &Ctx,
    exclude: Option<usize>,
    i1: usize,
    i2: usize,
    label: &'static str,
) -> Result<Option<Move>, ProtocolError> {
    let points = ctx.points();
    let r1 = points[i1];
    let r2 = points[i2];
    let o = r1.mid(r2);
    let diameter_line = Line::through(r1, r2);
    let perp = Line { origin: o, dir: diameter_line.dir.perp() };

    // Concentric classes around o, interior robots only.
    let mut interior: Vec<(usize, f64)> = (0..points.len())
        .filter(|&i| i != i1 && i != i2 && Some(i) != exclude)
        .map(|i| (i, points[i].dist(o)))
        .collect();
    if interior.is_empty() {
        return Err(ProtocolError::Internal("no interior robots to make safe"));
    }
    interior.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let innermost_r = interior[0].1;
    let tied: Vec<usize> = interior
        .iter()
        .filter(|&&(_, d)| d - innermost_r <= TOL)
        .map(|&(i, _)| i)
        .collect();

    if tied.len() > 1 {
        // Break the innermost tie: minimum view moves strictly inside.
        let mover = min_view_robot(ctx.config, &tied)?;
        let plan = if mover == ctx.self_index {
            let x = points[mover];
            let rest: Vec<Point> = others(points, mover);
            let z_region = Region::plane()
                .inside_circle(Circle::new(o, innermost_r), false)
                .avoid_point(o)
                .avoid_line(diameter_line.origin, diameter_line.dir)
                .avoid_line(perp.origin, perp.dir);
            let inward = (o - x).unit();
            let dirs = rotation_fan(inward, core::f64::consts::PI / 16.0, 7, ctx.chi, true);
            one_step(ctx.model, x, &dirs, innermost_r * 0.5, &z_region, &Region::plane(), &rest)
        } else {
            None
        };
        return Ok(Some(Move { mover, label, plan, goal: None, corridor: None }));
    }

    let inner_idx = tied[0];
    let inner_pos = points[inner_idx];
    let off_lines = diameter_line.dist(inner_pos) > TOL && perp.dist(inner_pos) > TOL;
    if off_lines {
        return Ok(None);
    }
    // Unique closest but on one of the lines: move it off both while
    // staying strictly the closest.
    let second_r = interior
        .iter()
        .map(|&(_, d)| d)
        .find(|&d| d > innermost_r + TOL)
        .unwrap_or(r1.dist(o));
    let mover = inner_idx;
    let plan = if mover == ctx.self_index {
        let x = points[mover];
        let rest: Vec<Point> = others(points, mover);
        let z_region = Region::plane()
            .inside_circle(Circle::new(o, 0.5 * (innermost_r + second_r)), false)
            .avoid_point(o)
            .avoid_line(diameter_line.origin, diameter_line.dir)
            .avoid_line(perp.origin, perp.dir);
        // Quarter-turn fan off whichever line the robot sits on.
        let base = if diameter_line.dist(x) <= TOL {
            diameter_line.dir.perp()
        } else {
            perp.dir.perp()
        };
        let dirs = rotation_fan(base, core::f64::consts::PI / 16.0, 7, ctx.chi, true);
        let t0 = (second_r - innermost_r).max(innermost_r * 0.25) * 0.5;
        one_step(ctx.model, x, &dirs, t0, &z_region, &Region::plane(), &rest)
    } else {
        None
    };
    Ok(Some(Move { mover, label, plan, goal: None, corridor: None }))
}

/// Convenience for tests: the configuration type used by phase handlers.
#[allow(dead_code)]
pub(super) fn as_config(points: &[Point]) -> Configuration {
    Configuration::new(points.to_vec())
}
