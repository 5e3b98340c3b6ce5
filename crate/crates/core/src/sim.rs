//! Execution engines: round-based FSYNC/SSYNC and event-based ASYNC with
//! the two-light wrapper. Each activation observes through a fresh random
//! frame (rotation, optional reflection, origin at the robot — no agreement
//! beyond the unit of distance). Runtime monitors check sequentiality,
//! collision freedom, reach-disk containment, structure persistence and the
//! per-phase lemma postconditions on every realized move.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    boundary_robots, bounding_structure_formed, has_unbreakable_symmetry,
    scalene_boundary_labels, symmetry_type, Configuration, Light, Pattern, SymmetryType,
};
use crate::geometry::{segment_dist, Circle, Constraint, Point, Region, TOL};
use crate::motion::{sample_error, ErrorContext, ErrorPolicy, MovementModel};
use crate::protocol::{compute, fcom_compute, is_terminal, Decision, ProtocolError, Snapshot};
use crate::verify::epsilon_close;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsyncPolicy {
    /// Every robot every round (FSYNC behavior).
    All,
    /// Rotating subsets; every robot at least once every n rounds.
    RoundRobinSubsets,
    /// Random subsets with every robot activated at least once every k
    /// rounds.
    AdversarialDelay(u32),
}

/// Per-phase delay bounds (inclusive, in ticks) of the asynchronous
/// adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsyncDelays {
    pub compute: (u64, u64),
    pub movement: (u64, u64),
    pub idle: (u64, u64),
    /// Deliberately co-schedule Looks at move boundaries.
    pub rush: bool,
}

impl Default for AsyncDelays {
    fn default() -> Self {
        AsyncDelays { compute: (1, 5), movement: (1, 7), idle: (1, 9), rush: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    Fsync,
    Ssync(SsyncPolicy),
    Async(AsyncDelays),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheduler: Scheduler,
    pub error_policy: ErrorPolicy,
    pub seed: u64,
    /// Separate stream for frame randomness so frame independence can be
    /// tested in isolation; derived from `seed` when absent.
    pub frame_seed: Option<u64>,
    pub max_rounds: u64,
    pub max_ticks: u64,
}

impl SimConfig {
    pub fn new(scheduler: Scheduler, error_policy: ErrorPolicy, seed: u64) -> Self {
        SimConfig {
            scheduler,
            error_policy,
            seed,
            frame_seed: None,
            max_rounds: 100_000,
            max_ticks: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Look,
    Decide,
    MoveStart,
    MoveEnd,
    LightSet,
    MonitorViolation,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Payload {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intended: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realized: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reach: Option<Circle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub light: Option<Light>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Point>>,
}

/// One line of the chronological event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: u64,
    pub robot: Option<u32>,
    pub kind: EventKind,
    #[serde(default)]
    pub payload: Payload,
}

pub type Trace = Vec<TraceEvent>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Terminated,
    MaxStepsExceeded,
    UnbreakableSymmetry,
    MonitorViolation,
    DecisionError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub terminated: bool,
    /// Rounds (synchronous) or ticks (asynchronous) consumed.
    pub steps: u64,
    pub final_positions: Vec<Point>,
    /// Present when the run terminated: the independent closeness verdict.
    pub epsilon_close: Option<bool>,
    pub violations: Vec<String>,
    /// Largest number of simultaneously moving robots observed.
    pub max_concurrent_moves: u32,
    /// Largest number of moving robots with a busy light (asynchronous).
    pub max_busy_moving: u32,
    pub notes: Vec<String>,
}

impl RunReport {
    fn fresh(initial: &Configuration) -> Self {
        RunReport {
            outcome: Outcome::MaxStepsExceeded,
            terminated: false,
            steps: 0,
            final_positions: initial.positions.clone(),
            epsilon_close: None,
            violations: Vec::new(),
            max_concurrent_moves: 0,
            max_busy_moving: 0,
            notes: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// A per-activation local frame: origin at the robot, random rotation,
/// random handedness, common unit of distance.
#[derive(Debug, Clone, Copy)]
struct Frame {
    origin: Point,
    cos: f64,
    sin: f64,
    mirror: bool,
}

impl Frame {
    fn sample<R: Rng>(origin: Point, rng: &mut R) -> Frame {
        let theta: f64 = rng.gen::<f64>() * 2.0 * core::f64::consts::PI;
        let mirror: bool = rng.gen();
        Frame { origin, cos: libm::cos(theta), sin: libm::sin(theta), mirror }
    }

    fn world_to_local(&self, p: Point) -> Point {
        let v = p - self.origin;
        let r = Point::new(self.cos * v.x + self.sin * v.y, -self.sin * v.x + self.cos * v.y);
        if self.mirror {
            Point::new(r.x, -r.y)
        } else {
            r
        }
    }

    fn dir_to_world(&self, d: Point) -> Point {
        let d = if self.mirror { Point::new(d.x, -d.y) } else { d };
        Point::new(self.cos * d.x - self.sin * d.y, self.sin * d.x + self.cos * d.y)
    }

    fn local_to_world(&self, p: Point) -> Point {
        self.origin + self.dir_to_world(p)
    }

    fn circle_to_world(&self, c: Circle) -> Circle {
        Circle::new(self.local_to_world(c.center), c.radius)
    }

    fn region_to_world(&self, r: &Region) -> Region {
        Region {
            constraints: r
                .constraints
                .iter()
                .map(|c| match *c {
                    Constraint::InsideCircle { circle, closed } => {
                        Constraint::InsideCircle { circle: self.circle_to_world(circle), closed }
                    }
                    Constraint::OutsideCircle { circle, closed } => {
                        Constraint::OutsideCircle { circle: self.circle_to_world(circle), closed }
                    }
                    Constraint::HalfPlane { origin, normal, closed } => Constraint::HalfPlane {
                        origin: self.local_to_world(origin),
                        normal: self.dir_to_world(normal),
                        closed,
                    },
                    Constraint::Strip { origin, normal, width } => Constraint::Strip {
                        origin: self.local_to_world(origin),
                        normal: self.dir_to_world(normal),
                        width,
                    },
                    Constraint::AvoidLine { origin, dir } => Constraint::AvoidLine {
                        origin: self.local_to_world(origin),
                        dir: self.dir_to_world(dir),
                    },
                    Constraint::AvoidCircle { circle } => {
                        Constraint::AvoidCircle { circle: self.circle_to_world(circle) }
                    }
                    Constraint::AvoidPoint { point } => {
                        Constraint::AvoidPoint { point: self.local_to_world(point) }
                    }
                })
                .collect(),
        }
    }

    fn decision_to_world(&self, d: Decision) -> Decision {
        Decision {
            move_to: d.move_to.map(|p| self.local_to_world(p)),
            reach: d.reach.map(|c| self.circle_to_world(c)),
            goal: d.goal.map(|p| self.local_to_world(p)),
            corridor: d.corridor.map(|r| self.region_to_world(&r)),
            light: d.light,
            phase_label: d.phase_label,
        }
    }
}

// ---------------------------------------------------------------------------
// Monitors
// ---------------------------------------------------------------------------

struct MonitorState {
    b_reached: bool,
}

impl MonitorState {
    fn new() -> Self {
        MonitorState { b_reached: false }
    }

    /// Checks an executed move; returns monitor violations as strings.
    fn check_move(
        &mut self,
        positions_before: &[Point],
        mover: usize,
        decision: &Decision,
        realized: Point,
        pattern: &Pattern,
        model: &MovementModel,
    ) -> Vec<String> {
        let mut v = Vec::new();
        let from = positions_before[mover];
        let intended = decision.move_to.expect("moving decision carries a destination");

        // m3: the realized point lies strictly inside the reach disk,
        // recomputed from the same world coordinates the sampler saw.
        match model.reachable_set(from, intended) {
            Ok(reach) => {
                if realized.dist(reach.center) >= reach.radius {
                    v.push(format!(
                        "m3: realized point left the reach disk by {}",
                        realized.dist(reach.center) - reach.radius
                    ));
                }
            }
            Err(e) => v.push(format!("m3: degenerate move geometry: {e}")),
        }

        // m2: the swept segment stays clear of every other robot.
        for (i, &p) in positions_before.iter().enumerate() {
            if i == mover {
                continue;
            }
            if segment_dist(p, from, realized) <= TOL {
                v.push(format!("m2: move of robot {mover} swept within TOL of robot {i}"));
            }
        }

        // m4/m5 operate on the realized configuration.
        let mut after = positions_before.to_vec();
        after[mover] = realized;
        let cfg = Configuration::new(after.clone());
        let label = decision.phase_label.as_str();

        if label.starts_with("1.1/") && symmetry_type(&cfg) != SymmetryType::Asymmetric {
            v.push(format!("m5: {label} did not produce an asymmetric configuration"));
        }
        if (label == "1.1/case3" || label.ends_with("/scalene"))
            && scalene_boundary_labels(&after).is_none()
        {
            v.push(format!("m5: {label} did not produce a scalene boundary triangle"));
        }
        if label == "1.1/case4" && boundary_robots(&after).len() != 2 {
            v.push(String::from("m5: 1.1/case4 did not leave two boundary robots"));
        }
        if label == "2/case1/transform" {
            match scalene_boundary_labels(&after) {
                Some((_, _, r3)) if r3 == mover => {}
                _ => v.push(String::from("m5: transformer lost its role mid-flight")),
            }
        }
        if label.ends_with("/travel") || label.ends_with("/approach") {
            if let Some(goal) = decision.goal {
                if realized.dist(goal) >= from.dist(goal) {
                    v.push(format!("m5: {label} did not reduce the distance to its destination"));
                }
            }
        }

        // m4: the bounding structure never un-forms once reached.
        let b_now = bounding_structure_formed(&cfg, pattern);
        if self.b_reached && !b_now {
            v.push(String::from("m4: bounding structure regressed"));
        }
        if b_now {
            self.b_reached = true;
        }
        v
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

const SALT_SCHED: u64 = 0x5343_4845_4421;
const SALT_ERROR: u64 = 0x4552_524f_5221;
const SALT_FRAME: u64 = 0x4652_414d_4521;

// ---------------------------------------------------------------------------
// Synchronous engine
// ---------------------------------------------------------------------------

/// Round-based execution: every activated robot looks through a fresh
/// random frame and computes; the unique mover (monitored) moves with a
/// sampled error. FSYNC is the all-robots activation policy.
pub fn run_ssync(
    initial: &Configuration,
    pattern: &Pattern,
    model: &MovementModel,
    cfg: &SimConfig,
) -> (RunReport, Trace) {
    let mut trace: Trace = Vec::new();
    let mut report = RunReport::fresh(initial);
    if initial.validate().is_err() || pattern.validate().is_err() {
        report.outcome = Outcome::DecisionError;
        report.violations.push(String::from("invalid inputs"));
        return (report, trace);
    }
    if has_unbreakable_symmetry(initial) {
        report.outcome = Outcome::UnbreakableSymmetry;
        return (report, trace);
    }

    let n = initial.len();
    let mut positions = initial.positions.clone();
    let mut sched_rng = rng_for(cfg.seed, SALT_SCHED);
    let mut err_rng = rng_for(cfg.seed, SALT_ERROR);
    let mut frame_rng = rng_for(cfg.frame_seed.unwrap_or(cfg.seed ^ 1), SALT_FRAME);
    let mut monitors = MonitorState::new();
    let mut last_active = alloc::vec![0u64; n];

    let policy = match cfg.scheduler {
        Scheduler::Fsync => SsyncPolicy::All,
        Scheduler::Ssync(p) => p,
        Scheduler::Async(_) => {
            report.outcome = Outcome::DecisionError;
            report.violations.push(String::from("async scheduler passed to run_ssync"));
            return (report, trace);
        }
    };

    'rounds: for round in 0..cfg.max_rounds {
        report.steps = round;
        let config = Configuration::new(positions.clone());
        match is_terminal(&config, pattern, model) {
            Ok(true) => {
                report.outcome = Outcome::Terminated;
                report.terminated = true;
                trace.push(TraceEvent {
                    t: round,
                    robot: None,
                    kind: EventKind::Terminated,
                    payload: Payload { positions: Some(positions.clone()), ..Payload::default() },
                });
                break;
            }
            Ok(false) => {}
            Err(e) => {
                report.outcome = Outcome::MonitorViolation;
                report.violations.push(format!("terminal check failed: {e}"));
                break;
            }
        }

        let active: Vec<usize> = match policy {
            SsyncPolicy::All => (0..n).collect(),
            SsyncPolicy::RoundRobinSubsets => {
                let start = (round as usize) % n;
                let len = 1 + (round as usize) % n;
                (0..len).map(|k| (start + k) % n).collect()
            }
            SsyncPolicy::AdversarialDelay(k) => {
                let mut set: Vec<usize> = (0..n)
                    .filter(|&i| {
                        round.saturating_sub(last_active[i]) >= (k.max(1) as u64 - 1)
                            || sched_rng.gen_bool(0.5)
                    })
                    .collect();
                if set.is_empty() {
                    set.push((round as usize) % n);
                }
                set
            }
        };

        let mut movers: Vec<(usize, Decision)> = Vec::new();
        for &i in &active {
            last_active[i] = round;
            let frame = Frame::sample(positions[i], &mut frame_rng);
            let local: Vec<Point> = positions.iter().map(|&p| frame.world_to_local(p)).collect();
            trace.push(TraceEvent {
                t: round,
                robot: Some(i as u32),
                kind: EventKind::Look,
                payload: Payload::default(),
            });
            let snap = Snapshot { positions: local, self_index: i, lights: None };
            match compute(&snap, pattern, model) {
                Ok(local_decision) => {
                    let world = frame.decision_to_world(local_decision);
                    if world.is_move() {
                        trace.push(TraceEvent {
                            t: round,
                            robot: Some(i as u32),
                            kind: EventKind::Decide,
                            payload: Payload {
                                label: Some(world.phase_label.clone()),
                                intended: world.move_to,
                                ..Payload::default()
                            },
                        });
                        movers.push((i, world));
                    }
                }
                Err(ProtocolError::UnbreakableSymmetry) => {
                    report.outcome = Outcome::MonitorViolation;
                    report
                        .violations
                        .push(format!("round {round}: configuration became unbreakable"));
                    break 'rounds;
                }
                Err(e) => {
                    report.outcome = Outcome::DecisionError;
                    report.violations.push(format!("round {round} robot {i}: {e}"));
                    break 'rounds;
                }
            }
        }

        report.max_concurrent_moves = report.max_concurrent_moves.max(movers.len() as u32);
        if movers.len() > 1 {
            report.outcome = Outcome::MonitorViolation;
            report
                .violations
                .push(format!("m1: {} concurrent movers in round {round}", movers.len()));
            break;
        }

        if let Some((mover, decision)) = movers.pop() {
            let from = positions[mover];
            let intended = decision.move_to.expect("mover decision has a destination");
            trace.push(TraceEvent {
                t: round,
                robot: Some(mover as u32),
                kind: EventKind::MoveStart,
                payload: Payload {
                    label: Some(decision.phase_label.clone()),
                    from: Some(from),
                    intended: Some(intended),
                    reach: decision.reach,
                    ..Payload::default()
                },
            });
            let ctx = ErrorContext { goal: decision.goal, corridor: decision.corridor.clone() };
            let realized =
                match sample_error(model, cfg.error_policy, from, intended, &ctx, &mut err_rng) {
                    Ok(z) => z,
                    Err(e) => {
                        report.outcome = Outcome::DecisionError;
                        report.violations.push(format!("error sampling failed: {e}"));
                        break;
                    }
                };
            let violations =
                monitors.check_move(&positions, mover, &decision, realized, pattern, model);
            positions[mover] = realized;
            trace.push(TraceEvent {
                t: round,
                robot: Some(mover as u32),
                kind: EventKind::MoveEnd,
                payload: Payload {
                    from: Some(from),
                    intended: Some(intended),
                    realized: Some(realized),
                    ..Payload::default()
                },
            });
            if !violations.is_empty() {
                for msg in &violations {
                    trace.push(TraceEvent {
                        t: round,
                        robot: Some(mover as u32),
                        kind: EventKind::MonitorViolation,
                        payload: Payload { message: Some(msg.clone()), ..Payload::default() },
                    });
                }
                report.violations.extend(violations);
                report.outcome = Outcome::MonitorViolation;
                break;
            }
        }
    }

    report.final_positions = positions.clone();
    if report.terminated {
        let final_cfg = Configuration::new(positions);
        report.epsilon_close = Some(epsilon_close(&final_cfg, pattern).is_some());
    }
    (report, trace)
}

// ---------------------------------------------------------------------------
// Asynchronous engine
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum RobotPhase {
    Idle,
    /// Decision already derived from the look-time snapshot; it becomes
    /// effective at the compute-done tick.
    Computing { decision: Decision },
    Moving { decision: Decision, from: Point },
}

const EV_MOVE_END: u8 = 0;
const EV_COMPUTE_DONE: u8 = 1;
const EV_LOOK: u8 = 2;

fn draw(rng: &mut ChaCha8Rng, range: (u64, u64)) -> u64 {
    if range.1 <= range.0 {
        range.0
    } else {
        rng.gen_range(range.0..=range.1)
    }
}

/// Event-driven execution of the two-light wrapper under an adversarial but
/// fair (bounded-delay) schedule. Looks are atomic; a moving robot's
/// position updates only at its move end. Within a tick, move ends are
/// processed before compute completions and looks.
pub fn run_async(
    initial: &Configuration,
    pattern: &Pattern,
    model: &MovementModel,
    cfg: &SimConfig,
) -> (RunReport, Trace) {
    let mut trace: Trace = Vec::new();
    let mut report = RunReport::fresh(initial);
    report
        .notes
        .push(String::from("bounded-delay adversary approximates unbounded asynchrony"));
    if initial.validate().is_err() || pattern.validate().is_err() {
        report.outcome = Outcome::DecisionError;
        report.violations.push(String::from("invalid inputs"));
        return (report, trace);
    }
    if has_unbreakable_symmetry(initial) {
        report.outcome = Outcome::UnbreakableSymmetry;
        return (report, trace);
    }
    let delays = match cfg.scheduler {
        Scheduler::Async(d) => d,
        _ => AsyncDelays::default(),
    };

    let n = initial.len();
    let mut positions = initial.positions.clone();
    let mut lights = alloc::vec![Light::Idle; n];
    let mut phases: Vec<RobotPhase> = alloc::vec![RobotPhase::Idle; n];
    let mut sched_rng = rng_for(cfg.seed, SALT_SCHED);
    let mut err_rng = rng_for(cfg.seed, SALT_ERROR);
    let mut frame_rng = rng_for(cfg.frame_seed.unwrap_or(cfg.seed ^ 1), SALT_FRAME);
    let mut monitors = MonitorState::new();

    let mut queue: BinaryHeap<Reverse<(u64, u8, u64, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut pending_move_ends: Vec<u64> = Vec::new();

    for i in 0..n {
        let t = draw(&mut sched_rng, delays.idle);
        queue.push(Reverse((t, EV_LOOK, seq, i)));
        seq += 1;
    }

    'events: while let Some(Reverse((t, kind, _, robot))) = queue.pop() {
        report.steps = t;
        if t >= cfg.max_ticks {
            break;
        }
        match kind {
            EV_LOOK => {
                // Quiescence: nobody moving, every pending decision null,
                // and the configuration terminal.
                let quiet = phases.iter().all(|p| match p {
                    RobotPhase::Idle => true,
                    RobotPhase::Computing { decision } => !decision.is_move(),
                    RobotPhase::Moving { .. } => false,
                });
                if quiet {
                    let config = Configuration::new(positions.clone());
                    match is_terminal(&config, pattern, model) {
                        Ok(true) => {
                            report.outcome = Outcome::Terminated;
                            report.terminated = true;
                            trace.push(TraceEvent {
                                t,
                                robot: None,
                                kind: EventKind::Terminated,
                                payload: Payload {
                                    positions: Some(positions.clone()),
                                    ..Payload::default()
                                },
                            });
                            break;
                        }
                        Ok(false) => {}
                        Err(e) => {
                            report.outcome = Outcome::MonitorViolation;
                            report.violations.push(format!("terminal check failed: {e}"));
                            break;
                        }
                    }
                }
                let frame = Frame::sample(positions[robot], &mut frame_rng);
                let local: Vec<Point> =
                    positions.iter().map(|&p| frame.world_to_local(p)).collect();
                trace.push(TraceEvent {
                    t,
                    robot: Some(robot as u32),
                    kind: EventKind::Look,
                    payload: Payload::default(),
                });
                let snap = Snapshot {
                    positions: local,
                    self_index: robot,
                    lights: Some(lights.clone()),
                };
                match fcom_compute(&snap, pattern, model) {
                    Ok(local_decision) => {
                        let world = frame.decision_to_world(local_decision);
                        phases[robot] = RobotPhase::Computing { decision: world };
                        let done = t + draw(&mut sched_rng, delays.compute);
                        queue.push(Reverse((done, EV_COMPUTE_DONE, seq, robot)));
                        seq += 1;
                    }
                    Err(ProtocolError::UnbreakableSymmetry) => {
                        report.outcome = Outcome::MonitorViolation;
                        report
                            .violations
                            .push(format!("tick {t}: configuration became unbreakable"));
                        break 'events;
                    }
                    Err(e) => {
                        report.outcome = Outcome::DecisionError;
                        report.violations.push(format!("tick {t} robot {robot}: {e}"));
                        break 'events;
                    }
                }
            }
            EV_COMPUTE_DONE => {
                let decision = match core::mem::replace(&mut phases[robot], RobotPhase::Idle) {
                    RobotPhase::Computing { decision } => decision,
                    _ => {
                        report.outcome = Outcome::DecisionError;
                        report.violations.push(format!("robot {robot} lost its computation"));
                        break;
                    }
                };
                if let Some(light) = decision.light {
                    lights[robot] = light;
                    trace.push(TraceEvent {
                        t,
                        robot: Some(robot as u32),
                        kind: EventKind::LightSet,
                        payload: Payload { light: Some(light), ..Payload::default() },
                    });
                }
                if decision.is_move() {
                    let moving = phases
                        .iter()
                        .filter(|p| matches!(p, RobotPhase::Moving { .. }))
                        .count() as u32;
                    report.max_concurrent_moves = report.max_concurrent_moves.max(moving + 1);
                    if moving > 0 {
                        report.outcome = Outcome::MonitorViolation;
                        report
                            .violations
                            .push(format!("m1: overlapping moves in flight at tick {t}"));
                        break;
                    }
                    trace.push(TraceEvent {
                        t,
                        robot: Some(robot as u32),
                        kind: EventKind::MoveStart,
                        payload: Payload {
                            label: Some(decision.phase_label.clone()),
                            from: Some(positions[robot]),
                            intended: decision.move_to,
                            reach: decision.reach,
                            ..Payload::default()
                        },
                    });
                    let busy_moving = 1 + phases
                        .iter()
                        .enumerate()
                        .filter(|(i, p)| {
                            matches!(p, RobotPhase::Moving { .. }) && lights[*i] == Light::Busy
                        })
                        .count() as u32;
                    report.max_busy_moving = report.max_busy_moving.max(busy_moving);
                    phases[robot] = RobotPhase::Moving { decision, from: positions[robot] };
                    let end = t + draw(&mut sched_rng, delays.movement);
                    pending_move_ends.push(end);
                    queue.push(Reverse((end, EV_MOVE_END, seq, robot)));
                    seq += 1;
                } else {
                    let next = next_look_tick(t, &delays, &mut sched_rng, &pending_move_ends);
                    queue.push(Reverse((next, EV_LOOK, seq, robot)));
                    seq += 1;
                }
            }
            EV_MOVE_END => {
                let (decision, from) =
                    match core::mem::replace(&mut phases[robot], RobotPhase::Idle) {
                        RobotPhase::Moving { decision, from } => (decision, from),
                        _ => {
                            report.outcome = Outcome::DecisionError;
                            report.violations.push(format!("robot {robot} lost its move"));
                            break;
                        }
                    };
                if let Some(pos) = pending_move_ends.iter().position(|&e| e == t) {
                    pending_move_ends.remove(pos);
                }
                let intended = decision.move_to.expect("moving robot has a destination");
                let ctx =
                    ErrorContext { goal: decision.goal, corridor: decision.corridor.clone() };
                let realized = match sample_error(
                    model,
                    cfg.error_policy,
                    from,
                    intended,
                    &ctx,
                    &mut err_rng,
                ) {
                    Ok(z) => z,
                    Err(e) => {
                        report.outcome = Outcome::DecisionError;
                        report.violations.push(format!("error sampling failed: {e}"));
                        break;
                    }
                };
                let violations =
                    monitors.check_move(&positions, robot, &decision, realized, pattern, model);
                positions[robot] = realized;
                trace.push(TraceEvent {
                    t,
                    robot: Some(robot as u32),
                    kind: EventKind::MoveEnd,
                    payload: Payload {
                        from: Some(from),
                        intended: Some(intended),
                        realized: Some(realized),
                        ..Payload::default()
                    },
                });
                if !violations.is_empty() {
                    for msg in &violations {
                        trace.push(TraceEvent {
                            t,
                            robot: Some(robot as u32),
                            kind: EventKind::MonitorViolation,
                            payload: Payload { message: Some(msg.clone()), ..Payload::default() },
                        });
                    }
                    report.violations.extend(violations);
                    report.outcome = Outcome::MonitorViolation;
                    break;
                }
                let next = next_look_tick(t, &delays, &mut sched_rng, &pending_move_ends);
                queue.push(Reverse((next, EV_LOOK, seq, robot)));
                seq += 1;
            }
            _ => unreachable!(),
        }
    }

    report.final_positions = positions.clone();
    if report.terminated {
        let final_cfg = Configuration::new(positions);
        report.epsilon_close = Some(epsilon_close(&final_cfg, pattern).is_some());
    }
    (report, trace)
}

fn next_look_tick(
    now: u64,
    delays: &AsyncDelays,
    rng: &mut ChaCha8Rng,
    pending_move_ends: &[u64],
) -> u64 {
    if delays.rush && !pending_move_ends.is_empty() && rng.gen_bool(0.5) {
        // Stress the wrapper: look exactly at a move boundary or mid-move.
        let end = pending_move_ends[0];
        let mid = (now + end) / 2;
        return match rng.gen_range(0..3u32) {
            0 => end,
            1 => mid.max(now + 1),
            _ => end + 1,
        };
    }
    (now + draw(rng, delays.idle)).max(now + 1)
}

/// Convenience dispatcher on the scheduler kind.
pub fn run(
    initial: &Configuration,
    pattern: &Pattern,
    model: &MovementModel,
    cfg: &SimConfig,
) -> (RunReport, Trace) {
    match cfg.scheduler {
        Scheduler::Async(_) => run_async(initial, pattern, model, cfg),
        _ => run_ssync(initial, pattern, model, cfg),
    }
}

/// Offline monitor replay used by trace verification: applies the
/// sequentiality, collision and reach-disk monitors to a recorded trace and
/// returns the final positions it reconstructs.
pub fn replay_monitors(
    initial: &[Point],
    model: &MovementModel,
    trace: &[TraceEvent],
) -> Result<Vec<Point>, String> {
    let mut positions = initial.to_vec();
    let mut in_flight: Option<(usize, Point, Circle)> = None;
    for ev in trace {
        match ev.kind {
            EventKind::MoveStart => {
                let robot = ev.robot.ok_or("move_start without robot")? as usize;
                if in_flight.is_some() {
                    return Err(format!("m1: overlapping move at t={}", ev.t));
                }
                let from = ev.payload.from.ok_or("move_start without from")?;
                let intended = ev.payload.intended.ok_or("move_start without intended")?;
                if robot >= positions.len() {
                    return Err(String::from("robot index out of range"));
                }
                if from.dist(positions[robot]) > 1e-7 {
                    return Err(format!("move_start from a stale position at t={}", ev.t));
                }
                let reach = model
                    .reachable_set(from, intended)
                    .map_err(|e| format!("invalid move geometry: {e}"))?;
                in_flight = Some((robot, from, reach));
            }
            EventKind::MoveEnd => {
                let robot = ev.robot.ok_or("move_end without robot")? as usize;
                let (r, from, reach) =
                    in_flight.take().ok_or(format!("m1: move_end without start at t={}", ev.t))?;
                if r != robot {
                    return Err(String::from("move_end by a different robot"));
                }
                let realized = ev.payload.realized.ok_or("move_end without realized")?;
                if realized.dist(reach.center) >= reach.radius {
                    return Err(format!(
                        "m3: realized point outside the reach disk at t={}",
                        ev.t
                    ));
                }
                for (i, &p) in positions.iter().enumerate() {
                    if i != robot && segment_dist(p, from, realized) <= TOL {
                        return Err(format!("m2: collision at t={}", ev.t));
                    }
                }
                positions[robot] = realized;
            }
            _ => {}
        }
    }
    if in_flight.is_some() {
        return Err(String::from("trace ends with a move in flight"));
    }
    Ok(positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn square_pattern() -> Pattern {
        Pattern {
            points: alloc::vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)],
            epsilon: 0.1,
        }
    }

    fn model() -> MovementModel {
        MovementModel::try_new(0.3, 0.3).unwrap()
    }

    #[test]
    fn ssync_run_terminates_and_verifies() {
        let initial = Configuration::new(alloc::vec![
            pt(0.0, 0.0),
            pt(4.0, 0.0),
            pt(1.0, 1.0),
            pt(2.5, 0.8)
        ]);
        let cfg = SimConfig::new(Scheduler::Ssync(SsyncPolicy::All), ErrorPolicy::None, 42);
        let (report, trace) = run_ssync(&initial, &square_pattern(), &model(), &cfg);
        assert_eq!(report.outcome, Outcome::Terminated, "violations: {:?}", report.violations);
        assert_eq!(report.epsilon_close, Some(true));
        assert!(report.max_concurrent_moves <= 1);
        assert!(!trace.is_empty());
        // The recorded trace replays cleanly.
        let replayed = replay_monitors(&initial.positions, &model(), &trace).unwrap();
        assert_eq!(replayed, report.final_positions);
    }

    #[test]
    fn unbreakable_initial_is_rejected() {
        let initial = Configuration::new(alloc::vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0)
        ]);
        let cfg = SimConfig::new(Scheduler::Fsync, ErrorPolicy::None, 1);
        let (report, _) = run_ssync(&initial, &square_pattern(), &model(), &cfg);
        assert_eq!(report.outcome, Outcome::UnbreakableSymmetry);
    }

    #[test]
    fn determinism_bitwise() {
        let initial = Configuration::new(alloc::vec![
            pt(0.0, 0.0),
            pt(4.0, 0.0),
            pt(1.2, 1.1),
            pt(2.6, 0.7)
        ]);
        let cfg = SimConfig::new(
            Scheduler::Ssync(SsyncPolicy::AdversarialDelay(3)),
            ErrorPolicy::Uniform,
            7,
        );
        let (r1, t1) = run_ssync(&initial, &square_pattern(), &model(), &cfg);
        let (r2, t2) = run_ssync(&initial, &square_pattern(), &model(), &cfg);
        assert_eq!(r1, r2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn async_run_terminates() {
        let initial = Configuration::new(alloc::vec![
            pt(0.0, 0.0),
            pt(4.0, 0.0),
            pt(1.0, 1.0),
            pt(2.5, 0.8)
        ]);
        let cfg = SimConfig::new(
            Scheduler::Async(AsyncDelays { rush: true, ..AsyncDelays::default() }),
            ErrorPolicy::Uniform,
            3,
        );
        let (report, trace) = run_async(&initial, &square_pattern(), &model(), &cfg);
        assert_eq!(report.outcome, Outcome::Terminated, "violations: {:?}", report.violations);
        assert_eq!(report.epsilon_close, Some(true));
        assert!(report.max_busy_moving <= 1);
        let replayed = replay_monitors(&initial.positions, &model(), &trace).unwrap();
        assert_eq!(replayed, report.final_positions);
    }
}
