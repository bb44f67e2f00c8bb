//! Tick-based trajectory generation for all platform kinds.

use std::f64::consts::PI;

use super::{heading, wrap_angle, Leg, PlatformKind, PlatformSpec, PlatformState, TurnMode};
use crate::error::{Result, VlsError};
use crate::raycast::Vec3;
use crate::scene::Scene;

pub const DEFAULT_TICK_S: f64 = 1e-3;
pub const GRAVITY: f64 = 9.80665;

/// Ground vehicles perform three-point turns above this heading change.
pub const THREE_POINT_TRIGGER: f64 = 2.0 * PI / 3.0;

/// Upper bound on ground vehicle manoeuvring speed, m/s.
const MANOEUVRE_SPEED: f64 = 2.0;

/// Time span of one leg on the trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegSpan {
    pub start_time: f64,
    pub end_time: f64,
}

impl LegSpan {
    pub fn duration(&self) -> f64 {
        self.end_time - self.start_time
    }
}

/// Platform states on a uniform tick plus the span of every leg.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tick: f64,
    pub states: Vec<PlatformState>,
    pub legs: Vec<LegSpan>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.time)
    }

    /// State at time `t`, interpolated between ticks and clamped to the ends.
    pub fn state_at(&self, t: f64) -> PlatformState {
        let last = self.states.len() - 1;
        let x = (t / self.tick).max(0.0);
        let i = (x.floor() as usize).min(last);
        if i == last {
            return self.states[last];
        }
        let mut s = self.states[i].lerp(&self.states[i + 1], x - i as f64);
        s.time = t;
        s
    }

    /// States at `k · interval` for every `k` inside the trajectory.
    pub fn sample(&self, interval: f64) -> Vec<PlatformState> {
        if !(interval > 0.0) {
            return Vec::new();
        }
        let end = self.duration();
        let n = (end / interval + 1e-9).floor() as usize;
        (0..=n).map(|k| self.state_at(k as f64 * interval)).collect()
    }
}

/// Coordinated turn radius `v² / (g tan φ)`.
pub fn smooth_turn_radius(speed: f64, bank: f64) -> f64 {
    speed * speed / (GRAVITY * bank.tan())
}

/// Largest speed from which a constant deceleration `accel`, applied on the
/// tick `dt`, reaches `v_end` within `remaining` metres.
pub fn braking_speed(remaining: f64, v_end: f64, accel: f64, dt: f64) -> f64 {
    let h = accel * dt / 2.0;
    -h + (h * h + v_end * v_end + 2.0 * accel * remaining.max(0.0)).sqrt()
}

/// One constant-speed step toward `target`, clamped at the target.
pub fn advance_linear_path(state: &PlatformState, dt: f64, target: &Vec3, speed: f64) -> PlatformState {
    let to = target - state.position;
    let dist = to.norm();
    let mut s = *state;
    s.time += dt;
    s.roll = 0.0;
    s.pitch = 0.0;
    s.speed = speed;
    s.reversing = false;
    if dist > 0.0 {
        s.yaw = heading(&state.position, target);
        let step = speed * dt;
        s.position = if step >= dist {
            *target
        } else {
            state.position + to * (step / dist)
        };
    }
    s
}

struct Builder<'a> {
    spec: &'a PlatformSpec,
    dt: f64,
    states: Vec<PlatformState>,
    cur: PlatformState,
}

impl Builder<'_> {
    fn push(&mut self, mut s: PlatformState) {
        s.time = self.cur.time + self.dt;
        s.yaw = wrap_angle(s.yaw);
        self.cur = s;
        self.states.push(s);
    }

    /// Straight flight to `to` with an acceleration-limited speed profile.
    fn straight(&mut self, to: Vec3, v_max: f64, v_end: f64, yaw: impl Fn(f64) -> f64) {
        let from = self.cur.position;
        let d = (to - from).norm();
        if d < 1e-12 {
            return;
        }
        let u = (to - from) / d;
        let a = self.spec.max_accel;
        let dt = self.dt;
        let mut s = 0.0;
        loop {
            let v = self.cur.speed;
            let envelope = braking_speed(d - s, v_end, a, dt);
            let v_new = v_max.min(v + a * dt).min(envelope).max(v - a * dt).max(0.0);
            s += v_new * dt;
            let done = s >= d - 1e-12;
            let s_here = s.min(d);
            self.push(PlatformState {
                position: from + u * s_here,
                roll: 0.0,
                pitch: 0.0,
                yaw: yaw(s_here / d),
                speed: v_new,
                time: 0.0,
                reversing: false,
            });
            if done {
                break;
            }
        }
        // the last tick can leave a residual speed of about a·dt
        while v_end == 0.0 && self.cur.speed > 0.0 {
            let mut s = self.cur;
            s.speed = (s.speed - a * dt).max(0.0);
            self.push(s);
        }
    }

    /// Rotates in place to `target_yaw` at the configured yaw rate.
    fn spin(&mut self, target_yaw: f64) {
        let step = self.spec.yaw_rate * self.dt;
        loop {
            let e = wrap_angle(target_yaw - self.cur.yaw);
            let mut s = self.cur;
            s.speed = 0.0;
            s.roll = 0.0;
            s.reversing = false;
            if e.abs() <= step {
                s.yaw = target_yaw;
                self.push(s);
                return;
            }
            s.yaw += step * e.signum();
            self.push(s);
        }
    }

    fn hold(&mut self, duration: f64) {
        let n = (duration / self.dt).round() as usize;
        for _ in 0..n {
            let mut s = self.cur;
            s.speed = 0.0;
            self.push(s);
        }
    }
}

struct Arc {
    entry: Vec3,
    exit: Vec3,
    heading_in: f64,
    turn: f64,
    radius: f64,
    speed: f64,
}

/// Smooth turn at waypoint `k`, if it fits between the neighbouring legs.
fn plan_turn(spec: &PlatformSpec, legs: &[Leg], k: usize) -> Option<Arc> {
    if spec.turn_mode != TurnMode::Smooth || k + 1 >= legs.len() || k == 0 {
        return None;
    }
    if legs[k - 1].end_yaw.is_some() || legs[k].start_yaw.is_some() {
        return None;
    }
    let (p0, p1, p2) = (legs[k - 1].waypoint, legs[k].waypoint, legs[k + 1].waypoint);
    let h1 = heading(&p0, &p1);
    let h2 = heading(&p1, &p2);
    let turn = wrap_angle(h2 - h1);
    let speed = legs[k - 1].speed.min(legs[k].speed);
    let radius = smooth_turn_radius(speed, spec.bank_limit);
    let tangent = radius * (turn.abs() / 2.0).tan();
    let (d1, d2) = ((p1 - p0).norm(), (p2 - p1).norm());
    let stop = speed * speed / (2.0 * spec.max_accel);
    if turn.abs() > 179f64.to_radians() || tangent > d1 / 2.0 || tangent + stop > d2 / 2.0 {
        return None;
    }
    let u1 = (p1 - p0) / d1;
    let u2 = (p2 - p1) / d2;
    Some(Arc {
        entry: p1 - u1 * tangent,
        exit: p1 + u2 * tangent,
        heading_in: h1,
        turn,
        radius,
        speed,
    })
}

fn fly_arc(b: &mut Builder<'_>, arc: &Arc) {
    if arc.turn.abs() < 1e-9 {
        return;
    }
    let sign = arc.turn.signum();
    let left = |h: f64| Vec3::new(-h.sin(), h.cos(), 0.0);
    let centre = arc.entry + left(arc.heading_in) * (sign * arc.radius);
    let roll = -sign * (arc.speed * arc.speed / (GRAVITY * arc.radius)).atan();
    let total = arc.turn.abs();
    let step = arc.speed * b.dt / arc.radius;
    let mut swept = 0.0;
    while swept < total {
        swept = (swept + step).min(total);
        let h = arc.heading_in + sign * swept;
        let mut p = centre - left(h) * (sign * arc.radius);
        p.z = arc.entry.z + (arc.exit.z - arc.entry.z) * swept / total;
        if swept >= total {
            p = arc.exit;
        }
        b.push(PlatformState {
            position: p,
            roll: if swept >= total { 0.0 } else { roll },
            pitch: 0.0,
            yaw: h,
            speed: arc.speed,
            time: 0.0,
            reversing: false,
        });
    }
}

fn leg_yaw(leg: &Leg, next: &Leg) -> impl Fn(f64) -> f64 {
    let h = heading(&leg.waypoint, &next.waypoint);
    let (start, end) = (leg.start_yaw.unwrap_or(h), leg.end_yaw.unwrap_or(leg.start_yaw.unwrap_or(h)));
    move |f| start + wrap_angle(end - start) * f
}

fn multicopter(b: &mut Builder<'_>, legs: &[Leg], spans: &mut Vec<LegSpan>) {
    let n = legs.len();
    for i in 0..n - 1 {
        let start = b.cur.time;
        let turn = plan_turn(b.spec, legs, i + 1);
        let (exit, v_end) = match &turn {
            Some(a) => (a.entry, a.speed),
            None => (legs[i + 1].waypoint, 0.0),
        };
        b.straight(exit, legs[i].speed, v_end, leg_yaw(&legs[i], &legs[i + 1]));
        match turn {
            Some(a) => fly_arc(b, &a),
            None if i + 2 < n => {
                let next = &legs[i + 1];
                b.spin(next.start_yaw.unwrap_or_else(|| heading(&next.waypoint, &legs[i + 2].waypoint)));
            }
            None => {}
        }
        spans.push(LegSpan {
            start_time: start,
            end_time: b.cur.time,
        });
    }
}

fn linear_path(b: &mut Builder<'_>, legs: &[Leg], spans: &mut Vec<LegSpan>) {
    for i in 0..legs.len() - 1 {
        let start = b.cur.time;
        let target = legs[i + 1].waypoint;
        let yaw = leg_yaw(&legs[i], &legs[i + 1]);
        let from = b.cur.position;
        let d = (target - from).norm();
        while (target - b.cur.position).norm() > 0.0 {
            let mut s = advance_linear_path(&b.cur, b.dt, &target, legs[i].speed);
            s.yaw = yaw(((s.position - from).norm() / d).min(1.0));
            b.push(s);
        }
        spans.push(LegSpan {
            start_time: start,
            end_time: b.cur.time,
        });
    }
}

fn snap(scene: &Scene, spec: &PlatformSpec, p: &mut Vec3, leg: usize) -> Result<()> {
    let z = scene.ground_height(p.x, p.y).ok_or_else(|| {
        VlsError::Simulation(format!(
            "leg {leg}: no ground below ({:.3}, {:.3}) for ground vehicle `{}`",
            p.x, p.y, spec.id
        ))
    })?;
    p.z = z + spec.mount_height;
    Ok(())
}

/// Forward, reverse and forward arcs at the minimum turning radius that
/// together rotate the heading by `turn`.
fn three_point_turn(b: &mut Builder<'_>, scene: &Scene, turn: f64, speed: f64, leg: usize) -> Result<()> {
    let r = b.spec.max_turn_radius;
    let sign = turn.signum();
    let v = speed.min(MANOEUVRE_SPEED);
    for (part, reverse) in [(0, false), (1, true), (2, false)] {
        let mut rotated = 0.0;
        let total = turn.abs() / 3.0;
        while rotated < total {
            let dpsi = (v * b.dt / r).min(total - rotated);
            rotated += dpsi;
            let mut s = b.cur;
            let mid = s.yaw + sign * dpsi / 2.0;
            let dir = Vec3::new(mid.cos(), mid.sin(), 0.0) * if reverse { -1.0 } else { 1.0 };
            s.position += dir * (dpsi * r);
            s.yaw += sign * dpsi;
            s.speed = v;
            s.reversing = reverse;
            snap(scene, b.spec, &mut s.position, leg)?;
            b.push(s);
        }
        if part < 2 {
            let mut s = b.cur;
            s.speed = 0.0;
            s.reversing = false;
            b.push(s);
        }
    }
    Ok(())
}

fn ground_vehicle(b: &mut Builder<'_>, legs: &[Leg], scene: &Scene, spans: &mut Vec<LegSpan>) -> Result<()> {
    let n = legs.len();
    let r = b.spec.max_turn_radius;
    let a = b.spec.max_accel;
    for i in 0..n - 1 {
        let start = b.cur.time;
        let target = legs[i + 1].waypoint;
        let v_max = legs[i].speed;
        let flat = |p: &Vec3| Vec3::new(p.x, p.y, 0.0);
        let dist = |p: &Vec3| (flat(&target) - flat(p)).norm();

        let e = wrap_angle(heading(&b.cur.position, &target) - b.cur.yaw);
        if e.abs() > THREE_POINT_TRIGGER && dist(&b.cur.position) < 2.0 * r {
            three_point_turn(b, scene, e, v_max, i)?;
        }

        // stop at the end unless the next leg continues without a manoeuvre
        let v_end = if i + 2 < n {
            let e_next = wrap_angle(heading(&target, &legs[i + 2].waypoint) - heading(&legs[i].waypoint, &target));
            let d_next = (flat(&legs[i + 2].waypoint) - flat(&target)).norm();
            if e_next.abs() > THREE_POINT_TRIGGER && d_next < 2.0 * r {
                0.0
            } else {
                v_max.min(legs[i + 1].speed)
            }
        } else {
            0.0
        };

        let d0 = dist(&b.cur.position);
        let budget = ((10.0 * (d0 + 2.0 * PI * r) / v_max.max(1e-3)) / b.dt) as usize + 100_000;
        let mut ticks = 0usize;
        loop {
            let d = dist(&b.cur.position);
            if d < 1e-9 {
                break;
            }
            let v = b.cur.speed;
            let v_new = v_max
                .min(v + a * b.dt)
                .min(braking_speed(d, v_end, a, b.dt))
                .max(v - a * b.dt)
                .max(0.0);
            let e = wrap_angle(heading(&b.cur.position, &target) - b.cur.yaw);
            let max_dpsi = v_new * b.dt / r;
            let dpsi = e.clamp(-max_dpsi, max_dpsi);
            let mut s = b.cur;
            let mid = s.yaw + dpsi / 2.0;
            let step = v_new * b.dt;
            s.position += Vec3::new(mid.cos(), mid.sin(), 0.0) * step;
            s.yaw += dpsi;
            s.speed = v_new;
            s.reversing = false;
            s.roll = 0.0;
            s.pitch = 0.0;
            snap(scene, b.spec, &mut s.position, i)?;
            let fwd = Vec3::new(s.yaw.cos(), s.yaw.sin(), 0.0);
            let passed = (flat(&target) - flat(&s.position)).dot(&fwd) <= 0.0 && dist(&s.position) < r;
            let arrived = d <= step + 1e-9 || passed;
            b.push(s);
            if arrived {
                break;
            }
            ticks += 1;
            if ticks > budget {
                return Err(VlsError::Simulation(format!(
                    "leg {i}: ground vehicle cannot reach waypoint ({:.3}, {:.3})",
                    target.x, target.y
                )));
            }
        }
        spans.push(LegSpan {
            start_time: start,
            end_time: b.cur.time,
        });
    }
    Ok(())
}

/// Simulates the whole survey path on a fixed tick.
///
/// Moving platforms scan leg `i` while travelling from waypoint `i` to
/// `i + 1`; the last leg has zero length. Static platforms dwell at every
/// waypoint for the leg's duration. Ground vehicles need a scene.
pub fn simulate_trajectory(spec: &PlatformSpec, legs: &[Leg], scene: Option<&Scene>, dt: f64) -> Result<Trajectory> {
    spec.validate()?;
    if legs.is_empty() {
        return Err(VlsError::Config("survey has no legs".into()));
    }
    if !(dt > 0.0) {
        return Err(VlsError::Config(format!("tick must be > 0, got {dt}")));
    }
    if spec.kind.is_moving() {
        if let Some((i, l)) = legs.iter().enumerate().find(|(_, l)| !(l.speed > 0.0)) {
            return Err(VlsError::Config(format!("leg {i}: speed must be > 0, got {}", l.speed)));
        }
    }
    let first = &legs[0];
    let initial_yaw = first.start_yaw.unwrap_or_else(|| match legs.get(1) {
        Some(next) if spec.kind.is_moving() => heading(&first.waypoint, &next.waypoint),
        _ => 0.0,
    });
    let mut start = PlatformState::at(first.waypoint, initial_yaw);
    let ground = match spec.kind {
        PlatformKind::GroundVehicle => Some(scene.ok_or_else(|| {
            VlsError::Config(format!("ground vehicle `{}` needs a scene", spec.id))
        })?),
        _ => None,
    };
    if let Some(scene) = ground {
        snap(scene, spec, &mut start.position, 0)?;
    }
    let mut b = Builder {
        spec,
        dt,
        states: vec![start],
        cur: start,
    };
    let mut spans = Vec::with_capacity(legs.len());
    match spec.kind {
        PlatformKind::Static => {
            for (i, leg) in legs.iter().enumerate() {
                if i > 0 {
                    // relocation between stations takes one tick
                    b.push(PlatformState::at(leg.waypoint, leg.start_yaw.unwrap_or(0.0)));
                }
                let t0 = b.cur.time;
                b.hold(leg.duration.unwrap_or(0.0));
                spans.push(LegSpan {
                    start_time: t0,
                    end_time: b.cur.time,
                });
            }
        }
        PlatformKind::LinearPath => linear_path(&mut b, legs, &mut spans),
        PlatformKind::Multicopter => multicopter(&mut b, legs, &mut spans),
        PlatformKind::GroundVehicle => ground_vehicle(&mut b, legs, ground.expect("checked above"), &mut spans)?,
    }
    if spec.kind.is_moving() {
        let t = b.cur.time;
        spans.push(LegSpan {
            start_time: t,
            end_time: t,
        });
    }
    Ok(Trajectory {
        tick: dt,
        states: b.states,
        legs: spans,
    })
}
