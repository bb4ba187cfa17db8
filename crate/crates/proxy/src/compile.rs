//! Turning playmaker actions into the primitive commands the server accepts.

use cls_core::codec::Command;
use cls_core::geom::{angle_diff, normalize_angle};
use cls_core::model::{predict_ball_position, Reach, WorldState};
use cls_core::{PlayMode, Vec2};
use cls_rpc::PlayerAction;

/// Bearing error beyond which going somewhere starts with a turn.
pub const TURN_THRESHOLD_DEG: f64 = 15.0;
/// Arrival radius used when chasing the ball.
pub const INTERCEPT_DIST_THR: f64 = 0.3;
/// Below this confidence the ball position is not worth acting on.
pub const MIN_BALL_CONFIDENCE: f64 = 0.3;
/// Scan turn used while the ball is lost.
pub const SCAN_TURN: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Infeasible {
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("already within the arrival threshold")]
    Arrived,
    #[error("own position unknown")]
    NoSelfPose,
    #[error("ball position unknown")]
    NoBall,
    #[error("ball not kickable")]
    NotKickable,
    #[error("play mode forbids this")]
    PlayMode,
    #[error("kick cannot reach the requested speed threshold")]
    TooSlow,
    #[error("ball unreachable")]
    Unreachable,
}

fn checked(cmd: Command) -> Result<Command, Infeasible> {
    cmd.validate().map_err(|e| Infeasible::OutOfRange(e.to_string()))?;
    Ok(cmd)
}

fn need_pose(ws: &WorldState) -> Result<(), Infeasible> {
    if ws.self_pose.valid {
        Ok(())
    } else {
        Err(Infeasible::NoSelfPose)
    }
}

fn ball_known(ws: &WorldState) -> bool {
    ws.ball.seen() && ws.ball.confidence >= MIN_BALL_CONFIDENCE
}

/// Body turn that faces `target`.
fn turn_to(ws: &WorldState, target: Vec2) -> Command {
    let bearing = (target - ws.self_pose.pos).dir_deg();
    Command::Turn { moment: angle_diff(bearing, ws.self_pose.body_dir) }
}

pub fn go_to_point(ws: &WorldState, target: Vec2, dist_thr: f64, max_power: f64) -> Result<Command, Infeasible> {
    need_pose(ws)?;
    let to = target - ws.self_pose.pos;
    let dist = to.length();
    if dist <= dist_thr {
        return Err(Infeasible::Arrived);
    }
    let diff = angle_diff(to.dir_deg(), ws.self_pose.body_dir);
    if diff.abs() > TURN_THRESHOLD_DEG {
        return checked(Command::Turn { moment: diff });
    }
    let sim = &ws.config.sim;
    // coasting from speed v covers v / (1 - decay); ask for no more than that
    let wanted_speed = dist * (1.0 - sim.player_decay);
    let current = ws.self_pose.vel.dot(Vec2::polar(1.0, ws.self_pose.body_dir));
    let no_overshoot = ((wanted_speed - current) / (sim.dash_power_rate * ws.effort.max(1e-6))).max(0.0);
    checked(Command::Dash { power: max_power.min(no_overshoot).clamp(-100.0, 100.0), dir: 0.0 })
}

/// Single-step kick toward `target`.
pub fn smart_kick(ws: &WorldState, target: Vec2, first_speed: f64, speed_thr: f64) -> Result<Command, Infeasible> {
    need_pose(ws)?;
    // a ball near our feet that we did not see this cycle may well be gone already
    if ws.ball.last_seen_cycle != Some(ws.cycle) || !ws.ball_kickable() {
        return Err(Infeasible::NotKickable);
    }
    if let Some(side) = ws.our_side {
        if !ws.play_mode.allows_kick_by(side) {
            return Err(Infeasible::PlayMode);
        }
    }
    let sim = &ws.config.sim;
    let me = &ws.self_pose;
    let rel = ws.ball.pos - me.pos;
    let dist = rel.length();
    let dir_diff = if dist == 0.0 { 0.0 } else { angle_diff(rel.dir_deg(), me.body_dir).abs() };
    let factor = 1.0 - 0.25 * dir_diff / 180.0 - 0.25 * dist / sim.kickable_area();
    let gain = sim.kick_power_rate * factor;
    let max_accel = 100.0 * gain;

    let aim = (target - ws.ball.pos).dir_deg();
    let u = Vec2::polar(1.0, aim);
    let v = ws.ball.vel;
    let wanted = first_speed.min(sim.ball_speed_max);
    let accel = Vec2::polar(wanted, aim) - v;

    let (accel, achieved) = if accel.length() <= max_accel * (1.0 + 1e-12) {
        (accel, wanted)
    } else {
        // fastest ball velocity along u reachable with a full-power kick:
        // largest s with |s*u - v| = max_accel
        let along = u.dot(v);
        let disc = along * along - v.length_squared() + max_accel * max_accel;
        if disc >= 0.0 && along + disc.sqrt() > 0.0 {
            let s = (along + disc.sqrt()).min(sim.ball_speed_max);
            (u * s - v, s)
        } else {
            // cannot put the ball on the line; push it as hard as possible along it
            (u * max_accel, along + max_accel)
        }
    };
    if achieved < speed_thr {
        return Err(Infeasible::TooSlow);
    }
    let power = (accel.length() / gain).min(100.0);
    let dir = if power == 0.0 { 0.0 } else { angle_diff(accel.dir_deg(), me.body_dir) };
    checked(Command::Kick { power, dir })
}

/// Where to run to meet the ball, per the intercept table.
pub fn intercept(ws: &WorldState) -> Result<Command, Infeasible> {
    need_pose(ws)?;
    if !ball_known(ws) {
        return Err(Infeasible::NoBall);
    }
    let cycles = match ws.intercept.self_cycles(ws.unum) {
        Reach::Cycles(n) => n,
        Reach::Unreachable => return Err(Infeasible::Unreachable),
    };
    let meet = predict_ball_position(ws.ball.pos, ws.ball.vel, cycles, ws.config.sim.ball_decay);
    match go_to_point(ws, meet, INTERCEPT_DIST_THR, 100.0) {
        // already there: square up to the ball so a kick can follow
        Err(Infeasible::Arrived) => checked(turn_to(ws, ws.ball.pos)),
        other => other,
    }
}

pub fn neck_to_ball(ws: &WorldState) -> Result<Command, Infeasible> {
    need_pose(ws)?;
    if !ws.ball.seen() {
        return Err(Infeasible::NoBall);
    }
    let max = ws.config.sim.max_neck_angle;
    let bearing = (ws.ball.pos - ws.self_pose.pos).dir_deg();
    let wanted = angle_diff(bearing, ws.self_pose.body_dir).clamp(-max, max);
    checked(Command::TurnNeck { moment: normalize_angle(wanted - ws.self_pose.neck_dir) })
}

/// One action to one command, or the reason it cannot be carried out now.
pub fn compile_action(action: &PlayerAction, ws: &WorldState) -> Result<Command, Infeasible> {
    match action {
        PlayerAction::Dash { power, dir } => checked(Command::Dash { power: *power, dir: *dir }),
        PlayerAction::Turn { moment } => checked(Command::Turn { moment: *moment }),
        PlayerAction::Kick { power, dir } => checked(Command::Kick { power: *power, dir: *dir }),
        PlayerAction::TurnNeck { moment } => checked(Command::TurnNeck { moment: *moment }),
        PlayerAction::Move { x, y } => checked(Command::Move { x: *x, y: *y }),
        PlayerAction::Say { text } => checked(Command::Say { text: text.clone() }),
        PlayerAction::BodyGoToPoint { target, dist_thr, max_power } => go_to_point(ws, *target, *dist_thr, *max_power),
        PlayerAction::BodySmartKick { target, first_speed, speed_thr, .. } => {
            smart_kick(ws, *target, *first_speed, *speed_thr)
        }
        PlayerAction::BodyTurnToPoint { target } => {
            need_pose(ws)?;
            checked(turn_to(ws, *target))
        }
        PlayerAction::BodyInterceptBall => intercept(ws),
        PlayerAction::NeckTurnToBall => neck_to_ball(ws),
        PlayerAction::DoNothing => Ok(Command::Turn { moment: 0.0 }),
    }
}

/// What the agent does when the playmaker gives it nothing usable.
pub fn fallback_command(ws: &WorldState) -> Command {
    if !ws.self_pose.valid || !ball_known(ws) {
        return Command::Turn { moment: SCAN_TURN };
    }
    if ws.intercept.fastest_ours.map(|(u, _)| u) == Some(ws.unum) {
        if let Ok(cmd) = intercept(ws) {
            return cmd;
        }
    }
    turn_to(ws, ws.ball.pos)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSource {
    Playmaker,
    Fallback,
    /// The proxy overrode the reply (dead-ball repositioning).
    Preprocess,
}

/// The commands chosen for one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPlan {
    pub source: ActionSource,
    pub actions: Vec<PlayerAction>,
    /// Exactly one body command.
    pub body: Command,
    pub neck: Option<Command>,
    pub say: Option<Command>,
}

impl ActionPlan {
    /// Commands in sending order; the body command goes last.
    pub fn commands(&self) -> impl Iterator<Item = &Command> {
        self.say.iter().chain(self.neck.iter()).chain(std::iter::once(&self.body))
    }
}

/// First-feasible execution: the first body action that compiles becomes the
/// body command; the first feasible neck and say actions ride along. With no
/// feasible body action the fallback policy decides.
pub fn plan_actions(actions: Vec<PlayerAction>, ws: &WorldState) -> ActionPlan {
    let mut body = None;
    let mut neck = None;
    let mut say = None;
    for a in &actions {
        let slot = match a {
            PlayerAction::TurnNeck { .. } | PlayerAction::NeckTurnToBall => &mut neck,
            PlayerAction::Say { .. } => &mut say,
            _ => &mut body,
        };
        if slot.is_none() {
            if let Ok(cmd) = compile_action(a, ws) {
                *slot = Some(cmd);
            }
        }
    }
    let (source, body) = match body {
        Some(b) => (ActionSource::Playmaker, b),
        None => (ActionSource::Fallback, fallback_command(ws)),
    };
    ActionPlan { source, actions, body, neck, say }
}

/// Kick-off spots in the team frame, indexed by unum - 1.
pub const KICKOFF_POSITIONS: [(f64, f64); 11] = [
    (-50.0, 0.0),
    (-36.0, -20.0),
    (-38.0, -7.0),
    (-38.0, 7.0),
    (-36.0, 20.0),
    (-20.0, -15.0),
    (-22.0, 0.0),
    (-20.0, 15.0),
    (-5.0, -20.0),
    (-3.0, 0.0),
    (-5.0, 20.0),
];

/// While play is stopped for a kick-off, a player that is off the pitch, in
/// the opponent half or lost is teleported to its kick-off spot.
pub fn dead_ball_move(ws: &WorldState) -> Option<Command> {
    if !ws.is_player() || !matches!(ws.play_mode, PlayMode::BeforeKickOff | PlayMode::Goal(_)) {
        return None;
    }
    let sim = &ws.config.sim;
    let p = ws.self_pose.pos;
    let misplaced =
        !ws.self_pose.valid || p.x > 0.0 || p.x.abs() > sim.pitch_half_length || p.y.abs() > sim.pitch_half_width;
    if !misplaced {
        return None;
    }
    let (x, y) = KICKOFF_POSITIONS[(ws.unum as usize - 1).min(10)];
    Some(Command::Move { x, y })
}
