use crate::codec::{encode_client_command, Command, MoveTarget};
use crate::geom::{normalize_angle, Vec2};
use crate::types::{PlayMode, Side};

use super::config::SimParams;
use super::event::{AgentId, Event, RejectReason};
use super::referee::referee_judge;
use super::world::{PlayerState, SimWorld};

/// Dash directions snap to multiples of this.
pub const DASH_DIR_STEP: f64 = 45.0;

/// Ball acceleration a kick would produce, or `None` when the ball is out of
/// reach. `dir` is relative to the body.
pub fn kick_accel(player: &PlayerState, ball_pos: Vec2, power: f64, dir: f64, params: &SimParams) -> Option<Vec2> {
    let rel = ball_pos - player.pos;
    let dist = rel.length();
    if dist > params.kickable_area() {
        return None;
    }
    let dir_diff = if dist == 0.0 { 0.0 } else { normalize_angle(rel.dir_deg() - player.body_dir).abs() };
    let factor = 1.0 - 0.25 * dir_diff / 180.0 - 0.25 * dist / params.kickable_area();
    Some(Vec2::polar(power * params.kick_power_rate * factor, player.body_dir + dir))
}

/// Snaps a dash direction to the nearest allowed multiple of 45 degrees.
pub fn snap_dash_dir(dir: f64) -> f64 {
    normalize_angle((dir / DASH_DIR_STEP).round() * DASH_DIR_STEP)
}

fn reject(events: &mut Vec<Event>, agent: AgentId, cmd: &Command, reason: RejectReason) {
    let command = encode_client_command(cmd).unwrap_or_else(|_| cmd.head().to_string());
    events.push(Event::CommandRejected { agent, command, reason });
}

fn clamp_to_area(v: Vec2, params: &SimParams) -> Vec2 {
    let mx = params.pitch_half_length + crate::landmarks::PITCH_MARGIN;
    let my = params.pitch_half_width + crate::landmarks::PITCH_MARGIN;
    Vec2::new(v.x.clamp(-mx, mx), v.y.clamp(-my, my))
}

fn apply_trainer(world: &mut SimWorld, params: &SimParams, cmd: &Command, events: &mut Vec<Event>) {
    match cmd {
        Command::TrainerMove { target: MoveTarget::Ball, x, y, vel, .. } => {
            world.ball.pos = clamp_to_area(Vec2::new(*x, *y), params);
            world.ball.vel = vel.unwrap_or(Vec2::ZERO);
            world.last_touch = None;
        }
        Command::TrainerMove { target: MoveTarget::Player { side, unum }, x, y, body_dir, vel } => {
            let pos = clamp_to_area(Vec2::new(*x, *y), params);
            match world.player_mut(*side, *unum) {
                Some(p) => {
                    p.pos = pos;
                    p.vel = vel.unwrap_or(Vec2::ZERO);
                    if let Some(d) = body_dir {
                        p.body_dir = normalize_angle(*d);
                    }
                }
                None => reject(events, AgentId::Trainer, cmd, RejectReason::UnknownAgent),
            }
        }
        Command::ChangeMode(mode) => {
            let from = world.play_mode;
            world.set_play_mode(*mode);
            if from != *mode {
                events.push(Event::PlayModeChange { from, to: *mode });
            }
        }
        Command::Recover => {
            for p in &mut world.players {
                p.stamina = params.stamina_max;
                p.effort = 1.0;
            }
        }
        Command::Init { .. } | Command::Done { .. } | Command::Bye => {}
        _ => reject(events, AgentId::Trainer, cmd, RejectReason::NotPermitted),
    }
}

/// Advances the world by one cycle.
///
/// Commands are processed trainer first, then coaches, then players in
/// (side, unum) order; commands of one agent keep their arrival order. Each
/// player gets at most one body command and one neck turn per cycle; extras
/// and commands illegal in the current play mode are dropped with a
/// `CommandRejected` event. Afterwards velocities are clamped, positions
/// advance, velocities decay and stamina recovers.
pub fn step_simulation(
    world: &SimWorld,
    params: &SimParams,
    commands: &[(AgentId, Command)],
) -> (SimWorld, Vec<Event>) {
    let mut w = world.clone();
    let mut events = Vec::new();

    let mut ordered: Vec<(usize, &(AgentId, Command))> = commands.iter().enumerate().collect();
    ordered.sort_by_key(|(i, (agent, _))| (*agent, *i));

    let mut body_used: Vec<(Side, u8)> = Vec::new();
    let mut neck_used: Vec<(Side, u8)> = Vec::new();
    let mut kicked_by: Option<Side> = None;

    for (_, (agent, cmd)) in ordered {
        match *agent {
            AgentId::Trainer => apply_trainer(&mut w, params, cmd, &mut events),
            AgentId::Coach(_) => match cmd {
                Command::Say { text } => events.push(Event::Say { agent: *agent, text: text.clone() }),
                Command::Init { .. } | Command::Done { .. } | Command::Bye => {}
                _ => reject(&mut events, *agent, cmd, RejectReason::NotPermitted),
            },
            AgentId::Player { side, unum } => {
                let mode = w.play_mode;
                if w.player(side, unum).is_none() {
                    reject(&mut events, *agent, cmd, RejectReason::UnknownAgent);
                    continue;
                }
                if cmd.is_body() {
                    if body_used.contains(&(side, unum)) {
                        reject(&mut events, *agent, cmd, RejectReason::MultipleBodyCommands);
                        continue;
                    }
                    body_used.push((side, unum));
                }
                match cmd {
                    Command::Dash { power, dir } => {
                        if mode == PlayMode::TimeOver {
                            reject(&mut events, *agent, cmd, RejectReason::IllegalCommandForPlayMode);
                            continue;
                        }
                        let p = w.player_mut(side, unum).expect("checked");
                        let effective = if *power > 0.0 { power.min(p.stamina) } else { *power };
                        let accel = Vec2::polar(
                            effective * params.dash_power_rate * p.effort,
                            p.body_dir + snap_dash_dir(*dir),
                        );
                        p.vel += accel;
                        p.stamina = (p.stamina - effective.max(0.0)).max(0.0);
                    }
                    Command::Turn { moment } => {
                        if mode == PlayMode::TimeOver {
                            reject(&mut events, *agent, cmd, RejectReason::IllegalCommandForPlayMode);
                            continue;
                        }
                        let p = w.player_mut(side, unum).expect("checked");
                        let speed = p.vel.length();
                        p.body_dir = normalize_angle(p.body_dir + moment / (1.0 + params.inertia_moment * speed));
                    }
                    Command::Kick { power, dir } => {
                        if !mode.allows_kick_by(side) {
                            reject(&mut events, *agent, cmd, RejectReason::IllegalCommandForPlayMode);
                            continue;
                        }
                        let p = w.player(side, unum).expect("checked");
                        match kick_accel(p, w.ball.pos, *power, *dir, params) {
                            Some(accel) => {
                                w.ball.vel += accel;
                                w.last_touch = Some(side);
                                kicked_by = Some(side);
                            }
                            None => reject(&mut events, *agent, cmd, RejectReason::BallNotKickable),
                        }
                    }
                    Command::Move { x, y } => {
                        if !mode.allows_player_move() {
                            reject(&mut events, *agent, cmd, RejectReason::IllegalCommandForPlayMode);
                            continue;
                        }
                        let p = w.player_mut(side, unum).expect("checked");
                        // agents move in their own team frame
                        p.pos = clamp_to_area(Vec2::new(*x, *y) * side.sign(), params);
                        p.vel = Vec2::ZERO;
                    }
                    Command::TurnNeck { moment } => {
                        if neck_used.contains(&(side, unum)) {
                            reject(&mut events, *agent, cmd, RejectReason::MultipleBodyCommands);
                            continue;
                        }
                        neck_used.push((side, unum));
                        let p = w.player_mut(side, unum).expect("checked");
                        p.neck_dir = (p.neck_dir + moment).clamp(-params.max_neck_angle, params.max_neck_angle);
                    }
                    Command::Say { text } => events.push(Event::Say { agent: *agent, text: text.clone() }),
                    Command::Init { .. } | Command::Done { .. } | Command::Bye => {}
                    Command::TrainerMove { .. } | Command::ChangeMode(_) | Command::Recover => {
                        reject(&mut events, *agent, cmd, RejectReason::NotPermitted)
                    }
                }
            }
        }
    }

    // a legal kick restarts play
    if let Some(side) = kicked_by {
        if w.play_mode.dead_ball_side() == Some(side) {
            let from = w.play_mode;
            w.set_play_mode(PlayMode::PlayOn);
            events.push(Event::PlayModeChange { from, to: PlayMode::PlayOn });
        }
    }

    let ball_frozen = w.play_mode != PlayMode::PlayOn;
    if ball_frozen {
        w.ball.vel = Vec2::ZERO;
    } else {
        w.ball.vel = w.ball.vel.clamp_length(params.ball_speed_max);
        w.ball.pos = clamp_to_area(w.ball.pos + w.ball.vel, params);
        w.ball.vel = w.ball.vel * params.ball_decay;
    }

    for p in &mut w.players {
        p.vel = p.vel.clamp_length(params.player_speed_max);
        p.pos = clamp_to_area(p.pos + p.vel, params);
        p.vel = p.vel * params.player_decay;
        p.stamina = (p.stamina + params.stamina_recovery).min(params.stamina_max);
    }

    w.cycle += 1;
    (w, events)
}

/// One full server cycle: motion followed by the referee.
pub fn advance(world: &SimWorld, params: &SimParams, commands: &[(AgentId, Command)]) -> (SimWorld, Vec<Event>) {
    let (mut next, mut events) = step_simulation(world, params, commands);
    let (_, judged) = referee_judge(&mut next, params);
    events.extend(judged);
    (next, events)
}
