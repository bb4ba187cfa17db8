#![allow(dead_code)]

use cls_core::model::{ModelConfig, PoseEstimate, TrackedKind, TrackedObject, WorldState};
use cls_core::{PlayMode, Side, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec(r: &mut ChaCha8Rng, h: f64) -> Vec2 {
    Vec2::new(r.gen_range(-h..h), r.gen_range(-h..h))
}

fn play_mode(r: &mut ChaCha8Rng) -> PlayMode {
    let side = if r.gen_bool(0.5) { Side::Left } else { Side::Right };
    match r.gen_range(0..8) {
        0 => PlayMode::BeforeKickOff,
        1 => PlayMode::KickOff(side),
        2 => PlayMode::KickIn(side),
        3 => PlayMode::GoalKick(side),
        4 => PlayMode::CornerKick(side),
        5 => PlayMode::Goal(side),
        6 => PlayMode::TimeOver,
        _ => PlayMode::PlayOn,
    }
}

fn tracked(r: &mut ChaCha8Rng, kind: TrackedKind, cycle: u32) -> TrackedObject {
    let age = r.gen_range(0..cycle.min(40) + 1);
    let pos = vec(r, 50.0);
    TrackedObject {
        kind,
        pos,
        vel: vec(r, 1.5),
        body_dir: r.gen_bool(0.5).then(|| r.gen_range(-179.9..180.0)),
        confidence: 0.95f64.powi(age as i32),
        last_seen_cycle: Some(cycle - age),
        last_seen_pos: pos,
    }
}

/// A reproducible world estimate with every marshaled field exercised:
/// players and coaches or trainers, seen and unseen objects, all play modes.
pub fn random_world_state(seed: u64) -> WorldState {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut ws = WorldState::new(ModelConfig::default(), r.gen_bool(0.95).then(|| "Alpha".to_string()));
    ws.cycle = r.gen_range(0..6000);
    let role = r.gen_range(0..10);
    ws.our_side = match role {
        0 => None,
        _ if r.gen_bool(0.5) => Some(Side::Left),
        _ => Some(Side::Right),
    };
    ws.unum = if role <= 1 { 0 } else { r.gen_range(1..=11) };
    ws.team_names.1 = r.gen_bool(0.7).then(|| "Beta_2".to_string());
    ws.self_pose = PoseEstimate {
        pos: vec(&mut r, 50.0),
        vel: vec(&mut r, 0.5),
        body_dir: r.gen_range(-179.9..180.0),
        neck_dir: r.gen_range(-90.0..90.0),
        pos_error: r.gen_range(0.0..3.0),
        valid: r.gen_bool(0.9),
        age: 0,
    };
    ws.stamina = r.gen_range(0.0..8000.0);
    ws.effort = r.gen_range(0.6..1.0);
    if r.gen_bool(0.8) {
        ws.ball = tracked(&mut r, TrackedKind::Ball, ws.cycle);
        ws.ball.body_dir = None;
    }
    let frame = ws.frame();
    for unum in 1..=11u8 {
        if unum != ws.unum && r.gen_bool(0.5) {
            ws.teammates.insert(unum, tracked(&mut r, TrackedKind::Player { side: frame, unum }, ws.cycle));
        }
        if r.gen_bool(0.5) {
            ws.opponents.insert(unum, tracked(&mut r, TrackedKind::Player { side: frame.opposite(), unum }, ws.cycle));
        }
    }
    ws.play_mode = play_mode(&mut r);
    ws.scores = (r.gen_range(0..5), r.gen_range(0..5));
    ws.full_state = r.gen_bool(0.3);
    ws.refresh_intercept();
    ws
}
