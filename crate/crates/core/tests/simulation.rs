mod support;

use cls_core::codec::Command;
use cls_core::replay::{read_replay, validate_replay, ReplayLog};
use cls_core::sim::{advance, AgentId, Event, SimConfig, SimParams, SimWorld};
use cls_core::{PlayMode, Side, Vec2};
use rand::Rng;

fn kickoff_world() -> SimWorld {
    let mut w = SimWorld::new(1);
    w.teams.left = Some("Alpha".into());
    w.teams.right = Some("Beta".into());
    for side in [Side::Left, Side::Right] {
        for unum in 1..=11u8 {
            let x = -5.0 - 4.0 * unum as f64;
            let y = (unum as f64 - 6.0) * 5.0;
            w.insert_player(cls_core::sim::PlayerState::new(side, unum, Vec2::new(x * side.sign(), y), 8000.0));
        }
    }
    w
}

/// Every player chases the ball and kicks it toward the opposing goal, with
/// random noise in the commands.
fn chase_commands(r: &mut rand_chacha::ChaCha8Rng, w: &SimWorld, params: &SimParams) -> Vec<(AgentId, Command)> {
    w.players
        .iter()
        .map(|p| {
            let to_ball = w.ball.pos - p.pos;
            let cmd = if to_ball.length() <= params.kickable_area() {
                let goal = Vec2::new(52.5 * p.side.sign(), r.gen_range(-6.0..6.0));
                let dir = cls_core::geom::angle_diff((goal - p.pos).dir_deg(), p.body_dir);
                Command::Kick { power: r.gen_range(50.0..100.0), dir: cls_core::geom::normalize_angle(dir) }
            } else {
                let diff = cls_core::geom::angle_diff(to_ball.dir_deg(), p.body_dir);
                if diff.abs() > 20.0 {
                    Command::Turn { moment: cls_core::geom::normalize_angle(diff * 2.0) }
                } else {
                    Command::Dash { power: r.gen_range(30.0..100.0), dir: 0.0 }
                }
            };
            (AgentId::Player { side: p.side, unum: p.unum }, cmd)
        })
        .collect()
}

fn play(seed: u64, cycles: u32) -> Vec<u8> {
    let config = SimConfig { seed, ..SimConfig::default() };
    let params = &config.params;
    let mut r = support::rng(seed);
    let mut w = kickoff_world();
    let mut log = ReplayLog::new(Vec::new(), &config).unwrap();
    for _ in 0..cycles {
        let cmds = chase_commands(&mut r, &w, params);
        let (next, events) = advance(&w, params, &cmds);
        // clamps hold after every step
        assert!(next.ball.vel.length() <= params.ball_speed_max * params.ball_decay + 1e-9);
        for p in &next.players {
            assert!(p.vel.length() <= params.player_speed_max * params.player_decay + 1e-9);
            assert!((0.0..=params.stamina_max).contains(&p.stamina));
            assert!(p.pos.x.abs() <= 57.5 && p.pos.y.abs() <= 39.0);
        }
        assert!(next.ball.pos.x.abs() <= 57.5 && next.ball.pos.y.abs() <= 39.0);
        assert_eq!(next.cycle, w.cycle + 1);
        let goals = events.iter().filter(|e| matches!(e, Event::Goal { .. })).count() as u32;
        assert_eq!(next.scores.0 + next.scores.1, w.scores.0 + w.scores.1 + goals);
        log.append(&next, &events).unwrap();
        w = next;
    }
    log.finish().unwrap()
}

#[test]
fn full_match_replay_is_valid_and_deterministic() {
    let first = play(1, 6000);
    let second = play(1, 6000);
    assert!(first == second, "same seed produced different replays");
    let replay = read_replay(first.as_slice()).unwrap();
    assert_eq!(replay.records.len(), 6000);
    let summary = validate_replay(&replay).unwrap();
    assert_eq!(summary.last_cycle, 6000);
    assert_eq!(replay.records.last().unwrap().world.play_mode, PlayMode::TimeOver);
    assert!(summary.goals > 0, "{summary:?}");
}

#[test]
fn different_seeds_diverge() {
    assert_ne!(play(1, 300), play(2, 300));
}

#[test]
fn empty_match_runs_to_time_over_goalless() {
    let params = SimParams::default();
    let mut w = SimWorld::new(1);
    for _ in 0..6000 {
        w = advance(&w, &params, &[]).0;
    }
    assert_eq!(w.cycle, 6000);
    assert_eq!(w.play_mode, PlayMode::TimeOver);
    assert_eq!(w.scores, (0, 0));
}
