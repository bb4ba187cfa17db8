//! Independent oracles and deterministic fixtures shared by the integration
//! tests. Nothing here calls the code it is used to check.
#![allow(dead_code)]

use cls_core::codec::{encode_client_command, encode_server_message, Command, MoveTarget, ServerMessage};
use cls_core::sim::{render_observation, AgentId, ObservationMode, PlayerState, SimParams, SimWorld, Teams};
use cls_core::{PlayMode, Side, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ball position after `n` cycles by plain iteration.
pub fn iterate_ball(mut pos: Vec2, mut vel: Vec2, n: u32, decay: f64) -> Vec2 {
    for _ in 0..n {
        pos = Vec2::new(pos.x + vel.x, pos.y + vel.y);
        vel = Vec2::new(vel.x * decay, vel.y * decay);
    }
    pos
}

#[derive(Debug, Clone, Copy)]
pub struct MotionModel {
    pub ball_decay: f64,
    pub speed_max: f64,
    pub accel: f64,
    pub kickable: f64,
    pub turn_threshold: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        MotionModel { ball_decay: 0.94, speed_max: 1.05, accel: 0.6, kickable: 1.085, turn_threshold: 15.0 }
    }
}

/// Brute-force interception time: replays the ball and the runner cycle by
/// cycle for every candidate horizon.
pub fn brute_intercept(player: Vec2, body: Option<f64>, ball: Vec2, ball_vel: Vec2, m: &MotionModel) -> Option<u32> {
    let mut b = ball;
    let mut v = ball_vel;
    for t in 0..=200u32 {
        if t > 0 {
            b = Vec2::new(b.x + v.x, b.y + v.y);
            v = Vec2::new(v.x * m.ball_decay, v.y * m.ball_decay);
        }
        let dx = b.x - player.x;
        let dy = b.y - player.y;
        let dist = (dx * dx + dy * dy).sqrt();
        if dist <= m.kickable {
            return Some(t);
        }
        let needs_turn = match body {
            Some(body) => {
                let mut diff = dy.atan2(dx).to_degrees() - body;
                while diff >= 180.0 {
                    diff -= 360.0;
                }
                while diff < -180.0 {
                    diff += 360.0;
                }
                diff.abs() > m.turn_threshold
            }
            None => false,
        };
        let mut covered = 0.0;
        let mut speed = 0.0f64;
        for cycle in 0..t {
            if needs_turn && cycle == 0 {
                continue;
            }
            speed = (speed + m.accel).min(m.speed_max);
            covered += speed;
        }
        if dist - covered <= m.kickable {
            return Some(t);
        }
    }
    None
}

pub fn random_vec(r: &mut ChaCha8Rng, hx: f64, hy: f64) -> Vec2 {
    Vec2::new(r.gen_range(-hx..hx), r.gen_range(-hy..hy))
}

/// A reproducible mid-game world with both teams on the pitch.
pub fn random_world(seed: u64, players_per_side: u8) -> SimWorld {
    let mut r = rng(seed);
    let mut w = SimWorld::new(seed);
    w.cycle = r.gen_range(0..6000);
    w.play_mode = PlayMode::PlayOn;
    w.scores = (r.gen_range(0..4), r.gen_range(0..4));
    w.teams = Teams { left: Some("Alpha".into()), right: Some("Beta_2".into()) };
    w.ball.pos = random_vec(&mut r, 50.0, 32.0);
    w.ball.vel = Vec2::polar(r.gen_range(0.0..2.8), r.gen_range(-180.0..180.0));
    for side in [Side::Left, Side::Right] {
        for unum in 1..=players_per_side {
            let mut p = PlayerState::new(side, unum, random_vec(&mut r, 50.0, 32.0), r.gen_range(2000.0..8000.0));
            p.vel = Vec2::polar(r.gen_range(0.0..0.4), r.gen_range(-180.0..180.0));
            p.body_dir = r.gen_range(-180.0..180.0);
            p.neck_dir = r.gen_range(-90.0..90.0);
            p.effort = r.gen_range(0.6..1.0);
            w.insert_player(p);
        }
    }
    w
}

/// Server-to-agent lines used as the golden corpus: for several worlds, the
/// messages a left and a right player receive with an all-round view, plus a
/// full-state line and the registration messages.
pub struct GoldenEntry {
    pub world: SimWorld,
    pub agent: AgentId,
    pub msg: ServerMessage,
}

pub fn golden_params() -> SimParams {
    SimParams { visible_angle: 360.0, ..SimParams::default() }
}

pub fn golden_server_messages() -> Vec<GoldenEntry> {
    let params = golden_params();
    let mut out = Vec::new();
    for seed in 1..=6 {
        let w = random_world(seed, 11);
        for agent in [AgentId::Player { side: Side::Left, unum: 7 }, AgentId::Player { side: Side::Right, unum: 3 }] {
            for msg in render_observation(&w, &params, agent, ObservationMode::See).unwrap() {
                out.push(GoldenEntry { world: w.clone(), agent, msg });
            }
        }
        for msg in render_observation(&w, &params, AgentId::Trainer, ObservationMode::FullState).unwrap() {
            out.push(GoldenEntry { world: w.clone(), agent: AgentId::Trainer, msg });
        }
    }
    let w = SimWorld::new(0);
    let extra = [
        ServerMessage::Init { side: Side::Left, unum: 7, play_mode: PlayMode::BeforeKickOff },
        ServerMessage::ServerParam(SimParams::default().to_param_map()),
        ServerMessage::Hear { cycle: 12, sender: "referee".into(), text: "kick_off_l".into() },
        ServerMessage::Hear { cycle: 40, sender: "l_3".into(), text: "pass left".into() },
        ServerMessage::Error("no_more_team_or_player".into()),
        ServerMessage::Ok("change_mode".into()),
    ];
    out.extend(extra.into_iter().map(|msg| GoldenEntry { world: w.clone(), agent: AgentId::Trainer, msg }));
    out
}

pub fn golden_server_text() -> String {
    golden_server_messages().iter().map(|e| encode_server_message(&e.msg) + "\n").collect()
}

pub fn golden_commands() -> Vec<Command> {
    vec![
        Command::Init { team: Some("Cyrus".into()), version: 18, goalie: false },
        Command::Init { team: Some("Helios_Base".into()), version: 18, goalie: true },
        Command::Init { team: None, version: 18, goalie: false },
        Command::Move { x: -10.0, y: 0.0 },
        Command::Dash { power: 100.0, dir: 0.0 },
        Command::Dash { power: -35.5, dir: 90.0 },
        Command::Turn { moment: -30.5 },
        Command::Kick { power: 80.25, dir: -45.0 },
        Command::TurnNeck { moment: 60.0 },
        Command::Say { text: "pass left".into() },
        Command::TrainerMove { target: MoveTarget::Ball, x: 0.0, y: 0.0, body_dir: None, vel: Some(Vec2::new(1.5, -0.5)) },
        Command::TrainerMove {
            target: MoveTarget::Player { side: Side::Right, unum: 4 },
            x: 12.0,
            y: -8.0,
            body_dir: Some(90.0),
            vel: None,
        },
        Command::ChangeMode(PlayMode::PlayOn),
        Command::ChangeMode(PlayMode::KickOff(Side::Right)),
        Command::Recover,
        Command::Done { cycle: Some(42) },
        Command::Done { cycle: None },
        Command::Bye,
    ]
}

/// A random valid command, mixing round and full-precision numbers.
pub fn random_command(r: &mut ChaCha8Rng) -> Command {
    fn num(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        if r.gen_bool(0.3) {
            r.gen_range(lo as i32..hi as i32) as f64
        } else {
            r.gen_range(lo..hi)
        }
    }
    fn side(r: &mut ChaCha8Rng) -> Side {
        if r.gen_bool(0.5) {
            Side::Left
        } else {
            Side::Right
        }
    }
    fn token(r: &mut ChaCha8Rng) -> String {
        const CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-";
        (0..r.gen_range(1..=12)).map(|_| CHARS[r.gen_range(0..CHARS.len())] as char).collect()
    }
    match r.gen_range(0..13) {
        0 => Command::Init { team: r.gen_bool(0.8).then(|| token(r)), version: r.gen_range(1..100), goalie: r.gen() },
        1 => Command::Move { x: num(r, -57.5, 57.5), y: num(r, -39.0, 39.0) },
        2 => Command::Dash { power: num(r, -100.0, 100.0), dir: num(r, -180.0, 180.0) },
        3 => Command::Turn { moment: num(r, -180.0, 180.0) },
        4 => Command::Kick { power: num(r, -100.0, 100.0), dir: num(r, -180.0, 180.0) },
        5 => Command::TurnNeck { moment: num(r, -180.0, 180.0) },
        6 => Command::Say { text: (0..r.gen_range(0..40)).map(|_| r.gen_range(b' '..=b'~') as char).collect() },
        7 => Command::TrainerMove {
            target: MoveTarget::Ball,
            x: num(r, -57.5, 57.5),
            y: num(r, -39.0, 39.0),
            body_dir: None,
            vel: r.gen_bool(0.5).then(|| Vec2::new(num(r, -3.0, 3.0), num(r, -3.0, 3.0))),
        },
        8 => {
            let vel = r.gen_bool(0.3).then(|| Vec2::new(num(r, -3.0, 3.0), num(r, -3.0, 3.0)));
            Command::TrainerMove {
                target: MoveTarget::Player { side: side(r), unum: r.gen_range(1..=11) },
                x: num(r, -57.5, 57.5),
                y: num(r, -39.0, 39.0),
                body_dir: if vel.is_some() || r.gen_bool(0.5) { Some(num(r, -180.0, 180.0)) } else { None },
                vel,
            }
        }
        9 => Command::ChangeMode(match r.gen_range(0..8) {
            0 => PlayMode::BeforeKickOff,
            1 => PlayMode::PlayOn,
            2 => PlayMode::TimeOver,
            3 => PlayMode::KickOff(side(r)),
            4 => PlayMode::KickIn(side(r)),
            5 => PlayMode::GoalKick(side(r)),
            6 => PlayMode::CornerKick(side(r)),
            _ => PlayMode::Goal(side(r)),
        }),
        10 => Command::Recover,
        11 => Command::Done { cycle: r.gen_bool(0.5).then(|| r.gen()) },
        _ => Command::Bye,
    }
}

pub fn golden_command_text() -> String {
    golden_commands().iter().map(|c| encode_client_command(c).unwrap() + "\n").collect()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FuzzStats {
    pub inputs: usize,
    pub decoded: usize,
    pub rejected: usize,
}

fn mutate(r: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    const INTERESTING: &[u8] = b"()\" \\\0-.e+0123456789abcxyz\t\n\x7f\xff";
    let mut v = seed.to_vec();
    for _ in 0..r.gen_range(1..=4) {
        let len = v.len();
        match r.gen_range(0..7) {
            0 if len > 0 => {
                let i = r.gen_range(0..len);
                v[i] = r.gen();
            }
            1 => {
                let i = r.gen_range(0..=len);
                v.insert(i, INTERESTING[r.gen_range(0..INTERESTING.len())]);
            }
            2 if len > 0 => {
                let i = r.gen_range(0..len);
                let n = r.gen_range(1..=(len - i).min(16));
                v.drain(i..i + n);
            }
            3 if len > 0 => {
                let i = r.gen_range(0..len);
                v.truncate(i);
            }
            4 if len > 1 => {
                let i = r.gen_range(0..len);
                let j = r.gen_range(i..len.min(i + 32));
                let chunk = v[i..=j].to_vec();
                let at = r.gen_range(0..=len);
                v.splice(at..at, chunk);
            }
            5 => {
                let depth = r.gen_range(1..100);
                let mut nested = vec![b'('; depth];
                nested.extend(std::iter::repeat(b')').take(r.gen_range(0..=depth)));
                let at = r.gen_range(0..=len);
                v.splice(at..at, nested);
            }
            _ if len > 0 => {
                // replace a numeric byte with a different digit or sign
                let i = r.gen_range(0..len);
                if v[i].is_ascii_digit() {
                    v[i] = b"0123456789-."[r.gen_range(0..12)];
                }
            }
            _ => v.push(r.gen()),
        }
    }
    v
}

/// Feeds `n` mutated corpus lines to every decoder. A panic fails the caller.
pub fn fuzz_codec(n: usize, seed: u64) -> FuzzStats {
    use cls_core::codec::{decode_client_command, decode_server_message, parse_bytes};

    let mut corpus: Vec<String> = golden_server_text().lines().map(str::to_owned).collect();
    corpus.extend(golden_command_text().lines().map(str::to_owned));
    let mut r = rng(seed);
    let mut stats = FuzzStats::default();
    for _ in 0..n {
        let base = corpus[r.gen_range(0..corpus.len())].as_bytes();
        let input = mutate(&mut r, base);
        stats.inputs += 1;
        let server_ok = match parse_bytes(&input) {
            Ok(expr) => decode_server_message(&expr).is_ok(),
            Err(_) => false,
        };
        let client_ok = match std::str::from_utf8(&input) {
            Ok(text) => decode_client_command(text).is_ok(),
            Err(_) => false,
        };
        if server_ok || client_ok {
            stats.decoded += 1;
        } else {
            stats.rejected += 1;
        }
    }
    stats
}

/// Random agent pose on the pitch: (position, body direction, neck angle).
pub fn random_pose(r: &mut ChaCha8Rng) -> (Vec2, f64, f64) {
    (random_vec(r, 50.0, 32.0), r.gen_range(-180.0..180.0), r.gen_range(-90.0..90.0))
}

/// Exact (unquantized, unrounded) sightings of every landmark inside a 90
/// degree cone, computed from the map coordinates with plain trigonometry.
pub fn exact_flag_sightings(me: Vec2, face: f64) -> Vec<cls_core::codec::ObservedObject> {
    use cls_core::codec::{ObjectKind, ObservedObject};
    use cls_core::landmarks::LandmarkMap;
    let map = LandmarkMap::standard();
    let mut out = Vec::new();
    let mut add = |kind: ObjectKind, at: Vec2| {
        let (dx, dy) = (at.x - me.x, at.y - me.y);
        let mut dir = dy.atan2(dx).to_degrees() - face;
        while dir >= 180.0 {
            dir -= 360.0;
        }
        while dir < -180.0 {
            dir += 360.0;
        }
        if dir.abs() <= 45.0 {
            out.push(ObservedObject::new(kind, (dx * dx + dy * dy).sqrt(), dir));
        }
    };
    for (id, at) in map.flags() {
        add(ObjectKind::Flag(id.clone()), at);
    }
    for s in [Side::Left, Side::Right] {
        add(ObjectKind::Goal(s), map.goal(s));
    }
    out
}

/// Position errors of `localize` over `n` random poses observed through the
/// simulator's own quantized `see` rendering.
pub fn quantized_localization_errors(n: usize, seed: u64) -> Vec<f64> {
    use cls_core::model::{localize, PoseEstimate};
    let params = SimParams::default();
    let mut r = rng(seed);
    let mut errors = Vec::with_capacity(n);
    while errors.len() < n {
        let (pos, body, neck) = random_pose(&mut r);
        let mut w = SimWorld::new(seed);
        let mut p = PlayerState::new(Side::Left, 1, pos, 8000.0);
        p.body_dir = body;
        p.neck_dir = neck;
        w.insert_player(p);
        let msgs = render_observation(&w, &params, AgentId::Player { side: Side::Left, unum: 1 }, ObservationMode::See)
            .unwrap();
        let ServerMessage::See { objects, .. } = &msgs[1] else { unreachable!() };
        let prior = PoseEstimate { neck_dir: neck, ..PoseEstimate::default() };
        match localize(objects, cls_core::landmarks::LandmarkMap::standard(), Side::Left, &prior, 5) {
            Ok(est) => errors.push(est.pos.dist(pos)),
            Err(_) => continue,
        }
    }
    errors
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Twice the median localization error measured once with the reference
/// implementation (0.0657 m over 1000 poses, seed 1).
pub const LOCALIZATION_MEDIAN_BOUND: f64 = 0.1314;

/// A random intercept instance: (player pos, body dir, ball pos, ball vel).
pub fn random_intercept_case(r: &mut ChaCha8Rng) -> (Vec2, Option<f64>, Vec2, Vec2) {
    let player = random_vec(r, 52.5, 34.0);
    let body = if r.gen_bool(0.8) { Some(r.gen_range(-180.0..180.0)) } else { None };
    let ball = if r.gen_bool(0.1) {
        Vec2::new(player.x + r.gen_range(-1.0..1.0), player.y + r.gen_range(-1.0..1.0))
    } else {
        random_vec(r, 52.5, 34.0)
    };
    let vel = if r.gen_bool(0.2) { Vec2::ZERO } else { Vec2::polar(r.gen_range(0.0..3.0), r.gen_range(-180.0..180.0)) };
    (player, body, ball, vel)
}
