use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{angle_diff, Vec2};

use super::{TrackedObject, WorldState};

/// Largest interception time considered, in cycles.
pub const INTERCEPT_HORIZON: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reach {
    Cycles(u32),
    Unreachable,
}

impl Reach {
    pub fn cycles(self) -> Option<u32> {
        match self {
            Reach::Cycles(n) => Some(n),
            Reach::Unreachable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptParams {
    pub ball_decay: f64,
    pub player_speed_max: f64,
    pub dash_accel_gain: f64,
    pub kickable_area: f64,
    pub turn_threshold_deg: f64,
}

/// Ball position after `n` cycles without interference.
pub fn predict_ball_position(pos: Vec2, vel: Vec2, n: u32, decay: f64) -> Vec2 {
    if n == 0 {
        return pos;
    }
    let gain = if (1.0 - decay).abs() < f64::EPSILON { n as f64 } else { (1.0 - decay.powi(n as i32)) / (1.0 - decay) };
    pos + vel * gain
}

/// Smallest number of cycles after which `player` can have the ball within
/// kickable distance.
///
/// Movement is modelled as a dash from rest whose per-cycle speed grows by
/// `dash_accel_gain` up to `player_speed_max`. One cycle is charged for
/// turning when the player's body direction is known and points more than
/// `turn_threshold_deg` away from the target. Stamina is ignored.
pub fn intercept_cycles(player: &TrackedObject, ball: &TrackedObject, p: &InterceptParams) -> Reach {
    let mut reach_by_cycles = 0.0;
    // reach[k] = distance coverable in k cycles of dashing
    let mut reach = Vec::with_capacity(INTERCEPT_HORIZON as usize + 1);
    reach.push(0.0);
    for i in 1..=INTERCEPT_HORIZON {
        reach_by_cycles += p.player_speed_max.min(i as f64 * p.dash_accel_gain);
        reach.push(reach_by_cycles);
    }

    for t in 0..=INTERCEPT_HORIZON {
        let target = predict_ball_position(ball.pos, ball.vel, t, p.ball_decay);
        let to_target = target - player.pos;
        let dist = to_target.length();
        if dist <= p.kickable_area {
            return Reach::Cycles(t);
        }
        let turn = match player.body_dir {
            Some(body) if angle_diff(to_target.dir_deg(), body).abs() > p.turn_threshold_deg => 1,
            _ => 0,
        };
        let dash_cycles = t.saturating_sub(turn) as usize;
        if dist - reach[dash_cycles] <= p.kickable_area {
            return Reach::Cycles(t);
        }
    }
    Reach::Unreachable
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InterceptTable {
    /// False when the ball has never been seen; every entry is then unreachable.
    pub ball_known: bool,
    /// Includes the agent itself when it is a player.
    pub ours: BTreeMap<u8, Reach>,
    pub theirs: BTreeMap<u8, Reach>,
    /// (unum, cycles) of the quickest reachable player; ties go to the lower unum.
    pub fastest_ours: Option<(u8, u32)>,
    pub fastest_theirs: Option<(u8, u32)>,
}

impl InterceptTable {
    pub fn self_cycles(&self, unum: u8) -> Reach {
        self.ours.get(&unum).copied().unwrap_or(Reach::Unreachable)
    }
}

fn fastest(entries: &BTreeMap<u8, Reach>) -> Option<(u8, u32)> {
    // BTreeMap iterates in unum order, so the strict comparison keeps the lower unum on ties
    let mut best: Option<(u8, u32)> = None;
    for (&unum, reach) in entries {
        if let Reach::Cycles(n) = reach {
            if best.map_or(true, |(_, b)| *n < b) {
                best = Some((unum, *n));
            }
        }
    }
    best
}

/// Evaluates `intercept_cycles` for every player the agent knows about.
/// Players never seen are entered as unreachable.
pub fn build_intercept_table(ws: &WorldState) -> InterceptTable {
    let p = ws.config.intercept_params();
    let ball_known = ws.ball.seen();
    let eval = |o: &TrackedObject| {
        if ball_known && o.seen() {
            intercept_cycles(o, &ws.ball, &p)
        } else {
            Reach::Unreachable
        }
    };

    let mut ours: BTreeMap<u8, Reach> = ws.teammates.iter().map(|(&u, o)| (u, eval(o))).collect();
    if let Some(me) = ws.self_as_tracked() {
        let reach = if ball_known && ws.self_pose.valid { intercept_cycles(&me, &ws.ball, &p) } else { Reach::Unreachable };
        ours.insert(ws.unum, reach);
    }
    let theirs: BTreeMap<u8, Reach> = ws.opponents.iter().map(|(&u, o)| (u, eval(o))).collect();

    InterceptTable {
        ball_known,
        fastest_ours: fastest(&ours),
        fastest_theirs: fastest(&theirs),
        ours,
        theirs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TrackedKind;
    use approx::assert_abs_diff_eq;

    fn params() -> InterceptParams {
        crate::model::ModelConfig::default().intercept_params()
    }

    fn obj(kind: TrackedKind, pos: Vec2, vel: Vec2, body: Option<f64>) -> TrackedObject {
        TrackedObject {
            pos,
            vel,
            body_dir: body,
            confidence: 1.0,
            last_seen_cycle: Some(0),
            last_seen_pos: pos,
            ..TrackedObject::unseen(kind)
        }
    }

    fn ball(pos: Vec2, vel: Vec2) -> TrackedObject {
        obj(TrackedKind::Ball, pos, vel, None)
    }

    fn player(pos: Vec2, body: Option<f64>) -> TrackedObject {
        obj(TrackedKind::Player { side: crate::Side::Left, unum: 1 }, pos, Vec2::ZERO, body)
    }

    #[test]
    fn prediction_examples() {
        let v = Vec2::new(1.0, 0.0);
        assert_eq!(predict_ball_position(Vec2::ZERO, v, 0, 0.94), Vec2::ZERO);
        assert_abs_diff_eq!(predict_ball_position(Vec2::ZERO, v, 2, 0.94).x, 1.94, epsilon = 1e-12);
        // 0.94^200 is about 4e-6, so n = 200 is close to but not at the limit
        let far = predict_ball_position(Vec2::ZERO, v, 200, 0.94);
        let limit = 1.0 / 0.06;
        assert_abs_diff_eq!(limit - far.x, limit * 0.94f64.powi(200), epsilon = 1e-12);
        assert!(limit - far.x < 1e-4);
    }

    #[test]
    fn prediction_matches_iteration() {
        let mut pos = Vec2::new(3.0, -4.0);
        let mut vel = Vec2::new(2.2, 1.1);
        let (p0, v0) = (pos, vel);
        for n in 0..=500 {
            let closed = predict_ball_position(p0, v0, n, 0.94);
            assert!(closed.dist(pos) < 1e-9, "n = {n}");
            pos = pos + vel;
            vel = vel * 0.94;
        }
    }

    #[test]
    fn on_the_ball_is_zero() {
        let r = intercept_cycles(&player(Vec2::ZERO, Some(0.0)), &ball(Vec2::new(0.5, 0.0), Vec2::ZERO), &params());
        assert_eq!(r, Reach::Cycles(0));
    }

    #[test]
    fn stationary_ball_ahead() {
        // reach: 0.6, 1.65, 2.7, ... ; need 10 - 1.085 = 8.915 -> first reach >= 8.915 after 9 dashes
        let r = intercept_cycles(&player(Vec2::ZERO, Some(0.0)), &ball(Vec2::new(10.0, 0.0), Vec2::ZERO), &params());
        assert_eq!(r, Reach::Cycles(9));
        let turned = intercept_cycles(&player(Vec2::ZERO, Some(90.0)), &ball(Vec2::new(10.0, 0.0), Vec2::ZERO), &params());
        assert_eq!(turned, Reach::Cycles(10));
    }

    #[test]
    fn runaway_ball_is_unreachable() {
        let p = InterceptParams { ball_decay: 1.0, ..params() };
        let r = intercept_cycles(&player(Vec2::ZERO, None), &ball(Vec2::new(5.0, 0.0), Vec2::new(2.0, 0.0)), &p);
        assert_eq!(r, Reach::Unreachable);
    }

    #[test]
    fn fastest_prefers_lower_unum() {
        let mut m = BTreeMap::new();
        m.insert(7, Reach::Cycles(4));
        m.insert(3, Reach::Cycles(4));
        m.insert(5, Reach::Unreachable);
        assert_eq!(fastest(&m), Some((3, 4)));
        assert_eq!(fastest(&BTreeMap::new()), None);
    }
}
