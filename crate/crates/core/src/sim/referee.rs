use crate::geom::Vec2;
use crate::types::{PlayMode, Side};

use super::config::SimParams;
use super::event::Event;
use super::world::SimWorld;

/// Goal kicks restart from the corner of the goal area.
const GOAL_AREA_LENGTH: f64 = 5.5;
const GOAL_AREA_HALF_WIDTH: f64 = 9.16;
/// Corner kicks restart this far inside the corner.
const CORNER_INSET: f64 = 1.0;

fn change(world: &mut SimWorld, to: PlayMode, events: &mut Vec<Event>) {
    let from = world.play_mode;
    if from != to {
        world.set_play_mode(to);
        events.push(Event::PlayModeChange { from, to });
    }
}

fn place_ball(world: &mut SimWorld, pos: Vec2) {
    world.ball.pos = pos;
    world.ball.vel = Vec2::ZERO;
}

/// Applies the referee rules to a world that has just moved. Mutates score,
/// ball placement and play mode in place and returns the resulting mode with
/// the events raised.
pub fn referee_judge(world: &mut SimWorld, params: &SimParams) -> (PlayMode, Vec<Event>) {
    let mut events = Vec::new();

    if world.cycle >= params.total_cycles() {
        change(world, PlayMode::TimeOver, &mut events);
        return (world.play_mode, events);
    }

    let elapsed = world.cycle.saturating_sub(world.mode_since);
    match world.play_mode {
        PlayMode::TimeOver => {}
        PlayMode::BeforeKickOff => {
            if elapsed >= params.kickoff_delay {
                place_ball(world, Vec2::ZERO);
                change(world, PlayMode::KickOff(Side::Left), &mut events);
            }
        }
        PlayMode::Goal(scorer) => {
            if elapsed >= params.goal_pause {
                place_ball(world, Vec2::ZERO);
                change(world, PlayMode::KickOff(scorer.opposite()), &mut events);
            }
        }
        PlayMode::KickOff(_) | PlayMode::KickIn(_) | PlayMode::GoalKick(_) | PlayMode::CornerKick(_) => {
            if elapsed >= params.dead_ball_timeout {
                change(world, PlayMode::PlayOn, &mut events);
            }
        }
        PlayMode::PlayOn => judge_ball_out(world, params, &mut events),
    }
    (world.play_mode, events)
}

fn judge_ball_out(world: &mut SimWorld, params: &SimParams, events: &mut Vec<Event>) {
    let b = world.ball.pos;
    let hl = params.pitch_half_length;
    let hw = params.pitch_half_width;
    let r = params.ball_size;

    if b.x.abs() > hl + r {
        // side whose goal line the ball crossed
        let defender = if b.x > 0.0 { Side::Right } else { Side::Left };
        let attacker = defender.opposite();
        if b.y.abs() < params.goal_half_width {
            match attacker {
                Side::Left => world.scores.0 += 1,
                Side::Right => world.scores.1 += 1,
            }
            events.push(Event::Goal { side: attacker, scores: world.scores });
            place_ball(world, Vec2::ZERO);
            world.last_touch = None;
            change(world, PlayMode::Goal(attacker), events);
            return;
        }
        let sx = b.x.signum();
        let sy = if b.y < 0.0 { -1.0 } else { 1.0 };
        if world.last_touch == Some(defender) {
            place_ball(world, Vec2::new(sx * (hl - CORNER_INSET), sy * (hw - CORNER_INSET)));
            change(world, PlayMode::CornerKick(attacker), events);
        } else {
            place_ball(world, Vec2::new(sx * (hl - GOAL_AREA_LENGTH), sy * GOAL_AREA_HALF_WIDTH));
            change(world, PlayMode::GoalKick(defender), events);
        }
        return;
    }

    if b.y.abs() > hw + r {
        let taker = match world.last_touch {
            Some(s) => s.opposite(),
            // untouched ball: the side defending that half restarts
            None if b.x < 0.0 => Side::Left,
            None => Side::Right,
        };
        place_ball(world, Vec2::new(b.x.clamp(-hl, hl), hw * b.y.signum()));
        change(world, PlayMode::KickIn(taker), events);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn playing(ball: Vec2, touch: Option<Side>) -> SimWorld {
        let mut w = SimWorld::new(1);
        w.cycle = 10;
        w.play_mode = PlayMode::PlayOn;
        w.ball.pos = ball;
        w.ball.vel = Vec2::new(1.0, 0.0);
        w.last_touch = touch;
        w
    }

    #[test]
    fn goal_inside_mouth() {
        let params = SimParams::default();
        let mut w = playing(Vec2::new(53.0, 0.0), Some(Side::Left));
        let (mode, events) = referee_judge(&mut w, &params);
        assert_eq!(mode, PlayMode::Goal(Side::Left));
        assert_eq!(w.scores, (1, 0));
        assert_eq!(w.ball.pos, Vec2::ZERO);
        assert_eq!(events[0], Event::Goal { side: Side::Left, scores: (1, 0) });

        let mut w = playing(Vec2::new(-52.6, 7.0), None);
        referee_judge(&mut w, &params);
        assert_eq!(w.scores, (0, 1));
        assert_eq!(w.play_mode, PlayMode::Goal(Side::Right));
    }

    #[test]
    fn ball_on_goal_line_is_still_in_play() {
        let params = SimParams::default();
        let mut w = playing(Vec2::new(52.55, 0.0), Some(Side::Left));
        let (mode, events) = referee_judge(&mut w, &params);
        assert_eq!(mode, PlayMode::PlayOn);
        assert!(events.is_empty());
    }

    #[test]
    fn touchline_gives_kick_in_to_other_side() {
        let params = SimParams::default();
        let mut w = playing(Vec2::new(0.0, 35.0), Some(Side::Right));
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::KickIn(Side::Left));
        assert_eq!(w.ball.pos, Vec2::new(0.0, 34.0));
        let mut w = playing(Vec2::new(10.0, -35.0), Some(Side::Left));
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::KickIn(Side::Right));
    }

    #[test]
    fn goal_line_outside_mouth() {
        let params = SimParams::default();
        let mut w = playing(Vec2::new(53.0, 20.0), Some(Side::Left));
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::GoalKick(Side::Right));
        assert_eq!(w.ball.pos, Vec2::new(47.0, 9.16));
        let mut w = playing(Vec2::new(53.0, -20.0), Some(Side::Right));
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::CornerKick(Side::Left));
        assert_eq!(w.ball.pos, Vec2::new(51.5, -33.0));
    }

    #[test]
    fn time_over_and_auto_resume() {
        let params = SimParams::default();
        let mut w = playing(Vec2::ZERO, None);
        w.cycle = 6000;
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::TimeOver);

        let mut w = playing(Vec2::ZERO, None);
        w.play_mode = PlayMode::KickIn(Side::Left);
        w.mode_since = 10;
        w.cycle = 109;
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::KickIn(Side::Left));
        w.cycle = 110;
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::PlayOn);
    }

    #[test]
    fn kickoff_sequence() {
        let params = SimParams::default();
        let mut w = SimWorld::new(1);
        w.cycle = params.kickoff_delay;
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::KickOff(Side::Left));
        let mut w = SimWorld::new(1);
        w.play_mode = PlayMode::Goal(Side::Left);
        w.mode_since = 100;
        w.cycle = 100 + params.goal_pause;
        assert_eq!(referee_judge(&mut w, &params).0, PlayMode::KickOff(Side::Right));
    }
}
