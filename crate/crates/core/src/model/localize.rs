use crate::codec::{ObjectKind, ObservedObject};
use crate::geom::{normalize_angle, Vec2};
use crate::landmarks::LandmarkMap;
use crate::types::Side;

use super::PoseEstimate;

/// Fixes with an RMS distance residual at or above this are flagged invalid.
pub const MAX_VALID_RESIDUAL: f64 = 5.0;
/// Landmarks used to average the orientation estimate.
const ORIENTATION_FLAGS: usize = 3;
const GAUSS_NEWTON_ITERATIONS: usize = 25;
/// Added to the position error for every dead-reckoned cycle.
const DEAD_RECKON_ERROR_GROWTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalizeError {
    /// Fewer than two landmarks were visible. Carries the dead-reckoned pose.
    #[error("fewer than two landmarks visible")]
    NoLandmarks { dead_reckoned: PoseEstimate },
}

/// A landmark sighting resolved against the map, in the team frame.
#[derive(Debug, Clone, Copy)]
struct Sighting {
    at: Vec2,
    distance: f64,
    direction: f64,
}

fn sightings(seen: &[ObservedObject], map: &LandmarkMap, frame: Side) -> Vec<Sighting> {
    let mut out: Vec<Sighting> = seen
        .iter()
        .filter_map(|o| {
            let global = match &o.kind {
                ObjectKind::Flag(id) => map.flag(id)?,
                ObjectKind::Goal(s) => map.goal(*s),
                _ => return None,
            };
            Some(Sighting { at: global * frame.sign(), distance: o.distance, direction: o.direction })
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    out
}

/// Rigid 2D fit of the observed relative vectors onto the map positions.
/// Exact for noise-free input with at least two distinct landmarks.
fn bearing_fix(s: &[Sighting]) -> (Vec2, f64) {
    let n = s.len() as f64;
    let rel: Vec<Vec2> = s.iter().map(|x| Vec2::polar(x.distance, x.direction)).collect();
    let rel_c = rel.iter().fold(Vec2::ZERO, |a, &b| a + b) * (1.0 / n);
    let map_c = s.iter().fold(Vec2::ZERO, |a, x| a + x.at) * (1.0 / n);
    let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
    for (r, x) in rel.iter().zip(s) {
        let a = *r - rel_c;
        let b = x.at - map_c;
        sin_sum += a.x * b.y - a.y * b.x;
        cos_sum += a.dot(b);
    }
    let face = sin_sum.atan2(cos_sum).to_degrees();
    (map_c - rel_c.rotated(face), normalize_angle(face))
}

fn rms_residual(pos: Vec2, s: &[Sighting]) -> f64 {
    let sum: f64 = s.iter().map(|x| (pos.dist(x.at) - x.distance).powi(2)).sum();
    (sum / s.len() as f64).sqrt()
}

/// Gauss-Newton on the distance residuals, starting from `seed`.
fn refine(seed: Vec2, s: &[Sighting]) -> Vec2 {
    let mut p = seed;
    for _ in 0..GAUSS_NEWTON_ITERATIONS {
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for x in s {
            let diff = p - x.at;
            let r = diff.length();
            if r < 1e-9 {
                continue;
            }
            let j = diff * (1.0 / r);
            let res = r - x.distance;
            a11 += j.x * j.x;
            a12 += j.x * j.y;
            a22 += j.y * j.y;
            g1 += j.x * res;
            g2 += j.y * res;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-12 {
            break;
        }
        let step = Vec2::new((a22 * g1 - a12 * g2) / det, (a11 * g2 - a12 * g1) / det);
        p = p - step;
        if step.length() < 1e-12 {
            break;
        }
    }
    p
}

fn circular_mean(angles: impl Iterator<Item = f64>) -> f64 {
    let v = angles.fold(Vec2::ZERO, |acc, a| acc + Vec2::polar(1.0, a));
    v.dir_deg()
}

/// Estimates the agent's pose from landmark sightings.
///
/// `prior.neck_dir` must hold the current neck angle; `prior.vel` is the
/// displacement applied when dead-reckoning. With at least two landmarks the
/// position is the least-squares intersection of the distance circles and the
/// body direction is averaged from the nearest landmarks' bearings.
pub fn localize(
    seen: &[ObservedObject],
    map: &LandmarkMap,
    frame: Side,
    prior: &PoseEstimate,
    max_dead_reckon_age: u32,
) -> Result<PoseEstimate, LocalizeError> {
    let s = sightings(seen, map, frame);
    if s.len() < 2 {
        let age = prior.age.saturating_add(1);
        return Err(LocalizeError::NoLandmarks {
            dead_reckoned: PoseEstimate {
                pos: prior.pos + prior.vel,
                age,
                valid: prior.valid && age < max_dead_reckon_age,
                pos_error: prior.pos_error + DEAD_RECKON_ERROR_GROWTH,
                ..*prior
            },
        });
    }

    let (seed, _) = bearing_fix(&s);
    let refined = refine(seed, &s);
    let pos = if rms_residual(refined, &s) <= rms_residual(seed, &s) { refined } else { seed };
    let residual = rms_residual(pos, &s);

    let face = circular_mean(
        s.iter()
            .take(ORIENTATION_FLAGS)
            .map(|x| (x.at - pos).dir_deg() - x.direction),
    );

    Ok(PoseEstimate {
        pos,
        vel: prior.vel,
        body_dir: normalize_angle(face - prior.neck_dir),
        neck_dir: prior.neck_dir,
        pos_error: residual,
        valid: residual < MAX_VALID_RESIDUAL,
        age: 0,
    })
}
