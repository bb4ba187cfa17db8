//! Fixed field markers visible to players.
//!
//! 53 flags (the four goal posts included) plus the two goal centers, laid
//! out as on the standard 105 x 68 m pitch. `t`/`b` name the top (-y) and
//! bottom (+y) touchlines.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::geom::Vec2;
use crate::types::Side;

pub const PITCH_HALF_LENGTH: f64 = 52.5;
pub const PITCH_HALF_WIDTH: f64 = 34.0;
pub const GOAL_HALF_WIDTH: f64 = 7.01;
pub const PENALTY_AREA_LENGTH: f64 = 16.5;
pub const PENALTY_AREA_HALF_WIDTH: f64 = 20.16;
/// Distance of the outer flag rows from the field boundary.
pub const PITCH_MARGIN: f64 = 5.0;

/// Identifier of a stationary landmark, e.g. `["c", "t"]` for `(f c t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagId(pub Vec<String>);

impl FlagId {
    pub fn new(parts: &[&str]) -> FlagId {
        FlagId(parts.iter().map(|s| s.to_string()).collect())
    }

    /// Wire name without the leading `f`, e.g. `"p l c"`.
    pub fn name(&self) -> String {
        self.0.join(" ")
    }
}

#[derive(Debug)]
pub struct LandmarkMap {
    flags: BTreeMap<FlagId, Vec2>,
    goals: [Vec2; 2],
}

fn build() -> LandmarkMap {
    let hl = PITCH_HALF_LENGTH;
    let hw = PITCH_HALF_WIDTH;
    let m = PITCH_MARGIN;
    let mut flags = BTreeMap::new();
    let mut put = |parts: &[&str], x: f64, y: f64| {
        flags.insert(FlagId::new(parts), Vec2::new(x, y));
    };

    put(&["c"], 0.0, 0.0);
    put(&["c", "t"], 0.0, -hw);
    put(&["c", "b"], 0.0, hw);
    for (lr, sx) in [("l", -1.0), ("r", 1.0)] {
        put(&[lr, "t"], sx * hl, -hw);
        put(&[lr, "b"], sx * hl, hw);
        let px = sx * (hl - PENALTY_AREA_LENGTH);
        put(&["p", lr, "t"], px, -PENALTY_AREA_HALF_WIDTH);
        put(&["p", lr, "c"], px, 0.0);
        put(&["p", lr, "b"], px, PENALTY_AREA_HALF_WIDTH);
        put(&["g", lr, "t"], sx * hl, -GOAL_HALF_WIDTH);
        put(&["g", lr, "b"], sx * hl, GOAL_HALF_WIDTH);
        // behind the goal lines
        put(&[lr, "0"], sx * (hl + m), 0.0);
        for d in [10, 20, 30] {
            let ds = d.to_string();
            put(&[lr, "t", &ds], sx * (hl + m), -(d as f64));
            put(&[lr, "b", &ds], sx * (hl + m), d as f64);
        }
    }
    // beyond the touchlines
    for (tb, sy) in [("t", -1.0), ("b", 1.0)] {
        put(&[tb, "0"], 0.0, sy * (hw + m));
        for d in [10, 20, 30, 40, 50] {
            let ds = d.to_string();
            put(&[tb, "l", &ds], -(d as f64), sy * (hw + m));
            put(&[tb, "r", &ds], d as f64, sy * (hw + m));
        }
    }

    LandmarkMap {
        flags,
        goals: [Vec2::new(-hl, 0.0), Vec2::new(hl, 0.0)],
    }
}

impl LandmarkMap {
    /// The standard landmark layout in global field coordinates.
    pub fn standard() -> &'static LandmarkMap {
        static MAP: OnceLock<LandmarkMap> = OnceLock::new();
        MAP.get_or_init(build)
    }

    pub fn flag(&self, id: &FlagId) -> Option<Vec2> {
        self.flags.get(id).copied()
    }

    pub fn contains(&self, parts: &[String]) -> bool {
        self.flags.contains_key(&FlagId(parts.to_vec()))
    }

    pub fn flags(&self) -> impl Iterator<Item = (&FlagId, Vec2)> {
        self.flags.iter().map(|(k, v)| (k, *v))
    }

    pub fn flag_count(&self) -> usize {
        self.flags.len()
    }

    /// Center of the goal on `side`'s end of the pitch.
    pub fn goal(&self, side: Side) -> Vec2 {
        match side {
            Side::Left => self.goals[0],
            Side::Right => self.goals[1],
        }
    }

    /// The flag sitting at the point reflection of `id` through the center spot.
    pub fn mirror(&self, id: &FlagId) -> Option<FlagId> {
        let p = self.flag(id)?;
        self.flags
            .iter()
            .find(|(_, q)| q.x == -p.x && q.y == -p.y)
            .map(|(k, _)| k.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_map_has_53_flags() {
        let map = LandmarkMap::standard();
        assert_eq!(map.flag_count(), 53);
        assert_eq!(map.flag(&FlagId::new(&["c"])), Some(Vec2::ZERO));
        assert_eq!(map.flag(&FlagId::new(&["g", "r", "b"])), Some(Vec2::new(52.5, 7.01)));
        assert_eq!(map.flag(&FlagId::new(&["t", "l", "50"])), Some(Vec2::new(-50.0, -39.0)));
        assert_eq!(map.goal(Side::Left), Vec2::new(-52.5, 0.0));
    }

    #[test]
    fn every_flag_has_a_mirror_partner() {
        let map = LandmarkMap::standard();
        for (id, p) in map.flags() {
            let m = map.mirror(id).expect("mirror");
            assert_eq!(map.flag(&m), Some(-p));
        }
        assert_eq!(
            map.mirror(&FlagId::new(&["l", "t", "10"])),
            Some(FlagId::new(&["r", "b", "10"]))
        );
    }
}
