use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;

use cls_core::sim::{AgentId, PlayerState, SimParams, SimWorld};
use cls_core::{Side, Vec2};

pub const MAX_PLAYERS_PER_SIDE: u8 = 11;

/// Which of the three server sockets a datagram arrived on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortKind {
    Player,
    Trainer,
    Coach,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegisterError {
    #[error("no_more_team_or_player")]
    NoMoreTeamOrPlayer,
    #[error("already_registered")]
    AlreadyRegistered,
    #[error("illegal_init")]
    IllegalInit,
}

#[derive(Debug, Clone)]
pub struct Client {
    pub id: AgentId,
    pub addr: SocketAddr,
    pub port: PortKind,
    /// Last cycle for which the agent sent `(done)`.
    pub done_cycle: Option<u32>,
}

/// Connected agents, addressed by the socket they talk through.
#[derive(Debug, Default)]
pub struct Registry {
    clients: BTreeMap<AgentId, Client>,
    by_addr: HashMap<(PortKind, SocketAddr), AgentId>,
}

/// Off-pitch spot a newly connected player stands on until it moves.
pub fn bench_position(side: Side, unum: u8) -> Vec2 {
    Vec2::new(-3.0 * unum as f64, -37.0) * side.sign()
}

impl Registry {
    pub fn lookup(&self, port: PortKind, addr: SocketAddr) -> Option<AgentId> {
        self.by_addr.get(&(port, addr)).copied()
    }

    pub fn get(&self, id: AgentId) -> Option<&Client> {
        self.clients.get(&id)
    }

    pub fn get_mut(&mut self, id: AgentId) -> Option<&mut Client> {
        self.clients.get_mut(&id)
    }

    /// Clients in (trainer, coaches, players by side and unum) order.
    pub fn clients(&self) -> impl Iterator<Item = &Client> {
        self.clients.values()
    }

    pub fn len(&self) -> usize {
        self.clients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clients.is_empty()
    }

    /// The side a team plays on, claiming a free side for a new team. The
    /// first team to connect gets the left side.
    fn side_for(world: &mut SimWorld, team: &str) -> Option<Side> {
        if let Some(s) = world.teams.side_of(team) {
            return Some(s);
        }
        for (side, slot) in [(Side::Left, &mut world.teams.left), (Side::Right, &mut world.teams.right)] {
            if slot.is_none() {
                *slot = Some(team.to_string());
                return Some(side);
            }
        }
        None
    }

    /// Handles an `init` arriving on `port` from `addr`.
    pub fn register(
        &mut self,
        world: &mut SimWorld,
        params: &SimParams,
        port: PortKind,
        addr: SocketAddr,
        team: Option<&str>,
    ) -> Result<AgentId, RegisterError> {
        if self.by_addr.contains_key(&(port, addr)) {
            return Err(RegisterError::AlreadyRegistered);
        }
        let id = match (port, team) {
            (PortKind::Trainer, None) => {
                if self.clients.contains_key(&AgentId::Trainer) {
                    return Err(RegisterError::AlreadyRegistered);
                }
                AgentId::Trainer
            }
            (PortKind::Coach, Some(team)) => {
                let side = Self::side_for(world, team).ok_or(RegisterError::NoMoreTeamOrPlayer)?;
                let id = AgentId::Coach(side);
                if self.clients.contains_key(&id) {
                    return Err(RegisterError::NoMoreTeamOrPlayer);
                }
                id
            }
            (PortKind::Player, Some(team)) => {
                let side = world
                    .teams
                    .side_of(team)
                    .or_else(|| {
                        // don't claim a side unless a shirt number is free on it
                        let free = [Side::Left, Side::Right]
                            .into_iter()
                            .find(|s| world.teams.name(*s).is_none())?;
                        Some(free)
                    })
                    .ok_or(RegisterError::NoMoreTeamOrPlayer)?;
                let unum = (1..=MAX_PLAYERS_PER_SIDE)
                    .find(|u| world.player(side, *u).is_none())
                    .ok_or(RegisterError::NoMoreTeamOrPlayer)?;
                Self::side_for(world, team);
                world.insert_player(PlayerState::new(side, unum, bench_position(side, unum), params.stamina_max));
                AgentId::Player { side, unum }
            }
            _ => return Err(RegisterError::IllegalInit),
        };
        self.clients.insert(id, Client { id, addr, port, done_cycle: None });
        self.by_addr.insert((port, addr), id);
        Ok(id)
    }

    /// Disconnects an agent, taking its player off the pitch.
    pub fn remove(&mut self, world: &mut SimWorld, id: AgentId) {
        if let Some(c) = self.clients.remove(&id) {
            self.by_addr.remove(&(c.port, c.addr));
        }
        if let AgentId::Player { side, unum } = id {
            world.remove_player(side, unum);
        }
    }

    /// True when every connected agent has reported `(done)` for `cycle`.
    pub fn all_done(&self, cycle: u32) -> bool {
        self.clients.values().all(|c| c.done_cycle == Some(cycle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(port: u16) -> SocketAddr {
        SocketAddr::from(([127, 0, 0, 1], port))
    }

    #[test]
    fn players_fill_sides_in_arrival_order() {
        let mut w = SimWorld::new(1);
        let p = SimParams::default();
        let mut r = Registry::default();
        let a = r.register(&mut w, &p, PortKind::Player, addr(1), Some("A")).unwrap();
        let b = r.register(&mut w, &p, PortKind::Player, addr(2), Some("A")).unwrap();
        let c = r.register(&mut w, &p, PortKind::Player, addr(3), Some("B")).unwrap();
        assert_eq!(a, AgentId::Player { side: Side::Left, unum: 1 });
        assert_eq!(b, AgentId::Player { side: Side::Left, unum: 2 });
        assert_eq!(c, AgentId::Player { side: Side::Right, unum: 1 });
        assert_eq!(w.players.len(), 3);
        assert_eq!(
            r.register(&mut w, &p, PortKind::Player, addr(4), Some("C")),
            Err(RegisterError::NoMoreTeamOrPlayer)
        );
        assert_eq!(r.register(&mut w, &p, PortKind::Player, addr(1), Some("A")), Err(RegisterError::AlreadyRegistered));
    }

    #[test]
    fn a_side_holds_eleven_players() {
        let mut w = SimWorld::new(1);
        let p = SimParams::default();
        let mut r = Registry::default();
        for i in 0..11 {
            r.register(&mut w, &p, PortKind::Player, addr(100 + i), Some("A")).unwrap();
        }
        assert_eq!(
            r.register(&mut w, &p, PortKind::Player, addr(200), Some("A")),
            Err(RegisterError::NoMoreTeamOrPlayer)
        );
        // freeing a shirt makes it available again
        r.remove(&mut w, AgentId::Player { side: Side::Left, unum: 4 });
        let again = r.register(&mut w, &p, PortKind::Player, addr(201), Some("A")).unwrap();
        assert_eq!(again, AgentId::Player { side: Side::Left, unum: 4 });
    }

    #[test]
    fn coaches_and_trainer() {
        let mut w = SimWorld::new(1);
        let p = SimParams::default();
        let mut r = Registry::default();
        assert_eq!(r.register(&mut w, &p, PortKind::Coach, addr(1), Some("A")), Ok(AgentId::Coach(Side::Left)));
        assert_eq!(r.register(&mut w, &p, PortKind::Coach, addr(2), Some("A")), Err(RegisterError::NoMoreTeamOrPlayer));
        assert_eq!(r.register(&mut w, &p, PortKind::Trainer, addr(3), None), Ok(AgentId::Trainer));
        assert_eq!(r.register(&mut w, &p, PortKind::Trainer, addr(4), None), Err(RegisterError::AlreadyRegistered));
        assert_eq!(r.register(&mut w, &p, PortKind::Player, addr(5), None), Err(RegisterError::IllegalInit));
        assert!(!r.all_done(0));
        for id in [AgentId::Coach(Side::Left), AgentId::Trainer] {
            r.get_mut(id).unwrap().done_cycle = Some(0);
        }
        assert!(r.all_done(0));
    }
}
