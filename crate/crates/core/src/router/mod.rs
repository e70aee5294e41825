//! Atom routing between consecutive placements.
//!
//! [`plan_transition`] turns the difference between two occupancies into
//! ordered AOD batches. Each batch is order-preserving in x and y, drops only
//! into traps that are empty (or emptied by an earlier or the same batch), and
//! every transit path keeps clearance from the atoms left in static traps.

mod batch;
mod path;
mod schedule;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{ArchError, ArchitectureConfig, Occupancy, Site};
use crate::timing::TimingModel;

pub use batch::{
    batch_moves, compatible, plan_batches, BatchPlan, EdgeKind, MoveConflictDag, MoveSpec,
};
pub use path::{
    path_length, point_segment_distance, pre_shift_path, PathError, Point, RouterParams,
};
pub use schedule::{
    assemble_schedule, Counters, Event, EventKind, QubitTiming, Schedule, ScheduleError,
    SCHEDULE_VERSION,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("q{qubit} cannot drop into trap {trap}: held by static q{occupant}")]
    TargetOccupied {
        qubit: usize,
        trap: usize,
        occupant: usize,
    },
    #[error("no free trap to park q{qubit} while breaking a swap cycle")]
    NoParking { qubit: usize },
    #[error("no collision-free lane for q{qubit} from {from} to {to} (blocked by {obstacle:?})")]
    Unroutable {
        qubit: usize,
        from: Site,
        to: Site,
        obstacle: Option<Site>,
    },
    #[error("occupancies cover {from} and {to} qubits")]
    SizeMismatch { from: usize, to: usize },
    #[error(transparent)]
    Arch(#[from] ArchError),
}

/// One atom's transport inside a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub qubit: usize,
    /// (start_x, end_x, start_y, end_y) in µm.
    pub vector: (f64, f64, f64, f64),
    pub pick_site: Site,
    pub drop_site: Site,
    /// Transit waypoints including both endpoints.
    pub path: Vec<Point>,
}

impl Move {
    pub fn spec(&self, config: &ArchitectureConfig) -> MoveSpec {
        MoveSpec {
            qubit: self.qubit,
            from: config.site_index(self.pick_site),
            to: config.site_index(self.drop_site),
            start: (self.vector.0, self.vector.2),
            end: (self.vector.1, self.vector.3),
        }
    }

    pub fn path_length(&self) -> f64 {
        path_length(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveBatch {
    pub moves: Vec<Move>,
    pub duration_us: f64,
}

/// Full routing result for one transition.
#[derive(Debug, Clone)]
pub struct Transition {
    pub batches: Vec<MoveBatch>,
    pub dag: MoveConflictDag,
}

pub(crate) fn move_specs(
    from: &Occupancy,
    to: &Occupancy,
    config: &ArchitectureConfig,
) -> Vec<MoveSpec> {
    from.sites()
        .iter()
        .zip(to.sites())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(q, (&a, &b))| MoveSpec {
            qubit: q,
            from: config.site_index(a),
            to: config.site_index(b),
            start: config.position(a),
            end: config.position(b),
        })
        .collect()
}

/// Batching of `from → to` without paths; shared with the placement cost.
pub fn batch_plan(
    from: &Occupancy,
    to: &Occupancy,
    config: &ArchitectureConfig,
) -> Result<BatchPlan, RouteError> {
    if from.n_qubits() != to.n_qubits() {
        return Err(RouteError::SizeMismatch {
            from: from.n_qubits(),
            to: to.n_qubits(),
        });
    }
    for &s in from.sites().iter().chain(to.sites()) {
        config.site_position(s)?;
    }
    plan_batches(
        move_specs(from, to, config),
        config.n_traps(),
        |t| config.position(config.site_at(t)),
        |t| from.qubit_at(config.site_at(t)),
        |t| {
            let s = config.site_at(t);
            from.qubit_at(s).is_some() || to.qubit_at(s).is_some()
        },
    )
}

/// Number of AOD batches a transition needs, without computing paths.
pub fn count_batches(
    from: &Occupancy,
    to: &Occupancy,
    config: &ArchitectureConfig,
) -> Result<usize, RouteError> {
    Ok(batch_plan(from, to, config)?.batches.len())
}

/// Routes `from → to` into ordered, legal batches.
pub fn plan_transition(
    from: &Occupancy,
    to: &Occupancy,
    config: &ArchitectureConfig,
    timing: &TimingModel,
    params: &RouterParams,
) -> Result<Transition, RouteError> {
    let plan = batch_plan(from, to, config)?;
    let mut current = from.clone();
    let mut batches = Vec::with_capacity(plan.batches.len());

    for members in &plan.batches {
        let movers: Vec<usize> = members.iter().map(|&i| plan.moves[i].qubit).collect();
        let statics: Vec<(Point, Site)> = current
            .sites()
            .iter()
            .enumerate()
            .filter(|(q, _)| !movers.contains(q))
            .map(|(_, &s)| (config.position(s), s))
            .collect();
        let obstacle_points: Vec<Point> = statics.iter().map(|&(p, _)| p).collect();

        let mut moves = Vec::with_capacity(members.len());
        for &i in members {
            let spec = plan.moves[i];
            let pick_site = config.site_at(spec.from);
            let drop_site = config.site_at(spec.to);
            let path = pre_shift_path(spec.start, spec.end, &obstacle_points, config, params)
                .map_err(|PathError::NoLane { obstacle }| RouteError::Unroutable {
                    qubit: spec.qubit,
                    from: pick_site,
                    to: drop_site,
                    obstacle: obstacle.map(|o| statics[o].1),
                })?;
            moves.push(Move {
                qubit: spec.qubit,
                vector: (spec.start.0, spec.end.0, spec.start.1, spec.end.1),
                pick_site,
                drop_site,
                path,
            });
        }
        // Picks happen before drops, so lift every mover into a scratch
        // site outside the array first.
        for (k, m) in moves.iter().enumerate() {
            current.relocate(
                m.qubit,
                Site::Storage {
                    row: usize::MAX,
                    col: k,
                },
            )?;
        }
        for m in &moves {
            current.relocate(m.qubit, m.drop_site)?;
        }
        let longest = moves.iter().map(Move::path_length).fold(0.0, f64::max);
        batches.push(MoveBatch {
            moves,
            duration_us: timing.move_time(longest),
        });
    }
    debug_assert_eq!(current.sites(), to.sites());
    Ok(Transition {
        batches,
        dag: plan.dag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architecture::Slot;

    fn st(row: usize, col: usize) -> Site {
        Site::Storage { row, col }
    }

    fn en(row: usize, site: usize, slot: Slot) -> Site {
        Site::Entanglement { row, site, slot }
    }

    #[test]
    fn identical_points_need_no_batches() {
        let cfg = ArchitectureConfig::default();
        let occ = Occupancy::from_sites(vec![st(0, 0), st(0, 1)]).unwrap();
        let t = plan_transition(
            &occ,
            &occ,
            &cfg,
            &TimingModel::default(),
            &RouterParams::default(),
        )
        .unwrap();
        assert!(t.batches.is_empty());
    }

    #[test]
    fn gate_pair_goes_in_one_batch() {
        let cfg = ArchitectureConfig::default();
        let from = Occupancy::from_sites(vec![st(0, 0), st(0, 1), st(0, 2)]).unwrap();
        let to = Occupancy::from_sites(vec![en(0, 0, Slot::Left), en(0, 0, Slot::Right), st(0, 2)])
            .unwrap();
        let t = plan_transition(
            &from,
            &to,
            &cfg,
            &TimingModel::default(),
            &RouterParams::default(),
        )
        .unwrap();
        assert_eq!(t.batches.len(), 1);
        assert_eq!(t.batches[0].moves.len(), 2);
        assert!(t.batches[0].duration_us > 0.0);
    }

    #[test]
    fn swap_between_pairs_is_routed() {
        let cfg = ArchitectureConfig::default();
        let from = Occupancy::from_sites(vec![
            en(0, 0, Slot::Left),
            en(0, 0, Slot::Right),
            en(0, 2, Slot::Left),
            en(0, 2, Slot::Right),
        ])
        .unwrap();
        let to = Occupancy::from_sites(vec![
            en(0, 0, Slot::Left),
            en(0, 2, Slot::Left),
            en(0, 0, Slot::Right),
            en(0, 2, Slot::Right),
        ])
        .unwrap();
        let t = plan_transition(
            &from,
            &to,
            &cfg,
            &TimingModel::default(),
            &RouterParams::default(),
        )
        .unwrap();
        let n_moves: usize = t.batches.iter().map(|b| b.moves.len()).sum();
        assert_eq!(n_moves, 3, "one atom goes through a parking trap");
        assert!(t.dag.is_acyclic());
    }

    #[test]
    fn static_atom_in_target_is_an_error() {
        let cfg = ArchitectureConfig::default();
        let from = Occupancy::from_sites(vec![st(0, 0), st(0, 1)]).unwrap();
        let to = Occupancy::from_sites(vec![st(0, 1), st(0, 2)]).unwrap();
        // q1 moves away, so this is fine.
        assert!(count_batches(&from, &to, &cfg).is_ok());
        let to = Occupancy::from_sites(vec![st(0, 1), st(0, 1)]);
        assert!(to.is_err());
    }
}
