//! Qubit placement across the Initial, Stage and Layer points.
//!
//! A sequence for `K` stages has `1 + 2K` points: the initial layer, then
//! stage `k` followed by layer `k` for each `k`. In layer `k`, qubits used by
//! both stage `k` and stage `k + 1` stay on their stage-`k` slot; everyone
//! else goes back to storage. The last layer returns all qubits.

mod anneal;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{ArchError, ArchitectureConfig, Occupancy, Site, Slot};
use crate::circuit::Circuit;
use crate::router::{batch_plan, RouteError};
use crate::scheduler::StagePlan;
use crate::timing::TimingModel;

pub use anneal::{anneal, AnnealOutcome, AuditRecord, SaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointKind {
    Initial,
    Stage(usize),
    Layer(usize),
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointKind::Initial => f.write_str("initial"),
            PointKind::Stage(k) => write!(f, "stage {k}"),
            PointKind::Layer(k) => write!(f, "layer {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementPoint {
    pub kind: PointKind,
    pub occupancy: Occupancy,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlacementSequence {
    pub points: Vec<PlacementPoint>,
    /// Whether layers keep qubits shared by consecutive stages.
    pub reuse: bool,
}

impl PlacementSequence {
    pub fn occupancies(&self) -> Vec<Occupancy> {
        self.points.iter().map(|p| p.occupancy.clone()).collect()
    }

    pub fn stage(&self, k: usize) -> &Occupancy {
        &self.points[1 + 2 * k].occupancy
    }

    pub fn layer(&self, k: usize) -> &Occupancy {
        &self.points[2 + 2 * k].occupancy
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("{point}: {message}")]
    Invalid { point: PointKind, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub movement_cost: f64,
    pub batches: usize,
    pub parallelism_penalty: f64,
    pub total: f64,
}

/// Qubit `i` at storage (i div cols, i mod cols).
pub fn initial_placement(
    config: &ArchitectureConfig,
    n_qubits: usize,
) -> Result<Occupancy, ArchError> {
    if n_qubits > config.storage_capacity() {
        return Err(ArchError::Capacity(
            crate::architecture::CapacityShortfall {
                storage_required: n_qubits,
                storage_available: config.storage_capacity(),
                ent_required: 0,
                ent_available: config.ent_capacity(),
            },
        ));
    }
    let sites = (0..n_qubits)
        .map(|i| Site::Storage {
            row: i / config.storage_cols,
            col: i % config.storage_cols,
        })
        .collect();
    Occupancy::from_sites(sites)
}

fn pair_of(site: Site, config: &ArchitectureConfig) -> Option<(usize, Slot)> {
    match site {
        Site::Entanglement { row, site, slot } => {
            Some((row * config.ent_sites_per_row + site, slot))
        }
        Site::Storage { .. } => None,
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Greedy stage-`k` placement starting from `previous`.
///
/// Gates with a qubit already in the entanglement zone claim that qubit's pair
/// first, keeping the retained qubit on its slot. The remaining gates, by mean
/// source x, take the free pair closest to their qubits.
pub fn propose_stage_placement(
    circuit: &Circuit,
    plan: &StagePlan,
    k: usize,
    previous: &Occupancy,
    config: &ArchitectureConfig,
) -> Result<Occupancy, PlacementError> {
    let gates: Vec<(usize, usize)> = plan.stages[k]
        .iter()
        .map(|&g| {
            let q = &circuit.gates[g].qubits;
            (q[0], q[1])
        })
        .collect();
    if gates.len() > config.ent_capacity() {
        return Err(ArchError::Capacity(crate::architecture::CapacityShortfall {
            storage_required: circuit.n_qubits,
            storage_available: config.storage_capacity(),
            ent_required: gates.len(),
            ent_available: config.ent_capacity(),
        })
        .into());
    }
    let mut sites = previous.sites().to_vec();
    let mut claimed = vec![false; config.ent_capacity()];
    let mut placed = vec![false; gates.len()];

    for (i, &(a, b)) in gates.iter().enumerate() {
        for (keep, other) in [(a, b), (b, a)] {
            if let Some((pair, slot)) = pair_of(previous.site_of(keep), config) {
                if !claimed[pair] {
                    claimed[pair] = true;
                    sites[keep] = config.pair_slot(pair, slot);
                    sites[other] = config.pair_slot(pair, slot.other());
                    placed[i] = true;
                    break;
                }
            }
        }
    }

    let src = |q: usize| config.position(previous.site_of(q));
    let mut rest: Vec<usize> = (0..gates.len()).filter(|&i| !placed[i]).collect();
    rest.sort_by(|&i, &j| {
        let mx = |g: usize| src(gates[g].0).0 + src(gates[g].1).0;
        mx(i).total_cmp(&mx(j)).then(i.cmp(&j))
    });
    for i in rest {
        let (a, b) = gates[i];
        let (left, right) = if src(a).0 <= src(b).0 { (a, b) } else { (b, a) };
        let best = (0..config.ent_capacity())
            .filter(|&p| !claimed[p])
            .min_by(|&p, &r| {
                let cost = |p: usize| {
                    dist(src(left), config.position(config.pair_slot(p, Slot::Left)))
                        + dist(
                            src(right),
                            config.position(config.pair_slot(p, Slot::Right)),
                        )
                };
                cost(p).total_cmp(&cost(r)).then(p.cmp(&r))
            })
            .expect("capacity checked");
        claimed[best] = true;
        sites[left] = config.pair_slot(best, Slot::Left);
        sites[right] = config.pair_slot(best, Slot::Right);
    }
    Ok(Occupancy::from_sites(sites)?)
}

/// Qubits kept in the entanglement zone at layer `k`.
pub(crate) fn retained_at_layer(
    circuit: &Circuit,
    plan: &StagePlan,
    k: usize,
    reuse: bool,
) -> HashSet<usize> {
    if !reuse || k + 1 >= plan.len() {
        return HashSet::new();
    }
    let qubits = |s: usize| -> HashSet<usize> {
        plan.stages[s]
            .iter()
            .flat_map(|&g| circuit.gates[g].qubits.iter().copied())
            .collect()
    };
    &qubits(k) & &qubits(k + 1)
}

/// Layer `k` from stage `k`: retained qubits keep their slot, the rest of the
/// stage's qubits return to their `home` sites.
pub fn derive_layer(
    stage: &Occupancy,
    retained: &HashSet<usize>,
    home: &Occupancy,
) -> Result<Occupancy, ArchError> {
    let sites = stage
        .sites()
        .iter()
        .enumerate()
        .map(|(q, &s)| {
            if s.is_entanglement() && !retained.contains(&q) {
                home.site_of(q)
            } else {
                s
            }
        })
        .collect();
    Occupancy::from_sites(sites)
}

/// The unannealed sequence: greedy stages, home-site returns.
pub fn propose_sequence(
    circuit: &Circuit,
    plan: &StagePlan,
    config: &ArchitectureConfig,
    reuse: bool,
) -> Result<PlacementSequence, PlacementError> {
    crate::architecture::check_capacity(config, circuit.n_qubits, plan.max_width())?;
    let home = initial_placement(config, circuit.n_qubits)?;
    let mut points = vec![PlacementPoint {
        kind: PointKind::Initial,
        occupancy: home.clone(),
    }];
    for k in 0..plan.len() {
        let prev = &points.last().expect("initial point").occupancy;
        let stage = propose_stage_placement(circuit, plan, k, prev, config)?;
        let layer = derive_layer(&stage, &retained_at_layer(circuit, plan, k, reuse), &home)?;
        points.push(PlacementPoint {
            kind: PointKind::Stage(k),
            occupancy: stage,
        });
        points.push(PlacementPoint {
            kind: PointKind::Layer(k),
            occupancy: layer,
        });
    }
    Ok(PlacementSequence { points, reuse })
}

/// Checks every point against its kind's invariants.
pub fn validate_sequence(
    seq: &PlacementSequence,
    circuit: &Circuit,
    plan: &StagePlan,
    config: &ArchitectureConfig,
) -> Result<(), PlacementError> {
    let expected = 1 + 2 * plan.len();
    let invalid = |point: PointKind, message: String| PlacementError::Invalid { point, message };
    if seq.points.len() != expected {
        return Err(invalid(
            PointKind::Initial,
            format!("{} points, expected {expected}", seq.points.len()),
        ));
    }
    for (i, p) in seq.points.iter().enumerate() {
        let want = match i {
            0 => PointKind::Initial,
            i if i % 2 == 1 => PointKind::Stage((i - 1) / 2),
            i => PointKind::Layer((i - 2) / 2),
        };
        if p.kind != want {
            return Err(invalid(
                p.kind,
                format!("found at position {i}, expected {want}"),
            ));
        }
        if p.occupancy.n_qubits() != circuit.n_qubits {
            return Err(invalid(p.kind, "qubit count differs from circuit".into()));
        }
        for &s in p.occupancy.sites() {
            config.site_position(s)?;
        }
        let in_ent: HashSet<usize> = p.occupancy.ent_qubits().map(|(q, _)| q).collect();
        match p.kind {
            PointKind::Initial => {
                if !in_ent.is_empty() {
                    return Err(invalid(p.kind, "qubits outside storage".into()));
                }
            }
            PointKind::Stage(k) => {
                let mut users = HashSet::new();
                for &g in &plan.stages[k] {
                    let q = &circuit.gates[g].qubits;
                    users.insert(q[0]);
                    users.insert(q[1]);
                    let (sa, sb) = (p.occupancy.site_of(q[0]), p.occupancy.site_of(q[1]));
                    if sa.partner() != Some(sb) {
                        return Err(invalid(
                            p.kind,
                            format!("gate g{g} on {sa} and {sb}, not one pair"),
                        ));
                    }
                }
                if users != in_ent {
                    return Err(invalid(
                        p.kind,
                        "entanglement zone holds non-gate qubits".into(),
                    ));
                }
            }
            PointKind::Layer(k) => {
                let keep = retained_at_layer(circuit, plan, k, seq.reuse);
                if keep != in_ent {
                    return Err(invalid(p.kind, "retained set mismatch".into()));
                }
                let stage = &seq.points[i - 1].occupancy;
                if let Some(&q) = keep
                    .iter()
                    .find(|&&q| stage.site_of(q) != p.occupancy.site_of(q))
                {
                    return Err(invalid(p.kind, format!("retained q{q} left its slot")));
                }
            }
        }
    }
    Ok(())
}

/// Straight-line travel time of `from → to` and its batch count.
pub fn transition_cost(
    from: &Occupancy,
    to: &Occupancy,
    config: &ArchitectureConfig,
    timing: &TimingModel,
) -> Result<(f64, usize), RouteError> {
    let movement = from
        .sites()
        .iter()
        .zip(to.sites())
        .filter(|(a, b)| a != b)
        .map(|(&a, &b)| timing.move_time(dist(config.position(a), config.position(b))))
        .sum();
    let batches = batch_plan(from, to, config)?.batches.len();
    Ok((movement, batches))
}

/// Movement time summed over moved qubits plus `lambda` per batch.
pub fn placement_cost(
    points: &[Occupancy],
    config: &ArchitectureConfig,
    timing: &TimingModel,
    lambda: f64,
) -> Result<CostBreakdown, RouteError> {
    let mut movement_cost = 0.0;
    let mut batches = 0;
    for w in points.windows(2) {
        let (m, b) = transition_cost(&w[0], &w[1], config, timing)?;
        movement_cost += m;
        batches += b;
    }
    let parallelism_penalty = lambda * batches as f64;
    Ok(CostBreakdown {
        movement_cost,
        batches,
        parallelism_penalty,
        total: movement_cost + parallelism_penalty,
    })
}

/// Mean duration of one batch in `points`, timing each batch by its longest
/// straight move; zero when nothing moves.
pub fn mean_batch_time(
    points: &[Occupancy],
    config: &ArchitectureConfig,
    timing: &TimingModel,
) -> Result<f64, RouteError> {
    let mut total = 0.0;
    let mut count = 0usize;
    for w in points.windows(2) {
        let plan = batch_plan(&w[0], &w[1], config)?;
        for batch in &plan.batches {
            let longest = batch
                .iter()
                .map(|&i| plan.moves[i].distance())
                .fold(0.0, f64::max);
            total += timing.move_time(longest);
            count += 1;
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, GateDag};
    use crate::scheduler::asap_schedule;

    const SEVEN_QUBIT: &str =
        "qubits 7; cz 0 1; cz 2 3; cz 5 6; cz 0 5; cz 1 6; cz 3 6; cz 4 6; cz 0 1; cz 2 4; cz 3 5;";

    fn setup(text: &str) -> (Circuit, StagePlan) {
        let c = parse_circuit(text).unwrap();
        let plan = asap_schedule(&c, &GateDag::build(&c));
        (c, plan)
    }

    #[test]
    fn initial_is_row_major() {
        let cfg = ArchitectureConfig::default();
        let occ = initial_placement(&cfg, 25).unwrap();
        assert_eq!(occ.site_of(6), Site::Storage { row: 0, col: 6 });
        assert_eq!(occ.site_of(24), Site::Storage { row: 2, col: 4 });
        assert_eq!(initial_placement(&cfg, 0).unwrap().n_qubits(), 0);
        assert!(initial_placement(&cfg, 41).is_err());
    }

    #[test]
    fn seven_qubit_sequence_keeps_shared_qubits() {
        let (c, plan) = setup(SEVEN_QUBIT);
        let cfg = ArchitectureConfig::default();
        let seq = propose_sequence(&c, &plan, &cfg, true).unwrap();
        validate_sequence(&seq, &c, &plan, &cfg).unwrap();
        let layer0: HashSet<usize> = seq.layer(0).ent_qubits().map(|(q, _)| q).collect();
        assert_eq!(layer0, HashSet::from([0, 1, 5, 6]));
        // only q2 and q3 go back to storage
        assert!(seq.layer(0).site_of(2).is_storage());
        assert!(seq.layer(0).site_of(3).is_storage());
        assert_eq!(seq.stage(0).ent_qubits().count(), 6);
    }

    #[test]
    fn no_reuse_empties_every_layer() {
        let (c, plan) = setup(SEVEN_QUBIT);
        let cfg = ArchitectureConfig::default();
        let seq = propose_sequence(&c, &plan, &cfg, false).unwrap();
        validate_sequence(&seq, &c, &plan, &cfg).unwrap();
        for k in 0..plan.len() {
            assert_eq!(seq.layer(k).ent_qubits().count(), 0);
        }
    }

    #[test]
    fn one_gate_cost_is_two_round_trips() {
        let (c, plan) = setup("qubits 2; cz 0 1;");
        let cfg = ArchitectureConfig::default();
        let timing = TimingModel::default();
        let seq = propose_sequence(&c, &plan, &cfg, true).unwrap();
        let cost = placement_cost(&seq.occupancies(), &cfg, &timing, 10.0).unwrap();
        assert_eq!(cost.batches, 2);
        assert!((cost.parallelism_penalty - 20.0).abs() < 1e-12);
        assert!((cost.total - cost.movement_cost - 20.0).abs() < 1e-9);
    }

    #[test]
    fn identical_points_cost_nothing() {
        let cfg = ArchitectureConfig::default();
        let occ = initial_placement(&cfg, 5).unwrap();
        let cost = placement_cost(&[occ.clone(), occ], &cfg, &TimingModel::default(), 3.0).unwrap();
        assert_eq!(cost, CostBreakdown::default());
    }

    #[test]
    fn single_move_of_twelve_microns() {
        let cfg = ArchitectureConfig::default();
        let a = Occupancy::from_sites(vec![Site::Storage { row: 0, col: 0 }]).unwrap();
        let b = Occupancy::from_sites(vec![Site::Storage { row: 0, col: 2 }]).unwrap();
        let cost = placement_cost(&[a, b], &cfg, &TimingModel::default(), 0.0).unwrap();
        assert!((cost.movement_cost - 66.057_825_907_581_63).abs() < 1e-9);
    }

    #[test]
    fn validation_catches_split_pair() {
        let (c, plan) = setup("qubits 2; cz 0 1;");
        let cfg = ArchitectureConfig::default();
        let mut seq = propose_sequence(&c, &plan, &cfg, true).unwrap();
        seq.points[1].occupancy = Occupancy::from_sites(vec![
            cfg.pair_slot(0, Slot::Left),
            cfg.pair_slot(1, Slot::Right),
        ])
        .unwrap();
        assert!(matches!(
            validate_sequence(&seq, &c, &plan, &cfg),
            Err(PlacementError::Invalid {
                point: PointKind::Stage(0),
                ..
            })
        ));
    }
}
