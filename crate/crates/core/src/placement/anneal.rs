//! Simulated annealing over a whole placement sequence.
//!
//! The state keeps every point's qubit→trap and trap→qubit tables and the cost
//! of every transition. A trial edits one stage (move a gate to another pair,
//! swap two gates' pairs, or flip a gate's slots) or one storage return, and
//! only the transitions touching the edited points are re-evaluated.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    mean_batch_time, placement_cost, retained_at_layer, CostBreakdown, PlacementError,
    PlacementPoint, PlacementSequence,
};
use crate::architecture::{ArchitectureConfig, Occupancy};
use crate::circuit::Circuit;
use crate::router::{plan_batches, MoveSpec};
use crate::scheduler::StagePlan;
use crate::timing::TimingModel;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaParams {
    pub seed: u64,
    /// Independent runs from the same proposal with seeds `seed + i`.
    pub restarts: usize,
    pub cooling: f64,
    /// Trials per temperature; `None` means 100 per qubit.
    pub iterations_per_temperature: Option<usize>,
    /// `None` means initial cost / ln 2.
    pub t_initial: Option<f64>,
    /// Frozen temperature as a fraction of the initial one.
    pub t_frozen_ratio: f64,
    /// Absolute frozen temperature; overrides the ratio when set.
    pub t_frozen: Option<f64>,
    /// Weight per batch; `None` means the proposal's mean batch time.
    pub lambda: Option<f64>,
    /// Extra batches a worse trial may add and still be considered.
    pub slack: usize,
    /// Keep every Metropolis trial in the outcome.
    pub audit: bool,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 1,
            cooling: 0.95,
            iterations_per_temperature: None,
            t_initial: None,
            t_frozen_ratio: 1e-3,
            t_frozen: None,
            lambda: None,
            slack: 0,
            audit: false,
        }
    }
}

/// A trial that was not strictly better and went through the Metropolis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub step: usize,
    pub temperature: f64,
    pub delta: f64,
    pub probability: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub sequence: PlacementSequence,
    pub initial_cost: CostBreakdown,
    pub final_cost: CostBreakdown,
    pub lambda: f64,
    pub t_initial: f64,
    pub t_frozen: f64,
    /// Best cost after each temperature step, starting with the proposal.
    pub best_trace: Vec<f64>,
    pub audit: Vec<AuditRecord>,
    pub trials: usize,
    pub accepted: usize,
    pub seed: u64,
}

struct Return {
    layer_point: usize,
    qubit: usize,
    /// First point after the span in storage (exclusive).
    end: usize,
}

struct Model<'a> {
    config: &'a ArchitectureConfig,
    timing: &'a TimingModel,
    lambda: f64,
    n_qubits: usize,
    n_points: usize,
    n_traps: usize,
    n_pairs: usize,
    storage: usize,
    trap_pos: Vec<(f64, f64)>,
    stages: Vec<Vec<(usize, usize)>>,
    /// Per stage, per qubit: kept on its slot in the following layer.
    pinned: Vec<Vec<bool>>,
    returns: Vec<Return>,
}

#[derive(Clone)]
struct State {
    pos: Vec<Vec<u32>>,
    occ: Vec<Vec<u32>>,
    /// Per stage: (pair, flipped) per gate; flipped puts the second qubit Left.
    gate_pair: Vec<Vec<(usize, bool)>>,
    pair_gate: Vec<Vec<u32>>,
    trans: Vec<(f64, usize)>,
}

impl Model<'_> {
    fn slot_trap(&self, pair: usize, right: bool) -> u32 {
        (self.storage + 2 * pair + right as usize) as u32
    }

    fn evaluate(&self, s: &State, t: usize) -> Option<(f64, usize)> {
        let (from, to) = (&s.pos[t], &s.pos[t + 1]);
        let mut movement = 0.0;
        let mut specs = Vec::new();
        for q in 0..self.n_qubits {
            let (a, b) = (from[q] as usize, to[q] as usize);
            if a != b {
                let (pa, pb) = (self.trap_pos[a], self.trap_pos[b]);
                movement += self
                    .timing
                    .move_time(((pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2)).sqrt());
                specs.push(MoveSpec {
                    qubit: q,
                    from: a,
                    to: b,
                    start: pa,
                    end: pb,
                });
            }
        }
        if specs.is_empty() {
            return Some((0.0, 0));
        }
        let (occ_a, occ_b) = (&s.occ[t], &s.occ[t + 1]);
        let plan = plan_batches(
            specs,
            self.n_traps,
            |i| self.trap_pos[i],
            |i| (occ_a[i] != NONE).then_some(occ_a[i] as usize),
            |i| occ_a[i] != NONE || occ_b[i] != NONE,
        )
        .ok()?;
        Some((movement, plan.batches.len()))
    }

    fn totals(&self, s: &State) -> (f64, usize) {
        let movement: f64 = s.trans.iter().map(|t| t.0).sum();
        let batches: usize = s.trans.iter().map(|t| t.1).sum();
        (movement + self.lambda * batches as f64, batches)
    }

    /// Re-places `updates` at `point`; returns the previous traps.
    fn assign(&self, s: &mut State, point: usize, updates: &[(usize, u32)]) -> Vec<(usize, u32)> {
        let old: Vec<(usize, u32)> = updates.iter().map(|&(q, _)| (q, s.pos[point][q])).collect();
        for &(_, t) in &old {
            s.occ[point][t as usize] = NONE;
        }
        for &(q, t) in updates {
            debug_assert_eq!(s.occ[point][t as usize], NONE);
            s.occ[point][t as usize] = q as u32;
            s.pos[point][q] = t;
        }
        old
    }

    /// Trap updates at stage `k` (and its layer) for gate `i` on `(pair, flipped)`.
    fn gate_updates(&self, k: usize, i: usize, pair: usize, flipped: bool) -> Vec<(usize, u32)> {
        let (a, b) = self.stages[k][i];
        let (l, r) = if flipped { (b, a) } else { (a, b) };
        vec![
            (l, self.slot_trap(pair, false)),
            (r, self.slot_trap(pair, true)),
        ]
    }
}

struct Undo {
    points: Vec<(usize, Vec<(usize, u32)>)>,
    /// Stage whose gate tables were edited.
    stage: Option<usize>,
}

fn build_state(model: &Model, seq: &PlacementSequence) -> State {
    let cfg = model.config;
    let pos: Vec<Vec<u32>> = seq
        .points
        .iter()
        .map(|p| {
            p.occupancy
                .sites()
                .iter()
                .map(|&s| cfg.site_index(s) as u32)
                .collect()
        })
        .collect();
    let occ: Vec<Vec<u32>> = pos
        .iter()
        .map(|row| {
            let mut o = vec![NONE; model.n_traps];
            for (q, &t) in row.iter().enumerate() {
                o[t as usize] = q as u32;
            }
            o
        })
        .collect();
    let mut gate_pair = Vec::with_capacity(model.stages.len());
    let mut pair_gate = Vec::with_capacity(model.stages.len());
    for (k, gates) in model.stages.iter().enumerate() {
        let mut pg = vec![NONE; model.n_pairs];
        let gp: Vec<(usize, bool)> = gates
            .iter()
            .enumerate()
            .map(|(i, &(a, _))| {
                let t = pos[1 + 2 * k][a] as usize - model.storage;
                let pair = t / 2;
                pg[pair] = i as u32;
                (pair, t % 2 == 1)
            })
            .collect();
        gate_pair.push(gp);
        pair_gate.push(pg);
    }
    let mut state = State {
        pos,
        occ,
        gate_pair,
        pair_gate,
        trans: Vec::new(),
    };
    state.trans = (0..model.n_points - 1)
        .map(|t| model.evaluate(&state, t).expect("proposal routes"))
        .collect();
    state
}

fn to_sequence(model: &Model, s: &State, template: &PlacementSequence) -> PlacementSequence {
    let points = template
        .points
        .iter()
        .zip(&s.pos)
        .map(|(p, row)| PlacementPoint {
            kind: p.kind,
            occupancy: Occupancy::from_sites(
                row.iter()
                    .map(|&t| model.config.site_at(t as usize))
                    .collect(),
            )
            .expect("annealer keeps occupancy bijective"),
        })
        .collect();
    PlacementSequence {
        points,
        reuse: template.reuse,
    }
}

/// Applies one random trial in place. Returns the undo record and the
/// transitions whose cost must be refreshed, or `None` if no trial was made.
fn propose(model: &Model, s: &mut State, rng: &mut ChaCha8Rng) -> Option<(Undo, Vec<usize>)> {
    let has_stages = !model.stages.is_empty();
    let has_returns = !model.returns.is_empty();
    let kind = match (has_stages, has_returns) {
        (false, false) => return None,
        (true, false) => rng.gen_range(0..2),
        (false, true) => 2,
        (true, true) => {
            let r = rng.gen_range(0..10);
            if r < 4 {
                0
            } else if r < 6 {
                1
            } else {
                2
            }
        }
    };
    if kind == 2 {
        let r = &model.returns[rng.gen_range(0..model.returns.len())];
        let trap = rng.gen_range(0..model.storage) as u32;
        if trap == s.pos[r.layer_point][r.qubit] {
            return None;
        }
        if (r.layer_point..r.end).any(|p| s.occ[p][trap as usize] != NONE) {
            return None;
        }
        let mut undo = Vec::new();
        for p in r.layer_point..r.end {
            undo.push((p, model.assign(s, p, &[(r.qubit, trap)])));
        }
        let mut touched = vec![r.layer_point - 1];
        if r.end < model.n_points {
            touched.push(r.end - 1);
        }
        return Some((
            Undo {
                points: undo,
                stage: None,
            },
            touched,
        ));
    }

    let k = rng.gen_range(0..model.stages.len());
    let n_gates = model.stages[k].len();
    let i = rng.gen_range(0..n_gates);
    let (pair_i, flip_i) = s.gate_pair[k][i];
    let mut updates = Vec::new();
    if kind == 0 {
        let pair = rng.gen_range(0..model.n_pairs);
        if pair == pair_i {
            return None;
        }
        let j = s.pair_gate[k][pair];
        updates.extend(model.gate_updates(k, i, pair, flip_i));
        s.gate_pair[k][i] = (pair, flip_i);
        s.pair_gate[k][pair] = i as u32;
        if j == NONE {
            s.pair_gate[k][pair_i] = NONE;
        } else {
            let j = j as usize;
            let flip_j = s.gate_pair[k][j].1;
            updates.extend(model.gate_updates(k, j, pair_i, flip_j));
            s.gate_pair[k][j] = (pair_i, flip_j);
            s.pair_gate[k][pair_i] = j as u32;
        }
    } else {
        updates.extend(model.gate_updates(k, i, pair_i, !flip_i));
        s.gate_pair[k][i] = (pair_i, !flip_i);
    }

    let sp = 1 + 2 * k;
    let lp = sp + 1;
    let mut undo = vec![(sp, model.assign(s, sp, &updates))];
    let layer_updates: Vec<(usize, u32)> = updates
        .iter()
        .copied()
        .filter(|&(q, _)| model.pinned[k][q])
        .collect();
    let mut touched = vec![sp - 1, sp];
    if !layer_updates.is_empty() {
        undo.push((lp, model.assign(s, lp, &layer_updates)));
        if lp + 1 < model.n_points {
            touched.push(lp);
        }
    }
    Some((
        Undo {
            points: undo,
            stage: Some(k),
        },
        touched,
    ))
}

fn rollback(model: &Model, s: &mut State, undo: Undo) {
    for (p, old) in undo.points.into_iter().rev() {
        model.assign(s, p, &old);
    }
    // Gate tables follow from the restored stage positions.
    if let Some(k) = undo.stage {
        for &(pair, _) in &s.gate_pair[k] {
            s.pair_gate[k][pair] = NONE;
        }
        for (i, &(a, _)) in model.stages[k].iter().enumerate() {
            let t = s.pos[1 + 2 * k][a] as usize - model.storage;
            s.gate_pair[k][i] = (t / 2, t % 2 == 1);
            s.pair_gate[k][t / 2] = i as u32;
        }
    }
}

fn breakdown(model: &Model, s: &State) -> CostBreakdown {
    let movement_cost: f64 = s.trans.iter().map(|t| t.0).sum();
    let batches: usize = s.trans.iter().map(|t| t.1).sum();
    let parallelism_penalty = model.lambda * batches as f64;
    CostBreakdown {
        movement_cost,
        batches,
        parallelism_penalty,
        total: movement_cost + parallelism_penalty,
    }
}

fn run_chain(
    model: &Model,
    start: &State,
    template: &PlacementSequence,
    params: &SaParams,
    t_initial: f64,
    t_frozen: f64,
    seed: u64,
) -> AnnealOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = start.clone();
    let (mut cur_cost, mut cur_batches) = model.totals(&s);
    let initial_cost = breakdown(model, &s);
    let mut best = s.clone();
    let mut best_cost = cur_cost;
    let mut best_trace = vec![best_cost];
    let mut audit = Vec::new();
    let (mut trials, mut accepted) = (0usize, 0usize);
    let iterations = params
        .iterations_per_temperature
        .unwrap_or(100 * model.n_qubits.max(1));

    let mut temperature = t_initial;
    let mut step = 0;
    while temperature >= t_frozen && temperature > 0.0 {
        for _ in 0..iterations {
            let Some((undo, touched)) = propose(model, &mut s, &mut rng) else {
                continue;
            };
            trials += 1;
            let mut fresh = Vec::with_capacity(touched.len());
            let mut feasible = true;
            for &t in &touched {
                match model.evaluate(&s, t) {
                    Some(v) => fresh.push((t, v)),
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if !feasible {
                rollback(model, &mut s, undo);
                continue;
            }
            let saved: Vec<(usize, (f64, usize))> =
                fresh.iter().map(|&(t, _)| (t, s.trans[t])).collect();
            for &(t, v) in &fresh {
                s.trans[t] = v;
            }
            let (new_cost, new_batches) = model.totals(&s);
            let take = if new_cost < cur_cost {
                true
            } else if new_batches > cur_batches + params.slack {
                false
            } else {
                let delta = new_cost - cur_cost;
                let p = (-delta / temperature).exp();
                let ok = rng.gen::<f64>() < p;
                if params.audit {
                    audit.push(AuditRecord {
                        step,
                        temperature,
                        delta,
                        probability: p,
                        accepted: ok,
                    });
                }
                ok
            };
            if take {
                accepted += 1;
                cur_cost = new_cost;
                cur_batches = new_batches;
                if cur_cost < best_cost {
                    best_cost = cur_cost;
                    best = s.clone();
                }
            } else {
                for (t, v) in saved {
                    s.trans[t] = v;
                }
                rollback(model, &mut s, undo);
            }
        }
        best_trace.push(best_cost);
        temperature *= params.cooling;
        step += 1;
    }

    AnnealOutcome {
        sequence: to_sequence(model, &best, template),
        initial_cost,
        final_cost: breakdown(model, &best),
        lambda: model.lambda,
        t_initial,
        t_frozen,
        best_trace,
        audit,
        trials,
        accepted,
        seed,
    }
}

/// Anneals `proposal` and returns the best sequence over all restarts.
pub fn anneal(
    circuit: &Circuit,
    plan: &StagePlan,
    proposal: &PlacementSequence,
    config: &ArchitectureConfig,
    timing: &TimingModel,
    params: &SaParams,
) -> Result<AnnealOutcome, PlacementError> {
    let occs = proposal.occupancies();
    let lambda = match params.lambda {
        Some(l) => l,
        None => mean_batch_time(&occs, config, timing)?,
    };
    let initial = placement_cost(&occs, config, timing, lambda)?;
    let t_initial = params
        .t_initial
        .unwrap_or(initial.total / std::f64::consts::LN_2);
    let t_frozen = params.t_frozen.unwrap_or(params.t_frozen_ratio * t_initial);

    let unchanged = || AnnealOutcome {
        sequence: proposal.clone(),
        initial_cost: initial,
        final_cost: initial,
        lambda,
        t_initial,
        t_frozen,
        best_trace: vec![initial.total],
        audit: Vec::new(),
        trials: 0,
        accepted: 0,
        seed: params.seed,
    };
    if plan.is_empty() || !(t_initial >= t_frozen) || t_initial <= 0.0 {
        return Ok(unchanged());
    }

    let stages: Vec<Vec<(usize, usize)>> = plan
        .stages
        .iter()
        .map(|st| {
            st.iter()
                .map(|&g| (circuit.gates[g].qubits[0], circuit.gates[g].qubits[1]))
                .collect()
        })
        .collect();
    let n = circuit.n_qubits;
    let n_points = proposal.points.len();
    let pinned: Vec<Vec<bool>> = (0..plan.len())
        .map(|k| {
            let keep = retained_at_layer(circuit, plan, k, proposal.reuse);
            (0..n).map(|q| keep.contains(&q)).collect()
        })
        .collect();

    let mut returns = Vec::new();
    for k in 0..plan.len() {
        let users: HashSet<usize> = stages[k].iter().flat_map(|&(a, b)| [a, b]).collect();
        for &q in &users {
            if pinned[k][q] {
                continue;
            }
            let next = (k + 1..plan.len())
                .find(|&j| stages[j].iter().any(|&(a, b)| a == q || b == q))
                .map_or(n_points, |j| 1 + 2 * j);
            returns.push(Return {
                layer_point: 2 + 2 * k,
                qubit: q,
                end: next,
            });
        }
    }
    returns.sort_by_key(|r| (r.layer_point, r.qubit));

    let model = Model {
        config,
        timing,
        lambda,
        n_qubits: n,
        n_points,
        n_traps: config.n_traps(),
        n_pairs: config.ent_capacity(),
        storage: config.storage_capacity(),
        trap_pos: (0..config.n_traps())
            .map(|t| config.position(config.site_at(t)))
            .collect(),
        stages,
        pinned,
        returns,
    };
    let start = build_state(&model, proposal);

    let restarts = params.restarts.max(1);
    let runs: Vec<AnnealOutcome> = (0..restarts as u64)
        .into_par_iter()
        .map(|i| {
            run_chain(
                &model,
                &start,
                proposal,
                params,
                t_initial,
                t_frozen,
                params.seed.wrapping_add(i),
            )
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| {
            if b.final_cost.total < a.final_cost.total {
                b
            } else {
                a
            }
        })
        .expect("at least one run");
    Ok(best)
}
