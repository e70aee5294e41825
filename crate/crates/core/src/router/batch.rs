//! Grouping of atom moves into AOD batches.
//!
//! An AOD moves whole rows and columns, which may not cross or merge. Two
//! moves can share a batch only if their relative order along x and along y
//! is the same before and after the move (equal stays equal).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::RouteError;

const EPS: f64 = 1e-9;

fn cmp_eps(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EPS {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Straight-line description of one move: trap indices and endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveSpec {
    pub qubit: usize,
    pub from: usize,
    pub to: usize,
    pub start: (f64, f64),
    pub end: (f64, f64),
}

impl MoveSpec {
    pub fn distance(&self) -> f64 {
        let (dx, dy) = (self.end.0 - self.start.0, self.end.1 - self.start.1);
        (dx * dx + dy * dy).sqrt()
    }
}

/// Order-preservation predicate for two simultaneous moves.
pub fn compatible(a: &MoveSpec, b: &MoveSpec) -> bool {
    cmp_eps(a.start.0, b.start.0) == cmp_eps(a.end.0, b.end.0)
        && cmp_eps(a.start.1, b.start.1) == cmp_eps(a.end.1, b.end.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Order-incompatible pair; the source ran in an earlier batch.
    Conflict,
    /// The source vacates the target's drop trap; same batch allowed.
    Vacate,
    /// Two legs of one atom's parked move.
    SameAtom,
}

impl EdgeKind {
    pub fn strict(self) -> bool {
        !matches!(self, EdgeKind::Vacate)
    }
}

/// Ordering constraints between the moves of one transition.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MoveConflictDag {
    pub n_moves: usize,
    pub edges: Vec<(usize, usize, EdgeKind)>,
}

impl MoveConflictDag {
    pub fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.n_moves];
        let mut adj = vec![Vec::new(); self.n_moves];
        for &(a, b, _) in &self.edges {
            adj[a].push(b);
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..self.n_moves).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &w in &adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        seen == self.n_moves
    }

    /// Whether a batch assignment honours every edge.
    pub fn respected_by(&self, batch_of: &[usize]) -> bool {
        self.edges.iter().all(|&(a, b, kind)| {
            if kind.strict() {
                batch_of[a] < batch_of[b]
            } else {
                batch_of[a] <= batch_of[b]
            }
        })
    }
}

/// Batching result: moves (possibly with parking legs added), batch
/// membership by move index, and the constraint DAG.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub moves: Vec<MoveSpec>,
    pub batches: Vec<Vec<usize>>,
    pub dag: MoveConflictDag,
}

/// Greedy batching without drop-order constraints.
pub fn batch_moves(moves: &[MoveSpec]) -> (Vec<Vec<usize>>, MoveConflictDag) {
    let deps = vec![Vec::new(); moves.len()];
    let batches = greedy(moves, &deps).expect("no dependencies, no deadlock");
    let dag = build_dag(moves, &batches, &deps);
    (batches, dag)
}

fn sorted_order(moves: &[MoveSpec]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..moves.len()).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (&moves[a], &moves[b]);
        ma.start
            .1
            .total_cmp(&mb.start.1)
            .then(ma.start.0.total_cmp(&mb.start.0))
            .then(ma.qubit.cmp(&mb.qubit))
            .then(a.cmp(&b))
    });
    order
}

/// `deps[i]` lists `(j, kind)`: move `i` must not run before move `j`
/// (strictly after for strict kinds).
fn greedy(moves: &[MoveSpec], deps: &[Vec<(usize, EdgeKind)>]) -> Option<Vec<Vec<usize>>> {
    let order = sorted_order(moves);
    let mut batch_of: Vec<Option<usize>> = vec![None; moves.len()];
    let mut batches: Vec<Vec<usize>> = Vec::new();
    let mut remaining = moves.len();

    while remaining > 0 {
        let current = batches.len();
        let mut batch: Vec<usize> = Vec::new();
        loop {
            let mut added = false;
            for &i in &order {
                if batch_of[i].is_some() {
                    continue;
                }
                let ready = deps[i].iter().all(|&(j, kind)| match batch_of[j] {
                    Some(b) if kind.strict() => b < current,
                    Some(_) => true,
                    None => false,
                });
                if ready && batch.iter().all(|&j| compatible(&moves[i], &moves[j])) {
                    batch.push(i);
                    batch_of[i] = Some(current);
                    remaining -= 1;
                    added = true;
                }
            }
            if !added {
                break;
            }
        }
        if batch.is_empty() {
            return None;
        }
        batches.push(batch);
    }
    Some(batches)
}

fn build_dag(
    moves: &[MoveSpec],
    batches: &[Vec<usize>],
    deps: &[Vec<(usize, EdgeKind)>],
) -> MoveConflictDag {
    let mut batch_of = vec![0; moves.len()];
    for (b, batch) in batches.iter().enumerate() {
        for &i in batch {
            batch_of[i] = b;
        }
    }
    let mut edges = Vec::new();
    for (i, d) in deps.iter().enumerate() {
        for &(j, kind) in d {
            edges.push((j, i, kind));
        }
    }
    for i in 0..moves.len() {
        for j in i + 1..moves.len() {
            if !compatible(&moves[i], &moves[j]) {
                let (a, b) = if batch_of[i] <= batch_of[j] {
                    (i, j)
                } else {
                    (j, i)
                };
                edges.push((a, b, EdgeKind::Conflict));
            }
        }
    }
    edges.sort_unstable_by_key(|&(a, b, k)| (a, b, k as u8));
    MoveConflictDag {
        n_moves: moves.len(),
        edges,
    }
}

/// Batches one placement transition.
///
/// `occupant(trap)` is the qubit in `trap` before the transition; `busy(trap)`
/// is true for traps occupied before or after it. A move whose drop trap is
/// held by another moving atom waits for that atom. Cycles of such waits are
/// broken by parking one atom in the nearest empty trap.
pub fn plan_batches(
    moves: Vec<MoveSpec>,
    n_traps: usize,
    position: impl Fn(usize) -> (f64, f64),
    occupant: impl Fn(usize) -> Option<usize>,
    busy: impl Fn(usize) -> bool,
) -> Result<BatchPlan, RouteError> {
    let mut moves = moves;
    let mut move_of_qubit = std::collections::HashMap::with_capacity(moves.len());
    for (i, m) in moves.iter().enumerate() {
        move_of_qubit.insert(m.qubit, i);
    }

    // waits_on[i] = move that vacates i's drop trap
    let mut waits_on: Vec<Option<usize>> = Vec::with_capacity(moves.len());
    for m in &moves {
        match occupant(m.to) {
            None => waits_on.push(None),
            Some(q) => match move_of_qubit.get(&q) {
                Some(&j) => waits_on.push(Some(j)),
                None => {
                    return Err(RouteError::TargetOccupied {
                        qubit: m.qubit,
                        trap: m.to,
                        occupant: q,
                    })
                }
            },
        }
    }

    let mut deps: Vec<Vec<(usize, EdgeKind)>> = waits_on
        .iter()
        .map(|w| w.map(|j| vec![(j, EdgeKind::Vacate)]).unwrap_or_default())
        .collect();

    let arriving: std::collections::HashMap<usize, usize> =
        moves.iter().enumerate().map(|(i, m)| (m.to, i)).collect();

    // Each move waits on at most one other, so cycles are disjoint rings.
    let mut parked: Vec<usize> = Vec::new();
    let mut state = vec![0u8; waits_on.len()]; // 0 new, 1 on path, 2 done
    for start in 0..waits_on.len() {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            match waits_on[v] {
                Some(w) => v = w,
                None => break,
            }
        }
        if state[v] == 1 && waits_on[v].is_some() && path.contains(&v) {
            // `v` starts a ring; park it so its waiter can proceed.
            let m = moves[v];
            let nearest = |free_after: bool| {
                (0..n_traps)
                    .filter(|&t| occupant(t).is_none() && !parked.contains(&t))
                    .filter(|&t| !free_after || !busy(t))
                    .min_by(|&a, &b| {
                        let (pa, pb) = (position(a), position(b));
                        let da = (pa.0 - m.start.0).powi(2) + (pa.1 - m.start.1).powi(2);
                        let db = (pb.0 - m.start.0).powi(2) + (pb.1 - m.start.1).powi(2);
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
            };
            // Prefer a trap free throughout; otherwise borrow one that is
            // empty now and make its incoming atom wait for the unpark.
            let park = nearest(true)
                .or_else(|| nearest(false))
                .ok_or(RouteError::NoParking { qubit: m.qubit })?;
            parked.push(park);
            if let Some(&u) = arriving.get(&park) {
                deps[u].push((moves.len(), EdgeKind::Vacate));
            }
            let park_pos = position(park);
            // v becomes the leg into the parking trap; a new leg finishes the move.
            let second = MoveSpec {
                qubit: m.qubit,
                from: park,
                to: m.to,
                start: park_pos,
                end: m.end,
            };
            moves[v].to = park;
            moves[v].end = park_pos;
            moves.push(second);
            let old = std::mem::take(&mut deps[v]);
            deps.push(
                std::iter::once((v, EdgeKind::SameAtom))
                    .chain(old)
                    .collect(),
            );
        }
        for &p in &path {
            state[p] = 2;
        }
    }

    let batches = greedy(&moves, &deps).expect("rings were broken");
    let dag = build_dag(&moves, &batches, &deps);
    Ok(BatchPlan {
        moves,
        batches,
        dag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(qubit: usize, start: (f64, f64), end: (f64, f64)) -> MoveSpec {
        MoveSpec {
            qubit,
            from: 1000 + qubit,
            to: 2000 + qubit,
            start,
            end,
        }
    }

    #[test]
    fn inversion_in_x_splits() {
        let a = mv(0, (0.0, 0.0), (10.0, 0.0));
        let b = mv(1, (6.0, 0.0), (4.0, 0.0));
        assert!(!compatible(&a, &b));
        let (batches, dag) = batch_moves(&[a, b]);
        assert_eq!(batches.len(), 2);
        assert!(dag.is_acyclic());
    }

    #[test]
    fn uniform_translation_is_one_batch() {
        let moves: Vec<MoveSpec> = (0..6)
            .map(|i| {
                let x = i as f64 * 6.0;
                mv(
                    i,
                    (x, (i % 2) as f64 * 6.0),
                    (x + 3.0, (i % 2) as f64 * 6.0 + 30.0),
                )
            })
            .collect();
        assert_eq!(batch_moves(&moves).0.len(), 1);
    }

    #[test]
    fn mutual_crossings_need_one_batch_each() {
        // Reversal of a row: every pair is inverted.
        let n = 5;
        let moves: Vec<MoveSpec> = (0..n)
            .map(|i| mv(i, (i as f64 * 6.0, 0.0), ((n - 1 - i) as f64 * 6.0, 20.0)))
            .collect();
        assert_eq!(batch_moves(&moves).0.len(), n);
    }

    #[test]
    fn merging_columns_is_illegal() {
        let a = mv(0, (0.0, 0.0), (10.0, 30.0));
        let b = mv(1, (6.0, 6.0), (10.0, 36.0));
        assert!(!compatible(&a, &b));
    }

    #[test]
    fn swap_ring_is_parked() {
        // Traps: 0 at x=0, 1 at x=10, 2 at x=20 (free).
        let pos = |t: usize| (t as f64 * 10.0, 0.0);
        let moves = vec![
            MoveSpec {
                qubit: 0,
                from: 0,
                to: 1,
                start: pos(0),
                end: pos(1),
            },
            MoveSpec {
                qubit: 1,
                from: 1,
                to: 0,
                start: pos(1),
                end: pos(0),
            },
        ];
        let occ = |t: usize| match t {
            0 => Some(0),
            1 => Some(1),
            _ => None,
        };
        let plan = plan_batches(moves, 3, pos, occ, |t| t < 2).unwrap();
        assert_eq!(plan.moves.len(), 3);
        assert!(plan.dag.is_acyclic());
        let mut batch_of = vec![0; plan.moves.len()];
        for (b, batch) in plan.batches.iter().enumerate() {
            for &i in batch {
                batch_of[i] = b;
            }
        }
        assert!(plan.dag.respected_by(&batch_of));
        assert!(plan.moves.iter().any(|m| m.to == 2));
    }

    #[test]
    fn blocked_by_static_atom() {
        let pos = |t: usize| (t as f64 * 10.0, 0.0);
        let moves = vec![MoveSpec {
            qubit: 0,
            from: 0,
            to: 1,
            start: pos(0),
            end: pos(1),
        }];
        let err = plan_batches(moves, 2, pos, Some, |_| true).unwrap_err();
        assert!(matches!(
            err,
            RouteError::TargetOccupied { occupant: 1, .. }
        ));
    }

    #[test]
    fn parks_in_a_trap_that_fills_later() {
        // q0 and q1 swap traps 0 and 1; q2 moves from trap 2 into trap 3, the
        // only trap empty beforehand.
        let pos = |t: usize| (t as f64 * 10.0, 0.0);
        let spec = |q: usize, a: usize, b: usize| MoveSpec {
            qubit: q,
            from: a,
            to: b,
            start: pos(a),
            end: pos(b),
        };
        let moves = vec![spec(0, 0, 1), spec(1, 1, 0), spec(2, 2, 3)];
        let occupant = |t: usize| (t < 3).then_some(t);
        let plan = plan_batches(moves, 4, pos, occupant, |_| true).unwrap();
        let mut batch_of = vec![0; plan.moves.len()];
        for (b, members) in plan.batches.iter().enumerate() {
            for &i in members {
                batch_of[i] = b;
            }
        }
        assert!(plan.dag.respected_by(&batch_of));
        let unpark = plan.moves.iter().position(|m| m.from == 3).unwrap();
        let arrive = plan.moves.iter().position(|m| m.qubit == 2).unwrap();
        assert!(batch_of[arrive] > batch_of[unpark]);
    }
}
