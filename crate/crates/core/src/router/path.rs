//! Collision-free transit paths for picked atoms.
//!
//! A path leaves the source trap with a short sideways shift into a column
//! lane, travels vertically to a row lane, crosses horizontally, drops
//! vertically in a second column lane beside the target, and shifts back in.
//! Lane offsets are multiples of the pre-shift step `delta` bounded by
//! `max_lane_offset`; every segment keeps `clearance` from static atoms.

use serde::{Deserialize, Serialize};

use crate::architecture::ArchitectureConfig;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouterParams {
    /// Pre-shift step, µm.
    pub delta: f64,
    /// Minimum distance from any static atom, µm.
    pub clearance: f64,
    /// Largest lane offset tried around a trap row or column, µm.
    pub max_lane_offset: f64,
}

impl Default for RouterParams {
    fn default() -> Self {
        Self {
            delta: 1.0,
            clearance: 2.0,
            max_lane_offset: 3.0,
        }
    }
}

pub type Point = (f64, f64);

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

pub fn path_length(path: &[Point]) -> f64 {
    path.windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .sum()
}

/// Nearest obstacle violating clearance along `a → b`, if any.
fn blocked(a: Point, b: Point, obstacles: &[Point], clearance: f64) -> Option<usize> {
    let (lo_x, hi_x) = (a.0.min(b.0) - clearance, a.0.max(b.0) + clearance);
    let (lo_y, hi_y) = (a.1.min(b.1) - clearance, a.1.max(b.1) + clearance);
    obstacles.iter().position(|&p| {
        p.0 > lo_x - EPS
            && p.0 < hi_x + EPS
            && p.1 > lo_y - EPS
            && p.1 < hi_y + EPS
            && point_segment_distance(p, a, b) < clearance - EPS
    })
}

fn offsets(params: &RouterParams) -> Vec<f64> {
    let k_max = (params.max_lane_offset / params.delta + EPS).floor() as i64;
    let mut out = vec![0.0];
    for k in 1..=k_max {
        out.push(k as f64 * params.delta);
        out.push(-(k as f64) * params.delta);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathError {
    /// No lane combination kept clearance; carries the obstacle index that
    /// blocked the least-detour attempt.
    NoLane { obstacle: Option<usize> },
}

/// Waypoints from `start` to `end` avoiding `obstacles` (static atoms).
///
/// Returns an empty list for a zero-length move. Consecutive duplicate
/// waypoints are removed, so an unobstructed straight move is `[start, end]`
/// plus any shifts needed to stay in lanes.
pub fn pre_shift_path(
    start: Point,
    end: Point,
    obstacles: &[Point],
    config: &ArchitectureConfig,
    params: &RouterParams,
) -> Result<Vec<Point>, PathError> {
    if (start.0 - end.0).abs() < EPS && (start.1 - end.1).abs() < EPS {
        return Ok(Vec::new());
    }
    let clearance = params.clearance;
    let offs = offsets(params);

    // Candidate row lanes around every trap row plus the two endpoints,
    // plus the middle of the inter-zone gap.
    let mut lanes: Vec<f64> = Vec::new();
    let mut bases = config.row_ys();
    bases.push(start.1);
    bases.push(end.1);
    for &y in &bases {
        for &o in &offs {
            lanes.push(y + o);
        }
    }
    lanes.push(config.storage_top() + config.zone_gap / 2.0);
    let (lo, hi) = (
        start.1.min(end.1) - params.max_lane_offset - EPS,
        start.1.max(end.1) + params.max_lane_offset + EPS,
    );
    lanes.retain(|&y| y >= lo && y <= hi);
    lanes.sort_by(|a, b| {
        let detour = |y: f64| (y - start.1).abs() + (y - end.1).abs();
        detour(*a)
            .total_cmp(&detour(*b))
            .then((a - start.1).abs().total_cmp(&(b - start.1).abs()))
            .then(a.total_cmp(b))
    });
    lanes.dedup_by(|a, b| (*a - *b).abs() < EPS);

    let mut first_block: Option<usize> = None;
    let mut note = |b: Option<usize>| {
        if first_block.is_none() {
            first_block = b;
        }
    };

    for &ly in &lanes {
        // exit leg: start → (sx+ex, sy) → (sx+ex, ly)
        let exits: Vec<(Point, Point)> = offs
            .iter()
            .filter_map(|&ex| {
                let p1 = (start.0 + ex, start.1);
                let p2 = (start.0 + ex, ly);
                let b = blocked(start, p1, obstacles, clearance)
                    .or_else(|| blocked(p1, p2, obstacles, clearance));
                note(b);
                b.is_none().then_some((p1, p2))
            })
            .collect();
        if exits.is_empty() {
            continue;
        }
        // entry leg: (tx+ex2, ly) → (tx+ex2, ty) → end
        let entries: Vec<(Point, Point)> = offs
            .iter()
            .filter_map(|&ex| {
                let p3 = (end.0 + ex, ly);
                let p4 = (end.0 + ex, end.1);
                let b = blocked(p3, p4, obstacles, clearance)
                    .or_else(|| blocked(p4, end, obstacles, clearance));
                note(b);
                b.is_none().then_some((p3, p4))
            })
            .collect();
        for &(p1, p2) in &exits {
            for &(p3, p4) in &entries {
                let b = blocked(p2, p3, obstacles, clearance);
                note(b);
                if b.is_none() {
                    let mut path = vec![start, p1, p2, p3, p4, end];
                    path.dedup_by(|a, b| (a.0 - b.0).abs() < EPS && (a.1 - b.1).abs() < EPS);
                    return Ok(path);
                }
            }
        }
    }
    Err(PathError::NoLane {
        obstacle: first_block,
    })
}
