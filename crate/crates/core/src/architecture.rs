//! Zoned array geometry.
//!
//! The storage zone is a rectangular SLM grid with its bottom-left trap at the
//! origin. The entanglement zone sits above it, `zone_gap` past the top storage
//! row, and is made of trap pairs (Left/Right slots) that are close enough to
//! blockade each other. Distinct pairs and stored atoms never interact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lengths are in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub storage_cols: usize,
    pub storage_rows: usize,
    pub ent_sites_per_row: usize,
    pub ent_rows: usize,
    pub storage_pitch_x: f64,
    pub storage_pitch_y: f64,
    pub intra_pair_gap: f64,
    pub inter_site_gap: f64,
    pub ent_row_pitch: f64,
    pub zone_gap: f64,
    pub rydberg_radius: f64,
}

impl Default for ArchitectureConfig {
    /// The 10×4 storage grid and 5×4 pair grid of the reference layout.
    fn default() -> Self {
        Self {
            storage_cols: 10,
            storage_rows: 4,
            ent_sites_per_row: 5,
            ent_rows: 4,
            storage_pitch_x: 6.0,
            storage_pitch_y: 6.0,
            intra_pair_gap: 4.0,
            inter_site_gap: 6.0,
            ent_row_pitch: 6.0,
            zone_gap: 12.0,
            rydberg_radius: 5.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error("invalid architecture: {0}")]
    InvalidConfig(String),
    #[error("site {0:?} is outside the configured array")]
    OutOfBounds(Site),
    #[error("insufficient capacity: {0}")]
    Capacity(CapacityShortfall),
    #[error("site {site:?} holds both q{first} and q{second}")]
    DoubleOccupancy {
        site: Site,
        first: usize,
        second: usize,
    },
    #[error("config parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityShortfall {
    pub storage_required: usize,
    pub storage_available: usize,
    pub ent_required: usize,
    pub ent_available: usize,
}

impl std::fmt::Display for CapacityShortfall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "storage {}/{} slots, entanglement {}/{} sites (required/available)",
            self.storage_required, self.storage_available, self.ent_required, self.ent_available
        )
    }
}

impl ArchitectureConfig {
    /// Capacity-driven sizing: a square-ish storage grid holding `n_qubits`,
    /// and pair rows about as wide as the storage zone holding `max_width` gates.
    pub fn sized_for(n_qubits: usize, max_width: usize) -> Self {
        let base = Self::default();
        let n = n_qubits.max(1);
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        let span = cols as f64 * base.storage_pitch_x;
        let per_row = ((span / base.site_pitch_x()).ceil() as usize).max(1);
        let ent_rows = max_width.max(1).div_ceil(per_row);
        Self {
            storage_cols: cols,
            storage_rows: rows,
            ent_sites_per_row: per_row,
            ent_rows,
            ..base
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ArchError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ArchError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("architecture config serializes")
    }

    pub fn validate(&self) -> Result<(), ArchError> {
        let bad = |m: &str| Err(ArchError::InvalidConfig(m.to_string()));
        let lengths = [
            self.storage_pitch_x,
            self.storage_pitch_y,
            self.intra_pair_gap,
            self.inter_site_gap,
            self.ent_row_pitch,
            self.zone_gap,
            self.rydberg_radius,
        ];
        if lengths.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return bad("all lengths must be positive and finite");
        }
        if !(self.intra_pair_gap < self.rydberg_radius) {
            return bad("intra_pair_gap must be below rydberg_radius");
        }
        if !(self.rydberg_radius <= self.inter_site_gap) {
            return bad("inter_site_gap must be at least rydberg_radius");
        }
        if !(self.storage_pitch_x > self.rydberg_radius
            && self.storage_pitch_y > self.rydberg_radius)
        {
            return bad("storage pitches must exceed rydberg_radius");
        }
        if !(self.ent_row_pitch >= self.rydberg_radius && self.zone_gap >= self.rydberg_radius) {
            return bad("entanglement row pitch and zone gap must be at least rydberg_radius");
        }
        Ok(())
    }

    pub fn site_pitch_x(&self) -> f64 {
        self.intra_pair_gap + self.inter_site_gap
    }

    pub fn storage_capacity(&self) -> usize {
        self.storage_cols * self.storage_rows
    }

    /// Number of trap pairs.
    pub fn ent_capacity(&self) -> usize {
        self.ent_sites_per_row * self.ent_rows
    }

    pub fn storage_top(&self) -> f64 {
        self.storage_rows.saturating_sub(1) as f64 * self.storage_pitch_y
    }

    pub fn ent_origin_y(&self) -> f64 {
        self.storage_top() + self.zone_gap
    }

    pub fn contains(&self, site: Site) -> bool {
        match site {
            Site::Storage { row, col } => row < self.storage_rows && col < self.storage_cols,
            Site::Entanglement { row, site, .. } => {
                row < self.ent_rows && site < self.ent_sites_per_row
            }
        }
    }

    pub fn site_position(&self, site: Site) -> Result<(f64, f64), ArchError> {
        if !self.contains(site) {
            return Err(ArchError::OutOfBounds(site));
        }
        Ok(self.position(site))
    }

    /// Unchecked position; callers guarantee the site is in bounds.
    pub fn position(&self, site: Site) -> (f64, f64) {
        match site {
            Site::Storage { row, col } => (
                col as f64 * self.storage_pitch_x,
                row as f64 * self.storage_pitch_y,
            ),
            Site::Entanglement { row, site, slot } => {
                let x = site as f64 * self.site_pitch_x()
                    + match slot {
                        Slot::Left => 0.0,
                        Slot::Right => self.intra_pair_gap,
                    };
                (x, self.ent_origin_y() + row as f64 * self.ent_row_pitch)
            }
        }
    }

    /// Dense index over all traps: storage first (row-major), then
    /// entanglement slots (row, site, Left before Right).
    pub fn site_index(&self, site: Site) -> usize {
        match site {
            Site::Storage { row, col } => row * self.storage_cols + col,
            Site::Entanglement { row, site, slot } => {
                self.storage_capacity()
                    + 2 * (row * self.ent_sites_per_row + site)
                    + matches!(slot, Slot::Right) as usize
            }
        }
    }

    pub fn site_at(&self, index: usize) -> Site {
        let sc = self.storage_capacity();
        if index < sc {
            Site::Storage {
                row: index / self.storage_cols,
                col: index % self.storage_cols,
            }
        } else {
            let e = index - sc;
            let pair = e / 2;
            Site::Entanglement {
                row: pair / self.ent_sites_per_row,
                site: pair % self.ent_sites_per_row,
                slot: if e.is_multiple_of(2) {
                    Slot::Left
                } else {
                    Slot::Right
                },
            }
        }
    }

    pub fn n_traps(&self) -> usize {
        self.storage_capacity() + 2 * self.ent_capacity()
    }

    pub fn storage_sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.storage_capacity()).map(|i| self.site_at(i))
    }

    /// Pair index `p` → (row, site).
    pub fn pair_coords(&self, pair: usize) -> (usize, usize) {
        (pair / self.ent_sites_per_row, pair % self.ent_sites_per_row)
    }

    pub fn pair_slot(&self, pair: usize, slot: Slot) -> Site {
        let (row, site) = self.pair_coords(pair);
        Site::Entanglement { row, site, slot }
    }

    /// Distinct y coordinates of all trap rows, ascending.
    pub fn row_ys(&self) -> Vec<f64> {
        let mut ys: Vec<f64> = (0..self.storage_rows)
            .map(|r| r as f64 * self.storage_pitch_y)
            .chain((0..self.ent_rows).map(|r| self.ent_origin_y() + r as f64 * self.ent_row_pitch))
            .collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        ys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    Left,
    Right,
}

impl Slot {
    pub fn other(self) -> Self {
        match self {
            Slot::Left => Slot::Right,
            Slot::Right => Slot::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    Storage { row: usize, col: usize },
    Entanglement { row: usize, site: usize, slot: Slot },
}

impl Site {
    pub fn is_storage(self) -> bool {
        matches!(self, Site::Storage { .. })
    }

    pub fn is_entanglement(self) -> bool {
        !self.is_storage()
    }

    /// The partner slot of an entanglement site.
    pub fn partner(self) -> Option<Site> {
        match self {
            Site::Entanglement { row, site, slot } => Some(Site::Entanglement {
                row,
                site,
                slot: slot.other(),
            }),
            Site::Storage { .. } => None,
        }
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Site::Storage { row, col } => write!(f, "S({row},{col})"),
            Site::Entanglement { row, site, slot } => {
                let s = if *slot == Slot::Left { 'L' } else { 'R' };
                write!(f, "E({row},{site},{s})")
            }
        }
    }
}

/// Bijection between placed qubits and traps.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Site>", into = "Vec<Site>")]
pub struct Occupancy {
    sites: Vec<Site>,
    by_site: HashMap<Site, usize>,
}

impl TryFrom<Vec<Site>> for Occupancy {
    type Error = ArchError;

    fn try_from(sites: Vec<Site>) -> Result<Self, Self::Error> {
        Self::from_sites(sites)
    }
}

impl From<Occupancy> for Vec<Site> {
    fn from(occ: Occupancy) -> Self {
        occ.sites
    }
}

impl Occupancy {
    /// `sites[q]` is qubit `q`'s trap.
    pub fn from_sites(sites: Vec<Site>) -> Result<Self, ArchError> {
        let mut by_site = HashMap::with_capacity(sites.len());
        for (q, &s) in sites.iter().enumerate() {
            if let Some(first) = by_site.insert(s, q) {
                return Err(ArchError::DoubleOccupancy {
                    site: s,
                    first,
                    second: q,
                });
            }
        }
        Ok(Self { sites, by_site })
    }

    pub fn n_qubits(&self) -> usize {
        self.sites.len()
    }

    pub fn site_of(&self, qubit: usize) -> Site {
        self.sites[qubit]
    }

    pub fn qubit_at(&self, site: Site) -> Option<usize> {
        self.by_site.get(&site).copied()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// Moves `qubit` to `to`; fails if `to` is held by another qubit.
    pub fn relocate(&mut self, qubit: usize, to: Site) -> Result<(), ArchError> {
        if let Some(other) = self.qubit_at(to) {
            if other != qubit {
                return Err(ArchError::DoubleOccupancy {
                    site: to,
                    first: other,
                    second: qubit,
                });
            }
            return Ok(());
        }
        let from = self.sites[qubit];
        self.by_site.remove(&from);
        self.by_site.insert(to, qubit);
        self.sites[qubit] = to;
        Ok(())
    }

    pub fn ent_qubits(&self) -> impl Iterator<Item = (usize, Site)> + '_ {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_entanglement())
            .map(|(q, &s)| (q, s))
    }
}

pub fn site_position(config: &ArchitectureConfig, site: Site) -> Result<(f64, f64), ArchError> {
    config.site_position(site)
}

/// Pairs of entanglement-zone qubits closer than the blockade radius,
/// each as `(min, max)`, sorted.
pub fn blockade_pairs(config: &ArchitectureConfig, occupancy: &Occupancy) -> Vec<(usize, usize)> {
    let atoms: Vec<(usize, (f64, f64))> = occupancy
        .ent_qubits()
        .map(|(q, s)| (q, config.position(s)))
        .collect();
    let r2 = config.rydberg_radius * config.rydberg_radius;
    let mut pairs = Vec::new();
    for (i, &(qa, (xa, ya))) in atoms.iter().enumerate() {
        for &(qb, (xb, yb)) in &atoms[i + 1..] {
            let d2 = (xa - xb).powi(2) + (ya - yb).powi(2);
            if d2 < r2 {
                pairs.push((qa.min(qb), qa.max(qb)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

pub fn check_capacity(
    config: &ArchitectureConfig,
    n_qubits: usize,
    max_stage_width: usize,
) -> Result<(), ArchError> {
    let shortfall = CapacityShortfall {
        storage_required: n_qubits,
        storage_available: config.storage_capacity(),
        ent_required: max_stage_width,
        ent_available: config.ent_capacity(),
    };
    if n_qubits > config.storage_capacity() || max_stage_width > config.ent_capacity() {
        Err(ArchError::Capacity(shortfall))
    } else {
        Ok(())
    }
}

/// Storage must hold every qubit; the pair grid must hold the widest ASAP stage.
pub fn min_capacity_check(
    config: &ArchitectureConfig,
    circuit: &crate::circuit::Circuit,
) -> Result<(), ArchError> {
    let dag = crate::circuit::GateDag::build(circuit);
    let plan = crate::scheduler::asap_schedule(circuit, &dag);
    check_capacity(config, circuit.n_qubits, plan.max_width())
}
