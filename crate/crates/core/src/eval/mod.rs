//! Normalized-gain maps, leakage towards unintended RISs and scenario-wide
//! averages.
//!
//! Map entry `(l2, l1)` is `|g/(ḡN)|²` for BS ray `l2` arriving at the source
//! and source→target ray `l1` departing it; index 0 is LoS on both sides.

mod export;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::codebook::{build_codebook, Method};
use crate::error::{Error, Result};
use crate::geometry::AngleDirection;
use crate::ris::{normalized_gain, PhaseVector, RayPair};
use crate::scenario::{reference_scenario, Scenario};

pub use export::{aggregate_csv, entries_csv, grid_text, EntryRecord};

/// Normalized gains from the source's BS rays onto one target's rays.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMap {
    pub source: usize,
    pub focus_target: usize,
    pub method: Method,
    /// Rows: BS→source rays (`l2`); columns: source→target rays (`l1`).
    pub entries: DMatrix<f64>,
    pub incident: Vec<AngleDirection>,
    pub reflected: Vec<AngleDirection>,
}

impl GainMap {
    pub fn min(&self) -> f64 {
        self.entries.min()
    }

    pub fn max(&self) -> f64 {
        self.entries.max()
    }

    pub fn mean(&self) -> f64 {
        self.entries.mean()
    }

    pub fn records(&self, seed: u64) -> Vec<EntryRecord> {
        EntryRecord::from_matrix(&self.entries, self.source, self.focus_target, None, self.method, seed)
    }
}

/// Normalized gains towards an unintended RIS under the codeword for `focus_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    pub source: usize,
    pub focus_target: usize,
    pub leak_target: usize,
    pub method: Method,
    pub entries: DMatrix<f64>,
    pub max_leak: f64,
    pub incident: Vec<AngleDirection>,
    pub reflected: Vec<AngleDirection>,
}

impl LeakageReport {
    pub fn mean(&self) -> f64 {
        self.entries.mean()
    }

    pub fn records(&self, seed: u64) -> Vec<EntryRecord> {
        EntryRecord::from_matrix(
            &self.entries,
            self.source,
            self.focus_target,
            Some(self.leak_target),
            self.method,
            seed,
        )
    }
}

fn evaluate(
    scenario: &Scenario,
    codeword: &PhaseVector,
    source: usize,
    target: usize,
) -> Result<(DMatrix<f64>, Vec<AngleDirection>, Vec<AngleDirection>)> {
    let node = scenario.ris(source)?;
    scenario.ris(target)?;
    if target == source {
        return Err(Error::InvalidLayout(format!("target RIS {target} is the source itself")));
    }
    let g = &node.geometry;
    if codeword.geometry().nx != g.nx || codeword.geometry().nz != g.nz {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            actual: codeword.len(),
        });
    }
    let incident = scenario.incident_rays(source)?;
    let reflected = scenario.departure_rays(source, target)?;
    let mut entries = DMatrix::zeros(incident.len(), reflected.len());
    for (l2, &t) in incident.iter().enumerate() {
        for (l1, &r) in reflected.iter().enumerate() {
            entries[(l2, l1)] = normalized_gain(codeword, g, &scenario.wave, &RayPair::new(t, r))?;
        }
    }
    Ok((entries, incident, reflected))
}

pub fn gain_map(
    scenario: &Scenario,
    codeword: &PhaseVector,
    source: usize,
    focus_target: usize,
    method: Method,
) -> Result<GainMap> {
    let (entries, incident, reflected) = evaluate(scenario, codeword, source, focus_target)?;
    Ok(GainMap {
        source,
        focus_target,
        method,
        entries,
        incident,
        reflected,
    })
}

pub fn leakage(
    scenario: &Scenario,
    codeword: &PhaseVector,
    source: usize,
    focus_target: usize,
    leak_target: usize,
    method: Method,
) -> Result<LeakageReport> {
    if leak_target == focus_target {
        return Err(Error::LeakIsFocus(leak_target));
    }
    scenario.ris(focus_target)?;
    let (entries, incident, reflected) = evaluate(scenario, codeword, source, leak_target)?;
    let max_leak = entries.max();
    Ok(LeakageReport {
        source,
        focus_target,
        leak_target,
        method,
        entries,
        max_leak,
        incident,
        reflected,
    })
}

/// Running sums over maps; every entry has equal weight.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Totals {
    pub intended_sum: f64,
    pub intended_count: usize,
    pub leak_sum: f64,
    pub leak_count: usize,
    pub min_gain_sum: f64,
    pub codewords: usize,
}

impl Totals {
    fn add(&mut self, other: &Totals) {
        self.intended_sum += other.intended_sum;
        self.intended_count += other.intended_count;
        self.leak_sum += other.leak_sum;
        self.leak_count += other.leak_count;
        self.min_gain_sum += other.min_gain_sum;
        self.codewords += other.codewords;
    }

    pub fn mean_intended(&self) -> f64 {
        self.intended_sum / self.intended_count as f64
    }

    pub fn mean_leakage(&self) -> f64 {
        self.leak_sum / self.leak_count as f64
    }

    pub fn mean_min_gain(&self) -> f64 {
        self.min_gain_sum / self.codewords as f64
    }

    /// Mean over intended and leakage entries together.
    pub fn mean_combined(&self) -> f64 {
        (self.intended_sum + self.leak_sum) / (self.intended_count + self.leak_count) as f64
    }
}

/// Builds every RIS's codebook and accumulates intended gains over all ordered
/// (source, target) pairs and leakage over all (source, target, other) triples.
pub fn scenario_totals(scenario: &Scenario, method: Method, tol: f64) -> Result<Totals> {
    let per_source = scenario
        .ris_ids()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&source| {
            let book = build_codebook(scenario, source, method, tol)?;
            let mut t = Totals::default();
            for entry in &book.entries {
                let map = gain_map(scenario, &entry.codeword, source, entry.target, method)?;
                t.intended_sum += map.entries.sum();
                t.intended_count += map.entries.len();
                t.min_gain_sum += map.min();
                t.codewords += 1;
                for other in scenario.ris_ids().filter(|&k| k != source && k != entry.target) {
                    let leak = leakage(scenario, &entry.codeword, source, entry.target, other, method)?;
                    t.leak_sum += leak.entries.sum();
                    t.leak_count += leak.entries.len();
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Totals::default();
    per_source.iter().for_each(|t| total.add(t));
    Ok(total)
}

/// One (panel size, angle spread) point of the reference scenario family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyPoint {
    pub nx: usize,
    pub nz: usize,
    /// Half-width Δ_a in radians.
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub spread: f64,
    pub nx: usize,
    pub nz: usize,
    pub mean_intended_gain: f64,
    pub mean_leakage: f64,
    pub mean_min_gain: f64,
    pub mean_combined: f64,
    pub seed_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn row(&self, method: Method, nx: usize, nz: usize, spread: f64) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.nx == nx && r.nz == nz && (r.spread - spread).abs() < 1e-12)
    }
}

/// Averages over seeds of the reference layout for every (point, method).
/// Seeds are evaluated in parallel and reduced in seed order.
pub fn aggregate(points: &[FamilyPoint], methods: &[Method], seeds: &[u64], tol: f64) -> Result<AggregateReport> {
    if seeds.is_empty() {
        return Err(Error::schema("seeds", "at least one seed is required"));
    }
    let mut rows = Vec::with_capacity(points.len() * methods.len());
    for point in points {
        for &method in methods {
            let per_seed = seeds
                .par_iter()
                .map(|&seed| {
                    let s = reference_scenario(seed, (point.nx, point.nz), point.spread)?;
                    scenario_totals(&s, method, tol)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut total = Totals::default();
            per_seed.iter().for_each(|t| total.add(t));
            rows.push(AggregateRow {
                method,
                spread: point.spread,
                nx: point.nx,
                nz: point.nz,
                mean_intended_gain: total.mean_intended(),
                mean_leakage: total.mean_leakage(),
                mean_min_gain: total.mean_min_gain(),
                mean_combined: total.mean_combined(),
                seed_count: seeds.len(),
            });
        }
    }
    Ok(AggregateReport { rows })
}
