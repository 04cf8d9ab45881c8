//! Max-min optimized codewords by semidefinite relaxation.
//!
//! The unit-modulus problem `max_φ min_l |ḡ φᴴ v_l|²` is lifted to
//! `Ω = φφᴴ`, the rank constraint is dropped, and the relaxed SDP is solved
//! by an interior-point method. A feasible codeword is then recovered from
//! the leading eigenvector of `Ω*`, normalized entrywise to unit modulus.
//!
//! `φ` here is the inner-product vector, the conjugate of the stored
//! codeword: `ḡ φᴴ v = response(conj φ)`. `SdrSolution::omega` is in that
//! convention; `SdrSolution::codeword` is already conjugated back.

mod ipm;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AngleDirection, ArrayGeometry, CVector, Wave};
use crate::ris::{response_vector, unit_cell_factor, PhaseVector, RayPair};
use crate::scenario::Scenario;

/// Default solver tolerance on relative gap and residuals.
pub const DEFAULT_TOL: f64 = 1e-6;

const MAX_ITERATIONS: usize = 200;
const ZERO_ENTRY_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-9;

/// Constraint set of one max-min instance: one vector `v_l = x ⊗ z` per
/// (incident, reflected) ray pair.
#[derive(Debug, Clone)]
pub struct MaxMinProblem {
    constraint_vectors: Vec<CVector>,
    scale: f64,
    dimension: usize,
}

impl MaxMinProblem {
    /// `scale` is `|ḡ_uc|²`.
    pub fn new(constraint_vectors: Vec<CVector>, scale: f64) -> Result<Self> {
        let first = constraint_vectors.first().ok_or(Error::EmptyRays("constraint vectors"))?;
        let dimension = first.len();
        if dimension == 0 {
            return Err(Error::InvalidGeometry("zero-length constraint vector".into()));
        }
        for v in &constraint_vectors {
            if v.len() != dimension {
                return Err(Error::LengthMismatch {
                    expected: dimension,
                    actual: v.len(),
                });
            }
            if let Some((index, c)) = v.iter().enumerate().find(|(_, c)| (c.norm() - 1.0).abs() > 1e-9) {
                return Err(Error::NotUnitModulus { index, modulus: c.norm() });
            }
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidGeometry(format!("gain scale {scale} must be positive")));
        }
        Ok(Self {
            constraint_vectors,
            scale,
            dimension,
        })
    }

    pub fn constraint_vectors(&self) -> &[CVector] {
        &self.constraint_vectors
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `min_l scale · |φᴴ v_l|²` for an inner-product vector `φ`.
    pub fn min_gain(&self, phi: &CVector) -> f64 {
        self.constraint_vectors
            .iter()
            .map(|v| self.scale * phi.dotc(v).norm_sqr())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One constraint per (incident, reflected) pair, incident index outermost.
pub fn build_problem(
    g: &ArrayGeometry,
    w: &Wave,
    incident: &[AngleDirection],
    reflected: &[AngleDirection],
    gbar: f64,
) -> Result<MaxMinProblem> {
    if incident.is_empty() {
        return Err(Error::EmptyRays("incident"));
    }
    if reflected.is_empty() {
        return Err(Error::EmptyRays("reflected"));
    }
    let vectors = incident
        .iter()
        .flat_map(|&t| reflected.iter().map(move |&r| RayPair::new(t, r)))
        .map(|ray| response_vector(g, w, &ray))
        .collect();
    MaxMinProblem::new(vectors, gbar * gbar)
}

/// Optimum of the relaxed (rank-free) SDP.
#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub omega: DMatrix<Complex64>,
    /// Upper bound on the relaxed optimum certified by the dual iterate.
    pub gamma_relaxed: f64,
    /// Primal objective at termination; `gamma_primal ≤ gamma_relaxed`.
    pub gamma_primal: f64,
    pub iterations: usize,
}

pub fn solve_relaxed(p: &MaxMinProblem, tol: f64) -> Result<RelaxedSolution> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    // internal scaling: q_l = v_l/√N so that tr(q_l q_lᴴ) = 1
    let n = p.dimension as f64;
    let q = ipm::columns(&p.constraint_vectors, 1.0 / n.sqrt());
    let out = ipm::solve(
        &q,
        ipm::Settings {
            tol,
            max_iter: MAX_ITERATIONS,
        },
    )?;
    let unscale = p.scale * n;
    Ok(RelaxedSolution {
        omega: out.omega,
        gamma_relaxed: out.gamma_bound * unscale,
        gamma_primal: out.gamma_primal * unscale,
        iterations: out.iterations,
    })
}

/// Unit-modulus vector recovered from the leading eigenvector.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub vector: CVector,
    pub leading_eigenvalue: f64,
    /// Elements whose eigenvector entry vanished and were assigned phase 0.
    pub zero_entries: Vec<usize>,
}

/// Rotates `v` so its first non-negligible entry is real and positive.
fn fix_global_phase(v: &CVector) -> CVector {
    match v.iter().find(|c| c.norm() >= ZERO_ENTRY_TOL) {
        Some(c) => {
            let r = Complex64::cis(-c.arg());
            v.map(|e| e * r)
        }
        None => v.clone(),
    }
}

fn lexicographic_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Leading-eigenvector restoration of a rank-one unit-modulus vector.
///
/// When the top eigenvalue is degenerate (relative spread below 1e-9) the
/// candidate eigenvectors are phase-normalized and the lexicographically
/// largest is taken, so repeated runs agree.
pub fn restore_rank_one(omega: &DMatrix<Complex64>) -> Result<RankOne> {
    if !omega.is_square() || omega.is_empty() {
        return Err(Error::InvalidGeometry(format!(
            "omega must be a non-empty square matrix, got {}×{}",
            omega.nrows(),
            omega.ncols()
        )));
    }
    let eig = SymmetricEigen::new((omega + omega.adjoint()) * Complex64::new(0.5, 0.0));
    let lead = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = lead - DEGENERACY_TOL * lead.abs();
    let u = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= cutoff)
        .map(|i| fix_global_phase(&eig.eigenvectors.column(i).into_owned()))
        .max_by(lexicographic_cmp)
        .expect("at least one eigenvalue");

    let mut zero_entries = Vec::new();
    let vector = CVector::from_iterator(
        u.len(),
        u.iter().enumerate().map(|(i, c)| {
            if c.norm() < ZERO_ENTRY_TOL {
                zero_entries.push(i);
                Complex64::new(1.0, 0.0)
            } else {
                c / c.norm()
            }
        }),
    );
    if !zero_entries.is_empty() {
        log::warn!(
            "leading eigenvector has {} vanishing entries {:?}; assigned phase 0",
            zero_entries.len(),
            zero_entries
        );
    }
    Ok(RankOne {
        vector: fix_global_phase(&vector),
        leading_eigenvalue: lead,
        zero_entries,
    })
}

/// Result of the full relax-solve-restore pipeline for one codeword.
#[derive(Debug, Clone)]
pub struct SdrSolution {
    /// Relaxed optimum `Ω*` in the inner-product convention.
    pub omega: DMatrix<Complex64>,
    pub gamma_relaxed: f64,
    pub codeword: PhaseVector,
    /// `min_l |ḡ|² |φᴴ v_l|²` evaluated on the restored codeword.
    pub gamma_restored: f64,
    pub leading_eigenvalue: f64,
    pub iterations: usize,
    pub zero_entries: Vec<usize>,
}

impl SdrSolution {
    /// `gamma_restored / gamma_relaxed`, in `(0, 1]` up to solver tolerance.
    pub fn restoration_ratio(&self) -> f64 {
        self.gamma_restored / self.gamma_relaxed
    }
}

pub fn solve_problem(g: &ArrayGeometry, p: &MaxMinProblem, tol: f64) -> Result<SdrSolution> {
    if p.dimension() != g.len() {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            actual: p.dimension(),
        });
    }
    let relaxed = solve_relaxed(p, tol)?;
    let restored = restore_rank_one(&relaxed.omega)?;
    let gamma_restored = p.min_gain(&restored.vector);
    let codeword = PhaseVector::new(*g, restored.vector.map(|c| c.conj()))?;
    Ok(SdrSolution {
        omega: relaxed.omega,
        gamma_relaxed: relaxed.gamma_relaxed,
        codeword,
        gamma_restored,
        leading_eigenvalue: restored.leading_eigenvalue,
        iterations: relaxed.iterations,
        zero_entries: restored.zero_entries,
    })
}

/// Optimized codeword for the given incident (BS→RIS) and reflected
/// (RIS→target) ray sets.
pub fn opt_codeword(
    g: &ArrayGeometry,
    w: &Wave,
    incident: &[AngleDirection],
    reflected: &[AngleDirection],
    gbar: f64,
    tol: f64,
) -> Result<SdrSolution> {
    let p = build_problem(g, w, incident, reflected, gbar)?;
    solve_problem(g, &p, tol)
}

/// Optimized codebook of `source`: one solution per target RIS in id order.
/// Codewords are solved in parallel.
pub fn opt_codebook(scenario: &Scenario, source: usize, tol: f64) -> Result<Vec<(usize, SdrSolution)>> {
    let node = scenario.ris(source)?;
    let gbar = unit_cell_factor(&node.geometry, &scenario.wave);
    let incident = scenario.incident_rays(source)?;
    let targets: Vec<usize> = scenario.ris_ids().filter(|&t| t != source).collect();
    targets
        .par_iter()
        .map(|&target| {
            let reflected = scenario.departure_rays(source, target)?;
            let sol = opt_codeword(&node.geometry, &scenario.wave, &incident, &reflected, gbar, tol).map_err(|e| {
                match e {
                    Error::SolverNonConvergence { .. } | Error::SolverNumerical(_) => {
                        log::error!("SDR solve failed for RIS {source} -> RIS {target} (seed {})", scenario.seed);
                        e
                    }
                    other => other,
                }
            })?;
            Ok((target, sol))
        })
        .collect()
}
