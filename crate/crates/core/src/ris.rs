//! RIS response function, unit-cell factor and the linear focusing codebook.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{combined_cosine, planar_vector, ArrayGeometry, Axis, AngleDirection, CVector, Wave};

/// Tolerance on `|c| - 1` accepted for reflection coefficients.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Threshold on `|e^{jθ} - 1|` below which a geometric series is evaluated by its limit.
const DIRICHLET_LIMIT_TOL: f64 = 1e-12;

/// A unit-modulus reflection-coefficient vector (one codeword) for a given panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    coefficients: CVector,
    geometry: ArrayGeometry,
}

impl PhaseVector {
    pub fn new(geometry: ArrayGeometry, coefficients: CVector) -> Result<Self> {
        if coefficients.len() != geometry.len() {
            return Err(Error::LengthMismatch {
                expected: geometry.len(),
                actual: coefficients.len(),
            });
        }
        for (index, c) in coefficients.iter().enumerate() {
            let modulus = c.norm();
            if modulus.is_nan() || (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(Error::NotUnitModulus { index, modulus });
            }
        }
        Ok(Self {
            coefficients,
            geometry,
        })
    }

    /// Codeword `e^{jφ_n}` from per-element phases in radians.
    pub fn from_phases(geometry: ArrayGeometry, phases: &[f64]) -> Result<Self> {
        if phases.len() != geometry.len() {
            return Err(Error::LengthMismatch {
                expected: geometry.len(),
                actual: phases.len(),
            });
        }
        if let Some(bad) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidAngle(format!("phase {bad} is not finite")));
        }
        Ok(Self {
            coefficients: CVector::from_iterator(phases.len(), phases.iter().map(|&p| Complex64::cis(p))),
            geometry,
        })
    }

    /// All-ones codeword (zero phase on every element).
    pub fn uniform(geometry: ArrayGeometry) -> Self {
        Self {
            coefficients: CVector::from_element(geometry.len(), Complex64::new(1.0, 0.0)),
            geometry,
        }
    }

    pub fn coefficients(&self) -> &CVector {
        &self.coefficients
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Per-element phases in `(-π, π]`.
    pub fn phases(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.arg()).collect()
    }

    /// Multiplies every coefficient by `e^{jθ}`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::cis(theta);
        Self {
            coefficients: self.coefficients.map(|c| c * r),
            geometry: self.geometry,
        }
    }

    /// Largest entrywise phase deviation from `other` after removing the best
    /// common phase offset.
    pub fn phase_distance(&self, other: &PhaseVector) -> f64 {
        let inner: Complex64 = self
            .coefficients
            .iter()
            .zip(other.coefficients.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        let offset = Complex64::cis(-inner.arg());
        self.coefficients
            .iter()
            .zip(other.coefficients.iter())
            .map(|(a, b)| (a * offset * b.conj()).arg().abs())
            .fold(0.0, f64::max)
    }
}

/// Incident (AoA at the RIS) and reflected (AoD from the RIS) direction pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPair {
    pub incident: AngleDirection,
    pub reflected: AngleDirection,
}

impl RayPair {
    pub fn new(incident: AngleDirection, reflected: AngleDirection) -> Self {
        Self {
            incident,
            reflected,
        }
    }

    /// Combined cosines `(A_x(Ψ_t, Ψ_r), A_z(Ψ_t, Ψ_r))`.
    pub fn combined(&self) -> (f64, f64) {
        (
            combined_cosine(self.incident, self.reflected, Axis::X),
            combined_cosine(self.incident, self.reflected, Axis::Z),
        )
    }
}

/// `4π L_x L_z / λ²`.
pub fn unit_cell_factor(g: &ArrayGeometry, w: &Wave) -> f64 {
    4.0 * PI * g.unit_cell_x * g.unit_cell_z / (w.wavelength() * w.wavelength())
}

/// `x(Ψ_t, Ψ_r) ⊗ z(Ψ_t, Ψ_r)`, the per-element phase progression of a ray pair.
pub fn response_vector(g: &ArrayGeometry, w: &Wave, ray: &RayPair) -> CVector {
    let (ax, az) = ray.combined();
    planar_vector(g, w, ax, az)
}

/// Complex RIS response `ḡ Σ_{n_x,n_z} e^{jκd_xA_x n_x} e^{jκd_zA_z n_z} p[n_x, n_z]`.
pub fn response(
    p: &PhaseVector,
    g: &ArrayGeometry,
    w: &Wave,
    ray: &RayPair,
    gbar: f64,
) -> Result<Complex64> {
    if p.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            actual: p.len(),
        });
    }
    let (ax, az) = ray.combined();
    let kappa = w.wavenumber();
    let (tx, tz) = (kappa * g.dx * ax, kappa * g.dz * az);
    let c = p.coefficients();
    let mut acc = Complex64::new(0.0, 0.0);
    for n_x in 0..g.nx {
        let ex = Complex64::cis(tx * n_x as f64);
        for n_z in 0..g.nz {
            acc += ex * Complex64::cis(tz * n_z as f64) * c[n_x * g.nz + n_z];
        }
    }
    Ok(acc * gbar)
}

/// Normalized gain `|g / (ḡ N)|²`, independent of `ḡ`.
pub fn normalized_gain(p: &PhaseVector, g: &ArrayGeometry, w: &Wave, ray: &RayPair) -> Result<f64> {
    let r = response(p, g, w, ray, 1.0)?;
    Ok(r.norm_sqr() / (g.len() as f64).powi(2))
}

/// Linear phase-gradient codeword focusing `design.incident` onto `design.reflected`.
pub fn linear_codeword(g: &ArrayGeometry, w: &Wave, design: &RayPair) -> PhaseVector {
    let (ax, az) = design.combined();
    PhaseVector {
        coefficients: planar_vector(g, w, -ax, -az),
        geometry: *g,
    }
}

/// `Σ_{k<n} e^{jθk}`, evaluated as `e^{jθ(n-1)/2} sin(nθ/2)/sin(θ/2)`.
fn dirichlet(theta: f64, n: usize) -> Complex64 {
    if (Complex64::cis(theta) - 1.0).norm() < DIRICHLET_LIMIT_TOL {
        return Complex64::new(n as f64, 0.0);
    }
    let nf = n as f64;
    Complex64::cis(theta * (nf - 1.0) / 2.0) * ((nf * theta / 2.0).sin() / (theta / 2.0).sin())
}

/// Closed-form response of the linear codeword designed for `design`, at `ray`.
pub fn linear_response(
    g: &ArrayGeometry,
    w: &Wave,
    ray: &RayPair,
    design: &RayPair,
    gbar: f64,
) -> Complex64 {
    let (ax, az) = ray.combined();
    let (dx_star, dz_star) = design.combined();
    let kappa = w.wavenumber();
    gbar * dirichlet(kappa * g.dx * (ax - dx_star), g.nx) * dirichlet(kappa * g.dz * (az - dz_star), g.nz)
}

/// Linear codebook of one RIS: one codeword per target, each designed on the
/// pair (LoS AoA from the BS, LoS AoD towards that target).
pub fn linear_codebook(
    g: &ArrayGeometry,
    w: &Wave,
    designs: &[(usize, RayPair)],
) -> Result<Vec<(usize, PhaseVector)>> {
    let mut seen = Vec::with_capacity(designs.len());
    for (target, _) in designs {
        if seen.contains(target) {
            return Err(Error::DuplicateTarget(*target));
        }
        seen.push(*target);
    }
    Ok(designs
        .iter()
        .map(|(target, design)| (*target, linear_codeword(g, w, design)))
        .collect())
}
