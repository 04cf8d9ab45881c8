//! Angles, direction cosines and uniform rectangular planar array (URPA)
//! steering vectors.
//!
//! All angles are radians. Element `(n_x, n_z)` of a planar array vector is
//! stored at flat index `n_x * nz + n_z`, i.e. the x-factor is the outer
//! Kronecker factor and the z-factor the inner one.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex column vector used for steering vectors, response vectors and codewords.
pub type CVector = DVector<Complex64>;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed smallest difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = wrap_two_pi(a - b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// An (elevation, azimuth) propagation direction in a local array frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDirection {
    elevation: f64,
    azimuth: f64,
}

impl AngleDirection {
    /// Elevation must lie in `[0, π]`; the azimuth is wrapped into `[0, 2π)`.
    pub fn new(elevation: f64, azimuth: f64) -> Result<Self> {
        if !elevation.is_finite() || !azimuth.is_finite() {
            return Err(Error::InvalidAngle(format!(
                "non-finite direction ({elevation}, {azimuth})"
            )));
        }
        if !(0.0..=PI).contains(&elevation) {
            return Err(Error::InvalidAngle(format!(
                "elevation {elevation} rad outside [0, π]"
            )));
        }
        Ok(Self {
            elevation,
            azimuth: wrap_two_pi(azimuth),
        })
    }

    pub fn from_degrees(elevation_deg: f64, azimuth_deg: f64) -> Result<Self> {
        Self::new(elevation_deg.to_radians(), azimuth_deg.to_radians())
    }

    /// A direction in the horizontal plane (elevation π/2).
    pub fn horizontal(azimuth: f64) -> Self {
        Self {
            elevation: PI / 2.0,
            azimuth: wrap_two_pi(azimuth),
        }
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn cosines(&self) -> DirectionCosines {
        direction_cosines(*self)
    }
}

/// Projections `(A_x, A_y, A_z)` of a unit direction onto the array axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionCosines {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl DirectionCosines {
    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.ax,
            Axis::Y => self.ay,
            Axis::Z => self.az,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn direction_cosines(a: AngleDirection) -> DirectionCosines {
    let (st, ct) = a.elevation.sin_cos();
    let (sp, cp) = a.azimuth.sin_cos();
    DirectionCosines {
        ax: st * cp,
        ay: st * sp,
        az: ct,
    }
}

/// `A_l(t) + A_l(r)` for the chosen axis.
pub fn combined_cosine(t: AngleDirection, r: AngleDirection, axis: Axis) -> f64 {
    direction_cosines(t).component(axis) + direction_cosines(r).component(axis)
}

/// Element counts, spacings and unit-cell size of one planar panel (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub unit_cell_x: f64,
    pub unit_cell_z: f64,
}

impl ArrayGeometry {
    pub fn new(
        nx: usize,
        nz: usize,
        dx: f64,
        dz: f64,
        unit_cell_x: f64,
        unit_cell_z: f64,
    ) -> Result<Self> {
        if nx == 0 || nz == 0 {
            return Err(Error::InvalidGeometry(format!(
                "element counts must be >= 1 (nx = {nx}, nz = {nz})"
            )));
        }
        for (name, v) in [
            ("dx", dx),
            ("dz", dz),
            ("unit_cell_x", unit_cell_x),
            ("unit_cell_z", unit_cell_z),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self {
            nx,
            nz,
            dx,
            dz,
            unit_cell_x,
            unit_cell_z,
        })
    }

    /// Geometry with all spacings and cell sizes given as fractions of the wavelength.
    pub fn in_wavelengths(
        nx: usize,
        nz: usize,
        wave: &Wave,
        d_over_lambda: f64,
        cell_over_lambda: f64,
    ) -> Result<Self> {
        let l = wave.wavelength();
        Self::new(
            nx,
            nz,
            d_over_lambda * l,
            d_over_lambda * l,
            cell_over_lambda * l,
            cell_over_lambda * l,
        )
    }

    /// Total element count `nx * nz`.
    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Carrier wavelength and wavenumber `κ = 2π/λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    wavelength: f64,
    wavenumber: f64,
}

impl Wave {
    pub fn new(wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidWavelength(wavelength));
        }
        Ok(Self {
            wavelength,
            wavenumber: TAU / wavelength,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
}

/// `[1, e^{jθ}, …, e^{jθ(n-1)}]`.
pub fn phase_ramp(n: usize, step: f64) -> CVector {
    DVector::from_iterator(n, (0..n).map(|k| Complex64::cis(step * k as f64)))
}

/// Kronecker product of two column vectors, `outer` index varying slowest.
pub fn kron(outer: &CVector, inner: &CVector) -> CVector {
    let mut out = DVector::zeros(outer.len() * inner.len());
    for (i, &a) in outer.iter().enumerate() {
        for (k, &b) in inner.iter().enumerate() {
            out[i * inner.len() + k] = a * b;
        }
    }
    out
}

/// Planar-array vector for direction cosines `(ax, az)`.
pub(crate) fn planar_vector(g: &ArrayGeometry, w: &Wave, ax: f64, az: f64) -> CVector {
    let kappa = w.wavenumber();
    kron(
        &phase_ramp(g.nx, kappa * g.dx * ax),
        &phase_ramp(g.nz, kappa * g.dz * az),
    )
}

/// URPA steering vector `a_x(A_x) ⊗ a_z(A_z)` with per-element phase `κ d A n`.
pub fn steering_vector(g: &ArrayGeometry, a: AngleDirection, w: &Wave) -> CVector {
    let c = direction_cosines(a);
    planar_vector(g, w, c.ax, c.az)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn cosines_axis_cases() {
        let c = direction_cosines(AngleDirection::new(PI / 2.0, 0.0).unwrap());
        assert!(close(c.ax, 1.0) && close(c.ay, 0.0) && close(c.az, 0.0));
        let c = direction_cosines(AngleDirection::new(0.0, 1.3).unwrap());
        assert!(close(c.ax, 0.0) && close(c.ay, 0.0) && close(c.az, 1.0));
        let c = direction_cosines(AngleDirection::new(PI / 2.0, PI / 2.0).unwrap());
        assert!(close(c.ax, 0.0) && close(c.ay, 1.0) && close(c.az, 0.0));
    }

    #[test]
    fn combined_cosine_cases() {
        let h = AngleDirection::horizontal;
        assert!(close(combined_cosine(h(0.0), h(PI), Axis::X), 0.0));
        assert!(close(combined_cosine(h(0.0), h(0.0), Axis::X), 2.0));
        assert!(close(
            combined_cosine(h(PI / 3.0), h(2.0 * PI / 3.0), Axis::Z),
            0.0
        ));
    }

    #[test]
    fn angle_validation() {
        assert!(AngleDirection::new(-0.1, 0.0).is_err());
        assert!(AngleDirection::new(PI + 1e-9, 0.0).is_err());
        assert!(AngleDirection::new(f64::NAN, 0.0).is_err());
        let a = AngleDirection::new(1.0, -PI / 2.0).unwrap();
        assert!(close(a.azimuth(), 1.5 * PI));
        let a = AngleDirection::new(1.0, 5.0 * PI).unwrap();
        assert!(close(a.azimuth(), PI));
        assert!((0.0..TAU).contains(&wrap_two_pi(-1e-300)));
    }

    #[test]
    fn geometry_and_wave_validation() {
        assert!(ArrayGeometry::new(0, 1, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ArrayGeometry::new(1, 1, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ArrayGeometry::new(1, 1, 1.0, 1.0, -1.0, 1.0).is_err());
        assert!(Wave::new(0.0).is_err());
        let w = Wave::new(0.0123).unwrap();
        assert!((w.wavenumber() * w.wavelength() - TAU).abs() < 1e-12);
    }

    #[test]
    fn steering_vector_examples() {
        let w = Wave::new(0.01).unwrap();
        let single = ArrayGeometry::in_wavelengths(1, 1, &w, 0.25, 0.25).unwrap();
        let v = steering_vector(&single, AngleDirection::new(0.7, 2.1).unwrap(), &w);
        assert_eq!(v.len(), 1);
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let g = ArrayGeometry::in_wavelengths(2, 1, &w, 0.25, 0.25).unwrap();
        let v = steering_vector(&g, AngleDirection::new(0.0, 0.0).unwrap(), &w);
        for e in v.iter() {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }

        // κ d_x A_x = (2π/λ)(λ/4)(1) = π/2 along x, zero along z
        let g = ArrayGeometry::in_wavelengths(2, 2, &w, 0.25, 0.25).unwrap();
        let v = steering_vector(&g, AngleDirection::new(PI / 2.0, 0.0).unwrap(), &w);
        let i = Complex64::i();
        let expect = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), i, i];
        for (got, want) in v.iter().zip(expect) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    fn arb_dir() -> impl Strategy<Value = AngleDirection> {
        (0.0..=PI, 0.0..TAU).prop_map(|(e, a)| AngleDirection::new(e, a).unwrap())
    }

    proptest! {
        #[test]
        fn steering_entries_unit_modulus(a in arb_dir(), nx in 1usize..8, nz in 1usize..8) {
            let w = Wave::new(0.01).unwrap();
            let g = ArrayGeometry::in_wavelengths(nx, nz, &w, 0.25, 0.25).unwrap();
            let v = steering_vector(&g, a, &w);
            prop_assert_eq!(v.len(), nx * nz);
            prop_assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            for e in v.iter() {
                prop_assert!((e.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn steering_matches_kronecker(a in arb_dir(), nx in 1usize..7, nz in 1usize..7) {
            let w = Wave::new(0.02).unwrap();
            let g = ArrayGeometry::new(nx, nz, 0.004, 0.007, 0.005, 0.005).unwrap();
            let c = a.cosines();
            let kappa = w.wavenumber();
            let xs: Vec<Complex64> = (0..nx).map(|n| Complex64::cis(kappa * g.dx * c.ax * n as f64)).collect();
            let zs: Vec<Complex64> = (0..nz).map(|n| Complex64::cis(kappa * g.dz * c.az * n as f64)).collect();
            let v = steering_vector(&g, a, &w);
            for (i, x) in xs.iter().enumerate() {
                for (k, z) in zs.iter().enumerate() {
                    prop_assert_eq!(v[i * nz + k], x * z);
                }
            }
        }

        #[test]
        fn conjugate_symmetry(ax in -1.0f64..1.0, az in -1.0f64..1.0, nx in 1usize..6, nz in 1usize..6) {
            let w = Wave::new(0.01).unwrap();
            let g = ArrayGeometry::in_wavelengths(nx, nz, &w, 0.25, 0.25).unwrap();
            let v = planar_vector(&g, &w, ax, az);
            let u = planar_vector(&g, &w, -ax, -az);
            for (p, q) in v.iter().zip(u.iter()) {
                prop_assert!((p - q.conj()).norm() < 1e-12);
            }
        }
    }
}
