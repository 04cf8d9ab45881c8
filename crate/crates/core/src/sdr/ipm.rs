//! Primal-dual interior-point solver for the lifted max-min problem
//!
//! ```text
//!   max γ   s.t.  q_lᴴ Ω q_l − γ − s_l = 0   (l = 1..K)
//!                 Ω_ii = 1                    (i = 1..N)
//!                 Ω ⪰ 0,  γ ≥ 0,  s ≥ 0
//! ```
//!
//! `γ ≥ 0` does not cut the feasible set since every `q_l q_lᴴ` is PSD. The
//! method is an infeasible-start path-following scheme with the HKM search
//! direction and Mehrotra predictor-corrector steps. All constraint matrices
//! are rank one (`e_i e_iᴴ` or `q_l q_lᴴ`), so the Schur complement is built
//! from the Gram matrices `Wᴴ X W` and `Wᴴ Z⁻¹ W` of the dictionary
//! `W = [I | Q]`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::CVector;

type CMatrix = DMatrix<Complex64>;

const STEP_FRACTION: f64 = 0.98;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Output {
    pub omega: CMatrix,
    /// Primal objective γ at termination.
    pub gamma_primal: f64,
    /// Certified upper bound on the relaxed optimum from the dual iterate.
    pub gamma_bound: f64,
    pub iterations: usize,
}

fn herm(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn re_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    // Re tr(A B) for Hermitian A, B
    a.iter().zip(b.transpose().iter()).map(|(x, y)| (x * y).re).sum()
}

fn cholesky(m: &CMatrix, what: &str) -> Result<Cholesky<Complex64, nalgebra::Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::SolverNumerical(format!("{what} lost positive definiteness")))
}

/// Largest α with `X + α ΔX ⪰ 0`, or `+∞`.
fn psd_step(chol: &Cholesky<Complex64, nalgebra::Dyn>, dx: &CMatrix) -> Result<f64> {
    let l = chol.l();
    let t = l
        .solve_lower_triangular(dx)
        .ok_or_else(|| Error::SolverNumerical("singular Cholesky factor".into()))?;
    let s = l
        .solve_lower_triangular(&t.adjoint())
        .ok_or_else(|| Error::SolverNumerical("singular Cholesky factor".into()))?;
    let eig = SymmetricEigen::new(herm(&s)).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if min >= 0.0 { f64::INFINITY } else { -1.0 / min })
}

fn lp_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

struct Problem<'a> {
    n: usize,
    k: usize,
    q: &'a CMatrix,
}

impl Problem<'_> {
    fn m(&self) -> usize {
        self.n + self.k
    }

    /// `A(X, x)`.
    fn apply(&self, x: &CMatrix, xl: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for i in 0..self.n {
            out[i] = x[(i, i)].re;
        }
        let xq = x * self.q;
        for l in 0..self.k {
            let quad: Complex64 = self.q.column(l).iter().zip(xq.column(l).iter()).map(|(a, b)| a.conj() * b).sum();
            out[self.n + l] = quad.re - xl[0] - xl[1 + l];
        }
        out
    }

    /// PSD part of `Aᵀ y`.
    fn adjoint_psd(&self, y: &DVector<f64>) -> CMatrix {
        let mut scaled = self.q.clone();
        for l in 0..self.k {
            scaled.column_mut(l).scale_mut(y[self.n + l]);
        }
        let mut out = &scaled * self.q.adjoint();
        for i in 0..self.n {
            out[(i, i)] += Complex64::new(y[i], 0.0);
        }
        herm(&out)
    }

    /// LP part of `Aᵀ y`.
    fn adjoint_lp(&self, y: &DVector<f64>) -> Vec<f64> {
        let yc = &y.as_slice()[self.n..];
        let mut out = Vec::with_capacity(self.k + 1);
        out.push(-yc.iter().sum::<f64>());
        out.extend(yc.iter().map(|v| -v));
        out
    }

    /// Gram matrix `Wᴴ S W` with `W = [I | Q]`.
    fn gram(&self, s: &CMatrix) -> CMatrix {
        let (n, m) = (self.n, self.m());
        let sq = s * self.q;
        let qsq = self.q.adjoint() * &sq;
        let mut g = CMatrix::zeros(m, m);
        g.view_mut((0, 0), (n, n)).copy_from(s);
        g.view_mut((0, n), (n, self.k)).copy_from(&sq);
        g.view_mut((n, 0), (self.k, n)).copy_from(&sq.adjoint());
        g.view_mut((n, n), (self.k, self.k)).copy_from(&qsq);
        g
    }
}

/// Solves the relaxed max-min SDP for normalized constraint vectors `q`
/// (columns of an `N × K` matrix).
pub(crate) fn solve(q: &CMatrix, settings: Settings) -> Result<Output> {
    let prob = Problem {
        n: q.nrows(),
        k: q.ncols(),
        q,
    };
    let (n, k, m) = (prob.n, prob.k, prob.m());
    let nlp = k + 1;
    let degree = (n + nlp) as f64;

    let mut b = DVector::zeros(m);
    b.rows_mut(0, n).fill(1.0);

    let mut x = CMatrix::identity(n, n);
    let mut z = CMatrix::identity(n, n);
    let mut xl = vec![1.0; nlp];
    let mut zl = vec![1.0; nlp];
    let mut y = DVector::<f64>::zeros(m);

    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for iter in 0..settings.max_iter {
        let rp = &b - prob.apply(&x, &xl);
        let rd = herm(&(&z - prob.adjoint_psd(&y)));
        let aty_lp = prob.adjoint_lp(&y);
        let mut rdl: Vec<f64> = zl.iter().zip(&aty_lp).map(|(z, a)| z - a).collect();
        rdl[0] += 1.0;

        let pobj = xl[0];
        let dobj: f64 = y.rows(0, n).sum();
        let compl = re_inner(&x, &z) + xl.iter().zip(&zl).map(|(a, b)| a * b).sum::<f64>();
        let mu = compl / degree;

        let pinf = rp.amax();
        let dinf = rd.iter().map(|c| c.norm()).fold(0.0, f64::max).max(rdl.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let scale = 1.0 + pobj.abs() + dobj.abs();
        let gap = ((pobj - dobj).abs().max(compl)) / scale;
        last = (gap, pinf, dinf);
        log::trace!("ipm iter {iter}: pobj {pobj:.10} dobj {dobj:.10} gap {gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}");

        if gap <= settings.tol && pinf <= settings.tol && dinf <= settings.tol {
            return Ok(Output {
                gamma_bound: dual_bound(&prob, &y).max(pobj),
                omega: herm(&x),
                gamma_primal: pobj,
                iterations: iter,
            });
        }

        let chol_x = cholesky(&x, "primal iterate")?;
        let chol_z = cholesky(&z, "dual slack")?;
        let zi = herm(&chol_z.inverse());

        // Schur complement M_ij = Re[(w_iᴴ X w_j)(w_jᴴ Z⁻¹ w_i)] + LP block
        let px = prob.gram(&x);
        let rz = prob.gram(&zi);
        let mut schur = DMatrix::<f64>::from_fn(m, m, |i, j| (px[(i, j)] * rz[(j, i)]).re);
        let ratio: Vec<f64> = xl.iter().zip(&zl).map(|(a, b)| a / b).collect();
        for l in 0..k {
            for l2 in 0..k {
                schur[(n + l, n + l2)] += ratio[0];
            }
            schur[(n + l, n + l)] += ratio[1 + l];
        }
        let schur = (&schur + schur.transpose()) * 0.5;
        let schur_chol = Cholesky::new(schur.clone());
        let schur_lu = if schur_chol.is_none() { Some(schur.lu()) } else { None };

        let x_rd_zi = &x * &rd * &zi;
        let direction = |rc_zi: &CMatrix, rcl: &[f64]| -> Result<Direction> {
            let g = herm(&(rc_zi + &x_rd_zi));
            let gl: Vec<f64> = (0..nlp).map(|i| rcl[i] / zl[i] + ratio[i] * rdl[i]).collect();
            let rhs = prob.apply(&g, &gl) - &rp;
            let dy = match (&schur_chol, &schur_lu) {
                (Some(c), _) => c.solve(&rhs),
                (None, Some(lu)) => lu
                    .solve(&rhs)
                    .ok_or_else(|| Error::SolverNumerical("singular Schur complement".into()))?,
                _ => unreachable!(),
            };
            let dz = herm(&(prob.adjoint_psd(&dy) - &rd));
            let aty = prob.adjoint_lp(&dy);
            let dzl: Vec<f64> = aty.iter().zip(&rdl).map(|(a, r)| a - r).collect();
            let dx = herm(&(rc_zi - &x * &dz * &zi));
            let dxl: Vec<f64> = (0..nlp).map(|i| (rcl[i] - xl[i] * dzl[i]) / zl[i]).collect();
            Ok(Direction { dx, dxl, dy, dz, dzl })
        };

        let steps = |d: &Direction, frac: f64| -> Result<(f64, f64)> {
            let ap = psd_step(&chol_x, &d.dx)?.min(lp_step(&xl, &d.dxl));
            let ad = psd_step(&chol_z, &d.dz)?.min(lp_step(&zl, &d.dzl));
            Ok(((frac * ap).min(1.0), (frac * ad).min(1.0)))
        };

        // predictor
        let rcl_aff: Vec<f64> = xl.iter().zip(&zl).map(|(a, b)| -a * b).collect();
        let aff = direction(&(-&x), &rcl_aff)?;
        let (ap, ad) = steps(&aff, 1.0)?;
        let x_aff = &x + &aff.dx * Complex64::new(ap, 0.0);
        let z_aff = &z + &aff.dz * Complex64::new(ad, 0.0);
        let lp_aff: f64 = (0..nlp).map(|i| (xl[i] + ap * aff.dxl[i]) * (zl[i] + ad * aff.dzl[i])).sum();
        let mu_aff = (re_inner(&x_aff, &z_aff) + lp_aff) / degree;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let target = Complex64::new(sigma * mu, 0.0);
        let rc_zi = &zi * target - &x - &aff.dx * &aff.dz * &zi;
        let rcl: Vec<f64> = (0..nlp)
            .map(|i| sigma * mu - xl[i] * zl[i] - aff.dxl[i] * aff.dzl[i])
            .collect();
        let d = direction(&rc_zi, &rcl)?;
        let (ap, ad) = steps(&d, STEP_FRACTION)?;

        x = herm(&(&x + &d.dx * Complex64::new(ap, 0.0)));
        z = herm(&(&z + &d.dz * Complex64::new(ad, 0.0)));
        for i in 0..nlp {
            xl[i] += ap * d.dxl[i];
            zl[i] += ad * d.dzl[i];
        }
        y += &d.dy * ad;
    }

    Err(Error::SolverNonConvergence {
        iterations: settings.max_iter,
        gap: last.0,
        primal: last.1,
        dual: last.2,
    })
}

struct Direction {
    dx: CMatrix,
    dxl: Vec<f64>,
    dy: DVector<f64>,
    dz: CMatrix,
    dzl: Vec<f64>,
}

/// Upper bound on the relaxed optimum valid for any dual vector:
/// for simplex weights μ and any diagonal `y`,
/// `min_l q_lᴴΩq_l ≤ Σ y_i + N·max(0, λ_max(Σ μ_l q_l q_lᴴ − Diag(y)))`
/// whenever `Ω ⪰ 0` has unit diagonal.
fn dual_bound(prob: &Problem, y: &DVector<f64>) -> f64 {
    let n = prob.n;
    let mut mu: Vec<f64> = (0..prob.k).map(|l| (-y[n + l]).max(0.0)).collect();
    let total: f64 = mu.iter().sum();
    if total <= 0.0 {
        return f64::INFINITY;
    }
    mu.iter_mut().for_each(|v| *v /= total);
    let mut weights = DVector::zeros(prob.m());
    for i in 0..n {
        weights[i] = -y[i];
    }
    for (l, w) in mu.iter().enumerate() {
        weights[n + l] = *w;
    }
    let s = prob.adjoint_psd(&weights);
    let lmax = SymmetricEigen::new(s).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    y.rows(0, n).sum() + n as f64 * lmax.max(0.0)
}

/// Stacks vectors as the columns of a matrix.
pub(crate) fn columns(vectors: &[CVector], scale: f64) -> CMatrix {
    let n = vectors.first().map_or(0, |v| v.len());
    CMatrix::from_fn(n, vectors.len(), |i, l| vectors[l][i] * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> Settings {
        Settings { tol: 1e-9, max_iter: 100 }
    }

    #[test]
    fn scalar_problem() {
        let q = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let out = solve(&q, settings()).unwrap();
        assert!((out.gamma_primal - 1.0).abs() < 1e-8);
        assert!((out.gamma_bound - 1.0).abs() < 1e-8);
        assert!((out.omega[(0, 0)].re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn single_constraint_is_rank_one() {
        // q = v/√N with unit-modulus v: optimum N at Ω = v vᴴ
        let n = 5;
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::cis(0.7 * i as f64 + 0.1 * (i * i) as f64)).collect();
        let q = CMatrix::from_fn(n, 1, |i, _| v[i] / (n as f64).sqrt());
        let out = solve(&q, settings()).unwrap();
        assert!((out.gamma_primal - n as f64).abs() < 1e-7, "{}", out.gamma_primal);
        assert!(out.gamma_bound >= out.gamma_primal - 1e-12);
        for i in 0..n {
            for j in 0..n {
                let want = v[i] * v[j].conj();
                assert!((out.omega[(i, j)] - want).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn orthogonal_constraints_split_energy() {
        // two orthogonal DFT-like constraints on N = 2: max min is 1 (Ω = I)
        let s = 1.0 / 2f64.sqrt();
        let q = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
            ],
        );
        let out = solve(&q, settings()).unwrap();
        // q1ᴴΩq1 + q2ᴴΩq2 = tr Ω = 2, so the best worst case is 1
        assert!((out.gamma_primal - 1.0).abs() < 1e-7);
        assert!((out.gamma_bound - 1.0).abs() < 1e-7);
    }
}
