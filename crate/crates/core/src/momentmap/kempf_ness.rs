use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{MomentOrigin, OrbitModel};
use crate::cones::Membership;
use crate::error::{Error, Result};

/// The Kempf–Ness functional
/// `Φ(x) = ⟨w, x⟩ + ½ Σ_ij t⁰_ij exp(2(x_i − x_j))`,
/// strictly convex on the gauge slice `Σ r_i x_i = 0` for a connected quiver.
/// Its gradient is the moment map `w + Σ t_ij(x) m_ij`.
#[derive(Clone, Debug)]
pub struct KempfNessFunctional<'a> {
    orbit: &'a OrbitModel,
    w: Vec<f64>,
}

impl<'a> KempfNessFunctional<'a> {
    pub fn new(orbit: &'a OrbitModel, w: Vec<f64>) -> Self {
        assert_eq!(w.len(), orbit.len());
        KempfNessFunctional { orbit, w }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let linear: f64 = self.w.iter().zip(x).map(|(a, b)| a * b).sum();
        let exp_part: f64 = self.orbit.magnitudes(x).iter().sum();
        linear + 0.5 * exp_part
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.w.clone();
        for (&(i, j), t) in self.orbit.edges().iter().zip(self.orbit.magnitudes(x)) {
            g[i] += t;
            g[j] -= t;
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.orbit.len();
        let mut h = DMatrix::zeros(n, n);
        for (&(i, j), t) in self.orbit.edges().iter().zip(self.orbit.magnitudes(x)) {
            let c = 2.0 * t;
            h[(i, i)] += c;
            h[(j, j)] += c;
            h[(i, j)] -= c;
            h[(j, i)] -= c;
        }
        h
    }

    /// Orthonormal basis (as columns) of the slice `Σ r_i x_i = 0`.
    pub fn slice_basis(&self) -> DMatrix<f64> {
        let r = self.orbit.ranks();
        let n = r.len();
        let mut b = DMatrix::zeros(n, n - 1);
        for k in 1..n {
            b[(0, k - 1)] = -(r[k] as f64);
            b[(k, k - 1)] = r[0] as f64;
        }
        b.qr().q()
    }

    /// Smallest eigenvalue of the Hessian restricted to the gauge slice.
    pub fn slice_min_eigenvalue(&self, x: &[f64]) -> f64 {
        if self.orbit.len() < 2 {
            return f64::INFINITY;
        }
        let q = self.slice_basis();
        let restricted = q.transpose() * self.hessian(x) * &q;
        restricted
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoSolutionReason {
    /// `w = 0`: only the orbit boundary point `b = 0` solves the equation.
    Apex,
    /// `−w` on the boundary of the weight cone: a zero exists only in the
    /// orbit closure.
    Boundary,
    /// `−w` outside the weight cone.
    Outside,
}

impl NoSolutionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoSolutionReason::Apex => "apex",
            NoSolutionReason::Boundary => "boundary",
            NoSolutionReason::Outside => "outside",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Solved,
    NoSolution(NoSolutionReason),
    MaxIterations,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Solved => f.write_str("solved"),
            SolveStatus::NoSolution(r) => write!(f, "no-solution({})", r.as_str()),
            SolveStatus::MaxIterations => f.write_str("max-iterations"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentSolution {
    /// Torus coordinate, gauge fixed to `Σ r_i x_i = 0`.
    pub x: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
    /// `t_ij = ‖b_ij‖²` at `x`, one per edge.
    pub t: Vec<f64>,
    /// Max-norm of `w + Σ t_ij m_ij`.
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl MomentSolution {
    pub fn is_solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }

    /// `Σ t_ij = ‖b‖²`.
    pub fn total(&self) -> f64 {
        self.t.iter().sum()
    }

    pub fn edge_value(&self, edge: (usize, usize)) -> Option<f64> {
        self.edges.iter().position(|&e| e == edge).map(|k| self.t[k])
    }
}

/// Damped Newton with Armijo backtracking on the gauge slice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KempfNess {
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
}

impl Default for KempfNess {
    fn default() -> Self {
        KempfNess {
            tol: 1e-10,
            max_iter: 200,
            armijo: 1e-4,
        }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn project_to_slice(x: &mut [f64], ranks: &[u32]) {
    let total: f64 = ranks.iter().map(|&r| r as f64).sum();
    let shift: f64 = x.iter().zip(ranks).map(|(v, &r)| v * r as f64).sum::<f64>() / total;
    for v in x.iter_mut() {
        *v -= shift;
    }
}

impl KempfNess {
    pub fn with_tol(tol: f64) -> Self {
        KempfNess {
            tol,
            ..Self::default()
        }
    }

    pub fn solve(&self, orbit: &OrbitModel, origin: &MomentOrigin) -> Result<MomentSolution> {
        self.solve_from(orbit, origin, None)
    }

    /// Decides existence exactly from the position of `−w` in the weight
    /// cone, then minimises the functional from `x0` (or 0) when `−w` is in
    /// the interior.
    pub fn solve_from(
        &self,
        orbit: &OrbitModel,
        origin: &MomentOrigin,
        x0: Option<&[f64]>,
    ) -> Result<MomentSolution> {
        if !(self.tol > 0.0) {
            return Err(Error::Precondition("tolerance must be positive".into()));
        }
        if origin.w.len() != orbit.len() {
            return Err(Error::DimensionMismatch {
                expected: orbit.len(),
                found: origin.w.len(),
            });
        }
        let n = orbit.len();
        let mut x: Vec<f64> = match x0 {
            Some(v) if v.len() == n && v.iter().all(|a| a.is_finite()) => v.to_vec(),
            _ => vec![0.0; n],
        };
        project_to_slice(&mut x, orbit.ranks());
        let functional = KempfNessFunctional::new(orbit, origin.to_f64());

        let membership = orbit.cone().membership(&origin.negated())?;
        if membership != Membership::Interior {
            let reason = if origin.is_zero() {
                NoSolutionReason::Apex
            } else if membership == Membership::Boundary {
                NoSolutionReason::Boundary
            } else {
                NoSolutionReason::Outside
            };
            return Ok(self.finish(orbit, &functional, x, 0, SolveStatus::NoSolution(reason)));
        }

        let ranks: Vec<f64> = orbit.ranks().iter().map(|&r| r as f64).collect();
        let mut value = functional.value(&x);
        let mut grad = functional.gradient(&x);
        for iter in 0..self.max_iter {
            let residual = max_norm(&grad);
            if !residual.is_finite() || !value.is_finite() {
                return Err(Error::Solver(format!(
                    "non-finite state at iteration {iter}"
                )));
            }
            if residual <= self.tol {
                let x = polish(&functional, x, &grad, &ranks);
                return Ok(self.finish(orbit, &functional, x, iter, SolveStatus::Solved));
            }
            let dir = newton_direction(&functional.hessian(&x), &grad, &ranks)?;
            let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
            let noise = 64.0 * f64::EPSILON * (1.0 + value.abs());
            let mut step = 1.0;
            let mut accepted = None;
            let mut fallback: Option<(Vec<f64>, f64, Vec<f64>, f64)> = None;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
                let tv = functional.value(&trial);
                if tv.is_finite() {
                    let tg = functional.gradient(&trial);
                    let tr = max_norm(&tg);
                    // Once the predicted decrease is below rounding in Φ,
                    // only the residual is a reliable measure of progress.
                    let in_noise = -slope * step <= noise;
                    if (in_noise && tr < residual)
                        || (!in_noise && tv <= value + self.armijo * step * slope)
                    {
                        accepted = Some((trial, tv, tg));
                        break;
                    }
                    // Keep the best residual seen so the quadratic phase can
                    // finish if the value test keeps failing.

                    if tr < residual && fallback.as_ref().is_none_or(|f| tr < f.3) {
                        fallback = Some((trial, tv, tg, tr));
                    }
                }
                step *= 0.5;
            }
            let (nx, nv, ng) = match (accepted, fallback) {
                (Some(a), _) => a,
                (None, Some((t, v, g, _))) => (t, v, g),
                (None, None) => {
                    return Err(Error::Solver(format!(
                        "line search failed at iteration {iter} with residual {residual:e}"
                    )))
                }
            };
            x = nx;
            project_to_slice(&mut x, orbit.ranks());
            value = nv;
            grad = ng;
        }
        if max_norm(&grad) <= self.tol {
            return Ok(self.finish(orbit, &functional, x, self.max_iter, SolveStatus::Solved));
        }
        Ok(self.finish(orbit, &functional, x, self.max_iter, SolveStatus::MaxIterations))
    }

    fn finish(
        &self,
        orbit: &OrbitModel,
        functional: &KempfNessFunctional<'_>,
        x: Vec<f64>,
        iterations: usize,
        status: SolveStatus,
    ) -> MomentSolution {
        let residual = max_norm(&functional.gradient(&x));
        MomentSolution {
            t: orbit.magnitudes(&x),
            edges: orbit.edges().to_vec(),
            x,
            residual,
            iterations,
            status,
        }
    }
}

/// Extra full Newton steps once converged, kept while they lower the
/// residual; small edge magnitudes then get full relative accuracy.
fn polish(functional: &KempfNessFunctional<'_>, mut x: Vec<f64>, grad: &[f64], ranks: &[f64]) -> Vec<f64> {
    let mut grad = grad.to_vec();
    let mut residual = max_norm(&grad);
    for _ in 0..8 {
        let Ok(dir) = newton_direction(&functional.hessian(&x), &grad, ranks) else {
            break;
        };
        let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + d).collect();
        let shift = trial.iter().zip(ranks).map(|(v, r)| v * r).sum::<f64>() / ranks.iter().sum::<f64>();
        trial.iter_mut().for_each(|v| *v -= shift);
        let tg = functional.gradient(&trial);
        let tr = max_norm(&tg);
        if !(tr < residual) {
            break;
        }
        (x, grad, residual) = (trial, tg, tr);
    }
    x
}

/// Solves `H d = −g` subject to `Σ r_i d_i = 0` via the bordered system.
fn newton_direction(h: &DMatrix<f64>, g: &[f64], ranks: &[f64]) -> Result<Vec<f64>> {
    let n = g.len();
    let mut k = DMatrix::zeros(n + 1, n + 1);
    k.view_mut((0, 0), (n, n)).copy_from(h);
    for i in 0..n {
        k[(i, n)] = ranks[i];
        k[(n, i)] = ranks[i];
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i] = -g[i];
    }
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("singular Newton system".into()))?;
    let d: Vec<f64> = sol.iter().take(n).copied().collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite Newton direction".into()));
    }
    Ok(d)
}

/// [`KempfNess::solve`] with explicit tolerance and iteration cap.
pub fn kempf_ness_solve(
    orbit: &OrbitModel,
    origin: &MomentOrigin,
    tol: f64,
    max_iter: usize,
) -> Result<MomentSolution> {
    KempfNess {
        tol,
        max_iter,
        ..KempfNess::default()
    }
    .solve(orbit, origin)
}
