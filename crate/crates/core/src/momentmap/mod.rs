//! Finite-dimensional torus moment map in Darboux normal form.
//!
//! Normalization: all positive scalar factors of the moment map (the `2π`,
//! the volume of `ω_ε`, the ε-dependent pairing) are dropped, so the value at
//! the origin of the orbit is `w_i = deg_ε(G_i) − r_i·μ_ε(E)`. Membership,
//! signs, existence of zeros and vanishing of limits are all invariant under
//! such rescaling.
//!
//! Points of the complexified torus orbit are parametrised by `x ∈ ℝ^ℓ`, with
//! edge magnitudes `t_ij = t⁰_ij · exp(2(x_i − x_j))`, and the moment equation
//! reads `w + Σ t_ij m_ij = 0`.

// Negated float comparisons below are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod degeneration;
mod kempf_ness;
mod path;

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::bundle::GradedBundle;
use crate::cones::{self, RationalCone};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use degeneration::{
    degeneration_filtration, limit_support_check, DegenerationReport, LimitPiece, SupportVerdict,
};
pub use kempf_ness::{
    kempf_ness_solve, KempfNess, KempfNessFunctional, MomentSolution, NoSolutionReason,
    SolveStatus,
};
pub use path::{
    geometric_samples, linear_samples, log_spaced, loglog_fit, segment, solve_path,
    write_path_csv, PathSample,
};

/// `μ*_ε(0)` in the normalization described in the module docs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentOrigin {
    pub w: Vec<Rational>,
}

impl MomentOrigin {
    pub fn is_zero(&self) -> bool {
        self.w.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.w.iter().map(rational::to_f64).collect()
    }

    pub fn negated(&self) -> Vec<Rational> {
        self.w.iter().map(|x| -x).collect()
    }

    /// `⟨w, v⟩` with the natural duality pairing.
    pub fn pair(&self, v: &[Rational]) -> Rational {
        rational::dot(&self.w, v)
    }
}

pub fn moment_origin(gb: &GradedBundle, eps: &[Rational]) -> Result<MomentOrigin> {
    let l = gb.polarisation(eps)?;
    let mu = gb.slope(&l)?;
    let w = (0..gb.len())
        .map(|i| {
            let r = Rational::from_integer(gb.pieces()[i].rank.into());
            Ok(gb.piece_degree(i, &l)? - r * &mu)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentOrigin { w })
}

/// Edge data of the orbit through `b`: quiver edges with base magnitudes
/// `t⁰_ij = ‖b_ij‖² > 0`, the ranks, and the weight cone.
#[derive(Clone, Debug)]
pub struct OrbitModel {
    ranks: Vec<u32>,
    edges: Vec<(usize, usize)>,
    base: Vec<f64>,
    cone: RationalCone,
}

impl OrbitModel {
    /// All base magnitudes equal to 1.
    pub fn new(gb: &GradedBundle) -> Result<Self> {
        Self::with_magnitudes(gb, &BTreeMap::new())
    }

    /// Base magnitudes keyed by 0-based edge; missing edges default to 1.
    pub fn with_magnitudes(
        gb: &GradedBundle,
        magnitudes: &BTreeMap<(usize, usize), f64>,
    ) -> Result<Self> {
        let edges: Vec<(usize, usize)> = gb.edges().iter().copied().collect();
        for e in magnitudes.keys() {
            if !gb.edges().contains(e) {
                return Err(Error::Precondition(format!(
                    "magnitude given for [{}, {}], which is not a quiver edge",
                    e.0 + 1,
                    e.1 + 1
                )));
            }
        }
        let base: Vec<f64> = edges
            .iter()
            .map(|e| magnitudes.get(e).copied().unwrap_or(1.0))
            .collect();
        Self::from_parts(gb.ranks(), edges, base)
    }

    pub fn uniform(gb: &GradedBundle, magnitude: f64) -> Result<Self> {
        let edges: Vec<(usize, usize)> = gb.edges().iter().copied().collect();
        let base = vec![magnitude; edges.len()];
        Self::from_parts(gb.ranks(), edges, base)
    }

    pub fn from_parts(ranks: Vec<u32>, edges: Vec<(usize, usize)>, base: Vec<f64>) -> Result<Self> {
        if base.len() != edges.len() {
            return Err(Error::DimensionMismatch {
                expected: edges.len(),
                found: base.len(),
            });
        }
        if let Some(b) = base.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::Precondition(format!(
                "base magnitudes must be positive and finite, got {b}"
            )));
        }
        let cone = cones::weight_cone_of(ranks.len(), edges.iter().copied())?;
        Ok(OrbitModel {
            ranks,
            edges,
            base,
            cone,
        })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn cone(&self) -> &RationalCone {
        &self.cone
    }

    /// `t_ij(x) = t⁰_ij exp(2(x_i − x_j))`.
    pub fn magnitudes(&self, x: &[f64]) -> Vec<f64> {
        self.edges
            .iter()
            .zip(&self.base)
            .map(|(&(i, j), t0)| t0 * (2.0 * (x[i] - x[j])).exp())
            .collect()
    }
}
