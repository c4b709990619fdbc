//! Rational polyhedral cones: the weight cone `σ` spanned by the weights
//! `m_ij = e_i − e_j` of the extension quiver, its dual `σ∨` inside the
//! rank-weighted trace-free subspace, and the two-valued dual generators
//! attached to closed subsets of the quiver.

pub mod dd;
pub mod lp;

use std::fmt;

use num_traits::{Signed, Zero};

use crate::bundle::GradedBundle;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// The weight `m_ij = e_i − e_j` of an extension component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    pub vector: Vec<i64>,
    pub edge: (usize, usize),
}

impl Weight {
    pub fn new(len: usize, edge: (usize, usize)) -> Self {
        let mut vector = vec![0; len];
        vector[edge.0] = 1;
        vector[edge.1] = -1;
        Weight { vector, edge }
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        rational::from_ints(&self.vector)
    }

    /// `⟨m_ij, v⟩ = v_i − v_j`.
    pub fn pair(&self, v: &[Rational]) -> Rational {
        &v[self.edge.0] - &v[self.edge.1]
    }
}

/// Finitely generated cone inside the subspace cut out by `subspace`.
///
/// `rays` are primitive integer vectors, sorted in decreasing lexicographic
/// order; `facets` are the inward normals of the facets, expressed inside
/// the same subspace. `span` lists extra equations that vanish on the cone
/// when it is not full-dimensional in its subspace; `lineality` is nonempty
/// exactly when the cone contains a line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCone {
    ambient_dim: usize,
    rays: Vec<Vec<Rational>>,
    facets: Vec<Vec<Rational>>,
    subspace: Vec<Vec<Rational>>,
    span: Vec<Vec<Rational>>,
    lineality: Vec<Vec<Rational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Interior => "interior",
            Membership::Boundary => "boundary",
            Membership::Outside => "outside",
        })
    }
}

impl RationalCone {
    /// Cone generated by `generators` within `{x : f(x) = 0 for f in subspace}`.
    /// Non-extremal generators are dropped after an exact LP test.
    pub fn from_generators(
        ambient_dim: usize,
        generators: &[Vec<Rational>],
        subspace: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        for g in generators.iter().chain(&subspace) {
            if g.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: g.len(),
                });
            }
        }
        if generators
            .iter()
            .any(|g| subspace.iter().any(|f| !rational::dot(f, g).is_zero()))
        {
            return Err(Error::OutsideSubspace);
        }
        let mut gens: Vec<Vec<Rational>> = generators
            .iter()
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .map(|g| rational::primitive_rational(g))
            .collect();
        gens.sort_by(|x, y| y.cmp(x));
        gens.dedup();

        let pointed = lp::is_pointed(&gens);
        let rays = if pointed {
            let mut kept: Vec<Vec<Rational>> = Vec::new();
            for (k, g) in gens.iter().enumerate() {
                let others: Vec<Vec<Rational>> = gens
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, h)| h.clone())
                    .collect();
                if others.is_empty() || !lp::in_cone(&others, g) {
                    kept.push(g.clone());
                }
            }
            kept
        } else {
            gens
        };

        // Facets are the extreme rays of the dual taken in the same subspace;
        // its lineality is the orthogonal complement of the cone's span.
        let polar = dd::extreme_rays(ambient_dim, &subspace, &rays);
        let lineality = if pointed {
            Vec::new()
        } else {
            dd::extreme_rays(ambient_dim, &subspace, &polar_inequalities(&polar)).lineality
        };
        Ok(RationalCone {
            ambient_dim,
            rays,
            facets: polar.rays,
            subspace,
            span: polar.lineality,
            lineality,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[Vec<Rational>] {
        &self.rays
    }

    pub fn facets(&self) -> &[Vec<Rational>] {
        &self.facets
    }

    pub fn subspace(&self) -> &[Vec<Rational>] {
        &self.subspace
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.lineality.is_empty()
    }

    /// Dimension of the linear span of the cone.
    pub fn dimension(&self) -> usize {
        dd::null_space(self.ambient_dim, &self.subspace).len() - self.span.len()
    }

    /// `{v : Σ w_i v_i = 0, ⟨g, v⟩ ≥ 0 for every generator g}`.
    pub fn dual(&self, trace_weights: &[Rational]) -> Result<RationalCone> {
        if trace_weights.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: trace_weights.len(),
            });
        }
        let subspace = vec![trace_weights.to_vec()];
        let mut ineq = self.rays.clone();
        for l in &self.lineality {
            ineq.push(l.clone());
            ineq.push(l.iter().map(|x| -x).collect());
        }
        let res = dd::extreme_rays(self.ambient_dim, &subspace, &ineq);
        let mut gens = res.rays;
        for l in &res.lineality {
            gens.push(l.clone());
            gens.push(l.iter().map(|x| -x).collect());
        }
        RationalCone::from_generators(self.ambient_dim, &gens, subspace)
    }

    /// Position of `v` relative to the cone, with interior meaning relative
    /// interior inside the cone's linear span.
    pub fn membership(&self, v: &[Rational]) -> Result<Membership> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: v.len(),
            });
        }
        if self.subspace.iter().any(|f| !rational::dot(f, v).is_zero()) {
            return Err(Error::OutsideSubspace);
        }
        if self.span.iter().any(|f| !rational::dot(f, v).is_zero()) {
            return Ok(Membership::Outside);
        }
        let mut on_boundary = false;
        for f in &self.facets {
            let s = rational::dot(f, v);
            if s.is_negative() {
                return Ok(Membership::Outside);
            }
            if s.is_zero() {
                on_boundary = true;
            }
        }
        // The apex of the zero cone counts as boundary.
        Ok(if on_boundary || self.rays.is_empty() {
            Membership::Boundary
        } else {
            Membership::Interior
        })
    }
}

fn polar_inequalities(polar: &dd::DdResult) -> Vec<Vec<Rational>> {
    let mut out = polar.rays.clone();
    for l in &polar.lineality {
        out.push(l.clone());
        out.push(l.iter().map(|x| -x).collect());
    }
    out
}

/// Convenience wrapper for [`RationalCone::membership`].
pub fn interior_membership(cone: &RationalCone, v: &[Rational]) -> Result<Membership> {
    cone.membership(v)
}

pub fn weights(gb: &GradedBundle) -> Vec<Weight> {
    gb.edges().iter().map(|&e| Weight::new(gb.len(), e)).collect()
}

/// `σ = Σ ℝ₊ m_ij` over the quiver edges, inside `{Σ x_i = 0}`.
pub fn weight_cone(gb: &GradedBundle) -> Result<RationalCone> {
    weight_cone_of(gb.len(), gb.edges().iter().copied())
}

pub fn weight_cone_of(
    len: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Result<RationalCone> {
    let gens: Vec<Vec<Rational>> = edges
        .into_iter()
        .map(|e| Weight::new(len, e).to_rational())
        .collect();
    if gens.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    RationalCone::from_generators(len, &gens, vec![vec![rational::int(1); len]])
}

pub fn dual_cone(cone: &RationalCone, trace_weights: &[u32]) -> Result<RationalCone> {
    let w: Vec<Rational> = trace_weights
        .iter()
        .map(|&r| Rational::from_integer(r.into()))
        .collect();
    cone.dual(&w)
}

/// A splitting `{1..ℓ} = I⁻ ∪ I⁺`, indices sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    pub minus: Vec<usize>,
    pub plus: Vec<usize>,
}

impl Partition {
    /// `+1/r(I⁺)` on `I⁺`, `−1/r(I⁻)` on `I⁻`.
    pub fn canonical_vector(&self, ranks: &[u32]) -> Vec<Rational> {
        let r_plus: u32 = self.plus.iter().map(|&i| ranks[i]).sum();
        let r_minus: u32 = self.minus.iter().map(|&i| ranks[i]).sum();
        let mut v = vec![Rational::zero(); ranks.len()];
        for &i in &self.plus {
            v[i] = Rational::new(1.into(), r_plus.into());
        }
        for &i in &self.minus {
            v[i] = Rational::new((-1).into(), r_minus.into());
        }
        v
    }
}

/// Returns the partition when `v` is two-valued and trace free with respect
/// to `ranks`, i.e. a positive multiple of a canonical partition vector.
pub fn partition_form(v: &[Rational], ranks: &[u32]) -> Option<Partition> {
    if v.len() != ranks.len() || v.iter().all(Zero::is_zero) {
        return None;
    }
    let trace: Rational = v
        .iter()
        .zip(ranks)
        .map(|(x, &r)| x * Rational::from_integer(r.into()))
        .sum();
    if !trace.is_zero() {
        return None;
    }
    let mut values: Vec<&Rational> = v.iter().collect();
    values.sort();
    values.dedup();
    if values.len() != 2 {
        return None;
    }
    let high = values[1];
    let plus: Vec<usize> = (0..v.len()).filter(|&i| &v[i] == high).collect();
    let minus: Vec<usize> = (0..v.len()).filter(|&i| &v[i] != high).collect();
    let partition = Partition { minus, plus };
    let canon = partition.canonical_vector(ranks);
    let scale = &v[partition.plus[0]] / &canon[partition.plus[0]];
    let matches = scale.is_positive()
        && v.iter().zip(&canon).all(|(x, c)| *x == &scale * c);
    matches.then_some(partition)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGenerator {
    pub vector: Vec<Rational>,
    pub partition: Option<Partition>,
}

impl DualGenerator {
    /// Whether `⟨m, v⟩ ≥ 0` for every weight of the bundle.
    pub fn pairs_nonnegatively(&self, gb: &GradedBundle) -> bool {
        weights(gb).iter().all(|m| !m.pair(&self.vector).is_negative())
    }
}

/// One partition vector per closed proper subset `I⁺`, with `I⁻` its
/// complement. Every extreme ray of `σ∨` is among these up to scaling.
pub fn candidate_dual_generators(gb: &GradedBundle) -> Vec<DualGenerator> {
    let ranks = gb.ranks();
    gb.invariant_subsets()
        .iter()
        .map(|s| {
            let plus = s.indices().to_vec();
            let minus: Vec<usize> = (0..gb.len()).filter(|i| !s.contains(*i)).collect();
            let partition = Partition { minus, plus };
            DualGenerator {
                vector: partition.canonical_vector(&ranks),
                partition: Some(partition),
            }
        })
        .collect()
}

/// Dual generators of the bundle's weight cone, with partitions attached
/// when they exist.
pub fn dual_generators(gb: &GradedBundle) -> Result<Vec<DualGenerator>> {
    let ranks = gb.ranks();
    let dual = dual_cone(&weight_cone(gb)?, &ranks)?;
    Ok(dual
        .rays()
        .iter()
        .map(|r| DualGenerator {
            vector: r.clone(),
            partition: partition_form(r, &ranks),
        })
        .collect())
}
