//! The graded object `Gr(E) = ⊕ G_i`, the extension quiver recording which
//! extension components are nonzero, and the subsheaves `F_I = ⊕_{i∈I} G_i`
//! that are preserved by the extension data.
//!
//! Piece indices are 0-based; an edge `(i, j)` with `i < j` means the
//! extension of `G_j` by `G_i` is nontrivial.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::cohomology::{slope, CohClass, IntersectionForm};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub rank: u32,
    pub c1: CohClass,
}

impl Piece {
    pub fn new(rank: u32, c1: CohClass) -> Self {
        Piece { rank, c1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBundle {
    form: IntersectionForm,
    omega: CohClass,
    pieces: Vec<Piece>,
    edges: BTreeSet<(usize, usize)>,
    pert_basis: Vec<CohClass>,
}

/// A failed invariant of a [`GradedBundle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EdgeOrder { i: usize, j: usize },
    UnequalSlopes {
        first: usize,
        second: usize,
        first_degree: Rational,
        second_degree: Rational,
    },
    Disconnected { components: Vec<Vec<usize>> },
}

impl Violation {
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::EdgeOrder { .. } => "edge order",
            Violation::UnequalSlopes { .. } => "unequal slopes",
            Violation::Disconnected { .. } => "quiver disconnected",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeOrder { i, j } => {
                write!(f, "edge must satisfy i < j: got [{}, {}]", i + 1, j + 1)
            }
            Violation::UnequalSlopes {
                first,
                second,
                first_degree,
                second_degree,
            } => write!(
                f,
                "unequal slopes at omega: piece {} has degree {}, piece {} has degree {}",
                first + 1,
                rational::format(first_degree),
                second + 1,
                rational::format(second_degree)
            ),
            Violation::Disconnected { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| {
                        let ids: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
                        format!("{{{}}}", ids.join(","))
                    })
                    .collect();
                write!(f, "quiver disconnected: components {}", parts.join(" "))
            }
        }
    }
}

impl GradedBundle {
    /// Builds the bundle data, checking only shapes (class lengths, ranks,
    /// edge endpoints in range). Semantic invariants are reported by
    /// [`GradedBundle::validate`].
    pub fn new(
        form: IntersectionForm,
        omega: CohClass,
        pieces: Vec<Piece>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        form.check_class(&omega)?;
        if pieces.is_empty() {
            return Err(Error::InvalidBundle("no graded pieces".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            form.check_class(&p.c1)?;
            if p.rank == 0 {
                return Err(Error::InvalidBundle(format!("piece {} has rank 0", k + 1)));
            }
        }
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        for &(i, j) in &edges {
            if i >= pieces.len() || j >= pieces.len() {
                return Err(Error::InvalidBundle(format!(
                    "edge [{}, {}] out of range",
                    i + 1,
                    j + 1
                )));
            }
        }
        let p = form.h11_rank();
        Ok(GradedBundle {
            form,
            omega,
            pieces,
            edges,
            pert_basis: (0..p).map(|k| CohClass::basis(p, k)).collect(),
        })
    }

    /// Like [`GradedBundle::new`] but also rejects any invariant violation.
    pub fn validated(
        form: IntersectionForm,
        omega: CohClass,
        pieces: Vec<Piece>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let gb = Self::new(form, omega, pieces, edges)?;
        gb.ensure_valid()?;
        Ok(gb)
    }

    pub fn with_pert_basis(mut self, basis: Vec<CohClass>) -> Result<Self> {
        for b in &basis {
            self.form.check_class(b)?;
        }
        self.pert_basis = basis;
        Ok(self)
    }

    pub fn form(&self) -> &IntersectionForm {
        &self.form
    }

    pub fn omega(&self) -> &CohClass {
        &self.omega
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn ranks(&self) -> Vec<u32> {
        self.pieces.iter().map(|p| p.rank).collect()
    }

    pub fn pert_basis(&self) -> &[CohClass] {
        &self.pert_basis
    }

    /// Number of perturbation parameters `ε_k`.
    pub fn num_params(&self) -> usize {
        self.pert_basis.len()
    }

    pub fn total_rank(&self) -> u32 {
        self.pieces.iter().map(|p| p.rank).sum()
    }

    pub fn total_c1(&self) -> CohClass {
        let p = self.form.h11_rank();
        self.pieces
            .iter()
            .fold(CohClass::zero(p), |acc, piece| &acc + &piece.c1)
    }

    /// `ω_ε = ω + Σ_k ε_k α_k`.
    pub fn polarisation(&self, eps: &[Rational]) -> Result<CohClass> {
        if eps.len() != self.pert_basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pert_basis.len(),
                found: eps.len(),
            });
        }
        let mut l = self.omega.clone();
        for (e, a) in eps.iter().zip(&self.pert_basis) {
            if !e.is_zero() {
                l = &l + &a.scale(e);
            }
        }
        Ok(l)
    }

    pub fn piece_degree(&self, i: usize, polarisation: &CohClass) -> Result<Rational> {
        self.form.degree(&self.pieces[i].c1, polarisation)
    }

    /// `μ_L(E)`.
    pub fn slope(&self, polarisation: &CohClass) -> Result<Rational> {
        let deg = self.form.degree(&self.total_c1(), polarisation)?;
        Ok(slope(&deg, self.total_rank()))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for &(i, j) in &self.edges {
            if i >= j {
                out.push(Violation::EdgeOrder { i, j });
            }
        }
        let degrees: Vec<Rational> = (0..self.len())
            .map(|i| {
                self.piece_degree(i, &self.omega)
                    .expect("shapes checked at construction")
            })
            .collect();
        let slopes: Vec<Rational> = degrees
            .iter()
            .zip(&self.pieces)
            .map(|(d, p)| slope(d, p.rank))
            .collect();
        if let Some(k) = (1..self.len()).find(|&k| slopes[k] != slopes[0]) {
            out.push(Violation::UnequalSlopes {
                first: 0,
                second: k,
                first_degree: degrees[0].clone(),
                second_degree: degrees[k].clone(),
            });
        }
        let components = self.components();
        if components.len() > 1 {
            out.push(Violation::Disconnected { components });
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
            Err(Error::InvalidBundle(msgs.join("; ")))
        }
    }

    /// Connected components of the undirected quiver, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for &(i, j) in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            match root_of[r] {
                Some(c) => comps[c].push(v),
                None => {
                    root_of[r] = Some(comps.len());
                    comps.push(vec![v]);
                }
            }
        }
        comps
    }

    /// Whether `indices` is closed under the quiver: `j ∈ I` forces `i ∈ I`
    /// for every edge `(i, j)`.
    pub fn is_closed(&self, indices: &BTreeSet<usize>) -> bool {
        self.edges
            .iter()
            .all(|(i, j)| !indices.contains(j) || indices.contains(i))
    }

    /// A nonempty proper closed subset, with aggregated rank and `c1`.
    pub fn subset(&self, indices: impl IntoIterator<Item = usize>) -> Result<InvariantSubset> {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        if set.is_empty() || set.len() >= self.len() {
            return Err(Error::InvalidSubset(
                "subset must be nonempty and proper".into(),
            ));
        }
        if set.iter().any(|&i| i >= self.len()) {
            return Err(Error::InvalidSubset("index out of range".into()));
        }
        if !self.is_closed(&set) {
            return Err(Error::InvalidSubset(
                "subset is not closed under the extension quiver".into(),
            ));
        }
        Ok(self.aggregate(set))
    }

    fn aggregate(&self, set: BTreeSet<usize>) -> InvariantSubset {
        let p = self.form.h11_rank();
        let rank = set.iter().map(|&i| self.pieces[i].rank).sum();
        let c1 = set
            .iter()
            .fold(CohClass::zero(p), |acc, &i| &acc + &self.pieces[i].c1);
        InvariantSubset {
            indices: set.into_iter().collect(),
            rank,
            c1,
        }
    }

    /// All nonempty proper closed subsets, sorted by rank then index list.
    pub fn invariant_subsets(&self) -> Vec<InvariantSubset> {
        let n = self.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in &self.edges {
            preds[j].push(i);
        }
        // Depth-first over vertices in index order; since every edge points
        // from a smaller to a larger index, predecessors are decided first.
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut chosen = vec![false; n];
        fn walk(
            v: usize,
            preds: &[Vec<usize>],
            chosen: &mut Vec<bool>,
            found: &mut Vec<Vec<usize>>,
        ) {
            if v == chosen.len() {
                let set: Vec<usize> = (0..chosen.len()).filter(|&k| chosen[k]).collect();
                if !set.is_empty() && set.len() < chosen.len() {
                    found.push(set);
                }
                return;
            }
            walk(v + 1, preds, chosen, found);
            if preds[v].iter().all(|&i| chosen[i]) {
                chosen[v] = true;
                walk(v + 1, preds, chosen, found);
                chosen[v] = false;
            }
        }
        if self.edges.iter().all(|&(i, j)| i < j) {
            walk(0, &preds, &mut chosen, &mut found);
        } else {
            // Malformed quivers fall back to the direct filter.
            for mask in 1u64..(1u64 << n) - 1 {
                let set: BTreeSet<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
                if self.is_closed(&set) {
                    found.push(set.into_iter().collect());
                }
            }
        }
        let mut out: Vec<InvariantSubset> = found
            .into_iter()
            .map(|s| self.aggregate(s.into_iter().collect()))
            .collect();
        out.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.indices.cmp(&b.indices)));
        out
    }

    /// `μ_L(F_I)`.
    pub fn subsheaf_slope(&self, subset: &InvariantSubset, polarisation: &CohClass) -> Result<Rational> {
        let deg = self.form.degree(&subset.c1, polarisation)?;
        Ok(slope(&deg, subset.rank))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantSubset {
    indices: Vec<usize>,
    rank: u32,
    c1: CohClass,
}

impl InvariantSubset {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn c1(&self) -> &CohClass {
        &self.c1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// 1-based label such as `{1,2}`.
    pub fn label(&self) -> String {
        let ids: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rational::int;

    /// Two line bundles on a surface with `diag(1, -1)` intersection form.
    pub fn e1() -> GradedBundle {
        GradedBundle::validated(
            IntersectionForm::diagonal_surface(&[1, -1]),
            CohClass::from_ints(&[1, 0]),
            vec![
                Piece::new(1, CohClass::from_ints(&[1, 1])),
                Piece::new(1, CohClass::from_ints(&[1, -1])),
            ],
            [(0, 1)],
        )
        .unwrap()
    }

    /// Three line bundles on a surface with `diag(1, -1, -1)`, chain quiver.
    pub fn e5() -> GradedBundle {
        GradedBundle::validated(
            IntersectionForm::diagonal_surface(&[1, -1, -1]),
            CohClass::from_ints(&[1, 0, 0]),
            vec![
                Piece::new(1, CohClass::from_ints(&[1, 1, 0])),
                Piece::new(1, CohClass::from_ints(&[1, -1, 1])),
                Piece::new(1, CohClass::from_ints(&[1, 0, -1])),
            ],
            [(0, 1), (1, 2)],
        )
        .unwrap()
    }

    /// Three rank-one pieces of slope zero with prescribed quiver.
    pub fn rank_one_quiver(n: usize, edges: &[(usize, usize)]) -> GradedBundle {
        GradedBundle::validated(
            IntersectionForm::diagonal_surface(&[1, -1]),
            CohClass::from_ints(&[1, 0]),
            (0..n)
                .map(|k| Piece::new(1, CohClass::new(vec![int(0), int(k as i64)])))
                .collect(),
            edges.iter().copied(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{frac, int};

    fn sets(gb: &GradedBundle) -> Vec<Vec<usize>> {
        gb.invariant_subsets()
            .iter()
            .map(|s| s.indices().to_vec())
            .collect()
    }

    #[test]
    fn validate_accepts_e1() {
        assert!(e1().validate().is_empty());
    }

    #[test]
    fn validate_reports_unequal_slopes() {
        let gb = GradedBundle::new(
            IntersectionForm::diagonal_surface(&[1, -1]),
            CohClass::from_ints(&[2, 1]),
            e1().pieces().to_vec(),
            [(0, 1)],
        )
        .unwrap();
        let v = gb.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant(), "unequal slopes");
        assert_eq!(
            v[0],
            Violation::UnequalSlopes {
                first: 0,
                second: 1,
                first_degree: int(1),
                second_degree: int(3)
            }
        );
    }

    #[test]
    fn validate_reports_disconnected_and_edge_order() {
        let pieces = e1().pieces().to_vec();
        let form = IntersectionForm::diagonal_surface(&[1, -1]);
        let omega = CohClass::from_ints(&[1, 0]);
        let gb = GradedBundle::new(form.clone(), omega.clone(), pieces.clone(), []).unwrap();
        let v = gb.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant(), "quiver disconnected");
        let gb = GradedBundle::new(form, omega, pieces, [(1, 0)]).unwrap();
        assert_eq!(gb.validate()[0], Violation::EdgeOrder { i: 1, j: 0 });
        assert!(gb.validate()[0].to_string().contains("i < j"));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        let form = IntersectionForm::diagonal_surface(&[1, -1]);
        let omega = CohClass::from_ints(&[1, 0]);
        assert!(GradedBundle::new(form.clone(), omega.clone(), vec![], []).is_err());
        assert!(GradedBundle::new(
            form.clone(),
            omega.clone(),
            vec![Piece::new(0, CohClass::zero(2))],
            []
        )
        .is_err());
        assert!(GradedBundle::new(
            form,
            omega,
            vec![Piece::new(1, CohClass::zero(2))],
            [(0, 3)]
        )
        .is_err());
    }

    #[test]
    fn invariant_subset_examples() {
        assert_eq!(sets(&e1()), vec![vec![0]]);
        assert_eq!(sets(&rank_one_quiver(3, &[(0, 1), (1, 2)])), vec![vec![0], vec![0, 1]]);
        assert_eq!(
            sets(&rank_one_quiver(3, &[(0, 1), (0, 2), (1, 2)])),
            vec![vec![0], vec![0, 1]]
        );
        let star = rank_one_quiver(3, &[(0, 1), (0, 2)]);
        assert_eq!(sets(&star), vec![vec![0], vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn invariant_subsets_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(2..=12);
            let mut edges = Vec::new();
            for j in 1..n {
                edges.push((rng.gen_range(0..j), j));
            }
            for _ in 0..rng.gen_range(0..n) {
                let i = rng.gen_range(0..n - 1);
                let j = rng.gen_range(i + 1..n);
                edges.push((i, j));
            }
            let gb = rank_one_quiver(n, &edges);
            let mut brute: Vec<Vec<usize>> = Vec::new();
            for mask in 1u32..(1 << n) - 1 {
                let s: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
                let closed = gb
                    .edges()
                    .iter()
                    .all(|(i, j)| !s.contains(j) || s.contains(i));
                if closed {
                    brute.push(s);
                }
            }
            brute.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            let got = sets(&gb);
            assert_eq!(got, brute);
            let full: BTreeSet<usize> = (0..n).collect();
            assert!(gb.is_closed(&full));
        }
    }

    #[test]
    fn subsheaf_slope_examples() {
        let gb = e1();
        let i = gb.subset([0]).unwrap();
        let l = CohClass::new(vec![int(1), frac(1, 2)]);
        assert_eq!(gb.subsheaf_slope(&i, &l).unwrap(), frac(1, 2));
        assert_eq!(
            gb.subsheaf_slope(&i, gb.omega()).unwrap(),
            gb.slope(gb.omega()).unwrap()
        );
        assert!(gb.subset([0, 1]).is_err());
        assert!(gb.subset([1]).is_err());
        assert!(gb.subset(Vec::<usize>::new()).is_err());
    }

    #[test]
    fn polarisation_adds_basis_directions() {
        let gb = e5();
        let l = gb.polarisation(&[int(0), frac(1, 2), int(3)]).unwrap();
        assert_eq!(l, CohClass::new(vec![int(1), frac(1, 2), int(3)]));
        assert!(gb.polarisation(&[int(0)]).is_err());
    }
}
