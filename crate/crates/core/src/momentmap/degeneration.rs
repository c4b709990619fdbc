use super::PathSample;
use crate::bundle::GradedBundle;
use crate::chambers::{classify, Label};
use crate::cohomology::{slope, CohClass};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A graded piece `F_k / F_{k−1}` of the limit object at the wall.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitPiece {
    pub indices: Vec<usize>,
    pub rank: u32,
    pub c1: CohClass,
    pub wall_slope: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegenerationReport {
    pub wall_eps: Vec<Rational>,
    /// `I_1 ⊂ … ⊂ I_l = {0..ℓ}`; the empty set below `I_1` is implicit.
    pub filtration: Vec<Vec<usize>>,
    pub surviving_edges: Vec<(usize, usize)>,
    pub dying_edges: Vec<(usize, usize)>,
    pub pieces: Vec<LimitPiece>,
    /// Levels (indices into `filtration`) chosen among several subsets of
    /// the same maximal rank.
    pub ties: Vec<usize>,
}

impl DegenerationReport {
    /// Filtration level of piece `i`.
    pub fn level(&self, i: usize) -> usize {
        self.filtration
            .iter()
            .position(|s| s.contains(&i))
            .expect("top level contains every piece")
    }
}

/// Chain of equal-slope closed subsets at a wall, built from the top: each
/// step takes the closed subset of maximal rank strictly inside the previous
/// one whose slope at the wall equals that of `E`, ties going to the
/// lexicographically smallest index set.
pub fn degeneration_filtration(gb: &GradedBundle, wall_eps: &[Rational]) -> Result<DegenerationReport> {
    let label = classify(gb, wall_eps)?;
    if label.label != Label::StrictlySemistable {
        return Err(Error::Precondition(format!(
            "degeneration needs a strictly semistable class, got {}",
            label.label
        )));
    }
    let l = gb.polarisation(wall_eps)?;
    let mu_e = gb.slope(&l)?;
    let mut equal: Vec<_> = Vec::new();
    for s in gb.invariant_subsets() {
        if gb.subsheaf_slope(&s, &l)? == mu_e {
            equal.push(s);
        }
    }
    let mut chain: Vec<Vec<usize>> = vec![(0..gb.len()).collect()];
    let mut tie_flags: Vec<bool> = vec![false];
    loop {
        let current = chain.last().expect("nonempty chain");
        let inside: Vec<_> = equal
            .iter()
            .filter(|s| s.indices().len() < current.len())
            .filter(|s| s.indices().iter().all(|i| current.contains(i)))
            .collect();
        let Some(max_rank) = inside.iter().map(|s| s.rank()).max() else {
            break;
        };
        // invariant_subsets is sorted by rank then indices, so the first hit
        // is the lexicographically smallest.
        let best: Vec<_> = inside.iter().filter(|s| s.rank() == max_rank).collect();
        chain.push(best[0].indices().to_vec());
        tie_flags.push(best.len() > 1);
    }
    chain.reverse();
    tie_flags.reverse();
    let ties: Vec<usize> = tie_flags
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(k, _)| k)
        .collect();

    let p = gb.form().h11_rank();
    let mut pieces = Vec::with_capacity(chain.len());
    let mut below: Vec<usize> = Vec::new();
    for level in &chain {
        let indices: Vec<usize> = level.iter().copied().filter(|i| !below.contains(i)).collect();
        let rank: u32 = indices.iter().map(|&i| gb.pieces()[i].rank).sum();
        let c1 = indices
            .iter()
            .fold(CohClass::zero(p), |acc, &i| &acc + &gb.pieces()[i].c1);
        let deg = gb.form().degree(&c1, &l)?;
        pieces.push(LimitPiece {
            indices,
            rank,
            c1,
            wall_slope: slope(&deg, rank),
        });
        below = level.clone();
    }

    let mut report = DegenerationReport {
        wall_eps: wall_eps.to_vec(),
        filtration: chain,
        surviving_edges: Vec::new(),
        dying_edges: Vec::new(),
        pieces,
        ties,
    };
    for &(i, j) in gb.edges() {
        if report.level(i) == report.level(j) {
            report.surviving_edges.push((i, j));
        } else {
            report.dying_edges.push((i, j));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportVerdict {
    pub confirmed: bool,
    pub mismatches: Vec<String>,
    /// Edge magnitudes at the last sample.
    pub final_values: Vec<((usize, usize), f64)>,
}

const TAIL: usize = 3;

/// Checks that along the path the magnitudes of dying edges decrease
/// monotonically to below `threshold` over the last samples, while those of
/// surviving edges stay at or above `threshold`.
pub fn limit_support_check(
    samples: &[PathSample],
    report: &DegenerationReport,
    threshold: f64,
) -> SupportVerdict {
    let mut mismatches = Vec::new();
    if samples.is_empty() {
        mismatches.push("empty path".to_string());
        return SupportVerdict {
            confirmed: false,
            mismatches,
            final_values: Vec::new(),
        };
    }
    for s in samples.iter().filter(|s| !s.solution.is_solved()) {
        mismatches.push(format!(
            "sample t = {} not solved ({})",
            crate::rational::format(&s.t),
            s.solution.status
        ));
    }
    let tail = &samples[samples.len().saturating_sub(TAIL)..];
    let series = |edge: (usize, usize)| -> Vec<f64> {
        tail.iter()
            .map(|s| s.solution.edge_value(edge).unwrap_or(f64::NAN))
            .collect()
    };
    let name = |(i, j): (usize, usize)| format!("({},{})", i + 1, j + 1);
    for &e in &report.dying_edges {
        let v = series(e);
        let last = *v.last().expect("nonempty tail");
        let monotone = v.windows(2).all(|w| w[1] <= w[0]);
        if !monotone {
            mismatches.push(format!("dying edge {} is not decreasing: {v:?}", name(e)));
        }
        if !(last < threshold) {
            mismatches.push(format!(
                "dying edge {} ends at {last:e}, not below {threshold:e}",
                name(e)
            ));
        }
    }
    for &e in &report.surviving_edges {
        let v = series(e);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= threshold) {
            mismatches.push(format!(
                "surviving edge {} drops to {min:e}, below {threshold:e}",
                name(e)
            ));
        }
    }
    let last = &samples[samples.len() - 1].solution;
    let final_values = last.edges.iter().copied().zip(last.t.iter().copied()).collect();
    SupportVerdict {
        confirmed: mismatches.is_empty(),
        mismatches,
        final_values,
    }
}
