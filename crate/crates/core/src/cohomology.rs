//! Intersection numbers of (1,1)-classes on a compact Kähler manifold.
//!
//! Classes are coordinate vectors in a fixed basis `α_1, …, α_p` of
//! `H^{1,1}`; the intersection form is the symmetric `n`-linear tensor of the
//! products `α_{i_1} ⋯ α_{i_n}`, stored once per sorted multi-index.
//! Basis indices are 0-based throughout the library.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CohClass(pub Vec<Rational>);

impl CohClass {
    pub fn new(coefficients: Vec<Rational>) -> Self {
        CohClass(coefficients)
    }

    pub fn zero(p: usize) -> Self {
        CohClass(vec![Rational::zero(); p])
    }

    /// The `k`-th basis class.
    pub fn basis(p: usize, k: usize) -> Self {
        let mut v = vec![Rational::zero(); p];
        v[k] = rational::int(1);
        CohClass(v)
    }

    pub fn from_ints(v: &[i64]) -> Self {
        CohClass(rational::from_ints(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.0
    }

    pub fn scale(&self, s: &Rational) -> CohClass {
        CohClass(self.0.iter().map(|c| c * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl Add for &CohClass {
    type Output = CohClass;
    fn add(self, rhs: &CohClass) -> CohClass {
        CohClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CohClass {
    type Output = CohClass;
    fn sub(self, rhs: &CohClass) -> CohClass {
        CohClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CohClass {
    type Output = CohClass;
    fn neg(self) -> CohClass {
        CohClass(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&CohClass> for &Rational {
    type Output = CohClass;
    fn mul(self, rhs: &CohClass) -> CohClass {
        rhs.scale(self)
    }
}

/// Symmetric `n`-linear form on a rank-`p` lattice. Missing entries are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionForm {
    dimension: usize,
    h11_rank: usize,
    entries: BTreeMap<Vec<usize>, Rational>,
}

impl IntersectionForm {
    pub fn new(dimension: usize, h11_rank: usize) -> Result<Self> {
        if dimension == 0 || h11_rank == 0 {
            return Err(Error::Precondition(
                "dimension and h11 rank must be positive".into(),
            ));
        }
        Ok(IntersectionForm {
            dimension,
            h11_rank,
            entries: BTreeMap::new(),
        })
    }

    /// Sets the value of the product of the classes named by `index`, which
    /// may be given in any order. Zero values are not stored.
    pub fn set(&mut self, index: &[usize], value: Rational) -> Result<()> {
        if index.len() != self.dimension || index.iter().any(|&i| i >= self.h11_rank) {
            return Err(Error::InvalidIndex(index.to_vec()));
        }
        let mut key = index.to_vec();
        key.sort_unstable();
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    pub fn with(mut self, index: &[usize], value: Rational) -> Result<Self> {
        self.set(index, value)?;
        Ok(self)
    }

    /// Diagonal quadratic form on a surface (`n = 2`), handy for examples.
    pub fn diagonal_surface(diag: &[i64]) -> Self {
        let mut form = IntersectionForm::new(2, diag.len()).expect("nonempty diagonal");
        for (i, &d) in diag.iter().enumerate() {
            form.set(&[i, i], rational::int(d)).expect("in range");
        }
        form
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn h11_rank(&self) -> usize {
        self.h11_rank
    }

    pub fn entry(&self, index: &[usize]) -> Rational {
        let mut key = index.to_vec();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero entries keyed by sorted multi-index.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.entries.iter()
    }

    pub fn check_class(&self, c: &CohClass) -> Result<()> {
        if c.len() != self.h11_rank {
            return Err(Error::DimensionMismatch {
                expected: self.h11_rank,
                found: c.len(),
            });
        }
        Ok(())
    }

    /// Full multilinear expansion of the product of `classes`.
    pub fn evaluate(&self, classes: &[&CohClass]) -> Result<Rational> {
        if classes.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: classes.len(),
            });
        }
        for c in classes {
            self.check_class(c)?;
        }
        // Each stored entry contributes value * Σ over distinct orderings of
        // its multi-index of Π_k classes[k][index[k]].
        let mut total = Rational::zero();
        let mut perm = Vec::with_capacity(self.dimension);
        for (index, value) in &self.entries {
            let mut used = vec![false; index.len()];
            perm.clear();
            let s = orderings_sum(index, classes, &mut used, &mut perm);
            if !s.is_zero() {
                total += value * s;
            }
        }
        Ok(total)
    }

    /// `c1 · L^{n-1}`.
    pub fn degree(&self, c1: &CohClass, polarisation: &CohClass) -> Result<Rational> {
        let mut args: Vec<&CohClass> = Vec::with_capacity(self.dimension);
        args.push(c1);
        args.extend(std::iter::repeat_n(polarisation, self.dimension - 1));
        self.evaluate(&args)
    }

    /// `L^n`, the volume up to the factor `1/n!`.
    pub fn volume(&self, polarisation: &CohClass) -> Result<Rational> {
        let args = vec![polarisation; self.dimension];
        self.evaluate(&args)
    }

    /// Weak sanity check for a candidate Kähler class.
    pub fn has_positive_volume(&self, polarisation: &CohClass) -> Result<bool> {
        Ok(self.volume(polarisation)?.is_positive())
    }
}

/// Sum over the distinct orderings of the sorted multi-index `index` of the
/// products `Π_k classes[k][ordering[k]]`.
fn orderings_sum(
    index: &[usize],
    classes: &[&CohClass],
    used: &mut [bool],
    perm: &mut Vec<usize>,
) -> Rational {
    let k = perm.len();
    if k == index.len() {
        return Rational::from_integer(1.into());
    }
    let mut acc = Rational::zero();
    let mut last: Option<usize> = None;
    for slot in 0..index.len() {
        if used[slot] || last == Some(index[slot]) {
            continue;
        }
        last = Some(index[slot]);
        let coeff = &classes[k].0[index[slot]];
        if coeff.is_zero() {
            continue;
        }
        used[slot] = true;
        perm.push(index[slot]);
        let rest = orderings_sum(index, classes, used, perm);
        perm.pop();
        used[slot] = false;
        if !rest.is_zero() {
            acc += coeff * rest;
        }
    }
    acc
}

/// `deg / rank`.
pub fn slope(degree: &Rational, rank: u32) -> Rational {
    assert!(rank >= 1, "rank must be positive");
    degree / Rational::from_integer(rank.into())
}
