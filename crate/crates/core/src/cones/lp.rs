//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `max cᵀx` subject to `Ax = b`, `x ≥ 0`. Sizes here are tiny (a few
//! dozen columns), so the tableau is recomputed naively.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Rational>, value: Rational },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Runs the simplex on `objective` restricted to columns `< allowed`.
    /// Returns false if unbounded.
    fn optimize(&mut self, objective: &[Rational], allowed: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = objective[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() && !objective[b].is_zero() {
                        d -= &objective[b] * &self.rows[i][j];
                    }
                }
                if d.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }

    fn value(&self, objective: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &objective[b] * self.rhs(i))
            .sum()
    }
}

pub fn maximize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<Rational> = Vec::with_capacity(width + 1);
        for v in row {
            r.push(if flip { -v } else { v.clone() });
        }
        for k in 0..m {
            r.push(if k == i { Rational::from_integer(1.into()) } else { Rational::zero() });
        }
        r.push(if flip { -bi } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
    };
    let mut phase1 = vec![Rational::zero(); width];
    for v in phase1.iter_mut().skip(n) {
        *v = Rational::from_integer((-1).into());
    }
    t.optimize(&phase1, width);
    if t.value(&phase1).is_negative() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut phase2 = c.to_vec();
    phase2.resize(width, Rational::zero());
    if !t.optimize(&phase2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = t.rhs(i).clone();
        }
    }
    let value = crate::rational::dot(c, &x);
    LpOutcome::Optimal { x, value }
}

/// Whether `target` is a nonnegative combination of `generators`.
pub fn in_cone(generators: &[Vec<Rational>], target: &[Rational]) -> bool {
    let dim = target.len();
    let a: Vec<Vec<Rational>> = (0..dim)
        .map(|i| generators.iter().map(|g| g[i].clone()).collect())
        .collect();
    let c = vec![Rational::zero(); generators.len()];
    !matches!(maximize(&a, target, &c), LpOutcome::Infeasible)
}

/// Whether `target = Σ t_g g` has a solution with every `t_g ≥ δ` for some
/// `δ > 0`, i.e. `target` lies in the relative interior of the cone.
pub fn strictly_positive_combination(generators: &[Vec<Rational>], target: &[Rational]) -> bool {
    if generators.is_empty() {
        return false;
    }
    let dim = target.len();
    let k = generators.len();
    // Variables: s_g (k of them), δ, slack u. t_g = s_g + δ, δ + u = 1.
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(dim + 1);
    for i in 0..dim {
        let mut row: Vec<Rational> = generators.iter().map(|g| g[i].clone()).collect();
        row.push(generators.iter().map(|g| &g[i]).sum());
        row.push(Rational::zero());
        a.push(row);
    }
    let mut cap = vec![Rational::zero(); k];
    cap.push(Rational::from_integer(1.into()));
    cap.push(Rational::from_integer(1.into()));
    a.push(cap);
    let mut b = target.to_vec();
    b.push(Rational::from_integer(1.into()));
    let mut c = vec![Rational::zero(); k + 2];
    c[k] = Rational::from_integer(1.into());
    match maximize(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => value.is_positive(),
        _ => false,
    }
}

/// Whether the cone generated by `generators` contains no line.
pub fn is_pointed(generators: &[Vec<Rational>]) -> bool {
    if generators.is_empty() {
        return true;
    }
    let dim = generators[0].len();
    let k = generators.len();
    // max Σλ subject to Σ λ_g g = 0, Σλ + u = 1.
    let mut a: Vec<Vec<Rational>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Rational> = generators.iter().map(|g| g[i].clone()).collect();
            row.push(Rational::zero());
            row
        })
        .collect();
    a.push(vec![Rational::from_integer(1.into()); k + 1]);
    let mut b = vec![Rational::zero(); dim];
    b.push(Rational::from_integer(1.into()));
    let mut c = vec![Rational::from_integer(1.into()); k];
    c.push(Rational::zero());
    match maximize(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => value.is_zero(),
        _ => true,
    }
}
