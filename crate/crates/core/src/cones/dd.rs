//! Double description method over the rationals.
//!
//! Computes a minimal generating set of `{x : Ex = 0, Ax ≥ 0}` as a basis of
//! its lineality space together with its extreme rays (modulo lineality).
//! Inequalities are inserted one at a time in lexicographic order; adjacency
//! of rays is decided combinatorially from their zero sets.

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DdResult {
    pub rays: Vec<Vec<Rational>>,
    pub lineality: Vec<Vec<Rational>>,
}

/// Basis of the null space of `rows` (each of length `dim`), via exact
/// reduced row echelon form.
pub fn null_space(dim: usize, rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..dim {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let lead = m[r][col].clone();
        for v in m[r].iter_mut() {
            *v /= &lead;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..dim).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); dim];
        v[free] = rational::int(1);
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[i][free].clone();
        }
        basis.push(rational::primitive_rational(&v));
    }
    basis
}

fn zero_set(ray: &[Rational], inserted: &[&Vec<Rational>]) -> Vec<bool> {
    inserted
        .iter()
        .map(|a| rational::dot(a, ray).is_zero())
        .collect()
}

fn subset_of(small: &[bool], big: &[bool]) -> bool {
    small.iter().zip(big).all(|(&s, &b)| !s || b)
}

pub fn extreme_rays(
    dim: usize,
    equalities: &[Vec<Rational>],
    inequalities: &[Vec<Rational>],
) -> DdResult {
    let mut lineality = null_space(dim, equalities);
    let mut rays: Vec<Vec<Rational>> = Vec::new();
    let mut order: Vec<&Vec<Rational>> = inequalities
        .iter()
        .filter(|a| a.iter().any(|x| !x.is_zero()))
        .collect();
    order.sort();
    order.dedup();
    let mut inserted: Vec<&Vec<Rational>> = Vec::new();

    for a in order {
        if let Some(pos) = lineality
            .iter()
            .position(|l| !rational::dot(a, l).is_zero())
        {
            // The new halfspace cuts a lineality direction: it becomes a ray
            // and everything else is projected onto the hyperplane a·x = 0.
            let mut l = lineality.remove(pos);
            let mut al = rational::dot(a, &l);
            if al.is_negative() {
                l = l.iter().map(|x| -x).collect();
                al = -al;
            }
            let project = |v: &Vec<Rational>| -> Vec<Rational> {
                let f = rational::dot(a, v) / &al;
                if f.is_zero() {
                    return v.clone();
                }
                let w: Vec<Rational> = v.iter().zip(&l).map(|(x, y)| x - &f * y).collect();
                rational::primitive_rational(&w)
            };
            lineality = lineality.iter().map(project).collect();
            rays = rays.iter().map(project).collect();
            rays.push(l);
        } else {
            let values: Vec<Rational> = rays.iter().map(|r| rational::dot(a, r)).collect();
            let zsets: Vec<Vec<bool>> = rays.iter().map(|r| zero_set(r, &inserted)).collect();
            let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
            let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
            let mut next: Vec<Vec<Rational>> = (0..rays.len())
                .filter(|&i| !values[i].is_negative())
                .map(|i| rays[i].clone())
                .collect();
            for &p in &pos {
                for &n in &neg {
                    let common: Vec<bool> =
                        zsets[p].iter().zip(&zsets[n]).map(|(x, y)| *x && *y).collect();
                    let adjacent = (0..rays.len())
                        .filter(|&r| r != p && r != n)
                        .all(|r| !subset_of(&common, &zsets[r]));
                    if !adjacent {
                        continue;
                    }
                    let w: Vec<Rational> = rays[n]
                        .iter()
                        .zip(&rays[p])
                        .map(|(xn, xp)| &values[p] * xn - &values[n] * xp)
                        .collect();
                    next.push(rational::primitive_rational(&w));
                }
            }
            rays = next;
        }
        inserted.push(a);
    }

    for r in rays.iter_mut() {
        *r = rational::primitive_rational(r);
    }
    rays.sort_by(|x, y| y.cmp(x));
    rays.dedup();
    DdResult { rays, lineality }
}
