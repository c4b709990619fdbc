#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use semistable_core::bundle::Piece;
use semistable_core::rational::{self, frac, int};
use semistable_core::{CohClass, GradedBundle, IntersectionForm, Rational};

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

/// Rank-one pieces of slope zero on a surface, with the given quiver.
pub fn rank_one(n: usize, edges: &[(usize, usize)]) -> GradedBundle {
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

pub fn random_quiver<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for j in 1..n {
        edges.push((rng.gen_range(0..j), j));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    edges.sort();
    edges.dedup();
    edges
}

/// Every connected quiver on `n` labelled vertices with edges `i < j`.
pub fn all_connected_quivers(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| pairs[k])
            .collect();
        if connected(n, &edges) {
            out.push(edges);
        }
    }
    out
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

pub fn small_rational<R: Rng>(rng: &mut R, max: i64, den: i64) -> Rational {
    frac(rng.gen_range(-max..=max), rng.gen_range(1..=den))
}

pub fn random_eps<R: Rng>(rng: &mut R, q: usize) -> Vec<Rational> {
    (0..q).map(|_| small_rational(rng, 6, 8)).collect()
}

/// A valid bundle: random form, polarisation, ranks and quiver, with first
/// Chern classes corrected along one class so all slopes agree at ω.
pub fn random_bundle<R: Rng>(rng: &mut R) -> GradedBundle {
    loop {
        let n = rng.gen_range(2..=3);
        let p = rng.gen_range(2..=3);
        let mut form = IntersectionForm::new(n, p).unwrap();
        let mut idx = vec![0usize; n];
        loop {
            if idx.windows(2).all(|w| w[0] <= w[1]) {
                form.set(&idx, int(rng.gen_range(-3..=3))).unwrap();
            }
            let mut pos = 0;
            while pos < n {
                idx[pos] += 1;
                if idx[pos] < p {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        let omega = CohClass::new((0..p).map(|_| int(rng.gen_range(0..=3))).collect());
        let Some(fix) = (0..p)
            .map(|k| CohClass::basis(p, k))
            .find(|u| !form.degree(u, &omega).unwrap().is_zero())
        else {
            continue;
        };
        let deg_fix = form.degree(&fix, &omega).unwrap();
        let mu = small_rational(rng, 3, 2);
        let len = rng.gen_range(2..=5);
        let pieces: Vec<Piece> = (0..len)
            .map(|_| {
                let rank = rng.gen_range(1..=3u32);
                let raw = CohClass::new((0..p).map(|_| int(rng.gen_range(-3..=3))).collect());
                let target = &mu * Rational::from_integer(rank.into());
                let lambda = (target - form.degree(&raw, &omega).unwrap()) / &deg_fix;
                Piece::new(rank, &raw + &fix.scale(&lambda))
            })
            .collect();
        let edges = random_quiver(rng, len);
        return GradedBundle::validated(form, omega, pieces, edges).unwrap();
    }
}

/// Extreme rays of `σ = cone{e_i − e_j}`: an edge is redundant exactly when
/// another directed path joins its endpoints.
pub fn extremal_edges_by_paths(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    edges
        .iter()
        .copied()
        .filter(|&(i, k)| {
            // reachability from i to k avoiding the direct edge
            let mut seen = vec![false; n];
            let mut stack = vec![i];
            while let Some(v) = stack.pop() {
                for &(a, b) in edges {
                    if a == v && (a, b) != (i, k) && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            !seen[k]
        })
        .collect()
}

/// Exact rank and one-dimensional kernel of a small rational matrix.
fn kernel(rows: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        if let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) {
            m.swap(r, p);
            let lead = m[r][c].clone();
            m[r].iter_mut().for_each(|v| *v /= &lead);
            let pr = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && !row[c].is_zero() {
                    let f = row[c].clone();
                    row.iter_mut().zip(&pr).for_each(|(v, x)| *v -= &f * x);
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    (0..dim)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); dim];
            v[free] = int(1);
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][free].clone();
            }
            v
        })
        .collect()
}

/// Extreme rays of `{v : ⟨trace, v⟩ = 0, ⟨g, v⟩ ≥ 0}` by enumerating every
/// choice of `d − 1` tight inequalities (with `d` the subspace dimension),
/// keeping one-dimensional feasible intersections. Primitive, sorted.
pub fn brute_force_dual_rays(
    generators: &[Vec<Rational>],
    trace: &[Rational],
) -> Vec<Vec<BigInt>> {
    let dim = trace.len();
    let d = dim - 1;
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let k = generators.len();
    let mut choose: Vec<usize> = (0..d.saturating_sub(1)).collect();
    if d == 0 {
        return out;
    }
    loop {
        if choose.len() <= k {
            let mut rows = vec![trace.to_vec()];
            rows.extend(choose.iter().map(|&c| generators[c].clone()));
            let ker = kernel(&rows, dim);
            if ker.len() == 1 {
                for sign in [1, -1] {
                    let v: Vec<Rational> = ker[0].iter().map(|x| x * int(sign)).collect();
                    if generators.iter().all(|g| !rational::dot(g, &v).is_negative()) {
                        out.push(rational::primitive(&v));
                    }
                }
            }
        }
        // next combination
        let m = choose.len();
        if m == 0 || m > k {
            break;
        }
        let mut i = m;
        loop {
            if i == 0 {
                out.sort_by(|a, b| b.cmp(a));
                out.dedup();
                return out;
            }
            i -= 1;
            if choose[i] < k - m + i {
                choose[i] += 1;
                for j in i + 1..m {
                    choose[j] = choose[j - 1] + 1;
                }
                break;
            }
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out.dedup();
    out
}

pub fn primitive_rays(rays: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    let mut v: Vec<Vec<BigInt>> = rays.iter().map(|r| rational::primitive(r)).collect();
    v.sort_by(|a, b| b.cmp(a));
    v
}
