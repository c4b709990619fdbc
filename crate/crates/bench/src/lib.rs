//! Inputs shared by the benchmarks.

use semistable_core::bundle::Piece;
use semistable_core::rational::int;
use semistable_core::{CohClass, GradedBundle, IntersectionForm};

/// Rank-one pieces of slope zero on a surface with the given quiver.
pub fn rank_one_quiver(n: usize, edges: &[(usize, usize)]) -> GradedBundle {
    GradedBundle::validated(
        IntersectionForm::diagonal_surface(&[1, -1]),
        CohClass::from_ints(&[1, 0]),
        (0..n)
            .map(|k| Piece::new(1, CohClass::new(vec![int(0), int(k as i64)])))
            .collect(),
        edges.iter().copied(),
    )
    .expect("valid quiver")
}

/// Every pair `i < j` on `n` vertices.
pub fn complete_quiver(n: usize) -> GradedBundle {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    rank_one_quiver(n, &edges)
}

/// Chain `1 → 2 → … → n` with first Chern classes `e_1 + (e_{k+1} − e_k)`
/// on a surface with form `diag(1, −1, …, −1)`, all of slope 1 at `e_1`.
pub fn chain(n: usize) -> GradedBundle {
    let p = n + 1;
    let mut diag = vec![-1i64; p];
    diag[0] = 1;
    let mut form = IntersectionForm::new(2, p).expect("surface form");
    for (k, d) in diag.iter().enumerate() {
        form.set(&[k, k], int(*d)).expect("diagonal entry");
    }
    let pieces = (0..n)
        .map(|k| {
            let mut c = vec![int(0); p];
            c[0] = int(1);
            c[k + 1] += int(1);
            if k > 0 {
                c[k] -= int(1);
            }
            Piece::new(1, CohClass::new(c))
        })
        .collect();
    let edges: Vec<(usize, usize)> = (1..n).map(|k| (k - 1, k)).collect();
    GradedBundle::validated(form, CohClass::basis(p, 0), pieces, edges).expect("valid chain")
}

/// A threefold with a dense intersection form, for polynomial expansion.
pub fn threefold(n_pieces: usize) -> GradedBundle {
    let p = 4;
    let mut form = IntersectionForm::new(3, p).expect("threefold form");
    for a in 0..p {
        for b in a..p {
            for c in b..p {
                form.set(&[a, b, c], int(((a + 2 * b + 3 * c) % 5) as i64 - 1)).expect("entry");
            }
        }
    }
    let omega = CohClass::basis(p, 0);
    let pieces: Vec<Piece> = (0..n_pieces)
        .map(|_| Piece::new(1, CohClass::basis(p, 0)))
        .collect();
    let edges: Vec<(usize, usize)> = (1..n_pieces).map(|k| (k - 1, k)).collect();
    GradedBundle::validated(form, omega, pieces, edges).expect("valid threefold bundle")
}
