//! Acceptance suite. Runs every criterion and prints one line per criterion.
//!
//! `cargo test -p semistable-core --test acceptance` runs all of them;
//! pass criterion numbers after `--` to run a subset, e.g. `-- 5 6`.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semistable_core::chambers::{classify, sample_ball, stability_radius};
use semistable_core::cones::lp::strictly_positive_combination;
use semistable_core::cones::{
    candidate_dual_generators, dual_cone, partition_form, weight_cone, weights, Partition,
};
use semistable_core::momentmap::{
    degeneration_filtration, limit_support_check, log_spaced, loglog_fit, moment_origin,
    solve_path, KempfNessFunctional, PathSample,
};
use semistable_core::rational::{self, frac, int};
use semistable_core::{
    GradedBundle, KempfNess, Label, Membership, OrbitModel, Rational, SamplePlane, SolveStatus,
};

use common::*;

type Outcome = Result<String, String>;

const MAGNITUDES: [f64; 3] = [1e-3, 1.0, 1e3];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sign(x: &Rational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn random_quiver_bundle(rng: &mut ChaCha8Rng, max_len: usize) -> GradedBundle {
    let n = rng.gen_range(2..=max_len);
    rank_one(n, &random_quiver(rng, n))
}

fn duality_involution() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut max_rays = 0;
    for case in 0..100 {
        let gb = random_quiver_bundle(&mut rng, 6);
        let ones = vec![1u32; gb.len()];
        let sigma = weight_cone(&gb).map_err(err)?;
        let dual = dual_cone(&sigma, &gb.ranks()).map_err(err)?;
        let bidual = dual_cone(&dual, &ones).map_err(err)?;
        let lhs = primitive_rays(bidual.rays());
        let rhs = primitive_rays(sigma.rays());
        ensure(lhs == rhs, || {
            format!("case {case} edges {:?}: {lhs:?} != {rhs:?}", gb.edges())
        })?;
        // independent oracles for both cones
        let n = gb.len();
        let edges: Vec<(usize, usize)> = gb.edges().iter().copied().collect();
        let mut by_paths: Vec<Vec<Rational>> = extremal_edges_by_paths(n, &edges)
            .into_iter()
            .map(|e| semistable_core::Weight::new(n, e).to_rational())
            .collect();
        by_paths.sort();
        ensure(primitive_rays(&by_paths) == rhs, || {
            format!("case {case}: weight cone rays disagree with path oracle")
        })?;
        let gens: Vec<Vec<Rational>> = weights(&gb).iter().map(|w| w.to_rational()).collect();
        let brute = brute_force_dual_rays(&gens, &vec![int(1); n]);
        ensure(brute == primitive_rays(dual.rays()), || {
            format!("case {case}: dual rays disagree with facet enumeration")
        })?;
        max_rays = max_rays.max(dual.rays().len());
    }
    Ok(format!("100 quivers, up to {max_rays} dual rays"))
}

fn check_partition_structure(gb: &GradedBundle) -> Result<(), String> {
    let sigma = weight_cone(gb).map_err(err)?;
    let dual = dual_cone(&sigma, &gb.ranks()).map_err(err)?;
    let ranks = gb.ranks();
    let candidates: BTreeSet<Vec<num_bigint::BigInt>> = candidate_dual_generators(gb)
        .iter()
        .map(|c| rational::primitive(&c.vector))
        .collect();
    for ray in dual.rays() {
        let Some(Partition { plus, .. }) = partition_form(ray, &ranks) else {
            return Err(format!("edges {:?}: ray {ray:?} not a partition vector", gb.edges()));
        };
        let closed: BTreeSet<usize> = plus.iter().copied().collect();
        ensure(gb.is_closed(&closed), || {
            format!("edges {:?}: I+ = {plus:?} not closed", gb.edges())
        })?;
        ensure(candidates.contains(&rational::primitive(ray)), || {
            format!("edges {:?}: ray {ray:?} not a candidate", gb.edges())
        })?;
    }
    Ok(())
}

fn partition_structure() -> Outcome {
    let mut count = 0;
    for n in 2..=4 {
        for edges in all_connected_quivers(n) {
            check_partition_structure(&rank_one(n, &edges))?;
            count += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 5..=6 {
        for _ in 0..50 {
            check_partition_structure(&rank_one(n, &random_quiver(&mut rng, n)))?;
            count += 1;
        }
    }
    Ok(format!("{count} quivers"))
}

/// E1, E5 and 50 random valid configurations, 20 random ε each.
fn sample_configs() -> Vec<(GradedBundle, Vec<Vec<Rational>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bundles = vec![e1(), e5()];
    bundles.extend((0..50).map(|_| random_bundle(&mut rng)));
    bundles
        .into_iter()
        .map(|gb| {
            let q = gb.num_params();
            let eps = (0..20).map(|_| random_eps(&mut rng, q)).collect();
            (gb, eps)
        })
        .collect()
}

fn sign_equivalence() -> Outcome {
    let mut checked = 0;
    for (case, (gb, samples)) in sample_configs().iter().enumerate() {
        let ranks = gb.ranks();
        let candidates = candidate_dual_generators(gb);
        for eps in samples {
            let w = moment_origin(gb, eps).map_err(err)?;
            let l = gb.polarisation(eps).map_err(err)?;
            let mu = gb.slope(&l).map_err(err)?;
            for cand in &candidates {
                let part = cand.partition.as_ref().ok_or("candidate without partition")?;
                let plus = gb.subset(part.plus.iter().copied()).map_err(err)?;
                let diff = gb.subsheaf_slope(&plus, &l).map_err(err)? - &mu;
                let pairing = w.pair(&cand.vector);
                let r_plus = Rational::from_integer(part.plus.iter().map(|&i| ranks[i]).sum::<u32>().into());
                let r_minus = Rational::from_integer(part.minus.iter().map(|&i| ranks[i]).sum::<u32>().into());
                let s_plus: Rational = part.plus.iter().map(|&i| w.w[i].clone()).sum::<Rational>() / r_plus;
                let s_minus: Rational = part.minus.iter().map(|&i| w.w[i].clone()).sum::<Rational>() / r_minus;
                ensure(sign(&pairing) == sign(&diff), || {
                    format!("case {case} eps {eps:?} I+ {:?}: pairing {pairing} vs slope gap {diff}", part.plus)
                })?;
                ensure(sign(&(s_plus - s_minus)) == sign(&diff), || {
                    format!("case {case}: averaged weights disagree for I+ {:?}", part.plus)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} sign comparisons"))
}

/// Statuses per sample, in order, for one magnitude.
fn existence_interior(magnitude: f64) -> Result<Vec<SolveStatus>, String> {
    let solver = KempfNess::default();
    let mut statuses = Vec::new();
    for (case, (gb, samples)) in sample_configs().iter().enumerate() {
        let orbit = OrbitModel::uniform(gb, magnitude).map_err(err)?;
        let sigma = orbit.cone();
        let gens: Vec<Vec<Rational>> = weights(gb).iter().map(|w| w.to_rational()).collect();
        for eps in samples {
            let origin = moment_origin(gb, eps).map_err(err)?;
            let target = origin.negated();
            let membership = sigma.membership(&target).map_err(err)?;
            let sol = solver.solve(&orbit, &origin).map_err(err)?;
            let solved = sol.status == SolveStatus::Solved
                && sol.residual <= 1e-10
                && sol.t.iter().all(|&t| t > 0.0);
            let interior = membership == Membership::Interior;
            ensure(solved == interior, || {
                format!(
                    "case {case} eps {eps:?}: {} with residual {:e} but membership {membership}",
                    sol.status, sol.residual
                )
            })?;
            let farkas = !origin.is_zero() && strictly_positive_combination(&gens, &target);
            ensure(farkas == interior, || {
                format!("case {case} eps {eps:?}: LP says {farkas}, membership {membership}")
            })?;
            let label = classify(gb, eps).map_err(err)?;
            match label.label {
                Label::Stable => ensure(interior, || {
                    format!("case {case} eps {eps:?}: stable but {membership}")
                })?,
                Label::Unstable => {
                    ensure(membership == Membership::Outside, || {
                        format!("case {case} eps {eps:?}: unstable but {membership}")
                    })?;
                    let witness = &label.witnesses[0];
                    let plus = witness.indices().to_vec();
                    let minus = (0..gb.len()).filter(|i| !witness.contains(*i)).collect();
                    let v = Partition { minus, plus }.canonical_vector(&gb.ranks());
                    let dual_ok = weights(gb).iter().all(|m| !m.pair(&v).is_negative());
                    let separates = rational::dot(&target, &v).is_negative();
                    ensure(dual_ok && separates, || {
                        format!("case {case} eps {eps:?}: witness {} does not separate", witness.label())
                    })?;
                }
                Label::StrictlySemistable => {}
            }
            statuses.push(sol.status);
        }
    }
    Ok(statuses)
}

fn existence_criterion() -> Outcome {
    let statuses = existence_interior(1.0)?;
    let solved = statuses.iter().filter(|s| **s == SolveStatus::Solved).count();
    Ok(format!("{} samples, {solved} solved", statuses.len()))
}

struct PathRun {
    samples: Vec<PathSample>,
    slope: f64,
    constant: f64,
}

fn convergence_path(gb: &GradedBundle, path: &dyn Fn(&Rational) -> Vec<Rational>, magnitude: f64) -> Result<PathRun, String> {
    let orbit = OrbitModel::uniform(gb, magnitude).map_err(err)?;
    let ts = log_spaced(1e-1, 1e-4, 13);
    let samples = solve_path(gb, &orbit, path, &ts, &KempfNess::default()).map_err(err)?;
    for s in &samples {
        ensure(s.solution.is_solved() && s.solution.residual <= 1e-10, || {
            format!("t = {}: {} residual {:e}", rational::format(&s.t), s.solution.status, s.solution.residual)
        })?;
    }
    let tf: Vec<f64> = ts.iter().map(rational::to_f64).collect();
    let ys: Vec<f64> = samples.iter().map(PathSample::total).collect();
    let (slope, constant) = loglog_fit(&tf, &ys).map_err(err)?;
    ensure((0.9..=1.1).contains(&slope), || format!("fitted slope {slope}"))?;
    let last = *ys.last().unwrap();
    ensure(last <= 2e-4 * constant, || format!("final sum {last:e} vs C = {constant}"))?;
    Ok(PathRun { samples, slope, constant })
}

fn convergence(magnitude: f64) -> Result<Vec<PathRun>, String> {
    let e1_path = |t: &Rational| vec![Rational::zero(), t.clone()];
    let e5_path = |t: &Rational| vec![Rational::zero(), t.clone(), t.clone()];
    Ok(vec![
        convergence_path(&e1(), &e1_path, magnitude).map_err(|e| format!("E1: {e}"))?,
        convergence_path(&e5(), &e5_path, magnitude).map_err(|e| format!("E5: {e}"))?,
    ])
}

fn convergence_criterion() -> Outcome {
    let runs = convergence(1.0)?;
    Ok(format!(
        "E1 slope {:.4} C {:.4}, E5 slope {:.4} C {:.4}",
        runs[0].slope, runs[0].constant, runs[1].slope, runs[1].constant
    ))
}

fn degeneration(magnitude: f64) -> Result<Vec<PathSample>, String> {
    let gb = e5();
    let half = frac(1, 2);
    let path = |t: &Rational| vec![Rational::zero(), half.clone(), t.clone()];
    let orbit = OrbitModel::uniform(&gb, magnitude).map_err(err)?;
    let ts = log_spaced(1e-1, 1e-4, 13);
    let samples = solve_path(&gb, &orbit, path, &ts, &KempfNess::default()).map_err(err)?;
    for s in &samples {
        let t = rational::to_f64(&s.t);
        let t12 = s.solution.edge_value((0, 1)).unwrap();
        let t23 = s.solution.edge_value((1, 2)).unwrap();
        ensure(s.solution.is_solved(), || format!("t = {t:e}: {}", s.solution.status))?;
        ensure((t23 - t).abs() <= 1e-8 && (t12 - 0.5).abs() <= 1e-8, || {
            format!("t = {t:e}: t12 = {t12}, t23 = {t23}")
        })?;
    }
    let wall = vec![Rational::zero(), half.clone(), Rational::zero()];
    let report = degeneration_filtration(&gb, &wall).map_err(err)?;
    ensure(report.filtration == vec![vec![0, 1], vec![0, 1, 2]], || {
        format!("filtration {:?}", report.filtration)
    })?;
    ensure(report.dying_edges == vec![(1, 2)] && report.surviving_edges == vec![(0, 1)], || {
        format!("dying {:?} surviving {:?}", report.dying_edges, report.surviving_edges)
    })?;
    let verdict = limit_support_check(&samples, &report, 1e-3);
    ensure(verdict.confirmed, || format!("support check: {:?}", verdict.mismatches))?;
    let mu = gb.slope(&gb.polarisation(&wall).map_err(err)?).map_err(err)?;
    ensure(report.pieces.iter().all(|p| p.wall_slope == mu), || {
        "limit pieces have unequal wall slopes".to_string()
    })?;
    Ok(samples)
}

fn degeneration_criterion() -> Outcome {
    let samples = degeneration(1.0)?;
    Ok(format!("{} samples, filtration {{1,2}} ⊂ {{1,2,3}}", samples.len()))
}

fn gradient_hessian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    let (mut worst_err, mut worst_eig) = (0.0f64, f64::INFINITY);
    for case in 0..100 {
        let n = rng.gen_range(2..=6);
        let ranks: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let edges = random_quiver(&mut rng, n);
        let base: Vec<f64> = edges.iter().map(|_| rng.gen_range(-2.0f64..2.0).exp()).collect();
        let orbit = OrbitModel::from_parts(ranks, edges, base).map_err(err)?;
        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mean = w.iter().sum::<f64>() / n as f64;
        w.iter_mut().for_each(|v| *v -= mean);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = KempfNessFunctional::new(&orbit, w);
        let g = f.gradient(&x);
        let fd: Vec<f64> = (0..n)
            .map(|i| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                (f.value(&xp) - f.value(&xm)) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&g);
        ensure(rel <= 1e-6, || format!("case {case}: relative gradient error {rel:e}"))?;
        let eig = f.slice_min_eigenvalue(&x);
        ensure(eig > 0.0, || format!("case {case}: slice min eigenvalue {eig:e}"))?;
        worst_err = worst_err.max(rel);
        worst_eig = worst_eig.min(eig);
    }
    Ok(format!("max rel error {worst_err:.2e}, min eigenvalue {worst_eig:.3e}"))
}

fn chamber_partition() -> Outcome {
    let mut certified = 0;
    let mut total = 0;
    for (name, gb, plane) in [
        ("E1", e1(), SamplePlane::Coordinates(0, 1)),
        ("E5", e5(), SamplePlane::Coordinates(1, 2)),
    ] {
        let zero = vec![Rational::zero(); gb.num_params()];
        let at_zero = classify(&gb, &zero).map_err(err)?.label;
        ensure(at_zero == Label::StrictlySemistable, || format!("{name}: classify(0) = {at_zero}"))?;
        let samples = sample_ball(&gb, &int(1), plane, 21).map_err(err)?;
        ensure(samples.len() == 441, || format!("{name}: {} samples", samples.len()))?;
        for s in &samples {
            // exactly one label: recompute from signs of every ν
            let nus: Vec<Rational> = gb
                .invariant_subsets()
                .iter()
                .map(|i| semistable_core::chambers::nu_value(&gb, i, &s.eps))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let stable = nus.iter().all(|v| v.is_positive());
            let unstable = nus.iter().any(|v| v.is_negative());
            let semistable = !stable && !unstable;
            ensure([stable, unstable, semistable].iter().filter(|b| **b).count() == 1, || {
                format!("{name} {:?}: not exactly one label", s.eps)
            })?;
            let expected = if stable {
                Label::Stable
            } else if unstable {
                Label::Unstable
            } else {
                Label::StrictlySemistable
            };
            ensure(s.label.label == expected, || format!("{name} {:?}: label {}", s.eps, s.label.label))?;
            total += 1;
            if stable {
                let rho = stability_radius(&gb, &s.eps)
                    .map_err(err)?
                    .ok_or_else(|| format!("{name} {:?}: no certified radius", s.eps))?;
                ensure(rho.is_positive(), || format!("{name} {:?}: radius {rho}", s.eps))?;
                for k in 0..s.eps.len() {
                    for sgn in [1, -1] {
                        let mut v = s.eps.clone();
                        v[k] += &rho * int(sgn);
                        let l = classify(&gb, &v).map_err(err)?.label;
                        ensure(l == Label::Stable, || {
                            format!("{name} {:?}: ball vertex {v:?} is {l}", s.eps)
                        })?;
                    }
                }
                certified += 1;
            }
        }
    }
    Ok(format!("{total} samples, {certified} stable samples certified"))
}

fn magnitude_invariance() -> Outcome {
    let reference = existence_interior(1.0)?;
    let conv_ref = convergence(1.0)?;
    let degen_ref = degeneration(1.0)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-300);
    for m in MAGNITUDES {
        let statuses = existence_interior(m).map_err(|e| format!("t0 = {m:e}: {e}"))?;
        ensure(statuses == reference, || format!("t0 = {m:e}: statuses differ"))?;
        let conv = convergence(m).map_err(|e| format!("t0 = {m:e}: {e}"))?;
        for (run, base) in conv.iter().zip(&conv_ref) {
            for (a, b) in run.samples.iter().zip(&base.samples) {
                ensure(a.solution.status == b.solution.status, || format!("t0 = {m:e}: path status differs"))?;
                // Tree quivers: the zero is unique in t, independent of t⁰.
                ensure(a.solution.t.iter().zip(&b.solution.t).all(|(x, y)| close(*x, *y)), || {
                    format!("t0 = {m:e}: t {:?} vs {:?}", a.solution.t, b.solution.t)
                })?;
            }
        }
        let degen = degeneration(m).map_err(|e| format!("t0 = {m:e}: {e}"))?;
        for (a, b) in degen.iter().zip(&degen_ref) {
            ensure(a.solution.t.iter().zip(&b.solution.t).all(|(x, y)| close(*x, *y)), || {
                format!("t0 = {m:e}: degeneration t {:?} vs {:?}", a.solution.t, b.solution.t)
            })?;
        }
    }
    Ok(format!("t0 in {MAGNITUDES:?}"))
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("cone duality involution", duality_involution),
        ("extremal dual rays are closed partitions", partition_structure),
        ("sign equivalence of pairing and slope gap", sign_equivalence),
        ("existence of zeros iff interior", existence_criterion),
        ("linear decay along paths to the wall", convergence_criterion),
        ("degeneration at the wall", degeneration_criterion),
        ("gradient and slice Hessian", gradient_hessian),
        ("chamber partition and openness", chamber_partition),
        ("invariance under edge magnitudes", magnitude_invariance),
    ];
    let selected: BTreeSet<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let number = k + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {number}. {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {number}. {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
