use std::io::{self, Write};

use num_traits::{One, Zero};

use super::{moment_origin, KempfNess, MomentSolution, OrbitModel};
use crate::bundle::GradedBundle;
use crate::chambers::{classify, Label};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub t: Rational,
    pub eps: Vec<Rational>,
    pub label: Label,
    pub solution: MomentSolution,
}

impl PathSample {
    pub fn total(&self) -> f64 {
        self.solution.total()
    }
}

/// Straight segment `ε(t) = to + t·(from − to)`, so `ε(1) = from`, `ε(0) = to`.
pub fn segment(from: Vec<Rational>, to: Vec<Rational>) -> impl Fn(&Rational) -> Vec<Rational> {
    move |t: &Rational| {
        from.iter()
            .zip(&to)
            .map(|(a, b)| b + t * (a - b))
            .collect()
    }
}

/// `t_k = start · ratio^k` for `k = 0..count`.
pub fn geometric_samples(start: &Rational, ratio: &Rational, count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut t = start.clone();
    for _ in 0..count {
        out.push(t.clone());
        t *= ratio;
    }
    out
}

/// `t_k = start · (1 − k/count)` for `k = 0..count`, never reaching 0.
pub fn linear_samples(start: &Rational, count: usize) -> Vec<Rational> {
    let n = Rational::from_integer(count.into());
    (0..count)
        .map(|k| start * (Rational::one() - Rational::from_integer(k.into()) / &n))
        .collect()
}

/// `count` logarithmically spaced values from `start` down to `end`, each the
/// exact rational value of the nearest `f64`.
pub fn log_spaced(start: f64, end: f64, count: usize) -> Vec<Rational> {
    assert!(count >= 2 && start > 0.0 && end > 0.0);
    let (a, b) = (start.ln(), end.ln());
    (0..count)
        .map(|k| {
            let v = (a + (b - a) * k as f64 / (count - 1) as f64).exp();
            Rational::from_float(v).expect("finite sample")
        })
        .collect()
}

/// Solves the moment equation along `path` at decreasing `samples`, warm
/// starting each solve from the previous minimiser. Samples that are not
/// stable are recorded with their label and the exact no-solution status.
pub fn solve_path<P>(
    gb: &GradedBundle,
    orbit: &OrbitModel,
    path: P,
    samples: &[Rational],
    solver: &KempfNess,
) -> Result<Vec<PathSample>>
where
    P: Fn(&Rational) -> Vec<Rational>,
{
    let mut out: Vec<PathSample> = Vec::with_capacity(samples.len());
    let mut warm: Option<Vec<f64>> = None;
    for t in samples {
        let eps = path(t);
        let label = classify(gb, &eps)?.label;
        let origin = moment_origin(gb, &eps)?;
        let solution = solver.solve_from(orbit, &origin, warm.as_deref())?;
        if solution.is_solved() {
            warm = Some(solution.x.clone());
        }
        out.push(PathSample {
            t: t.clone(),
            eps,
            label,
            solution,
        });
    }
    Ok(out)
}

/// Least-squares fit of `ln y = slope · ln t + ln C`; returns `(slope, C)`.
pub fn loglog_fit(ts: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return Err(Error::Precondition("need at least two paired samples".into()));
    }
    if ts.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = ts.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx.is_zero() {
        return Err(Error::Precondition("sample points must differ".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

/// Columns: `t`, one `t_i_j` per edge (1-based), `sum`, `residual`,
/// `iterations`, `status`.
pub fn write_path_csv<W: Write>(
    mut out: W,
    edges: &[(usize, usize)],
    samples: &[PathSample],
) -> io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(edges.iter().map(|(i, j)| format!("t_{}_{}", i + 1, j + 1)));
    header.extend(["sum", "residual", "iterations", "status"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        let mut row = vec![format!("{:e}", rational::to_f64(&s.t))];
        row.extend(s.solution.t.iter().map(|v| format!("{v:e}")));
        row.push(format!("{:e}", s.solution.total()));
        row.push(format!("{:e}", s.solution.residual));
        row.push(s.solution.iterations.to_string());
        row.push(s.solution.status.to_string());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
