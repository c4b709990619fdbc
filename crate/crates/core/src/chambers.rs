//! Slope-deficit polynomials `ν_I(ε) = μ_{ω_ε}(E) − μ_{ω_ε}(F_I)` and the
//! resulting three-way classification of nearby polarisations.
//!
//! Labels are exact sign conditions on the `ν_I`; they describe actual
//! (in)stability only inside some ball around `ω` whose radius is not
//! computable from the combinatorial data.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::bundle::{GradedBundle, InvariantSubset};
use crate::cohomology::{slope, CohClass};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Multivariate polynomial in `ε_1, …, ε_q` with exact coefficients, keyed by
/// exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopePolynomial {
    subset: InvariantSubset,
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl SlopePolynomial {
    pub fn subset(&self) -> &InvariantSubset {
        &self.subset
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.num_vars])
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, eps: &[Rational]) -> Result<Rational> {
        if eps.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: eps.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(exps, c)| {
                exps.iter()
                    .zip(eps)
                    .fold(c.clone(), |acc, (&e, x)| acc * num_traits::pow(x.clone(), e as usize))
            })
            .sum())
    }

    /// Upper bound for `|ν(ε + h) − ν(ε)|` over all `h` with `|h|_1 ≤ rho`,
    /// from `|(x+h)^a − x^a| ≤ (M+ρ)^{|a|} − M^{|a|}` with `M = max_k |x_k|`.
    pub fn variation_bound(&self, eps: &[Rational], rho: &Rational) -> Rational {
        let m = eps
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        let grown = &m + rho;
        self.terms
            .iter()
            .map(|(exps, c)| {
                let d = exps.iter().sum::<u32>() as usize;
                c.abs() * (num_traits::pow(grown.clone(), d) - num_traits::pow(m.clone(), d))
            })
            .sum()
    }
}

impl fmt::Display for SlopePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest total degree first, then reverse lexicographic for readability.
        let mut terms: Vec<(&Vec<u32>, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (exps, c) in terms {
            let monomial: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| {
                    if e == 1 {
                        format!("e{}", k + 1)
                    } else {
                        format!("e{}^{}", k + 1, e)
                    }
                })
                .collect();
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if monomial.is_empty() {
                write!(f, "{}", rational::format(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", monomial.join("*"))?;
            } else {
                write!(f, "{}*{}", rational::format(&mag), monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Stable,
    Unstable,
    StrictlySemistable,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Stable => "stable",
            Label::Unstable => "unstable",
            Label::StrictlySemistable => "strictly-semistable",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of one polarisation, with the subsets responsible for it:
/// destabilising subsets when unstable, active walls when strictly semistable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberLabel {
    pub label: Label,
    pub witnesses: Vec<InvariantSubset>,
    /// `min_I ν_I`, absent when there are no proper closed subsets.
    pub min_nu: Option<Rational>,
}

/// `ν_I(ε)` computed directly from degrees.
pub fn nu_value(gb: &GradedBundle, subset: &InvariantSubset, eps: &[Rational]) -> Result<Rational> {
    let l = gb.polarisation(eps)?;
    Ok(gb.slope(&l)? - gb.subsheaf_slope(subset, &l)?)
}

/// Exact expansion of `ν_I` as a polynomial in the perturbation parameters.
pub fn nu_polynomial(gb: &GradedBundle, subset: &InvariantSubset) -> SlopePolynomial {
    let form = gb.form();
    let n = form.dimension();
    let q = gb.num_params();
    // ν_I(ε) = D · L_ε^{n-1} with D = c1(E)/r(E) − c1(F)/r(F).
    let d_class = &gb
        .total_c1()
        .scale(&Rational::new(1.into(), gb.total_rank().into()))
        - &subset
            .c1()
            .scale(&Rational::new(1.into(), subset.rank().into()));
    // Directions: 0 is ω, k ≥ 1 is the k-th perturbation class.
    let mut directions: Vec<&CohClass> = vec![gb.omega()];
    directions.extend(gb.pert_basis());
    let mut terms: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    let mut counts = vec![0u32; q + 1];
    expand(
        n - 1,
        0,
        &mut counts,
        &directions,
        &d_class,
        form,
        &mut terms,
    );
    terms.retain(|_, c| !c.is_zero());
    SlopePolynomial {
        subset: subset.clone(),
        num_vars: q,
        terms,
    }
}

fn expand(
    remaining: usize,
    start: usize,
    counts: &mut Vec<u32>,
    directions: &[&CohClass],
    d_class: &CohClass,
    form: &crate::cohomology::IntersectionForm,
    terms: &mut BTreeMap<Vec<u32>, Rational>,
) {
    if remaining == 0 {
        let mut args: Vec<&CohClass> = vec![d_class];
        for (k, &c) in counts.iter().enumerate() {
            args.extend(std::iter::repeat_n(directions[k], c as usize));
        }
        let value = form.evaluate(&args).expect("shapes checked at construction");
        if value.is_zero() {
            return;
        }
        let total: u32 = counts.iter().sum();
        let mut coeff = factorial(total);
        for &c in counts.iter() {
            coeff /= factorial(c);
        }
        let key: Vec<u32> = counts[1..].to_vec();
        *terms.entry(key).or_insert_with(Rational::zero) += value * coeff;
        return;
    }
    for k in start..directions.len() {
        counts[k] += 1;
        expand(remaining - 1, k, counts, directions, d_class, form, terms);
        counts[k] -= 1;
    }
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * Rational::from_integer(k.into()))
}

/// All `ν_I` polynomials, one per proper closed subset.
pub fn walls(gb: &GradedBundle) -> Vec<SlopePolynomial> {
    gb.invariant_subsets()
        .iter()
        .map(|s| nu_polynomial(gb, s))
        .collect()
}

pub fn classify(gb: &GradedBundle, eps: &[Rational]) -> Result<ChamberLabel> {
    let l = gb.polarisation(eps)?;
    let mu_e = gb.slope(&l)?;
    let mut negative = Vec::new();
    let mut zero = Vec::new();
    let mut min_nu: Option<Rational> = None;
    for s in gb.invariant_subsets() {
        let deg = gb.form().degree(s.c1(), &l)?;
        let nu = &mu_e - slope(&deg, s.rank());
        if min_nu.as_ref().is_none_or(|m| &nu < m) {
            min_nu = Some(nu.clone());
        }
        if nu.is_negative() {
            negative.push(s);
        } else if nu.is_zero() {
            zero.push(s);
        }
    }
    let (label, witnesses) = if !negative.is_empty() {
        (Label::Unstable, negative)
    } else if !zero.is_empty() {
        (Label::StrictlySemistable, zero)
    } else {
        (Label::Stable, Vec::new())
    };
    Ok(ChamberLabel {
        label,
        witnesses,
        min_nu,
    })
}

/// For a stable `ε`, a rational `ρ > 0` such that every `ε'` with
/// `|ε' − ε|_1 ≤ ρ` is stable, certified from the polynomial coefficients.
/// Returns `None` when `ε` is not stable.
pub fn stability_radius(gb: &GradedBundle, eps: &[Rational]) -> Result<Option<Rational>> {
    let polys = walls(gb);
    let mut min = None::<Rational>;
    for p in &polys {
        let v = p.eval(eps)?;
        if !v.is_positive() {
            return Ok(None);
        }
        if min.as_ref().is_none_or(|m| &v < m) {
            min = Some(v);
        }
    }
    let Some(m) = min else {
        return Ok(None);
    };
    let mut rho = Rational::one();
    let half = rational::frac(1, 2);
    loop {
        if polys.iter().all(|p| p.variation_bound(eps, &rho) < m) {
            return Ok(Some(rho));
        }
        rho *= &half;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplePlane {
    /// Vary two perturbation parameters (0-based), keeping the others at 0.
    Coordinates(usize, usize),
    /// Vary every parameter.
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePoint {
    pub eps: Vec<Rational>,
    pub label: ChamberLabel,
}

/// Grid coordinates `−R + 2R·k/(N−1)`, `k = 0..N`.
fn axis(radius: &Rational, resolution: usize) -> Vec<Rational> {
    if radius.is_zero() {
        return vec![Rational::zero()];
    }
    let steps = Rational::from_integer((resolution - 1).into());
    (0..resolution)
        .map(|k| -radius + radius * rational::int(2 * k as i64) / &steps)
        .collect()
}

/// Labels every point of a regular grid over `[−R, R]` in the chosen
/// coordinates. Output order is the row-major grid order.
pub fn sample_ball(
    gb: &GradedBundle,
    radius: &Rational,
    plane: SamplePlane,
    resolution: usize,
) -> Result<Vec<SamplePoint>> {
    if resolution < 2 {
        return Err(Error::Precondition("resolution must be at least 2".into()));
    }
    if radius.is_negative() {
        return Err(Error::Precondition("radius must be nonnegative".into()));
    }
    let q = gb.num_params();
    let varied: Vec<usize> = match plane {
        SamplePlane::Coordinates(i, j) => {
            if i >= q || j >= q || i == j {
                return Err(Error::Precondition(format!(
                    "plane ({}, {}) is not a pair of distinct parameters",
                    i + 1,
                    j + 1
                )));
            }
            vec![i, j]
        }
        SamplePlane::All => (0..q).collect(),
    };
    let ax = axis(radius, resolution);
    let count = ax.len().pow(varied.len() as u32);
    let points: Vec<Vec<Rational>> = (0..count)
        .map(|mut idx| {
            let mut eps = vec![Rational::zero(); q];
            for &k in varied.iter().rev() {
                eps[k] = ax[idx % ax.len()].clone();
                idx /= ax.len();
            }
            eps
        })
        .collect();
    points
        .into_par_iter()
        .map(|eps| {
            let label = classify(gb, &eps)?;
            Ok(SamplePoint { eps, label })
        })
        .collect()
}

/// One row per sample: ε coordinates, label, min ν, active walls.
pub fn write_samples_csv<W: Write>(mut out: W, samples: &[SamplePoint]) -> io::Result<()> {
    let q = samples.first().map_or(0, |s| s.eps.len());
    let mut header: Vec<String> = (1..=q).map(|k| format!("eps_{k}")).collect();
    header.extend(["label", "min_nu", "active_walls"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        let mut row: Vec<String> = s.eps.iter().map(rational::format).collect();
        row.push(s.label.label.to_string());
        row.push(s.label.min_nu.as_ref().map(rational::format).unwrap_or_default());
        let walls: Vec<String> = if s.label.label == Label::StrictlySemistable {
            s.label.witnesses.iter().map(InvariantSubset::label).collect()
        } else {
            Vec::new()
        };
        row.push(format!("\"{}\"", walls.join(" ")));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
