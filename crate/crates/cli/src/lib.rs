//! Command-line front end: configuration files, subcommands and JSON reports.

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use semistable_core::chambers::{self, classify, nu_polynomial, stability_radius, walls};
use semistable_core::cones::{
    candidate_dual_generators, dual_cone, partition_form, weight_cone, Partition,
};
use semistable_core::momentmap::{
    degeneration_filtration, geometric_samples, limit_support_check, linear_samples, loglog_fit,
    moment_origin, segment, solve_path, write_path_csv,
};
use semistable_core::rational::{self, Rational};
use semistable_core::{Error, GradedBundle, KempfNess, Label, OrbitModel, SamplePlane, SolveStatus};

pub use config::{parse_config, parse_config_bytes, BundleConfig, ConfigError, Loaded};
pub use report::{CommandEcho, Report, FORMAT_VERSION, RADIUS_WARNING};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "semistable", version, about = "Stability chambers and moment-map zeros near a semistable bundle")]
pub struct Cli {
    /// JSON bundle configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for chamber sampling.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label one perturbation as stable, unstable or strictly semistable.
    Classify {
        /// Comma-separated rationals, one per perturbation parameter.
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
    },
    /// Label a grid of perturbations and write it as CSV.
    Chambers {
        #[arg(long, default_value = "1")]
        radius: String,
        /// `i,j` (1-based parameters) or `all`.
        #[arg(long, default_value = "all")]
        plane: String,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extremal rays of the weight cone and its dual.
    Cone {
        #[arg(long)]
        dual: bool,
        /// Check that every dual ray is a closed partition vector.
        #[arg(long)]
        check_partition: bool,
    },
    /// Find a zero of the moment map at one perturbation.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Follow moment-map zeros along `ε(t) = to + t·(from − to)` as `t → 0`.
    Path {
        #[arg(long, allow_hyphen_values = true)]
        eps_from: String,
        #[arg(long, allow_hyphen_values = true)]
        eps_to: String,
        /// `t_k = t_start · ratio^k` (the default).
        #[arg(long, conflicts_with = "linear")]
        geometric: bool,
        /// `t_k = t_start · (1 − k/steps)`.
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value = "1/10")]
        ratio: String,
        #[arg(long, default_value = "1")]
        t_start: String,
        /// Magnitude separating dying from surviving edges in the support
        /// check; defaults to the square root of the last sample.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Degeneration filtration at a strictly semistable perturbation.
    Filtration {
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Chambers { .. } => "chambers",
            Command::Cone { .. } => "cone",
            Command::Solve { .. } => "solve",
            Command::Path { .. } => "path",
            Command::Filtration { .. } => "filtration",
        }
    }
}

/// What a run produced: the report (absent when the input was rejected),
/// error messages for standard error, and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub errors: Vec<String>,
    pub exit_code: i32,
}

enum Failure {
    Validation(Vec<String>),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(vec![e.to_string()])
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Results {
    value: Value,
    warnings: Vec<String>,
    nonconverged: Option<String>,
}

impl Results {
    fn ok(value: Value) -> Self {
        Results {
            value,
            warnings: Vec::new(),
            nonconverged: None,
        }
    }
}

/// Runs a parsed command line. `args` is echoed in the report.
pub fn run(cli: &Cli, args: Vec<String>) -> Outcome {
    let fail = |errors: Vec<String>, exit_code| Outcome {
        report: None,
        errors,
        exit_code,
    };
    let Some(path) = &cli.config else {
        return fail(vec!["--config <path> is required".into()], EXIT_VALIDATION);
    };
    let loaded = match parse_config(path) {
        Ok(l) => l,
        Err(errs) => return fail(errs.iter().map(ToString::to_string).collect(), EXIT_VALIDATION),
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => return fail(vec![format!("--threads: {e}")], EXIT_VALIDATION),
    };
    let results = pool.install(|| execute(&cli.command, &loaded));
    match results {
        Ok(r) => {
            let report = Report {
                version: FORMAT_VERSION,
                command: CommandEcho {
                    name: cli.command.name().to_string(),
                    args,
                },
                input_digest: loaded.digest.clone(),
                results: r.value,
                warnings: r.warnings,
            };
            match r.nonconverged {
                Some(msg) => Outcome {
                    report: Some(report),
                    errors: vec![msg],
                    exit_code: EXIT_NONCONVERGENCE,
                },
                None => Outcome {
                    report: Some(report),
                    errors: Vec::new(),
                    exit_code: EXIT_OK,
                },
            }
        }
        Err(Failure::Validation(errs)) => fail(errs, EXIT_VALIDATION),
        Err(Failure::Io(e)) => fail(vec![e], EXIT_IO),
    }
}

fn execute(command: &Command, loaded: &Loaded) -> Result<Results, Failure> {
    let gb = &loaded.bundle;
    match command {
        Command::Classify { eps } => run_classify(gb, &parse_eps("--eps", eps, gb)?),
        Command::Chambers {
            radius,
            plane,
            grid,
            out,
        } => run_chambers(gb, radius, plane, *grid, out),
        Command::Cone {
            dual,
            check_partition,
        } => run_cone(gb, *dual, *check_partition),
        Command::Solve { eps, tol, max_iter } => {
            let solver = solver(*tol, *max_iter)?;
            run_solve(loaded, &parse_eps("--eps", eps, gb)?, &solver)
        }
        Command::Path {
            eps_from,
            eps_to,
            geometric: _,
            linear,
            steps,
            ratio,
            t_start,
            threshold,
            tol,
            max_iter,
            out,
        } => {
            let from = parse_eps("--eps-from", eps_from, gb)?;
            let to = parse_eps("--eps-to", eps_to, gb)?;
            let t_start = parse_rational("--t-start", t_start)?;
            if rational::sign(&t_start) <= 0 {
                return Err(invalid("--t-start must be positive"));
            }
            if *steps == 0 {
                return Err(invalid("--steps must be positive"));
            }
            let ts = if *linear {
                linear_samples(&t_start, *steps)
            } else {
                let ratio = parse_rational("--ratio", ratio)?;
                if !(rational::sign(&ratio) > 0 && ratio < Rational::from_integer(1.into())) {
                    return Err(invalid("--ratio must lie strictly between 0 and 1"));
                }
                geometric_samples(&t_start, &ratio, *steps)
            };
            let solver = solver(*tol, *max_iter)?;
            run_path(loaded, from, to, &ts, *threshold, &solver, out)
        }
        Command::Filtration { eps } => run_filtration(gb, &parse_eps("--eps", eps, gb)?),
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(vec![msg.into()])
}

fn parse_rational(flag: &str, s: &str) -> Result<Rational, Failure> {
    rational::parse(s).map_err(|e| invalid(format!("{flag}: {e}")))
}

fn parse_eps(flag: &str, s: &str, gb: &GradedBundle) -> Result<Vec<Rational>, Failure> {
    let v = rational::parse_list(s).map_err(|e| invalid(format!("{flag}: {e}")))?;
    if v.len() != gb.num_params() {
        return Err(invalid(format!(
            "{flag}: expected {} values, found {}",
            gb.num_params(),
            v.len()
        )));
    }
    Ok(v)
}

fn solver(tol: f64, max_iter: usize) -> Result<KempfNess, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid("--tol must be positive"));
    }
    Ok(KempfNess {
        tol,
        max_iter,
        ..KempfNess::default()
    })
}

fn strs(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational::format).collect()
}

fn edge_key((i, j): (usize, usize)) -> String {
    format!("{},{}", i + 1, j + 1)
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn run_classify(gb: &GradedBundle, eps: &[Rational]) -> Result<Results, Failure> {
    let label = classify(gb, eps)?;
    let nu: Vec<Value> = gb
        .invariant_subsets()
        .iter()
        .map(|s| -> Result<Value, Failure> {
            Ok(json!({
                "subset": s.label(),
                "value": rational::format(&chambers::nu_value(gb, s, eps)?),
            }))
        })
        .collect::<Result<_, _>>()?;
    let radius = if label.label == Label::Stable {
        stability_radius(gb, eps)?.map(|r| rational::format(&r))
    } else {
        None
    };
    Ok(Results {
        value: json!({
            "eps": strs(eps),
            "label": label.label.as_str(),
            "min_nu": label.min_nu.as_ref().map(rational::format),
            "witnesses": label.witnesses.iter().map(|w| w.label()).collect::<Vec<_>>(),
            "nu": nu,
            "stable_l1_radius": radius,
        }),
        warnings: vec![RADIUS_WARNING.to_string()],
        nonconverged: None,
    })
}

fn parse_plane(plane: &str, q: usize) -> Result<SamplePlane, Failure> {
    if plane == "all" {
        return Ok(SamplePlane::All);
    }
    let parts: Vec<&str> = plane.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
            (Ok(i), Ok(j)) if i >= 1 && j >= 1 && i <= q && j <= q && i != j => {
                Ok(SamplePlane::Coordinates(i - 1, j - 1))
            }
            _ => Err(invalid(format!(
                "--plane: expected two distinct parameters in 1..={q}, found {plane:?}"
            ))),
        },
        _ => Err(invalid(format!("--plane: expected \"i,j\" or \"all\", found {plane:?}"))),
    }
}

fn create(out: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(out)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", out.display())))
}

fn run_chambers(
    gb: &GradedBundle,
    radius: &str,
    plane: &str,
    grid: usize,
    out: &Path,
) -> Result<Results, Failure> {
    let radius = parse_rational("--radius", radius)?;
    let plane = parse_plane(plane, gb.num_params())?;
    let samples = chambers::sample_ball(gb, &radius, plane, grid)?;
    let mut w = create(out)?;
    chambers::write_samples_csv(&mut w, &samples)?;
    w.flush()?;
    let mut counts: BTreeMap<&str, usize> =
        [Label::Stable, Label::Unstable, Label::StrictlySemistable]
            .iter()
            .map(|l| (l.as_str(), 0))
            .collect();
    for s in &samples {
        *counts.get_mut(s.label.label.as_str()).unwrap() += 1;
    }
    let polys: Vec<Value> = walls(gb)
        .iter()
        .map(|p| json!({"subset": p.subset().label(), "nu": p.to_string()}))
        .collect();
    Ok(Results {
        value: json!({
            "radius": rational::format(&radius),
            "grid": grid,
            "samples": samples.len(),
            "counts": counts,
            "walls": polys,
            "out": out.display().to_string(),
        }),
        warnings: vec![RADIUS_WARNING.to_string()],
        nonconverged: None,
    })
}

fn rays_json(rays: &[Vec<Rational>]) -> Vec<Vec<String>> {
    rays.iter()
        .map(|r| rational::primitive(r).iter().map(ToString::to_string).collect())
        .collect()
}

fn run_cone(gb: &GradedBundle, dual: bool, check_partition: bool) -> Result<Results, Failure> {
    let sigma = weight_cone(gb)?;
    let mut value = json!({
        "weight_cone": {
            "rays": rays_json(sigma.rays()),
            "dimension": sigma.dimension(),
            "strongly_convex": sigma.is_strongly_convex(),
        }
    });
    if !(dual || check_partition) {
        return Ok(Results::ok(value));
    }
    let ranks = gb.ranks();
    let dual_cone = dual_cone(&sigma, &ranks)?;
    let partition_json = |p: &Partition| json!({"plus": one_based(&p.plus), "minus": one_based(&p.minus)});
    if dual {
        let gens: Vec<Value> = dual_cone
            .rays()
            .iter()
            .map(|r| {
                json!({
                    "ray": rays_json(std::slice::from_ref(r))[0],
                    "partition": partition_form(r, &ranks).as_ref().map(partition_json),
                })
            })
            .collect();
        value["dual_cone"] = json!({
            "rays": gens,
            "dimension": dual_cone.dimension(),
        });
    }
    let mut warnings = Vec::new();
    if check_partition {
        let cands: std::collections::BTreeSet<Vec<String>> = candidate_dual_generators(gb)
            .iter()
            .map(|c| rays_json(std::slice::from_ref(&c.vector)).remove(0))
            .collect();
        let mut all = true;
        let checks: Vec<Value> = dual_cone
            .rays()
            .iter()
            .map(|r| {
                let prim = rays_json(std::slice::from_ref(r)).remove(0);
                let part = partition_form(r, &ranks);
                let closed = part
                    .as_ref()
                    .is_some_and(|p| gb.is_closed(&p.plus.iter().copied().collect()));
                let candidate = cands.contains(&prim);
                let ok = part.is_some() && closed && candidate;
                all &= ok;
                json!({
                    "ray": prim,
                    "partition_form": part.is_some(),
                    "plus_closed": closed,
                    "candidate": candidate,
                    "passed": ok,
                })
            })
            .collect();
        if !all {
            warnings.push("some dual rays are not closed partition vectors".to_string());
        }
        value["partition_check"] = json!({"passed": all, "rays": checks});
    }
    Ok(Results {
        value,
        warnings,
        nonconverged: None,
    })
}

fn orbit(loaded: &Loaded) -> Result<OrbitModel, Failure> {
    Ok(OrbitModel::with_magnitudes(&loaded.bundle, &loaded.magnitudes)?)
}

fn nonconvergence(status: SolveStatus, e: Option<&Error>) -> Option<String> {
    match (status, e) {
        (_, Some(e)) => Some(format!("solver failed: {e}")),
        (SolveStatus::MaxIterations, None) => Some("solver reached the iteration limit".into()),
        _ => None,
    }
}

fn run_solve(loaded: &Loaded, eps: &[Rational], solver: &KempfNess) -> Result<Results, Failure> {
    let gb = &loaded.bundle;
    let orbit = orbit(loaded)?;
    let label = classify(gb, eps)?;
    let origin = moment_origin(gb, eps)?;
    let membership = orbit.cone().membership(&origin.negated())?;
    let sol = match solver.solve(&orbit, &origin) {
        Ok(s) => s,
        Err(e @ Error::Solver(_)) => {
            return Ok(Results {
                value: json!({
                    "eps": strs(eps),
                    "label": label.label.as_str(),
                    "membership": membership.to_string(),
                    "status": "failed",
                }),
                warnings: Vec::new(),
                nonconverged: nonconvergence(SolveStatus::MaxIterations, Some(&e)),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let t: BTreeMap<String, f64> = sol.edges.iter().map(|&e| edge_key(e)).zip(sol.t.iter().copied()).collect();
    Ok(Results {
        value: json!({
            "eps": strs(eps),
            "label": label.label.as_str(),
            "moment_origin": strs(&origin.w),
            "membership": membership.to_string(),
            "status": sol.status.to_string(),
            "residual": sol.residual,
            "iterations": sol.iterations,
            "t": t,
            "x": sol.x,
        }),
        warnings: Vec::new(),
        nonconverged: nonconvergence(sol.status, None),
    })
}

fn run_path(
    loaded: &Loaded,
    from: Vec<Rational>,
    to: Vec<Rational>,
    ts: &[Rational],
    threshold: Option<f64>,
    solver: &KempfNess,
    out: &Path,
) -> Result<Results, Failure> {
    let gb = &loaded.bundle;
    let orbit = orbit(loaded)?;
    let samples = match solve_path(gb, &orbit, segment(from.clone(), to.clone()), ts, solver) {
        Ok(s) => s,
        Err(e @ Error::Solver(_)) => {
            return Ok(Results {
                value: json!({"status": "failed"}),
                warnings: Vec::new(),
                nonconverged: Some(format!("solver failed: {e}")),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut w = create(out)?;
    write_path_csv(&mut w, orbit.edges(), &samples)?;
    w.flush()?;

    let mut warnings = Vec::new();
    let solved: Vec<_> = samples.iter().filter(|s| s.solution.is_solved()).collect();
    let fit = if solved.len() >= 2 {
        let tf: Vec<f64> = solved.iter().map(|s| rational::to_f64(&s.t)).collect();
        let ys: Vec<f64> = solved.iter().map(|s| s.total()).collect();
        loglog_fit(&tf, &ys)
            .ok()
            .map(|(slope, c)| json!({"slope": slope, "constant": c}))
    } else {
        None
    };
    let last = samples.last().expect("at least one sample");
    let mut value = json!({
        "eps_from": strs(&from),
        "eps_to": strs(&to),
        "samples": samples.len(),
        "solved": solved.len(),
        "statuses": samples.iter().map(|s| s.solution.status.to_string()).collect::<Vec<_>>(),
        "final": {
            "t": rational::format(&last.t),
            "label": last.label.as_str(),
            "sum": last.total(),
            "edges": last.solution.edges.iter().map(|&e| edge_key(e)).zip(last.solution.t.iter().copied()).collect::<BTreeMap<_, _>>(),
        },
        "loglog_fit": fit,
        "out": out.display().to_string(),
    });
    if classify(gb, &to)?.label == Label::StrictlySemistable {
        let report = degeneration_filtration(gb, &to)?;
        let threshold = threshold.unwrap_or_else(|| rational::to_f64(&last.t).sqrt());
        let verdict = limit_support_check(&samples, &report, threshold);
        if !verdict.confirmed {
            warnings.push("limit support check did not confirm the filtration".to_string());
        }
        value["filtration"] = filtration_json(&report);
        value["support_check"] = json!({
            "threshold": threshold,
            "confirmed": verdict.confirmed,
            "mismatches": verdict.mismatches,
        });
        if !report.ties.is_empty() {
            warnings.push(tie_warning(&report.ties));
        }
    }
    let nonconverged = samples
        .iter()
        .find(|s| s.solution.status == SolveStatus::MaxIterations)
        .map(|s| format!("solver reached the iteration limit at t = {}", rational::format(&s.t)));
    Ok(Results {
        value,
        warnings,
        nonconverged,
    })
}

fn tie_warning(ties: &[usize]) -> String {
    let levels: Vec<String> = ties.iter().map(|l| (l + 1).to_string()).collect();
    format!(
        "filtration levels {} had several maximal subsets; the lexicographically smallest was chosen",
        levels.join(", ")
    )
}

fn filtration_json(report: &semistable_core::DegenerationReport) -> Value {
    let edges = |v: &[(usize, usize)]| v.iter().map(|&(i, j)| [i + 1, j + 1]).collect::<Vec<_>>();
    json!({
        "levels": report.filtration.iter().map(|l| one_based(l)).collect::<Vec<_>>(),
        "pieces": report.pieces.iter().map(|p| json!({
            "indices": one_based(&p.indices),
            "rank": p.rank,
            "c1": strs(p.c1.coefficients()),
            "wall_slope": rational::format(&p.wall_slope),
        })).collect::<Vec<_>>(),
        "surviving_edges": edges(&report.surviving_edges),
        "dying_edges": edges(&report.dying_edges),
    })
}

fn run_filtration(gb: &GradedBundle, eps: &[Rational]) -> Result<Results, Failure> {
    let report = degeneration_filtration(gb, eps)?;
    let polys: Vec<Value> = gb
        .invariant_subsets()
        .iter()
        .map(|s| json!({"subset": s.label(), "nu": nu_polynomial(gb, s).to_string()}))
        .collect();
    let mut value = filtration_json(&report);
    value["eps"] = json!(strs(eps));
    value["walls"] = json!(polys);
    let warnings = if report.ties.is_empty() {
        Vec::new()
    } else {
        vec![tie_warning(&report.ties)]
    };
    Ok(Results {
        value,
        warnings,
        nonconverged: None,
    })
}
