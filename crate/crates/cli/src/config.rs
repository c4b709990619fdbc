//! JSON configuration of a graded bundle.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use semistable_core::bundle::Piece;
use semistable_core::rational::{self, Rational};
use semistable_core::{CohClass, GradedBundle, IntersectionForm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub dimension: usize,
    pub h11_rank: usize,
    pub intersection: Vec<IntersectionEntry>,
    pub omega: Vec<String>,
    pub pieces: Vec<PieceConfig>,
    /// 1-based `[i, j]` pairs.
    pub edges: Vec<[usize; 2]>,
    /// Edge magnitudes `t⁰_ij` keyed by `"i,j"` (1-based); missing edges get 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitudes: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionEntry {
    /// 1-based basis indices.
    pub index: Vec<usize>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub rank: i64,
    pub c1: Vec<String>,
}

/// A single problem in a configuration, located by its field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn at(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

/// A configuration that parsed and validated, with its derived objects.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: BundleConfig,
    pub bundle: GradedBundle,
    /// Every edge present.
    pub magnitudes: Magnitudes,
    /// `sha256:<hex>` of the raw input bytes.
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn parse_config(path: &Path) -> Result<Loaded, Vec<ConfigError>> {
    let bytes = std::fs::read(path)
        .map_err(|e| vec![at("", format!("cannot read {}: {e}", path.display()))])?;
    parse_config_bytes(&bytes)
}

pub fn parse_config_bytes(bytes: &[u8]) -> Result<Loaded, Vec<ConfigError>> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let config: BundleConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        vec![at(path, e.into_inner().to_string())]
    })?;
    let (bundle, magnitudes) = build(&config)?;
    Ok(Loaded {
        config,
        bundle,
        magnitudes,
        digest: digest(bytes),
    })
}

fn rationals(path: &str, values: &[String], errors: &mut Vec<ConfigError>) -> Vec<Rational> {
    values
        .iter()
        .enumerate()
        .filter_map(|(k, s)| match rational::parse(s) {
            Ok(q) => Some(q),
            Err(_) => {
                errors.push(at(format!("{path}[{k}]"), format!("malformed rational {s:?}")));
                None
            }
        })
        .collect()
}

fn parse_edge_key(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// 0-based edge → magnitude.
pub type Magnitudes = BTreeMap<(usize, usize), f64>;

/// Checks the configuration and builds the bundle, reporting every problem
/// found rather than stopping at the first.
pub fn build(
    config: &BundleConfig,
) -> Result<(GradedBundle, Magnitudes), Vec<ConfigError>> {
    let mut errors = Vec::new();
    let (n, p) = (config.dimension, config.h11_rank);
    if n == 0 {
        errors.push(at("dimension", "must be positive"));
    }
    if p == 0 {
        errors.push(at("h11_rank", "must be positive"));
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut form = IntersectionForm::new(n, p).map_err(|e| vec![at("", e.to_string())])?;
    let mut seen = BTreeMap::new();
    for (k, entry) in config.intersection.iter().enumerate() {
        let path = format!("intersection[{k}]");
        if entry.index.len() != n {
            errors.push(at(
                format!("{path}.index"),
                format!("expected {n} indices, found {}", entry.index.len()),
            ));
            continue;
        }
        if entry.index.iter().any(|&i| i == 0 || i > p) {
            errors.push(at(format!("{path}.index"), format!("indices must lie in 1..={p}")));
            continue;
        }
        let mut index: Vec<usize> = entry.index.iter().map(|i| i - 1).collect();
        index.sort_unstable();
        if let Some(prev) = seen.insert(index.clone(), k) {
            errors.push(at(
                format!("{path}.index"),
                format!("duplicates intersection[{prev}] up to order"),
            ));
            continue;
        }
        match rational::parse(&entry.value) {
            Ok(q) => {
                form.set(&index, q).map_err(|e| vec![at(&path, e.to_string())])?;
            }
            Err(_) => errors.push(at(
                format!("{path}.value"),
                format!("malformed rational {:?}", entry.value),
            )),
        }
    }
    let omega = rationals("omega", &config.omega, &mut errors);
    if config.omega.len() != p {
        errors.push(at("omega", format!("expected {p} entries, found {}", config.omega.len())));
    }
    if config.pieces.is_empty() {
        errors.push(at("pieces", "at least one piece is required"));
    }
    let mut pieces = Vec::new();
    for (k, piece) in config.pieces.iter().enumerate() {
        let path = format!("pieces[{k}]");
        if piece.rank <= 0 {
            errors.push(at(format!("{path}.rank"), format!("rank must be positive, found {}", piece.rank)));
        }
        if piece.c1.len() != p {
            errors.push(at(
                format!("{path}.c1"),
                format!("expected {p} entries, found {}", piece.c1.len()),
            ));
        }
        let c1 = rationals(&format!("{path}.c1"), &piece.c1, &mut errors);
        if let Ok(rank) = u32::try_from(piece.rank) {
            pieces.push(Piece::new(rank, CohClass::new(c1)));
        }
    }
    let len = config.pieces.len();
    let mut edges = Vec::new();
    for (k, &[i, j]) in config.edges.iter().enumerate() {
        if i == 0 || j == 0 || i > len || j > len {
            errors.push(at(format!("edges[{k}]"), format!("vertices must lie in 1..={len}")));
        } else if i >= j {
            errors.push(at(
                format!("edges[{k}]"),
                format!("edge must satisfy i < j, found [{i}, {j}]"),
            ));
        } else {
            edges.push((i - 1, j - 1));
        }
    }
    let mut magnitudes: BTreeMap<(usize, usize), f64> = edges.iter().map(|&e| (e, 1.0)).collect();
    for (key, &value) in config.magnitudes.iter().flatten() {
        let path = format!("magnitudes.{key}");
        match parse_edge_key(key) {
            Some((i, j)) if i >= 1 && j >= 1 && magnitudes.contains_key(&(i - 1, j - 1)) => {
                if value.is_finite() && value > 0.0 {
                    magnitudes.insert((i - 1, j - 1), value);
                } else {
                    errors.push(at(path, format!("magnitude must be positive, found {value}")));
                }
            }
            Some(_) => errors.push(at(path, "not an edge of the quiver")),
            None => errors.push(at(path, "key must have the form \"i,j\"")),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let bundle = GradedBundle::new(form, CohClass::new(omega), pieces, edges)
        .map_err(|e| vec![at("", e.to_string())])?;
    let violations = bundle.validate();
    if !violations.is_empty() {
        return Err(violations
            .iter()
            .map(|v| {
                let path = match v {
                    semistable_core::Violation::UnequalSlopes { .. } => "pieces",
                    semistable_core::Violation::EdgeOrder { .. } => "edges",
                    semistable_core::Violation::Disconnected { .. } => "edges",
                };
                at(path, v.to_string())
            })
            .collect());
    }
    Ok((bundle, magnitudes))
}

impl BundleConfig {
    /// Canonical form: reduced rationals, sorted nonzero intersection entries,
    /// sorted edges, magnitude keys without spaces.
    pub fn canonical(&self) -> Result<BundleConfig, Vec<ConfigError>> {
        let (bundle, magnitudes) = build(self)?;
        let form = bundle.form();
        let intersection = form
            .entries()
            .map(|(idx, v)| IntersectionEntry {
                index: idx.iter().map(|i| i + 1).collect(),
                value: rational::format(v),
            })
            .collect();
        let fmt = |c: &CohClass| c.coefficients().iter().map(rational::format).collect();
        let magnitudes = self.magnitudes.as_ref().map(|_| {
            magnitudes
                .iter()
                .map(|(&(i, j), &m)| (format!("{},{}", i + 1, j + 1), m))
                .collect()
        });
        Ok(BundleConfig {
            dimension: form.dimension(),
            h11_rank: form.h11_rank(),
            intersection,
            omega: fmt(bundle.omega()),
            pieces: bundle
                .pieces()
                .iter()
                .map(|p| PieceConfig {
                    rank: p.rank.into(),
                    c1: fmt(&p.c1),
                })
                .collect(),
            edges: bundle.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            magnitudes,
        })
    }

    pub fn to_canonical_json(&self) -> Result<String, Vec<ConfigError>> {
        let canon = self.canonical()?;
        Ok(serde_json::to_string_pretty(&canon).expect("config serializes") + "\n")
    }
}
