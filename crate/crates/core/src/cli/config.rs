use std::path::PathBuf;

use serde::Deserialize;

use super::{CliError, CommonArgs, Format};
use crate::bandmodel::ModelParams;

/// Values a `--config` file may set. Keys mirror the flag names with
/// underscores; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    l0: Option<f64>,
    l1: Option<f64>,
    c0: Option<f64>,
    c1: Option<f64>,
    p0: Option<f64>,
    p1: Option<f64>,
    dist: Option<Vec<(f64, f64)>>,
    e_min: Option<f64>,
    e_max: Option<f64>,
    n_points: Option<usize>,
    budget: Option<usize>,
    n_sites: Option<usize>,
    seeds: Option<SeedSpec>,
    dilation: Option<f64>,
    format: Option<Format>,
    out: Option<PathBuf>,
    e: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedSpec {
    List(Vec<u64>),
    Text(String),
}

/// Fully resolved options for one command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    /// Per-site `(λ, c)` of the period; the two-site model unless overridden.
    pub distributions: Vec<(f64, f64)>,
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
    pub budget: usize,
    pub n_sites: usize,
    pub seeds: Vec<u64>,
    pub dilation: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub energy: Option<f64>,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::usage(format!("cannot parse seeds {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a >= b {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

fn parse_dist(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("--dist expects LAMBDA,C, got {text:?}"));
    let (l, c) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        l.trim().parse().map_err(|_| bad())?,
        c.trim().parse().map_err(|_| bad())?,
    ))
}

impl RunConfig {
    /// Merge a config file (if any) under the command-line flags.
    pub fn resolve(args: &CommonArgs, energy_flag: Option<f64>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let params = ModelParams {
            lambda0: args.l0.or(file.l0).unwrap_or(0.0),
            lambda1: args.l1.or(file.l1).unwrap_or(0.0),
            c0: args.c0.or(file.c0).unwrap_or(0.0),
            c1: args.c1.or(file.c1).unwrap_or(0.0),
            p0: args.p0.or(file.p0).unwrap_or(0.5),
            p1: args.p1.or(file.p1).unwrap_or(0.5),
        };
        params.validate()?;

        let distributions = if !args.dist.is_empty() {
            args.dist
                .iter()
                .map(|d| parse_dist(d))
                .collect::<Result<_, _>>()?
        } else if let Some(d) = file.dist {
            d
        } else {
            params.distributions()
        };
        if distributions.is_empty() {
            return Err(CliError::usage(
                "at least one site distribution is required",
            ));
        }

        // Default window: the spectrum lies within 2 of the potential's range.
        let values = distributions.iter().flat_map(|&(l, c)| [c, c + l]);
        let vmin = values.clone().fold(f64::INFINITY, f64::min);
        let vmax = values.fold(f64::NEG_INFINITY, f64::max);
        let e_min = args.e_min.or(file.e_min).unwrap_or(vmin - 3.0);
        let e_max = args.e_max.or(file.e_max).unwrap_or(vmax + 3.0);
        if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) {
            return Err(CliError::usage(format!(
                "energy window needs e-min < e-max, got [{e_min}, {e_max}]"
            )));
        }
        let n_points = args.n_points.or(file.n_points).unwrap_or(801);
        if n_points < 2 {
            return Err(CliError::usage("--n-points must be at least 2"));
        }
        let budget = args.budget.or(file.budget).unwrap_or(12);
        if budget == 0 {
            return Err(CliError::usage("--budget must be at least 1"));
        }
        let seeds = match (&args.seeds, file.seeds) {
            (Some(s), _) => parse_seeds(s)?,
            (None, Some(SeedSpec::Text(s))) => parse_seeds(&s)?,
            (None, Some(SeedSpec::List(v))) => v,
            (None, None) => (0..20).collect(),
        };
        if seeds.is_empty() {
            return Err(CliError::usage("seed list is empty"));
        }
        let dilation = args.dilation.or(file.dilation).unwrap_or(0.1);
        if dilation.is_nan() || dilation < 0.0 {
            return Err(CliError::usage("--dilation must be non-negative"));
        }
        Ok(RunConfig {
            params,
            distributions,
            e_min,
            e_max,
            n_points,
            budget,
            n_sites: args.n_sites.or(file.n_sites).unwrap_or(1000),
            seeds,
            dilation,
            format: args.format.or(file.format).unwrap_or(Format::Json),
            out: args.out.clone().or(file.out),
            energy: energy_flag.or(file.e),
        })
    }
}
