use serde_json::{json, Value};

use super::output::{emit, json_num, num, opt_num, word, Output};
use super::{CliError, Command, RunConfig, EXIT_OK, EXIT_VALIDATION};
use crate::bandmodel::{
    canonicalize, eigvec_slope, quad_products, scenario, spectrum, spectrum_report,
    CanonicalParams, Interval, ModelParams, SpectrumResult,
};
use crate::certify::{
    boundary_diagnostics, certify_family, energy_grid, product_family, scan_energies, Verdict,
};
use crate::mat2::{eigvec_partials, Amplitude, EigvecId};
use crate::oracle::validate_seeds;

/// Largest acceptable relative error in `derivs`.
const DERIV_TOL: f64 = 1e-4;
/// Denominator floor for the relative error, so that entries near zero are
/// judged on absolute error.
const DERIV_FLOOR: f64 = 1e-3;
/// Rows closer than this to a pole of the slope formulas are skipped.
const SINGULAR_GUARD: f64 = 0.1;

pub fn run(cmd: &Command) -> Result<u8, CliError> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(&RunConfig::resolve(a, None)?),
        Command::Scan(a) => cmd_scan(&RunConfig::resolve(a, None)?),
        Command::Validate { common, bands } => {
            let cfg = RunConfig::resolve(common, None)?;
            let override_bands = bands.as_ref().map(|p| read_bands(p)).transpose()?;
            cmd_validate(&cfg, override_bands)
        }
        Command::Eigencurves(a) => cmd_eigencurves(&RunConfig::resolve(a, None)?),
        Command::Certify {
            common,
            e,
            diagnostics,
        } => cmd_certify(&RunConfig::resolve(common, *e)?, *diagnostics),
        Command::Derivs { common, step } => cmd_derivs(&RunConfig::resolve(common, None)?, *step),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::validation(format!("serialization failed: {e}")))
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<u8, CliError> {
    let report = spectrum_report(&cfg.params)?;
    let mut rows = Vec::new();
    for (kind, list) in [
        ("band", &report.spectrum.bands),
        ("gap", &report.spectrum.gaps),
    ] {
        for iv in list {
            rows.push(vec![kind.to_string(), num(iv.lo), num(iv.hi)]);
        }
    }
    let mut payload = to_json(&report)?;
    payload["params"] = to_json(&cfg.params)?;
    emit(
        &Output {
            command: "spectrum",
            json: payload,
            header: vec!["kind", "lo", "hi"],
            rows,
        },
        cfg,
    )?;
    Ok(EXIT_OK)
}

/// Closed-form gaps when the distribution list is a two-site model.
fn closed_form_gaps(cfg: &RunConfig) -> Result<Option<Vec<Interval>>, CliError> {
    match cfg.distributions.as_slice() {
        &[(l0, c0), (l1, c1)] => {
            let p = ModelParams::new(l0, l1, c0, c1)?;
            Ok(Some(spectrum(&p)?.gaps))
        }
        _ => Ok(None),
    }
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<u8, CliError> {
    let rows = scan_energies(
        &cfg.distributions,
        cfg.e_min,
        cfg.e_max,
        cfg.n_points,
        cfg.budget,
    )?;
    let gaps = closed_form_gaps(cfg)?;
    let step = (cfg.e_max - cfg.e_min) / (cfg.n_points - 1) as f64;
    let (mut agree, mut compared) = (0usize, 0usize);
    let mut json_rows = Vec::with_capacity(rows.len());
    let mut csv_rows = Vec::with_capacity(rows.len());
    for row in &rows {
        let e = row.energy;
        let r = &row.report;
        let (closed, agrees) = match &gaps {
            Some(gaps) => {
                let in_gap = gaps.iter().any(|g| g.contains_open(e));
                let edge = gaps
                    .iter()
                    .flat_map(|g| [g.lo, g.hi])
                    .any(|x| x.is_finite() && (x - e).abs() <= step);
                let ok = (r.verdict == Verdict::CertifiedUH) == in_gap
                    && r.verdict != Verdict::Undetermined;
                if !edge {
                    compared += 1;
                    agree += ok as usize;
                }
                let label = if edge {
                    "edge"
                } else if ok {
                    "yes"
                } else {
                    "no"
                };
                (Some(if in_gap { "gap" } else { "band" }), Some(label))
            }
            None => (None, None),
        };
        json_rows.push(json!({
            "energy": e,
            "verdict": r.verdict,
            "margin": json_num(r.margin),
            "growth_rate": json_num(r.growth_rate),
            "witness": r.witness_word,
            "budget_used": r.budget_used,
            "closed_form": closed,
            "agrees": agrees,
        }));
        csv_rows.push(vec![
            num(e),
            format!("{:?}", r.verdict),
            opt_num(r.margin),
            opt_num(r.growth_rate),
            r.witness_word.as_deref().map(word).unwrap_or_default(),
            r.budget_used.to_string(),
            closed.unwrap_or("").to_string(),
            agrees.unwrap_or("").to_string(),
        ]);
    }
    let agreement = (gaps.is_some() && compared > 0).then(|| agree as f64 / compared as f64);
    let payload = json!({
        "distributions": cfg.distributions,
        "budget": cfg.budget,
        "agreement": agreement,
        "rows": json_rows,
    });
    emit(
        &Output {
            command: "scan",
            json: payload,
            header: vec![
                "energy",
                "verdict",
                "margin",
                "growth_rate",
                "witness",
                "budget_used",
                "closed_form",
                "agrees",
            ],
            rows: csv_rows,
        },
        cfg,
    )?;
    Ok(EXIT_OK)
}

fn read_bands(path: &std::path::Path) -> Result<SpectrumResult, CliError> {
    #[derive(serde::Deserialize)]
    struct BandFile {
        bands: Vec<Interval>,
    }
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Either {
        Pairs { bands: Vec<(f64, f64)> },
        Objects(BandFile),
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed: Either = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("bad band file {}: {e}", path.display())))?;
    let mut bands: Vec<Interval> = match parsed {
        Either::Pairs { bands } => bands
            .into_iter()
            .map(|(a, b)| Interval::new(a, b))
            .collect(),
        Either::Objects(f) => f.bands,
    };
    if bands
        .iter()
        .any(|b| b.lo.is_nan() || b.hi.is_nan() || b.lo > b.hi)
    {
        return Err(CliError::usage("every band needs lo <= hi"));
    }
    bands.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(SpectrumResult::from_bands(bands))
}

pub fn cmd_validate(cfg: &RunConfig, bands: Option<SpectrumResult>) -> Result<u8, CliError> {
    if cfg.n_sites < 10 {
        return Err(CliError::usage("--n-sites must be at least 10"));
    }
    let spec = match bands {
        Some(s) => s,
        None => spectrum(&cfg.params)?,
    };
    let reports = validate_seeds(&cfg.params, &spec, cfg.n_sites, &cfg.seeds, cfg.dilation)?;
    let total: usize = reports.iter().map(|r| r.report.violations.len()).sum();
    let worst = reports
        .iter()
        .map(|r| r.report.worst_excursion)
        .fold(0.0, f64::max);
    let uncovered: Vec<usize> = (0..spec.bands.len())
        .filter(|&k| spec.bands[k].length() > 0.2)
        .filter(|&k| reports.iter().all(|r| r.report.coverage[k] == 0))
        .collect();
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.seed.to_string(),
                r.report.violations.len().to_string(),
                num(r.report.worst_excursion),
                word(&r.report.coverage),
            ]
        })
        .collect();
    let payload = json!({
        "params": cfg.params,
        "n_sites": cfg.n_sites,
        "dilation": cfg.dilation,
        "bands": spec.bands,
        "total_violations": total,
        "worst_excursion": worst,
        "uncovered_bands": uncovered,
        "seeds": reports,
    });
    emit(
        &Output {
            command: "validate",
            json: payload,
            header: vec!["seed", "violations", "worst_excursion", "coverage"],
            rows,
        },
        cfg,
    )?;
    if total > 0 {
        log::error!("{total} eigenvalues fall outside the dilated spectrum");
        return Ok(EXIT_VALIDATION);
    }
    Ok(EXIT_OK)
}

pub fn cmd_eigencurves(cfg: &RunConfig) -> Result<u8, CliError> {
    let cp = canonicalize(&cfg.params)?;
    let grid = energy_grid(cfg.e_min, cfg.e_max, cfg.n_points)?;
    let ids: Vec<EigvecId> = EigvecId::all().collect();
    let mut json_rows = Vec::with_capacity(grid.len());
    let mut csv_rows = Vec::with_capacity(grid.len());
    for &e in &grid {
        let ec = e - cp.shift;
        let label = scenario(&cp, ec).map(|(case, letter)| format!("{}{letter}", case.number()));
        let slopes: Vec<Option<f64>> = ids
            .iter()
            .map(|&id| eigvec_slope(&cp, ec, id).ok())
            .collect();
        let mut obj = json!({ "energy": e, "scenario": label });
        for (id, s) in ids.iter().zip(&slopes) {
            obj[id.label()] = json_num(*s);
        }
        json_rows.push(obj);
        let mut row = vec![num(e), label.clone().unwrap_or_default()];
        row.extend(
            slopes
                .iter()
                .map(|s| s.map(num).unwrap_or_else(|| "NA".into())),
        );
        csv_rows.push(row);
    }
    let payload = json!({
        "params": cfg.params,
        "canonical": cp,
        "rows": json_rows,
    });
    emit(
        &Output {
            command: "eigencurves",
            json: payload,
            header: vec![
                "energy", "scenario", "u1", "u2", "u3", "u4", "s1", "s2", "s3", "s4",
            ],
            rows: csv_rows,
        },
        cfg,
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_certify(cfg: &RunConfig, diagnostics: Option<usize>) -> Result<u8, CliError> {
    let energy = cfg
        .energy
        .ok_or_else(|| CliError::usage("certify needs --e"))?;
    let family = product_family(&cfg.distributions, energy)?;
    let report = certify_family(&family, None, cfg.budget)?;
    let boundary = diagnostics
        .map(|len| boundary_diagnostics(&family, len))
        .transpose()?;
    let arc = report.cone.as_ref().map(|c| c.arcs[0]);
    let row = vec![
        num(energy),
        format!("{:?}", report.verdict),
        opt_num(report.margin),
        opt_num(report.growth_rate),
        report.witness_word.as_deref().map(word).unwrap_or_default(),
        report.budget_used.to_string(),
        opt_num(arc.map(|a| a.lo.slope())),
        opt_num(arc.map(|a| a.hi.slope())),
    ];
    let payload = json!({
        "energy": energy,
        "distributions": cfg.distributions,
        "family_size": family.len(),
        "report": report,
        "boundary": boundary,
    });
    emit(
        &Output {
            command: "certify",
            json: payload,
            header: vec![
                "energy",
                "verdict",
                "margin",
                "growth_rate",
                "witness",
                "budget_used",
                "cone_lo",
                "cone_hi",
            ],
            rows: vec![row],
        },
        cfg,
    )?;
    Ok(EXIT_OK)
}

fn finite_difference(
    cp: &CanonicalParams,
    e: f64,
    id: EigvecId,
    wrt: Amplitude,
    h: f64,
) -> crate::Result<f64> {
    let at = |delta: f64| {
        let mut q = *cp;
        match wrt {
            Amplitude::Lambda0 => q.lambda0 += delta,
            Amplitude::Lambda1 => q.lambda1 += delta,
        }
        eigvec_slope(&q, e, id)
    };
    Ok((at(h)? - at(-h)?) / (2.0 * h))
}

pub fn cmd_derivs(cfg: &RunConfig, step: f64) -> Result<u8, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::usage("--step must be positive"));
    }
    let cp = canonicalize(&cfg.params)?;
    let grid = energy_grid(cfg.e_min, cfg.e_max, cfg.n_points)?;
    let mut json_rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &e in &grid {
        let ec = e - cp.shift;
        let singular = (ec - cp.c1).abs() <= SINGULAR_GUARD
            || (ec - cp.c1 - cp.lambda1).abs() <= SINGULAR_GUARD;
        let hyperbolic: Vec<bool> = quad_products(&cp, ec)?
            .iter()
            .map(|m| m.is_hyperbolic(0.0))
            .collect();
        for id in EigvecId::all() {
            for wrt in [Amplitude::Lambda0, Amplitude::Lambda1] {
                let outcome = if singular {
                    Err("singular point".to_string())
                } else if !hyperbolic[id.index - 1] {
                    Err("not hyperbolic".to_string())
                } else {
                    eigvec_partials(id, wrt, ec, &cp)
                        .and_then(|cf| Ok((cf, finite_difference(&cp, ec, id, wrt, step)?)))
                        .map_err(|err| err.to_string())
                };
                let (cf, fd, rel, status) = match outcome {
                    Ok((cf, fd)) => {
                        let rel = if cf == fd {
                            0.0
                        } else {
                            (cf - fd).abs() / cf.abs().max(fd.abs()).max(DERIV_FLOOR)
                        };
                        worst = worst.max(rel);
                        let status = if rel > DERIV_TOL { "fail" } else { "ok" };
                        (Some(cf), Some(fd), Some(rel), status.to_string())
                    }
                    Err(reason) => (None, None, None, format!("skipped: {reason}")),
                };
                json_rows.push(json!({
                    "energy": e,
                    "entry": id.label(),
                    "wrt": wrt.label(),
                    "closed_form": json_num(cf),
                    "finite_difference": json_num(fd),
                    "rel_error": json_num(rel),
                    "status": status,
                }));
                csv_rows.push(vec![
                    num(e),
                    id.label(),
                    wrt.label().to_string(),
                    opt_num(cf),
                    opt_num(fd),
                    opt_num(rel),
                    status,
                ]);
            }
        }
    }
    let payload = json!({
        "params": cfg.params,
        "canonical": cp,
        "step": step,
        "tolerance": DERIV_TOL,
        "worst_rel_error": worst,
        "rows": json_rows,
    });
    emit(
        &Output {
            command: "derivs",
            json: payload,
            header: vec![
                "energy",
                "entry",
                "wrt",
                "closed_form",
                "finite_difference",
                "rel_error",
                "status",
            ],
            rows: csv_rows,
        },
        cfg,
    )?;
    Ok(if worst > DERIV_TOL {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    })
}
