//! Finite-volume checks of the predicted spectrum.
//!
//! Potentials are drawn from a ChaCha8 stream keyed by the seed. Site `n`
//! consumes the `n`-th 64-bit output (stream word position `2n`), so any
//! site can be regenerated on its own and samples never depend on thread
//! scheduling. A site takes the upper value `c + λ` when the top 53 bits
//! of its word, read as a uniform number in `[0, 1)`, fall below `p`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandmodel::{ModelParams, SpectrumResult};
use crate::error::{invalid, Result};
use crate::mat2::{transfer_matrix, Mat2};

/// Absolute accuracy of each bisected eigenvalue.
pub const EIG_TOL: f64 = 1e-10;
/// Steps between renormalizations of the running transfer product.
pub const RENORM_EVERY: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub params: ModelParams,
}

fn to_unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The uniform number driving site `n` of the stream for `seed`.
pub fn site_uniform(seed: u64, n: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * n as u128);
    to_unit(rng.next_u64())
}

pub fn sample_potential(p: &ModelParams, n: usize, seed: u64) -> Result<PotentialSample> {
    p.validate()?;
    if n == 0 {
        return Err(invalid("a sample needs at least one site"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|site| {
            let (lambda, c, prob) = if site % 2 == 0 {
                (p.lambda0, p.c0, p.p0)
            } else {
                (p.lambda1, p.c1, p.p1)
            };
            if to_unit(rng.next_u64()) < prob {
                c + lambda
            } else {
                c
            }
        })
        .collect();
    Ok(PotentialSample {
        values,
        seed,
        params: *p,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenList {
    pub values: Vec<f64>,
}

/// Sturm counts of the tridiagonal matrix with diagonal `diag` and unit
/// off-diagonal: the number of eigenvalues below each shift, from the signs
/// of the LDLᵀ pivots. The recurrences are independent, so one sweep over
/// the diagonal serves all shifts and their divisions overlap.
fn count_below<const K: usize>(diag: &[f64], xs: [f64; K]) -> [usize; K] {
    let mut count = [0; K];
    // An infinite previous pivot makes the first step `d - x`.
    let mut q = [f64::INFINITY; K];
    for &d in diag {
        for k in 0..K {
            let p = d - xs[k] - 1.0 / q[k];
            let p = if p == 0.0 {
                -f64::EPSILON * (d.abs() + xs[k].abs() + 2.0)
            } else {
                p
            };
            count[k] += usize::from(p < 0.0);
            q[k] = p;
        }
    }
    count
}

/// Eigenvalues of the Dirichlet box Hamiltonian: diagonal = potential,
/// off-diagonal = 1. Sorted ascending.
pub fn finite_volume_eigenvalues(s: &PotentialSample) -> EigenList {
    tridiagonal_eigenvalues(&s.values)
}

pub fn tridiagonal_eigenvalues(diag: &[f64]) -> EigenList {
    let n = diag.len();
    if n == 0 {
        return EigenList { values: Vec::new() };
    }
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 - EIG_TOL;
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 + EIG_TOL;
    let mut values = Vec::with_capacity(n);
    let mut stack = vec![(lo, hi, 0usize, n)];
    // Each interval is cut into SECTIONS pieces per sweep until it is
    // narrower than EIG_TOL; pieces are pushed top-down so output is sorted.
    const SECTIONS: usize = 4;
    while let Some((a, b, ca, cb)) = stack.pop() {
        if cb == ca {
            continue;
        }
        if b - a <= EIG_TOL {
            values.extend(std::iter::repeat_n(0.5 * (a + b), cb - ca));
            continue;
        }
        let step = (b - a) / SECTIONS as f64;
        let xs: [f64; SECTIONS - 1] = std::array::from_fn(|k| a + step * (k + 1) as f64);
        let counts = count_below(diag, xs);
        let edge = |k: usize| {
            if k == 0 {
                (a, ca)
            } else if k == SECTIONS {
                (b, cb)
            } else {
                (xs[k - 1], counts[k - 1])
            }
        };
        for k in (0..SECTIONS).rev() {
            let ((x0, c0), (x1, c1)) = (edge(k), edge(k + 1));
            stack.push((x0, x1, c0, c1));
        }
    }
    EigenList { values }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// Eigenvalues farther than the dilation from every band.
    pub violations: Vec<f64>,
    /// Eigenvalues inside each closed band, in band order.
    pub coverage: Vec<usize>,
    /// Largest distance from an eigenvalue to the spectrum.
    pub worst_excursion: f64,
}

pub fn containment_report(
    eigs: &EigenList,
    spec: &SpectrumResult,
    dilation: f64,
) -> Result<ContainmentReport> {
    if dilation.is_nan() || dilation < 0.0 {
        return Err(invalid(format!(
            "dilation must be non-negative, got {dilation}"
        )));
    }
    let mut violations = Vec::new();
    let mut coverage = vec![0; spec.bands.len()];
    let mut worst: f64 = 0.0;
    for &e in &eigs.values {
        let d = spec.distance(e);
        worst = worst.max(d);
        if d > dilation {
            violations.push(e);
        }
        for (slot, band) in coverage.iter_mut().zip(&spec.bands) {
            if band.contains_closed(e) {
                *slot += 1;
            }
        }
    }
    Ok(ContainmentReport {
        violations,
        coverage,
        worst_excursion: worst,
    })
}

/// Containment of one seeded box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    #[serde(flatten)]
    pub report: ContainmentReport,
}

/// Run the sample → eigenvalues → containment pipeline for every seed.
/// Reports come back in seed-list order.
pub fn validate_seeds(
    p: &ModelParams,
    spec: &SpectrumResult,
    n_sites: usize,
    seeds: &[u64],
    dilation: f64,
) -> Result<Vec<SeedReport>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let sample = sample_potential(p, n_sites, seed)?;
            let eigs = finite_volume_eigenvalues(&sample);
            Ok(SeedReport {
                seed,
                report: containment_report(&eigs, spec, dilation)?,
            })
        })
        .collect()
}

/// `(1/steps)·ln‖A_E(steps−1)⋯A_E(0)‖` along one sampled potential.
pub fn lyapunov_estimate(p: &ModelParams, energy: f64, steps: usize, seed: u64) -> Result<f64> {
    if steps < 100 {
        return Err(invalid(format!("need at least 100 steps, got {steps}")));
    }
    let sample = sample_potential(p, steps, seed)?;
    let mut prod = Mat2::IDENTITY;
    let mut log_sum = 0.0;
    for (k, &v) in sample.values.iter().enumerate() {
        prod = transfer_matrix(energy, v)? * prod;
        if (k + 1) % RENORM_EVERY == 0 {
            let n = prod.operator_norm();
            log_sum += n.ln();
            prod = prod.scale(1.0 / n);
        }
    }
    log_sum += prod.operator_norm().ln();
    Ok(log_sum / steps as f64)
}
