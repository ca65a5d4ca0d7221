//! Period-2 Bernoulli model: parameters, the four two-step products, the
//! per-energy hyperbolicity test and the closed-form gaps.
//!
//! Even sites carry `λ0·B(p0) + c0`, odd sites `λ1·B(p1) + c1`. After
//! canonicalization the even support is `{0, λ0}` and the odd support is
//! `{c1, c1 + λ1}`, with all three numbers non-negative.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mat2::{transfer_matrix, EigKind, EigvecId, Mat2};

/// Gaps shorter than this are dropped.
pub const EMPTY_GAP_TOL: f64 = 1e-12;
/// Closeness at which two orderings are both evaluated and compared.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(default = "half")]
    pub p0: f64,
    #[serde(default = "half")]
    pub p1: f64,
}

fn half() -> f64 {
    0.5
}

impl ModelParams {
    /// Parameters with fair coins on both parities.
    pub fn new(lambda0: f64, lambda1: f64, c0: f64, c1: f64) -> Result<Self> {
        let p = ModelParams {
            lambda0,
            lambda1,
            c0,
            c1,
            p0: 0.5,
            p1: 0.5,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_probabilities(mut self, p0: f64, p1: f64) -> Result<Self> {
        self.p0 = p0;
        self.p1 = p1;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda0", self.lambda0),
            ("lambda1", self.lambda1),
            ("c0", self.c0),
            ("c1", self.c1),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, p) in [("p0", self.p0), ("p1", self.p1)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }

    /// `(amplitude, offset)` per site of one period, even site first.
    pub fn distributions(&self) -> Vec<(f64, f64)> {
        vec![(self.lambda0, self.c0), (self.lambda1, self.c1)]
    }
}

/// Canonical form: even support `{0, λ0}`, odd support `{c1, c1 + λ1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub c1: f64,
    /// Constant subtracted from every potential value.
    pub shift: f64,
    /// Whether the even and odd sites were exchanged.
    pub parity_swapped: bool,
}

impl CanonicalParams {
    pub fn new(lambda0: f64, lambda1: f64, c1: f64) -> Result<Self> {
        for (name, v) in [("lambda0", lambda0), ("lambda1", lambda1), ("c1", c1)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!(
                    "canonical {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(CanonicalParams {
            lambda0,
            lambda1,
            c1,
            shift: 0.0,
            parity_swapped: false,
        })
    }

    /// The four `(even value, odd value)` pairs in product order.
    pub fn value_pairs(&self) -> [(f64, f64); 4] {
        let (a0, a1) = (0.0, self.lambda0);
        let (b0, b1) = (self.c1, self.c1 + self.lambda1);
        [(a0, b0), (a0, b1), (a1, b0), (a1, b1)]
    }
}

pub fn canonicalize(p: &ModelParams) -> Result<CanonicalParams> {
    p.validate()?;
    let support = |lambda: f64, c: f64| {
        let (x, y) = (c, c + lambda);
        (x.min(y), x.max(y))
    };
    let mut even = support(p.lambda0, p.c0);
    let mut odd = support(p.lambda1, p.c1);
    let swapped = even.0 > odd.0;
    if swapped {
        std::mem::swap(&mut even, &mut odd);
    }
    let shift = even.0;
    Ok(CanonicalParams {
        lambda0: even.1 - even.0,
        lambda1: odd.1 - odd.0,
        c1: odd.0 - shift,
        shift,
        parity_swapped: swapped,
    })
}

/// The two-step products `AC, AD, BC, BD`, where `A, B` are the even-site
/// transfer matrices for values `0, λ0` and `C, D` the odd-site ones for
/// `c1, c1 + λ1`.
pub fn quad_products(cp: &CanonicalParams, energy: f64) -> Result<[Mat2; 4]> {
    let pairs = cp.value_pairs();
    let mut out = [Mat2::IDENTITY; 4];
    for (slot, (a, b)) in out.iter_mut().zip(pairs) {
        *slot = transfer_matrix(energy, a)? * transfer_matrix(energy, b)?;
    }
    Ok(out)
}

/// Whether all four products are hyperbolic, `|tr| > 2 + tol`. Energies
/// where this holds are exactly the energies outside the spectrum.
pub fn uh_at_energy(cp: &CanonicalParams, energy: f64, tol: f64) -> Result<bool> {
    Ok(quad_products(cp, energy)?
        .iter()
        .all(|m| m.is_hyperbolic(tol)))
}

/// Slope of one eigendirection of the four products.
pub fn eigvec_slope(cp: &CanonicalParams, energy: f64, which: EigvecId) -> Result<f64> {
    let m = quad_products(cp, energy)?[which.index - 1];
    let (u, s) = m.eigen_directions()?;
    Ok(match which.kind {
        EigKind::Unstable => u.slope(),
        EigKind::Stable => s.slope(),
    })
}

/// Relative order of `λ0` among `c1 ≤ c1 + λ1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderingCase {
    /// `λ0 ≤ c1`
    Order1,
    /// `c1 < λ0 < c1 + λ1`
    Order2,
    /// `c1 + λ1 ≤ λ0`
    Order3,
}

impl OrderingCase {
    pub fn number(self) -> u8 {
        match self {
            OrderingCase::Order1 => 1,
            OrderingCase::Order2 => 2,
            OrderingCase::Order3 => 3,
        }
    }
}

pub fn ordering_case(cp: &CanonicalParams) -> OrderingCase {
    if cp.lambda0 <= cp.c1 {
        OrderingCase::Order1
    } else if cp.lambda0 < cp.c1 + cp.lambda1 {
        OrderingCase::Order2
    } else {
        OrderingCase::Order3
    }
}

/// An interval of energies; open for gaps, closed for bands. Endpoints may
/// be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub lo: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains_open(&self, e: f64) -> bool {
        self.lo < e && e < self.hi
    }

    pub fn contains_closed(&self, e: f64) -> bool {
        self.lo <= e && e <= self.hi
    }

    /// Distance from `e` to the closed interval.
    pub fn distance(&self, e: f64) -> f64 {
        if e < self.lo {
            self.lo - e
        } else if e > self.hi {
            e - self.hi
        } else {
            0.0
        }
    }

    pub fn shifted(&self, by: f64) -> Interval {
        Interval::new(self.lo + by, self.hi + by)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Upper root of `(E − a)(E − b) = 4`.
fn upper(a: f64, b: f64) -> f64 {
    0.5 * (a + b + (a - b).hypot(4.0))
}

/// Lower root of `(E − a)(E − b) = 4`, via the product of roots `ab − 4`
/// to avoid cancellation.
fn lower(a: f64, b: f64) -> f64 {
    (a * b - 4.0) / upper(a, b)
}

/// The five gap formulas of one ordering case, in order `a` to `e`, before
/// empty intervals are removed.
pub fn gap_formulas(cp: &CanonicalParams, case: OrderingCase) -> [Interval; 5] {
    let (l0, c, d) = (cp.lambda0, cp.c1, cp.c1 + cp.lambda1);
    let inf = f64::INFINITY;
    let first = Interval::new(-inf, lower(0.0, c));
    let second = Interval::new(0.0, lower(l0, c));
    let last = Interval::new(upper(l0, d), inf);
    match case {
        OrderingCase::Order1 => [
            first,
            second,
            Interval::new(l0, c),
            Interval::new(upper(l0, c), d),
            last,
        ],
        OrderingCase::Order2 => [
            first,
            second,
            Interval::new(upper(0.0, c), lower(l0, d)),
            Interval::new(upper(l0, c), d),
            last,
        ],
        OrderingCase::Order3 => [
            first,
            second,
            Interval::new(upper(0.0, c), lower(l0, d)),
            Interval::new(upper(0.0, d), l0),
            last,
        ],
    }
}

/// Drop empty intervals, sort, and merge overlaps.
fn normalize_gaps(raw: &[Interval]) -> Vec<Interval> {
    let mut gaps: Vec<Interval> = raw
        .iter()
        .copied()
        .filter(|g| g.lo < g.hi - EMPTY_GAP_TOL)
        .collect();
    gaps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<Interval> = Vec::with_capacity(gaps.len());
    for g in gaps {
        match merged.last_mut() {
            Some(last) if g.lo < last.hi => last.hi = last.hi.max(g.hi),
            _ => merged.push(g),
        }
    }
    merged
}

/// Sorted, disjoint, non-empty gaps of the canonical model.
pub fn gap_intervals(cp: &CanonicalParams) -> Vec<Interval> {
    normalize_gaps(&gap_formulas(cp, ordering_case(cp)))
}

fn max_endpoint_gap(a: &[Interval], b: &[Interval]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = |p: f64, q: f64| if p == q { 0.0 } else { (p - q).abs() };
            d(x.lo, y.lo).max(d(x.hi, y.hi))
        })
        .fold(0.0, f64::max)
}

/// Largest endpoint disagreement between the chosen ordering and its
/// neighbour when the parameters sit on (or within `TIE_TOL` of) an
/// ordering boundary; `0` elsewhere.
pub fn tie_discrepancy(cp: &CanonicalParams) -> f64 {
    let chosen = gap_intervals(cp);
    let mut worst: f64 = 0.0;
    let near = |x: f64, y: f64| (x - y).abs() <= TIE_TOL;
    if near(cp.lambda0, cp.c1) || near(cp.lambda0, cp.c1 + cp.lambda1) {
        for case in [
            OrderingCase::Order1,
            OrderingCase::Order2,
            OrderingCase::Order3,
        ] {
            let boundary_ok = match case {
                OrderingCase::Order1 => near(cp.lambda0, cp.c1),
                OrderingCase::Order2 => true,
                OrderingCase::Order3 => near(cp.lambda0, cp.c1 + cp.lambda1),
            };
            if boundary_ok {
                let other = normalize_gaps(&gap_formulas(cp, case));
                worst = worst.max(max_endpoint_gap(&chosen, &other));
            }
        }
    }
    worst
}

/// Which gap formula (ordering number and letter `a`–`e`) contains `e`.
pub fn scenario(cp: &CanonicalParams, e: f64) -> Option<(OrderingCase, char)> {
    let case = ordering_case(cp);
    gap_formulas(cp, case)
        .iter()
        .position(|g| g.lo < g.hi - EMPTY_GAP_TOL && g.contains_open(e))
        .map(|k| (case, (b'a' + k as u8) as char))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub bands: Vec<Interval>,
    pub gaps: Vec<Interval>,
}

impl SpectrumResult {
    pub fn from_gaps(gaps: Vec<Interval>) -> Self {
        let bands = gaps
            .windows(2)
            .map(|w| Interval::new(w[0].hi, w[1].lo))
            .collect();
        SpectrumResult { bands, gaps }
    }

    /// Spectrum from sorted, disjoint bands; gaps are their complement.
    pub fn from_bands(bands: Vec<Interval>) -> Self {
        let inf = f64::INFINITY;
        let mut edges = vec![-inf];
        for b in &bands {
            edges.push(b.lo);
            edges.push(b.hi);
        }
        edges.push(inf);
        let gaps = edges
            .chunks(2)
            .map(|w| Interval::new(w[0], w[1]))
            .filter(|g| g.lo < g.hi)
            .collect();
        SpectrumResult { bands, gaps }
    }

    pub fn contains(&self, e: f64) -> bool {
        self.bands.iter().any(|b| b.contains_closed(e))
    }

    pub fn distance(&self, e: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| b.distance(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn shifted(&self, by: f64) -> Self {
        SpectrumResult {
            bands: self.bands.iter().map(|b| b.shifted(by)).collect(),
            gaps: self.gaps.iter().map(|g| g.shifted(by)).collect(),
        }
    }
}

/// Spectrum with the canonicalization record, for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    #[serde(flatten)]
    pub spectrum: SpectrumResult,
    pub canonical: CanonicalParams,
    pub ordering: OrderingCase,
    pub tie_discrepancy: f64,
}

pub fn spectrum_canonical(cp: &CanonicalParams) -> SpectrumResult {
    SpectrumResult::from_gaps(gap_intervals(cp))
}

/// Almost-sure spectrum in the original energy coordinates.
pub fn spectrum(p: &ModelParams) -> Result<SpectrumResult> {
    let cp = canonicalize(p)?;
    Ok(spectrum_canonical(&cp).shifted(cp.shift))
}

pub fn spectrum_report(p: &ModelParams) -> Result<SpectrumReport> {
    let cp = canonicalize(p)?;
    let tie = tie_discrepancy(&cp);
    if tie > TIE_TOL {
        log::warn!("ordering tie: neighbouring gap formulas differ by {tie:e}");
    }
    Ok(SpectrumReport {
        spectrum: spectrum_canonical(&cp).shifted(cp.shift),
        canonical: cp,
        ordering: ordering_case(&cp),
        tie_discrepancy: tie,
    })
}
