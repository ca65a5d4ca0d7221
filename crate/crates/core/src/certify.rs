//! Uniform-hyperbolicity certification for finite families of `SL(2, ℝ)`
//! matrices.
//!
//! The procedure is a semi-decision. An invariant cone proves UH in finite
//! work, a word whose product has `|tr| ≤ 2` disproves it, and a budget on
//! word length keeps the search total, returning `Undetermined` when
//! neither is found.
//!
//! Words are index sequences `w = (w_0, …, w_{k-1})` whose product is
//! `M_{w_0} · M_{w_1} ⋯ M_{w_{k-1}}`.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandmodel::{quad_products, CanonicalParams};
use crate::error::{invalid, Error, Result};
use crate::mat2::{transfer_matrix, EigKind, Mat2};
use crate::projline::{
    act, ccw_offset, containment_clearance, image_arc, separating_arc, smallest_enclosing_span,
    Arc, Cone, ProjPoint,
};

/// Largest period accepted by [`product_family`].
pub const MAX_PERIOD: usize = 20;
/// Largest period accepted by [`scan_energies`].
pub const MAX_SCAN_PERIOD: usize = 12;
/// Cap on `|members|^maxLen` for exhaustive word enumeration.
pub const MAX_WORDS: u64 = 1 << 20;
/// Entry-wise tolerance for treating two family members as the same matrix.
pub const DEDUP_TOL: f64 = 1e-12;
/// Tolerance for the boundary diagnostics.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Projective distance below which two eigendirections coincide.
pub const COINCIDENCE_TOL: f64 = 1e-9;
/// Cap on reported heteroclinic triples.
pub const MAX_TRIPLES: usize = 1000;

/// Distinct `m`-step transfer products of a period-`m` Bernoulli potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFamily {
    pub members: Vec<Mat2>,
    pub period: usize,
}

impl MatrixFamily {
    /// A family from explicit matrices; duplicates are removed.
    pub fn new(members: Vec<Mat2>, period: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("a matrix family needs at least one member"));
        }
        if period == 0 {
            return Err(invalid("period must be positive"));
        }
        if let Some(m) = members.iter().find(|m| !m.is_unimodular(1e-10)) {
            return Err(invalid(format!("member {m} is not unimodular")));
        }
        Ok(MatrixFamily {
            members: dedup(members),
            period,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn word_product(&self, word: &[usize]) -> Mat2 {
        word.iter()
            .fold(Mat2::IDENTITY, |acc, &i| acc * self.members[i])
    }
}

fn dedup(members: Vec<Mat2>) -> Vec<Mat2> {
    let mut kept: Vec<Mat2> = Vec::with_capacity(members.len());
    for m in members {
        if !kept.iter().any(|k| k.approx_eq(&m, DEDUP_TOL)) {
            kept.push(m);
        }
    }
    kept
}

/// All distinct products `T(v_0) · T(v_1) ⋯ T(v_{m-1})` where site `k`
/// takes the value `c_k` or `c_k + λ_k`. Member order follows the bit
/// string `(x_0, …, x_{m-1})` read as a binary number, first occurrence
/// kept on duplicates; for `m = 2` this is `AC, AD, BC, BD`.
pub fn product_family(distributions: &[(f64, f64)], energy: f64) -> Result<MatrixFamily> {
    let m = distributions.len();
    if m == 0 {
        return Err(invalid("need at least one site distribution"));
    }
    if m > MAX_PERIOD {
        return Err(Error::Budget(format!(
            "period {m} exceeds {MAX_PERIOD} (2^m products)"
        )));
    }
    let site: Vec<[Mat2; 2]> = distributions
        .iter()
        .map(|&(lambda, c)| {
            Ok([
                transfer_matrix(energy, c)?,
                transfer_matrix(energy, c + lambda)?,
            ])
        })
        .collect::<Result<_>>()?;
    let members = (0..1usize << m)
        .map(|bits| {
            site.iter()
                .enumerate()
                .fold(Mat2::IDENTITY, |acc, (k, pair)| {
                    acc * pair[(bits >> (m - 1 - k)) & 1]
                })
        })
        .collect();
    Ok(MatrixFamily {
        members: dedup(members),
        period: m,
    })
}

/// Depth-first walk over every word of length `1..=max_len`, reusing the
/// prefix product. The callback sees each word once, shorter words first
/// along every branch.
fn walk_words<F>(members: &[Mat2], max_len: usize, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(&[usize], &Mat2) -> ControlFlow<()>,
{
    fn go<F>(
        members: &[Mat2],
        left: usize,
        word: &mut Vec<usize>,
        prefix: &Mat2,
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[usize], &Mat2) -> ControlFlow<()>,
    {
        for (i, m) in members.iter().enumerate() {
            let p = *prefix * *m;
            word.push(i);
            f(word, &p)?;
            if left > 1 {
                go(members, left - 1, word, &p, f)?;
            }
            word.pop();
        }
        ControlFlow::Continue(())
    }
    if max_len == 0 {
        return ControlFlow::Continue(());
    }
    go(
        members,
        max_len,
        &mut Vec::with_capacity(max_len),
        &Mat2::IDENTITY,
        f,
    )
}

/// Number of words of length `1..=len` over `n` letters, saturating.
fn word_count(n: usize, len: usize) -> u64 {
    let n = n as u64;
    let mut total: u64 = 0;
    let mut pow: u64 = 1;
    for _ in 0..len {
        pow = pow.saturating_mul(n);
        total = total.saturating_add(pow);
    }
    total
}

fn check_word_budget(n: usize, max_len: usize) -> Result<()> {
    let leaves = (n as u64).checked_pow(max_len as u32).unwrap_or(u64::MAX);
    if leaves > MAX_WORDS {
        return Err(Error::Budget(format!(
            "{n}^{max_len} words exceed the enumeration cap of {MAX_WORDS}"
        )));
    }
    Ok(())
}

/// `min_w ‖∏w‖^(1/|w|)` over all words of length `1..=max_len`.
pub fn min_growth_rate(f: &MatrixFamily, max_len: usize) -> Result<f64> {
    if max_len == 0 {
        return Err(invalid("max_len must be at least 1"));
    }
    check_word_budget(f.len(), max_len)?;
    let mut best = f64::INFINITY;
    let _ = walk_words(&f.members, max_len, &mut |w, p| {
        best = best.min(p.operator_norm().ln() / w.len() as f64);
        ControlFlow::Continue(())
    });
    Ok(best.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedUH,
    CertifiedNotUH,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub verdict: Verdict,
    pub cone: Option<Cone>,
    /// Smallest angular clearance, in radians, of the cone images.
    pub margin: Option<f64>,
    pub witness_word: Option<Vec<usize>>,
    pub witness_trace: Option<f64>,
    pub growth_rate: Option<f64>,
    /// Word products evaluated.
    pub budget_used: u64,
}

impl CertReport {
    fn new(verdict: Verdict, budget_used: u64) -> Self {
        CertReport {
            verdict,
            cone: None,
            margin: None,
            witness_word: None,
            witness_trace: None,
            growth_rate: None,
            budget_used,
        }
    }
}

/// Tunables for [`certify_family_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub max_refinements: usize,
    /// Fraction of the free room added on each side of a seed arc.
    pub pad: f64,
    /// Smallest clearance, in radians, accepted for a certificate.
    pub min_margin: f64,
    /// Cap on word products evaluated while searching for a witness.
    pub max_products: u64,
    /// Cap on word products used to seed the cone.
    pub max_seed_products: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_refinements: 50,
            pad: 0.5,
            min_margin: 1e-6,
            max_products: 1_000_000,
            max_seed_products: 20_000,
        }
    }
}

pub fn certify_family(
    f: &MatrixFamily,
    cone_hint: Option<&Cone>,
    budget_len: usize,
) -> Result<CertReport> {
    certify_family_with(f, cone_hint, budget_len, &CertifyOptions::default())
}

pub fn certify_family_with(
    f: &MatrixFamily,
    cone_hint: Option<&Cone>,
    budget_len: usize,
    opts: &CertifyOptions,
) -> Result<CertReport> {
    if budget_len == 0 {
        return Err(invalid("budget length must be at least 1"));
    }
    let n = f.len();
    let mut used: u64 = 0;

    // Stage 1: short words. They both look for a witness and seed the cone.
    let mut seed_len = budget_len.min(3);
    while seed_len > 1 && word_count(n, seed_len) > opts.max_seed_products {
        seed_len -= 1;
    }
    let mut unstable: Vec<ProjPoint> = Vec::new();
    let mut stable: Vec<ProjPoint> = Vec::new();
    let mut witness: Option<(Vec<usize>, f64)> = None;
    let _ = walk_words(&f.members, seed_len, &mut |w, p| {
        used += 1;
        if !p.is_hyperbolic(0.0) {
            witness = Some((w.to_vec(), p.trace()));
            return ControlFlow::Break(());
        }
        if let Ok((u, s)) = p.eigen_directions() {
            unstable.push(u);
            stable.push(s);
        }
        ControlFlow::Continue(())
    });
    if let Some((word, trace)) = witness {
        return Ok(not_uh(word, trace, used));
    }

    // Stage 2: cone search.
    let mut starts: Vec<Arc> = Vec::new();
    if let Some(hint) = cone_hint {
        if hint.is_principal() {
            starts.push(hint.arcs[0]);
        } else if let Some(r) = try_cone(f, hint, opts) {
            return Ok(uh_report(f, hint.clone(), r, used));
        }
    }
    if let Ok(arc) = separating_arc(&unstable, &stable, opts.pad) {
        starts.push(arc);
    }
    let members_dirs: Vec<(ProjPoint, ProjPoint)> = f
        .members
        .iter()
        .filter_map(|m| m.eigen_directions().ok())
        .collect();
    let (mu, ms): (Vec<_>, Vec<_>) = members_dirs.into_iter().unzip();
    if let Ok(arc) = separating_arc(&mu, &ms, opts.pad) {
        starts.push(arc);
    }
    for start in starts {
        if let Some((cone, margin)) = refine_cone(f, start, opts) {
            return Ok(uh_report(f, cone, margin, used));
        }
    }

    // Stage 3: longer witnesses, shortest first.
    for len in (seed_len + 1)..=budget_len {
        let leaves = (n as u64).saturating_pow(len as u32);
        if used.saturating_add(leaves) > opts.max_products {
            log::debug!("witness search stopped at length {len}: product budget exhausted");
            break;
        }
        let mut found: Option<(Vec<usize>, f64)> = None;
        let _ = walk_words(&f.members, len, &mut |w, p| {
            if w.len() < len {
                return ControlFlow::Continue(());
            }
            used += 1;
            if !p.is_hyperbolic(0.0) {
                found = Some((w.to_vec(), p.trace()));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if let Some((word, trace)) = found {
            return Ok(not_uh(word, trace, used));
        }
    }
    Ok(CertReport::new(Verdict::Undetermined, used))
}

fn not_uh(word: Vec<usize>, trace: f64, used: u64) -> CertReport {
    CertReport {
        witness_word: Some(word),
        witness_trace: Some(trace),
        ..CertReport::new(Verdict::CertifiedNotUH, used)
    }
}

fn uh_report(f: &MatrixFamily, cone: Cone, margin: f64, used: u64) -> CertReport {
    CertReport {
        cone: Some(cone),
        margin: Some(margin),
        growth_rate: report_growth(f),
        ..CertReport::new(Verdict::CertifiedUH, used)
    }
}

/// Growth rate over the longest words that stay within 4096 leaves.
fn report_growth(f: &MatrixFamily) -> Option<f64> {
    let mut len = 1;
    while len < 8 && (f.len() as u64).saturating_pow(len as u32 + 1) <= 4096 {
        len += 1;
    }
    min_growth_rate(f, len).ok()
}

fn try_cone(f: &MatrixFamily, cone: &Cone, opts: &CertifyOptions) -> Option<f64> {
    let clearance = f
        .members
        .iter()
        .map(|m| containment_clearance(m, cone))
        .fold(f64::INFINITY, f64::min);
    (clearance > 0.0 && clearance >= opts.min_margin).then_some(clearance)
}

/// Test `start`; if it is not strictly invariant, replace it by a cone
/// built from the hull of its images and try again.
fn refine_cone(f: &MatrixFamily, start: Arc, opts: &CertifyOptions) -> Option<(Cone, f64)> {
    let mut arc = start;
    for _ in 0..=opts.max_refinements {
        let cone = Cone::single(arc);
        if let Some(margin) = try_cone(f, &cone, opts) {
            return Some((cone, margin));
        }
        let images: Vec<_> = f
            .members
            .iter()
            .map(|m| image_arc(m, &arc).map(|a| a.span()))
            .collect::<Result<_>>()
            .ok()?;
        let hull = smallest_enclosing_span(&images)?;
        let hull_arc = hull.to_arc().ok()?;
        arc = if arc.clearance_of(&hull_arc) > 0.0 {
            // Images already inside: tighten halfway towards their hull.
            let lo = arc.start() + 0.5 * ccw_offset(arc.start(), hull.start);
            let hi_gap = arc.length() - ccw_offset(arc.start(), hull.end());
            let len = ccw_offset(lo, hull.end()) + 0.5 * hi_gap;
            Arc::from_angles(lo, len).ok()?
        } else {
            let mut spans = images;
            spans.push(arc.span());
            smallest_enclosing_span(&spans)?.to_arc().ok()?
        };
    }
    None
}

/// Single-arc invariant cone for the four two-step products: the smallest
/// arc holding every unstable direction and no stable one, padded by half
/// the room left on each side.
pub fn principal_cone(cp: &CanonicalParams, energy: f64) -> Result<Cone> {
    let q = quad_products(cp, energy)?;
    let mut us = Vec::with_capacity(4);
    let mut ss = Vec::with_capacity(4);
    for m in &q {
        let (u, s) = m.eigen_directions()?;
        us.push(u);
        ss.push(s);
    }
    Ok(Cone::single(separating_arc(&us, &ss, 0.5)?))
}

/// Two products sharing an eigendirection. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coincidence {
    pub i: usize,
    pub j: usize,
    pub left: EigKind,
    pub right: EigKind,
}

/// Pairs of distinct products whose eigendirections coincide. Products
/// that are the same matrix are skipped.
pub fn coincidence_check(cp: &CanonicalParams, energy: f64) -> Result<Vec<Coincidence>> {
    let q = quad_products(cp, energy)?;
    let dirs = q
        .iter()
        .map(Mat2::eigen_directions)
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if q[i].approx_eq(&q[j], DEDUP_TOL) {
                continue;
            }
            let (ui, si) = dirs[i];
            let (uj, sj) = dirs[j];
            for (left, right, a, b) in [
                (EigKind::Unstable, EigKind::Unstable, ui, uj),
                (EigKind::Stable, EigKind::Stable, si, sj),
                (EigKind::Unstable, EigKind::Stable, ui, sj),
                (EigKind::Stable, EigKind::Unstable, si, uj),
            ] {
                if a.distance(&b) <= COINCIDENCE_TOL {
                    out.push(Coincidence {
                        i: i + 1,
                        j: j + 1,
                        left,
                        right,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Words lying on the boundary of the hyperbolic locus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDiagnostics {
    pub parabolic_words: Vec<Vec<usize>>,
    pub identity_words: Vec<Vec<usize>>,
    /// `(I, J, K)` with `∏I · u(∏J) = s(∏K)`.
    pub heteroclinic_triples: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)>,
}

pub fn boundary_diagnostics(f: &MatrixFamily, max_len: usize) -> Result<BoundaryDiagnostics> {
    if max_len == 0 {
        return Err(invalid("max_len must be at least 1"));
    }
    check_word_budget(f.len(), max_len)?;
    let mut diag = BoundaryDiagnostics::default();
    let short = max_len.min(4);
    let mut words: Vec<(Vec<usize>, Mat2)> = Vec::new();
    let _ = walk_words(&f.members, max_len, &mut |w, p| {
        if (p.trace().abs() - 2.0).abs() <= BOUNDARY_TOL {
            diag.parabolic_words.push(w.to_vec());
        }
        if p.approx_eq(&Mat2::IDENTITY, BOUNDARY_TOL) {
            diag.identity_words.push(w.to_vec());
        }
        if w.len() <= short {
            words.push((w.to_vec(), *p));
        }
        ControlFlow::Continue(())
    });
    let sort_words = |v: &mut Vec<Vec<usize>>| v.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    sort_words(&mut diag.parabolic_words);
    sort_words(&mut diag.identity_words);
    words.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));

    let dirs: Vec<Option<(ProjPoint, ProjPoint)>> = words
        .iter()
        .map(|(_, p)| {
            if p.is_hyperbolic(BOUNDARY_TOL) {
                p.eigen_directions().ok()
            } else {
                None
            }
        })
        .collect();
    let mut stable: Vec<(f64, usize)> = dirs
        .iter()
        .enumerate()
        .filter_map(|(k, d)| d.map(|(_, s)| (s.angle(), k)))
        .collect();
    stable.sort_by(|a, b| a.0.total_cmp(&b.0));
    'outer: for (wi, pi) in &words {
        for (kj, dj) in dirs.iter().enumerate() {
            let Some((uj, _)) = dj else { continue };
            let image = act(pi, uj);
            for kk in stable_near(&stable, image.angle(), BOUNDARY_TOL) {
                let Some((_, s)) = dirs[kk] else { continue };
                if image.distance(&s) <= BOUNDARY_TOL {
                    diag.heteroclinic_triples.push((
                        wi.clone(),
                        words[kj].0.clone(),
                        words[kk].0.clone(),
                    ));
                    if diag.heteroclinic_triples.len() >= MAX_TRIPLES {
                        log::warn!("heteroclinic search truncated at {MAX_TRIPLES} triples");
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(diag)
}

/// Word indices whose stable angle lies within `tol` of `theta`, modulo π.
fn stable_near(sorted: &[(f64, usize)], theta: f64, tol: f64) -> Vec<usize> {
    use std::f64::consts::PI;
    let mut out = Vec::new();
    for centre in [theta - PI, theta, theta + PI] {
        let from = sorted.partition_point(|&(a, _)| a < centre - tol);
        out.extend(
            sorted[from..]
                .iter()
                .take_while(|&&(a, _)| a <= centre + tol)
                .map(|&(_, k)| k),
        );
    }
    out
}

/// One grid energy and its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub energy: f64,
    pub report: CertReport,
}

/// Evenly spaced grid `E_k = lo + (hi − lo)·k/(n − 1)`.
pub fn energy_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!(
            "energy grid needs finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(invalid("energy grid needs at least 2 points"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect())
}

/// Certify every grid energy. Rows come back in grid order regardless of
/// how the work is spread over threads.
pub fn scan_energies(
    distributions: &[(f64, f64)],
    lo: f64,
    hi: f64,
    n_points: usize,
    budget_len: usize,
) -> Result<Vec<ScanRow>> {
    if distributions.len() > MAX_SCAN_PERIOD {
        return Err(Error::Budget(format!(
            "scan period {} exceeds {MAX_SCAN_PERIOD}",
            distributions.len()
        )));
    }
    let grid = energy_grid(lo, hi, n_points)?;
    grid.par_iter()
        .map(|&energy| {
            let family = product_family(distributions, energy)?;
            let report = certify_family(&family, None, budget_len)?;
            Ok(ScanRow { energy, report })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandmodel::{gap_intervals, uh_at_energy};
    use crate::projline::maps_strictly_inside;
    use approx::assert_relative_eq;

    fn family(ms: &[Mat2]) -> MatrixFamily {
        MatrixFamily::new(ms.to_vec(), 1).unwrap()
    }

    const ROT: Mat2 = Mat2::new(0.0, -1.0, 1.0, 0.0);

    #[test]
    fn product_family_examples() {
        let f = product_family(&[(0.0, 0.0)], 0.0).unwrap();
        assert_eq!(f.members, vec![ROT]);

        let cp = CanonicalParams::new(1.0, 1.4, 2.0).unwrap();
        let e = 0.3;
        let f = product_family(&[(1.0, 0.0), (1.4, 2.0)], e).unwrap();
        let q = quad_products(&cp, e).unwrap();
        assert_eq!(f.len(), 4);
        for (a, b) in f.members.iter().zip(q.iter()) {
            assert!(a.approx_eq(b, 1e-15));
        }

        let f = product_family(&[(1.0, 0.0), (0.0, 2.0)], e).unwrap();
        assert_eq!(f.len(), 2);

        assert!(matches!(
            product_family(&vec![(1.0, 0.0); 21], 0.0),
            Err(Error::Budget(_))
        ));
        assert!(product_family(&[], 0.0).is_err());
    }

    #[test]
    fn certify_examples() {
        let r = certify_family(&family(&[Mat2::diag(2.0, 0.5)]), None, 6).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedUH);
        assert!(r.margin.unwrap() > 1e-6);
        assert_relative_eq!(r.growth_rate.unwrap(), 2.0, epsilon = 1e-12);

        let r = certify_family(&family(&[ROT]), None, 6).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedNotUH);
        assert_eq!(r.witness_word, Some(vec![0]));
        assert_eq!(r.witness_trace, Some(0.0));
    }

    #[test]
    fn certified_gap_energy_gets_scenario_cone() {
        let cp = CanonicalParams::new(1.0, 1.4, 2.0).unwrap();
        let e = 1.5;
        let f = product_family(&[(1.0, 0.0), (1.4, 2.0)], e).unwrap();
        let r = certify_family(&f, None, 8).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedUH);
        let cone = r.cone.unwrap();
        // Stable directions are negative, unstable positive: the cone sits in (0, ∞).
        for m in &f.members {
            let (u, s) = m.eigen_directions().unwrap();
            assert!(cone.contains(&u, true) && !cone.contains(&s, false));
        }
        // Stable directions are negative and unstable ones positive, so the
        // positive half-line is itself an invariant cone.
        let positive = Cone::single(Arc::from_slopes(0.0, f64::INFINITY).unwrap());
        let r = certify_family(&f, Some(&positive), 8).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedUH);
        assert_eq!(r.cone.unwrap(), positive);
        let hinted = certify_family(&f, Some(&principal_cone(&cp, e).unwrap()), 8).unwrap();
        assert_eq!(hinted.verdict, Verdict::CertifiedUH);
    }

    #[test]
    fn hyperbolic_but_not_uh_pair_needs_a_longer_witness() {
        // Each member is hyperbolic, but their product is a rotation-like
        // element: diag(2, 1/2) and its conjugate by a quarter turn.
        let d = Mat2::diag(2.0, 0.5);
        let e = ROT * d * ROT.inverse();
        let r = certify_family(&family(&[d, e]), None, 4).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedNotUH);
        let w = r.witness_word.unwrap();
        assert!(w.len() >= 2);
        let f = family(&[d, e]);
        assert!(f.word_product(&w).trace().abs() <= 2.0 + 1e-12);
    }

    #[test]
    fn undetermined_when_budget_too_small() {
        // Two hyperbolic members whose eigendirections alternate around ℙ¹:
        // u(a), s(b), u(b), s(a). No arc separates them.
        let a = Mat2::diag(3.0, 1.0 / 3.0);
        let dir = |t: f64| [-t.cos(), t.sin()];
        let (u, s) = (dir(1.0), dir(0.5));
        let p = Mat2::new(u[0], s[0], u[1], s[1]);
        let b = p * Mat2::diag(3.0, 1.0 / 3.0) * p.inverse();
        let f = family(&[a, b]);
        let r = certify_family(&f, None, 1).unwrap();
        assert_ne!(r.verdict, Verdict::CertifiedUH);
        assert!(certify_family(&f, None, 0).is_err());
    }

    #[test]
    fn growth_examples() {
        assert_relative_eq!(
            min_growth_rate(&family(&[Mat2::diag(2.0, 0.5)]), 5).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            min_growth_rate(&family(&[ROT]), 5).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let free = product_family(&[(0.0, 0.0), (0.0, 0.0)], 0.0).unwrap();
        assert_eq!(free.members, vec![Mat2::new(-1.0, 0.0, 0.0, -1.0)]);
        assert_relative_eq!(min_growth_rate(&free, 6).unwrap(), 1.0, epsilon = 1e-12);
        let four = product_family(&[(1.0, 0.0), (1.0, 2.0)], 0.3).unwrap();
        assert!(matches!(min_growth_rate(&four, 11), Err(Error::Budget(_))));
        assert!(min_growth_rate(&four, 10).is_ok());
    }

    #[test]
    fn boundary_examples() {
        let d = boundary_diagnostics(&family(&[Mat2::new(1.0, 1.0, 0.0, 1.0)]), 3).unwrap();
        assert_eq!(d.parabolic_words[0], vec![0]);
        let d = boundary_diagnostics(&family(&[Mat2::IDENTITY]), 2).unwrap();
        assert_eq!(d.identity_words, vec![vec![0], vec![0, 0]]);
        let edge = product_family(&[(0.0, 0.0), (0.0, 0.0)], 2.0).unwrap();
        let d = boundary_diagnostics(&edge, 3).unwrap();
        assert_eq!(d.parabolic_words[0], vec![0]);
        let d = boundary_diagnostics(&family(&[Mat2::diag(2.0, 0.5)]), 4).unwrap();
        assert!(d.heteroclinic_triples.is_empty() && d.parabolic_words.is_empty());
    }

    #[test]
    fn heteroclinic_triple_detected() {
        // u(B) = slope 0 is fixed by A and equals s(A).
        let a = Mat2::diag(2.0, 0.5);
        let b = ROT * a * ROT.inverse();
        let d = boundary_diagnostics(&family(&[a, b]), 2).unwrap();
        assert!(d
            .heteroclinic_triples
            .iter()
            .any(|(i, j, k)| i == &vec![0] && j == &vec![1] && k == &vec![0]));
    }

    #[test]
    fn principal_cone_examples() {
        let cp = CanonicalParams::new(1.0, 1.4, 2.0).unwrap();
        let cone = principal_cone(&cp, 1.5).unwrap();
        let q = quad_products(&cp, 1.5).unwrap();
        for m in &q {
            let (u, s) = m.eigen_directions().unwrap();
            assert!(cone.contains(&u, true) && !cone.contains(&s, false));
            assert!(maps_strictly_inside(m, &cone, 0.0));
        }
        let free = CanonicalParams::new(0.0, 0.0, 0.0).unwrap();
        let cone = principal_cone(&free, 3.0).unwrap();
        let phi2 = 0.5 * (3.0 + 5f64.sqrt());
        assert!(cone.contains(&ProjPoint::from_slope(phi2).unwrap(), true));
        assert!(!cone.contains(&ProjPoint::from_slope(1.0 / phi2).unwrap(), false));
        assert!(matches!(
            principal_cone(&free, 0.0),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn coincidences_skip_identical_products() {
        let cp = CanonicalParams::new(0.0, 1.3, 0.5).unwrap();
        assert!(coincidence_check(&cp, -4.0).unwrap().is_empty());
        let cp = CanonicalParams::new(1.0, 1.4, 2.0).unwrap();
        for k in 0..20 {
            let e = 1.05 + 0.045 * k as f64;
            if uh_at_energy(&cp, e, 0.0).unwrap() {
                assert!(coincidence_check(&cp, e).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn scan_free_laplacian() {
        let rows = scan_energies(&[(0.0, 0.0)], -4.0, 4.0, 801, 6).unwrap();
        assert_eq!(rows.len(), 801);
        let step = 0.01;
        for row in &rows {
            let inside = row.energy.abs() <= 2.0;
            match row.report.verdict {
                Verdict::CertifiedNotUH => {
                    assert!(row.energy.abs() <= 2.0 + step, "{}", row.energy)
                }
                Verdict::CertifiedUH => assert!(row.energy.abs() >= 2.0 - step, "{}", row.energy),
                Verdict::Undetermined => assert!((row.energy.abs() - 2.0).abs() <= step),
            }
            let _ = inside;
        }
        assert!(matches!(
            scan_energies(&vec![(1.0, 0.0); 13], -1.0, 1.0, 3, 2),
            Err(Error::Budget(_))
        ));
        assert!(scan_energies(&[(0.0, 0.0)], 1.0, 1.0, 3, 2).is_err());
    }

    #[test]
    fn scan_matches_closed_form_for_period_two() {
        let cp = CanonicalParams::new(1.0, 1.4, 2.0).unwrap();
        let gaps = gap_intervals(&cp);
        let rows = scan_energies(&[(1.0, 0.0), (1.4, 2.0)], -4.0, 7.0, 401, 8).unwrap();
        let step = 11.0 / 400.0;
        for row in rows {
            let e = row.energy;
            let near_edge = gaps
                .iter()
                .any(|g| (g.lo - e).abs() <= step || (g.hi - e).abs() <= step);
            if near_edge {
                continue;
            }
            let in_gap = gaps.iter().any(|g| g.contains_open(e));
            let want = if in_gap {
                Verdict::CertifiedUH
            } else {
                Verdict::CertifiedNotUH
            };
            assert_eq!(row.report.verdict, want, "E = {e}");
        }
    }
}
