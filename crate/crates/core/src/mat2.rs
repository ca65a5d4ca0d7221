//! Real 2×2 unimodular matrices: Schrödinger transfer matrices, their
//! products, hyperbolicity and eigendirections on the projective line.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::bandmodel::CanonicalParams;
use crate::error::{invalid, Error, Result};
use crate::projline::ProjPoint;

/// Relative determinant tolerance for freshly built matrices.
pub const DET_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Largest absolute entry, used to scale tolerances.
    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    /// `|det − 1| ≤ rel_tol · max(1, max_abs²)`.
    pub fn is_unimodular(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().powi(2).max(1.0);
        (self.det() - 1.0).abs() <= rel_tol * scale
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self) -> Mat2 {
        let d = self.det();
        Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// Operator (spectral) norm from the closed-form 2×2 singular values.
    pub fn operator_norm(&self) -> f64 {
        let p = (self.a11 + self.a22).hypot(self.a12 - self.a21);
        let q = (self.a11 - self.a22).hypot(self.a12 + self.a21);
        0.5 * (p + q)
    }

    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        (self.a11 - other.a11).abs() <= tol
            && (self.a12 - other.a12).abs() <= tol
            && (self.a21 - other.a21).abs() <= tol
            && (self.a22 - other.a22).abs() <= tol
    }

    /// `|tr| > 2 + tol`. Parabolic matrices (`|tr| = 2`) are not hyperbolic.
    pub fn is_hyperbolic(&self, tol: f64) -> bool {
        self.trace().abs() > 2.0 + tol
    }

    /// Dominant eigenvalue carrying the sign of the trace.
    pub fn signed_spectral_radius(&self) -> Result<SignedRadius> {
        let tau = self.trace();
        if !self.is_hyperbolic(0.0) {
            return Err(Error::NotHyperbolic { trace: tau });
        }
        let a = tau.abs();
        // (|τ|−2)(|τ|+2) avoids cancellation in τ²−4 near the parabolic edge.
        let disc = ((a - 2.0) * (a + 2.0)).sqrt();
        Ok(SignedRadius(tau.signum() * 0.5 * (a + disc)))
    }

    /// Unstable and stable eigendirections `(u, s)`.
    ///
    /// The eigenvector for eigenvalue `μ` is read from whichever row of
    /// `M − μI` is better conditioned: the second row gives `[μ − a22; a21]`,
    /// the first `[a12; μ − a11]`.
    pub fn eigen_directions(&self) -> Result<(ProjPoint, ProjPoint)> {
        let r = self.signed_spectral_radius()?;
        let u = self.eigenvector(r.value())?;
        let s = self.eigenvector(r.inverse())?;
        Ok((u, s))
    }

    fn eigenvector(&self, mu: f64) -> Result<ProjPoint> {
        let second = [mu - self.a22, self.a21];
        let first = [self.a12, mu - self.a11];
        let n2 = second[0].hypot(second[1]);
        let n1 = first[0].hypot(first[1]);
        let floor = 1e-300_f64.max(1e-15 * self.max_abs());
        let v = if n2 >= n1 { second } else { first };
        if n2.max(n1) <= floor {
            return Err(Error::DegenerateRow);
        }
        ProjPoint::from_homogeneous(v[0], v[1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl Mul for &Mat2 {
    type Output = Mat2;

    fn mul(self, r: &Mat2) -> Mat2 {
        *self * *r
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

/// One-site transfer matrix `[[E − v, −1], [1, 0]]`.
pub fn transfer_matrix(energy: f64, potential: f64) -> Result<Mat2> {
    if !energy.is_finite() || !potential.is_finite() {
        return Err(invalid(format!(
            "transfer matrix needs finite inputs, got E={energy}, v={potential}"
        )));
    }
    Ok(Mat2::new(energy - potential, -1.0, 1.0, 0.0))
}

/// Signed spectral radius of a hyperbolic unimodular matrix: `|r| > 1`,
/// `sign(r) = sign(tr)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedRadius(f64);

impl SignedRadius {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn inverse(self) -> f64 {
        1.0 / self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EigKind {
    Unstable,
    Stable,
}

/// One of the eight eigendirections `u_1..u_4`, `s_1..s_4` of the
/// two-step products `AC, AD, BC, BD`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EigvecId {
    pub kind: EigKind,
    /// Product index in `1..=4`.
    pub index: usize,
}

impl EigvecId {
    pub fn new(kind: EigKind, index: usize) -> Result<Self> {
        if !(1..=4).contains(&index) {
            return Err(invalid(format!("product index {index} not in 1..=4")));
        }
        Ok(EigvecId { kind, index })
    }

    pub fn all() -> impl Iterator<Item = EigvecId> {
        [EigKind::Unstable, EigKind::Stable]
            .into_iter()
            .flat_map(|kind| (1..=4).map(move |index| EigvecId { kind, index }))
    }

    pub fn label(&self) -> String {
        match self.kind {
            EigKind::Unstable => format!("u{}", self.index),
            EigKind::Stable => format!("s{}", self.index),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Amplitude {
    Lambda0,
    Lambda1,
}

impl Amplitude {
    pub fn label(&self) -> &'static str {
        match self {
            Amplitude::Lambda0 => "lambda0",
            Amplitude::Lambda1 => "lambda1",
        }
    }
}

/// Closed-form partial derivative of an eigendirection slope with respect
/// to one of the amplitudes, at the supplied parameters.
///
/// Product `i` is `X_a · Y_b` with even value `a ∈ {0, λ0}` and odd value
/// `b ∈ {c1, c1 + λ1}`, so `u = (1 + r)/(E − b)` and `s = (1 + 1/r)/(E − b)`
/// with `τ = (E − a)(E − b) − 2` and `dr/dτ = r/(r − 1/r)`. Entries that do
/// not depend on the amplitude are returned as exact zeros.
pub fn eigvec_partials(
    which: EigvecId,
    wrt: Amplitude,
    energy: f64,
    params: &CanonicalParams,
) -> Result<f64> {
    if !energy.is_finite() {
        return Err(invalid("energy must be finite"));
    }
    let uses_lambda0 = which.index >= 3;
    let uses_lambda1 = which.index.is_multiple_of(2);
    let a = if uses_lambda0 { params.lambda0 } else { 0.0 };
    let b = if uses_lambda1 {
        params.c1 + params.lambda1
    } else {
        params.c1
    };
    let eb = energy - b;
    if eb.abs() < 1e-12 {
        return Err(Error::SingularPoint(format!(
            "E = {energy} coincides with odd-site value {b}"
        )));
    }
    let ea = energy - a;
    let tau = ea * eb - 2.0;
    if tau.abs() <= 2.0 {
        return Err(Error::NotHyperbolic { trace: tau });
    }
    let (dtau, db) = match wrt {
        Amplitude::Lambda0 if uses_lambda0 => (-eb, 0.0),
        Amplitude::Lambda1 if uses_lambda1 => (-ea, 1.0),
        _ => return Ok(0.0),
    };
    let r = Mat2::new(ea * eb - 1.0, -ea, eb, -1.0)
        .signed_spectral_radius()?
        .value();
    let dr = r / (r - 1.0 / r) * dtau;
    let value = match which.kind {
        EigKind::Unstable => dr / eb + (1.0 + r) * db / (eb * eb),
        EigKind::Stable => -dr / (r * r * eb) + (1.0 + 1.0 / r) * db / (eb * eb),
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FREE_A2_RADIUS: f64 = 6.854_101_966_249_685; // (7 + 3√5)/2

    #[test]
    fn transfer_matrix_examples() {
        assert_eq!(
            transfer_matrix(0.0, 0.0).unwrap(),
            Mat2::new(0.0, -1.0, 1.0, 0.0)
        );
        assert_eq!(
            transfer_matrix(1.0, 0.0).unwrap(),
            Mat2::new(1.0, -1.0, 1.0, 0.0)
        );
        assert_eq!(
            transfer_matrix(3.0, 2.0).unwrap(),
            Mat2::new(1.0, -1.0, 1.0, 0.0)
        );
        assert!(matches!(
            transfer_matrix(f64::NAN, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(transfer_matrix(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn products() {
        let m = Mat2::new(3.0, -1.0, 1.0, 0.0);
        assert_eq!(Mat2::IDENTITY * m, m);
        assert_eq!(m * m, Mat2::new(8.0, -3.0, 3.0, -1.0));
        let ac = transfer_matrix(0.0, 0.0).unwrap() * transfer_matrix(0.0, 2.0).unwrap();
        assert_eq!(ac, Mat2::new(-1.0, 0.0, -2.0, -1.0));
        assert_eq!(ac.trace(), 0.0 * (0.0 - 2.0) - 2.0);
    }

    #[test]
    fn hyperbolicity_classes() {
        assert!(Mat2::diag(2.0, 0.5).is_hyperbolic(0.0));
        assert!(!Mat2::new(0.0, -1.0, 1.0, 0.0).is_hyperbolic(0.0));
        assert!(!Mat2::new(1.0, 1.0, 0.0, 1.0).is_hyperbolic(0.0));
        assert!(!Mat2::diag(2.0, 0.5).is_hyperbolic(0.6));
    }

    #[test]
    fn signed_radius_examples() {
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        let m = Mat2::new(3.0, -1.0, 1.0, 0.0);
        assert_relative_eq!(
            m.signed_spectral_radius().unwrap().value(),
            phi2,
            epsilon = 1e-14
        );
        let neg = Mat2::new(-3.0, -1.0, 1.0, 0.0);
        assert_relative_eq!(
            neg.signed_spectral_radius().unwrap().value(),
            -phi2,
            epsilon = 1e-14
        );
        let a2 = m * m;
        assert_eq!(a2.trace(), 7.0);
        assert_relative_eq!(
            a2.signed_spectral_radius().unwrap().value(),
            FREE_A2_RADIUS,
            epsilon = 1e-13
        );
        assert!(matches!(
            Mat2::IDENTITY.signed_spectral_radius(),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn eigen_directions_examples() {
        let (u, s) = Mat2::diag(2.0, 0.5).eigen_directions().unwrap();
        assert!(u.is_infinity());
        assert_eq!(s.slope(), 0.0);

        let a = transfer_matrix(3.0, 0.0).unwrap();
        let (u, _) = (a * a).eigen_directions().unwrap();
        assert_relative_eq!(u.slope(), (1.0 + FREE_A2_RADIUS) / 3.0, epsilon = 1e-12);
        assert_relative_eq!(u.slope(), 2.618_033_988_749_895, epsilon = 1e-12);

        let ac = transfer_matrix(5.0, 0.0).unwrap() * transfer_matrix(5.0, 2.0).unwrap();
        assert_eq!(ac.trace(), 13.0);
        let r = (13.0 + 165f64.sqrt()) / 2.0;
        let (u, _) = ac.eigen_directions().unwrap();
        assert_relative_eq!(u.slope(), (1.0 + r) / 3.0, epsilon = 1e-12);
    }

    fn residual(m: &Mat2, p: &ProjPoint, mu: f64) -> f64 {
        let v = [p.x(), p.y()];
        let w = m.apply(v);
        (w[0] - mu * v[0]).hypot(w[1] - mu * v[1])
    }

    fn hyperbolic_sl2() -> impl Strategy<Value = Mat2> {
        (-4.0..4.0f64, -4.0..4.0f64, -4.0..4.0f64)
            .prop_filter("a11 away from 0", |(a, _, _)| a.abs() > 0.2)
            .prop_map(|(a, b, c)| Mat2::new(a, b, c, (1.0 + b * c) / a))
            .prop_filter("hyperbolic", |m| m.trace().abs() > 2.05)
    }

    proptest! {
        #[test]
        fn transfer_det_is_exactly_one(e in -1e3..1e3f64, v in -1e3..1e3f64) {
            prop_assert_eq!(transfer_matrix(e, v).unwrap().det(), 1.0);
        }

        #[test]
        fn radius_solves_characteristic_polynomial(m in hyperbolic_sl2()) {
            let tau = m.trace();
            let r = m.signed_spectral_radius().unwrap().value();
            prop_assert!((r * r - tau * r + 1.0).abs() <= 1e-10 * r * r);
            prop_assert!(r.abs() > 1.0);
            prop_assert_eq!(r > 0.0, tau > 2.0);
            prop_assert_eq!(r < 0.0, tau < -2.0);
        }

        #[test]
        fn eigendirections_have_small_residual(m in hyperbolic_sl2()) {
            let r = m.signed_spectral_radius().unwrap();
            let (u, s) = m.eigen_directions().unwrap();
            let scale = m.max_abs().max(1.0);
            prop_assert!(residual(&m, &u, r.value()) < 1e-9 * scale);
            prop_assert!(residual(&m, &s, r.inverse()) < 1e-9 * scale);
            prop_assert!(u.distance(&s) > 1e-9);
        }

        #[test]
        fn long_products_stay_unimodular(es in proptest::collection::vec(-3.0..3.0f64, 1..40)) {
            let p = es.iter().fold(Mat2::IDENTITY, |acc, &e| transfer_matrix(e, 0.0).unwrap() * acc);
            prop_assert!(p.is_unimodular(1e-10));
        }
    }

    /// Central finite difference of the slope of the requested eigendirection,
    /// read from a freshly built product `X_a · Y_b` and the generic
    /// eigenvector routine.
    fn fd_partial(which: EigvecId, wrt: Amplitude, e: f64, p: &CanonicalParams) -> f64 {
        let h = 1e-6;
        let slope_at = |delta: f64| {
            let (mut l0, mut l1) = (p.lambda0, p.lambda1);
            match wrt {
                Amplitude::Lambda0 => l0 += delta,
                Amplitude::Lambda1 => l1 += delta,
            }
            let a = if which.index >= 3 { l0 } else { 0.0 };
            let b = if which.index.is_multiple_of(2) {
                p.c1 + l1
            } else {
                p.c1
            };
            let m = transfer_matrix(e, a).unwrap() * transfer_matrix(e, b).unwrap();
            let (u, s) = m.eigen_directions().unwrap();
            match which.kind {
                EigKind::Unstable => u.slope(),
                EigKind::Stable => s.slope(),
            }
        };
        (slope_at(h) - slope_at(-h)) / (2.0 * h)
    }

    #[test]
    fn structural_zero_partials() {
        let p = CanonicalParams::new(0.7, 1.3, 0.4).unwrap();
        for kind in [EigKind::Unstable, EigKind::Stable] {
            let id1 = EigvecId::new(kind, 1).unwrap();
            assert_eq!(
                eigvec_partials(id1, Amplitude::Lambda0, 6.0, &p).unwrap(),
                0.0
            );
            assert_eq!(
                eigvec_partials(id1, Amplitude::Lambda1, 6.0, &p).unwrap(),
                0.0
            );
            let id2 = EigvecId::new(kind, 2).unwrap();
            assert_eq!(
                eigvec_partials(id2, Amplitude::Lambda0, 6.0, &p).unwrap(),
                0.0
            );
            let id3 = EigvecId::new(kind, 3).unwrap();
            assert_eq!(
                eigvec_partials(id3, Amplitude::Lambda1, 6.0, &p).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn u3_partial_at_zero_lambda0_matches_difference_quotient() {
        let p = CanonicalParams::new(0.0, 0.5, 0.0).unwrap();
        let id = EigvecId::new(EigKind::Unstable, 3).unwrap();
        let closed = eigvec_partials(id, Amplitude::Lambda0, 6.0, &p).unwrap();
        let fd = fd_partial(id, Amplitude::Lambda0, 6.0, &p);
        assert_relative_eq!(closed, fd, max_relative = 1e-5);
        // one-sided quotient (u3(λ0 = h) − u1)/h
        let h = 1e-7;
        let u_at = |l0: f64| {
            let m = transfer_matrix(6.0, l0).unwrap() * transfer_matrix(6.0, 0.0).unwrap();
            m.eigen_directions().unwrap().0.slope()
        };
        assert_relative_eq!(closed, (u_at(h) - u_at(0.0)) / h, max_relative = 1e-4);
    }

    #[test]
    fn singular_and_elliptic_points_are_rejected() {
        let p = CanonicalParams::new(1.0, 1.4, 2.0).unwrap();
        let u1 = EigvecId::new(EigKind::Unstable, 1).unwrap();
        let u2 = EigvecId::new(EigKind::Unstable, 2).unwrap();
        assert!(matches!(
            eigvec_partials(u1, Amplitude::Lambda0, 2.0, &p),
            Err(Error::SingularPoint(_))
        ));
        assert!(matches!(
            eigvec_partials(u2, Amplitude::Lambda1, 3.4, &p),
            Err(Error::SingularPoint(_))
        ));
        assert!(matches!(
            eigvec_partials(u1, Amplitude::Lambda0, 2.5, &p),
            Err(Error::NotHyperbolic { .. })
        ));
        assert!(EigvecId::new(EigKind::Stable, 5).is_err());
    }

    #[test]
    fn partials_match_finite_differences_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 100 {
            let p = CanonicalParams::new(
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
            )
            .unwrap();
            let e: f64 = rng.random_range(-8.0..12.0);
            let (c1, c1l1) = (p.c1, p.c1 + p.lambda1);
            if (e - c1).abs() <= 0.1 || (e - c1l1).abs() <= 0.1 {
                continue;
            }
            let ok = [(0.0, c1), (0.0, c1l1), (p.lambda0, c1), (p.lambda0, c1l1)]
                .iter()
                .all(|(a, b)| ((e - a) * (e - b) - 2.0).abs() > 2.1);
            if !ok {
                continue;
            }
            for id in EigvecId::all() {
                for wrt in [Amplitude::Lambda0, Amplitude::Lambda1] {
                    let closed = eigvec_partials(id, wrt, e, &p).unwrap();
                    if closed == 0.0 {
                        continue;
                    }
                    let fd = fd_partial(id, wrt, e, &p);
                    let rel = (closed - fd).abs() / closed.abs().max(1e-8);
                    assert!(
                        rel < 1e-5,
                        "{} d/d{} at E={e}, {p:?}: {closed} vs {fd}",
                        id.label(),
                        wrt.label()
                    );
                }
            }
            checked += 1;
        }
    }
}
