//! The real projective line ℙ¹, arcs and cones on it, and the projective
//! action of 2×2 matrices.
//!
//! A point `[x; y]` has slope `x / y` (`∞` for `y = 0`). Internally ℙ¹ is
//! navigated through an angle `θ ∈ [0, π)` chosen so that the slope increases
//! with `θ`: `θ = 0` is `∞`, `θ = π/2` is slope `0`, and slopes run from
//! `−∞` to `+∞` as `θ` sweeps `(0, π)`. Arcs are traversed in the direction
//! of increasing `θ`, i.e. of increasing slope, wrapping through `∞`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mat2::Mat2;

/// Tolerance for cross-product equality of projective points.
pub const POINT_TOL: f64 = 1e-10;
/// Angular slack used at arc endpoints.
const ANGLE_EPS: f64 = 1e-12;

/// Reduce an angle into `[0, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// A point of ℙ¹ in unit homogeneous coordinates with `y ≥ 0` (and `x = 1`
/// when `y = 0`).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProjPoint {
    x: f64,
    y: f64,
}

impl ProjPoint {
    pub const INFINITY: ProjPoint = ProjPoint { x: 1.0, y: 0.0 };

    pub fn from_homogeneous(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(invalid("projective coordinates must be finite"));
        }
        let n = x.hypot(y);
        if n == 0.0 {
            return Err(invalid("[0; 0] is not a projective point"));
        }
        Ok(Self::normalized(x / n, y / n))
    }

    fn normalized(x: f64, y: f64) -> Self {
        if y == 0.0 {
            ProjPoint::INFINITY
        } else if y < 0.0 {
            ProjPoint { x: -x, y: -y }
        } else {
            ProjPoint { x, y }
        }
    }

    /// `t ↦ [t; 1]`, with `±∞ ↦ [1; 0]`.
    pub fn from_slope(t: f64) -> Result<Self> {
        if t.is_nan() {
            return Err(invalid("slope is NaN"));
        }
        if t.is_infinite() {
            return Ok(ProjPoint::INFINITY);
        }
        Self::from_homogeneous(t, 1.0)
    }

    pub fn from_angle(theta: f64) -> Self {
        let t = wrap_angle(theta);
        Self::normalized(-t.cos(), t.sin())
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn is_infinity(&self) -> bool {
        self.y == 0.0
    }

    /// `x / y`, or `+∞` at the point at infinity.
    pub fn slope(&self) -> f64 {
        if self.y == 0.0 {
            f64::INFINITY
        } else {
            self.x / self.y
        }
    }

    /// Angle in `[0, π)`, increasing with the slope.
    pub fn angle(&self) -> f64 {
        wrap_angle(self.y.atan2(-self.x))
    }

    pub fn cross(&self, other: &ProjPoint) -> f64 {
        self.x * other.y - other.x * self.y
    }

    /// Angle between the two lines, in `[0, π/2]`.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        let dot = self.x * other.x + self.y * other.y;
        self.cross(other).abs().atan2(dot.abs())
    }
}

impl PartialEq for ProjPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cross(other).abs() <= POINT_TOL
    }
}

/// Projective action `[x; y] ↦ M [x; y]`.
pub fn act(m: &Mat2, p: &ProjPoint) -> ProjPoint {
    let [x, y] = m.apply([p.x, p.y]);
    let n = x.hypot(y);
    // M is invertible, so the image is never the zero vector.
    ProjPoint::normalized(x / n, y / n)
}

/// Counter-clockwise offset from `from` to `to`, in `[0, π)`.
pub fn ccw_offset(from: f64, to: f64) -> f64 {
    wrap_angle(to - from)
}

/// An angular interval `[start, start + len]` on the `θ` circle; `len` may
/// be zero (a single point).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularSpan {
    pub start: f64,
    pub len: f64,
}

impl AngularSpan {
    pub fn point(theta: f64) -> Self {
        AngularSpan {
            start: wrap_angle(theta),
            len: 0.0,
        }
    }

    pub fn end(&self) -> f64 {
        wrap_angle(self.start + self.len)
    }

    pub fn to_arc(&self) -> Result<Arc> {
        Arc::from_angles(self.start, self.len)
    }
}

/// Smallest span covering every input span: the complement of the widest
/// uncovered gap. `None` when the inputs cover the whole circle.
pub fn smallest_enclosing_span(spans: &[AngularSpan]) -> Option<AngularSpan> {
    if spans.is_empty() {
        return None;
    }
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(spans.len() + 2);
    for s in spans {
        if s.len >= PI {
            return None;
        }
        let a = wrap_angle(s.start);
        let b = a + s.len;
        if b > PI {
            pieces.push((a, PI));
            pieces.push((0.0, b - PI));
        } else {
            pieces.push((a, b));
        }
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
    for (a, b) in pieces {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    // Gaps between consecutive merged pieces, including the wrap-around one.
    let mut best: Option<(f64, f64)> = None; // (gap length, gap end = hull start)
    for k in 0..merged.len() {
        let gap_start = merged[k].1;
        let (gap_end, gap_len) = if k + 1 < merged.len() {
            (merged[k + 1].0, merged[k + 1].0 - gap_start)
        } else {
            (merged[0].0, merged[0].0 + PI - gap_start)
        };
        if gap_len > 0.0 && best.is_none_or(|(l, _)| gap_len > l) {
            best = Some((gap_len, gap_end));
        }
    }
    best.map(|(gap_len, hull_start)| AngularSpan {
        start: wrap_angle(hull_start),
        len: PI - gap_len,
    })
}

/// An open arc of ℙ¹ traversed from `lo` to `hi` in the direction of
/// increasing slope. Its length lies strictly between `0` and `π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub lo: ProjPoint,
    pub hi: ProjPoint,
}

impl Arc {
    pub fn new(lo: ProjPoint, hi: ProjPoint) -> Result<Self> {
        let len = ccw_offset(lo.angle(), hi.angle());
        if lo == hi || len <= 0.0 || len >= PI {
            return Err(invalid("arc endpoints must be distinct points of ℙ¹"));
        }
        Ok(Arc { lo, hi })
    }

    pub fn from_slopes(lo: f64, hi: f64) -> Result<Self> {
        Arc::new(ProjPoint::from_slope(lo)?, ProjPoint::from_slope(hi)?)
    }

    pub fn from_angles(start: f64, len: f64) -> Result<Self> {
        if !(len > 0.0 && len < PI) {
            return Err(invalid(format!("arc length {len} outside (0, π)")));
        }
        Arc::new(
            ProjPoint::from_angle(start),
            ProjPoint::from_angle(start + len),
        )
    }

    pub fn start(&self) -> f64 {
        self.lo.angle()
    }

    pub fn length(&self) -> f64 {
        ccw_offset(self.lo.angle(), self.hi.angle())
    }

    pub fn span(&self) -> AngularSpan {
        AngularSpan {
            start: self.start(),
            len: self.length(),
        }
    }

    pub fn midpoint(&self) -> ProjPoint {
        ProjPoint::from_angle(self.start() + 0.5 * self.length())
    }

    /// Membership in the arc; `strict` excludes the endpoints.
    pub fn contains(&self, p: &ProjPoint, strict: bool) -> bool {
        let len = self.length();
        let off = ccw_offset(self.start(), p.angle());
        if strict {
            off > ANGLE_EPS && off < len - ANGLE_EPS && *p != self.lo && *p != self.hi
        } else {
            off <= len + ANGLE_EPS || off >= PI - ANGLE_EPS || *p == self.lo || *p == self.hi
        }
    }

    /// Clearance of `inner` inside `self`: the smaller of the two angular
    /// gaps between matching endpoints, or a negative number when `inner`
    /// is not contained.
    pub fn clearance_of(&self, inner: &Arc) -> f64 {
        let len = self.length();
        let off = ccw_offset(self.start(), inner.start());
        let end = off + inner.length();
        if end > len || off >= len {
            return -1.0;
        }
        off.min(len - end)
    }
}

/// Membership test for an oriented arc.
pub fn arc_contains(a: &Arc, p: &ProjPoint, strict: bool) -> bool {
    a.contains(p, strict)
}

/// Image of an arc under the projective action. An interior witness point
/// fixes which of the two arcs between the endpoint images is the image.
pub fn image_arc(m: &Mat2, a: &Arc) -> Result<Arc> {
    let lo = act(m, &a.lo);
    let hi = act(m, &a.hi);
    let w = act(m, &a.midpoint());
    let forward = Arc::new(lo, hi)?;
    if forward.contains(&w, false) {
        Ok(forward)
    } else {
        Arc::new(hi, lo)
    }
}

/// A finite union of pairwise-disjoint arcs whose closure is a proper
/// subset of ℙ¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub arcs: Vec<Arc>,
}

impl Cone {
    pub fn new(arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(invalid("a cone needs at least one arc"));
        }
        let total: f64 = arcs.iter().map(Arc::length).sum();
        if total >= PI {
            return Err(invalid("cone closure must be a proper subset of ℙ¹"));
        }
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                if a.contains(&b.lo, false) || b.contains(&a.lo, false) {
                    return Err(invalid("cone arcs must be pairwise disjoint"));
                }
            }
        }
        Ok(Cone { arcs })
    }

    pub fn single(arc: Arc) -> Self {
        Cone { arcs: vec![arc] }
    }

    pub fn is_principal(&self) -> bool {
        self.arcs.len() == 1
    }

    pub fn contains(&self, p: &ProjPoint, strict: bool) -> bool {
        self.arcs.iter().any(|a| a.contains(p, strict))
    }
}

/// Smallest angular clearance with which `M` maps the closure of `cone`
/// into `cone`. Negative when some image arc leaves the cone.
pub fn containment_clearance(m: &Mat2, cone: &Cone) -> f64 {
    let mut worst = f64::INFINITY;
    for a in &cone.arcs {
        let img = match image_arc(m, a) {
            Ok(img) => img,
            Err(_) => return -1.0,
        };
        let best = cone
            .arcs
            .iter()
            .map(|outer| outer.clearance_of(&img))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.min(best);
    }
    worst
}

/// Whether `M` maps the closure of every arc of `cone` into `cone` with at
/// least `margin` radians to spare (and strictly, when `margin = 0`).
pub fn maps_strictly_inside(m: &Mat2, cone: &Cone, margin: f64) -> bool {
    let c = containment_clearance(m, cone);
    c > 0.0 && c >= margin
}

/// The connected component of `ℙ¹ \ stable` that contains every point of
/// `unstable`, expressed as an angular frame starting at a stable point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatingFrame {
    /// Angle of the stable point bounding the frame on the left.
    pub start: f64,
    /// Angular length up to the next stable point.
    pub len: f64,
}

impl SeparatingFrame {
    /// Locate the stable-free component holding all `unstable` angles.
    pub fn locate(unstable: &[f64], stable: &[f64]) -> Result<Self> {
        if unstable.is_empty() {
            return Err(invalid("no unstable directions"));
        }
        if stable.is_empty() {
            // Only unstable points: use the widest gap between them.
            let spans: Vec<_> = unstable.iter().map(|&t| AngularSpan::point(t)).collect();
            let hull = smallest_enclosing_span(&spans)
                .ok_or_else(|| Error::ConeConstruction("directions cover ℙ¹".into()))?;
            let free = PI - hull.len;
            return Ok(SeparatingFrame {
                start: wrap_angle(hull.start - 0.5 * free),
                len: PI,
            });
        }
        let mut s: Vec<f64> = stable.iter().map(|&t| wrap_angle(t)).collect();
        s.sort_by(f64::total_cmp);
        let u0 = wrap_angle(unstable[0]);
        // Stable point immediately before u0 in the counter-clockwise order.
        let left = s
            .iter()
            .copied()
            .min_by(|a, b| ccw_offset(*a, u0).total_cmp(&ccw_offset(*b, u0)))
            .expect("non-empty");
        let right = s
            .iter()
            .copied()
            .map(|t| ccw_offset(left, t))
            .filter(|&o| o > ANGLE_EPS)
            .fold(PI, f64::min);
        let frame = SeparatingFrame {
            start: left,
            len: right,
        };
        for &u in unstable {
            let o = frame.offset(u);
            if !(o > ANGLE_EPS && o < frame.len - ANGLE_EPS) {
                return Err(Error::ConeConstruction(
                    "unstable directions are separated by stable ones".into(),
                ));
            }
        }
        Ok(frame)
    }

    pub fn offset(&self, theta: f64) -> f64 {
        ccw_offset(self.start, theta)
    }

    /// Offsets `[lo, hi]` spanned by `points` inside the frame.
    pub fn hull(&self, points: &[f64]) -> (f64, f64) {
        points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
                let o = self.offset(t);
                (lo.min(o), hi.max(o))
            })
    }

    /// Arc covering offsets `[lo, hi]`, widened on each side by `pad` times
    /// the remaining distance to the frame boundary.
    pub fn padded_arc(&self, lo: f64, hi: f64, pad: f64) -> Result<Arc> {
        let a = lo * (1.0 - pad);
        let b = hi + pad * (self.len - hi);
        Arc::from_angles(self.start + a, b - a)
    }
}

/// Single arc containing every `unstable` point and no `stable` point,
/// widened by half the distance to the nearest stable point on each side.
pub fn separating_arc(unstable: &[ProjPoint], stable: &[ProjPoint], pad: f64) -> Result<Arc> {
    let u: Vec<f64> = unstable.iter().map(ProjPoint::angle).collect();
    let s: Vec<f64> = stable.iter().map(ProjPoint::angle).collect();
    let frame = SeparatingFrame::locate(&u, &s)?;
    let (lo, hi) = frame.hull(&u);
    frame.padded_arc(lo, hi, pad)
}
