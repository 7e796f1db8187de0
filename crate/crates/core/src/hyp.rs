//! Poincaré-disk primitives: SU(1,1) isometries, distances, geodesic chords,
//! crossing predicates and boundary linking.
//!
//! Everything here works at curvature -1; [`CurvatureScale`] is the single
//! place where reported lengths pick up the 1/sqrt(kappa) factor.

use crate::error::Error;
use crate::Result;
use num_complex::Complex64 as C;

/// Determinant drift allowed after renormalization.
pub const DET_TOL: f64 = 1e-12;
/// Trace tolerance separating elliptic / parabolic / hyperbolic.
pub const CLASS_TOL: f64 = 1e-9;
/// Angular separation below which a boundary pair is degenerate.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Crossing angles closer than this to 0 or pi are flagged degenerate.
pub const TANGENCY_TOL: f64 = 1e-7;
/// Hyperbolic distance below which a crossing point is snapped to a chord end.
pub const ENDPOINT_SNAP: f64 = 1e-9;

const TWO_PI: f64 = std::f64::consts::TAU;

fn norm_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TWO_PI);
    if r == TWO_PI {
        0.0
    } else {
        r
    }
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    pub z: C,
}

impl DiskPoint {
    pub fn new(z: C) -> Result<Self> {
        let m = z.norm();
        if m < 1.0 - 1e-12 {
            Ok(Self { z })
        } else {
            Err(Error::PointOutsideDisk { modulus: m })
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(C::new(re, im))
    }

    pub const ORIGIN: DiskPoint = DiskPoint { z: C::new(0.0, 0.0) };
}

/// Hyperbolic distance at kappa = 1: 2 artanh |(p-q)/(1 - conj(p) q)|.
pub fn dist(p: DiskPoint, q: DiskPoint) -> f64 {
    let num = (p.z - q.z).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (C::new(1.0, 0.0) - p.z.conj() * q.z).norm();
    2.0 * (num / den).atanh()
}

/// Reported-length scaling for constant curvature -kappa.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CurvatureScale {
    kappa: f64,
}

impl CurvatureScale {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa.is_finite() {
            Ok(Self { kappa })
        } else {
            Err(Error::InvalidConfig(format!("kappa must be positive, got {kappa}")))
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// kappa-scaled length from an internal (kappa = 1) length.
    pub fn length(&self, internal: f64) -> f64 {
        internal / self.kappa.sqrt()
    }

    /// Internal (kappa = 1) length from a reported length.
    pub fn internal(&self, reported: f64) -> f64 {
        reported * self.kappa.sqrt()
    }

    /// kappa-scaled area from an internal area.
    pub fn area(&self, internal: f64) -> f64 {
        internal / self.kappa
    }
}

/// Classification of an isometry by |trace|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Orientation-preserving isometry of the disk in SU(1,1) form:
/// z -> (a z + b) / (conj(b) z + conj(a)), with |a|^2 - |b|^2 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub a: C,
    pub b: C,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: C::new(1.0, 0.0),
        b: C::new(0.0, 0.0),
    };

    pub fn det(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Rescale so the determinant is exactly 1 again.
    pub fn renormalized(self) -> Isometry {
        let d = self.det();
        debug_assert!(d > 0.0, "SU(1,1) determinant collapsed: {d}");
        let s = 1.0 / d.sqrt();
        Isometry {
            a: self.a * s,
            b: self.b * s,
        }
    }

    /// self after other (matrix product), renormalized.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
        .renormalized()
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Trace of the SU(1,1) matrix; real by construction.
    pub fn tr(&self) -> f64 {
        2.0 * self.a.re
    }

    /// Möbius action on an arbitrary complex number (valid on the closed disk).
    pub fn apply_z(&self, z: C) -> C {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    pub fn apply(&self, p: DiskPoint) -> Result<DiskPoint> {
        DiskPoint::new(self.apply_z(p.z))
    }

    /// Action on a boundary angle.
    pub fn apply_angle(&self, theta: f64) -> f64 {
        let w = self.apply_z(C::from_polar(1.0, theta));
        norm_angle(w.arg())
    }

    /// Max-norm deviation from +/-identity (whichever sign is closer).
    pub fn deviation_from_identity(&self) -> f64 {
        let plus = (self.a - C::new(1.0, 0.0)).norm().max(self.b.norm());
        let minus = (self.a + C::new(1.0, 0.0)).norm().max(self.b.norm());
        plus.min(minus)
    }

    pub fn classify(&self) -> IsoClass {
        if self.deviation_from_identity() <= CLASS_TOL {
            return IsoClass::Identity;
        }
        let t = self.tr().abs();
        if t < 2.0 - CLASS_TOL {
            IsoClass::Elliptic
        } else if t <= 2.0 + CLASS_TOL {
            IsoClass::Parabolic
        } else {
            IsoClass::Hyperbolic
        }
    }

    /// Translation length at kappa = 1: 2 arccosh(|tr|/2). Hyperbolic only.
    pub fn translation_length(&self) -> Result<f64> {
        match self.classify() {
            IsoClass::Hyperbolic => Ok(2.0 * (self.tr().abs() / 2.0).acosh()),
            _ => Err(Error::NotHyperbolic { trace: self.tr() }),
        }
    }

    /// Repelling/attracting fixed points on the circle. Hyperbolic only.
    pub fn axis(&self) -> Result<BoundaryPair> {
        if self.classify() != IsoClass::Hyperbolic {
            return Err(Error::NotHyperbolic { trace: self.tr() });
        }
        let ar = self.a.re;
        let ai = self.a.im;
        let s = (ar * ar - 1.0).sqrt();
        let cb = self.b.conj();
        let zp = (C::new(0.0, ai) + C::new(s, 0.0)) / cb;
        let zm = (C::new(0.0, ai) - C::new(s, 0.0)) / cb;
        let (att, rep) = if ar > 0.0 { (zp, zm) } else { (zm, zp) };
        BoundaryPair::new(norm_angle(rep.arg()), norm_angle(att.arg()))
    }

    /// Hyperbolic translation along the ray at `direction` by `length` > 0.
    pub fn translation(direction: f64, length: f64) -> Isometry {
        Isometry {
            a: C::new((length / 2.0).cosh(), 0.0),
            b: C::from_polar((length / 2.0).sinh(), direction),
        }
    }

    /// Rotation about the origin by `angle`.
    pub fn rotation(angle: f64) -> Isometry {
        Isometry {
            a: C::from_polar(1.0, angle / 2.0),
            b: C::new(0.0, 0.0),
        }
    }

    /// The isometry sending `p` to the origin (and the origin to -p).
    pub fn point_to_origin(p: DiskPoint) -> Isometry {
        let lam = 1.0 / (1.0 - p.z.norm_sqr()).sqrt();
        Isometry {
            a: C::new(lam, 0.0),
            b: -p.z * lam,
        }
    }

    /// Conjugate an SL(2,R) upper-half-plane matrix [[a,b],[c,d]] into disk form.
    pub fn from_uhp(m: [[f64; 2]; 2]) -> Isometry {
        let [[a, b], [c, d]] = m;
        Isometry {
            a: C::new((a + d) / 2.0, (b - c) / 2.0),
            b: C::new((a - d) / 2.0, -(b + c) / 2.0),
        }
        .renormalized()
    }
}

/// Repelling and attracting boundary endpoints of an oriented complete geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPair {
    pub rep: f64,
    pub att: f64,
}

impl BoundaryPair {
    pub fn new(rep: f64, att: f64) -> Result<Self> {
        let rep = norm_angle(rep);
        let att = norm_angle(att);
        let sep = circular_separation(rep, att);
        if sep <= BOUNDARY_TOL {
            return Err(Error::DegenerateBoundaryPair { separation: sep });
        }
        Ok(Self { rep, att })
    }

    pub fn reversed(&self) -> BoundaryPair {
        BoundaryPair {
            rep: self.att,
            att: self.rep,
        }
    }

    /// Same complete geodesic, either orientation, within `tol` on both angles.
    pub fn same_geodesic(&self, other: &BoundaryPair, tol: f64) -> bool {
        let fwd = circular_separation(self.rep, other.rep) <= tol
            && circular_separation(self.att, other.att) <= tol;
        let bwd = circular_separation(self.rep, other.att) <= tol
            && circular_separation(self.att, other.rep) <= tol;
        fwd || bwd
    }

    /// Image under an isometry (Möbius maps preserve the circle).
    pub fn mapped(&self, g: &Isometry) -> BoundaryPair {
        BoundaryPair {
            rep: g.apply_angle(self.rep),
            att: g.apply_angle(self.att),
        }
    }
}

pub fn circular_separation(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// True iff the endpoints of `b` separate the endpoints of `a` on the circle,
/// i.e. the complete geodesics cross exactly once.
pub fn boundary_linked(a: &BoundaryPair, b: &BoundaryPair) -> Result<bool> {
    let pts = [a.rep, a.att, b.rep, b.att];
    for i in 0..4 {
        for j in (i + 1)..4 {
            let sep = circular_separation(pts[i], pts[j]);
            if sep <= BOUNDARY_TOL {
                return Err(Error::DegenerateBoundaryPair { separation: sep });
            }
        }
    }
    let arc = (a.att - a.rep).rem_euclid(TWO_PI);
    let inside = |t: f64| (t - a.rep).rem_euclid(TWO_PI) < arc;
    Ok(inside(b.rep) != inside(b.att))
}

// --- Klein-model helpers -----------------------------------------------------
//
// The Beltrami-Klein model maps geodesics to straight chords, which makes
// crossing detection a plain line intersection. Boundary points are fixed by
// the model change.

pub(crate) fn klein(z: C) -> C {
    z * 2.0 / (1.0 + z.norm_sqr())
}

pub(crate) fn klein_inv(k: C) -> C {
    k / (1.0 + (1.0 - k.norm_sqr()).max(0.0).sqrt())
}

fn cross2(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Geodesic chord between two distinct disk points, with the boundary pair of
/// the full geodesic through them cached (oriented p -> q).
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub p: DiskPoint,
    pub q: DiskPoint,
    pair: BoundaryPair,
    kp: C,
    kq: C,
}

impl Segment {
    pub fn new(p: DiskPoint, q: DiskPoint) -> Result<Self> {
        if dist(p, q) <= 1e-12 {
            return Err(Error::DegenerateSegment);
        }
        let pair = geodesic_through(p, q)?;
        Ok(Segment {
            p,
            q,
            pair,
            kp: klein(p.z),
            kq: klein(q.z),
        })
    }

    pub fn pair(&self) -> BoundaryPair {
        self.pair
    }

    pub fn length(&self) -> f64 {
        dist(self.p, self.q)
    }

    pub fn reversed(&self) -> Segment {
        Segment {
            p: self.q,
            q: self.p,
            pair: self.pair.reversed(),
            kp: self.kq,
            kq: self.kp,
        }
    }

    /// Tangent direction (disk frame) of the oriented chord at a point on it.
    pub fn direction_at(&self, x: DiskPoint) -> f64 {
        let t = Isometry::point_to_origin(x);
        t.apply_z(C::from_polar(1.0, self.pair.att)).arg()
    }
}

/// Boundary pair of the complete geodesic through p and q, oriented p -> q.
pub fn geodesic_through(p: DiskPoint, q: DiskPoint) -> Result<BoundaryPair> {
    let t = Isometry::point_to_origin(p);
    let w = t.apply_z(q.z);
    if w.norm() <= 1e-15 {
        return Err(Error::DegenerateSegment);
    }
    let dir = C::from_polar(1.0, w.arg());
    let tinv = t.inverse();
    let att = tinv.apply_z(dir);
    let rep = tinv.apply_z(-dir);
    BoundaryPair::new(norm_angle(rep.arg()), norm_angle(att.arg()))
}

/// Outcome of intersecting two geodesic chords.
#[derive(Debug, Clone, Copy)]
pub enum CrossOutcome {
    /// No transversal crossing point interior to both chords.
    None,
    /// The chords lie on the same complete geodesic.
    Parallel,
    Cross(Crossing),
}

/// A transversal crossing of two chords.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub point: DiskPoint,
    /// Unsigned angle between the oriented tangents, in (0, pi).
    pub angle: f64,
    /// Parameter along the first chord, snapped to {0,1} within `ENDPOINT_SNAP`.
    pub t: f64,
    /// Parameter along the second chord, same convention.
    pub u: f64,
    /// True when the crossing angle is within `TANGENCY_TOL` of 0 or pi.
    pub near_tangent: bool,
}

/// Transversal crossing of two chords, endpoint touches included (the caller
/// decides how to count those). Collinear chords report `Parallel`.
pub fn segment_cross(s1: &Segment, s2: &Segment) -> CrossOutcome {
    if s1.pair.same_geodesic(&s2.pair, 1e-9) {
        return CrossOutcome::Parallel;
    }
    let d1 = s1.kq - s1.kp;
    let d2 = s2.kq - s2.kp;
    let den = cross2(d1, d2);
    let scale = d1.norm() * d2.norm();
    if den.abs() <= 1e-14 * scale {
        // distinct geodesics with parallel Klein chords never meet in the disk
        return CrossOutcome::None;
    }
    let rhs = s2.kp - s1.kp;
    let t_k = cross2(rhs, d2) / den;
    let u_k = cross2(rhs, d1) / den;
    let slack = 1e-9;
    if !((-slack..=1.0 + slack).contains(&t_k) && (-slack..=1.0 + slack).contains(&u_k)) {
        return CrossOutcome::None;
    }
    let xk = s1.kp + d1 * t_k;
    let x = match DiskPoint::new(klein_inv(xk)) {
        Ok(p) => p,
        Err(_) => return CrossOutcome::None,
    };
    // snap parameters by hyperbolic proximity to the chord endpoints
    let snap = |raw: f64, a: DiskPoint, b: DiskPoint| -> Option<f64> {
        if dist(x, a) <= ENDPOINT_SNAP {
            Some(0.0)
        } else if dist(x, b) <= ENDPOINT_SNAP {
            Some(1.0)
        } else if raw > 0.0 && raw < 1.0 {
            Some(raw)
        } else {
            None
        }
    };
    let t = match snap(t_k, s1.p, s1.q) {
        Some(v) => v,
        None => return CrossOutcome::None,
    };
    let u = match snap(u_k, s2.p, s2.q) {
        Some(v) => v,
        None => return CrossOutcome::None,
    };
    let psi1 = s1.direction_at(x);
    let psi2 = s2.direction_at(x);
    let mut delta = (psi2 - psi1).rem_euclid(TWO_PI);
    if delta > std::f64::consts::PI {
        delta = TWO_PI - delta;
    }
    let near_tangent = delta.min(std::f64::consts::PI - delta) < TANGENCY_TOL;
    CrossOutcome::Cross(Crossing {
        point: x,
        angle: delta,
        t,
        u,
        near_tangent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::from_re_im(re, im).unwrap()
    }

    fn random_isometry(rng: &mut ChaCha8Rng) -> Isometry {
        let dir = rng.gen_range(0.0..TWO_PI);
        let len = rng.gen_range(0.05..2.5);
        let rot = rng.gen_range(0.0..TWO_PI);
        Isometry::translation(dir, len).compose(&Isometry::rotation(rot))
    }

    fn random_point(rng: &mut ChaCha8Rng) -> DiskPoint {
        loop {
            let z = C::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
            if z.norm() < 0.9 {
                return DiskPoint { z };
            }
        }
    }

    #[test]
    fn compose_identity_and_inverse() {
        let id = Isometry::IDENTITY;
        assert!(id.compose(&id).deviation_from_identity() < 1e-15);
        let a = Isometry::from_uhp([[1f64.exp(), 0.0], [0.0, (-1f64).exp()]]);
        assert!(a.compose(&a.inverse()).deviation_from_identity() < 1e-12);
    }

    #[test]
    fn compose_diagonal_squares_trace() {
        // diag(e, e^-1)^2 = diag(e^2, e^-2), trace e^2 + e^-2
        let a = Isometry::from_uhp([[1f64.exp(), 0.0], [0.0, (-1f64).exp()]]);
        let sq = a.compose(&a);
        let expect = 2f64.exp() + (-2f64).exp();
        assert!((sq.tr() - expect).abs() < 1e-12, "tr = {}", sq.tr());
        assert!((expect - 7.5244).abs() < 1e-4);
    }

    #[test]
    fn det_stays_normalized_over_many_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut m = Isometry::IDENTITY;
        for _ in 0..10_000 {
            m = m.compose(&random_isometry(&mut rng));
            assert!((m.det() - 1.0).abs() <= DET_TOL);
        }
    }

    #[test]
    fn apply_examples() {
        let p = pt(0.3, 0.1);
        let out = Isometry::IDENTITY.apply(p).unwrap();
        assert!((out.z - p.z).norm() < 1e-15);

        let rot = Isometry::rotation(std::f64::consts::PI);
        let q = rot.apply(pt(0.5, 0.0)).unwrap();
        assert!((q.z - C::new(-0.5, 0.0)).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = random_isometry(&mut rng);
            let p = random_point(&mut rng);
            let round = a.apply(a.inverse().apply(p).unwrap()).unwrap();
            assert!(dist(round, p) < 1e-10);
        }
    }

    #[test]
    fn dist_examples_and_kappa_scaling() {
        assert_eq!(dist(DiskPoint::ORIGIN, DiskPoint::ORIGIN), 0.0);
        let d = dist(DiskPoint::ORIGIN, pt(0.5, 0.0));
        assert!((d - 3f64.ln()).abs() < 1e-12);
        let scale4 = CurvatureScale::new(4.0).unwrap();
        assert!((scale4.length(d) - 3f64.ln() / 2.0).abs() < 1e-12);
        assert!((scale4.length(d) - 0.5493061).abs() < 1e-7);
    }

    #[test]
    fn dist_symmetric_triangle_and_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let r = random_point(&mut rng);
            let dpq = dist(p, q);
            assert!((dpq - dist(q, p)).abs() < 1e-12);
            assert!(dpq + dist(q, r) >= dist(p, r) - 1e-9);
            let a = random_isometry(&mut rng);
            let ip = a.apply(p).unwrap();
            let iq = a.apply(q).unwrap();
            assert!((dist(ip, iq) - dpq).abs() < 1e-9);
        }
    }

    #[test]
    fn translation_length_examples() {
        let a = Isometry::from_uhp([[1f64.exp(), 0.0], [0.0, (-1f64).exp()]]);
        assert!((a.translation_length().unwrap() - 2.0).abs() < 1e-12);
        let scale4 = CurvatureScale::new(4.0).unwrap();
        assert!((scale4.length(a.translation_length().unwrap()) - 1.0).abs() < 1e-12);
        assert!(Isometry::rotation(1.0).translation_length().is_err());
        assert!(Isometry::IDENTITY.translation_length().is_err());
    }

    #[test]
    fn translation_length_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let dir = rng.gen_range(0.0..TWO_PI);
            let len = rng.gen_range(0.2..4.0);
            let a = Isometry::translation(dir, len);
            let g = random_isometry(&mut rng);
            let conj = g.compose(&a).compose(&g.inverse());
            assert!((conj.translation_length().unwrap() - len).abs() < 1e-10);
        }
    }

    #[test]
    fn axis_of_uhp_diagonal_is_horizontal_diameter() {
        let a = Isometry::from_uhp([[1f64.exp(), 0.0], [0.0, (-1f64).exp()]]);
        let ax = a.axis().unwrap();
        assert!(circular_separation(ax.att, 0.0) < 1e-12);
        assert!(circular_separation(ax.rep, std::f64::consts::PI) < 1e-12);
        // powers share the axis
        let a3 = a.compose(&a).compose(&a);
        let ax3 = a3.axis().unwrap();
        assert!(ax.same_geodesic(&ax3, 1e-10));
        assert!(circular_separation(ax.att, ax3.att) < 1e-10);
    }

    #[test]
    fn axis_equivariance_and_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2_000 {
            let a = Isometry::translation(rng.gen_range(0.0..TWO_PI), rng.gen_range(0.3..3.0));
            let g = random_isometry(&mut rng);
            let conj = g.compose(&a).compose(&g.inverse());
            let ax = a.axis().unwrap();
            let axc = conj.axis().unwrap();
            assert!(circular_separation(g.apply_angle(ax.att), axc.att) < 1e-8);
            assert!(circular_separation(g.apply_angle(ax.rep), axc.rep) < 1e-8);
            // fixed points are fixed
            let e = C::from_polar(1.0, ax.att);
            assert!((a.apply_z(e) - e).norm() < 1e-9);
            // a point near the attracting end moves toward it
            let probe = DiskPoint { z: e * 0.9 };
            let moved = a.apply(probe).unwrap();
            assert!(moved.z.norm() > probe.z.norm() - 1e-12);
        }
    }

    #[test]
    fn boundary_linked_examples() {
        let pi = std::f64::consts::PI;
        let a = BoundaryPair::new(0.0, pi).unwrap();
        let b = BoundaryPair::new(pi / 2.0, 3.0 * pi / 2.0).unwrap();
        assert!(boundary_linked(&a, &b).unwrap());
        let c = BoundaryPair::new(0.0, pi / 4.0).unwrap();
        let d = BoundaryPair::new(pi / 2.0, pi).unwrap();
        assert!(!boundary_linked(&c, &d).unwrap());
        // symmetry
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let p = BoundaryPair::new(rng.gen_range(0.0..TWO_PI), rng.gen_range(0.0..TWO_PI));
            let q = BoundaryPair::new(rng.gen_range(0.0..TWO_PI), rng.gen_range(0.0..TWO_PI));
            if let (Ok(p), Ok(q)) = (p, q) {
                if let (Ok(x), Ok(y)) = (boundary_linked(&p, &q), boundary_linked(&q, &p)) {
                    assert_eq!(x, y);
                }
            }
        }
        // coincident endpoints are a degenerate error
        let e = BoundaryPair::new(0.0, pi).unwrap();
        let f = BoundaryPair::new(0.0, pi / 2.0).unwrap();
        assert!(boundary_linked(&e, &f).is_err());
    }

    #[test]
    fn segment_cross_diameters() {
        let s1 = Segment::new(pt(-0.5, 0.0), pt(0.5, 0.0)).unwrap();
        let s2 = Segment::new(pt(0.0, -0.5), pt(0.0, 0.5)).unwrap();
        match segment_cross(&s1, &s2) {
            CrossOutcome::Cross(c) => {
                assert!(c.point.z.norm() < 1e-12);
                assert!((c.angle - std::f64::consts::PI / 2.0).abs() < 1e-10);
                assert!(!c.near_tangent);
            }
            other => panic!("expected crossing, got {other:?}"),
        }
    }

    #[test]
    fn segment_cross_disjoint_and_self() {
        let s1 = Segment::new(pt(-0.8, 0.5), pt(0.8, 0.5)).unwrap();
        let s2 = Segment::new(pt(-0.8, -0.5), pt(0.8, -0.5)).unwrap();
        assert!(matches!(segment_cross(&s1, &s2), CrossOutcome::None));
        assert!(matches!(segment_cross(&s1, &s1), CrossOutcome::Parallel));
        assert!(matches!(
            segment_cross(&s1, &s1.reversed()),
            CrossOutcome::Parallel
        ));
    }

    #[test]
    fn segment_cross_agrees_with_boundary_linked() {
        // chords long enough to contain the complete-geodesic crossing point
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut crossings = 0usize;
        for _ in 0..10_000 {
            let angles: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..TWO_PI)).collect();
            let p1 = BoundaryPair::new(angles[0], angles[1]);
            let p2 = BoundaryPair::new(angles[2], angles[3]);
            let (Ok(p1), Ok(p2)) = (p1, p2) else { continue };
            let Ok(linked) = boundary_linked(&p1, &p2) else {
                continue;
            };
            // truncate each complete geodesic just inside the circle
            let chord = |bp: &BoundaryPair| {
                let u = C::from_polar(1.0, bp.rep);
                let v = C::from_polar(1.0, bp.att);
                let shrink = 0.999_999;
                Segment::new(
                    DiskPoint::new(klein_inv(klein(u * shrink))).unwrap(),
                    DiskPoint::new(klein_inv(klein(v * shrink))).unwrap(),
                )
                .unwrap()
            };
            let s1 = chord(&p1);
            let s2 = chord(&p2);
            let crossed = matches!(segment_cross(&s1, &s2), CrossOutcome::Cross(_));
            assert_eq!(crossed, linked, "pairs {p1:?} {p2:?}");
            crossings += crossed as usize;
        }
        assert!(crossings > 1000, "test should exercise both outcomes");
    }

    #[test]
    fn from_uhp_roundtrip_action() {
        // the Cayley conjugation must act compatibly: disk action of M equals
        // cayley(M . cayley^-1(z)) for z in the disk
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            // random SL(2,R): product of elementary shears/diagonals
            let x = rng.gen_range(-0.8..0.8);
            let y = rng.gen_range(-0.8..0.8);
            let l = rng.gen_range(0.3..1.5);
            let m = [[l, x], [y, (1.0 + x * y) / l]];
            let iso = Isometry::from_uhp(m);
            assert!((iso.det() - 1.0).abs() < 1e-12);
            let p = random_point(&mut rng);
            // upper half plane point
            let i = C::new(0.0, 1.0);
            let w = (p.z * i + i) / (C::new(1.0, 0.0) - p.z);
            let mw = (w * m[0][0] + m[0][1]) / (w * m[1][0] + m[1][1]);
            let back = (mw - i) / (mw + i);
            assert!((iso.apply_z(p.z) - back).norm() < 1e-9);
        }
    }
}
