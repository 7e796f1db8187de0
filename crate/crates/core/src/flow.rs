//! Geodesic-flow sampling and occupation statistics: draw unit tangents from
//! the normalized Riemannian measure, trace arcs of length T through the side
//! identifications, and measure the time an arc spends in a phase-space box.

use crate::error::Error;
use crate::hyp::{dist, BoundaryPair, DiskPoint, Isometry, Segment};
use crate::surface::SurfaceModel;
use crate::trace;
use crate::Result;
use num_complex::Complex64 as C;
use rand::Rng;
use serde::{Deserialize, Serialize};

const TWO_PI: f64 = std::f64::consts::TAU;

/// A unit tangent vector: base point inside the fundamental polygon plus a
/// direction measured in the disk's Euclidean frame.
#[derive(Debug, Clone, Copy)]
pub struct UnitTangent {
    pub base: DiskPoint,
    pub angle: f64,
}

/// A traced geodesic arc of length T, cut into polygon chords.
#[derive(Debug, Clone)]
pub struct ArcTrace {
    pub start: UnitTangent,
    /// Total length, kappa-scaled.
    pub t: f64,
    /// Total length at kappa = 1 (the disk-geometry units of the chords).
    pub t_internal: f64,
    pub chords: Vec<Segment>,
    /// Side-pairing isometries applied at each exit.
    pub transitions: Vec<Isometry>,
    /// Product of all transitions, newest first.
    pub cumulative: Isometry,
    pub degenerate_events: u64,
}

/// Spatial ball times an angular window: the phase-space boxes used by the
/// equidistribution and Birkhoff checks. Lengths are kappa = 1 disk units;
/// angles are measured in the disk frame.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhaseBox {
    /// Ball center, disk coordinates.
    pub center: [f64; 2],
    /// Hyperbolic ball radius.
    pub radius: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl PhaseBox {
    pub fn center_point(&self) -> Result<DiskPoint> {
        DiskPoint::from_re_im(self.center[0], self.center[1])
    }

    /// Angular width in (0, 2*pi].
    pub fn angular_width(&self) -> f64 {
        let w = (self.theta2 - self.theta1).rem_euclid(TWO_PI);
        if w == 0.0 && (self.theta2 - self.theta1).abs() >= TWO_PI - 1e-12 {
            TWO_PI
        } else if w == 0.0 {
            0.0
        } else {
            w
        }
    }

    pub fn angle_inside(&self, theta: f64) -> bool {
        let w = self.angular_width();
        if w >= TWO_PI {
            return true;
        }
        (theta - self.theta1).rem_euclid(TWO_PI) < w
    }
}

/// Draw a unit tangent from the normalized Riemannian measure: base point by
/// hyperbolic-area rejection from the circumradius ball, direction uniform.
pub fn sample_liouville(s: &SurfaceModel, rng: &mut impl Rng) -> Result<UnitTangent> {
    let cosh_dv = s.d_vertex().cosh();
    for _ in 0..1_000_000 {
        let u: f64 = rng.gen();
        let r_hyp = (1.0 + u * (cosh_dv - 1.0)).acosh();
        let phi: f64 = rng.gen_range(0.0..TWO_PI);
        let z = C::from_polar((r_hyp / 2.0).tanh(), phi);
        let p = DiskPoint { z };
        let angle: f64 = rng.gen_range(0.0..TWO_PI);
        if s.contains(p) {
            return Ok(UnitTangent { base: p, angle });
        }
    }
    Err(Error::RejectionCapExceeded)
}

/// Complete geodesic through the tangent vector, oriented forward.
pub fn tangent_geodesic(v: &UnitTangent) -> BoundaryPair {
    let t = Isometry::point_to_origin(v.base);
    let tinv = t.inverse();
    let fwd = tinv.apply_z(C::from_polar(1.0, v.angle));
    let bwd = tinv.apply_z(-C::from_polar(1.0, v.angle));
    BoundaryPair::new(bwd.arg(), fwd.arg()).expect("tangent geodesic endpoints distinct")
}

/// Trace the geodesic arc of kappa-scaled length `t_len` from `v`.
pub fn trace_arc(s: &SurfaceModel, v: &UnitTangent, t_len: f64) -> Result<ArcTrace> {
    if t_len <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "arc length must be positive, got {t_len}"
        )));
    }
    if !s.contains(v.base) {
        return Err(Error::ReductionFailed(
            "arc base point outside the fundamental domain".into(),
        ));
    }
    let t_int = s.scale().internal(t_len);
    let pair = tangent_geodesic(v);
    let w = trace::walk(s, v.base, pair, t_int)?;
    Ok(ArcTrace {
        start: *v,
        t: t_len,
        t_internal: t_int,
        chords: w.chords,
        transitions: w.transitions,
        cumulative: w.total,
        degenerate_events: w.degenerate_events,
    })
}

/// The time-t image of a unit tangent under the geodesic flow.
pub fn flow_tangent(s: &SurfaceModel, v: &UnitTangent, t_len: f64) -> Result<UnitTangent> {
    let t_int = s.scale().internal(t_len);
    let pair = tangent_geodesic(v);
    let w = trace::walk(s, v.base, pair, t_int)?;
    let angle = trace::direction_at(w.end_point, &w.end_pair);
    Ok(UnitTangent {
        base: w.end_point,
        angle,
    })
}

fn acosh_safe(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.acosh()
    }
}

/// Sub-intervals (at most two) of [0, len] where the chord parameter lies in
/// the box, by exact interval intersection of the ball window with the
/// direction window.
fn chord_box_intervals(chord: &Segment, e: &PhaseBox, center: DiskPoint) -> Vec<(f64, f64)> {
    let len = chord.length();
    // frame: chord start to origin, direction to the positive real axis
    let psi0 = chord.direction_at(chord.p);
    let t1 = Isometry::point_to_origin(chord.p);
    let frame = Isometry::rotation(-psi0).compose(&t1);
    let w = frame.apply_z(center.z);

    // ball window via the hyperbolic Pythagoras relation along the real axis
    let a = w.re;
    let q = 1.0 + w.norm_sqr();
    let xf = if a.abs() < 1e-14 {
        0.0
    } else {
        (q - (q * q - 4.0 * a * a).max(0.0).sqrt()) / (2.0 * a)
    };
    let foot = DiskPoint { z: C::new(xf, 0.0) };
    let t_foot = 2.0 * xf.atanh();
    let d_perp = dist(foot, DiskPoint { z: w });
    if d_perp.cosh() > e.radius.cosh() {
        return Vec::new();
    }
    let delta = acosh_safe(e.radius.cosh() / d_perp.cosh());
    let ball_lo = (t_foot - delta).max(0.0);
    let ball_hi = (t_foot + delta).min(len);
    if ball_lo >= ball_hi {
        return Vec::new();
    }

    // direction along the chord: psi(t) = psi0 - 2 arg(1 + u x(t)), monotone
    let u = chord.p.z.conj() * C::from_polar(1.0, psi0);
    let psi_at = |t: f64| -> f64 {
        let x = (t / 2.0).tanh();
        psi0 - 2.0 * (C::new(1.0, 0.0) + u * x).arg()
    };
    let mut cuts = vec![ball_lo, ball_hi];
    if e.angular_width() < TWO_PI {
        for target in [e.theta1, e.theta2] {
            // arg(1 + u x) == (psi0 - target)/2  (mod pi)
            let mut delta_t = (psi0 - target) / 2.0;
            delta_t = delta_t.rem_euclid(std::f64::consts::PI);
            if delta_t > std::f64::consts::FRAC_PI_2 {
                delta_t -= std::f64::consts::PI;
            }
            let tan_d = delta_t.tan();
            let den = u.im - u.re * tan_d;
            if den.abs() < 1e-15 {
                continue;
            }
            let x = tan_d / den;
            if x > 0.0 && x < 1.0 {
                let t = 2.0 * x.atanh();
                if t > ball_lo && t < ball_hi {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if e.angle_inside(psi_at(mid)) {
            match out.last_mut() {
                Some((_, prev_hi)) if (*prev_hi - lo).abs() < 1e-15 => *prev_hi = hi,
                _ => out.push((lo, hi)),
            }
        }
    }
    out
}

/// Fraction of the arc's time spent in the box, in [0, 1].
pub fn occupation_fraction(arc: &ArcTrace, e: &PhaseBox) -> Result<f64> {
    let center = e.center_point()?;
    if e.radius <= 0.0 || e.angular_width() <= 0.0 {
        return Err(Error::InvalidConfig("phase box has empty interior".into()));
    }
    let mut time_in = 0.0;
    for chord in &arc.chords {
        for (lo, hi) in chord_box_intervals(chord, e, center) {
            time_in += hi - lo;
        }
    }
    Ok((time_in / arc.t_internal).clamp(0.0, 1.0))
}

/// Reference measure of a box under the normalized Liouville measure:
/// (angular width / 2 pi) * area(ball cap polygon) / area(S), the spatial part
/// by polar quadrature around the ball center.
pub fn nu_bar(s: &SurfaceModel, e: &PhaseBox, n_r: usize, n_phi: usize) -> Result<f64> {
    let center = e.center_point()?;
    let to_disk = Isometry::point_to_origin(center).inverse();
    let mut area = 0.0;
    for i in 0..n_r {
        let sm = (i as f64 + 0.5) / n_r as f64 * e.radius;
        let ds = e.radius / n_r as f64;
        let row_weight = sm.sinh() * ds * (TWO_PI / n_phi as f64);
        let rr = (sm / 2.0).tanh();
        let mut hits = 0usize;
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) / n_phi as f64 * TWO_PI;
            let z = to_disk.apply_z(C::from_polar(rr, phi));
            if z.norm() < 1.0 && s.contains(DiskPoint { z }) {
                hits += 1;
            }
        }
        area += row_weight * hits as f64;
    }
    let surface_area = TWO_PI * (2.0 * s.genus() as f64 - 2.0);
    Ok(e.angular_width() / TWO_PI * area / surface_area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::build_surface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bolza() -> SurfaceModel {
        build_surface(2, 1.0).unwrap()
    }

    #[test]
    fn liouville_acceptance_rate_matches_area_ratio() {
        let s = bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let trials = 100_000usize;
        let mut accepted = 0usize;
        let cosh_dv = s.d_vertex().cosh();
        for _ in 0..trials {
            let u: f64 = rng.gen();
            let r_hyp = (1.0 + u * (cosh_dv - 1.0)).acosh();
            let phi: f64 = rng.gen_range(0.0..TWO_PI);
            let z = C::from_polar((r_hyp / 2.0).tanh(), phi);
            if s.contains(DiskPoint { z }) {
                accepted += 1;
            }
        }
        let expect = 2.0 / (cosh_dv - 1.0);
        assert!((expect - 0.41421356).abs() < 1e-6);
        let rate = accepted as f64 / trials as f64;
        assert!((rate - expect).abs() < 0.02, "rate {rate} vs {expect}");
    }

    #[test]
    fn liouville_reproducible_and_radial_law() {
        let s = bolza();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = sample_liouville(&s, &mut a).unwrap();
            let y = sample_liouville(&s, &mut b).unwrap();
            assert_eq!(x.base.z, y.base.z);
            assert_eq!(x.angle, y.angle);
        }

        // empirical mean of dist(0, base) vs the polygon-restricted radial law
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 200_000usize;
        let mut sum = 0.0;
        for _ in 0..n {
            let v = sample_liouville(&s, &mut rng).unwrap();
            sum += dist(DiskPoint::ORIGIN, v.base);
        }
        let empirical = sum / n as f64;
        // 1-d integral oracle: density sinh(r) * angular_fraction(r)
        let steps = 4000;
        let dv = s.d_vertex();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..steps {
            let r = (i as f64 + 0.5) / steps as f64 * dv;
            let m = 2048;
            let mut inside = 0usize;
            for j in 0..m {
                let phi = (j as f64 + 0.5) / m as f64 * TWO_PI;
                let z = C::from_polar((r / 2.0).tanh(), phi);
                if s.contains(DiskPoint { z }) {
                    inside += 1;
                }
            }
            let frac = inside as f64 / m as f64;
            num += r * r.sinh() * frac;
            den += r.sinh() * frac;
        }
        let analytic = num / den;
        assert!(
            (empirical - analytic).abs() / analytic < 0.01,
            "empirical {empirical} vs analytic {analytic}"
        );
    }

    #[test]
    fn trace_tiny_arc_is_single_chord() {
        let s = bolza();
        let v = UnitTangent {
            base: DiskPoint::from_re_im(0.1, -0.05).unwrap(),
            angle: 0.7,
        };
        let arc = trace_arc(&s, &v, 0.01).unwrap();
        assert_eq!(arc.chords.len(), 1);
        assert!((arc.chords[0].length() - 0.01).abs() < 1e-10);
        assert!(arc.cumulative.deviation_from_identity() < 1e-12);
    }

    #[test]
    fn arc_chord_lengths_sum_to_t() {
        let s = bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let v = sample_liouville(&s, &mut rng).unwrap();
            let t = rng.gen_range(0.5..15.0);
            let arc = trace_arc(&s, &v, t).unwrap();
            let sum: f64 = arc.chords.iter().map(|c| c.length()).sum();
            assert!((sum - t).abs() < 1e-6, "sum {sum} vs t {t}");
            // consecutive chords matched by the recorded transitions
            for (i, step) in arc.transitions.iter().enumerate() {
                if i + 1 < arc.chords.len() {
                    let img = step.apply(arc.chords[i].q).unwrap();
                    assert!(dist(img, arc.chords[i + 1].p) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn flow_concatenation_property() {
        let s = bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let v = sample_liouville(&s, &mut rng).unwrap();
            let t1 = rng.gen_range(0.3..4.0);
            let t2 = rng.gen_range(0.3..4.0);
            let whole = trace_arc(&s, &v, t1 + t2).unwrap();
            let first = trace_arc(&s, &v, t1).unwrap();
            let mid = flow_tangent(&s, &v, t1).unwrap();
            let second = trace_arc(&s, &mid, t2).unwrap();
            // chord sequence of the whole arc = first chords ++ second chords,
            // with the seam chord split at the midpoint
            let total: f64 = whole.chords.iter().map(|c| c.length()).sum();
            let split: f64 = first.chords.iter().map(|c| c.length()).sum::<f64>()
                + second.chords.iter().map(|c| c.length()).sum::<f64>();
            assert!((total - split).abs() < 1e-7);
            let end_whole = flow_tangent(&s, &v, t1 + t2).unwrap();
            let end_split = flow_tangent(&s, &mid, t2).unwrap();
            assert!(dist(end_whole.base, end_split.base) < 1e-8);
            let d = (end_whole.angle - end_split.angle).rem_euclid(TWO_PI);
            assert!(d.min(TWO_PI - d) < 1e-8);
        }
    }

    #[test]
    fn chord_count_band_for_long_arcs() {
        let s = bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let t = 20.0;
        for _ in 0..50 {
            let v = sample_liouville(&s, &mut rng).unwrap();
            let arc = trace_arc(&s, &v, t).unwrap();
            let n = arc.chords.len() as f64;
            assert!(n >= t / s.d_vertex() && n <= 5.0 * t, "chords {n}");
        }
    }

    #[test]
    fn occupation_full_box_and_empty_box() {
        let s = bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let v = sample_liouville(&s, &mut rng).unwrap();
        let arc = trace_arc(&s, &v, 12.0).unwrap();
        let everything = PhaseBox {
            center: [0.0, 0.0],
            radius: 2.0 * s.d_vertex(),
            theta1: 0.0,
            theta2: TWO_PI,
        };
        let occ = occupation_fraction(&arc, &everything).unwrap();
        assert!((occ - 1.0).abs() < 1e-9, "occ {occ}");
        let empty = PhaseBox {
            center: [0.0, 0.0],
            radius: 1.0,
            theta1: 1.0,
            theta2: 1.0 + 0.0,
        };
        assert!(occupation_fraction(&arc, &empty).is_err());
    }

    #[test]
    fn occupation_matches_direct_sampling() {
        // cross-check the exact interval logic against dense parameter sampling
        let s = bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let boxes = [
            PhaseBox {
                center: [0.0, 0.0],
                radius: 0.9,
                theta1: 0.3,
                theta2: 2.1,
            },
            PhaseBox {
                center: [0.25, -0.1],
                radius: 0.7,
                theta1: 5.8,
                theta2: 0.9,
            },
        ];
        for _ in 0..20 {
            let v = sample_liouville(&s, &mut rng).unwrap();
            let arc = trace_arc(&s, &v, 6.0).unwrap();
            for e in &boxes {
                let exact = occupation_fraction(&arc, e).unwrap();
                let center = e.center_point().unwrap();
                let mut time_in = 0.0;
                let m = 4000;
                for chord in &arc.chords {
                    let len = chord.length();
                    let psi0 = chord.direction_at(chord.p);
                    let u = chord.p.z.conj() * C::from_polar(1.0, psi0);
                    for i in 0..m {
                        let t = (i as f64 + 0.5) / m as f64 * len;
                        let x = (t / 2.0).tanh();
                        let frame_inv = Isometry::point_to_origin(chord.p).inverse();
                        let z = frame_inv.apply_z(C::from_polar(x, psi0));
                        let psi = psi0 - 2.0 * (C::new(1.0, 0.0) + u * x).arg();
                        let inside = dist(DiskPoint { z }, center) <= e.radius
                            && e.angle_inside(psi);
                        if inside {
                            time_in += len / m as f64;
                        }
                    }
                }
                let sampled = time_in / arc.t_internal;
                assert!(
                    (exact - sampled).abs() < 2e-3,
                    "exact {exact} vs sampled {sampled}"
                );
            }
        }
    }

    #[test]
    fn nu_bar_of_centered_ball_is_exact() {
        let s = bolza();
        // ball fully inside the polygon: area 2 pi (cosh r - 1)
        let e = PhaseBox {
            center: [0.0, 0.0],
            radius: 1.2,
            theta1: 0.0,
            theta2: TWO_PI,
        };
        let nu = nu_bar(&s, &e, 400, 800).unwrap();
        let expect = (1.2f64.cosh() - 1.0) / (2.0 * (2.0 * 2.0 - 2.0));
        assert!((nu - expect).abs() < 1e-3, "nu {nu} vs {expect}");
        // angular window scales linearly
        let half = PhaseBox {
            theta1: 0.5,
            theta2: 0.5 + std::f64::consts::PI,
            ..e
        };
        let nu_half = nu_bar(&s, &half, 400, 800).unwrap();
        assert!((nu_half - expect / 2.0).abs() < 1e-3);
        // whole space has measure 1
        let everything = PhaseBox {
            center: [0.0, 0.0],
            radius: s.d_vertex() + 0.2,
            theta1: 0.0,
            theta2: TWO_PI,
        };
        let total = nu_bar(&s, &everything, 600, 1200).unwrap();
        assert!((total - 1.0).abs() < 2e-3, "total {total}");
    }

    #[test]
    fn birkhoff_occupation_concentrates_for_long_arcs() {
        let s = bolza();
        let e = PhaseBox {
            center: [0.2, 0.1],
            radius: 0.9,
            theta1: 0.0,
            theta2: TWO_PI,
        };
        let nu = nu_bar(&s, &e, 300, 600).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut ok = 0usize;
        let n = 100usize;
        for _ in 0..n {
            let v = sample_liouville(&s, &mut rng).unwrap();
            let arc = trace_arc(&s, &v, 200.0).unwrap();
            let occ = occupation_fraction(&arc, &e).unwrap();
            if (occ - nu).abs() <= 0.05 {
                ok += 1;
            }
        }
        assert!(ok >= 90, "only {ok}/{n} arcs within 0.05 of nu = {nu}");
    }
}
