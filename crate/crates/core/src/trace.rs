//! Shared walking engine: follow a geodesic through the fundamental polygon,
//! cutting a chord at every side crossing and pulling the continuation back
//! through the side pairing. Crossings that hit a polygon vertex transit the
//! corner fan instead: the continuation is probed just past the vertex and the
//! unique fan copy owning the probe (the sides are half-open) supplies the
//! pull-back.

use crate::error::Error;
use crate::hyp::{circular_separation, dist, klein, BoundaryPair, DiskPoint, Isometry, Segment};
use crate::surface::{Location, SurfaceModel, SIDE_TOL};
use crate::Result;
use num_complex::Complex64 as C;

/// Minimum forward progress accepted for a crossing.
const MIN_STEP: f64 = 1e-9;
/// How far past a vertex the continuation is probed.
const PROBE: f64 = 1e-7;

#[derive(Debug, Clone)]
pub(crate) struct Walk {
    pub chords: Vec<Segment>,
    pub transitions: Vec<Isometry>,
    /// Accumulated pull-back: the product of all transitions applied, newest first.
    pub total: Isometry,
    pub end_point: DiskPoint,
    pub end_pair: BoundaryPair,
    pub degenerate_events: u64,
}

/// Point at arclength `t` from `p` toward the attracting end of `pair`.
pub(crate) fn advance_along(p: DiskPoint, pair: &BoundaryPair, t: f64) -> DiskPoint {
    let to_origin = Isometry::point_to_origin(p);
    let psi = to_origin.apply_z(C::from_polar(1.0, pair.att)).arg();
    let w = C::from_polar((t / 2.0).tanh(), psi);
    DiskPoint {
        z: to_origin.inverse().apply_z(w),
    }
}

/// Direction (disk frame) at `p` toward the attracting end of `pair`.
pub(crate) fn direction_at(p: DiskPoint, pair: &BoundaryPair) -> f64 {
    Isometry::point_to_origin(p)
        .apply_z(C::from_polar(1.0, pair.att))
        .arg()
}

fn cross2(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

struct Candidate {
    t: f64,
    side: usize,
    point: DiskPoint,
    vertex: Option<usize>,
}

/// Nearest side crossing strictly ahead of `p` along the oriented geodesic.
fn next_crossing(s: &SurfaceModel, p: DiskPoint, pair: &BoundaryPair) -> Option<Candidate> {
    let a = C::from_polar(1.0, pair.rep);
    let b = C::from_polar(1.0, pair.att);
    let d1 = b - a;
    let pk = klein(p.z);
    let mut best: Option<Candidate> = None;
    for (k, side) in s.sides().iter().enumerate() {
        let sp = klein(side.p.z);
        let sq = klein(side.q.z);
        let d2 = sq - sp;
        let den = cross2(d1, d2);
        if den.abs() <= 1e-13 * d1.norm() * d2.norm() {
            continue; // collinear or parallel side line
        }
        let rhs = sp - a;
        let u = cross2(rhs, d1) / den;
        if !(-1e-7..=1.0 + 1e-7).contains(&u) {
            continue;
        }
        let t_line = cross2(rhs, d2) / den;
        let xk = a + d1 * t_line;
        if xk.norm_sqr() >= 1.0 {
            continue;
        }
        let x = DiskPoint {
            z: crate::hyp::klein_inv(xk),
        };
        let forward = (xk - pk).re * d1.re + (xk - pk).im * d1.im;
        if forward <= 0.0 {
            continue;
        }
        let t = dist(p, x);
        if t <= MIN_STEP {
            continue;
        }
        if best.as_ref().map_or(true, |c| t < c.t) {
            let vertex = (0..s.num_sides())
                .find(|&j| dist(x, s.vertices()[j]) <= 10.0 * SIDE_TOL);
            best = Some(Candidate {
                t,
                side: k,
                point: x,
                vertex,
            });
        }
    }
    best
}

/// Walk `length` along the oriented geodesic `pair` starting from `start`.
pub(crate) fn walk(
    s: &SurfaceModel,
    start: DiskPoint,
    start_pair: BoundaryPair,
    length: f64,
) -> Result<Walk> {
    let mut p = start;
    let mut pair = start_pair;
    let mut remaining = length;
    let mut total = Isometry::IDENTITY;
    let mut chords: Vec<Segment> = Vec::new();
    let mut transitions: Vec<Isometry> = Vec::new();
    let mut degenerate_events = 0u64;
    let mut stalls = 0usize;

    // start on an unowned wall heading outward: pull into the owning copy first
    for _ in 0..s.num_sides() + 2 {
        let probe = advance_along(p, &pair, PROBE.min(remaining.max(PROBE)));
        if s.contains(probe) {
            break;
        }
        let step = match s.locate(p) {
            Location::OnSide(k) => *s.pairing(s.sigma(k)),
            Location::AtVertex(j) => match fan_step(s, j, probe) {
                Some(h) => h,
                None => {
                    return Err(Error::DecompositionFailed(
                        "no fan copy owns the start continuation".into(),
                    ))
                }
            },
            Location::Outside { nearest_violated } => *s.pairing(s.sigma(nearest_violated)),
            Location::Inside => break,
        };
        p = step.apply(p)?;
        pair = pair.mapped(&step);
        total = step.compose(&total);
        transitions.push(step);
    }

    let cap = 2_000 + (20.0 * length) as usize;
    for _ in 0..cap {
        if remaining <= 1e-12 {
            break;
        }
        let cand = next_crossing(s, p, &pair);
        match cand {
            Some(c) if c.t < remaining - 1e-12 => {
                let (endpoint, vertex) = match c.vertex {
                    Some(j) => (s.vertices()[j], Some(j)),
                    None => (c.point, None),
                };
                if dist(p, endpoint) > 1e-12 {
                    chords.push(Segment::new(p, endpoint)?);
                    stalls = 0;
                } else {
                    stalls += 1;
                    if stalls > s.num_sides() + 2 {
                        return Err(Error::DecompositionFailed(
                            "walk stalled at a corner".into(),
                        ));
                    }
                }
                remaining -= c.t;
                let step = match vertex {
                    Some(j) => {
                        degenerate_events += 1;
                        let probe = advance_along(p, &pair, c.t + PROBE);
                        match fan_step(s, j, probe) {
                            Some(h) => h,
                            None => {
                                return Err(Error::DecompositionFailed(format!(
                                    "no fan copy owns the continuation at vertex {j}"
                                )))
                            }
                        }
                    }
                    None => *s.pairing(s.sigma(c.side)),
                };
                p = step.apply(endpoint)?;
                pair = pair.mapped(&step);
                total = step.compose(&total);
                transitions.push(step);
            }
            _ => {
                // the arc ends before the next wall
                let end = advance_along(p, &pair, remaining);
                if dist(p, end) > 1e-12 {
                    chords.push(Segment::new(p, end)?);
                }
                return Ok(Walk {
                    chords,
                    transitions,
                    total,
                    end_point: end,
                    end_pair: pair,
                    degenerate_events,
                });
            }
        }
    }
    Err(Error::DecompositionFailed(
        "walk exceeded its iteration cap".into(),
    ))
}

/// Pull-back into the fan copy around vertex j that owns `probe`.
fn fan_step(s: &SurfaceModel, j: usize, probe: DiskPoint) -> Option<Isometry> {
    for h in s.fan_at_vertex(j) {
        let q = h.inverse().apply_z(probe.z);
        if q.norm() < 1.0 {
            if s.contains(DiskPoint { z: q }) {
                return Some(h.inverse());
            }
        }
    }
    None
}

/// Closed-geodesic decomposition: cut the axis of `iso` (internal length
/// `ell`) into polygon chords starting from the axis point nearest the origin.
/// Returns the chord cycle, the cyclic transition list and the count of
/// degenerate (vertex) events met along the walk.
pub(crate) fn decompose_closed(
    s: &SurfaceModel,
    iso: &Isometry,
    ell: f64,
) -> Result<(Vec<Segment>, Vec<Isometry>, u64)> {
    let axis = iso.axis()?;
    let p0 = axis_point_nearest_origin(&axis);
    let mut last_err = None;
    for offset in [0.0, 0.317, 0.713] {
        let start_raw = if offset == 0.0 {
            p0
        } else {
            advance_along(p0, &axis, offset)
        };
        let (start, g) = match s.reduce_to_domain(start_raw) {
            Ok(v) => v,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let pair = axis.mapped(&g);
        let conj = g.compose(iso).compose(&g.inverse());
        let w = match walk(s, start, pair, ell) {
            Ok(w) => w,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        if dist(w.end_point, start) > 1e-7 {
            last_err = Some(Error::DecompositionFailed(format!(
                "walk failed to close: gap {:.2e}",
                dist(w.end_point, start)
            )));
            continue;
        }
        let closure = w.total.compose(&conj).deviation_from_identity();
        if closure > 1e-7 {
            last_err = Some(Error::DecompositionFailed(format!(
                "holonomy mismatch {closure:.2e}"
            )));
            continue;
        }
        return Ok(finish_closed(w));
    }
    Err(last_err.unwrap_or_else(|| Error::DecompositionFailed("no valid basepoint".into())))
}

/// Merge the two basepoint half-chords so every chord endpoint lies on a side.
fn finish_closed(w: Walk) -> (Vec<Segment>, Vec<Isometry>, u64) {
    let mut chords = w.chords;
    let transitions = w.transitions;
    if chords.len() >= 2 {
        let first = chords[0];
        let last = *chords.last().unwrap();
        let collinear = first.pair().same_geodesic(&last.pair(), 1e-6);
        if collinear && dist(last.q, first.p) <= 1e-7 {
            if let Ok(merged) = Segment::new(last.p, first.q) {
                chords.pop();
                chords[0] = merged;
            }
        }
    }
    (chords, transitions, w.degenerate_events)
}

pub(crate) fn axis_point_nearest_origin(axis: &BoundaryPair) -> DiskPoint {
    if (circular_separation(axis.rep, axis.att) - std::f64::consts::PI).abs() < 1e-12 {
        return DiskPoint::ORIGIN;
    }
    let u = C::from_polar(1.0, axis.rep);
    let v = C::from_polar(1.0, axis.att);
    let c = (u + v) / (1.0 + (u * v.conj()).re);
    let r = (c.norm_sqr() - 1.0).max(0.0).sqrt();
    DiskPoint {
        z: c * (1.0 - r / c.norm()),
    }
}
