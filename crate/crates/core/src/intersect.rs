//! Geometric intersection numbers, all via chord crossing counts in the
//! fundamental polygon: closed x closed, closed self, arc x arc, arc self.
//!
//! Counting conventions for a crossing of two chords:
//!   - crossings interior to the polygon count when both chord parameters lie
//!     in the half-open [0, 1) (a crossing at a shared continuation point is
//!     the same curve point twice, not a crossing);
//!   - crossings on a polygon side appear once on each of the two paired
//!     sides, and the half-open side-ownership rule keeps exactly one;
//!   - collinear overlaps are parallel, never crossings;
//!   - near-tangencies and vertex hits are flagged degenerate; pair counts are
//!     then re-derived in a slightly rotated copy of the fundamental domain,
//!     where the same curves meet the walls generically.

use crate::census::ClosedGeodesic;
use crate::error::Error;
use crate::flow::{trace_arc, ArcTrace, UnitTangent};
use crate::hyp::{segment_cross, CrossOutcome, Segment};
use crate::surface::{Location, SurfaceModel};
use crate::trace;
use crate::Result;

/// Crossing count plus degeneracy diagnostics.
#[derive(Debug, Clone, Default)]
pub struct CrossingReport {
    pub count: u64,
    pub degenerate_events: u64,
    pub angle_histogram: Vec<f64>,
}

/// Count transversal crossings between two chord lists (or within one when
/// `same_list`), applying the side-ownership and half-open parameter rules.
pub fn chord_crossings(
    s: &SurfaceModel,
    a: &[Segment],
    b: &[Segment],
    same_list: bool,
) -> CrossingReport {
    let mut report = CrossingReport::default();
    for i in 0..a.len() {
        let j_start = if same_list { i + 1 } else { 0 };
        for j in j_start..b.len() {
            let outcome = segment_cross(&a[i], &b[j]);
            let c = match outcome {
                CrossOutcome::Cross(c) => c,
                _ => continue,
            };
            if c.near_tangent {
                report.degenerate_events += 1;
            }
            let counted = match s.locate(c.point) {
                Location::OnSide(k) => s.owned(k),
                Location::AtVertex(jv) => {
                    report.degenerate_events += 1;
                    s.owned(jv)
                }
                Location::Inside => c.t < 1.0 && c.u < 1.0,
                Location::Outside { nearest_violated } => {
                    report.degenerate_events += 1;
                    s.owned(nearest_violated)
                }
            };
            if counted {
                report.count += 1;
                report.angle_histogram.push(c.angle);
            }
        }
    }
    report
}

/// Deterministic tilt angles tried when a primary count hits a degeneracy.
const TILTS: [f64; 3] = [3.7e-4, 8.9e-4, 2.3e-3];

fn tilted_chords(
    s: &SurfaceModel,
    tilt: f64,
    items: &[&ClosedGeodesic],
) -> Result<(SurfaceModel, Vec<Vec<Segment>>)> {
    let st = s.rotated(tilt);
    let h = crate::hyp::Isometry::rotation(tilt);
    let hinv = h.inverse();
    let mut out = Vec::with_capacity(items.len());
    for g in items {
        let iso = h.compose(&g.iso).compose(&hinv);
        let ell = s.scale().internal(g.length);
        let (chords, _, _) = trace::decompose_closed(&st, &iso, ell)?;
        out.push(chords);
    }
    Ok((st, out))
}

fn counted_with_fallback(
    s: &SurfaceModel,
    primary: CrossingReport,
    items: &[&ClosedGeodesic],
    same_list: bool,
) -> Result<CrossingReport> {
    if primary.degenerate_events == 0 {
        return Ok(primary);
    }
    let flagged = primary.degenerate_events;
    for tilt in TILTS {
        let Ok((st, chords)) = tilted_chords(s, tilt, items) else {
            continue;
        };
        let report = if same_list {
            chord_crossings(&st, &chords[0], &chords[0], true)
        } else {
            chord_crossings(&st, &chords[0], &chords[1], false)
        };
        if report.degenerate_events == 0 {
            return Ok(CrossingReport {
                count: report.count,
                degenerate_events: flagged,
                angle_histogram: report.angle_histogram,
            });
        }
    }
    // every tilt stayed degenerate; keep the primary count, flags and all
    Ok(primary)
}

fn audit_pair_bound(s: &SurfaceModel, count: u64, la: f64, lb: f64) -> Result<f64> {
    let normalized = count as f64 / (la * lb);
    if let Some(rho) = s.rho() {
        let bound = 1.0 / (rho * rho);
        if normalized > bound + 1e-9 {
            return Err(Error::AuditViolation(format!(
                "normalized intersection {normalized} exceeds 1/rho^2 = {bound}"
            )));
        }
    }
    Ok(normalized)
}

/// Geometric intersection number of two closed geodesics and its normalized
/// value i/(l(a) l(b)). Equal or mutually inverse classes fall back to the
/// self-intersection count (same trace on the surface).
pub fn intersection_number(
    s: &SurfaceModel,
    alpha: &ClosedGeodesic,
    beta: &ClosedGeodesic,
) -> Result<(u64, f64)> {
    let same = alpha.word == beta.word || {
        let (inv, _) = s.canonical_conjugacy(&beta.word.inverse())?;
        alpha.word == inv
    };
    if same {
        let i = self_intersection(s, alpha)?;
        let normalized = audit_pair_bound(s, i, alpha.length, beta.length)?;
        return Ok((i, normalized));
    }
    let primary = chord_crossings(s, &alpha.chords, &beta.chords, false);
    let report = counted_with_fallback(s, primary, &[alpha, beta], false)?;
    let normalized = audit_pair_bound(s, report.count, alpha.length, beta.length)?;
    Ok((report.count, normalized))
}

/// Self-intersection number of a closed geodesic.
pub fn self_intersection(s: &SurfaceModel, gamma: &ClosedGeodesic) -> Result<u64> {
    let primary = chord_crossings(s, &gamma.chords, &gamma.chords, true);
    let report = counted_with_fallback(s, primary, &[gamma], true)?;
    audit_pair_bound(s, report.count, gamma.length, gamma.length)?;
    Ok(report.count)
}

/// T-intersection count of two traced arcs (Definition-style: transversal
/// crossing pairs of the chords, the trivial self coincidence excluded).
/// Degenerate configurations retrace both arcs with the start parameter
/// offset by 1e-7 and adopt the perturbed count.
pub fn arc_t_count(s: &SurfaceModel, arc1: &ArcTrace, arc2: &ArcTrace, same: bool) -> Result<u64> {
    let primary = if same {
        chord_crossings(s, &arc1.chords, &arc1.chords, true)
    } else {
        chord_crossings(s, &arc1.chords, &arc2.chords, false)
    };
    if primary.degenerate_events == 0 {
        return Ok(primary.count);
    }
    let offset = 1e-7;
    let retraced = |arc: &ArcTrace| -> Result<ArcTrace> {
        let v = shift_start(s, &arc.start, offset)?;
        trace_arc(s, &v, arc.t)
    };
    let a1 = retraced(arc1)?;
    let perturbed = if same {
        chord_crossings(s, &a1.chords, &a1.chords, true)
    } else {
        let a2 = retraced(arc2)?;
        chord_crossings(s, &a1.chords, &a2.chords, false)
    };
    Ok(perturbed.count)
}

fn shift_start(s: &SurfaceModel, v: &UnitTangent, offset: f64) -> Result<UnitTangent> {
    crate::flow::flow_tangent(s, v, offset)
}
