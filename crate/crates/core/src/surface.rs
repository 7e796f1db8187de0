//! The genus-g surface as a regular 4g-gon with side pairings, plus word
//! arithmetic in the surface group: evaluation, Dehn-style cyclic reduction,
//! canonical conjugacy representatives, domain membership and reduction.
//!
//! Construction: the {4g,4g} regular polygon centered at the origin, vertices
//! at angles 2*pi*k/4g, with side k glued to the opposite side k+2g by the
//! hyperbolic translation through both side midpoints. Every vertex cycle has
//! angle sum 2*pi, so the quotient is a smooth closed genus-g surface and the
//! polygon is a fundamental domain.

use crate::error::Error;
use crate::hyp::{
    circular_separation, dist, geodesic_through, klein, BoundaryPair, CurvatureScale, DiskPoint,
    IsoClass, Isometry, Segment,
};
use crate::Result;
use num_complex::Complex64 as C;
use std::fmt;
use std::sync::OnceLock;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Distance below which a point counts as lying on a side or vertex.
pub const SIDE_TOL: f64 = 1e-9;

/// One generator letter or its inverse, ordered a < A < b < B < ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Letter {
        Letter(((gen as u8) << 1) | inverse as u8)
    }

    pub fn gen_index(&self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(&self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(&self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(&self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.gen_index() as u8) as char
    }

    pub fn from_char(c: char) -> Result<Letter> {
        match c {
            'a'..='z' => Ok(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Ok(Letter::new(c as usize - 'A' as usize, true)),
            _ => Err(Error::CacheParse(format!("invalid letter {c:?}"))),
        }
    }
}

/// A freely reduced word in the surface-group generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn new(letters: Vec<Letter>) -> GroupWord {
        GroupWord {
            letters: free_reduce(letters),
        }
    }

    pub fn empty() -> GroupWord {
        GroupWord { letters: Vec::new() }
    }

    pub fn parse(s: &str) -> Result<GroupWord> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(Letter::from_char(c)?);
        }
        Ok(GroupWord::new(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: invert(&self.letters),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut v = self.letters.clone();
        v.extend_from_slice(&other.letters);
        GroupWord::new(v)
    }

    /// u w u^-1, freely reduced.
    pub fn conjugated(&self, u: &GroupWord) -> GroupWord {
        u.concat(self).concat(&u.inverse())
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

pub(crate) fn free_reduce(letters: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub(crate) fn invert(letters: &[Letter]) -> Vec<Letter> {
    letters.iter().rev().map(|l| l.inverse()).collect()
}

pub(crate) fn cyclic_reduce(mut w: Vec<Letter>) -> Vec<Letter> {
    w = free_reduce(w);
    while w.len() >= 2 && w[0] == w[w.len() - 1].inverse() {
        w.pop();
        w.remove(0);
    }
    w
}

pub(crate) fn min_rotation(w: &[Letter]) -> Vec<Letter> {
    if w.is_empty() {
        return Vec::new();
    }
    let n = w.len();
    let mut best = 0usize;
    for i in 1..n {
        for k in 0..n {
            let a = w[(i + k) % n];
            let b = w[(best + k) % n];
            if a < b {
                best = i;
                break;
            }
            if a > b {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&w[best..]);
    out.extend_from_slice(&w[..best]);
    out
}

pub(crate) fn is_min_rotation(w: &[Letter]) -> bool {
    let n = w.len();
    for i in 1..n {
        for k in 0..n {
            let a = w[(i + k) % n];
            let b = w[k];
            if a < b {
                return false;
            }
            if a > b {
                break;
            }
        }
    }
    true
}

/// Minimal cyclic period of a word; the word is a proper power iff period < len.
pub(crate) fn cyclic_period(w: &[Letter]) -> usize {
    let n = w.len();
    'outer: for d in 1..n {
        if n % d != 0 {
            continue;
        }
        for i in 0..n {
            if w[i] != w[(i + d) % n] {
                continue 'outer;
            }
        }
        return d;
    }
    n
}

/// Location of a point relative to the fundamental polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Location {
    Inside,
    OnSide(usize),
    AtVertex(usize),
    Outside { nearest_violated: usize },
}

/// The genus-g surface model: polygon, side pairings, group data and the
/// derived constants.
#[derive(Debug)]
pub struct SurfaceModel {
    genus: usize,
    scale: CurvatureScale,
    vertices: Vec<DiskPoint>,
    sides: Vec<Segment>,
    /// Unit inward normal and offset of each side's Klein chord.
    side_lines: Vec<(C, f64)>,
    /// Isometry mapping each side's complete geodesic to the real diameter.
    side_frames: Vec<Isometry>,
    sigma: Vec<usize>,
    pairings: Vec<Isometry>,
    relator: GroupWord,
    /// Fan transforms around each vertex: copies h(F) sharing that vertex.
    vertex_fans: Vec<Vec<Isometry>>,
    /// Rotations of the relator and its inverse, for Dehn reduction.
    relator_rotations: Vec<Vec<Letter>>,
    d_vertex: f64,
    d_inradius: f64,
    systole: OnceLock<f64>,
}

/// Build the surface for genus g >= 2 at curvature -kappa.
pub fn build_surface(genus: usize, kappa: f64) -> Result<SurfaceModel> {
    if genus < 2 {
        return Err(Error::InvalidConfig(format!("genus must be >= 2, got {genus}")));
    }
    if genus > 13 {
        return Err(Error::InvalidConfig(
            "genus > 13 exceeds the a..z letter alphabet".into(),
        ));
    }
    let scale = CurvatureScale::new(kappa)?;
    let n = 4 * genus;
    let cot = 1.0 / (std::f64::consts::PI / n as f64).tan();
    let d_vertex = (cot * cot).acosh();
    let d_inradius = cot.acosh();
    let r_v = (d_vertex / 2.0).tanh();

    let vertices: Vec<DiskPoint> = (0..n)
        .map(|k| DiskPoint {
            z: C::from_polar(r_v, TWO_PI * k as f64 / n as f64),
        })
        .collect();
    let sides: Vec<Segment> = (0..n)
        .map(|k| Segment::new(vertices[k], vertices[(k + 1) % n]))
        .collect::<Result<_>>()?;

    let sigma: Vec<usize> = (0..n).map(|k| (k + 2 * genus) % n).collect();

    // Pairing across side k: the product of the reflection in the diameter
    // perpendicular to the side direction with the reflection in the side
    // geodesic, i.e. the translation through both midpoints by twice the
    // inradius. P_k carries side sigma(k) onto side k endpoint-to-endpoint.
    let pairings: Vec<Isometry> = (0..n)
        .map(|k| {
            let phi = TWO_PI * (k as f64 + 0.5) / n as f64;
            Isometry::translation(phi, 2.0 * d_inradius)
        })
        .collect();

    let side_lines = sides
        .iter()
        .map(|s| {
            let kp = klein(s.p.z);
            let kq = klein(s.q.z);
            let d = kq - kp;
            let inward = C::new(-d.im, d.re) / d.norm();
            // polygon is traversed counterclockwise, so this normal points inward
            (inward, inward.re * kp.re + inward.im * kp.im)
        })
        .collect();

    let side_frames = sides
        .iter()
        .map(|s| {
            let pair = s.pair();
            // closest point of the side geodesic to the origin
            let u = C::from_polar(1.0, pair.rep);
            let v = C::from_polar(1.0, pair.att);
            let denom = 1.0 + (u * v.conj()).re;
            let c = (u + v) / denom;
            let r = (c.norm_sqr() - 1.0).sqrt();
            let m = DiskPoint {
                z: c * (1.0 - r / c.norm()),
            };
            let t1 = Isometry::point_to_origin(m);
            let psi = t1.apply_z(C::from_polar(1.0, pair.att)).arg();
            Isometry::rotation(-psi).compose(&t1)
        })
        .collect();

    // vertex cycle word, read by walking the corner fan; its pairing product
    // must be +-identity for the gluing to close up smoothly
    let mut relator_letters = Vec::with_capacity(n);
    {
        let mut j = 0usize;
        for _ in 0..n {
            let side = (j + n - 1) % n;
            relator_letters.push(side_letter(genus, side));
            j = sigma[side];
        }
    }
    let relator = GroupWord::new(relator_letters.clone());
    if relator.len() != n {
        return Err(Error::InvalidConfig(
            "vertex cycle word does not have length 4g".into(),
        ));
    }

    let mut relator_rotations = Vec::with_capacity(2 * n);
    for base in [relator_letters.clone(), invert(&relator_letters)] {
        for i in 0..n {
            let mut rot = Vec::with_capacity(n);
            rot.extend_from_slice(&base[i..]);
            rot.extend_from_slice(&base[..i]);
            relator_rotations.push(rot);
        }
    }

    // fans: copies of the polygon around each vertex, in rotation order
    let mut vertex_fans = Vec::with_capacity(n);
    for j0 in 0..n {
        let mut fan = Vec::with_capacity(n);
        let mut h = Isometry::IDENTITY;
        let mut j = j0;
        for _ in 0..n {
            fan.push(h);
            let side = (j + n - 1) % n;
            h = h.compose(&pairings[side]);
            j = sigma[side];
        }
        vertex_fans.push(fan);
    }

    let model = SurfaceModel {
        genus,
        scale,
        vertices,
        sides,
        side_lines,
        side_frames,
        sigma,
        pairings,
        relator,
        vertex_fans,
        relator_rotations,
        d_vertex,
        d_inradius,
        systole: OnceLock::new(),
    };

    let dev = model.evaluate_word(&model.relator).deviation_from_identity();
    if dev > 1e-8 {
        return Err(Error::InvalidConfig(format!(
            "relator fails to close: deviation {dev:.3e}"
        )));
    }
    Ok(model)
}

fn side_letter(genus: usize, side: usize) -> Letter {
    if side < 2 * genus {
        Letter::new(side, false)
    } else {
        Letter::new(side - 2 * genus, true)
    }
}

impl SurfaceModel {
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn scale(&self) -> CurvatureScale {
        self.scale
    }

    pub fn kappa(&self) -> f64 {
        self.scale.kappa()
    }

    pub fn num_sides(&self) -> usize {
        4 * self.genus
    }

    pub fn vertices(&self) -> &[DiskPoint] {
        &self.vertices
    }

    pub fn sides(&self) -> &[Segment] {
        &self.sides
    }

    pub fn sigma(&self, side: usize) -> usize {
        self.sigma[side]
    }

    /// Points on side k belong to the domain iff k < sigma(k).
    pub fn owned(&self, side: usize) -> bool {
        side < self.sigma[side]
    }

    pub fn pairing(&self, side: usize) -> &Isometry {
        &self.pairings[side]
    }

    pub fn generator(&self, i: usize) -> &Isometry {
        &self.pairings[i]
    }

    pub fn relator(&self) -> &GroupWord {
        &self.relator
    }

    /// Circumradius of the polygon (kappa = 1).
    pub fn d_vertex(&self) -> f64 {
        self.d_vertex
    }

    /// Inradius of the polygon (kappa = 1).
    pub fn d_inradius(&self) -> f64 {
        self.d_inradius
    }

    /// Surface area, kappa-scaled.
    pub fn area(&self) -> f64 {
        self.scale.area(TWO_PI * (2.0 * self.genus as f64 - 2.0))
    }

    /// kappa / (2 pi^2 (g-1)), the normalized-intersection constant.
    pub fn c_star(&self) -> f64 {
        self.kappa() / (2.0 * std::f64::consts::PI.powi(2) * (self.genus as f64 - 1.0))
    }

    /// Shortest closed-geodesic length (kappa-scaled), known after a census.
    pub fn systole(&self) -> Option<f64> {
        self.systole.get().copied()
    }

    pub(crate) fn record_systole(&self, value: f64) {
        let stored = self.systole.get_or_init(|| value);
        debug_assert!(
            (stored - value).abs() < 1e-9,
            "inconsistent systole: {stored} vs {value}"
        );
    }

    /// Injectivity radius systole/2 (kappa-scaled).
    pub fn rho(&self) -> Option<f64> {
        self.systole().map(|s| s / 2.0)
    }

    pub(crate) fn fan_at_vertex(&self, j: usize) -> &[Isometry] {
        &self.vertex_fans[j]
    }

    /// Same surface with the fundamental polygon rotated by `angle`.
    /// Group elements conjugate by the rotation.
    pub fn rotated(&self, angle: f64) -> SurfaceModel {
        let h = Isometry::rotation(angle);
        let hinv = h.inverse();
        let vertices: Vec<DiskPoint> = self
            .vertices
            .iter()
            .map(|v| DiskPoint { z: h.apply_z(v.z) })
            .collect();
        let sides: Vec<Segment> = (0..self.num_sides())
            .map(|k| Segment::new(vertices[k], vertices[(k + 1) % self.num_sides()]).unwrap())
            .collect();
        let side_lines = sides
            .iter()
            .map(|s| {
                let kp = klein(s.p.z);
                let kq = klein(s.q.z);
                let d = kq - kp;
                let inward = C::new(-d.im, d.re) / d.norm();
                (inward, inward.re * kp.re + inward.im * kp.im)
            })
            .collect();
        let side_frames = self
            .side_frames
            .iter()
            .map(|t| t.compose(&hinv))
            .collect();
        let pairings: Vec<Isometry> = self
            .pairings
            .iter()
            .map(|p| h.compose(p).compose(&hinv))
            .collect();
        let vertex_fans = self
            .vertex_fans
            .iter()
            .map(|fan| fan.iter().map(|f| h.compose(f).compose(&hinv)).collect())
            .collect();
        SurfaceModel {
            genus: self.genus,
            scale: self.scale,
            vertices,
            sides,
            side_lines,
            side_frames,
            sigma: self.sigma.clone(),
            pairings,
            relator: self.relator.clone(),
            vertex_fans,
            relator_rotations: self.relator_rotations.clone(),
            d_vertex: self.d_vertex,
            d_inradius: self.d_inradius,
            systole: self.systole.clone(),
        }
    }

    /// Ordered product of generator matrices.
    pub fn evaluate_word(&self, w: &GroupWord) -> Isometry {
        self.evaluate_letters(w.letters())
    }

    pub(crate) fn evaluate_letters(&self, letters: &[Letter]) -> Isometry {
        let mut m = Isometry::IDENTITY;
        for l in letters {
            m = m.compose(self.letter_matrix(*l));
        }
        m
    }

    pub(crate) fn letter_matrix(&self, l: Letter) -> &Isometry {
        let idx = if l.is_inverse() {
            l.gen_index() + 2 * self.genus
        } else {
            l.gen_index()
        };
        &self.pairings[idx]
    }

    /// Signed hyperbolic distance from `z` to side `k`'s complete geodesic,
    /// positive on the polygon side.
    fn signed_side_distance(&self, z: C, k: usize) -> f64 {
        let w = self.side_frames[k].apply_z(z);
        let d = (2.0 * w.im.abs() / (1.0 - w.norm_sqr())).asinh();
        let (nrm, off) = self.side_lines[k];
        let zk = klein(z);
        let s = nrm.re * zk.re + nrm.im * zk.im - off;
        if s >= 0.0 {
            d
        } else {
            -d
        }
    }

    pub(crate) fn locate(&self, p: DiskPoint) -> Location {
        for (j, v) in self.vertices.iter().enumerate() {
            if dist(p, *v) <= SIDE_TOL {
                return Location::AtVertex(j);
            }
        }
        let n = self.num_sides();
        let zk = klein(p.z);
        let mut exact: Vec<(usize, f64)> = Vec::new();
        let mut coarse_ok = true;
        let mut worst = (0usize, f64::INFINITY);
        for k in 0..n {
            let (nrm, off) = self.side_lines[k];
            let s = nrm.re * zk.re + nrm.im * zk.im - off;
            if s < 1e-5 {
                coarse_ok = false;
                let d = self.signed_side_distance(p.z, k);
                exact.push((k, d));
                if d < worst.1 {
                    worst = (k, d);
                }
            }
        }
        if coarse_ok {
            return Location::Inside;
        }
        let mut on_side: Option<usize> = None;
        let mut violated: Vec<(usize, f64)> = Vec::new();
        for &(k, d) in &exact {
            if d.abs() <= SIDE_TOL {
                if on_side.is_some() {
                    // two incident sides: treat as the nearest vertex
                    let j = (0..n)
                        .min_by(|&a, &b| {
                            dist(p, self.vertices[a])
                                .partial_cmp(&dist(p, self.vertices[b]))
                                .unwrap()
                        })
                        .unwrap();
                    return Location::AtVertex(j);
                }
                on_side = Some(k);
            } else if d < 0.0 {
                violated.push((k, -d));
            }
        }
        if !violated.is_empty() {
            let nearest = violated
                .iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap()
                .0;
            return Location::Outside {
                nearest_violated: nearest,
            };
        }
        match on_side {
            Some(k) => Location::OnSide(k),
            None => {
                let _ = worst;
                Location::Inside
            }
        }
    }

    /// True iff p lies in the open polygon or on an owned side (vertices excluded).
    pub fn contains(&self, p: DiskPoint) -> bool {
        match self.locate(p) {
            Location::Inside => true,
            Location::OnSide(k) => self.owned(k),
            _ => false,
        }
    }

    /// Map p into the fundamental domain: returns (p', G) with p' = G(p).
    pub fn reduce_to_domain(&self, p: DiskPoint) -> Result<(DiskPoint, Isometry)> {
        let mut g = Isometry::IDENTITY;
        let mut cur = p;
        for _ in 0..10_000 {
            match self.locate(cur) {
                Location::Inside => return Ok((cur, g)),
                Location::OnSide(k) if self.owned(k) => return Ok((cur, g)),
                Location::OnSide(k) => {
                    let step = self.pairings[self.sigma[k]];
                    cur = step.apply(cur)?;
                    g = step.compose(&g);
                }
                Location::AtVertex(_) => {
                    return Err(Error::ReductionFailed(
                        "point lies on the vertex orbit".into(),
                    ))
                }
                Location::Outside { nearest_violated } => {
                    let step = self.pairings[self.sigma[nearest_violated]];
                    cur = step.apply(cur)?;
                    g = step.compose(&g);
                }
            }
        }
        Err(Error::ReductionFailed("iteration cap exceeded".into()))
    }

    fn dehn_step(&self, w: &[Letter]) -> Option<Vec<Letter>> {
        let n = w.len();
        let r = self.relator.len();
        let half = r / 2;
        let max_m = r.min(n);
        if max_m <= half {
            return None;
        }
        let mut doubled = Vec::with_capacity(2 * n);
        doubled.extend_from_slice(w);
        doubled.extend_from_slice(w);
        for m in (half + 1..=max_m).rev() {
            for pos in 0..n {
                let seg = &doubled[pos..pos + m];
                for rel in &self.relator_rotations {
                    if &rel[..m] == seg {
                        let mut out = invert(&rel[m..]);
                        out.extend_from_slice(&doubled[pos + m..pos + n]);
                        return Some(out);
                    }
                }
            }
        }
        None
    }

    fn half_swaps(&self, w: &[Letter]) -> Vec<Vec<Letter>> {
        let n = w.len();
        let half = self.relator.len() / 2;
        let mut out = Vec::new();
        if n < half {
            return out;
        }
        let mut doubled = Vec::with_capacity(2 * n);
        doubled.extend_from_slice(w);
        doubled.extend_from_slice(w);
        for pos in 0..n {
            let seg = &doubled[pos..pos + half];
            for rel in &self.relator_rotations {
                if &rel[..half] == seg {
                    let mut cand = invert(&rel[half..]);
                    cand.extend_from_slice(&doubled[pos + half..pos + n]);
                    out.push(cand);
                }
            }
        }
        out
    }

    /// True when the cyclic word contains no relator factor longer than half
    /// the relator (so Dehn reduction cannot shorten it).
    pub(crate) fn is_dehn_cyclically_reduced(&self, w: &[Letter]) -> bool {
        let n = w.len();
        let half = self.relator.len() / 2;
        if n == 0 {
            return false;
        }
        let probe = half + 1;
        if probe > n {
            return true;
        }
        let mut doubled = Vec::with_capacity(2 * n);
        doubled.extend_from_slice(w);
        doubled.extend_from_slice(w);
        for pos in 0..n {
            let seg = &doubled[pos..pos + probe.min(n)];
            for rel in &self.relator_rotations {
                if rel.len() >= seg.len() && &rel[..seg.len()] == seg {
                    return false;
                }
            }
        }
        true
    }

    fn canonical_cyclic(&self, start: Vec<Letter>) -> Result<Vec<Letter>> {
        let mut w = cyclic_reduce(start);
        loop {
            if w.is_empty() {
                return Err(Error::TrivialClass);
            }
            match self.dehn_step(&w) {
                Some(next) => w = cyclic_reduce(next),
                None => break,
            }
        }
        // closure over same-length half-relator substitutions
        let len = w.len();
        let mut best = min_rotation(&w);
        let mut visited = std::collections::BTreeSet::new();
        let mut queue = vec![best.clone()];
        while let Some(cur) = queue.pop() {
            if !visited.insert(cur.clone()) {
                continue;
            }
            if cur < best {
                best = cur.clone();
            }
            for cand in self.half_swaps(&cur) {
                let r = cyclic_reduce(cand);
                if r.is_empty() {
                    return Err(Error::TrivialClass);
                }
                if r.len() < len {
                    return self.canonical_cyclic(r);
                }
                debug_assert!(r.len() == len);
                let key = min_rotation(&r);
                if !visited.contains(&key) {
                    queue.push(key);
                }
            }
        }
        Ok(best)
    }

    /// Canonical cyclic representative of the conjugacy class of `w`, plus a
    /// primitivity flag. Errors with `TrivialClass` when w = 1 in the group.
    pub fn canonical_conjugacy(&self, w: &GroupWord) -> Result<(GroupWord, bool)> {
        let canon = self.canonical_cyclic(w.letters().to_vec())?;
        let primitive = cyclic_period(&canon) == canon.len();
        Ok((GroupWord { letters: canon }, primitive))
    }
}

impl Clone for SurfaceModel {
    fn clone(&self) -> Self {
        SurfaceModel {
            genus: self.genus,
            scale: self.scale,
            vertices: self.vertices.clone(),
            sides: self.sides.clone(),
            side_lines: self.side_lines.clone(),
            side_frames: self.side_frames.clone(),
            sigma: self.sigma.clone(),
            pairings: self.pairings.clone(),
            relator: self.relator.clone(),
            vertex_fans: self.vertex_fans.clone(),
            relator_rotations: self.relator_rotations.clone(),
            d_vertex: self.d_vertex,
            d_inradius: self.d_inradius,
            systole: self.systole.clone(),
        }
    }
}
