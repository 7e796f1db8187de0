//! Enumerate all primitive oriented closed geodesics of length <= T as
//! canonical conjugacy classes, with chord decompositions and the versioned
//! on-disk cache.
//!
//! Enumeration walks the tree of freely reduced words, keeps only words that
//! are their own canonical cyclic form, and stops at word length
//! L(T) = ceil(T / epsilon0). The constant epsilon0 = min ell(w)/|w| is
//! estimated over canonical words of length <= 6 at build time and then
//! validated against every canonical word the enumeration meets; a violation
//! lowers epsilon0 and re-runs, and if that fails to settle the census is
//! marked incomplete rather than silently wrong.

use crate::error::Error;
use crate::hyp::{DiskPoint, Isometry, Segment};
use crate::surface::{cyclic_period, is_min_rotation, GroupWord, Letter, SurfaceModel};
use crate::trace;
use crate::Result;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Word length used for the initial epsilon0 sweep.
const EPSILON0_SWEEP: usize = 6;

/// One primitive oriented closed geodesic.
#[derive(Debug, Clone)]
pub struct ClosedGeodesic {
    /// Cyclic canonical conjugacy word.
    pub word: GroupWord,
    /// Isometry evaluated from the canonical word.
    pub iso: Isometry,
    /// Primitive length, kappa-scaled.
    pub length: f64,
    /// Trace cut by the fundamental polygon; endpoints lie on sides; the list
    /// is cyclic with `transitions[i]` carrying chord i's exit into chord i+1.
    pub chords: Vec<Segment>,
    pub transitions: Vec<Isometry>,
    pub primitive: bool,
    /// Vertex transits met while decomposing (0 in a clean run).
    pub degenerate_events: u64,
}

/// The set of primitive oriented classes with length <= t_max.
#[derive(Debug, Clone)]
pub struct Census {
    pub genus: usize,
    pub kappa: f64,
    pub t_max: f64,
    pub epsilon0: f64,
    pub complete: bool,
    pub items: Vec<ClosedGeodesic>,
}

impl Census {
    pub fn n(&self) -> usize {
        self.items.len()
    }

    /// Restriction to length <= t (completeness inherited).
    pub fn truncated(&self, t: f64) -> Census {
        Census {
            genus: self.genus,
            kappa: self.kappa,
            t_max: t,
            epsilon0: self.epsilon0,
            complete: self.complete,
            items: self
                .items
                .iter()
                .filter(|g| g.length <= t)
                .cloned()
                .collect(),
        }
    }

    pub fn count_up_to(&self, t: f64) -> usize {
        self.items.iter().filter(|g| g.length <= t).count()
    }
}

/// Visit every canonical cyclic word of length <= l_max (primitive classes
/// only) together with its evaluated isometry.
pub(crate) fn visit_canonical_words(
    s: &SurfaceModel,
    l_max: usize,
    mut f: impl FnMut(&[Letter], &Isometry),
) {
    let n_letters = 4 * s.genus();
    let mut word: Vec<Letter> = Vec::with_capacity(l_max);
    let mut mats: Vec<Isometry> = Vec::with_capacity(l_max + 1);
    mats.push(Isometry::IDENTITY);

    struct Ctx<'a, F> {
        s: &'a SurfaceModel,
        l_max: usize,
        n_letters: usize,
        f: F,
    }

    fn rec<F: FnMut(&[Letter], &Isometry)>(
        ctx: &mut Ctx<'_, F>,
        word: &mut Vec<Letter>,
        mats: &mut Vec<Isometry>,
    ) {
        let depth = word.len();
        if depth > 0 {
            let cyclically_reduced = depth == 1 || word[0] != word[depth - 1].inverse();
            if cyclically_reduced
                && is_min_rotation(word)
                && cyclic_period(word) == depth
                && ctx.s.is_dehn_cyclically_reduced(word)
            {
                if let Ok((canon, _prim)) = ctx.s.canonical_conjugacy(&GroupWord::new(word.clone()))
                {
                    if canon.letters() == word.as_slice() {
                        (ctx.f)(word, mats.last().unwrap());
                    }
                }
            }
        }
        if depth == ctx.l_max {
            return;
        }
        let first = word.first().copied();
        let last_inv = word.last().map(|l| l.inverse());
        for code in 0..ctx.n_letters {
            let l = Letter::new(code >> 1, code & 1 == 1);
            if last_inv == Some(l) {
                continue;
            }
            if let Some(f0) = first {
                if l < f0 {
                    continue; // canonical words start with their minimal letter
                }
            }
            word.push(l);
            let m = mats.last().unwrap().compose(ctx.s.letter_matrix(l));
            mats.push(m);
            rec(ctx, word, mats);
            mats.pop();
            word.pop();
        }
    }

    let mut ctx = Ctx {
        s,
        l_max,
        n_letters,
        f: &mut f,
    };
    rec(&mut ctx, &mut word, &mut mats);
}

fn internal_length(m: &Isometry) -> f64 {
    2.0 * (m.tr().abs() / 2.0).acosh()
}

/// min ell(w)/|w| over canonical words of length <= k0.
pub fn epsilon0_estimate(s: &SurfaceModel, k0: usize) -> f64 {
    let mut best = f64::INFINITY;
    visit_canonical_words(s, k0, |w, m| {
        let ratio = internal_length(m) / w.len() as f64;
        if ratio < best {
            best = ratio;
        }
    });
    best
}

/// Enumerate the census of primitive oriented classes with length <= t_cut
/// (kappa-scaled).
pub fn enumerate_census(s: &SurfaceModel, t_cut: f64) -> Result<Census> {
    let t_int = s.scale().internal(t_cut);
    let mut eps = epsilon0_estimate(s, EPSILON0_SWEEP);
    let mut complete = true;
    let mut collected: BTreeMap<Vec<Letter>, f64> = BTreeMap::new();
    for attempt in 0..6 {
        let l_max = ((t_int / eps).ceil() as usize).max(1);
        let mut min_ratio = f64::INFINITY;
        collected.clear();
        visit_canonical_words(s, l_max, |w, m| {
            let ell = internal_length(m);
            let ratio = ell / w.len() as f64;
            if ratio < min_ratio {
                min_ratio = ratio;
            }
            if ell <= t_int {
                collected.insert(w.to_vec(), ell);
            }
        });
        if min_ratio + 1e-12 >= eps {
            complete = true;
            break;
        }
        eps = min_ratio;
        if attempt == 5 {
            complete = false;
        }
    }

    let mut items = Vec::with_capacity(collected.len());
    for (letters, ell_int) in &collected {
        let word = GroupWord::new(letters.clone());
        let iso = s.evaluate_word(&word);
        debug_assert!((internal_length(&iso) - ell_int).abs() < 1e-9);
        let (chords, transitions, degenerate_events) =
            trace::decompose_closed(s, &iso, *ell_int)?;
        let chord_sum: f64 = chords.iter().map(|c| c.length()).sum();
        if (chord_sum - ell_int).abs() > 1e-6 {
            return Err(Error::DecompositionFailed(format!(
                "chord lengths sum to {chord_sum}, expected {ell_int} for {word}"
            )));
        }
        items.push(ClosedGeodesic {
            word,
            iso,
            length: s.scale().length(*ell_int),
            chords,
            transitions,
            primitive: true,
            degenerate_events,
        });
    }

    // orientation pairing: the inverse class of every item must be present
    for (letters, _) in &collected {
        let inv = GroupWord::new(letters.clone()).inverse();
        match s.canonical_conjugacy(&inv) {
            Ok((canon, _)) => {
                if !collected.contains_key(&canon.letters().to_vec()) {
                    complete = false;
                }
            }
            Err(_) => complete = false,
        }
    }

    items.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then_with(|| a.word.letters().cmp(b.word.letters()))
    });

    if complete {
        if let Some(first) = items.first() {
            s.record_systole(first.length);
        }
    }

    Ok(Census {
        genus: s.genus(),
        kappa: s.kappa(),
        t_max: t_cut,
        epsilon0: eps,
        complete,
        items,
    })
}

/// Chord decomposition of an arbitrary hyperbolic class representative.
pub fn chord_decomposition(s: &SurfaceModel, geodesic: &ClosedGeodesic) -> Result<Vec<Segment>> {
    let ell_int = s.scale().internal(geodesic.length);
    let (chords, _, _) = trace::decompose_closed(s, &geodesic.iso, ell_int)?;
    Ok(chords)
}

/// sqrt(kappa) * T * N(T) / e^{sqrt(kappa) T}; requires a complete census.
pub fn huber_ratio(census: &Census) -> Result<f64> {
    if !census.complete {
        return Err(Error::IncompleteCensus);
    }
    let t_int = census.t_max * census.kappa.sqrt();
    Ok(t_int * census.n() as f64 / t_int.exp())
}

// --- cache -------------------------------------------------------------------

const CACHE_MAGIC: &str = "GCLAB-CENSUS v1";

/// Serialize a census to the versioned cache format (atomic write).
pub fn save_census(census: &Census, path: &Path) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&format!(
        "{CACHE_MAGIC}; g={}; kappa={}; T={}; epsilon0={:.16e}; complete={}\n",
        census.genus,
        census.kappa,
        census.t_max,
        census.epsilon0,
        census.complete as u8
    ));
    for item in &census.items {
        buf.push_str(&format!(
            "{};{:.16e};{:.16e}\n",
            item.word,
            item.length,
            item.iso.tr()
        ));
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(buf.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn header_field<'a>(part: Option<&'a str>, key: &str) -> Result<&'a str> {
    let part = part.ok_or_else(|| Error::CacheParse(format!("missing header field {key}")))?;
    part.strip_prefix(&format!("{key}="))
        .ok_or_else(|| Error::CacheParse(format!("expected header field {key}, got {part:?}")))
}

/// Load a census cache, verifying version, surface parameters and that the
/// stored lengths and traces reproduce from the words.
pub fn load_census(s: &SurfaceModel, path: &Path) -> Result<Census> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::CacheParse("empty cache file".into()))?;
    let mut parts = header.split("; ");
    let magic = parts.next().unwrap_or("");
    if magic != CACHE_MAGIC {
        return Err(Error::CacheVersion(format!(
            "bad magic {magic:?}, expected {CACHE_MAGIC:?}"
        )));
    }
    let g: usize = header_field(parts.next(), "g")?
        .parse()
        .map_err(|e| Error::CacheParse(format!("g: {e}")))?;
    let kappa: f64 = header_field(parts.next(), "kappa")?
        .parse()
        .map_err(|e| Error::CacheParse(format!("kappa: {e}")))?;
    let t_max: f64 = header_field(parts.next(), "T")?
        .parse()
        .map_err(|e| Error::CacheParse(format!("T: {e}")))?;
    let epsilon0: f64 = header_field(parts.next(), "epsilon0")?
        .parse()
        .map_err(|e| Error::CacheParse(format!("epsilon0: {e}")))?;
    let complete_raw = header_field(parts.next(), "complete")?;
    let complete = match complete_raw {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::CacheParse(format!(
                "complete must be 0 or 1, got {other:?}"
            )))
        }
    };
    if g != s.genus() || (kappa - s.kappa()).abs() > 1e-15 {
        return Err(Error::CacheVersion(format!(
            "cache is for g={g}, kappa={kappa}; surface has g={}, kappa={}",
            s.genus(),
            s.kappa()
        )));
    }

    let mut items = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            return Err(Error::CacheParse(format!(
                "blank record at line {}",
                lineno + 2
            )));
        }
        let mut fields = line.split(';');
        let (Some(word_s), Some(len_s), Some(tr_s), None) = (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) else {
            return Err(Error::CacheParse(format!(
                "record at line {} must have 3 fields",
                lineno + 2
            )));
        };
        let word = GroupWord::parse(word_s)?;
        let length: f64 = len_s
            .parse()
            .map_err(|e| Error::CacheParse(format!("length at line {}: {e}", lineno + 2)))?;
        let tr: f64 = tr_s
            .parse()
            .map_err(|e| Error::CacheParse(format!("trace at line {}: {e}", lineno + 2)))?;
        let iso = s.evaluate_word(&word);
        let ell_int = internal_length(&iso);
        let recomputed = s.scale().length(ell_int);
        if (recomputed - length).abs() > 1e-12 {
            return Err(Error::CacheChecksum(format!(
                "length of {word} recomputes to {recomputed:.17e}, stored {length:.17e}"
            )));
        }
        if (iso.tr() - tr).abs() > 1e-12 * iso.tr().abs().max(1.0) {
            return Err(Error::CacheChecksum(format!(
                "trace of {word} recomputes to {:.17e}, stored {tr:.17e}",
                iso.tr()
            )));
        }
        let (chords, transitions, degenerate_events) = trace::decompose_closed(s, &iso, ell_int)?;
        items.push(ClosedGeodesic {
            word,
            iso,
            length,
            chords,
            transitions,
            primitive: true,
            degenerate_events,
        });
    }
    let sorted = items.windows(2).all(|w| {
        (w[0].length, w[0].word.letters()) <= (w[1].length, w[1].word.letters())
    });
    if !sorted {
        return Err(Error::CacheParse("records out of order".into()));
    }
    if complete {
        if let Some(first) = items.first() {
            s.record_systole(first.length);
        }
    }
    Ok(Census {
        genus: g,
        kappa,
        t_max,
        epsilon0,
        complete,
        items,
    })
}

/// Wrap-mode arc covering one period of a closed geodesic: the decomposition
/// itself, repackaged for occupation statistics.
pub fn wrap_trace(g: &ClosedGeodesic) -> crate::flow::ArcTrace {
    let t_internal: f64 = g.chords.iter().map(|c| c.length()).sum();
    let start = crate::flow::UnitTangent {
        base: g.chords[0].p,
        angle: g.chords[0].direction_at(g.chords[0].p),
    };
    let mut cumulative = Isometry::IDENTITY;
    for t in &g.transitions {
        cumulative = t.compose(&cumulative);
    }
    crate::flow::ArcTrace {
        start,
        t: g.length,
        t_internal,
        chords: g.chords.clone(),
        transitions: g.transitions.clone(),
        cumulative,
        degenerate_events: g.degenerate_events,
    }
}
