//! Encoding of `G` as tuples over `H`.
//!
//! An element `h t_i` is sent to a tuple of width `m` (or 3 when `m = 2`)
//! whose shape records the coset `i` and whether `h` is the identity.
//! Elements with `h != 1` carry `h` in one position and `1` elsewhere; the
//! representatives themselves are marked with a fixed `xi != 1`.
//!
//! All tuple entries are local ids of `H`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::ExtensionData;
use crate::group::Subgroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// width `m`, needs `m >= 3`
    Standard,
    /// width 3, for `m = 2`
    Star,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Standard => "standard",
            Mode::Star => "star",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("subgroup is trivial; no marker element exists")]
    TrivialH,
    #[error("{mode} encoding is not available for index {m}")]
    ModeUnsupported { mode: Mode, m: usize },
    #[error("encoding collides: elements {a} and {b} both map to {tuple:?}")]
    Collision { a: usize, b: usize, tuple: Vec<usize> },
    #[error("tuple {tuple:?} is not an encoding: {reason}")]
    NotInGamma { tuple: Vec<usize>, reason: String },
}

/// Whether the `H`-part of `h t_i` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// `h != 1`; `h` appears in the tuple
    Slot,
    /// `h = 1`; marked with `xi`
    Xi,
}

/// One position of a class pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    /// holds the `H`-part, which is not the identity
    Carrier,
    Fixed(usize),
}

/// The elements `h t_i` with `h` of the given kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Class {
    pub coset: usize,
    pub kind: Kind,
}

impl Class {
    fn index(self) -> usize {
        2 * self.coset + (self.kind == Kind::Xi) as usize
    }
}

/// Smallest non-identity member of `h`, as a parent id.
pub fn choose_xi(h: &Subgroup) -> Result<usize, GammaError> {
    h.members().get(1).copied().ok_or(GammaError::TrivialH)
}

/// Default mode for an index.
pub fn auto_mode(m: usize) -> Mode {
    if m == 2 {
        Mode::Star
    } else {
        Mode::Standard
    }
}

/// Pattern of a class for marker `xi` (local id) in the given mode.
pub fn class_pattern(m: usize, mode: Mode, xi: usize, class: Class) -> Vec<Cell> {
    use Cell::{Carrier, Fixed};
    match mode {
        Mode::Standard => (0..m)
            .map(|p| match (class.kind, p == class.coset) {
                (Kind::Slot, true) => Carrier,
                (Kind::Slot, false) => Fixed(0),
                (Kind::Xi, true) => Fixed(0),
                (Kind::Xi, false) => Fixed(xi),
            })
            .collect(),
        Mode::Star => match (class.coset, class.kind) {
            (0, Kind::Slot) => vec![Carrier, Fixed(0), Fixed(0)],
            (1, Kind::Slot) => vec![Fixed(0), Carrier, Fixed(0)],
            (1, Kind::Xi) => vec![Fixed(xi), Fixed(0), Fixed(xi)],
            (0, Kind::Xi) => vec![Fixed(0), Fixed(xi), Fixed(xi)],
            _ => unreachable!("star mode has two cosets"),
        },
    }
}

fn fill(pattern: &[Cell], h: usize) -> Vec<usize> {
    pattern
        .iter()
        .map(|c| match c {
            Cell::Carrier => h,
            Cell::Fixed(v) => *v,
        })
        .collect()
}

fn classes(m: usize) -> impl Iterator<Item = Class> {
    (0..m).flat_map(|coset| [Kind::Slot, Kind::Xi].map(|kind| Class { coset, kind }))
}

/// Raw pattern encoding of every element of `G`, without any injectivity check.
pub fn encode_raw(ext: &ExtensionData, mode: Mode, xi: usize) -> Vec<Vec<usize>> {
    ext.group()
        .elements()
        .map(|g| {
            let (h, i) = ext.decompose(g);
            let kind = if h == 0 { Kind::Xi } else { Kind::Slot };
            fill(&class_pattern(ext.m(), mode, xi, Class { coset: i, kind }), h)
        })
        .collect()
}

/// First pair of elements with equal raw encodings, with the shared tuple.
pub fn find_collision(ext: &ExtensionData, mode: Mode, xi: usize) -> Option<(usize, usize, Vec<usize>)> {
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for (g, t) in encode_raw(ext, mode, xi).into_iter().enumerate() {
        if let Some(&a) = seen.get(&t) {
            return Some((a, g, t));
        }
        seen.insert(t, g);
    }
    None
}

#[derive(Debug, Clone)]
pub struct GammaCodec {
    ext: Arc<ExtensionData>,
    xi: usize,
    mode: Mode,
    patterns: Vec<Vec<Cell>>,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

/// Serialized codec: mode, marker and the full roster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecJson {
    pub mode: Mode,
    pub width: usize,
    /// local id of the marker
    pub xi: usize,
    /// parent id of each local id of `H`
    pub members: Vec<usize>,
    pub roster: Vec<RosterEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub element: usize,
    pub tuple: Vec<usize>,
}

/// Codec in the default mode for the index.
pub fn build_codec(ext: Arc<ExtensionData>) -> Result<GammaCodec, GammaError> {
    let mode = auto_mode(ext.m());
    build_codec_with_mode(ext, mode)
}

/// Codec in an explicit mode; fails if that mode's encoding is not injective.
pub fn build_codec_with_mode(ext: Arc<ExtensionData>, mode: Mode) -> Result<GammaCodec, GammaError> {
    let xi_parent = choose_xi(ext.subgroup())?;
    let xi = ext.subgroup().local_id(xi_parent).expect("member");
    let m = ext.m();
    if mode == Mode::Star && m != 2 {
        return Err(GammaError::ModeUnsupported { mode, m });
    }
    if let Some((a, b, tuple)) = find_collision(&ext, mode, xi) {
        return Err(GammaError::Collision { a, b, tuple });
    }
    let tuples = encode_raw(&ext, mode, xi);
    let index = tuples.iter().cloned().enumerate().map(|(g, t)| (t, g)).collect();
    let patterns = classes(m).map(|c| class_pattern(m, mode, xi, c)).collect();
    Ok(GammaCodec { ext, xi, mode, patterns, tuples, index })
}

impl GammaCodec {
    pub fn ext(&self) -> &Arc<ExtensionData> {
        &self.ext
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Marker as a local id of `H`.
    pub fn xi(&self) -> usize {
        self.xi
    }

    pub fn width(&self) -> usize {
        match self.mode {
            Mode::Standard => self.ext.m(),
            Mode::Star => 3,
        }
    }

    pub fn classes(&self) -> impl Iterator<Item = Class> {
        classes(self.ext.m())
    }

    pub fn pattern(&self, class: Class) -> &[Cell] {
        &self.patterns[class.index()]
    }

    pub fn class_of(&self, g: usize) -> (Class, usize) {
        let (h, i) = self.ext.decompose(g);
        let kind = if h == 0 { Kind::Xi } else { Kind::Slot };
        (Class { coset: i, kind }, h)
    }

    pub fn encode(&self, g: usize) -> &[usize] {
        &self.tuples[g]
    }

    /// Tuple for `h t_i` given in normal form.
    pub fn encode_normal(&self, h: usize, i: usize) -> Vec<usize> {
        let kind = if h == 0 { Kind::Xi } else { Kind::Slot };
        fill(self.pattern(Class { coset: i, kind }), h)
    }

    /// All encodings, indexed by element of `G`.
    pub fn domain(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    /// Class and `H`-part matched by a tuple.
    pub fn match_class(&self, tuple: &[usize]) -> Result<(Class, usize), GammaError> {
        let not_in = |reason: String| GammaError::NotInGamma { tuple: tuple.to_vec(), reason };
        if tuple.len() != self.width() {
            return Err(not_in(format!("width {} instead of {}", tuple.len(), self.width())));
        }
        for class in self.classes() {
            let mut carrier = 0;
            let fits = self.pattern(class).iter().zip(tuple).all(|(cell, &v)| match cell {
                Cell::Carrier => {
                    carrier = v;
                    v != 0
                }
                Cell::Fixed(f) => *f == v,
            });
            if fits {
                return Ok((class, carrier));
            }
        }
        Err(not_in("matches no slot or marker pattern".into()))
    }

    pub fn decode(&self, tuple: &[usize]) -> Result<usize, GammaError> {
        let (class, h) = self.match_class(tuple)?;
        Ok(self.ext.compose(h, class.coset))
    }

    /// Product by the case rules on normal forms:
    /// slot*slot `h s_i(k) c(i,j)`, marker*slot `s_i(k) c(i,j)`,
    /// slot*marker `h c(i,j)`, marker*marker `c(i,j)`, placed in coset `k(i,j)`.
    pub fn gamma_op(&self, a: &[usize], b: &[usize]) -> Result<Vec<usize>, GammaError> {
        let (ca, h) = self.match_class(a)?;
        let (cb, k) = self.match_class(b)?;
        let (i, j) = (ca.coset, cb.coset);
        let ht = self.ext.h_table();
        let c = self.ext.c_local(i, j);
        let y = match (ca.kind, cb.kind) {
            (Kind::Slot, Kind::Slot) => ht.mul(ht.mul(h, self.ext.sigma(i)[k]), c),
            (Kind::Xi, Kind::Slot) => ht.mul(self.ext.sigma(i)[k], c),
            (Kind::Slot, Kind::Xi) => ht.mul(h, c),
            (Kind::Xi, Kind::Xi) => c,
        };
        Ok(self.encode_normal(y, self.ext.k(i, j)))
    }

    /// Product by decoding, multiplying in `G` and re-encoding.
    pub fn gamma_op_generic(&self, a: &[usize], b: &[usize]) -> Result<Vec<usize>, GammaError> {
        let g = self.ext.group().mul(self.decode(a)?, self.decode(b)?);
        Ok(self.tuples[g].clone())
    }

    pub fn to_json(&self) -> CodecJson {
        CodecJson {
            mode: self.mode,
            width: self.width(),
            xi: self.xi,
            members: self.ext.subgroup().members().to_vec(),
            roster: self
                .tuples
                .iter()
                .enumerate()
                .map(|(element, t)| RosterEntry { element, tuple: t.clone() })
                .collect(),
        }
    }

    /// Element of `G` with this encoding, if any, without pattern matching.
    pub fn lookup(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }
}

/// Exhaustive checks that the encoding is a bijection onto its domain and an
/// isomorphism for both product paths. Returns the first offending pair.
pub fn check_isomorphism(codec: &GammaCodec) -> Result<(), (usize, usize)> {
    let g = codec.ext().group();
    for a in g.elements() {
        if codec.decode(codec.encode(a)).ok() != Some(a) {
            return Err((a, a));
        }
        for b in g.elements() {
            let want = codec.encode(g.mul(a, b));
            let cases = codec.gamma_op(codec.encode(a), codec.encode(b));
            let generic = codec.gamma_op_generic(codec.encode(a), codec.encode(b));
            if cases.as_deref() != Ok(want) || generic.as_deref() != Ok(want) {
                return Err((a, b));
            }
        }
    }
    Ok(())
}
