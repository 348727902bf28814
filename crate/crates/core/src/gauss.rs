//! Gauss diagrams: arrows from the over branch to the under branch, each carrying a writhe sign,
//! plus signed chords for double points.
//!
//! Text format, one diagram per line:
//!
//! ```text
//! closed: O1+ U2+ O3+ U1+ O2+ U3+
//! long: O1+ U1+
//! link 2: O1+ / U1+
//! string 3: O1+ Da2- / U1+ / Db2-
//! ```
//!
//! `O`/`U` mark the tail/head of an arrow, `Da`/`Db` the first/second branch of a chord.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::formal::FormalSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Underlying {
    Closed,
    Long,
    Link(usize),
    StringLink(usize),
}

impl Underlying {
    pub fn components(self) -> usize {
        match self {
            Underlying::Closed | Underlying::Long => 1,
            Underlying::Link(k) | Underlying::StringLink(k) => k,
        }
    }

    /// Circles are cyclically ordered, lines linearly.
    pub fn is_cyclic(self) -> bool {
        matches!(self, Underlying::Closed | Underlying::Link(_))
    }

    fn header(self) -> String {
        match self {
            Underlying::Closed => "closed".into(),
            Underlying::Long => "long".into(),
            Underlying::Link(k) => format!("link {k}"),
            Underlying::StringLink(k) => format!("string {k}"),
        }
    }
}

impl fmt::Display for Underlying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.header())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Sign {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub component: usize,
    pub position: usize,
}

impl Endpoint {
    pub fn new(component: usize, position: usize) -> Self {
        Endpoint { component, position }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub tail: Endpoint,
    pub head: Endpoint,
    pub sign: Sign,
}

/// A double point. `end_a` is the first branch; the positive resolution is the
/// arrow `end_a -> end_b` with writhe `sign`, the negative one is the reversed
/// arrow with the opposite writhe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chord {
    pub end_a: Endpoint,
    pub end_b: Endpoint,
    pub sign: Sign,
}

/// What sits at one slot of a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Tail(usize),
    Head(usize),
    ChordA(usize),
    ChordB(usize),
}

impl Mark {
    pub fn is_arrow(self) -> bool {
        matches!(self, Mark::Tail(_) | Mark::Head(_))
    }

    pub fn is_chord(self) -> bool {
        !self.is_arrow()
    }

    pub fn index(self) -> usize {
        match self {
            Mark::Tail(i) | Mark::Head(i) | Mark::ChordA(i) | Mark::ChordB(i) => i,
        }
    }

    /// The mark at the other end of the same arrow or chord.
    pub fn partner(self) -> Mark {
        match self {
            Mark::Tail(i) => Mark::Head(i),
            Mark::Head(i) => Mark::Tail(i),
            Mark::ChordA(i) => Mark::ChordB(i),
            Mark::ChordB(i) => Mark::ChordA(i),
        }
    }

    fn kind_code(self) -> u32 {
        match self {
            Mark::Tail(_) => 0,
            Mark::Head(_) => 1,
            Mark::ChordA(_) => 2,
            Mark::ChordB(_) => 3,
        }
    }
}

/// Stable, minimal serialization used as an equality key.
///
/// For circles the minimum is taken over all basepoint rotations; labels are
/// assigned by first appearance and candidates are compared token by token,
/// a token being ordered by (label, O < U < Da < Db, + < -). Components keep
/// their labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalCode(pub String);

impl CanonicalCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussDiagram {
    underlying: Underlying,
    words: Vec<Vec<Mark>>,
    arrows: Vec<Arrow>,
    chords: Vec<Chord>,
}

impl GaussDiagram {
    pub fn empty(underlying: Underlying) -> Self {
        GaussDiagram {
            underlying,
            words: vec![Vec::new(); underlying.components()],
            arrows: Vec::new(),
            chords: Vec::new(),
        }
    }

    /// Build from per-component mark sequences. Every arrow index in
    /// `0..arrow_signs.len()` must occur once as a tail and once as a head,
    /// likewise for chords.
    pub fn from_words(
        underlying: Underlying,
        words: Vec<Vec<Mark>>,
        arrow_signs: &[Sign],
        chord_signs: &[Sign],
    ) -> Result<Self> {
        if let Underlying::Link(0) | Underlying::StringLink(0) = underlying {
            return Err(Error::Invalid("link with zero components".into()));
        }
        if words.len() != underlying.components() {
            return Err(Error::Invalid(format!(
                "{} components for {underlying}",
                words.len()
            )));
        }
        let unset = Endpoint::new(usize::MAX, usize::MAX);
        let mut arrows: Vec<Arrow> = arrow_signs
            .iter()
            .map(|&sign| Arrow { tail: unset, head: unset, sign })
            .collect();
        let mut chords: Vec<Chord> = chord_signs
            .iter()
            .map(|&sign| Chord { end_a: unset, end_b: unset, sign })
            .collect();
        for (c, w) in words.iter().enumerate() {
            for (p, &m) in w.iter().enumerate() {
                let e = Endpoint::new(c, p);
                let slot = match m {
                    Mark::Tail(i) => arrows.get_mut(i).map(|a| &mut a.tail),
                    Mark::Head(i) => arrows.get_mut(i).map(|a| &mut a.head),
                    Mark::ChordA(i) => chords.get_mut(i).map(|a| &mut a.end_a),
                    Mark::ChordB(i) => chords.get_mut(i).map(|a| &mut a.end_b),
                };
                match slot {
                    Some(s) if *s == unset => *s = e,
                    Some(_) => return Err(Error::Invalid(format!("{m:?} occurs twice"))),
                    None => return Err(Error::Invalid(format!("{m:?} has no sign entry"))),
                }
            }
        }
        let missing = arrows.iter().any(|a| a.tail == unset || a.head == unset)
            || chords.iter().any(|c| c.end_a == unset || c.end_b == unset);
        if missing {
            return Err(Error::Invalid("an arrow or chord end is missing".into()));
        }
        Ok(GaussDiagram { underlying, words, arrows, chords })
    }

    /// Build from explicit endpoints. Slots on each component must be exactly `0..len`.
    pub fn new(underlying: Underlying, arrows: Vec<Arrow>, chords: Vec<Chord>) -> Result<Self> {
        let k = underlying.components();
        let mut slots: Vec<BTreeMap<usize, Mark>> = vec![BTreeMap::new(); k];
        let mut put = |e: Endpoint, m: Mark| -> Result<()> {
            let comp = slots
                .get_mut(e.component)
                .ok_or_else(|| Error::BadIndex(format!("component {}", e.component)))?;
            if comp.insert(e.position, m).is_some() {
                return Err(Error::SlotCollision(format!(
                    "slot {} on component {} used twice",
                    e.position, e.component
                )));
            }
            Ok(())
        };
        for (i, a) in arrows.iter().enumerate() {
            put(a.tail, Mark::Tail(i))?;
            put(a.head, Mark::Head(i))?;
        }
        for (i, c) in chords.iter().enumerate() {
            put(c.end_a, Mark::ChordA(i))?;
            put(c.end_b, Mark::ChordB(i))?;
        }
        let mut words = Vec::with_capacity(k);
        for (c, comp) in slots.into_iter().enumerate() {
            if comp.keys().enumerate().any(|(i, &p)| i != p) {
                return Err(Error::SlotCollision(format!(
                    "slots on component {c} are not contiguous from 0"
                )));
            }
            words.push(comp.into_values().collect());
        }
        let a: Vec<Sign> = arrows.iter().map(|a| a.sign).collect();
        let ch: Vec<Sign> = chords.iter().map(|c| c.sign).collect();
        Self::from_words(underlying, words, &a, &ch)
    }

    pub fn underlying(&self) -> Underlying {
        self.underlying
    }

    pub fn words(&self) -> &[Vec<Mark>] {
        &self.words
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn chord_count(&self) -> usize {
        self.chords.len()
    }

    pub fn is_chord_free(&self) -> bool {
        self.chords.is_empty()
    }

    pub fn arrow_signs(&self) -> Vec<Sign> {
        self.arrows.iter().map(|a| a.sign).collect()
    }

    pub fn chord_signs(&self) -> Vec<Sign> {
        self.chords.iter().map(|c| c.sign).collect()
    }

    pub fn mark_at(&self, e: Endpoint) -> Mark {
        self.words[e.component][e.position]
    }

    pub fn endpoint_of(&self, m: Mark) -> Endpoint {
        match m {
            Mark::Tail(i) => self.arrows[i].tail,
            Mark::Head(i) => self.arrows[i].head,
            Mark::ChordA(i) => self.chords[i].end_a,
            Mark::ChordB(i) => self.chords[i].end_b,
        }
    }

    pub fn writhe(&self) -> i64 {
        self.arrows.iter().map(|a| a.sign.value()).sum()
    }

    pub(crate) fn require(&self, kind: Underlying) -> Result<()> {
        if self.underlying == kind {
            Ok(())
        } else {
            Err(Error::wrong_kind(
                match kind {
                    Underlying::Closed => "a closed",
                    Underlying::Long => "a long",
                    Underlying::Link(_) => "a link",
                    Underlying::StringLink(_) => "a string link",
                },
                self.underlying,
            ))
        }
    }

    /// Keep the arrows whose index is set in `keep` (all chords stay). Arrows are renumbered in order.
    pub fn restrict_arrows(&self, keep: &[bool]) -> GaussDiagram {
        let mut new_index = vec![usize::MAX; self.arrows.len()];
        let mut signs = Vec::new();
        for (i, a) in self.arrows.iter().enumerate() {
            if keep[i] {
                new_index[i] = signs.len();
                signs.push(a.sign);
            }
        }
        let words = self
            .words
            .iter()
            .map(|w| {
                w.iter()
                    .filter_map(|&m| match m {
                        Mark::Tail(i) if keep[i] => Some(Mark::Tail(new_index[i])),
                        Mark::Head(i) if keep[i] => Some(Mark::Head(new_index[i])),
                        Mark::Tail(_) | Mark::Head(_) => None,
                        other => Some(other),
                    })
                    .collect()
            })
            .collect();
        GaussDiagram::from_words(self.underlying, words, &signs, &self.chord_signs())
            .expect("restriction of a valid diagram")
    }

    pub fn without_arrows(&self, removed: &[usize]) -> GaussDiagram {
        let mut keep = vec![true; self.arrows.len()];
        for &i in removed {
            keep[i] = false;
        }
        self.restrict_arrows(&keep)
    }

    /// All diagrams keeping every chord and a subset of the arrows, in bitmask order.
    pub fn subdiagrams(&self) -> Subdiagrams<'_> {
        assert!(self.arrows.len() < 64, "too many arrows to enumerate subdiagrams");
        Subdiagrams { diagram: self, next: 0, end: 1u64 << self.arrows.len() }
    }

    /// Swap head and tail of every arrow; signs and chords stay.
    pub fn reverse_arrows(&self) -> GaussDiagram {
        let words = self
            .words
            .iter()
            .map(|w| {
                w.iter()
                    .map(|&m| match m {
                        Mark::Tail(i) => Mark::Head(i),
                        Mark::Head(i) => Mark::Tail(i),
                        other => other,
                    })
                    .collect()
            })
            .collect();
        GaussDiagram::from_words(self.underlying, words, &self.arrow_signs(), &self.chord_signs())
            .expect("reversal of a valid diagram")
    }

    /// Same marks, line order read as a cyclic order.
    pub fn close_long(&self) -> Result<GaussDiagram> {
        self.require(Underlying::Long)?;
        Ok(self.with_underlying(Underlying::Closed))
    }

    /// Cut a closed diagram at the basepoint just before slot `at`.
    pub fn open_at(&self, at: usize) -> Result<GaussDiagram> {
        self.require(Underlying::Closed)?;
        let w = &self.words[0];
        if w.is_empty() {
            return Ok(GaussDiagram::empty(Underlying::Long));
        }
        if at >= w.len() {
            return Err(Error::BadIndex(format!("slot {at}")));
        }
        let rotated: Vec<Mark> = w[at..].iter().chain(&w[..at]).copied().collect();
        Ok(GaussDiagram::from_words(
            Underlying::Long,
            vec![rotated],
            &self.arrow_signs(),
            &self.chord_signs(),
        )
        .expect("rotation of a valid diagram"))
    }

    pub(crate) fn with_underlying(&self, u: Underlying) -> GaussDiagram {
        debug_assert_eq!(u.components(), self.underlying.components());
        GaussDiagram { underlying: u, ..self.clone() }
    }

    /// Alternating sum over virtualizations of the marked arrows.
    pub fn expand_semi_virtual(&self, marked: &[usize]) -> FormalSum {
        let mut out = FormalSum::new();
        let k = marked.len();
        for mask in 0u64..(1u64 << k) {
            let removed: Vec<usize> =
                (0..k).filter(|b| mask >> b & 1 == 1).map(|b| marked[b]).collect();
            let coeff = if removed.len().is_multiple_of(2) { 1 } else { -1 };
            out.add_term(&self.without_arrows(&removed), coeff);
        }
        out
    }

    /// Replace each chord by its positive resolution minus its negative resolution.
    ///
    /// ```
    /// use virtknot::GaussDiagram;
    /// let d: GaussDiagram = "long: Da1+ Db1+".parse().unwrap();
    /// let r = d.resolve_chords();
    /// let plus: GaussDiagram = "long: O1+ U1+".parse().unwrap();
    /// let minus: GaussDiagram = "long: U1- O1-".parse().unwrap();
    /// assert_eq!(r.coefficient(&plus.canonical_code()), 1);
    /// assert_eq!(r.coefficient(&minus.canonical_code()), -1);
    /// assert_eq!(r.len(), 2);
    /// ```
    pub fn resolve_chords(&self) -> FormalSum {
        let mut out = FormalSum::new();
        let c = self.chords.len();
        for mask in 0u64..(1u64 << c) {
            out.add_term(&self.resolve_chords_as(mask), if mask.count_ones() % 2 == 0 { 1 } else { -1 });
        }
        out
    }

    /// Resolve every chord, negatively where the bit of `negative` is set.
    /// New arrows are appended after the existing ones in chord order.
    pub(crate) fn resolve_chords_as(&self, negative: u64) -> GaussDiagram {
        let base = self.arrows.len();
        let mut signs = self.arrow_signs();
        for (j, ch) in self.chords.iter().enumerate() {
            signs.push(if negative >> j & 1 == 1 { -ch.sign } else { ch.sign });
        }
        let words = self
            .words
            .iter()
            .map(|w| {
                w.iter()
                    .map(|&m| match m {
                        Mark::ChordA(j) if negative >> j & 1 == 1 => Mark::Head(base + j),
                        Mark::ChordA(j) => Mark::Tail(base + j),
                        Mark::ChordB(j) if negative >> j & 1 == 1 => Mark::Tail(base + j),
                        Mark::ChordB(j) => Mark::Head(base + j),
                        other => other,
                    })
                    .collect()
            })
            .collect();
        GaussDiagram::from_words(self.underlying, words, &signs, &[]).expect("resolution of a valid diagram")
    }

    /// Whether this is the Gauss diagram of a planar (classical) knot diagram.
    ///
    /// Exact for any size: the diagram is realizable iff the oriented surface
    /// built from its crossings and the ribbon structure forced by the signs has genus zero.
    pub fn is_realizable(&self) -> Result<bool> {
        match self.underlying {
            Underlying::Closed | Underlying::Long => {}
            other => return Err(Error::wrong_kind("a closed or long", other)),
        }
        if !self.is_chord_free() {
            return Err(Error::ChordsPresent);
        }
        if !self.interlacement_even() {
            return Ok(false);
        }
        Ok(self.is_planar())
    }

    /// Every arrow crosses an even number of other arrows and chords.
    pub fn interlacement_even(&self) -> bool {
        let w = &self.words[0];
        let n = self.arrows.len() + self.chords.len();
        let id = |m: Mark| match m {
            Mark::Tail(i) | Mark::Head(i) => i,
            Mark::ChordA(j) | Mark::ChordB(j) => self.arrows.len() + j,
        };
        let mut first = vec![usize::MAX; n];
        let mut second = vec![0; n];
        for (p, &m) in w.iter().enumerate() {
            let k = id(m);
            if first[k] == usize::MAX {
                first[k] = p;
            } else {
                second[k] = p;
            }
        }
        (0..n).all(|a| {
            let crossings = (0..n)
                .filter(|&b| {
                    b != a && ((first[a] < first[b] && first[b] < second[a])
                        != (first[a] < second[b] && second[b] < second[a]))
                })
                .count();
            crossings % 2 == 0
        })
    }

    /// Genus-zero test of the crossing graph of a one-component diagram, with
    /// chords treated as crossings whose first branch is the over strand.
    pub(crate) fn is_planar(&self) -> bool {
        let w = &self.words[0];
        let len = w.len();
        if len == 0 {
            return true;
        }
        // half-edge 2p: arriving at slot p, 2p+1: leaving slot p
        let inc = |p: usize| 2 * p;
        let out = |p: usize| 2 * p + 1;
        let mut rot = vec![0usize; 2 * len];
        let mut set_vertex = |t: usize, h: usize, s: Sign| {
            let cyc = match s {
                Sign::Plus => [out(t), out(h), inc(t), inc(h)],
                Sign::Minus => [out(t), inc(h), inc(t), out(h)],
            };
            for k in 0..4 {
                rot[cyc[k]] = cyc[(k + 1) % 4];
            }
        };
        for a in &self.arrows {
            set_vertex(a.tail.position, a.head.position, a.sign);
        }
        for c in &self.chords {
            set_vertex(c.end_a.position, c.end_b.position, c.sign);
        }
        let opp = |h: usize| {
            let p = h / 2;
            if h % 2 == 1 {
                inc((p + 1) % len)
            } else {
                out((p + len - 1) % len)
            }
        };
        let mut seen = vec![false; 2 * len];
        let mut faces = 0;
        for start in 0..2 * len {
            if seen[start] {
                continue;
            }
            faces += 1;
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                h = rot[opp(h)];
            }
        }
        let vertices = len / 2;
        faces == vertices + 2
    }

    /// Serialize with labels assigned by first appearance.
    pub fn serialize(&self) -> String {
        let mut arrow_label = vec![0u32; self.arrows.len()];
        let mut chord_label = vec![0u32; self.chords.len()];
        let mut next = 1u32;
        let mut s = format!("{}:", self.underlying.header());
        for (c, w) in self.words.iter().enumerate() {
            if c > 0 {
                s.push_str(" /");
            }
            for &m in w {
                let (slot, sign, tag) = match m {
                    Mark::Tail(i) => (&mut arrow_label[i], self.arrows[i].sign, "O"),
                    Mark::Head(i) => (&mut arrow_label[i], self.arrows[i].sign, "U"),
                    Mark::ChordA(i) => (&mut chord_label[i], self.chords[i].sign, "Da"),
                    Mark::ChordB(i) => (&mut chord_label[i], self.chords[i].sign, "Db"),
                };
                if *slot == 0 {
                    *slot = next;
                    next += 1;
                }
                s.push(' ');
                s.push_str(tag);
                s.push_str(&slot.to_string());
                s.push(sign.symbol());
            }
        }
        s
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        CanonicalCode(self.canonical_diagram().serialize())
    }

    /// The canonical code together with the representative it serializes,
    /// arrows and chords renumbered by first appearance.
    pub fn canonical_form(&self) -> (CanonicalCode, GaussDiagram) {
        let d = self.canonical_diagram();
        (CanonicalCode(d.serialize()), d)
    }

    fn canonical_diagram(&self) -> GaussDiagram {
        let k = self.words.len();
        let lens: Vec<usize> = self.words.iter().map(|w| w.len()).collect();
        let cyclic = self.underlying.is_cyclic();
        let mut rot = vec![0usize; k];
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        let mut key = Vec::new();
        loop {
            self.rotation_key(&rot, &mut key);
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((key.clone(), rot.clone()));
            }
            if !cyclic {
                break;
            }
            // odometer over rotations of all components
            let mut c = 0;
            while c < k {
                rot[c] += 1;
                if rot[c] < lens[c].max(1) {
                    break;
                }
                rot[c] = 0;
                c += 1;
            }
            if c == k {
                break;
            }
        }
        let (_, rot) = best.expect("at least one rotation");
        self.relabelled(&rot)
    }

    fn rotation_key(&self, rot: &[usize], key: &mut Vec<u32>) {
        key.clear();
        let mut arrow_label = vec![0u32; self.arrows.len()];
        let mut chord_label = vec![0u32; self.chords.len()];
        let mut next = 1u32;
        for (c, w) in self.words.iter().enumerate() {
            let len = w.len();
            for p in 0..len {
                let m = w[(p + rot[c]) % len];
                let (slot, sign) = match m {
                    Mark::Tail(i) | Mark::Head(i) => (&mut arrow_label[i], self.arrows[i].sign),
                    Mark::ChordA(i) | Mark::ChordB(i) => (&mut chord_label[i], self.chords[i].sign),
                };
                if *slot == 0 {
                    *slot = next;
                    next += 1;
                }
                key.push(*slot << 3 | m.kind_code() << 1 | u32::from(sign == Sign::Minus));
            }
            key.push(0);
        }
    }

    fn relabelled(&self, rot: &[usize]) -> GaussDiagram {
        let mut arrow_new = vec![usize::MAX; self.arrows.len()];
        let mut chord_new = vec![usize::MAX; self.chords.len()];
        let mut arrow_signs = Vec::with_capacity(self.arrows.len());
        let mut chord_signs = Vec::with_capacity(self.chords.len());
        let mut words = Vec::with_capacity(self.words.len());
        for (c, w) in self.words.iter().enumerate() {
            let len = w.len();
            let mut nw = Vec::with_capacity(len);
            for p in 0..len {
                let m = w[(p + rot[c]) % len];
                let nm = if m.is_arrow() {
                    let i = m.index();
                    if arrow_new[i] == usize::MAX {
                        arrow_new[i] = arrow_signs.len();
                        arrow_signs.push(self.arrows[i].sign);
                    }
                    match m {
                        Mark::Tail(_) => Mark::Tail(arrow_new[i]),
                        _ => Mark::Head(arrow_new[i]),
                    }
                } else {
                    let i = m.index();
                    if chord_new[i] == usize::MAX {
                        chord_new[i] = chord_signs.len();
                        chord_signs.push(self.chords[i].sign);
                    }
                    match m {
                        Mark::ChordA(_) => Mark::ChordA(chord_new[i]),
                        _ => Mark::ChordB(chord_new[i]),
                    }
                };
                nw.push(nm);
            }
            words.push(nw);
        }
        GaussDiagram::from_words(self.underlying, words, &arrow_signs, &chord_signs)
            .expect("relabelling of a valid diagram")
    }
}

impl fmt::Display for GaussDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl FromStr for GaussDiagram {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse_gauss_code(s)
    }
}

pub struct Subdiagrams<'a> {
    diagram: &'a GaussDiagram,
    next: u64,
    end: u64,
}

impl Iterator for Subdiagrams<'_> {
    type Item = GaussDiagram;
    fn next(&mut self) -> Option<GaussDiagram> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let keep: Vec<bool> = (0..self.diagram.arrows.len()).map(|i| mask >> i & 1 == 1).collect();
        Some(self.diagram.restrict_arrows(&keep))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Subdiagrams<'_> {}

pub fn parse_gauss_code(text: &str) -> std::result::Result<GaussDiagram, ParseError> {
    let (d, free) = parse_inner(text, false)?;
    debug_assert!(free.iter().all(|f| !f));
    Ok(d)
}

/// Like [`parse_gauss_code`], but an arrow may carry the sign `*` (sign-free).
/// Sign-free arrows get `Sign::Plus` in the diagram and `true` in the returned mask.
pub fn parse_sign_free_pattern(text: &str) -> std::result::Result<(GaussDiagram, Vec<bool>), ParseError> {
    parse_inner(text, true)
}

#[derive(Clone, Copy)]
struct RawToken {
    component: usize,
    mark_kind: u8,
    label: u32,
    sign: Option<Sign>,
    pos: usize,
}

fn perr(position: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { position, kind }
}

fn syntax(position: usize, msg: impl Into<String>) -> ParseError {
    perr(position, ParseErrorKind::Syntax(msg.into()))
}

fn parse_inner(text: &str, wildcards: bool) -> std::result::Result<(GaussDiagram, Vec<bool>), ParseError> {
    let b = text.as_bytes();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < b.len() && b[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let read_int = |pos: &mut usize| -> std::result::Result<u64, ParseError> {
        let start = *pos;
        while *pos < b.len() && b[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(syntax(start, "expected a number"));
        }
        text[start..*pos].parse::<u64>().map_err(|_| syntax(start, "number too large"))
    };

    skip_ws(&mut pos);
    let start = pos;
    while pos < b.len() && b[pos].is_ascii_alphabetic() {
        pos += 1;
    }
    let word = &text[start..pos];
    let underlying = match word {
        "closed" => Underlying::Closed,
        "long" => Underlying::Long,
        "link" | "string" => {
            skip_ws(&mut pos);
            let at = pos;
            let k = read_int(&mut pos)? as usize;
            if k == 0 {
                return Err(syntax(at, "component count must be positive"));
            }
            if word == "link" {
                Underlying::Link(k)
            } else {
                Underlying::StringLink(k)
            }
        }
        _ => return Err(syntax(start, "expected closed, long, link or string")),
    };
    skip_ws(&mut pos);
    if pos >= b.len() || b[pos] != b':' {
        return Err(syntax(pos, "expected ':'"));
    }
    pos += 1;

    let mut tokens: Vec<RawToken> = Vec::new();
    let mut component = 0;
    loop {
        skip_ws(&mut pos);
        if pos >= b.len() {
            break;
        }
        let at = pos;
        let mark_kind = match b[pos] {
            b'/' => {
                component += 1;
                pos += 1;
                continue;
            }
            b'O' => {
                pos += 1;
                0
            }
            b'U' => {
                pos += 1;
                1
            }
            b'D' => match b.get(pos + 1) {
                Some(b'a') => {
                    pos += 2;
                    2
                }
                Some(b'b') => {
                    pos += 2;
                    3
                }
                _ => return Err(syntax(at, "expected Da or Db")),
            },
            _ => return Err(syntax(at, "expected a token O, U, Da, Db or '/'")),
        };
        let lat = pos;
        let label = read_int(&mut pos)?;
        if label == 0 || label > u32::MAX as u64 {
            return Err(syntax(lat, "label must be a positive integer"));
        }
        let sign = match b.get(pos) {
            Some(b'+') => Some(Sign::Plus),
            Some(b'-') => Some(Sign::Minus),
            Some(b'*') if wildcards => None,
            _ => return Err(syntax(pos, "expected sign '+' or '-'")),
        };
        pos += 1;
        tokens.push(RawToken { component, mark_kind, label: label as u32, sign, pos: at });
    }
    let found = component + 1;
    if found != underlying.components() {
        return Err(perr(
            pos,
            ParseErrorKind::ComponentCount { expected: underlying.components(), found },
        ));
    }

    let mut by_label: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut order: Vec<u32> = Vec::new();
    for (t, tok) in tokens.iter().enumerate() {
        let e = by_label.entry(tok.label).or_default();
        if e.is_empty() {
            order.push(tok.label);
        }
        e.push(t);
    }
    let mut arrow_of: BTreeMap<u32, usize> = BTreeMap::new();
    let mut chord_of: BTreeMap<u32, usize> = BTreeMap::new();
    let mut arrow_signs = Vec::new();
    let mut free = Vec::new();
    let mut chord_signs = Vec::new();
    for label in order {
        let occ = &by_label[&label];
        if occ.len() != 2 {
            let at = if occ.len() > 2 { tokens[occ[2]].pos } else { tokens[occ[0]].pos };
            return Err(perr(at, ParseErrorKind::LabelCount { label, count: occ.len() }));
        }
        let (t1, t2) = (tokens[occ[0]], tokens[occ[1]]);
        let kinds = (t1.mark_kind.min(t2.mark_kind), t1.mark_kind.max(t2.mark_kind));
        if kinds != (0, 1) && kinds != (2, 3) {
            return Err(perr(t2.pos, ParseErrorKind::OverUnderMismatch { label }));
        }
        if t1.sign != t2.sign {
            return Err(perr(t2.pos, ParseErrorKind::SignMismatch { label }));
        }
        if kinds == (0, 1) {
            arrow_of.insert(label, arrow_signs.len());
            arrow_signs.push(t1.sign.unwrap_or(Sign::Plus));
            free.push(t1.sign.is_none());
        } else {
            if t1.sign.is_none() {
                return Err(syntax(t1.pos, "chords cannot be sign-free"));
            }
            chord_of.insert(label, chord_signs.len());
            chord_signs.push(t1.sign.unwrap());
        }
    }
    let mut words = vec![Vec::new(); underlying.components()];
    for tok in &tokens {
        let m = match tok.mark_kind {
            0 => Mark::Tail(arrow_of[&tok.label]),
            1 => Mark::Head(arrow_of[&tok.label]),
            2 => Mark::ChordA(chord_of[&tok.label]),
            _ => Mark::ChordB(chord_of[&tok.label]),
        };
        words[tok.component].push(m);
    }
    let d = GaussDiagram::from_words(underlying, words, &arrow_signs, &chord_signs)
        .map_err(|e| syntax(0, e.to_string()))?;
    Ok((d, free))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GaussDiagram {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(p("closed: O1+ U2+ O3+ U1+ O2+ U3+").arrow_count(), 3);
        assert_eq!(p("closed:").arrow_count(), 0);
        let k = p("long: O1+ U1+");
        assert_eq!(k.arrow_count(), 1);
        assert_eq!(k.arrows()[0].tail.position, 0);
        assert_eq!(p("link 2: O1+ / U1+").underlying(), Underlying::Link(2));
        assert_eq!(p("long:O1+U1+").serialize(), "long: O1+ U1+");
    }

    #[test]
    fn parse_errors() {
        let e = parse_gauss_code("closed: O1+ U1").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.position, 14);
        let e = parse_gauss_code("closed: O1+ U2+").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::LabelCount { label: 1, count: 1 }));
        let e = parse_gauss_code("closed: O1+ O1+").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::OverUnderMismatch { label: 1 }));
        let e = parse_gauss_code("closed: O1+ U1-").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::SignMismatch { label: 1 }));
        let e = parse_gauss_code("closed: O1+ / U1+").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ComponentCount { expected: 1, found: 2 }));
        assert!(parse_gauss_code("closed: O1* U1*").is_err());
        assert!(parse_gauss_code("knot: O1+ U1+").is_err());
    }

    #[test]
    fn serialize_examples() {
        assert_eq!(GaussDiagram::empty(Underlying::Closed).serialize(), "closed:");
        assert_eq!(p("long: O7+ U7+").serialize(), "long: O1+ U1+");
        assert_eq!(p("link 2: / ").serialize(), "link 2: /");
        assert_eq!(p("string 2: O1+ Da2- / U1+ Db2-").serialize(), "string 2: O1+ Da2- / U1+ Db2-");
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(p("closed: O1+ U1+").canonical_code(), p("closed: U1+ O1+").canonical_code());
        assert_eq!(
            p("long: O1+ O2- U1+ U2-").canonical_code(),
            p("long: O2+ O1- U2+ U1-").canonical_code()
        );
        assert_ne!(
            p("closed: O1+ U2+ O3+ U1+ O2+ U3+").canonical_code(),
            p("closed: O1+ O2+ U1+ U2+").canonical_code()
        );
        assert_ne!(p("long: O1+ U1+").canonical_code(), p("long: U1+ O1+").canonical_code());
        assert_eq!(p("closed: U1+ O1+").canonical_code().as_str(), "closed: O1+ U1+");
    }

    #[test]
    fn subdiagram_counts() {
        assert_eq!(p("closed:").subdiagrams().count(), 1);
        assert_eq!(p("closed: O1+ O2+ U1+ U2+").subdiagrams().count(), 4);
        let subs: Vec<_> = p("long: Da1+ O2- Db1+ U2-").subdiagrams().collect();
        assert_eq!(subs.len(), 2);
        assert!(subs.iter().all(|s| s.chord_count() == 1));
    }

    #[test]
    fn reversal() {
        assert_eq!(p("long: O1+ U1+").reverse_arrows().serialize(), "long: U1+ O1+");
        let t = p("closed: O1+ U2+ O3+ U1+ O2+ U3+");
        assert_eq!(t.reverse_arrows().reverse_arrows(), t);
        assert_eq!(t.reverse_arrows().serialize(), "closed: U1+ O2+ U3+ O1+ U2+ O3+");
    }

    #[test]
    fn closing() {
        assert_eq!(p("long:").close_long().unwrap().serialize(), "closed:");
        assert_eq!(p("long: O1+ U1+").close_long().unwrap().serialize(), "closed: O1+ U1+");
        assert!(p("closed:").close_long().is_err());
    }

    #[test]
    fn semi_virtual() {
        let d = p("closed: O1+ O2+ U1+ U2+");
        assert_eq!(d.expand_semi_virtual(&[]).len(), 1);
        let one = d.expand_semi_virtual(&[0]);
        assert_eq!(one.coefficient(&d.canonical_code()), 1);
        assert_eq!(one.coefficient(&p("closed: O1+ U1+").canonical_code()), -1);
        let all = d.expand_semi_virtual(&[0, 1]);
        assert_eq!(all.coefficient(&p("closed:").canonical_code()), 1);
        assert_eq!(all.coefficient(&p("closed: O1+ U1+").canonical_code()), -2);
    }

    #[test]
    fn chord_resolution_two_chords() {
        let d = p("long: Da1+ Da2- Db1+ Db2-");
        let r = d.resolve_chords();
        assert_eq!(r.len(), 4);
        let coeff: Vec<i64> = (0..4u64)
            .map(|m| r.coefficient(&d.resolve_chords_as(m).canonical_code()))
            .collect();
        assert_eq!(coeff, vec![1, -1, -1, 1]);
    }

    #[test]
    fn realizability_examples() {
        assert!(p("closed: O1+ U2+ O3+ U1+ O2+ U3+").is_realizable().unwrap());
        assert!(p("closed:").is_realizable().unwrap());
        assert!(!p("closed: O1+ O2+ U1+ U2+").is_realizable().unwrap());
        assert!(p("closed: O1+ U1+").is_realizable().unwrap());
        assert!(p("closed: O1- U1-").is_realizable().unwrap());
        // figure eight
        assert!(p("closed: O1- U2- O3+ U4+ O2- U1- O4+ U3+").is_realizable().unwrap());
        // even interlacement but the signs do not fit a planar curve
        assert!(!p("closed: O1+ U2+ O3- U1+ O2+ U3-").is_realizable().unwrap());
        assert!(p("link 2: /").is_realizable().is_err());
    }
}
