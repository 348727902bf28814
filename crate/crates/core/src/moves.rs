//! Reidemeister and forbidden moves on Gauss diagrams, driven by the pattern
//! tables in `data/moves.toml`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{CanonicalCode, Endpoint, GaussDiagram, Mark, Sign, Underlying};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveFamily {
    R1Add,
    R1Del,
    R2Add,
    R2Del,
    R3,
    Forbidden,
}

impl MoveFamily {
    pub const REIDEMEISTER: [MoveFamily; 5] =
        [MoveFamily::R1Add, MoveFamily::R1Del, MoveFamily::R2Add, MoveFamily::R2Del, MoveFamily::R3];
    pub const ALL: [MoveFamily; 6] = [
        MoveFamily::R1Add,
        MoveFamily::R1Del,
        MoveFamily::R2Add,
        MoveFamily::R2Del,
        MoveFamily::R3,
        MoveFamily::Forbidden,
    ];

    pub fn inverse(self) -> MoveFamily {
        match self {
            MoveFamily::R1Add => MoveFamily::R1Del,
            MoveFamily::R1Del => MoveFamily::R1Add,
            MoveFamily::R2Add => MoveFamily::R2Del,
            MoveFamily::R2Del => MoveFamily::R2Add,
            other => other,
        }
    }

    pub fn is_creation(self) -> bool {
        matches!(self, MoveFamily::R1Add | MoveFamily::R2Add)
    }

    /// Net change in the number of arrows.
    pub fn arrow_delta(self) -> isize {
        match self {
            MoveFamily::R1Add => 1,
            MoveFamily::R1Del => -1,
            MoveFamily::R2Add => 2,
            MoveFamily::R2Del => -2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveKind {
    pub family: MoveFamily,
    pub variant: usize,
}

/// A move at a concrete place.
///
/// `site` holds, per family:
/// * `R1Del`: the first of the two adjacent slots;
/// * `R1Add`: the gap (new slots are inserted before this position);
/// * `R2Del`: first slot of the tail pair, first slot of the head pair;
/// * `R2Add`: gap of the tails, gap of the heads (`heads_first` orders them when the gaps coincide);
/// * `R3`: first slots of the top, middle and bottom pairs;
/// * `Forbidden`: the first of the two swapped slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveInstance {
    pub kind: MoveKind,
    pub site: Vec<Endpoint>,
    #[serde(default)]
    pub heads_first: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct R1Row {
    tail_first: bool,
    sign: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct R2Row {
    parallel: bool,
    signs: [Sign; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct R3Row {
    orders: [bool; 3],
    signs: [Sign; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SwapEnds {
    Tails,
    Heads,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveTables {
    r1: Vec<R1Row>,
    r2: Vec<R2Row>,
    r3: Vec<R3Row>,
    forbidden: Vec<SwapEnds>,
}

#[derive(Deserialize)]
struct RawTables {
    version: u32,
    r1: Vec<RawR1>,
    r2: Vec<RawR2>,
    r3: Vec<RawR3>,
    forbidden: Vec<RawForbidden>,
}

#[derive(Deserialize)]
struct RawR1 {
    variant: usize,
    order: String,
    sign: String,
}

#[derive(Deserialize)]
struct RawR2 {
    variant: usize,
    heads: String,
    signs: String,
}

#[derive(Deserialize)]
struct RawR3 {
    variant: usize,
    orders: String,
    signs: String,
}

#[derive(Deserialize)]
struct RawForbidden {
    variant: usize,
    swap: String,
}

const STANDARD_TABLES: &str = include_str!("../data/moves.toml");

fn table_err(msg: impl Into<String>) -> Error {
    Error::Invalid(format!("move table: {}", msg.into()))
}

pub(crate) fn parse_sign_string(s: &str, n: usize) -> Result<Vec<Sign>> {
    let v: Vec<Sign> = s
        .chars()
        .map(|c| match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            _ => Err(table_err(format!("bad sign {c:?}"))),
        })
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(table_err(format!("expected {n} signs in {s:?}")));
    }
    Ok(v)
}

fn check_variants(vs: impl Iterator<Item = usize>, what: &str) -> Result<()> {
    for (i, v) in vs.enumerate() {
        if i != v {
            return Err(table_err(format!("{what} variants must be numbered 0, 1, ... in order")));
        }
    }
    Ok(())
}

impl MoveTables {
    /// The tables shipped with the crate.
    pub fn standard() -> &'static MoveTables {
        static TABLES: OnceLock<MoveTables> = OnceLock::new();
        TABLES.get_or_init(|| MoveTables::from_toml_str(STANDARD_TABLES).expect("shipped move table"))
    }

    pub fn load(path: &Path) -> Result<MoveTables> {
        MoveTables::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml_str(text: &str) -> Result<MoveTables> {
        let raw: RawTables = toml::from_str(text).map_err(|e| table_err(e.to_string()))?;
        if raw.version != 1 {
            return Err(table_err(format!("unsupported version {}", raw.version)));
        }
        check_variants(raw.r1.iter().map(|r| r.variant), "r1")?;
        check_variants(raw.r2.iter().map(|r| r.variant), "r2")?;
        check_variants(raw.r3.iter().map(|r| r.variant), "r3")?;
        check_variants(raw.forbidden.iter().map(|r| r.variant), "forbidden")?;
        let r1 = raw
            .r1
            .iter()
            .map(|r| {
                let tail_first = match r.order.as_str() {
                    "OU" => true,
                    "UO" => false,
                    o => return Err(table_err(format!("r1 order {o:?}"))),
                };
                Ok(R1Row { tail_first, sign: parse_sign_string(&r.sign, 1)?[0] })
            })
            .collect::<Result<_>>()?;
        let r2 = raw
            .r2
            .iter()
            .map(|r| {
                let parallel = match r.heads.as_str() {
                    "ab" => true,
                    "ba" => false,
                    o => return Err(table_err(format!("r2 heads {o:?}"))),
                };
                let s = parse_sign_string(&r.signs, 2)?;
                Ok(R2Row { parallel, signs: [s[0], s[1]] })
            })
            .collect::<Result<_>>()?;
        let r3 = raw
            .r3
            .iter()
            .map(|r| {
                let o: Vec<bool> = r
                    .orders
                    .chars()
                    .map(|c| match c {
                        'T' => Ok(true),
                        'F' => Ok(false),
                        _ => Err(table_err(format!("r3 orders {:?}", r.orders))),
                    })
                    .collect::<Result<_>>()?;
                if o.len() != 3 {
                    return Err(table_err(format!("r3 orders {:?}", r.orders)));
                }
                let s = parse_sign_string(&r.signs, 3)?;
                Ok(R3Row { orders: [o[0], o[1], o[2]], signs: [s[0], s[1], s[2]] })
            })
            .collect::<Result<_>>()?;
        let forbidden = raw
            .forbidden
            .iter()
            .map(|r| match r.swap.as_str() {
                "OO" => Ok(SwapEnds::Tails),
                "UU" => Ok(SwapEnds::Heads),
                o => Err(table_err(format!("forbidden swap {o:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(MoveTables { r1, r2, r3, forbidden })
    }

    pub fn variant_count(&self, family: MoveFamily) -> usize {
        match family {
            MoveFamily::R1Add | MoveFamily::R1Del => self.r1.len(),
            MoveFamily::R2Add | MoveFamily::R2Del => self.r2.len(),
            MoveFamily::R3 => self.r3.len(),
            MoveFamily::Forbidden => self.forbidden.len(),
        }
    }

    /// Every applicable instance of the requested families, in a fixed order.
    pub fn enumerate(&self, d: &GaussDiagram, families: &[MoveFamily]) -> Result<Vec<MoveInstance>> {
        if !d.is_chord_free() {
            return Err(Error::ChordsPresent);
        }
        let mut out = Vec::new();
        for family in MoveFamily::ALL {
            if families.contains(&family) {
                self.enumerate_family(d, family, &mut out);
            }
        }
        Ok(out)
    }

    fn enumerate_family(&self, d: &GaussDiagram, family: MoveFamily, out: &mut Vec<MoveInstance>) {
        let inst = |variant: usize, site: Vec<Endpoint>, heads_first: bool| MoveInstance {
            kind: MoveKind { family, variant },
            site,
            heads_first,
        };
        match family {
            MoveFamily::R1Add => {
                for g in gaps(d) {
                    for v in 0..self.r1.len() {
                        out.push(inst(v, vec![g], false));
                    }
                }
            }
            MoveFamily::R2Add => {
                let gs = gaps(d);
                for &g1 in &gs {
                    for &g2 in &gs {
                        for v in 0..self.r2.len() {
                            out.push(inst(v, vec![g1, g2], false));
                            if g1 == g2 {
                                out.push(inst(v, vec![g1, g2], true));
                            }
                        }
                    }
                }
            }
            MoveFamily::R1Del | MoveFamily::Forbidden => {
                for e in slots(d) {
                    if let Some(v) = self.match_site(d, family, &[e]) {
                        out.push(inst(v, vec![e], false));
                    }
                }
            }
            MoveFamily::R2Del => {
                for t in slots(d) {
                    let (Mark::Tail(a), Some(Mark::Tail(b))) = (d.mark_at(t), next(d, t).map(|e| d.mark_at(e)))
                    else {
                        continue;
                    };
                    if a == b {
                        continue;
                    }
                    for h in [d.arrows()[a].head, d.arrows()[b].head] {
                        if let Some(v) = self.match_site(d, family, &[t, h]) {
                            out.push(inst(v, vec![t, h], false));
                        }
                    }
                }
            }
            MoveFamily::R3 => {
                for t in slots(d) {
                    let (Mark::Tail(x), Some(Mark::Tail(y))) = (d.mark_at(t), next(d, t).map(|e| d.mark_at(e)))
                    else {
                        continue;
                    };
                    if x == y {
                        continue;
                    }
                    for (a, b) in [(x, y), (y, x)] {
                        let ha = d.arrows()[a].head;
                        let hb = d.arrows()[b].head;
                        let mids = [Some(ha), prev(d, ha)];
                        let bots = [Some(hb), prev(d, hb)];
                        for m in mids.into_iter().flatten() {
                            for bt in bots.into_iter().flatten() {
                                let site = vec![t, m, bt];
                                if let Some(v) = self.match_site(d, family, &site) {
                                    out.push(inst(v, site, false));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Variant of the deletion-type pattern sitting at `site`, if any.
    fn match_site(&self, d: &GaussDiagram, family: MoveFamily, site: &[Endpoint]) -> Option<usize> {
        let pair = |e: Endpoint| -> Option<(Mark, Mark)> {
            let len = d.words().get(e.component)?.len();
            if e.position >= len {
                return None;
            }
            Some((d.mark_at(e), d.mark_at(next(d, e)?)))
        };
        let sign = |i: usize| d.arrows()[i].sign;
        match family {
            MoveFamily::R1Del => {
                let (m1, m2) = pair(site[0])?;
                if !m1.is_arrow() || m2 != m1.partner() {
                    return None;
                }
                let row = R1Row { tail_first: matches!(m1, Mark::Tail(_)), sign: sign(m1.index()) };
                self.r1.iter().position(|r| *r == row)
            }
            MoveFamily::R2Del => {
                let (Mark::Tail(a), Mark::Tail(b)) = pair(site[0])? else {
                    return None;
                };
                let (Mark::Head(x), Mark::Head(y)) = pair(site[1])? else {
                    return None;
                };
                let parallel = (x, y) == (a, b);
                if a == b || !(parallel || (x, y) == (b, a)) {
                    return None;
                }
                let row = R2Row { parallel, signs: [sign(a), sign(b)] };
                self.r2.iter().position(|r| *r == row)
            }
            MoveFamily::R3 => {
                let (Mark::Tail(x), Mark::Tail(y)) = pair(site[0])? else {
                    return None;
                };
                let (m1, m2) = pair(site[1])?;
                let (head_first, a, c) = match (m1, m2) {
                    (Mark::Head(a), Mark::Tail(c)) => (true, a, c),
                    (Mark::Tail(c), Mark::Head(a)) => (false, a, c),
                    _ => return None,
                };
                let b = if a == x {
                    y
                } else if a == y {
                    x
                } else {
                    return None;
                };
                if x == y || c == a || c == b {
                    return None;
                }
                let bottom_order = match pair(site[2])? {
                    (Mark::Head(p), Mark::Head(q)) if (p, q) == (b, c) => true,
                    (Mark::Head(p), Mark::Head(q)) if (p, q) == (c, b) => false,
                    _ => return None,
                };
                let o = [a == x, head_first, bottom_order];
                let s = [sign(a), sign(b), sign(c)];
                let flipped = [!o[0], !o[1], !o[2]];
                self.r3.iter().position(|r| r.signs == s && (r.orders == o || r.orders == flipped))
            }
            MoveFamily::Forbidden => {
                let e = site[0];
                if d.underlying().is_cyclic() && d.words()[e.component].len() == 2 {
                    return None;
                }
                let kind = match pair(e)? {
                    (Mark::Tail(a), Mark::Tail(b)) if a != b => SwapEnds::Tails,
                    (Mark::Head(a), Mark::Head(b)) if a != b => SwapEnds::Heads,
                    _ => return None,
                };
                self.forbidden.iter().position(|r| *r == kind)
            }
            MoveFamily::R1Add | MoveFamily::R2Add => None,
        }
    }

    pub fn apply(&self, d: &GaussDiagram, m: &MoveInstance) -> Result<GaussDiagram> {
        if !d.is_chord_free() {
            return Err(Error::ChordsPresent);
        }
        let family = m.kind.family;
        let expected_sites = match family {
            MoveFamily::R1Add | MoveFamily::R1Del | MoveFamily::Forbidden => 1,
            MoveFamily::R2Add | MoveFamily::R2Del => 2,
            MoveFamily::R3 => 3,
        };
        if m.site.len() != expected_sites || m.kind.variant >= self.variant_count(family) {
            return Err(Error::StaleSite);
        }
        match family {
            MoveFamily::R1Add => {
                let g = m.site[0];
                check_gap(d, g)?;
                let row = self.r1[m.kind.variant];
                let n = d.arrow_count();
                let (first, second) =
                    if row.tail_first { (Mark::Tail(n), Mark::Head(n)) } else { (Mark::Head(n), Mark::Tail(n)) };
                Ok(insert_at_gaps(d, &[row.sign], &[(g, 0, first), (g, 1, second)]))
            }
            MoveFamily::R2Add => {
                let (g1, g2) = (m.site[0], m.site[1]);
                check_gap(d, g1)?;
                check_gap(d, g2)?;
                let row = self.r2[m.kind.variant];
                let (a, b) = (d.arrow_count(), d.arrow_count() + 1);
                let (tk, hk) = if g1 == g2 && m.heads_first { (2, 0) } else { (0, 2) };
                let heads = if row.parallel { [Mark::Head(a), Mark::Head(b)] } else { [Mark::Head(b), Mark::Head(a)] };
                Ok(insert_at_gaps(
                    d,
                    &row.signs,
                    &[
                        (g1, tk, Mark::Tail(a)),
                        (g1, tk + 1, Mark::Tail(b)),
                        (g2, hk, heads[0]),
                        (g2, hk + 1, heads[1]),
                    ],
                ))
            }
            _ => {
                if self.match_site(d, family, &m.site) != Some(m.kind.variant) {
                    return Err(Error::StaleSite);
                }
                match family {
                    MoveFamily::R1Del => Ok(d.without_arrows(&[d.mark_at(m.site[0]).index()])),
                    MoveFamily::R2Del => {
                        let e = m.site[0];
                        let a = d.mark_at(e).index();
                        let b = d.mark_at(next(d, e).expect("matched pair")).index();
                        Ok(d.without_arrows(&[a, b]))
                    }
                    _ => {
                        let swaps: Vec<(Endpoint, Endpoint)> =
                            m.site.iter().map(|&e| (e, next(d, e).expect("matched pair"))).collect();
                        Ok(swap_slots(d, &swaps))
                    }
                }
            }
        }
    }
}

/// Local picture of a Reidemeister move: arrows `0..signs.len()` placed in
/// blocks of adjacent slots, before and after the move. Blocks are matched by
/// index; a creation move has no arrows after.
#[derive(Debug, Clone)]
pub(crate) struct Fragment {
    pub signs: Vec<Sign>,
    pub before: Vec<Vec<Mark>>,
    pub after: Vec<Vec<Mark>>,
}

impl MoveTables {
    /// One fragment per R1, R2 and R3 variant.
    pub(crate) fn fragments(&self) -> Vec<Fragment> {
        let mut out = Vec::new();
        for r in &self.r1 {
            let block = if r.tail_first { vec![Mark::Tail(0), Mark::Head(0)] } else { vec![Mark::Head(0), Mark::Tail(0)] };
            out.push(Fragment { signs: vec![r.sign], before: vec![block], after: vec![vec![]] });
        }
        for r in &self.r2 {
            let heads = if r.parallel { vec![Mark::Head(0), Mark::Head(1)] } else { vec![Mark::Head(1), Mark::Head(0)] };
            out.push(Fragment {
                signs: r.signs.to_vec(),
                before: vec![vec![Mark::Tail(0), Mark::Tail(1)], heads],
                after: vec![vec![], vec![]],
            });
        }
        for r in &self.r3 {
            let [t, m, b] = r.orders;
            let pair = |first: bool, x: Mark, y: Mark| if first { vec![x, y] } else { vec![y, x] };
            let before = vec![
                pair(t, Mark::Tail(0), Mark::Tail(1)),
                pair(m, Mark::Head(0), Mark::Tail(2)),
                pair(b, Mark::Head(1), Mark::Head(2)),
            ];
            let after = before.iter().map(|blk| blk.iter().rev().copied().collect()).collect();
            out.push(Fragment { signs: r.signs.to_vec(), before, after });
        }
        out
    }
}

pub fn enumerate_moves(d: &GaussDiagram, families: &[MoveFamily]) -> Result<Vec<MoveInstance>> {
    MoveTables::standard().enumerate(d, families)
}

pub fn apply_move(d: &GaussDiagram, m: &MoveInstance) -> Result<GaussDiagram> {
    MoveTables::standard().apply(d, m)
}

fn slots(d: &GaussDiagram) -> impl Iterator<Item = Endpoint> + '_ {
    d.words()
        .iter()
        .enumerate()
        .flat_map(|(c, w)| (0..w.len()).map(move |p| Endpoint::new(c, p)))
}

/// Insertion points: before each slot, plus the end of every line.
pub(crate) fn gaps(d: &GaussDiagram) -> Vec<Endpoint> {
    let cyclic = d.underlying().is_cyclic();
    let mut out = Vec::new();
    for (c, w) in d.words().iter().enumerate() {
        let count = if cyclic { w.len().max(1) } else { w.len() + 1 };
        out.extend((0..count).map(|p| Endpoint::new(c, p)));
    }
    out
}

fn check_gap(d: &GaussDiagram, g: Endpoint) -> Result<()> {
    let Some(w) = d.words().get(g.component) else {
        return Err(Error::StaleSite);
    };
    let ok = if d.underlying().is_cyclic() { g.position < w.len().max(1) } else { g.position <= w.len() };
    if ok {
        Ok(())
    } else {
        Err(Error::StaleSite)
    }
}

pub(crate) fn next(d: &GaussDiagram, e: Endpoint) -> Option<Endpoint> {
    let len = d.words()[e.component].len();
    if e.position + 1 < len {
        Some(Endpoint::new(e.component, e.position + 1))
    } else if d.underlying().is_cyclic() && len >= 2 {
        Some(Endpoint::new(e.component, 0))
    } else {
        None
    }
}

pub(crate) fn prev(d: &GaussDiagram, e: Endpoint) -> Option<Endpoint> {
    let len = d.words()[e.component].len();
    if e.position > 0 {
        Some(Endpoint::new(e.component, e.position - 1))
    } else if d.underlying().is_cyclic() && len >= 2 {
        Some(Endpoint::new(e.component, len - 1))
    } else {
        None
    }
}

/// Insert new arrow marks (indices continuing after the existing arrows) at
/// gaps of `d`; marks sharing a gap are ordered by their key.
fn insert_at_gaps(d: &GaussDiagram, new_signs: &[Sign], inserts: &[(Endpoint, u8, Mark)]) -> GaussDiagram {
    let mut signs = d.arrow_signs();
    signs.extend_from_slice(new_signs);
    let words = d
        .words()
        .iter()
        .enumerate()
        .map(|(c, w)| {
            let mut nw = Vec::with_capacity(w.len() + inserts.len());
            for p in 0..=w.len() {
                let mut here: Vec<&(Endpoint, u8, Mark)> =
                    inserts.iter().filter(|(g, _, _)| *g == Endpoint::new(c, p)).collect();
                here.sort_by_key(|x| x.1);
                nw.extend(here.iter().map(|x| x.2));
                if p < w.len() {
                    nw.push(w[p]);
                }
            }
            nw
        })
        .collect();
    GaussDiagram::from_words(d.underlying(), words, &signs, &d.chord_signs()).expect("insertion into a valid diagram")
}

fn swap_slots(d: &GaussDiagram, swaps: &[(Endpoint, Endpoint)]) -> GaussDiagram {
    let mut words: Vec<Vec<Mark>> = d.words().to_vec();
    for &(x, y) in swaps {
        let t = words[x.component][x.position];
        words[x.component][x.position] = words[y.component][y.position];
        words[y.component][y.position] = t;
    }
    GaussDiagram::from_words(d.underlying(), words, &d.arrow_signs(), &d.chord_signs()).expect("swap in a valid diagram")
}

/// Add one arrow whose tail and head end up at the given slots of the new diagram.
pub fn insert_arrow(d: &GaussDiagram, tail_slot: Endpoint, head_slot: Endpoint, sign: Sign) -> Result<GaussDiagram> {
    if tail_slot == head_slot {
        return Err(Error::SlotCollision("tail and head at the same slot".into()));
    }
    let n = d.arrow_count();
    let mut words = Vec::with_capacity(d.words().len());
    for (c, w) in d.words().iter().enumerate() {
        let mut new_here: Vec<(usize, Mark)> = Vec::new();
        if tail_slot.component == c {
            new_here.push((tail_slot.position, Mark::Tail(n)));
        }
        if head_slot.component == c {
            new_here.push((head_slot.position, Mark::Head(n)));
        }
        new_here.sort();
        let len = w.len() + new_here.len();
        if new_here.iter().any(|&(p, _)| p >= len) {
            return Err(Error::SlotCollision(format!("slot beyond the end of component {c}")));
        }
        let mut old = w.iter();
        let mut nw = Vec::with_capacity(len);
        for p in 0..len {
            match new_here.iter().find(|x| x.0 == p) {
                Some(&(_, m)) => nw.push(m),
                None => nw.push(*old.next().expect("length bookkeeping")),
            }
        }
        words.push(nw);
    }
    for e in [tail_slot, head_slot] {
        if e.component >= d.words().len() {
            return Err(Error::BadIndex(format!("component {}", e.component)));
        }
    }
    let mut signs = d.arrow_signs();
    signs.push(sign);
    GaussDiagram::from_words(d.underlying(), words, &signs, &d.chord_signs())
}

/// A diagram with `arrows` arrows placed uniformly at random, with random signs.
/// Mostly virtual.
pub fn random_diagram<R: Rng>(u: Underlying, arrows: usize, rng: &mut R) -> GaussDiagram {
    let mut d = GaussDiagram::empty(u);
    let comps = u.components();
    for _ in 0..arrows {
        let tc = rng.gen_range(0..comps);
        let hc = rng.gen_range(0..comps);
        let (tp, hp) = if tc == hc {
            let len = d.words()[tc].len() + 2;
            let a = rng.gen_range(0..len);
            let mut b = rng.gen_range(0..len - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        } else {
            (rng.gen_range(0..=d.words()[tc].len()), rng.gen_range(0..=d.words()[hc].len()))
        };
        let s = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        d = insert_arrow(&d, Endpoint::new(tc, tp), Endpoint::new(hc, hp), s).expect("slots in range");
    }
    d
}

/// `steps` random Reidemeister moves. Each step picks a family uniformly among
/// those with an applicable instance, then an instance uniformly. Creation moves
/// are skipped once the diagram would exceed `arrows(d) + 4` arrows.
pub fn random_isotopy(d: &GaussDiagram, steps: usize, seed: u64) -> Result<GaussDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_isotopy_with(MoveTables::standard(), d, steps, &mut rng, d.arrow_count() + 4)
}

pub fn random_isotopy_with<R: Rng>(
    tables: &MoveTables,
    d: &GaussDiagram,
    steps: usize,
    rng: &mut R,
    max_arrows: usize,
) -> Result<GaussDiagram> {
    let mut cur = d.clone();
    for _ in 0..steps {
        let Some(m) = random_move(tables, &cur, rng, max_arrows)? else {
            break;
        };
        cur = tables.apply(&cur, &m)?;
    }
    Ok(cur)
}

/// One uniformly chosen Reidemeister instance (family first), or `None` if nothing applies.
pub fn random_move<R: Rng>(
    tables: &MoveTables,
    d: &GaussDiagram,
    rng: &mut R,
    max_arrows: usize,
) -> Result<Option<MoveInstance>> {
    let mut options: Vec<Vec<MoveInstance>> = Vec::new();
    for family in MoveFamily::REIDEMEISTER {
        if family.is_creation() && d.arrow_count() as isize + family.arrow_delta() > max_arrows as isize {
            continue;
        }
        let inst = tables.enumerate(d, &[family])?;
        if !inst.is_empty() {
            options.push(inst);
        }
    }
    Ok(options.choose(rng).and_then(|v| v.choose(rng)).cloned())
}

/// Greedily delete R2 pairs until none is left.
pub fn r2_reduce(d: &GaussDiagram) -> Result<GaussDiagram> {
    let mut cur = d.clone();
    loop {
        let inst = enumerate_moves(&cur, &[MoveFamily::R2Del])?;
        match inst.first() {
            Some(m) => cur = apply_move(&cur, m)?,
            None => return Ok(cur),
        }
    }
}

/// Whether all arrows can be removed by R2 deletions, trying every order.
pub fn is_r2_removable(d: &GaussDiagram) -> Result<bool> {
    let mut memo = HashMap::new();
    r2_removable_memo(d, &mut memo)
}

fn r2_removable_memo(d: &GaussDiagram, memo: &mut HashMap<CanonicalCode, bool>) -> Result<bool> {
    if d.arrow_count() == 0 {
        return Ok(true);
    }
    if d.arrow_count() % 2 == 1 {
        return Ok(false);
    }
    let code = d.canonical_code();
    if let Some(&v) = memo.get(&code) {
        return Ok(v);
    }
    let mut result = r2_reduce(d)?.arrow_count() == 0;
    if !result {
        for m in enumerate_moves(d, &[MoveFamily::R2Del])? {
            if r2_removable_memo(&apply_move(d, &m)?, memo)? {
                result = true;
                break;
            }
        }
    }
    memo.insert(code, result);
    Ok(result)
}

/// Colors `0..count` assigned to arrows by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<usize>,
    count: usize,
}

impl Coloring {
    pub fn new(colors: Vec<usize>, count: usize) -> Result<Self> {
        if let Some(&c) = colors.iter().find(|&&c| c >= count) {
            return Err(Error::BadIndex(format!("color {c} with {count} colors")));
        }
        Ok(Coloring { colors, count })
    }

    pub fn color(&self, arrow: usize) -> usize {
        self.colors[arrow]
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// True iff deleting the arrows of any nonempty set of colors leaves a diagram
/// whose arrows can all be removed by R2 moves.
pub fn is_destroying_coloring(d: &GaussDiagram, c: &Coloring) -> Result<bool> {
    if c.colors.len() != d.arrow_count() {
        return Err(Error::BadIndex(format!(
            "coloring covers {} arrows, diagram has {}",
            c.colors.len(),
            d.arrow_count()
        )));
    }
    let mut memo = HashMap::new();
    for s in 1u64..(1u64 << c.count) {
        let keep: Vec<bool> = c.colors.iter().map(|&col| s >> col & 1 == 0).collect();
        if !r2_removable_memo(&d.restrict_arrows(&keep), &mut memo)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bidirectional breadth-first search for a move sequence from `d1` to `d2`.
///
/// `budget` bounds the number of expanded nodes. The family set is closed under
/// inverses, and creation moves are limited to diagrams with at most
/// `max(arrows(d1), arrows(d2)) + 2` arrows. `None` only means nothing was found.
pub fn bounded_equivalence_search(
    d1: &GaussDiagram,
    d2: &GaussDiagram,
    budget: usize,
    families: &[MoveFamily],
) -> Result<Option<Vec<MoveInstance>>> {
    let cap = d1.arrow_count().max(d2.arrow_count()) + 2;
    search_with_cap(MoveTables::standard(), d1, d2, budget, families, cap)
}

pub fn search_with_cap(
    tables: &MoveTables,
    d1: &GaussDiagram,
    d2: &GaussDiagram,
    budget: usize,
    families: &[MoveFamily],
    max_arrows: usize,
) -> Result<Option<Vec<MoveInstance>>> {
    if d1.underlying() != d2.underlying() {
        return Err(Error::wrong_kind("matching underlying", d2.underlying()));
    }
    if !d1.is_chord_free() || !d2.is_chord_free() {
        return Err(Error::ChordsPresent);
    }
    let mut fams: Vec<MoveFamily> = Vec::new();
    for f in families {
        for g in [*f, f.inverse()] {
            if !fams.contains(&g) {
                fams.push(g);
            }
        }
    }
    let (c1, k1) = d1.canonical_form();
    let (c2, k2) = d2.canonical_form();
    if c1 == c2 {
        return Ok(Some(Vec::new()));
    }

    struct Side {
        parent: HashMap<CanonicalCode, Option<CanonicalCode>>,
        frontier: Vec<(CanonicalCode, GaussDiagram)>,
    }
    let mut sides = [
        Side { parent: HashMap::from([(c1.clone(), None)]), frontier: vec![(c1, k1)] },
        Side { parent: HashMap::from([(c2.clone(), None)]), frontier: vec![(c2, k2)] },
    ];
    let mut expanded = 0usize;
    let mut meeting: Option<CanonicalCode> = None;
    'outer: while expanded < budget && !sides[0].frontier.is_empty() && !sides[1].frontier.is_empty() {
        let s = if sides[0].frontier.len() <= sides[1].frontier.len() { 0 } else { 1 };
        let layer = std::mem::take(&mut sides[s].frontier);
        let mut next_layer = Vec::new();
        for (code, diag) in layer {
            if expanded >= budget {
                break 'outer;
            }
            expanded += 1;
            for m in tables.enumerate(&diag, &fams)? {
                if diag.arrow_count() as isize + m.kind.family.arrow_delta() > max_arrows as isize {
                    continue;
                }
                let (nc, nd) = tables.apply(&diag, &m)?.canonical_form();
                if sides[s].parent.contains_key(&nc) {
                    continue;
                }
                sides[s].parent.insert(nc.clone(), Some(code.clone()));
                if sides[1 - s].parent.contains_key(&nc) {
                    meeting = Some(nc);
                    break 'outer;
                }
                next_layer.push((nc, nd));
            }
        }
        sides[s].frontier = next_layer;
    }
    let Some(meet) = meeting else {
        return Ok(None);
    };
    let chain = |side: &Side| {
        let mut v = vec![meet.clone()];
        while let Some(Some(p)) = side.parent.get(v.last().unwrap()) {
            v.push(p.clone());
        }
        v
    };
    let mut codes = chain(&sides[0]);
    codes.reverse();
    codes.extend(chain(&sides[1]).into_iter().skip(1));

    // replay on the concrete input so that every site refers to real slots
    let mut cur = d1.clone();
    let mut path = Vec::new();
    for target in &codes[1..] {
        let step = tables
            .enumerate(&cur, &fams)?
            .into_iter()
            .map(|m| tables.apply(&cur, &m).map(|r| (m, r)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .find(|(_, r)| r.canonical_code() == *target)
            .expect("every search edge has an inverse move");
        path.push(step.0);
        cur = step.1;
    }
    Ok(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GaussDiagram {
        s.parse().unwrap()
    }

    fn families_of(v: &[MoveInstance]) -> Vec<MoveFamily> {
        let mut f: Vec<_> = v.iter().map(|m| m.kind.family).collect();
        f.dedup();
        f
    }

    #[test]
    fn empty_has_only_creations() {
        let m = enumerate_moves(&p("closed:"), &MoveFamily::ALL).unwrap();
        assert_eq!(families_of(&m), vec![MoveFamily::R1Add, MoveFamily::R2Add]);
    }

    #[test]
    fn kink_deletion() {
        let m = enumerate_moves(&p("long: O1+ U1+"), &[MoveFamily::R1Del]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(apply_move(&p("long: O1+ U1+"), &m[0]).unwrap().serialize(), "long:");
    }

    #[test]
    fn r2_pair_found() {
        let d = p("closed: O1+ O2- U1+ U2-");
        let m = enumerate_moves(&d, &[MoveFamily::R2Del]).unwrap();
        assert!(!m.is_empty());
        assert_eq!(apply_move(&d, &m[0]).unwrap().arrow_count(), 0);
        // two nested kinks, not an R2 pair
        let k = p("closed: O1+ U2- O2- U1+");
        assert!(enumerate_moves(&k, &[MoveFamily::R2Del]).unwrap().is_empty());
        assert_eq!(enumerate_moves(&k, &[MoveFamily::R1Del]).unwrap().len(), 2);
    }

    #[test]
    fn same_sign_pair_is_not_r2() {
        assert!(enumerate_moves(&p("long: O1+ O2+ U1+ U2+"), &[MoveFamily::R2Del]).unwrap().is_empty());
    }

    #[test]
    fn creations_are_undone() {
        let seeds = ["closed:", "long:", "closed: O1+ U2+ O3+ U1+ O2+ U3+", "long: U1- O2+ O1- U2+", "link 2: O1+ / U1+"];
        for s in seeds {
            let d = p(s);
            let code = d.canonical_code();
            for m in enumerate_moves(&d, &[MoveFamily::R1Add, MoveFamily::R2Add]).unwrap() {
                let e = apply_move(&d, &m).unwrap();
                let inv = m.kind.family.inverse();
                let back = enumerate_moves(&e, &[inv])
                    .unwrap()
                    .iter()
                    .any(|x| apply_move(&e, x).unwrap().canonical_code() == code);
                assert!(back, "{s} {m:?}");
            }
        }
    }

    #[test]
    fn stale_site_rejected() {
        let d = p("long: O1+ U1+");
        let m = MoveInstance {
            kind: MoveKind { family: MoveFamily::R1Del, variant: 0 },
            site: vec![Endpoint::new(0, 1)],
            heads_first: false,
        };
        assert!(matches!(apply_move(&d, &m), Err(Error::StaleSite)));
    }

    /// Build the configuration of one R3 row and check the move maps it to the flipped one.
    #[test]
    fn every_r3_variant_is_an_involution() {
        let tables = MoveTables::standard();
        assert_eq!(tables.r3.len(), 8);
        for (v, row) in tables.r3.iter().enumerate() {
            for orders in [row.orders, [!row.orders[0], !row.orders[1], !row.orders[2]]] {
                // string 3: top / middle / bottom, arrows a=0, b=1, c=2
                let top = if orders[0] { vec![Mark::Tail(0), Mark::Tail(1)] } else { vec![Mark::Tail(1), Mark::Tail(0)] };
                let mid = if orders[1] { vec![Mark::Head(0), Mark::Tail(2)] } else { vec![Mark::Tail(2), Mark::Head(0)] };
                let bot = if orders[2] { vec![Mark::Head(1), Mark::Head(2)] } else { vec![Mark::Head(2), Mark::Head(1)] };
                let d = GaussDiagram::from_words(crate::Underlying::StringLink(3), vec![top, mid, bot], &row.signs, &[])
                    .unwrap();
                let m = enumerate_moves(&d, &[MoveFamily::R3]).unwrap();
                assert_eq!(m.len(), 1, "variant {v}");
                assert_eq!(m[0].kind.variant, v);
                let e = apply_move(&d, &m[0]).unwrap();
                let m2 = enumerate_moves(&e, &[MoveFamily::R3]).unwrap();
                assert_eq!(m2.len(), 1);
                assert_eq!(apply_move(&e, &m2[0]).unwrap(), d);
            }
        }
    }

    #[test]
    fn forbidden_swaps() {
        let d = p("closed: O1+ O2+ U1+ U2+");
        let m = enumerate_moves(&d, &[MoveFamily::Forbidden]).unwrap();
        assert_eq!(m.len(), 2);
        let e = apply_move(&d, &m[0]).unwrap();
        assert!(e.is_realizable().unwrap());
        assert!(enumerate_moves(&p("link 2: O1+ O2+ / U1+ U2+"), &[MoveFamily::Forbidden]).unwrap().is_empty());
    }

    #[test]
    fn r2_reduction() {
        assert_eq!(r2_reduce(&p("long: O1+ O2- U1+ U2-")).unwrap().arrow_count(), 0);
        assert_eq!(r2_reduce(&p("closed:")).unwrap().arrow_count(), 0);
        let nested = p("long: O1+ O2+ O3- O4- U4- U3- U2+ U1+");
        assert_eq!(r2_reduce(&nested).unwrap().arrow_count(), 0);
    }

    #[test]
    fn colorings() {
        assert!(is_destroying_coloring(&p("closed:"), &Coloring::new(vec![], 0).unwrap()).unwrap());
        let pair = p("long: O1+ O2- U1+ U2-");
        assert!(is_destroying_coloring(&pair, &Coloring::new(vec![0, 0], 1).unwrap()).unwrap());
        assert!(!is_destroying_coloring(&pair, &Coloring::new(vec![0, 1], 2).unwrap()).unwrap());
        let var = p("string 3: O1+ O2+ O3- O4- / U1+ U3- / U2+ U4-");
        assert!(is_destroying_coloring(&var, &Coloring::new(vec![0, 1, 0, 1], 2).unwrap()).unwrap());
    }

    #[test]
    fn insertion() {
        let d = insert_arrow(&p("long:"), Endpoint::new(0, 0), Endpoint::new(0, 1), Sign::Plus).unwrap();
        assert_eq!(d.serialize(), "long: O1+ U1+");
        let d = insert_arrow(&p("long:"), Endpoint::new(0, 1), Endpoint::new(0, 0), Sign::Plus).unwrap();
        assert_eq!(d.serialize(), "long: U1+ O1+");
        assert!(insert_arrow(&p("long:"), Endpoint::new(0, 0), Endpoint::new(0, 2), Sign::Plus).is_err());
        let t = p("long: O1+ U2+ O3+ U1+ O2+ U3+");
        let e = insert_arrow(&t, Endpoint::new(0, 2), Endpoint::new(0, 7), Sign::Minus).unwrap();
        assert_eq!(e.without_arrows(&[3]), t);
    }

    #[test]
    fn searches() {
        let k = p("closed: O1+ U1+");
        let e = p("closed:");
        assert_eq!(bounded_equivalence_search(&k, &k, 10, &MoveFamily::REIDEMEISTER).unwrap(), Some(vec![]));
        let path = bounded_equivalence_search(&k, &e, 100, &MoveFamily::REIDEMEISTER).unwrap().unwrap();
        assert_eq!(path.len(), 1);
        let vt = p("closed: O1+ O2+ U1+ U2+");
        let path = bounded_equivalence_search(&vt, &e, 5000, &MoveFamily::ALL).unwrap().unwrap();
        let mut cur = vt.clone();
        for m in &path {
            cur = apply_move(&cur, m).unwrap();
        }
        assert_eq!(cur.canonical_code(), e.canonical_code());
    }

    #[test]
    fn isotopy_is_reproducible() {
        let t = p("closed: O1+ U2+ O3+ U1+ O2+ U3+");
        assert_eq!(random_isotopy(&t, 0, 1).unwrap(), t);
        assert_eq!(random_isotopy(&t, 40, 7).unwrap(), random_isotopy(&t, 40, 7).unwrap());
    }
}
