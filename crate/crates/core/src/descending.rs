//! Descending long diagrams with double points, the reduction `P` to them,
//! its arrow-diagram analogue `Q`, and the extension of a classical invariant
//! to virtual long diagrams.
//!
//! Double points are chords. A chord is kept with its first branch (`Da`) at
//! its left end; `chord(a, b, s) = -chord(b, a, -s)` is used to get there.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Write;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{subdiagram_expansion_inverse, AlgebraElement, GaussFormula};
use crate::error::{Error, Result};
use crate::formal::FormalSum;
use crate::gauss::{CanonicalCode, GaussDiagram, Mark, Sign, Underlying};
use crate::moves::parse_sign_string;

const RULES_TOML: &str = include_str!("../data/bad_chord_rules.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BadKind {
    BadArrow,
    BadChord,
}

/// The leftmost place where a long diagram fails to be descending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadFragment {
    pub kind: BadKind,
    /// Leftmost slot of the fragment: the head of a leftward arrow, or the
    /// arrow endpoint right before a chord's left end.
    pub location: usize,
}

/// One row of the bad-chord table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BadChordRule {
    pub over: bool,
    pub chord: Sign,
    pub alpha: Sign,
    /// `true` for `in alpha out` along R.
    pub in_first: bool,
    pub beta_in: Sign,
}

#[derive(Debug, Deserialize)]
struct RuleRow {
    over: bool,
    chord: String,
    alpha: String,
    order: String,
    beta_in: String,
}

#[derive(Debug, Deserialize)]
struct RuleFile {
    version: u32,
    rule: Vec<RuleRow>,
}

#[derive(Debug, Clone)]
pub struct BadChordRules {
    rules: Vec<BadChordRule>,
}

impl BadChordRules {
    pub fn standard() -> &'static BadChordRules {
        static R: OnceLock<BadChordRules> = OnceLock::new();
        R.get_or_init(|| BadChordRules::from_toml_str(RULES_TOML).expect("bundled rule file"))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: RuleFile = toml::from_str(text).map_err(|e| Error::Invalid(format!("rule file: {e}")))?;
        if f.version != 1 {
            return Err(Error::Invalid(format!("rule file version {}", f.version)));
        }
        let mut rules = Vec::new();
        for r in f.rule {
            let in_first = match r.order.as_str() {
                "in alpha out" => true,
                "out alpha in" => false,
                o => return Err(Error::Invalid(format!("rule order {o:?}"))),
            };
            rules.push(BadChordRule {
                over: r.over,
                chord: parse_sign_string(&r.chord, 1)?[0],
                alpha: parse_sign_string(&r.alpha, 1)?[0],
                in_first,
                beta_in: parse_sign_string(&r.beta_in, 1)?[0],
            });
        }
        let rs = BadChordRules { rules };
        for over in [true, false] {
            for c in [Sign::Plus, Sign::Minus] {
                for a in [Sign::Plus, Sign::Minus] {
                    if rs.rules.iter().filter(|r| r.over == over && r.chord == c && r.alpha == a).count() != 1 {
                        return Err(Error::Invalid(format!("rule file: case ({over}, {c:?}, {a:?}) not covered once")));
                    }
                }
            }
        }
        Ok(rs)
    }

    pub fn rules(&self) -> &[BadChordRule] {
        &self.rules
    }

    fn lookup(&self, over: bool, chord: Sign, alpha: Sign) -> BadChordRule {
        *self
            .rules
            .iter()
            .find(|r| r.over == over && r.chord == chord && r.alpha == alpha)
            .expect("checked on load")
    }
}

/// Build a one-component diagram from a word whose labels may have gaps;
/// used labels are renumbered in increasing order.
fn compact(u: Underlying, word: Vec<Mark>, arrow_signs: &[Sign], chord_signs: &[Sign]) -> GaussDiagram {
    let mut amap = vec![usize::MAX; arrow_signs.len()];
    let mut cmap = vec![usize::MAX; chord_signs.len()];
    for m in &word {
        match *m {
            Mark::Tail(i) | Mark::Head(i) => amap[i] = 0,
            Mark::ChordA(j) | Mark::ChordB(j) => cmap[j] = 0,
        }
    }
    let mut asg = Vec::new();
    for (i, slot) in amap.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = asg.len();
            asg.push(arrow_signs[i]);
        }
    }
    let mut csg = Vec::new();
    for (j, slot) in cmap.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = csg.len();
            csg.push(chord_signs[j]);
        }
    }
    let word = word
        .into_iter()
        .map(|m| match m {
            Mark::Tail(i) => Mark::Tail(amap[i]),
            Mark::Head(i) => Mark::Head(amap[i]),
            Mark::ChordA(j) => Mark::ChordA(cmap[j]),
            Mark::ChordB(j) => Mark::ChordB(cmap[j]),
        })
        .collect();
    GaussDiagram::from_words(u, vec![word], &asg, &csg).expect("well-formed word")
}

/// Put every chord's first branch at its left end. Returns the sign picked up.
pub fn normalize_chords(d: &GaussDiagram) -> (i64, GaussDiagram) {
    let mut flip = vec![false; d.chord_count()];
    for (j, c) in d.chords().iter().enumerate() {
        flip[j] = (c.end_a.component, c.end_a.position) > (c.end_b.component, c.end_b.position);
    }
    if !flip.contains(&true) {
        return (1, d.clone());
    }
    let words = d
        .words()
        .iter()
        .map(|w| {
            w.iter()
                .map(|&m| match m {
                    Mark::ChordA(j) if flip[j] => Mark::ChordB(j),
                    Mark::ChordB(j) if flip[j] => Mark::ChordA(j),
                    m => m,
                })
                .collect()
        })
        .collect();
    let signs: Vec<Sign> = d.chord_signs().iter().zip(&flip).map(|(&s, &f)| if f { -s } else { s }).collect();
    let k = flip.iter().filter(|&&f| f).count();
    let out = GaussDiagram::from_words(d.underlying(), words, &d.arrow_signs(), &signs).expect("same shape");
    (if k % 2 == 0 { 1 } else { -1 }, out)
}

fn normalized_sum(d: &GaussDiagram) -> FormalSum {
    let (c, n) = normalize_chords(d);
    let mut s = FormalSum::new();
    s.add_term(&n, c);
    s
}

pub fn first_bad_fragment(d: &GaussDiagram) -> Option<BadFragment> {
    let w = d.words().first()?;
    for (p, &m) in w.iter().enumerate() {
        if let Mark::Head(i) = m {
            if d.arrows()[i].tail.position > p {
                return Some(BadFragment { kind: BadKind::BadArrow, location: p });
            }
        }
        if m.is_arrow() {
            if let Some(&next) = w.get(p + 1) {
                if next.is_chord() && d.endpoint_of(next.partner()).position > p + 1 {
                    return Some(BadFragment { kind: BadKind::BadChord, location: p });
                }
            }
        }
    }
    None
}

pub fn is_descending(d: &GaussDiagram) -> Result<bool> {
    d.require(Underlying::Long)?;
    Ok(first_bad_fragment(d).is_none())
}

/// Progress data used to check that `P` and `Q` move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Progress {
    /// Chords with an endpoint left of the first bad fragment.
    pub chords_left: usize,
    /// Arrowheads left of the left end of the next chord.
    pub heads_left: usize,
    pub tails_left: usize,
}

pub fn progress(d: &GaussDiagram) -> Option<Progress> {
    let f = first_bad_fragment(d)?;
    let w = &d.words()[0];
    let mut lefts: Vec<usize> = d.chords().iter().map(|c| c.end_a.position.min(c.end_b.position)).collect();
    lefts.sort_unstable();
    let l = lefts.iter().filter(|&&x| x < f.location).count();
    let bound = lefts.get(l).copied().unwrap_or(w.len());
    Some(Progress {
        chords_left: l,
        heads_left: w[..bound].iter().filter(|m| matches!(m, Mark::Head(_))).count(),
        tails_left: w[..bound].iter().filter(|m| matches!(m, Mark::Tail(_))).count(),
    })
}

/// `A(q -> p, e) = A(p -> q, -e) - C(p, q, -e)`; the chord term is dropped past `n` chords.
fn bad_arrow_step(d: &GaussDiagram, p: usize, n: usize) -> FormalSum {
    let w = &d.words()[0];
    let Mark::Head(i) = w[p] else { unreachable!("bad arrow starts at a head") };
    let q = d.arrows()[i].tail.position;
    let e = d.arrows()[i].sign;
    let mut out = FormalSum::new();

    let mut flipped = w.clone();
    flipped[p] = Mark::Tail(i);
    flipped[q] = Mark::Head(i);
    let mut signs = d.arrow_signs();
    signs[i] = -e;
    out.add_term(&compact(Underlying::Long, flipped, &signs, &d.chord_signs()), 1);

    if d.chord_count() < n {
        let j = d.chord_count();
        let mut chorded = w.clone();
        chorded[p] = Mark::ChordA(j);
        chorded[q] = Mark::ChordB(j);
        let mut cs = d.chord_signs();
        cs.push(-e);
        out.add_term(&compact(Underlying::Long, chorded, &d.arrow_signs(), &cs), -1);
    }
    out
}

/// The isotopy pulling the double point right after slot `x` back past the
/// crossing at `x`. Returns the new diagram and the indices of alpha,
/// beta_in and beta_out in it.
fn bad_chord_move(d: &GaussDiagram, x: usize, rules: &BadChordRules) -> (GaussDiagram, [usize; 3]) {
    let w = &d.words()[0];
    let alpha = w[x].index();
    let Mark::ChordA(j) = w[x + 1] else { unreachable!("chords are normalized") };
    let t = d.chords()[j].end_b.position;
    let a = d.arrows()[alpha];
    let r = if a.tail.position == x { a.head.position } else { a.tail.position };
    let over = a.tail.position == r;
    let rule = rules.lookup(over, d.chords()[j].sign, a.sign);
    let (bi, bo) = (d.arrow_count(), d.arrow_count() + 1);
    let on_r = |b: usize| if over { Mark::Tail(b) } else { Mark::Head(b) };
    let on_t = |b: usize| if over { Mark::Head(b) } else { Mark::Tail(b) };
    let mut nw = Vec::with_capacity(w.len() + 4);
    for (q, &m) in w.iter().enumerate() {
        if q == x {
            nw.push(w[x + 1]);
        } else if q == x + 1 {
            nw.push(w[x]);
        } else if q == r {
            if rule.in_first {
                nw.extend([on_r(bi), m, on_r(bo)]);
            } else {
                nw.extend([on_r(bo), m, on_r(bi)]);
            }
        } else if q == t {
            nw.extend([on_t(bi), m, on_t(bo)]);
        } else {
            nw.push(m);
        }
    }
    let mut signs = d.arrow_signs();
    signs.extend([rule.beta_in, -rule.beta_in]);
    let out = GaussDiagram::from_words(Underlying::Long, vec![nw], &signs, &d.chord_signs()).expect("valid rewrite");
    (out, [alpha, bi, bo])
}

/// One step of `P` on a single diagram with normalized chords.
fn p_step_diagram(d: &GaussDiagram, n: usize, rules: &BadChordRules) -> Option<FormalSum> {
    let f = first_bad_fragment(d)?;
    Some(match f.kind {
        BadKind::BadArrow => bad_arrow_step(d, f.location, n),
        BadKind::BadChord => normalized_sum(&bad_chord_move(d, f.location, rules).0),
    })
}

fn check_long(d: &GaussDiagram, n: usize) -> Result<()> {
    d.require(Underlying::Long)?;
    if d.chord_count() > n {
        return Err(Error::CapExceeded { what: "chords", value: d.chord_count(), cap: n });
    }
    Ok(())
}

/// Apply `P` once to every term.
pub fn p_step(x: &FormalSum, n: usize) -> FormalSum {
    let rules = BadChordRules::standard();
    x.map_linear(|d| {
        let (c, d) = normalize_chords(d);
        match p_step_diagram(&d, n, rules) {
            Some(s) => s.scaled(c),
            None => {
                let mut s = FormalSum::new();
                s.add_term(&d, c);
                s
            }
        }
    })
}

pub const DEFAULT_STEP_LIMIT: usize = 100_000;

/// Iterate `P` until every term is descending.
pub fn reduce_to_descending(d: &GaussDiagram, n: usize) -> Result<FormalSum> {
    reduce_to_descending_traced(d, n, DEFAULT_STEP_LIMIT, None)
}

/// As [`reduce_to_descending`], with a limit on single-diagram steps and an
/// optional JSON-lines trace of every step.
pub fn reduce_to_descending_traced(
    d: &GaussDiagram,
    n: usize,
    limit: usize,
    mut trace: Option<&mut dyn Write>,
) -> Result<FormalSum> {
    check_long(d, n)?;
    let rules = BadChordRules::standard();
    let mut done = FormalSum::new();
    let mut pending = normalized_sum(d);
    let mut steps = 0;
    loop {
        let next = pending.iter().next().map(|(k, d, c)| (k.clone(), d.clone(), c));
        let Some((code, diagram, c)) = next else { break };
        pending.add_canonical(code, diagram.clone(), -c);
        let Some(out) = p_step_diagram(&diagram, n, rules) else {
            done.add_term(&diagram, c);
            continue;
        };
        steps += 1;
        if steps > limit {
            return Err(Error::StepLimit(limit));
        }
        let before = progress(&diagram).expect("not descending");
        for (o, _) in out.diagrams() {
            if let Some(after) = progress(o) {
                let ok = after.chords_left > before.chords_left
                    || (after.chords_left == before.chords_left && after.heads_left <= before.heads_left);
                if !ok {
                    return Err(Error::Invalid(format!("reduction lost progress at {diagram} -> {o}")));
                }
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            let line = json!({
                "op": "P",
                "step": steps,
                "input": diagram.serialize(),
                "coefficient": c,
                "fragment": first_bad_fragment(&diagram),
                "output": out.diagrams().map(|(o, k)| json!([k, o.serialize()])).collect::<Vec<_>>(),
            });
            writeln!(t, "{line}")?;
        }
        pending.add_scaled(&out, c);
    }
    Ok(done)
}

/// Order in which [`realize_descending_with`] tries arrow insertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionOrder {
    Forward,
    Reverse,
}

pub const REALIZE_NODE_BUDGET: usize = 2_000_000;

/// A descending diagram of a classical long knot with the given double
/// points: the fewest rightward arrows that make it planar, found by
/// breadth-first search.
pub fn realize_descending(chords: &GaussDiagram) -> Result<GaussDiagram> {
    realize_descending_with(chords, InsertionOrder::Forward)
}

pub fn realize_descending_with(chords: &GaussDiagram, order: InsertionOrder) -> Result<GaussDiagram> {
    chords.require(Underlying::Long)?;
    if chords.arrow_count() > 0 {
        return Err(Error::Invalid("expected a diagram made of chords only".into()));
    }
    let (_, start) = normalize_chords(chords);
    if start.is_planar() && first_bad_fragment(&start).is_none() {
        return Ok(start);
    }
    let mut seen: HashSet<CanonicalCode> = HashSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start.canonical_code());
    while let Some(d) = queue.pop_front() {
        let len = d.words()[0].len() + 2;
        let mut cands = Vec::new();
        for tp in 0..len {
            for hp in tp + 1..len {
                for s in [Sign::Plus, Sign::Minus] {
                    cands.push((tp, hp, s));
                }
            }
        }
        if order == InsertionOrder::Reverse {
            cands.reverse();
        }
        for (tp, hp, s) in cands {
            let e = crate::moves::insert_arrow(
                &d,
                crate::gauss::Endpoint::new(0, tp),
                crate::gauss::Endpoint::new(0, hp),
                s,
            )
            .expect("slots in range");
            if first_bad_fragment(&e).is_some() || !seen.insert(e.canonical_code()) {
                continue;
            }
            if e.is_planar() {
                return Ok(e);
            }
            if seen.len() > REALIZE_NODE_BUDGET {
                return Err(Error::CapExceeded { what: "realization nodes", value: seen.len(), cap: REALIZE_NODE_BUDGET });
            }
            queue.push_back(e);
        }
    }
    unreachable!("the search space is infinite")
}

/// The part of a diagram made of its chords.
pub fn chord_part(d: &GaussDiagram) -> GaussDiagram {
    d.restrict_arrows(&vec![false; d.arrow_count()])
}

type BaseInvariant = dyn Fn(&GaussDiagram) -> Result<i64> + Send + Sync;

/// A classical long-knot invariant of degree at most `n` with its values on
/// descending diagrams, kept by chord part.
pub struct ExtensionTable {
    base: Arc<BaseInvariant>,
    degree: usize,
    order: InsertionOrder,
    memo: RwLock<HashMap<CanonicalCode, i64>>,
    values: RwLock<HashMap<CanonicalCode, i64>>,
}

impl std::fmt::Debug for ExtensionTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtensionTable")
            .field("degree", &self.degree)
            .field("entries", &self.memo.read().map(|m| m.len()).unwrap_or(0))
            .finish()
    }
}

impl ExtensionTable {
    pub fn new<F>(degree: usize, base: F) -> Self
    where
        F: Fn(&GaussDiagram) -> Result<i64> + Send + Sync + 'static,
    {
        ExtensionTable {
            base: Arc::new(base),
            degree,
            order: InsertionOrder::Forward,
            memo: RwLock::new(HashMap::new()),
            values: RwLock::new(HashMap::new()),
        }
    }

    /// The invariant `<formula, D>` for a Gauss diagram formula.
    pub fn from_formula(degree: usize, formula: &AlgebraElement) -> Self {
        let f = GaussFormula::new(formula);
        Self::new(degree, move |d| Ok(f.eval(d)))
    }

    /// Realize chord parts with the given insertion order.
    pub fn with_order(mut self, order: InsertionOrder) -> Self {
        self.order = order;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The value on a descending diagram: the base invariant of a classical
    /// realization of its chord part, the chords resolved.
    pub fn descending_value(&self, d: &GaussDiagram) -> Result<i64> {
        let (c, chords) = normalize_chords(&chord_part(d));
        let (code, canon) = chords.canonical_form();
        if let Some(v) = self.memo.read().expect("memo lock").get(&code) {
            return Ok(c * v);
        }
        let real = realize_descending_with(&canon, self.order)?;
        let mut v = 0;
        for (r, k) in real.resolve_chords().diagrams() {
            v += k * (self.base)(r)?;
        }
        self.memo.write().expect("memo lock").insert(code, v);
        Ok(c * v)
    }
}

/// The extension of the table's invariant to a long diagram with at most
/// `degree` chords.
pub fn extend_invariant(tbl: &ExtensionTable, d: &GaussDiagram) -> Result<i64> {
    check_long(d, tbl.degree)?;
    let (c, nd) = normalize_chords(d);
    let (code, canon) = nd.canonical_form();
    if let Some(v) = tbl.values.read().expect("value lock").get(&code) {
        return Ok(c * v);
    }
    let mut v = 0;
    for (t, k) in reduce_to_descending(&canon, tbl.degree)?.diagrams() {
        v += k * tbl.descending_value(t)?;
    }
    tbl.values.write().expect("value lock").insert(code, v);
    Ok(c * v)
}

/// `Q` on arrow diagrams. Bad arrows go through `P`; a bad chord becomes the
/// seven subdiagrams of the moved diagram containing at least one of alpha
/// and the two new arrows.
pub fn q_step(x: &AlgebraElement, n: usize) -> AlgebraElement {
    let rules = BadChordRules::standard();
    x.map_linear(|d| {
        let (c, d) = normalize_chords(d);
        q_step_diagram(&d, n, rules).unwrap_or_else(|| FormalSum::from_diagram(&d)).scaled(c)
    })
}

fn q_step_diagram(d: &GaussDiagram, n: usize, rules: &BadChordRules) -> Option<FormalSum> {
    let f = first_bad_fragment(d)?;
    Some(match f.kind {
        BadKind::BadArrow => bad_arrow_step(d, f.location, n),
        BadKind::BadChord => {
            let (moved, special) = bad_chord_move(d, f.location, rules);
            let mut out = FormalSum::new();
            for mask in 1u8..8 {
                let keep: Vec<bool> = (0..moved.arrow_count())
                    .map(|i| match special.iter().position(|&s| s == i) {
                        Some(k) => mask >> k & 1 == 1,
                        None => true,
                    })
                    .collect();
                out += &normalized_sum(&moved.restrict_arrows(&keep));
            }
            out
        }
    })
}

/// Iterate `Q` until every term is descending.
pub fn reduce_q(x: &AlgebraElement, n: usize) -> Result<AlgebraElement> {
    reduce_q_traced(x, n, DEFAULT_STEP_LIMIT, None)
}

pub fn reduce_q_traced(x: &AlgebraElement, n: usize, limit: usize, mut trace: Option<&mut dyn Write>) -> Result<AlgebraElement> {
    let rules = BadChordRules::standard();
    let mut pending = FormalSum::new();
    for (d, c) in x.diagrams() {
        check_long(d, n)?;
        pending.add_scaled(&normalized_sum(d), c);
    }
    let mut done = FormalSum::new();
    let mut steps = 0;
    loop {
        let next = pending.iter().next().map(|(k, d, c)| (k.clone(), d.clone(), c));
        let Some((code, diagram, c)) = next else { break };
        pending.add_canonical(code, diagram.clone(), -c);
        let Some(out) = q_step_diagram(&diagram, n, rules) else {
            done.add_term(&diagram, c);
            continue;
        };
        steps += 1;
        if steps > limit {
            return Err(Error::StepLimit(limit));
        }
        let size = diagram.arrow_count() + diagram.chord_count();
        if let Some((o, _)) = out.diagrams().find(|(o, _)| o.arrow_count() + o.chord_count() < size) {
            return Err(Error::Invalid(format!("Q lowered the size: {diagram} -> {o}")));
        }
        if let Some(t) = trace.as_deref_mut() {
            let line = json!({
                "op": "Q",
                "step": steps,
                "input": diagram.serialize(),
                "coefficient": c,
                "fragment": first_bad_fragment(&diagram),
                "output": out.diagrams().map(|(o, k)| json!([k, o.serialize()])).collect::<Vec<_>>(),
            });
            writeln!(t, "{line}")?;
        }
        pending.add_scaled(&out, c);
    }
    Ok(done)
}

/// `pi = nu o I^-1`, with `nu` the extended invariant.
pub fn pi_map(a: &AlgebraElement, tbl: &ExtensionTable) -> Result<i64> {
    let mut v = 0;
    for (d, k) in subdiagram_expansion_inverse(a).diagrams() {
        v += k * extend_invariant(tbl, d)?;
    }
    Ok(v)
}

/// `sum of pi(A) A` over chord-free long arrow diagrams with at most `degree` arrows.
pub fn gauss_formula_from_pi(tbl: &ExtensionTable) -> Result<AlgebraElement> {
    let mut out = FormalSum::new();
    for a in crate::algebra::enumerate_arrow_diagrams(tbl.degree, Underlying::Long)? {
        let v = pi_map(&FormalSum::from_diagram(&a), tbl)?;
        out.add_term(&a, v);
    }
    Ok(out)
}
