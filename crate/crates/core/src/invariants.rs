//! Concrete invariants: linking numbers, the degree two long invariants, the
//! degree three closed invariant, Wirtinger groups, longitudes and quandles.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::{for_each_subset_upto, AlgebraElement, GaussFormula, SignFreePattern};
use crate::error::{Error, Result};
use crate::formal::FormalSum;
use crate::gauss::{GaussDiagram, Mark, Sign, Underlying};
use crate::linalg::smith_invariants;

const PATTERNS_TOML: &str = include_str!("../data/patterns.toml");

#[derive(Debug, Deserialize)]
struct PatternEntry {
    pattern: Option<String>,
    terms: Option<Vec<(i64, String)>>,
}

#[derive(Debug, Deserialize)]
struct PatternFile {
    version: u32,
    #[serde(flatten)]
    entries: BTreeMap<String, PatternEntry>,
}

/// Named Gauss diagram formulas read from a pattern file.
#[derive(Debug, Clone)]
pub struct PatternSet {
    formulas: BTreeMap<String, AlgebraElement>,
}

impl PatternSet {
    pub fn standard() -> &'static PatternSet {
        static SET: OnceLock<PatternSet> = OnceLock::new();
        SET.get_or_init(|| PatternSet::from_toml_str(PATTERNS_TOML).expect("bundled pattern file"))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PatternFile = toml::from_str(text).map_err(|e| Error::Invalid(format!("pattern file: {e}")))?;
        if file.version != 1 {
            return Err(Error::Invalid(format!("pattern file version {}", file.version)));
        }
        let mut formulas = BTreeMap::new();
        for (name, e) in file.entries {
            let mut f = FormalSum::new();
            if let Some(p) = &e.pattern {
                f += &SignFreePattern::parse(p)?.expand();
            }
            for (k, code) in e.terms.iter().flatten() {
                f.add_term(&code.parse::<GaussDiagram>()?, *k);
            }
            formulas.insert(name, f);
        }
        for name in ["v21", "v22", "v3"] {
            if !formulas.contains_key(name) {
                return Err(Error::Invalid(format!("pattern file lacks `{name}`")));
            }
        }
        Ok(PatternSet { formulas })
    }

    pub fn get(&self, name: &str) -> Option<&AlgebraElement> {
        self.formulas.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.formulas.keys().map(String::as_str)
    }
}

fn formula(name: &'static str) -> &'static GaussFormula {
    static CACHE: OnceLock<BTreeMap<&'static str, GaussFormula>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        ["v21", "v22", "v3"]
            .into_iter()
            .map(|n| (n, GaussFormula::new(PatternSet::standard().get(n).expect("checked on load"))))
            .collect()
    });
    &all[name]
}

/// Sum of the signs of arrows from component `i` to component `j` (0-based).
pub fn lk_over(d: &GaussDiagram, i: usize, j: usize) -> Result<i64> {
    let k = match d.underlying() {
        Underlying::Link(k) | Underlying::StringLink(k) => k,
        other => return Err(Error::wrong_kind("a link or string link", other)),
    };
    if i >= k || j >= k || i == j {
        return Err(Error::BadIndex(format!("components ({i}, {j}) of {k}")));
    }
    Ok(d.arrows()
        .iter()
        .filter(|a| a.tail.component == i && a.head.component == j)
        .map(|a| a.sign.value())
        .sum())
}

fn long_chord_free(d: &GaussDiagram) -> Result<()> {
    d.require(Underlying::Long)?;
    if !d.is_chord_free() {
        return Err(Error::ChordsPresent);
    }
    Ok(())
}

pub fn v21(d: &GaussDiagram) -> Result<i64> {
    long_chord_free(d)?;
    Ok(formula("v21").eval(d))
}

pub fn v22(d: &GaussDiagram) -> Result<i64> {
    long_chord_free(d)?;
    Ok(formula("v22").eval(d))
}

/// The degree three invariant of closed diagrams; zero on classical knots.
pub fn v3_closed(d: &GaussDiagram) -> Result<i64> {
    d.require(Underlying::Closed)?;
    if !d.is_chord_free() {
        return Err(Error::ChordsPresent);
    }
    Ok(formula("v3").eval(d))
}

/// `sum over S in marked of (-1)^|S| nu(D - S)`: `nu` on the semi-virtual
/// expansion at the marked arrows.
pub fn finite_type_defect<F>(nu: F, d: &GaussDiagram, marked: &[usize]) -> Result<i64>
where
    F: Fn(&GaussDiagram) -> Result<i64>,
{
    if let Some(&bad) = marked.iter().find(|&&i| i >= d.arrow_count()) {
        return Err(Error::BadIndex(format!("arrow {bad}")));
    }
    let mut total = 0;
    let mut err = None;
    for_each_subset_upto(marked.len(), marked.len(), |s| {
        if err.is_some() {
            return;
        }
        let removed: Vec<usize> = s.iter().map(|&i| marked[i]).collect();
        match nu(&d.without_arrows(&removed)) {
            Ok(v) => total += if s.len() % 2 == 0 { v } else { -v },
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// A generator with exponent `1` or `-1`.
pub type Letter = (usize, i32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Vec<Letter>>,
}

fn write_word(f: &mut fmt::Formatter<'_>, names: &[String], w: &[Letter]) -> fmt::Result {
    if w.is_empty() {
        return write!(f, "1");
    }
    for (k, &(g, e)) in w.iter().enumerate() {
        if k > 0 {
            write!(f, " ")?;
        }
        write!(f, "{}", names[g])?;
        if e != 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "< {} | ", self.generators.join(", "))?;
        for (k, r) in self.relators.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write_word(f, &self.generators, r)?;
        }
        write!(f, " >")
    }
}

impl GroupPresentation {
    pub fn relator_strings(&self) -> Vec<String> {
        struct W<'a>(&'a [String], &'a [Letter]);
        impl fmt::Display for W<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_word(f, self.0, self.1)
            }
        }
        self.relators.iter().map(|r| W(&self.generators, r).to_string()).collect()
    }

    /// Free rank and torsion coefficients of the abelianization.
    pub fn abelianization(&self) -> Abelianization {
        let rows: Vec<_> = self
            .relators
            .iter()
            .map(|r| {
                let mut v = vec![0i64; self.generators.len()];
                for &(g, e) in r {
                    v[g] += e as i64;
                }
                crate::linalg::sparse_from_i64(&v.iter().enumerate().map(|(i, &x)| (i, x)).collect::<Vec<_>>())
            })
            .filter(|r| !r.is_empty())
            .collect();
        let s = smith_invariants(&rows, self.generators.len(), usize::MAX).expect("no size limit");
        Abelianization {
            rank: self.generators.len() - s.rank,
            torsion: s.torsion.iter().map(|t| t.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abelianization {
    pub rank: usize,
    pub torsion: Vec<String>,
}

/// Arcs run from one arrowhead to the next along each component.
#[derive(Debug, Clone)]
struct Arcs {
    /// first arc of each component
    offset: Vec<usize>,
    /// number of arcs per component
    count: Vec<usize>,
    /// heads strictly before each slot, per component
    before: Vec<Vec<usize>>,
    cyclic: bool,
}

impl Arcs {
    fn new(d: &GaussDiagram) -> Self {
        let cyclic = d.underlying().is_cyclic();
        let mut offset = Vec::new();
        let mut count = Vec::new();
        let mut before = Vec::new();
        let mut total = 0;
        for w in d.words() {
            let mut b = Vec::with_capacity(w.len() + 1);
            let mut heads = 0;
            for m in w {
                b.push(heads);
                if matches!(m, Mark::Head(_)) {
                    heads += 1;
                }
            }
            b.push(heads);
            let n = if cyclic { heads.max(1) } else { heads + 1 };
            offset.push(total);
            count.push(n);
            before.push(b);
            total += n;
        }
        Arcs { offset, count, before, cyclic }
    }

    fn total(&self) -> usize {
        self.offset.last().map_or(0, |o| o + self.count.last().unwrap())
    }

    /// The arc containing slot `p` of component `c` (for a head: the arc arriving at it).
    fn at(&self, c: usize, p: usize) -> usize {
        self.offset[c] + self.before[c][p] % self.count[c]
    }

    /// The arc leaving the head at slot `p`.
    fn after_head(&self, c: usize, p: usize) -> usize {
        let k = self.before[c][p] + 1;
        self.offset[c] + if self.cyclic { k % self.count[c] } else { k }
    }
}

/// For each arrow: (over arc, incoming arc, outgoing arc, sign).
fn crossings(d: &GaussDiagram) -> Result<(usize, Vec<(usize, usize, usize, Sign)>)> {
    if !d.is_chord_free() {
        return Err(Error::ChordsPresent);
    }
    let arcs = Arcs::new(d);
    let xs = d
        .arrows()
        .iter()
        .map(|a| {
            (
                arcs.at(a.tail.component, a.tail.position),
                arcs.at(a.head.component, a.head.position),
                arcs.after_head(a.head.component, a.head.position),
                a.sign,
            )
        })
        .collect();
    Ok((arcs.total(), xs))
}

fn arc_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Generators are the arcs; each arrow gives `c^-1 a^-e b a^e` where `a` is
/// the arc of the tail, `b` and `c` the arcs before and after the head.
pub fn upper_group(d: &GaussDiagram) -> Result<GroupPresentation> {
    let (n, xs) = crossings(d)?;
    let relators = xs
        .into_iter()
        .map(|(a, b, c, s)| {
            let e = s.value() as i32;
            vec![(c, -1), (a, -e), (b, 1), (a, e)]
        })
        .collect();
    Ok(GroupPresentation { generators: arc_names(n), relators })
}

/// The upper group of the diagram with every arrow reversed.
pub fn lower_group(d: &GaussDiagram) -> Result<GroupPresentation> {
    upper_group(&d.reverse_arrows())
}

/// The word `a^e` collected at each arrowhead met when going once along
/// the component of `base_arc`, starting on that arc.
pub fn longitude(d: &GaussDiagram, base_arc: usize) -> Result<Vec<Letter>> {
    if !d.is_chord_free() {
        return Err(Error::ChordsPresent);
    }
    let arcs = Arcs::new(d);
    if base_arc >= arcs.total() {
        return Err(Error::BadIndex(format!("arc {base_arc} of {}", arcs.total())));
    }
    let c = arcs.offset.iter().rposition(|&o| o <= base_arc).expect("offsets start at 0");
    let w = &d.words()[c];
    let local = base_arc - arcs.offset[c];
    // slot where the base arc begins: right after the head closing the previous arc
    let heads: Vec<usize> = (0..w.len()).filter(|&p| matches!(w[p], Mark::Head(_))).collect();
    let start = if local == 0 {
        if arcs.cyclic {
            heads.last().map_or(0, |&h| h + 1)
        } else {
            0
        }
    } else {
        heads[local - 1] + 1
    };
    let len = if arcs.cyclic { w.len() } else { w.len() - start };
    let mut word = Vec::new();
    for k in 0..len {
        let p = (start + k) % w.len().max(1);
        if let Mark::Head(i) = w[p] {
            let a = d.arrows()[i];
            word.push((arcs.at(a.tail.component, a.tail.position), a.sign.value() as i32));
        }
    }
    Ok(word)
}

/// Relation `result = under ▷^sign over`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuandleRelation {
    pub result: usize,
    pub under: usize,
    pub over: usize,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuandlePresentation {
    pub generators: Vec<String>,
    pub relations: Vec<QuandleRelation>,
}

pub fn quandle(d: &GaussDiagram) -> Result<QuandlePresentation> {
    let (n, xs) = crossings(d)?;
    Ok(QuandlePresentation {
        generators: arc_names(n),
        relations: xs.into_iter().map(|(a, b, c, s)| QuandleRelation { result: c, under: b, over: a, sign: s }).collect(),
    })
}

/// Generic backtracking over assignments `0..size` of `n` generators; a
/// constraint is checked once all its generators are assigned.
fn count_assignments<C>(n: usize, size: usize, constraints: &[(usize, C)], check: impl Fn(&C, &[usize]) -> bool) -> u64 {
    fn rec<C>(i: usize, n: usize, size: usize, v: &mut Vec<usize>, by_last: &[Vec<&C>], check: &impl Fn(&C, &[usize]) -> bool) -> u64 {
        if i == n {
            return 1;
        }
        let mut total = 0;
        for x in 0..size {
            v.push(x);
            if by_last[i].iter().all(|c| check(c, v)) {
                total += rec(i + 1, n, size, v, by_last, check);
            }
            v.pop();
        }
        total
    }
    if n == 0 {
        return 1;
    }
    let mut by_last: Vec<Vec<&C>> = (0..n).map(|_| Vec::new()).collect();
    for (last, c) in constraints {
        by_last[*last].push(c);
    }
    rec(0, n, size, &mut Vec::with_capacity(n), &by_last, &check)
}

/// Number of colorings of the arcs by the dihedral quandle `Z/m`, where
/// `b ▷ a = 2a - b`.
pub fn count_dihedral_colorings(q: &QuandlePresentation, m: usize) -> u64 {
    let cons: Vec<(usize, QuandleRelation)> =
        q.relations.iter().map(|r| (r.result.max(r.under).max(r.over), *r)).collect();
    count_assignments(q.generators.len(), m, &cons, |r, v| {
        (2 * v[r.over] + 2 * m - v[r.under]) % m == v[r.result]
    })
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    pub name: String,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

impl FiniteGroup {
    /// The group generated by the given permutations of `0..k`.
    pub fn from_permutations(name: &str, generators: &[Vec<usize>]) -> Self {
        let k = generators.first().map_or(0, Vec::len);
        let id: Vec<usize> = (0..k).collect();
        let mut elems = vec![id];
        let mut i = 0;
        while i < elems.len() {
            for g in generators {
                let p: Vec<usize> = (0..k).map(|x| g[elems[i][x]]).collect();
                if !elems.contains(&p) {
                    elems.push(p);
                }
            }
            i += 1;
        }
        let idx = |p: &Vec<usize>| elems.iter().position(|e| e == p).expect("closed under products");
        let mul: Vec<Vec<usize>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| idx(&(0..k).map(|x| a[b[x]]).collect())).collect())
            .collect();
        let inv = (0..elems.len()).map(|a| mul[a].iter().position(|&c| c == 0).expect("identity")).collect();
        FiniteGroup { name: name.to_string(), mul, inv }
    }

    pub fn symmetric3() -> Self {
        Self::from_permutations("S3", &[vec![1, 0, 2], vec![1, 2, 0]])
    }

    pub fn alternating4() -> Self {
        Self::from_permutations("A4", &[vec![1, 2, 0, 3], vec![1, 0, 3, 2]])
    }

    pub fn cyclic(n: usize) -> Self {
        Self::from_permutations(&format!("Z{n}"), &[(0..n).map(|x| (x + 1) % n).collect()])
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    fn word(&self, w: &[Letter], v: &[usize]) -> usize {
        w.iter().fold(0, |acc, &(g, e)| {
            let x = if e > 0 { v[g] } else { self.inv[v[g]] };
            self.mul[acc][x]
        })
    }
}

pub const DEFAULT_GROUP_CAP: usize = 24;

/// The number of homomorphisms from the presented group to `target`.
pub fn count_homs(p: &GroupPresentation, target: &FiniteGroup) -> Result<u64> {
    count_homs_capped(p, target, DEFAULT_GROUP_CAP)
}

pub fn count_homs_capped(p: &GroupPresentation, target: &FiniteGroup, cap: usize) -> Result<u64> {
    if target.order() > cap {
        return Err(Error::CapExceeded { what: "target order", value: target.order(), cap });
    }
    let mut vals = vec![None; p.generators.len()];
    Ok(homs_from(p, target, &mut vals))
}

/// Branch on generators, filling in any generator a relator forces.
fn homs_from(p: &GroupPresentation, g: &FiniteGroup, vals: &mut Vec<Option<usize>>) -> u64 {
    let mut forced = Vec::new();
    let result = 'outer: loop {
        let mut progressed = false;
        for r in &p.relators {
            let free: Vec<usize> = r.iter().filter(|l| vals[l.0].is_none()).map(|l| l.0).collect();
            let dense: Vec<usize> = vals.iter().map(|v| v.unwrap_or(0)).collect();
            if free.is_empty() {
                if g.word(r, &dense) != 0 {
                    break 'outer 0;
                }
                continue;
            }
            if free.len() != 1 {
                continue;
            }
            // u x^e v = 1  gives  x^e = u^-1 v^-1
            let k = r.iter().position(|l| vals[l.0].is_none()).expect("one free letter");
            let u = g.word(&r[..k], &dense);
            let v = g.word(&r[k + 1..], &dense);
            let xe = g.mul[g.inv[u]][g.inv[v]];
            vals[r[k].0] = Some(if r[k].1 > 0 { xe } else { g.inv[xe] });
            forced.push(r[k].0);
            progressed = true;
        }
        if progressed {
            continue;
        }
        match vals.iter().position(Option::is_none) {
            None => break 1,
            Some(i) => {
                let mut total = 0;
                for x in 0..g.order() {
                    vals[i] = Some(x);
                    total += homs_from(p, g, vals);
                }
                vals[i] = None;
                break total;
            }
        }
    };
    for i in forced {
        vals[i] = None;
    }
    result
}
