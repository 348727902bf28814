//! The algebra of arrow diagrams: the maps `i`, `I`, `I^-1`, the pairing with
//! Gauss diagrams, the move relations and the truncated quotients.
//!
//! Arrow diagrams share the combinatorial type [`GaussDiagram`]; an element of
//! the algebra is a [`FormalSum`] of them.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal::FormalSum;
use crate::gauss::{parse_sign_free_pattern, CanonicalCode, Endpoint, GaussDiagram, Mark, Sign, Underlying};
use crate::linalg::{smith_invariants, sparse_from_i64, Echelon};
use crate::moves::{gaps, MoveTables};

pub type ArrowDiagram = GaussDiagram;
pub type AlgebraElement = FormalSum;

/// `i`: a Gauss diagram read as an arrow diagram (dashed arrows). The data is unchanged.
pub fn dash(d: &GaussDiagram) -> ArrowDiagram {
    d.clone()
}

/// `I(D)`: the sum of all subdiagrams (all chords kept), extended linearly.
pub fn subdiagram_expansion(x: &FormalSum) -> AlgebraElement {
    x.map_linear(|d| {
        let mut out = FormalSum::new();
        for s in d.subdiagrams() {
            out.add_term(&s, 1);
        }
        out
    })
}

/// `I^-1(A) = sum over A' in A of (-1)^{|A - A'|} A'`.
pub fn subdiagram_expansion_inverse(x: &AlgebraElement) -> FormalSum {
    x.map_linear(|d| {
        let n = d.arrow_count();
        let mut out = FormalSum::new();
        for (mask, s) in d.subdiagrams().enumerate() {
            let removed = n - (mask as u64).count_ones() as usize;
            out.add_term(&s, if removed.is_multiple_of(2) { 1 } else { -1 });
        }
        out
    })
}

/// Visit every subset of `0..n` with at most `k` elements (sorted index lists).
pub fn for_each_subset_upto<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    fn rec<F: FnMut(&[usize])>(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut F) {
        f(cur);
        if cur.len() == k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut f);
}

/// An algebra element prepared for repeated pairing.
#[derive(Debug, Clone)]
pub struct GaussFormula {
    terms: HashMap<CanonicalCode, i64>,
    max_arrows: usize,
}

impl GaussFormula {
    pub fn new(a: &AlgebraElement) -> Self {
        GaussFormula {
            terms: a.iter().map(|(c, _, k)| (c.clone(), k)).collect(),
            max_arrows: a.diagrams().map(|(d, _)| d.arrow_count()).max().unwrap_or(0),
        }
    }

    /// `<A, D>`: sum over subdiagrams `D'` of the coefficient of `D'` in `A`.
    pub fn eval(&self, d: &GaussDiagram) -> i64 {
        if self.terms.is_empty() {
            return 0;
        }
        let n = d.arrow_count();
        let mut keep = vec![false; n];
        let mut total = 0i64;
        for_each_subset_upto(n, self.max_arrows.min(n), |s| {
            keep.iter_mut().for_each(|k| *k = false);
            for &i in s {
                keep[i] = true;
            }
            if let Some(c) = self.terms.get(&d.restrict_arrows(&keep).canonical_code()) {
                total += c;
            }
        });
        total
    }
}

pub fn pairing(a: &AlgebraElement, d: &GaussDiagram) -> i64 {
    GaussFormula::new(a).eval(d)
}

/// A pattern whose arrows may be sign-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFreePattern {
    pub diagram: ArrowDiagram,
    pub free: Vec<bool>,
}

impl SignFreePattern {
    /// Gauss-code syntax with `*` allowed as the sign of an arrow.
    pub fn parse(text: &str) -> Result<Self> {
        let (diagram, free) = parse_sign_free_pattern(text)?;
        Ok(SignFreePattern { diagram, free })
    }

    pub fn expand(&self) -> AlgebraElement {
        expand_signfree(&self.diagram, &self.free)
    }
}

/// Sum over sign assignments of the free arrows, a term with `k` negative
/// free arrows getting coefficient `(-1)^k`.
pub fn expand_signfree(pattern: &ArrowDiagram, free: &[bool]) -> AlgebraElement {
    let idx: Vec<usize> = (0..pattern.arrow_count()).filter(|&i| free.get(i).copied().unwrap_or(false)).collect();
    let mut out = FormalSum::new();
    for mask in 0u64..(1u64 << idx.len()) {
        let mut signs = pattern.arrow_signs();
        for (b, &i) in idx.iter().enumerate() {
            signs[i] = if mask >> b & 1 == 1 { Sign::Minus } else { Sign::Plus };
        }
        let d = GaussDiagram::from_words(pattern.underlying(), pattern.words().to_vec(), &signs, &pattern.chord_signs())
            .expect("same shape as the pattern");
        out.add_term(&d, if mask.count_ones() % 2 == 0 { 1 } else { -1 });
    }
    out
}

/// Largest arrow count accepted by default for basis enumeration.
pub fn default_cap(u: Underlying) -> usize {
    match u {
        Underlying::Closed => 4,
        _ => 3,
    }
}

/// All chord-free canonical arrow diagrams with at most `max_arrows` arrows,
/// ordered by arrow count and then by code.
pub fn enumerate_arrow_diagrams(max_arrows: usize, u: Underlying) -> Result<Vec<ArrowDiagram>> {
    enumerate_arrow_diagrams_with_cap(max_arrows, u, default_cap(u))
}

pub fn enumerate_arrow_diagrams_with_cap(max_arrows: usize, u: Underlying, cap: usize) -> Result<Vec<ArrowDiagram>> {
    if max_arrows > cap {
        return Err(Error::CapExceeded { what: "arrows", value: max_arrows, cap });
    }
    let mut all = vec![GaussDiagram::empty(u)];
    let mut layer = vec![GaussDiagram::empty(u)];
    for _ in 0..max_arrows {
        let mut next: BTreeSet<(CanonicalCode, GaussDiagramKey)> = BTreeSet::new();
        for d in &layer {
            let lens: Vec<usize> = d.words().iter().map(|w| w.len() + 2).collect();
            let slots: Vec<Endpoint> = lens
                .iter()
                .enumerate()
                .flat_map(|(c, &l)| (0..l).map(move |p| Endpoint::new(c, p)))
                .collect();
            for &t in &slots {
                for &h in &slots {
                    if t == h {
                        continue;
                    }
                    // both new ends on one component use its length + 2; otherwise each gets + 1
                    let fits = |e: Endpoint| {
                        let grow = if t.component == h.component { 2 } else { 1 };
                        e.position < d.words()[e.component].len() + grow
                    };
                    if !fits(t) || !fits(h) {
                        continue;
                    }
                    for s in [Sign::Plus, Sign::Minus] {
                        let e = crate::moves::insert_arrow(d, t, h, s).expect("valid slots");
                        let (code, canon) = e.canonical_form();
                        next.insert((code, GaussDiagramKey(canon)));
                    }
                }
            }
        }
        layer = next.into_iter().map(|(_, k)| k.0).collect();
        all.extend(layer.iter().cloned());
    }
    Ok(all)
}

/// Ordering wrapper so canonical diagrams can sit in a `BTreeSet` next to their code.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GaussDiagramKey(GaussDiagram);

impl PartialOrd for GaussDiagramKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GaussDiagramKey {
    fn cmp(&self, _other: &Self) -> std::cmp::Ordering {
        // only ever compared after equal codes, which imply equal diagrams
        std::cmp::Ordering::Equal
    }
}

/// Diagrams with exactly `m` arrows.
pub fn enumerate_arrow_diagrams_exact(m: usize, u: Underlying) -> Result<Vec<ArrowDiagram>> {
    Ok(enumerate_arrow_diagrams(m, u)?.into_iter().filter(|d| d.arrow_count() == m).collect())
}

/// Insert `blocks` (marks refer to new arrows numbered after the context's) into
/// the given gaps; blocks sharing a gap are ordered by `keys`.
fn place_blocks(ctx: &GaussDiagram, signs: &[Sign], blocks: &[Vec<Mark>], at: &[Endpoint], keys: &[usize]) -> GaussDiagram {
    let base = ctx.arrow_count();
    let shift = |m: Mark| match m {
        Mark::Tail(i) => Mark::Tail(base + i),
        Mark::Head(i) => Mark::Head(base + i),
        other => other,
    };
    let mut all_signs = ctx.arrow_signs();
    all_signs.extend_from_slice(signs);
    let words = ctx
        .words()
        .iter()
        .enumerate()
        .map(|(c, w)| {
            let mut nw = Vec::new();
            for p in 0..=w.len() {
                let mut here: Vec<usize> = (0..blocks.len()).filter(|&b| at[b] == Endpoint::new(c, p)).collect();
                here.sort_by_key(|&b| keys[b]);
                for b in here {
                    nw.extend(blocks[b].iter().map(|&m| shift(m)));
                }
                if p < w.len() {
                    nw.push(w[p]);
                }
            }
            nw
        })
        .collect();
    GaussDiagram::from_words(ctx.underlying(), words, &all_signs, &ctx.chord_signs()).expect("placement into a valid diagram")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Add `sign * I(side)` restricted to subdiagrams with at most `n` arrows, where
/// `side` is the context with the fragment blocks inserted.
fn add_side(out: &mut FormalSum, full: &GaussDiagram, base: usize, n: usize, sign: i64) {
    let k = full.arrow_count() - base;
    for mask in 0u64..(1u64 << k) {
        if base + mask.count_ones() as usize > n {
            continue;
        }
        let keep: Vec<bool> = (0..full.arrow_count()).map(|i| i < base || mask >> (i - base) & 1 == 1).collect();
        out.add_term(&full.restrict_arrows(&keep), sign);
    }
}

/// Every instance of the R1, R2 and R3 relations: the fragment of each move
/// variant is spliced into every canonical context with fewer than `n` arrows,
/// in every arrangement of its blocks, and terms with more than `n` arrows are
/// dropped. Zero relations are skipped; duplicates are kept out.
pub fn generate_relations(n: usize, u: Underlying) -> Result<Vec<AlgebraElement>> {
    generate_relations_with(MoveTables::standard(), n, u, default_cap(u))
}

pub fn generate_relations_with(tables: &MoveTables, n: usize, u: Underlying, cap: usize) -> Result<Vec<AlgebraElement>> {
    if n > cap {
        return Err(Error::CapExceeded { what: "degree", value: n, cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let contexts = enumerate_arrow_diagrams_with_cap(n - 1, u, cap)?;
    let fragments = tables.fragments();
    let mut seen: BTreeSet<Vec<(CanonicalCode, i64)>> = BTreeSet::new();
    let mut out = Vec::new();
    for ctx in &contexts {
        let base = ctx.arrow_count();
        let gs = gaps(ctx);
        for frag in &fragments {
            let nb = frag.before.len();
            let perms = permutations(nb);
            let total = gs.len().pow(nb as u32);
            for code in 0..total {
                let at: Vec<Endpoint> = (0..nb).map(|b| gs[code / gs.len().pow(b as u32) % gs.len()]).collect();
                let mut arrangements = BTreeSet::new();
                for perm in &perms {
                    // only the order of blocks sharing a gap matters
                    let mut order: Vec<usize> = (0..nb).collect();
                    order.sort_by_key(|&b| (at[b], perm[b]));
                    if !arrangements.insert(order) {
                        continue;
                    }
                    let mut rel = FormalSum::new();
                    let before = place_blocks(ctx, &frag.signs, &frag.before, &at, perm);
                    add_side(&mut rel, &before, base, n, 1);
                    let after_signs: &[Sign] = if frag.after.iter().all(|b| b.is_empty()) { &[] } else { &frag.signs };
                    let after = place_blocks(ctx, after_signs, &frag.after, &at, perm);
                    add_side(&mut rel, &after, base, n, -1);
                    if rel.is_empty() {
                        continue;
                    }
                    let mut key: Vec<(CanonicalCode, i64)> = rel.iter().map(|(c, _, k)| (c.clone(), k)).collect();
                    if key[0].1 < 0 {
                        key.iter_mut().for_each(|t| t.1 = -t.1);
                        rel = rel.scaled(-1);
                    }
                    if seen.insert(key) {
                        out.push(rel);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Options for [`compute_quotient_with`].
#[derive(Debug, Clone)]
pub struct QuotientOptions {
    /// Identify top-degree diagrams differing in signs (up to `(-1)^k`) before elimination.
    pub sign_reduction: bool,
    /// Skip the Smith form when the dense remainder exceeds this size.
    pub smith_limit: usize,
    pub cap: usize,
}

impl QuotientOptions {
    pub fn for_underlying(u: Underlying) -> Self {
        QuotientOptions { sign_reduction: false, smith_limit: 300, cap: default_cap(u) }
    }
}

pub const QUOTIENT_FORMAT_VERSION: u32 = 2;

/// Basis, relations and invariant functionals of the degree-`n` truncation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientPresentation {
    pub version: u32,
    pub degree_bound: usize,
    pub underlying: Underlying,
    /// Canonical codes of the basis diagrams (columns).
    pub basis: Vec<CanonicalCode>,
    /// Sparse integer relation rows `(column, coefficient)`.
    pub relations: Vec<Vec<(usize, i64)>>,
    /// Rank of the relation matrix over the rationals.
    pub rank: usize,
    /// Invariant factors larger than one of the relation matrix, if computed.
    pub torsion: Option<Vec<String>>,
    /// Primitive integer functionals (one coefficient per basis column, sparse)
    /// spanning the rational solutions of every relation. The first one is the constant.
    pub invariant_basis: Vec<Vec<(usize, i64)>>,
}

impl QuotientPresentation {
    pub fn dimension(&self) -> usize {
        self.invariant_basis.len()
    }

    /// The invariant functionals as algebra elements (Gauss diagram formulas).
    pub fn functionals(&self) -> Result<Vec<AlgebraElement>> {
        let diagrams: Vec<GaussDiagram> = self
            .basis
            .iter()
            .map(|c| c.as_str().parse::<GaussDiagram>())
            .collect::<std::result::Result<_, _>>()?;
        Ok(self
            .invariant_basis
            .iter()
            .map(|f| f.iter().map(|&(c, k)| (diagrams[c].clone(), k)).collect())
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let q: QuotientPresentation = serde_json::from_str(text)?;
        if q.version != QUOTIENT_FORMAT_VERSION {
            return Err(Error::Cache(format!("unsupported quotient file version {}", q.version)));
        }
        Ok(q)
    }

    pub fn cache_file_name(n: usize, u: Underlying) -> String {
        format!("quotient-{}-{n}.json", u.to_string().replace(' ', ""))
    }
}

pub fn compute_quotient(n: usize, u: Underlying) -> Result<QuotientPresentation> {
    compute_quotient_with(n, u, &QuotientOptions::for_underlying(u))
}

pub fn compute_quotient_with(n: usize, u: Underlying, opts: &QuotientOptions) -> Result<QuotientPresentation> {
    let basis = enumerate_arrow_diagrams_with_cap(n, u, opts.cap)?;
    let relations = generate_relations_with(MoveTables::standard(), n, u, opts.cap)?;
    let index: HashMap<CanonicalCode, usize> =
        basis.iter().enumerate().map(|(i, d)| (d.canonical_code(), i)).collect();
    let rows: Vec<Vec<(usize, i64)>> = relations
        .iter()
        .map(|r| {
            let mut v: Vec<(usize, i64)> = r.iter().map(|(c, _, k)| (index[c], k)).collect();
            v.sort_unstable();
            v
        })
        .collect();

    // column map used for elimination: identity, or top-degree sign classes
    let (col_of, factor, ncols) = if opts.sign_reduction {
        sign_classes(&basis, n)
    } else {
        ((0..basis.len()).collect::<Vec<_>>(), vec![1i64; basis.len()], basis.len())
    };
    let mut ech = Echelon::new(ncols);
    let mut reduced_rows = Vec::with_capacity(rows.len());
    for r in &rows {
        let mapped: Vec<(usize, i64)> = r.iter().map(|&(c, k)| (col_of[c], k * factor[c])).collect();
        let sr = sparse_from_i64(&mapped);
        if !sr.is_empty() {
            ech.insert(sr.clone());
            reduced_rows.push(sr);
        }
    }
    let kernel = ech.kernel();
    let mut invariant_basis = Vec::with_capacity(kernel.len());
    for v in kernel {
        let mut f = Vec::new();
        for (c, _) in basis.iter().enumerate() {
            let x = &v[col_of[c]] * factor[c];
            if x != BigInt::from(0) {
                let k = x.to_i64().ok_or_else(|| Error::Invalid("functional coefficient overflows i64".into()))?;
                f.push((c, k));
            }
        }
        invariant_basis.push(f);
    }
    let torsion = if opts.sign_reduction {
        None
    } else {
        smith_invariants(&reduced_rows, ncols, opts.smith_limit)
            .map(|s| s.torsion.iter().map(|t| t.to_string()).collect())
    };
    let rank = basis.len() - invariant_basis.len();
    Ok(QuotientPresentation {
        version: QUOTIENT_FORMAT_VERSION,
        degree_bound: n,
        underlying: u,
        basis: basis.iter().map(|d| d.canonical_code()).collect(),
        relations: rows,
        rank,
        torsion,
        invariant_basis,
    })
}

/// Map every `n`-arrow diagram to its all-positive version with factor `(-1)^k`.
fn sign_classes(basis: &[GaussDiagram], n: usize) -> (Vec<usize>, Vec<i64>, usize) {
    let mut class_of: HashMap<CanonicalCode, usize> = HashMap::new();
    let mut col_of = Vec::with_capacity(basis.len());
    let mut factor = Vec::with_capacity(basis.len());
    for d in basis {
        let (key, f) = if d.arrow_count() == n && n > 0 {
            let neg = d.arrow_signs().iter().filter(|&&s| s == Sign::Minus).count();
            let plus = vec![Sign::Plus; d.arrow_count()];
            let p = GaussDiagram::from_words(d.underlying(), d.words().to_vec(), &plus, &d.chord_signs())
                .expect("same shape");
            (p.canonical_code(), if neg % 2 == 0 { 1 } else { -1 })
        } else {
            (d.canonical_code(), 1)
        };
        let next = class_of.len();
        col_of.push(*class_of.entry(key).or_insert(next));
        factor.push(f);
    }
    let ncols = class_of.len();
    (col_of, factor, ncols)
}

/// Load the quotient from `cache_dir` if present, otherwise compute and store it.
pub fn compute_quotient_cached(n: usize, u: Underlying, cache_dir: Option<&Path>) -> Result<QuotientPresentation> {
    let Some(dir) = cache_dir else {
        return compute_quotient(n, u);
    };
    let path: PathBuf = dir.join(QuotientPresentation::cache_file_name(n, u));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(q) = QuotientPresentation::from_json(&text) {
            if q.degree_bound == n && q.underlying == u {
                return Ok(q);
            }
        }
    }
    let q = compute_quotient(n, u)?;
    fs::create_dir_all(dir)?;
    fs::write(&path, q.to_json()?)?;
    Ok(q)
}

/// Dimension of the invariant space of each truncation `0..=n`, constant included.
pub fn invariant_dimensions(n: usize, u: Underlying) -> Result<Vec<usize>> {
    (0..=n).map(|k| compute_quotient(k, u).map(|q| q.dimension())).collect()
}

/// Number of new invariants in each degree `1..=n`, constants excluded.
pub fn new_invariant_dimensions(n: usize, u: Underlying) -> Result<Vec<(usize, usize)>> {
    let dims = invariant_dimensions(n, u)?;
    Ok((1..=n).map(|k| (k, dims[k] - dims[k - 1])).collect())
}

/// Values of the invariant functionals on `D`: the coordinates of `I(D)` in
/// the truncated quotient, tensored with the rationals.
pub fn universal_invariant(d: &GaussDiagram, q: &QuotientPresentation) -> Result<Vec<i64>> {
    if d.underlying() != q.underlying {
        return Err(Error::wrong_kind("the quotient's", d.underlying()));
    }
    if !d.is_chord_free() {
        return Err(Error::ChordsPresent);
    }
    Ok(q.functionals()?.iter().map(|f| pairing(f, d)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GaussDiagram {
        s.parse().unwrap()
    }

    #[test]
    fn expansion_examples() {
        let e = p("closed:");
        assert_eq!(subdiagram_expansion(&FormalSum::from_diagram(&e)), FormalSum::from_diagram(&e));
        let k = p("long: O1+ U1+");
        let ik = subdiagram_expansion(&FormalSum::from_diagram(&k));
        assert_eq!(ik.len(), 2);
        assert_eq!(ik.coefficient(&p("long:").canonical_code()), 1);
        let inv = subdiagram_expansion_inverse(&FormalSum::from_diagram(&k));
        assert_eq!(inv.coefficient(&k.canonical_code()), 1);
        assert_eq!(inv.coefficient(&p("long:").canonical_code()), -1);
        let t = p("long: O1+ U2+ O3+ U1+ O2+ U3+");
        let it = subdiagram_expansion(&FormalSum::from_diagram(&t));
        assert_eq!(it.diagrams().map(|(_, c)| c).sum::<i64>(), 8);
    }

    #[test]
    fn pairing_examples() {
        let e = FormalSum::from_diagram(&p("closed:"));
        assert_eq!(pairing(&e, &p("closed: O1+ U2+ O3+ U1+ O2+ U3+")), 1);
        let a = FormalSum::from_diagram(&p("closed: O1+ U1+"));
        assert_eq!(pairing(&a, &p("closed: O1+ U1+")), 1);
        // every single arrow on a circle is the same diagram
        assert_eq!(pairing(&a, &p("closed: O1+ U2+ O3+ U1+ O2+ U3+")), 3);
    }

    #[test]
    fn sign_free() {
        let pat = SignFreePattern::parse("long: O1* U1*").unwrap();
        let x = pat.expand();
        assert_eq!(x.len(), 2);
        assert_eq!(x.coefficient(&p("long: O1+ U1+").canonical_code()), 1);
        assert_eq!(x.coefficient(&p("long: O1- U1-").canonical_code()), -1);
        let full = SignFreePattern::parse("long: O1+ U1+").unwrap();
        assert_eq!(full.expand().len(), 1);
        assert_eq!(SignFreePattern::parse("long: O1* O2* U1* U2*").unwrap().expand().len(), 4);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_arrow_diagrams(0, Underlying::Closed).unwrap().len(), 1);
        assert_eq!(enumerate_arrow_diagrams_exact(1, Underlying::Closed).unwrap().len(), 2);
        assert_eq!(enumerate_arrow_diagrams(1, Underlying::Closed).unwrap().len(), 3);
        assert_eq!(enumerate_arrow_diagrams_exact(1, Underlying::Long).unwrap().len(), 4);
        assert!(enumerate_arrow_diagrams(5, Underlying::Closed).is_err());
        // 2 arrows on a line: 3 matchings x 4 directions x 4 signs
        assert_eq!(enumerate_arrow_diagrams_exact(2, Underlying::Long).unwrap().len(), 48);
    }

    #[test]
    fn degree_one_relations_kill_single_arrows() {
        let q = compute_quotient(1, Underlying::Closed).unwrap();
        assert_eq!(q.dimension(), 1);
        assert_eq!(q.invariant_basis[0], vec![(0, 1)]);
    }

    #[test]
    fn kinks_are_relations() {
        let rels = generate_relations(2, Underlying::Long).unwrap();
        let kink = p("long: O1+ U1+ O2- U2-").canonical_code();
        assert!(rels.iter().any(|r| r.len() == 1 && r.coefficient(&kink) != 0));
    }

    #[test]
    fn small_quotients() {
        let dims = invariant_dimensions(2, Underlying::Closed).unwrap();
        assert_eq!(dims, vec![1, 1, 1]);
        let dims = invariant_dimensions(2, Underlying::Long).unwrap();
        assert_eq!(dims, vec![1, 1, 3]);
    }

    #[test]
    fn r3_blocks_split_around_a_context_arrow() {
        // two R3 blocks share the gap inside the context arrow, the third is outside
        let q = compute_quotient(3, Underlying::Long).unwrap();
        assert_eq!(q.dimension(), 10);
        let a = p("long: O1- U2+ O3+ U4- U1- O4- O2+ U3+");
        let b = p("long: U1+ O2- O3+ U2- U4- O1+ O4- U3+");
        assert_eq!(universal_invariant(&a, &q).unwrap(), universal_invariant(&b, &q).unwrap());
    }

    #[test]
    fn sign_reduction_agrees() {
        for (n, u) in [(1, Underlying::Closed), (2, Underlying::Closed), (2, Underlying::Long)] {
            let plain = compute_quotient(n, u).unwrap();
            let mut opts = QuotientOptions::for_underlying(u);
            opts.sign_reduction = true;
            let red = compute_quotient_with(n, u, &opts).unwrap();
            assert_eq!(plain.dimension(), red.dimension());
            for f in &red.invariant_basis {
                let dense: HashMap<usize, i64> = f.iter().copied().collect();
                for row in &plain.relations {
                    let s: i64 = row.iter().map(|(c, k)| k * dense.get(c).copied().unwrap_or(0)).sum();
                    assert_eq!(s, 0);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let q = compute_quotient(1, Underlying::Long).unwrap();
        let back = QuotientPresentation::from_json(&q.to_json().unwrap()).unwrap();
        assert_eq!(q, back);
    }
}
