//! Exact sparse linear algebra over the integers: fraction-free row echelon
//! form, rational kernels and Smith invariant factors.

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sorted `(column, nonzero value)` pairs.
pub type SparseRow = Vec<(usize, BigInt)>;

pub fn sparse_from_i64(entries: &[(usize, i64)]) -> SparseRow {
    let mut m: BTreeMap<usize, BigInt> = BTreeMap::new();
    for &(c, v) in entries {
        *m.entry(c).or_insert_with(BigInt::zero) += v;
    }
    m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn content(row: &SparseRow) -> BigInt {
    row.iter().fold(BigInt::zero(), |g, (_, v)| g.gcd(v))
}

/// Divide by the content and make the leading entry positive.
pub fn make_primitive(row: &mut SparseRow) {
    if row.is_empty() {
        return;
    }
    let mut g = content(row);
    if row[0].1.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// `x * a + y * b`, dropping zeros.
fn combine(a: &SparseRow, x: &BigInt, b: &SparseRow, y: &BigInt) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ca < cb {
            i += 1;
            (ca, x * &a[i - 1].1)
        } else if cb < ca {
            j += 1;
            (cb, y * &b[j - 1].1)
        } else {
            i += 1;
            j += 1;
            (ca, x * &a[i - 1].1 + y * &b[j - 1].1)
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    out
}

/// Row echelon form built one row at a time. Each stored row is primitive and
/// its pivot is its first column.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    ncols: usize,
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, pivots: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `row` against the stored pivots.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        make_primitive(&mut row);
        while let Some((c, lead)) = row.first().cloned() {
            let Some(p) = self.pivots.get(&c) else { break };
            let plead = &p[0].1;
            let g = lead.gcd(plead);
            row = combine(&row, &(plead / &g), p, &-(&lead / &g));
            make_primitive(&mut row);
        }
        row
    }

    /// Returns true when the row was independent of the rows so far.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        debug_assert!(row.iter().all(|(c, _)| *c < self.ncols));
        let r = self.reduce(row);
        match r.first() {
            Some(&(c, _)) => {
                self.pivots.insert(c, r);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// A basis of the rational kernel `{x : row . x = 0 for all rows}`, one
    /// primitive integer vector per free column, free columns in increasing order.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        let free: Vec<usize> = (0..self.ncols).filter(|c| !self.pivots.contains_key(c)).collect();
        let mut out = Vec::with_capacity(free.len());
        for &f in &free {
            let mut x: Vec<BigRational> = vec![BigRational::zero(); self.ncols];
            x[f] = BigRational::one();
            for (&p, row) in self.pivots.iter().rev() {
                let mut s = BigRational::zero();
                for (c, v) in &row[1..] {
                    if !x[*c].is_zero() {
                        s += &x[*c] * BigRational::from_integer(v.clone());
                    }
                }
                if !s.is_zero() {
                    x[p] = -s / BigRational::from_integer(row[0].1.clone());
                }
            }
            out.push(primitive_integer_vector(&x));
        }
        out
    }
}

/// Clear denominators and divide by the content; the first nonzero entry becomes positive.
pub fn primitive_integer_vector(x: &[BigRational]) -> Vec<BigInt> {
    let l = x.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let mut v: Vec<BigInt> = x.iter().map(|q| q.numer() * (&l / q.denom())).collect();
    let mut g = v.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
    if g.is_zero() {
        return v;
    }
    if v.iter().find(|a| !a.is_zero()).is_some_and(|a| a.is_negative()) {
        g = -g;
    }
    for a in v.iter_mut() {
        *a = &*a / &g;
    }
    v
}

/// Smith normal form data of an integer matrix given by sparse rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithData {
    pub rank: usize,
    /// Invariant factors larger than one, in divisibility order.
    pub torsion: Vec<BigInt>,
}

/// Invariant factors of the row module. Unit pivots are eliminated sparsely;
/// the remainder is diagonalized densely. Gives up (`None`) when the dense
/// remainder has more than `dense_limit` rows or columns.
pub fn smith_invariants(rows: &[SparseRow], ncols: usize, dense_limit: usize) -> Option<SmithData> {
    let mut mat: Vec<Option<BTreeMap<usize, BigInt>>> =
        rows.iter().map(|r| Some(r.iter().cloned().collect())).collect();
    let mut col_rows: Vec<HashSet<usize>> = vec![HashSet::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for (c, _) in r {
            col_rows[*c].insert(i);
        }
    }
    let mut unit_rank = 0;
    let mut queue: VecDeque<usize> = (0..rows.len()).collect();
    let mut queued: Vec<bool> = vec![true; rows.len()];
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        let Some(row) = mat[i].as_ref() else { continue };
        // unit entry whose column is shortest
        let Some((j, a)) = row
            .iter()
            .filter(|(_, v)| v.abs().is_one())
            .min_by_key(|(c, _)| col_rows[**c].len())
            .map(|(c, v)| (*c, v.clone()))
        else {
            continue;
        };
        let pivot_row = mat[i].take().expect("live row");
        for c in pivot_row.keys() {
            col_rows[*c].remove(&i);
        }
        let others: Vec<usize> = col_rows[j].iter().copied().collect();
        for k in others {
            let rk = mat[k].as_mut().expect("indexed row is live");
            let f = &rk[&j] * &a;
            for (c, v) in &pivot_row {
                let e = rk.entry(*c).or_insert_with(BigInt::zero);
                *e -= &f * v;
                if e.is_zero() {
                    rk.remove(c);
                    col_rows[*c].remove(&k);
                } else {
                    col_rows[*c].insert(k);
                }
            }
            if !queued[k] {
                queued[k] = true;
                queue.push_back(k);
            }
        }
        unit_rank += 1;
    }
    let rest: Vec<BTreeMap<usize, BigInt>> =
        mat.into_iter().flatten().filter(|r| !r.is_empty()).collect();
    let mut cols: Vec<usize> = rest.iter().flat_map(|r| r.keys().copied()).collect();
    cols.sort_unstable();
    cols.dedup();
    if rest.len() > dense_limit || cols.len() > dense_limit {
        return None;
    }
    let dense_rows: Vec<SparseRow> =
        rest.iter().map(|r| r.iter().map(|(c, v)| (*c, v.clone())).collect()).collect();
    let index: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut dense: Vec<Vec<BigInt>> = dense_rows
        .iter()
        .map(|r| {
            let mut v = vec![BigInt::zero(); cols.len()];
            for (c, x) in r {
                v[index[c]] = x.clone();
            }
            v
        })
        .collect();
    let diag = dense_smith_diagonal(&mut dense);
    let mut torsion: Vec<BigInt> = diag.iter().filter(|d| !d.is_one()).cloned().collect();
    torsion.sort();
    Some(SmithData { rank: unit_rank + diag.len(), torsion })
}

/// Nonzero diagonal entries (absolute values) of the Smith form of a dense matrix.
pub fn dense_smith_diagonal(m: &mut [Vec<BigInt>]) -> Vec<BigInt> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the lower-right block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut done = true;
            let p = m[t][t].clone();
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&p);
                for j in t..cols {
                    let v = &q * &m[t][j];
                    m[i][j] -= v;
                }
                if !m[i][t].is_zero() {
                    done = false;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&p);
                for row in m.iter_mut().skip(t) {
                    let v = &q * &row[t];
                    row[j] -= v;
                }
                if !m[t][j].is_zero() {
                    done = false;
                }
            }
            if done {
                // divisibility: fold an offending row into row t
                let p = m[t][t].clone();
                let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&m[i][j] % &p).is_zero()));
                match bad {
                    Some(i) => {
                        for j in t..cols {
                            let v = m[i][j].clone();
                            m[t][j] += v;
                        }
                    }
                    None => break,
                }
            }
            // move the smallest entry of row/column t to the corner
            let mut bi = t;
            let mut bj = t;
            for i in t..rows {
                if !m[i][t].is_zero() && (m[bi][bj].is_zero() || m[i][t].abs() < m[bi][bj].abs()) {
                    bi = i;
                    bj = t;
                }
            }
            for j in t..cols {
                if !m[t][j].is_zero() && (m[bi][bj].is_zero() || m[t][j].abs() < m[bi][bj].abs()) {
                    bi = t;
                    bj = j;
                }
            }
            m.swap(t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}
