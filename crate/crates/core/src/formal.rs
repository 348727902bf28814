//! Finite integer combinations of diagrams keyed by canonical code.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::gauss::{CanonicalCode, GaussDiagram};

/// No zero coefficients are ever stored. Coefficient overflow panics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalSum {
    terms: BTreeMap<CanonicalCode, (GaussDiagram, i64)>,
}

impl FormalSum {
    pub fn new() -> Self {
        FormalSum { terms: BTreeMap::new() }
    }

    pub fn from_diagram(d: &GaussDiagram) -> Self {
        let mut s = FormalSum::new();
        s.add_term(d, 1);
        s
    }

    pub fn add_term(&mut self, d: &GaussDiagram, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let (code, canon) = d.canonical_form();
        self.add_canonical(code, canon, coeff);
    }

    /// Add a term whose canonical form is already known.
    pub fn add_canonical(&mut self, code: CanonicalCode, canon: GaussDiagram, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.terms.entry(code) {
            btree_map::Entry::Vacant(v) => {
                v.insert((canon, coeff));
            }
            btree_map::Entry::Occupied(mut o) => {
                let c = o.get().1.checked_add(coeff).expect("coefficient overflow");
                if c == 0 {
                    o.remove();
                } else {
                    o.get_mut().1 = c;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FormalSum, k: i64) {
        if k == 0 {
            return;
        }
        for (code, (d, c)) in &other.terms {
            self.add_canonical(code.clone(), d.clone(), c.checked_mul(k).expect("coefficient overflow"));
        }
    }

    pub fn coefficient(&self, code: &CanonicalCode) -> i64 {
        self.terms.get(code).map_or(0, |t| t.1)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical-code order.
    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalCode, &GaussDiagram, i64)> {
        self.terms.iter().map(|(k, (d, c))| (k, d, *c))
    }

    pub fn diagrams(&self) -> impl Iterator<Item = (&GaussDiagram, i64)> {
        self.terms.values().map(|(d, c)| (d, *c))
    }

    pub fn scaled(&self, k: i64) -> FormalSum {
        let mut s = FormalSum::new();
        s.add_scaled(self, k);
        s
    }

    /// Extend `f` linearly.
    pub fn map_linear<F>(&self, mut f: F) -> FormalSum
    where
        F: FnMut(&GaussDiagram) -> FormalSum,
    {
        let mut out = FormalSum::new();
        for (d, c) in self.diagrams() {
            out.add_scaled(&f(d), c);
        }
        out
    }

    /// Apply an integer-valued function linearly.
    pub fn evaluate<F>(&self, mut f: F) -> i64
    where
        F: FnMut(&GaussDiagram) -> i64,
    {
        self.diagrams().map(|(d, c)| c * f(d)).sum()
    }

    pub fn retain<F>(&mut self, mut keep: F)
    where
        F: FnMut(&GaussDiagram) -> bool,
    {
        self.terms.retain(|_, (d, _)| keep(d));
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (code, _, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(if c < 0 { " - " } else { " + " })?;
            } else if c < 0 {
                f.write_str("-")?;
            }
            write!(f, "{}[{}]", c.abs(), code)?;
        }
        Ok(())
    }
}

impl AddAssign<&FormalSum> for FormalSum {
    fn add_assign(&mut self, rhs: &FormalSum) {
        self.add_scaled(rhs, 1);
    }
}

impl Add for &FormalSum {
    type Output = FormalSum;
    fn add(self, rhs: &FormalSum) -> FormalSum {
        let mut s = self.clone();
        s.add_scaled(rhs, 1);
        s
    }
}

impl Sub for &FormalSum {
    type Output = FormalSum;
    fn sub(self, rhs: &FormalSum) -> FormalSum {
        let mut s = self.clone();
        s.add_scaled(rhs, -1);
        s
    }
}

impl Neg for &FormalSum {
    type Output = FormalSum;
    fn neg(self) -> FormalSum {
        self.scaled(-1)
    }
}

impl Mul<&FormalSum> for i64 {
    type Output = FormalSum;
    fn mul(self, rhs: &FormalSum) -> FormalSum {
        rhs.scaled(self)
    }
}

impl FromIterator<(GaussDiagram, i64)> for FormalSum {
    fn from_iter<I: IntoIterator<Item = (GaussDiagram, i64)>>(iter: I) -> Self {
        let mut s = FormalSum::new();
        for (d, c) in iter {
            s.add_term(&d, c);
        }
        s
    }
}
