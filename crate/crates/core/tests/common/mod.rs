//! Shared helpers for the integration tests: Gauss codes of random plane
//! curves, a brute-force subdiagram matcher, and a small corpus.

#![allow(dead_code)]

use rand::Rng;
use virtknot::{GaussDiagram, Underlying};

type P = (f64, f64);

fn cross(a: P, b: P) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

/// Proper intersection parameters of segments ab and cd.
fn intersect(a: P, b: P, c: P, d: P) -> Option<(f64, f64)> {
    let r = sub(b, a);
    let s = sub(d, c);
    let den = cross(r, s);
    if den.abs() < 1e-12 {
        return None;
    }
    let t = cross(sub(c, a), s) / den;
    let u = cross(sub(c, a), r) / den;
    let eps = 1e-9;
    (t > eps && t < 1.0 - eps && u > eps && u < 1.0 - eps).then_some((t, u))
}

/// Gauss code of a polygonal curve through `pts` (closed when `closed`),
/// with random over/under choices. A crossing is positive when the over
/// strand turns counterclockwise onto the under strand.
pub fn curve_code<R: Rng>(pts: &[P], closed: bool, rng: &mut R) -> String {
    let n = pts.len();
    let segs: Vec<(P, P)> = if closed {
        (0..n).map(|i| (pts[i], pts[(i + 1) % n])).collect()
    } else {
        (0..n - 1).map(|i| (pts[i], pts[i + 1])).collect()
    };
    // (curve parameter, label, over, sign)
    let mut events: Vec<(f64, usize, bool, i32)> = Vec::new();
    let mut label = 0;
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if let Some((t, u)) = intersect(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                label += 1;
                let di = sub(segs[i].1, segs[i].0);
                let dj = sub(segs[j].1, segs[j].0);
                let i_over = rng.gen_bool(0.5);
                let c = if i_over { cross(di, dj) } else { cross(dj, di) };
                let s = if c > 0.0 { 1 } else { -1 };
                events.push((i as f64 + t, label, i_over, s));
                events.push((j as f64 + u, label, !i_over, s));
            }
        }
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut code = String::from(if closed { "closed:" } else { "long:" });
    for (_, l, over, s) in events {
        code.push_str(&format!(" {}{}{}", if over { 'O' } else { 'U' }, l, if s > 0 { '+' } else { '-' }));
    }
    code
}

/// A random classical closed diagram from a polygon with `vertices` corners.
pub fn random_classical_closed<R: Rng>(vertices: usize, rng: &mut R) -> GaussDiagram {
    let pts: Vec<P> = (0..vertices).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    curve_code(&pts, true, rng).parse().unwrap()
}

/// A closed random walk with `steps` steps of random direction and length.
/// Short walks curl up often, which produces kinks and small nested loops.
pub fn random_walk_closed<R: Rng>(steps: usize, rng: &mut R) -> GaussDiagram {
    let mut pts = vec![(0.0, 0.0)];
    let mut dir: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    for _ in 1..steps {
        dir += rng.gen_range(-2.5..2.5);
        let len = rng.gen_range(0.2..1.0);
        let &(x, y) = pts.last().unwrap();
        pts.push((x + len * dir.cos(), y + len * dir.sin()));
    }
    curve_code(&pts, true, rng).parse().unwrap()
}

/// A random classical long diagram: a path from (-2, 0) to (2, 0) through
/// `vertices` points of the unit square.
pub fn random_classical_long<R: Rng>(vertices: usize, rng: &mut R) -> GaussDiagram {
    let mut pts = vec![(-2.0, 0.0)];
    pts.extend((0..vertices).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())));
    pts.push((2.0, 0.0));
    curve_code(&pts, false, rng).parse().unwrap()
}

fn arrow_data(d: &GaussDiagram) -> Vec<(usize, usize, i64)> {
    d.arrows().iter().map(|a| (a.tail.position, a.head.position, a.sign.value())).collect()
}

/// Whether the arrows `sub` of `d` (one component) form a copy of `a`:
/// tried over all bijections and, on a circle, all rotations.
fn is_copy(d: &GaussDiagram, sub: &[usize], a: &GaussDiagram) -> bool {
    let k = sub.len();
    let da = arrow_data(d);
    // positions of the chosen endpoints, relative order only
    let mut pos: Vec<usize> = sub.iter().flat_map(|&i| [da[i].0, da[i].1]).collect();
    pos.sort_unstable();
    let rank = |p: usize| pos.iter().position(|&x| x == p).unwrap();
    let aa = arrow_data(a);
    let len = 2 * k;
    let shifts = if a.underlying() == Underlying::Closed { len } else { 1 };
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        for shift in 0..shifts.max(1) {
            let ok = (0..k).all(|j| {
                let (t, h, s) = da[sub[perm[j]]];
                let (at, ah, asg) = aa[j];
                s == asg && (rank(t) + shift) % len.max(1) == at && (rank(h) + shift) % len.max(1) == ah
            });
            if ok {
                return true;
            }
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Number of arrow subsets of `d` forming a copy of `a` (single component, chord-free).
pub fn brute_force_count(a: &GaussDiagram, d: &GaussDiagram) -> i64 {
    let k = a.arrow_count();
    let n = d.arrow_count();
    if k > n {
        return 0;
    }
    let mut count = 0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let sub: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if is_copy(d, &sub, a) {
            count += 1;
        }
    }
    count
}

fn tokens(code: &str) -> Vec<(char, usize, char)> {
    code.split_whitespace()
        .skip(1)
        .map(|t| {
            let c = t.chars().next().unwrap();
            let s = t.chars().last().unwrap();
            (c, t[1..t.len() - 1].parse().unwrap(), s)
        })
        .collect()
}

/// All closed connected sums of two closed codes: the second word, cut at
/// any point, spliced into any gap of the first. Planar curves stay planar.
pub fn connected_sums(a: &str, b: &str) -> Vec<GaussDiagram> {
    let ta = tokens(a);
    let tb = tokens(b);
    let off = ta.iter().map(|t| t.1).max().unwrap_or(0);
    let mut out = Vec::new();
    for cut in 0..tb.len().max(1) {
        let rot: Vec<_> = tb[cut.min(tb.len())..].iter().chain(&tb[..cut.min(tb.len())]).collect();
        for gap in 0..=ta.len() {
            let mut code = String::from("closed:");
            let mut push = |c: char, l: usize, s: char| code.push_str(&format!(" {c}{l}{s}"));
            for t in &ta[..gap] {
                push(t.0, t.1, t.2);
            }
            for t in &rot {
                push(t.0, t.1 + off, t.2);
            }
            for t in &ta[gap..] {
                push(t.0, t.1, t.2);
            }
            out.push(code.parse().unwrap());
        }
    }
    out
}

/// Long codes from cutting a closed code at every gap. A point of a sphere
/// curve sent to infinity leaves a long plane curve.
pub fn cuts(code: &str) -> Vec<GaussDiagram> {
    let t = tokens(code);
    (0..t.len().max(1))
        .map(|c| {
            let mut s = String::from("long:");
            for (o, l, g) in t[c.min(t.len())..].iter().chain(&t[..c.min(t.len())]) {
                s.push_str(&format!(" {o}{l}{g}"));
            }
            s.parse().unwrap()
        })
        .collect()
}

/// A random long diagram with `arrows` arrows and `chords` chords.
pub fn random_long_with_chords<R: Rng>(arrows: usize, chords: usize, rng: &mut R) -> GaussDiagram {
    use rand::seq::SliceRandom;
    let mut toks = Vec::new();
    for l in 1..=arrows + chords {
        let s = if rng.gen_bool(0.5) { '+' } else { '-' };
        if l <= arrows {
            toks.push(format!("O{l}{s}"));
            toks.push(format!("U{l}{s}"));
        } else {
            toks.push(format!("Da{l}{s}"));
            toks.push(format!("Db{l}{s}"));
        }
    }
    toks.shuffle(rng);
    format!("long: {}", toks.join(" ")).trim_end().parse().unwrap()
}

/// (2, n) torus knot diagram for odd `n`, all crossings positive.
pub fn torus_2(n: usize) -> GaussDiagram {
    let mut code = String::from("closed:");
    for k in 0..2 * n {
        code.push_str(&format!(" {}{}+", if k % 2 == 0 { 'O' } else { 'U' }, k % n + 1));
    }
    code.parse().unwrap()
}

pub fn corpus() -> Vec<GaussDiagram> {
    include_str!("../data/corpus.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect()
}

pub fn parse(s: &str) -> GaussDiagram {
    s.parse().unwrap()
}
