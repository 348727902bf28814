mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virtknot::invariants::{v21, v22};
use virtknot::GaussDiagram;

use common::random_classical_long;

/// Second Conway coefficient of a classical long knot by the skein recursion:
/// change the first crossing met from below, v(K+) - v(K-) = lk(smoothing),
/// and a diagram met from above everywhere is trivial.
fn conway_c2(code: &str) -> i64 {
    // (over, label, sign) along the line
    let mut word: Vec<(bool, usize, i64)> = code
        .split_whitespace()
        .skip(1)
        .map(|t| (t.starts_with('O'), t[1..t.len() - 1].parse().unwrap(), if t.ends_with('+') { 1 } else { -1 }))
        .collect();
    let mut total = 0;
    loop {
        let first = |i: usize| word[..i].iter().all(|w| w.1 != word[i].1);
        let Some(i) = (0..word.len()).find(|&i| !word[i].0 && first(i)) else {
            return total;
        };
        let label = word[i].1;
        let j = word.iter().rposition(|w| w.1 == label).unwrap();
        let sign = word[i].2;
        // smoothing: letters strictly between i and j form the closed component
        let inside: Vec<usize> = word[i + 1..j].iter().map(|w| w.1).collect();
        let mut lk2 = 0;
        for w in &word[i + 1..j] {
            if inside.iter().filter(|&&l| l == w.1).count() == 1 {
                lk2 += w.2;
            }
        }
        assert_eq!(lk2 % 2, 0);
        total += sign * (lk2 / 2);
        word[i].0 = true;
        word[j].0 = false;
        word[i].2 = -sign;
        word[j].2 = -sign;
    }
}

#[test]
fn skein_recursion_samples() {
    assert_eq!(conway_c2("long: O1+ U2+ O3+ U1+ O2+ U3+"), 1);
    assert_eq!(conway_c2("long: O1- U2- O3+ U4+ O2- U1- O4+ U3+"), -1);
    assert_eq!(conway_c2("long: O1+ U1+"), 0);
    assert_eq!(conway_c2("long:"), 0);
}

#[test]
fn degree_two_invariants_are_the_conway_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut nontrivial = 0;
    for _ in 0..400 {
        let v = rng.gen_range(3..8);
        let d: GaussDiagram = random_classical_long(v, &mut rng);
        let c2 = conway_c2(&d.serialize());
        assert_eq!(v21(&d).unwrap(), c2, "{d}");
        assert_eq!(v22(&d).unwrap(), c2, "{d}");
        nontrivial += (c2 != 0) as usize;
    }
    assert!(nontrivial > 20);
}
