mod common;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use virtknot::algebra::enumerate_arrow_diagrams;
use virtknot::Underlying;

use common::{connected_sums, cuts, random_classical_closed, random_walk_closed, random_classical_long, torus_2};

#[test]
fn plane_curves_are_realizable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let v = 3 + (rand::Rng::gen_range(&mut rng, 0..6));
        let d = random_classical_closed(v, &mut rng);
        assert!(d.is_realizable().unwrap(), "{d}");
        let l = random_classical_long(v, &mut rng);
        assert!(l.is_realizable().unwrap(), "{l}");
    }
    for n in [3, 5, 7, 9] {
        assert!(torus_2(n).is_realizable().unwrap());
    }
}

fn sampled_codes(u: Underlying, max_arrows: usize, samples: usize) -> BTreeSet<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = BTreeSet::new();
    if u == Underlying::Long {
        for closed in sampled_codes(Underlying::Closed, max_arrows, samples) {
            seen.extend(cuts(&closed).iter().map(|d| d.canonical_code().0));
        }
    }
    for _ in 0..samples {
        let v = 3 + rand::Rng::gen_range(&mut rng, 0..6);
        let d = match u {
            Underlying::Closed => random_walk_closed(v, &mut rng),
            _ => random_classical_long(v.min(4), &mut rng),
        };
        if d.arrow_count() <= max_arrows {
            seen.insert(d.canonical_code().0);
        }
    }
    if u == Underlying::Closed {
        loop {
            let now: Vec<String> = seen.iter().cloned().collect();
            let before = seen.len();
            for a in &now {
                for b in &now {
                    if a.matches(' ').count() + b.matches(' ').count() > 2 * max_arrows {
                        continue;
                    }
                    for d in connected_sums(a, b) {
                        seen.insert(d.canonical_code().0);
                    }
                }
            }
            if seen.len() == before {
                break;
            }
        }
    }
    seen
}

#[test]
fn realizable_small_diagrams_are_exactly_the_plane_ones() {
    for (u, max) in [(Underlying::Closed, 4), (Underlying::Long, 3)] {
        let claimed: BTreeSet<String> = enumerate_arrow_diagrams(max, u)
            .unwrap()
            .into_iter()
            .filter(|d| d.is_realizable().unwrap())
            .map(|d| d.canonical_code().0)
            .collect();
        let seen = sampled_codes(u, max, 300_000);
        let missing: Vec<_> = claimed.difference(&seen).collect();
        assert!(seen.is_subset(&claimed));
        assert!(missing.is_empty(), "{u}: never drawn: {missing:?}");
    }
}
