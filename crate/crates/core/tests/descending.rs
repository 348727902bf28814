mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virtknot::algebra::subdiagram_expansion;
use virtknot::descending::{
    extend_invariant, first_bad_fragment, is_descending, p_step, pi_map, progress, q_step, reduce_to_descending,
    ExtensionTable, InsertionOrder,
};
use virtknot::invariants::{v21, v3_closed};
use virtknot::moves::{random_diagram, random_isotopy};
use virtknot::{FormalSum, Underlying};

use common::{random_classical_long, random_long_with_chords};

#[test]
fn reduction_lands_on_descending_diagrams() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let d = random_long_with_chords(rng.gen_range(0..5), rng.gen_range(0..3), &mut rng);
        for (t, _) in reduce_to_descending(&d, 2).unwrap().diagrams() {
            assert!(is_descending(t).unwrap(), "{d} -> {t}");
            assert!(t.chord_count() <= 2);
        }
    }
}

#[test]
fn one_step_makes_progress() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let d = random_long_with_chords(rng.gen_range(1..5), rng.gen_range(0..3), &mut rng);
        if first_bad_fragment(&d).is_none() {
            continue;
        }
        let before = progress(&d).unwrap();
        for (t, _) in p_step(&FormalSum::from_diagram(&d), 3).diagrams() {
            let Some(after) = progress(t) else { continue };
            let ahead = after.chords_left > before.chords_left
                || (after.chords_left == before.chords_left && after.heads_left <= before.heads_left);
            assert!(ahead, "{d} -> {t}");
        }
    }
}

#[test]
fn extension_respects_p_steps() {
    let tbl = ExtensionTable::new(2, v21);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..150 {
        let d = random_long_with_chords(rng.gen_range(0..5), rng.gen_range(0..3), &mut rng);
        let step = p_step(&FormalSum::from_diagram(&d), 2);
        let mut sum = 0;
        for (t, k) in step.diagrams() {
            sum += k * extend_invariant(&tbl, t).unwrap();
        }
        assert_eq!(sum, extend_invariant(&tbl, &d).unwrap(), "{d}");
    }
}

#[test]
fn extension_is_a_virtual_invariant() {
    let tbl = ExtensionTable::new(2, v21);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..40 {
        let d = random_diagram(Underlying::Long, rng.gen_range(0..5), &mut rng);
        let v = extend_invariant(&tbl, &d).unwrap();
        let e = random_isotopy(&d, 12, seed).unwrap();
        assert_eq!(extend_invariant(&tbl, &e).unwrap(), v, "{d} ~ {e}");
    }
}

#[test]
fn insertion_order_does_not_matter() {
    let fwd = ExtensionTable::new(2, v21);
    let rev = ExtensionTable::new(2, v21).with_order(InsertionOrder::Reverse);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let d = random_long_with_chords(rng.gen_range(0..5), rng.gen_range(0..3), &mut rng);
        assert_eq!(extend_invariant(&fwd, &d).unwrap(), extend_invariant(&rev, &d).unwrap(), "{d}");
    }
}

#[test]
fn extension_agrees_on_classical_diagrams() {
    let tbl = ExtensionTable::new(2, v21);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let d = random_classical_long(rng.gen_range(3..7), &mut rng);
        assert_eq!(extend_invariant(&tbl, &d).unwrap(), v21(&d).unwrap(), "{d}");
    }
}

#[test]
fn q_steps_preserve_pi() {
    let tbl = ExtensionTable::new(2, v21);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 100 {
        let a = random_long_with_chords(rng.gen_range(0..4), rng.gen_range(0..3), &mut rng);
        if first_bad_fragment(&a).is_none() {
            continue;
        }
        let x = FormalSum::from_diagram(&a);
        assert_eq!(pi_map(&q_step(&x, 2), &tbl).unwrap(), pi_map(&x, &tbl).unwrap(), "{a}");
        checked += 1;
    }
}

#[test]
fn pi_vanishes_above_the_degree() {
    let tbl = ExtensionTable::new(2, v21);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let chords = rng.gen_range(0..3);
        let arrows = rng.gen_range(3usize.saturating_sub(chords)..5);
        let a = random_long_with_chords(arrows, chords, &mut rng);
        assert_eq!(pi_map(&FormalSum::from_diagram(&a), &tbl).unwrap(), 0, "{a}");
    }
}

#[test]
fn pi_vanishes_above_the_degree_three() {
    let tbl = ExtensionTable::new(3, |d| v3_closed(&d.close_long()?));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..12 {
        let chords = rng.gen_range(0..2);
        let a = random_long_with_chords(4 - chords, chords, &mut rng);
        assert_eq!(pi_map(&FormalSum::from_diagram(&a), &tbl).unwrap(), 0, "{a}");
    }
}

#[test]
fn pi_recovers_the_invariant() {
    let tbl = ExtensionTable::new(2, v21);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..30 {
        let d = random_classical_long(rng.gen_range(3..6), &mut rng);
        if d.arrow_count() > 6 {
            continue;
        }
        let total = subdiagram_expansion(&FormalSum::from_diagram(&d))
            .diagrams()
            .map(|(s, k)| k * pi_map(&FormalSum::from_diagram(s), &tbl).unwrap())
            .sum::<i64>();
        assert_eq!(total, v21(&d).unwrap(), "{d}");
    }
}
