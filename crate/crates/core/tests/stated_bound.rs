//! The success bound `½(1 + |G|/2ᵏ)` for ℤ₂, ℤ₃, ℤ₄ and k ≤ 3, asserted as
//! stated. It is exceeded at ℤ₂ k=2 (25/32 > 3/4), ℤ₂ k=3, ℤ₃ k=3 and ℤ₄ k=3,
//! so this test is ignored; run it with `--ignored` to see the failure.

use hslab::abelian::success_probability;
use hslab::group::Group;

#[test]
#[ignore = "the stated bound is false for these cases; see README"]
fn stated_success_bound() {
    for name in ["Z2", "Z3", "Z4"] {
        let g = Group::parse(name).unwrap();
        for k in 1..=3 {
            let s = success_probability(&g, k).unwrap();
            assert!(s.within_bound(), "{name} k={k}: {} > {}", s.probability, s.bound);
        }
    }
}

#[test]
fn bound_holds_while_two_to_the_k_is_at_most_the_order() {
    for name in ["Z2", "Z3", "Z4", "Z5", "Z2xZ4", "Z16"] {
        let g = Group::parse(name).unwrap();
        let mut k = 1;
        while 1usize << k <= g.order() {
            assert!(success_probability(&g, k).unwrap().within_bound(), "{name} k={k}");
            k += 1;
        }
    }
}
