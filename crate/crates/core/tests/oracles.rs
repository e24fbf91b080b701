//! Public-API checks against independent closed forms.

use airylab::blocks::{examples, validate_blocks, xi_partition};
use airylab::dunkl::moments::{corners_moment, gbe_second_moment, MomentQuery};
use airylab::paths::{count_paths, PathCountQuery};
use airylab::scalar::{int, ratio};
use num::{BigUint, One, Zero};

fn binom(n: u32, k: i64) -> BigUint {
    if k < 0 || k > n as i64 {
        return BigUint::zero();
    }
    (0..k as u32).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

// reflection principle
#[test]
fn nonnegative_path_counts_follow_the_ballot_formula() {
    for x in 0..=16u32 {
        for h in 0..=6u32 {
            for g in 0..=6u32 {
                let q = PathCountQuery::new(x, h, g);
                let want = if (x + h + g) % 2 == 1 || h.abs_diff(g) > x {
                    BigUint::zero()
                } else {
                    let up = (x as i64 + g as i64 - h as i64) / 2;
                    binom(x, up) - binom(x, up + h as i64 + 1)
                };
                assert_eq!(count_paths(&q), want, "X={x} H={h} G={g}");
            }
        }
    }
}

#[test]
fn gue_fourth_moment() {
    // E Tr X⁴ = 2N³ + N for GUE with unit diagonal variance
    for n in 1..=5usize {
        let q = MomentQuery::corners(n, vec![n], vec![4], int(2), int(1));
        assert_eq!(corners_moment(&q).unwrap(), int((2 * n * n * n + n) as i64));
    }
}

#[test]
fn second_moment_matches_the_closed_form() {
    for (n, b) in [(2usize, ratio(1, 2)), (3, int(1)), (4, ratio(7, 3))] {
        let q = MomentQuery::corners(n, vec![n], vec![2], b.clone(), ratio(3, 2));
        assert_eq!(corners_moment(&q).unwrap(), gbe_second_moment(n, &b, &ratio(3, 2)));
    }
}

#[test]
fn trivial_blocks_have_a_single_excursion_interval() {
    let b = examples::trivial(1.5);
    assert!(validate_blocks(&b).is_empty());
    assert_eq!(xi_partition(&b).intervals.len(), 1);
}
