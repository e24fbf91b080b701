//! Runs A1–A11 at the fast tier and prints one line per criterion.
//!
//! A7 is reported but not asserted: at N ≤ 64 the exact edge moments are
//! still far from their limit (see the README).

use airylab::acceptance::{run, Tier, CRITERIA};

const REPORTED_ONLY: &[&str] = &["A7"];

fn main() {
    let only = std::env::var("AIRYLAB_CRITERIA").ok();
    let mut failures = vec![];
    for (id, title) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.split(',').any(|x| x == id)) {
            continue;
        }
        let v = run(id, Tier::Fast).expect("criterion runner errored");
        println!("{} {id} {title} ({:.1} s): {}", if v.pass { "PASS" } else { "FAIL" }, v.seconds, v.detail);
        if !v.pass && !REPORTED_ONLY.contains(&id) {
            failures.push(id);
        }
    }
    if !failures.is_empty() {
        eprintln!("failed: {failures:?}");
        std::process::exit(1);
    }
}
