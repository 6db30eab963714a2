//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//!
//! Positional arguments select criteria by number. The run fails when a
//! criterion outside [`EXPECTED_FAIL`] fails.

use concnls_verify::CRITERIA;

/// Criteria known to fail with this discretization. They still run and
/// print their measured values; see the README.
const EXPECTED_FAIL: [usize; 1] = [9];

fn main() {
    let picked: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    let mut ran = 0;
    for c in CRITERIA.iter().filter(|c| picked.is_empty() || picked.contains(&c.id)) {
        let o = c.evaluate();
        println!("{}", o.line());
        ran += 1;
        let expected_fail = EXPECTED_FAIL.contains(&o.id);
        if !o.pass && !expected_fail {
            unexpected.push(o.id);
        }
        if o.pass && expected_fail {
            println!("criterion {:>2} passed although listed as expected to fail", o.id);
        }
    }
    println!("acceptance: {ran} criteria run, unexpected failures {unexpected:?}");
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
