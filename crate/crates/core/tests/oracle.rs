mod common;

use std::time::Instant;

use common::*;
use vericov::coverage::{exact_coverage, over_approx_coverage};

const BUDGETS: [Option<usize>; 5] = [Some(10), Some(50), Some(200), Some(1000), Some(5000)];

#[test]
fn exact_matches_enumeration_on_corpus() {
    for (name, cfa) in corpus() {
        let started = Instant::now();
        for b in BUDGETS {
            let aa = first_phase_aa(&cfa, b, small_domain());
            let expected = oracle_covered(&cfa, &aa, -2, 2, 200);
            let report = exact_coverage(&cfa, &aa, &options(None, 10, small_domain())).unwrap();
            assert!(!report.exhausted, "{name} budget {b:?}");
            assert_eq!(report.covered, expected, "{name} budget {b:?}");
            let over = over_approx_coverage(&cfa, &aa).unwrap();
            assert!(report.covered.is_subset(&over.covered), "{name} budget {b:?}");
        }
        eprintln!("{name}: {:?}", started.elapsed());
    }
}
