//! Analytic gradients against central finite differences.

mod common;

use common::gradcheck::check_case;

#[test]
fn analytic_gradients_match_finite_differences() {
    let (mut kinks, mut total) = (0, 0);
    for seed in 100..110 {
        let r = check_case(seed);
        assert!(r.max_relative_error < 1e-4, "seed {seed}: max relative error {:e}", r.max_relative_error);
        kinks += r.kinks;
        total += r.checked + r.kinks;
    }
    // kinks are rare; a large share would mean the check is not testing much
    assert!(kinks * 100 <= total, "{kinks} of {total} coordinates skipped");
}
