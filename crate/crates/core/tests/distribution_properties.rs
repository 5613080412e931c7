#[path = "support/distribution.rs"]
mod distribution;

#[test]
fn identity_symmetry_and_bounds() {
    distribution::identity_symmetry_and_bounds();
}

#[test]
fn frechet_identity_and_symmetry() {
    distribution::frechet_identity_and_symmetry();
}

#[test]
fn hill_lies_between_one_and_k() {
    distribution::hill_lies_between_one_and_k();
}

#[test]
fn kl_is_asymmetric() {
    distribution::kl_is_asymmetric();
}

#[test]
fn mwu_exact_matches_enumeration() {
    distribution::mwu_exact_matches_enumeration();
}

#[test]
fn wasserstein_equals_sorted_difference() {
    distribution::wasserstein_equals_sorted_difference();
}
