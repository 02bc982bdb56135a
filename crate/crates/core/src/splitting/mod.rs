//! Splitting-plane machinery for balanced weights on `{0,1}^n`.
//!
//! A body `K` with coordinatewise median `p` induces the weight
//! `w(s) = vol(K_s)` of its orthants around `p`. Every coordinate marginal of
//! `w` is 1/2. For a vertex `z`, the orthants at Hamming distance below
//! `⌊n/2⌋` from `z` and those above `⌈n/2⌉` form axis-disjoint unions, and
//! the middle band is the separator.

mod bands;
mod body;
mod certify;
mod weight;

pub use bands::{
    band, distance_profile, expected_band_masses, fluctuation_bound, fluctuation_gap,
    joint_indicator_count, joint_indicator_exact, joint_indicator_prob, joint_indicator_table,
    max_small_weight_sum, open_problem_explore, small_weight_sum, split, variance_exact,
    ExploreResult, FluctuationBound, SplitCertificate, DENSE_PROFILE_DIM, MAX_PAIRWISE_SUPPORT,
};
pub use body::{
    decompose_body, median_point, orthant_of, orthant_weights, BodyOracle, MedianPoint, Membership,
    OrthantDecomposition,
};
pub use certify::{certify_psi_upper_bound, CertificateMethod, PsiCertificate, DEFAULT_N0};
pub use weight::{BalancedWeight, Imbalance, IpfReport, WeightEntry, BALANCE_TOL, IPF_MAX_ROUNDS};
