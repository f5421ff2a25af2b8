//! The trajectory-average inequalities hold exactly (no sampling error) when the
//! expectation is taken over every pulse sequence, and Monte-Carlo estimates
//! agree with the enumerated moments.

use zeno_dd_core::bounds::{tr1_pure_choi_distance, tr1_purity_floor, tr2_distance_bound, tr2_purity_floor, tr2_tail};
use zeno_dd_core::montecarlo::{enumerate_statistic, estimate, statistic, tail_probability, Tail};
use zeno_dd_core::protocol::DecouplingSet;
use zeno_dd_core::{reference_model, Ensemble};

const MARGIN: f64 = 1e-9;

fn ensemble() -> Ensemble {
    Ensemble::ground(reference_model(), DecouplingSet::pauli())
}

#[test]
fn expected_values_respect_their_bounds() {
    let e = ensemble();
    for n in 1..=3 {
        let b = e.bound_inputs(n).unwrap();
        let fid = enumerate_statistic(&e, n, statistic("fidelity-2-zeno").unwrap()).unwrap().mean();
        assert!(fid >= tr2_purity_floor(&b).raw - MARGIN, "fidelity n={n}: {fid}");
        let fro = enumerate_statistic(&e, n, statistic("frob-dist-2-zeno").unwrap()).unwrap().mean();
        assert!(fro <= tr2_distance_bound(&b).0 + MARGIN, "frobenius n={n}: {fro}");
        let op1 = enumerate_statistic(&e, n, statistic("opnorm-1").unwrap()).unwrap().mean();
        assert!(op1 >= tr1_purity_floor(&b).raw - MARGIN, "opnorm n={n}: {op1}");
        let lead = enumerate_statistic(&e, n, statistic("opnorm-dist-1-leading").unwrap()).unwrap().mean();
        assert!(lead <= tr1_pure_choi_distance(&b) + MARGIN, "leading n={n}: {lead}");
    }
}

#[test]
fn exact_tails_respect_markov_bound() {
    let e = ensemble();
    let fid = statistic("fidelity-2-zeno").unwrap();
    for n in 1..=3 {
        let dist = enumerate_statistic(&e, n, fid).unwrap();
        for r in [0.5, 0.9] {
            let bound = tr2_tail(&e.bound_inputs(n).unwrap().with_r(r)).unwrap().raw;
            assert!(dist.tail(r, Tail::AtMost) <= bound + MARGIN, "n={n} r={r}");
        }
    }
}

#[test]
fn monte_carlo_converges_to_exact_mean() {
    let e = ensemble();
    let fid = statistic("fidelity-2-zeno").unwrap();
    let exact = enumerate_statistic(&e, 2, fid).unwrap().mean();
    let mc = estimate(&e, 2, 10_000, 17, fid).unwrap();
    assert!((mc.mean - exact).abs() <= 5.0 * mc.stderr, "{} vs {exact}", mc.mean);
}

#[test]
fn empirical_tail_matches_enumeration() {
    let e = ensemble();
    let p1 = statistic("purity-1").unwrap();
    let threshold = 0.99;
    let exact = enumerate_statistic(&e, 3, p1).unwrap().tail(threshold, Tail::AtMost);
    let est = tail_probability(&e, 3, 4000, 23, p1, threshold, Tail::AtMost).unwrap();
    let slack = 4.0 * est.stderr.max((exact * (1.0 - exact) / 4000.0).sqrt());
    assert!((est.probability - exact).abs() <= slack, "{} vs {exact}", est.probability);
}

#[test]
fn atypical_set_enumerates_with_weights() {
    let e = Ensemble::ground(reference_model(), DecouplingSet::pauli_atypical());
    let dist = enumerate_statistic(&e, 2, statistic("purity-1").unwrap()).unwrap();
    let total: f64 = dist.outcomes.iter().map(|(q, _)| q).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(dist.outcomes.len(), 64);
    let all_identity = dist.outcomes[0].0;
    assert!((all_identity - (20.0f64 / 23.0).powi(3)).abs() < 1e-12);
}
