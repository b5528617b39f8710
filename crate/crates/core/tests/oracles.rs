//! Frozen reference values computed independently (NumPy/mpmath scripts that
//! rebuild the bound from the symmetric table) and a second transcription of
//! the X-bound term lists.

use sqkd3::keyrate::{s_bec, x_bound};
use sqkd3::stats::p_table_symmetric;
use sqkd3::*;

fn rate(q: f64, variant: Variant, model: ChannelModel, c: Conventions) -> f64 {
    key_rate(&ChannelScenario::new(q, model, variant, c).unwrap()).unwrap().r
}

#[test]
fn frozen_rates_paper_conventions() {
    let cases = [
        (0.05, Variant::Phi1, ChannelModel::Dependent, 1.0813316564879607),
        (0.1, Variant::Phi1, ChannelModel::Dependent, 0.6100371606821946),
        (0.05, Variant::Phi2, ChannelModel::Independent, -0.175791322187141),
        (0.1, Variant::Phi2, ChannelModel::Independent, -0.45905123942856574),
    ];
    for (q, v, m, want) in cases {
        let got = rate(q, v, m, Conventions::paper());
        assert!((got - want).abs() < 1e-12, "{q} {v} {m:?}: {got} vs {want}");
    }
}

#[test]
fn frozen_rates_physical_conventions() {
    let normalized = Conventions { weighting: Weighting::Normalized, ..Conventions::physical() };
    let cases = [
        (0.05, Variant::Phi1, Conventions::physical(), 0.33526177820573655),
        (0.1, Variant::Phi1, Conventions::physical(), -0.05525619714283292),
        (0.05, Variant::Phi2, normalized, -0.12116185195909135),
        (0.1, Variant::Phi2, normalized, -0.3011132229999962),
    ];
    for (q, v, c, want) in cases {
        let got = rate(q, v, ChannelModel::Dependent, c);
        assert!((got - want).abs() < 1e-12, "{q} {v} {c}: {got} vs {want}");
    }
}

#[test]
fn s_bec_high_precision() {
    let t = StatTable::new(p_table_symmetric(0.05, 0.05).unwrap(), [0.05; 6], Variant::Phi1).unwrap();
    assert!((s_bec(&t).unwrap() - 1.717_992_499_293_060_7).abs() < 1e-13);
}

type TermPairs = Vec<([usize; 3], [usize; 3])>;

/// Term lists rebuilt from their index patterns rather than copied.
fn generated_terms() -> (TermPairs, TermPairs) {
    let mut cross = Vec::new();
    for ((a0, a2), (b0, b2)) in [((0, 1), (1, 2)), ((0, 1), (2, 0)), ((0, 2), (1, 0)), ((0, 2), (2, 1)), ((1, 0), (2, 1)), ((1, 2), (2, 0))] {
        for j1 in 0..3 {
            for j2 in 0..3 {
                cross.push(([a0, j1, a2], [b0, j2, b2]));
            }
        }
    }
    let mut diagonal = Vec::new();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for j1 in 0..3 {
            for j2 in 0..3 {
                if j1 == a && j2 == b {
                    continue;
                }
                diagonal.push(([a, j1, a], [b, j2, b]));
            }
        }
    }
    (cross, diagonal)
}

#[test]
fn x_bound_dual_transcription() {
    let (cross, diagonal) = generated_terms();
    assert_eq!((cross.len(), diagonal.len()), (54, 24));
    let p = p_table_symmetric(0.05, 0.05).unwrap();
    let root = |(a, b): &([usize; 3], [usize; 3])| (p[a[0]][a[1]][a[2]] * p[b[0]][b[1]][b[2]]).sqrt();
    let cross_sum: f64 = cross.iter().map(root).sum();
    let diag_sum: f64 = diagonal.iter().map(root).sum();
    for (variant, weight, frozen) in [(Variant::Phi1, 0.5, 2.654779220613578), (Variant::Phi2, -1.0, 0.6304415587728432)] {
        let table = StatTable::new(p, [0.05; 6], variant).unwrap();
        let independent = 3.0 - 1.5 * 6.0 * 0.05 + weight * cross_sum - diag_sum;
        let got = x_bound(&table);
        assert!((got - independent).abs() < 1e-12, "{variant}");
        assert!((got - frozen).abs() < 1e-12, "{variant}");
    }
}

#[test]
fn frozen_thresholds() {
    let cases = [
        (Variant::Phi1, ChannelModel::Dependent, 0.1904),
        (Variant::Phi1, ChannelModel::Independent, 0.0613),
        (Variant::Phi2, ChannelModel::Dependent, 0.0423),
        (Variant::Phi2, ChannelModel::Independent, 0.0301),
    ];
    for (v, m, want) in cases {
        let got = find_threshold(v, m, Conventions::paper()).unwrap();
        assert!((got - want).abs() < 1e-4, "{v} {m:?}: {got}");
    }
}
