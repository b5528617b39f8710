//! Transcribed term tables for the alternative-basis error expansions and the
//! Cauchy–Schwarz lower bound on `X`.
//!
//! Each error rate `p_{n→m}` in the T (resp. K) basis is written as
//! `1/3 + (1/9) Σ_groups Re(phase · Σ_{(a,b) ∈ group} ⟨f_a|f_b⟩)`. Pairs that
//! are absent from the tables cancel by the unitarity sum rules.
//!
//! The K-basis `2 → 0` entry corrects two pairs of the printed ω group
//! (`⟨f_4|f_8⟩`, `⟨f_5|f_7⟩` are listed twice in the source, once with each
//! phase; the ω group must read `⟨f_8|f_4⟩`, `⟨f_7|f_5⟩`).

use serde::{Deserialize, Serialize};

use crate::linalg::{omega, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    One,
    Omega,
    OmegaBar,
}

impl Phase {
    pub fn value(self) -> C64 {
        match self {
            Phase::One => C64::new(1.0, 0.0),
            Phase::Omega => omega(),
            Phase::OmegaBar => omega().conj(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TermGroup {
    pub phase: Phase,
    pub pairs: &'static [(u8, u8)],
}

/// Expansion of the probability that Alice sends state `from` of the
/// alternative basis and finds `to`.
#[derive(Debug, Clone, Copy)]
pub struct Expansion {
    pub from: u8,
    pub to: u8,
    pub groups: &'static [TermGroup],
}

/// `[sent, bob, alice]` index into the 27-entry table.
pub type Outcome = [u8; 3];

/// Owned copy of one basis' six expansions, so tests and the verifier can
/// hand a deliberately damaged table to the evaluator.
/// Phase groups of one expansion, each with its `(a, b)` Gram index pairs.
pub type PhaseGroups = Vec<(Phase, Vec<(usize, usize)>)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTable {
    pub entries: Vec<PhaseGroups>,
}

impl ExpansionTable {
    pub fn from_static(src: &[Expansion]) -> Self {
        let entries = src
            .iter()
            .map(|e| {
                e.groups
                    .iter()
                    .map(|g| (g.phase, g.pairs.iter().map(|&(a, b)| (a as usize, b as usize)).collect()))
                    .collect()
            })
            .collect();
        Self { entries }
    }

    pub fn t_basis() -> Self {
        Self::from_static(&T_EXPANSIONS)
    }

    pub fn k_basis() -> Self {
        Self::from_static(&K_EXPANSIONS)
    }

    /// Evaluate all six expansions against a Gram matrix `gram[a][b] = ⟨f_a|f_b⟩`.
    pub fn evaluate(&self, gram: &[[C64; 9]; 9]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|groups| {
                let mut acc = 1.0 / 3.0;
                for (phase, pairs) in groups {
                    let s: C64 = pairs.iter().map(|&(a, b)| gram[a][b]).sum();
                    acc += (phase.value() * s).re / 9.0;
                }
                acc
            })
            .collect()
    }
}

pub static T_EXPANSIONS: [Expansion; 6] = [
    Expansion {
        from: 0,
        to: 1,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (3, 1), (5, 1), (6, 1), (8, 1), (1, 3), (5, 3), (8, 3), (1, 5), (3, 5), (6, 5),
                (1, 6), (5, 6), (8, 6), (1, 8), (3, 8), (6, 8), (2, 0), (0, 2),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (0, 1), (2, 1), (2, 3), (0, 5), (2, 6), (0, 8), (4, 0), (7, 0), (4, 2), (7, 2),
                (3, 4), (5, 4), (6, 4), (8, 4), (3, 7), (5, 7), (6, 7), (8, 7),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (4, 3), (7, 3), (4, 5), (7, 5), (4, 6), (7, 6), (4, 8), (7, 8), (1, 0), (5, 0),
                (8, 0), (1, 2), (3, 2), (6, 2), (0, 4), (2, 4), (0, 7), (2, 7),
                ],
            },
        ],
    },
    Expansion {
        from: 0,
        to: 2,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (1, 0), (0, 1), (3, 2), (4, 2), (6, 2), (7, 2), (2, 3), (4, 3), (7, 3), (2, 4),
                (3, 4), (6, 4), (2, 6), (4, 6), (7, 6), (2, 7), (3, 7), (6, 7),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (2, 0), (4, 0), (7, 0), (2, 1), (3, 1), (6, 1), (5, 3), (8, 3), (5, 4), (8, 4),
                (0, 5), (1, 5), (5, 6), (8, 6), (5, 7), (8, 7), (0, 8), (1, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (5, 0), (8, 0), (5, 1), (8, 1), (0, 2), (1, 2), (1, 3), (0, 4), (3, 5), (4, 5),
                (6, 5), (7, 5), (1, 6), (0, 7), (3, 8), (4, 8), (6, 8), (7, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 1,
        to: 0,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (2, 1), (3, 1), (8, 1), (1, 2), (3, 2), (7, 2), (1, 3), (2, 3), (7, 3), (8, 3),
                (5, 4), (4, 5), (2, 7), (3, 7), (8, 7), (1, 8), (3, 8), (7, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (1, 0), (2, 0), (7, 0), (8, 0), (5, 1), (4, 2), (4, 3), (5, 3), (0, 4), (6, 4),
                (0, 5), (6, 5), (1, 6), (2, 6), (7, 6), (8, 6), (5, 7), (4, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (4, 0), (5, 0), (0, 1), (6, 1), (0, 2), (6, 2), (2, 4), (3, 4), (8, 4), (1, 5),
                (3, 5), (7, 5), (4, 6), (5, 6), (0, 7), (6, 7), (0, 8), (6, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 1,
        to: 2,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (1, 0), (5, 0), (7, 0), (0, 1), (5, 1), (6, 1), (4, 3), (3, 4), (0, 5), (1, 5),
                (6, 5), (7, 5), (1, 6), (5, 6), (7, 6), (0, 7), (5, 7), (6, 7),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (4, 0), (3, 1), (0, 2), (1, 2), (6, 2), (7, 2), (2, 3), (8, 3), (2, 4), (8, 4),
                (3, 5), (4, 5), (4, 6), (3, 7), (0, 8), (1, 8), (6, 8), (7, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (2, 0), (8, 0), (2, 1), (8, 1), (3, 2), (4, 2), (1, 3), (5, 3), (7, 3), (0, 4),
                (5, 4), (6, 4), (2, 6), (8, 6), (2, 7), (8, 7), (3, 8), (4, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 2,
        to: 0,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (2, 1), (5, 1), (6, 1), (1, 2), (4, 2), (6, 2), (2, 4), (5, 4), (6, 4), (1, 5),
                (4, 5), (6, 5), (1, 6), (2, 6), (4, 6), (5, 6), (8, 7), (7, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (1, 0), (2, 0), (4, 0), (5, 0), (8, 1), (7, 2), (1, 3), (2, 3), (4, 3), (5, 3),
                (8, 4), (7, 5), (7, 6), (8, 6), (0, 7), (3, 7), (0, 8), (3, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (7, 0), (8, 0), (0, 1), (3, 1), (0, 2), (3, 2), (7, 3), (8, 3), (0, 4), (3, 4),
                (0, 5), (3, 5), (0, 6), (1, 7), (2, 7), (5, 7), (6, 7), (1, 8), (2, 8), (4, 8),
                (6, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 2,
        to: 1,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (2, 0), (5, 0), (7, 0), (0, 2), (3, 2), (7, 2), (0, 3), (2, 3), (5, 3), (7, 3),
                (1, 4), (0, 5), (2, 5), (3, 5), (7, 5), (8, 6), (0, 7), (2, 7), (3, 7), (5, 7),
                (6, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (8, 0), (0, 1), (2, 1), (3, 1), (5, 1), (6, 2), (8, 3), (0, 4), (2, 4), (3, 4),
                (5, 4), (6, 5), (1, 6), (4, 6), (6, 7), (8, 7), (1, 8), (4, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (1, 0), (4, 0), (6, 1), (8, 1), (1, 2), (4, 2), (1, 3), (4, 3), (6, 4), (8, 4),
                (1, 5), (4, 5), (2, 6), (5, 6), (7, 6), (0, 8), (3, 8), (7, 8),
                ],
            },
        ],
    },
];

pub static K_EXPANSIONS: [Expansion; 6] = [
    Expansion {
        from: 0,
        to: 1,
        groups: &[
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (1, 0), (4, 0), (7, 0), (2, 1), (5, 1), (8, 1), (0, 2), (3, 2), (6, 2), (1, 3),
                (4, 3), (7, 3), (2, 4), (5, 4), (8, 4), (0, 5), (3, 5), (6, 5), (1, 6), (4, 6),
                (7, 6), (2, 7), (5, 7), (8, 7), (0, 8), (3, 8), (6, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (2, 0), (5, 0), (8, 0), (0, 1), (3, 1), (6, 1), (1, 2), (4, 2), (7, 2), (2, 3),
                (5, 3), (8, 3), (0, 4), (3, 4), (6, 4), (1, 5), (4, 5), (7, 5), (2, 6), (5, 6),
                (8, 6), (0, 7), (3, 7), (6, 7), (1, 8), (4, 8), (7, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 0,
        to: 2,
        groups: &[
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (2, 0), (5, 0), (8, 0), (0, 1), (3, 1), (6, 1), (1, 2), (4, 2), (7, 2), (2, 3),
                (5, 3), (8, 3), (0, 4), (3, 4), (6, 4), (1, 5), (4, 5), (7, 5), (2, 6), (5, 6),
                (8, 6), (0, 7), (3, 7), (6, 7), (1, 8), (4, 8), (7, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (1, 0), (4, 0), (7, 0), (2, 1), (5, 1), (8, 1), (0, 2), (3, 2), (6, 2), (1, 3),
                (4, 3), (7, 3), (2, 4), (5, 4), (8, 4), (0, 5), (3, 5), (6, 5), (1, 6), (4, 6),
                (7, 6), (2, 7), (5, 7), (8, 7), (0, 8), (3, 8), (6, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 1,
        to: 0,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (4, 3), (5, 3), (3, 4), (5, 4),
                (3, 5), (4, 5), (7, 6), (8, 6), (6, 7), (8, 7), (6, 8), (7, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (4, 0), (5, 0), (3, 1), (5, 1), (3, 2), (4, 2), (7, 3), (8, 3), (6, 4), (8, 4),
                (6, 5), (7, 5), (1, 6), (2, 6), (0, 7), (2, 7), (0, 8), (1, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (7, 0), (8, 0), (6, 1), (8, 1), (6, 2), (7, 2), (1, 3), (2, 3), (0, 4), (2, 4),
                (0, 5), (1, 5), (4, 6), (5, 6), (3, 7), (5, 7), (4, 8), (3, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 1,
        to: 2,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (5, 0), (7, 0), (3, 1), (8, 1), (4, 2), (6, 2), (1, 3), (8, 3), (2, 4), (6, 4),
                (0, 5), (7, 5), (2, 6), (4, 6), (0, 7), (5, 7), (1, 8), (3, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (1, 0), (8, 0), (2, 1), (6, 1), (0, 2), (7, 2), (2, 3), (4, 3), (0, 4), (5, 4),
                (1, 5), (3, 5), (5, 6), (7, 6), (3, 7), (8, 7), (4, 8), (6, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (2, 0), (4, 0), (0, 1), (5, 1), (1, 2), (3, 2), (5, 3), (7, 3), (3, 4), (8, 4),
                (4, 5), (6, 5), (1, 6), (8, 6), (2, 7), (6, 7), (0, 8), (7, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 2,
        to: 0,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (2, 1), (5, 3), (0, 1), (1, 2), (4, 3), (0, 2), (2, 0), (5, 4), (3, 4), (1, 0),
                (4, 5), (3, 5), (7, 6), (8, 6), (6, 7), (6, 8), (8, 7), (7, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (1, 6), (2, 6), (4, 0), (5, 0), (1, 8), (2, 7), (3, 1), (3, 2), (4, 2), (5, 1),
                (8, 4), (7, 5), (6, 4), (6, 5), (0, 7), (7, 3), (0, 8), (8, 3),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (7, 0), (8, 0), (6, 1), (1, 3), (6, 2), (2, 3), (3, 7), (3, 8), (0, 4), (2, 4),
                (0, 5), (1, 5), (4, 6), (5, 6), (7, 2), (5, 7), (8, 1), (4, 8),
                ],
            },
        ],
    },
    Expansion {
        from: 2,
        to: 1,
        groups: &[
            TermGroup {
                phase: Phase::One,
                pairs: &[
                (5, 0), (7, 0), (3, 1), (8, 1), (4, 2), (6, 2), (1, 3), (8, 3), (2, 4), (6, 4),
                (0, 5), (7, 5), (2, 6), (4, 6), (0, 7), (5, 7), (1, 8), (3, 8),
                ],
            },
            TermGroup {
                phase: Phase::Omega,
                pairs: &[
                (1, 0), (8, 0), (2, 1), (6, 1), (0, 2), (7, 2), (2, 3), (4, 3), (0, 4), (5, 4),
                (1, 5), (3, 5), (5, 6), (7, 6), (3, 7), (8, 7), (6, 8), (4, 8),
                ],
            },
            TermGroup {
                phase: Phase::OmegaBar,
                pairs: &[
                (2, 0), (4, 0), (0, 1), (5, 1), (1, 2), (3, 2), (5, 3), (7, 3), (3, 4), (8, 4),
                (4, 5), (6, 5), (1, 6), (8, 6), (2, 7), (6, 7), (0, 8), (7, 8),
                ],
            },
        ],
    },
];

pub static X_CROSS_TERMS: [(Outcome, Outcome); 54] = [
    ([0, 0, 1], [1, 0, 2]), ([0, 1, 1], [1, 0, 2]), ([0, 2, 1], [1, 0, 2]), ([0, 0, 1], [1, 1, 2]),
    ([0, 1, 1], [1, 1, 2]), ([0, 2, 1], [1, 1, 2]), ([0, 0, 1], [1, 2, 2]), ([0, 1, 1], [1, 2, 2]),
    ([0, 2, 1], [1, 2, 2]), ([0, 0, 1], [2, 0, 0]), ([0, 1, 1], [2, 0, 0]), ([0, 2, 1], [2, 0, 0]),
    ([0, 0, 1], [2, 1, 0]), ([0, 1, 1], [2, 1, 0]), ([0, 2, 1], [2, 1, 0]), ([0, 0, 1], [2, 2, 0]),
    ([0, 1, 1], [2, 2, 0]), ([0, 2, 1], [2, 2, 0]), ([0, 0, 2], [1, 0, 0]), ([0, 1, 2], [1, 0, 0]),
    ([0, 2, 2], [1, 0, 0]), ([0, 0, 2], [1, 1, 0]), ([0, 1, 2], [1, 1, 0]), ([0, 2, 2], [1, 1, 0]),
    ([0, 0, 2], [1, 2, 0]), ([0, 1, 2], [1, 2, 0]), ([0, 2, 2], [1, 2, 0]), ([0, 0, 2], [2, 0, 1]),
    ([0, 1, 2], [2, 0, 1]), ([0, 2, 2], [2, 0, 1]), ([0, 0, 2], [2, 1, 1]), ([0, 1, 2], [2, 1, 1]),
    ([0, 2, 2], [2, 1, 1]), ([0, 0, 2], [2, 2, 1]), ([0, 1, 2], [2, 2, 1]), ([0, 2, 2], [2, 2, 1]),
    ([1, 0, 0], [2, 0, 1]), ([1, 1, 0], [2, 0, 1]), ([1, 2, 0], [2, 0, 1]), ([1, 0, 0], [2, 1, 1]),
    ([1, 1, 0], [2, 1, 1]), ([1, 2, 0], [2, 1, 1]), ([1, 0, 0], [2, 2, 1]), ([1, 1, 0], [2, 2, 1]),
    ([1, 2, 0], [2, 2, 1]), ([1, 0, 2], [2, 0, 0]), ([1, 1, 2], [2, 0, 0]), ([1, 2, 2], [2, 0, 0]),
    ([1, 0, 2], [2, 1, 0]), ([1, 1, 2], [2, 1, 0]), ([1, 2, 2], [2, 1, 0]), ([1, 0, 2], [2, 2, 0]),
    ([1, 1, 2], [2, 2, 0]), ([1, 2, 2], [2, 2, 0]),
];

pub static X_DIAGONAL_TERMS: [(Outcome, Outcome); 24] = [
    ([0, 0, 0], [1, 0, 1]), ([0, 1, 0], [1, 0, 1]), ([0, 2, 0], [1, 0, 1]), ([0, 1, 0], [1, 1, 1]),
    ([0, 2, 0], [1, 1, 1]), ([0, 0, 0], [1, 2, 1]), ([0, 1, 0], [1, 2, 1]), ([0, 2, 0], [1, 2, 1]),
    ([0, 0, 0], [2, 0, 2]), ([0, 1, 0], [2, 0, 2]), ([0, 2, 0], [2, 0, 2]), ([0, 0, 0], [2, 1, 2]),
    ([0, 1, 0], [2, 1, 2]), ([0, 2, 0], [2, 1, 2]), ([0, 1, 0], [2, 2, 2]), ([0, 2, 0], [2, 2, 2]),
    ([1, 0, 1], [2, 0, 2]), ([1, 1, 1], [2, 0, 2]), ([1, 2, 1], [2, 0, 2]), ([1, 0, 1], [2, 1, 2]),
    ([1, 1, 1], [2, 1, 2]), ([1, 2, 1], [2, 1, 2]), ([1, 0, 1], [2, 2, 2]), ([1, 2, 1], [2, 2, 2]),
];
