//! Monte Carlo execution of the quantum communication stage.
//!
//! Every round Alice picks her basis (A or the variant's alternative basis)
//! and a state within it uniformly, Bob measures-and-resends in A or reflects
//! with probability ½ each, and Alice measures the returning qutrit in her
//! preparation basis. Outcome probabilities for each of the 24 (basis, state,
//! operation) settings are computed once from the attack's amplitudes and
//! then sampled; Eve's register is never sampled.
//!
//! Randomness: ChaCha8 seeded from the user seed, one stream per chunk of
//! [`CHUNK_ROUNDS`] rounds, so results do not depend on the thread count.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::AttackModel;
use crate::error::{domain, Result};
use crate::linalg::{basis_vectors, BasisId, BasisSet, CVec, Tensor};
use crate::stats::{PTable, Variant, BASIS_ERR_PAIRS};

pub const CHUNK_ROUNDS: u64 = 1 << 16;
const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AliceBasis {
    A,
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BobOp {
    Measure,
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub alice_basis: AliceBasis,
    pub alice_sent: u8,
    pub bob_op: BobOp,
    pub bob_result: Option<u8>,
    pub alice_final: u8,
}

/// `(⟨b| ⊗ I)|ψ⟩` for a qutrit leading factor.
fn project(state: &CVec, b: &CVec) -> CVec {
    let rest = state.dim() / 3;
    let mut out = CVec::zeros(rest);
    for q in 0..3 {
        out.axpy(b[q].conj(), &state.segment(q * rest, rest));
    }
    out
}

/// Born-rule measurement of the leading qutrit of `state` (qutrit ⊗ rest).
/// Returns the outcome and the post-measurement state `|b_j⟩ ⊗ r̂`; for a
/// bare qutrit the collapsed state is exactly `|b_j⟩`.
pub fn measure_in_basis<R: Rng + ?Sized>(state: &CVec, basis: &BasisSet, rng: &mut R) -> Result<(usize, CVec)> {
    if !state.dim().is_multiple_of(3) || state.dim() == 0 {
        return domain(format!("state of dimension {} has no qutrit factor", state.dim()));
    }
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return domain(format!("state norm² {norm} is not 1"));
    }
    let branches: Vec<CVec> = basis.vectors.iter().map(|b| project(state, b)).collect();
    let weights: Vec<f64> = branches.iter().map(CVec::norm_sqr).collect();
    let j = WeightedIndex::new(&weights).map_err(|e| crate::Error::Domain(e.to_string()))?.sample(rng);
    let collapsed = if branches[j].dim() == 1 {
        basis.vectors[j].clone()
    } else {
        let rest = branches[j].normalized().expect("sampled branch has positive weight");
        basis.vectors[j].tensor(&rest)
    };
    Ok((j, collapsed))
}

/// Exact outcome distributions for every round setting.
#[derive(Debug, Clone)]
pub struct RoundKernel {
    // [basis][sent] → weights over 3·bob + alice
    measure: [[Vec<f64>; 3]; 2],
    // [basis][sent] → weights over alice
    reflect: [[Vec<f64>; 3]; 2],
}

impl RoundKernel {
    pub fn new(attack: &AttackModel, variant: Variant) -> Self {
        let alt = basis_vectors(match variant {
            Variant::Phi1 => BasisId::T,
            Variant::Phi2 => BasisId::K,
        });
        let a = basis_vectors(BasisId::A);
        let v = attack.composed();
        let mut measure: [[Vec<f64>; 3]; 2] = Default::default();
        let mut reflect: [[Vec<f64>; 3]; 2] = Default::default();
        for (slot, basis) in [&a, &alt].into_iter().enumerate() {
            for s in 0..3 {
                let sent = &basis.vectors[s];
                let there = attack.forward().mul_vec(sent);
                let mut joint = Vec::with_capacity(9);
                for i in 0..3 {
                    let kept = project(&there, &a.vectors[i]);
                    let back = attack.reverse().mul_vec(&a.vectors[i].tensor(&kept));
                    joint.extend(basis.vectors.iter().map(|b| project(&back, b).norm_sqr()));
                }
                measure[slot][s] = joint;
                let returned = v.mul_vec(sent);
                reflect[slot][s] = basis.vectors.iter().map(|b| project(&returned, b).norm_sqr()).collect();
            }
        }
        Self { measure, reflect }
    }

    /// Probability of `(bob, alice)` for a measure-and-resend round.
    pub fn measure_probability(&self, basis: AliceBasis, sent: usize, bob: usize, alice: usize) -> f64 {
        self.measure[basis as usize][sent][3 * bob + alice]
    }

    pub fn reflect_probability(&self, basis: AliceBasis, sent: usize, alice: usize) -> f64 {
        self.reflect[basis as usize][sent][alice]
    }

    fn samplers(&self) -> Result<Samplers> {
        let build = |w: &Vec<f64>| WeightedIndex::new(w).map_err(|e| crate::Error::Domain(e.to_string()));
        let mut measure = Vec::with_capacity(6);
        let mut reflect = Vec::with_capacity(6);
        for slot in 0..2 {
            for s in 0..3 {
                measure.push(build(&self.measure[slot][s])?);
                reflect.push(build(&self.reflect[slot][s])?);
            }
        }
        Ok(Samplers { measure, reflect })
    }
}

struct Samplers {
    measure: Vec<WeightedIndex<f64>>,
    reflect: Vec<WeightedIndex<f64>>,
}

impl Samplers {
    fn round<R: Rng + ?Sized>(&self, rng: &mut R) -> RoundRecord {
        let alice_basis = if rng.random_bool(0.5) { AliceBasis::A } else { AliceBasis::Alt };
        let sent = rng.random_range(0..3usize);
        let slot = 3 * alice_basis as usize + sent;
        if rng.random_bool(0.5) {
            let outcome = self.measure[slot].sample(rng);
            RoundRecord {
                alice_basis,
                alice_sent: sent as u8,
                bob_op: BobOp::Measure,
                bob_result: Some((outcome / 3) as u8),
                alice_final: (outcome % 3) as u8,
            }
        } else {
            RoundRecord {
                alice_basis,
                alice_sent: sent as u8,
                bob_op: BobOp::Reflect,
                bob_result: None,
                alice_final: self.reflect[slot].sample(rng) as u8,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub n_rounds: u64,
    pub seed: u64,
    pub variant: Variant,
    /// A-basis measure-and-resend rounds, `[sent][bob][alice]`.
    pub counts: [[[u64; 3]; 3]; 3],
    /// `counts` divided by the number of rounds with the same sent trit.
    pub frequencies: PTable,
    /// Alternative-basis reflect rounds, `[sent][found]`.
    pub alt_reflect_counts: [[u64; 3]; 3],
    /// Empirical error rates in the fixed `(0→1, 0→2, 1→0, 1→2, 2→0, 2→1)` order.
    pub empirical_basis_err: [f64; 6],
    /// Fraction of rounds that contribute to the raw key.
    pub sifted_fraction: f64,
    /// `(bob, alice)` trits of every raw-key round, in round order.
    pub raw_key_pairs: Vec<(u8, u8)>,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    counts: [[[u64; 3]; 3]; 3],
    alt_reflect: [[u64; 3]; 3],
    pairs: Vec<(u8, u8)>,
}

impl Tally {
    fn record(&mut self, r: &RoundRecord) {
        match (r.alice_basis, r.bob_op) {
            (AliceBasis::A, BobOp::Measure) => {
                let bob = r.bob_result.expect("measure rounds carry a result");
                self.counts[r.alice_sent as usize][bob as usize][r.alice_final as usize] += 1;
                self.pairs.push((bob, r.alice_final));
            }
            (AliceBasis::Alt, BobOp::Reflect) => {
                self.alt_reflect[r.alice_sent as usize][r.alice_final as usize] += 1;
            }
            _ => {}
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().flatten().flatten().zip(other.counts.iter().flatten().flatten()) {
            *a += b;
        }
        for (a, b) in self.alt_reflect.iter_mut().flatten().zip(other.alt_reflect.iter().flatten()) {
            *a += b;
        }
        self.pairs.extend(other.pairs);
        self
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Individual round records; intended for small `n`.
pub fn run_rounds(n: u64, attack: &AttackModel, variant: Variant, seed: u64) -> Result<Vec<RoundRecord>> {
    let samplers = RoundKernel::new(attack, variant).samplers()?;
    let mut out = Vec::with_capacity(n as usize);
    let mut chunk = 0;
    while (out.len() as u64) < n {
        let mut rng = chunk_rng(seed, chunk);
        let take = CHUNK_ROUNDS.min(n - out.len() as u64);
        out.extend((0..take).map(|_| samplers.round(&mut rng)));
        chunk += 1;
    }
    Ok(out)
}

pub fn run_protocol(n: u64, attack: &AttackModel, variant: Variant, seed: u64) -> Result<SimulationResult> {
    if n == 0 {
        return domain("need at least one round");
    }
    let samplers = RoundKernel::new(attack, variant).samplers()?;
    let chunks = n.div_ceil(CHUNK_ROUNDS);
    let partials: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk);
            let take = CHUNK_ROUNDS.min(n - chunk * CHUNK_ROUNDS);
            let mut tally = Tally::default();
            for _ in 0..take {
                tally.record(&samplers.round(&mut rng));
            }
            tally
        })
        .collect();
    let tally = partials.into_iter().fold(Tally::default(), Tally::merge);

    let mut frequencies = [[[0.0; 3]; 3]; 3];
    for (m, plane) in tally.counts.iter().enumerate() {
        let total: u64 = plane.iter().flatten().sum();
        for (i, row) in plane.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                frequencies[m][i][k] = if total == 0 { 0.0 } else { *c as f64 / total as f64 };
            }
        }
    }
    let empirical_basis_err = BASIS_ERR_PAIRS.map(|(s, f)| {
        let total: u64 = tally.alt_reflect[s].iter().sum();
        if total == 0 {
            0.0
        } else {
            tally.alt_reflect[s][f] as f64 / total as f64
        }
    });
    Ok(SimulationResult {
        n_rounds: n,
        seed,
        variant,
        counts: tally.counts,
        frequencies,
        alt_reflect_counts: tally.alt_reflect,
        empirical_basis_err,
        sifted_fraction: tally.pairs.len() as f64 / n as f64,
        raw_key_pairs: tally.pairs,
    })
}

impl SimulationResult {
    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Number of A-basis measure rounds with sent trit `m`.
    pub fn sent_total(&self, m: usize) -> u64 {
        self.counts[m].iter().flatten().sum()
    }

    /// Fraction of raw-key pairs that disagree.
    pub fn raw_key_error_rate(&self) -> f64 {
        if self.raw_key_pairs.is_empty() {
            return 0.0;
        }
        let wrong = self.raw_key_pairs.iter().filter(|(b, a)| b != a).count();
        wrong as f64 / self.raw_key_pairs.len() as f64
    }

    /// Largest deviation from an analytic table in binomial standard errors.
    /// Cells whose analytic probability is 0 or 1 count only if the empirical
    /// frequency differs at all (reported as infinity).
    #[allow(clippy::needless_range_loop)]
    pub fn max_deviation_sigma(&self, analytic: &PTable) -> f64 {
        let mut worst: f64 = 0.0;
        for m in 0..3 {
            let n = self.sent_total(m) as f64;
            for i in 0..3 {
                for k in 0..3 {
                    let p = analytic[m][i][k];
                    let diff = (self.frequencies[m][i][k] - p).abs();
                    let se = (p * (1.0 - p) / n).sqrt();
                    let z = if se > 0.0 {
                        diff / se
                    } else if diff > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    worst = worst.max(z);
                }
            }
        }
        worst
    }

    /// Category counts as CSV: `category,sent,bob,alice,count`.
    pub fn counts_csv(&self) -> String {
        let mut out = String::from("category,sent,bob,alice,count\n");
        for (m, plane) in self.counts.iter().enumerate() {
            for (i, row) in plane.iter().enumerate() {
                for (k, c) in row.iter().enumerate() {
                    let _ = writeln!(out, "a_measure,{m},{i},{k},{c}");
                }
            }
        }
        for (s, row) in self.alt_reflect_counts.iter().enumerate() {
            for (f, c) in row.iter().enumerate() {
                let _ = writeln!(out, "alt_reflect,{s},,{f},{c}");
            }
        }
        out
    }
}
