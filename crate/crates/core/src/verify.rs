//! Invariant suite behind `sqkd3 verify`. Each group is a self-contained
//! numerical check with a pass/fail verdict and a one-line detail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::appendix::{ExpansionTable, Phase};
use crate::attack::{pauli_twirl_isometry, reduced_channel, ternary_channel_apply, unitarity_defect, compose_f_from_ek, AttackModel, VectorFamilies};
use crate::error::Result;
use crate::exact::exact_entropies;
use crate::keyrate::{lemma1_check, s_ec_upper, sigma1_eigenvalues, Sigma1Decomposition};
use crate::linalg::{basis_vectors, hermitian_eigenvalues, random_isometry, BasisId, BasisSet, CMat, CVec, C64};
use crate::stats::{basis_error_direct, basis_error_expanded_with, p_table_from_attack, Variant};

pub const MUB_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-10;
pub const DILATION_TOL: f64 = 1e-12;
pub const ENTROPY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct GroupResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl GroupResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Data the suite checks; the defaults are the library's own tables.
#[derive(Debug, Clone)]
pub struct VerifyInputs {
    pub t_basis: BasisSet,
    pub t_table: ExpansionTable,
    pub k_table: ExpansionTable,
    pub seed: u64,
}

impl Default for VerifyInputs {
    fn default() -> Self {
        Self {
            t_basis: basis_vectors(BasisId::T),
            t_table: ExpansionTable::t_basis(),
            k_table: ExpansionTable::k_basis(),
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Multiply one component of `|1′⟩` by ω.
    TBasisPhase,
    /// Swap the phases of the first two groups of the first T-basis expansion.
    AppendixTable,
}

impl VerifyInputs {
    pub fn with_fault(mut self, fault: Fault) -> Self {
        match fault {
            Fault::TBasisPhase => {
                let mut vectors = self.t_basis.vectors.clone();
                let mut entries = vectors[1].entries().to_vec();
                entries[2] *= crate::linalg::omega();
                vectors[1] = CVec::new(entries);
                self.t_basis = BasisSet::custom(BasisId::T, vectors);
            }
            Fault::AppendixTable => {
                let groups = &mut self.t_table.entries[0];
                let first = groups[0].0;
                groups[0].0 = groups[1].0;
                groups[1].0 = if first == Phase::One { Phase::Omega } else { first };
            }
        }
        self
    }
}

pub fn run_all(inputs: &VerifyInputs) -> Result<Vec<GroupResult>> {
    Ok(vec![
        check_mub(&inputs.t_basis),
        check_unitarity(inputs.seed)?,
        check_lemma1(inputs.seed, 50)?,
        check_appendix(&inputs.t_table, &inputs.k_table, inputs.seed, 100)?,
        check_eigen_oracle(inputs.seed, 100)?,
        check_dilation()?,
        check_entropy_inequalities(&[0.02, 0.05])?,
    ])
}

pub fn check_mub(t_basis: &BasisSet) -> GroupResult {
    let a = basis_vectors(BasisId::A);
    let k = basis_vectors(BasisId::K);
    let worst = [
        a.orthonormality_defect(),
        t_basis.orthonormality_defect(),
        k.orthonormality_defect(),
        a.unbiasedness_defect(t_basis),
        a.unbiasedness_defect(&k),
        t_basis.unbiasedness_defect(&k),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    GroupResult::new("MUB", worst < MUB_TOL, format!("max defect {worst:.3e}"))
}

fn test_attacks(seed: u64, count: usize) -> Result<Vec<AttackModel>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![AttackModel::identity(), AttackModel::pauli_twirl(0.1, 0.07)?];
    for _ in 0..count {
        let d_f = rng.random_range(1..=4);
        let d_r = rng.random_range(1..=3);
        out.push(AttackModel::random(d_f, d_r, rng.random())?);
    }
    Ok(out)
}

pub fn check_unitarity(seed: u64) -> Result<GroupResult> {
    let mut worst: f64 = 0.0;
    for attack in test_attacks(seed, 20)? {
        let fams = VectorFamilies::from_attack(&attack);
        for family in [&fams.e, &fams.f, &fams.g, &fams.h] {
            worst = worst.max(unitarity_defect(family));
        }
        let h_total: f64 = fams.h.iter().map(CVec::norm_sqr).sum();
        worst = worst.max((h_total - 3.0).abs());
        for (a, b) in fams.f.iter().zip(compose_f_from_ek(&fams.ek)) {
            worst = worst.max(a.max_abs_diff(&b));
        }
        for plane in p_table_from_attack(&fams) {
            worst = worst.max((plane.iter().flatten().sum::<f64>() - 1.0).abs());
        }
    }
    Ok(GroupResult::new("unitarity sum rules", worst < ORACLE_TOL, format!("max defect {worst:.3e}")))
}

/// Random density matrix of dimension `dim` with a random spectrum.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMat> {
    let u = random_isometry(dim, dim, rng)?;
    let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let d = CMat::diag_real(&raw.iter().map(|v| v / total).collect::<Vec<_>>());
    Ok(u.matmul(&d).matmul(&u.adjoint()).hermitized())
}

pub fn check_lemma1(seed: u64, trials: usize) -> Result<GroupResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e33a);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(1..=4);
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let mut blocks = Vec::with_capacity(n);
        for w in raw {
            blocks.push((w / total, random_density(3, &mut rng)?));
        }
        let (lhs, rhs) = lemma1_check(&blocks)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(GroupResult::new("Lemma 1", worst < ORACLE_TOL, format!("{trials} states, max |lhs - rhs| {worst:.3e}")))
}

pub fn check_appendix(t_table: &ExpansionTable, k_table: &ExpansionTable, seed: u64, attacks: usize) -> Result<GroupResult> {
    let mut worst: f64 = 0.0;
    for attack in test_attacks(seed ^ 0xa99e, attacks)? {
        let fams = VectorFamilies::from_attack(&attack);
        let gram = fams.f_gram();
        for (variant, table) in [(Variant::Phi1, t_table), (Variant::Phi2, k_table)] {
            let direct = basis_error_direct(&fams, variant);
            let expanded = basis_error_expanded_with(&gram, table);
            for (d, e) in direct.iter().zip(expanded) {
                worst = worst.max((d - e).abs());
            }
        }
    }
    Ok(GroupResult::new(
        "appendix equivalence",
        worst < ORACLE_TOL,
        format!("{} attacks x 2 variants, max |delta| {worst:.3e}", attacks + 2),
    ))
}

pub fn random_decomposition<R: Rng + ?Sized>(rng: &mut R) -> Sigma1Decomposition {
    let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let (chi, sigma, rho_c) = (c(), c(), c());
    Sigma1Decomposition { chi, sigma, rho_c, p111: rng.random_range(0.0..1.0), p222: rng.random_range(0.0..1.0) }
}

pub fn check_eigen_oracle(seed: u64, trials: usize) -> Result<GroupResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe16e);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d = random_decomposition(&mut rng);
        let (l1, l2) = sigma1_eigenvalues(d.p000(), d.p111, d.p222, d.p())?;
        let ev = hermitian_eigenvalues(&d.matrix())?;
        worst = worst.max(ev[0].abs()).max((ev[1] - l2).abs()).max((ev[2] - l1).abs());
    }
    Ok(GroupResult::new("eigenvalue oracle", worst < ORACLE_TOL, format!("{trials} draws, max |delta| {worst:.3e}")))
}

pub const DILATION_QS: [f64; 4] = [0.0, 0.05, 0.1, 0.3];

pub fn check_dilation() -> Result<GroupResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut states = vec![CVec::ket(3, 0).projector(), basis_vectors(BasisId::K).vectors[1].projector()];
    states.push(random_density(3, &mut rng)?);
    let mut worst: f64 = 0.0;
    for q in DILATION_QS {
        let v = pauli_twirl_isometry(q)?;
        for rho in &states {
            let got = reduced_channel(&v, rho)?;
            worst = worst.max(got.max_abs_diff(&ternary_channel_apply(rho, q)?));
        }
    }
    Ok(GroupResult::new("channel dilation", worst < DILATION_TOL, format!("max |delta| {worst:.3e}")))
}

/// One twirl point of the entropy-inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyPoint {
    pub q: f64,
    pub s_b_given_e: f64,
    pub s_b_given_ec: f64,
    pub s_ec_exact: f64,
    pub s_ec_upper: f64,
}

impl EntropyPoint {
    pub fn ssa_holds(&self) -> bool {
        self.s_b_given_e >= self.s_b_given_ec - ENTROPY_SLACK
    }

    pub fn upper_bound_holds(&self) -> bool {
        self.s_ec_upper >= self.s_ec_exact - ENTROPY_SLACK
    }
}

/// Exact entropies of the symmetric twirl at `q` against the upper bound
/// evaluated with the exact `t` and the exact Gram quantity `p`.
pub fn entropy_point(q: f64) -> Result<EntropyPoint> {
    let attack = AttackModel::pauli_twirl(q, q)?;
    let e = exact_entropies(&attack)?;
    let p = p_table_from_attack(&VectorFamilies::from_attack(&attack));
    let (l1, l2) = sigma1_eigenvalues(p[0][0][0], p[1][1][1], p[2][2][2], e.p)?;
    Ok(EntropyPoint {
        q,
        s_b_given_e: e.s_b_given_e(),
        s_b_given_ec: e.s_b_given_ec(),
        s_ec_exact: e.s_ec,
        s_ec_upper: s_ec_upper(e.t, l1, l2)?,
    })
}

pub fn check_entropy_inequalities(qs: &[f64]) -> Result<GroupResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for &q in qs {
        let pt = entropy_point(q)?;
        passed &= pt.ssa_holds() && pt.upper_bound_holds();
        parts.push(format!(
            "Q={q}: S(B|E)={:.4} S(B|EC)={:.4} S(EC)={:.4} upper={:.4}",
            pt.s_b_given_e, pt.s_b_given_ec, pt.s_ec_exact, pt.s_ec_upper
        ));
    }
    Ok(GroupResult::new("S(EC) inequality", passed, parts.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_groups_pass_except_entropy_bound() {
        let results = run_all(&VerifyInputs::default()).unwrap();
        for r in &results {
            if r.name == "S(EC) inequality" {
                continue;
            }
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn corrupted_t_basis_fails_mub() {
        let inputs = VerifyInputs::default().with_fault(Fault::TBasisPhase);
        assert!(!check_mub(&inputs.t_basis).passed);
    }

    #[test]
    fn corrupted_table_fails_equivalence() {
        let inputs = VerifyInputs::default().with_fault(Fault::AppendixTable);
        assert!(!check_appendix(&inputs.t_table, &inputs.k_table, 1, 5).unwrap().passed);
    }

    #[test]
    fn strong_subadditivity_holds_for_twirl() {
        for q in [0.02, 0.05] {
            assert!(entropy_point(q).unwrap().ssa_holds());
        }
    }
}
