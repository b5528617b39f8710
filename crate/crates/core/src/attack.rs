//! Eve's two-stage collective attack.
//!
//! The forward stage is an isometry `U_F: C³ → C³ ⊗ C^{d_f}` applied to the
//! qutrit on its way to Bob. The reverse stage `U_R: C³ ⊗ C^{d_f} → C³ ⊗
//! C^{d_f} ⊗ C^{d_r}` acts on the returning qutrit together with the forward
//! ancilla and appends a fresh one. Index conventions (left factor most
//! significant):
//!
//! * forward output: `qutrit · d_f + a`
//! * reverse input:  `qutrit · d_f + a`
//! * reverse output: `qutrit · d_f d_r + a · d_r + b`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::keyrate::Conventions;
use crate::linalg::{basis_vectors, omega, random_isometry, BasisId, BasisSet, CMat, CVec, Tensor, C64};
use crate::stats::Variant;

/// Tolerance used when validating isometries on construction.
pub const ISOMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackModel {
    d_f: usize,
    d_r: usize,
    forward: CMat,
    reverse: CMat,
}

impl AttackModel {
    pub fn new(d_f: usize, d_r: usize, forward: CMat, reverse: CMat) -> Result<Self> {
        if d_f == 0 || d_r == 0 {
            return domain("ancilla dimensions must be positive");
        }
        if (forward.rows(), forward.cols()) != (3 * d_f, 3) {
            return Err(Error::Dimension(format!(
                "forward stage must be {}x3, got {}x{}",
                3 * d_f,
                forward.rows(),
                forward.cols()
            )));
        }
        if (reverse.rows(), reverse.cols()) != (3 * d_f * d_r, 3 * d_f) {
            return Err(Error::Dimension(format!(
                "reverse stage must be {}x{}, got {}x{}",
                3 * d_f * d_r,
                3 * d_f,
                reverse.rows(),
                reverse.cols()
            )));
        }
        for (name, m) in [("forward", &forward), ("reverse", &reverse)] {
            let defect = m.isometry_defect();
            if defect > ISOMETRY_TOL {
                return domain(format!("{name} stage is not an isometry (defect {defect:.3e})"));
            }
        }
        Ok(Self { d_f, d_r, forward, reverse })
    }

    /// No interaction: both ancillas are one-dimensional.
    pub fn identity() -> Self {
        Self { d_f: 1, d_r: 1, forward: CMat::identity(3), reverse: CMat::identity(3) }
    }

    /// Generalized-Pauli twirl in each direction (ancilla dimension 9 each),
    /// realizing the ternary symmetric channel with parameters `q_forward`
    /// and `q_reverse`.
    pub fn pauli_twirl(q_forward: f64, q_reverse: f64) -> Result<Self> {
        let forward = pauli_twirl_isometry(q_forward)?;
        let step = pauli_twirl_isometry(q_reverse)?;
        let (d_f, d_r) = (TWIRL_ANCILLA, TWIRL_ANCILLA);
        let mut reverse = CMat::zeros(3 * d_f * d_r, 3 * d_f);
        for q_in in 0..3 {
            for a in 0..d_f {
                for q_out in 0..3 {
                    for b in 0..d_r {
                        reverse.set(q_out * d_f * d_r + a * d_r + b, q_in * d_f + a, step.get(q_out * d_r + b, q_in));
                    }
                }
            }
        }
        Ok(Self { d_f, d_r, forward, reverse })
    }

    /// Random isometric attack from a seeded generator.
    pub fn random(d_f: usize, d_r: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let forward = random_isometry(3 * d_f, 3, &mut rng)?;
        let reverse = random_isometry(3 * d_f * d_r, 3 * d_f, &mut rng)?;
        Self::new(d_f, d_r, forward, reverse)
    }

    pub fn d_f(&self) -> usize {
        self.d_f
    }

    pub fn d_r(&self) -> usize {
        self.d_r
    }

    /// Dimension of Eve's combined register after both stages.
    pub fn eve_dim(&self) -> usize {
        self.d_f * self.d_r
    }

    pub fn forward(&self) -> &CMat {
        &self.forward
    }

    pub fn reverse(&self) -> &CMat {
        &self.reverse
    }

    /// `V = U_R U_F`, the effective one-way attack seen in Reflect rounds.
    pub fn composed(&self) -> CMat {
        self.reverse.matmul(&self.forward)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&AttackJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: AttackJson = serde_json::from_str(s)?;
        let unpack = |rows: usize, cols: usize, v: Vec<[f64; 2]>| {
            CMat::new(rows, cols, v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
        };
        let forward = unpack(3 * raw.d_f, 3, raw.forward)?;
        let reverse = unpack(3 * raw.d_f * raw.d_r, 3 * raw.d_f, raw.reverse)?;
        Self::new(raw.d_f, raw.d_r, forward, reverse)
    }
}

/// JSON fixture layout: matrices are row-major lists of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct AttackJson {
    d_f: usize,
    d_r: usize,
    forward: Vec<[f64; 2]>,
    reverse: Vec<[f64; 2]>,
}

impl From<&AttackModel> for AttackJson {
    fn from(a: &AttackModel) -> Self {
        let pack = |m: &CMat| m.data().iter().map(|z| [z.re, z.im]).collect();
        Self { d_f: a.d_f, d_r: a.d_r, forward: pack(&a.forward), reverse: pack(&a.reverse) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    /// Alternative-basis noise equals the channel parameter Q.
    Dependent,
    /// Alternative-basis noise accumulates over both passes.
    Independent,
}

/// Operating point for a key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScenario {
    pub q: f64,
    pub model: ChannelModel,
    pub variant: Variant,
    pub conventions: Conventions,
}

impl ChannelScenario {
    /// Largest Q for which the twirl weights stay non-negative.
    pub const Q_MAX: f64 = 0.375;

    pub fn new(q: f64, model: ChannelModel, variant: Variant, conventions: Conventions) -> Result<Self> {
        let s = Self { q, model, variant, conventions };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=Self::Q_MAX).contains(&self.q) {
            return domain(format!("Q = {} outside [0, 3/8]", self.q));
        }
        Ok(())
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }
}

/// `ξ(ρ) = (1 − 3Q) ρ + Q I`
pub fn ternary_channel_apply(rho: &CMat, q: f64) -> Result<CMat> {
    if !(0.0..=1.0 / 3.0).contains(&q) {
        return domain(format!("ternary channel parameter {q} outside [0, 1/3]"));
    }
    if (rho.rows(), rho.cols()) != (3, 3) {
        return Err(Error::Dimension("ternary channel acts on 3x3 operators".into()));
    }
    Ok(&rho.scale_real(1.0 - 3.0 * q) + &CMat::identity(3).scale_real(q))
}

pub const TWIRL_ANCILLA: usize = 9;

/// Qutrit shift `X|j⟩ = |j+1⟩`.
pub fn shift() -> CMat {
    CMat::from_fn(3, 3, |r, c| if r == (c + 1) % 3 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Qutrit clock `Z|j⟩ = ωʲ|j⟩`.
pub fn clock() -> CMat {
    let w = omega();
    CMat::from_fn(3, 3, |r, c| if r == c { w.powu(r as u32) } else { C64::new(0.0, 0.0) })
}

/// Weights of the nine generalized Paulis `X^a Z^b`, indexed `3a + b`.
pub fn twirl_weights(q: f64) -> Result<[f64; 9]> {
    let w0 = 1.0 - 8.0 * q / 3.0;
    if q < 0.0 || w0 < -1e-15 {
        return domain(format!("twirl parameter {q} gives a negative weight"));
    }
    let mut w = [q / 3.0; 9];
    w[0] = w0.max(0.0);
    Ok(w)
}

/// `|ψ⟩ ↦ Σ_{a,b} √w_ab (XᵃZᵇ|ψ⟩) ⊗ |ab⟩`, a `27 × 3` isometry.
pub fn pauli_twirl_isometry(q: f64) -> Result<CMat> {
    let weights = twirl_weights(q)?;
    let (x, z) = (shift(), clock());
    let mut powers_x = vec![CMat::identity(3)];
    let mut powers_z = vec![CMat::identity(3)];
    for k in 1..3 {
        powers_x.push(powers_x[k - 1].matmul(&x));
        powers_z.push(powers_z[k - 1].matmul(&z));
    }
    let mut v = CMat::zeros(3 * TWIRL_ANCILLA, 3);
    for a in 0..3 {
        for b in 0..3 {
            let amp = weights[3 * a + b].sqrt();
            let op = powers_x[a].matmul(&powers_z[b]);
            for out in 0..3 {
                for inp in 0..3 {
                    v.set(out * TWIRL_ANCILLA + 3 * a + b, inp, op.get(out, inp) * amp);
                }
            }
        }
    }
    Ok(v)
}

/// Channel induced on the qutrit by an isometry with a trailing ancilla.
pub fn reduced_channel(isometry: &CMat, rho: &CMat) -> Result<CMat> {
    let d_in = isometry.cols();
    if !isometry.rows().is_multiple_of(d_in) {
        return Err(Error::Dimension("isometry output is not input ⊗ ancilla".into()));
    }
    let anc = isometry.rows() / d_in;
    let big = isometry.matmul(rho).matmul(&isometry.adjoint());
    big.partial_trace_second(d_in, anc)
}

/// `e_{3i+j} = (⟨j| ⊗ I) U_F |i⟩`
pub fn extract_e(attack: &AttackModel) -> Vec<CVec> {
    let d_f = attack.d_f;
    let mut e = Vec::with_capacity(9);
    for i in 0..3 {
        let col = attack.forward.column(i);
        for j in 0..3 {
            e.push(col.segment(j * d_f, d_f));
        }
    }
    e
}

/// The 27 reverse-stage vectors `e^k_{i,j}` with `j ≡ i (mod 3)`, i.e. the
/// ones reachable when Bob measured `i` and resent `|i⟩`.
#[derive(Debug, Clone)]
pub struct EkTable {
    // [k][i][m] holds e^k_{i, 3m + i}
    vectors: Vec<CVec>,
}

impl EkTable {
    fn slot(k: usize, i: usize, m: usize) -> usize {
        9 * k + 3 * i + m
    }

    /// `e^k_{i,j}`. Panics unless `j % 3 == i`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> &CVec {
        assert!(k < 3 && i < 3 && j < 9 && j % 3 == i, "e^{k}_({i},{j}) is not tabulated");
        &self.vectors[Self::slot(k, i, j / 3)]
    }

    /// Vector behind `p_{sent, bob, alice}`: `e^{alice}_{bob, 3·sent + bob}`.
    pub fn for_outcome(&self, sent: usize, bob: usize, alice: usize) -> &CVec {
        &self.vectors[Self::slot(alice, bob, sent)]
    }
}

/// `e^k_{i,j} = (⟨k| ⊗ I) U_R (|i⟩ ⊗ e_j)`
pub fn extract_ekij(attack: &AttackModel) -> EkTable {
    extract_ekij_from(attack, &extract_e(attack))
}

fn extract_ekij_from(attack: &AttackModel, e: &[CVec]) -> EkTable {
    let (d_f, eve) = (attack.d_f, attack.eve_dim());
    let mut vectors = vec![CVec::zeros(eve); 27];
    for i in 0..3 {
        for m in 0..3 {
            let input = CVec::ket(3, i).tensor(&e[3 * m + i]);
            debug_assert_eq!(input.dim(), 3 * d_f);
            let out = attack.reverse.mul_vec(&input);
            for k in 0..3 {
                vectors[EkTable::slot(k, i, m)] = out.segment(k * eve, eve);
            }
        }
    }
    EkTable { vectors }
}

/// `f_{3i+k} = (⟨k| ⊗ I) V |i⟩`, read directly off the composed attack.
pub fn compose_f(attack: &AttackModel) -> Vec<CVec> {
    let v = attack.composed();
    let eve = attack.eve_dim();
    let mut f = Vec::with_capacity(9);
    for i in 0..3 {
        let col = v.column(i);
        for k in 0..3 {
            f.push(col.segment(k * eve, eve));
        }
    }
    f
}

/// `f_{3i+k} = Σ_j e^k_{j, 3i+j}`, the same family assembled from the
/// reverse-stage vectors.
pub fn compose_f_from_ek(ek: &EkTable) -> Vec<CVec> {
    let mut f = Vec::with_capacity(9);
    for i in 0..3 {
        for k in 0..3 {
            let mut acc = ek.get(k, 0, 3 * i).clone();
            for j in 1..3 {
                acc = &acc + ek.get(k, j, 3 * i + j);
            }
            f.push(acc);
        }
    }
    f
}

/// Ancilla vectors of `V` in another basis:
/// `V|b_n, 0⟩ = Σ_m |b_m⟩ ⊗ v_{3n+m}` with `v_{3n+m} = Σ_{i,j} (b_n)_i conj((b_m)_j) f_{3i+j}`.
pub fn compose_in_basis(f: &[CVec], basis: &BasisSet) -> Vec<CVec> {
    let dim = f[0].dim();
    let mut out = Vec::with_capacity(9);
    for n in 0..3 {
        for m in 0..3 {
            let mut acc = CVec::zeros(dim);
            for i in 0..3 {
                for j in 0..3 {
                    let c = basis.vectors[n][i] * basis.vectors[m][j].conj();
                    acc.axpy(c, &f[3 * i + j]);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// `g_0 … g_8`: the attack seen in the T basis.
pub fn compose_g(f: &[CVec]) -> Vec<CVec> {
    compose_in_basis(f, &basis_vectors(BasisId::T))
}

/// `h_0 … h_8`: the attack seen in the K basis (including h₀, h₄, h₈).
pub fn compose_h(f: &[CVec]) -> Vec<CVec> {
    compose_in_basis(f, &basis_vectors(BasisId::K))
}

/// Worst violation of the sum rules `Σ_j ⟨v_{3r+j}|v_{3s+j}⟩ = δ_rs`
/// satisfied by any family obtained from an isometry on a qutrit.
pub fn unitarity_defect(v: &[CVec]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..3 {
        for s in 0..3 {
            let sum: C64 = (0..3).map(|j| v[3 * r + j].inner(&v[3 * s + j])).sum();
            let expect = if r == s { 1.0 } else { 0.0 };
            worst = worst.max((sum - C64::new(expect, 0.0)).norm());
        }
    }
    worst
}

/// All ancilla families derived from one attack.
#[derive(Debug, Clone)]
pub struct VectorFamilies {
    pub e: Vec<CVec>,
    pub ek: EkTable,
    pub f: Vec<CVec>,
    pub g: Vec<CVec>,
    pub h: Vec<CVec>,
}

impl VectorFamilies {
    pub fn from_attack(attack: &AttackModel) -> Self {
        let e = extract_e(attack);
        let ek = extract_ekij_from(attack, &e);
        let f = compose_f(attack);
        let g = compose_g(&f);
        let h = compose_h(&f);
        Self { e, ek, f, g, h }
    }

    /// `G[m][n] = ⟨f_m|f_n⟩`
    pub fn f_gram(&self) -> [[C64; 9]; 9] {
        let mut gram = [[C64::new(0.0, 0.0); 9]; 9];
        for (m, row) in gram.iter_mut().enumerate() {
            for (n, slot) in row.iter_mut().enumerate() {
                *slot = self.f[m].inner(&self.f[n]);
            }
        }
        gram
    }

    pub fn alternative(&self, variant: Variant) -> &[CVec] {
        match variant {
            Variant::Phi1 => &self.g,
            Variant::Phi2 => &self.h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho0() -> CMat {
        CVec::ket(3, 0).projector()
    }

    #[test]
    fn ternary_channel_on_ket_zero() {
        let q = 0.07;
        let out = ternary_channel_apply(&rho0(), q).unwrap();
        assert!(out.max_abs_diff(&CMat::diag_real(&[1.0 - 2.0 * q, q, q])) < 1e-15);
    }

    #[test]
    fn ternary_channel_endpoints() {
        let psi = CVec::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]);
        let rho = psi.projector();
        assert!(ternary_channel_apply(&rho, 0.0).unwrap().max_abs_diff(&rho) < 1e-15);
        let mixed = ternary_channel_apply(&rho, 1.0 / 3.0).unwrap();
        assert!(mixed.max_abs_diff(&CMat::identity(3).scale_real(1.0 / 3.0)) < 1e-15);
        assert!(ternary_channel_apply(&rho, 0.34).is_err());
        assert!(ternary_channel_apply(&rho, -0.01).is_err());
    }

    #[test]
    fn twirl_at_zero_is_the_trivial_embedding() {
        let v = pauli_twirl_isometry(0.0).unwrap();
        for i in 0..3 {
            let expect = CVec::ket(3, i).tensor(&CVec::ket(9, 0));
            assert!(v.column(i).max_abs_diff(&expect) < 1e-15);
        }
    }

    #[test]
    fn twirl_reduced_state_brute_force() {
        // partial trace done by hand: (Vρ V†) summed over the 9 ancilla labels
        let v = pauli_twirl_isometry(0.1).unwrap();
        let psi = v.column(0);
        let mut diag = [0.0; 3];
        for (q, d) in diag.iter_mut().enumerate() {
            for a in 0..9 {
                *d += psi[q * 9 + a].norm_sqr();
            }
        }
        assert!((diag[0] - 0.8).abs() < 1e-14);
        assert!((diag[1] - 0.1).abs() < 1e-14);
        assert!((diag[2] - 0.1).abs() < 1e-14);
        let reduced = reduced_channel(&v, &rho0()).unwrap();
        assert!(reduced.max_abs_diff(&CMat::diag_real(&[0.8, 0.1, 0.1])) < 1e-14);
    }

    #[test]
    fn twirl_is_an_isometry_and_rejects_large_q() {
        for q in [0.0, 0.01, 0.2, 0.375] {
            assert!(pauli_twirl_isometry(q).unwrap().isometry_defect() < 1e-14, "{q}");
        }
        assert!(pauli_twirl_isometry(0.38).is_err());
    }

    #[test]
    fn identity_attack_vectors() {
        let fams = VectorFamilies::from_attack(&AttackModel::identity());
        for (idx, v) in fams.e.iter().enumerate() {
            let expect = if idx % 4 == 0 { 1.0 } else { 0.0 };
            assert!((v.norm_sqr() - expect).abs() < 1e-15, "e{idx}");
        }
        assert!((fams.ek.get(0, 0, 0).norm_sqr() - 1.0).abs() < 1e-15);
        for (idx, v) in fams.f.iter().enumerate() {
            let expect = if idx % 4 == 0 { 1.0 } else { 0.0 };
            assert!((v.norm_sqr() - expect).abs() < 1e-15, "f{idx}");
        }
        assert!(fams.g[1].norm_sqr() < 1e-15);
        assert!((fams.g[0].norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn twirl_e_norms() {
        let q = 0.1;
        let attack = AttackModel::pauli_twirl(q, q).unwrap();
        let e = extract_e(&attack);
        assert!((e[0].norm_sqr() - (1.0 - 2.0 * q)).abs() < 1e-14);
        let cross: C64 = (0..3).map(|j| e[j].inner(&e[3 + j])).sum();
        assert!(cross.norm() < 1e-14);
        let ek = extract_ekij(&attack);
        assert!((ek.get(0, 0, 0).norm_sqr() - 0.64).abs() < 1e-14);
        // norms over k for fixed (i, j) add back up to ⟨e_j|e_j⟩
        for i in 0..3 {
            for m in 0..3 {
                let total: f64 = (0..3).map(|k| ek.get(k, i, 3 * m + i).norm_sqr()).sum();
                assert!((total - e[3 * m + i].norm_sqr()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn g_coefficients_match_transcribed_phases() {
        // coefficients of f_0..f_8 in 3·g_n, written out by hand: 0 → 1, 1 → ω, 2 → ω̄
        const G: [[u8; 9]; 9] = [
            [0, 1, 1, 2, 0, 0, 2, 0, 0],
            [1, 0, 1, 0, 2, 0, 0, 2, 0],
            [1, 1, 0, 0, 0, 2, 0, 0, 2],
            [2, 0, 0, 0, 1, 1, 2, 0, 0],
            [0, 2, 0, 1, 0, 1, 0, 2, 0],
            [0, 0, 2, 1, 1, 0, 0, 0, 2],
            [2, 0, 0, 2, 0, 0, 0, 1, 1],
            [0, 2, 0, 0, 2, 0, 1, 0, 1],
            [0, 0, 2, 0, 0, 2, 1, 1, 0],
        ];
        // h_1, h_2, h_3, h_5, h_6, h_7
        const H: [(usize, [u8; 9]); 6] = [
            (1, [0, 2, 1, 0, 2, 1, 0, 2, 1]),
            (2, [0, 1, 2, 0, 1, 2, 0, 1, 2]),
            (3, [0, 0, 0, 1, 1, 1, 2, 2, 2]),
            (5, [0, 1, 2, 1, 2, 0, 2, 0, 1]),
            (6, [0, 0, 0, 2, 2, 2, 1, 1, 1]),
            (7, [0, 2, 1, 2, 1, 0, 1, 0, 2]),
        ];
        let phase = |c: u8| match c {
            0 => C64::new(1.0, 0.0),
            1 => omega(),
            _ => omega().conj(),
        };
        let f: Vec<CVec> = (0..9).map(|i| CVec::ket(9, i)).collect();
        let g = compose_g(&f);
        for (n, row) in G.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                assert!((g[n][m] * 3.0 - phase(c)).norm() < 1e-14, "g{n} f{m}");
            }
        }
        let h = compose_h(&f);
        for (n, row) in H {
            for (m, &c) in row.iter().enumerate() {
                assert!((h[n][m] * 3.0 - phase(c)).norm() < 1e-14, "h{n} f{m}");
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_attack() {
        let attack = AttackModel::random(3, 1, 11).unwrap();
        let back = AttackModel::from_json(&attack.to_json().unwrap()).unwrap();
        assert_eq!(attack, back);
    }

    #[test]
    fn rejects_wrong_shapes_and_non_isometries() {
        assert!(AttackModel::new(1, 1, CMat::identity(2), CMat::identity(3)).is_err());
        let squashed = CMat::identity(3).scale_real(0.5);
        assert!(AttackModel::new(1, 1, squashed, CMat::identity(3)).is_err());
        assert!(AttackModel::from_json(r#"{"d_f":1,"d_r":1,"forward":[[1,0]],"reverse":[]}"#).is_err());
    }

    #[test]
    fn scenario_rejects_out_of_range_q() {
        let c = Conventions::default();
        assert!(ChannelScenario::new(0.4, ChannelModel::Dependent, Variant::Phi1, c).is_err());
        assert!(ChannelScenario::new(0.375, ChannelModel::Dependent, Variant::Phi1, c).is_ok());
    }
}
