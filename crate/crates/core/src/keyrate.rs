//! Asymptotic key-rate lower bound
//! `r = S(BEC) − S(EC)_upper − H(B|A)` and its intermediates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::appendix::{X_CROSS_TERMS, X_DIAGONAL_TERMS};
use crate::attack::{ChannelModel, ChannelScenario};
use crate::error::{domain, Error, Result};
use crate::linalg::{entropy_term3, shannon_entropy3, von_neumann_entropy3, CMat, C64};
use crate::stats::{flatten, joint_and_marginal, p_table_symmetric, t_values, JointDistribution, StatTable, Variant, Weighting};

/// How the lower bound `S` on the Gram quantity `p` is turned into `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMode {
    /// `p ≥ max(X, 0)²`, as displayed.
    Printed,
    /// `p ≥ max(X, 0)² / 3`, from `(Σ Re z)² ≤ 3 Σ |z|²`.
    Corrected,
}

/// What the channel noise `Q` means for the six alternative-basis rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisNoiseConvention {
    /// Each rate is the per-pair value: `Q` (dependent), `Q(2 − 3Q)` (independent).
    PerPair,
    /// Each rate is half the total: `Q/2` (dependent), `2Q(2 − 3Q)` (independent).
    Total,
    /// Each rate is the noise figure quoted for the channel: `Q` (dependent),
    /// `2Q(2 − 3Q)` (independent).
    AsStated,
}

/// Treatment of the closed-form σ̃₁ eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenHandling {
    /// `p` capped at its Cauchy–Schwarz ceiling, eigenvalues clamped to `[0, 1]`.
    Clamped,
    /// No cap or clamp; `S(λ) = −λ log₃|λ|`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Conventions {
    pub p_mode: PMode,
    pub weighting: Weighting,
    pub basis_noise: BasisNoiseConvention,
    pub eigen: EigenHandling,
}

impl Conventions {
    /// Reproduces the published noise thresholds.
    pub const fn paper() -> Self {
        Self {
            p_mode: PMode::Printed,
            weighting: Weighting::Printed,
            basis_noise: BasisNoiseConvention::AsStated,
            eigen: EigenHandling::Literal,
        }
    }

    /// Every quantity kept physical: corrected `p`, capped and clamped.
    pub const fn physical() -> Self {
        Self {
            p_mode: PMode::Corrected,
            weighting: Weighting::Printed,
            basis_noise: BasisNoiseConvention::PerPair,
            eigen: EigenHandling::Clamped,
        }
    }
}

impl Default for Conventions {
    fn default() -> Self {
        Self::paper()
    }
}

impl fmt::Display for Conventions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.p_mode {
            PMode::Printed => "printed",
            PMode::Corrected => "corrected",
        };
        let w = match self.weighting {
            Weighting::Printed => "printed",
            Weighting::Normalized => "normalized",
        };
        let b = match self.basis_noise {
            BasisNoiseConvention::PerPair => "per-pair",
            BasisNoiseConvention::Total => "total",
            BasisNoiseConvention::AsStated => "as-stated",
        };
        let e = match self.eigen {
            EigenHandling::Clamped => "clamped",
            EigenHandling::Literal => "literal",
        };
        write!(f, "p-mode={p} weighting={w} basis-convention={b} eigen={e}")
    }
}

/// Alternative-basis error rate implied by the channel noise.
pub fn basis_error_rate(q: f64, model: ChannelModel, convention: BasisNoiseConvention) -> f64 {
    use BasisNoiseConvention::*;
    match (model, convention) {
        (ChannelModel::Dependent, PerPair | AsStated) => q,
        (ChannelModel::Dependent, Total) => q / 2.0,
        (ChannelModel::Independent, PerPair) => q * (2.0 - 3.0 * q),
        (ChannelModel::Independent, Total | AsStated) => 2.0 * q * (2.0 - 3.0 * q),
    }
}

/// Cauchy–Schwarz lower bound on
/// `X = Re⟨e⁰₀,₀|e¹₁,₄⟩ + Re⟨e⁰₀,₀|e²₂,₈⟩ + Re⟨e¹₁,₄|e²₂,₈⟩`.
/// The cross-term sum enters with `+1/2` for Φ₁ and `−1` for Φ₂.
pub fn x_bound(table: &StatTable) -> f64 {
    let cross_weight = match table.variant {
        Variant::Phi1 => 0.5,
        Variant::Phi2 => -1.0,
    };
    let root = |(a, b): &([u8; 3], [u8; 3])| (table.entry(*a) * table.entry(*b)).max(0.0).sqrt();
    let cross: f64 = X_CROSS_TERMS.iter().map(root).sum();
    let diagonal: f64 = X_DIAGONAL_TERMS.iter().map(root).sum();
    3.0 - 1.5 * table.basis_err.iter().sum::<f64>() + cross_weight * cross - diagonal
}

/// `S = max(X, 0)²`
pub fn s_clamped(x: f64) -> f64 {
    x.max(0.0).powi(2)
}

/// Largest value `p` can take given the three diagonal norms.
pub fn p_ceiling(table: &StatTable) -> f64 {
    let (a, b, c) = (table.p[0][0][0], table.p[1][1][1], table.p[2][2][2]);
    a * b + a * c + b * c
}

pub fn p_lower_uncapped(x: f64, mode: PMode) -> f64 {
    match mode {
        PMode::Printed => s_clamped(x),
        PMode::Corrected => s_clamped(x) / 3.0,
    }
}

/// Lower bound on `p`, capped at the feasibility ceiling.
pub fn p_lower_bound(x: f64, table: &StatTable, mode: PMode) -> f64 {
    p_lower_uncapped(x, mode).min(p_ceiling(table))
}

fn sigma1_discriminant(p000: f64, p111: f64, p222: f64, p: f64) -> Result<(f64, f64)> {
    if [p000, p111, p222, p].iter().any(|v| !v.is_finite() || *v < 0.0) {
        return domain("σ̃₁ inputs must be finite and non-negative");
    }
    let n = p000 + p111 + p222;
    if n <= 0.0 {
        return domain("p000 + p111 + p222 must be positive");
    }
    let d = 4.0 * p + p000 * p000 - 2.0 * p000 * p111 + p111 * p111 - 2.0 * p000 * p222 - 2.0 * p111 * p222
        + p222 * p222;
    Ok((d.max(0.0), n))
}

/// Closed-form nonzero eigenvalues of σ̃₁, clamped to `[0, 1]`.
pub fn sigma1_eigenvalues(p000: f64, p111: f64, p222: f64, p: f64) -> Result<(f64, f64)> {
    let (l1, l2) = sigma1_eigenvalues_literal(p000, p111, p222, p)?;
    Ok((l1.clamp(0.0, 1.0), l2.clamp(0.0, 1.0)))
}

/// The same closed forms without clamping the result.
pub fn sigma1_eigenvalues_literal(p000: f64, p111: f64, p222: f64, p: f64) -> Result<(f64, f64)> {
    let (d, n) = sigma1_discriminant(p000, p111, p222, p)?;
    let half = d.sqrt() / (2.0 * n);
    Ok((0.5 + half, 0.5 - half))
}

/// Coordinates of `|e⁰₀,₀⟩` in the auxiliary basis built from `|e¹₁,₄⟩` and
/// `|e²₂,₈⟩`, plus the two norms that fix the rest of σ₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma1Decomposition {
    pub chi: C64,
    pub sigma: C64,
    pub rho_c: C64,
    pub p111: f64,
    pub p222: f64,
}

impl Sigma1Decomposition {
    pub fn p000(&self) -> f64 {
        self.chi.norm_sqr() + self.sigma.norm_sqr() + self.rho_c.norm_sqr()
    }

    /// The Gram quantity consistent with this decomposition.
    pub fn p(&self) -> f64 {
        self.rho_c.norm_sqr() * (self.p111 + self.p222) + self.p111 * self.p222
    }

    /// The normalized 3×3 matrix of σ̃₁ in the auxiliary basis.
    pub fn matrix(&self) -> CMat {
        let v = [self.chi, self.sigma, self.rho_c];
        let tail = self.p111 + self.p222;
        let norm = self.p000() + tail;
        CMat::from_fn(3, 3, |r, c| {
            let mut z = v[r] * v[c].conj();
            if r == 2 && c == 2 {
                z += C64::new(tail, 0.0);
            }
            z / norm
        })
    }
}

/// `H(t/3) + (t₂+t₃+t₄)/3 + (t₁/3)(S(λ₁) + S(λ₂))` with `S(λ) = −λ log₃|λ|`.
pub fn s_ec_upper(t: [f64; 4], lambda1: f64, lambda2: f64) -> Result<f64> {
    let h = shannon_entropy3(&t.map(|v| v / 3.0))?;
    Ok(h + (t[1] + t[2] + t[3]) / 3.0 + t[0] / 3.0 * (entropy_term3(lambda1) + entropy_term3(lambda2)))
}

/// `H(p/3)` over all 27 entries.
pub fn s_bec(table: &StatTable) -> Result<f64> {
    shannon_entropy3(&flatten(&table.p).map(|v| v / 3.0))
}

/// `H(B, A) − H(A)`.
pub fn h_b_given_a(jd: &JointDistribution) -> Result<f64> {
    Ok(jd.entropy_joint()? - jd.entropy_a()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub q: Option<f64>,
    pub model: Option<ChannelModel>,
    pub variant: Variant,
    pub t: [f64; 4],
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "S_clamped")]
    pub s_clamped: f64,
    pub p_lower: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(rename = "S_BEC")]
    pub s_bec: f64,
    #[serde(rename = "S_EC_upper")]
    pub s_ec_upper: f64,
    #[serde(rename = "H_B_given_A")]
    pub h_b_given_a: f64,
    pub r: f64,
    pub conventions: Conventions,
}

/// Key rate for a symmetric channel of strength `Q` in both directions.
pub fn key_rate(scenario: &ChannelScenario) -> Result<KeyRateReport> {
    scenario.validate()?;
    let q = scenario.q;
    let p = p_table_symmetric(q, q)?;
    let err = basis_error_rate(q, scenario.model, scenario.conventions.basis_noise);
    let table = StatTable::new(p, [err; 6], scenario.variant)?;
    let mut report = key_rate_from_table(&table, &scenario.conventions)?;
    report.q = Some(q);
    report.model = Some(scenario.model);
    Ok(report)
}

/// Key rate for arbitrary observed statistics.
pub fn key_rate_from_table(table: &StatTable, conventions: &Conventions) -> Result<KeyRateReport> {
    let t = t_values(&table.p);
    let x = x_bound(table);
    let (p000, p111, p222) = (table.p[0][0][0], table.p[1][1][1], table.p[2][2][2]);
    let (p_lower, (lambda1, lambda2)) = match conventions.eigen {
        EigenHandling::Clamped => {
            let p = p_lower_bound(x, table, conventions.p_mode);
            (p, sigma1_eigenvalues(p000, p111, p222, p)?)
        }
        EigenHandling::Literal => {
            let p = p_lower_uncapped(x, conventions.p_mode);
            (p, sigma1_eigenvalues_literal(p000, p111, p222, p)?)
        }
    };
    let s_bec = s_bec(table)?;
    let s_ec_upper = s_ec_upper(t, lambda1, lambda2)?;
    let jd = joint_and_marginal(&table.p, conventions.weighting);
    let h_b_given_a = h_b_given_a(&jd)?;
    Ok(KeyRateReport {
        q: None,
        model: None,
        variant: table.variant,
        t,
        x,
        s_clamped: s_clamped(x),
        p_lower,
        lambda1,
        lambda2,
        s_bec,
        s_ec_upper,
        h_b_given_a,
        r: s_bec - s_ec_upper - h_b_given_a,
        conventions: *conventions,
    })
}

/// Grid spacing used to bracket the first sign change before bisecting.
pub const THRESHOLD_SCAN_STEP: f64 = 5e-4;
pub const THRESHOLD_TOL: f64 = 1e-6;

/// Smallest `Q ∈ [0, 3/8]` where the key rate reaches zero.
pub fn find_threshold(variant: Variant, model: ChannelModel, conventions: Conventions) -> Result<f64> {
    let rate = |q: f64| -> Result<f64> {
        Ok(key_rate(&ChannelScenario { q, model, variant, conventions })?.r)
    };
    let max_q = ChannelScenario::Q_MAX;
    let mut lo = 0.0;
    if rate(lo)? <= 0.0 {
        return Ok(0.0);
    }
    let steps = (max_q / THRESHOLD_SCAN_STEP).round() as usize;
    let mut hi = None;
    for s in 1..=steps {
        let q = (s as f64 * THRESHOLD_SCAN_STEP).min(max_q);
        if rate(q)? <= 0.0 {
            hi = Some(q);
            break;
        }
        lo = q;
    }
    let mut hi = hi.ok_or(Error::NoThreshold { max_q })?;
    while hi - lo > THRESHOLD_TOL / 4.0 {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Both sides of the block-diagonal entropy identity:
/// `S(⊕ w_j ρ_j) = H(w) + Σ w_j S(ρ_j)`.
pub fn lemma1_check(blocks: &[(f64, CMat)]) -> Result<(f64, f64)> {
    if blocks.is_empty() {
        return domain("need at least one block");
    }
    let total: f64 = blocks.iter().map(|(w, _)| w).sum();
    if blocks.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
        return domain("block weights must be non-negative and sum to 1");
    }
    let weighted: Vec<CMat> = blocks.iter().map(|(w, rho)| rho.scale_real(*w)).collect();
    let lhs = von_neumann_entropy3(&CMat::block_diag(&weighted))?;
    let weights: Vec<f64> = blocks.iter().map(|(w, _)| *w).collect();
    let mut rhs = shannon_entropy3(&weights)?;
    for (w, rho) in blocks {
        rhs += w * von_neumann_entropy3(rho)?;
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, log3};

    fn scenario(q: f64, variant: Variant, model: ChannelModel, conventions: Conventions) -> ChannelScenario {
        ChannelScenario::new(q, model, variant, conventions).unwrap()
    }

    fn noiseless(variant: Variant) -> StatTable {
        StatTable::new(p_table_symmetric(0.0, 0.0).unwrap(), [0.0; 6], variant).unwrap()
    }

    #[test]
    fn x_bound_noiseless_and_error_only() {
        for v in [Variant::Phi1, Variant::Phi2] {
            assert_eq!(x_bound(&noiseless(v)), 3.0);
            let mut t = noiseless(v);
            t.basis_err = [0.02; 6];
            assert!((x_bound(&t) - (3.0 - 9.0 * 0.02)).abs() < 1e-15);
        }
    }

    #[test]
    fn p_lower_modes() {
        let t = noiseless(Variant::Phi1);
        assert_eq!(p_lower_bound(3.0, &t, PMode::Corrected), 3.0);
        assert_eq!(p_lower_bound(3.0, &t, PMode::Printed), 3.0);
        assert_eq!(p_lower_uncapped(3.0, PMode::Printed), 9.0);
        assert_eq!(p_lower_bound(-0.5, &t, PMode::Printed), 0.0);
    }

    #[test]
    fn sigma1_closed_form_examples() {
        let (l1, l2) = sigma1_eigenvalues(1.0, 1.0, 1.0, 3.0).unwrap();
        assert!((l1 - 1.0).abs() < 1e-15 && l2.abs() < 1e-15);
        assert_eq!(sigma1_eigenvalues(1.0, 1.0, 1.0, 0.0).unwrap(), (0.5, 0.5));
        let (l1, l2) = sigma1_eigenvalues_literal(1.0, 1.0, 1.0, 9.0).unwrap();
        assert!(l1 > 1.0 && l2 < 0.0 && (l1 + l2 - 1.0).abs() < 1e-15);
        assert!(sigma1_eigenvalues(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn sigma1_matrix_spectrum_matches_closed_form() {
        let d = Sigma1Decomposition {
            chi: C64::new(0.3, -0.2),
            sigma: C64::new(0.1, 0.4),
            rho_c: C64::new(-0.5, 0.05),
            p111: 0.7,
            p222: 0.55,
        };
        let ev = hermitian_eigenvalues(&d.matrix()).unwrap();
        let (l1, l2) = sigma1_eigenvalues(d.p000(), d.p111, d.p222, d.p()).unwrap();
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - l2).abs() < 1e-12 && (ev[2] - l1).abs() < 1e-12);
    }

    #[test]
    fn s_ec_upper_examples() {
        assert_eq!(s_ec_upper([3.0, 0.0, 0.0, 0.0], 1.0, 0.0).unwrap(), 0.0);
        assert!((s_ec_upper([3.0, 0.0, 0.0, 0.0], 0.5, 0.5).unwrap() - log3(2.0)).abs() < 1e-15);
        assert!((s_ec_upper([0.0, 1.0, 1.0, 1.0], 1.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn s_bec_and_h_b_given_a_examples() {
        assert!((s_bec(&noiseless(Variant::Phi1)).unwrap() - 1.0).abs() < 1e-15);
        let uniform = StatTable::new([[[1.0 / 9.0; 3]; 3]; 3], [0.0; 6], Variant::Phi1).unwrap();
        assert!((s_bec(&uniform).unwrap() - 3.0).abs() < 1e-14);
        let jd = joint_and_marginal(&noiseless(Variant::Phi1).p, Weighting::Printed);
        assert!(h_b_given_a(&jd).unwrap().abs() < 1e-15);
        let flat = JointDistribution { joint: [[1.0 / 9.0; 3]; 3], marginal_a: [1.0 / 3.0; 3], weighting: Weighting::Normalized };
        assert!((h_b_given_a(&flat).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn noiseless_rate_is_one_under_clamped_conventions() {
        for variant in [Variant::Phi1, Variant::Phi2] {
            for model in [ChannelModel::Dependent, ChannelModel::Independent] {
                for p_mode in [PMode::Printed, PMode::Corrected] {
                    let c = Conventions { p_mode, ..Conventions::physical() };
                    let r = key_rate(&scenario(0.0, variant, model, c)).unwrap().r;
                    assert!((r - 1.0).abs() < 1e-12, "{variant} {model:?} {c}");
                }
            }
        }
    }

    #[test]
    fn paper_conventions_threshold_phi1_dependent() {
        let q = find_threshold(Variant::Phi1, ChannelModel::Dependent, Conventions::paper()).unwrap();
        assert!((q - 0.191).abs() < 0.005, "{q}");
    }

    #[test]
    fn report_serializes_every_intermediate() {
        let r = key_rate(&scenario(0.05, Variant::Phi1, ChannelModel::Dependent, Conventions::default())).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["t", "X", "S_clamped", "p_lower", "lambda1", "lambda2", "S_BEC", "S_EC_upper", "H_B_given_A", "r"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["conventions"]["basis_noise"], "as-stated");
    }

    #[test]
    fn lemma1_two_pure_blocks() {
        let pure = CMat::diag_real(&[1.0, 0.0, 0.0]);
        let (lhs, rhs) = lemma1_check(&[(0.5, pure.clone()), (0.5, pure)]).unwrap();
        assert!((lhs - log3(2.0)).abs() < 1e-12 && (rhs - log3(2.0)).abs() < 1e-12);
        assert!(lemma1_check(&[(0.7, CMat::identity(3))]).is_err());
    }
}
