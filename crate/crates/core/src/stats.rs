//! Observable statistics: the 27-entry A-basis table, the six
//! alternative-basis error rates and the sifted joint distribution.
//!
//! `p[m][i][k]` is the probability that Bob measures `i` and Alice finally
//! measures `k`, given that Alice sent `|m⟩`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::appendix::ExpansionTable;
use crate::attack::{AttackModel, VectorFamilies};
use crate::error::{domain, Error, Result};
use crate::linalg::{shannon_entropy3, C64};

pub type PTable = [[[f64; 3]; 3]; 3];

/// Ordered (sent, found) pairs of the six error rates.
pub const BASIS_ERR_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Alternative basis T.
    Phi1,
    /// Alternative basis K.
    Phi2,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Phi1 => "phi1",
            Variant::Phi2 => "phi2",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi1" => Ok(Variant::Phi1),
            "phi2" => Ok(Variant::Phi2),
            _ => domain(format!("unknown variant '{s}'")),
        }
    }
}

impl Variant {
    pub fn expansion_table(self) -> ExpansionTable {
        match self {
            Variant::Phi1 => ExpansionTable::t_basis(),
            Variant::Phi2 => ExpansionTable::k_basis(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Diagonal entries weighted 1/3, off-diagonal 2/3, as displayed.
    Printed,
    /// Printed weights rescaled to unit mass.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StatTableJson", into = "StatTableJson")]
pub struct StatTable {
    pub p: PTable,
    pub basis_err: [f64; 6],
    pub variant: Variant,
}

#[derive(Serialize, Deserialize)]
struct StatTableJson {
    p: Vec<f64>,
    basis_err: Vec<f64>,
    variant: Variant,
}

impl From<StatTable> for StatTableJson {
    fn from(t: StatTable) -> Self {
        Self { p: flatten(&t.p).to_vec(), basis_err: t.basis_err.to_vec(), variant: t.variant }
    }
}

impl TryFrom<StatTableJson> for StatTable {
    type Error = Error;

    fn try_from(raw: StatTableJson) -> Result<Self> {
        if raw.p.len() != 27 || raw.basis_err.len() != 6 {
            return Err(Error::Dimension(format!(
                "expected 27 table entries and 6 error rates, got {} and {}",
                raw.p.len(),
                raw.basis_err.len()
            )));
        }
        let mut p = [[[0.0; 3]; 3]; 3];
        for (idx, v) in raw.p.iter().enumerate() {
            p[idx / 9][(idx / 3) % 3][idx % 3] = *v;
        }
        let mut basis_err = [0.0; 6];
        basis_err.copy_from_slice(&raw.basis_err);
        StatTable::new(p, basis_err, raw.variant)
    }
}

impl StatTable {
    pub fn new(p: PTable, basis_err: [f64; 6], variant: Variant) -> Result<Self> {
        validate_p(&p)?;
        if let Some(bad) = basis_err.iter().find(|v| !(-TABLE_TOL..=1.0 + TABLE_TOL).contains(*v)) {
            return domain(format!("basis error rate {bad} outside [0, 1]"));
        }
        Ok(Self { p, basis_err, variant })
    }

    /// Exact statistics generated by an attack.
    pub fn from_attack(attack: &AttackModel, variant: Variant) -> Result<Self> {
        let fams = VectorFamilies::from_attack(attack);
        Self::new(p_table_from_attack(&fams), basis_error_direct(&fams, variant), variant)
    }

    pub fn entry(&self, outcome: [u8; 3]) -> f64 {
        self.p[outcome[0] as usize][outcome[1] as usize][outcome[2] as usize]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn validate_p(p: &PTable) -> Result<()> {
    for (m, row) in p.iter().enumerate() {
        let mut total = 0.0;
        for v in row.iter().flatten() {
            if !v.is_finite() || *v < -TABLE_TOL || *v > 1.0 + TABLE_TOL {
                return domain(format!("table entry {v} outside [0, 1]"));
            }
            total += v;
        }
        if (total - 1.0).abs() > TABLE_TOL {
            return domain(format!("entries for sent trit {m} sum to {total}"));
        }
    }
    Ok(())
}

/// Lexicographic `(m, i, k)` flattening.
pub fn flatten(p: &PTable) -> [f64; 27] {
    let mut out = [0.0; 27];
    for (idx, v) in p.iter().flatten().flatten().enumerate() {
        out[idx] = *v;
    }
    out
}

/// `p[m][i][k] = ⟨e^k_{i,3m+i}|e^k_{i,3m+i}⟩`
pub fn p_table_from_attack(fams: &VectorFamilies) -> PTable {
    let mut p = [[[0.0; 3]; 3]; 3];
    for (m, plane) in p.iter_mut().enumerate() {
        for (i, row) in plane.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = fams.ek.for_outcome(m, i, k).norm_sqr();
            }
        }
    }
    p
}

/// Trit transition matrix of the ternary symmetric channel.
pub fn transition(q: f64) -> [[f64; 3]; 3] {
    let mut t = [[q; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        row[i] = 1.0 - 2.0 * q;
    }
    t
}

/// Table for the symmetric channel applied in each direction:
/// `p[m][i][k] = q_{mi}(Q_f) · q_{ik}(Q_r)`.
pub fn p_table_symmetric(q_forward: f64, q_reverse: f64) -> Result<PTable> {
    for q in [q_forward, q_reverse] {
        if !(0.0..=0.375).contains(&q) {
            return domain(format!("channel parameter {q} outside [0, 3/8]"));
        }
    }
    let (tf, tr) = (transition(q_forward), transition(q_reverse));
    let mut p = [[[0.0; 3]; 3]; 3];
    for (m, plane) in p.iter_mut().enumerate() {
        for (i, row) in plane.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = tf[m][i] * tr[i][k];
            }
        }
    }
    Ok(p)
}

/// The six squared norms `⟨g_j|g_j⟩` (or `⟨h_j|h_j⟩`), `j ∈ {1,2,3,5,6,7}`.
pub fn basis_error_direct(fams: &VectorFamilies, variant: Variant) -> [f64; 6] {
    let alt = fams.alternative(variant);
    BASIS_ERR_PAIRS.map(|(n, m)| alt[3 * n + m].norm_sqr())
}

/// The same six rates evaluated from the transcribed expansions in the
/// Gram matrix of the `f` family.
pub fn basis_error_expanded(gram: &[[C64; 9]; 9], variant: Variant) -> [f64; 6] {
    basis_error_expanded_with(gram, &variant.expansion_table())
}

pub fn basis_error_expanded_with(gram: &[[C64; 9]; 9], table: &ExpansionTable) -> [f64; 6] {
    let vals = table.evaluate(gram);
    let mut out = [0.0; 6];
    out.copy_from_slice(&vals[..6]);
    out
}

/// Label of Eve's classical `C` register for an outcome: 0 = no error,
/// 1 = forward-only error, 2 = reverse-only error, 3 = both.
pub fn c_label(sent: usize, bob: usize, alice: usize) -> usize {
    match (sent == bob, bob == alice) {
        (true, true) => 0,
        (false, true) => 1,
        (true, false) => 2,
        (false, false) => 3,
    }
}

/// `(t1, t2, t3, t4)`: total probability mass in each `C` class.
pub fn t_values(p: &PTable) -> [f64; 4] {
    let mut t = [0.0; 4];
    for (m, plane) in p.iter().enumerate() {
        for (i, row) in plane.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if c_label(m, i, k) < 3 {
                    t[c_label(m, i, k)] += v;
                }
            }
        }
    }
    t[3] = 3.0 - t[0] - t[1] - t[2];
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    /// `joint[b][a]`, Bob's trit `b`, Alice's trit `a`.
    pub joint: [[f64; 3]; 3],
    pub marginal_a: [f64; 3],
    pub weighting: Weighting,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.joint.iter().flatten().sum()
    }

    pub fn entropy_joint(&self) -> Result<f64> {
        shannon_entropy3(&self.joint.concat())
    }

    pub fn entropy_a(&self) -> Result<f64> {
        shannon_entropy3(&self.marginal_a)
    }
}

pub fn joint_and_marginal(p: &PTable, weighting: Weighting) -> JointDistribution {
    let mut joint = [[0.0; 3]; 3];
    for (b, row) in joint.iter_mut().enumerate() {
        for (a, v) in row.iter_mut().enumerate() {
            let w = if a == b { 1.0 / 3.0 } else { 2.0 / 3.0 };
            *v = w * (0..3).map(|m| p[m][b][a]).sum::<f64>();
        }
    }
    if weighting == Weighting::Normalized {
        let total: f64 = joint.iter().flatten().sum();
        for v in joint.iter_mut().flatten() {
            *v /= total;
        }
    }
    let mut marginal_a = [0.0; 3];
    for row in &joint {
        for (a, v) in row.iter().enumerate() {
            marginal_a[a] += v;
        }
    }
    JointDistribution { joint, marginal_a, weighting }
}
