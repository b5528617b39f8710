use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::{CVec, C64};

/// `ω = e^{2πi/3}`
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisId {
    /// Computational basis `{|0⟩, |1⟩, |2⟩}`.
    A,
    /// `{|0′⟩, |1′⟩, |2′⟩}`: the j-th vector carries ω on component j.
    T,
    /// `{|0″⟩, |1″⟩, |2″⟩}`: the discrete Fourier basis.
    K,
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisId::A => "A",
            BasisId::T => "T",
            BasisId::K => "K",
        };
        f.write_str(s)
    }
}

/// Three orthonormal qutrit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub id: BasisId,
    pub vectors: [CVec; 3],
}

impl BasisSet {
    /// Builds a basis from arbitrary vectors; used to inject faults in tests.
    pub fn custom(id: BasisId, vectors: [CVec; 3]) -> Self {
        Self { id, vectors }
    }

    pub fn vector(&self, j: usize) -> &CVec {
        &self.vectors[j]
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                let g = self.vectors[i].inner(&self.vectors[j]);
                worst = worst.max((g - C64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest `| |⟨a_i|b_j⟩|² − 1/3 |` against `other`.
    pub fn unbiasedness_defect(&self, other: &BasisSet) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.vectors {
            for b in &other.vectors {
                worst = worst.max((a.inner(b).norm_sqr() - 1.0 / 3.0).abs());
            }
        }
        worst
    }

    /// Coordinates `⟨b_j|ψ⟩` of a qutrit state in this basis.
    pub fn coordinates(&self, psi: &CVec) -> [C64; 3] {
        [0, 1, 2].map(|j| self.vectors[j].inner(psi))
    }
}

pub fn basis_vectors(id: BasisId) -> BasisSet {
    let one = C64::new(1.0, 0.0);
    let w = omega();
    let wb = w.conj();
    let s = 1.0 / 3f64.sqrt();
    let build = |rows: [[C64; 3]; 3]| rows.map(|r| CVec::new(r.iter().map(|z| z * s).collect()));
    let vectors = match id {
        BasisId::A => [CVec::ket(3, 0), CVec::ket(3, 1), CVec::ket(3, 2)],
        BasisId::T => build([[w, one, one], [one, w, one], [one, one, w]]),
        BasisId::K => build([[one, one, one], [one, w, wb], [one, wb, w]]),
    };
    BasisSet { id, vectors }
}
