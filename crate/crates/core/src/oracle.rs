//! Floating-point matrix model of the Clifford algebra.
//!
//! An independent cross-check for the exact engine in [`crate::clifford`]:
//! generators are represented as explicit complex matrices built from
//! Kronecker products of Pauli matrices, and traces are computed by summing
//! the diagonal. Nothing here feeds the exact results — agreement between
//! the two implementations is itself one of the verification suites.
//!
//! In dimension `n = 2m` the Hermitian anchors are
//!
//! ```text
//! E_{2j-1} = σ3^{⊗(j-1)} ⊗ σ1 ⊗ I^{⊗(m-j)}
//! E_{2j}   = σ3^{⊗(j-1)} ⊗ σ2 ⊗ I^{⊗(m-j)}
//! ```
//!
//! which square to `+1` and anticommute; the represented generators are
//! `G_i = i·E_i`, which satisfy `G_i G_j + G_j G_i = -2 δ_ij`. All entries
//! stay in `{0, ±1, ±i}` scaled by powers of two, so the relation residual
//! is zero to machine precision.

use crate::clifford::CliffordElement;
use num::complex::Complex64;
use num::Zero;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Zero matrix of side `dim`.
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex64::zero(); dim * dim],
        }
    }

    /// Identity matrix of side `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice (length must be `dim²`).
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count ≠ dim²");
        CMatrix {
            dim,
            data: entries.to_vec(),
        }
    }

    /// Matrix side length.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Matrix sum.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            dim: self.dim,
            data,
        }
    }

    /// Matrix difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * factor).collect();
        CMatrix {
            dim: self.dim,
            data,
        }
    }

    /// Matrix product (naïve triple loop; the sides here are ≤ 2^{m}).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex64::zero() {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = Self::zeros(d);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.data[ia * da + ja];
                if a == Complex64::zero() {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out.data[(ia * db + ib) * d + (ja * db + jb)] =
                            a * other.data[ib * db + jb];
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest entry magnitude (`max_ij |a_ij|`).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

fn sigma1() -> CMatrix {
    let z = Complex64::zero();
    let one = Complex64::new(1.0, 0.0);
    CMatrix::from_rows(2, &[z, one, one, z])
}

fn sigma2() -> CMatrix {
    let z = Complex64::zero();
    let i = Complex64::new(0.0, 1.0);
    CMatrix::from_rows(2, &[z, -i, i, z])
}

fn sigma3() -> CMatrix {
    let z = Complex64::zero();
    let one = Complex64::new(1.0, 0.0);
    CMatrix::from_rows(2, &[one, z, z, -one])
}

/// Matrix representation of the generators of the dimension-`n` algebra on
/// `C^{2^{n/2}}`.
pub struct MatrixRep {
    n: usize,
    generators: Vec<CMatrix>,
}

impl MatrixRep {
    /// Build the representation for even `n`.
    ///
    /// # Panics
    ///
    /// Panics if `n` is odd, below 2, or large enough that `2^{n/2}` does
    /// not fit in memory sensibly (`n > 20` is refused), or if the built
    /// matrices fail the defining relations beyond `1e-12` — which would
    /// indicate a bug, not roundoff, since every entry is exact in binary
    /// floating point.
    pub fn new(n: usize) -> Self {
        assert!(n % 2 == 0, "matrix model needs even dimension, got {n}");
        assert!((2..=20).contains(&n), "matrix model supports 2 ≤ n ≤ 20");
        let m = n / 2;
        let i_unit = Complex64::new(0.0, 1.0);
        let mut generators = Vec::with_capacity(n);
        for idx in 1..=n {
            let j = idx.div_ceil(2); // block position 1..=m
            let middle = if idx % 2 == 1 { sigma1() } else { sigma2() };
            let mut mat = CMatrix::identity(1);
            for _ in 0..(j - 1) {
                mat = mat.kron(&sigma3());
            }
            mat = mat.kron(&middle);
            for _ in 0..(m - j) {
                mat = mat.kron(&CMatrix::identity(2));
            }
            generators.push(mat.scale(i_unit));
        }
        let rep = MatrixRep { n, generators };
        let residual = rep.relation_residual();
        assert!(
            residual <= 1e-12,
            "generator relations violated: residual {residual}"
        );
        rep
    }

    /// Frame dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Side length of the representation space, `2^{n/2}`.
    pub fn rep_dim(&self) -> usize {
        1 << (self.n / 2)
    }

    /// The represented generator `G_i` (1-based).
    pub fn generator(&self, i: usize) -> &CMatrix {
        assert!((1..=self.n).contains(&i), "generator index out of range");
        &self.generators[i - 1]
    }

    /// Worst-case violation of `G_i G_j + G_j G_i = -2 δ_ij` over all pairs.
    pub fn relation_residual(&self) -> f64 {
        let d = self.rep_dim();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let gi = &self.generators[i];
                let gj = &self.generators[j];
                let mut anti = gi.mul(gj).add(&gj.mul(gi));
                if i == j {
                    anti = anti.add(&CMatrix::identity(d).scale(Complex64::new(2.0, 0.0)));
                }
                worst = worst.max(anti.max_abs());
            }
        }
        worst
    }

    /// Represent an exact element as a matrix: each blade maps to the
    /// ascending product of its generators, scaled by the coefficient.
    pub fn represent(&self, x: &CliffordElement) -> CMatrix {
        assert_eq!(x.dim(), self.n, "element dimension ≠ representation");
        let d = self.rep_dim();
        let mut out = CMatrix::zeros(d);
        for (&blade, coeff) in x.iter() {
            let mut mat = CMatrix::identity(d);
            for i in 0..self.n {
                if blade & (1 << i) != 0 {
                    mat = mat.mul(&self.generators[i]);
                }
            }
            let (re, im) = coeff.to_f64_parts();
            out = out.add(&mat.scale(Complex64::new(re, im)));
        }
        out
    }

    /// The represented grading element `i^{n/2} G_1 … G_n`.
    pub fn grading_matrix(&self) -> CMatrix {
        self.represent(&crate::clifford::gamma(self.n))
    }

    /// Numeric supertrace `tr(ρ(x) · ρ(γ))`.
    pub fn supertrace(&self, x: &CliffordElement) -> Complex64 {
        self.represent(x).mul(&self.grading_matrix()).trace()
    }
}

/// Largest degree-respecting check: the represented anchors `E_i = -i G_i`
/// are Hermitian. Exposed for the verification suite.
pub fn hermitian_anchor_residual(rep: &MatrixRep) -> f64 {
    let minus_i = Complex64::new(0.0, -1.0);
    let mut worst: f64 = 0.0;
    for i in 1..=rep.dim() {
        let e = rep.generator(i).scale(minus_i);
        worst = worst.max(e.sub(&e.adjoint()).max_abs());
    }
    worst
}
