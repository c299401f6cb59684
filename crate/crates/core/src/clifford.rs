//! Exact Clifford algebra over Gaussian rationals.
//!
//! Generators `e_1 … e_n` obey `e_i e_j + e_j e_i = -2 δ_ij` (the metric is
//! the Euclidean δ in an orthonormal frame, which is all the engine needs at
//! the chosen point in normal coordinates). A basis blade is a strictly
//! ascending product `e_{i1}…e_{ik}` stored as a bit set (`bit i-1` set ⇔
//! `e_i` present), so `n ≤ 62` fits in a `u64` with room to spare. Elements
//! are sparse maps from blade to Gaussian-rational coefficient, kept
//! canonical by removing zero coefficients eagerly.
//!
//! The product of two blades is computed by walking the right factor's
//! generators in ascending order and counting the transpositions needed to
//! sort each one into the accumulated left factor; every repeated generator
//! contracts with a factor `-1`. This costs `O(popcount)` per generator and
//! is exact.

use crate::scalar::{sign_pow, two_pow, GaussRat, Rat};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Largest supported frame dimension (blade bit sets live in a `u64`).
pub const MAX_DIM: usize = 62;

/// Basis blade as a bit set: bit `i-1` set ⇔ generator `e_i` present.
pub type Blade = u64;

/// Multiply two basis blades.
///
/// Returns `(sign, blade)` with `sign ∈ {+1, -1}` such that the product of
/// the ascending generator words equals `sign ·` the ascending word of
/// `blade`. Repeated generators contract via `e_i e_i = -1`.
pub fn blade_product(a: Blade, b: Blade) -> (i32, Blade) {
    let mut acc = a;
    let mut rest = b;
    let mut negative = false;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // Transpositions: move e_j left past every accumulated generator
        // with a strictly larger index.
        let above = acc >> (j + 1);
        if above.count_ones() % 2 == 1 {
            negative = !negative;
        }
        let bit = 1u64 << j;
        if acc & bit != 0 {
            // e_j e_j = -1.
            negative = !negative;
            acc &= !bit;
        } else {
            acc |= bit;
        }
    }
    (if negative { -1 } else { 1 }, acc)
}

/// Number of generators in a blade.
pub fn blade_degree(b: Blade) -> u32 {
    b.count_ones()
}

/// Render a blade for diagnostics, e.g. `e1e2e5`; the empty blade is `1`.
pub fn blade_name(b: Blade) -> String {
    if b == 0 {
        return "1".to_string();
    }
    let mut s = String::new();
    for i in 0..64 {
        if b & (1 << i) != 0 {
            s.push('e');
            s.push_str(&(i + 1).to_string());
        }
    }
    s
}

/// Sparse element of the Clifford algebra in dimension `n`.
///
/// Zero coefficients are removed on every construction and operation, so
/// structural equality (`==`) is semantic equality.
#[derive(Clone, PartialEq, Eq)]
pub struct CliffordElement {
    n: usize,
    terms: BTreeMap<Blade, GaussRat>,
}

impl CliffordElement {
    fn check_dim(n: usize) {
        assert!(
            (2..=MAX_DIM).contains(&n),
            "unsupported frame dimension {n} (need 2 ≤ n ≤ {MAX_DIM})"
        );
    }

    /// The zero element.
    pub fn zero(n: usize) -> Self {
        Self::check_dim(n);
        CliffordElement {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The multiplicative identity.
    pub fn unit(n: usize) -> Self {
        Self::scalar(n, GaussRat::one())
    }

    /// A scalar multiple of the identity.
    pub fn scalar(n: usize, value: GaussRat) -> Self {
        Self::from_blade(n, 0, value)
    }

    /// The generator `e_i` (1-based).
    ///
    /// # Panics
    ///
    /// Panics if `i` is out of `1..=n`.
    pub fn generator(n: usize, i: usize) -> Self {
        assert!((1..=n).contains(&i), "generator index {i} out of 1..={n}");
        Self::from_blade(n, 1 << (i - 1), GaussRat::one())
    }

    /// A single scaled blade.
    ///
    /// # Panics
    ///
    /// Panics if the blade uses generators beyond `n`.
    pub fn from_blade(n: usize, blade: Blade, coeff: GaussRat) -> Self {
        Self::check_dim(n);
        assert!(
            blade < (1u64 << n),
            "blade {} exceeds dimension {n}",
            blade_name(blade)
        );
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(blade, coeff);
        }
        CliffordElement { n, terms }
    }

    /// Frame dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Coefficient of a blade (zero if absent).
    pub fn coeff(&self, blade: Blade) -> GaussRat {
        self.terms.get(&blade).cloned().unwrap_or_else(GaussRat::zero)
    }

    /// Iterate `(blade, coefficient)` pairs in canonical (bit set) order.
    pub fn iter(&self) -> impl Iterator<Item = (&Blade, &GaussRat)> {
        self.terms.iter()
    }

    /// True iff the element has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest blade degree present (0 for the zero element).
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|b| blade_degree(*b)).max().unwrap_or(0)
    }

    fn assert_same_dim(&self, other: &Self) {
        assert!(
            self.n == other.n,
            "mixed frame dimensions {} and {}",
            self.n,
            other.n
        );
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_dim(other);
        let mut terms = self.terms.clone();
        for (blade, coeff) in &other.terms {
            let entry = terms.entry(*blade).or_insert_with(GaussRat::zero);
            *entry += coeff.clone();
        }
        terms.retain(|_, c| !c.is_zero());
        CliffordElement { n: self.n, terms }
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        self.scale(&GaussRat::int(-1))
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: &GaussRat) -> Self {
        if factor.is_zero() {
            return Self::zero(self.n);
        }
        let terms = self
            .terms
            .iter()
            .map(|(b, c)| (*b, c.times(factor)))
            .collect();
        CliffordElement { n: self.n, terms }
    }

    /// Clifford product.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_dim(other);
        let mut terms: BTreeMap<Blade, GaussRat> = BTreeMap::new();
        for (ba, ca) in &self.terms {
            for (bb, cb) in &other.terms {
                let (sign, blade) = blade_product(*ba, *bb);
                let mut coeff = ca.times(cb);
                if sign < 0 {
                    coeff = -coeff;
                }
                let entry = terms.entry(blade).or_insert_with(GaussRat::zero);
                *entry += coeff;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        CliffordElement { n: self.n, terms }
    }

    /// Projection onto blades of one degree.
    pub fn grade(&self, k: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(b, _)| blade_degree(**b) == k)
            .map(|(b, c)| (*b, c.clone()))
            .collect();
        CliffordElement { n: self.n, terms }
    }

    /// Fibre trace: `2^{n/2}` times the coefficient of the empty blade.
    ///
    /// This is the trace in the spinor representation, where every
    /// non-scalar blade is traceless and the identity has trace `2^{n/2}`.
    ///
    /// # Panics
    ///
    /// Panics for odd `n` (no spinor normalisation is defined there).
    pub fn trace(&self) -> GaussRat {
        assert!(self.n % 2 == 0, "trace needs even dimension, got {}", self.n);
        let m = (self.n / 2) as u32;
        self.coeff(0).scale(&two_pow(m))
    }

    /// Supertrace `Str(x) = tr(x · γ)` with `γ` the grading element.
    pub fn supertrace(&self) -> GaussRat {
        self.mul(&gamma(self.n)).trace()
    }
}

impl fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, c)| format!("({})·{}", c, blade_name(*b)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The grading element `γ = i^{n/2} e_1 e_2 … e_n`.
///
/// Satisfies `γ² = 1` and `γ e_i = -e_i γ`; the supertrace of the top blade
/// is `2^{n/2} / i^{n/2}`.
///
/// # Panics
///
/// Panics for odd `n`.
pub fn gamma(n: usize) -> CliffordElement {
    assert!(n % 2 == 0, "grading element needs even dimension, got {n}");
    let m = (n / 2) as u32;
    let i_pow_m = match m % 4 {
        0 => GaussRat::one(),
        1 => GaussRat::i(),
        2 => GaussRat::int(-1),
        _ => -GaussRat::i(),
    };
    let top: Blade = (1u64 << n) - 1;
    CliffordElement::from_blade(n, top, i_pow_m)
}

/// Clifford action of a vector: `c(a) = Σ_i a_i e_i`.
///
/// # Panics
///
/// Panics if `a.len() != n`.
pub fn c_vector(n: usize, a: &[Rat]) -> CliffordElement {
    assert_eq!(a.len(), n, "vector length {} ≠ dimension {n}", a.len());
    let mut out = CliffordElement::zero(n);
    for (i, component) in a.iter().enumerate() {
        if !component.is_zero() {
            out = out.add(&CliffordElement::from_blade(
                n,
                1 << i,
                GaussRat::from_rat(component.clone()),
            ));
        }
    }
    out
}

/// Clifford action of an antisymmetric 3-tensor:
/// `c(T) = (3/2) Σ_{j<l<t} T(e_j,e_l,e_t) e_j e_l e_t`.
pub fn c_threeform(n: usize, t: &ThreeForm) -> CliffordElement {
    assert_eq!(t.dim(), n, "3-form dimension {} ≠ {n}", t.dim());
    let three_halves = GaussRat::ratio(3, 2);
    let mut out = CliffordElement::zero(n);
    for (&(j, l, k), val) in t.iter() {
        let blade = (1u64 << (j - 1)) | (1u64 << (l - 1)) | (1u64 << (k - 1));
        let coeff = three_halves.scale(val);
        out = out.add(&CliffordElement::from_blade(n, blade, coeff));
    }
    out
}

/// Frame conjugation sum `Σ_s e_s · x · e_s`.
///
/// On a blade of degree `k` this equals `(-1)^k (2k - n)` times the blade,
/// which is what collapses the vector-sandwich traces in the density terms.
pub fn conjugation_sum(x: &CliffordElement) -> CliffordElement {
    let n = x.dim();
    let mut out = CliffordElement::zero(n);
    for s in 1..=n {
        let e = CliffordElement::generator(n, s);
        out = out.add(&e.mul(x).mul(&e));
    }
    out
}

/// Closed form of [`conjugation_sum`] on a degree-`k` blade: `(-1)^k (2k-n)`.
pub fn conjugation_eigenvalue(n: usize, k: u32) -> Rat {
    let factor = Rat::from_integer((2 * i64::from(k) - n as i64).into());
    sign_pow(k) * factor
}

/// Antisymmetric 3-tensor stored on strictly increasing index triples.
///
/// Indices are 1-based to match the generator naming `e_1 … e_n`; values on
/// other index orders follow by antisymmetry.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ThreeForm {
    n: usize,
    vals: BTreeMap<(usize, usize, usize), Rat>,
}

impl ThreeForm {
    /// Empty (zero) 3-form in dimension `n`.
    pub fn zero(n: usize) -> Self {
        ThreeForm {
            n,
            vals: BTreeMap::new(),
        }
    }

    /// Frame dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Set `T(e_j, e_l, e_t) = val` for a strictly increasing triple.
    ///
    /// Returns an error string for out-of-range or non-increasing triples
    /// (callers translate it into their own error type).
    pub fn set(&mut self, j: usize, l: usize, t: usize, val: Rat) -> Result<(), String> {
        if !(1 <= j && j < l && l < t && t <= self.n) {
            return Err(format!(
                "triple ({j},{l},{t}) must satisfy 1 ≤ j < l < t ≤ {}",
                self.n
            ));
        }
        if val.is_zero() {
            self.vals.remove(&(j, l, t));
        } else {
            self.vals.insert((j, l, t), val);
        }
        Ok(())
    }

    /// Iterate the stored strictly increasing triples.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Rat)> {
        self.vals.iter()
    }

    /// True iff all components vanish.
    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    /// Evaluate `T(u, v, w)` by full antisymmetric expansion:
    /// `Σ_{j<l<t} T_{jlt} · det [[u_j,u_l,u_t],[v_j,v_l,v_t],[w_j,w_l,w_t]]`.
    pub fn evaluate(&self, u: &[Rat], v: &[Rat], w: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (&(j, l, t), val) in &self.vals {
            let (a, b, c) = (j - 1, l - 1, t - 1);
            let det = det3(
                [&u[a], &u[b], &u[c]],
                [&v[a], &v[b], &v[c]],
                [&w[a], &w[b], &w[c]],
            );
            acc += val * det;
        }
        acc
    }
}

fn det3(r0: [&Rat; 3], r1: [&Rat; 3], r2: [&Rat; 3]) -> Rat {
    r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
}

/// Euclidean pairing `Σ_i a_i b_i` (the metric is δ in the working frame).
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len(), "dot of different lengths");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Determinant of the 4×4 matrix with rows `u, v, w, x` (first four slots).
///
/// This is the pairing of `u*∧v*∧w*∧x*` with the frame volume form in
/// dimension 4, the coefficient appearing in the grading-kind density.
pub fn det4(u: &[Rat], v: &[Rat], w: &[Rat], x: &[Rat]) -> Rat {
    assert!(
        u.len() >= 4 && v.len() >= 4 && w.len() >= 4 && x.len() >= 4,
        "det4 needs at least 4 components"
    );
    let minor = |c: [usize; 3]| {
        det3(
            [&v[c[0]], &v[c[1]], &v[c[2]]],
            [&w[c[0]], &w[c[1]], &w[c[2]]],
            [&x[c[0]], &x[c[1]], &x[c[2]]],
        )
    };
    &u[0] * minor([1, 2, 3]) - &u[1] * minor([0, 2, 3]) + &u[2] * minor([0, 1, 3])
        - &u[3] * minor([0, 1, 2])
}
