//! Graded symbols of (pseudo)differential operators at the working point.
//!
//! A symbol here is a finite sum of terms, each the product of
//!
//! * a scalar coefficient known to first order in `x` (a [`ScalarJet`]),
//! * a constant Clifford factor,
//! * a covector monomial `ξ^α · ‖ξ‖^p` with even `p` (an [`XiMonomial`]),
//! * an optional twisting-endomorphism tag (an [`ETag`]).
//!
//! Terms are bucketed by homogeneity order in `ξ` (polynomial degree plus
//! norm power, so `ξ_μ ‖ξ‖^{-4}` sits at order `-3`), and insertion checks
//! the bucket against the term's actual degree — mixing orders silently is
//! the classic way this kind of calculation goes wrong.
//!
//! [`GradedSymbol::compose`] implements the product expansion
//! `σ(AB) = Σ_α (1/α!) ∂_ξ^α σ(A) · D_x^α σ(B)` with `D_x = -i ∂_x`,
//! computing **only** the requested output orders. The order gating is
//! load-bearing twice over: terms whose coefficients are already spatial
//! derivatives cannot be differentiated again (their jets are value-only),
//! and second `ξ`-derivatives are outside what the term shape tracks. If a
//! requested order would actually need either, composition fails loudly
//! with [`SymbolError::UnsupportedOrder`] / a jet error instead of
//! dropping terms.

use crate::clifford::CliffordElement;
use crate::jet::{JetError, ScalarJet};
use crate::scalar::{GaussRat, Rat};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Failure inside symbol arithmetic; always indicates a bookkeeping bug,
/// never bad user input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    /// A spatial derivative was requested from a value-only coefficient.
    #[error(transparent)]
    Jet(#[from] JetError),
    /// A term was inserted into the wrong homogeneity bucket.
    #[error("term of ξ-degree {degree} inserted at symbol order {order}")]
    Homogeneity {
        /// The bucket the caller asked for.
        order: i64,
        /// The degree the term actually has.
        degree: i64,
    },
    /// A requested composition order needs `|α| ≥ 2` derivative data that
    /// the term representation does not carry and that is not provably zero.
    #[error(
        "composition output order {kept} from input orders ({left}, {right}) \
         would need |α| ≥ 2 derivatives that are not provably absent"
    )]
    UnsupportedOrder {
        /// Requested output order.
        kept: i64,
        /// Order of the left (ξ-differentiated) factor.
        left: i64,
        /// Order of the right (x-differentiated) factor.
        right: i64,
    },
    /// Two twisting-endomorphism factors met in one product.
    #[error("product of two twisting endomorphism factors is not tracked")]
    EndomorphismSquare,
}

/// Twisting-endomorphism factor carried by a term.
///
/// The engine never needs products of two nontrivial endomorphism factors
/// (they cannot appear in the orders that are kept), so the tag algebra is
/// deliberately minimal and refuses `Phi · Phi`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum ETag {
    /// Identity endomorphism of the auxiliary bundle.
    Id,
    /// The single tracked nontrivial endomorphism.
    Phi,
}

impl ETag {
    /// Product of tags.
    pub fn mul(self, other: ETag) -> Result<ETag, SymbolError> {
        match (self, other) {
            (ETag::Id, t) | (t, ETag::Id) => Ok(t),
            (ETag::Phi, ETag::Phi) => Err(SymbolError::EndomorphismSquare),
        }
    }
}

/// Covector monomial `ξ^α ‖ξ‖^p` with even `p` (possibly negative).
#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub struct XiMonomial {
    exps: Vec<u32>,
    norm_pow: i64,
}

impl XiMonomial {
    /// `ξ^α ‖ξ‖^p`.
    ///
    /// # Panics
    ///
    /// Panics if `exps.len() != n` or `p` is odd.
    pub fn new(n: usize, exps: Vec<u32>, norm_pow: i64) -> Self {
        assert_eq!(exps.len(), n, "exponent list length ≠ dimension");
        assert!(norm_pow % 2 == 0, "norm power must be even, got {norm_pow}");
        XiMonomial { exps, norm_pow }
    }

    /// The constant monomial `1`.
    pub fn one(n: usize) -> Self {
        XiMonomial::new(n, vec![0; n], 0)
    }

    /// The coordinate `ξ_μ` (0-based `mu`).
    pub fn coordinate(n: usize, mu: usize) -> Self {
        let mut exps = vec![0; n];
        exps[mu] = 1;
        XiMonomial::new(n, exps, 0)
    }

    /// The pure norm power `‖ξ‖^p`.
    pub fn norm_power(n: usize, p: i64) -> Self {
        XiMonomial::new(n, vec![0; n], p)
    }

    /// Polynomial exponents `α`.
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    /// Norm power `p`.
    pub fn norm_pow(&self) -> i64 {
        self.norm_pow
    }

    /// Homogeneity degree `|α| + p`.
    pub fn degree(&self) -> i64 {
        self.exps.iter().map(|&e| i64::from(e)).sum::<i64>() + self.norm_pow
    }

    /// Product (exponents and norm powers add).
    pub fn mul(&self, other: &Self) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a + b)
            .collect();
        XiMonomial {
            exps,
            norm_pow: self.norm_pow + other.norm_pow,
        }
    }

    /// Partial derivative `∂_{ξ_μ}`: up to two terms,
    /// `α_μ ξ^{α-e_μ} ‖ξ‖^p + p ξ^{α+e_μ} ‖ξ‖^{p-2}`.
    pub fn xi_deriv(&self, mu: usize) -> Vec<(Rat, XiMonomial)> {
        let mut out = Vec::with_capacity(2);
        if self.exps[mu] > 0 {
            let mut exps = self.exps.clone();
            exps[mu] -= 1;
            out.push((
                Rat::from_integer(self.exps[mu].into()),
                XiMonomial {
                    exps,
                    norm_pow: self.norm_pow,
                },
            ));
        }
        if self.norm_pow != 0 {
            let mut exps = self.exps.clone();
            exps[mu] += 1;
            out.push((
                Rat::from_integer(self.norm_pow.into()),
                XiMonomial {
                    exps,
                    norm_pow: self.norm_pow - 2,
                },
            ));
        }
        out
    }

    /// True when all `j`-th and higher `ξ`-derivatives vanish identically
    /// (a plain polynomial of degree `< j`).
    pub fn derivs_vanish_from(&self, j: u32) -> bool {
        self.norm_pow == 0 && self.exps.iter().sum::<u32>() < j
    }

    /// Exact evaluation at a rational covector (nonzero when `p < 0`).
    ///
    /// # Panics
    ///
    /// Panics if `xi.len()` mismatches or `‖ξ‖ = 0` meets a negative power.
    pub fn evaluate(&self, xi: &[Rat]) -> Rat {
        assert_eq!(xi.len(), self.exps.len(), "covector length mismatch");
        let mut acc = Rat::from_integer(1.into());
        for (x, &e) in xi.iter().zip(&self.exps) {
            for _ in 0..e {
                acc *= x;
            }
        }
        if self.norm_pow != 0 {
            let norm2: Rat = xi.iter().map(|x| x * x).sum();
            assert!(
                !norm2.is_zero(),
                "evaluating negative norm power at ξ = 0"
            );
            let half = self.norm_pow / 2;
            let mut pow = Rat::from_integer(1.into());
            let base = if half < 0 { norm2.recip() } else { norm2 };
            for _ in 0..half.unsigned_abs() {
                pow *= &base;
            }
            acc *= pow;
        }
        acc
    }
}

impl fmt::Display for XiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("ξ{}", i + 1)),
                _ => parts.push(format!("ξ{}^{}", i + 1, e)),
            }
        }
        if self.norm_pow != 0 {
            parts.push(format!("‖ξ‖^{}", self.norm_pow));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// One symbol term: `coeff(x) · cliff · ξ^α ‖ξ‖^p · (endomorphism tag)`.
#[derive(Clone, Debug)]
pub struct SymbolTerm {
    /// Scalar coefficient as a 1-jet at the working point.
    pub coeff: ScalarJet,
    /// Constant Clifford factor.
    pub cliff: CliffordElement,
    /// Covector dependence.
    pub xi: XiMonomial,
    /// Twisting-endomorphism factor.
    pub etag: ETag,
}

impl SymbolTerm {
    /// Convenience constructor with the identity tag.
    pub fn new(coeff: ScalarJet, cliff: CliffordElement, xi: XiMonomial) -> Self {
        SymbolTerm {
            coeff,
            cliff,
            xi,
            etag: ETag::Id,
        }
    }

    /// Homogeneity degree of the covector part.
    pub fn degree(&self) -> i64 {
        self.xi.degree()
    }

    /// True when the term is identically zero to first order and can be
    /// dropped without losing derivative information.
    pub fn is_droppable(&self) -> bool {
        self.cliff.is_zero() || self.coeff.is_zero_jet()
    }

    /// Term product: jets multiply by the product rule, Clifford factors
    /// and monomials multiply, tags combine.
    pub fn mul(&self, other: &Self) -> Result<SymbolTerm, SymbolError> {
        Ok(SymbolTerm {
            coeff: self.coeff.mul(&other.coeff),
            cliff: self.cliff.mul(&other.cliff),
            xi: self.xi.mul(&other.xi),
            etag: self.etag.mul(other.etag)?,
        })
    }

    /// Scale by an exact constant.
    pub fn scale(&self, factor: &GaussRat) -> SymbolTerm {
        SymbolTerm {
            coeff: self.coeff.scale(factor),
            cliff: self.cliff.clone(),
            xi: self.xi.clone(),
            etag: self.etag,
        }
    }

    /// All terms of `∂_{ξ_μ}` applied to this term.
    pub fn xi_deriv(&self, mu: usize) -> Vec<SymbolTerm> {
        self.xi
            .xi_deriv(mu)
            .into_iter()
            .map(|(factor, xi)| SymbolTerm {
                coeff: self.coeff.scale(&GaussRat::from_rat(factor)),
                cliff: self.cliff.clone(),
                xi,
                etag: self.etag,
            })
            .collect()
    }

    /// `D_{x_μ} = -i ∂_{x_μ}` applied to this term (only the scalar
    /// coefficient depends on `x`).
    pub fn x_deriv(&self, mu: usize, context: &str) -> Result<SymbolTerm, SymbolError> {
        let d = self.coeff.deriv(mu, context)?;
        Ok(SymbolTerm {
            coeff: d.scale(&-GaussRat::i()),
            cliff: self.cliff.clone(),
            xi: self.xi.clone(),
            etag: self.etag,
        })
    }
}

/// A symbol as a map from homogeneity order to its terms.
#[derive(Clone, Debug)]
pub struct GradedSymbol {
    n: usize,
    orders: BTreeMap<i64, Vec<SymbolTerm>>,
}

impl GradedSymbol {
    /// The zero symbol in dimension `n`.
    pub fn new(n: usize) -> Self {
        GradedSymbol {
            n,
            orders: BTreeMap::new(),
        }
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Insert a term into the bucket `order`.
    ///
    /// # Errors
    ///
    /// [`SymbolError::Homogeneity`] if the term's degree is not `order`.
    pub fn insert_term(&mut self, order: i64, term: SymbolTerm) -> Result<(), SymbolError> {
        if term.degree() != order {
            return Err(SymbolError::Homogeneity {
                order,
                degree: term.degree(),
            });
        }
        if !term.is_droppable() {
            self.orders.entry(order).or_default().push(term);
        }
        Ok(())
    }

    /// The orders that hold at least one term, ascending.
    pub fn orders(&self) -> Vec<i64> {
        self.orders.keys().copied().collect()
    }

    /// Terms at one order (empty slice if none).
    pub fn terms_at(&self, order: i64) -> &[SymbolTerm] {
        self.orders.get(&order).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sum of two symbols.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "mixed symbol dimensions");
        let mut out = self.clone();
        for (order, terms) in &other.orders {
            out.orders.entry(*order).or_default().extend(terms.clone());
        }
        out
    }

    /// Scale every term by an exact constant.
    pub fn scale(&self, factor: &GaussRat) -> Self {
        let orders = self
            .orders
            .iter()
            .map(|(o, ts)| (*o, ts.iter().map(|t| t.scale(factor)).collect()))
            .collect();
        GradedSymbol {
            n: self.n,
            orders,
        }
    }

    /// Compose two symbols, producing **only** the orders in `keep`:
    /// `σ(AB) = Σ_α (1/α!) ∂_ξ^α σ(A) · D_x^α σ(B)`.
    ///
    /// `|α| = 0` lands at `d_A + d_B`, `|α| = 1` at `d_A + d_B - 1`. Any
    /// kept order below that is either provably untouched (the left factor
    /// is a low-degree polynomial in `ξ`, or the right factor is constant
    /// in `x`) or an error — never a silent truncation.
    pub fn compose(&self, other: &Self, keep: &[i64]) -> Result<GradedSymbol, SymbolError> {
        assert_eq!(self.n, other.n, "mixed symbol dimensions");
        let kept: BTreeSet<i64> = keep.iter().copied().collect();
        let mut out = GradedSymbol::new(self.n);
        for (&da, terms_a) in &self.orders {
            for (&db, terms_b) in &other.orders {
                let top = da + db;
                if kept.contains(&top) {
                    for ta in terms_a {
                        for tb in terms_b {
                            out.insert_term(top, ta.mul(tb)?)?;
                        }
                    }
                }
                if kept.contains(&(top - 1)) {
                    for mu in 0..self.n {
                        for ta in terms_a {
                            for da_term in ta.xi_deriv(mu) {
                                for tb in terms_b {
                                    let db_term = tb.x_deriv(
                                        mu,
                                        &format!(
                                            "composition order {} from orders ({da}, {db})",
                                            top - 1
                                        ),
                                    )?;
                                    out.insert_term(top - 1, da_term.mul(&db_term)?)?;
                                }
                            }
                        }
                    }
                }
                // Orders needing |α| ≥ 2: refuse unless provably zero.
                for &k in kept.iter().filter(|&&k| k < top - 1) {
                    let j = (top - k) as u32;
                    let left_trivial = terms_a.iter().all(|t| t.xi.derivs_vanish_from(j));
                    let right_constant = terms_b.iter().all(|t| {
                        t.coeff.has_gradient()
                            && (0..self.n)
                                .all(|mu| t.coeff.grad_component(mu).unwrap().is_zero())
                    });
                    if !(left_trivial || right_constant) {
                        return Err(SymbolError::UnsupportedOrder {
                            kept: k,
                            left: da,
                            right: db,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Evaluate one order at an exact covector, collapsing jets to values.
    ///
    /// Returns the identity-tagged and `Phi`-tagged Clifford parts
    /// separately. Robust against different but equivalent monomial
    /// bookkeeping (e.g. `Σ ξ_i² ↔ ‖ξ‖²`), which structural comparison
    /// is not.
    pub fn evaluate_at(
        &self,
        order: i64,
        xi: &[Rat],
    ) -> (CliffordElement, CliffordElement) {
        let mut id_part = CliffordElement::zero(self.n);
        let mut phi_part = CliffordElement::zero(self.n);
        for term in self.terms_at(order) {
            let weight = term.coeff.value().times(&GaussRat::from_rat(term.xi.evaluate(xi)));
            let piece = term.cliff.scale(&weight);
            match term.etag {
                ETag::Id => id_part = id_part.add(&piece),
                ETag::Phi => phi_part = phi_part.add(&piece),
            }
        }
        (id_part, phi_part)
    }

    /// Total number of stored terms (diagnostics).
    pub fn term_count(&self) -> usize {
        self.orders.values().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn coordinate_vector(n: usize, vals: [i64; 4]) -> Vec<Rat> {
        (0..n).map(|i| int(vals[i])).collect()
    }

    #[test]
    fn monomial_degree_counts_norm_power() {
        let m = XiMonomial::new(4, vec![1, 0, 0, 0], -4);
        assert_eq!(m.degree(), -3);
        assert_eq!(XiMonomial::one(4).degree(), 0);
    }

    #[test]
    fn monomial_derivative_has_both_branches() {
        // ∂_1 (ξ1² ‖ξ‖^{-4}) = 2 ξ1 ‖ξ‖^{-4} - 4 ξ1³ ‖ξ‖^{-6}.
        let m = XiMonomial::new(4, vec![2, 0, 0, 0], -4);
        let d = m.xi_deriv(0);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].0, int(2));
        assert_eq!(d[0].1, XiMonomial::new(4, vec![1, 0, 0, 0], -4));
        assert_eq!(d[1].0, int(-4));
        assert_eq!(d[1].1, XiMonomial::new(4, vec![3, 0, 0, 0], -6));
    }

    #[test]
    fn monomial_evaluation_matches_by_hand() {
        let m = XiMonomial::new(4, vec![1, 1, 0, 0], -2);
        let xi = coordinate_vector(4, [1, 2, 0, 2]);
        // ξ1 ξ2 / ‖ξ‖² = 2 / 9.
        assert_eq!(m.evaluate(&xi), ratio(2, 9));
    }

    #[test]
    fn homogeneity_violation_is_rejected() {
        let mut s = GradedSymbol::new(4);
        let term = SymbolTerm::new(
            ScalarJet::constant(4, GaussRat::one()),
            CliffordElement::unit(4),
            XiMonomial::norm_power(4, -2),
        );
        let err = s.insert_term(-3, term).unwrap_err();
        assert!(matches!(
            err,
            SymbolError::Homogeneity {
                order: -3,
                degree: -2
            }
        ));
    }

    #[test]
    fn endomorphism_tags_refuse_squares() {
        assert_eq!(ETag::Id.mul(ETag::Phi).unwrap(), ETag::Phi);
        assert_eq!(ETag::Phi.mul(ETag::Id).unwrap(), ETag::Phi);
        assert!(matches!(
            ETag::Phi.mul(ETag::Phi),
            Err(SymbolError::EndomorphismSquare)
        ));
    }

    /// The scalar composition `(f⁴‖ξ‖²) ∘ (f⁻⁴‖ξ‖⁻²)`: the top order is 1
    /// and the subleading order reproduces the product-rule cross term.
    #[test]
    fn compose_reproduces_scalar_cross_term() {
        let n = 4;
        let f = ScalarJet::with_gradient(
            n,
            GaussRat::one(),
            vec![
                GaussRat::int(2),
                GaussRat::int(-3),
                GaussRat::zero(),
                GaussRat::zero(),
            ],
        );
        let mut a = GradedSymbol::new(n);
        a.insert_term(
            2,
            SymbolTerm::new(f.pow(4), CliffordElement::unit(n), XiMonomial::norm_power(n, 2)),
        )
        .unwrap();
        let mut b = GradedSymbol::new(n);
        b.insert_term(
            -2,
            SymbolTerm::new(
                f.pow(-4),
                CliffordElement::unit(n),
                XiMonomial::norm_power(n, -2),
            ),
        )
        .unwrap();

        let c = a.compose(&b, &[0, -1]).unwrap();
        let xi = coordinate_vector(n, [1, 1, 1, 0]);

        // Order 0: exactly 1.
        let (id0, _) = c.evaluate_at(0, &xi);
        assert_eq!(id0, CliffordElement::unit(n));

        // Order -1: Σ_μ ∂_ξμ(f⁴‖ξ‖²) · (-i) ∂_μ(f⁻⁴) ‖ξ‖⁻² evaluated at
        // f = 1, ∇f = (2,-3,0,0): 8i (ξ1·2 + ξ2·(-3)) ‖ξ‖⁻².
        let (id1, _) = c.evaluate_at(-1, &xi);
        let expected = GaussRat::i()
            .scale(&int(8))
            .times(&GaussRat::from_rat(int(2) - int(3)))
            .scale(&ratio(1, 3));
        assert_eq!(id1, CliffordElement::scalar(n, expected));
    }

    #[test]
    fn compose_refuses_untracked_second_derivatives() {
        let n = 4;
        let f = ScalarJet::with_gradient(
            n,
            GaussRat::int(2),
            vec![
                GaussRat::one(),
                GaussRat::zero(),
                GaussRat::zero(),
                GaussRat::zero(),
            ],
        );
        let mut a = GradedSymbol::new(n);
        a.insert_term(
            -2,
            SymbolTerm::new(
                ScalarJet::constant(n, GaussRat::one()),
                CliffordElement::unit(n),
                XiMonomial::norm_power(n, -2),
            ),
        )
        .unwrap();
        let mut b = GradedSymbol::new(n);
        b.insert_term(
            0,
            SymbolTerm::new(f, CliffordElement::unit(n), XiMonomial::one(n)),
        )
        .unwrap();
        // Keeping order -4 needs ∂²_ξ of ‖ξ‖⁻² against an x-dependent
        // factor: must be refused, not silently dropped.
        let err = a.compose(&b, &[-4]).unwrap_err();
        assert!(matches!(err, SymbolError::UnsupportedOrder { kept: -4, .. }));
        // But the same request against an x-constant factor is fine (zero).
        let mut c = GradedSymbol::new(n);
        c.insert_term(
            0,
            SymbolTerm::new(
                ScalarJet::constant(n, GaussRat::int(3)),
                CliffordElement::unit(n),
                XiMonomial::one(n),
            ),
        )
        .unwrap();
        let composed = a.compose(&c, &[-4]).unwrap();
        assert_eq!(composed.term_count(), 0);
    }

    #[test]
    fn x_derivative_of_derived_coefficient_fails_loudly() {
        let n = 4;
        let df = ScalarJet::value_only(n, GaussRat::int(5));
        let mut a = GradedSymbol::new(n);
        a.insert_term(
            1,
            SymbolTerm::new(
                ScalarJet::constant(n, GaussRat::one()),
                CliffordElement::unit(n),
                XiMonomial::coordinate(n, 0),
            ),
        )
        .unwrap();
        let mut b = GradedSymbol::new(n);
        b.insert_term(
            0,
            SymbolTerm::new(df, CliffordElement::unit(n), XiMonomial::one(n)),
        )
        .unwrap();
        let err = a.compose(&b, &[0]).unwrap_err();
        assert!(matches!(err, SymbolError::Jet(_)));
    }
}
