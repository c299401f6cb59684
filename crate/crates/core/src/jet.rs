//! First-order jets of scalar functions at the working point.
//!
//! The engine only ever needs a function's value and first spatial
//! derivatives at one point — second derivatives of the conformal factor
//! never survive into the orders that are kept. A [`ScalarJet`] therefore
//! stores `(value, gradient)` where the gradient is *optional*:
//!
//! * `Some(grad)` — value and all first derivatives at the point are known;
//! * `None` — only the value is known, because the quantity is itself a
//!   first derivative (differentiating it again would need second-order
//!   data that is deliberately not tracked).
//!
//! Arithmetic propagates gradients by the product rule where possible and
//! degrades to `None` otherwise. Requesting a derivative of a jet whose
//! gradient is `None` is a hard error ([`JetError::GradientUnavailable`]):
//! the composition bookkeeping is arranged so that this never happens for
//! the orders that are kept, and tripping it means the bookkeeping is wrong.

use crate::scalar::{GaussRat, Rat};

/// A jet operation needed data the jet does not carry.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    /// A spatial derivative was requested from a value-only jet.
    #[error("spatial derivative unavailable: {context}")]
    GradientUnavailable {
        /// Description of the operation that needed the gradient.
        context: String,
    },
}

/// Value and optional first derivatives of a scalar function at a point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScalarJet {
    n: usize,
    value: GaussRat,
    grad: Option<Vec<GaussRat>>,
}

impl ScalarJet {
    /// A constant: value with identically zero gradient.
    pub fn constant(n: usize, value: GaussRat) -> Self {
        ScalarJet {
            n,
            value,
            grad: Some(vec![GaussRat::zero(); n]),
        }
    }

    /// A function known to first order: value and full gradient.
    ///
    /// # Panics
    ///
    /// Panics if `grad.len() != n`.
    pub fn with_gradient(n: usize, value: GaussRat, grad: Vec<GaussRat>) -> Self {
        assert_eq!(grad.len(), n, "gradient length {} ≠ {n}", grad.len());
        ScalarJet {
            n,
            value,
            grad: Some(grad),
        }
    }

    /// A value whose own derivatives are unknown (already a derivative).
    pub fn value_only(n: usize, value: GaussRat) -> Self {
        ScalarJet {
            n,
            value,
            grad: None,
        }
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The value at the point.
    pub fn value(&self) -> &GaussRat {
        &self.value
    }

    /// True iff first derivatives are tracked.
    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// The gradient component `∂_μ` (0-based), if tracked.
    pub fn grad_component(&self, mu: usize) -> Option<&GaussRat> {
        self.grad.as_ref().map(|g| &g[mu])
    }

    /// True iff the value is zero (the gradient may still be nonzero).
    pub fn value_is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// True iff the jet is identically zero to first order.
    pub fn is_zero_jet(&self) -> bool {
        self.value.is_zero()
            && match &self.grad {
                Some(g) => g.iter().all(GaussRat::is_zero),
                None => false,
            }
    }

    fn assert_same_dim(&self, other: &Self) {
        assert_eq!(self.n, other.n, "mixed jet dimensions");
    }

    /// Sum; the gradient survives only if both operands carry one.
    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_dim(other);
        let grad = match (&self.grad, &other.grad) {
            (Some(a), Some(b)) => Some(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.clone() + y.clone())
                    .collect(),
            ),
            _ => None,
        };
        ScalarJet {
            n: self.n,
            value: self.value.clone() + other.value.clone(),
            grad,
        }
    }

    /// Product by the Leibniz rule; degrades to value-only if either
    /// gradient is missing.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_dim(other);
        let value = self.value.times(&other.value);
        let grad = match (&self.grad, &other.grad) {
            (Some(a), Some(b)) => Some(
                a.iter()
                    .zip(b)
                    .map(|(da, db)| da.times(&other.value) + self.value.times(db))
                    .collect(),
            ),
            _ => None,
        };
        ScalarJet {
            n: self.n,
            value,
            grad,
        }
    }

    /// Scale by an exact constant (gradient scales along).
    pub fn scale(&self, factor: &GaussRat) -> Self {
        ScalarJet {
            n: self.n,
            value: self.value.times(factor),
            grad: self
                .grad
                .as_ref()
                .map(|g| g.iter().map(|d| d.times(factor)).collect()),
        }
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        self.scale(&GaussRat::int(-1))
    }

    /// Integer power by the chain rule: `(f^k)' = k f^{k-1} f'`.
    ///
    /// # Panics
    ///
    /// Panics if `exp < 0` and the value is zero.
    pub fn pow(&self, exp: i64) -> Self {
        let value = self.value.pow(exp);
        let grad = self.grad.as_ref().map(|g| {
            let chain = self.value.pow(exp - 1).scale(&Rat::from_integer(exp.into()));
            g.iter().map(|d| d.times(&chain)).collect()
        });
        ScalarJet {
            n: self.n,
            value,
            grad,
        }
    }

    /// Spatial derivative `∂_μ` (0-based): a value-only jet holding
    /// `grad[μ]`, since second derivatives are not tracked.
    ///
    /// # Errors
    ///
    /// [`JetError::GradientUnavailable`] if this jet is itself value-only.
    pub fn deriv(&self, mu: usize, context: &str) -> Result<ScalarJet, JetError> {
        assert!(mu < self.n, "derivative index {mu} out of 0..{}", self.n);
        match &self.grad {
            Some(g) => Ok(ScalarJet::value_only(self.n, g[mu].clone())),
            None => Err(JetError::GradientUnavailable {
                context: context.to_string(),
            }),
        }
    }
}
