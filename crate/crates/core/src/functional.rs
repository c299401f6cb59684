//! Residue-density assembly for rescaled Dirac-type operators.
//!
//! This module sits at the top of the computational stack. A
//! [`PointData`] fixes everything the calculation sees at one point in
//! normal coordinates: the frame dimension `n = 2m`, a nonvanishing
//! conformal factor `f` as an exact 1-jet, three covectors `u, v, w`,
//! and one of four perturbations `A` of the Dirac operator. From that
//! the module builds the symbols of `f(D+A)f` and of its square,
//! inverts the square to a parametrix, raises the parametrix to the
//! power `-2m`, composes with the first power, and reads off the degree
//! `-2m` part of the symbol of `c(u)c(v)c(w)·(f(D+A)f)^{1-2m}`.
//! Tracing that part and averaging it over the unit cosphere yields the
//! residue density — the pointwise integrand of the spectral-torsion
//! functional — broken down term by term under stable labels.
//!
//! Two assembly modes exist because the derivation this engine audits
//! states its zeroth-order symbol without the commutator term `f·c(df)`
//! that direct operator composition produces. [`SymbolMode::Paper`]
//! follows the stated expansions line by line, keeping the subleading
//! power symbol split into its displayed pieces (`II-a` … `II-f`);
//! [`SymbolMode::Derived`] recomputes the power symbol by iterated
//! composition and includes the commutator term. The [`ledger`]
//! tabulates both against the printed per-term values and the closing
//! closed forms, with exact differences — the deliverable is the
//! comparison itself, not an assertion that the columns agree.
//!
//! Everything is exact Gaussian-rational arithmetic. Per-term density
//! values are normalized by `tr[id]·Vol(S^{n-1})`; floats appear only
//! in the final numeric conversion where `π` is substituted.

use std::f64::consts::PI;

use num::Zero;
use thiserror::Error;

use crate::clifford::{c_threeform, c_vector, det4, dot, gamma, CliffordElement, ThreeForm};
use crate::jet::{JetError, ScalarJet};
use crate::scalar::{two_pow, GaussRat, Rat};
use crate::sphere;
use crate::symbol::{ETag, GradedSymbol, SymbolError, SymbolTerm, XiMonomial};

/// Failure while assembling a density or ledger.
///
/// `Input` means the point description itself is unusable (caller
/// error); `Internal` wraps a violated symbol-calculus invariant, which
/// is a bug in the engine rather than in the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// The point data fails validation.
    #[error("invalid point data: {0}")]
    Input(String),
    /// Symbol arithmetic violated one of its own contracts.
    #[error("internal symbol-calculus invariant violated: {0}")]
    Internal(#[from] SymbolError),
}

impl From<JetError> for EngineError {
    fn from(e: JetError) -> Self {
        EngineError::Internal(SymbolError::Jet(e))
    }
}

/// Which perturbation `A` the rescaled operator `f(D+A)f` carries.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PerturbationKind {
    /// `A = c(T)` for an antisymmetric 3-tensor `T`.
    Torsion,
    /// `A = i·c(X)` for a covector `X`.
    ImaginaryVector,
    /// `A = c(X)·γ` for a covector `X`.
    GradingVector,
    /// `A = γ ⊗ Φ` for a self-adjoint endomorphism `Φ` of an auxiliary
    /// bundle, tracked through its trace and the bundle rank only.
    Twisted,
}

impl PerturbationKind {
    /// Stable wire name, as used in input and report files.
    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationKind::Torsion => "torsion",
            PerturbationKind::ImaginaryVector => "imaginary-vector",
            PerturbationKind::GradingVector => "grading-vector",
            PerturbationKind::Twisted => "twisted",
        }
    }

    /// Parse a wire name.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "torsion" => Some(PerturbationKind::Torsion),
            "imaginary-vector" => Some(PerturbationKind::ImaginaryVector),
            "grading-vector" => Some(PerturbationKind::GradingVector),
            "twisted" => Some(PerturbationKind::Twisted),
            _ => None,
        }
    }
}

/// How the negative-power symbol and the zeroth-order symbol are built.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SymbolMode {
    /// Follow the audited derivation's displayed expansions verbatim:
    /// labeled subleading pieces, zeroth-order symbol `f²A` with no
    /// commutator term.
    Paper,
    /// Recompute by iterated symbol composition: the power symbol comes
    /// from composing the parametrix with itself `m` times, and the
    /// zeroth-order symbol gains the commutator term `f·c(df)`.
    Derived,
}

impl SymbolMode {
    /// Stable wire name.
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolMode::Paper => "paper",
            SymbolMode::Derived => "derived",
        }
    }

    /// Parse a wire name (`"both"` is handled a level up).
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(SymbolMode::Paper),
            "derived" => Some(SymbolMode::Derived),
            _ => None,
        }
    }
}

/// Which power of `f` feeds the gradient pattern in the closing formula
/// for the grading-vector kind.
///
/// The audited closing statement and its own proof disagree on this
/// (`f³` versus `f`), so the ledger evaluates both; the selected
/// variant heads the comparison and the other is tabulated alongside.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GradientArg {
    /// Gradient pattern applied to `f`.
    F,
    /// Gradient pattern applied to `f³`.
    FCubed,
}

impl GradientArg {
    /// Stable wire name.
    pub fn as_str(self) -> &'static str {
        match self {
            GradientArg::F => "f",
            GradientArg::FCubed => "f3",
        }
    }

    /// Parse a wire name.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "f" => Some(GradientArg::F),
            "f3" => Some(GradientArg::FCubed),
            _ => None,
        }
    }

    fn other(self) -> Self {
        match self {
            GradientArg::F => GradientArg::FCubed,
            GradientArg::FCubed => GradientArg::F,
        }
    }
}

/// Everything the density computation sees at one point.
///
/// The frame is orthonormal (`g = δ`) and all connection data vanishes
/// at the point, as normal coordinates arrange; what remains is the
/// value and gradient of `f`, the three covectors the functional is
/// evaluated on, and the perturbation data for the chosen kind.
#[derive(Clone, Debug)]
pub struct PointData {
    /// Frame dimension `n = 2m` (even, `4 ≤ n ≤ 16`).
    pub n: usize,
    /// Which perturbation the operator carries.
    pub kind: PerturbationKind,
    /// Conformal factor as a 1-jet: nonzero value plus full gradient.
    pub f: ScalarJet,
    /// First covector slot of the functional.
    pub u: Vec<Rat>,
    /// Second covector slot.
    pub v: Vec<Rat>,
    /// Third covector slot.
    pub w: Vec<Rat>,
    /// Covector `X` (required by the vector kinds, ignored otherwise).
    pub x_vector: Option<Vec<Rat>>,
    /// Antisymmetric 3-tensor (torsion kind; `None` means zero).
    pub torsion: Option<ThreeForm>,
    /// `tr_E(Φ)` for the twisted kind.
    pub phi_trace: GaussRat,
    /// Rank of the auxiliary bundle (twisted kind; `1` otherwise).
    pub dim_e: u32,
    /// Gradient-argument variant for the grading-kind closing formula.
    pub gradient_arg: GradientArg,
}

impl PointData {
    /// Half the dimension.
    pub fn m(&self) -> usize {
        self.n / 2
    }

    /// `tr[id] = 2^m · dim_E`, the trace of the identity on the full
    /// twisted spinor space.
    pub fn trace_normalizer(&self) -> Rat {
        two_pow(self.m() as u32) * Rat::from_integer(self.dim_e.into())
    }

    /// Check internal consistency; every public entry point calls this.
    ///
    /// # Errors
    ///
    /// Returns [`EngineError::Input`] describing the first violated
    /// requirement.
    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |msg: String| Err(EngineError::Input(msg));
        if self.n % 2 != 0 || !(4..=16).contains(&self.n) {
            return fail(format!(
                "dimension must be even and between 4 and 16, got {}",
                self.n
            ));
        }
        if self.f.dim() != self.n {
            return fail(format!(
                "conformal-factor jet lives in dimension {}, point in {}",
                self.f.dim(),
                self.n
            ));
        }
        if self.f.value_is_zero() {
            return fail("conformal factor must be nonzero at the point".into());
        }
        if !self.f.has_gradient() {
            return fail("conformal factor needs a full gradient".into());
        }
        for (name, vec) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            if vec.len() != self.n {
                return fail(format!(
                    "covector {name} has {} components, expected {}",
                    vec.len(),
                    self.n
                ));
            }
        }
        match self.kind {
            PerturbationKind::Torsion => {
                if let Some(t) = &self.torsion {
                    if t.dim() != self.n {
                        return fail(format!(
                            "3-tensor dimension {} does not match the point dimension {}",
                            t.dim(),
                            self.n
                        ));
                    }
                }
            }
            PerturbationKind::ImaginaryVector | PerturbationKind::GradingVector => {
                match &self.x_vector {
                    None => {
                        return fail(format!(
                            "kind '{}' requires the covector X",
                            self.kind.as_str()
                        ))
                    }
                    Some(x) if x.len() != self.n => {
                        return fail(format!(
                            "covector X has {} components, expected {}",
                            x.len(),
                            self.n
                        ))
                    }
                    Some(_) => {}
                }
            }
            PerturbationKind::Twisted => {
                if self.dim_e == 0 {
                    return fail("auxiliary bundle rank must be at least 1".into());
                }
            }
        }
        Ok(())
    }
}

/// The Clifford part of the perturbation `A` together with its
/// endomorphism tag (`Phi` only for the twisted kind).
pub fn perturbation(p: &PointData) -> Result<(CliffordElement, ETag), EngineError> {
    p.validate()?;
    let n = p.n;
    Ok(match p.kind {
        PerturbationKind::Torsion => {
            let cliff = match &p.torsion {
                Some(t) => c_threeform(n, t),
                None => CliffordElement::zero(n),
            };
            (cliff, ETag::Id)
        }
        PerturbationKind::ImaginaryVector => {
            let x = p.x_vector.as_ref().expect("validated");
            (c_vector(n, x).scale(&GaussRat::i()), ETag::Id)
        }
        PerturbationKind::GradingVector => {
            let x = p.x_vector.as_ref().expect("validated");
            (c_vector(n, x).mul(&gamma(n)), ETag::Id)
        }
        PerturbationKind::Twisted => (gamma(n), ETag::Phi),
    })
}

/// One named building block of a symbol, kept separate so the assembled
/// density can be reported term by term.
#[derive(Clone, Debug)]
pub struct LabeledSymbol {
    /// Stable piece name (`"sigma1"`, `"leading"`, `"II-a"`, …).
    pub label: &'static str,
    /// The piece itself.
    pub sym: GradedSymbol,
}

fn labeled(label: &'static str, sym: GradedSymbol) -> LabeledSymbol {
    LabeledSymbol { label, sym }
}

/// Clifford vector with Gaussian-rational components (the `Rat`-entry
/// constructor covers the input covectors; gradients of `f` may carry
/// imaginary parts).
fn c_vector_g(n: usize, comps: &[GaussRat]) -> CliffordElement {
    let mut out = CliffordElement::zero(n);
    for (i, comp) in comps.iter().enumerate() {
        if !comp.is_zero() {
            out = out.add(&CliffordElement::generator(n, i + 1).scale(comp));
        }
    }
    out
}

/// Gradient components of a jet (caller guarantees presence).
fn gradient_components(jet: &ScalarJet) -> Vec<GaussRat> {
    (0..jet.dim())
        .map(|mu| {
            jet.grad_component(mu)
                .expect("gradient presence checked by validation")
                .clone()
        })
        .collect()
}

/// The pieces of the symbol of the first power `f(D+A)f`.
///
/// * `"sigma1"` — `i f² c(ξ)`, one term per coordinate.
/// * `"sigma0-main"` — `f² A` (the connection part vanishes at the
///   point).
/// * `"sigma0-correction"` — `f·c(df)`, the commutator term produced by
///   composing the multiplication operators with `D`; present only in
///   [`SymbolMode::Derived`].
pub fn first_order_pieces(
    p: &PointData,
    mode: SymbolMode,
) -> Result<Vec<LabeledSymbol>, EngineError> {
    p.validate()?;
    let n = p.n;
    let (a_cliff, a_tag) = perturbation(p)?;
    let mut out = Vec::new();

    let mut s1 = GradedSymbol::new(n);
    let if2 = p.f.mul(&p.f).scale(&GaussRat::i());
    for mu in 0..n {
        s1.insert_term(
            1,
            SymbolTerm::new(
                if2.clone(),
                CliffordElement::generator(n, mu + 1),
                XiMonomial::coordinate(n, mu),
            ),
        )?;
    }
    out.push(labeled("sigma1", s1));

    let mut s0 = GradedSymbol::new(n);
    s0.insert_term(
        0,
        SymbolTerm {
            coeff: p.f.mul(&p.f),
            cliff: a_cliff,
            xi: XiMonomial::one(n),
            etag: a_tag,
        },
    )?;
    out.push(labeled("sigma0-main", s0));

    if mode == SymbolMode::Derived {
        let mut s0c = GradedSymbol::new(n);
        for mu in 0..n {
            let coeff = p.f.mul(&p.f.deriv(mu, "zeroth-order commutator term")?);
            s0c.insert_term(
                0,
                SymbolTerm::new(
                    coeff,
                    CliffordElement::generator(n, mu + 1),
                    XiMonomial::one(n),
                ),
            )?;
        }
        out.push(labeled("sigma0-correction", s0c));
    }
    Ok(out)
}

/// Symbol of the squared operator `(f(D+A)f)²` at the point: order 2 is
/// `f⁴‖ξ‖²`, order 1 is
/// `i f⁴ (c(e_μ)A + A c(e_μ)) ξ_μ + 3i f³ c(df) c(ξ) + i f³ c(ξ) c(df)`.
///
/// Orders 0 and below never reach the degree `-2m` trace pipeline and
/// are not tracked. The expansion is what direct operator composition
/// gives; it is independent of [`SymbolMode`].
pub fn square_symbol(p: &PointData) -> Result<GradedSymbol, EngineError> {
    p.validate()?;
    let n = p.n;
    let (a_cliff, a_tag) = perturbation(p)?;
    let c_df = c_vector_g(n, &gradient_components(&p.f));
    let mut sym = GradedSymbol::new(n);

    sym.insert_term(
        2,
        SymbolTerm::new(p.f.pow(4), CliffordElement::unit(n), XiMonomial::norm_power(n, 2)),
    )?;

    let if4 = p.f.pow(4).scale(&GaussRat::i());
    let i3f3 = p.f.pow(3).scale(&GaussRat::int(3).times_i());
    let if3 = p.f.pow(3).scale(&GaussRat::i());
    for mu in 0..n {
        let e_mu = CliffordElement::generator(n, mu + 1);
        let xi_mu = XiMonomial::coordinate(n, mu);
        sym.insert_term(
            1,
            SymbolTerm {
                coeff: if4.clone(),
                cliff: e_mu.mul(&a_cliff).add(&a_cliff.mul(&e_mu)),
                xi: xi_mu.clone(),
                etag: a_tag,
            },
        )?;
        sym.insert_term(
            1,
            SymbolTerm::new(i3f3.clone(), c_df.mul(&e_mu), xi_mu.clone()),
        )?;
        sym.insert_term(1, SymbolTerm::new(if3.clone(), e_mu.mul(&c_df), xi_mu))?;
    }
    Ok(sym)
}

/// Parametrix of the squared operator: orders `-2` and `-3`.
///
/// `q₋₂ = f⁻⁴‖ξ‖⁻²` inverts the leading symbol, and `q₋₃` is forced by
/// requiring the composition `p ∘ q` to vanish at order `-1`:
/// `q₋₃ = -q₋₂ · (p₁ q₋₂ + Σ_μ ∂_{ξ_μ} p₂ · D_{x_μ} q₋₂)`.
pub fn parametrix(p: &PointData, square: &GradedSymbol) -> Result<GradedSymbol, EngineError> {
    let n = p.n;
    let q2_term = SymbolTerm::new(
        p.f.pow(-4),
        CliffordElement::unit(n),
        XiMonomial::norm_power(n, -2),
    );
    let mut q2_sym = GradedSymbol::new(n);
    q2_sym.insert_term(-2, q2_term.clone())?;

    let remainder = square.compose(&q2_sym, &[-1])?;

    let mut q = GradedSymbol::new(n);
    q.insert_term(-2, q2_term.clone())?;
    let minus_one = GaussRat::int(-1);
    for term in remainder.terms_at(-1) {
        q.insert_term(-3, q2_term.mul(term)?.scale(&minus_one))?;
    }
    Ok(q)
}

/// The labeled pieces of the `-2m`-power symbol
/// `σ((f(D+A)f)^{-2m})` at orders `-2m` and `-2m-1`.
///
/// [`SymbolMode::Paper`] assembles the displayed expansion directly:
/// the leading term plus six subleading pieces under their stated
/// labels. [`SymbolMode::Derived`] iterates
/// `S_{k+1} = q ∘ S_k` on the parametrix, keeping orders
/// `-2(k+1)` and `-2(k+1)-1`, and returns the two orders as
/// `"leading"` / `"subleading"`. The two routes agree exactly — the
/// verification suite checks it — but the derived route cannot name
/// individual pieces.
pub fn power_pieces(p: &PointData, mode: SymbolMode) -> Result<Vec<LabeledSymbol>, EngineError> {
    p.validate()?;
    match mode {
        SymbolMode::Paper => stated_power_pieces(p),
        SymbolMode::Derived => iterated_power_pieces(p),
    }
}

fn stated_power_pieces(p: &PointData) -> Result<Vec<LabeledSymbol>, EngineError> {
    let n = p.n;
    let m = p.m() as i64;
    let (a_cliff, a_tag) = perturbation(p)?;
    let c_df = c_vector_g(n, &gradient_components(&p.f));
    let f2 = p.f.value().times(p.f.value());
    let c_df3 = c_vector_g(
        n,
        &gradient_components(&p.f)
            .iter()
            .map(|g| g.times(&f2).scale(&Rat::from_integer(3.into())))
            .collect::<Vec<_>>(),
    );
    let mut out = Vec::new();

    let mut lead = GradedSymbol::new(n);
    lead.insert_term(
        -2 * m,
        SymbolTerm::new(
            p.f.pow(-4 * m),
            CliffordElement::unit(n),
            XiMonomial::norm_power(n, -2 * m),
        ),
    )?;
    out.push(labeled("leading", lead));

    let sub = -2 * m - 1;
    let xi_tail = |mu: usize| {
        let mut exps = vec![0u32; n];
        exps[mu] = 1;
        XiMonomial::new(n, exps, -2 * m - 2)
    };
    let neg_im = GaussRat::int(-m).times_i();

    // II-a / II-b: -i m f^{-4m} ‖ξ‖^{-2m-2} Σ_μ ξ_μ (c(e_μ)A | A c(e_μ)).
    let f_4m = p.f.pow(-4 * m).scale(&neg_im);
    let mut ii_a = GradedSymbol::new(n);
    let mut ii_b = GradedSymbol::new(n);
    for mu in 0..n {
        let e_mu = CliffordElement::generator(n, mu + 1);
        ii_a.insert_term(
            sub,
            SymbolTerm {
                coeff: f_4m.clone(),
                cliff: e_mu.mul(&a_cliff),
                xi: xi_tail(mu),
                etag: a_tag,
            },
        )?;
        ii_b.insert_term(
            sub,
            SymbolTerm {
                coeff: f_4m.clone(),
                cliff: a_cliff.mul(&e_mu),
                xi: xi_tail(mu),
                etag: a_tag,
            },
        )?;
    }
    out.push(labeled("II-a", ii_a));
    out.push(labeled("II-b", ii_b));

    // II-c: -i m f^{-4m-3} ‖ξ‖^{-2m-2} c(d(f³)) c(ξ).
    let mut ii_c = GradedSymbol::new(n);
    let coeff_c = p.f.pow(-4 * m - 3).scale(&neg_im);
    for s in 0..n {
        ii_c.insert_term(
            sub,
            SymbolTerm::new(
                coeff_c.clone(),
                c_df3.mul(&CliffordElement::generator(n, s + 1)),
                xi_tail(s),
            ),
        )?;
    }
    out.push(labeled("II-c", ii_c));

    // II-d: -i m f^{-4m-1} ‖ξ‖^{-2m-2} c(ξ) c(df).
    let mut ii_d = GradedSymbol::new(n);
    let coeff_d = p.f.pow(-4 * m - 1).scale(&neg_im);
    for s in 0..n {
        ii_d.insert_term(
            sub,
            SymbolTerm::new(
                coeff_d.clone(),
                CliffordElement::generator(n, s + 1).mul(&c_df),
                xi_tail(s),
            ),
        )?;
    }
    out.push(labeled("II-d", ii_d));

    // II-e: 2i m f^{-4m+4} ‖ξ‖^{-2m-2} Σ_μ ξ_μ ∂_μ(f^{-4}) — the piece
    // the parametrix correction q₋₃ feeds into the power.
    let mut ii_e = GradedSymbol::new(n);
    let f_em4 = p.f.pow(-4);
    for mu in 0..n {
        let coeff = p
            .f
            .pow(-4 * m + 4)
            .mul(&f_em4.deriv(mu, "parametrix gradient piece")?)
            .scale(&GaussRat::int(2 * m).times_i());
        ii_e.insert_term(
            sub,
            SymbolTerm::new(coeff, CliffordElement::unit(n), xi_tail(mu)),
        )?;
    }
    out.push(labeled("II-e", ii_e));

    // II-f: the iterated-composition cross sum,
    // -2i Σ_{k=0}^{m-2} (-m+k+1) f^{-4m+4} ‖ξ‖^{-2m-2} Σ_μ ξ_μ ∂_μ(f^{-4}).
    let cross: i64 = (0..=m - 2).map(|k| -m + k + 1).sum();
    let mut ii_f = GradedSymbol::new(n);
    for mu in 0..n {
        let coeff = p
            .f
            .pow(-4 * m + 4)
            .mul(&f_em4.deriv(mu, "cross-sum gradient piece")?)
            .scale(&GaussRat::int(-2 * cross).times_i());
        ii_f.insert_term(
            sub,
            SymbolTerm::new(coeff, CliffordElement::unit(n), xi_tail(mu)),
        )?;
    }
    out.push(labeled("II-f", ii_f));

    Ok(out)
}

fn iterated_power_pieces(p: &PointData) -> Result<Vec<LabeledSymbol>, EngineError> {
    let square = square_symbol(p)?;
    let q = parametrix(p, &square)?;
    let m = p.m() as i64;

    let mut power = q.clone();
    for k in 1..p.m() as i64 {
        let top = -2 * (k + 1);
        power = q.compose(&power, &[top, top - 1])?;
    }

    let split = |order: i64| -> Result<GradedSymbol, EngineError> {
        let mut sym = GradedSymbol::new(p.n);
        for term in power.terms_at(order) {
            sym.insert_term(order, term.clone())?;
        }
        Ok(sym)
    };
    Ok(vec![
        labeled("leading", split(-2 * m)?),
        labeled("subleading", split(-2 * m - 1)?),
    ])
}

/// Density row label for a (power piece, first-order piece) pairing; a
/// pairing whose orders cannot reach `-2m` gets `None` and is skipped.
fn row_label(power: &str, first: &str) -> Option<&'static str> {
    match (power, first) {
        ("leading", "sigma0-main") => Some("I"),
        ("leading", "sigma0-correction") => Some("I-df"),
        ("leading", "sigma1") => Some("III"),
        ("subleading", "sigma1") => Some("II"),
        ("II-a", "sigma1") => Some("II-a"),
        ("II-b", "sigma1") => Some("II-b"),
        ("II-c", "sigma1") => Some("II-c"),
        ("II-d", "sigma1") => Some("II-d"),
        ("II-e", "sigma1") => Some("II-e"),
        ("II-f", "sigma1") => Some("II-f"),
        _ => None,
    }
}

/// Canonical row order across both modes.
const ROW_ORDER: [&str; 10] = [
    "I", "I-df", "II", "II-a", "II-b", "II-c", "II-d", "II-e", "II-f", "III",
];

fn describe(label: &str) -> &'static str {
    match label {
        "I" => "leading power symbol against the zeroth-order factor",
        "I-df" => "leading power symbol against the commutator correction f c(df)",
        "II" => "subleading power symbol against the first-order factor",
        "II-a" => "subleading piece sum_mu xi_mu c(e_mu) A against the first-order factor",
        "II-b" => "subleading piece sum_mu xi_mu A c(e_mu) against the first-order factor",
        "II-c" => "subleading piece carrying c(d(f^3)) c(xi)",
        "II-d" => "subleading piece carrying c(xi) c(df)",
        "II-e" => "subleading piece inherited from the parametrix correction",
        "II-f" => "subleading piece from the iterated-composition cross sum",
        "III" => "xi-derivative of the leading symbol against the x-derivative of the first-order factor",
        _ => "",
    }
}

/// One named contribution to the residue density, normalized by
/// `tr[id]·Vol(S^{n-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TermRow {
    /// Stable label (`"I"`, `"II-a"`, …, `"III"`).
    pub label: String,
    /// What the row is, in words.
    pub description: String,
    /// Exact normalized value.
    pub value: GaussRat,
}

/// The assembled residue density at a point, term by term.
#[derive(Clone, Debug)]
pub struct DensityReport {
    /// Perturbation kind the density was computed for.
    pub kind: PerturbationKind,
    /// Assembly mode.
    pub mode: SymbolMode,
    /// Frame dimension.
    pub n: usize,
    /// Named rows in canonical order; values normalized by
    /// `tr[id]·Vol(S^{n-1})`.
    pub terms: Vec<TermRow>,
    /// Sum of the rows (same normalization).
    pub total: GaussRat,
    /// Total in units of `Vol(S^{n-1})` (multiplied back by `tr[id]`).
    pub total_vol_units: GaussRat,
    /// Total in units of `π^m` (volume substituted exactly).
    pub total_pi_units: GaussRat,
    /// The power of `π` the previous field is measured in.
    pub pi_power: u32,
    /// Real part of the total with `π` substituted numerically.
    pub numeric_re: f64,
    /// Imaginary part of the total with `π` substituted numerically.
    pub numeric_im: f64,
}

impl DensityReport {
    /// Value of a named row (zero for a label this mode does not emit).
    pub fn row(&self, label: &str) -> GaussRat {
        self.terms
            .iter()
            .find(|t| t.label == label)
            .map(|t| t.value.clone())
            .unwrap_or_else(GaussRat::zero)
    }
}

/// Compute the residue density of `c(u)c(v)c(w)·(f(D+A)f)^{1-2m}` at
/// the point, broken into named rows.
///
/// Every (power piece, first-order piece) pairing that can land at
/// degree `-2m` is composed, traced against `c(u)c(v)c(w)`, and
/// averaged over the unit cosphere. Twisted-kind terms carry their
/// endomorphism tag through the composition: identity-tagged terms
/// trace to `dim_E`, `Φ`-tagged ones to `tr_E(Φ)`; both are divided by
/// `tr[id] = 2^m·dim_E` as part of the normalization.
///
/// # Errors
///
/// [`EngineError::Input`] for unusable point data,
/// [`EngineError::Internal`] if symbol bookkeeping breaks (a bug).
pub fn density(p: &PointData, mode: SymbolMode) -> Result<DensityReport, EngineError> {
    p.validate()?;
    let n = p.n;
    let m = p.m();
    let order = -2 * (m as i64);

    let uvw = c_vector(n, &p.u)
        .mul(&c_vector(n, &p.v))
        .mul(&c_vector(n, &p.w));
    let spinor_norm = two_pow(m as u32).recip();
    let phi_norm = p
        .phi_trace
        .scale(&Rat::from_integer(p.dim_e.into()).recip());

    let firsts = first_order_pieces(p, mode)?;
    let powers = power_pieces(p, mode)?;

    let mut values: Vec<(&'static str, GaussRat)> = Vec::new();
    for power in &powers {
        for first in &firsts {
            let Some(label) = row_label(power.label, first.label) else {
                continue;
            };
            let composed = power.sym.compose(&first.sym, &[order])?;
            let mut value = GaussRat::zero();
            for term in composed.terms_at(order) {
                let tr = uvw.mul(&term.cliff).trace().scale(&spinor_norm);
                if tr.is_zero() {
                    continue;
                }
                let avg = sphere::average(n, term.xi.exps());
                if avg.is_zero() {
                    continue;
                }
                let mut contribution = tr.times(term.coeff.value()).scale(&avg);
                if term.etag == ETag::Phi {
                    contribution = contribution.times(&phi_norm);
                }
                value += contribution;
            }
            values.push((label, value));
        }
    }

    let mut terms = Vec::new();
    let mut total = GaussRat::zero();
    for label in ROW_ORDER {
        if let Some((_, value)) = values.iter().find(|(l, _)| *l == label) {
            total += value.clone();
            terms.push(TermRow {
                label: label.to_string(),
                description: describe(label).to_string(),
                value: value.clone(),
            });
        }
    }

    let total_vol_units = total.scale(&p.trace_normalizer());
    let total_pi_units = total_vol_units.scale(&sphere::volume_in_pi_pow_m(n));
    let pi_power = m as u32;
    let (re, im) = total_pi_units.to_f64_parts();
    let pi_m = PI.powi(pi_power as i32);
    Ok(DensityReport {
        kind: p.kind,
        mode,
        n,
        terms,
        total,
        total_vol_units,
        total_pi_units,
        pi_power,
        numeric_re: re * pi_m,
        numeric_im: im * pi_m,
    })
}

/// Directional derivative `a(h) = Σ_μ a_μ ∂_μ h` of a jet along a
/// covector.
fn directional(a: &[Rat], jet: &ScalarJet) -> GaussRat {
    let mut acc = GaussRat::zero();
    for (mu, comp) in a.iter().enumerate() {
        if comp.is_zero() {
            continue;
        }
        acc += jet
            .grad_component(mu)
            .expect("gradient presence checked by validation")
            .scale(comp);
    }
    acc
}

/// The gradient pattern `g(u,w)·v(h) - g(v,w)·u(h) - g(u,v)·w(h)`
/// appearing in every closing formula.
pub fn gradient_pattern(u: &[Rat], v: &[Rat], w: &[Rat], jet: &ScalarJet) -> GaussRat {
    directional(v, jet).scale(&dot(u, w))
        - directional(u, jet).scale(&dot(v, w))
        - directional(w, jet).scale(&dot(u, v))
}

/// The sign-flipped pattern `g(u,w)·v(h) + g(v,w)·u(h) - g(u,v)·w(h)`
/// used by the stated part-II summaries.
pub fn gradient_pattern_flipped(u: &[Rat], v: &[Rat], w: &[Rat], jet: &ScalarJet) -> GaussRat {
    directional(v, jet).scale(&dot(u, w)) + directional(u, jet).scale(&dot(v, w))
        - directional(w, jet).scale(&dot(u, v))
}

/// The vector trace pattern
/// `g(u,v)·g(w,x) - g(u,w)·g(v,x) + g(v,w)·g(u,x)`.
pub fn trace_pattern(u: &[Rat], v: &[Rat], w: &[Rat], x: &[Rat]) -> Rat {
    dot(u, v) * dot(w, x) - dot(u, w) * dot(v, x) + dot(v, w) * dot(u, x)
}

/// The per-term values printed in the audited derivation, evaluated
/// exactly at the point: `(label, value, note)` triples, normalized by
/// `tr[id]·Vol(S^{n-1})` like the engine rows.
pub fn printed_term_values(p: &PointData) -> Result<Vec<(String, GaussRat, String)>, EngineError> {
    p.validate()?;
    let m = p.m() as i64;
    let fpow = |k: i64| p.f.value().pow(k);
    let f_grad = fpow(-4 * m + 1);
    let f_pert = fpow(-4 * m + 2);
    let g = gradient_pattern(&p.u, &p.v, &p.w, &p.f);

    // Perturbation-dependent rows I, II-a, II-b.
    let (row_i, row_a, row_b) = match p.kind {
        PerturbationKind::Torsion => {
            let t = match &p.torsion {
                Some(t) => t.evaluate(&p.u, &p.v, &p.w),
                None => Rat::zero(),
            };
            let t_scaled = f_pert.scale(&t);
            (
                t_scaled.scale(&crate::scalar::ratio(3, 2)),
                t_scaled.scale(&(crate::scalar::ratio(3, 2) * crate::scalar::int(m - 3))),
                t_scaled.scale(&(crate::scalar::ratio(-3, 2) * crate::scalar::int(m))),
            )
        }
        PerturbationKind::ImaginaryVector => {
            let x = p.x_vector.as_ref().expect("validated");
            let b = GaussRat::from_rat(trace_pattern(&p.u, &p.v, &p.w, x)).times_i();
            let b_scaled = f_pert.times(&b);
            (
                b_scaled.clone(),
                b_scaled.scale(&crate::scalar::int(m - 1)),
                b_scaled.scale(&crate::scalar::int(-m)),
            )
        }
        PerturbationKind::GradingVector => {
            if p.n == 4 {
                let x = p.x_vector.as_ref().expect("validated");
                let d = f_pert.scale(&det4(&p.u, &p.v, &p.w, x));
                (
                    d.scale(&crate::scalar::int(-1)),
                    d.clone(),
                    d.scale(&crate::scalar::int(2)),
                )
            } else {
                (GaussRat::zero(), GaussRat::zero(), GaussRat::zero())
            }
        }
        PerturbationKind::Twisted => (GaussRat::zero(), GaussRat::zero(), GaussRat::zero()),
    };

    let grad_row = |k: i64| g.times(&f_grad).scale(&crate::scalar::int(k));
    Ok(vec![
        (
            "I".into(),
            row_i,
            String::new(),
        ),
        ("II-a".into(), row_a, String::new()),
        ("II-b".into(), row_b, String::new()),
        ("II-c".into(), grad_row(3 * m), String::new()),
        ("II-d".into(), grad_row(1 - m), String::new()),
        ("II-e".into(), grad_row(-4), String::new()),
        (
            "II-f".into(),
            grad_row(m - 1),
            "stated item value; the assembled cross sum contributes 2(1-m) of the same pattern"
                .into(),
        ),
        ("III".into(), grad_row(2), String::new()),
    ])
}

/// The closing closed-form totals stated by the audited derivation,
/// normalized by `tr[id]·Vol(S^{n-1})`, as `(name, value, note)`.
///
/// For the grading-vector kind two rows come back — the statement and
/// the proof disagree on the gradient argument (`f³` versus `f`) — with
/// the selected [`GradientArg`] first under the name `"theorem"`.
pub fn stated_totals(p: &PointData) -> Result<Vec<(String, GaussRat, String)>, EngineError> {
    p.validate()?;
    let m = p.m() as i64;
    let fpow = |k: i64| p.f.value().pow(k);
    let g = gradient_pattern(&p.u, &p.v, &p.w, &p.f);
    let grad_total = g.times(&fpow(-4 * m + 1)).scale(&crate::scalar::int(m));

    Ok(match p.kind {
        PerturbationKind::Torsion => {
            let t = match &p.torsion {
                Some(t) => t.evaluate(&p.u, &p.v, &p.w),
                None => Rat::zero(),
            };
            let value = fpow(-4 * m + 2).scale(&(crate::scalar::int(-3) * t)) + grad_total;
            vec![("theorem".into(), value, String::new())]
        }
        PerturbationKind::ImaginaryVector => {
            vec![("theorem".into(), grad_total, String::new())]
        }
        PerturbationKind::Twisted => {
            let note = if p.dim_e > 1 {
                "stated prefactor counts the spinor rank only; values here are per tr[id]"
                    .to_string()
            } else {
                String::new()
            };
            vec![("theorem".into(), grad_total, note)]
        }
        PerturbationKind::GradingVector => {
            let x = p.x_vector.as_ref().expect("validated");
            let wedge = if p.n == 4 {
                fpow(-6).scale(&(crate::scalar::int(2) * det4(&p.u, &p.v, &p.w, x)))
            } else {
                GaussRat::zero()
            };
            let value_for = |arg: GradientArg| {
                let jet = match arg {
                    GradientArg::F => p.f.clone(),
                    GradientArg::FCubed => p.f.pow(3),
                };
                wedge.clone()
                    + gradient_pattern(&p.u, &p.v, &p.w, &jet)
                        .times(&fpow(-4 * m + 1))
                        .scale(&crate::scalar::int(m))
            };
            let first = p.gradient_arg;
            let second = first.other();
            vec![
                (
                    "theorem".into(),
                    value_for(first),
                    format!("gradient argument {}", first.as_str()),
                ),
                (
                    "theorem-alt".into(),
                    value_for(second),
                    format!("gradient argument {}", second.as_str()),
                ),
            ]
        }
    })
}

/// One comparison row of the discrepancy ledger.
#[derive(Clone, Debug)]
pub struct LedgerRow {
    /// Stable row name.
    pub name: String,
    /// Engine value (exact, normalized by `tr[id]·Vol`).
    pub engine: GaussRat,
    /// Stated value from the audited derivation, same normalization.
    pub printed: GaussRat,
    /// `printed - engine`.
    pub difference: GaussRat,
    /// Context for a row that needs it.
    pub note: String,
}

fn ledger_row(name: &str, engine: GaussRat, printed: GaussRat, note: &str) -> LedgerRow {
    let difference = printed.clone() - engine.clone();
    LedgerRow {
        name: name.to_string(),
        engine,
        printed,
        difference,
        note: note.to_string(),
    }
}

/// Exact side-by-side comparison of engine values against the printed
/// per-term values and closing closed forms.
#[derive(Clone, Debug)]
pub struct Ledger {
    /// Perturbation kind audited.
    pub kind: PerturbationKind,
    /// Frame dimension.
    pub n: usize,
    /// Engine total with the stated zeroth-order symbol.
    pub paper_total: GaussRat,
    /// Engine total with the recomputed zeroth-order symbol.
    pub derived_total: GaussRat,
    /// Per-term rows: engine (stated-expansion mode) versus printed.
    pub term_rows: Vec<LedgerRow>,
    /// Totals and summaries.
    pub total_rows: Vec<LedgerRow>,
    /// Kind-level remarks that apply across rows.
    pub notes: Vec<String>,
}

/// Build the discrepancy ledger at a point: both engine modes, the
/// printed per-term values, the closing closed forms (both gradient
/// arguments for the grading kind), and the stated part-II summaries,
/// all with exact differences.
///
/// # Errors
///
/// Same contract as [`density`].
pub fn ledger(p: &PointData) -> Result<Ledger, EngineError> {
    let paper = density(p, SymbolMode::Paper)?;
    let derived = density(p, SymbolMode::Derived)?;
    let printed = printed_term_values(p)?;
    let totals = stated_totals(p)?;
    let m = p.m() as i64;

    let term_rows: Vec<LedgerRow> = printed
        .iter()
        .map(|(label, value, note)| ledger_row(label, paper.row(label), value.clone(), note))
        .collect();

    let printed_sum = printed
        .iter()
        .fold(GaussRat::zero(), |acc, (_, v, _)| acc + v.clone());
    let mut total_rows = vec![ledger_row(
        "printed-items-sum",
        paper.total.clone(),
        printed_sum,
        "sum of the printed per-term values against the engine total",
    )];
    for (name, value, note) in &totals {
        total_rows.push(ledger_row(name, paper.total.clone(), value.clone(), note));
    }
    total_rows.push(ledger_row(
        "theorem-vs-derived",
        derived.total.clone(),
        totals[0].1.clone(),
        "engine total including the commutator correction f c(df)",
    ));

    if matches!(
        p.kind,
        PerturbationKind::Torsion | PerturbationKind::ImaginaryVector
    ) {
        let engine_ii = ["II-a", "II-b", "II-c", "II-d", "II-e", "II-f"]
            .iter()
            .fold(GaussRat::zero(), |acc, label| acc + paper.row(label));
        let printed_ii = printed
            .iter()
            .filter(|(label, _, _)| label.starts_with("II-"))
            .fold(GaussRat::zero(), |acc, (_, v, _)| acc + v.clone());
        total_rows.push(ledger_row(
            "part-II-items-sum",
            engine_ii.clone(),
            printed_ii,
            "sum over the six printed part-II items",
        ));

        let fpow = |k: i64| p.f.value().pow(k);
        let flipped = gradient_pattern_flipped(&p.u, &p.v, &p.w, &p.f)
            .times(&fpow(-4 * m + 1))
            .scale(&crate::scalar::int(m - 2));
        let summary = match p.kind {
            PerturbationKind::Torsion => {
                let t = match &p.torsion {
                    Some(t) => t.evaluate(&p.u, &p.v, &p.w),
                    None => Rat::zero(),
                };
                fpow(-4 * m + 2).scale(&(crate::scalar::ratio(-9, 2) * t)) + flipped
            }
            _ => flipped,
        };
        let note = match p.kind {
            PerturbationKind::Torsion => {
                "stated summary; uses the sign pattern g(u,w)v(f) + g(v,w)u(f) - g(u,v)w(f)"
            }
            _ => {
                "stated summary; uses the flipped sign pattern and omits the vector-trace residual"
            }
        };
        total_rows.push(ledger_row(
            "part-II-stated-summary",
            engine_ii,
            summary,
            note,
        ));
    }

    let mut notes = vec![
        "mode 'paper' takes the zeroth-order symbol without the commutator term f c(df); \
         mode 'derived' includes it — the totals differ by exactly that term's row"
            .to_string(),
    ];
    if matches!(
        p.kind,
        PerturbationKind::GradingVector | PerturbationKind::Twisted
    ) {
        notes.push(
            "some displays of the cross-term sum stop at k = m-3; the assembled expansion \
             keeps the stated general range k <= m-2"
                .to_string(),
        );
    }
    if p.kind == PerturbationKind::GradingVector {
        notes.push(
            "the closing formula's statement and proof disagree on the gradient argument \
             (f^3 versus f); both variants are tabulated"
                .to_string(),
        );
    }

    Ok(Ledger {
        kind: p.kind,
        n: p.n,
        paper_total: paper.total,
        derived_total: derived.total,
        term_rows,
        total_rows,
        notes,
    })
}
