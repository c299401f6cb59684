//! Exact averages of monomials over the unit sphere `S^{n-1}`.
//!
//! Everything is normalised by the sphere volume: `average(n, α)` returns
//! `(1/Vol(S^{n-1})) ∫_{S^{n-1}} ξ^α dσ(ξ)` as an exact rational. Two
//! independent evaluations are provided:
//!
//! * a recursion that integrates by parts one axis at a time,
//!   `I(α) = (α_a - 1) / (|α| - 2 + n) · I(α - 2 e_a)`, seeded at `I(0)=1`;
//! * the closed form `∏_i (α_i - 1)!! / ∏_{k=0}^{K-1} (n + 2k)` for
//!   `|α| = 2K`, zero whenever any exponent is odd.
//!
//! The recursion is what the integrand bookkeeping naturally produces, the
//! closed form is the cross-check; a property test keeps them identical.
//! A deterministic quasi–Monte Carlo estimate (Halton points pushed through
//! Box–Muller and radially projected) provides a third, floating-point
//! opinion for the verification suite.
//!
//! Volumes themselves stay symbolic: in even dimension `n = 2m`,
//! `Vol(S^{2m-1}) = 2 π^m / (m-1)!`, so results are carried "in Vol units"
//! and only turned into floats for display.

use crate::scalar::{double_factorial, factorial, Rat};
use num::{BigInt, One, Zero};
use std::collections::BTreeMap;
use std::sync::{LazyLock, Mutex};

/// Memo for [`average`], keyed on `(n, sorted even-degree exponents)`.
static CACHE: LazyLock<Mutex<BTreeMap<(usize, Vec<u32>), Rat>>> =
    LazyLock::new(|| Mutex::new(BTreeMap::new()));

fn normalised_key(n: usize, alpha: &[u32]) -> (usize, Vec<u32>) {
    let mut exps: Vec<u32> = alpha.iter().copied().filter(|&a| a > 0).collect();
    exps.sort_unstable();
    (n, exps)
}

/// Sphere average of `ξ^α` over `S^{n-1}`, in units of the sphere volume.
///
/// Computed by the axis recursion with memoisation. Exponent lists shorter
/// than `n` are padded with zeros; lists longer than `n` are rejected.
///
/// # Panics
///
/// Panics if `alpha.len() > n` or `n == 0`.
pub fn average(n: usize, alpha: &[u32]) -> Rat {
    assert!(n > 0, "sphere dimension must be positive");
    assert!(
        alpha.len() <= n,
        "exponent list longer than dimension ({} > {n})",
        alpha.len()
    );
    if alpha.iter().any(|&a| a % 2 == 1) {
        return Rat::zero(); // odd in some axis ⇒ antipodal cancellation
    }
    let key = normalised_key(n, alpha);
    if let Some(hit) = CACHE.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let value = recurse(n, &key.1);
    CACHE.lock().unwrap().insert(key, value.clone());
    value
}

fn recurse(n: usize, sorted_even: &[u32]) -> Rat {
    if sorted_even.is_empty() {
        return Rat::one();
    }
    let total: u32 = sorted_even.iter().sum();
    // Reduce along the last (largest) axis.
    let a = *sorted_even.last().unwrap();
    let mut rest: Vec<u32> = sorted_even.to_vec();
    *rest.last_mut().unwrap() -= 2;
    let factor = Rat::new(
        BigInt::from(a - 1),
        BigInt::from(total as i64 - 2 + n as i64),
    );
    factor * average(n, &rest)
}

/// Closed form of [`average`]: `∏ (α_i - 1)!! / ∏_{k<K} (n + 2k)`.
pub fn average_closed_form(n: usize, alpha: &[u32]) -> Rat {
    if alpha.iter().any(|&a| a % 2 == 1) {
        return Rat::zero();
    }
    let big_k: u32 = alpha.iter().sum::<u32>() / 2;
    let mut numer = BigInt::one();
    for &a in alpha {
        numer *= double_factorial(i64::from(a) - 1).to_integer();
    }
    let mut denom = BigInt::one();
    for k in 0..big_k {
        denom *= BigInt::from(n as u64 + 2 * u64::from(k));
    }
    Rat::new(numer, denom)
}

/// `Vol(S^{2m-1})` in units of `π^m`: the exact rational `2 / (m-1)!`.
///
/// # Panics
///
/// Panics unless `n = 2m` with `m ≥ 1`.
pub fn volume_in_pi_pow_m(n: usize) -> Rat {
    assert!(n % 2 == 0 && n >= 2, "volume formula needs even n ≥ 2");
    let m = (n / 2) as u32;
    Rat::new(BigInt::from(2), factorial(m - 1).to_integer())
}

/// Floating-point `Vol(S^{n-1})` for even `n`, i.e. `2 π^m / (m-1)!`.
pub fn volume_f64(n: usize) -> f64 {
    let m = (n / 2) as u32;
    crate::scalar::rat_to_f64(&volume_in_pi_pow_m(n)) * std::f64::consts::PI.powi(m as i32)
}

/// First handful of primes, enough Halton bases for `n ≤ 16`.
const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical-inverse (van der Corput) value of `index` in `base`.
fn halton(mut index: u64, base: u32) -> f64 {
    let b = f64::from(base);
    let mut inv = 1.0 / b;
    let mut result = 0.0;
    while index > 0 {
        result += (index % u64::from(base)) as f64 * inv;
        index /= u64::from(base);
        inv /= b;
    }
    result
}

/// Deterministic QMC estimate of the sphere average of `ξ^α`.
///
/// Low-discrepancy Halton points in `[0,1)^n` are mapped to standard
/// Gaussians by Box–Muller and projected to the sphere; the spherical law
/// of the result makes the sample mean converge to the exact average. Used
/// only as a cross-check — exact results never depend on this.
///
/// # Panics
///
/// Panics if `n` is odd (Box–Muller consumes coordinates in pairs), zero,
/// or larger than the prepared prime table.
pub fn average_qmc(n: usize, alpha: &[u32], points: u64) -> f64 {
    assert!(n > 0 && n % 2 == 0, "QMC sampler needs even n, got {n}");
    assert!(n <= PRIMES.len(), "QMC sampler supports n ≤ {}", PRIMES.len());
    assert!(alpha.len() <= n, "exponent list longer than dimension");
    assert!(points > 0, "need at least one sample point");
    let mut acc = 0.0;
    let mut gauss = vec![0.0f64; n];
    for k in 1..=points {
        for t in 0..(n / 2) {
            // Guard u away from 0 so the log stays finite.
            let u = halton(k, PRIMES[2 * t]).max(1e-16);
            let v = halton(k, PRIMES[2 * t + 1]);
            let r = (-2.0 * u.ln()).sqrt();
            let angle = 2.0 * std::f64::consts::PI * v;
            gauss[2 * t] = r * angle.cos();
            gauss[2 * t + 1] = r * angle.sin();
        }
        let norm = gauss.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut term = 1.0;
        for (i, &a) in alpha.iter().enumerate() {
            if a > 0 {
                term *= (gauss[i] / norm).powi(a as i32);
            }
        }
        acc += term;
    }
    acc / points as f64
}
