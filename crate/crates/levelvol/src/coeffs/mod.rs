//! Closed-form singular expansions of the local volume integral `I_{p,q}(h)`
//! around interior and boundary saddle points, with an independent
//! numerical-quadrature oracle.
//!
//! `I_{p,q}(h)` is the volume swept between levels inside the standard box
//! around a saddle of Morse type `(p, q)`, written in the scaled coordinates
//! `u = r + s`, `v = r - s` (so the box is `0 <= u <= 1`, `|v| <= u`):
//!
//! ```text
//! h < 0:   I(h) = ∫_{√-h}^1 ∫_{-u}^{h/u} k(u,v) dv du
//! h >= 0:  I(h) = ∫_0^1 ∫_{-u}^0 k  +  ∫_0^{√h} ∫_0^u k  +  ∫_{√h}^1 ∫_0^{h/u} k
//! ```
//!
//! with `k(u,v) = (u+v)^{p-1} (u-v)^{q-1}` in the interior case and
//! `k(u,v) = (h-uv) (u+v)^{p-1} (u-v)^{q-1}` in the boundary case.
//!
//! Both branches collapse to
//!
//! ```text
//! I(h) = P(h) + α_± |h|^S + β h^S log √|h| + γ  (+ δ h, boundary case)
//! ```
//!
//! where `S = (p+q)/2` (interior) or `(p+q+2)/2` (boundary), `P` is a
//! polynomial with no constant term, `α_±` depends on the sign of `h`, and a
//! single `β` serves both branches *provided the log term carries the signed
//! power `h^S`* (when `β ≠ 0`, `p+q` is even, so `h^S` is an ordinary signed
//! monomial). All coefficients are exact rationals.
//!
//! Convention notes, pinned by exact matching against the branch integrals at
//! `h = ±1/4, ±1/16` (see `exact::branch_integral_exact`) and by the floating
//! quadrature oracle [`oracle_i`]:
//!
//! * `α⁺ = -(2/(p+q)) σ₁(p,q) + (2/(p+q)²) σ₂(p,q)` — note the minus sign on
//!   the `σ₁` term — and `α⁻(p,q) = -α⁺(q,p)`.
//! * `β = -(2/(p+q)) σ₂(p,q)`, multiplying `h^S log √|h|` with signed `h^S`.
//! * Boundary coefficients follow from the interior ones because the boundary
//!   integrand is `(h - uv)` times the interior one over the same region, so
//!   `d/dh I_bnd = I_int` exactly: the boundary expansion is the term-wise
//!   antiderivative plus the new constant `γ_bnd` and the linear term
//!   `δ h` with `δ = γ_int`.

mod exact;
mod quadrature;

pub use exact::{branch_integral_exact, LogLinearValue};
pub use quadrature::env_budget;

use num::{BigInt, BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Exact rational scalar used for every expansion coefficient.
pub type Rational = BigRational;

#[derive(Debug, Error)]
pub enum CoeffsError {
    #[error("level h = {0} lies outside the standard box (need |h| < 1)")]
    OutsideStandardBox(f64),
    #[error("quadrature tolerance {requested:e} not reached (best estimate {estimate}, achieved error {achieved:e})")]
    ToleranceNotReached {
        requested: f64,
        estimate: f64,
        achieved: f64,
    },
}

/// Which branch of `I_{p,q}` a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// How the volume function fails to be smooth at a critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Jump,
    LogLike,
    RootLike,
}

impl std::fmt::Display for SingularKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SingularKind::Jump => "jump",
            SingularKind::LogLike => "log_like",
            SingularKind::RootLike => "root_like",
        };
        f.write_str(s)
    }
}

/// Kind plus the first derivative order of `vol(V_h)` that breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscontinuityKind {
    pub kind: SingularKind,
    pub break_order: u32,
}

/// Exact singular expansion of `I_{p,q}(h)` on both sides of `h = 0`.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub p: u32,
    pub q: u32,
    pub boundary: bool,
    /// `poly[j]` multiplies `h^j`; `poly[0]` is always zero (the constant
    /// lives in `gamma`).
    pub poly: Vec<Rational>,
    pub alpha_plus: Rational,
    pub alpha_minus: Rational,
    /// Coefficient of `h^S log √|h|` (signed power; zero unless `p` and `q`
    /// are both odd).
    pub beta: Rational,
    pub gamma: Rational,
    /// Linear term of the boundary expansion; `None` in the interior case.
    pub delta: Option<Rational>,
    /// `(p+q)/2` interior, `(p+q+2)/2` boundary.
    pub singular_power: Rational,
}

fn big(n: i64) -> BigInt {
    BigInt::from_i64(n).unwrap()
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(big(n), big(d))
}

/// Binomial coefficient as an exact integer.
fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * big((n - i) as i64) / big((i + 1) as i64);
    }
    acc
}

/// Iterate the binomial double sum `0 <= k <= p-1`, `0 <= m <= q-1`,
/// yielding `(k, m, A_km)` with `A_km = C(p-1,k) C(q-1,m) (-1)^m`.
fn terms(p: u32, q: u32) -> impl Iterator<Item = (u32, u32, BigInt)> {
    assert!(p >= 1 && q >= 1, "I_{{p,q}} requires p, q >= 1");
    (0..p).flat_map(move |k| {
        (0..q).map(move |m| {
            let mut a = binomial(p - 1, k) * binomial(q - 1, m);
            if m % 2 == 1 {
                a = -a;
            }
            (k, m, a)
        })
    })
}

/// `σ₁`: the part of the binomial double sum with `2(k+m+1) ≠ p+q`, each term
/// weighted by `1/(p+q-2(k+m+1))`. Vanishes for `q` odd.
pub fn sigma1(p: u32, q: u32) -> Rational {
    let n = (p + q) as i64;
    let mut acc = Rational::zero();
    for (k, m, a) in terms(p, q) {
        let t1 = (k + m + 1) as i64;
        if 2 * t1 != n {
            acc += Rational::new(a, big(n - 2 * t1));
        }
    }
    acc
}

/// `σ₂`: the complementary part with `2(k+m+1) = p+q`, unweighted. Vanishes
/// unless `p` and `q` are both odd.
pub fn sigma2(p: u32, q: u32) -> Rational {
    let n = (p + q) as i64;
    let mut acc = Rational::zero();
    for (k, m, a) in terms(p, q) {
        let t1 = (k + m + 1) as i64;
        if 2 * t1 == n {
            acc += Rational::from(a);
        }
    }
    acc
}

/// Constant term of the interior expansion, `I_{p,q}(0)`: the plus-branch
/// triangle integral expanded term by term.
fn gamma_interior(p: u32, q: u32) -> Rational {
    let n = (p + q) as i64;
    let mut acc = Rational::zero();
    for (k, m, a) in terms(p, q) {
        let t1 = (k + m + 1) as i64;
        // A_km (-1)^t = C C (-1)^k
        let signed = if (k + m) % 2 == 1 { -a } else { a };
        acc += Rational::new(signed, big(t1 * n));
    }
    acc
}

/// Constant term of the boundary expansion, from the same triangle integral
/// with the extra `-uv` factor.
fn gamma_boundary(p: u32, q: u32) -> Rational {
    let n = (p + q) as i64;
    let mut acc = Rational::zero();
    for (k, m, a) in terms(p, q) {
        let t = (k + m) as i64;
        let signed = if (k + m) % 2 == 1 { -a } else { a };
        acc += Rational::new(signed, big((t + 2) * (n + 2)));
    }
    acc
}

fn alpha_plus_interior(p: u32, q: u32) -> Rational {
    let n = (p + q) as i64;
    -rat(2, n) * sigma1(p, q) + rat(2, n * n) * sigma2(p, q)
}

fn beta_interior(p: u32, q: u32) -> Rational {
    let n = (p + q) as i64;
    -rat(2, n) * sigma2(p, q)
}

/// Exact singular expansion of `I_{p,q}` (interior) or its boundary variant.
///
/// Requires `p, q >= 1`; the pure-extremum cases `p = 0` or `q = 0` are
/// covered by the explicit leading terms `a_n/n h^{n/2}` and
/// `2 a_{n-1}/(n²-1) h^{(n+1)/2}` and have no `I_{p,q}` form.
pub fn expansion(p: u32, q: u32, boundary: bool) -> Expansion {
    assert!(p >= 1 && q >= 1, "expansion requires p, q >= 1");
    let n = (p + q) as i64;

    // Interior pieces first.
    let mut poly_int = vec![Rational::zero(); (n + 1) as usize];
    for (k, m, a) in terms(p, q) {
        let t1 = (k + m + 1) as i64;
        if 2 * t1 != n {
            poly_int[t1 as usize] += Rational::new(a, big(t1 * (n - 2 * t1)));
        }
    }
    let alpha_plus_int = alpha_plus_interior(p, q);
    let alpha_minus_int = -alpha_plus_interior(q, p);
    let beta_int = beta_interior(p, q);
    let gamma_int = gamma_interior(p, q);

    if !boundary {
        return Expansion {
            p,
            q,
            boundary,
            poly: poly_int,
            alpha_plus: alpha_plus_int,
            alpha_minus: alpha_minus_int,
            beta: beta_int,
            gamma: gamma_int,
            delta: None,
            singular_power: rat(n, 2),
        };
    }

    // Boundary: term-wise antiderivative of the interior expansion.
    // d/dh I_bnd = I_int, so P_bnd = ∫P_int, δ = γ_int, and the singular
    // terms integrate with the usual log correction:
    //   ∫ t^S dt = h^{S+1}/(S+1)
    //   ∫ t^S log √t dt = h^{S+1}/(S+1) log √h - h^{S+1}/(2 (S+1)²).
    let sb = rat(n + 2, 2); // S + 1
    let mut poly_b = vec![Rational::zero(); (n + 2) as usize];
    for (j, c) in poly_int.iter().enumerate().skip(1) {
        poly_b[j + 1] = c / rat(j as i64 + 1, 1);
    }
    let alpha_plus_b = &alpha_plus_int / &sb - &beta_int / (rat(2, 1) * &sb * &sb);
    // On the minus side the interior log coefficient in |h| powers is
    // (-1)^{n/2} β (empty when β = 0, which covers odd n).
    let beta_minus_signed = if beta_int.is_zero() {
        Rational::zero()
    } else {
        debug_assert!(n % 2 == 0);
        if (n / 2) % 2 == 1 {
            -beta_int.clone()
        } else {
            beta_int.clone()
        }
    };
    let alpha_minus_b = -&alpha_minus_int / &sb + &beta_minus_signed / (rat(2, 1) * &sb * &sb);
    let beta_b = &beta_int / &sb;

    Expansion {
        p,
        q,
        boundary,
        poly: poly_b,
        alpha_plus: alpha_plus_b,
        alpha_minus: alpha_minus_b,
        beta: beta_b,
        gamma: gamma_boundary(p, q),
        delta: Some(gamma_int),
        singular_power: rat(n + 2, 2),
    }
}

impl Expansion {
    /// Ambient dimension implied by the Morse data: `p+q` interior,
    /// `p+q+1` boundary.
    pub fn ambient_dim(&self) -> u32 {
        self.p + self.q + if self.boundary { 1 } else { 0 }
    }

    /// The branch coefficient of `|h|^S` for the given side.
    pub fn alpha(&self, side: Side) -> &Rational {
        match side {
            Side::Plus => &self.alpha_plus,
            Side::Minus => &self.alpha_minus,
        }
    }
}

/// Evaluate the expansion at a level `h` with `|h| < 1`.
///
/// At `h = 0` this returns `γ` exactly.
pub fn eval_i(exp: &Expansion, h: f64) -> Result<f64, CoeffsError> {
    if !(h.abs() < 1.0) {
        return Err(CoeffsError::OutsideStandardBox(h));
    }
    let s = exp.singular_power.to_f64().unwrap();
    let mut acc = exp.gamma.to_f64().unwrap();
    if let Some(d) = &exp.delta {
        acc += d.to_f64().unwrap() * h;
    }
    let mut hp = 1.0;
    for c in exp.poly.iter().skip(1) {
        hp *= h;
        if !c.is_zero() {
            acc += c.to_f64().unwrap() * hp;
        }
    }
    if h != 0.0 {
        let alpha = if h > 0.0 {
            &exp.alpha_plus
        } else {
            &exp.alpha_minus
        };
        acc += alpha.to_f64().unwrap() * h.abs().powf(s);
        if !exp.beta.is_zero() {
            // p+q even here, so the signed power is an integer monomial.
            let k = exp.singular_power.to_integer().to_i32().unwrap();
            acc += exp.beta.to_f64().unwrap() * h.powi(k) * h.abs().sqrt().ln();
        }
    }
    Ok(acc)
}

/// Evaluate the expansion exactly at `h = ±s²` for rational `s ∈ (0,1)`,
/// as `a + b ln s`.
pub fn eval_i_exact(exp: &Expansion, s: &Rational, side: Side) -> LogLinearValue {
    assert!(s.is_positive() && s < &Rational::one());
    let h = match side {
        Side::Plus => s * s,
        Side::Minus => -(s * s),
    };
    let mut constant = exp.gamma.clone();
    if let Some(d) = &exp.delta {
        constant += d * &h;
    }
    let mut hp = Rational::one();
    for c in exp.poly.iter().skip(1) {
        hp *= &h;
        constant += c * &hp;
    }
    // |h|^S = s^{2S}; 2S is an integer by construction.
    let two_s = (exp.singular_power.clone() * rat(2, 1)).to_integer();
    let pow = num::pow::pow(s.clone(), two_s.to_usize().unwrap());
    constant += exp.alpha(side) * &pow;
    let mut log_coeff = Rational::zero();
    if !exp.beta.is_zero() {
        // h^S = (±1)^S s^{2S} with S integer.
        let s_int = exp.singular_power.to_integer().to_i64().unwrap();
        let sign_neg = side == Side::Minus && s_int % 2 == 1;
        let term = &exp.beta * &pow;
        log_coeff += if sign_neg { -term } else { term };
    }
    LogLinearValue { constant, log_coeff }
}

/// Numerical oracle: adaptive quadrature of the displayed region integrals.
///
/// Independent of [`expansion`]/[`eval_i`]; integrates `k(u,v)` over the
/// region for the sign of `h`, with the inner `v` integral done exactly
/// (polynomial antiderivative) and an adaptive Gauss–Kronrod rule outside.
pub fn oracle_i(p: u32, q: u32, boundary: bool, h: f64, tol: f64) -> Result<f64, CoeffsError> {
    assert!(p >= 1 && q >= 1, "oracle_i requires p, q >= 1");
    if !(h.abs() < 1.0) {
        return Err(CoeffsError::OutsideStandardBox(h));
    }
    quadrature::integrate_region(p, q, boundary, h, tol)
}

/// Parity classification of the discontinuity at a saddle of Morse type
/// `(p, q)`, with the break order of `vol(V_h)` in the ambient dimension
/// (`n = p+q` interior, `n = p+q+1` boundary).
pub fn classify(p: u32, q: u32, boundary: bool) -> DiscontinuityKind {
    assert!(p >= 1 && q >= 1, "classify requires p, q >= 1");
    let kind = match (p % 2, q % 2) {
        (0, 0) => SingularKind::Jump,
        (1, 1) => SingularKind::LogLike,
        _ => SingularKind::RootLike,
    };
    let n = p + q;
    let break_order = if boundary {
        // ambient dimension p+q+1; break at ceil((n+1)/2)
        (n + 2).div_ceil(2)
    } else {
        n.div_ceil(2)
    };
    DiscontinuityKind { kind, break_order }
}

/// Format a rational as `num/den` for the coefficient table.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// CSV coefficient table over `1 <= p <= p_max`, `1 <= q <= q_max`,
/// interior and boundary rows.
pub fn table_csv(p_max: u32, q_max: u32) -> String {
    let mut out = String::from(
        "p,q,boundary,gamma,alpha_plus,alpha_minus,beta,delta,singular_power,kind\n",
    );
    for boundary in [false, true] {
        for p in 1..=p_max {
            for q in 1..=q_max {
                let e = expansion(p, q, boundary);
                let c = classify(p, q, boundary);
                let delta = e
                    .delta
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    p,
                    q,
                    boundary,
                    format_rational(&e.gamma),
                    format_rational(&e.alpha_plus),
                    format_rational(&e.alpha_minus),
                    format_rational(&e.beta),
                    delta,
                    format_rational(&e.singular_power),
                    c.kind,
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
