//! Quantum-calculus operators acting exactly on polynomials in `x` at a fixed
//! rational base `q`.
//!
//! Coefficient actions:
//!
//! | operator | `c x^k` maps to |
//! |---|---|
//! | q-derivative | `c [k] x^(k-1)` |
//! | Jackson integral from 0 | `c x^(k+1) / [k+1]` |
//! | `P` (integral of `f(t)/t`) | `c x^k / [k]` |
//! | `eta` (shift `x -> xq`) | `c q^k x^k` |
//!
//! `T` integrates `(f(1) - f(t))/(1 - t)`, which on polynomials is exact
//! division and sends `x^k` to `sum_{j<k} x^(j+1)/[j+1]`.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{format_rational, int, ExactScalar, Field};

/// Dense polynomial in `x` over the rationals. Trailing zeros are always
/// trimmed, so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    q: ExactScalar,
    coeffs: Vec<ExactScalar>,
}

impl QPoly {
    pub fn new(q: ExactScalar, coeffs: Vec<ExactScalar>) -> Self {
        let mut p = QPoly { q, coeffs };
        p.trim();
        p
    }

    pub fn zero(q: ExactScalar) -> Self {
        QPoly { q, coeffs: Vec::new() }
    }

    pub fn constant(q: ExactScalar, c: ExactScalar) -> Self {
        QPoly::new(q, vec![c])
    }

    pub fn monomial(q: ExactScalar, c: ExactScalar, degree: usize) -> Self {
        let mut coeffs = vec![ExactScalar::zero(); degree + 1];
        coeffs[degree] = c;
        QPoly::new(q, coeffs)
    }

    /// `x^n`.
    pub fn x_pow(q: ExactScalar, n: usize) -> Self {
        QPoly::monomial(q, int(1), n)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn q(&self) -> &ExactScalar {
        &self.q
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> ExactScalar {
        self.coeffs.get(k).cloned().unwrap_or_else(ExactScalar::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        self.coeffs.iter().rev().fold(ExactScalar::zero(), |acc, c| acc * x + c)
    }

    fn same_base(&self, other: &QPoly) {
        assert_eq!(self.q, other.q, "polynomials over different bases");
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        self.same_base(other);
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) + other.coeff(k)).collect();
        QPoly::new(self.q.clone(), coeffs)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &ExactScalar) -> QPoly {
        QPoly::new(self.q.clone(), self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        self.same_base(other);
        if self.is_zero() || other.is_zero() {
            return QPoly::zero(self.q.clone());
        }
        let mut coeffs = vec![ExactScalar::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPoly::new(self.q.clone(), coeffs)
    }

    /// `f(x) / x`; the constant term must vanish.
    pub fn div_x(&self) -> Result<QPoly> {
        if !self.coeff(0).is_zero() {
            return Err(Error::schema("division by x of a polynomial with nonzero constant term"));
        }
        Ok(QPoly::new(self.q.clone(), self.coeffs.iter().skip(1).cloned().collect()))
    }

    fn map_coeffs<G>(&self, mut g: G) -> Result<QPoly>
    where
        G: FnMut(usize, &ExactScalar) -> Result<ExactScalar>,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if c.is_zero() { Ok(ExactScalar::zero()) } else { g(k, c) })
            .collect::<Result<Vec<_>>>()?;
        Ok(QPoly::new(self.q.clone(), coeffs))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format_rational(c),
                1 => format!("({})*x", format_rational(c)),
                _ => format!("({})*x^{k}", format_rational(c)),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// `1 + q + ... + q^(k-1)`; well defined for every `q`.
fn bracket(k: usize, q: &ExactScalar) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    let mut p = int(1);
    for _ in 0..k {
        acc += &p;
        p *= q;
    }
    acc
}

fn nonzero_bracket(k: usize, q: &ExactScalar) -> Result<ExactScalar> {
    let b = bracket(k, q);
    if b.is_zero() {
        Err(Error::pole(format!("q-number [{k}] vanishes at q = {}", format_rational(q))))
    } else {
        Ok(b)
    }
}

/// `(f(x) - f(xq)) / (x - xq)`.
pub fn q_derivative(f: &QPoly) -> QPoly {
    let q = f.q();
    let coeffs = (1..f.coeffs.len()).map(|k| &f.coeffs[k] * bracket(k, q)).collect();
    QPoly::new(q.clone(), coeffs)
}

/// Definite Jackson integral from 0 to `x`.
pub fn jackson_integral(f: &QPoly) -> Result<QPoly> {
    let q = f.q().clone();
    let mut coeffs = vec![ExactScalar::zero(); f.coeffs.len() + 1];
    for (k, c) in f.coeffs.iter().enumerate() {
        if !c.is_zero() {
            coeffs[k + 1] = c.div(&nonzero_bracket(k + 1, &q)?)?;
        }
    }
    Ok(QPoly::new(q, coeffs))
}

/// `(P_q)^m f`, where `P_q f(x)` integrates `f(t)/t`.
pub fn op_p(f: &QPoly, m: u32) -> Result<QPoly> {
    if m == 0 {
        return Ok(f.clone());
    }
    if !f.coeff(0).is_zero() {
        return Err(Error::schema("P operator applied to a polynomial with nonzero constant term"));
    }
    let q = f.q().clone();
    f.map_coeffs(|k, c| {
        let b = nonzero_bracket(k, &q)?;
        c.div(&b.powi(i64::from(m))?)
    })
}

fn op_t_once(f: &QPoly) -> Result<QPoly> {
    // (f(1) - f(t))/(1 - t) = sum_j t^j * (c_{j+1} + c_{j+2} + ...)
    let len = f.coeffs.len();
    let mut integrand = vec![ExactScalar::zero(); len.saturating_sub(1)];
    let mut suffix = ExactScalar::zero();
    for j in (0..len.saturating_sub(1)).rev() {
        suffix += &f.coeffs[j + 1];
        integrand[j] = suffix.clone();
    }
    jackson_integral(&QPoly::new(f.q().clone(), integrand))
}

/// `(T_q)^m f`, where `T_q f(x)` integrates `(f(1) - f(t))/(1 - t)`.
pub fn op_t(f: &QPoly, m: u32) -> Result<QPoly> {
    let mut out = f.clone();
    for _ in 0..m {
        out = op_t_once(&out)?;
    }
    Ok(out)
}

/// `eta^e f(x) = f(x q^e)`.
pub fn op_eta(f: &QPoly, e: u32) -> QPoly {
    let q = f.q().clone();
    let step = q.powi(i64::from(e)).expect("non-negative power");
    let mut scale = int(1);
    let coeffs = f
        .coeffs
        .iter()
        .map(|c| {
            let v = c * &scale;
            scale *= &step;
            v
        })
        .collect();
    QPoly::new(q, coeffs)
}

/// `(a x; q)_n` expanded in `x`.
pub fn poly_pochhammer(a: &ExactScalar, n: u32, q: &ExactScalar) -> QPoly {
    let mut acc = QPoly::constant(q.clone(), int(1));
    let mut root = a.clone();
    for _ in 0..n {
        acc = acc.mul(&QPoly::new(q.clone(), vec![int(1), -root.clone()]));
        root *= q;
    }
    acc
}

/// `1 - (x; q)_n` expanded in `x`.
pub fn poly_one_minus_poch(n: u32, q: &ExactScalar) -> QPoly {
    QPoly::constant(q.clone(), int(1)).sub(&poly_pochhammer(&int(1), n, q))
}

/// One primitive step of an operator chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Eta(u32),
    P(u32),
    T(u32),
}

/// Composition of primitive steps, written outermost-first and applied
/// right-to-left.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperatorChain {
    pub steps: Vec<Step>,
}

impl OperatorChain {
    pub fn new(steps: Vec<Step>) -> Self {
        OperatorChain { steps }
    }

    /// `(eta^{m_k} P^{m_k} T) ... (eta^{m_1} P^{m_1} T)`, the block for `m_1`
    /// acting first.
    pub fn eta_p_t(ms: &[u32]) -> Self {
        let steps = ms.iter().rev().flat_map(|&m| [Step::Eta(m), Step::P(m), Step::T(1)]).collect();
        OperatorChain { steps }
    }

    /// `(T^{m_k} eta P) ... (T^{m_1} eta P)`.
    pub fn t_eta_p(ms: &[u32]) -> Self {
        let steps = ms.iter().rev().flat_map(|&m| [Step::T(m), Step::Eta(1), Step::P(1)]).collect();
        OperatorChain { steps }
    }
}

pub fn apply_chain(chain: &OperatorChain, f: &QPoly) -> Result<QPoly> {
    chain.steps.iter().rev().try_fold(f.clone(), |acc, step| match *step {
        Step::Eta(e) => Ok(op_eta(&acc, e)),
        Step::P(m) => op_p(&acc, m),
        Step::T(m) => op_t(&acc, m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::qcore::q_pochhammer;

    fn poly(q: &ExactScalar, cs: &[ExactScalar]) -> QPoly {
        QPoly::new(q.clone(), cs.to_vec())
    }

    #[test]
    fn trims_and_reports_degree() {
        let q = rat(1, 2);
        let p = poly(&q, &[int(1), int(0), int(0)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(QPoly::zero(q.clone()).degree(), None);
        assert!(poly(&q, &[int(0)]).is_zero());
    }

    #[test]
    fn derivative_examples() {
        let q = rat(1, 2);
        let d = q_derivative(&QPoly::x_pow(q.clone(), 2));
        assert_eq!(d, QPoly::monomial(q.clone(), int(1) + q.clone(), 1));
        assert!(q_derivative(&QPoly::constant(q.clone(), int(5))).is_zero());
        assert_eq!(q_derivative(&QPoly::x_pow(q.clone(), 3)), QPoly::monomial(q.clone(), rat(7, 4), 2));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let q = rat(1, 2);
        let f = poly(&q, &[rat(3, 5), int(-2), int(0), rat(7, 3)]);
        let d = q_derivative(&f);
        for x in [rat(1, 3), int(2), rat(-5, 7)] {
            let xq = &x * &q;
            let quotient = (f.eval(&x) - f.eval(&xq)) / (&x - &xq);
            assert_eq!(d.eval(&x), quotient);
        }
    }

    #[test]
    fn integral_examples() {
        let q = rat(1, 2);
        assert_eq!(jackson_integral(&QPoly::x_pow(q.clone(), 2)).unwrap(), QPoly::monomial(q.clone(), rat(4, 7), 3));
        assert_eq!(jackson_integral(&QPoly::constant(q.clone(), int(1))).unwrap(), QPoly::x_pow(q.clone(), 1));
        assert!(matches!(jackson_integral(&QPoly::x_pow(int(-1), 1)), Err(Error::Pole(_))));
    }

    #[test]
    fn p_examples() {
        let q = rat(1, 2);
        let x = QPoly::x_pow(q.clone(), 1);
        assert_eq!(op_p(&x, 1).unwrap(), x);
        assert_eq!(op_p(&QPoly::x_pow(q.clone(), 2), 2).unwrap(), QPoly::monomial(q.clone(), rat(4, 9), 2));
        assert_eq!(op_p(&poly_one_minus_poch(1, &q), 1).unwrap(), x);
        assert_eq!(op_p(&QPoly::constant(q.clone(), int(3)), 0).unwrap(), QPoly::constant(q.clone(), int(3)));
        assert!(matches!(op_p(&QPoly::constant(q.clone(), int(3)), 1), Err(Error::Schema(_))));
    }

    #[test]
    fn t_examples() {
        let q = rat(1, 2);
        let x = QPoly::x_pow(q.clone(), 1);
        assert_eq!(op_t(&x, 1).unwrap(), x);
        assert_eq!(op_t(&QPoly::x_pow(q.clone(), 2), 1).unwrap(), poly(&q, &[int(0), int(1), rat(2, 3)]));
        let f = poly_one_minus_poch(2, &q);
        let expected = f.scale(&(int(1) / (int(1) + q.clone())));
        assert_eq!(op_t(&f, 1).unwrap(), expected);
    }

    #[test]
    fn eta_examples() {
        let q = rat(2, 3);
        assert_eq!(op_eta(&QPoly::x_pow(q.clone(), 2), 1), QPoly::monomial(q.clone(), rat(4, 9), 2));
        let f = poly(&q, &[int(1), int(1)]);
        assert_eq!(op_eta(&f, 2), poly(&q, &[int(1), rat(4, 9)]));
        assert_eq!(op_eta(&f, 0), f);
    }

    #[test]
    fn chain_examples() {
        let q = rat(1, 2);
        let x = QPoly::x_pow(q.clone(), 1);
        let chain = OperatorChain::eta_p_t(&[1]);
        assert_eq!(chain.steps, vec![Step::Eta(1), Step::P(1), Step::T(1)]);
        assert_eq!(apply_chain(&chain, &x).unwrap(), x.scale(&rat(1, 2)));
        assert_eq!(apply_chain(&OperatorChain::default(), &x).unwrap(), x);
    }

    #[test]
    fn chain_order_is_right_to_left() {
        let q = rat(1, 3);
        // P then eta differs from eta then P only through application order
        // when combined with T, so compare against manual composition.
        let f = QPoly::x_pow(q.clone(), 3);
        let chain = OperatorChain::new(vec![Step::T(1), Step::Eta(2), Step::P(1)]);
        let manual = op_t(&op_eta(&op_p(&f, 1).unwrap(), 2), 1).unwrap();
        assert_eq!(apply_chain(&chain, &f).unwrap(), manual);
    }

    #[test]
    fn one_minus_poch_examples() {
        let q = rat(1, 2);
        assert!(poly_one_minus_poch(0, &q).is_zero());
        assert_eq!(poly_one_minus_poch(1, &q), QPoly::x_pow(q.clone(), 1));
        assert_eq!(poly_one_minus_poch(2, &q), poly(&q, &[int(0), rat(3, 2), rat(-1, 2)]));
    }

    #[test]
    fn pochhammer_polynomial_agrees_with_scalar() {
        let q = rat(-2, 5);
        let a = rat(3, 7);
        let p = poly_pochhammer(&a, 5, &q);
        for x in [rat(1, 2), int(3), rat(-4, 9)] {
            assert_eq!(p.eval(&x), q_pochhammer(&(&a * &x), &q, 5));
        }
    }
}
