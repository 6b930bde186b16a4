//! Oracles shared by the integration tests. Everything here is written
//! against plain coefficient vectors and textbook recurrences so that it
//! does not lean on the library's own helpers.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmultisum::operator::{
    jackson_integral, op_p, op_t, poly_one_minus_poch, q_derivative, QPoly,
};

pub type Q = BigRational;

pub fn r(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn pow(a: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(a.clone(), e as usize)
    } else {
        Q::one() / num_traits::pow(a.clone(), (-e) as usize)
    }
}

/// Coefficient vector, constant term first.
pub type Poly = Vec<Q>;

pub fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn padd(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    trim((0..n).map(|k| a.get(k).cloned().unwrap_or_default() + b.get(k).cloned().unwrap_or_default()).collect())
}

pub fn pscale(a: &Poly, c: &Q) -> Poly {
    trim(a.iter().map(|x| x * c).collect())
}

pub fn pmul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// `(c x; q)_n` as a polynomial in `x`.
pub fn poch_poly(c: &Q, q: &Q, n: i64) -> Poly {
    let mut acc = vec![Q::one()];
    for j in 0..n {
        acc = pmul(&acc, &vec![Q::one(), -(c * pow(q, j))]);
    }
    acc
}

pub fn one_minus(p: &Poly) -> Poly {
    padd(&vec![Q::one()], &pscale(p, &r(-1, 1)))
}

pub fn monomial(n: usize) -> Poly {
    let mut p = vec![Q::zero(); n + 1];
    p[n] = Q::one();
    p
}

pub fn coeffs(p: &QPoly) -> Poly {
    trim(p.coeffs().to_vec())
}

/// `h_k(args)` by the first-variable recursion.
pub fn h(k: i64, args: &[Q]) -> Q {
    if k == 0 {
        return Q::one();
    }
    if k < 0 || args.is_empty() {
        return Q::zero();
    }
    (0..=k).map(|j| pow(&args[0], j) * h(k - j, &args[1..])).sum()
}

/// Gaussian binomial by the Pascal recurrence.
pub fn gauss(n: i64, k: i64, q: &Q) -> Q {
    if k < 0 || k > n {
        return Q::zero();
    }
    if k == 0 || k == n {
        return Q::one();
    }
    gauss(n - 1, k - 1, q) + pow(q, k) * gauss(n - 1, k, q)
}

/// `[k] = 1 + q + ... + q^(k-1)`.
pub fn bracket(k: i64, q: &Q) -> Q {
    (0..k).map(|j| pow(q, j)).sum()
}

pub const BASES: [(i64, i64); 4] = [(1, 2), (-2, 3), (5, 3), (3, 7)];

fn fail(out: &mut Vec<String>, what: String) {
    out.push(what);
}

/// Closed-form checks for `P^m`, `T^m` on `x^n` and `1 - (x;q)_n`, with the
/// `m = 0` convention that the weighted sum collapses to its last operand.
pub fn operator_rule_failures(n_max: i64, m_max: i64) -> Vec<String> {
    let mut out = Vec::new();
    for (a, b) in BASES {
        let q = r(a, b);
        for n in 1..=n_max {
            for m in 0..=m_max {
                let xn = QPoly::x_pow(q.clone(), n as usize);
                let omp = poly_one_minus_poch(n as u32, &q);
                let omp_c = one_minus(&poch_poly(&Q::one(), &q, n));

                // P^m x^n = x^n / [n]^m
                let want = pscale(&monomial(n as usize), &(Q::one() / pow(&bracket(n, &q), m)));
                if op_p(&xn, m as u32).map(|p| coeffs(&p)).ok() != Some(want) {
                    fail(&mut out, format!("P^{m} x^{n} at q={q}"));
                }

                // P^m (1 - (x;q)_n)
                let want = if m == 0 {
                    omp_c.clone()
                } else {
                    let ker: Vec<Q> = (1..=n).map(|s| pow(&q, s) / (Q::one() - pow(&q, s))).collect();
                    let mut acc = Vec::new();
                    for i in 1..=n {
                        let w = ker[(i - 1) as usize].clone() * h(m - 1, &ker[(i - 1) as usize..]);
                        acc = padd(&acc, &pscale(&one_minus(&poch_poly(&pow(&q, -m), &q, i)), &w));
                    }
                    pscale(&acc, &pow(&(Q::one() - &q), m))
                };
                if op_p(&omp, m as u32).map(|p| coeffs(&p)).ok() != Some(want) {
                    fail(&mut out, format!("P^{m} (1-(x;q)_{n}) at q={q}"));
                }

                // T^m x^n
                let want = if m == 0 {
                    monomial(n as usize)
                } else {
                    let ker: Vec<Q> = (1..=n).map(|s| Q::one() / (Q::one() - pow(&q, s))).collect();
                    let mut acc = Vec::new();
                    for i in 1..=n {
                        let w = ker[(i - 1) as usize].clone() * h(m - 1, &ker[(i - 1) as usize..]);
                        acc = padd(&acc, &pscale(&monomial(i as usize), &w));
                    }
                    pscale(&acc, &pow(&(Q::one() - &q), m))
                };
                if op_t(&xn, m as u32).map(|p| coeffs(&p)).ok() != Some(want) {
                    fail(&mut out, format!("T^{m} x^{n} at q={q}"));
                }

                // T^m (1 - (x;q)_n) = (1 - (x;q)_n)/[n]^m
                let want = pscale(&omp_c, &(Q::one() / pow(&bracket(n, &q), m)));
                if op_t(&omp, m as u32).map(|p| coeffs(&p)).ok() != Some(want) {
                    fail(&mut out, format!("T^{m} (1-(x;q)_{n}) at q={q}"));
                }
            }
        }
    }
    out
}

pub fn random_poly(rng: &mut ChaCha8Rng, q: &Q, max_degree: usize) -> QPoly {
    let deg = rng.random_range(0..=max_degree);
    let cs = (0..=deg).map(|_| r(rng.random_range(-50..=50), rng.random_range(1..=50))).collect();
    QPoly::new(q.clone(), cs)
}

/// Both directions of the fundamental theorem on `count` random polynomials.
pub fn fundamental_failures(seed: u64, count: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for t in 0..count {
        let (a, b) = BASES[t % BASES.len()];
        let q = r(a, b);
        let f = random_poly(&mut rng, &q, 8);
        let df_int = q_derivative(&jackson_integral(&f).expect("no vanishing bracket"));
        if df_int != f {
            fail(&mut out, format!("D(I f) != f for {f}"));
        }
        let int_df = jackson_integral(&q_derivative(&f)).expect("no vanishing bracket");
        let mut shifted = coeffs(&f);
        if !shifted.is_empty() {
            shifted[0] = Q::zero();
        }
        if coeffs(&int_df) != trim(shifted) {
            fail(&mut out, format!("I(D f) != f - f(0) for {f}"));
        }
    }
    out
}

/// `(1 - (x;q)_n)/x` expansion and both q-binomial forms, as polynomials
/// and at random rational points.
pub fn binomial_failures(n_max: i64, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (a, b) in BASES {
        let q = r(a, b);
        for n in 0..=n_max {
            let omp = poly_one_minus_poch(n as u32, &q);
            let lhs = coeffs(&omp.div_x().expect("vanishes at 0"));
            let mut rhs = Vec::new();
            for i in 1..=n {
                rhs = padd(&rhs, &pscale(&poch_poly(&Q::one(), &q, i - 1), &pow(&q, i - 1)));
            }
            if lhs != rhs {
                fail(&mut out, format!("(1-(x;q)_{n})/x expansion at q={q}"));
            }

            let sign = |i: i64| if (i - 1) % 2 == 0 { Q::one() } else { -Q::one() };
            let mut direct = Vec::new();
            let mut inverted = Vec::new();
            for i in 1..=n {
                let g = gauss(n, i, &q) * sign(i);
                direct = padd(&direct, &pscale(&monomial(i as usize), &(g.clone() * pow(&q, i * (i - 1) / 2))));
                let e = i * (i + 1) / 2 - i * n;
                inverted = padd(&inverted, &pscale(&coeffs(&poly_one_minus_poch(i as u32, &q)), &(g * pow(&q, e))));
            }
            if coeffs(&omp) != direct {
                fail(&mut out, format!("q-binomial theorem n={n} q={q}"));
            }
            let xn = if n == 0 { Vec::new() } else { monomial(n as usize) };
            if n >= 1 && inverted != xn {
                fail(&mut out, format!("inverted q-binomial theorem n={n} q={q}"));
            }
            // Scalar form at a random rational point.
            let x = r(rng.random_range(-50..=50), rng.random_range(1..=50));
            let at = |p: &Poly| p.iter().rev().fold(Q::zero(), |acc, c| acc * &x + c);
            if omp.eval(&x) != at(&direct) || (n >= 1 && at(&inverted) != pow(&x, n)) {
                fail(&mut out, format!("scalar q-binomial forms n={n} q={q} x={x}"));
            }
        }
    }
    out
}
