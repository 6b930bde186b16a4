//! Primitive q-objects: q-numbers, finite q-Pochhammer symbols, Gaussian
//! binomials and complete homogeneous symmetric functions.
//!
//! Everything here is generic over [`Field`] so the same code serves the
//! exact and the high-precision backends.

use crate::error::{Error, Result};
use crate::field::{ExactScalar, Field};

/// `[n] = 1 + q + ... + q^(n-1)`, which equals `(1 - q^n)/(1 - q)` away from
/// `q = 1`.
pub fn q_number<F: Field>(n: u32, q: &F) -> Result<F> {
    if (q.clone() - q.one_like()).is_zero_value() {
        return Err(Error::pole("q-number at q = 1"));
    }
    let mut acc = q.zero_like();
    let mut power = q.one_like();
    for _ in 0..n {
        acc = acc + power.clone();
        power = power * q.clone();
    }
    Ok(acc)
}

/// `(a; q)_n = (1 - a)(1 - aq)...(1 - aq^(n-1))`.
pub fn q_pochhammer<F: Field>(a: &F, q: &F, n: u32) -> F {
    let one = q.one_like();
    let mut acc = one.clone();
    let mut shifted = a.clone();
    for _ in 0..n {
        acc = acc * (one.clone() - shifted.clone());
        shifted = shifted * q.clone();
    }
    acc
}

/// Gaussian binomial `[n][n-1]...[n-r+1] / ([r][r-1]...[1])`.
///
/// Zero for `r > n`, one for `r = 0`. A vanishing q-number in the
/// denominator is a pole.
pub fn gauss_binomial<F: Field>(n: u32, r: u32, q: &F) -> Result<F> {
    if r > n {
        return Ok(q.zero_like());
    }
    let one = q.one_like();
    let mut num = one.clone();
    let mut den = one.clone();
    // Ratio of (1 - q^j) products; the (1 - q) normalisations cancel.
    for j in 0..r {
        num = num * (one.clone() - q.powi(i64::from(n - j))?);
        den = den * (one.clone() - q.powi(i64::from(j + 1))?);
    }
    if den.is_zero_value() {
        return Err(Error::pole(format!("Gaussian binomial [{n} choose {r}] has a vanishing q-number")));
    }
    num.div(&den)
}

/// `h_k(args)` for any field, with an explicit unit for the empty case.
pub fn complete_homogeneous_in<F: Field>(unit: &F, k: i64, args: &[F]) -> Result<F> {
    if k < 0 {
        return Err(Error::schema(format!("complete symmetric function of negative degree {k}")));
    }
    if k == 0 {
        return Ok(unit.one_like());
    }
    if args.is_empty() {
        return Err(Error::schema("complete symmetric function of positive degree needs arguments"));
    }
    let k = k as usize;
    // row[j] holds h_j of the arguments consumed so far.
    let mut row = vec![unit.zero_like(); k + 1];
    row[0] = unit.one_like();
    for a in args {
        for j in 1..=k {
            let prev = row[j - 1].clone();
            row[j] = row[j].clone() + a.clone() * prev;
        }
    }
    Ok(row.swap_remove(k))
}

pub fn complete_homogeneous(k: i64, args: &[ExactScalar]) -> Result<ExactScalar> {
    complete_homogeneous_in(&crate::field::int(1), k, args)
}

/// `h_k(kernel(lo), kernel(lo + 1), ..., kernel(hi))` over consecutive
/// integer exponents.
pub fn h_range_in<F, K>(unit: &F, k: i64, lo: i64, hi: i64, mut kernel: K) -> Result<F>
where
    F: Field,
    K: FnMut(i64) -> Result<F>,
{
    if lo > hi {
        return Err(Error::schema(format!("empty argument range {lo}..={hi}")));
    }
    if k == 0 {
        return Ok(unit.one_like());
    }
    let args = (lo..=hi).map(&mut kernel).collect::<Result<Vec<_>>>()?;
    complete_homogeneous_in(unit, k, &args)
}

pub fn h_range<K>(k: i64, lo: i64, hi: i64, kernel: K) -> Result<ExactScalar>
where
    K: FnMut(i64) -> Result<ExactScalar>,
{
    h_range_in(&crate::field::int(1), k, lo, hi, kernel)
}

/// `C(i, 2) = i(i - 1)/2`.
pub fn choose2(i: i64) -> i64 {
    i * (i - 1) / 2
}

/// `(-1)^e` as an integer.
pub fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, rat};

    #[test]
    fn q_number_values() {
        assert_eq!(q_number(0, &rat(5, 7)).unwrap(), int(0));
        assert_eq!(q_number(1, &rat(5, 7)).unwrap(), int(1));
        assert_eq!(q_number(3, &rat(1, 2)).unwrap(), rat(7, 4));
        assert!(matches!(q_number(2, &int(1)), Err(Error::Pole(_))));
    }

    #[test]
    fn q_number_matches_quotient_form() {
        let q = rat(-3, 7);
        for n in 0..8 {
            let quotient = (int(1) - q.powi(n).unwrap()) / (int(1) - q.clone());
            assert_eq!(q_number(n as u32, &q).unwrap(), quotient);
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(q_pochhammer(&rat(9, 4), &rat(1, 3), 0), int(1));
        assert_eq!(q_pochhammer(&int(2), &rat(1, 2), 2), int(0));
        // (-2)(-1/2)(1/4)
        assert_eq!(q_pochhammer(&int(3), &rat(1, 2), 3), rat(1, 4));
    }

    #[test]
    fn gauss_binomial_values() {
        assert_eq!(gauss_binomial(5, 0, &rat(2, 3)).unwrap(), int(1));
        assert_eq!(gauss_binomial(2, 3, &rat(2, 3)).unwrap(), int(0));
        // (1 + q^2)(1 + q + q^2) at q = 1/2
        assert_eq!(gauss_binomial(4, 2, &rat(1, 2)).unwrap(), rat(35, 16));
        assert!(matches!(gauss_binomial(3, 2, &int(-1)), Err(Error::Pole(_))));
        // [n choose r] at q = -1 is fine while no even q-number is needed.
        assert_eq!(gauss_binomial(3, 1, &int(-1)).unwrap(), int(1));
    }

    #[test]
    fn complete_homogeneous_values() {
        assert_eq!(complete_homogeneous(0, &[]).unwrap(), int(1));
        assert_eq!(complete_homogeneous(0, &[int(4)]).unwrap(), int(1));
        assert_eq!(complete_homogeneous(1, &[int(2), int(3)]).unwrap(), int(5));
        assert_eq!(complete_homogeneous(2, &[int(2), int(3)]).unwrap(), int(19));
        assert!(matches!(complete_homogeneous(-1, &[int(1)]), Err(Error::Schema(_))));
        assert!(matches!(complete_homogeneous(2, &[]), Err(Error::Schema(_))));
    }

    #[test]
    fn h_range_values() {
        let q = rat(1, 2);
        let kernel = |s: i64| -> Result<ExactScalar> {
            let qs = q.powi(s)?;
            qs.clone().div(&(int(1) - qs))
        };
        assert_eq!(h_range(0, 2, 5, kernel).unwrap(), int(1));
        assert_eq!(h_range(1, 2, 3, kernel).unwrap(), rat(10, 21));
        assert_eq!(h_range(1, 3, 3, kernel).unwrap(), rat(1, 7));
        assert!(h_range(1, 4, 3, kernel).is_err());
    }

    #[test]
    fn kernel_pole_propagates() {
        let err = h_range(1, 0, 2, |s| {
            let qs = int(1).powi(s)?;
            qs.clone().div(&(int(1) - qs))
        });
        assert!(matches!(err, Err(Error::Pole(_))));
    }
}
